//! Reduced words in the free group F_n, stored as syllables (generator, nonzero exponent).

use std::fmt;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct GroupWord {
    syllables: Vec<(u32, i32)>,
}

impl GroupWord {
    pub fn identity() -> Self {
        GroupWord::default()
    }

    pub fn generator(k: u32) -> Self {
        GroupWord::from_syllables(&[(k, 1)])
    }

    /// Reduces an arbitrary syllable list (merging equal neighbours, dropping zero exponents).
    pub fn from_syllables(s: &[(u32, i32)]) -> Self {
        let mut out: Vec<(u32, i32)> = Vec::with_capacity(s.len());
        for &(g, e) in s {
            push_syllable(&mut out, g, e);
        }
        GroupWord { syllables: out }
    }

    /// Letters ±k for g_k^{±1}.
    pub fn from_letters(letters: &[i32]) -> Self {
        let s: Vec<(u32, i32)> = letters
            .iter()
            .map(|&l| (l.unsigned_abs(), l.signum()))
            .collect();
        GroupWord::from_syllables(&s)
    }

    pub fn syllables(&self) -> &[(u32, i32)] {
        &self.syllables
    }

    pub fn is_identity(&self) -> bool {
        self.syllables.is_empty()
    }

    /// Number of syllables.
    pub fn block_length(&self) -> usize {
        self.syllables.len()
    }

    /// Number of letters g_k^{±1}.
    pub fn letter_length(&self) -> usize {
        self.syllables
            .iter()
            .map(|s| s.1.unsigned_abs() as usize)
            .sum()
    }

    pub fn first_generator(&self) -> Option<u32> {
        self.syllables.first().map(|s| s.0)
    }

    pub fn last_generator(&self) -> Option<u32> {
        self.syllables.last().map(|s| s.0)
    }

    pub fn max_generator(&self) -> u32 {
        self.syllables.iter().map(|s| s.0).max().unwrap_or(0)
    }

    pub fn inverse(&self) -> Self {
        GroupWord {
            syllables: self.syllables.iter().rev().map(|&(g, e)| (g, -e)).collect(),
        }
    }

    pub fn mul(&self, other: &GroupWord) -> GroupWord {
        let mut out = Vec::with_capacity(self.syllables.len() + other.syllables.len());
        out.extend_from_slice(&self.syllables);
        let mut rest = other.syllables.iter();
        // Only the junction can cancel; once a syllable survives the rest is copied.
        for &(g, e) in rest.by_ref() {
            if !push_syllable(&mut out, g, e) {
                break;
            }
        }
        out.extend(rest.copied());
        GroupWord { syllables: out }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim();
        if t.is_empty() || t == "e" || t == "1" {
            return Ok(GroupWord::identity());
        }
        let mut syl = Vec::new();
        for part in t.split('*') {
            let part = part.trim();
            let body = part
                .strip_prefix('g')
                .ok_or_else(|| Error::Parse(format!("expected g<k> in '{part}'")))?;
            let (idx, exp) = match body.split_once('^') {
                Some((i, e)) => (i, e.trim().trim_start_matches('(').trim_end_matches(')')),
                None => (body, "1"),
            };
            let g: u32 = idx
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad generator index in '{part}'")))?;
            if g == 0 {
                return Err(Error::Parse("generators are numbered from 1".into()));
            }
            let e: i32 = exp
                .parse()
                .map_err(|_| Error::Parse(format!("bad exponent in '{part}'")))?;
            syl.push((g, e));
        }
        Ok(GroupWord::from_syllables(&syl))
    }
}

/// Appends a syllable; returns true when it cancelled completely against the end.
fn push_syllable(out: &mut Vec<(u32, i32)>, g: u32, e: i32) -> bool {
    if e == 0 {
        return true;
    }
    if let Some(last) = out.last_mut() {
        if last.0 == g {
            last.1 += e;
            if last.1 == 0 {
                out.pop();
                return true;
            }
            return false;
        }
    }
    out.push((g, e));
    false
}

impl fmt::Display for GroupWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.syllables.is_empty() {
            return write!(f, "e");
        }
        for (i, &(g, e)) in self.syllables.iter().enumerate() {
            if i > 0 {
                write!(f, "*")?;
            }
            if e == 1 {
                write!(f, "g{g}")?;
            } else {
                write!(f, "g{g}^{e}")?;
            }
        }
        Ok(())
    }
}

/// All reduced words of letter length exactly `len` in F_n, in lexicographic letter order.
pub fn words_of_letter_length(n: u32, len: usize) -> Vec<GroupWord> {
    let letters: Vec<i32> = (1..=n as i32).flat_map(|k| [k, -k]).collect();
    let mut cur: Vec<Vec<i32>> = vec![vec![]];
    for _ in 0..len {
        let mut next = Vec::with_capacity(cur.len() * letters.len());
        for w in &cur {
            for &l in &letters {
                if w.last() == Some(&-l) {
                    continue;
                }
                let mut v = w.clone();
                v.push(l);
                next.push(v);
            }
        }
        cur = next;
    }
    cur.iter().map(|w| GroupWord::from_letters(w)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduction_and_inverse() {
        let w = GroupWord::from_letters(&[1, 2, -2, 1]);
        assert_eq!(w.syllables(), &[(1, 2)]);
        let u = GroupWord::parse("g1*g2^-1*g1^2").unwrap();
        assert_eq!(u.block_length(), 3);
        assert_eq!(u.letter_length(), 4);
        assert!(u.mul(&u.inverse()).is_identity());
        assert_eq!(u.to_string(), "g1*g2^-1*g1^2");
    }

    #[test]
    fn junction_cancellation_cascades() {
        let a = GroupWord::parse("g1*g2*g3").unwrap();
        let b = GroupWord::parse("g3^-1*g2^-1*g1").unwrap();
        assert_eq!(a.mul(&b), GroupWord::parse("g1^2").unwrap());
    }

    #[test]
    fn counts_of_reduced_words() {
        assert_eq!(words_of_letter_length(2, 2).len(), 12);
        assert_eq!(words_of_letter_length(3, 2).len(), 30);
        assert_eq!(words_of_letter_length(2, 0).len(), 1);
    }
}
