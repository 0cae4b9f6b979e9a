//! Block-length projections, first/last-syllable projections and the freeness identities they satisfy.

use num_traits::Zero;

use super::element::GroupAlgElement;
use super::word::GroupWord;
use crate::error::{ensure, Error, Result};
use crate::scalar::{ExactC, Scalar};

pub fn reduce(letters: &[i32]) -> GroupWord {
    GroupWord::from_letters(letters)
}

/// Π(d): words of block length d.
pub fn length_projection<S: Scalar>(x: &GroupAlgElement<S>, d: usize) -> GroupAlgElement<S> {
    x.filter(|w| w.block_length() == d)
}

/// L_k: words whose first syllable is a power of g_k.
pub fn left_projection<S: Scalar>(x: &GroupAlgElement<S>, k: u32) -> GroupAlgElement<S> {
    x.filter(|w| w.first_generator() == Some(k))
}

/// R_k: words whose last syllable is a power of g_k.
pub fn right_projection<S: Scalar>(x: &GroupAlgElement<S>, k: u32) -> GroupAlgElement<S> {
    x.filter(|w| w.last_generator() == Some(k))
}

/// Q_k = L_k ∘ R_k.
pub fn popa_projection<S: Scalar>(x: &GroupAlgElement<S>, k: u32) -> GroupAlgElement<S> {
    x.filter(|w| w.first_generator() == Some(k) && w.last_generator() == Some(k))
}

pub fn map_l<S: Scalar>(x: &GroupAlgElement<S>, k: u32) -> GroupAlgElement<S> {
    left_projection(x, k)
}

pub fn map_r<S: Scalar>(x: &GroupAlgElement<S>, k: u32) -> GroupAlgElement<S> {
    right_projection(x, k)
}

pub fn map_q<S: Scalar>(x: &GroupAlgElement<S>, k: u32) -> GroupAlgElement<S> {
    popa_projection(x, k)
}

/// x − R_k(x)
pub fn complement_right<S: Scalar>(x: &GroupAlgElement<S>, k: u32) -> GroupAlgElement<S> {
    x.filter(|w| w.last_generator() != Some(k))
}

/// x − L_k(x)
pub fn complement_left<S: Scalar>(x: &GroupAlgElement<S>, k: u32) -> GroupAlgElement<S> {
    x.filter(|w| w.first_generator() != Some(k))
}

pub fn is_homogeneous<S: Scalar>(x: &GroupAlgElement<S>, d: usize) -> bool {
    x.terms().all(|(w, _)| w.block_length() == d)
}

/// L_i X L_j h − δ_ij τ(X) L_j h with X = ((1−R_i)a_i)* ((1−R_j)a_j), exactly.
pub fn left_bubble_defect(
    a_i: &GroupAlgElement<ExactC>,
    a_j: &GroupAlgElement<ExactC>,
    i: u32,
    j: u32,
    h: &GroupAlgElement<ExactC>,
) -> Result<GroupAlgElement<ExactC>> {
    let x = complement_right(a_i, i)
        .adjoint()
        .convolve(&complement_right(a_j, j))?;
    let lhs = left_projection(&x.convolve(&left_projection(h, j))?, i);
    let rhs = if i == j {
        left_projection(h, j).scale(&x.trace())
    } else {
        GroupAlgElement::zero()
    };
    Ok(lhs.sub(&rhs))
}

/// (1−L_i) R_i(a_i)* R_j(a_j) (1−L_j) h − δ_ij τ(R_i(a_i)* R_j(a_j)) (1−L_j) h, exactly.
pub fn right_bubble_defect(
    a_i: &GroupAlgElement<ExactC>,
    a_j: &GroupAlgElement<ExactC>,
    i: u32,
    j: u32,
    h: &GroupAlgElement<ExactC>,
) -> Result<GroupAlgElement<ExactC>> {
    let x = right_projection(a_i, i)
        .adjoint()
        .convolve(&right_projection(a_j, j))?;
    let hj = complement_left(h, j);
    let lhs = complement_left(&x.convolve(&hj)?, i);
    let rhs = if i == j {
        hj.scale(&x.trace())
    } else {
        GroupAlgElement::zero()
    };
    Ok(lhs.sub(&rhs))
}

/// Both bubble identities for one pair; requires a_i, a_j homogeneous of the same block length.
pub fn bubble_identities_hold(
    a_i: &GroupAlgElement<ExactC>,
    a_j: &GroupAlgElement<ExactC>,
    i: u32,
    j: u32,
    h: &GroupAlgElement<ExactC>,
) -> Result<bool> {
    let d = a_i.max_block_length();
    ensure(is_homogeneous(a_i, d) && is_homogeneous(a_j, d), || {
        "bubble identities need homogeneous inputs of equal block length".into()
    })?;
    Ok(left_bubble_defect(a_i, a_j, i, j, h)?.is_zero()
        && right_bubble_defect(a_i, a_j, i, j, h)?.is_zero())
}

/// The non-homogeneous example a = λ(g2) + λ(g2 g1 g2), h = λ(g1 g2): returns the residual
/// L_1 a*a L_1 h − L_1 E(a*a) L_1 h.
pub fn dykema_residual() -> Result<GroupAlgElement<ExactC>> {
    let one = ExactC::from_i64(1);
    let a = GroupAlgElement::from_terms([
        (GroupWord::parse("g2")?, one.clone()),
        (GroupWord::parse("g2*g1*g2")?, one.clone()),
    ]);
    let h = GroupAlgElement::monomial(GroupWord::parse("g1*g2")?, one);
    let aa = a.adjoint().convolve(&a)?;
    let l1h = left_projection(&h, 1);
    let lhs = left_projection(&aa.convolve(&l1h)?, 1);
    let rhs = l1h.scale(&aa.trace());
    Ok(lhs.sub(&rhs))
}

/// Q_1 applied to λ((g1 g2)^k g1), k ∈ ℤ.
pub fn popa_example(k: i64) -> GroupAlgElement<ExactC> {
    let mut letters = Vec::new();
    let block: [i32; 2] = if k >= 0 { [1, 2] } else { [-2, -1] };
    for _ in 0..k.unsigned_abs() {
        letters.extend_from_slice(&block);
    }
    letters.push(1);
    let x = GroupAlgElement::monomial(GroupWord::from_letters(&letters), ExactC::from_i64(1));
    popa_projection(&x, 1)
}

/// Parses `coef*word + coef*word - word ...`, e.g. `2*g1*g2^-1 + (1+2i)*g3 - e`.
/// Coefficients may be integers, decimals, fractions a/b, `i`, or parenthesised `(a+bi)`.
pub fn parse_element(s: &str) -> Result<GroupAlgElement<ExactC>> {
    let mut out = GroupAlgElement::zero();
    for (sign, term) in split_terms(s)? {
        let term = term.trim();
        if term.is_empty() {
            return Err(Error::Parse(format!("empty term in '{s}'")));
        }
        let (coef, word) = split_coef(term)?;
        let c = if sign < 0 { -coef } else { coef };
        out.add_term(GroupWord::parse(word)?, c);
    }
    Ok(out)
}

fn split_terms(s: &str) -> Result<Vec<(i32, String)>> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut cur = String::new();
    let mut sign = 1;
    let chars: Vec<char> = s.chars().collect();
    for (idx, &ch) in chars.iter().enumerate() {
        match ch {
            '(' => {
                depth += 1;
                cur.push(ch);
            }
            ')' => {
                depth -= 1;
                if depth < 0 {
                    return Err(Error::Parse(format!("unbalanced parentheses in '{s}'")));
                }
                cur.push(ch);
            }
            '+' | '-' if depth == 0 => {
                let prev = chars[..idx].iter().rev().find(|c| !c.is_whitespace());
                if matches!(prev, Some('^')) {
                    cur.push(ch);
                    continue;
                }
                if !cur.trim().is_empty() {
                    out.push((sign, std::mem::take(&mut cur)));
                } else {
                    cur.clear();
                }
                sign = if ch == '-' { -1 } else { 1 };
            }
            _ => cur.push(ch),
        }
    }
    if depth != 0 {
        return Err(Error::Parse(format!("unbalanced parentheses in '{s}'")));
    }
    if !cur.trim().is_empty() {
        out.push((sign, cur));
    }
    Ok(out)
}

fn split_coef(term: &str) -> Result<(ExactC, &str)> {
    let starts_word = |t: &str| t.starts_with('g') || t == "e";
    if starts_word(term) {
        return Ok((ExactC::from_i64(1), term));
    }
    let (c, rest) = if term.starts_with('(') {
        let close = term
            .find(')')
            .ok_or_else(|| Error::Parse(format!("missing ')' in '{term}'")))?;
        (parse_complex(&term[1..close])?, term[close + 1..].trim())
    } else {
        let end = term.find('*').unwrap_or(term.len());
        (parse_complex(&term[..end])?, term[end..].trim())
    };
    let rest = rest.strip_prefix('*').map(str::trim).unwrap_or(rest);
    let word = if rest.is_empty() { "e" } else { rest };
    Ok((c, word))
}

fn parse_rational(s: &str) -> Result<num_rational::BigRational> {
    use num_bigint::BigInt;
    use num_rational::BigRational;
    let s = s.trim();
    let err = || Error::Parse(format!("bad number '{s}'"));
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| err())?;
        let d: BigInt = b.trim().parse().map_err(|_| err())?;
        if d.is_zero() {
            return Err(err());
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((ip, fp)) = s.split_once('.') {
        let neg = ip.trim_start().starts_with('-');
        let ipn: BigInt = if ip.is_empty() || ip == "-" || ip == "+" {
            BigInt::zero()
        } else {
            ip.parse().map_err(|_| err())?
        };
        if !fp.chars().all(|c| c.is_ascii_digit()) {
            return Err(err());
        }
        let den = BigInt::from(10u32).pow(fp.len() as u32);
        let fpn: BigInt = if fp.is_empty() {
            BigInt::zero()
        } else {
            fp.parse().map_err(|_| err())?
        };
        let frac = BigRational::new(fpn, den);
        let whole = BigRational::from_integer(ipn);
        return Ok(if neg { whole - frac } else { whole + frac });
    }
    let n: BigInt = s.parse().map_err(|_| err())?;
    Ok(BigRational::from_integer(n))
}

fn parse_complex(s: &str) -> Result<ExactC> {
    use num_rational::BigRational;
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    if t.is_empty() {
        return Err(Error::Parse("empty coefficient".into()));
    }
    // Split at the last top-level sign that is not leading.
    let split = t
        .char_indices()
        .skip(1)
        .filter(|(_, c)| *c == '+' || *c == '-')
        .map(|(i, _)| i)
        .last();
    let (re_part, im_part) = match split {
        Some(i) if t.ends_with('i') => (Some(&t[..i]), Some(&t[i..])),
        _ if t.ends_with('i') => (None, Some(t.as_str())),
        _ => (Some(t.as_str()), None),
    };
    let re = match re_part {
        Some(r) => parse_rational(r)?,
        None => BigRational::zero(),
    };
    let im = match im_part {
        Some(m) => {
            let body = &m[..m.len() - 1];
            match body {
                "" | "+" => BigRational::from_integer(1.into()),
                "-" => BigRational::from_integer((-1).into()),
                b => parse_rational(b)?,
            }
        }
        None => BigRational::zero(),
    };
    Ok(ExactC::new(re, im))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{exact_gaussian, exact_rational};

    #[test]
    fn parses_elements() {
        let x = parse_element("2*g1*g2^-1 + (1+2i)*g3 - e + 1/2*g1").unwrap();
        assert_eq!(
            x.coeff(&GroupWord::parse("g1*g2^-1").unwrap()),
            exact_gaussian(2, 0)
        );
        assert_eq!(
            x.coeff(&GroupWord::parse("g3").unwrap()),
            exact_gaussian(1, 2)
        );
        assert_eq!(x.trace(), exact_gaussian(-1, 0));
        assert_eq!(x.coeff(&GroupWord::generator(1)), exact_rational(1, 2));
        let y = parse_element("0.25*g1^-2 - i*g2").unwrap();
        assert_eq!(
            y.coeff(&GroupWord::parse("g1^-2").unwrap()),
            exact_rational(1, 4)
        );
        assert_eq!(y.coeff(&GroupWord::generator(2)), exact_gaussian(0, -1));
    }

    #[test]
    fn left_projections_sum_to_centered_part() {
        let x = parse_element("3 + g1*g2 + 2*g2^-1 + g3^2*g1 - g1^-1").unwrap();
        let mut s = GroupAlgElement::zero();
        for k in 1..=3 {
            s = s.add(&left_projection(&x, k));
        }
        let centered = x.sub(&GroupAlgElement::unit().scale(&x.trace()));
        assert_eq!(s, centered);
    }

    #[test]
    fn dykema_example() {
        let r = dykema_residual().unwrap();
        let expect = GroupAlgElement::monomial(
            GroupWord::parse("g1*g2*g1*g2").unwrap(),
            ExactC::from_i64(1),
        );
        assert_eq!(r, expect);
    }

    #[test]
    fn popa_examples() {
        for k in 1..=4 {
            let w = popa_example(k);
            assert_eq!(w.support_len(), 1);
            assert_eq!(w.max_block_length(), 2 * k as usize + 1);
            assert!(popa_example(-k).is_zero());
        }
        // k = 0 leaves λ(g1), which starts and ends in g1.
        assert_eq!(
            popa_example(0),
            GroupAlgElement::monomial(GroupWord::generator(1), ExactC::from_i64(1))
        );
        let x = GroupAlgElement::monomial(GroupWord::parse("g1*g2").unwrap(), ExactC::from_i64(1));
        assert!(popa_projection(&x, 1).is_zero());
    }

    #[test]
    fn bubble_identity_small_case() {
        let a1 = parse_element("g1*g2 + 2*g3*g1^-1").unwrap();
        let a2 = parse_element("g2^2*g3 - g1*g3").unwrap();
        let h = parse_element("g2*g1 + g1^3 - g3*g2*g1").unwrap();
        for (i, j) in [(1, 1), (1, 2), (2, 3), (3, 3)] {
            assert!(bubble_identities_hold(&a1, &a2, i, j, &h).unwrap());
        }
    }
}
