//! Reduced words packed into a u128, a fixed number of bits per letter, for the moment chain
//! of the operator-norm estimate. Letter g_k has code 2k−1 and g_k⁻¹ has code 2k; letter i
//! of the word sits at bits [b·i, b·i + b), so the highest nonzero code marks the length.

use rustc_hash::FxHashMap;

use super::element::GroupAlgElement;
use crate::capacity::Capacity;
use crate::error::{Error, Result};
use crate::scalar::C64;

#[derive(Debug, Clone, Copy)]
pub(crate) struct Alphabet {
    bits: u32,
    mask: u128,
}

impl Alphabet {
    /// Alphabet for generators 1..=n, if words of `max_letters` letters fit.
    pub(crate) fn new(n: u32, max_letters: usize) -> Option<Self> {
        let bits = 32 - (2 * n.max(1)).leading_zeros();
        if max_letters.checked_mul(bits as usize)? > 128 {
            return None;
        }
        Some(Alphabet {
            bits,
            mask: (1u128 << bits) - 1,
        })
    }

    fn len(&self, w: u128) -> u32 {
        (128 - w.leading_zeros()).div_ceil(self.bits)
    }

    fn inverse_code(c: u128) -> u128 {
        if c % 2 == 1 {
            c + 1
        } else {
            c - 1
        }
    }

    pub(crate) fn mul(&self, u: u128, mut v: u128) -> u128 {
        let b = self.bits;
        let mut u = u;
        let mut lu = self.len(u);
        while lu > 0 && v != 0 {
            let shift = b * (lu - 1);
            let last = (u >> shift) & self.mask;
            if last != Self::inverse_code(v & self.mask) {
                break;
            }
            u &= !(self.mask << shift);
            lu -= 1;
            v >>= b;
        }
        if v == 0 {
            u
        } else {
            u | (v << (b * lu))
        }
    }
}

/// Terms sorted by key.
#[derive(Debug, Clone)]
pub(crate) struct PackedElement {
    pub(crate) terms: Vec<(u128, C64)>,
}

impl PackedElement {
    pub(crate) fn unit() -> Self {
        PackedElement {
            terms: vec![(0, C64::new(1.0, 0.0))],
        }
    }

    pub(crate) fn pack(x: &GroupAlgElement<C64>, a: &Alphabet) -> Self {
        let mut terms: Vec<(u128, C64)> = x
            .terms()
            .map(|(w, c)| {
                let mut key = 0u128;
                let mut i = 0;
                for &(g, e) in w.syllables() {
                    let code = if e > 0 {
                        2 * g as u128 - 1
                    } else {
                        2 * g as u128
                    };
                    for _ in 0..e.unsigned_abs() {
                        key |= code << (a.bits * i);
                        i += 1;
                    }
                }
                (key, *c)
            })
            .collect();
        terms.sort_unstable_by_key(|t| t.0);
        PackedElement { terms }
    }

    pub(crate) fn len(&self) -> usize {
        self.terms.len()
    }

    pub(crate) fn l2_norm_sqr(&self) -> f64 {
        self.terms.iter().map(|(_, c)| c.norm_sqr()).sum()
    }

    pub(crate) fn convolve(&self, other: &Self, a: &Alphabet, cap: Capacity) -> Result<Self> {
        let mut out: FxHashMap<u128, C64> = FxHashMap::default();
        for &(u, x) in &self.terms {
            for &(v, y) in &other.terms {
                let w = a.mul(u, v);
                match out.get_mut(&w) {
                    Some(z) => *z += x * y,
                    None => {
                        out.insert(w, x * y);
                        if out.len() > cap.max_support {
                            return Err(Error::capacity(
                                "group algebra product support",
                                out.len(),
                                cap.max_support,
                            ));
                        }
                    }
                }
            }
        }
        let mut terms: Vec<(u128, C64)> = out
            .into_iter()
            .filter(|(_, c)| *c != C64::new(0.0, 0.0))
            .collect();
        terms.sort_unstable_by_key(|t| t.0);
        Ok(PackedElement { terms })
    }
}
