//! Size limits shared by every module that enumerates words or basis vectors.

use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const CAPACITY_ENV: &str = "FREECHAOS_CAPACITY";

/// Upper bounds on basis dimensions and sparse supports.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Capacity {
    /// Largest enumerated basis (Fock space or alternating words).
    pub max_basis: usize,
    /// Largest number of stored coefficients in a group algebra element or sparse vector.
    pub max_support: usize,
}

impl Default for Capacity {
    fn default() -> Self {
        Capacity {
            max_basis: 2_000_000,
            max_support: 2_000_000,
        }
    }
}

impl Capacity {
    pub fn uniform(limit: usize) -> Self {
        Capacity {
            max_basis: limit,
            max_support: limit,
        }
    }

    /// Default limits, overridden by `FREECHAOS_CAPACITY` when it holds a positive integer.
    pub fn global() -> Capacity {
        static GLOBAL: OnceLock<Capacity> = OnceLock::new();
        *GLOBAL.get_or_init(|| match std::env::var(CAPACITY_ENV) {
            Ok(v) => match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Capacity::uniform(n),
                _ => Capacity::default(),
            },
            Err(_) => Capacity::default(),
        })
    }

    pub fn check_basis(&self, what: &str, n: usize) -> Result<()> {
        if n > self.max_basis {
            Err(Error::capacity(what, n, self.max_basis))
        } else {
            Ok(())
        }
    }

    pub fn check_support(&self, what: &str, n: usize) -> Result<()> {
        if n > self.max_support {
            Err(Error::capacity(what, n, self.max_support))
        } else {
            Ok(())
        }
    }
}
