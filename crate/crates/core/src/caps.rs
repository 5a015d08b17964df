//! Resource caps keeping computations at desk scale.

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Caps {
    /// Rank of crystals read from input.
    pub max_rank: usize,
    /// Rank of derived crystals (exterior and tensor constructions).
    pub max_derived_rank: usize,
    /// Number of affine points enumerated in a scan, summed over degrees.
    pub max_points: u64,
    /// Number of family variables.
    pub max_vars: usize,
    /// Total degree of a family entry.
    pub max_entry_degree: u32,
    /// Bits allowed for `p^m`; at most 63.
    pub max_modulus_bits: u32,
    /// Vectors enumerated by the Artin–Schreier brute force per extension degree.
    pub max_enumeration: u64,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            max_rank: 8,
            max_derived_rank: 70,
            max_points: 1 << 20,
            max_vars: 2,
            max_entry_degree: 16,
            max_modulus_bits: 63,
            max_enumeration: 1 << 16,
        }
    }
}

impl Caps {
    /// Parse overrides such as `rank=6,points=4096`. Keys: `rank`,
    /// `derived_rank`, `points`, `vars`, `degree`, `modulus_bits`,
    /// `enumeration`.
    pub fn with_overrides(mut self, spec: &str) -> Result<Caps> {
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("cap override `{part}` is not key=value")))?;
            let n: u64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("cap `{key}` needs a positive integer")))?;
            if n == 0 {
                return Err(Error::InvalidInput(format!("cap `{key}` must be positive")));
            }
            match key.trim() {
                "rank" => self.max_rank = n as usize,
                "derived_rank" => self.max_derived_rank = n as usize,
                "points" => self.max_points = n,
                "vars" => self.max_vars = n as usize,
                "degree" => self.max_entry_degree = n as u32,
                "modulus_bits" => self.max_modulus_bits = (n as u32).min(63),
                "enumeration" => self.max_enumeration = n,
                other => return Err(Error::InvalidInput(format!("unknown cap `{other}`"))),
            }
        }
        Ok(self)
    }

    /// Check `p^m` against the modulus-bit cap.
    pub fn check_modulus(&self, p: u64, m: u32) -> Result<()> {
        let bits = (p as f64).log2() * m as f64;
        if bits >= self.max_modulus_bits as f64 {
            return Err(Error::PrecisionOverflow { p, m });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_parse() {
        let c = Caps::default().with_overrides("rank=4, points=100").unwrap();
        assert_eq!(c.max_rank, 4);
        assert_eq!(c.max_points, 100);
        assert!(Caps::default().with_overrides("rank=0").is_err());
        assert!(Caps::default().with_overrides("bogus=3").is_err());
        assert!(Caps::default().with_overrides("rank").is_err());
    }

    #[test]
    fn modulus_cap() {
        let c = Caps::default();
        assert!(c.check_modulus(2, 62).is_ok());
        assert!(c.check_modulus(2, 63).is_err());
        let tight = c.with_overrides("modulus_bits=10").unwrap();
        assert!(tight.check_modulus(3, 7).is_err());
        assert!(tight.check_modulus(3, 6).is_ok());
    }
}
