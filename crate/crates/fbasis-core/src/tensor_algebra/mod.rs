//! Operators on the tensor product of L copies of C^N.
//!
//! Basis states are multi-indices `(i_1, ..., i_L)` with 1-based local states,
//! ordered big-endian: site 1 is the most significant digit. Operators are stored
//! as sparse rows and switch to dense storage once a quarter of the entries are nonzero.

mod operator;
mod permutation;
mod products;

pub use operator::{OperatorSnapshot, SnapshotEntry, TensorOperator, DROP_TOLERANCE};
pub use permutation::{minimal_decomposition, Permutation};
pub use products::{
    coincidence_diagonal, embed_r, permutation_operator, permutation_product, r_sigma, r_sigma_relabeled,
    sigma_factors, u1_generator, weyl, PairFactor,
};

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};

/// Shape of a tensor space: N local states on each of L sites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    n: usize,
    sites: usize,
}

impl Dims {
    /// Space of `sites` copies of C^n. Zero sites gives the one-dimensional scalar space.
    pub fn new(n: usize, sites: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::IndexOutOfRange {
                what: "rank",
                value: n,
                max: 9,
            });
        }
        let dims = Self { n, sites };
        n.checked_pow(sites as u32)
            .filter(|&d| d <= 1 << 24)
            .ok_or_else(|| Error::Unsupported(format!("tensor space {n}^{sites} is too large")))?;
        Ok(dims)
    }

    /// Local dimension N.
    pub fn n(self) -> usize {
        self.n
    }

    /// Number of sites L.
    pub fn sites(self) -> usize {
        self.sites
    }

    /// Total dimension N^L.
    pub fn dim(self) -> usize {
        self.n.pow(self.sites as u32)
    }

    /// Linear-index stride of a 1-based site.
    pub fn stride(self, site: usize) -> usize {
        self.n.pow((self.sites - site) as u32)
    }

    /// 1-based local state of `site` in the basis vector with linear index `idx`.
    pub fn digit(self, idx: usize, site: usize) -> usize {
        (idx / self.stride(site)) % self.n + 1
    }

    /// Checks that a 1-based site index is valid.
    pub fn check_site(self, site: usize) -> Result<()> {
        if (1..=self.sites).contains(&site) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "site",
                value: site,
                max: self.sites,
            })
        }
    }

    /// Checks that a 1-based local state is valid.
    pub fn check_state(self, state: usize) -> Result<()> {
        if (1..=self.n).contains(&state) {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                what: "state",
                value: state,
                max: self.n,
            })
        }
    }

    /// Space with the sites of `self` followed by those of `other`.
    pub fn concat(self, other: Dims) -> Result<Dims> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch {
                left: self.to_string(),
                right: other.to_string(),
            });
        }
        Dims::new(self.n, self.sites + other.sites)
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})^{}", self.n, self.sites)
    }
}

/// Basis label `(i_1, ..., i_L)` with 1-based local states.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    /// Validates digits against a space.
    pub fn new(digits: Vec<usize>, dims: Dims) -> Result<Self> {
        if digits.len() != dims.sites() {
            return Err(Error::DimensionMismatch {
                left: format!("multi-index of length {}", digits.len()),
                right: dims.to_string(),
            });
        }
        for &d in &digits {
            dims.check_state(d)?;
        }
        Ok(Self(digits))
    }

    /// Decodes a linear index.
    pub fn from_linear(idx: usize, dims: Dims) -> Self {
        Self((1..=dims.sites()).map(|s| dims.digit(idx, s)).collect())
    }

    /// Encodes to a linear index.
    pub fn linear(&self, dims: Dims) -> usize {
        self.0.iter().fold(0, |acc, &d| acc * dims.n() + d - 1)
    }

    /// Local states in site order.
    pub fn digits(&self) -> &[usize] {
        &self.0
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.0 {
            write!(f, "{d}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn multi_index_roundtrip() {
        let dims = Dims::new(3, 4).unwrap();
        for idx in 0..dims.dim() {
            let m = MultiIndex::from_linear(idx, dims);
            assert_eq!(m.linear(dims), idx);
        }
        assert_eq!(MultiIndex::from_linear(1, dims).to_string(), "1112");
        assert_eq!(MultiIndex::new(vec![3, 1, 1, 1], dims).unwrap().linear(dims), 54);
    }

    #[test]
    fn invalid_indices() {
        let dims = Dims::new(3, 2).unwrap();
        assert!(MultiIndex::new(vec![4, 1], dims).is_err());
        assert!(MultiIndex::new(vec![1], dims).is_err());
        assert!(dims.check_site(3).is_err());
        assert!(Dims::new(1, 2).is_err());
    }
}
