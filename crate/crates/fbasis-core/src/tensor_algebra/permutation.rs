use itertools::Itertools;

use crate::error::{Error, Result};

/// Permutation of `1..=L` together with a reduced word in adjacent transpositions.
///
/// With `factors = [α_1, ..., α_p]` the permutation equals `s_{α_p} ∘ ... ∘ s_{α_1}`,
/// where `s_α` swaps `α` and `α + 1`. The word has length equal to the number of inversions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
    factors: Vec<usize>,
}

/// Decomposes a permutation, given by its images `σ(1), ..., σ(L)`, into adjacent transpositions.
///
/// The word is read off from a bubble sort of the image list: each swap of positions
/// `α, α + 1` emits `α`.
pub fn minimal_decomposition(images: &[usize]) -> Result<Permutation> {
    let l = images.len();
    let mut seen = vec![false; l];
    for &i in images {
        if i == 0 || i > l || std::mem::replace(&mut seen[i - 1], true) {
            return Err(Error::NotABijection(images.to_vec()));
        }
    }
    let mut work = images.to_vec();
    let mut factors = Vec::new();
    let mut sorted = false;
    while !sorted {
        sorted = true;
        for a in 1..l {
            if work[a - 1] > work[a] {
                work.swap(a - 1, a);
                factors.push(a);
                sorted = false;
            }
        }
    }
    Ok(Permutation {
        images: images.to_vec(),
        factors,
    })
}

impl Permutation {
    /// Identity on `1..=l`.
    pub fn identity(l: usize) -> Self {
        Self {
            images: (1..=l).collect(),
            factors: Vec::new(),
        }
    }

    /// All permutations of `1..=l` in lexicographic order of their image lists.
    pub fn all(l: usize) -> Vec<Self> {
        (1..=l)
            .permutations(l)
            .map(|im| minimal_decomposition(&im).expect("itertools yields bijections"))
            .collect()
    }

    /// Images `σ(1), ..., σ(L)`.
    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// Reduced word `[α_1, ..., α_p]`.
    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    /// Number of points L.
    pub fn len(&self) -> usize {
        self.images.len()
    }

    /// Whether the permutation acts on zero points.
    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    /// Image of a 1-based point.
    pub fn apply(&self, i: usize) -> usize {
        self.images[i - 1]
    }

    /// Number of inversions, equal to the word length.
    pub fn inversions(&self) -> usize {
        self.factors.len()
    }

    /// Inverse permutation.
    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.len()];
        for (i, &s) in self.images.iter().enumerate() {
            inv[s - 1] = i + 1;
        }
        minimal_decomposition(&inv).expect("inverse of a bijection")
    }

    /// Composition `self ∘ other`, mapping `i` to `self(other(i))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.len() != other.len() {
            return Err(Error::DimensionMismatch {
                left: format!("permutation of {}", self.len()),
                right: format!("permutation of {}", other.len()),
            });
        }
        let im: Vec<usize> = other.images.iter().map(|&i| self.apply(i)).collect();
        minimal_decomposition(&im)
    }

    /// Rebuilds the images from the word `s_{α_p} ∘ ... ∘ s_{α_1}`.
    pub fn recompose(l: usize, factors: &[usize]) -> Result<Vec<usize>> {
        let mut images: Vec<usize> = (1..=l).collect();
        for &a in factors {
            if a == 0 || a >= l {
                return Err(Error::IndexOutOfRange {
                    what: "transposition",
                    value: a,
                    max: l.saturating_sub(1),
                });
            }
            for v in images.iter_mut() {
                if *v == a {
                    *v = a + 1;
                } else if *v == a + 1 {
                    *v = a;
                }
            }
        }
        Ok(images)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn examples() {
        let s = minimal_decomposition(&[2, 1]).unwrap();
        assert_eq!(s.factors(), &[1]);
        let s = minimal_decomposition(&[3, 1, 2]).unwrap();
        assert_eq!(s.inversions(), 2);
        assert_eq!(Permutation::recompose(3, s.factors()).unwrap(), vec![3, 1, 2]);
        assert!(minimal_decomposition(&[1, 1, 2]).is_err());
        assert!(minimal_decomposition(&[0, 1]).is_err());
        assert_eq!(minimal_decomposition(&[]).unwrap().inversions(), 0);
    }

    #[test]
    fn every_permutation_recomposes() {
        for l in 1..=5 {
            let all = Permutation::all(l);
            assert_eq!(all.len(), (1..=l).product::<usize>());
            for s in all {
                let inv = (0..l)
                    .flat_map(|i| (i + 1..l).map(move |j| (i, j)))
                    .filter(|&(i, j)| s.images()[i] > s.images()[j])
                    .count();
                assert_eq!(s.inversions(), inv);
                assert_eq!(Permutation::recompose(l, s.factors()).unwrap(), s.images());
                assert_eq!(s.compose(&s.inverse()).unwrap(), Permutation::identity(l));
            }
        }
    }
}
