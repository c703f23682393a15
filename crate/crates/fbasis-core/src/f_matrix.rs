//! Factorizing F-matrices.
//!
//! The unnormalized matrix `𝓕 = Σ_σ Σ_α Π_i e^(α_i α_i)_{σ(i)} R^σ` keeps, for every basis
//! row `α`, the row of `R^σ` for the unique `σ` that orders `α` stably. The diagonal
//! normalization `N = Π_{i<j} (1 + Σ_k (√a_k(ξi,ξj) - 1) e^(kk)_i e^(kk)_j)` turns it into
//! `F = N 𝓕`, which satisfies `F_{σ(1..L)} R^σ = F` for every permutation `σ`.
//!
//! Operators `X_{σ(1..L)}` at relabelled sites are built by passing `order = σ(1..L)`:
//! position `p` then carries site `order[p]` with its own rapidity.

use itertools::Itertools;
use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::relation_checks::ResidualReport;
use crate::tensor_algebra::{
    coincidence_diagonal, minimal_decomposition, permutation_product, r_sigma, r_sigma_relabeled, sigma_factors, Dims,
    PairFactor, Permutation, TensorOperator,
};
use crate::weights::{WeightKind, WeightTable};

/// Relative size below which a diagonal entry counts as zero during inversion.
const DIAGONAL_FLOOR: f64 = 1e-12;

/// Whether the multi-index `α` contributes to the `σ` term of `𝓕`.
///
/// Requires `α_{σ(i)} ≤ α_{σ(i+1)}` when `σ(i) < σ(i+1)` and strict inequality otherwise.
pub fn admissible(sigma: &Permutation, alpha: &[usize]) -> bool {
    sigma.images().windows(2).all(|w| {
        let (x, y) = (alpha[w[0] - 1], alpha[w[1] - 1]);
        if w[0] < w[1] {
            x <= y
        } else {
            x < y
        }
    })
}

/// The unique permutation admitting `α`: positions stably sorted by their states.
pub fn compatible_permutation(alpha: &[usize]) -> Permutation {
    let images: Vec<usize> = (1..=alpha.len()).sorted_by_key(|&p| (alpha[p - 1], p)).collect();
    minimal_decomposition(&images).expect("sorted positions form a bijection")
}

fn check_xi(table: &WeightTable, xi: &[usize], order: &[usize]) -> Result<Dims> {
    if xi.len() != order.len() {
        return Err(Error::DimensionMismatch {
            left: format!("{} rapidities", xi.len()),
            right: format!("order of {}", order.len()),
        });
    }
    if xi.is_empty() {
        return Err(Error::InsufficientRapidities { needed: 1, found: 0 });
    }
    minimal_decomposition(order)?;
    Dims::new(table.n(), xi.len())
}

/// Unnormalized F-matrix `𝓕` at the site order `order` (identity for the canonical matrix).
///
/// `xi[s - 1]` is the registration index of the rapidity of site `s`.
pub fn build_curly_f(table: &WeightTable, xi: &[usize], order: &[usize]) -> Result<TensorOperator> {
    let dims = check_xi(table, xi, order)?;
    let l = xi.len();
    let alphas: Vec<Vec<usize>> = (0..dims.dim())
        .map(|idx| order.iter().map(|&s| dims.digit(idx, s)).collect())
        .collect();
    let mut total = TensorOperator::zero(dims);
    for sigma in Permutation::all(l) {
        let keep: Vec<bool> = alphas.iter().map(|a| admissible(&sigma, a)).collect();
        if !keep.iter().any(|&k| k) {
            continue;
        }
        let mut acc = TensorOperator::identity(dims).restrict_rows(|r| keep[r]);
        for f in sigma_factors(&sigma, order, table, xi, dims, PairFactor::R)? {
            acc = acc.mul(&f)?;
        }
        total = total.add(&acc)?;
    }
    Ok(total)
}

fn principal_sqrt(table: &WeightTable, x: usize, y: usize, k: usize) -> Result<Complex64> {
    let a = table.pair(x, y)?.a(k);
    if a.re < 0.0 && a.im.abs() <= 1e-12 * a.norm().max(1.0) {
        return Err(Error::BranchCut {
            x: table.label(x).to_string(),
            y: table.label(y).to_string(),
            kind: WeightKind::A(k).to_string(),
        });
    }
    Ok(a.sqrt())
}

/// Diagonal normalization `N` at the site order `order`, using principal square roots.
pub fn build_n_matrix(table: &WeightTable, xi: &[usize], order: &[usize]) -> Result<TensorOperator> {
    let dims = check_xi(table, xi, order)?;
    let l = xi.len();
    let mut acc = TensorOperator::identity(dims);
    for i in 0..l {
        for j in i + 1..l {
            let (si, sj) = (order[i], order[j]);
            let (x, y) = (xi[si - 1], xi[sj - 1]);
            let roots: Vec<Complex64> = (1..=table.n())
                .map(|k| principal_sqrt(table, x, y, k))
                .collect::<Result<_>>()?;
            acc = coincidence_diagonal(si, sj, dims, |s| roots[s - 1])?.mul(&acc)?;
        }
    }
    Ok(acc)
}

/// Inverts a lower-triangular operator by forward substitution.
pub fn invert_lower_triangular(op: &TensorOperator) -> Result<TensorOperator> {
    let d = op.dim();
    let scale = op.max_abs().max(f64::MIN_POSITIVE);
    let m = op.to_dense();
    for r in 0..d {
        for c in r + 1..d {
            if m[r * d + c].norm() > 1e-12 * scale {
                return Err(Error::Unsupported(format!(
                    "operator is not lower triangular at ({r}, {c})"
                )));
            }
        }
    }
    let mut inv = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        let diag = m[i * d + i];
        if diag.norm() < DIAGONAL_FLOOR * scale {
            return Err(Error::SingularDiagonal {
                index: i,
                magnitude: diag.norm(),
            });
        }
        let inv_diag = 1.0 / diag;
        inv[i * d + i] = inv_diag;
        for j in 0..i {
            let mut acc = Complex64::new(0.0, 0.0);
            for k in j..i {
                let lik = m[i * d + k];
                if lik != Complex64::new(0.0, 0.0) {
                    acc += lik * inv[k * d + j];
                }
            }
            inv[i * d + j] = -acc * inv_diag;
        }
    }
    TensorOperator::from_dense(op.dims(), inv)
}

/// F-matrix together with its factors and inverses.
#[derive(Clone, Debug)]
pub struct FMatrixBundle {
    /// Registration indices of the site rapidities.
    pub xi: Vec<usize>,
    /// Unnormalized matrix `𝓕`.
    pub curly_f: TensorOperator,
    /// Inverse of `𝓕`.
    pub curly_f_inverse: TensorOperator,
    /// Diagonal normalization `N`.
    pub n_matrix: TensorOperator,
    /// Normalized matrix `F = N 𝓕`.
    pub f: TensorOperator,
    /// Inverse `F^{-1} = 𝓕^{-1} N^{-1}`.
    pub f_inverse: TensorOperator,
}

impl FMatrixBundle {
    /// Builds the canonical F-matrix for site rapidities `xi`.
    pub fn build(table: &WeightTable, xi: &[usize]) -> Result<Self> {
        let order: Vec<usize> = (1..=xi.len()).collect();
        Self::build_at(table, xi, &order)
    }

    /// Builds `F_{order}` at relabelled sites.
    pub fn build_at(table: &WeightTable, xi: &[usize], order: &[usize]) -> Result<Self> {
        let curly_f = build_curly_f(table, xi, order)?;
        let n_matrix = build_n_matrix(table, xi, order)?;
        let f = n_matrix.mul(&curly_f)?;
        let canonical = order.iter().enumerate().all(|(p, &s)| p + 1 == s);
        let curly_f_inverse = if canonical {
            invert_lower_triangular(&curly_f)?
        } else {
            invert_relabelled(&curly_f, order)?
        };
        let n_inverse = TensorOperator::diagonal(n_matrix.dims(), |i| 1.0 / n_matrix.get(i, i));
        let f_inverse = curly_f_inverse.mul(&n_inverse)?;
        Ok(Self {
            xi: xi.to_vec(),
            curly_f,
            curly_f_inverse,
            n_matrix,
            f,
            f_inverse,
        })
    }

    /// Number of sites.
    pub fn sites(&self) -> usize {
        self.xi.len()
    }
}

/// Moves an operator between site orders: `(P X P^{-1})` with `P` sending the
/// canonical labelling to `order`.
fn relabel(op: &TensorOperator, order: &[usize], forward: bool) -> Result<TensorOperator> {
    let dims = op.dims();
    let map = |idx: usize| -> usize {
        let mut out = 0;
        for p in 1..=dims.sites() {
            let digit = dims.digit(idx, if forward { p } else { order[p - 1] });
            let site = if forward { order[p - 1] } else { p };
            out += (digit - 1) * dims.stride(site);
        }
        out
    };
    TensorOperator::from_entries(dims, op.entries().into_iter().map(|(r, c, v)| (map(r), map(c), v)))
}

fn invert_relabelled(op: &TensorOperator, order: &[usize]) -> Result<TensorOperator> {
    let canonical = relabel(op, order, false)?;
    relabel(&invert_lower_triangular(&canonical)?, order, true)
}

/// Which permutations a factorization check visits.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SigmaScope {
    /// Every permutation of `1..=L`.
    All,
    /// `count` permutations drawn by shuffling with a ChaCha8 generator seeded from `seed`.
    Sample {
        /// Number of permutations.
        count: usize,
        /// Generator seed.
        seed: u64,
    },
}

impl SigmaScope {
    /// The permutations selected for `l` sites.
    pub fn permutations(self, l: usize) -> Vec<Permutation> {
        match self {
            SigmaScope::All => Permutation::all(l),
            SigmaScope::Sample { count, seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                (0..count)
                    .map(|_| {
                        let mut im: Vec<usize> = (1..=l).collect();
                        im.shuffle(&mut rng);
                        minimal_decomposition(&im).expect("shuffle keeps a bijection")
                    })
                    .collect()
            }
        }
    }
}

fn sigma_args(table: &WeightTable, xi: &[usize]) -> Vec<String> {
    xi.iter().map(|&x| table.label(x).to_string()).collect()
}

/// Checks `F_{σ(1..L)} R^σ = F` for the permutations in `scope`.
///
/// Reports are named `factorization:{σ(1),...,σ(L)}`.
pub fn verify_factorization(
    table: &WeightTable,
    xi: &[usize],
    scope: SigmaScope,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    let base = FMatrixBundle::build(table, xi)?;
    let dims = base.f.dims();
    let args = sigma_args(table, xi);
    scope
        .permutations(xi.len())
        .par_iter()
        .map(|sigma| {
            let order = sigma.images();
            let f_sigma = build_n_matrix(table, xi, order)?.mul(&build_curly_f(table, xi, order)?)?;
            let lhs = f_sigma.mul(&r_sigma(sigma, table, xi, dims)?)?;
            ResidualReport::from_operators("factorization", order, args.clone(), &lhs, &base.f, tol)
        })
        .collect()
}

/// Checks the companion identities of the factorization for the permutations in `scope`:
///
/// * `curly-f.exchange:{σ}`: `𝓕_{σ(1..L)} R^σ = 𝓡^σ 𝓕`
/// * `n-matrix.exchange:{σ}`: `N_{σ(1..L)}^{-1} N = 𝓡^σ`
/// * `f.relabel:{σ}`: `F_{σ(1..L)} = P^σ F(ξ_σ) (P^σ)^{-1}`, comparing the relabelled
///   builder with a conjugated canonical build on permuted rapidities
pub fn verify_exchange_relations(
    table: &WeightTable,
    xi: &[usize],
    scope: SigmaScope,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    let base = FMatrixBundle::build(table, xi)?;
    let dims = base.f.dims();
    let identity: Vec<usize> = (1..=xi.len()).collect();
    let args = sigma_args(table, xi);
    let per_sigma: Vec<Vec<ResidualReport>> = scope
        .permutations(xi.len())
        .par_iter()
        .map(|sigma| {
            let order = sigma.images();
            let curly_r = r_sigma_relabeled(sigma, &identity, table, xi, dims, PairFactor::Diagonal)?;
            let cf_sigma = build_curly_f(table, xi, order)?;
            let lhs = cf_sigma.mul(&r_sigma(sigma, table, xi, dims)?)?;
            let rhs = curly_r.mul(&base.curly_f)?;
            let mut out = vec![ResidualReport::from_operators(
                "curly-f.exchange",
                order,
                args.clone(),
                &lhs,
                &rhs,
                tol,
            )?];
            let n_sigma = build_n_matrix(table, xi, order)?;
            let n_sigma_inv = TensorOperator::diagonal(dims, |i| 1.0 / n_sigma.get(i, i));
            out.push(ResidualReport::from_operators(
                "n-matrix.exchange",
                order,
                args.clone(),
                &n_sigma_inv.mul(&base.n_matrix)?,
                &curly_r,
                tol,
            )?);
            let xi_perm: Vec<usize> = order.iter().map(|&s| xi[s - 1]).collect();
            let f_perm = FMatrixBundle::build(table, &xi_perm)?.f;
            let p = permutation_product(sigma, dims)?;
            let conj = p.mul(&f_perm)?.mul(&p.adjoint())?;
            let f_sigma = n_sigma.mul(&cf_sigma)?;
            out.push(ResidualReport::from_operators(
                "f.relabel",
                order,
                args.clone(),
                &f_sigma,
                &conj,
                tol,
            )?);
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(per_sigma.into_iter().flatten().collect())
}

/// Checks `𝓡_{1,2..L} 𝓡_{2..L,1} = 1`, where `𝓡_{1,2..L} = 𝓡_{1L} ... 𝓡_{12}` and
/// `𝓡_{2..L,1} = 𝓡_{21} ... 𝓡_{L1}`. Reported as `curly-r.unitarity:{L}`.
pub fn verify_curly_r_unitarity(table: &WeightTable, xi: &[usize], tol: f64) -> Result<ResidualReport> {
    let l = xi.len();
    let dims = Dims::new(table.n(), l)?;
    let factor = |i: usize, j: usize| PairFactor::Diagonal.build(table, i, j, xi[i - 1], xi[j - 1], dims);
    let mut acc = TensorOperator::identity(dims);
    for j in (2..=l).rev() {
        acc = acc.mul(&factor(1, j)?)?;
    }
    for j in 2..=l {
        acc = acc.mul(&factor(j, 1)?)?;
    }
    ResidualReport::from_operators(
        "curly-r.unitarity",
        &[l],
        sigma_args(table, xi),
        &acc,
        &TensorOperator::identity(dims),
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{build_del_pezzo, DelPezzoParams, RapiditySet};

    fn table(seed: u64, sites: usize) -> WeightTable {
        let set = RapiditySet::generic(sites, 0);
        let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
        let p = DelPezzoParams::sample(&mut ChaCha8Rng::seed_from_u64(seed), &labels);
        build_del_pezzo(&p, &set).unwrap()
    }

    #[test]
    fn each_alpha_has_exactly_one_permutation() {
        let dims = Dims::new(3, 4).unwrap();
        let all = Permutation::all(4);
        for idx in 0..dims.dim() {
            let alpha: Vec<usize> = (1..=4).map(|s| dims.digit(idx, s)).collect();
            let hits: Vec<&Permutation> = all.iter().filter(|s| admissible(s, &alpha)).collect();
            assert_eq!(hits.len(), 1);
            assert_eq!(*hits[0], compatible_permutation(&alpha));
        }
    }

    #[test]
    fn curly_f_rows_follow_compatible_permutation() {
        let t = table(2, 3);
        let xi = [0, 1, 2];
        let dims = Dims::new(3, 3).unwrap();
        let cf = build_curly_f(&t, &xi, &[1, 2, 3]).unwrap();
        for idx in 0..dims.dim() {
            let alpha: Vec<usize> = (1..=3).map(|s| dims.digit(idx, s)).collect();
            let rs = r_sigma(&compatible_permutation(&alpha), &t, &xi, dims).unwrap();
            for c in 0..dims.dim() {
                assert!((cf.get(idx, c) - rs.get(idx, c)).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn f_is_lower_triangular_and_factorizes() {
        let t = table(3, 3);
        let b = FMatrixBundle::build(&t, &[0, 1, 2]).unwrap();
        assert!(b.f.is_lower_triangular(1e-13));
        let id = TensorOperator::identity(b.f.dims());
        assert!(b.f.mul(&b.f_inverse).unwrap().rel_diff(&id).unwrap() < 1e-12);
        let reports = verify_factorization(&t, &[0, 1, 2], SigmaScope::All, 1e-10).unwrap();
        assert_eq!(reports.len(), 6);
        assert!(reports.iter().all(|r| r.pass));
    }

    #[test]
    fn exchange_relations_hold() {
        let t = table(4, 3);
        for r in verify_exchange_relations(&t, &[0, 1, 2], SigmaScope::All, 1e-10).unwrap() {
            assert!(r.pass, "{} {:e}", r.relation, r.relative);
        }
        assert!(verify_curly_r_unitarity(&t, &[0, 1, 2], 1e-12).unwrap().pass);
    }

    #[test]
    fn relabelled_inverse_is_inverse() {
        let t = table(5, 3);
        let b = FMatrixBundle::build_at(&t, &[0, 1, 2], &[3, 1, 2]).unwrap();
        let id = TensorOperator::identity(b.f.dims());
        assert!(b.curly_f.mul(&b.curly_f_inverse).unwrap().rel_diff(&id).unwrap() < 1e-12);
    }

    #[test]
    fn branch_cut_is_reported() {
        let t = table(6, 2);
        let bad = t
            .with_weight("xi1", "xi2", WeightKind::A(2), Complex64::new(-0.5, 0.0))
            .unwrap();
        assert!(matches!(
            build_n_matrix(&bad, &[0, 1], &[1, 2]),
            Err(Error::BranchCut { .. })
        ));
    }

    #[test]
    fn singular_diagonal_is_reported() {
        let dims = Dims::new(2, 1).unwrap();
        let op = TensorOperator::from_entries(dims, [(0, 0, Complex64::new(1.0, 0.0))]).unwrap();
        assert!(matches!(
            invert_lower_triangular(&op),
            Err(Error::SingularDiagonal { index: 1, .. })
        ));
    }
}
