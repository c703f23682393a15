use num_complex::Complex64;

use super::{Dims, Permutation, TensorOperator};
use crate::error::{Error, Result};
use crate::weights::WeightTable;

/// Weyl matrix `e^(αβ)` acting on one site: maps `|β⟩` to `|α⟩`.
pub fn weyl(alpha: usize, beta: usize, site: usize, dims: Dims) -> Result<TensorOperator> {
    dims.check_state(alpha)?;
    dims.check_state(beta)?;
    dims.check_site(site)?;
    let stride = dims.stride(site);
    let entries = (0..dims.dim()).filter(|&r| dims.digit(r, site) == alpha).map(|r| {
        let col = r - (alpha - 1) * stride + (beta - 1) * stride;
        (r, col, Complex64::new(1.0, 0.0))
    });
    TensorOperator::from_entries(dims, entries)
}

/// Cartan generator `h_k = e^(kk) - e^(k+1,k+1)` on one site, `k = 1..N-1`.
pub fn u1_generator(k: usize, site: usize, dims: Dims) -> Result<TensorOperator> {
    if k == 0 || k >= dims.n() {
        return Err(Error::IndexOutOfRange {
            what: "generator",
            value: k,
            max: dims.n() - 1,
        });
    }
    dims.check_site(site)?;
    Ok(TensorOperator::diagonal(dims, |i| {
        let s = dims.digit(i, site);
        Complex64::new(
            if s == k {
                1.0
            } else if s == k + 1 {
                -1.0
            } else {
                0.0
            },
            0.0,
        )
    }))
}

fn check_pair(j: usize, k: usize, dims: Dims) -> Result<()> {
    dims.check_site(j)?;
    dims.check_site(k)?;
    if j == k {
        return Err(Error::Unsupported(format!("two-site operator on coinciding sites {j}")));
    }
    Ok(())
}

fn swapped(idx: usize, j: usize, k: usize, dims: Dims) -> usize {
    let (sj, sk) = (dims.stride(j), dims.stride(k));
    let (dj, dk) = (dims.digit(idx, j) - 1, dims.digit(idx, k) - 1);
    idx - dj * sj - dk * sk + dk * sj + dj * sk
}

/// R-matrix `R_jk(x, y)` embedded at sites `j` and `k`, with site `j` in the first slot.
///
/// `x` and `y` are registration indices in the table.
pub fn embed_r(table: &WeightTable, j: usize, k: usize, x: usize, y: usize, dims: Dims) -> Result<TensorOperator> {
    check_pair(j, k, dims)?;
    if table.n() != dims.n() {
        return Err(Error::RankMismatch {
            expected: dims.n(),
            found: table.n(),
        });
    }
    let w = table.pair(x, y)?;
    let rows = (0..dims.dim())
        .map(|r| {
            let (p, q) = (dims.digit(r, j), dims.digit(r, k));
            if p == q {
                vec![(r, w.a(p))]
            } else {
                vec![(r, w.b(p, q)), (swapped(r, j, k, dims), w.c(p, q))]
            }
        })
        .collect();
    Ok(TensorOperator::from_rows(dims, rows))
}

/// Permutation operator `P_jk` exchanging the states of sites `j` and `k`.
pub fn permutation_operator(j: usize, k: usize, dims: Dims) -> Result<TensorOperator> {
    check_pair(j, k, dims)?;
    let rows = (0..dims.dim())
        .map(|r| vec![(swapped(r, j, k, dims), Complex64::new(1.0, 0.0))])
        .collect();
    Ok(TensorOperator::from_rows(dims, rows))
}

/// Two-site factor used in products over reduced words.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PairFactor {
    /// The full R-matrix `R_jk(x, y)`.
    R,
    /// Its diagonal part on coinciding states, `1 + Σ_i (a_i(x, y) - 1) e^(ii) ⊗ e^(ii)`.
    Diagonal,
}

impl PairFactor {
    /// Builds the factor at sites `j, k` with registration indices `x, y`.
    pub fn build(
        self,
        table: &WeightTable,
        j: usize,
        k: usize,
        x: usize,
        y: usize,
        dims: Dims,
    ) -> Result<TensorOperator> {
        match self {
            PairFactor::R => embed_r(table, j, k, x, y, dims),
            PairFactor::Diagonal => {
                let w = table.pair(x, y)?;
                coincidence_diagonal(j, k, dims, |s| w.a(s))
            }
        }
    }
}

/// Diagonal operator equal to `f(s)` where sites `j` and `k` both hold `s`, and 1 elsewhere.
pub fn coincidence_diagonal(j: usize, k: usize, dims: Dims, f: impl Fn(usize) -> Complex64) -> Result<TensorOperator> {
    check_pair(j, k, dims)?;
    Ok(TensorOperator::diagonal(dims, |i| {
        let (p, q) = (dims.digit(i, j), dims.digit(i, k));
        if p == q {
            f(p)
        } else {
            Complex64::new(1.0, 0.0)
        }
    }))
}

fn check_sites(l: usize, xi: &[usize], order: &[usize], dims: Dims) -> Result<()> {
    if xi.len() != dims.sites() || order.len() != l || l != dims.sites() {
        return Err(Error::DimensionMismatch {
            left: format!("{} rapidities, order of {}, permutation of {l}", xi.len(), order.len()),
            right: dims.to_string(),
        });
    }
    super::minimal_decomposition(order)?;
    Ok(())
}

/// Factors of `X^σ` at relabelled sites, leftmost factor first.
///
/// `order[p]` is the site occupying position `p + 1` and `xi[s - 1]` the rapidity of site `s`.
/// Walking the reduced word from `α_p` down to `α_1`, each step contributes the factor on the
/// sites currently at positions `α, α + 1` and then exchanges them.
pub fn sigma_factors(
    sigma: &Permutation,
    order: &[usize],
    table: &WeightTable,
    xi: &[usize],
    dims: Dims,
    factor: PairFactor,
) -> Result<Vec<TensorOperator>> {
    check_sites(sigma.len(), xi, order, dims)?;
    let mut seq = order.to_vec();
    let mut out = Vec::with_capacity(sigma.inversions());
    for &a in sigma.factors().iter().rev() {
        let (s1, s2) = (seq[a - 1], seq[a]);
        out.push(factor.build(table, s1, s2, xi[s1 - 1], xi[s2 - 1], dims)?);
        seq.swap(a - 1, a);
    }
    out.reverse();
    Ok(out)
}

/// Product `X^σ` at the site order `order`; with the identity order this is `R^σ` or `𝓡^σ`.
pub fn r_sigma_relabeled(
    sigma: &Permutation,
    order: &[usize],
    table: &WeightTable,
    xi: &[usize],
    dims: Dims,
    factor: PairFactor,
) -> Result<TensorOperator> {
    let mut acc = TensorOperator::identity(dims);
    for f in sigma_factors(sigma, order, table, xi, dims, factor)? {
        acc = acc.mul(&f)?;
    }
    Ok(acc)
}

/// `R^σ = P^σ R̂^{σ^{-1}}` built directly from the reduced word.
///
/// `R̂_{α,α+1} = P_{α,α+1} R_{α,α+1}` factors are multiplied right to left starting from
/// `α_p`, each evaluated on the inhomogeneities currently at positions `α, α + 1`; the
/// result is then multiplied by `P^σ = P_{α_p} ... P_{α_1}`.
pub fn r_sigma(sigma: &Permutation, table: &WeightTable, xi: &[usize], dims: Dims) -> Result<TensorOperator> {
    let identity: Vec<usize> = (1..=dims.sites()).collect();
    check_sites(sigma.len(), xi, &identity, dims)?;
    let mut pos = xi.to_vec();
    let mut hat = TensorOperator::identity(dims);
    for &a in sigma.factors().iter().rev() {
        let r = embed_r(table, a, a + 1, pos[a - 1], pos[a], dims)?;
        let step = permutation_operator(a, a + 1, dims)?.mul(&r)?;
        hat = step.mul(&hat)?;
        pos.swap(a - 1, a);
    }
    permutation_product(sigma, dims)?.mul(&hat)
}

/// `P^σ = P_{α_p, α_p+1} ... P_{α_1, α_1+1}` for the reduced word of `σ`.
pub fn permutation_product(sigma: &Permutation, dims: Dims) -> Result<TensorOperator> {
    let mut p_sigma = TensorOperator::identity(dims);
    for &a in sigma.factors() {
        p_sigma = permutation_operator(a, a + 1, dims)?.mul(&p_sigma)?;
    }
    Ok(p_sigma)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor_algebra::minimal_decomposition;
    use crate::weights::{build_del_pezzo, DelPezzoParams, RapiditySet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(l: usize, seed: u64) -> WeightTable {
        let set = RapiditySet::generic(l, 0);
        let labels: Vec<String> = set.all().into_iter().map(|(s, _)| s).collect();
        let p = DelPezzoParams::sample(&mut ChaCha8Rng::seed_from_u64(seed), &labels);
        build_del_pezzo(&p, &set).unwrap()
    }

    #[test]
    fn weyl_action() {
        let dims = Dims::new(3, 2).unwrap();
        let e = weyl(2, 3, 2, dims).unwrap();
        assert_eq!(e.nnz(), 3);
        assert_eq!(e.get(1, 2), Complex64::new(1.0, 0.0));
        assert!(weyl(4, 1, 1, dims).is_err());
    }

    #[test]
    fn embedded_r_fill_count() {
        let t = table(4, 1);
        for (l, (j, k)) in [(2, (1, 2)), (3, (1, 3)), (4, (4, 2))] {
            let dims = Dims::new(3, l).unwrap();
            let xi: Vec<usize> = (0..l).collect();
            let r = embed_r(&t, j, k, xi[j - 1], xi[k - 1], dims).unwrap();
            assert_eq!(r.nnz(), 15 * 3usize.pow(l as u32 - 2));
        }
    }

    #[test]
    fn r_element_convention() {
        let t = table(2, 2);
        let dims = Dims::new(3, 2).unwrap();
        let r = embed_r(&t, 1, 2, 0, 1, dims).unwrap();
        let w = t.pair(0, 1).unwrap();
        assert_eq!(r.get(1, 3), w.c(1, 2));
        assert_eq!(r.get(1, 1), w.b(1, 2));
        assert_eq!(r.get(0, 0), w.a(1));
        let r21 = embed_r(&t, 2, 1, 0, 1, dims).unwrap();
        assert_eq!(r21.get(3, 1), w.c(1, 2));
    }

    #[test]
    fn literal_and_relabeled_forms_agree() {
        let t = table(4, 3);
        for l in 2..=4 {
            let dims = Dims::new(3, l).unwrap();
            let xi: Vec<usize> = (0..l).collect();
            let id: Vec<usize> = (1..=l).collect();
            for s in Permutation::all(l) {
                let a = r_sigma(&s, &t, &xi, dims).unwrap();
                let b = r_sigma_relabeled(&s, &id, &t, &xi, dims, PairFactor::R).unwrap();
                assert!(a.rel_diff(&b).unwrap() < 1e-13);
            }
        }
    }

    #[test]
    fn two_site_transposition_is_r() {
        let t = table(2, 4);
        let dims = Dims::new(3, 2).unwrap();
        let s = minimal_decomposition(&[2, 1]).unwrap();
        let a = r_sigma(&s, &t, &[0, 1], dims).unwrap();
        let r = embed_r(&t, 1, 2, 0, 1, dims).unwrap();
        assert!(a.rel_diff(&r).unwrap() < 1e-15);
    }
}
