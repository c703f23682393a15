//! Monodromy matrices, their blocks, and twisted blocks in the F-basis.
//!
//! The monodromy matrix `T_a(μ) = R_aL(μ,ξL) ... R_a1(μ,ξ1)` is viewed as an N×N matrix
//! of operators on the quantum space, `T_ij = ⟨i|_a T |j⟩_a`. For N = 3 the blocks used
//! here are `D = T_33`, `C^(i) = T_3i` and `B^(i) = T_i3`.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f_matrix::FMatrixBundle;
use crate::tensor_algebra::{Dims, MultiIndex, TensorOperator};
use crate::weights::{WeightKind, WeightTable, EPS_SING};

/// All N² blocks of a monodromy matrix.
#[derive(Clone, Debug)]
pub struct MonodromyBlocks {
    n: usize,
    blocks: Vec<TensorOperator>,
}

impl MonodromyBlocks {
    /// Block `T_ij = ⟨i|_a T |j⟩_a` with 1-based `i, j`.
    pub fn block(&self, i: usize, j: usize) -> Result<&TensorOperator> {
        for v in [i, j] {
            if !(1..=self.n).contains(&v) {
                return Err(Error::IndexOutOfRange {
                    what: "auxiliary state",
                    value: v,
                    max: self.n,
                });
            }
        }
        Ok(&self.blocks[(i - 1) * self.n + (j - 1)])
    }

    /// Number of local states N.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Reassembles the full operator on auxiliary space ⊗ quantum space.
    pub fn assemble(&self) -> Result<TensorOperator> {
        let quantum = self.blocks[0].dims();
        let dims = Dims::new(self.n, 1)?.concat(quantum)?;
        let dq = quantum.dim();
        let mut entries = Vec::new();
        for i in 0..self.n {
            for j in 0..self.n {
                for (r, c, v) in self.blocks[i * self.n + j].entries() {
                    entries.push((i * dq + r, j * dq + c, v));
                }
            }
        }
        TensorOperator::from_entries(dims, entries)
    }
}

fn local(n: usize, entries: &[(usize, usize, Complex64)]) -> Result<TensorOperator> {
    TensorOperator::from_entries(Dims::new(n, 1)?, entries.iter().map(|&(r, c, v)| (r - 1, c - 1, v)))
}

/// Builds the monodromy blocks at auxiliary rapidity `mu` over sites with rapidities `xi`
/// (registration indices).
///
/// Sites are appended one at a time: `T^(s)_ij = Σ_k T^(s-1)_kj ⊗ ⟨i|R_as|k⟩`.
pub fn build_monodromy(table: &WeightTable, mu: usize, xi: &[usize]) -> Result<MonodromyBlocks> {
    let n = table.n();
    let scalar = Dims::new(n, 0)?;
    let mut blocks: Vec<TensorOperator> = (0..n * n)
        .map(|k| {
            if k / n == k % n {
                TensorOperator::identity(scalar)
            } else {
                TensorOperator::zero(scalar)
            }
        })
        .collect();
    for &x in xi {
        let w = table.pair(mu, x)?;
        let mut r = Vec::with_capacity(n * n);
        for i in 1..=n {
            for k in 1..=n {
                let entries: Vec<(usize, usize, Complex64)> = if i == k {
                    (1..=n)
                        .map(|s| (s, s, if s == i { w.a(i) } else { w.b(i, s) }))
                        .collect()
                } else {
                    vec![(k, i, w.c(i, k))]
                };
                r.push(local(n, &entries)?);
            }
        }
        let mut next = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let mut acc: Option<TensorOperator> = None;
                for k in 0..n {
                    let term = blocks[k * n + j].kron(&r[i * n + k])?;
                    acc = Some(match acc {
                        None => term,
                        Some(a) => a.add(&term)?,
                    });
                }
                next.push(acc.expect("n >= 2"));
            }
        }
        blocks = next;
    }
    Ok(MonodromyBlocks { n, blocks })
}

/// Monodromy blocks with closed-form twisted expressions (N = 3).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BlockKind {
    /// `D = T_33`.
    D,
    /// `C^(2) = T_32`.
    C2,
    /// `B^(2) = T_23`.
    B2,
    /// `C^(1) = T_31`.
    C1,
    /// `B^(1) = T_13`.
    B1,
}

impl BlockKind {
    /// All kinds in a fixed order.
    pub const ALL: [BlockKind; 5] = [BlockKind::D, BlockKind::C2, BlockKind::B2, BlockKind::C1, BlockKind::B1];

    /// Auxiliary indices `(i, j)` of the block.
    pub fn indices(self) -> (usize, usize) {
        match self {
            BlockKind::D => (3, 3),
            BlockKind::C2 => (3, 2),
            BlockKind::B2 => (2, 3),
            BlockKind::C1 => (3, 1),
            BlockKind::B1 => (1, 3),
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            BlockKind::D => "D",
            BlockKind::C2 => "C2",
            BlockKind::B2 => "B2",
            BlockKind::C1 => "C1",
            BlockKind::B1 => "B1",
        };
        f.write_str(s)
    }
}

impl FromStr for BlockKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "D" => Ok(BlockKind::D),
            "C2" => Ok(BlockKind::C2),
            "B2" => Ok(BlockKind::B2),
            "C1" => Ok(BlockKind::C1),
            "B1" => Ok(BlockKind::B1),
            _ => Err(Error::UnknownKind(s.to_string())),
        }
    }
}

/// Conjugation `𝓕 X 𝓕^{-1}` by the unnormalized F-matrix.
pub fn twist(x: &TensorOperator, bundle: &FMatrixBundle) -> Result<TensorOperator> {
    bundle.curly_f.mul(x)?.mul(&bundle.curly_f_inverse)
}

/// Weight lookups for closed-form expressions, with denominators screened against `EPS_SING`.
pub(crate) struct Lookup<'a> {
    pub(crate) table: &'a WeightTable,
}

impl Lookup<'_> {
    pub(crate) fn w(&self, kind: WeightKind, x: usize, y: usize) -> Result<Complex64> {
        let p = self.table.pair(x, y)?;
        Ok(match kind {
            WeightKind::A(i) => p.a(i),
            WeightKind::B(i, j) => p.b(i, j),
            WeightKind::C(i, j) => p.c(i, j),
        })
    }

    pub(crate) fn den(&self, kind: WeightKind, x: usize, y: usize) -> Result<Complex64> {
        let v = self.w(kind, x, y)?;
        if v.norm() < EPS_SING {
            return Err(Error::DivisionNearZero {
                x: self.table.label(x).to_string(),
                y: self.table.label(y).to_string(),
                kind: kind.to_string(),
                magnitude: v.norm(),
            });
        }
        Ok(v)
    }

    /// `θ_i(ξ_j, ξ_k)` for positions `j, k` (0-based) in `xs`: `a_i` if `j < k`, else 1.
    pub(crate) fn theta(&self, i: usize, xs: &[usize], j: usize, k: usize) -> Result<Complex64> {
        if j < k {
            self.w(WeightKind::A(i), xs[j], xs[k])
        } else {
            Ok(Complex64::new(1.0, 0.0))
        }
    }

    /// `θ_i(ξ_j, ξ_k)` as a denominator.
    pub(crate) fn theta_den(&self, i: usize, xs: &[usize], j: usize, k: usize) -> Result<Complex64> {
        if j < k {
            self.den(WeightKind::A(i), xs[j], xs[k])
        } else {
            Ok(Complex64::new(1.0, 0.0))
        }
    }
}

use WeightKind::{A, B, C};

fn diag3(d: [Complex64; 3]) -> Vec<(usize, usize, Complex64)> {
    (0..3).map(|k| (k + 1, k + 1, d[k])).collect()
}

fn tensor_product(sites: Vec<Vec<(usize, usize, Complex64)>>) -> Result<TensorOperator> {
    let mut acc = TensorOperator::identity(Dims::new(3, 0)?);
    for s in sites {
        acc = acc.kron(&local(3, &s)?)?;
    }
    Ok(acc)
}

/// Closed-form quasilocal expression of a twisted block, `L = xi.len()`.
///
/// With `θ_i(ξ_j, ξ_k) = a_i(ξ_j, ξ_k)` for `j < k` and 1 otherwise:
///
/// * `D = ⊗_i diag{b31(μ,ξi), b32(μ,ξi), a3(μ,ξi)}`
/// * `C2 = Σ_l c32(μ,ξl) e^(23)_l ⊗_{i≠l} diag{b21(μ,ξi), b32(μ,ξi)/(b32(ξl,ξi)θ2(ξi,ξl)), a3(μ,ξi)θ3(ξi,ξl)}`
/// * `B2 = Σ_l c23(μ,ξl) e^(32)_l ⊗_{i≠l} diag{b31(μ,ξi), b32(μ,ξi)θ2(ξl,ξi), a3(μ,ξi)/(b32(ξi,ξl)θ3(ξl,ξi))}`
/// * `C1` and `B1`: a single sum of the same shape plus a double sum over ordered pairs
///   `l1 ≠ l2` carrying `e^(23)_{l1} e^(12)_{l2}` (respectively `e^(32)_{l1} e^(21)_{l2}`).
pub fn conjectured_twisted(kind: BlockKind, table: &WeightTable, mu: usize, xi: &[usize]) -> Result<TensorOperator> {
    if table.n() != 3 {
        return Err(Error::RankMismatch {
            expected: 3,
            found: table.n(),
        });
    }
    let lk = Lookup { table };
    let l = xi.len();
    let one = Complex64::new(1.0, 0.0);
    let w = |k: WeightKind, x: usize, y: usize| lk.w(k, x, y);
    let den = |k: WeightKind, x: usize, y: usize| lk.den(k, x, y);
    let th = |i: usize, j: usize, k: usize| lk.theta(i, xi, j, k);
    let thd = |i: usize, j: usize, k: usize| lk.theta_den(i, xi, j, k);
    let e = |a: usize, b: usize| vec![(a, b, one)];
    let mut total = TensorOperator::zero(Dims::new(3, l)?);
    let mut add = |sites: Vec<Vec<(usize, usize, Complex64)>>, coef: Complex64| -> Result<()> {
        total = total.add(&tensor_product(sites)?.scale(coef))?;
        Ok(())
    };
    if kind == BlockKind::D {
        let sites = (0..l)
            .map(|i| {
                Ok(diag3([
                    w(B(3, 1), mu, xi[i])?,
                    w(B(3, 2), mu, xi[i])?,
                    w(A(3), mu, xi[i])?,
                ]))
            })
            .collect::<Result<_>>()?;
        add(sites, one)?;
        return Ok(total);
    }
    for p in 0..l {
        let (xp, mut sites) = (xi[p], Vec::with_capacity(l));
        for (i, &x) in xi.iter().enumerate() {
            if i == p {
                sites.push(match kind {
                    BlockKind::C2 => e(2, 3),
                    BlockKind::B2 => e(3, 2),
                    BlockKind::C1 => e(1, 3),
                    _ => e(3, 1),
                });
                continue;
            }
            let d = match kind {
                BlockKind::C2 => [
                    w(B(2, 1), mu, x)?,
                    w(B(3, 2), mu, x)? / (den(B(3, 2), xp, x)? * thd(2, i, p)?),
                    w(A(3), mu, x)? * th(3, i, p)?,
                ],
                BlockKind::B2 => [
                    w(B(3, 1), mu, x)?,
                    w(B(3, 2), mu, x)? * th(2, p, i)?,
                    w(A(3), mu, x)? / (den(B(3, 2), x, xp)? * thd(3, p, i)?),
                ],
                BlockKind::C1 => [
                    w(B(2, 1), mu, x)? / (den(B(2, 1), xp, x)? * thd(1, i, p)?),
                    w(B(3, 2), mu, x)? / den(B(3, 2), xp, x)?,
                    w(A(3), mu, x)? * th(3, i, p)?,
                ],
                _ => [
                    w(B(3, 1), mu, x)? * th(1, p, i)?,
                    w(B(3, 2), mu, x)? / den(B(2, 1), x, xp)?,
                    w(A(3), mu, x)? / (den(B(3, 1), x, xp)? * thd(3, p, i)?),
                ],
            };
            sites.push(diag3(d));
        }
        let coef = match kind {
            BlockKind::C2 => w(C(3, 2), mu, xp)?,
            BlockKind::B2 => w(C(2, 3), mu, xp)?,
            BlockKind::C1 => w(C(3, 1), mu, xp)?,
            _ => w(C(1, 3), mu, xp)?,
        };
        add(sites, coef)?;
    }
    if matches!(kind, BlockKind::C1 | BlockKind::B1) {
        for p1 in 0..l {
            for p2 in (0..l).filter(|&p2| p2 != p1) {
                let (x1, x2) = (xi[p1], xi[p2]);
                let mut sites = Vec::with_capacity(l);
                for (i, &x) in xi.iter().enumerate() {
                    if i == p1 {
                        sites.push(if kind == BlockKind::C1 { e(2, 3) } else { e(3, 2) });
                        continue;
                    }
                    if i == p2 {
                        sites.push(if kind == BlockKind::C1 { e(1, 2) } else { e(2, 1) });
                        continue;
                    }
                    let d = if kind == BlockKind::C1 {
                        [
                            w(B(2, 1), mu, x)? / (den(B(2, 1), x2, x)? * thd(1, i, p2)?),
                            w(B(3, 2), mu, x)? * th(2, i, p2)? / (den(B(3, 2), x1, x)? * thd(2, i, p1)?),
                            w(A(3), mu, x)? * th(3, i, p1)?,
                        ]
                    } else {
                        [
                            w(B(3, 1), mu, x)? * th(1, p2, i)?,
                            w(B(3, 2), mu, x)? * th(2, p1, i)? / (den(B(2, 1), x, x2)? * thd(2, p2, i)?),
                            w(A(3), mu, x)? / (den(B(3, 1), x, x1)? * thd(3, p1, i)?),
                        ]
                    };
                    sites.push(diag3(d));
                }
                let coef = if kind == BlockKind::C1 {
                    w(C(3, 1), mu, x1)? * w(B(3, 2), mu, x2)? * w(C(2, 1), x1, x2)? / den(B(3, 2), x1, x2)?
                } else {
                    w(C(1, 3), mu, x1)? * w(B(3, 2), mu, x2)? * w(C(1, 2), x1, x2)? / den(B(2, 1), x1, x2)?
                };
                add(sites, coef)?;
            }
        }
    }
    Ok(total)
}

/// Entries of the twisted blocks at L = 2 that vanish identically, as `(name, value)`.
///
/// Names give the block and the row and column multi-indices: `D[21,12]`, `D[31,13]`,
/// `D[32,23]`, `C2[21,13]` and `B2[31,12]`.
pub fn vanishing_twist_entries(table: &WeightTable, mu: usize, xi: &[usize]) -> Result<Vec<(String, Complex64)>> {
    if xi.len() != 2 {
        return Err(Error::DimensionMismatch {
            left: format!("{} sites", xi.len()),
            right: "2 sites".to_string(),
        });
    }
    let bundle = FMatrixBundle::build(table, xi)?;
    let blocks = build_monodromy(table, mu, xi)?;
    let dims = Dims::new(table.n(), 2)?;
    let mut out = Vec::new();
    for (kind, entries) in [
        (BlockKind::D, vec![("21", "12"), ("31", "13"), ("32", "23")]),
        (BlockKind::C2, vec![("21", "13")]),
        (BlockKind::B2, vec![("31", "12")]),
    ] {
        let (i, j) = kind.indices();
        let tw = twist(blocks.block(i, j)?, &bundle)?;
        for (r, c) in entries {
            let digits = |s: &str| {
                s.chars()
                    .map(|ch| ch.to_digit(10).unwrap_or(0) as usize)
                    .collect::<Vec<_>>()
            };
            let row = MultiIndex::new(digits(r), dims)?;
            let col = MultiIndex::new(digits(c), dims)?;
            out.push((format!("{kind}[{r},{c}]"), tw.element(&row, &col)));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::relation_checks::monodromy_product;
    use crate::tensor_algebra::u1_generator;
    use crate::weights::{build_del_pezzo, DelPezzoParams, RapiditySet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(seed: u64, sites: usize, aux: usize) -> WeightTable {
        let set = RapiditySet::generic(sites, aux);
        let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
        let p = DelPezzoParams::sample(&mut ChaCha8Rng::seed_from_u64(seed), &labels);
        build_del_pezzo(&p, &set).unwrap()
    }

    #[test]
    fn blocks_match_full_product() {
        let t = table(1, 3, 1);
        let xi = [0, 1, 2];
        let blocks = build_monodromy(&t, 3, &xi).unwrap();
        let full = monodromy_product(&t, 3, 1, &[2, 3, 4], &xi, Dims::new(3, 4).unwrap()).unwrap();
        assert!(blocks.assemble().unwrap().rel_diff(&full).unwrap() < 1e-14);
    }

    #[test]
    fn single_site_d_block() {
        let t = table(2, 1, 1);
        let b = build_monodromy(&t, 1, &[0]).unwrap();
        let d = b.block(3, 3).unwrap();
        let p = t.pair(1, 0).unwrap();
        assert_eq!(d.get(0, 0), p.b(3, 1));
        assert_eq!(d.get(1, 1), p.b(3, 2));
        assert_eq!(d.get(2, 2), p.a(3));
        assert_eq!(d.nnz(), 3);
        assert!(b.block(4, 1).is_err());
    }

    #[test]
    fn twisted_blocks_match_closed_forms() {
        let t = table(3, 3, 1);
        let xi = [0, 1, 2];
        let bundle = FMatrixBundle::build(&t, &xi).unwrap();
        let blocks = build_monodromy(&t, 3, &xi).unwrap();
        for kind in BlockKind::ALL {
            let (i, j) = kind.indices();
            let tw = twist(blocks.block(i, j).unwrap(), &bundle).unwrap();
            let cf = conjectured_twisted(kind, &t, 3, &xi).unwrap();
            assert!(tw.rel_diff(&cf).unwrap() < 1e-10, "{kind}");
        }
    }

    #[test]
    fn vanishing_entries_vanish() {
        let t = table(4, 2, 1);
        for (name, v) in vanishing_twist_entries(&t, 2, &[0, 1]).unwrap() {
            assert!(v.norm() < 1e-10, "{name}");
        }
    }

    #[test]
    fn twisted_d_conserves_charge() {
        let t = table(5, 3, 1);
        let xi = [0, 1, 2];
        let bundle = FMatrixBundle::build(&t, &xi).unwrap();
        let d = twist(build_monodromy(&t, 3, &xi).unwrap().block(3, 3).unwrap(), &bundle).unwrap();
        let dims = d.dims();
        for g in 1..3 {
            let mut h = TensorOperator::zero(dims);
            for s in 1..=3 {
                h = h.add(&u1_generator(g, s, dims).unwrap()).unwrap();
            }
            assert!(d.mul(&h).unwrap().rel_diff(&h.mul(&d).unwrap()).unwrap() < 1e-12);
        }
    }

    #[test]
    fn kind_names_roundtrip() {
        for k in BlockKind::ALL {
            assert_eq!(k.to_string().parse::<BlockKind>().unwrap(), k);
        }
        assert!("X".parse::<BlockKind>().is_err());
    }
}
