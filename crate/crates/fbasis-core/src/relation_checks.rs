//! Residuals of the algebraic relations a weight table must satisfy.
//!
//! Scalar relations are checked term by term: the relative residual of
//! `Σ lhs = Σ rhs` is `|Σ lhs - Σ rhs| / max |term|`. Operator relations use the
//! max-norm of the difference over the larger max-norm of the two sides.
//!
//! Relation ids have the form `family.name:{indices}`:
//!
//! * `unitarity.a:{i}`: `a_i(x,y) a_i(y,x) = 1`
//! * `unitarity.b:{i,j}`: `b_ij(x,y) b_ji(y,x) + c_ij(x,y) c_ij(y,x) = 1`
//! * `unitarity.c:{i,j}`: `b_ij(x,y) c_ji(y,x) + c_ij(x,y) b_ij(y,x) = 0`
//! * `yb.r1` to `yb.r12`: the twelve scalar components of the Yang-Baxter equation
//!   `R12(x,y) R13(x,z) R23(y,z) = R23(y,z) R13(x,z) R12(x,y)`, listed on [`check_yb_weights`].
//!   Relations with three state indices are enumerated over pairwise-distinct triples.
//! * `invariant.*`, `closure.*`, `branch.*`: three-state invariants, see [`check_invariants`].
//! * `matrix.*`: operator identities, see [`check_matrix_relations`].

use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor_algebra::{embed_r, u1_generator, Dims, TensorOperator};
use crate::weights::{PairWeights, WeightTable};

/// Default pass threshold for relative residuals.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Outcome of checking one relation at one index tuple.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    /// Relation id including the index tuple, for example `yb.r3:{1,2,3}`.
    pub relation: String,
    /// State or site indices of the instance.
    pub indices: Vec<usize>,
    /// Rapidity labels the relation was evaluated at.
    pub arguments: Vec<String>,
    /// Absolute residual.
    pub absolute: f64,
    /// Relative residual.
    pub relative: f64,
    /// Whether the relative residual is within tolerance.
    pub pass: bool,
}

fn relation_id(name: &str, indices: &[usize]) -> String {
    format!("{name}:{{{}}}", indices.iter().join(","))
}

impl ResidualReport {
    /// Report for a scalar identity given as lists of terms on each side.
    pub fn from_terms(
        name: &str,
        indices: &[usize],
        arguments: Vec<String>,
        lhs: &[Complex64],
        rhs: &[Complex64],
        tol: f64,
    ) -> Self {
        let diff: Complex64 = lhs.iter().sum::<Complex64>() - rhs.iter().sum::<Complex64>();
        let scale = lhs.iter().chain(rhs).map(|t| t.norm()).fold(0.0, f64::max);
        Self::from_values(name, indices, arguments, diff.norm(), scale, tol)
    }

    /// Report for an operator identity `lhs = rhs`.
    pub fn from_operators(
        name: &str,
        indices: &[usize],
        arguments: Vec<String>,
        lhs: &TensorOperator,
        rhs: &TensorOperator,
        tol: f64,
    ) -> Result<Self> {
        let diff = lhs.sub(rhs)?.max_abs();
        let scale = lhs.max_abs().max(rhs.max_abs());
        Ok(Self::from_values(name, indices, arguments, diff, scale, tol))
    }

    /// Report from an absolute residual and the magnitude it is measured against.
    pub fn from_values(
        name: &str,
        indices: &[usize],
        arguments: Vec<String>,
        absolute: f64,
        scale: f64,
        tol: f64,
    ) -> Self {
        let relative = if scale > 0.0 { absolute / scale } else { absolute };
        Self {
            relation: relation_id(name, indices),
            indices: indices.to_vec(),
            arguments,
            absolute,
            relative,
            pass: relative <= tol,
        }
    }
}

/// Unitarity relations of the ordered pair `(x, y)` and its reverse.
pub fn check_unitarity_weights(table: &WeightTable, x: usize, y: usize, tol: f64) -> Result<Vec<ResidualReport>> {
    let (f, r) = (table.pair(x, y)?, table.pair(y, x)?);
    let args = vec![table.label(x).to_string(), table.label(y).to_string()];
    let one = [Complex64::new(1.0, 0.0)];
    let n = table.n();
    let mut out = Vec::new();
    for i in 1..=n {
        out.push(ResidualReport::from_terms(
            "unitarity.a",
            &[i],
            args.clone(),
            &[f.a(i) * r.a(i)],
            &one,
            tol,
        ));
    }
    for (i, j) in (1..=n).cartesian_product(1..=n).filter(|(i, j)| i != j) {
        out.push(ResidualReport::from_terms(
            "unitarity.b",
            &[i, j],
            args.clone(),
            &[f.b(i, j) * r.b(j, i), f.c(i, j) * r.c(i, j)],
            &one,
            tol,
        ));
    }
    for (i, j) in (1..=n).cartesian_product(1..=n).filter(|(i, j)| i != j) {
        out.push(ResidualReport::from_terms(
            "unitarity.c",
            &[i, j],
            args.clone(),
            &[f.b(i, j) * r.c(j, i), f.c(i, j) * r.b(i, j)],
            &[],
            tol,
        ));
    }
    Ok(out)
}

/// Scalar Yang-Baxter relations at the ordered triple `(x, y, z)`.
///
/// With `12 = (x,y)`, `13 = (x,z)`, `23 = (y,z)`:
///
/// * r1: `c_ij c_ji c_ij = c_ji c_ij c_ji`
/// * r2: `b_ij(12) b_ik(13) = b_ik(12) b_ij(13)`
/// * r3: `b_jk(13) b_ik(23) = b_ik(13) b_jk(23)`
/// * r4: `b_ij a_i c_ij + c_ji c_ij b_ij = a_i b_ij c_ij`
/// * r5: `b_ij a_i c_ji + c_ij c_ji b_ij = a_i b_ij c_ji`
/// * r6: `b_ji c_ij b_ij + c_ij a_i c_ij = a_i c_ij a_i`
/// * r7: `b_ij c_ij b_ji + c_ij a_j c_ij = a_j c_ij a_j`
/// * r8: `c_ij a_i b_ji + b_ji c_ij c_ji = c_ij b_ji a_i`
/// * r9: `c_ij a_j b_ij + b_ij c_ij c_ji = c_ij b_ij a_j`
/// * r10: `c_ij c_jk b_ij + b_ij c_ik c_ji = c_ik b_ij c_jk`
/// * r11: `c_kj c_ik b_jk + b_jk c_ij c_jk = c_ij b_jk c_ik`
/// * r12: `b_ij c_ik b_ji + c_ij c_jk c_ij = b_kj c_ik b_jk + c_jk c_ij c_jk`
///
/// where each product lists its factors in the order `12, 13, 23`.
pub fn check_yb_weights(table: &WeightTable, x: usize, y: usize, z: usize, tol: f64) -> Result<Vec<ResidualReport>> {
    let p = [table.pair(x, y)?, table.pair(x, z)?, table.pair(y, z)?];
    let args = vec![
        table.label(x).to_string(),
        table.label(y).to_string(),
        table.label(z).to_string(),
    ];
    Ok(yb_reports(&p, table.n(), &args, tol))
}

fn yb_reports(p: &[PairWeights<'_>; 3], n: usize, args: &[String], tol: f64) -> Vec<ResidualReport> {
    let a = |i: usize, s: usize| p[s].a(i);
    let b = |i: usize, j: usize, s: usize| p[s].b(i, j);
    let c = |i: usize, j: usize, s: usize| p[s].c(i, j);
    let mut out = Vec::new();
    let mut push = |name: &str, idx: &[usize], lhs: &[Complex64], rhs: &[Complex64]| {
        out.push(ResidualReport::from_terms(name, idx, args.to_vec(), lhs, rhs, tol));
    };
    let pairs: Vec<(usize, usize)> = (1..=n).cartesian_product(1..=n).filter(|(i, j)| i != j).collect();
    let triples: Vec<(usize, usize, usize)> = (1..=n)
        .cartesian_product(1..=n)
        .cartesian_product(1..=n)
        .map(|((i, j), k)| (i, j, k))
        .filter(|&(i, j, k)| i != j && j != k && i != k)
        .collect();
    for &(i, j) in &pairs {
        push(
            "yb.r1",
            &[i, j],
            &[c(i, j, 0) * c(j, i, 1) * c(i, j, 2)],
            &[c(j, i, 0) * c(i, j, 1) * c(j, i, 2)],
        );
    }
    for &(i, j, k) in &triples {
        push(
            "yb.r2",
            &[i, j, k],
            &[b(i, j, 0) * b(i, k, 1)],
            &[b(i, k, 0) * b(i, j, 1)],
        );
    }
    for &(i, j, k) in &triples {
        push(
            "yb.r3",
            &[i, j, k],
            &[b(j, k, 1) * b(i, k, 2)],
            &[b(i, k, 1) * b(j, k, 2)],
        );
    }
    for &(i, j) in &pairs {
        push(
            "yb.r4",
            &[i, j],
            &[b(i, j, 0) * a(i, 1) * c(i, j, 2), c(j, i, 0) * c(i, j, 1) * b(i, j, 2)],
            &[a(i, 0) * b(i, j, 1) * c(i, j, 2)],
        );
    }
    for &(i, j) in &pairs {
        push(
            "yb.r5",
            &[i, j],
            &[b(i, j, 0) * a(i, 1) * c(j, i, 2), c(i, j, 0) * c(j, i, 1) * b(i, j, 2)],
            &[a(i, 0) * b(i, j, 1) * c(j, i, 2)],
        );
    }
    for &(i, j) in &pairs {
        push(
            "yb.r6",
            &[i, j],
            &[b(j, i, 0) * c(i, j, 1) * b(i, j, 2), c(i, j, 0) * a(i, 1) * c(i, j, 2)],
            &[a(i, 0) * c(i, j, 1) * a(i, 2)],
        );
    }
    for &(i, j) in &pairs {
        push(
            "yb.r7",
            &[i, j],
            &[b(i, j, 0) * c(i, j, 1) * b(j, i, 2), c(i, j, 0) * a(j, 1) * c(i, j, 2)],
            &[a(j, 0) * c(i, j, 1) * a(j, 2)],
        );
    }
    for &(i, j) in &pairs {
        push(
            "yb.r8",
            &[i, j],
            &[c(i, j, 0) * a(i, 1) * b(j, i, 2), b(j, i, 0) * c(i, j, 1) * c(j, i, 2)],
            &[c(i, j, 0) * b(j, i, 1) * a(i, 2)],
        );
    }
    for &(i, j) in &pairs {
        push(
            "yb.r9",
            &[i, j],
            &[c(i, j, 0) * a(j, 1) * b(i, j, 2), b(i, j, 0) * c(i, j, 1) * c(j, i, 2)],
            &[c(i, j, 0) * b(i, j, 1) * a(j, 2)],
        );
    }
    for &(i, j, k) in &triples {
        push(
            "yb.r10",
            &[i, j, k],
            &[
                c(i, j, 0) * c(j, k, 1) * b(i, j, 2),
                b(i, j, 0) * c(i, k, 1) * c(j, i, 2),
            ],
            &[c(i, k, 0) * b(i, j, 1) * c(j, k, 2)],
        );
    }
    for &(i, j, k) in &triples {
        push(
            "yb.r11",
            &[i, j, k],
            &[
                c(k, j, 0) * c(i, k, 1) * b(j, k, 2),
                b(j, k, 0) * c(i, j, 1) * c(j, k, 2),
            ],
            &[c(i, j, 0) * b(j, k, 1) * c(i, k, 2)],
        );
    }
    for &(i, j, k) in &triples {
        push(
            "yb.r12",
            &[i, j, k],
            &[
                b(i, j, 0) * c(i, k, 1) * b(j, i, 2),
                c(i, j, 0) * c(j, k, 1) * c(i, j, 2),
            ],
            &[
                b(k, j, 0) * c(i, k, 1) * b(j, k, 2),
                c(j, k, 0) * c(i, j, 1) * c(j, k, 2),
            ],
        );
    }
    out
}

/// Unitarity on every ordered pair of distinct rapidities and Yang-Baxter on every
/// ordered triple of distinct rapidities.
pub fn check_all_weights(table: &WeightTable, tol: f64) -> Result<Vec<ResidualReport>> {
    let r = table.len();
    let mut out = Vec::new();
    for (x, y) in (0..r).tuple_combinations() {
        out.extend(check_unitarity_weights(table, x, y, tol)?);
    }
    for triple in (0..r).permutations(3) {
        out.extend(check_yb_weights(table, triple[0], triple[1], triple[2], tol)?);
    }
    Ok(out)
}

struct InvariantSet {
    d: [Complex64; 10],
    branch: [Complex64; 3],
    d6_terms: [Complex64; 2],
}

fn invariants_of(p: &PairWeights<'_>) -> InvariantSet {
    let (a1, a2, a3) = (p.a(1), p.a(2), p.a(3));
    let (b12, b13, b21, b23, b31, b32) = (p.b(1, 2), p.b(1, 3), p.b(2, 1), p.b(2, 3), p.b(3, 1), p.b(3, 2));
    let (c12, c13, c21, c23, c31, c32) = (p.c(1, 2), p.c(1, 3), p.c(2, 1), p.c(2, 3), p.c(3, 1), p.c(3, 2));
    let d1 = b32 / b12;
    let d2 = b31 / b21;
    let d3 = b13 / b23;
    let d4 = (a1 * a2 + b12 * b21 - c12 * c21) / (a1 * b12);
    let d5 = (a3 * a2 + d1 * b12 * b23 - c23 * c32) / (a3 * b12);
    let d6 = (d1 * a1 * b23 - a3 * b21) / (b23 * b21);
    let d7 = d1 * (a1 * c23 - c13 * c21) / (c23 * b21);
    let d8 = (d1 * a1 * c12 * b23 - c13 * b21 * c32) / (c12 * b23 * b21);
    let d9 = d1 * (a1 * c32 - c12 * c31) / (b21 * c32);
    let d10 = (d1 * a1 * b23 * c21 - c23 * b21 * c31) / (b23 * b21 * c21);
    InvariantSet {
        d: [d1, d2, d3, d4, d5, d6, d7, d8, d9, d10],
        branch: [
            a2 * b21 / (a1 * b12),
            d1 * a2 * b23 / (a3 * b12),
            d1 * (d4 * d7 - d1) / (d7 * d7),
        ],
        d6_terms: [d1 * a1 * b23, a3 * b21],
    }
}

/// Three-state invariants of the weights.
///
/// For every rapidity `z` the quantities `δ_k(x, z)` built from the pair `(x, z)` must not
/// depend on `x`. Reported ids:
///
/// * `invariant.delta{k}.constant:{}` compares `δ_k(x, z)` with `δ_k(x0, z)` for `k ≠ 6`,
///   where `x0` is the first rapidity other than `z`.
/// * `closure.delta3`, `closure.delta5`, `closure.delta6`, `closure.delta8`, `closure.delta9`,
///   `closure.delta10` check `δ3 = δ7² / (δ2 (δ4δ7 - δ1))`, `δ5 = δ4`, `δ6 = 0`, `δ8 = δ7`,
///   `δ9 = δ1δ7 / (δ4δ7 - δ1)` and `δ10 = δ9` at each pair.
/// * `branch.first` and `branch.second` check
///   `a2 b21 / (a1 b12) = δ1 a2 b23 / (a3 b12) = δ1 (δ4δ7 - δ1) / δ7²`.
pub fn check_invariants(table: &WeightTable, tol: f64) -> Result<Vec<ResidualReport>> {
    if table.n() != 3 {
        return Err(Error::RankMismatch {
            expected: 3,
            found: table.n(),
        });
    }
    let r = table.len();
    if r < 3 {
        return Err(Error::InsufficientRapidities { needed: 3, found: r });
    }
    let mut out = Vec::new();
    for z in 0..r {
        let xs: Vec<usize> = (0..r).filter(|&x| x != z).collect();
        let sets: Vec<InvariantSet> = xs
            .iter()
            .map(|&x| table.pair(x, z).map(|p| invariants_of(&p)))
            .collect::<Result<_>>()?;
        let x0 = xs[0];
        for (k, (&x, s)) in xs.iter().zip(&sets).enumerate() {
            let args = vec![table.label(x).to_string(), table.label(z).to_string()];
            if k > 0 {
                for m in (0..10).filter(|&m| m != 5) {
                    let name = format!("invariant.delta{}.constant", m + 1);
                    out.push(ResidualReport::from_terms(
                        &name,
                        &[],
                        vec![args[0].clone(), table.label(x0).to_string(), args[1].clone()],
                        &[s.d[m]],
                        &[sets[0].d[m]],
                        tol,
                    ));
                }
            }
            let d = &s.d;
            let closures = [
                ("closure.delta3", d[2], d[6] * d[6] / (d[1] * (d[3] * d[6] - d[0]))),
                ("closure.delta5", d[4], d[3]),
                ("closure.delta8", d[7], d[6]),
                ("closure.delta9", d[8], d[0] * d[6] / (d[3] * d[6] - d[0])),
                ("closure.delta10", d[9], d[8]),
            ];
            for (name, l, rr) in closures {
                out.push(ResidualReport::from_terms(name, &[], args.clone(), &[l], &[rr], tol));
            }
            out.push(ResidualReport::from_terms(
                "closure.delta6",
                &[],
                args.clone(),
                &[s.d6_terms[0]],
                &[s.d6_terms[1]],
                tol,
            ));
            out.push(ResidualReport::from_terms(
                "branch.first",
                &[],
                args.clone(),
                &[s.branch[0]],
                &[s.branch[1]],
                tol,
            ));
            out.push(ResidualReport::from_terms(
                "branch.second",
                &[],
                args,
                &[s.branch[1]],
                &[s.branch[2]],
                tol,
            ));
        }
    }
    Ok(out)
}

/// Product `R_{a,L'} ... R_{a,1'}` on `aux` and the quantum sites, evaluated at `mu` and the
/// site rapidities `xi` (registration indices).
pub fn monodromy_product(
    table: &WeightTable,
    mu: usize,
    aux: usize,
    quantum_sites: &[usize],
    xi: &[usize],
    dims: Dims,
) -> Result<TensorOperator> {
    let mut acc = TensorOperator::identity(dims);
    for (&s, &x) in quantum_sites.iter().zip(xi) {
        acc = embed_r(table, aux, s, mu, x, dims)?.mul(&acc)?;
    }
    Ok(acc)
}

/// Operator identities on `L = xi.len()` sites.
///
/// * `matrix.yb:{i,j,k}` for ordered distinct site triples:
///   `R_ij R_ik R_jk = R_jk R_ik R_ij` at the site rapidities.
/// * `matrix.unitarity:{i,j}`: `R_ij(ξi,ξj) R_ji(ξj,ξi) = 1`.
/// * `matrix.u1.h{g}:{i,j}`: `R_ij` commutes with `h_g` on sites `i` and `j`.
/// * `matrix.yb-algebra:{}` when `aux = Some((μ, ν))`:
///   `R_ab(μ,ν) T_a(μ) T_b(ν) = T_b(ν) T_a(μ) R_ab(μ,ν)`.
pub fn check_matrix_relations(
    table: &WeightTable,
    xi: &[usize],
    aux: Option<(usize, usize)>,
    tol: f64,
) -> Result<Vec<ResidualReport>> {
    let l = xi.len();
    let n = table.n();
    let dims = Dims::new(n, l)?;
    let label = |x: usize| table.label(x).to_string();
    let r = |i: usize, j: usize| embed_r(table, i, j, xi[i - 1], xi[j - 1], dims);
    let mut out = Vec::new();
    for t in (1..=l).permutations(3) {
        let (i, j, k) = (t[0], t[1], t[2]);
        let (rij, rik, rjk) = (r(i, j)?, r(i, k)?, r(j, k)?);
        let lhs = rij.mul(&rik)?.mul(&rjk)?;
        let rhs = rjk.mul(&rik)?.mul(&rij)?;
        let args = vec![label(xi[i - 1]), label(xi[j - 1]), label(xi[k - 1])];
        out.push(ResidualReport::from_operators(
            "matrix.yb",
            &[i, j, k],
            args,
            &lhs,
            &rhs,
            tol,
        )?);
    }
    let id = TensorOperator::identity(dims);
    for p in (1..=l).permutations(2) {
        let (i, j) = (p[0], p[1]);
        let rij = r(i, j)?;
        let args = vec![label(xi[i - 1]), label(xi[j - 1])];
        let prod = rij.mul(&r(j, i)?)?;
        out.push(ResidualReport::from_operators(
            "matrix.unitarity",
            &[i, j],
            args.clone(),
            &prod,
            &id,
            tol,
        )?);
        if i < j {
            for g in 1..n {
                let h = u1_generator(g, i, dims)?.add(&u1_generator(g, j, dims)?)?;
                let name = format!("matrix.u1.h{g}");
                out.push(ResidualReport::from_operators(
                    &name,
                    &[i, j],
                    args.clone(),
                    &rij.mul(&h)?,
                    &h.mul(&rij)?,
                    tol,
                )?);
            }
        }
    }
    if let Some((mu, nu)) = aux {
        let big = Dims::new(n, l + 2)?;
        let quantum: Vec<usize> = (3..l + 3).collect();
        let ta = monodromy_product(table, mu, 1, &quantum, xi, big)?;
        let tb = monodromy_product(table, nu, 2, &quantum, xi, big)?;
        let rab = embed_r(table, 1, 2, mu, nu, big)?;
        let lhs = rab.mul(&ta)?.mul(&tb)?;
        let rhs = tb.mul(&ta)?.mul(&rab)?;
        out.push(ResidualReport::from_operators(
            "matrix.yb-algebra",
            &[],
            vec![label(mu), label(nu)],
            &lhs,
            &rhs,
            tol,
        )?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{build_del_pezzo, build_six_vertex, DelPezzoParams, RapiditySet, WeightKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(seed: u64, sites: usize, aux: usize) -> WeightTable {
        let set = RapiditySet::generic(sites, aux);
        let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
        let p = DelPezzoParams::sample(&mut ChaCha8Rng::seed_from_u64(seed), &labels);
        build_del_pezzo(&p, &set).unwrap()
    }

    #[test]
    fn del_pezzo_weights_satisfy_all_relations() {
        let t = table(21, 4, 0);
        let reports = check_all_weights(&t, DEFAULT_TOLERANCE).unwrap();
        let worst = reports.iter().map(|r| r.relative).fold(0.0, f64::max);
        assert!(reports.iter().all(|r| r.pass), "worst {worst:e}");
        let yb: Vec<_> = reports.iter().filter(|r| r.relation.starts_with("yb.")).collect();
        assert_eq!(yb.len(), 24 * (6 * 7 + 6 * 5));
    }

    #[test]
    fn invariants_hold() {
        let t = table(22, 3, 1);
        let reports = check_invariants(&t, DEFAULT_TOLERANCE).unwrap();
        assert!(!reports.is_empty());
        for r in &reports {
            assert!(r.pass, "{} {:e}", r.relation, r.relative);
        }
    }

    #[test]
    fn matrix_relations_hold() {
        let t = table(23, 3, 2);
        let reports = check_matrix_relations(&t, &[0, 1, 2], Some((3, 4)), DEFAULT_TOLERANCE).unwrap();
        for r in &reports {
            assert!(r.pass, "{} {:e}", r.relation, r.relative);
        }
        assert!(reports.iter().any(|r| r.relation == "matrix.yb-algebra:{}"));
    }

    #[test]
    fn corrupted_weight_is_named() {
        let t = table(24, 3, 0);
        let v = t.weight("xi1", "xi2", WeightKind::A(1)).unwrap();
        let bad = t.with_weight("xi1", "xi2", WeightKind::A(1), v * 2.0).unwrap();
        let failed: Vec<String> = check_all_weights(&bad, DEFAULT_TOLERANCE)
            .unwrap()
            .into_iter()
            .filter(|r| !r.pass)
            .map(|r| r.relation)
            .collect();
        assert!(failed.contains(&"unitarity.a:{1}".to_string()));
    }

    #[test]
    fn six_vertex_relations_hold() {
        let set = RapiditySet::new(
            vec![
                ("u".into(), Complex64::new(0.1, 0.3)),
                ("v".into(), Complex64::new(-0.4, 0.2)),
                ("w".into(), Complex64::new(0.25, -0.1)),
            ],
            vec![],
        )
        .unwrap();
        let t = build_six_vertex(Complex64::new(0.6, 0.3), Complex64::new(0.2, 0.1), &set).unwrap();
        assert!(check_all_weights(&t, DEFAULT_TOLERANCE).unwrap().iter().all(|r| r.pass));
        assert!(check_matrix_relations(&t, &[0, 1, 2], None, DEFAULT_TOLERANCE)
            .unwrap()
            .iter()
            .all(|r| r.pass));
        assert!(matches!(check_invariants(&t, 1e-9), Err(Error::RankMismatch { .. })));
    }

    #[test]
    fn vanishing_relation_uses_term_scale() {
        let r = ResidualReport::from_terms(
            "x",
            &[1],
            vec![],
            &[Complex64::new(2.0, 0.0)],
            &[Complex64::new(2.0, 1e-12)],
            1e-9,
        );
        assert!(r.pass);
        assert_eq!(r.relation, "x:{1}");
    }
}
