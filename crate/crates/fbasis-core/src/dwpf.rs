//! Domain-wall partition functions of the three-state model.
//!
//! Single-type functions sandwich L copies of one creation or annihilation block between
//! ferromagnetic reference states:
//!
//! | kind | block | bra | ket | c-weight | b-weight | θ up | θ down |
//! |------|-------|-----|-----|----------|----------|------|--------|
//! | C2   | T_32  | 2   | 3   | c32      | b32      | θ3   | θ2     |
//! | B2   | T_23  | 3   | 2   | c23      | b32      | θ2   | θ3     |
//! | C1   | T_31  | 1   | 3   | c31      | b21      | θ3   | θ1     |
//! | B1   | T_13  | 3   | 1   | c13      | b31      | θ1   | θ3     |
//!
//! C-type functions apply `C(ν1)` first, `⟨bra| C(νL) ... C(ν1) |ket⟩`; B-type functions read
//! `⟨bra| B(μ1) ... B(μL) |ket⟩`. Each is evaluated three ways: by direct contraction of
//! untwisted blocks, by a recursion peeling one rapidity pair per step, and as an explicit
//! sum over permutations. θ factors compare positions within the current rapidity list.
//!
//! The functions are not symmetric in the auxiliary rapidities alone: exchanging adjacent
//! `a_j, a_{j+1}` multiplies the value by `a_k(a_j, a_{j+1}) / a3(a_j, a_{j+1})`, where `k` is the
//! operator type.
//!
//! Mixed functions carry M type-1 operators and a reference pattern with state 1 at the
//! positions `q` and state 2 elsewhere; they are compared with closed forms involving a
//! single matrix element of `𝓕` or `𝓕^{-1}`.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::f_matrix::FMatrixBundle;
use crate::monodromy::{build_monodromy, Lookup};
use crate::relation_checks::ResidualReport;
use crate::summation::sorted_sum;
use crate::tensor_algebra::{Dims, MultiIndex, TensorOperator};
use crate::weights::{WeightKind, WeightTable};

/// Largest L for which the permutation-sum route runs by default (5040 terms).
pub const EXACT_SUM_CAP: usize = 7;

/// Kind of domain-wall partition function.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DwpfKind {
    /// `⟨2| C2(νL) ... C2(ν1) |3⟩`.
    C2,
    /// `⟨3| B2(μ1) ... B2(μL) |2⟩`.
    B2,
    /// `⟨1| C1(νL) ... C1(ν1) |3⟩`.
    C1,
    /// `⟨3| B1(μ1) ... B1(μL) |1⟩`.
    B1,
    /// `⟨pattern| C2(νL) ... C2(ν_{M+1}) C1(νM) ... C1(ν1) |3⟩`.
    MixedC,
    /// `⟨3| B1(μ1) ... B1(μM) B2(μ_{M+1}) ... B2(μL) |pattern⟩`.
    MixedB,
}

impl DwpfKind {
    /// The four single-type kinds.
    pub const SINGLE: [DwpfKind; 4] = [DwpfKind::C2, DwpfKind::B2, DwpfKind::C1, DwpfKind::B1];

    /// Whether the kind is one of the mixed kinds.
    pub fn is_mixed(self) -> bool {
        matches!(self, DwpfKind::MixedC | DwpfKind::MixedB)
    }
}

impl fmt::Display for DwpfKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DwpfKind::C2 => "C2",
            DwpfKind::B2 => "B2",
            DwpfKind::C1 => "C1",
            DwpfKind::B1 => "B1",
            DwpfKind::MixedC => "mixedC",
            DwpfKind::MixedB => "mixedB",
        };
        f.write_str(s)
    }
}

impl FromStr for DwpfKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "C2" => Ok(DwpfKind::C2),
            "B2" => Ok(DwpfKind::B2),
            "C1" => Ok(DwpfKind::C1),
            "B1" => Ok(DwpfKind::B1),
            "mixedC" => Ok(DwpfKind::MixedC),
            "mixedB" => Ok(DwpfKind::MixedB),
            _ => Err(Error::UnknownKind(s.to_string())),
        }
    }
}

struct Layout {
    block: (usize, usize),
    bra: usize,
    ket: usize,
    c: WeightKind,
    b: WeightKind,
    theta_up: usize,
    theta_down: usize,
    c_type: bool,
}

fn layout(kind: DwpfKind) -> Result<Layout> {
    use WeightKind::{B, C};
    let s = |block, bra, ket, c, b, theta_up, theta_down, c_type| Layout {
        block,
        bra,
        ket,
        c,
        b,
        theta_up,
        theta_down,
        c_type,
    };
    match kind {
        DwpfKind::C2 => Ok(s((3, 2), 2, 3, C(3, 2), B(3, 2), 3, 2, true)),
        DwpfKind::B2 => Ok(s((2, 3), 3, 2, C(2, 3), B(3, 2), 2, 3, false)),
        DwpfKind::C1 => Ok(s((3, 1), 1, 3, C(3, 1), B(2, 1), 3, 1, true)),
        DwpfKind::B1 => Ok(s((1, 3), 3, 1, C(1, 3), B(3, 1), 1, 3, false)),
        _ => Err(Error::Unsupported(format!(
            "{kind} is not a single-type partition function"
        ))),
    }
}

/// A partition function to evaluate: kind, auxiliary rapidities, inhomogeneities and,
/// for mixed kinds, the 1-based positions `q` of state 1 in the reference pattern.
#[derive(Clone, Debug, PartialEq)]
pub struct DwpfInstance {
    kind: DwpfKind,
    aux: Vec<usize>,
    xi: Vec<usize>,
    q: Vec<usize>,
}

impl DwpfInstance {
    /// Validates an instance. `aux` and `xi` are registration indices of equal length;
    /// `q` must be strictly increasing within `1..=L` and empty for single kinds.
    pub fn new(kind: DwpfKind, aux: Vec<usize>, xi: Vec<usize>, q: Vec<usize>) -> Result<Self> {
        if aux.len() != xi.len() {
            return Err(Error::DimensionMismatch {
                left: format!("{} auxiliary rapidities", aux.len()),
                right: format!("{} inhomogeneities", xi.len()),
            });
        }
        if xi.is_empty() {
            return Err(Error::InsufficientRapidities { needed: 1, found: 0 });
        }
        if !kind.is_mixed() && !q.is_empty() {
            return Err(Error::Unsupported(format!("{kind} takes no pattern positions")));
        }
        let l = xi.len();
        for (k, &p) in q.iter().enumerate() {
            if p == 0 || p > l || (k > 0 && q[k - 1] >= p) {
                return Err(Error::IndexOutOfRange {
                    what: "pattern position",
                    value: p,
                    max: l,
                });
            }
        }
        Ok(Self { kind, aux, xi, q })
    }

    /// Kind of the instance.
    pub fn kind(&self) -> DwpfKind {
        self.kind
    }

    /// Number of sites L.
    pub fn len(&self) -> usize {
        self.xi.len()
    }

    /// Always false: instances have at least one site.
    pub fn is_empty(&self) -> bool {
        self.xi.is_empty()
    }

    /// Number of type-1 operators M in a mixed instance.
    pub fn m(&self) -> usize {
        self.q.len()
    }

    /// Auxiliary rapidities.
    pub fn aux(&self) -> &[usize] {
        &self.aux
    }

    /// Inhomogeneities.
    pub fn xi(&self) -> &[usize] {
        &self.xi
    }

    /// Pattern positions of state 1.
    pub fn q(&self) -> &[usize] {
        &self.q
    }
}

fn basis_vector(dims: Dims, pattern: &[usize]) -> Result<Vec<Complex64>> {
    let idx = MultiIndex::new(pattern.to_vec(), dims)?.linear(dims);
    let mut v = vec![Complex64::new(0.0, 0.0); dims.dim()];
    v[idx] = Complex64::new(1.0, 0.0);
    Ok(v)
}

fn pattern(l: usize, ones: &[usize]) -> Vec<usize> {
    (1..=l).map(|s| if ones.contains(&s) { 1 } else { 2 }).collect()
}

/// One block application: auxiliary rapidity and block indices `(i, j)`.
type Step = (usize, (usize, usize));

fn apply_chain(table: &WeightTable, xi: &[usize], steps: &[Step], ket: &[usize]) -> Result<Vec<Complex64>> {
    let dims = Dims::new(table.n(), xi.len())?;
    let mut v = basis_vector(dims, ket)?;
    for &(mu, (i, j)) in steps {
        let blocks = build_monodromy(table, mu, xi)?;
        v = blocks.block(i, j)?.apply(&v)?;
    }
    Ok(v)
}

/// Evaluates the instance by applying untwisted monodromy blocks to reference states.
pub fn dwpf_direct(inst: &DwpfInstance, table: &WeightTable) -> Result<Complex64> {
    let l = inst.len();
    let dims = Dims::new(table.n(), l)?;
    let m = inst.m();
    let (steps, bra, ket): (Vec<Step>, Vec<usize>, Vec<usize>) = match inst.kind {
        DwpfKind::MixedC => {
            let steps = inst
                .aux
                .iter()
                .enumerate()
                .map(|(k, &nu)| (nu, if k < m { (3, 1) } else { (3, 2) }))
                .collect();
            (steps, pattern(l, &inst.q), vec![3; l])
        }
        DwpfKind::MixedB => {
            let steps = inst
                .aux
                .iter()
                .enumerate()
                .rev()
                .map(|(k, &mu)| (mu, if k < m { (1, 3) } else { (2, 3) }))
                .collect();
            (steps, vec![3; l], pattern(l, &inst.q))
        }
        kind => {
            let s = layout(kind)?;
            let steps: Vec<Step> = if s.c_type {
                inst.aux.iter().map(|&a| (a, s.block)).collect()
            } else {
                inst.aux.iter().rev().map(|&a| (a, s.block)).collect()
            };
            (steps, vec![s.bra; l], vec![s.ket; l])
        }
    };
    let v = apply_chain(table, &inst.xi, &steps, &ket)?;
    Ok(v[MultiIndex::new(bra, dims)?.linear(dims)])
}

/// Evaluates a single-type instance by the recursion over the first auxiliary rapidity:
///
/// `Z_L = Σ_p c(a1,ξp) Π_{i≠p} a3(a1,ξi) θ_up(ξi,ξp) / (b(ξi,ξp) θ_down(ξp,ξi)) Π_{j≥2} b(aj,ξp) Z_{L-1}`
///
/// where `Z_{L-1}` drops `a1` and `ξp`.
pub fn dwpf_recurrence(inst: &DwpfInstance, table: &WeightTable) -> Result<Complex64> {
    let s = layout(inst.kind)?;
    recur(&s, &Lookup { table }, &inst.aux, &inst.xi)
}

fn recur(s: &Layout, lk: &Lookup<'_>, aux: &[usize], xs: &[usize]) -> Result<Complex64> {
    let l = xs.len();
    if l == 0 {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let a0 = aux[0];
    let mut terms = Vec::with_capacity(l);
    for p in 0..l {
        let mut t = lk.w(s.c, a0, xs[p])?;
        for i in (0..l).filter(|&i| i != p) {
            t *= lk.w(WeightKind::A(3), a0, xs[i])? * lk.theta(s.theta_up, xs, i, p)?
                / (lk.den(s.b, xs[i], xs[p])? * lk.theta_den(s.theta_down, xs, p, i)?);
        }
        for &aj in &aux[1..] {
            t *= lk.w(s.b, aj, xs[p])?;
        }
        let rest: Vec<usize> = xs
            .iter()
            .enumerate()
            .filter(|&(i, _)| i != p)
            .map(|(_, &x)| x)
            .collect();
        terms.push(t * recur(s, lk, &aux[1..], &rest)?);
    }
    Ok(sorted_sum(terms))
}

/// Evaluates a single-type instance as the explicit sum over `σ ∈ S_L`:
///
/// `Σ_σ Π_i c(ai,ξσ(i)) Π_{j<k} a3(aj,ξσ(k)) b(ak,ξσ(j)) θ_up(ξσ(k),ξσ(j)) / (b(ξσ(k),ξσ(j)) θ_down(ξσ(j),ξσ(k)))`
pub fn dwpf_exact(inst: &DwpfInstance, table: &WeightTable) -> Result<Complex64> {
    let s = layout(inst.kind)?;
    exact_sum(&s, &Lookup { table }, &inst.aux, &inst.xi)
}

fn exact_sum(s: &Layout, lk: &Lookup<'_>, aux: &[usize], xs: &[usize]) -> Result<Complex64> {
    let l = xs.len();
    let mut terms = Vec::new();
    for sigma in (0..l).permutations(l) {
        let mut t = Complex64::new(1.0, 0.0);
        for i in 0..l {
            t *= lk.w(s.c, aux[i], xs[sigma[i]])?;
        }
        for j in 0..l {
            for k in j + 1..l {
                let (sj, sk) = (sigma[j], sigma[k]);
                t *= lk.w(WeightKind::A(3), aux[j], xs[sk])?
                    * lk.w(s.b, aux[k], xs[sj])?
                    * lk.theta(s.theta_up, xs, sk, sj)?
                    / (lk.den(s.b, xs[sk], xs[sj])? * lk.theta_den(s.theta_down, xs, sj, sk)?);
            }
        }
        terms.push(t);
    }
    Ok(sorted_sum(terms))
}

/// Matrix element `⟨bra| 𝓕 |ket⟩`, or `⟨bra| 𝓕^{-1} |ket⟩` when `use_inverse` is set.
///
/// Patterns list the local state of every site.
pub fn f_sandwich(bundle: &FMatrixBundle, bra: &[usize], ket: &[usize], use_inverse: bool) -> Result<Complex64> {
    let op = if use_inverse {
        &bundle.curly_f_inverse
    } else {
        &bundle.curly_f
    };
    let dims = op.dims();
    let r = MultiIndex::new(bra.to_vec(), dims)?;
    let c = MultiIndex::new(ket.to_vec(), dims)?;
    Ok(op.element(&r, &c))
}

/// Evaluates a mixed instance from its closed form: a sum over position sets
/// `p_1 < ... < p_M` of an F-matrix element, b-weight and `a3` dressings, and the
/// permutation sums of a type-1 function on `ξ_p` and a type-2 function on the remaining sites.
pub fn mixed_dwpf_formula(inst: &DwpfInstance, table: &WeightTable, bundle: &FMatrixBundle) -> Result<Complex64> {
    let c_type = match inst.kind {
        DwpfKind::MixedC => true,
        DwpfKind::MixedB => false,
        kind => return Err(Error::Unsupported(format!("{kind} is not a mixed partition function"))),
    };
    if bundle.xi != inst.xi {
        return Err(Error::DimensionMismatch {
            left: "F-matrix rapidities".to_string(),
            right: "instance rapidities".to_string(),
        });
    }
    let lk = Lookup { table };
    let (l, m) = (inst.len(), inst.m());
    let xs = &inst.xi;
    let aux = &inst.aux;
    let (one_kind, two_kind, bw) = if c_type {
        (DwpfKind::C1, DwpfKind::C2, WeightKind::B(2, 1))
    } else {
        (DwpfKind::B1, DwpfKind::B2, WeightKind::B(3, 1))
    };
    let (s1, s2) = (layout(one_kind)?, layout(two_kind)?);
    let q_pattern = pattern(l, &inst.q);
    let mut terms = Vec::new();
    for p in (1..=l).combinations(m) {
        let p_pattern = pattern(l, &p);
        let sandwich = if c_type {
            f_sandwich(bundle, &q_pattern, &p_pattern, true)?
        } else {
            f_sandwich(bundle, &p_pattern, &q_pattern, false)?
        };
        if sandwich == Complex64::new(0.0, 0.0) {
            continue;
        }
        let mut t = sandwich;
        for &ai in &aux[m..] {
            for &pj in &p {
                t *= lk.w(bw, ai, xs[pj - 1])?;
            }
        }
        let rest: Vec<usize> = (1..=l).filter(|s| !p.contains(s)).collect();
        for (k, &pk) in p.iter().enumerate() {
            for &r in &rest {
                let a3 = lk.w(WeightKind::A(3), aux[k], xs[r - 1])?;
                t *= if c_type {
                    a3 * lk.theta(3, xs, r - 1, pk - 1)?
                } else {
                    a3 / (lk.den(bw, xs[r - 1], xs[pk - 1])? * lk.theta_den(3, xs, pk - 1, r - 1)?)
                };
            }
        }
        let xp: Vec<usize> = p.iter().map(|&s| xs[s - 1]).collect();
        let xr: Vec<usize> = rest.iter().map(|&s| xs[s - 1]).collect();
        t *= exact_sum(&s1, &lk, &aux[..m], &xp)?;
        t *= exact_sum(&s2, &lk, &aux[m..], &xr)?;
        terms.push(t);
    }
    Ok(sorted_sum(terms))
}

/// Values of an instance along every applicable route.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteValues {
    /// Direct contraction.
    pub direct: [f64; 2],
    /// Recursion, for single kinds.
    pub recurrence: Option<[f64; 2]>,
    /// Permutation sum, for single kinds with `L ≤ EXACT_SUM_CAP`.
    pub exact: Option<[f64; 2]>,
    /// Closed form with an F-matrix element, for mixed kinds.
    pub formula: Option<[f64; 2]>,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Relative distance `|a - b| / |a|`, or `|b|` when `a` vanishes.
pub fn relative_gap(reference: Complex64, other: Complex64) -> f64 {
    let d = (reference - other).norm();
    if reference.norm() > 0.0 {
        d / reference.norm()
    } else {
        d
    }
}

/// Evaluates every applicable route and reports the gap of each alternative to the direct value.
///
/// Report ids are `dwpf.{kind}.{route}:{L,M}` and arguments hold the auxiliary labels.
pub fn evaluate_routes(
    inst: &DwpfInstance,
    table: &WeightTable,
    tol: f64,
) -> Result<(RouteValues, Vec<ResidualReport>)> {
    let direct = dwpf_direct(inst, table)?;
    let mut values = RouteValues {
        direct: pair(direct),
        recurrence: None,
        exact: None,
        formula: None,
    };
    let mut alt = Vec::new();
    if inst.kind.is_mixed() {
        let bundle = FMatrixBundle::build(table, &inst.xi)?;
        let f = mixed_dwpf_formula(inst, table, &bundle)?;
        values.formula = Some(pair(f));
        alt.push(("formula", f));
    } else {
        let r = dwpf_recurrence(inst, table)?;
        values.recurrence = Some(pair(r));
        alt.push(("recurrence", r));
        if inst.len() <= EXACT_SUM_CAP {
            let e = dwpf_exact(inst, table)?;
            values.exact = Some(pair(e));
            alt.push(("exact", e));
        }
    }
    let args: Vec<String> = inst.aux.iter().map(|&a| table.label(a).to_string()).collect();
    let reports = alt
        .into_iter()
        .map(|(route, v)| {
            let name = format!("dwpf.{}.{route}", inst.kind);
            ResidualReport::from_values(
                &name,
                &[inst.len(), inst.m()],
                args.clone(),
                (direct - v).norm(),
                direct.norm(),
                tol,
            )
        })
        .collect();
    Ok((values, reports))
}

/// Exchange relations between creation (or annihilation) operators of the two types.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommuteKind {
    /// `C1(ν) C2(μ) = (a3/b21)(μ,ν) C2(μ) C1(ν) - (c12/b21)(μ,ν) C2(ν) C1(μ)`.
    CC,
    /// `B2(μ) B1(ν) = (a3/b21)(μ,ν) B1(ν) B2(μ) - (c21/b21)(μ,ν) B1(μ) B2(ν)`.
    BB,
}

/// Checks an exchange relation as an operator identity on the quantum space.
///
/// The residual is measured against the largest of the three operator terms, which keeps
/// it meaningful when both sides vanish. Reported as `commute.cc:{L}` or `commute.bb:{L}`.
pub fn commute_check(
    kind: CommuteKind,
    table: &WeightTable,
    mu: usize,
    nu: usize,
    xi: &[usize],
    tol: f64,
) -> Result<ResidualReport> {
    let lk = Lookup { table };
    let bm = build_monodromy(table, mu, xi)?;
    let bn = build_monodromy(table, nu, xi)?;
    let b21 = lk.den(WeightKind::B(2, 1), mu, nu)?;
    let a3 = lk.w(WeightKind::A(3), mu, nu)?;
    let (lhs, t1, t2, name): (TensorOperator, TensorOperator, TensorOperator, &str) = match kind {
        CommuteKind::CC => {
            let c12 = lk.w(WeightKind::C(1, 2), mu, nu)?;
            (
                bn.block(3, 1)?.mul(bm.block(3, 2)?)?,
                bm.block(3, 2)?.mul(bn.block(3, 1)?)?.scale(a3 / b21),
                bn.block(3, 2)?.mul(bm.block(3, 1)?)?.scale(-c12 / b21),
                "commute.cc",
            )
        }
        CommuteKind::BB => {
            let c21 = lk.w(WeightKind::C(2, 1), mu, nu)?;
            (
                bm.block(2, 3)?.mul(bn.block(1, 3)?)?,
                bn.block(1, 3)?.mul(bm.block(2, 3)?)?.scale(a3 / b21),
                bm.block(1, 3)?.mul(bn.block(2, 3)?)?.scale(-c21 / b21),
                "commute.bb",
            )
        }
    };
    let diff = lhs.sub(&t1.add(&t2)?)?.max_abs();
    let scale = lhs.max_abs().max(t1.max_abs()).max(t2.max_abs());
    Ok(ResidualReport::from_values(
        name,
        &[xi.len()],
        vec![table.label(mu).to_string(), table.label(nu).to_string()],
        diff,
        scale,
        tol,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{build_del_pezzo, build_perk_schultz, DelPezzoParams, RapiditySet};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn table(seed: u64, sites: usize, aux: usize) -> WeightTable {
        let set = RapiditySet::generic(sites, aux);
        let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
        let p = DelPezzoParams::sample(&mut ChaCha8Rng::seed_from_u64(seed), &labels);
        build_del_pezzo(&p, &set).unwrap()
    }

    fn instance(kind: DwpfKind, l: usize, q: Vec<usize>) -> DwpfInstance {
        DwpfInstance::new(kind, (l..2 * l).collect(), (0..l).collect(), q).unwrap()
    }

    #[test]
    fn single_site_values() {
        let t = table(1, 1, 1);
        let p = t.pair(1, 0).unwrap();
        let want = [p.c(3, 2), p.c(2, 3), p.c(3, 1), p.c(1, 3)];
        for (kind, w) in DwpfKind::SINGLE.into_iter().zip(want) {
            let inst = instance(kind, 1, vec![]);
            assert!((dwpf_direct(&inst, &t).unwrap() - w).norm() < 1e-15);
            assert!((dwpf_recurrence(&inst, &t).unwrap() - w).norm() < 1e-15);
            assert!((dwpf_exact(&inst, &t).unwrap() - w).norm() < 1e-15);
        }
    }

    #[test]
    fn routes_agree_at_three_sites() {
        let t = table(2, 3, 3);
        for kind in DwpfKind::SINGLE {
            let (_, reports) = evaluate_routes(&instance(kind, 3, vec![]), &t, 1e-9).unwrap();
            assert_eq!(reports.len(), 2);
            for r in reports {
                assert!(r.pass, "{} {:e}", r.relation, r.relative);
            }
        }
    }

    #[test]
    fn mixed_formula_matches_direct() {
        let t = table(3, 3, 3);
        let bundle = FMatrixBundle::build(&t, &[0, 1, 2]).unwrap();
        for kind in [DwpfKind::MixedC, DwpfKind::MixedB] {
            for m in 0..=3 {
                for q in (1..=3).combinations(m) {
                    let inst = instance(kind, 3, q);
                    let d = dwpf_direct(&inst, &t).unwrap();
                    let f = mixed_dwpf_formula(&inst, &t, &bundle).unwrap();
                    assert!(relative_gap(d, f) < 1e-9, "{kind} {:?}", inst.q());
                }
            }
        }
    }

    #[test]
    fn degenerate_mixed_cases() {
        let t = table(4, 2, 2);
        let mb = dwpf_direct(&instance(DwpfKind::MixedB, 2, vec![]), &t).unwrap();
        let b2 = dwpf_direct(&instance(DwpfKind::B2, 2, vec![]), &t).unwrap();
        assert!((mb - b2).norm() < 1e-15);
        let mc = dwpf_direct(&instance(DwpfKind::MixedC, 2, vec![1, 2]), &t).unwrap();
        let c1 = dwpf_direct(&instance(DwpfKind::C1, 2, vec![]), &t).unwrap();
        assert!((mc - c1).norm() < 1e-15);
    }

    #[test]
    fn sandwich_properties() {
        let t = table(5, 3, 0);
        let b = FMatrixBundle::build(&t, &[0, 1, 2]).unwrap();
        for inv in [false, true] {
            assert!((f_sandwich(&b, &[2, 2, 2], &[2, 2, 2], inv).unwrap() - 1.0).norm() < 1e-12);
            assert_eq!(
                f_sandwich(&b, &[1, 2, 2], &[1, 1, 2], inv).unwrap(),
                Complex64::new(0.0, 0.0)
            );
        }
        assert!(f_sandwich(&b, &[1, 2], &[1, 2, 2], false).is_err());
    }

    #[test]
    fn commutation_relations() {
        let t = table(6, 3, 2);
        for l in 1..=3 {
            let xi: Vec<usize> = (0..l).collect();
            for kind in [CommuteKind::CC, CommuteKind::BB] {
                for (mu, nu) in [(3, 4), (4, 3)] {
                    let r = commute_check(kind, &t, mu, nu, &xi, 1e-10).unwrap();
                    assert!(r.pass, "{} {:e}", r.relation, r.relative);
                }
            }
        }
    }

    #[test]
    fn coincident_inhomogeneities_are_rejected() {
        let q = Complex64::new(0.7, 0.3);
        let v = Complex64::new(1.1, 0.2);
        let set = RapiditySet::new(
            vec![("x1".into(), v), ("x2".into(), v)],
            vec![
                ("n1".into(), Complex64::new(0.8, -0.4)),
                ("n2".into(), Complex64::new(1.3, 0.1)),
            ],
        )
        .unwrap();
        let t = build_perk_schultz(q, &set).unwrap();
        let inst = DwpfInstance::new(DwpfKind::C2, vec![2, 3], vec![0, 1], vec![]).unwrap();
        match dwpf_recurrence(&inst, &t) {
            Err(Error::DivisionNearZero { x, y, kind, .. }) => {
                assert_eq!(kind, "b32");
                assert!([x.as_str(), y.as_str()].contains(&"x1"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn adjacent_auxiliary_exchange_is_a_weight_ratio() {
        let t = table(7, 3, 3);
        for kind in DwpfKind::SINGLE {
            let k = if matches!(kind, DwpfKind::C2 | DwpfKind::B2) { 2 } else { 1 };
            let base = dwpf_direct(&instance(kind, 3, vec![]), &t).unwrap();
            for (pos, (x, y)) in [(0, (3, 4)), (1, (4, 5))] {
                let mut aux = vec![3, 4, 5];
                aux.swap(pos, pos + 1);
                let swapped = dwpf_direct(&DwpfInstance::new(kind, aux.clone(), vec![0, 1, 2], vec![]).unwrap(), &t).unwrap();
                let p = t.pair(x, y).unwrap();
                assert!(relative_gap(base * p.a(k) / p.a(3), swapped) < 1e-10, "{kind} {pos}");
                let exact = dwpf_exact(&DwpfInstance::new(kind, aux, vec![0, 1, 2], vec![]).unwrap(), &t).unwrap();
                assert!(relative_gap(swapped, exact) < 1e-10);
            }
        }
    }

    #[test]
    fn sandwich_resolves_identity_within_charge_blocks() {
        let t = table(8, 3, 0);
        let b = FMatrixBundle::build(&t, &[0, 1, 2]).unwrap();
        let patterns: Vec<Vec<usize>> = (0..3).map(|_| 1..=2).multi_cartesian_product().collect();
        for q in &patterns {
            for r in &patterns {
                let charge = |p: &[usize]| p.iter().filter(|&&s| s == 1).count();
                let sum: Complex64 = patterns
                    .iter()
                    .filter(|p| charge(p) == charge(q))
                    .map(|p| f_sandwich(&b, q, p, true).unwrap() * f_sandwich(&b, p, r, false).unwrap())
                    .sum();
                let want = if q == r { 1.0 } else { 0.0 };
                assert!((sum - want).norm() < 1e-12, "{q:?} {r:?}");
            }
        }
    }

    #[test]
    fn instance_validation() {
        assert!(DwpfInstance::new(DwpfKind::C2, vec![1], vec![0, 2], vec![]).is_err());
        assert!(DwpfInstance::new(DwpfKind::C2, vec![1], vec![0], vec![1]).is_err());
        assert!(DwpfInstance::new(DwpfKind::MixedC, vec![2, 3], vec![0, 1], vec![2, 1]).is_err());
        assert!(DwpfInstance::new(DwpfKind::MixedC, vec![2, 3], vec![0, 1], vec![3]).is_err());
        for k in ["C2", "B2", "C1", "B1", "mixedC", "mixedB"] {
            assert_eq!(k.parse::<DwpfKind>().unwrap().to_string(), k);
        }
    }
}
