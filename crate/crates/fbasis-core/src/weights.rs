//! Boltzmann weight tables for U(1)^(N-1) invariant vertex models.
//!
//! The R-matrix of an N-state model with U(1)^(N-1) symmetry has three families of
//! nonzero entries: `a_i`, `b_ij` and `c_ij`. A [`WeightTable`] stores all of them for
//! each ordered pair of registered rapidities. Tables come from the three-state
//! del Pezzo generator, its Perk-Schultz specialization, a trigonometric six-vertex
//! fixture, or an imported JSON document.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use indexmap::IndexMap;
use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Magnitude below which a generator parameter or denominator counts as singular.
pub const EPS_SING: f64 = 1e-6;

/// Number of local states N, between 2 and 9.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelRank(usize);

impl ModelRank {
    /// Validates a rank. Weight kind names use one digit per state, so N is at most 9.
    pub fn new(n: usize) -> Result<Self> {
        if !(2..=9).contains(&n) {
            return Err(Error::IndexOutOfRange {
                what: "rank",
                value: n,
                max: 9,
            });
        }
        Ok(Self(n))
    }

    /// Number of states N.
    pub fn get(self) -> usize {
        self.0
    }

    /// Number of weight kinds, N(2N-1).
    pub fn kind_count(self) -> usize {
        self.0 * (2 * self.0 - 1)
    }

    /// All weight kinds in canonical order: `a_i`, then `b_ij`, then `c_ij`, each lexicographic.
    pub fn kinds(self) -> Vec<WeightKind> {
        let n = self.0;
        let mut out: Vec<WeightKind> = (1..=n).map(WeightKind::A).collect();
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                out.push(WeightKind::B(i, j));
            }
        }
        for i in 1..=n {
            for j in (1..=n).filter(|&j| j != i) {
                out.push(WeightKind::C(i, j));
            }
        }
        out
    }

    /// Position of a kind in the canonical order.
    pub fn slot(self, kind: WeightKind) -> Result<usize> {
        let n = self.0;
        let ok = |i: usize| (1..=n).contains(&i);
        let off = |i: usize, j: usize| (i - 1) * (n - 1) + if j < i { j - 1 } else { j - 2 };
        match kind {
            WeightKind::A(i) if ok(i) => Ok(i - 1),
            WeightKind::B(i, j) if ok(i) && ok(j) && i != j => Ok(n + off(i, j)),
            WeightKind::C(i, j) if ok(i) && ok(j) && i != j => Ok(n + n * (n - 1) + off(i, j)),
            _ => Err(Error::UnknownKind(kind.to_string())),
        }
    }
}

/// One family member of the R-matrix weights, with 1-based state indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum WeightKind {
    /// Diagonal weight `a_i` on `e^(ii) ⊗ e^(ii)`.
    A(usize),
    /// Transmission weight `b_ij` on `e^(ii) ⊗ e^(jj)`.
    B(usize, usize),
    /// Exchange weight `c_ij` on `e^(ij) ⊗ e^(ji)`.
    C(usize, usize),
}

impl fmt::Display for WeightKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightKind::A(i) => write!(f, "a{i}"),
            WeightKind::B(i, j) => write!(f, "b{i}{j}"),
            WeightKind::C(i, j) => write!(f, "c{i}{j}"),
        }
    }
}

impl FromStr for WeightKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::UnknownKind(s.to_string());
        let mut chars = s.chars();
        let family = chars.next().ok_or_else(bad)?;
        let digits: Vec<usize> = chars
            .map(|c| c.to_digit(10).map(|d| d as usize).filter(|&d| d >= 1))
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        match (family, digits.as_slice()) {
            ('a', [i]) => Ok(WeightKind::A(*i)),
            ('b', [i, j]) if i != j => Ok(WeightKind::B(*i, *j)),
            ('c', [i, j]) if i != j => Ok(WeightKind::C(*i, *j)),
            _ => Err(bad()),
        }
    }
}

/// Labelled spectral parameters: inhomogeneities attached to lattice sites and
/// auxiliary rapidities attached to monodromy operators.
#[derive(Clone, Debug, PartialEq)]
pub struct RapiditySet {
    sites: Vec<(String, Complex64)>,
    auxiliary: Vec<(String, Complex64)>,
}

impl RapiditySet {
    /// Builds a set from explicit labels and values. Labels must be distinct.
    pub fn new(sites: Vec<(String, Complex64)>, auxiliary: Vec<(String, Complex64)>) -> Result<Self> {
        let mut seen = std::collections::HashSet::new();
        for (label, _) in sites.iter().chain(auxiliary.iter()) {
            if !seen.insert(label.as_str()) {
                return Err(Error::MalformedDocument(format!("duplicate rapidity label {label}")));
            }
        }
        Ok(Self { sites, auxiliary })
    }

    /// Sites labelled `xi1..xiL` and auxiliaries `nu1..nuK` with nominal values
    /// `1..=L` and `L+1..=L+K`.
    pub fn generic(sites: usize, auxiliary: usize) -> Self {
        let s = (1..=sites)
            .map(|k| (format!("xi{k}"), Complex64::new(k as f64, 0.0)))
            .collect();
        let a = (1..=auxiliary)
            .map(|k| (format!("nu{k}"), Complex64::new((sites + k) as f64, 0.0)))
            .collect();
        Self { sites: s, auxiliary: a }
    }

    /// Site inhomogeneities in lattice order.
    pub fn sites(&self) -> &[(String, Complex64)] {
        &self.sites
    }

    /// Auxiliary rapidities.
    pub fn auxiliary(&self) -> &[(String, Complex64)] {
        &self.auxiliary
    }

    /// All rapidities in registration order: sites first, then auxiliaries.
    pub fn all(&self) -> Vec<(String, Complex64)> {
        self.sites.iter().chain(self.auxiliary.iter()).cloned().collect()
    }
}

/// Weights of a single ordered pair, indexed by 1-based states.
///
/// State indices are not range checked beyond debug assertions; callers iterate
/// over `1..=n`.
#[derive(Clone, Copy, Debug)]
pub struct PairWeights<'a> {
    n: usize,
    w: &'a [Complex64],
}

impl PairWeights<'_> {
    fn off(&self, i: usize, j: usize) -> usize {
        debug_assert!(i != j && (1..=self.n).contains(&i) && (1..=self.n).contains(&j));
        (i - 1) * (self.n - 1) + if j < i { j - 1 } else { j - 2 }
    }

    /// Weight `a_i`.
    pub fn a(&self, i: usize) -> Complex64 {
        self.w[i - 1]
    }

    /// Weight `b_ij`, `i != j`.
    pub fn b(&self, i: usize, j: usize) -> Complex64 {
        self.w[self.n + self.off(i, j)]
    }

    /// Weight `c_ij`, `i != j`.
    pub fn c(&self, i: usize, j: usize) -> Complex64 {
        self.w[self.n + self.n * (self.n - 1) + self.off(i, j)]
    }

    /// Matrix element `<i j| R |k l>` of the two-site R-matrix.
    pub fn element(&self, i: usize, j: usize, k: usize, l: usize) -> Complex64 {
        if i == j {
            if k == i && l == j {
                return self.a(i);
            }
        } else if k == i && l == j {
            return self.b(i, j);
        } else if k == j && l == i {
            return self.c(i, j);
        }
        Complex64::new(0.0, 0.0)
    }

    /// Raw values in canonical kind order.
    pub fn values(&self) -> &[Complex64] {
        self.w
    }
}

/// Complete set of Boltzmann weights over registered rapidities.
///
/// Every ordered pair of distinct rapidities carries all N(2N-1) weights. Diagonal
/// pairs `(x, x)` are stored when the source provides them; the generators always do.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightTable {
    rank: ModelRank,
    labels: Vec<String>,
    values: Vec<Complex64>,
    index: HashMap<String, usize>,
    entries: Vec<Option<Vec<Complex64>>>,
}

impl WeightTable {
    fn empty(rank: ModelRank, rapidities: Vec<(String, Complex64)>) -> Result<Self> {
        let mut index = HashMap::new();
        let mut labels = Vec::new();
        let mut values = Vec::new();
        for (k, (label, value)) in rapidities.into_iter().enumerate() {
            if index.insert(label.clone(), k).is_some() {
                return Err(Error::MalformedDocument(format!("duplicate rapidity label {label}")));
            }
            labels.push(label);
            values.push(value);
        }
        let r = labels.len();
        Ok(Self {
            rank,
            labels,
            values,
            index,
            entries: vec![None; r * r],
        })
    }

    /// Assembles a table from per-pair weight vectors in canonical kind order.
    ///
    /// Every ordered pair of distinct rapidities must be present.
    pub fn from_pairs(
        rank: ModelRank,
        rapidities: Vec<(String, Complex64)>,
        pairs: impl IntoIterator<Item = ((usize, usize), Vec<Complex64>)>,
    ) -> Result<Self> {
        let mut table = Self::empty(rank, rapidities)?;
        let r = table.labels.len();
        for ((x, y), w) in pairs {
            if x >= r || y >= r {
                return Err(Error::IndexOutOfRange {
                    what: "rapidity",
                    value: x.max(y) + 1,
                    max: r,
                });
            }
            if w.len() != rank.kind_count() {
                return Err(Error::MalformedDocument(format!(
                    "pair ({}, {}) has {} weights, expected {}",
                    table.labels[x],
                    table.labels[y],
                    w.len(),
                    rank.kind_count()
                )));
            }
            table.entries[x * r + y] = Some(w);
        }
        table.check_complete()?;
        Ok(table)
    }

    fn check_complete(&self) -> Result<()> {
        let r = self.labels.len();
        for x in 0..r {
            for y in (0..r).filter(|&y| y != x) {
                if self.entries[x * r + y].is_none() {
                    return Err(Error::MissingEntry {
                        x: self.labels[x].clone(),
                        y: self.labels[y].clone(),
                        kind: self.rank.kinds()[0].to_string(),
                    });
                }
            }
        }
        Ok(())
    }

    /// Model rank N.
    pub fn rank(&self) -> ModelRank {
        self.rank
    }

    /// Number of local states N.
    pub fn n(&self) -> usize {
        self.rank.0
    }

    /// Number of registered rapidities.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// Whether no rapidity is registered.
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Labels in registration order.
    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Label of the rapidity with registration index `x`.
    pub fn label(&self, x: usize) -> &str {
        &self.labels[x]
    }

    /// Value of the rapidity with registration index `x`.
    pub fn value(&self, x: usize) -> Complex64 {
        self.values[x]
    }

    /// Registration index of a label.
    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownRapidity(label.to_string()))
    }

    /// Whether weights are stored for the ordered pair of registration indices.
    pub fn has_pair(&self, x: usize, y: usize) -> bool {
        let r = self.labels.len();
        x < r && y < r && self.entries[x * r + y].is_some()
    }

    /// Weights of an ordered pair of registration indices.
    pub fn pair(&self, x: usize, y: usize) -> Result<PairWeights<'_>> {
        let r = self.labels.len();
        let unknown = || Error::UnknownPair {
            x: self.labels.get(x).cloned().unwrap_or_else(|| format!("#{x}")),
            y: self.labels.get(y).cloned().unwrap_or_else(|| format!("#{y}")),
        };
        if x >= r || y >= r {
            return Err(unknown());
        }
        match &self.entries[x * r + y] {
            Some(w) => Ok(PairWeights { n: self.rank.0, w }),
            None => Err(unknown()),
        }
    }

    /// Looks up one weight by labels.
    pub fn weight(&self, x: &str, y: &str, kind: WeightKind) -> Result<Complex64> {
        let slot = self.rank.slot(kind)?;
        let unknown = || Error::UnknownPair {
            x: x.to_string(),
            y: y.to_string(),
        };
        let ix = self.index_of(x).map_err(|_| unknown())?;
        let iy = self.index_of(y).map_err(|_| unknown())?;
        Ok(self.pair(ix, iy)?.w[slot])
    }

    /// Returns a copy with one stored weight replaced.
    pub fn with_weight(&self, x: &str, y: &str, kind: WeightKind, value: Complex64) -> Result<Self> {
        let slot = self.rank.slot(kind)?;
        let ix = self.index_of(x)?;
        let iy = self.index_of(y)?;
        self.pair(ix, iy)?;
        let mut out = self.clone();
        let r = out.labels.len();
        if let Some(w) = out.entries[ix * r + iy].as_mut() {
            w[slot] = value;
        }
        Ok(out)
    }

    /// Serializes the table into its JSON document form.
    pub fn to_document(&self) -> WeightDocument {
        let r = self.labels.len();
        let kinds = self.rank.kinds();
        let mut entries = Vec::new();
        for x in 0..r {
            for y in 0..r {
                if let Some(w) = &self.entries[x * r + y] {
                    for (kind, v) in kinds.iter().zip(w) {
                        entries.push(WeightEntry {
                            pair: [self.labels[x].clone(), self.labels[y].clone()],
                            kind: kind.to_string(),
                            value: [v.re, v.im],
                        });
                    }
                }
            }
        }
        WeightDocument {
            rank: self.rank.0,
            rapidities: self
                .labels
                .iter()
                .zip(&self.values)
                .map(|(l, v)| (l.clone(), [v.re, v.im]))
                .collect(),
            entries,
        }
    }

    /// Serializes the table as pretty-printed JSON.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("weight documents always serialize")
    }

    /// Builds a table from a document, checking rank, kinds and completeness.
    pub fn from_document(rank: ModelRank, doc: &WeightDocument) -> Result<Self> {
        if doc.rank != rank.0 {
            return Err(Error::RankMismatch {
                expected: rank.0,
                found: doc.rank,
            });
        }
        let rapidities: Vec<(String, Complex64)> = doc
            .rapidities
            .iter()
            .map(|(l, v)| Ok((l.clone(), finite(v, l)?)))
            .collect::<Result<_>>()?;
        let mut table = Self::empty(rank, rapidities)?;
        let r = table.labels.len();
        let kc = rank.kind_count();
        let mut partial: BTreeMap<(usize, usize), Vec<Option<Complex64>>> = BTreeMap::new();
        for e in &doc.entries {
            let unknown = || Error::UnknownPair {
                x: e.pair[0].clone(),
                y: e.pair[1].clone(),
            };
            let x = table.index_of(&e.pair[0]).map_err(|_| unknown())?;
            let y = table.index_of(&e.pair[1]).map_err(|_| unknown())?;
            let kind: WeightKind = e.kind.parse()?;
            let slot = rank.slot(kind)?;
            let value = finite(&e.value, &e.kind)?;
            let row = partial.entry((x, y)).or_insert_with(|| vec![None; kc]);
            if row[slot].replace(value).is_some() {
                return Err(Error::MalformedDocument(format!(
                    "duplicate entry {} for pair ({}, {})",
                    e.kind, e.pair[0], e.pair[1]
                )));
            }
        }
        let kinds = rank.kinds();
        for ((x, y), row) in partial {
            let w: Vec<Complex64> = row
                .iter()
                .zip(&kinds)
                .map(|(v, k)| {
                    v.ok_or_else(|| Error::MissingEntry {
                        x: table.labels[x].clone(),
                        y: table.labels[y].clone(),
                        kind: k.to_string(),
                    })
                })
                .collect::<Result<_>>()?;
            table.entries[x * r + y] = Some(w);
        }
        table.check_complete()?;
        Ok(table)
    }

    /// Parses a JSON document and builds a table of the given rank.
    pub fn from_json(rank: ModelRank, raw: &str) -> Result<Self> {
        let doc: WeightDocument = serde_json::from_str(raw).map_err(|e| Error::MalformedDocument(e.to_string()))?;
        Self::from_document(rank, &doc)
    }
}

fn finite(v: &[f64; 2], what: &str) -> Result<Complex64> {
    if v[0].is_finite() && v[1].is_finite() {
        Ok(Complex64::new(v[0], v[1]))
    } else {
        Err(Error::MalformedDocument(format!("non-finite value for {what}")))
    }
}

/// JSON form of a weight table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightDocument {
    /// Number of local states N.
    pub rank: usize,
    /// Rapidity labels mapped to `[re, im]`, in registration order.
    pub rapidities: IndexMap<String, [f64; 2]>,
    /// One record per stored weight.
    pub entries: Vec<WeightEntry>,
}

/// A single stored weight.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    /// Ordered pair of rapidity labels.
    pub pair: [String; 2],
    /// Kind name such as `a1`, `b12` or `c23`.
    pub kind: String,
    /// Value as `[re, im]`.
    pub value: [f64; 2],
}

/// Per-rapidity free variables of the three-state del Pezzo family.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreeVariables {
    /// Variable `a`.
    pub a: Complex64,
    /// Variable `b̄`.
    pub b_bar: Complex64,
    /// Variable `c`.
    pub c: Complex64,
    /// Variable `c̄`.
    pub c_bar: Complex64,
    /// Variable `h1`.
    pub h1: Complex64,
    /// Variable `h2`.
    pub h2: Complex64,
}

/// Parameters of the three-state del Pezzo family: two invariants `Δ1, Δ2`, two
/// scale constants `δ1, δ2`, and free variables for every rapidity label.
#[derive(Clone, Debug, PartialEq)]
pub struct DelPezzoParams {
    /// Invariant `Δ1`.
    pub cap_delta1: Complex64,
    /// Invariant `Δ2`.
    pub cap_delta2: Complex64,
    /// Constant `δ1`.
    pub delta1: Complex64,
    /// Constant `δ2`.
    pub delta2: Complex64,
    /// Free variables keyed by rapidity label.
    pub free: BTreeMap<String, FreeVariables>,
}

/// Draws a complex number with log-uniform modulus in `[0.5, 1.5)` and uniform phase.
pub fn sample_annulus<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let r = rng.random_range(0.5f64.ln()..1.5f64.ln()).exp();
    let phi = rng.random_range(-std::f64::consts::PI..std::f64::consts::PI);
    Complex64::from_polar(r, phi)
}

impl DelPezzoParams {
    /// Samples constants and per-label free variables from the annulus.
    ///
    /// Draw order: `Δ1, Δ2, δ1, δ2`, then `a, b̄, c, c̄, h1, h2` for each label in order.
    pub fn sample<R: Rng + ?Sized>(rng: &mut R, labels: &[String]) -> Self {
        let cap_delta1 = sample_annulus(rng);
        let cap_delta2 = sample_annulus(rng);
        let delta1 = sample_annulus(rng);
        let delta2 = sample_annulus(rng);
        let free = labels
            .iter()
            .map(|l| {
                let v = FreeVariables {
                    a: sample_annulus(rng),
                    b_bar: sample_annulus(rng),
                    c: sample_annulus(rng),
                    c_bar: sample_annulus(rng),
                    h1: sample_annulus(rng),
                    h2: sample_annulus(rng),
                };
                (l.clone(), v)
            })
            .collect();
        Self {
            cap_delta1,
            cap_delta2,
            delta1,
            delta2,
            free,
        }
    }

    fn k(&self) -> Complex64 {
        self.cap_delta1 * self.cap_delta2 - 1.0
    }

    fn u(&self, v: &FreeVariables) -> Complex64 {
        v.a - self.cap_delta1 * v.b_bar
    }

    fn v(&self, v: &FreeVariables) -> Complex64 {
        self.k() * v.a - self.cap_delta1 * v.b_bar
    }

    fn quadric(&self, v: &FreeVariables) -> Complex64 {
        let d1 = self.cap_delta1;
        self.k() / (d1 * d1) * v.a * v.a - self.cap_delta2 * v.a * v.b_bar + v.b_bar * v.b_bar
    }

    /// Solves the defining hypersurface for the dependent variable `b`.
    pub fn hypersurface_b(&self, v: &FreeVariables) -> Result<Complex64> {
        let q = self.quadric(v);
        screen("hypersurface coefficient of b", q)?;
        Ok(v.b_bar * v.c * v.c_bar / q)
    }

    fn screen_all(&self) -> Result<()> {
        screen("Δ1", self.cap_delta1)?;
        screen("δ1", self.delta1)?;
        screen("δ2", self.delta2)?;
        for (label, v) in &self.free {
            self.hypersurface_b(v)
                .map_err(|_| singular(&format!("hypersurface coefficient of b({label})"), self.quadric(v)))?;
            for (name, z) in [
                ("c", v.c),
                ("c̄", v.c_bar),
                ("h1", v.h1),
                ("h2", v.h2),
                ("a - Δ1 b̄", self.u(v)),
                ("(Δ1Δ2 - 1) a - Δ1 b̄", self.v(v)),
            ] {
                screen(&format!("{name}({label})"), z)?;
            }
        }
        Ok(())
    }

    /// Weight ratios relative to `c12(x, y)` in canonical kind order.
    fn ratios(&self, x: &FreeVariables, y: &FreeVariables) -> Vec<Complex64> {
        let d1 = self.cap_delta1;
        let d2 = self.cap_delta2;
        let (s1, s2) = (self.delta1, self.delta2);
        let k = self.k();
        let (ux, uy, vx, vy) = (self.u(x), self.u(y), self.v(x), self.v(y));
        let w = y.a * x.b_bar - x.a * y.b_bar;
        let q = k * x.a * y.a - d1 * d1 * y.b_bar * (d2 * x.a - x.b_bar);
        let a1 = y.c / x.c * q / (uy * vy);
        let a2 = x.c_bar / y.c_bar * q / (ux * vx);
        let a3 = x.h1 * y.c * y.c_bar * x.h2 / (y.h1 * x.c * x.c_bar * y.h2) * q / (vx * uy);
        let b12 = d1 * d1 * k * y.c * x.c_bar * w / (uy * vy * ux * vx);
        let b13 = d1 * d1 * k * y.c * x.h1 * x.h2 / (s2 * x.c * x.c_bar) * w / uy / (vx * vy);
        let b21 = w / (x.c * y.c_bar);
        let b23 = k * x.h1 * x.h2 / (s1 * x.c * x.c_bar * y.c_bar) * w / vx;
        let b31 = s2 * y.c * y.c_bar / (y.h1 * x.c * y.h2) * w / uy;
        let b32 = d1 * d1 * s1 * y.c * x.c_bar * y.c_bar / (y.h1 * y.h2) * w / (vx * ux * uy);
        let c12 = Complex64::new(1.0, 0.0);
        let c13 = y.c * y.c_bar * x.h1 / (x.c * x.c_bar * y.h1) * ux / uy;
        let c21 = y.c * x.c_bar / (x.c * y.c_bar);
        let c23 = y.c * x.h1 / (x.c * y.h1);
        let c31 = y.c * x.h2 / (x.c * y.h2);
        let c32 = x.h2 / y.h2 * vy / vx;
        vec![a1, a2, a3, b12, b13, b21, b23, b31, b32, c12, c13, c21, c23, c31, c32]
    }

    fn pair_numerator(&self, x: &FreeVariables, y: &FreeVariables) -> Complex64 {
        let d1 = self.cap_delta1;
        self.k() * x.a * y.a - d1 * d1 * y.b_bar * (self.cap_delta2 * x.a - x.b_bar)
    }
}

fn singular(what: &str, z: Complex64) -> Error {
    Error::SingularParameter {
        what: what.to_string(),
        magnitude: z.norm(),
    }
}

fn screen(what: &str, z: Complex64) -> Result<()> {
    if z.norm() < EPS_SING || !z.is_finite() {
        Err(singular(what, z))
    } else {
        Ok(())
    }
}

/// Builds the three-state del Pezzo weight table over all registered rapidities.
///
/// Pairs `(x, y)` with `x` registered before `y`, and diagonal pairs, are normalized
/// by `c12 = 1`. Reversed pairs use `c12(y, x) = 1 / (r(x, y) r(y, x))` with
/// `r = a1 / c12`, which makes the table unitary.
pub fn build_del_pezzo(params: &DelPezzoParams, rapidities: &RapiditySet) -> Result<WeightTable> {
    params.screen_all()?;
    let all = rapidities.all();
    let free: Vec<&FreeVariables> = all
        .iter()
        .map(|(l, _)| params.free.get(l).ok_or_else(|| Error::UnknownRapidity(l.clone())))
        .collect::<Result<_>>()?;
    let r = all.len();
    let mut pairs = Vec::with_capacity(r * r);
    for x in 0..r {
        for y in 0..r {
            let mut w = params.ratios(free[x], free[y]);
            if x > y {
                let qxy = params.pair_numerator(free[x], free[y]);
                let qyx = params.pair_numerator(free[y], free[x]);
                screen(&format!("a1 numerator({}, {})", all[x].0, all[y].0), qxy)?;
                screen(&format!("a1 numerator({}, {})", all[y].0, all[x].0), qyx)?;
                let scale = 1.0 / (params.ratios(free[y], free[x])[0] * w[0]);
                for v in w.iter_mut() {
                    *v *= scale;
                }
            }
            if let Some(bad) = w.iter().find(|v| !v.is_finite()) {
                return Err(singular(&format!("weight of pair ({}, {})", all[x].0, all[y].0), *bad));
            }
            pairs.push(((x, y), w));
        }
    }
    WeightTable::from_pairs(ModelRank(3), all, pairs)
}

/// Free variables of the Perk-Schultz point of the del Pezzo family for anisotropy `q`
/// and multiplicative rapidity `ξ`.
pub fn perk_schultz_variables(q: Complex64, xi: Complex64) -> FreeVariables {
    let xi2 = xi * xi;
    let q2 = q * q;
    let c = xi * (q2 - 1.0) / (q2 - xi2);
    FreeVariables {
        a: Complex64::new(1.0, 0.0),
        b_bar: q * (xi2 - 1.0) / (xi2 - q2),
        c,
        c_bar: c,
        h1: c,
        h2: c / xi,
    }
}

/// Del Pezzo parameters of the Perk-Schultz model: `Δ1 = q`, `Δ2 = q + 1/q`, `δ1 = δ2 = 1`.
pub fn perk_schultz_params(q: Complex64, rapidities: &RapiditySet) -> Result<DelPezzoParams> {
    screen("q", q)?;
    let free = rapidities
        .all()
        .into_iter()
        .map(|(l, xi)| (l, perk_schultz_variables(q, xi)))
        .collect();
    Ok(DelPezzoParams {
        cap_delta1: q,
        cap_delta2: q + 1.0 / q,
        delta1: Complex64::new(1.0, 0.0),
        delta2: Complex64::new(1.0, 0.0),
        free,
    })
}

/// Builds the Perk-Schultz weight table; rapidity values are multiplicative spectral parameters.
pub fn build_perk_schultz(q: Complex64, rapidities: &RapiditySet) -> Result<WeightTable> {
    for (label, xi) in rapidities.all() {
        screen(&label, xi)?;
        screen(&format!("q² - {label}²"), q * q - xi * xi)?;
    }
    build_del_pezzo(&perk_schultz_params(q, rapidities)?, rapidities)
}

/// Builds a gauge-twisted trigonometric six-vertex table (N = 2).
///
/// With `λ = x - y`: `a = 1`, `b = sinh λ / sinh(λ + η)`,
/// `c12 = e^(gλ) sinh η / sinh(λ + η)` and `c21 = e^(-gλ) sinh η / sinh(λ + η)`.
/// Rapidity values are additive spectral parameters.
pub fn build_six_vertex(eta: Complex64, gauge: Complex64, rapidities: &RapiditySet) -> Result<WeightTable> {
    screen("sinh η", eta.sinh())?;
    let all = rapidities.all();
    let r = all.len();
    let mut pairs = Vec::with_capacity(r * r);
    for x in 0..r {
        for y in 0..r {
            let lambda = all[x].1 - all[y].1;
            let den = (lambda + eta).sinh();
            screen(&format!("sinh(λ + η) for ({}, {})", all[x].0, all[y].0), den)?;
            let b = lambda.sinh() / den;
            let c = eta.sinh() / den;
            let one = Complex64::new(1.0, 0.0);
            let g = (gauge * lambda).exp();
            pairs.push(((x, y), vec![one, one, b, b, c * g, c / g]));
        }
    }
    WeightTable::from_pairs(ModelRank(2), all, pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sample_table(seed: u64, sites: usize, aux: usize) -> WeightTable {
        let set = RapiditySet::generic(sites, aux);
        let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = DelPezzoParams::sample(&mut rng, &labels);
        build_del_pezzo(&p, &set).unwrap()
    }

    #[test]
    fn kind_roundtrip_and_order() {
        let rank = ModelRank::new(3).unwrap();
        let kinds = rank.kinds();
        assert_eq!(kinds.len(), 15);
        for (k, kind) in kinds.iter().enumerate() {
            assert_eq!(rank.slot(*kind).unwrap(), k);
            assert_eq!(kind.to_string().parse::<WeightKind>().unwrap(), *kind);
        }
        assert!("b11".parse::<WeightKind>().is_err());
        assert!("d1".parse::<WeightKind>().is_err());
        assert!(rank.slot(WeightKind::A(4)).is_err());
    }

    #[test]
    fn rank_bounds() {
        assert!(ModelRank::new(1).is_err());
        assert!(ModelRank::new(10).is_err());
        assert_eq!(ModelRank::new(4).unwrap().kind_count(), 28);
    }

    #[test]
    fn forward_pairs_have_unit_c12() {
        let t = sample_table(3, 3, 1);
        for x in 0..t.len() {
            for y in x..t.len() {
                assert_eq!(t.pair(x, y).unwrap().c(1, 2), c(1.0, 0.0));
            }
        }
    }

    #[test]
    fn diagonal_pair_is_permutation() {
        let t = sample_table(5, 2, 0);
        let p = t.pair(1, 1).unwrap();
        for i in 1..=3 {
            assert!((p.a(i) - 1.0).norm() < 1e-12);
            for j in (1..=3).filter(|&j| j != i) {
                assert!(p.b(i, j).norm() < 1e-12);
                assert!((p.c(i, j) - 1.0).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn lookup_errors() {
        let t = sample_table(1, 2, 0);
        assert!(matches!(
            t.weight("xi1", "zz", WeightKind::A(1)),
            Err(Error::UnknownPair { .. })
        ));
        assert!(matches!(
            t.weight("xi1", "xi2", WeightKind::A(4)),
            Err(Error::UnknownKind(_))
        ));
        let v = t.weight("xi1", "xi2", WeightKind::C(1, 2)).unwrap();
        assert_eq!(v, c(1.0, 0.0));
    }

    #[test]
    fn document_roundtrip_is_exact() {
        let t = sample_table(9, 3, 2);
        let json = t.to_json();
        let back = WeightTable::from_json(t.rank(), &json).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_json(), json);
    }

    #[test]
    fn import_rejects_bad_documents() {
        let t = sample_table(2, 2, 0);
        let mut doc = t.to_document();
        assert!(matches!(
            WeightTable::from_document(ModelRank::new(2).unwrap(), &doc),
            Err(Error::RankMismatch { .. })
        ));
        let removed = doc.entries.iter().position(|e| e.pair[0] != e.pair[1]).unwrap();
        doc.entries.remove(removed);
        assert!(matches!(
            WeightTable::from_document(t.rank(), &doc),
            Err(Error::MissingEntry { .. })
        ));
        assert!(matches!(
            WeightTable::from_json(t.rank(), "{\"rank\": 3"),
            Err(Error::MalformedDocument(_))
        ));
    }

    #[test]
    fn singular_inputs_are_rejected() {
        let set = RapiditySet::generic(2, 0);
        let labels: Vec<String> = set.all().into_iter().map(|(l, _)| l).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut p = DelPezzoParams::sample(&mut rng, &labels);
        p.delta1 = c(0.0, 0.0);
        assert!(matches!(
            build_del_pezzo(&p, &set),
            Err(Error::SingularParameter { .. })
        ));
        let mut p = DelPezzoParams::sample(&mut rng, &labels);
        let v = p.free.get_mut("xi1").unwrap();
        v.a = p.cap_delta1 * v.b_bar;
        assert!(matches!(
            build_del_pezzo(&p, &set),
            Err(Error::SingularParameter { .. })
        ));
    }

    #[test]
    fn perk_schultz_has_difference_form() {
        let q = c(0.7, 0.4);
        let set = RapiditySet::new(
            vec![
                ("x1".into(), c(1.1, 0.2)),
                ("x2".into(), c(0.8, -0.3)),
                ("x3".into(), c(1.1, 0.2) * c(0.6, 0.5)),
                ("x4".into(), c(0.8, -0.3) * c(0.6, 0.5)),
            ],
            vec![],
        )
        .unwrap();
        let t = build_perk_schultz(q, &set).unwrap();
        let p12 = t.pair(0, 1).unwrap();
        let p34 = t.pair(2, 3).unwrap();
        for (u, v) in p12.values().iter().zip(p34.values()) {
            assert!((u - v).norm() < 1e-12 * (1.0 + u.norm()));
        }
    }

    #[test]
    fn six_vertex_is_unitary() {
        let set = RapiditySet::new(vec![("u".into(), c(0.3, 0.1)), ("v".into(), c(-0.2, 0.4))], vec![]).unwrap();
        let t = build_six_vertex(c(0.5, 0.2), c(0.3, 0.0), &set).unwrap();
        let (f, r) = (t.pair(0, 1).unwrap(), t.pair(1, 0).unwrap());
        assert!((f.c(1, 2) * r.c(1, 2) + f.b(1, 2) * r.b(2, 1) - 1.0).norm() < 1e-12);
    }

    #[test]
    fn hypersurface_b_solves_defining_equation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = DelPezzoParams::sample(&mut rng, &["x".to_string()]);
        let v = p.free["x"];
        let b = p.hypersurface_b(&v).unwrap();
        let d1 = p.cap_delta1;
        let k = d1 * p.cap_delta2 - 1.0;
        let lhs = b * (k / (d1 * d1) * v.a * v.a - p.cap_delta2 * v.a * v.b_bar + v.b_bar * v.b_bar);
        assert!((lhs - v.b_bar * v.c * v.c_bar).norm() < 1e-12);
    }
}
