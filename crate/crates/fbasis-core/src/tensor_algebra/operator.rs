use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Dims, MultiIndex};
use crate::error::{Error, Result};

/// Entries smaller than this fraction of the largest entry are dropped from sparse storage.
pub const DROP_TOLERANCE: f64 = 1e-14;

const DENSE_FILL: f64 = 0.25;

#[derive(Clone, Debug, PartialEq)]
enum Storage {
    Sparse(Vec<Vec<(usize, Complex64)>>),
    Dense(Vec<Complex64>),
}

/// Linear operator on a tensor space, square with side N^L.
#[derive(Clone, Debug, PartialEq)]
pub struct TensorOperator {
    dims: Dims,
    storage: Storage,
}

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

impl TensorOperator {
    /// The zero operator.
    pub fn zero(dims: Dims) -> Self {
        Self {
            dims,
            storage: Storage::Sparse(vec![Vec::new(); dims.dim()]),
        }
    }

    /// The identity operator.
    pub fn identity(dims: Dims) -> Self {
        Self::diagonal(dims, |_| Complex64::new(1.0, 0.0))
    }

    /// Diagonal operator with entries `f(i)` on the linear index `i`.
    pub fn diagonal(dims: Dims, f: impl Fn(usize) -> Complex64) -> Self {
        let rows = (0..dims.dim())
            .map(|i| {
                let v = f(i);
                if v == zero() {
                    Vec::new()
                } else {
                    vec![(i, v)]
                }
            })
            .collect();
        Self::from_rows(dims, rows)
    }

    /// Builds an operator from rows of `(column, value)` pairs.
    ///
    /// Rows may be unsorted and contain repeated columns, which are summed.
    pub fn from_rows(dims: Dims, mut rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        debug_assert_eq!(rows.len(), dims.dim());
        for row in rows.iter_mut() {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, Complex64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            *row = merged;
        }
        Self::normalized(dims, rows)
    }

    /// Builds an operator from row-major dense data.
    pub fn from_dense(dims: Dims, data: Vec<Complex64>) -> Result<Self> {
        let d = dims.dim();
        if data.len() != d * d {
            return Err(Error::DimensionMismatch {
                left: format!("{} dense entries", data.len()),
                right: dims.to_string(),
            });
        }
        let rows = data
            .chunks(d)
            .map(|r| {
                r.iter()
                    .enumerate()
                    .filter(|(_, v)| **v != zero())
                    .map(|(c, v)| (c, *v))
                    .collect()
            })
            .collect();
        Ok(Self::normalized(dims, rows))
    }

    /// Builds an operator from `(row, column, value)` triples; repeated positions are summed.
    pub fn from_entries(dims: Dims, entries: impl IntoIterator<Item = (usize, usize, Complex64)>) -> Result<Self> {
        let d = dims.dim();
        let mut rows = vec![Vec::new(); d];
        for (r, c, v) in entries {
            if r >= d || c >= d {
                return Err(Error::IndexOutOfRange {
                    what: "linear",
                    value: r.max(c),
                    max: d - 1,
                });
            }
            rows[r].push((c, v));
        }
        Ok(Self::from_rows(dims, rows))
    }

    fn normalized(dims: Dims, mut rows: Vec<Vec<(usize, Complex64)>>) -> Self {
        let max = rows
            .iter()
            .flat_map(|r| r.iter().map(|e| e.1.norm()))
            .fold(0.0, f64::max);
        let cut = max * DROP_TOLERANCE;
        let mut nnz = 0;
        for row in rows.iter_mut() {
            row.retain(|e| e.1.norm() > cut);
            nnz += row.len();
        }
        let d = dims.dim();
        let storage = if d >= 16 && nnz as f64 > DENSE_FILL * (d * d) as f64 {
            let mut data = vec![zero(); d * d];
            for (r, row) in rows.iter().enumerate() {
                for &(c, v) in row {
                    data[r * d + c] = v;
                }
            }
            Storage::Dense(data)
        } else {
            Storage::Sparse(rows)
        };
        Self { dims, storage }
    }

    /// Shape of the underlying space.
    pub fn dims(&self) -> Dims {
        self.dims
    }

    /// Side length N^L.
    pub fn dim(&self) -> usize {
        self.dims.dim()
    }

    /// Whether the operator switched to dense storage.
    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense(_))
    }

    /// Number of stored nonzero entries.
    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Sparse(rows) => rows.iter().map(Vec::len).sum(),
            Storage::Dense(data) => data.iter().filter(|v| **v != zero()).count(),
        }
    }

    /// Calls `f(column, value)` for every stored entry of a row.
    pub fn for_each_in_row(&self, row: usize, mut f: impl FnMut(usize, Complex64)) {
        match &self.storage {
            Storage::Sparse(rows) => rows[row].iter().for_each(|&(c, v)| f(c, v)),
            Storage::Dense(data) => {
                let d = self.dim();
                data[row * d..(row + 1) * d]
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != zero())
                    .for_each(|(c, v)| f(c, *v))
            }
        }
    }

    /// Entry at linear indices.
    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        match &self.storage {
            Storage::Sparse(rows) => rows[row]
                .binary_search_by_key(&col, |e| e.0)
                .map(|k| rows[row][k].1)
                .unwrap_or_else(|_| zero()),
            Storage::Dense(data) => data[row * self.dim() + col],
        }
    }

    /// Entry at multi-indices.
    pub fn element(&self, row: &MultiIndex, col: &MultiIndex) -> Complex64 {
        self.get(row.linear(self.dims), col.linear(self.dims))
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch {
                left: self.dims.to_string(),
                right: other.dims.to_string(),
            });
        }
        Ok(())
    }

    /// Operator product `self · rhs`.
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        self.check_same(rhs)?;
        let d = self.dim();
        if let (Storage::Dense(a), Storage::Dense(b)) = (&self.storage, &rhs.storage) {
            let mut out = vec![zero(); d * d];
            for i in 0..d {
                let orow = &mut out[i * d..(i + 1) * d];
                for k in 0..d {
                    let aik = a[i * d + k];
                    if aik == zero() {
                        continue;
                    }
                    for (o, bkj) in orow.iter_mut().zip(&b[k * d..(k + 1) * d]) {
                        *o += aik * bkj;
                    }
                }
            }
            return Self::from_dense(self.dims, out);
        }
        let mut scratch = vec![zero(); d];
        let mut touched = vec![false; d];
        let mut cols = Vec::new();
        let mut rows = Vec::with_capacity(d);
        for i in 0..d {
            self.for_each_in_row(i, |k, a| {
                rhs.for_each_in_row(k, |j, b| {
                    if !touched[j] {
                        touched[j] = true;
                        cols.push(j);
                    }
                    scratch[j] += a * b;
                });
            });
            cols.sort_unstable();
            let row: Vec<(usize, Complex64)> = cols
                .iter()
                .filter(|&&j| scratch[j] != zero())
                .map(|&j| (j, scratch[j]))
                .collect();
            for &j in &cols {
                scratch[j] = zero();
                touched[j] = false;
            }
            cols.clear();
            rows.push(row);
        }
        Ok(Self::normalized(self.dims, rows))
    }

    fn combine(&self, other: &Self, sign: f64) -> Result<Self> {
        self.check_same(other)?;
        let d = self.dim();
        let mut rows = Vec::with_capacity(d);
        for i in 0..d {
            let mut row = Vec::new();
            self.for_each_in_row(i, |c, v| row.push((c, v)));
            other.for_each_in_row(i, |c, v| row.push((c, v * sign)));
            rows.push(row);
        }
        Ok(Self::from_rows(self.dims, rows))
    }

    /// Sum `self + other`.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.combine(other, 1.0)
    }

    /// Difference `self - other`.
    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.combine(other, -1.0)
    }

    /// Scalar multiple.
    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = self.clone();
        match &mut out.storage {
            Storage::Sparse(rows) => rows.iter_mut().flatten().for_each(|e| e.1 *= s),
            Storage::Dense(data) => data.iter_mut().for_each(|v| *v *= s),
        }
        if s == zero() {
            return Self::zero(self.dims);
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut rows = vec![Vec::new(); self.dim()];
        for (r, c, v) in self.raw_entries() {
            rows[c].push((r, v.conj()));
        }
        Self::from_rows(self.dims, rows)
    }

    /// Kronecker product with `self` on the leading sites.
    pub fn kron(&self, other: &Self) -> Result<Self> {
        let dims = self.dims.concat(other.dims)?;
        let db = other.dim();
        let a = self.raw_entries();
        let b = other.raw_entries();
        let mut rows = vec![Vec::new(); dims.dim()];
        for &(ra, ca, va) in &a {
            for &(rb, cb, vb) in &b {
                rows[ra * db + rb].push((ca * db + cb, va * vb));
            }
        }
        Ok(Self::from_rows(dims, rows))
    }

    /// Matrix-vector product `self · v`.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dims.to_string(),
                right: format!("vector of length {}", v.len()),
            });
        }
        Ok((0..self.dim())
            .map(|i| {
                let mut acc = zero();
                self.for_each_in_row(i, |c, x| acc += x * v[c]);
                acc
            })
            .collect())
    }

    fn raw_entries(&self) -> Vec<(usize, usize, Complex64)> {
        let mut out = Vec::new();
        for r in 0..self.dim() {
            self.for_each_in_row(r, |c, v| out.push((r, c, v)));
        }
        out
    }

    /// Nonzero entries in row-major order, dropping those below the relative tolerance.
    pub fn entries(&self) -> Vec<(usize, usize, Complex64)> {
        let cut = self.max_abs() * DROP_TOLERANCE;
        self.raw_entries().into_iter().filter(|e| e.2.norm() > cut).collect()
    }

    /// Row-major dense copy.
    pub fn to_dense(&self) -> Vec<Complex64> {
        let d = self.dim();
        let mut out = vec![zero(); d * d];
        for (r, c, v) in self.raw_entries() {
            out[r * d + c] = v;
        }
        out
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        match &self.storage {
            Storage::Sparse(rows) => rows.iter().flatten().map(|e| e.1.norm()).fold(0.0, f64::max),
            Storage::Dense(data) => data.iter().map(|v| v.norm()).fold(0.0, f64::max),
        }
    }

    /// Relative max-norm distance `max|A - B| / max(max|A|, max|B|)`; zero when both vanish.
    pub fn rel_diff(&self, other: &Self) -> Result<f64> {
        let diff = self.sub(other)?.max_abs();
        let scale = self.max_abs().max(other.max_abs());
        Ok(if scale == 0.0 { diff } else { diff / scale })
    }

    /// Whether the relative distance is at most `tol`.
    pub fn approx_eq(&self, other: &Self, tol: f64) -> Result<bool> {
        Ok(self.rel_diff(other)? <= tol)
    }

    /// Whether all entries above the diagonal are below `tol` times the largest entry.
    pub fn is_lower_triangular(&self, tol: f64) -> bool {
        let cut = self.max_abs() * tol;
        self.raw_entries().iter().all(|&(r, c, v)| c <= r || v.norm() <= cut)
    }

    /// Keeps only the rows for which `keep(row)` holds.
    pub fn restrict_rows(&self, keep: impl Fn(usize) -> bool) -> Self {
        let d = self.dim();
        let rows = (0..d)
            .map(|r| {
                let mut row = Vec::new();
                if keep(r) {
                    self.for_each_in_row(r, |c, v| row.push((c, v)));
                }
                row
            })
            .collect();
        Self::normalized(self.dims, rows)
    }

    /// Serializable list of nonzero entries labelled by multi-indices.
    pub fn snapshot(&self) -> OperatorSnapshot {
        OperatorSnapshot {
            n: self.dims.n(),
            sites: self.dims.sites(),
            entries: self
                .entries()
                .into_iter()
                .map(|(r, c, v)| SnapshotEntry {
                    row: MultiIndex::from_linear(r, self.dims).to_string(),
                    col: MultiIndex::from_linear(c, self.dims).to_string(),
                    value: [v.re, v.im],
                })
                .collect(),
        }
    }
}

/// Serializable form of an operator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OperatorSnapshot {
    /// Local dimension N.
    pub n: usize,
    /// Number of sites L.
    pub sites: usize,
    /// Nonzero entries in row-major order.
    pub entries: Vec<SnapshotEntry>,
}

/// One nonzero operator entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    /// Row multi-index as a digit string.
    pub row: String,
    /// Column multi-index as a digit string.
    pub col: String,
    /// Value as `[re, im]`.
    pub value: [f64; 2],
}
