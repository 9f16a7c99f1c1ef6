//! Exact diagonalization, interval projectors, sandwich norms and
//! imaginary-time conjugation.

use std::ops::Range;

use faer::{Mat, MatRef, Side};

use crate::error::{Error, Result};
use crate::hamiltonian::SiteEmbedding;
use crate::linalg::{ensure_symmetric, operator_norm, Matrix};

/// Endpoint tolerance for interval membership and the gap below which
/// neighbouring eigenvalues count as one degenerate cluster.
pub const SPECTRAL_TOL: f64 = 1e-9;

/// Largest exponent accepted by [`conjugate`] before reporting overflow.
const MAX_EXPONENT: f64 = 700.0;

/// A closed energy interval; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyInterval {
    lo: f64,
    hi: f64,
}

impl EnergyInterval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::Validation(format!("bad energy interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    /// `(-∞, e]`; on a PSD spectrum this is `[0, e]`.
    pub fn at_most(e: f64) -> Self {
        Self { lo: f64::NEG_INFINITY, hi: e }
    }

    /// `[e, ∞)`.
    pub fn at_least(e: f64) -> Self {
        Self { lo: e, hi: f64::INFINITY }
    }

    pub fn everything() -> Self {
        Self { lo: f64::NEG_INFINITY, hi: f64::INFINITY }
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Eigen-decomposition `M = U diag(ε) Uᵀ` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct SpectralData {
    values: Vec<f64>,
    vectors: Matrix,
    label: String,
    // per eigenvalue, the midpoint of its degenerate cluster (non-decreasing)
    cluster_mid: Vec<f64>,
}

impl SpectralData {
    /// Wraps an already computed decomposition. Eigenpairs are re-sorted.
    pub fn from_parts(values: Vec<f64>, vectors: Matrix, label: impl Into<String>) -> Result<Self> {
        if vectors.ncols() != values.len() {
            return Err(Error::Validation(format!(
                "{} eigenvalues for {} eigenvectors",
                values.len(),
                vectors.ncols()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite eigenvalue".into()));
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let (values, vectors) = if order.iter().enumerate().all(|(i, &j)| i == j) {
            (values, vectors)
        } else {
            let v: Vec<f64> = order.iter().map(|&j| values[j]).collect();
            let u = Mat::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
            (v, u)
        };
        let cluster_mid = cluster_midpoints(&values);
        Ok(Self { values, vectors, label: label.into(), cluster_mid })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn vectors(&self) -> MatRef<'_, f64> {
        self.vectors.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Smallest eigenvalue.
    pub fn ground(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }

    /// Largest eigenvalue.
    pub fn top(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    /// Index range of the eigenvalues whose cluster midpoint lies in `interval`.
    pub fn select(&self, interval: EnergyInterval) -> Range<usize> {
        let start = self.cluster_mid.partition_point(|&m| m < interval.lo - SPECTRAL_TOL);
        let end = self.cluster_mid.partition_point(|&m| m <= interval.hi + SPECTRAL_TOL);
        start..end.max(start)
    }

    pub fn rank(&self, interval: EnergyInterval) -> usize {
        self.select(interval).len()
    }

    /// The orthogonal projector onto the eigenvectors selected by `interval`.
    pub fn projector(&self, interval: EnergyInterval) -> Matrix {
        let r = self.select(interval);
        let u = self.vectors.as_ref().subcols(r.start, r.len());
        u * u.transpose()
    }

    /// `U f(diag ε) Uᵀ`.
    pub fn function(&self, f: impl Fn(f64) -> f64) -> Matrix {
        let n = self.dim();
        let scaled = Mat::from_fn(self.vectors.nrows(), n, |i, j| self.vectors[(i, j)] * f(self.values[j]));
        &scaled * self.vectors.transpose()
    }

    /// `Uᵀ A U`.
    pub fn to_eigenbasis(&self, a: MatRef<'_, f64>) -> Result<Matrix> {
        self.check_conformable(a)?;
        Ok(self.vectors.transpose() * (a * &self.vectors))
    }

    fn check_conformable(&self, a: MatRef<'_, f64>) -> Result<()> {
        let n = self.vectors.nrows();
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::Validation(format!(
                "operator is {}x{}, spectral data ({}) is {n}-dimensional",
                a.nrows(),
                a.ncols(),
                self.label
            )));
        }
        Ok(())
    }
}

fn cluster_midpoints(values: &[f64]) -> Vec<f64> {
    let mut mid = vec![0.0; values.len()];
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > SPECTRAL_TOL {
            let m = 0.5 * (values[start] + values[i - 1]);
            mid[start..i].fill(m);
            start = i;
        }
    }
    mid
}

/// Full eigen-decomposition of a real symmetric matrix.
///
/// Diagonal input is handled exactly: the eigenvectors are the permuted
/// standard basis.
pub fn diagonalize(m: MatRef<'_, f64>, label: &str) -> Result<SpectralData> {
    if m.nrows() != m.ncols() {
        return Err(Error::Validation(format!("{label} is not square")));
    }
    ensure_symmetric(m, 1e-10, label)?;
    let n = m.nrows();
    let diagonal = (0..n).all(|j| (0..n).all(|i| i == j || m[(i, j)] == 0.0));
    if diagonal {
        let values: Vec<f64> = (0..n).map(|i| m[(i, i)]).collect();
        return SpectralData::from_parts(values, Matrix::identity(n, n), label);
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|_| Error::Numeric(format!("eigensolver did not converge on {label}")))?;
    let values: Vec<f64> = evd.S().column_vector().iter().copied().collect();
    SpectralData::from_parts(values, evd.U().to_owned(), label)
}

/// Spectral data of `1` on a `dim`-dimensional space (eigenvalue 0).
pub fn trivial_spectrum(dim: usize, label: &str) -> SpectralData {
    SpectralData::from_parts(vec![0.0; dim], Matrix::identity(dim, dim), label)
        .expect("identity decomposition is well formed")
}

/// Eigen-decomposition of `A ⊗ 1 + 1 ⊗ B` on `n_sites` sites of dimension
/// `d`, where `A` acts on `sites` (in increasing order) and `B` on the
/// remaining sites, from the decompositions of the two factors.
pub fn lift_product(
    n_sites: usize,
    d: usize,
    sites: &[usize],
    inner: &SpectralData,
    outer: &SpectralData,
    label: &str,
) -> Result<SpectralData> {
    let emb = SiteEmbedding::new(n_sites, d, sites);
    if emb.local.len() != inner.dim() || emb.rest.len() != outer.dim() {
        return Err(Error::Validation(format!(
            "factor dimensions {}x{} do not match the split {}x{}",
            inner.dim(),
            outer.dim(),
            emb.local.len(),
            emb.rest.len()
        )));
    }
    let (na, nb) = (inner.dim(), outer.dim());
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(na * nb);
    for i in 0..na {
        for j in 0..nb {
            pairs.push((inner.values[i] + outer.values[j], i, j));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let dim = na * nb;
    let mut u = Matrix::zeros(dim, dim);
    for (col, &(_, i, j)) in pairs.iter().enumerate() {
        for y in 0..nb {
            let vy = outer.vectors[(y, j)];
            if vy == 0.0 {
                continue;
            }
            let base = emb.rest[y];
            for x in 0..na {
                u[(emb.local[x] + base, col)] = inner.vectors[(x, i)] * vy;
            }
        }
    }
    let values = pairs.iter().map(|p| p.0).collect();
    SpectralData::from_parts(values, u, label)
}

/// `‖P1 A P2‖` from explicit matrices.
pub fn sandwich_norm(p1: MatRef<'_, f64>, a: MatRef<'_, f64>, p2: MatRef<'_, f64>) -> Result<f64> {
    if p1.ncols() != a.nrows() || a.ncols() != p2.nrows() {
        return Err(Error::Validation(format!(
            "cannot form a {}x{} · {}x{} · {}x{} product",
            p1.nrows(),
            p1.ncols(),
            a.nrows(),
            a.ncols(),
            p2.nrows(),
            p2.ncols()
        )));
    }
    operator_norm((p1 * (a * p2)).as_ref())
}

/// Overlap table `U1ᵀ A U2[:, cols]` for sandwich norms between two
/// spectral decompositions. `a = None` stands for the identity.
///
/// For index ranges `I1`, `I2 ⊂ cols`, `‖P1 A P2‖` equals the largest
/// singular value of the `(I1, I2)` block.
#[derive(Debug, Clone)]
pub struct Overlap {
    table: Matrix,
    col_offset: usize,
}

impl Overlap {
    pub fn new(
        left: &SpectralData,
        a: Option<MatRef<'_, f64>>,
        right: &SpectralData,
        cols: Range<usize>,
    ) -> Result<Self> {
        if left.vectors.nrows() != right.vectors.nrows() || cols.end > right.dim() {
            return Err(Error::Validation(format!(
                "overlap between {} and {} is not conformable",
                left.label, right.label
            )));
        }
        let u2 = right.vectors.as_ref().subcols(cols.start, cols.len());
        let table = match a {
            Some(a) => {
                right.check_conformable(a)?;
                left.vectors.transpose() * (a * u2)
            }
            None => left.vectors.transpose() * u2,
        };
        Ok(Self { table, col_offset: cols.start })
    }

    /// Wraps a precomputed table whose first column is eigenvector `col_offset`
    /// of the right-hand decomposition.
    pub fn from_table(table: Matrix, col_offset: usize) -> Self {
        Self { table, col_offset }
    }

    /// Largest singular value of the block; 0 for an empty block.
    pub fn block_norm(&self, rows: Range<usize>, cols: Range<usize>) -> Result<f64> {
        if rows.is_empty() || cols.is_empty() {
            return Ok(0.0);
        }
        let c0 = cols.start.checked_sub(self.col_offset).filter(|c| c + cols.len() <= self.table.ncols());
        let Some(c0) = c0 else {
            return Err(Error::Validation(format!("columns {cols:?} not in the overlap table")));
        };
        operator_norm(self.table.as_ref().submatrix(rows.start, c0, rows.len(), cols.len()))
    }
}

fn conjugation_weights(sd: &SpectralData, s: f64) -> Result<()> {
    let spread = (sd.top() - sd.ground()).abs();
    if (s * spread).abs() > MAX_EXPONENT {
        return Err(Error::Numeric(format!(
            "e^(s·Δε) overflows for s = {s} over a spectral spread of {spread}; use a smaller s"
        )));
    }
    Ok(())
}

/// `e^{sD} Ã e^{-sD}` for `Ã` already in the eigenbasis.
pub fn conjugate_in_eigenbasis(sd: &SpectralData, a_eig: MatRef<'_, f64>, s: f64) -> Result<Matrix> {
    conjugation_weights(sd, s)?;
    let v = &sd.values;
    let n = v.len();
    if a_eig.nrows() != n || a_eig.ncols() != n {
        return Err(Error::Validation("eigenbasis operator has the wrong dimension".into()));
    }
    let e: Vec<f64> = v.iter().map(|&x| (s * (x - v[0])).exp()).collect();
    let einv: Vec<f64> = v.iter().map(|&x| (-s * (x - v[0])).exp()).collect();
    Ok(Mat::from_fn(n, n, |i, j| e[i] * a_eig[(i, j)] * einv[j]))
}

/// `e^{sM} A e^{-sM}` where `M` is the decomposed operator.
pub fn conjugate(sd: &SpectralData, a: MatRef<'_, f64>, s: f64) -> Result<Matrix> {
    if s == 0.0 {
        sd.check_conformable(a)?;
        return Ok(a.to_owned());
    }
    let inner = conjugate_in_eigenbasis(sd, sd.to_eigenbasis(a)?.as_ref(), s)?;
    Ok(&sd.vectors * (&inner * sd.vectors.transpose()))
}

/// `‖e^{sM} A e^{-sM}‖`, evaluated without leaving the eigenbasis.
pub fn conjugated_norm(sd: &SpectralData, a_eig: MatRef<'_, f64>, s: f64) -> Result<f64> {
    operator_norm(conjugate_in_eigenbasis(sd, a_eig, s)?.as_ref())
}

/// Rayleigh quotient `⟨v|H|v⟩ / ⟨v|v⟩`.
pub fn state_energy(h: MatRef<'_, f64>, v: &[f64]) -> Result<f64> {
    if h.nrows() != v.len() || h.ncols() != v.len() {
        return Err(Error::Validation("state and operator dimensions differ".into()));
    }
    let norm2: f64 = v.iter().map(|x| x * x).sum();
    if norm2.sqrt() <= 1e-12 {
        return Err(Error::Domain("state energy of a (near) zero vector".into()));
    }
    let mut num = 0.0;
    for j in 0..v.len() {
        if v[j] == 0.0 {
            continue;
        }
        let col: f64 = (0..v.len()).map(|i| v[i] * h[(i, j)]).sum();
        num += col * v[j];
    }
    Ok(num / norm2)
}

/// Rayleigh quotient from eigenbasis coefficients: `Σ ε_i c_i² / Σ c_i²`.
pub fn spectral_energy(values: &[f64], coeffs: &[f64]) -> Result<f64> {
    let norm2: f64 = coeffs.iter().map(|x| x * x).sum();
    if norm2.sqrt() <= 1e-12 {
        return Err(Error::Domain("state energy of a (near) zero vector".into()));
    }
    Ok(values.iter().zip(coeffs).map(|(e, c)| e * c * c).sum::<f64>() / norm2)
}
