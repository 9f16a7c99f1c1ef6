//! Global Hamiltonian assembly and the interior/boundary/exterior split.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::linalg::{ensure_symmetric, symmetric_eigenvalues, symmetric_norm, Matrix};
use crate::model::{generate_terms, Lattice, ModelSpec};

/// Default cap on the dense Hilbert-space dimension `d^N`.
pub const DEFAULT_DIM_CAP: usize = 1 << 14;

/// Environment variable overriding [`DEFAULT_DIM_CAP`].
pub const DIM_CAP_ENV: &str = "LOCALITY_DIM_CAP";

/// Terms are accepted as Hermitian up to this entrywise asymmetry.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// The dimension cap in effect: `LOCALITY_DIM_CAP` if set and parseable.
pub fn dimension_cap() -> usize {
    std::env::var(DIM_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_DIM_CAP)
}

/// One local term `h_X`: a sorted support and a symmetric matrix on it.
#[derive(Debug, Clone)]
pub struct InteractionTerm {
    support: Vec<usize>,
    matrix: Matrix,
    norm: f64,
}

impl InteractionTerm {
    pub fn new(support: Vec<usize>, matrix: Matrix) -> Result<Self> {
        if support.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(format!(
                "term support {support:?} must be strictly increasing"
            )));
        }
        ensure_symmetric(matrix.as_ref(), HERMITIAN_TOL, "interaction term")?;
        let norm = symmetric_norm(matrix.as_ref())?;
        Ok(Self { support, matrix, norm })
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    /// Cached operator norm.
    pub fn norm(&self) -> f64 {
        self.norm
    }
}

/// Shifts a term by its smallest eigenvalue so that it becomes PSD with a
/// zero ground energy.
pub fn shift_to_psd(term: &InteractionTerm) -> Result<InteractionTerm> {
    ensure_symmetric(term.matrix.as_ref(), HERMITIAN_TOL, "interaction term")?;
    let ev = symmetric_eigenvalues(term.matrix.as_ref())?;
    let lowest = ev.first().copied().unwrap_or(0.0);
    let n = term.matrix.nrows();
    let mut matrix = term.matrix.clone();
    for i in 0..n {
        matrix[(i, i)] -= lowest;
    }
    // symmetrize away rounding from the subtraction path
    let matrix = Matrix::from_fn(n, n, |i, j| 0.5 * (matrix[(i, j)] + matrix[(j, i)]));
    let shifted = symmetric_eigenvalues(matrix.as_ref())?;
    let norm = shifted.last().copied().unwrap_or(0.0).max(0.0);
    Ok(InteractionTerm { support: term.support.clone(), matrix, norm })
}

/// Index bookkeeping for placing an operator on a subset of sites.
///
/// Site 0 is the most significant digit of a basis index. For a support `X`
/// the full index of (local config `a`, complement config `c`) is
/// `local[a] + rest[c]`.
#[derive(Debug, Clone)]
pub struct SiteEmbedding {
    pub local: Vec<usize>,
    pub rest: Vec<usize>,
}

impl SiteEmbedding {
    pub fn new(n_sites: usize, d: usize, support: &[usize]) -> Self {
        let stride = |site: usize| d.pow((n_sites - 1 - site) as u32);
        let complement: Vec<usize> = (0..n_sites).filter(|s| !support.contains(s)).collect();
        Self { local: offsets(support, d, &stride), rest: offsets(&complement, d, &stride) }
    }
}

fn offsets(sites: &[usize], d: usize, stride: &dyn Fn(usize) -> usize) -> Vec<usize> {
    let mut out = vec![0usize];
    for &s in sites {
        let st = stride(s);
        out = out.iter().flat_map(|&base| (0..d).map(move |digit| base + digit * st)).collect();
    }
    out
}

/// Adds `op ⊗ 1` (acting on `support`) into `full`, a `d^n_sites` square matrix.
pub fn add_embedded(full: &mut Matrix, op: &Matrix, support: &[usize], n_sites: usize, d: usize) {
    let emb = SiteEmbedding::new(n_sites, d, support);
    let m = emb.local.len();
    debug_assert_eq!(op.nrows(), m);
    for &c in &emb.rest {
        for b in 0..m {
            let col = emb.local[b] + c;
            for a in 0..m {
                let v = op[(a, b)];
                if v != 0.0 {
                    full[(emb.local[a] + c, col)] += v;
                }
            }
        }
    }
}

/// `op ⊗ 1` on the full `d^n_sites` space.
pub fn embed_operator(op: &Matrix, support: &[usize], n_sites: usize, d: usize) -> Matrix {
    let dim = d.pow(n_sites as u32);
    let mut full = Matrix::zeros(dim, dim);
    add_embedded(&mut full, op, support, n_sites, d);
    full
}

/// A complete model: PSD-normalized terms plus the constants `g` and `λ`.
#[derive(Debug, Clone)]
pub struct SpinModel {
    lattice: Lattice,
    terms: Vec<InteractionTerm>,
    d: usize,
    k: usize,
    g: f64,
    lambda: f64,
    hilbert_dim: usize,
}

impl SpinModel {
    /// Generates the catalogue model and normalizes every term to PSD.
    pub fn build(lattice: Lattice, spec: &ModelSpec) -> Result<Self> {
        let raw = generate_terms(&lattice, spec)?;
        Self::from_terms(lattice, spec.local_dim, spec.k, raw)
    }

    /// Builds a model from raw Hermitian terms; each is shifted to PSD first.
    pub fn from_terms(lattice: Lattice, d: usize, k: usize, raw: Vec<InteractionTerm>) -> Result<Self> {
        if d < 2 || k < 1 {
            return Err(Error::Config(format!("need d >= 2 and k >= 1, got d = {d}, k = {k}")));
        }
        let n = lattice.site_count();
        let hilbert_dim = u32::try_from(n)
            .ok()
            .and_then(|n| d.checked_pow(n))
            .ok_or_else(|| Error::Config(format!("d^N overflows for d = {d}, N = {n}")))?;
        let mut terms = Vec::with_capacity(raw.len());
        for t in &raw {
            if t.support.len() > k {
                return Err(Error::Validation(format!(
                    "term on {:?} acts on more than k = {k} sites",
                    t.support
                )));
            }
            if let Some(&s) = t.support.iter().find(|&&s| s >= n) {
                return Err(Error::Validation(format!("term site {s} outside the {n}-site lattice")));
            }
            if t.matrix.nrows() != d.pow(t.support.len() as u32) {
                return Err(Error::Validation(format!(
                    "term on {:?} has dimension {}, expected {}",
                    t.support,
                    t.matrix.nrows(),
                    d.pow(t.support.len() as u32)
                )));
            }
            terms.push(shift_to_psd(t)?);
        }
        let g = compute_g(&terms, n);
        let lambda = compute_lambda(g, k)?;
        Ok(Self { lattice, terms, d, k, g, lambda, hilbert_dim })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn terms(&self) -> &[InteractionTerm] {
        &self.terms
    }

    pub fn site_count(&self) -> usize {
        self.lattice.site_count()
    }

    pub fn local_dim(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn hilbert_dim(&self) -> usize {
        self.hilbert_dim
    }

    fn check_cap(&self, cap: usize) -> Result<()> {
        if self.hilbert_dim > cap {
            return Err(Error::DimensionCap { dim: self.hilbert_dim, cap, env: DIM_CAP_ENV });
        }
        Ok(())
    }

    /// Sum of the selected terms embedded on the full space.
    pub fn assemble_terms(&self, indices: &[usize]) -> Result<Matrix> {
        self.assemble_terms_with_cap(indices, dimension_cap())
    }

    pub fn assemble_terms_with_cap(&self, indices: &[usize], cap: usize) -> Result<Matrix> {
        self.check_cap(cap)?;
        let n = self.site_count();
        let mut h = Matrix::zeros(self.hilbert_dim, self.hilbert_dim);
        for &i in indices {
            let t = &self.terms[i];
            add_embedded(&mut h, &t.matrix, &t.support, n, self.d);
        }
        Ok(h)
    }

    /// Sum of the selected terms as an operator on `sites` only
    /// (dimension `d^|sites|`). Every selected term must live inside `sites`.
    pub fn local_hamiltonian(&self, sites: &[usize], indices: &[usize]) -> Result<Matrix> {
        let dim = self.d.pow(sites.len() as u32);
        let mut h = Matrix::zeros(dim, dim);
        for &i in indices {
            let t = &self.terms[i];
            let local_support = t
                .support
                .iter()
                .map(|s| sites.iter().position(|x| x == s))
                .collect::<Option<Vec<usize>>>()
                .ok_or_else(|| {
                    Error::Validation(format!("term on {:?} is not inside {sites:?}", t.support))
                })?;
            add_embedded(&mut h, &t.matrix, &local_support, sites.len(), self.d);
        }
        Ok(h)
    }
}

/// The full Hamiltonian `H = Σ_X h_X` on `d^N` dimensions.
pub fn assemble(model: &SpinModel) -> Result<Matrix> {
    assemble_with_cap(model, dimension_cap())
}

pub fn assemble_with_cap(model: &SpinModel, cap: usize) -> Result<Matrix> {
    let all: Vec<usize> = (0..model.terms.len()).collect();
    model.assemble_terms_with_cap(&all, cap)
}

/// Tightest admissible `g`: the largest per-site sum of term norms.
pub fn compute_g(terms: &[InteractionTerm], n_sites: usize) -> f64 {
    let mut per_site = vec![0.0; n_sites];
    for t in terms {
        for &s in &t.support {
            per_site[s] += t.norm;
        }
    }
    per_site.into_iter().fold(0.0, f64::max)
}

/// `λ = 1/(2gk)`.
pub fn compute_lambda(g: f64, k: usize) -> Result<f64> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(Error::Domain(format!("g must be positive and finite, got {g}")));
    }
    if k == 0 {
        return Err(Error::Domain("k must be at least 1".into()));
    }
    Ok(1.0 / (2.0 * g * k as f64))
}

/// Partition of the term list by a region `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionDecomposition {
    pub region: Vec<usize>,
    pub complement: Vec<usize>,
    /// `E_L`: terms with support inside `L`.
    pub interior: Vec<usize>,
    /// `E_∂L`: terms touching both `L` and its complement.
    pub boundary: Vec<usize>,
    /// `E_{L^c}`: terms with support inside the complement.
    pub exterior: Vec<usize>,
    pub size_l: f64,
    pub size_boundary: f64,
    pub size_lc: f64,
}

impl RegionDecomposition {
    /// `|L̄| = |L| + |∂L|`.
    pub fn size_lbar(&self) -> f64 {
        self.size_l + self.size_boundary
    }
}

pub fn decompose(model: &SpinModel, region: &[usize]) -> Result<RegionDecomposition> {
    let n = model.site_count();
    if let Some(&s) = region.iter().find(|&&s| s >= n) {
        return Err(Error::Validation(format!("region site {s} is not in the {n}-site lattice")));
    }
    let inside: BTreeSet<usize> = region.iter().copied().collect();
    let complement: Vec<usize> = (0..n).filter(|s| !inside.contains(s)).collect();
    let mut out = RegionDecomposition {
        region: inside.iter().copied().collect(),
        complement,
        interior: Vec::new(),
        boundary: Vec::new(),
        exterior: Vec::new(),
        size_l: 0.0,
        size_boundary: 0.0,
        size_lc: 0.0,
    };
    for (i, t) in model.terms.iter().enumerate() {
        let n_in = t.support.iter().filter(|s| inside.contains(s)).count();
        if n_in == t.support.len() {
            out.interior.push(i);
            out.size_l += t.norm;
        } else if n_in == 0 {
            out.exterior.push(i);
            out.size_lc += t.norm;
        } else {
            out.boundary.push(i);
            out.size_boundary += t.norm;
        }
    }
    Ok(out)
}

/// The constant `R` for an operator supported inside `L`: `|L̄|` in general,
/// `|∂L|` when the operator also commutes with `H_L`.
pub fn term_set_for_operator(
    a_support: &[usize],
    decomp: &RegionDecomposition,
    commutes_with_hl: bool,
) -> Result<f64> {
    if let Some(s) = a_support.iter().find(|s| !decomp.region.contains(s)) {
        return Err(Error::Validation(format!("operator site {s} lies outside the region L")));
    }
    Ok(if commutes_with_hl { decomp.size_boundary } else { decomp.size_lbar() })
}
