//! Lattices and the catalogue of spin models.
//!
//! Sites are indexed row-major: for extents `[e0, e1, ..]` the site at
//! coordinates `(c0, c1, ..)` has index `c0 * e1 * e2 * .. + c1 * e2 * .. + ..`,
//! so the last axis varies fastest.

use std::collections::BTreeMap;

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::InteractionTerm;
use crate::linalg::{kron, Matrix};

/// ChaCha20 stream used for random model couplings. Other consumers of a
/// seed (e.g. random probe states) use different streams of the same key.
pub const MODEL_STREAM: u64 = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Boundary {
    Open,
    Periodic,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lattice {
    extents: Vec<usize>,
    boundary: Boundary,
}

impl Lattice {
    pub fn dimension(&self) -> usize {
        self.extents.len()
    }

    pub fn extents(&self) -> &[usize] {
        &self.extents
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn site_count(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn coords(&self, site: usize) -> Vec<usize> {
        let mut rest = site;
        let mut out = vec![0; self.extents.len()];
        for (axis, &e) in self.extents.iter().enumerate().rev() {
            out[axis] = rest % e;
            rest /= e;
        }
        out
    }

    pub fn site(&self, coords: &[usize]) -> usize {
        coords
            .iter()
            .zip(&self.extents)
            .fold(0, |acc, (&c, &e)| acc * e + c)
    }

    /// Nearest-neighbour bonds `(i, j)` with `i < j`, each listed once.
    ///
    /// Periodic wrap bonds are only added along axes longer than two sites;
    /// on a length-2 axis the wrap bond would duplicate the direct one.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut bonds = Vec::new();
        for site in 0..self.site_count() {
            let c = self.coords(site);
            for (axis, &e) in self.extents.iter().enumerate() {
                let mut n = c.clone();
                if c[axis] + 1 < e {
                    n[axis] += 1;
                } else if self.boundary == Boundary::Periodic && e > 2 {
                    n[axis] = 0;
                } else {
                    continue;
                }
                let other = self.site(&n);
                bonds.push((site.min(other), site.max(other)));
            }
        }
        bonds.sort_unstable();
        bonds
    }
}

/// Builds a `dimension`-dimensional hypercubic lattice.
pub fn build_lattice(dimension: usize, extents: &[usize], boundary: Boundary) -> Result<Lattice> {
    if dimension == 0 {
        return Err(Error::InvalidGeometry("dimension must be at least 1".into()));
    }
    if extents.len() != dimension {
        return Err(Error::InvalidGeometry(format!(
            "{} extents given for a {dimension}-dimensional lattice",
            extents.len()
        )));
    }
    if let Some(bad) = extents.iter().find(|&&e| e < 2) {
        return Err(Error::InvalidGeometry(format!(
            "every extent must be at least 2, got {bad}"
        )));
    }
    Ok(Lattice { extents: extents.to_vec(), boundary })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelFamily {
    /// `J (Sx Sx + Sy Sy + delta Sz Sz)` on every bond.
    Heisenberg,
    /// `J ((1 + gamma) Sx Sx + (1 - gamma) Sy Sy)` on every bond.
    Xy,
    /// `-J Sz Sz` on bonds plus `-h Sx` on every site.
    Tfim,
    /// Dense random symmetric `k`-site terms, entries uniform on `[-scale, scale]`.
    /// With `diagonal = 1` only diagonal entries are drawn (a classical model).
    RandomKlocal,
    /// All-to-all `-(J/(N-1)) (Sx Sx + gamma Sy Sy) - (h/(N-1)) (Sz_i + Sz_j)`.
    LmgLongrange,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub family: ModelFamily,
    #[serde(default = "default_local_dim")]
    pub local_dim: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

fn default_local_dim() -> usize {
    2
}

fn default_k() -> usize {
    2
}

impl ModelSpec {
    pub fn new(family: ModelFamily) -> Self {
        Self { family, local_dim: 2, k: 2, couplings: BTreeMap::new(), seed: 0 }
    }

    pub fn with_coupling(mut self, name: &str, value: f64) -> Self {
        self.couplings.insert(name.to_string(), value);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn coupling(&self, name: &str, default: f64) -> f64 {
        self.couplings.get(name).copied().unwrap_or(default)
    }

    pub fn validate(&self) -> Result<()> {
        if self.local_dim < 2 {
            return Err(Error::Config(format!("local_dim must be >= 2, got {}", self.local_dim)));
        }
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        let known: &[&str] = match self.family {
            ModelFamily::Heisenberg => &["j", "delta"],
            ModelFamily::Xy => &["j", "gamma"],
            ModelFamily::Tfim => &["j", "h"],
            ModelFamily::RandomKlocal => &["scale", "diagonal"],
            ModelFamily::LmgLongrange => &["j", "gamma", "h"],
        };
        if let Some(name) = self.couplings.keys().find(|c| !known.contains(&c.as_str())) {
            return Err(Error::Config(format!(
                "unknown coupling '{name}' for {:?}; expected one of {known:?}",
                self.family
            )));
        }
        Ok(())
    }
}

/// Spin-S operators for local dimension `d = 2S + 1`, basis ordered
/// `m = S, S-1, .., -S`.
///
/// `Sy` is imaginary; only the real antisymmetric `B` with `Sy = -i B` is
/// returned, so that `Sy ⊗ Sy = -(B ⊗ B)` stays real.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: Matrix,
    pub b: Matrix,
    pub sz: Matrix,
}

impl SpinOperators {
    pub fn new(d: usize) -> Self {
        let s = (d as f64 - 1.0) / 2.0;
        let m = |a: usize| s - a as f64;
        // S+ |m> = sqrt(S(S+1) - m(m+1)) |m+1>, and |m+1> sits at index a-1
        let splus = Mat::from_fn(d, d, |i, j| {
            if j >= 1 && i == j - 1 {
                (s * (s + 1.0) - m(j) * (m(j) + 1.0)).sqrt()
            } else {
                0.0
            }
        });
        let sx = Mat::from_fn(d, d, |i, j| 0.5 * (splus[(i, j)] + splus[(j, i)]));
        let b = Mat::from_fn(d, d, |i, j| 0.5 * (splus[(i, j)] - splus[(j, i)]));
        let sz = Mat::from_fn(d, d, |i, j| if i == j { m(i) } else { 0.0 });
        Self { sx, b, sz }
    }

    pub fn xx(&self) -> Matrix {
        kron(self.sx.as_ref(), self.sx.as_ref())
    }

    pub fn yy(&self) -> Matrix {
        -kron(self.b.as_ref(), self.b.as_ref())
    }

    pub fn zz(&self) -> Matrix {
        kron(self.sz.as_ref(), self.sz.as_ref())
    }

    pub fn identity(&self) -> Matrix {
        Matrix::identity(self.sz.nrows(), self.sz.nrows())
    }
}

/// Generates the raw (not yet PSD-shifted) interaction terms of a model.
///
/// Pure in `(lattice, spec)`: random families draw from a ChaCha20 stream
/// keyed by `spec.seed`, term by term in a fixed order.
pub fn generate_terms(lattice: &Lattice, spec: &ModelSpec) -> Result<Vec<InteractionTerm>> {
    spec.validate()?;
    let d = spec.local_dim;
    let ops = SpinOperators::new(d);
    let n = lattice.site_count();
    let mut terms = Vec::new();

    match spec.family {
        ModelFamily::Heisenberg => {
            let j = spec.coupling("j", 1.0);
            let delta = spec.coupling("delta", 1.0);
            let bond = (ops.xx() + ops.yy() + ops.zz() * delta) * j;
            for (a, b) in lattice.bonds() {
                terms.push(InteractionTerm::new(vec![a, b], bond.clone())?);
            }
        }
        ModelFamily::Xy => {
            let j = spec.coupling("j", 1.0);
            let gamma = spec.coupling("gamma", 0.0);
            let bond = (ops.xx() * (1.0 + gamma) + ops.yy() * (1.0 - gamma)) * j;
            for (a, b) in lattice.bonds() {
                terms.push(InteractionTerm::new(vec![a, b], bond.clone())?);
            }
        }
        ModelFamily::Tfim => {
            let j = spec.coupling("j", 1.0);
            let h = spec.coupling("h", 1.0);
            let bond = ops.zz() * (-j);
            for (a, b) in lattice.bonds() {
                terms.push(InteractionTerm::new(vec![a, b], bond.clone())?);
            }
            if h != 0.0 {
                let field = &ops.sx * (-h);
                for site in 0..n {
                    terms.push(InteractionTerm::new(vec![site], field.clone())?);
                }
            }
        }
        ModelFamily::RandomKlocal => {
            let scale = spec.coupling("scale", 1.0);
            let diagonal = spec.coupling("diagonal", 0.0) != 0.0;
            let supports = random_supports(lattice, spec.k)?;
            let mut rng = ChaCha20Rng::seed_from_u64(spec.seed);
            rng.set_stream(MODEL_STREAM);
            for support in supports {
                let dim = d.pow(support.len() as u32);
                let mut m = Matrix::zeros(dim, dim);
                for i in 0..dim {
                    for jj in i..dim {
                        if diagonal && jj != i {
                            continue;
                        }
                        let v = scale * rng.random_range(-1.0..=1.0);
                        m[(i, jj)] = v;
                        m[(jj, i)] = v;
                    }
                }
                terms.push(InteractionTerm::new(support, m)?);
            }
        }
        ModelFamily::LmgLongrange => {
            if n < 2 {
                return Err(Error::Config("LMG needs at least two sites".into()));
            }
            let scale = 1.0 / (n as f64 - 1.0);
            let j = spec.coupling("j", 1.0);
            let gamma = spec.coupling("gamma", 0.0);
            let h = spec.coupling("h", 0.5);
            let id = ops.identity();
            let field = kron(ops.sz.as_ref(), id.as_ref()) + kron(id.as_ref(), ops.sz.as_ref());
            let pair = ((ops.xx() + ops.yy() * gamma) * j + field * h) * (-scale);
            for a in 0..n {
                for b in (a + 1)..n {
                    terms.push(InteractionTerm::new(vec![a, b], pair.clone())?);
                }
            }
        }
    }

    if let Some(t) = terms.iter().find(|t| t.support().len() > spec.k) {
        return Err(Error::Config(format!(
            "term on {:?} acts on more than k = {} sites",
            t.support(),
            spec.k
        )));
    }
    Ok(terms)
}

/// Supports for the random family: bonds for `k = 2`, windows of `k`
/// consecutive sites on chains.
fn random_supports(lattice: &Lattice, k: usize) -> Result<Vec<Vec<usize>>> {
    let n = lattice.site_count();
    if k == 2 {
        return Ok(lattice.bonds().into_iter().map(|(a, b)| vec![a, b]).collect());
    }
    if lattice.dimension() != 1 {
        return Err(Error::Config(format!(
            "random_klocal with k = {k} is only defined on chains"
        )));
    }
    if k > n {
        return Err(Error::Config(format!("k = {k} exceeds the {n} sites of the chain")));
    }
    let starts = match lattice.boundary() {
        Boundary::Open => n - k + 1,
        Boundary::Periodic if n > k => n,
        Boundary::Periodic => 1,
    };
    Ok((0..starts)
        .map(|s| {
            let mut w: Vec<usize> = (s..s + k).map(|i| i % n).collect();
            w.sort_unstable();
            w
        })
        .collect())
}
