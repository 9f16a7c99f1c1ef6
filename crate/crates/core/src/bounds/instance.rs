use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, decompose, embed_operator, term_set_for_operator, RegionDecomposition, SpinModel};
use crate::linalg::{symmetric_norm, Matrix};
use crate::model::SpinOperators;
use crate::spectral::{diagonalize, lift_product, trivial_spectrum, SpectralData};
use crate::truncation::{auto_tau, TauSetting, Truncated};

use super::BoundParams;

/// Energy grids shared by the suites.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSpec {
    /// Points per energy axis.
    pub points: usize,
    /// Fraction of the spectral range `[ε₀, ε_max]` covered by an axis.
    pub window: f64,
    /// Overrides for the low-energy axis (the `ε` of `Π_{[0,ε]}`).
    pub low_points: Option<usize>,
    pub low_window: Option<f64>,
    /// Points on imaginary-time grids.
    pub s_points: usize,
    /// Random states for the `φ = AΠψ` check.
    pub psi_samples: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { points: 20, window: 0.9, low_points: None, low_window: None, s_points: 10, psi_samples: 50 }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        let bad_window = |w: f64| !(w > 0.0 && w <= 1.0);
        if self.points == 0 || self.low_points == Some(0) || self.s_points == 0 {
            return Err(Error::Config("grid point counts must be positive".into()));
        }
        if bad_window(self.window) || self.low_window.is_some_and(bad_window) {
            return Err(Error::Config("grid windows must lie in (0, 1]".into()));
        }
        Ok(())
    }

    /// Axis over `[lo, lo + window·(hi − lo)]`.
    pub fn axis(&self, lo: f64, hi: f64) -> Vec<f64> {
        energy_axis(lo, hi, self.points, self.window)
    }

    pub fn low_axis(&self, lo: f64, hi: f64) -> Vec<f64> {
        energy_axis(
            lo,
            hi,
            self.low_points.unwrap_or(self.points),
            self.low_window.unwrap_or(self.window),
        )
    }

    /// `s_points` values from 0 to `top` inclusive.
    pub fn s_axis(&self, top: f64) -> Vec<f64> {
        energy_axis(0.0, top, self.s_points, 1.0)
    }
}

/// `n` uniform points `lo + window·(hi − lo)·i/(n − 1)`.
pub fn energy_axis(lo: f64, hi: f64, n: usize, window: f64) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + window * (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Which optional pieces an [`Instance`] should precompute.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Needs {
    /// Spectral data of `H_L ⊗ 1`.
    pub local: bool,
    /// Spectral data of `H_L + H_{L^c}`.
    pub product: bool,
    /// The single-site probe operator.
    pub probe: bool,
    /// The truncated Hamiltonian at this scale.
    pub truncation: Option<TauSetting>,
}

impl Needs {
    pub fn all(tau: TauSetting) -> Self {
        Self { local: true, product: true, probe: true, truncation: Some(tau) }
    }
}

/// Normalized `S^x` on one site of `L`, embedded on the full space.
#[derive(Debug, Clone)]
pub struct Probe {
    pub site: usize,
    pub full: Matrix,
    pub norm: f64,
    /// `R = |L̄|`.
    pub r: f64,
}

impl Probe {
    pub fn new(model: &SpinModel, decomp: &RegionDecomposition, site: usize) -> Result<Self> {
        let ops = SpinOperators::new(model.local_dim());
        let sx_norm = symmetric_norm(ops.sx.as_ref())?;
        let local = &ops.sx * (1.0 / sx_norm);
        let full = embed_operator(&local, &[site], model.site_count(), model.local_dim());
        let r = term_set_for_operator(&[site], decomp, false)?;
        Ok(Self { site, full, norm: 1.0, r })
    }
}

/// One model instance with its region split and every spectrum the suites use.
#[derive(Debug)]
pub struct Instance {
    pub seed: u64,
    pub model: SpinModel,
    pub decomp: RegionDecomposition,
    pub h: Matrix,
    pub spec_h: SpectralData,
    /// `H_L` on the sites of `L` only.
    pub hl_local: SpectralData,
    /// `H_{L^c}` on the sites of `L^c` only.
    pub hlc_local: SpectralData,
    /// `H_∂` on the full space.
    pub h_boundary: Matrix,
    spec_hl: Option<SpectralData>,
    spec_q: Option<SpectralData>,
    probe: Option<Probe>,
    truncated: Option<Truncated>,
}

impl Instance {
    pub fn new(model: SpinModel, region: &[usize], seed: u64, needs: Needs, probe_site: Option<usize>) -> Result<Self> {
        let decomp = decompose(&model, region)?;
        let h = assemble(&model)?;
        let spec_h = diagonalize(h.as_ref(), "H")?;
        let hl = model.local_hamiltonian(&decomp.region, &decomp.interior)?;
        let hl_local = diagonalize(hl.as_ref(), "H_L")?;
        let hlc = model.local_hamiltonian(&decomp.complement, &decomp.exterior)?;
        let hlc_local = diagonalize(hlc.as_ref(), "H_Lc")?;
        let h_boundary = model.assemble_terms(&decomp.boundary)?;

        let (n, d) = (model.site_count(), model.local_dim());
        let spec_hl = if needs.local {
            let outer = trivial_spectrum(hlc_local.dim(), "1");
            Some(lift_product(n, d, &decomp.region, &hl_local, &outer, "H_L")?)
        } else {
            None
        };
        let spec_q = if needs.product {
            Some(lift_product(n, d, &decomp.region, &hl_local, &hlc_local, "H_L+H_Lc")?)
        } else {
            None
        };
        let probe = if needs.probe {
            let site = match probe_site {
                Some(s) if decomp.region.contains(&s) => s,
                Some(s) => return Err(Error::Config(format!("probe site {s} is not in the region L"))),
                None => *decomp
                    .region
                    .get(decomp.region.len() / 2)
                    .ok_or_else(|| Error::Config("the probe operator needs a non-empty region".into()))?,
            };
            Some(Probe::new(&model, &decomp, site)?)
        } else {
            None
        };
        let truncated = match needs.truncation {
            Some(setting) => {
                let tau = match setting {
                    TauSetting::Value(t) => t,
                    TauSetting::Auto(_) => auto_tau(&hl_local)?,
                };
                Some(Truncated::from_parts(n, d, &decomp.region, &hl_local, &hlc_local, &h, tau)?)
            }
            None => None,
        };
        Ok(Self { seed, model, decomp, h, spec_h, hl_local, hlc_local, h_boundary, spec_hl, spec_q, probe, truncated })
    }

    fn missing(what: &str) -> Error {
        Error::Config(format!("instance was prepared without {what}"))
    }

    pub fn spec_hl(&self) -> Result<&SpectralData> {
        self.spec_hl.as_ref().ok_or_else(|| Self::missing("H_L spectral data"))
    }

    pub fn spec_q(&self) -> Result<&SpectralData> {
        self.spec_q.as_ref().ok_or_else(|| Self::missing("H_L + H_Lc spectral data"))
    }

    pub fn probe(&self) -> Result<&Probe> {
        self.probe.as_ref().ok_or_else(|| Self::missing("a probe operator"))
    }

    pub fn truncated(&self) -> Result<&Truncated> {
        self.truncated.as_ref().ok_or_else(|| Self::missing("a truncated Hamiltonian"))
    }

    pub fn eps0(&self) -> f64 {
        self.spec_h.ground()
    }

    /// Model constants and ground energies.
    pub fn base_params(&self) -> BoundParams {
        let m = &self.model;
        BoundParams {
            eps0: self.spec_h.ground(),
            eps0_l: self.hl_local.ground(),
            eps0_lc: self.hlc_local.ground(),
            eps0_tilde: self.truncated.as_ref().map_or(f64::NAN, |t| t.spec_ht.ground()),
            ..BoundParams::new(m.g(), m.k(), m.lambda(), self.decomp.size_boundary)
        }
    }
}
