//! The truncated Hamiltonian `H̃ = H̃_L + H_∂ + H_{L^c}` with `H̃_L` the
//! spectrum of `H_L` clipped at a scale `τ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{rhs_pi, rhs_tpi, BoundId, BoundParams, BoundReport, GridSpec, Instance};
use crate::error::{Error, Result};
use crate::hamiltonian::{assemble, embed_operator, RegionDecomposition, SpinModel};
use crate::linalg::{operator_norm, symmetric_eigenvalues, Matrix};
use crate::spectral::{diagonalize, lift_product, EnergyInterval, SpectralData, SPECTRAL_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AutoKeyword {
    Auto,
}

/// `τ` as configured: a number, or `"auto"` for the median of the `H_L` spectrum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TauSetting {
    Value(f64),
    Auto(AutoKeyword),
}

impl Default for TauSetting {
    fn default() -> Self {
        TauSetting::Auto(AutoKeyword::Auto)
    }
}

/// Median of the `H_L` spectrum, or its mean when the median is not positive.
pub fn auto_tau(hl: &SpectralData) -> Result<f64> {
    let v = hl.values();
    if v.is_empty() {
        return Err(Error::Domain("empty H_L spectrum".into()));
    }
    let n = v.len();
    let median = if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) };
    if median > 0.0 {
        return Ok(median);
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    if mean > 0.0 {
        Ok(mean)
    } else {
        Err(Error::Domain("H_L has no positive energies to truncate at".into()))
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("truncation scale must be positive, got {tau}")))
    }
}

fn clip(x: f64, tau: f64) -> f64 {
    if x >= tau - SPECTRAL_TOL {
        tau
    } else {
        x
    }
}

/// Spectral data of `H̃_L`: same eigenvectors, eigenvalues `min(ε_j(L), τ)`.
pub fn truncate_spectrum(hl: &SpectralData, tau: f64) -> Result<SpectralData> {
    check_tau(tau)?;
    let values = hl.values().iter().map(|&x| clip(x, tau)).collect();
    SpectralData::from_parts(values, hl.vectors().to_owned(), format!("{}~", hl.label()))
}

/// `H̃_L = H_L P_{[0,τ)} + τ P_{[τ,∞)}`.
pub fn truncate_hl(hl: &SpectralData, tau: f64) -> Result<Matrix> {
    Ok(truncate_spectrum(hl, tau)?.function(|x| x))
}

/// Region and scale defining a truncation.
#[derive(Debug, Clone)]
pub struct TruncationSpec<'a> {
    pub model: &'a SpinModel,
    pub decomp: &'a RegionDecomposition,
    pub tau: f64,
}

/// `H̃` and the spectra derived from it.
#[derive(Debug, Clone)]
pub struct Truncated {
    pub tau: f64,
    /// `H̃_L` on the sites of `L` only.
    pub hl_tilde_local: SpectralData,
    /// `H − H̃ = (H_L − H̃_L) ⊗ 1`.
    pub difference: Matrix,
    pub h_tilde: Matrix,
    pub spec_ht: SpectralData,
    /// `H̃_L + H_{L^c}`.
    pub spec_x: SpectralData,
    /// `‖H_L‖`, which dominates `‖H − H̃‖`.
    pub hl_norm: f64,
}

impl Truncated {
    pub fn from_parts(
        n_sites: usize,
        d: usize,
        region: &[usize],
        hl_local: &SpectralData,
        hlc_local: &SpectralData,
        h: &Matrix,
        tau: f64,
    ) -> Result<Self> {
        let hl_tilde_local = truncate_spectrum(hl_local, tau)?;
        let excess = hl_local.function(|x| x - clip(x, tau));
        let difference = embed_operator(&excess, region, n_sites, d);
        let h_tilde = h - &difference;
        let spec_ht = diagonalize(h_tilde.as_ref(), "H~")?;
        let spec_x = lift_product(n_sites, d, region, &hl_tilde_local, hlc_local, "H~_L+H_Lc")?;
        Ok(Self { tau, hl_tilde_local, difference, h_tilde, spec_ht, spec_x, hl_norm: hl_local.top().abs() })
    }
}

/// Builds `H̃` from scratch.
pub fn build_truncated(spec: &TruncationSpec<'_>) -> Result<Truncated> {
    check_tau(spec.tau)?;
    let m = spec.model;
    let dc = spec.decomp;
    let h = assemble(m)?;
    let hl = diagonalize(m.local_hamiltonian(&dc.region, &dc.interior)?.as_ref(), "H_L")?;
    let hlc = diagonalize(m.local_hamiltonian(&dc.complement, &dc.exterior)?.as_ref(), "H_Lc")?;
    Truncated::from_parts(m.site_count(), m.local_dim(), &dc.region, &hl, &hlc, &h, spec.tau)
}

/// One eigenvalue pair `(ε_j, ε̃_j)` and the bound on their gap.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LevelComparison {
    pub j: usize,
    pub eps: f64,
    pub eps_tilde: f64,
    /// `ε_j − ε̃_j`.
    pub gap: f64,
    /// `(6/λ^{3/2})e^{−λ(Δτ−Δε̃−33|∂L|)}` at `ε = ε_j`, clamped at `‖H_L‖`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowSpectrumReport {
    pub levels: Vec<LevelComparison>,
    pub max_gap: f64,
    /// `ε̃_j ≤ ε_j + 1e−9` for every listed `j`.
    pub upper_holds: bool,
    /// `ε_j − ε̃_j ≤ bound + 1e−9` for every listed `j`.
    pub lower_holds: bool,
}

/// Compares the levels of `H` and `H̃` with `ε_j ≤ eps_window`.
///
/// `params` supplies `λ`, `|∂L|`, `τ`, `ε₀(L)`, `ε̃₀` and the clamp in `a_norm`.
pub fn compare_low_spectra(
    spec_h: &SpectralData,
    spec_ht: &SpectralData,
    eps_window: f64,
    params: &BoundParams,
) -> Result<LowSpectrumReport> {
    if spec_h.dim() != spec_ht.dim() {
        return Err(Error::Validation("spectra of different dimension".into()));
    }
    let levels: Vec<LevelComparison> = spec_h
        .values()
        .iter()
        .zip(spec_ht.values())
        .enumerate()
        .take_while(|(_, (&e, _))| e <= eps_window + SPECTRAL_TOL)
        .map(|(j, (&eps, &eps_tilde))| {
            let bound = rhs_tpi(&BoundParams { eps, ..*params });
            LevelComparison { j, eps, eps_tilde, gap: eps - eps_tilde, bound }
        })
        .collect();
    let max_gap = levels.iter().map(|l| l.gap).fold(0.0, f64::max);
    let upper_holds = levels.iter().all(|l| l.eps_tilde <= l.eps + SPECTRAL_TOL);
    let lower_holds = levels.iter().all(|l| l.gap <= l.bound + SPECTRAL_TOL);
    Ok(LowSpectrumReport { levels, max_gap, upper_holds, lower_holds })
}

fn truncation_params(inst: &Instance, t: &Truncated) -> BoundParams {
    BoundParams { tau: t.tau, a_norm: t.hl_norm, ..inst.base_params() }
}

/// Operator order `H̃ ≤ H`, the norm cap on `H̃`, and `ε̃_j ≤ ε_j` for every `j`.
pub fn check_truncation(inst: &Instance) -> Result<Vec<BoundReport>> {
    let t = inst.truncated()?;
    let base = truncation_params(inst, t);
    let seed = inst.seed;
    let mut rows = Vec::with_capacity(inst.spec_h.dim() + 2);
    let lowest = symmetric_eigenvalues(t.difference.as_ref())?.first().copied().unwrap_or(0.0);
    rows.push(BoundReport::new(BoundId::TruncationOrder, -lowest, 0.0, base, seed));
    let dc = &inst.decomp;
    let norm = t.spec_ht.top().abs().max(t.spec_ht.ground().abs());
    rows.push(BoundReport::new(
        BoundId::TruncationNorm,
        norm,
        dc.size_lc + dc.size_boundary + t.tau,
        base,
        seed,
    ));
    for (&e, &et) in inst.spec_h.values().iter().zip(t.spec_ht.values()) {
        let p = BoundParams { eps: e, eps_prime: et, ..base };
        rows.push(BoundReport::new(BoundId::SpectrumUpper, et - e, 0.0, p, seed));
    }
    Ok(rows)
}

/// `‖(H−H̃)Π_{[0,ε]}‖`, `‖(H−H̃)Π̃_{[0,ε]}‖` on the low axis and the level
/// gaps `ε_j − ε̃_j` for `ε_j` in the lower third of the spectrum.
pub fn check_lowspec(inst: &Instance, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    let t = inst.truncated()?;
    let base = truncation_params(inst, t);
    let mut rows = projected_difference(inst, t, &inst.spec_h, grid, BoundId::PiBound, &base)?;
    rows.extend(projected_difference(inst, t, &t.spec_ht, grid, BoundId::TpiBound, &base)?);

    let sh = &inst.spec_h;
    let window = sh.ground() + (sh.top() - sh.ground()) / 3.0;
    let report = compare_low_spectra(sh, &t.spec_ht, window, &base)?;
    for l in &report.levels {
        let p = BoundParams { eps: l.eps, eps_prime: l.eps_tilde, ..base };
        rows.push(BoundReport::new(BoundId::SpectrumLower, l.gap, l.bound, p, inst.seed));
    }
    Ok(rows)
}

fn projected_difference(
    inst: &Instance,
    t: &Truncated,
    spec: &SpectralData,
    grid: &GridSpec,
    id: BoundId,
    base: &BoundParams,
) -> Result<Vec<BoundReport>> {
    let axis = grid.low_axis(spec.ground(), spec.top());
    let cmax = axis.iter().map(|&e| spec.select(EnergyInterval::at_most(e)).end).max().unwrap_or(0);
    let block = &t.difference * spec.vectors().subcols(0, cmax);
    axis.into_par_iter()
        .map(|eps| {
            let c = spec.select(EnergyInterval::at_most(eps)).end;
            let lhs = if c == 0 { 0.0 } else { operator_norm(block.as_ref().subcols(0, c))? };
            let p = BoundParams { eps, ..*base };
            let rhs = if id == BoundId::PiBound { rhs_pi(&p) } else { rhs_tpi(&p) };
            Ok(BoundReport::new(id, lhs, rhs, p, inst.seed))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::frobenius_distance;
    use faer::Mat;

    fn diag(v: &[f64]) -> Matrix {
        Mat::from_fn(v.len(), v.len(), |i, j| if i == j { v[i] } else { 0.0 })
    }

    #[test]
    fn clipping_a_diagonal() {
        let sd = diagonalize(diag(&[0.0, 1.0, 2.0, 3.0]).as_ref(), "d").unwrap();
        let t = truncate_hl(&sd, 2.0).unwrap();
        assert!(frobenius_distance(t.as_ref(), diag(&[0.0, 1.0, 2.0, 2.0]).as_ref()) < 1e-15);
        let inactive = truncate_hl(&sd, 5.0).unwrap();
        assert!(frobenius_distance(inactive.as_ref(), diag(&[0.0, 1.0, 2.0, 3.0]).as_ref()) < 1e-15);
        let tiny = truncate_spectrum(&sd, 1e-6).unwrap();
        assert_eq!(tiny.values(), &[0.0, 1e-6, 1e-6, 1e-6]);
        assert!(matches!(truncate_hl(&sd, 0.0), Err(Error::Domain(_))));
        assert!(matches!(truncate_hl(&sd, -1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn truncation_is_idempotent() {
        let sd = diagonalize(diag(&[0.5, 1.0, 2.5, 3.0]).as_ref(), "d").unwrap();
        let once = truncate_spectrum(&sd, 2.0).unwrap();
        let twice = truncate_spectrum(&once, 2.0).unwrap();
        assert_eq!(once.values(), twice.values());
    }

    #[test]
    fn auto_tau_is_the_median() {
        let sd = diagonalize(diag(&[0.0, 1.0, 3.0, 4.0]).as_ref(), "d").unwrap();
        assert_eq!(auto_tau(&sd).unwrap(), 2.0);
        let sd = diagonalize(diag(&[0.0, 0.0, 0.0, 4.0]).as_ref(), "d").unwrap();
        assert_eq!(auto_tau(&sd).unwrap(), 1.0);
        let sd = diagonalize(diag(&[0.0, 0.0]).as_ref(), "d").unwrap();
        assert!(auto_tau(&sd).is_err());
    }

    #[test]
    fn tau_setting_parses() {
        let a: TauSetting = serde_json::from_str("\"auto\"").unwrap();
        assert_eq!(a, TauSetting::default());
        let v: TauSetting = serde_json::from_str("1.5").unwrap();
        assert_eq!(v, TauSetting::Value(1.5));
        assert!(serde_json::from_str::<TauSetting>("\"median\"").is_err());
    }
}
