//! Right-hand sides of the energy-localization inequalities, measured
//! left-hand sides, and pass/fail reports.

mod checks;
mod instance;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use checks::{
    check_corollary, check_dist, check_dist2_and_expe2, check_expe, check_hadamard_lemma,
    check_hb_bound, check_normphi, check_product, DEFAULT_PRODUCT_PAIRS,
};
pub use instance::{energy_axis, GridSpec, Instance, Needs, Probe};

/// Slack allowed on every inequality.
pub const SATISFIED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum BoundId {
    #[serde(rename = "expE_tight")]
    ExpETight,
    #[serde(rename = "expE_loose")]
    ExpELoose,
    #[serde(rename = "dist")]
    Dist,
    #[serde(rename = "product_upper")]
    ProductUpper,
    #[serde(rename = "product_lower")]
    ProductLower,
    #[serde(rename = "product_state_corollary")]
    ProductStateCorollary,
    #[serde(rename = "hadamard_lemma")]
    HadamardLemma,
    #[serde(rename = "normphi_lemma")]
    NormphiLemma,
    #[serde(rename = "expE2_thm")]
    ExpE2Thm,
    #[serde(rename = "expE2_lemma")]
    ExpE2Lemma,
    #[serde(rename = "dist2")]
    Dist2,
    #[serde(rename = "hb_bound")]
    HbBound,
    #[serde(rename = "pi_bound")]
    PiBound,
    #[serde(rename = "tpi_bound")]
    TpiBound,
    #[serde(rename = "spectrum_upper")]
    SpectrumUpper,
    #[serde(rename = "spectrum_lower")]
    SpectrumLower,
    #[serde(rename = "truncation_order")]
    TruncationOrder,
    #[serde(rename = "truncation_norm")]
    TruncationNorm,
    #[serde(rename = "kl_norm")]
    KlNorm,
    #[serde(rename = "hadamard_series")]
    HadamardSeries,
    #[serde(rename = "dyson_series")]
    DysonSeries,
    #[serde(rename = "dyson_primed_series")]
    DysonPrimedSeries,
    #[serde(rename = "geometric_identity")]
    GeometricIdentity,
}

impl BoundId {
    pub const ALL: [BoundId; 23] = [
        BoundId::ExpETight,
        BoundId::ExpELoose,
        BoundId::Dist,
        BoundId::ProductUpper,
        BoundId::ProductLower,
        BoundId::ProductStateCorollary,
        BoundId::HadamardLemma,
        BoundId::NormphiLemma,
        BoundId::ExpE2Thm,
        BoundId::ExpE2Lemma,
        BoundId::Dist2,
        BoundId::HbBound,
        BoundId::PiBound,
        BoundId::TpiBound,
        BoundId::SpectrumUpper,
        BoundId::SpectrumLower,
        BoundId::TruncationOrder,
        BoundId::TruncationNorm,
        BoundId::KlNorm,
        BoundId::HadamardSeries,
        BoundId::DysonSeries,
        BoundId::DysonPrimedSeries,
        BoundId::GeometricIdentity,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            BoundId::ExpETight => "expE_tight",
            BoundId::ExpELoose => "expE_loose",
            BoundId::Dist => "dist",
            BoundId::ProductUpper => "product_upper",
            BoundId::ProductLower => "product_lower",
            BoundId::ProductStateCorollary => "product_state_corollary",
            BoundId::HadamardLemma => "hadamard_lemma",
            BoundId::NormphiLemma => "normphi_lemma",
            BoundId::ExpE2Thm => "expE2_thm",
            BoundId::ExpE2Lemma => "expE2_lemma",
            BoundId::Dist2 => "dist2",
            BoundId::HbBound => "hb_bound",
            BoundId::PiBound => "pi_bound",
            BoundId::TpiBound => "tpi_bound",
            BoundId::SpectrumUpper => "spectrum_upper",
            BoundId::SpectrumLower => "spectrum_lower",
            BoundId::TruncationOrder => "truncation_order",
            BoundId::TruncationNorm => "truncation_norm",
            BoundId::KlNorm => "kl_norm",
            BoundId::HadamardSeries => "hadamard_series",
            BoundId::DysonSeries => "dyson_series",
            BoundId::DysonPrimedSeries => "dyson_primed_series",
            BoundId::GeometricIdentity => "geometric_identity",
        }
    }
}

impl fmt::Display for BoundId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for BoundId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        BoundId::ALL
            .into_iter()
            .find(|id| id.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown bound id `{s}`")))
    }
}

/// Scalars entering a bound. Fields that do not apply to a given bound are NaN.
///
/// The energy differences `Δτ`, `Δε`, `Δε̃` are derived on demand.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundParams {
    pub eps: f64,
    pub eps_prime: f64,
    pub tau: f64,
    #[serde(rename = "R")]
    pub r: f64,
    pub g: f64,
    pub k: usize,
    pub lambda: f64,
    pub boundary: f64,
    pub eps0: f64,
    #[serde(rename = "eps0_L")]
    pub eps0_l: f64,
    #[serde(rename = "eps0_Lc")]
    pub eps0_lc: f64,
    pub eps0_tilde: f64,
    #[serde(rename = "A_norm")]
    pub a_norm: f64,
    /// Imaginary time for conjugation-based bounds.
    pub s: f64,
    /// Series order for series rows.
    pub order: Option<usize>,
}

impl BoundParams {
    /// Model constants set, everything else NaN.
    pub fn new(g: f64, k: usize, lambda: f64, boundary: f64) -> Self {
        Self {
            eps: f64::NAN,
            eps_prime: f64::NAN,
            tau: f64::NAN,
            r: f64::NAN,
            g,
            k,
            lambda,
            boundary,
            eps0: f64::NAN,
            eps0_l: f64::NAN,
            eps0_lc: f64::NAN,
            eps0_tilde: f64::NAN,
            a_norm: f64::NAN,
            s: f64::NAN,
            order: None,
        }
    }

    pub fn gk(&self) -> f64 {
        self.g * self.k as f64
    }

    /// `Δτ = τ − ε₀(L)`.
    pub fn delta_tau(&self) -> f64 {
        self.tau - self.eps0_l
    }

    /// `Δε = ε − ε₀`.
    pub fn delta_eps(&self) -> f64 {
        self.eps - self.eps0
    }

    /// `Δε̃ = ε − ε̃₀`.
    pub fn delta_eps_tilde(&self) -> f64 {
        self.eps - self.eps0_tilde
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundReport {
    pub bound_id: BoundId,
    pub lhs_measured: f64,
    pub rhs_bound: f64,
    pub satisfied: bool,
    pub margin: f64,
    pub params: BoundParams,
    pub instance_seed: u64,
}

impl BoundReport {
    pub fn new(bound_id: BoundId, lhs: f64, rhs: f64, params: BoundParams, seed: u64) -> Self {
        Self {
            bound_id,
            lhs_measured: lhs,
            rhs_bound: rhs,
            satisfied: lhs <= rhs + SATISFIED_TOL,
            margin: rhs - lhs,
            params,
            instance_seed: seed,
        }
    }
}

fn require_finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {v}")))
    }
}

fn expe_gap(p: &BoundParams) -> Result<f64> {
    let gap = require_finite("ε′ − ε", p.eps_prime - p.eps)?;
    if gap <= 0.0 {
        return Err(Error::Domain(format!("need ε′ > ε, got ε = {}, ε′ = {}", p.eps, p.eps_prime)));
    }
    if !(p.r >= 0.0) {
        return Err(Error::Domain(format!("R must be non-negative, got {}", p.r)));
    }
    Ok(gap)
}

fn prefactor_2(lambda: f64) -> f64 {
    2.0 / lambda.sqrt()
}

fn prefactor_6(lambda: f64) -> f64 {
    6.0 / lambda.powf(1.5)
}

/// `‖A‖·exp{−(1/gk)[ε′−ε−R(1+ln((ε′−ε)/R))]}`, clamped at `‖A‖`.
pub fn rhs_expe_tight(p: &BoundParams) -> Result<f64> {
    let gap = expe_gap(p)?;
    if gap <= p.r {
        return Ok(p.a_norm);
    }
    let log_term = if p.r == 0.0 { 0.0 } else { p.r * (1.0 + (gap / p.r).ln()) };
    let value = p.a_norm * (-(gap - log_term) / p.gk()).exp();
    Ok(value.min(p.a_norm))
}

/// `‖A‖·e^{−λ(ε′−ε−2R)}`, clamped at `‖A‖`.
pub fn rhs_expe_loose(p: &BoundParams) -> Result<f64> {
    let gap = expe_gap(p)?;
    Ok((p.a_norm * (-p.lambda * (gap - 2.0 * p.r)).exp()).min(p.a_norm))
}

/// Minimizer of `e^{−s(ε′−ε)}(1−sgk)^{−R/gk}`, clamped into `[0, 1/gk)`.
pub fn optimal_s(p: &BoundParams) -> Result<f64> {
    let gap = expe_gap(p)?;
    let gk = p.gk();
    let s = (1.0 - p.r / gap) / gk;
    let below = (1.0 / gk) * (1.0 - f64::EPSILON);
    Ok(s.clamp(0.0, below))
}

/// `e^{−s(ε′−ε)}(1−sgk)^{−R/gk}`, the quantity minimized by [`optimal_s`].
pub fn expe_objective(p: &BoundParams, s: f64) -> Result<f64> {
    let gap = expe_gap(p)?;
    let gk = p.gk();
    if !(0.0..1.0 / gk).contains(&s) {
        return Err(Error::Domain(format!("s = {s} outside [0, 1/gk)")));
    }
    Ok((-s * gap).exp() * (1.0 - gk * s).powf(-p.r / gk))
}

/// `(2/√λ)e^{−λ(Δτ−Δε−3|∂L|)}`, clamped at 1.
pub fn rhs_dist(p: &BoundParams) -> f64 {
    let x = p.delta_tau() - p.delta_eps() - 3.0 * p.boundary;
    (prefactor_2(p.lambda) * (-p.lambda * x).exp()).min(1.0)
}

/// `(2/√λ)e^{−λ(τ−ε−3|∂L|)}`, clamped at 1.
pub fn rhs_product_upper(p: &BoundParams) -> f64 {
    (prefactor_2(p.lambda) * (-p.lambda * (p.tau - p.eps - 3.0 * p.boundary)).exp()).min(1.0)
}

/// `(2/√λ)e^{−λ(ε−τ−3|∂L|)}`, clamped at 1.
pub fn rhs_product_lower(p: &BoundParams) -> f64 {
    (prefactor_2(p.lambda) * (-p.lambda * (p.eps - p.tau - 3.0 * p.boundary)).exp()).min(1.0)
}

/// `(2/√λ)e^{−λ(|ε_L+ε_{L^c}−ε|−3|∂L|)}` with `τ = ε_L+ε_{L^c}`, clamped at 1.
pub fn rhs_product_state(p: &BoundParams) -> f64 {
    let x = (p.tau - p.eps).abs() - 3.0 * p.boundary;
    (prefactor_2(p.lambda) * (-p.lambda * x).exp()).min(1.0)
}

/// `‖A‖(1−gks)^{−R/gk}` for `0 ≤ s < 1/gk`.
pub fn rhs_hadamard(p: &BoundParams) -> Result<f64> {
    let gk = p.gk();
    if !(p.s >= 0.0 && p.s < 1.0 / gk) {
        return Err(Error::Domain(format!("s = {} outside [0, 1/gk)", p.s)));
    }
    Ok(p.a_norm * (1.0 - gk * p.s).powf(-p.r / gk))
}

/// `‖A‖(2/√λ)e^{−λ(ε_φ−ε−2R)}` with `ε_φ` in `eps_prime`, clamped at `‖A‖`.
pub fn rhs_normphi(p: &BoundParams) -> f64 {
    let x = p.eps_prime - p.eps - 2.0 * p.r;
    (p.a_norm * prefactor_2(p.lambda) * (-p.lambda * x).exp()).min(p.a_norm)
}

/// `‖A‖e^{−λ(τ′−τ−2|∂L|)}` with `τ′` in `eps_prime`, clamped at `‖A‖`.
pub fn rhs_expe2_thm(p: &BoundParams) -> f64 {
    (p.a_norm * (-p.lambda * (p.eps_prime - p.tau - 2.0 * p.boundary)).exp()).min(p.a_norm)
}

/// `‖A‖e^{−λ(ε′−ε−32|∂L|)}`, clamped at `‖A‖`.
pub fn rhs_expe2_lemma(p: &BoundParams) -> f64 {
    (p.a_norm * (-p.lambda * (p.eps_prime - p.eps - 32.0 * p.boundary)).exp()).min(p.a_norm)
}

/// `(2/√λ)e^{−λ(Δτ−Δε̃−33|∂L|)}`, clamped at 1.
pub fn rhs_dist2(p: &BoundParams) -> f64 {
    let x = p.delta_tau() - p.delta_eps_tilde() - 33.0 * p.boundary;
    (prefactor_2(p.lambda) * (-p.lambda * x).exp()).min(1.0)
}

/// `16|∂L|`.
pub fn rhs_hb(p: &BoundParams) -> f64 {
    16.0 * p.boundary
}

/// `(6/λ^{3/2})e^{−λ(Δτ−Δε−3|∂L|)}`, clamped at `a_norm` (a bound on `‖H−H̃‖`).
pub fn rhs_pi(p: &BoundParams) -> f64 {
    let x = p.delta_tau() - p.delta_eps() - 3.0 * p.boundary;
    (prefactor_6(p.lambda) * (-p.lambda * x).exp()).min(p.a_norm)
}

/// `(6/λ^{3/2})e^{−λ(Δτ−Δε̃−33|∂L|)}`, clamped at `a_norm` (a bound on `‖H−H̃‖`).
pub fn rhs_tpi(p: &BoundParams) -> f64 {
    let x = p.delta_tau() - p.delta_eps_tilde() - 33.0 * p.boundary;
    (prefactor_6(p.lambda) * (-p.lambda * x).exp()).min(p.a_norm)
}
