//! Numerical checks of the Hadamard (iterated commutator) and Dyson
//! expansions.

use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::Serialize;

use crate::bounds::{BoundId, BoundParams, BoundReport, Instance};
use crate::error::{Error, Result};
use crate::linalg::{commutator, operator_norm, Matrix};
use crate::spectral::{conjugate, diagonalize, SpectralData};

/// RK4 steps per unit time for the Dyson recurrence.
pub const DYSON_STEPS_PER_UNIT: f64 = 512.0;

/// ChaCha20 stream for the scalar identity draws.
pub const GEOMETRIC_STREAM: u64 = 2;

/// One term of a series expansion.
#[derive(Debug, Clone)]
pub struct SeriesTerm {
    pub order: usize,
    pub term_matrix: Matrix,
    pub term_norm: f64,
}

#[derive(Debug, Clone)]
pub struct HadamardSum {
    pub sum: Matrix,
    /// `K_ℓ` for `ℓ = 0..=max_order`.
    pub terms: Vec<SeriesTerm>,
}

/// `Σ_{ℓ≤max_order} (s^ℓ/ℓ!) K_ℓ` with `K_0 = A`, `K_ℓ = [H, K_{ℓ−1}]`.
///
/// Fails when the last scaled term is not smaller than the one before it.
pub fn hadamard_partial_sum(h: MatRef<'_, f64>, a: MatRef<'_, f64>, s: f64, max_order: usize) -> Result<HadamardSum> {
    if h.nrows() != a.nrows() || h.ncols() != a.ncols() || h.nrows() != h.ncols() {
        return Err(Error::Validation("H and A must be square of the same size".into()));
    }
    let mut k = a.to_owned();
    let mut sum = a.to_owned();
    let mut coeff = 1.0;
    let mut terms = vec![SeriesTerm { order: 0, term_norm: operator_norm(k.as_ref())?, term_matrix: k.clone() }];
    for l in 1..=max_order {
        k = commutator(h, k.as_ref());
        coeff *= s / l as f64;
        sum += &k * coeff;
        terms.push(SeriesTerm { order: l, term_norm: operator_norm(k.as_ref())?, term_matrix: k.clone() });
    }
    if max_order >= 1 {
        let scaled = |l: usize| terms[l].term_norm * s.abs().powi(l as i32) / factorial(l);
        let (last, prev) = (scaled(max_order), scaled(max_order - 1));
        if last > 0.0 && last >= prev {
            return Err(Error::Convergence { what: "Hadamard series".into(), tail_norm: last });
        }
    }
    Ok(HadamardSum { sum, terms })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `(gk)^ℓ r(r+1)⋯(r+ℓ−1)` with `r = R/gk`.
pub fn kl_bound(order: usize, r_total: f64, gk: f64) -> f64 {
    let r = r_total / gk;
    (0..order).map(|i| gk * (r + i as f64)).product()
}

/// `‖K_ℓ‖` for `ℓ = 0..=max_order`, with `A` scaled to unit norm.
pub fn kl_norms(h: MatRef<'_, f64>, a: MatRef<'_, f64>, max_order: usize) -> Result<Vec<f64>> {
    let norm = operator_norm(a)?;
    if norm == 0.0 {
        return Err(Error::Domain("cannot normalize a zero operator".into()));
    }
    let a = a * (1.0 / norm);
    let mut k = a.clone();
    let mut out = vec![1.0];
    for _ in 1..=max_order {
        k = commutator(h, k.as_ref());
        out.push(operator_norm(k.as_ref())?);
    }
    Ok(out)
}

/// Measured `‖K_ℓ‖` against `(gk)^ℓ r(r+1)⋯(r+ℓ−1)` for `1 ≤ ℓ ≤ max_order`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KlCheck {
    pub order: usize,
    pub measured: f64,
    pub bound: f64,
}

pub fn kl_norm_bound_check(
    h: MatRef<'_, f64>,
    a: MatRef<'_, f64>,
    r_total: f64,
    g: f64,
    k: usize,
    max_order: usize,
) -> Result<Vec<KlCheck>> {
    let gk = g * k as f64;
    Ok(kl_norms(h, a, max_order)?
        .into_iter()
        .enumerate()
        .skip(1)
        .map(|(order, measured)| KlCheck { order, measured, bound: kl_bound(order, r_total, gk) })
        .collect())
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for m in 2..=n {
                let p2 = ((2 * m - 1) as f64 * x * p1 - (m - 1) as f64 * p0) / m as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

#[derive(Debug, Clone)]
pub struct DysonSum {
    /// `Σ_j G_j(t) e^{tX}`, or `e^{−tX} Σ_j G′_j(t)` for the primed series.
    pub sum: Matrix,
    /// Terms `G_j(t)e^{tX}` (resp. `e^{−tX}G′_j(t)`), `j = 0..=max_order`.
    pub terms: Vec<SeriesTerm>,
    /// `(t‖Y‖)^{J+1}/(J+1)!·e^{t(‖X‖+‖Y‖)}`.
    pub tail_bound: f64,
    /// Largest entry of the difference between the first-order term from the
    /// ODE integration and from Gauss–Legendre quadrature of `∫₀ᵗ Y(s)ds`.
    pub order1_quadrature_gap: f64,
}

/// `e^{sX} Ỹ e^{−sX}` in the eigenbasis of `X`.
fn rotate(x: &[f64], y: MatRef<'_, f64>, s: f64) -> Matrix {
    let e: Vec<f64> = x.iter().map(|&v| (s * v).exp()).collect();
    Mat::from_fn(x.len(), x.len(), |a, b| e[a] * y[(a, b)] / e[b])
}

/// Integrates `dG_j/dt = G_{j−1}Y(t)` (or `dG′_j/dt = −Y(t)G′_{j−1}` when
/// `primed`) with classical RK4, in the eigenbasis of `X`.
fn integrate(x: &[f64], y: MatRef<'_, f64>, t: f64, order: usize, primed: bool) -> Vec<Matrix> {
    let n = x.len();
    let steps = ((DYSON_STEPS_PER_UNIT * t).ceil() as usize).max(1);
    let h = t / steps as f64;
    let mut g: Vec<Matrix> = (0..=order).map(|j| if j == 0 { Matrix::identity(n, n) } else { Matrix::zeros(n, n) }).collect();
    let deriv = |g: &[Matrix], ys: &Matrix| -> Vec<Matrix> {
        (1..=order)
            .map(|j| if primed { -(ys * &g[j - 1]) } else { &g[j - 1] * ys })
            .collect()
    };
    for step in 0..steps {
        let s0 = step as f64 * h;
        let y0 = rotate(x, y, s0);
        let ym = rotate(x, y, s0 + 0.5 * h);
        let y1 = rotate(x, y, s0 + h);
        let shifted = |base: &[Matrix], k: &[Matrix], c: f64| -> Vec<Matrix> {
            let mut out = base.to_vec();
            for j in 1..=order {
                out[j] += &k[j - 1] * c;
            }
            out
        };
        let k1 = deriv(&g, &y0);
        let k2 = deriv(&shifted(&g, &k1, 0.5 * h), &ym);
        let k3 = deriv(&shifted(&g, &k2, 0.5 * h), &ym);
        let k4 = deriv(&shifted(&g, &k3, h), &y1);
        for j in 1..=order {
            let inc = &k1[j - 1] + &k2[j - 1] * 2.0 + &k3[j - 1] * 2.0 + &k4[j - 1];
            g[j] += inc * (h / 6.0);
        }
    }
    g
}

fn dyson_core(
    sx: &SpectralData,
    y: MatRef<'_, f64>,
    t: f64,
    max_order: usize,
    quadrature_points: usize,
    primed: bool,
) -> Result<DysonSum> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("Dyson time must be non-negative, got {t}")));
    }
    if quadrature_points == 0 {
        return Err(Error::Config("need at least one quadrature point".into()));
    }
    let x = sx.values();
    let y_eig = sx.to_eigenbasis(y)?;
    let g = integrate(x, y_eig.as_ref(), t, max_order, primed);

    let (nodes, weights) = gauss_legendre(quadrature_points);
    let mut quad = Matrix::zeros(x.len(), x.len());
    for (&z, &w) in nodes.iter().zip(&weights) {
        quad += rotate(x, y_eig.as_ref(), 0.5 * t * (z + 1.0)) * (0.5 * t * w);
    }
    let order1_quadrature_gap = if max_order >= 1 {
        let sign = if primed { -1.0 } else { 1.0 };
        let diff = &g[1] - &quad * sign;
        (0..diff.nrows())
            .flat_map(|i| (0..diff.ncols()).map(move |j| (i, j)))
            .fold(0.0f64, |m, (i, j)| m.max(diff[(i, j)].abs()))
    } else {
        0.0
    };

    let u = sx.vectors();
    let sign = if primed { -1.0 } else { 1.0 };
    let ex: Vec<f64> = x.iter().map(|&v| (sign * t * v).exp()).collect();
    let mut total = Matrix::zeros(x.len(), x.len());
    let mut terms = Vec::with_capacity(max_order + 1);
    for (j, gj) in g.iter().enumerate() {
        // G_j e^{tX} scales columns; e^{−tX} G′_j scales rows
        let term_eig = Mat::from_fn(x.len(), x.len(), |a, b| gj[(a, b)] * if primed { ex[a] } else { ex[b] });
        total += &term_eig;
        let term_matrix = u * (&term_eig * u.transpose());
        terms.push(SeriesTerm { order: j, term_norm: operator_norm(term_eig.as_ref())?, term_matrix });
    }
    let sum = u * (&total * u.transpose());

    let x_norm = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let y_norm = operator_norm(y)?;
    let j1 = max_order + 1;
    let tail_bound = (t * y_norm).powi(j1 as i32) / factorial(j1) * (t * (x_norm + y_norm)).exp();
    Ok(DysonSum { sum, terms, tail_bound, order1_quadrature_gap })
}

/// `Σ_{j≤max_order} G_j(t) e^{tX}`, approximating `e^{t(X+Y)}`.
pub fn dyson_partial_sum(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    t: f64,
    max_order: usize,
    quadrature_points: usize,
) -> Result<DysonSum> {
    let sx = diagonalize(x, "X")?;
    dyson_core(&sx, y, t, max_order, quadrature_points, false)
}

/// `e^{−tX} Σ_{j≤max_order} G′_j(t)`, approximating `e^{−t(X+Y)}`.
pub fn dyson_primed_sum(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    t: f64,
    max_order: usize,
    quadrature_points: usize,
) -> Result<DysonSum> {
    let sx = diagonalize(x, "X")?;
    dyson_core(&sx, y, t, max_order, quadrature_points, true)
}

/// Comparison of a partial sum with its exact value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesCheck {
    pub order: usize,
    pub relative_error: f64,
    pub tail_bound: f64,
}

fn relative_error(approx: MatRef<'_, f64>, exact: MatRef<'_, f64>) -> Result<f64> {
    let diff = approx - exact;
    Ok(operator_norm(diff.as_ref())? / operator_norm(exact)?.max(f64::MIN_POSITIVE))
}

/// Dyson partial sum against `e^{±t(X+Y)}` computed from the spectrum of `X+Y`.
pub fn dyson_check(
    sx: &SpectralData,
    y: MatRef<'_, f64>,
    sum_spec: &SpectralData,
    t: f64,
    max_order: usize,
    quadrature_points: usize,
    primed: bool,
) -> Result<(DysonSum, SeriesCheck)> {
    let d = dyson_core(sx, y, t, max_order, quadrature_points, primed)?;
    let sign = if primed { -1.0 } else { 1.0 };
    let exact = sum_spec.function(|v| (sign * t * v).exp());
    let relative_error = relative_error(d.sum.as_ref(), exact.as_ref())?;
    let check = SeriesCheck { order: max_order, relative_error, tail_bound: d.tail_bound };
    Ok((d, check))
}

/// Same as [`dyson_check`] with `G′_j`; the mirror identity for `e^{−t(X+Y)}`.
pub fn dyson_primed_check(
    x: MatRef<'_, f64>,
    y: MatRef<'_, f64>,
    t: f64,
    max_order: usize,
    quadrature_points: usize,
) -> Result<SeriesCheck> {
    let sx = diagonalize(x, "X")?;
    let sum = diagonalize((x + y).as_ref(), "X+Y")?;
    Ok(dyson_check(&sx, y, &sum, t, max_order, quadrature_points, true)?.1)
}

/// `Σ_ℓ (sgk)^ℓ/ℓ!·r(r+1)⋯(r+ℓ−1)` summed until the terms vanish in
/// double precision.
pub fn geometric_series(sgk: f64, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&sgk) || !(r >= 0.0) {
        return Err(Error::Domain(format!("need 0 ≤ sgk < 1 and r ≥ 0, got {sgk}, {r}")));
    }
    let mut term = 1.0;
    let mut sum = 1.0;
    for l in 1..1_000_000 {
        term *= sgk * (r + (l - 1) as f64) / l as f64;
        sum += term;
        if term <= sum * 1e-18 && (l as f64) > r {
            return Ok(sum);
        }
    }
    Err(Error::Convergence { what: "geometric series".into(), tail_norm: term })
}

/// One random draw of the scalar identity `Σ … = (1−sgk)^{−r}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GeometricDraw {
    pub s: f64,
    pub g: f64,
    pub k: usize,
    pub r_total: f64,
    pub series: f64,
    pub closed_form: f64,
    pub relative_error: f64,
}

/// `count` draws with `g ∈ [0.5, 4]`, `k ∈ {1..4}`, `R ∈ [0, 10]` and
/// `sgk ∈ [0, 0.9]`.
pub fn geometric_identity_draws(seed: u64, count: usize) -> Result<Vec<GeometricDraw>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(GEOMETRIC_STREAM);
    (0..count)
        .map(|_| {
            let g = rng.random_range(0.5..=4.0);
            let k = rng.random_range(1..=4usize);
            let r_total = rng.random_range(0.0..=10.0);
            let x: f64 = rng.random_range(0.0..=0.9);
            let gk = g * k as f64;
            let s = x / gk;
            let r = r_total / gk;
            let series = geometric_series(x, r)?;
            let closed_form = (1.0 - x).powf(-r);
            let relative_error = (series - closed_form).abs() / closed_form;
            Ok(GeometricDraw { s, g, k, r_total, series, closed_form, relative_error })
        })
        .collect()
}

/// Orders and tolerances used by the series suite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSettings {
    pub kl_max_order: usize,
    pub hadamard_order: usize,
    pub hadamard_tol: f64,
    pub dyson_order: usize,
    pub dyson_tol: f64,
    pub quadrature_points: usize,
    pub geometric_draws: usize,
    pub geometric_tol: f64,
}

impl Default for SeriesSettings {
    fn default() -> Self {
        Self {
            kl_max_order: 8,
            hadamard_order: 30,
            hadamard_tol: 1e-8,
            dyson_order: 12,
            dyson_tol: 1e-6,
            quadrature_points: 16,
            geometric_draws: 20,
            geometric_tol: 1e-10,
        }
    }
}

/// The series suite on one instance: `K_ℓ` norms and the Hadamard sum for the
/// probe operator, both Dyson identities with `X = H̃_L + H_{L^c}`,
/// `Y = H_∂`, `t = λ`, and the scalar identity.
pub fn check_series(inst: &Instance, settings: &SeriesSettings) -> Result<Vec<BoundReport>> {
    let probe = inst.probe()?;
    let tr = inst.truncated()?;
    let m = &inst.model;
    let base = BoundParams { r: probe.r, a_norm: probe.norm, ..inst.base_params() };
    let seed = inst.seed;
    let mut rows = Vec::new();

    for c in kl_norm_bound_check(inst.h.as_ref(), probe.full.as_ref(), probe.r, m.g(), m.k(), settings.kl_max_order)? {
        let p = BoundParams { order: Some(c.order), ..base };
        rows.push(BoundReport::new(BoundId::KlNorm, c.measured, c.bound, p, seed));
    }

    let s = 0.5 * m.lambda();
    let had = hadamard_partial_sum(inst.h.as_ref(), probe.full.as_ref(), s, settings.hadamard_order)?;
    let exact = conjugate(&inst.spec_h, probe.full.as_ref(), s)?;
    let err = relative_error(had.sum.as_ref(), exact.as_ref())?;
    let p = BoundParams { s, order: Some(settings.hadamard_order), ..base };
    rows.push(BoundReport::new(BoundId::HadamardSeries, err, settings.hadamard_tol, p, seed));

    let t = m.lambda();
    let dbase = BoundParams { tau: tr.tau, s: t, order: Some(settings.dyson_order), ..inst.base_params() };
    for (primed, id) in [(false, BoundId::DysonSeries), (true, BoundId::DysonPrimedSeries)] {
        let (_, c) = dyson_check(
            &tr.spec_x,
            inst.h_boundary.as_ref(),
            &tr.spec_ht,
            t,
            settings.dyson_order,
            settings.quadrature_points,
            primed,
        )?;
        rows.push(BoundReport::new(id, c.relative_error, settings.dyson_tol, dbase, seed));
    }

    for d in geometric_identity_draws(seed, settings.geometric_draws)? {
        let p = BoundParams { s: d.s, r: d.r_total, ..BoundParams::new(d.g, d.k, 1.0 / (2.0 * d.g * d.k as f64), f64::NAN) };
        rows.push(BoundReport::new(BoundId::GeometricIdentity, d.relative_error, settings.geometric_tol, p, seed));
    }
    Ok(rows)
}
