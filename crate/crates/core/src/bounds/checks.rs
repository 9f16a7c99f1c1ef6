use faer::{Mat, MatRef};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::hamiltonian::SiteEmbedding;
use crate::linalg::Matrix;
use crate::spectral::{conjugated_norm, spectral_energy, EnergyInterval, Overlap, SpectralData};

use super::{
    rhs_dist, rhs_dist2, rhs_expe2_lemma, rhs_expe2_thm, rhs_expe_loose, rhs_expe_tight, rhs_hadamard,
    rhs_hb, rhs_normphi, rhs_product_lower, rhs_product_state, rhs_product_upper, BoundId, BoundParams,
    BoundReport, GridSpec, Instance,
};

/// ChaCha20 stream for the random states of the `φ = AΠψ` check.
pub const PSI_STREAM: u64 = 1;

/// Local eigenstate pairs `(j, j′)` used for the product-state check.
pub const DEFAULT_PRODUCT_PAIRS: [(usize, usize); 4] = [(0, 0), (0, 1), (1, 0), (1, 1)];

fn prefix_end(spec: &SpectralData, axis: &[f64]) -> usize {
    axis.iter().map(|&e| spec.select(EnergyInterval::at_most(e)).end).max().unwrap_or(0)
}

fn pairs(a: &[f64], b: &[f64]) -> Vec<(f64, f64)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

/// `‖Π_{[ε′,∞)} A Π_{[0,ε]}‖` against both forms of the bound, for the probe
/// operator on the full `(ε, ε′)` grid. Rows with `ε′ ≤ ε` carry the trivial
/// bound `‖A‖`.
pub fn check_expe(inst: &Instance, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    let probe = inst.probe()?;
    let sh = &inst.spec_h;
    let eps_axis = grid.low_axis(sh.ground(), sh.top());
    let prime_axis = grid.axis(sh.ground(), sh.top());
    let cmax = prefix_end(sh, &eps_axis);
    let ov = Overlap::new(sh, Some(probe.full.as_ref()), sh, 0..cmax)?;
    let base = BoundParams { r: probe.r, a_norm: probe.norm, ..inst.base_params() };
    let rows: Vec<[BoundReport; 2]> = pairs(&eps_axis, &prime_axis)
        .into_par_iter()
        .map(|(eps, eps_prime)| {
            let lhs = ov.block_norm(sh.select(EnergyInterval::at_least(eps_prime)), sh.select(EnergyInterval::at_most(eps)))?;
            let p = BoundParams { eps, eps_prime, ..base };
            let (tight, loose) = if eps_prime > eps {
                (rhs_expe_tight(&p)?, rhs_expe_loose(&p)?)
            } else {
                (p.a_norm, p.a_norm)
            };
            Ok([
                BoundReport::new(BoundId::ExpETight, lhs, tight, p, inst.seed),
                BoundReport::new(BoundId::ExpELoose, lhs, loose, p, inst.seed),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `‖P_{[τ,∞)} Π_{[0,ε]}‖` with `P` the spectral projectors of `H_L ⊗ 1`.
pub fn check_dist(inst: &Instance, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    let sh = &inst.spec_h;
    let shl = inst.spec_hl()?;
    let eps_axis = grid.low_axis(sh.ground(), sh.top());
    let tau_axis = grid.axis(shl.ground(), shl.top());
    let ov = Overlap::new(shl, None, sh, 0..prefix_end(sh, &eps_axis))?;
    let base = inst.base_params();
    pairs(&eps_axis, &tau_axis)
        .into_par_iter()
        .map(|(eps, tau)| {
            let lhs = ov.block_norm(shl.select(EnergyInterval::at_least(tau)), sh.select(EnergyInterval::at_most(eps)))?;
            let p = BoundParams { eps, tau, ..base };
            Ok(BoundReport::new(BoundId::Dist, lhs, rhs_dist(&p), p, inst.seed))
        })
        .collect()
}

/// `‖Q_{[τ,∞)} Π_{[0,ε]}‖` and `‖Π_{[ε,∞)} Q_{[0,τ]}‖` with `Q` the spectral
/// projectors of `H_L + H_{L^c}`, on every `(ε, τ)` pair.
pub fn check_product(inst: &Instance, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    let sh = &inst.spec_h;
    let sq = inst.spec_q()?;
    let eps_axis = grid.axis(sh.ground(), sh.top());
    let tau_axis = grid.axis(sq.ground(), sq.top());
    let upper = Overlap::new(sq, None, sh, 0..prefix_end(sh, &eps_axis))?;
    let lower = Overlap::new(sh, None, sq, 0..prefix_end(sq, &tau_axis))?;
    let base = inst.base_params();
    let rows: Vec<[BoundReport; 2]> = pairs(&eps_axis, &tau_axis)
        .into_par_iter()
        .map(|(eps, tau)| {
            let p = BoundParams { eps, tau, ..base };
            let up = upper.block_norm(sq.select(EnergyInterval::at_least(tau)), sh.select(EnergyInterval::at_most(eps)))?;
            let low = lower.block_norm(sh.select(EnergyInterval::at_least(eps)), sq.select(EnergyInterval::at_most(tau)))?;
            Ok([
                BoundReport::new(BoundId::ProductUpper, up, rhs_product_upper(&p), p, inst.seed),
                BoundReport::new(BoundId::ProductLower, low, rhs_product_lower(&p), p, inst.seed),
            ])
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

/// `|⟨ε|ψ_L ⊗ ψ_{L^c}⟩|` for every eigenstate of `H`. Inside a degenerate
/// level the overlap is maximized over the eigenspace.
pub fn check_corollary(inst: &Instance, local_pairs: &[(usize, usize)]) -> Result<Vec<BoundReport>> {
    let sh = &inst.spec_h;
    let (hl, hlc) = (&inst.hl_local, &inst.hlc_local);
    let emb = SiteEmbedding::new(inst.model.site_count(), inst.model.local_dim(), &inst.decomp.region);
    let base = inst.base_params();
    let mut rows = Vec::new();
    for &(j, jc) in local_pairs.iter().filter(|(j, jc)| *j < hl.dim() && *jc < hlc.dim()) {
        let mut psi = Mat::<f64>::zeros(sh.dim(), 1);
        for (y, &off) in emb.rest.iter().enumerate() {
            for (x, &loc) in emb.local.iter().enumerate() {
                psi[(loc + off, 0)] = hl.vectors()[(x, j)] * hlc.vectors()[(y, jc)];
            }
        }
        let c = sh.vectors().transpose() * &psi;
        let tau = hl.values()[j] + hlc.values()[jc];
        for (i, &eps) in sh.values().iter().enumerate() {
            let level = sh.select(EnergyInterval::new(eps, eps)?);
            debug_assert!(level.contains(&i));
            let lhs = level.map(|l| c[(l, 0)] * c[(l, 0)]).sum::<f64>().sqrt();
            let p = BoundParams { eps, tau, ..base };
            rows.push(BoundReport::new(BoundId::ProductStateCorollary, lhs, rhs_product_state(&p), p, inst.seed));
        }
    }
    Ok(rows)
}

/// `Uᵀ A U` in the eigenbasis of `spec`.
fn in_eigenbasis(spec: &SpectralData, a: MatRef<'_, f64>) -> Result<Matrix> {
    spec.to_eigenbasis(a)
}

/// `‖e^{sH}Ae^{−sH}‖ ≤ ‖A‖(1−gks)^{−R/gk}` on `s ∈ [0, (1−10⁻⁶)/gk]`.
pub fn check_hadamard_lemma(inst: &Instance, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    let probe = inst.probe()?;
    let sh = &inst.spec_h;
    let a_eig = in_eigenbasis(sh, probe.full.as_ref())?;
    let base = BoundParams { r: probe.r, a_norm: probe.norm, ..inst.base_params() };
    let top = (1.0 - 1e-6) / base.gk();
    grid.s_axis(top)
        .into_par_iter()
        .map(|s| {
            let lhs = conjugated_norm(sh, a_eig.as_ref(), s)?;
            let p = BoundParams { s, ..base };
            Ok(BoundReport::new(BoundId::HadamardLemma, lhs, rhs_hadamard(&p)?, p, inst.seed))
        })
        .collect()
}

/// Random normalized states with entries uniform in `[-1, 1]`.
pub fn random_states(seed: u64, dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(PSI_STREAM);
    (0..count)
        .map(|_| {
            let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..=1.0)).collect();
            let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            v.iter_mut().for_each(|x| *x /= n);
            v
        })
        .collect()
}

/// `‖AΠ_{[0,ε]}ψ‖` against its energy-dependent bound for random `ψ`.
/// States with `‖φ‖ ≤ 10⁻¹²` are skipped.
pub fn check_normphi(inst: &Instance, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    let probe = inst.probe()?;
    let sh = &inst.spec_h;
    let a_eig = in_eigenbasis(sh, probe.full.as_ref())?;
    let eps_axis = grid.low_axis(sh.ground(), sh.top());
    let base = BoundParams { r: probe.r, a_norm: probe.norm, ..inst.base_params() };
    let states = random_states(inst.seed, sh.dim(), grid.psi_samples);
    let rows: Vec<Vec<BoundReport>> = states
        .into_par_iter()
        .map(|psi| {
            let col = Mat::from_fn(psi.len(), 1, |i, _| psi[i]);
            let c = sh.vectors().transpose() * &col;
            let mut out = Vec::new();
            for &eps in &eps_axis {
                let end = sh.select(EnergyInterval::at_most(eps)).end;
                let phi: Vec<f64> = (0..sh.dim())
                    .map(|i| (0..end).map(|l| a_eig[(i, l)] * c[(l, 0)]).sum())
                    .collect();
                let norm = phi.iter().map(|x| x * x).sum::<f64>().sqrt();
                if norm <= 1e-12 {
                    continue;
                }
                let eps_phi = spectral_energy(sh.values(), &phi)?;
                let p = BoundParams { eps, eps_prime: eps_phi, ..base };
                out.push(BoundReport::new(BoundId::NormphiLemma, norm, rhs_normphi(&p), p, inst.seed));
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;
    Ok(rows.into_iter().flatten().collect())
}

fn median(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Step function at the median and a decaying exponential, both defined
/// from the `reference` spectrum and evaluated on `at`, with their norms.
fn spectral_functions(reference: &[f64], at: &[f64]) -> Vec<(Vec<f64>, f64)> {
    let cut = median(reference);
    let scale = reference.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(f64::MIN_POSITIVE);
    let step: Vec<f64> = at.iter().map(|&x| if x <= cut { 1.0 } else { 0.0 }).collect();
    let decay: Vec<f64> = at.iter().map(|&x| (-x / scale).exp()).collect();
    [step, decay]
        .into_iter()
        .map(|f| {
            let n = f.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            (f, n)
        })
        .collect()
}

/// Overlap table of `f(M)` between two decompositions:
/// `U_leftᵀ U_m diag(f) U_mᵀ U_right[:, 0..cols]`.
fn function_overlap(left: &SpectralData, m: &SpectralData, f: &[f64], right: &SpectralData, cols: usize) -> Overlap {
    let wl = left.vectors().transpose() * m.vectors();
    let wr = m.vectors().transpose() * right.vectors().subcols(0, cols);
    let scaled = Mat::from_fn(wl.nrows(), wl.ncols(), |i, j| wl[(i, j)] * f[j]);
    Overlap::from_table(&scaled * &wr, 0)
}

/// The truncated-Hamiltonian family:
/// `‖P_{[τ,∞)} Π̃_{[0,ε]}‖` at the truncation scale,
/// `‖Q_{[τ′,∞)} f(H) Q_{[0,τ]}‖` and `‖Π̃_{[ε′,∞)} f(H_L) Π̃_{[0,ε]}‖`
/// for a step function and a decaying exponential `f`.
pub fn check_dist2_and_expe2(inst: &Instance, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    let t = inst.truncated()?;
    let sh = &inst.spec_h;
    let shl = inst.spec_hl()?;
    let sq = inst.spec_q()?;
    let sht = &t.spec_ht;
    let base = BoundParams { tau: t.tau, ..inst.base_params() };
    let seed = inst.seed;

    let eps_axis = grid.low_axis(sht.ground(), sht.top());
    let ov = Overlap::new(shl, None, sht, 0..prefix_end(sht, &eps_axis))?;
    let high = shl.select(EnergyInterval::at_least(t.tau));
    let mut rows: Vec<BoundReport> = eps_axis
        .par_iter()
        .map(|&eps| {
            let lhs = ov.block_norm(high.clone(), sht.select(EnergyInterval::at_most(eps)))?;
            let p = BoundParams { eps, ..base };
            Ok(BoundReport::new(BoundId::Dist2, lhs, rhs_dist2(&p), p, seed))
        })
        .collect::<Result<_>>()?;

    let tau_axis = grid.axis(sq.ground(), sq.top());
    let cq = prefix_end(sq, &tau_axis);
    for (f, a_norm) in spectral_functions(sh.values(), sh.values()) {
        let ov = function_overlap(sq, sh, &f, sq, cq);
        let part: Vec<BoundReport> = pairs(&tau_axis, &tau_axis)
            .into_par_iter()
            .map(|(tau, tau_prime)| {
                let lhs = ov.block_norm(sq.select(EnergyInterval::at_least(tau_prime)), sq.select(EnergyInterval::at_most(tau)))?;
                let p = BoundParams { tau, eps_prime: tau_prime, a_norm, ..base };
                Ok(BoundReport::new(BoundId::ExpE2Thm, lhs, rhs_expe2_thm(&p), p, seed))
            })
            .collect::<Result<_>>()?;
        rows.extend(part);
    }

    let prime_axis = grid.axis(sht.ground(), sht.top());
    let ct = prefix_end(sht, &eps_axis);
    for (f, a_norm) in spectral_functions(inst.hl_local.values(), shl.values()) {
        let ov = function_overlap(sht, shl, &f, sht, ct);
        let part: Vec<BoundReport> = pairs(&eps_axis, &prime_axis)
            .into_par_iter()
            .map(|(eps, eps_prime)| {
                let lhs = ov.block_norm(sht.select(EnergyInterval::at_least(eps_prime)), sht.select(EnergyInterval::at_most(eps)))?;
                let p = BoundParams { eps, eps_prime, a_norm, ..base };
                Ok(BoundReport::new(BoundId::ExpE2Lemma, lhs, rhs_expe2_lemma(&p), p, seed))
            })
            .collect::<Result<_>>()?;
        rows.extend(part);
    }
    Ok(rows)
}

/// `‖e^{sX} H_∂ e^{−sX}‖ ≤ 16|∂L|` with `X = H̃_L + H_{L^c}`, on `s ∈ [0, λ]`.
pub fn check_hb_bound(inst: &Instance, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    let t = inst.truncated()?;
    let sx = &t.spec_x;
    let y_eig = sx.to_eigenbasis(inst.h_boundary.as_ref())?;
    let base = BoundParams { tau: t.tau, ..inst.base_params() };
    grid.s_axis(base.lambda)
        .into_par_iter()
        .map(|s| {
            let lhs = conjugated_norm(sx, y_eig.as_ref(), s)?;
            let p = BoundParams { s, ..base };
            Ok(BoundReport::new(BoundId::HbBound, lhs, rhs_hb(&p), p, inst.seed))
        })
        .collect()
}
