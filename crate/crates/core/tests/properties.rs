use faer::Mat;
use proptest::prelude::*;

use locality_core::bounds::{expe_objective, optimal_s, rhs_dist, rhs_expe_loose, rhs_expe_tight, BoundParams};
use locality_core::harness::ModelConfig;
use locality_core::linalg::{operator_norm, symmetric_norm};
use locality_core::spectral::{conjugate, sandwich_norm, EnergyInterval, SpectralData};
use locality_core::{assemble, decompose, diagonalize, Matrix, ModelFamily, SpinModel};

fn random_model(n: usize, seed: u64) -> SpinModel {
    ModelConfig::chain(n, ModelFamily::RandomKlocal).build(seed).unwrap()
}

fn region_from_mask(n: usize, mask: u32) -> Vec<usize> {
    (0..n).filter(|i| mask >> i & 1 == 1).collect()
}

fn dense(n: usize, seed: u64) -> Matrix {
    let mut state = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    Mat::from_fn(n, n, |_, _| {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    })
}

/// Cut points strictly inside spectral gaps wider than `1e−6`.
fn cuts(sd: &SpectralData, picks: &[usize]) -> Vec<f64> {
    let v = sd.values();
    let gaps: Vec<f64> = v.windows(2).filter(|w| w[1] - w[0] > 1e-6).map(|w| 0.5 * (w[0] + w[1])).collect();
    if gaps.is_empty() {
        return Vec::new();
    }
    let mut out: Vec<f64> = picks.iter().map(|&p| gaps[p % gaps.len()]).collect();
    out.sort_by(f64::total_cmp);
    out.dedup();
    out
}

fn max_abs(m: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            worst = worst.max(m[(i, j)].abs());
        }
    }
    worst
}

fn params(gap: f64, r: f64, g: f64, k: usize, a_norm: f64) -> BoundParams {
    let lambda = 1.0 / (2.0 * g * k as f64);
    BoundParams { eps: 0.0, eps_prime: gap, r, a_norm, ..BoundParams::new(g, k, lambda, 0.0) }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn partition_reassembles_h(n in 2usize..=6, seed in any::<u64>(), mask in any::<u32>()) {
        let model = random_model(n, seed);
        let region = region_from_mask(n, mask);
        let dc = decompose(&model, &region).unwrap();
        let h = assemble(&model).unwrap();
        let parts = &(&model.assemble_terms(&dc.interior).unwrap() + &model.assemble_terms(&dc.boundary).unwrap())
            + &model.assemble_terms(&dc.exterior).unwrap();
        prop_assert!(max_abs(&(&h - &parts)) <= 1e-12);
        prop_assert_eq!(dc.interior.len() + dc.boundary.len() + dc.exterior.len(), model.terms().len());
    }

    #[test]
    fn ground_energies_and_boundary_norm(n in 2usize..=6, seed in any::<u64>(), mask in any::<u32>()) {
        let model = random_model(n, seed);
        let region = region_from_mask(n, mask);
        let dc = decompose(&model, &region).unwrap();
        let e0 = diagonalize(assemble(&model).unwrap().as_ref(), "H").unwrap().ground();
        let e0l = diagonalize(model.local_hamiltonian(&dc.region, &dc.interior).unwrap().as_ref(), "H_L").unwrap().ground();
        let e0lc = diagonalize(model.local_hamiltonian(&dc.complement, &dc.exterior).unwrap().as_ref(), "H_Lc").unwrap().ground();
        prop_assert!(e0 <= e0l + dc.size_boundary + e0lc + 1e-9);
        prop_assert!(e0l + e0lc <= e0 + 1e-9);
        let hb = model.assemble_terms(&dc.boundary).unwrap();
        prop_assert!(symmetric_norm(hb.as_ref()).unwrap() <= dc.size_boundary + 1e-9);
    }

    #[test]
    fn projectors_partition_the_identity(n in 2usize..=5, seed in any::<u64>(), picks in prop::collection::vec(any::<usize>(), 1..4)) {
        let h = assemble(&random_model(n, seed)).unwrap();
        let sd = diagonalize(h.as_ref(), "H").unwrap();
        let c = cuts(&sd, &picks);
        let mut intervals = Vec::new();
        let mut lo = f64::NEG_INFINITY;
        for &x in &c {
            intervals.push(EnergyInterval::new(lo, x).unwrap());
            lo = x + 1e-7;
        }
        intervals.push(EnergyInterval::new(lo, f64::INFINITY).unwrap());
        let projectors: Vec<Matrix> = intervals.iter().map(|&i| sd.projector(i)).collect();
        let dim = h.nrows();
        let mut total = Matrix::zeros(dim, dim);
        for p in &projectors {
            total += p;
        }
        prop_assert!(max_abs(&(&total - &Matrix::identity(dim, dim))) <= 1e-9);
        for (a, p) in projectors.iter().enumerate() {
            for q in &projectors[a + 1..] {
                prop_assert!(max_abs(&(p * q)) <= 1e-9);
            }
        }
    }

    #[test]
    fn sandwich_adjoint_identity(n in 2usize..=5, seed in any::<u64>(), a_seed in any::<u64>(), f1 in 0.0f64..1.0, f2 in 0.0f64..1.0) {
        let h = assemble(&random_model(n, seed)).unwrap();
        let sd = diagonalize(h.as_ref(), "H").unwrap();
        let (lo, hi) = (sd.ground(), sd.top());
        let p1 = sd.projector(EnergyInterval::at_least(lo + f1 * (hi - lo)));
        let p2 = sd.projector(EnergyInterval::at_most(lo + f2 * (hi - lo)));
        let a = dense(h.nrows(), a_seed);
        let lhs = sandwich_norm(p1.as_ref(), a.as_ref(), p2.as_ref()).unwrap();
        let rhs = sandwich_norm(p2.as_ref(), a.transpose(), p1.as_ref()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-9 * (1.0 + lhs));
    }

    #[test]
    fn conjugation_round_trip(n in 2usize..=5, seed in any::<u64>(), a_seed in any::<u64>(), s in 0.0f64..0.3) {
        let h = assemble(&random_model(n, seed)).unwrap();
        let sd = diagonalize(h.as_ref(), "H").unwrap();
        let a = dense(h.nrows(), a_seed);
        let there = conjugate(&sd, a.as_ref(), s).unwrap();
        let back = conjugate(&sd, there.as_ref(), -s).unwrap();
        let err = operator_norm((&back - &a).as_ref()).unwrap();
        prop_assert!(err <= 1e-9 * operator_norm(a.as_ref()).unwrap().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn tight_never_exceeds_loose(excess in 0.0f64..60.0, r in 0.01f64..10.0, g in 0.2f64..5.0, k in 1usize..5, a_norm in 0.1f64..3.0) {
        let p = params(2.0 * r + excess, r, g, k, a_norm);
        let tight = rhs_expe_tight(&p).unwrap();
        let loose = rhs_expe_loose(&p).unwrap();
        prop_assert!(tight <= loose * (1.0 + 1e-12) + 1e-300);
        prop_assert!(tight <= a_norm * (1.0 + 1e-12) && loose <= a_norm * (1.0 + 1e-12));
    }

    #[test]
    fn expe_bounds_decrease_in_eps_prime(gap in 0.0f64..50.0, step in 0.0f64..5.0, r in 0.01f64..10.0, g in 0.2f64..5.0, k in 1usize..5) {
        let (a, b) = (params(gap, r, g, k, 1.0), params(gap + step, r, g, k, 1.0));
        if gap > 0.0 {
            prop_assert!(rhs_expe_tight(&b).unwrap() <= rhs_expe_tight(&a).unwrap() * (1.0 + 1e-12));
            prop_assert!(rhs_expe_loose(&b).unwrap() <= rhs_expe_loose(&a).unwrap() * (1.0 + 1e-12));
        }
    }

    #[test]
    fn optimal_s_attains_the_tight_form(excess in 0.001f64..60.0, r in 0.01f64..10.0, g in 0.2f64..5.0, k in 1usize..5) {
        let p = params(r + excess, r, g, k, 1.0);
        let s = optimal_s(&p).unwrap();
        let gk = g * k as f64;
        prop_assert!(s > 0.0 && s < 1.0 / gk);
        let direct = expe_objective(&p, s).unwrap();
        let closed = rhs_expe_tight(&p).unwrap();
        prop_assert!((direct - closed).abs() <= 1e-10 * closed.max(1e-300));
    }

    #[test]
    fn distribution_bound_is_clamped(eps in 0.0f64..20.0, tau in 0.0f64..20.0, boundary in 0.0f64..3.0, g in 0.2f64..5.0) {
        let lambda = 1.0 / (4.0 * g);
        let p = BoundParams { eps, tau, eps0: 0.0, eps0_l: 0.0, ..BoundParams::new(g, 2, lambda, boundary) };
        let v = rhs_dist(&p);
        prop_assert!((0.0..=1.0).contains(&v));
    }
}
