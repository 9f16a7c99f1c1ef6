use faer::Mat;

use locality_core::bounds::{
    check_corollary, check_dist, check_dist2_and_expe2, check_expe, check_hadamard_lemma, check_hb_bound, check_normphi,
    check_product, BoundId, BoundReport, GridSpec, Instance, Needs, DEFAULT_PRODUCT_PAIRS,
};
use locality_core::harness::ModelConfig;
use locality_core::linalg::symmetric_norm;
use locality_core::spectral::{sandwich_norm, EnergyInterval};
use locality_core::truncation::TauSetting;
use locality_core::{build_lattice, Boundary, InteractionTerm, Matrix, ModelFamily, SpinModel};

fn random_sym(n: usize, seed: u64) -> Matrix {
    let mut state = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut next = move || {
        state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
    };
    let raw = Mat::from_fn(n, n, |_, _| next());
    Mat::from_fn(n, n, |i, j| raw[(i, j)] + raw[(j, i)])
}

/// Two bonds `{0,1}` and `{2,3}` with nothing across.
fn decoupled() -> SpinModel {
    let lattice = build_lattice(1, &[4], Boundary::Open).unwrap();
    let terms = vec![
        InteractionTerm::new(vec![0, 1], random_sym(4, 1)).unwrap(),
        InteractionTerm::new(vec![2, 3], random_sym(4, 2)).unwrap(),
    ];
    SpinModel::from_terms(lattice, 2, 2, terms).unwrap()
}

fn random_chain(n: usize, seed: u64) -> SpinModel {
    ModelConfig::chain(n, ModelFamily::RandomKlocal).build(seed).unwrap()
}

fn instance(model: SpinModel, seed: u64, tau: TauSetting) -> Instance {
    let n = model.site_count();
    let region: Vec<usize> = (0..n / 2).collect();
    Instance::new(model, &region, seed, Needs::all(tau), None).unwrap()
}

fn all_satisfied(rows: &[BoundReport]) {
    assert!(!rows.is_empty());
    if let Some(r) = rows.iter().find(|r| !r.satisfied) {
        panic!("violated: {r:?}");
    }
}

#[test]
fn decoupled_halves_have_disjoint_supports() {
    let inst = instance(decoupled(), 0, TauSetting::default());
    assert_eq!(inst.decomp.size_boundary, 0.0);
    let grid = GridSpec::default();

    let dist = check_dist(&inst, &grid).unwrap();
    for r in dist.iter().filter(|r| r.params.tau > r.params.eps + 1e-6) {
        assert!(r.lhs_measured < 1e-9, "{r:?}");
    }
    for r in check_product(&inst, &grid).unwrap() {
        let p = &r.params;
        let disjoint = match r.bound_id {
            BoundId::ProductUpper => p.tau > p.eps + 1e-6,
            _ => p.eps > p.tau + 1e-6,
        };
        if disjoint {
            assert!(r.lhs_measured < 1e-9, "{r:?}");
        }
    }
    let cor = check_corollary(&inst, &DEFAULT_PRODUCT_PAIRS).unwrap();
    all_satisfied(&cor);
    for r in &cor {
        assert!(r.lhs_measured < 1e-9 || (r.lhs_measured - 1.0).abs() < 1e-9);
    }
    for r in check_hb_bound(&inst, &grid).unwrap() {
        assert!(r.lhs_measured < 1e-12 && r.satisfied);
    }
}

#[test]
fn product_state_overlaps_are_normalized() {
    let inst = instance(random_chain(6, 4), 4, TauSetting::default());
    let rows = check_corollary(&inst, &DEFAULT_PRODUCT_PAIRS).unwrap();
    assert_eq!(rows.len(), DEFAULT_PRODUCT_PAIRS.len() * 64);
    for chunk in rows.chunks(64) {
        let mut total = 0.0;
        let mut last = f64::NEG_INFINITY;
        for r in chunk {
            if r.params.eps - last > 1e-9 {
                total += r.lhs_measured * r.lhs_measured;
            }
            last = r.params.eps;
        }
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }
}

#[test]
fn ground_product_state_on_eight_spins() {
    let inst = instance(random_chain(8, 2), 2, TauSetting::default());
    let rows = check_corollary(&inst, &[(0, 0)]).unwrap();
    assert_eq!(rows.len(), 256);
    all_satisfied(&rows);
}

#[test]
fn block_norms_match_explicit_products() {
    let inst = instance(random_chain(5, 8), 8, TauSetting::default());
    let grid = GridSpec { points: 6, ..GridSpec::default() };
    let sh = &inst.spec_h;
    let sq = inst.spec_q().unwrap();
    let dim = sh.dim();
    let id = Matrix::identity(dim, dim);
    let a = &inst.probe().unwrap().full;

    for r in check_expe(&inst, &grid).unwrap() {
        let p1 = sh.projector(EnergyInterval::at_least(r.params.eps_prime));
        let p2 = sh.projector(EnergyInterval::at_most(r.params.eps));
        let want = sandwich_norm(p1.as_ref(), a.as_ref(), p2.as_ref()).unwrap();
        assert!((r.lhs_measured - want).abs() < 1e-9);
        if r.params.eps_prime > r.params.eps + 1e-6 {
            assert!(sandwich_norm(p1.as_ref(), id.as_ref(), p2.as_ref()).unwrap() < 1e-9);
        }
    }
    for r in check_product(&inst, &grid).unwrap() {
        let (eps, tau) = (r.params.eps, r.params.tau);
        let (left, right) = match r.bound_id {
            BoundId::ProductUpper => (sq.projector(EnergyInterval::at_least(tau)), sh.projector(EnergyInterval::at_most(eps))),
            _ => (sh.projector(EnergyInterval::at_least(eps)), sq.projector(EnergyInterval::at_most(tau))),
        };
        let want = sandwich_norm(left.as_ref(), id.as_ref(), right.as_ref()).unwrap();
        let adjoint = sandwich_norm(right.as_ref(), id.as_ref(), left.as_ref()).unwrap();
        assert!((r.lhs_measured - want).abs() < 1e-9);
        assert!((want - adjoint).abs() < 1e-9);
    }
}

#[test]
fn hadamard_rows_start_at_equality() {
    let inst = instance(random_chain(6, 3), 3, TauSetting::default());
    let rows = check_hadamard_lemma(&inst, &GridSpec::default()).unwrap();
    all_satisfied(&rows);
    let first = &rows[0];
    assert_eq!(first.params.s, 0.0);
    assert!((first.lhs_measured - 1.0).abs() < 1e-12 && (first.rhs_bound - 1.0).abs() < 1e-12);
}

#[test]
fn normphi_on_eight_spins() {
    let inst = instance(random_chain(8, 5), 5, TauSetting::default());
    let rows = check_normphi(&inst, &GridSpec::default()).unwrap();
    all_satisfied(&rows);
}

#[test]
fn inactive_truncation_reduces_to_the_plain_theorem() {
    let model = random_chain(6, 6);
    let probe = instance(model.clone(), 6, TauSetting::default());
    let above = probe.hl_local.top() + 1.0;
    let inst = instance(model, 6, TauSetting::Value(above));
    let t = inst.truncated().unwrap();
    let diff = &inst.h - &t.h_tilde;
    assert!(symmetric_norm(diff.as_ref()).unwrap() < 1e-12);
    let rows = check_dist2_and_expe2(&inst, &GridSpec::default()).unwrap();
    all_satisfied(&rows);
    for r in rows.iter().filter(|r| r.bound_id == BoundId::Dist2) {
        assert!(r.lhs_measured < 1e-9);
    }
}

#[test]
fn boundary_conjugation_starts_at_its_norm() {
    let inst = instance(random_chain(8, 7), 7, TauSetting::default());
    let rows = check_hb_bound(&inst, &GridSpec::default()).unwrap();
    all_satisfied(&rows);
    let norm = symmetric_norm(inst.h_boundary.as_ref()).unwrap();
    assert!((rows[0].lhs_measured - norm).abs() < 1e-9);
    assert!(norm <= inst.decomp.size_boundary + 1e-9);
}

#[test]
fn ten_spin_heisenberg_distribution() {
    let model = ModelConfig::chain(10, ModelFamily::Heisenberg).build(0).unwrap();
    let region: Vec<usize> = (0..5).collect();
    let needs = Needs { local: true, ..Needs::default() };
    let inst = Instance::new(model, &region, 0, needs, None).unwrap();
    let rows = check_dist(&inst, &GridSpec::default()).unwrap();
    assert_eq!(rows.len(), 400);
    all_satisfied(&rows);
}

#[test]
fn ten_spin_random_product() {
    let model = random_chain(10, 10);
    let region: Vec<usize> = (0..5).collect();
    let needs = Needs { product: true, ..Needs::default() };
    let inst = Instance::new(model, &region, 10, needs, None).unwrap();
    let rows = check_product(&inst, &GridSpec::default()).unwrap();
    assert_eq!(rows.len(), 800);
    all_satisfied(&rows);
}
