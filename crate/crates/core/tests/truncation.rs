use faer::Mat;

use locality_core::bounds::{BoundId, GridSpec, Instance, Needs};
use locality_core::hamiltonian::embed_operator;
use locality_core::harness::ModelConfig;
use locality_core::linalg::symmetric_eigenvalues;
use locality_core::truncation::{build_truncated, check_lowspec, compare_low_spectra, TauSetting, TruncationSpec};
use locality_core::{build_lattice, decompose, diagonalize, Boundary, InteractionTerm, ModelFamily, SpinModel};

fn random_chain(n: usize, seed: u64) -> SpinModel {
    ModelConfig::chain(n, ModelFamily::RandomKlocal).build(seed).unwrap()
}

fn half(n: usize) -> Vec<usize> {
    (0..n / 2).collect()
}

#[test]
fn inactive_truncation_leaves_h_unchanged() {
    let model = random_chain(6, 1);
    let dc = decompose(&model, &half(6)).unwrap();
    let hl = diagonalize(model.local_hamiltonian(&dc.region, &dc.interior).unwrap().as_ref(), "H_L").unwrap();
    let tau = hl.top() + 0.5;
    let t = build_truncated(&TruncationSpec { model: &model, decomp: &dc, tau }).unwrap();
    let h = locality_core::assemble(&model).unwrap();
    for j in 0..h.ncols() {
        for i in 0..h.nrows() {
            assert!((h[(i, j)] - t.h_tilde[(i, j)]).abs() < 1e-12);
        }
    }

    let needs = Needs { probe: true, truncation: Some(TauSetting::Value(tau)), ..Needs::default() };
    let inst = Instance::new(model, &half(6), 1, needs, None).unwrap();
    let p = locality_core::BoundParams { a_norm: inst.truncated().unwrap().hl_norm, tau, ..inst.base_params() };
    let low = compare_low_spectra(&inst.spec_h, &inst.truncated().unwrap().spec_ht, inst.spec_h.top(), &p).unwrap();
    assert!(low.max_gap.abs() < 1e-9 && low.upper_holds && low.lower_holds);
    for r in check_lowspec(&inst, &GridSpec::default()).unwrap() {
        if matches!(r.bound_id, BoundId::PiBound | BoundId::TpiBound) {
            assert!(r.lhs_measured < 1e-12, "{r:?}");
        }
        assert!(r.satisfied);
    }
}

#[test]
fn region_only_model_truncates_to_the_local_factor() {
    let lattice = build_lattice(1, &[4], Boundary::Open).unwrap();
    let zz = Mat::from_fn(4, 4, |i, j| if i == j { [0.0, 1.0, 1.0, 0.0][i] + 0.1 * i as f64 } else { 0.0 });
    let xx = Mat::from_fn(4, 4, |i, j| if i + j == 3 { 0.5 } else { 0.0 });
    let terms = vec![
        InteractionTerm::new(vec![0, 1], zz).unwrap(),
        InteractionTerm::new(vec![1, 2], xx).unwrap(),
    ];
    let model = SpinModel::from_terms(lattice, 2, 2, terms).unwrap();
    let region = [0, 1, 2];
    let dc = decompose(&model, &region).unwrap();
    assert!(dc.boundary.is_empty() && dc.exterior.is_empty());
    let hl = diagonalize(model.local_hamiltonian(&dc.region, &dc.interior).unwrap().as_ref(), "H_L").unwrap();
    let tau = 0.5 * (hl.ground() + hl.top());
    let t = build_truncated(&TruncationSpec { model: &model, decomp: &dc, tau }).unwrap();
    let clipped = hl.function(|x| x.min(tau));
    let want = embed_operator(&clipped, &region, 4, 2);
    for j in 0..16 {
        for i in 0..16 {
            assert!((want[(i, j)] - t.h_tilde[(i, j)]).abs() < 1e-12);
        }
    }
}

#[test]
fn truncation_lowers_h_on_eight_spins() {
    let model = random_chain(8, 3);
    let dc = decompose(&model, &half(8)).unwrap();
    let hl = diagonalize(model.local_hamiltonian(&dc.region, &dc.interior).unwrap().as_ref(), "H_L").unwrap();
    let tau = 0.5 * (hl.ground() + hl.top());
    let t = build_truncated(&TruncationSpec { model: &model, decomp: &dc, tau }).unwrap();
    let h = locality_core::assemble(&model).unwrap();
    let diff = &h - &t.h_tilde;
    let lowest = symmetric_eigenvalues(diff.as_ref()).unwrap()[0];
    assert!(lowest >= -1e-9, "{lowest}");
    let e = symmetric_eigenvalues(h.as_ref()).unwrap();
    let et = symmetric_eigenvalues(t.h_tilde.as_ref()).unwrap();
    assert!(e.iter().zip(&et).all(|(a, b)| *b <= a + 1e-9));
    assert!(et.iter().zip(&e).any(|(b, a)| a - b > 1e-6));
}

#[test]
fn ten_spin_tau_sweep() {
    let model = random_chain(10, 4);
    let region = half(10);
    let plain = Instance::new(model.clone(), &region, 4, Needs::default(), None).unwrap();
    let (lo, hi) = (plain.hl_local.ground(), plain.hl_local.top());
    for f in [0.1, 0.3, 0.5, 0.7, 0.9] {
        let tau = lo + f * (hi - lo);
        let needs = Needs { truncation: Some(TauSetting::Value(tau)), ..Needs::default() };
        let inst = Instance::new(model.clone(), &region, 4, needs, None).unwrap();
        let p = locality_core::BoundParams { a_norm: inst.truncated().unwrap().hl_norm, tau, ..inst.base_params() };
        let window = inst.spec_h.ground() + (inst.spec_h.top() - inst.spec_h.ground()) / 3.0;
        let low = compare_low_spectra(&inst.spec_h, &inst.truncated().unwrap().spec_ht, window, &p).unwrap();
        assert!(!low.levels.is_empty());
        assert!(low.upper_holds && low.lower_holds, "τ = {tau}");
    }
}
