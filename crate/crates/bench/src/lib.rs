//! Shared fixtures for the criterion benchmarks.

use locality_core::bounds::{Instance, Needs};
use locality_core::harness::ModelConfig;
use locality_core::truncation::TauSetting;
use locality_core::{ModelFamily, SpinModel};

pub fn random_chain(n: usize, seed: u64) -> SpinModel {
    ModelConfig::chain(n, ModelFamily::RandomKlocal).build(seed).expect("desk-scale chain")
}

/// Left-half instance with every optional piece precomputed.
pub fn instance(n: usize, seed: u64) -> Instance {
    let region: Vec<usize> = (0..n / 2).collect();
    Instance::new(random_chain(n, seed), &region, seed, Needs::all(TauSetting::default()), None).expect("instance")
}
