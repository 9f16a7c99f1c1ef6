//! Configuration-driven sweeps: build instances, run suites, write
//! `bounds.csv` and `report.json`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::bounds::{
    check_corollary, check_dist, check_dist2_and_expe2, check_expe, check_hadamard_lemma, check_hb_bound,
    check_normphi, check_product, BoundId, BoundReport, GridSpec, Instance, Needs, DEFAULT_PRODUCT_PAIRS,
};
use crate::error::{Error, Result};
use crate::hamiltonian::SpinModel;
use crate::model::{build_lattice, Boundary, ModelFamily, ModelSpec};
use crate::series::{check_series, SeriesSettings};
use crate::truncation::{check_lowspec, check_truncation, TauSetting};

/// Largest system the series suite accepts.
pub const SERIES_MAX_SITES: usize = 8;

/// Exact CSV header.
pub const CSV_HEADER: &str =
    "bound_id,seed,eps,eps_prime,tau,R,g,k,lambda,boundary,lhs_measured,rhs_bound,margin,satisfied";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Suite {
    #[serde(rename = "expE")]
    Expe,
    #[serde(rename = "dist")]
    Dist,
    #[serde(rename = "product")]
    Product,
    #[serde(rename = "corollary")]
    Corollary,
    #[serde(rename = "hadamard")]
    Hadamard,
    #[serde(rename = "normphi")]
    Normphi,
    #[serde(rename = "truncation")]
    Truncation,
    #[serde(rename = "lowspec")]
    Lowspec,
    #[serde(rename = "dist2")]
    Dist2,
    #[serde(rename = "hb")]
    Hb,
    #[serde(rename = "series")]
    Series,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Expe,
        Suite::Dist,
        Suite::Product,
        Suite::Corollary,
        Suite::Hadamard,
        Suite::Normphi,
        Suite::Truncation,
        Suite::Lowspec,
        Suite::Dist2,
        Suite::Hb,
        Suite::Series,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Suite::Expe => "expE",
            Suite::Dist => "dist",
            Suite::Product => "product",
            Suite::Corollary => "corollary",
            Suite::Hadamard => "hadamard",
            Suite::Normphi => "normphi",
            Suite::Truncation => "truncation",
            Suite::Lowspec => "lowspec",
            Suite::Dist2 => "dist2",
            Suite::Hb => "hb",
            Suite::Series => "series",
        }
    }

    /// Bound ids a suite emits.
    pub fn bound_ids(self) -> &'static [BoundId] {
        use BoundId::*;
        match self {
            Suite::Expe => &[ExpETight, ExpELoose],
            Suite::Dist => &[Dist],
            Suite::Product => &[ProductUpper, ProductLower],
            Suite::Corollary => &[ProductStateCorollary],
            Suite::Hadamard => &[HadamardLemma],
            Suite::Normphi => &[NormphiLemma],
            Suite::Truncation => &[TruncationOrder, TruncationNorm, SpectrumUpper],
            Suite::Lowspec => &[PiBound, TpiBound, SpectrumLower],
            Suite::Dist2 => &[Dist2, ExpE2Thm, ExpE2Lemma],
            Suite::Hb => &[HbBound],
            Suite::Series => &[KlNorm, HadamardSeries, DysonSeries, DysonPrimedSeries, GeometricIdentity],
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown suite `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionPreset {
    /// The first `⌊N/2⌋` sites in row-major order.
    LeftHalf,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RegionSpec {
    Preset(RegionPreset),
    Sites(Vec<usize>),
}

impl Default for RegionSpec {
    fn default() -> Self {
        RegionSpec::Preset(RegionPreset::LeftHalf)
    }
}

impl RegionSpec {
    pub fn sites(&self, n_sites: usize) -> Vec<usize> {
        match self {
            RegionSpec::Preset(RegionPreset::LeftHalf) => (0..n_sites / 2).collect(),
            RegionSpec::Sites(s) => s.clone(),
        }
    }
}

fn default_local_dim() -> usize {
    2
}

fn default_k() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelConfig {
    pub dimension: usize,
    pub extents: Vec<usize>,
    pub boundary: Boundary,
    pub family: ModelFamily,
    #[serde(default = "default_local_dim")]
    pub local_dim: usize,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub couplings: BTreeMap<String, f64>,
}

impl ModelConfig {
    pub fn chain(n: usize, family: ModelFamily) -> Self {
        Self {
            dimension: 1,
            extents: vec![n],
            boundary: Boundary::Open,
            family,
            local_dim: 2,
            k: 2,
            couplings: BTreeMap::new(),
        }
    }

    pub fn site_count(&self) -> usize {
        self.extents.iter().product()
    }

    pub fn spec(&self, seed: u64) -> ModelSpec {
        ModelSpec {
            family: self.family,
            local_dim: self.local_dim,
            k: self.k,
            couplings: self.couplings.clone(),
            seed,
        }
    }

    pub fn build(&self, seed: u64) -> Result<SpinModel> {
        let lattice = build_lattice(self.dimension, &self.extents, self.boundary)?;
        SpinModel::build(lattice, &self.spec(seed))
    }
}

/// A sweep configuration; see `README.md` for the JSON schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    #[serde(default)]
    pub region: RegionSpec,
    pub suites: Vec<Suite>,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub tau_trunc: TauSetting,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Site of the single-site probe operator; defaults to the middle of `L`.
    #[serde(default)]
    pub probe_site: Option<usize>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.suites.is_empty() {
            return Err(Error::Config("at least one suite is required".into()));
        }
        if self.seeds.is_empty() {
            return Err(Error::Config("at least one seed is required".into()));
        }
        let distinct: BTreeSet<u64> = self.seeds.iter().copied().collect();
        if distinct.len() != self.seeds.len() {
            return Err(Error::Config("seeds must be distinct".into()));
        }
        self.grid.validate()?;
        self.model.spec(0).validate()?;
        if let TauSetting::Value(t) = self.tau_trunc {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("tau_trunc must be positive, got {t}")));
            }
        }
        let n = self.model.site_count();
        if self.suites.contains(&Suite::Series) && n > SERIES_MAX_SITES {
            return Err(Error::Config(format!(
                "the series suite is limited to {SERIES_MAX_SITES} sites, the model has {n}"
            )));
        }
        Ok(())
    }

    /// Suites in canonical order without repeats.
    pub fn suite_list(&self) -> Vec<Suite> {
        let set: BTreeSet<Suite> = self.suites.iter().copied().collect();
        Suite::ALL.into_iter().filter(|s| set.contains(s)).collect()
    }

    fn needs(&self) -> Needs {
        let has = |s: Suite| self.suites.contains(&s);
        let truncation = [Suite::Truncation, Suite::Lowspec, Suite::Dist2, Suite::Hb, Suite::Series]
            .into_iter()
            .any(has)
            .then_some(self.tau_trunc);
        Needs {
            local: has(Suite::Dist) || has(Suite::Dist2),
            product: has(Suite::Product) || has(Suite::Dist2),
            probe: has(Suite::Expe) || has(Suite::Hadamard) || has(Suite::Normphi) || has(Suite::Series),
            truncation,
        }
    }
}

/// Options not part of the experiment itself.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RunOptions {
    /// Overwrites the first row's bound with `lhs − 1` so that the run
    /// reports a violation. For testing the exit-code path only.
    pub inject_violation: bool,
}

/// Least-squares decay rate of `ln‖Π_{[ε′,∞)}AΠ_{[0,ε]}‖` in `ε′`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub seed: u64,
    pub eps: f64,
    pub points: usize,
    pub slope: Option<f64>,
    /// Quadratic coefficient of a second-order fit (negative for
    /// faster-than-exponential decay).
    pub curvature: Option<f64>,
    pub lambda: f64,
    /// `slope ≤ −λ`; `None` when skipped.
    pub passed: Option<bool>,
    pub notice: Option<String>,
}

/// Decaying-regime window for the fit.
pub const FIT_LHS_RANGE: (f64, f64) = (1e-12, 1e-2);
/// Minimum number of points for the fit.
pub const FIT_MIN_POINTS: usize = 8;

/// Slope of the least-squares line through `(x, y)`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Quadratic coefficient of the least-squares parabola through `(x, y)`.
pub fn fit_curvature(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let u: Vec<f64> = x.iter().map(|a| a - mx).collect();
    let s = |p: i32| u.iter().map(|a| a.powi(p)).sum::<f64>();
    let t = |p: i32| u.iter().zip(y).map(|(a, b)| a.powi(p) * b).sum::<f64>();
    let m = [[n, s(1), s(2)], [s(1), s(2), s(3)], [s(2), s(3), s(4)]];
    let r = [t(0), t(1), t(2)];
    let det = |m: &[[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let mut m2 = m;
    for i in 0..3 {
        m2[i][2] = r[i];
    }
    det(&m2) / det(&m)
}

/// Fits every `(seed, ε)` slice of `expE_tight` rows.
pub fn decay_fit(rows: &[BoundReport]) -> Vec<DecayFit> {
    let mut slices: BTreeMap<(u64, u64), (f64, f64, Vec<(f64, f64)>)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.bound_id == BoundId::ExpETight) {
        let p = &r.params;
        let entry = slices.entry((r.instance_seed, p.eps.to_bits())).or_insert((p.eps, p.lambda, Vec::new()));
        let (lo, hi) = FIT_LHS_RANGE;
        if p.eps_prime > p.eps && r.lhs_measured >= lo && r.lhs_measured <= hi {
            entry.2.push((p.eps_prime, r.lhs_measured.ln()));
        }
    }
    let mut out: Vec<DecayFit> = slices
        .into_iter()
        .map(|((seed, _), (eps, lambda, pts))| {
            let mut fit = DecayFit { seed, eps, points: pts.len(), slope: None, curvature: None, lambda, passed: None, notice: None };
            if pts.len() < FIT_MIN_POINTS {
                fit.notice = Some(format!(
                    "skipped: {} points with lhs in [{:e}, {:e}], need {FIT_MIN_POINTS}",
                    pts.len(),
                    FIT_LHS_RANGE.0,
                    FIT_LHS_RANGE.1
                ));
                return fit;
            }
            let (x, y): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
            let slope = fit_slope(&x, &y);
            fit.slope = Some(slope);
            fit.curvature = Some(fit_curvature(&x, &y));
            fit.passed = Some(slope <= -lambda);
            fit
        })
        .collect();
    out.sort_by(|a, b| a.seed.cmp(&b.seed).then(a.eps.total_cmp(&b.eps)));
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub package: &'static str,
    pub version: &'static str,
}

impl Default for Provenance {
    fn default() -> Self {
        Self { package: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct RunRecord {
    pub config: RunConfig,
    pub provenance: Provenance,
    /// Wall time per suite, summed over seeds.
    pub suite_seconds: BTreeMap<String, f64>,
    pub rows: Vec<BoundReport>,
    pub decay_fit: Vec<DecayFit>,
}

impl RunRecord {
    pub fn violations(&self) -> Vec<&BoundReport> {
        self.rows.iter().filter(|r| !r.satisfied).collect()
    }

    pub fn failed_fits(&self) -> Vec<&DecayFit> {
        self.decay_fit.iter().filter(|f| f.passed == Some(false)).collect()
    }

    /// 0 when every row is satisfied and every decay fit passes, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.violations().is_empty() && self.failed_fits().is_empty() {
            0
        } else {
            2
        }
    }
}

/// Rows of one suite on one instance.
pub fn run_suite(inst: &Instance, suite: Suite, grid: &GridSpec) -> Result<Vec<BoundReport>> {
    match suite {
        Suite::Expe => check_expe(inst, grid),
        Suite::Dist => check_dist(inst, grid),
        Suite::Product => check_product(inst, grid),
        Suite::Corollary => check_corollary(inst, &DEFAULT_PRODUCT_PAIRS),
        Suite::Hadamard => check_hadamard_lemma(inst, grid),
        Suite::Normphi => check_normphi(inst, grid),
        Suite::Truncation => check_truncation(inst),
        Suite::Lowspec => check_lowspec(inst, grid),
        Suite::Dist2 => check_dist2_and_expe2(inst, grid),
        Suite::Hb => check_hb_bound(inst, grid),
        Suite::Series => check_series(inst, &SeriesSettings::default()),
    }
}

/// Builds the instance for one seed with everything the configured suites need.
pub fn build_instance(config: &RunConfig, seed: u64) -> Result<Instance> {
    let model = config.model.build(seed)?;
    let region = config.region.sites(model.site_count());
    Instance::new(model, &region, seed, config.needs(), config.probe_site)
}

/// Runs every suite for every seed. Seeds run one after another; grid points
/// inside a suite run on the rayon pool.
pub fn run(config: &RunConfig, options: RunOptions) -> Result<RunRecord> {
    config.validate()?;
    let suites = config.suite_list();
    let mut rows = Vec::new();
    let mut suite_seconds: BTreeMap<String, f64> = BTreeMap::new();
    for &seed in &config.seeds {
        let start = Instant::now();
        let inst = build_instance(config, seed)?;
        *suite_seconds.entry("setup".into()).or_default() += start.elapsed().as_secs_f64();
        for &suite in &suites {
            let start = Instant::now();
            rows.extend(run_suite(&inst, suite, &config.grid)?);
            *suite_seconds.entry(suite.as_str().into()).or_default() += start.elapsed().as_secs_f64();
        }
    }
    if options.inject_violation {
        if let Some(first) = rows.first_mut() {
            *first = BoundReport::new(first.bound_id, first.lhs_measured, first.lhs_measured - 1.0, first.params, first.instance_seed);
        }
    }
    let decay_fit = if suites.contains(&Suite::Expe) { decay_fit(&rows) } else { Vec::new() };
    Ok(RunRecord { config: config.clone(), provenance: Provenance::default(), suite_seconds, rows, decay_fit })
}

fn fmt_float(out: &mut String, v: f64) {
    if v.is_nan() {
        out.push_str("NaN");
    } else {
        let _ = write!(out, "{v:.16e}");
    }
}

/// One CSV line (without newline) for a report.
pub fn csv_line(r: &BoundReport) -> String {
    let p = &r.params;
    let mut s = String::with_capacity(256);
    let _ = write!(s, "{},{},", r.bound_id, r.instance_seed);
    for v in [p.eps, p.eps_prime, p.tau, p.r, p.g] {
        fmt_float(&mut s, v);
        s.push(',');
    }
    let _ = write!(s, "{},", p.k);
    for v in [p.lambda, p.boundary, r.lhs_measured, r.rhs_bound, r.margin] {
        fmt_float(&mut s, v);
        s.push(',');
    }
    s.push_str(if r.satisfied { "true" } else { "false" });
    s
}

pub fn csv_string(rows: &[BoundReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&csv_line(r));
        out.push('\n');
    }
    out
}

pub fn emit_csv(record: &RunRecord, path: &Path) -> Result<()> {
    fs::write(path, csv_string(&record.rows))?;
    Ok(())
}

pub fn emit_json(record: &RunRecord, path: &Path) -> Result<()> {
    let text = serde_json::to_string_pretty(record)?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Writes `bounds.csv` and `report.json` into `dir`, creating it if needed.
pub fn write_outputs(record: &RunRecord, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir)?;
    let csv = dir.join("bounds.csv");
    let json = dir.join("report.json");
    emit_csv(record, &csv)?;
    emit_json(record, &json)?;
    Ok((csv, json))
}
