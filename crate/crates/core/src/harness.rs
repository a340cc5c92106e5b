//! Config-driven experiments: simulation dumps, single fits, Monte-Carlo
//! benchmarks and the covariance decay diagnostic.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::estimator::{coarse_level, LogBase, Sample};
use crate::fit::{fit_method, FitOptions, Method};
use crate::processes::{derive_seed, ProcessCase, ProcessSpec, Simulator, TargetKind};
use crate::risk::{centred_probe, covariance_decay, monte_carlo_risk, DecayClass, MonteCarloConfig, RiskReport};
use crate::wavelet::{Family, WaveletFilter, WaveletTables, DEFAULT_DEPTH};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WaveletConfig {
    #[serde(default = "default_family")]
    pub family: Family,
    #[serde(default = "default_vanishing_moments")]
    pub vanishing_moments: u32,
    #[serde(default = "default_depth")]
    pub depth: u32,
}

fn default_family() -> Family {
    Family::Symmlet
}
fn default_vanishing_moments() -> u32 {
    8
}
fn default_depth() -> u32 {
    DEFAULT_DEPTH
}

impl Default for WaveletConfig {
    fn default() -> Self {
        Self { family: default_family(), vanishing_moments: default_vanishing_moments(), depth: default_depth() }
    }
}

impl WaveletConfig {
    pub fn tables(&self) -> Result<WaveletTables<f64>> {
        WaveletTables::cascade(&WaveletFilter::build(self.family, self.vanishing_moments)?, self.depth)
    }
}

/// A process without its sample size and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessConfig {
    pub case: ProcessCase,
    #[serde(default)]
    pub target: TargetKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lsv_alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ar_depth: Option<usize>,
}

impl ProcessConfig {
    pub fn spec(&self, n: usize, seed: u64) -> ProcessSpec {
        ProcessSpec {
            case: self.case,
            target: self.target.clone(),
            n,
            seed,
            lsv_alpha: self.lsv_alpha,
            ar_depth: self.ar_depth,
        }
    }

    /// `iid`, `logistic_map`, ... with the LSV parameter appended.
    pub fn label(&self) -> String {
        match (self.case, self.lsv_alpha) {
            (ProcessCase::Lsv, Some(a)) => format!("lsv_alpha{a}"),
            (case, _) => case.name().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    #[serde(default = "default_alphas")]
    pub alphas: Vec<f64>,
    #[serde(default = "default_decay_n")]
    pub n: usize,
    #[serde(default = "default_max_lag")]
    pub max_lag: usize,
    /// Probe level; defaults to the coarse level for `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j: Option<u32>,
    #[serde(default = "default_true")]
    pub iid_control: bool,
}

fn default_alphas() -> Vec<f64> {
    (1..=9).map(|i| i as f64 / 10.0).collect()
}
fn default_decay_n() -> usize {
    1_000_000
}
fn default_max_lag() -> usize {
    5000
}
fn default_true() -> bool {
    true
}

impl Default for DecayConfig {
    fn default() -> Self {
        Self {
            alphas: default_alphas(),
            n: default_decay_n(),
            max_lag: default_max_lag(),
            j: None,
            iid_control: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default)]
    pub processes: Vec<ProcessConfig>,
    #[serde(default)]
    pub methods: Vec<Method>,
    #[serde(default)]
    pub n_list: Vec<usize>,
    #[serde(default = "default_replicates")]
    pub replicates: usize,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default)]
    pub moment_orders: Vec<u32>,
    #[serde(default = "default_moment_interval")]
    pub moment_interval: (f64, f64),
    #[serde(default)]
    pub master_seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub wavelet: WaveletConfig,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
    #[serde(default = "default_k")]
    pub k_const: f64,
    #[serde(default = "default_b")]
    pub dependence_b: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decay: Option<DecayConfig>,
}

fn default_k() -> f64 {
    1.0
}

fn default_replicates() -> usize {
    100
}
fn default_p_list() -> Vec<f64> {
    vec![2.0]
}
fn default_moment_interval() -> (f64, f64) {
    (0.01, 1.0)
}
fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}
fn default_grid_points() -> usize {
    4096
}
fn default_b() -> f64 {
    1.0
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.replicates < 1 {
            return bad("replicates must be at least 1".into());
        }
        if let Some(&n) = self.n_list.iter().find(|&&n| n < 8) {
            return bad(format!("sample size {n} is below 8"));
        }
        if let Some(&p) = self.p_list.iter().find(|&&p| !(p >= 1.0 && p.is_finite())) {
            return bad(format!("p = {p} must be at least 1"));
        }
        if self.moment_orders.contains(&0) {
            return bad("moment orders start at 1".into());
        }
        if self.grid_points < 64 {
            return bad(format!("grid_points = {} is below 64", self.grid_points));
        }
        if !(self.k_const > 0.0 && self.k_const.is_finite()) {
            return bad(format!("k_const = {} must be positive", self.k_const));
        }
        if self.wavelet.depth < 4 || self.wavelet.depth > 24 {
            return bad(format!("table depth {} is outside 4..=24", self.wavelet.depth));
        }
        WaveletFilter::<f64>::build(self.wavelet.family, self.wavelet.vanishing_moments)
            .map_err(|e| Error::Config(e.to_string()))?;
        for p in &self.processes {
            p.spec(8, 0).validate().map_err(|e| Error::Config(e.to_string()))?;
            if p.case != ProcessCase::Lsv {
                crate::processes::TargetDensity::build(p.target.clone()).map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if let Some(d) = &self.decay {
            if let Some(&a) = d.alphas.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
                return bad(format!("decay alpha {a} is outside (0, 1)"));
            }
            if d.n < 32 || d.max_lag < 1 || d.max_lag > d.n / 4 {
                return bad(format!("decay needs n >= 32 and 1 <= max_lag <= n/4, got n = {}, max_lag = {}", d.n, d.max_lag));
            }
        }
        Ok(())
    }

    pub fn fit_options(&self) -> FitOptions {
        FitOptions {
            grid_points: self.grid_points,
            k_const: self.k_const,
            dependence_b: self.dependence_b,
            ..FitOptions::default()
        }
    }

    /// SHA-256 of the serialized config, output directory excluded.
    pub fn hash(&self) -> String {
        let mut identity = self.clone();
        identity.output_dir = PathBuf::new();
        let bytes = serde_json::to_vec(&identity).expect("config serializes");
        Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub process: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub replicate: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ManifestEntry {
    fn file(path: &str) -> Self {
        Self { path: path.into(), process: None, n: None, replicate: None, seed: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub experiment: String,
    pub command: String,
    pub config_hash: String,
    pub master_seed: u64,
    pub files: Vec<ManifestEntry>,
}

/// Output files go through one writer so the manifest lists exactly what was written.
struct OutputDir {
    root: PathBuf,
    entries: Vec<ManifestEntry>,
}

impl OutputDir {
    fn create(root: &Path) -> Result<Self> {
        fs::create_dir_all(root)?;
        Ok(Self { root: root.to_path_buf(), entries: vec![] })
    }

    fn write(&mut self, entry: ManifestEntry, contents: &[u8]) -> Result<()> {
        let path = self.root.join(&entry.path);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(path, contents)?;
        self.entries.push(entry);
        Ok(())
    }

    fn finish(self, cfg: &ExperimentConfig, command: &str) -> Result<Manifest> {
        let manifest = Manifest {
            experiment: cfg.experiment.clone(),
            command: command.into(),
            config_hash: cfg.hash(),
            master_seed: cfg.master_seed,
            files: self.entries,
        };
        fs::write(self.root.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
        Ok(manifest)
    }
}

fn sample_csv(sample: &Sample<f64>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    writeln!(buf, "x")?;
    for v in sample.values() {
        writeln!(buf, "{v:?}")?;
    }
    Ok(buf)
}

/// One CSV per process, sample size and replicate; replicate `r` uses
/// `derive_seed(master_seed, r)`.
pub fn cmd_simulate(cfg: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    if cfg.processes.is_empty() || cfg.n_list.is_empty() {
        return Err(Error::Config("simulate needs processes and n_list".into()));
    }
    let mut dir = OutputDir::create(out)?;
    for proc_cfg in &cfg.processes {
        for &n in &cfg.n_list {
            let sim = Simulator::new(&proc_cfg.spec(n, 0))?;
            for r in 0..cfg.replicates {
                let seed = derive_seed(cfg.master_seed, r as u64);
                let sample =
                    sim.run(seed).map_err(|e| Error::Replicate { replicate: r, seed, source: Box::new(e) })?;
                let path = format!("samples/{}_n{n}_r{r:04}.csv", proc_cfg.label());
                let entry = ManifestEntry {
                    path,
                    process: Some(proc_cfg.label()),
                    n: Some(n),
                    replicate: Some(r),
                    seed: Some(seed),
                };
                dir.write(entry, &sample_csv(&sample)?)?;
            }
        }
    }
    dir.finish(cfg, "simulate")
}

/// Reads a single-column sample: an optional non-numeric header, then one
/// value per line. Blank lines are skipped.
pub fn read_sample_csv(text: &str, lo: f64, hi: f64) -> Result<Sample<f64>> {
    let mut values = vec![];
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let field = line.split(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            Ok(v) => return Err(Error::Parse { line: i + 1, message: format!("non-finite value {v}") }),
            Err(_) if i == 0 && values.is_empty() => continue,
            Err(e) => return Err(Error::Parse { line: i + 1, message: format!("{field:?}: {e}") }),
        }
        if line.split(',').count() > 1 {
            return Err(Error::Parse { line: i + 1, message: "expected a single column".into() });
        }
    }
    if let Some((i, v)) = values.iter().enumerate().find(|(_, v)| **v < lo || **v > hi) {
        return Err(Error::InvalidParameter(format!("value {v} (observation {}) lies outside [{lo}, {hi}]", i + 1)));
    }
    Sample::new(values, lo, hi)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitRequest {
    pub sample: PathBuf,
    pub method: Method,
    pub support: (f64, f64),
    pub options: FitOptions,
    pub wavelet: WaveletConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitSummary {
    pub method: Method,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j1: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<f64>,
}

/// Writes `estimate.csv`, `fit.json` and, for the CV methods, `selection.json`.
pub fn cmd_fit(req: &FitRequest, out: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(&req.sample)?;
    let sample = read_sample_csv(&text, req.support.0, req.support.1)?;
    let tables = req.wavelet.tables()?;
    let fit = fit_method(&sample, req.method, &tables, &req.options)?;
    fs::create_dir_all(out)?;
    let mut written = vec![];
    let mut csv = Vec::new();
    fit.estimate.write_csv(&mut csv)?;
    let path = out.join("estimate.csv");
    fs::write(&path, csv)?;
    written.push(path);
    if let Some(sel) = &fit.selection {
        let path = out.join("selection.json");
        fs::write(&path, sel.to_json()? + "\n")?;
        written.push(path);
    }
    let summary = FitSummary { method: req.method, n: sample.len(), j1: fit.j1, bandwidth: fit.bandwidth };
    let path = out.join("fit.json");
    fs::write(&path, serde_json::to_string_pretty(&summary)? + "\n")?;
    written.push(path);
    Ok(written)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkDocument {
    pub experiment: String,
    pub config_hash: String,
    pub reports: Vec<RiskReport>,
}

/// Risk reports for every process, sample size and method in the config.
pub fn run_benchmark(cfg: &ExperimentConfig) -> Result<BenchmarkDocument> {
    if cfg.processes.is_empty() || cfg.n_list.is_empty() || cfg.methods.is_empty() {
        return Err(Error::Config("benchmark needs processes, n_list and methods".into()));
    }
    let tables = cfg.wavelet.tables()?;
    let opts = cfg.fit_options();
    let mc = MonteCarloConfig {
        replicates: cfg.replicates,
        master_seed: cfg.master_seed,
        seed_offset: 0,
        p_list: cfg.p_list.clone(),
        moment_orders: cfg.moment_orders.clone(),
        moment_interval: cfg.moment_interval,
    };
    let mut reports = vec![];
    for proc_cfg in &cfg.processes {
        for &n in &cfg.n_list {
            let sim = Simulator::new(&proc_cfg.spec(n, 0))?;
            for &method in &cfg.methods {
                log::info!("benchmark {} n={n} {method}", proc_cfg.label());
                let mut report = monte_carlo_risk(&sim, method, &tables, &opts, &mc)?;
                report.case = proc_cfg.label();
                reports.push(report);
            }
        }
    }
    Ok(BenchmarkDocument { experiment: cfg.experiment.clone(), config_hash: cfg.hash(), reports })
}

/// `benchmark.json`, `benchmark.csv` and per-figure CSVs.
pub fn cmd_benchmark(cfg: &ExperimentConfig, out: &Path) -> Result<Manifest> {
    let doc = run_benchmark(cfg)?;
    let mut dir = OutputDir::create(out)?;
    dir.write(ManifestEntry::file("benchmark.json"), (serde_json::to_string_pretty(&doc)? + "\n").as_bytes())?;

    let mut rows = String::from(RiskReport::CSV_HEADER);
    rows.push('\n');
    let mut thresholds = String::from("method,case,n,j,mean_lambda\n");
    let mut fractions = String::from("method,case,n,j,mean_thresholded_fraction\n");
    let mut moments = String::from("method,case,n,k,value,clamped\n");
    for r in &doc.reports {
        for row in r.csv_rows() {
            rows.push_str(&row);
            rows.push('\n');
        }
        for l in &r.threshold_profile {
            thresholds.push_str(&format!("{},{},{},{},{:?}\n", r.method, r.case, r.n, l.j, l.mean));
        }
        for l in &r.thresholded_fraction {
            fractions.push_str(&format!("{},{},{},{},{:?}\n", r.method, r.case, r.n, l.j, l.mean));
        }
        for m in &r.integrated_moments {
            moments.push_str(&format!("{},{},{},{},{:?},{}\n", r.method, r.case, r.n, m.k, m.value, m.clamped));
        }
    }
    dir.write(ManifestEntry::file("benchmark.csv"), rows.as_bytes())?;
    dir.write(ManifestEntry::file("fig3_threshold_levels.csv"), thresholds.as_bytes())?;
    dir.write(ManifestEntry::file("fig4_thresholded_fraction.csv"), fractions.as_bytes())?;
    if !cfg.moment_orders.is_empty() {
        dir.write(ManifestEntry::file("fig8_integrated_moments.csv"), moments.as_bytes())?;
    }
    dir.finish(cfg, "benchmark")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecaySummary {
    pub process: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected_slope: Option<f64>,
    pub j: u32,
    pub k: i64,
    pub seed: u64,
    pub slope: Option<f64>,
    pub class: DecayClass,
    pub path: String,
}

/// One profile CSV per LSV parameter plus an optional iid control.
pub fn cmd_diagnose_decay(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<DecaySummary>> {
    let decay = cfg.decay.clone().unwrap_or_default();
    let tables = cfg.wavelet.tables()?;
    let j = decay.j.unwrap_or_else(|| coarse_level(decay.n, cfg.wavelet.vanishing_moments, LogBase::Natural));
    let (a, b) = cfg.moment_interval;
    let k = centred_probe(&tables, j, a, b);
    let mut specs: Vec<(String, Option<f64>, ProcessSpec)> = decay
        .alphas
        .iter()
        .enumerate()
        .map(|(i, &alpha)| {
            (format!("lsv_alpha{alpha}"), Some(alpha), ProcessSpec::lsv(alpha, decay.n, derive_seed(cfg.master_seed, i as u64)))
        })
        .collect();
    if decay.iid_control {
        let seed = derive_seed(cfg.master_seed, decay.alphas.len() as u64);
        specs.push(("iid".into(), None, ProcessSpec::new(ProcessCase::Iid, TargetKind::default(), decay.n, seed)));
    }
    let mut dir = OutputDir::create(out)?;
    let mut summaries = vec![];
    for (label, alpha, spec) in specs {
        let sample = crate::processes::simulate(&spec)
            .map_err(|e| Error::Replicate { replicate: 0, seed: spec.seed, source: Box::new(e) })?;
        let profile = covariance_decay(&sample, &tables, j, k, decay.max_lag)?;
        let path = format!("decay_{label}.csv");
        let mut csv = Vec::new();
        profile.write_csv(&mut csv)?;
        let entry = ManifestEntry { path: path.clone(), process: Some(label.clone()), n: Some(decay.n), replicate: None, seed: Some(spec.seed) };
        dir.write(entry, &csv)?;
        summaries.push(DecaySummary {
            process: label,
            alpha,
            expected_slope: alpha.map(|a| 1.0 - 1.0 / a),
            j,
            k,
            seed: spec.seed,
            slope: profile.fit.as_ref().map(|f| f.slope),
            class: profile.class,
            path,
        });
    }
    dir.write(ManifestEntry::file("decay_summary.json"), (serde_json::to_string_pretty(&summaries)? + "\n").as_bytes())?;
    dir.finish(cfg, "diagnose-decay")?;
    Ok(summaries)
}

/// Writes `x,phi,psi` rows for the configured filter.
pub fn cmd_tables(wavelet: &WaveletConfig, out: &Path) -> Result<PathBuf> {
    let tables = wavelet.tables()?;
    fs::create_dir_all(out)?;
    let path = out.join(format!("tables_{}{}_J{}.csv", wavelet.family, wavelet.vanishing_moments, wavelet.depth));
    let mut w = std::io::BufWriter::new(fs::File::create(&path)?);
    tables.write_csv(&mut w)?;
    w.flush()?;
    Ok(path)
}
