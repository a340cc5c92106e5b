//! Sample generators for the dependence regimes: iid draws, the logistic map,
//! a two-sided moving average and the intermittent LSV map.

mod target;

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::estimator::Sample;

pub use target::{GaussianComponent, TargetDensity, TargetKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessCase {
    Iid,
    LogisticMap,
    NoncausalAr,
    Lsv,
}

impl ProcessCase {
    pub const ALL: [ProcessCase; 4] = [Self::Iid, Self::LogisticMap, Self::NoncausalAr, Self::Lsv];

    pub fn name(self) -> &'static str {
        match self {
            Self::Iid => "iid",
            Self::LogisticMap => "logistic_map",
            Self::NoncausalAr => "noncausal_ar",
            Self::Lsv => "lsv",
        }
    }
}

impl std::fmt::Display for ProcessCase {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProcessCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown process case {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessSpec {
    pub case: ProcessCase,
    #[serde(default)]
    pub target: TargetKind,
    pub n: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lsv_alpha: Option<f64>,
    /// Fixed-point iterations for `noncausal_ar`; defaults to `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ar_depth: Option<usize>,
}

impl ProcessSpec {
    pub fn new(case: ProcessCase, target: TargetKind, n: usize, seed: u64) -> Self {
        Self { case, target, n, seed, lsv_alpha: None, ar_depth: None }
    }

    pub fn lsv(alpha: f64, n: usize, seed: u64) -> Self {
        Self { lsv_alpha: Some(alpha), ..Self::new(ProcessCase::Lsv, TargetKind::default(), n, seed) }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidParameter(format!("sample size {} is below 2", self.n)));
        }
        if self.case == ProcessCase::Lsv {
            match self.lsv_alpha {
                Some(a) if a > 0.0 && a < 1.0 => {}
                Some(a) => return Err(Error::InvalidParameter(format!("lsv_alpha {a} is outside (0, 1)"))),
                None => return Err(Error::InvalidParameter("lsv case needs lsv_alpha".into())),
            }
        }
        if self.ar_depth == Some(0) {
            return Err(Error::InvalidParameter("ar_depth must be positive".into()));
        }
        Ok(())
    }
}

/// A validated spec with its target tabulated once, reusable across seeds.
#[derive(Debug, Clone)]
pub struct Simulator {
    spec: ProcessSpec,
    target: Option<TargetDensity>,
}

impl Simulator {
    pub fn new(spec: &ProcessSpec) -> Result<Self> {
        spec.validate()?;
        let target = match spec.case {
            ProcessCase::Lsv => None,
            _ => Some(TargetDensity::build(spec.target.clone())?),
        };
        Ok(Self { spec: spec.clone(), target })
    }

    pub fn spec(&self) -> &ProcessSpec {
        &self.spec
    }

    /// `None` for LSV, whose invariant density has no closed form.
    pub fn target(&self) -> Option<&TargetDensity> {
        self.target.as_ref()
    }

    pub fn support(&self) -> (f64, f64) {
        self.target.as_ref().map_or((0.0, 1.0), |t| t.support())
    }

    pub fn run(&self, seed: u64) -> Result<Sample<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = self.spec.n;
        let values = match (self.spec.case, &self.target) {
            (ProcessCase::Iid, Some(t)) => (0..n).map(|_| t.inverse_cdf(rng.gen::<f64>())).collect(),
            (ProcessCase::LogisticMap, Some(t)) => {
                logistic_orbit(&mut rng, n).into_iter().map(|y| t.inverse_cdf(logistic_invariant_cdf(y))).collect()
            }
            (ProcessCase::NoncausalAr, Some(t)) => {
                let depth = self.spec.ar_depth.unwrap_or(n);
                noncausal_ar(&mut rng, n, depth).into_iter().map(|y| t.inverse_cdf(case3_marginal_cdf(y))).collect()
            }
            (ProcessCase::Lsv, _) => lsv_orbit(&mut rng, n, self.spec.lsv_alpha.unwrap_or(0.5)),
            _ => unreachable!("target is built for every non-LSV case"),
        };
        let (lo, hi) = self.support();
        Sample::new(values, lo, hi)
    }
}

pub fn simulate(spec: &ProcessSpec) -> Result<Sample<f64>> {
    Simulator::new(spec)?.run(spec.seed)
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of replicate `r`: `splitmix64(splitmix64(master) ^ r)`.
///
/// Each seed feeds `ChaCha8Rng::seed_from_u64`.
pub fn derive_seed(master: u64, replicate: u64) -> u64 {
    splitmix64(splitmix64(master) ^ replicate)
}

pub fn logistic_map(x: f64) -> f64 {
    4.0 * x * (1.0 - x)
}

/// Arcsine law, the invariant distribution of the logistic map.
pub fn logistic_invariant_cdf(y: f64) -> f64 {
    (2.0 / PI) * y.clamp(0.0, 1.0).sqrt().asin()
}

pub fn logistic_invariant_quantile(u: f64) -> f64 {
    (0.5 * PI * u.clamp(0.0, 1.0)).sin().powi(2)
}

/// Orbit `Y_{i+1} = T(Y_i)` from an arcsine-distributed start.
///
/// Landing on `0`, `3/4` or `1` would freeze the orbit (1 maps to 0), so such
/// values are moved one ulp into the interior.
pub fn logistic_orbit(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    let mut y = logistic_invariant_quantile(rng.gen::<f64>());
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        y = unstick_logistic(y, i);
        out.push(y);
        y = logistic_map(y);
    }
    out
}

fn unstick_logistic(y: f64, i: usize) -> f64 {
    let moved = if y <= 0.0 {
        f64::MIN_POSITIVE
    } else if y >= 1.0 {
        1.0f64.next_down()
    } else if y == 0.75 {
        y.next_up()
    } else {
        return y;
    };
    log::warn!("logistic orbit hit the fixed point {y} at step {i}; moved to {moved}");
    moved
}

/// CDF of `(U + U' + xi) / 3` with `U, U'` uniform and `xi` a fair bit.
pub fn case3_marginal_cdf(y: f64) -> f64 {
    fn triangle(s: f64) -> f64 {
        if s <= 0.0 {
            0.0
        } else if s <= 1.0 {
            0.5 * s * s
        } else if s < 2.0 {
            1.0 - 0.5 * (2.0 - s) * (2.0 - s)
        } else {
            1.0
        }
    }
    0.5 * triangle(3.0 * y) + 0.5 * triangle(3.0 * y - 1.0)
}

/// Stationary solution of `Y_t = 2 (Y_{t-1} + Y_{t+1}) / 5 + xi_t / 5` with
/// `xi_t` fair bits, whose moving-average weights are `2^{-|j|} / 3`.
///
/// Jacobi iteration from zero on the window `[-depth, n + depth]`; the
/// window shrinks by one index per sweep so only drawn innovations are used.
pub fn noncausal_ar(rng: &mut impl Rng, n: usize, depth: usize) -> Vec<f64> {
    let len = n + 2 * depth;
    let xi: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
    let mut cur = vec![0.0; len];
    let mut next = vec![0.0; len];
    for sweep in 1..=depth {
        let (a, b) = (sweep, len - sweep);
        for i in a..b {
            next[i] = 0.4 * (cur[i - 1] + cur[i + 1]) + 0.2 * xi[i];
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur[depth..depth + n].to_vec()
}

/// One step of the LSV map with parameter `alpha`.
pub fn lsv_step(x: f64, alpha: f64) -> f64 {
    if x <= 0.5 {
        x * (1.0 + (2.0 * x).powf(alpha))
    } else {
        2.0 * x - 1.0
    }
}

/// `Z_0` uniform, then `2n` steps; returns `Z_{n+1}, ..., Z_{2n}`.
///
/// `0` is a fixed point and `1/2` maps to `1` then `1`; both would freeze
/// the orbit in floating point and are nudged to a neighbouring float.
pub fn lsv_orbit(rng: &mut impl Rng, n: usize, alpha: f64) -> Vec<f64> {
    let mut z = rng.gen::<f64>();
    let mut out = Vec::with_capacity(n);
    for step in 1..=2 * n {
        z = lsv_step(z, alpha);
        if z <= 0.0 || z >= 1.0 {
            let moved = if z <= 0.0 { f64::MIN_POSITIVE } else { 1.0f64.next_down() };
            log::warn!("lsv orbit reached {z} at step {step}; moved to {moved}");
            z = moved;
        }
        if step > n {
            out.push(z);
        }
    }
    out
}

/// One value per line under an `x` header.
pub fn write_sample_csv(sample: &Sample<f64>, path: &Path) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "x")?;
    for v in sample.values() {
        writeln!(w, "{v:?}")?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lsv_step_branches() {
        assert_eq!(lsv_step(0.75, 0.3), 0.5);
        assert_eq!(lsv_step(0.5, 1.0), 1.0);
        assert!((lsv_step(0.25, 0.5) - 0.25 * (1.0 + 0.5f64.sqrt())).abs() < 1e-15);
        assert!((lsv_step(0.25, 0.5) - 0.426777).abs() < 1e-6);
        assert_eq!(lsv_step(0.0, 0.5), 0.0);
        assert_eq!(lsv_step(1.0, 0.5), 1.0);
    }

    #[test]
    fn case3_cdf_values() {
        assert_eq!(case3_marginal_cdf(0.0), 0.0);
        assert_eq!(case3_marginal_cdf(1.0), 1.0);
        assert!((case3_marginal_cdf(0.5) - 0.5).abs() < 1e-15);
        assert!((case3_marginal_cdf(1.0 / 3.0) - 0.25).abs() < 1e-15);
        for i in 0..=100 {
            let y = i as f64 / 100.0;
            assert!((case3_marginal_cdf(y) + case3_marginal_cdf(1.0 - y) - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn arcsine_quantile_inverts_cdf() {
        for i in 0..=50 {
            let u = i as f64 / 50.0;
            assert!((logistic_invariant_cdf(logistic_invariant_quantile(u)) - u).abs() < 1e-12);
        }
    }

    #[test]
    fn noncausal_ar_solves_the_recursion() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 64;
        let depth = 200;
        let len = n + 2 * depth;
        let xi: Vec<f64> = (0..len).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
        let y = noncausal_ar(&mut ChaCha8Rng::seed_from_u64(5), n, depth);
        // direct moving average with weights 2^{-|j|} / 3
        for t in 0..n {
            let c = depth + t;
            let ma: f64 = (0..len).map(|s| xi[s] * 2f64.powi(-((s as i64 - c as i64).abs() as i32)) / 3.0).sum();
            assert!((y[t] - ma).abs() < 1e-12, "t = {t}");
        }
        for t in 1..n - 1 {
            let c = depth + t;
            let resid = y[t] - 0.4 * (y[t - 1] + y[t + 1]) - 0.2 * xi[c];
            assert!(resid.abs() < 1e-12);
        }
    }

    #[test]
    fn spec_validation() {
        let mut spec = ProcessSpec::lsv(1.2, 100, 0);
        assert!(spec.validate().is_err());
        spec.lsv_alpha = None;
        assert!(spec.validate().is_err());
        assert!(ProcessSpec::new(ProcessCase::Iid, TargetKind::default(), 1, 0).validate().is_err());
        assert!(ProcessSpec::lsv(0.5, 100, 0).validate().is_ok());
    }

    #[test]
    fn spec_json_round_trip() {
        let mut spec = ProcessSpec::new(ProcessCase::NoncausalAr, TargetKind::bimodal_gaussian(), 1024, 9);
        spec.ar_depth = Some(300);
        let text = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<ProcessSpec>(&text).unwrap(), spec);
        let lsv = ProcessSpec::lsv(0.25, 10, 1);
        let text = serde_json::to_string(&lsv).unwrap();
        assert_eq!(serde_json::from_str::<ProcessSpec>(&text).unwrap(), lsv);
        let parsed: ProcessSpec = serde_json::from_str(r#"{"case":"iid","n":10}"#).unwrap();
        assert_eq!(parsed.target, TargetKind::default());
    }

    #[test]
    fn deterministic_per_seed() {
        for case in [ProcessCase::Iid, ProcessCase::LogisticMap, ProcessCase::NoncausalAr] {
            let spec = ProcessSpec::new(case, TargetKind::default(), 300, 17);
            let a = simulate(&spec).unwrap();
            let b = simulate(&spec).unwrap();
            assert_eq!(a.values(), b.values());
            let c = simulate(&ProcessSpec { seed: 18, ..spec }).unwrap();
            assert_ne!(a.values(), c.values());
        }
    }

    #[test]
    fn seeds_are_distinct() {
        let seeds: std::collections::BTreeSet<u64> = (0..1000).map(|r| derive_seed(42, r)).collect();
        assert_eq!(seeds.len(), 1000);
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
    }

    #[test]
    fn orbit_fixed_points_are_escaped() {
        assert!(unstick_logistic(0.75, 0) > 0.75);
        assert!(unstick_logistic(0.0, 0) > 0.0);
        assert!(unstick_logistic(1.0, 0) < 1.0);
        assert_eq!(unstick_logistic(0.3, 0), 0.3);
    }
}
