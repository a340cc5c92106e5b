use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianComponent {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

/// Marginal densities the simulators can impose.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TargetKind {
    Uniform {
        lo: f64,
        hi: f64,
    },
    /// `w (1 + sin(pi x)) / (1/2 + 1/pi)` on `[0, 1/2)` and `2 (1 - w)` on
    /// `[1/2, 1]`; discontinuous at `1/2` unless `w` balances both sides.
    SineUniformMixture {
        sine_weight: f64,
    },
    /// Mixture of normals truncated to `[lo, hi]` and renormalized.
    GaussianMixture {
        components: Vec<GaussianComponent>,
        lo: f64,
        hi: f64,
    },
    /// Piecewise-linear density through `(x, f)` knots, renormalized.
    Custom {
        knots: Vec<(f64, f64)>,
    },
}

impl TargetKind {
    pub const DEFAULT_SINE_WEIGHT: f64 = 0.5;

    pub fn sine_uniform() -> Self {
        TargetKind::SineUniformMixture { sine_weight: Self::DEFAULT_SINE_WEIGHT }
    }

    /// `N(0.35, 0.1^2) / 2 + N(0.65, 0.1^2) / 2` on `[0, 1]`.
    pub fn bimodal_gaussian() -> Self {
        TargetKind::GaussianMixture {
            components: vec![
                GaussianComponent { weight: 0.5, mean: 0.35, sd: 0.1 },
                GaussianComponent { weight: 0.5, mean: 0.65, sd: 0.1 },
            ],
            lo: 0.0,
            hi: 1.0,
        }
    }
}

impl Default for TargetKind {
    fn default() -> Self {
        Self::sine_uniform()
    }
}

const CELLS_PER_PIECE: usize = 512;

/// A normalized density on a compact interval with its distribution function.
///
/// The CDF is tabulated at cell edges by adaptive Simpson quadrature, cells
/// never straddle a discontinuity, and values inside a cell come from an
/// 8-point Gauss-Legendre rule. The inverse is a bracketed Newton iteration
/// inside the cell holding the target probability.
#[derive(Debug, Clone)]
pub struct TargetDensity {
    kind: TargetKind,
    lo: f64,
    hi: f64,
    norm: f64,
    edges: Vec<f64>,
    cum: Vec<f64>,
}

impl TargetDensity {
    pub fn build(kind: TargetKind) -> Result<Self> {
        let (lo, hi, breaks) = match &kind {
            TargetKind::Uniform { lo, hi } => (*lo, *hi, vec![]),
            TargetKind::SineUniformMixture { sine_weight } => {
                if !(0.0..=1.0).contains(sine_weight) {
                    return Err(Error::InvalidParameter(format!("sine weight {sine_weight} is outside [0, 1]")));
                }
                (0.0, 1.0, vec![0.5])
            }
            TargetKind::GaussianMixture { components, lo, hi } => {
                if components.is_empty() || components.iter().any(|c| !(c.sd > 0.0) || !(c.weight >= 0.0)) {
                    return Err(Error::InvalidParameter("gaussian components need sd > 0 and weight >= 0".into()));
                }
                (*lo, *hi, vec![])
            }
            TargetKind::Custom { knots } => {
                if knots.len() < 2 || knots.windows(2).any(|w| !(w[0].0 < w[1].0)) || knots.iter().any(|k| !(k.1 >= 0.0))
                {
                    return Err(Error::InvalidParameter(
                        "custom knots need increasing x and nonnegative f".into(),
                    ));
                }
                let inner = knots[1..knots.len() - 1].iter().map(|k| k.0).collect();
                (knots[0].0, knots[knots.len() - 1].0, inner)
            }
        };
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::InvalidParameter(format!("target support [{lo}, {hi}] is empty")));
        }
        let mut pieces = vec![lo];
        pieces.extend(breaks.into_iter().filter(|&b| b > lo && b < hi));
        pieces.push(hi);
        let mut edges = Vec::with_capacity((pieces.len() - 1) * CELLS_PER_PIECE + 1);
        edges.push(lo);
        for w in pieces.windows(2) {
            for c in 1..=CELLS_PER_PIECE {
                edges.push(if c == CELLS_PER_PIECE { w[1] } else { w[0] + (w[1] - w[0]) * c as f64 / CELLS_PER_PIECE as f64 });
            }
        }
        let mut target = Self { kind, lo, hi, norm: 1.0, edges, cum: vec![] };
        let mut cum = Vec::with_capacity(target.edges.len());
        cum.push(0.0);
        let mut acc = 0.0;
        for w in target.edges.windows(2) {
            let mass = adaptive_simpson(&|x| target.raw_inside(x, w[0]), w[0], w[1], 1e-15);
            if !(mass >= 0.0) {
                return Err(Error::InvalidParameter("density is negative or not finite".into()));
            }
            acc += mass;
            cum.push(acc);
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::InvalidParameter("density is not normalizable".into()));
        }
        target.norm = acc;
        target.cum = cum.into_iter().map(|c| c / acc).collect();
        Ok(target)
    }

    pub fn kind(&self) -> &TargetKind {
        &self.kind
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Unnormalized density; `cell_lo` picks the side at a discontinuity.
    fn raw_inside(&self, x: f64, cell_lo: f64) -> f64 {
        match &self.kind {
            TargetKind::Uniform { .. } => 1.0,
            TargetKind::SineUniformMixture { sine_weight } => {
                if cell_lo < 0.5 && x <= 0.5 {
                    sine_weight * (1.0 + (PI * x).sin()) / (0.5 + 1.0 / PI)
                } else {
                    2.0 * (1.0 - sine_weight)
                }
            }
            TargetKind::GaussianMixture { components, .. } => components
                .iter()
                .map(|c| {
                    let z = (x - c.mean) / c.sd;
                    c.weight * (-0.5 * z * z).exp() / (c.sd * (2.0 * PI).sqrt())
                })
                .sum(),
            TargetKind::Custom { knots } => {
                let i = knots.partition_point(|k| k.0 <= cell_lo).clamp(1, knots.len() - 1);
                let (x0, f0) = knots[i - 1];
                let (x1, f1) = knots[i];
                f0 + (f1 - f0) * (x - x0) / (x1 - x0)
            }
        }
    }

    pub fn density(&self, x: f64) -> f64 {
        if x < self.lo || x > self.hi {
            return 0.0;
        }
        self.raw_inside(x, x) / self.norm
    }

    fn cell_of(&self, x: f64) -> usize {
        self.edges.partition_point(|&e| e <= x).clamp(1, self.edges.len() - 1) - 1
    }

    fn partial(&self, cell: usize, x: f64) -> f64 {
        let a = self.edges[cell];
        gauss_legendre_8(&|t| self.raw_inside(t, a), a, x) / self.norm
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= self.lo {
            return 0.0;
        }
        if x >= self.hi {
            return 1.0;
        }
        let cell = self.cell_of(x);
        (self.cum[cell] + self.partial(cell, x)).clamp(0.0, 1.0)
    }

    pub fn inverse_cdf(&self, u: f64) -> f64 {
        if !(u > 0.0) {
            return self.lo;
        }
        if u >= 1.0 {
            return self.hi;
        }
        let cell = (self.cum.partition_point(|&c| c <= u).clamp(1, self.cum.len() - 1) - 1)
            .min(self.edges.len() - 2);
        let (mut a, mut b) = (self.edges[cell], self.edges[cell + 1]);
        let target = u - self.cum[cell];
        let cell_lo = a;
        let mut x = 0.5 * (a + b);
        for _ in 0..100 {
            let fx = self.partial(cell, x) - target;
            if fx.abs() < 1e-16 {
                break;
            }
            if fx > 0.0 {
                b = x;
            } else {
                a = x;
            }
            if b - a < 1e-14 * (1.0 + x.abs()) {
                break;
            }
            let slope = self.raw_inside(x, cell_lo) / self.norm;
            let newton = x - fx / slope;
            x = if slope > 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
        }
        x
    }
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
    let m = 0.5 * (a + b);
    let fm = f(m);
    (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        m: f64,
        fm: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    let (fa, fb) = (f(a), f(b));
    let (m, fm, whole) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, m, fm, whole, tol, 40)
}

const GL8_NODES: [f64; 4] = [0.183_434_642_495_649_8, 0.525_532_409_916_329, 0.796_666_477_413_626_7, 0.960_289_856_497_536_3];
const GL8_WEIGHTS: [f64; 4] = [0.362_683_783_378_362, 0.313_706_645_877_887_3, 0.222_381_034_453_374_5, 0.101_228_536_290_376_3];

fn gauss_legendre_8(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    half * GL8_NODES
        .iter()
        .zip(GL8_WEIGHTS)
        .map(|(&t, w)| w * (f(mid - half * t) + f(mid + half * t)))
        .sum::<f64>()
}
