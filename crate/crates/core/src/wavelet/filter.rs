use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::taps::{DAUBECHIES, SYMLETS};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Daubechies,
    Symmlet,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Daubechies => f.write_str("daubechies"),
            Family::Symmlet => f.write_str("symmlet"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "daubechies" | "db" => Ok(Family::Daubechies),
            "symmlet" | "sym" => Ok(Family::Symmlet),
            other => Err(Error::InvalidParameter(format!("unknown wavelet family `{other}`"))),
        }
    }
}

/// Orthonormal low-pass filter with `2N` taps.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter<T> {
    family: Family,
    vanishing_moments: u32,
    low_pass: Vec<T>,
}

impl<T: Real> WaveletFilter<T> {
    /// Looks up the embedded filter. Daubechies filters exist for `N` in 1..=10,
    /// symmlets for `N` in 2..=10.
    pub fn build(family: Family, vanishing_moments: u32) -> Result<Self> {
        let n = vanishing_moments as usize;
        let taps = match family {
            Family::Daubechies if (1..=10).contains(&n) => DAUBECHIES[n - 1],
            Family::Symmlet if (2..=10).contains(&n) => SYMLETS[n - 2],
            _ => {
                return Err(Error::UnsupportedFilter {
                    family: family.to_string(),
                    vanishing_moments,
                })
            }
        };
        Ok(Self {
            family,
            vanishing_moments,
            low_pass: taps.iter().map(|&h| T::of(h)).collect(),
        })
    }

    pub fn haar() -> Self {
        Self::build(Family::Daubechies, 1).expect("haar is embedded")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn vanishing_moments(&self) -> u32 {
        self.vanishing_moments
    }

    pub fn low_pass(&self) -> &[T] {
        &self.low_pass
    }

    /// Quadrature mirror filter `g_m = (-1)^m h_{2N-1-m}`.
    pub fn high_pass(&self) -> Vec<T> {
        let len = self.low_pass.len();
        (0..len)
            .map(|m| {
                let h = self.low_pass[len - 1 - m];
                if m % 2 == 0 {
                    h
                } else {
                    -h
                }
            })
            .collect()
    }

    /// Length of the support of the scaling function, `2N - 1`.
    pub fn support_len(&self) -> usize {
        self.low_pass.len() - 1
    }

    /// Largest violation of `sum_m h_m h_{m+2l} = delta_{l,0}` over all shifts.
    pub fn orthonormality_defect(&self) -> f64 {
        let h: Vec<f64> = self.low_pass.iter().map(|v| v.as_f64()).collect();
        let len = h.len();
        (0..len.div_ceil(2))
            .map(|l| {
                let dot: f64 = (0..len - 2 * l).map(|m| h[m] * h[m + 2 * l]).sum();
                let target = if l == 0 { 1.0 } else { 0.0 };
                (dot - target).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn coefficient_sum(&self) -> T {
        self.low_pass.iter().copied().sum()
    }

    /// Same taps at another precision.
    pub fn cast<U: Real>(&self) -> WaveletFilter<U> {
        WaveletFilter {
            family: self.family,
            vanishing_moments: self.vanishing_moments,
            low_pass: self.low_pass.iter().map(|h| U::of(h.as_f64())).collect(),
        }
    }
}
