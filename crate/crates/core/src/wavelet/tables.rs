use std::io::Write;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use super::filter::WaveletFilter;
use crate::error::{Error, Result};
use crate::scalar::{trapezoid, Real};

/// Default table depth: values on the grid `m * 2^-14`.
pub const DEFAULT_DEPTH: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Phi,
    Psi,
}

/// Scaling function and wavelet sampled on a dyadic grid.
///
/// The tables hold `phi(m / 2^J)` and `psi(m / 2^J)` for `m = 0..=(2N-1) 2^J`,
/// i.e. over the natural support `[0, 2N-1]`. Evaluation shifts by the integer
/// `N - 1`, so the functions seen by callers are supported on `[-(N-1), N]`.
/// An integer shift keeps the nesting of the multiresolution spaces intact.
#[derive(Debug, Clone)]
pub struct WaveletTables<T> {
    filter: WaveletFilter<T>,
    depth: u32,
    shift: i64,
    phi: Vec<T>,
    psi: Vec<T>,
}

impl<T: Real> WaveletTables<T> {
    /// Runs the cascade iteration to depth `J`.
    pub fn cascade(filter: &WaveletFilter<T>, depth: u32) -> Result<Self> {
        if depth < 4 {
            return Err(Error::InvalidParameter(format!("table depth must be at least 4, got {depth}")));
        }
        if depth > 24 {
            return Err(Error::InvalidParameter(format!("table depth {depth} exceeds 24")));
        }
        let h: Vec<f64> = filter.low_pass().iter().map(|v| v.as_f64()).collect();
        let g: Vec<f64> = filter.high_pass().iter().map(|v| v.as_f64()).collect();
        let phi = cascade_phi(&h, depth);
        let psi = wavelet_from_phi(&g, &phi, depth);
        Ok(Self {
            filter: filter.clone(),
            depth,
            shift: filter.vanishing_moments() as i64 - 1,
            phi: phi.into_iter().map(T::of).collect(),
            psi: psi.into_iter().map(T::of).collect(),
        })
    }

    pub fn filter(&self) -> &WaveletFilter<T> {
        &self.filter
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Grid points per unit length, `2^J`.
    pub fn resolution(&self) -> usize {
        1usize << self.depth
    }

    /// `2N - 1`.
    pub fn support_len(&self) -> usize {
        self.filter.support_len()
    }

    /// Support of the evaluated (shifted) functions, `[-(N-1), N]`.
    pub fn support(&self) -> (i64, i64) {
        (-self.shift, self.support_len() as i64 - self.shift)
    }

    /// Smallest `A` with both supports inside `[-A, A]`.
    pub fn support_halfwidth(&self) -> T {
        let (lo, hi) = self.support();
        T::of(lo.abs().max(hi) as f64)
    }

    pub fn values(&self, kind: Kind) -> &[T] {
        match kind {
            Kind::Phi => &self.phi,
            Kind::Psi => &self.psi,
        }
    }

    /// Abscissa of table entry `m` in shifted coordinates.
    pub fn abscissa(&self, m: usize) -> T {
        T::of(m as f64 / self.resolution() as f64 - self.shift as f64)
    }

    /// Mother function at `t` (shifted coordinates), snapped to the nearest grid point.
    #[inline]
    pub fn mother(&self, kind: Kind, t: T) -> T {
        let u = t + T::of(self.shift as f64);
        let len = T::of_usize(self.support_len());
        if !(u >= T::zero() && u <= len) {
            return T::zero();
        }
        let idx = (u * T::of_usize(self.resolution())).round().to_usize().unwrap_or(0);
        let table = self.values(kind);
        table[idx.min(table.len() - 1)]
    }

    /// `2^{j/2} f(2^j x - k)` with `f` the scaling function or the wavelet.
    #[inline]
    pub fn eval(&self, kind: Kind, j: u32, k: i64, x: T) -> T {
        let scale = T::of(2f64.powi(j as i32));
        scale.sqrt() * self.mother(kind, scale * x - T::of(k as f64))
    }

    /// Translates `k` at level `j` whose support contains `x`.
    #[inline]
    pub fn translates_at(&self, j: u32, x: T) -> RangeInclusive<i64> {
        let t = (T::of(2f64.powi(j as i32)) * x).as_f64() + self.shift as f64;
        let lo = (t - self.support_len() as f64).ceil() as i64;
        let hi = t.floor() as i64;
        lo..=hi
    }

    /// Translates at level `j` whose support meets `[lo, hi]` in a set of positive length.
    pub fn translates_over(&self, j: u32, lo: T, hi: T) -> RangeInclusive<i64> {
        let scale = 2f64.powi(j as i32);
        let shift = self.shift as f64;
        let first = (scale * lo.as_f64() + shift - self.support_len() as f64).floor() as i64 + 1;
        let last = (scale * hi.as_f64() + shift).ceil() as i64 - 1;
        first..=last
    }

    /// Trapezoid integral of a table.
    pub fn integral(&self, kind: Kind) -> T {
        trapezoid(self.values(kind), T::one() / T::of_usize(self.resolution()))
    }

    /// `<a(. ), b(. - k)>` by trapezoid quadrature on the table grid.
    pub fn inner_product(&self, a: Kind, b: Kind, k: i64) -> T {
        let res = self.resolution() as i64;
        let ta = self.values(a);
        let tb = self.values(b);
        let last = ta.len() as i64 - 1;
        let offset = k * res;
        let products: Vec<T> = (0..=last)
            .map(|m| {
                let mb = m - offset;
                if (0..=last).contains(&mb) {
                    ta[m as usize] * tb[mb as usize]
                } else {
                    T::zero()
                }
            })
            .collect();
        trapezoid(&products, T::one() / T::of_usize(self.resolution()))
    }

    /// Writes `x,phi,psi` rows in shifted coordinates.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "x,phi,psi")?;
        for m in 0..self.phi.len() {
            writeln!(out, "{},{},{}", self.abscissa(m), self.phi[m], self.psi[m])?;
        }
        Ok(())
    }
}

/// Values of the scaling function at the integers `0..=L`.
fn integer_values(h: &[f64]) -> Vec<f64> {
    let len = h.len() - 1;
    // phi(L) vanishes for every orthonormal filter (right-continuous Haar included),
    // so the eigen-system lives on 0..L.
    let size = len;
    let tap = |i: i64| -> f64 {
        if (0..h.len() as i64).contains(&i) {
            h[i as usize]
        } else {
            0.0
        }
    };
    let mut a = vec![vec![0.0; size]; size];
    for (k, row) in a.iter_mut().enumerate() {
        for (l, entry) in row.iter_mut().enumerate() {
            *entry = std::f64::consts::SQRT_2 * tap(2 * k as i64 - l as i64);
            if k == l {
                *entry -= 1.0;
            }
        }
    }
    // Columns of the refinement matrix sum to one, so any row of (M - I) is
    // redundant; replace the last by the normalization sum phi(k) = 1.
    let mut b = vec![0.0; size];
    a[size - 1].iter_mut().for_each(|v| *v = 1.0);
    b[size - 1] = 1.0;
    let mut values = solve_dense(a, b);
    values.push(0.0);
    values
}

/// Gaussian elimination with partial pivoting.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&r, &s| a[r][col].abs().total_cmp(&a[s][col].abs()))
            .expect("nonempty");
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col];
        for row in col + 1..n {
            let factor = a[row][col] / p;
            if factor != 0.0 {
                for c in col..n {
                    a[row][c] -= factor * a[col][c];
                }
                b[row] -= factor * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for row in (0..n).rev() {
        let tail: f64 = (row + 1..n).map(|c| a[row][c] * x[c]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x
}

fn cascade_phi(h: &[f64], depth: u32) -> Vec<f64> {
    let len = h.len() - 1;
    let res = 1usize << depth;
    let mut phi = vec![0.0; len * res + 1];
    for (k, v) in integer_values(h).into_iter().enumerate() {
        phi[k * res] = v;
    }
    for level in 1..=depth {
        let step = 1usize << (depth - level);
        let mut m = step;
        while m < phi.len() {
            // phi(x) = sqrt2 sum_i h_i phi(2x - i); 2x - i sits on the coarser grid.
            let mut acc = 0.0;
            for (i, &hi) in h.iter().enumerate() {
                let idx = 2 * m as i64 - (i * res) as i64;
                if idx >= 0 && (idx as usize) < phi.len() {
                    acc += hi * phi[idx as usize];
                }
            }
            phi[m] = std::f64::consts::SQRT_2 * acc;
            m += 2 * step;
        }
    }
    phi
}

fn wavelet_from_phi(g: &[f64], phi: &[f64], depth: u32) -> Vec<f64> {
    let res = 1usize << depth;
    (0..phi.len())
        .map(|m| {
            let acc: f64 = g
                .iter()
                .enumerate()
                .filter_map(|(i, &gi)| {
                    let idx = 2 * m as i64 - (i * res) as i64;
                    (idx >= 0 && (idx as usize) < phi.len()).then(|| gi * phi[idx as usize])
                })
                .sum();
            std::f64::consts::SQRT_2 * acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelet::Family;

    fn haar(depth: u32) -> WaveletTables<f64> {
        WaveletTables::cascade(&WaveletFilter::haar(), depth).unwrap()
    }

    fn sym8(depth: u32) -> WaveletTables<f64> {
        WaveletTables::cascade(&WaveletFilter::build(Family::Symmlet, 8).unwrap(), depth).unwrap()
    }

    #[test]
    fn haar_tables_are_box_and_step() {
        let t = haar(4);
        assert_eq!(t.values(Kind::Phi).len(), 17);
        for m in 0..16 {
            assert!((t.values(Kind::Phi)[m] - 1.0).abs() < 1e-14, "phi[{m}]");
            let want = if m < 8 { 1.0 } else { -1.0 };
            assert!((t.values(Kind::Psi)[m] - want).abs() < 1e-14, "psi[{m}]");
        }
    }

    #[test]
    fn haar_point_values() {
        let t = haar(DEFAULT_DEPTH);
        assert!((t.eval(Kind::Phi, 0, 0, 0.3) - 1.0).abs() < 1e-14);
        assert!((t.eval(Kind::Psi, 1, 0, 0.1) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(t.eval(Kind::Phi, 0, 0, -0.01), 0.0);
        assert_eq!(t.eval(Kind::Phi, 0, 0, 1.2), 0.0);
    }

    #[test]
    fn table_length_and_support() {
        let t = sym8(10);
        assert_eq!(t.values(Kind::Phi).len(), 15 * 1024 + 1);
        assert_eq!(t.support(), (-7, 8));
        assert_eq!(t.support_halfwidth(), 8.0);
    }

    #[test]
    fn depth_below_four_is_rejected() {
        assert!(WaveletTables::cascade(&WaveletFilter::<f64>::haar(), 3).is_err());
    }

    #[test]
    fn sym8_quadrature() {
        let t = sym8(12);
        assert!((t.integral(Kind::Phi) - 1.0).abs() < 1e-6);
        assert!(t.integral(Kind::Psi).abs() < 1e-6);
    }

    #[test]
    fn translates_cover_exactly_the_support() {
        let t = sym8(10);
        let x = 0.3;
        for j in 0..6 {
            let range = t.translates_at(j, x);
            for k in range.start() - 3..=range.end() + 3 {
                let inside = range.contains(&k);
                let u = 2f64.powi(j as i32) * x - k as f64;
                assert_eq!(inside, (-7.0..=8.0).contains(&u), "j={j} k={k}");
            }
        }
    }

    #[test]
    fn float_tables_agree_with_double() {
        let f32t = WaveletTables::<f32>::cascade(&WaveletFilter::build(Family::Symmlet, 4).unwrap(), 10).unwrap();
        let f64t = WaveletTables::<f64>::cascade(&WaveletFilter::build(Family::Symmlet, 4).unwrap(), 10).unwrap();
        for x in [0.1, 0.37, 0.5, 0.91] {
            let a = f32t.eval(Kind::Psi, 2, 1, x as f32) as f64;
            let b = f64t.eval(Kind::Psi, 2, 1, x);
            assert!((a - b).abs() < 1e-4, "{a} vs {b}");
        }
    }
}
