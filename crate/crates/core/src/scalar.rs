use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar used throughout the estimators: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; tables and constants are stored in double precision.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    fn of_usize(x: usize) -> Self {
        Self::from_usize(x).expect("usize is representable in every Real")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Composite trapezoid rule on a uniform grid with spacing `dx`.
pub fn trapezoid<T: Real>(values: &[T], dx: T) -> T {
    match values.len() {
        0 | 1 => T::zero(),
        len => {
            let interior: T = values[1..len - 1].iter().copied().sum();
            dx * (interior + (values[0] + values[len - 1]) * T::of(0.5))
        }
    }
}
