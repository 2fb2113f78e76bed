use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, MulAssign};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Floating-point scalar the numeric layers are generic over (`f32` or `f64`).
pub trait Real:
    Float + FloatConst + FromPrimitive + AddAssign + MulAssign + Debug + Display + Sum + Send + Sync + Default + 'static
{
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("finite literal")
    }
}

impl<T> Real for T where
    T: Float + FloatConst + FromPrimitive + AddAssign + MulAssign + Debug + Display + Sum + Send + Sync + Default + 'static
{
}

/// Neumaier-compensated sum; exact enumerations add up millions of terms.
pub fn compensated_sum<F: Real>(items: impl IntoIterator<Item = F>) -> F {
    let (mut s, mut c) = (F::zero(), F::zero());
    for x in items {
        let t = s + x;
        if s.abs() >= x.abs() {
            c += (s - t) + x;
        } else {
            c += (x - t) + s;
        }
        s = t;
    }
    s + c
}
