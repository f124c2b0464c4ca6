use std::fmt::Debug;
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, Signed};

/// Entry type of a [`Matrix`](crate::numkernel::Matrix): anything with ring
/// arithmetic, including exact integers.
pub trait Scalar:
    Copy + PartialEq + PartialOrd + Debug + Default + NumAssign + Signed + Send + Sync + 'static
{
}

impl<T> Scalar for T where
    T: Copy + PartialEq + PartialOrd + Debug + Default + NumAssign + Signed + Send + Sync + 'static
{
}

/// Floating-point scalar used by the numeric kernels.
pub trait Real: Scalar + Float + FromPrimitive + Sum {
    /// Convert a literal; every literal used by the kernels is representable.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    /// Relative eigen-solver threshold: `1e-13`, or ten ulps when the type is
    /// coarser than that.
    fn jacobi_tol() -> Self {
        let floor = Self::lit(1e-13);
        let ten_eps = Self::epsilon() * Self::lit(10.0);
        if ten_eps > floor {
            ten_eps
        } else {
            floor
        }
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}
