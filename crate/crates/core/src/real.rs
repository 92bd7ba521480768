//! Scalar abstraction shared by the `f64` pipeline and the double-double
//! refinement path.

use std::fmt::Debug;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use twofloat::TwoFloat;

/// Double-double scalar (~106-bit significand).
///
/// Wraps [`TwoFloat`] for its sums, products and square roots; division is
/// done here by long division so that the quotient keeps its low word.
#[derive(Debug, Clone, Copy, Default, PartialEq, PartialOrd)]
pub struct DoubleDouble(TwoFloat);

impl DoubleDouble {
    pub fn hi(self) -> f64 {
        self.0.hi()
    }

    pub fn lo(self) -> f64 {
        self.0.lo()
    }
}

macro_rules! forward_op {
    ($tr:ident, $f:ident, $atr:ident, $af:ident) => {
        impl $tr for DoubleDouble {
            type Output = Self;
            fn $f(self, rhs: Self) -> Self {
                DoubleDouble(self.0.$f(rhs.0))
            }
        }
        impl $atr for DoubleDouble {
            fn $af(&mut self, rhs: Self) {
                *self = $tr::$f(*self, rhs);
            }
        }
    };
}

forward_op!(Add, add, AddAssign, add_assign);
forward_op!(Sub, sub, SubAssign, sub_assign);
forward_op!(Mul, mul, MulAssign, mul_assign);

impl Div for DoubleDouble {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        let (a, b) = (self.0, rhs.0);
        let q1 = a.hi() / b.hi();
        let r = a - b * q1;
        let q2 = r.hi() / b.hi();
        let r = r - b * q2;
        let q3 = r.hi() / b.hi();
        DoubleDouble(TwoFloat::new_add(q1, q2) + q3)
    }
}

impl DivAssign for DoubleDouble {
    fn div_assign(&mut self, rhs: Self) {
        *self = *self / rhs;
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    fn neg(self) -> Self {
        DoubleDouble(-self.0)
    }
}

/// Real field operations needed by quadrature, spline evaluation and assembly.
pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
{
    /// Convergence tolerance for Newton iterations on polynomial roots.
    const NEWTON_TOL: f64;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn pi() -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    /// Exact ratio `num / den` of two integers, rounded once in the target precision.
    fn ratio(num: usize, den: usize) -> Self {
        Self::from_usize(num) / Self::from_usize(den)
    }
}

impl Real for f64 {
    const NEWTON_TOL: f64 = 1e-15;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
}

impl Real for DoubleDouble {
    const NEWTON_TOL: f64 = 1e-30;

    fn from_f64(x: f64) -> Self {
        DoubleDouble(TwoFloat::from(x))
    }
    fn to_f64(self) -> f64 {
        f64::from(self.0)
    }
    fn sqrt(self) -> Self {
        DoubleDouble(self.0.sqrt())
    }
    fn abs(self) -> Self {
        DoubleDouble(self.0.abs())
    }
    fn pi() -> Self {
        DoubleDouble(twofloat::consts::PI)
    }
}
