//! Scalar abstraction shared by every numeric module.
//!
//! All geometry, parameter derivation and simulation code is written against
//! [`Scalar`], so the same strategy can run in plain `f64` or in double-double
//! arithmetic when the parameter cascade shrinks below what `f64` resolves.

use std::fmt::{Debug, Display, LowerExp};

use num_traits::{FromPrimitive, Num, NumCast, Signed, ToPrimitive};
use twofloat::TwoFloat;

/// A real number type usable by the simulator.
pub trait Scalar:
    Num
    + NumCast
    + Signed
    + FromPrimitive
    + ToPrimitive
    + Copy
    + PartialOrd
    + Debug
    + Display
    + LowerExp
    + Send
    + Sync
    + 'static
{
    /// Short identifier written into manifests ("f64", "double-double").
    const NAME: &'static str;

    fn of(value: f64) -> Self;
    fn as_f64(self) -> f64;

    fn sqrt(self) -> Self;
    fn sin(self) -> Self;
    fn cos(self) -> Self;
    fn tan(self) -> Self;
    fn atan2(self, other: Self) -> Self;
    fn asin(self) -> Self;
    fn acos(self) -> Self;
    fn floor(self) -> Self;
    fn ceil(self) -> Self;
    fn round(self) -> Self;
    fn is_finite(self) -> bool;

    fn pi() -> Self;

    /// Distance from `|self|` to the next representable magnitude.
    fn ulp(self) -> Self;

    /// Lossless text encoding used by the extended-precision trace sidecar.
    fn to_hex(self) -> String;
    fn from_hex(text: &str) -> Option<Self>;

    fn two_pi() -> Self {
        Self::pi() + Self::pi()
    }

    fn half() -> Self {
        Self::of(0.5)
    }

    fn of_usize(value: usize) -> Self {
        <Self as NumCast>::from(value).expect("usize is representable")
    }

    fn of_u64(value: u64) -> Self {
        <Self as NumCast>::from(value).expect("u64 is representable")
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn hypot(self, other: Self) -> Self {
        (self * self + other * other).sqrt()
    }

    /// Floor as an integer; `None` for negative or non-finite input.
    fn floor_u64(self) -> Option<u64> {
        if !self.is_finite() || self < Self::zero() {
            return None;
        }
        self.floor().to_u64()
    }
}

fn tf(value: f64) -> TwoFloat {
    <TwoFloat as From<f64>>::from(value)
}

fn f64_hex(value: f64) -> String {
    format!("{:016x}", value.to_bits())
}

fn f64_from_hex(text: &str) -> Option<f64> {
    u64::from_str_radix(text.trim(), 16)
        .ok()
        .map(f64::from_bits)
}

impl Scalar for f64 {
    const NAME: &'static str = "f64";

    fn of(value: f64) -> Self {
        value
    }
    fn as_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn sin(self) -> Self {
        f64::sin(self)
    }
    fn cos(self) -> Self {
        f64::cos(self)
    }
    fn tan(self) -> Self {
        f64::tan(self)
    }
    fn atan2(self, other: Self) -> Self {
        f64::atan2(self, other)
    }
    fn asin(self) -> Self {
        f64::asin(self)
    }
    fn acos(self) -> Self {
        f64::acos(self)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
    fn ceil(self) -> Self {
        f64::ceil(self)
    }
    fn round(self) -> Self {
        f64::round(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn ulp(self) -> Self {
        let a = self.abs();
        a.next_up() - a
    }
    fn to_hex(self) -> String {
        f64_hex(self)
    }
    fn from_hex(text: &str) -> Option<Self> {
        f64_from_hex(text)
    }
}

/// Double-double scalar (about 106 significant bits).
///
/// Arithmetic and `sqrt` are exact to about 1e-32 relative. The
/// transcendental functions from `twofloat` are good to a few 1e-17
/// absolute; its own `asin`/`acos` are worse (about 1e-15), so both are
/// rebuilt here from `atan2`. Coordinates only pass through arithmetic and
/// `sqrt`; angles stay O(1) quantities where 1e-16 is ample.
impl Scalar for TwoFloat {
    const NAME: &'static str = "double-double";

    fn of(value: f64) -> Self {
        tf(value)
    }
    fn as_f64(self) -> f64 {
        self.hi() + self.lo()
    }
    fn sqrt(self) -> Self {
        TwoFloat::sqrt(self)
    }
    fn sin(self) -> Self {
        TwoFloat::sin(self)
    }
    fn cos(self) -> Self {
        TwoFloat::cos(self)
    }
    fn tan(self) -> Self {
        TwoFloat::tan(self)
    }
    fn atan2(self, other: Self) -> Self {
        if self == tf(0.0) && other == tf(0.0) {
            return tf(0.0);
        }
        TwoFloat::atan2(self, other)
    }
    fn asin(self) -> Self {
        let one = tf(1.0);
        let c = ((one - self) * (one + self)).max(tf(0.0));
        Scalar::atan2(self, Scalar::sqrt(c))
    }
    fn acos(self) -> Self {
        let one = tf(1.0);
        let s = ((one - self) * (one + self)).max(tf(0.0));
        Scalar::atan2(Scalar::sqrt(s), self)
    }
    fn floor(self) -> Self {
        TwoFloat::floor(self)
    }
    fn ceil(self) -> Self {
        TwoFloat::ceil(self)
    }
    fn round(self) -> Self {
        TwoFloat::round(self)
    }
    fn is_finite(self) -> bool {
        self.is_valid()
    }
    fn pi() -> Self {
        twofloat::consts::PI
    }
    fn ulp(self) -> Self {
        // 2^-53 times the leading limb's ulp.
        tf(Scalar::ulp(self.hi()) * f64::EPSILON * 0.5)
    }
    fn to_hex(self) -> String {
        format!("{}:{}", f64_hex(self.hi()), f64_hex(self.lo()))
    }
    fn from_hex(text: &str) -> Option<Self> {
        let (hi, lo) = text.split_once(':')?;
        TwoFloat::try_from((f64_from_hex(hi)?, f64_from_hex(lo)?)).ok()
    }
}

/// Relative difference `|a - b| / max(|b|, tiny)`.
pub fn rel_diff<S: Scalar>(a: S, b: S) -> S {
    let scale = b.abs().max(S::of(f64::MIN_POSITIVE));
    (a - b).abs() / scale
}
