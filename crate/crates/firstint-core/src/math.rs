//! Float intrinsics behind one seam so the crate builds with `std` or `libm`.
//!
//! `int_pow` is hand-rolled (square-and-multiply) instead of `f64::powi` so
//! that results are bit-identical across both backends.

#[cfg(feature = "std")]
mod backend {
    pub fn sqrt(v: f64) -> f64 {
        v.sqrt()
    }
    pub fn exp(v: f64) -> f64 {
        v.exp()
    }
    pub fn ln(v: f64) -> f64 {
        v.ln()
    }
    pub fn sin(v: f64) -> f64 {
        v.sin()
    }
    pub fn cos(v: f64) -> f64 {
        v.cos()
    }
    pub fn pow(base: f64, exp: f64) -> f64 {
        base.powf(exp)
    }
    pub fn trunc(v: f64) -> f64 {
        v.trunc()
    }
}

#[cfg(all(not(feature = "std"), feature = "libm"))]
mod backend {
    pub fn sqrt(v: f64) -> f64 {
        libm::sqrt(v)
    }
    pub fn exp(v: f64) -> f64 {
        libm::exp(v)
    }
    pub fn ln(v: f64) -> f64 {
        libm::log(v)
    }
    pub fn sin(v: f64) -> f64 {
        libm::sin(v)
    }
    pub fn cos(v: f64) -> f64 {
        libm::cos(v)
    }
    pub fn pow(base: f64, exp: f64) -> f64 {
        libm::pow(base, exp)
    }
    pub fn trunc(v: f64) -> f64 {
        libm::trunc(v)
    }
}

pub use backend::{cos, exp, ln, pow, sin, sqrt};

/// True when `v` is a finite mathematical integer.
pub fn is_integer(v: f64) -> bool {
    v.is_finite() && backend::trunc(v) == v
}

/// `base^exp` for integer exponents by binary exponentiation.
///
/// `int_pow(0.0, 0) == 1.0`; negative exponents go through the reciprocal, so
/// `int_pow(0.0, -k)` yields infinity (callers treat non-finite as a domain
/// error).
pub fn int_pow(base: f64, exp: i32) -> f64 {
    let mut e = exp.unsigned_abs();
    let mut acc = 1.0f64;
    let mut b = base;
    while e > 0 {
        if e & 1 == 1 {
            acc *= b;
        }
        b *= b;
        e >>= 1;
    }
    if exp < 0 {
        1.0 / acc
    } else {
        acc
    }
}
