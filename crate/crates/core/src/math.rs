//! Float functions that work with and without `std`.

use num_traits::Float;

#[inline]
pub(crate) fn sqrt(x: f64) -> f64 {
    Float::sqrt(x)
}

#[inline]
pub(crate) fn powi(x: f64, n: i32) -> f64 {
    Float::powi(x, n)
}

#[inline]
pub(crate) fn ln(x: f64) -> f64 {
    Float::ln(x)
}

#[inline]
pub(crate) fn exp(x: f64) -> f64 {
    Float::exp(x)
}

#[inline]
pub(crate) fn ceil(x: f64) -> f64 {
    Float::ceil(x)
}

#[inline]
pub(crate) fn sin_cos(x: f64) -> (f64, f64) {
    Float::sin_cos(x)
}

/// `x^k` for a non-negative integer exponent, saturating to infinity.
pub(crate) fn pow_u(x: f64, k: u32) -> f64 {
    match i32::try_from(k) {
        Ok(k) => powi(x, k),
        Err(_) => Float::powf(x, k as f64),
    }
}

/// `|z|`; `Complex::norm` needs `std`.
#[inline]
pub(crate) fn abs(z: crate::c64) -> f64 {
    sqrt(z.norm_sqr())
}
