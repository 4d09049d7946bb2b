//! Thin wrappers over `libm` so the rest of the crate reads like std code.

#[inline]
pub fn ln(x: f64) -> f64 {
    libm::log(x)
}

#[inline]
pub fn exp(x: f64) -> f64 {
    libm::exp(x)
}

#[inline]
pub fn sqrt(x: f64) -> f64 {
    libm::sqrt(x)
}

#[inline]
pub fn powi(x: f64, n: i32) -> f64 {
    libm::pow(x, n as f64)
}

#[inline]
pub fn abs(x: f64) -> f64 {
    libm::fabs(x)
}

/// `-p ln p` with the convention `0 ln 0 = 0`.
#[inline]
pub fn neg_p_ln_p(p: f64) -> f64 {
    if p > 0.0 {
        -p * ln(p)
    } else {
        0.0
    }
}

#[inline]
pub fn ceil(x: f64) -> f64 {
    libm::ceil(x)
}
