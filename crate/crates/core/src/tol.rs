//! Floating point comparison policy shared by every module.
//!
//! All comparisons use a relative tolerance of `1e-9` with an absolute
//! floor of `1e-12`.

pub const REL_TOL: f64 = 1e-9;
pub const ABS_TOL: f64 = 1e-12;

/// Tolerance band for quantities of magnitude `scale`.
#[inline]
pub fn eps(scale: f64) -> f64 {
    (REL_TOL * scale.abs()).max(ABS_TOL)
}

#[inline]
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= eps(a.abs().max(b.abs()))
}

#[inline]
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b + eps(a.abs().max(b.abs()))
}

/// `a < b` with a strict margin: values within tolerance of `b` count as
/// on the boundary and are excluded.
#[inline]
pub fn strictly_less(a: f64, b: f64) -> bool {
    a < b - eps(a.abs().max(b.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_band() {
        assert!(approx_eq(1.0, 1.0 + 5e-10));
        assert!(!approx_eq(1.0, 1.0 + 5e-9));
        assert!(approx_eq(0.0, 1e-13));
        assert!(approx_le(2.0 + 1e-10, 2.0));
        assert!(!strictly_less(2.0 - 1e-10, 2.0));
        assert!(strictly_less(1.9, 2.0));
    }
}
