//! Shared numeric helpers.

pub const INF: f64 = f64::INFINITY;

/// Relative tolerance used by verification checks, never by the algorithms.
pub const REL_TOL: f64 = 1e-9;

/// `a ≤ b` up to a relative rounding allowance.
pub fn leq(a: f64, b: f64) -> bool {
    if a <= b {
        return true;
    }
    if !a.is_finite() || !b.is_finite() {
        return false;
    }
    a - b <= REL_TOL * a.abs().max(b.abs()).max(1.0)
}

pub fn approx_eq(a: f64, b: f64) -> bool {
    leq(a, b) && leq(b, a)
}
