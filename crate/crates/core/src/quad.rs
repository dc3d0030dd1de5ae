//! Adaptive Simpson quadrature, with helpers for integrable square-root
//! endpoint singularities via the substitution `s = a + xi^2`.

use crate::error::{CtError, Result};

/// Adaptive Simpson rule with Richardson acceptance.
pub fn adaptive_simpson<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    if a == b {
        return Ok(0.0);
    }
    let fa = f(a);
    let fm = f(0.5 * (a + b));
    let fb = f(b);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let mut depth_exceeded = false;
    let v = simpson_rec(
        &f,
        a,
        b,
        fa,
        fm,
        fb,
        whole,
        tol,
        60,
        &mut depth_exceeded,
    );
    if depth_exceeded {
        Err(CtError::Quadrature(format!(
            "adaptive Simpson recursion exhausted on [{a}, {b}]"
        )))
    } else {
        Ok(v)
    }
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
    depth_exceeded: &mut bool,
) -> f64
where
    F: Fn(f64) -> f64,
{
    // A non-finite integrand cannot be refined away; bail before the
    // recursion branches on it.
    if !fa.is_finite() || !fm.is_finite() || !fb.is_finite() || !whole.is_finite() {
        return whole;
    }
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.abs() <= 15.0 * tol || (b - a).abs() < 1e-14 * (b.abs() + a.abs() + 1.0) {
        return left + right + delta / 15.0;
    }
    if depth == 0 {
        *depth_exceeded = true;
        return left + right;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, depth_exceeded)
        + simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, depth_exceeded)
}

/// Computes `integral of w(s) ds` over `[a, b]` where `w(s) = 1/sqrt(q(s))`
/// and `q` has a simple zero at the endpoint `a` with `q'(a) = qp_a > 0`.
///
/// The substitution `s = a + xi^2` turns the integrand into
/// `2 xi / sqrt(q(a + xi^2))`, which is finite at `xi = 0` with limit
/// `2 / sqrt(qp_a)`.
pub fn integral_inv_sqrt_left<Q>(q: Q, a: f64, b: f64, qp_a: f64, tol: f64) -> Result<f64>
where
    Q: Fn(f64) -> f64,
{
    if !(qp_a > 0.0) {
        return Err(CtError::Quadrature(
            "left endpoint derivative must be positive".into(),
        ));
    }
    let xi_max = (b - a).sqrt();
    adaptive_simpson(
        |xi| {
            if xi == 0.0 {
                2.0 / qp_a.sqrt()
            } else {
                let qs = q(a + xi * xi).max(0.0);
                if qs == 0.0 {
                    2.0 / qp_a.sqrt()
                } else {
                    2.0 * xi / qs.sqrt()
                }
            }
        },
        0.0,
        xi_max,
        tol,
    )
}

/// Mirror of [`integral_inv_sqrt_left`] for a simple zero of `q` at the right
/// endpoint `b` with `q'(b) = qp_b < 0`.
pub fn integral_inv_sqrt_right<Q>(q: Q, a: f64, b: f64, qp_b: f64, tol: f64) -> Result<f64>
where
    Q: Fn(f64) -> f64,
{
    if !(qp_b < 0.0) {
        return Err(CtError::Quadrature(
            "right endpoint derivative must be negative".into(),
        ));
    }
    let xi_max = (b - a).sqrt();
    adaptive_simpson(
        |xi| {
            if xi == 0.0 {
                2.0 / (-qp_b).sqrt()
            } else {
                let qs = q(b - xi * xi).max(0.0);
                if qs == 0.0 {
                    2.0 / (-qp_b).sqrt()
                } else {
                    2.0 * xi / qs.sqrt()
                }
            }
        },
        0.0,
        xi_max,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_polynomials_exactly() {
        let v = adaptive_simpson(|x| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((v - 4.0).abs() < 1e-12);
    }

    #[test]
    fn integrates_smooth_transcendental() {
        let v = adaptive_simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-10);
    }

    /// integral of 1/sqrt(s(2-s)) over [0,2] = pi, singular at both ends.
    #[test]
    fn sqrt_singularity_split() {
        let q = |s: f64| s * (2.0 - s);
        let left = integral_inv_sqrt_left(q, 0.0, 1.0, 2.0, 1e-12).unwrap();
        let right = integral_inv_sqrt_right(q, 1.0, 2.0, -2.0, 1e-12).unwrap();
        assert!((left + right - std::f64::consts::PI).abs() < 1e-9);
    }
}
