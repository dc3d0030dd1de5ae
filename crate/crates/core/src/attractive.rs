//! Attractive forcing: eigen-analysis and exact solution of the
//! constant-background system, variable-background threshold lines, and the
//! neutrality-forced borderline residual check.

use serde::{Deserialize, Serialize};

use crate::error::{CtError, Result};
use crate::params::{validate_params, CaseTag, ForceSign, Params, PhasePoint, Verdict, VerdictLabel};

/// Eigen-structure of the linearization around the equilibrium `(0, 1/c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenData {
    pub lambda_s: f64,
    pub lambda_u: f64,
}

impl EigenData {
    /// Stable eigenvector `(lambda_s, 1)`.
    pub fn x_s(&self) -> (f64, f64) {
        (self.lambda_s, 1.0)
    }

    /// Unstable eigenvector `(lambda_u, 1)`.
    pub fn x_u(&self) -> (f64, f64) {
        (self.lambda_u, 1.0)
    }
}

/// `lambda_{s,u} = (-nu -+ sqrt(nu^2 + 4c)) / 2`.
pub fn eigensystem(nu: f64, c_bar: f64) -> EigenData {
    let disc = (nu * nu + 4.0 * c_bar).sqrt();
    EigenData {
        lambda_s: 0.5 * (-nu - disc),
        lambda_u: 0.5 * (-nu + disc),
    }
}

/// Exact solution of the attractive constant-background system via the
/// exponential evolution of the Lyapunov coordinates
/// `L_{s,u}(w, s) = w - lambda_{s,u} (s - 1/c)`:
/// `L_s(t) = L_s(0) e^{lambda_u t}`, `L_u(t) = L_u(0) e^{lambda_s t}`.
pub fn exact_attractive_solution(point: PhasePoint, nu: f64, c_bar: f64, t: f64) -> PhasePoint {
    let eig = eigensystem(nu, c_bar);
    let q0 = point.s - 1.0 / c_bar;
    let l_s = (point.w - eig.lambda_s * q0) * (eig.lambda_u * t).exp();
    let l_u = (point.w - eig.lambda_u * q0) * (eig.lambda_s * t).exp();
    let q = (l_s - l_u) / (eig.lambda_u - eig.lambda_s);
    PhasePoint::new(l_s + eig.lambda_s * q, 1.0 / c_bar + q)
}

/// Classifies a phase point for the attractive system.
///
/// Subcritical: `L_s^-(w, s) = w - lambda_s^- (s - 1/c-) >= tol` (the
/// boundary line belongs to the invariant set). Supercritical:
/// `L_s^+(w, s) < -tol`. The two lines coincide for constant backgrounds,
/// where the verdict is sharp up to the tolerance band.
pub fn classify_attractive(point: PhasePoint, params: &Params, tol: f64) -> Result<Verdict> {
    let params = validate_params(*params)?;
    if params.k != ForceSign::Attractive {
        return Err(CtError::InvalidParams(
            "attractive classification requires k = -1".into(),
        ));
    }
    if !(point.s > 0.0) {
        return Err(CtError::InvalidInput(format!(
            "phase point must have s > 0, got s = {}",
            point.s
        )));
    }
    let lam_minus = eigensystem(params.nu, params.c_minus).lambda_s;
    let lam_plus = eigensystem(params.nu, params.c_plus).lambda_s;
    let l_minus = point.w - lam_minus * (point.s - 1.0 / params.c_minus);
    let l_plus = point.w - lam_plus * (point.s - 1.0 / params.c_plus);

    let (label, margin) = if l_minus >= tol {
        (VerdictLabel::Subcritical, l_minus)
    } else if l_plus < -tol {
        (VerdictLabel::Supercritical, -l_plus)
    } else {
        (VerdictLabel::Indeterminate, -l_minus.abs().min(l_plus.abs()))
    };
    let case_tag = if label == VerdictLabel::Subcritical && l_minus.abs() <= tol.max(1e-12) {
        CaseTag::AttractiveBorderline
    } else {
        CaseTag::None
    };
    Ok(Verdict {
        label,
        margin,
        case_tag,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BorderlineReport {
    pub is_borderline: bool,
    pub max_residual: f64,
}

/// Residual of the borderline identity `lambda_u^- u0'(x) = rho0(x) - c-`
/// over sampled data; neutrality-compatible global attractive data must
/// satisfy it exactly.
pub fn borderline_check(
    rho0_samples: &[f64],
    du0_samples: &[f64],
    nu: f64,
    c_minus: f64,
    tol: f64,
) -> Result<BorderlineReport> {
    if rho0_samples.len() != du0_samples.len() {
        return Err(CtError::MismatchedGrids(format!(
            "rho0 has {} samples, u0' has {}",
            rho0_samples.len(),
            du0_samples.len()
        )));
    }
    if rho0_samples.is_empty() {
        return Err(CtError::InvalidInput("empty sample grid".into()));
    }
    let lam_u = eigensystem(nu, c_minus).lambda_u;
    let max_residual = rho0_samples
        .iter()
        .zip(du0_samples)
        .map(|(&rho, &du)| (lam_u * du - (rho - c_minus)).abs())
        .fold(0.0, f64::max);
    Ok(BorderlineReport {
        is_borderline: max_residual <= tol,
        max_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::background::BackgroundSpec;
    use crate::phaseplane::{simulate_ws, SimOptions};

    #[test]
    fn eigensystem_examples() {
        let e = eigensystem(0.0, 1.0);
        assert_eq!(e.lambda_s, -1.0);
        assert_eq!(e.lambda_u, 1.0);

        let e = eigensystem(3.0, 4.0);
        assert_eq!(e.lambda_s, -4.0);
        assert_eq!(e.lambda_u, 1.0);

        for (nu, c) in [(0.7, 2.3), (1.5, 0.4), (0.0, 9.0)] {
            let e = eigensystem(nu, c);
            assert!((e.lambda_s * e.lambda_u + c).abs() < 1e-12);
            assert!((e.lambda_s + e.lambda_u + nu).abs() < 1e-12);
            assert!(e.lambda_s < 0.0 && e.lambda_u > 0.0);
        }
    }

    #[test]
    fn exact_solution_fixed_point_and_stable_line() {
        let p = exact_attractive_solution(PhasePoint::new(0.0, 0.5), 0.3, 2.0, 7.0);
        assert!((p.w - 0.0).abs() < 1e-12 && (p.s - 0.5).abs() < 1e-12);

        // Start on the stable line: s - 1 decays like e^{-t}.
        for t in [0.5, 1.0, 3.0] {
            let p = exact_attractive_solution(PhasePoint::new(-0.5, 1.5), 0.0, 1.0, t);
            assert!(((p.s - 1.0) - 0.5 * (-t).exp()).abs() < 1e-12, "t = {t}");
        }
    }

    #[test]
    fn exact_solution_matches_integration() {
        let params = Params::new(0.0, ForceSign::Attractive, 1.0, 1.0).unwrap();
        let mut opts = SimOptions::default();
        opts.integrator.rel_tol = 1e-11;
        opts.integrator.abs_tol = 1e-13;
        let start = PhasePoint::new(0.3, 2.0);
        let outcome = simulate_ws(start, &params, &BackgroundSpec::constant(1.0), 3.0, &opts).unwrap();
        let mut worst: f64 = 0.0;
        for i in 0..=100 {
            let t = 3.0 * i as f64 / 100.0;
            let numeric = outcome.phase_point(t).unwrap();
            let exact = exact_attractive_solution(start, 0.0, 1.0, t);
            worst = worst.max((numeric.w - exact.w).abs().max((numeric.s - exact.s).abs()));
        }
        assert!(worst <= 1e-8, "max deviation {worst:e}");
    }

    #[test]
    fn classify_examples() {
        let constant = Params::new(0.0, ForceSign::Attractive, 1.0, 1.0).unwrap();
        let v = classify_attractive(PhasePoint::new(0.0, 1.0), &constant, 0.0).unwrap();
        assert_eq!(v.label, VerdictLabel::Subcritical);
        assert_eq!(v.case_tag, CaseTag::AttractiveBorderline);

        let v = classify_attractive(PhasePoint::new(-1.0, 1.0), &constant, 0.0).unwrap();
        assert_eq!(v.label, VerdictLabel::Supercritical);

        let wide = Params::new(0.0, ForceSign::Attractive, 1.0, 2.0).unwrap();
        let v = classify_attractive(PhasePoint::new(0.4, 1.2), &wide, 0.0).unwrap();
        assert_eq!(v.label, VerdictLabel::Subcritical);
        assert!((v.margin - 0.6).abs() < 1e-12);

        assert!(classify_attractive(PhasePoint::new(0.0, 0.0), &wide, 0.0).is_err());
    }

    #[test]
    fn borderline_check_examples() {
        let n = 101;
        let xs: Vec<f64> = (0..n).map(|i| -5.0 + 10.0 * i as f64 / (n - 1) as f64).collect();
        let c_minus = 1.0;
        let lam_u = eigensystem(0.5, c_minus).lambda_u;

        let rho_const: Vec<f64> = vec![c_minus; n];
        let du_zero: Vec<f64> = vec![0.0; n];
        let r = borderline_check(&rho_const, &du_zero, 0.5, c_minus, 1e-12).unwrap();
        assert!(r.is_borderline && r.max_residual == 0.0);

        // Constructed equality: rho0 = c- + lambda_u^- u0' for a bump u0.
        let du: Vec<f64> = xs.iter().map(|x| -x * (-0.5 * x * x).exp()).collect();
        let rho: Vec<f64> = du.iter().map(|d| c_minus + lam_u * d).collect();
        let r = borderline_check(&rho, &du, 0.5, c_minus, 1e-12).unwrap();
        assert!(r.is_borderline);

        let rho_off: Vec<f64> = rho.iter().map(|r| r + 0.1).collect();
        let r = borderline_check(&rho_off, &du, 0.5, c_minus, 1e-3).unwrap();
        assert!(!r.is_borderline);
        assert!((r.max_residual - 0.1).abs() < 1e-12);

        assert!(borderline_check(&rho_off[..50], &du, 0.5, c_minus, 1e-3).is_err());
    }
}
