//! Cold-plasma ion application: energy functional, the `V` pair and the
//! Maxwell-Boltzmann potential bounds, the nonlinear Poisson solve, and the
//! global-regularity criterion.

use serde::{Deserialize, Serialize};

use crate::characteristics::InitialDatum;
use crate::error::{CtError, Result};
use crate::params::{ForceSign, Params, PhasePoint, VerdictLabel};
use crate::quad::adaptive_simpson;
use crate::thresholds::{closing_condition, ClosingReport, RepulsiveClassifier};

/// `U(r) = (r - 1) e^r + 1`, nonnegative with a double zero at `r = 0`.
pub fn u_eval(r: f64) -> f64 {
    (r - 1.0) * r.exp() + 1.0
}

/// `V(z) = integral of sqrt(2U)` from 0 to `z` (or `z` to 0 for `z < 0`);
/// strictly increasing in `|z|`.
pub fn v_eval(z: f64) -> f64 {
    if z == 0.0 {
        return 0.0;
    }
    let (a, b) = if z > 0.0 { (0.0, z) } else { (z, 0.0) };
    // Scale-aware tolerance: an absolute 1e-13 is unreachable once the
    // integrand envelope |z| sqrt(2U(z)) is large.
    let tol = 1e-13 * (1.0 + z.abs() * (2.0 * u_eval(z).max(0.0)).sqrt());
    adaptive_simpson(|r| (2.0 * u_eval(r).max(0.0)).sqrt(), a, b, tol)
        .expect("integrand is smooth and bounded")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VBranch {
    Plus,
    Minus,
}

/// Monotone inverse of `V` on the requested half-line: bracketing bisection
/// followed by a Newton polish with `V'(z) = sqrt(2U(z))`.
pub fn v_inverse(branch: VBranch, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(CtError::InvalidInput(format!(
            "V inverse needs x >= 0, got {x}"
        )));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    let sign = match branch {
        VBranch::Plus => 1.0,
        VBranch::Minus => -1.0,
    };
    // Bracket by doubling.
    let mut hi = (2.0 * x).sqrt().max(1e-8);
    let mut lo = 0.0;
    for _ in 0..200 {
        if v_eval(sign * hi) >= x {
            break;
        }
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if v_eval(sign * mid) < x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut z = sign * 0.5 * (lo + hi);
    for _ in 0..4 {
        let f = v_eval(z) - x;
        let slope = sign * (2.0 * u_eval(z).max(0.0)).sqrt();
        if slope.abs() < 1e-300 {
            break;
        }
        z -= f / slope;
    }
    Ok(z)
}

/// Potential bounds derived from the initial energy:
/// `c- = exp(V_-^{-1}(H0)) <= 1 <= c+ = exp(V_+^{-1}(H0))`.
pub fn potential_bounds(h0: f64) -> Result<(f64, f64)> {
    if !(h0 >= 0.0) || !h0.is_finite() {
        return Err(CtError::InvalidInput(format!(
            "energy must be nonnegative, got {h0}"
        )));
    }
    let c_minus = v_inverse(VBranch::Minus, h0)?.exp();
    let c_plus = v_inverse(VBranch::Plus, h0)?.exp();
    Ok((c_minus, c_plus))
}

/// Newton iteration (with backtracking) on the centered second-difference
/// discretization of `-phi'' + e^phi = rho`, Dirichlet `phi(+-L) = 0`.
///
/// The Jacobian is the tridiagonal `-Delta_h + diag(e^phi)`, solved directly.
pub fn solve_poisson_mb(rho: &[f64], l: f64, tol: f64) -> Result<Vec<f64>> {
    let n = rho.len();
    if n < 3 {
        return Err(CtError::InvalidInput("Poisson grid needs n >= 3".into()));
    }
    if rho.iter().any(|&r| !(r > 0.0) || !r.is_finite()) {
        return Err(CtError::InvalidInput("rho must be positive".into()));
    }
    let h = 2.0 * l / (n - 1) as f64;
    let h2 = h * h;
    let m = n - 2;
    let mut phi = vec![0.0; n];

    let residual = |phi: &[f64], out: &mut [f64]| {
        for i in 1..n - 1 {
            out[i - 1] = -(phi[i + 1] - 2.0 * phi[i] + phi[i - 1]) / h2 + phi[i].exp() - rho[i];
        }
    };
    let max_norm = |v: &[f64]| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));

    let mut res = vec![0.0; m];
    let mut res_trial = vec![0.0; m];
    residual(&phi, &mut res);
    let mut res_norm = max_norm(&res);

    for _iter in 0..50 {
        if res_norm <= tol {
            return Ok(phi);
        }
        // Tridiagonal Newton system J delta = -F via the Thomas algorithm.
        let mut diag: Vec<f64> = (1..n - 1).map(|i| 2.0 / h2 + phi[i].exp()).collect();
        let off = -1.0 / h2;
        let mut rhs: Vec<f64> = res.iter().map(|r| -r).collect();
        for i in 1..m {
            let w = off / diag[i - 1];
            diag[i] -= w * off;
            rhs[i] -= w * rhs[i - 1];
        }
        let mut delta = vec![0.0; m];
        delta[m - 1] = rhs[m - 1] / diag[m - 1];
        for i in (0..m - 1).rev() {
            delta[i] = (rhs[i] - off * delta[i + 1]) / diag[i];
        }

        // Backtracking line search on the residual max-norm.
        let mut lambda = 1.0;
        let mut accepted = false;
        let mut phi_trial = phi.clone();
        for _ in 0..30 {
            for i in 1..n - 1 {
                phi_trial[i] = phi[i] + lambda * delta[i - 1];
            }
            residual(&phi_trial, &mut res_trial);
            let trial_norm = max_norm(&res_trial);
            if trial_norm.is_finite() && trial_norm < res_norm * (1.0 - 0.25 * lambda) + 1e-300 {
                phi.copy_from_slice(&phi_trial);
                res.copy_from_slice(&res_trial);
                res_norm = trial_norm;
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            // The centered difference cannot resolve below its rounding
            // floor; a stalled residual at that level counts as converged.
            let phi_max = phi.iter().fold(0.0f64, |acc, p| acc.max(p.abs()));
            let floor = 8.0 * f64::EPSILON * (phi_max + 1.0) / h2;
            if res_norm <= tol.max(floor) {
                return Ok(phi);
            }
            return Err(CtError::NewtonStalled {
                iters: _iter + 1,
                residual: res_norm,
            });
        }
    }
    if res_norm <= tol {
        Ok(phi)
    } else {
        Err(CtError::NewtonStalled {
            iters: 50,
            residual: res_norm,
        })
    }
}

/// Sampled cold-ion initial state on a uniform grid over `[-l, l]`, with the
/// far-field state `(rho, u) -> (1, 0)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColdIonSetup {
    pub l: f64,
    pub nu: f64,
    pub rho0: Vec<f64>,
    pub u0: Vec<f64>,
}

impl ColdIonSetup {
    pub fn from_datum(datum: &InitialDatum, l: f64, n: usize, nu: f64) -> Result<Self> {
        if n < 3 {
            return Err(CtError::InvalidInput("grid needs n >= 3".into()));
        }
        let xs: Vec<f64> = (0..n)
            .map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64)
            .collect();
        let setup = ColdIonSetup {
            l,
            nu,
            rho0: xs.iter().map(|&x| datum.rho0(x)).collect(),
            u0: xs.iter().map(|&x| datum.u0(x)).collect(),
        };
        setup.validate()?;
        Ok(setup)
    }

    pub fn n(&self) -> usize {
        self.rho0.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.l / (self.n() - 1) as f64
    }

    pub fn xs(&self) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| -self.l + 2.0 * self.l * i as f64 / (n - 1) as f64)
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rho0.len();
        if n != self.u0.len() {
            return Err(CtError::MismatchedGrids(format!(
                "rho0 has {n} samples, u0 has {}",
                self.u0.len()
            )));
        }
        if n < 3 || !(self.l > 0.0) || !(self.nu >= 0.0) {
            return Err(CtError::InvalidInput(
                "setup needs n >= 3, l > 0, nu >= 0".into(),
            ));
        }
        if self.rho0.iter().any(|&r| !(r > 0.0)) {
            return Err(CtError::InvalidInput("rho0 must be positive".into()));
        }
        let dev = (self.rho0[0] - 1.0)
            .abs()
            .max((self.rho0[n - 1] - 1.0).abs())
            .max(self.u0[0].abs())
            .max(self.u0[n - 1].abs());
        if dev > 1e-6 {
            return Err(CtError::InvalidInput(format!(
                "boundary deviation {dev:.3e} from the (1, 0) far-field state"
            )));
        }
        Ok(())
    }
}

/// Total energy and its three summands, plus the derived potential bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub h: f64,
    pub kinetic: f64,
    pub field: f64,
    pub internal: f64,
    pub c_minus: f64,
    pub c_plus: f64,
}

/// `H = integral of (rho u^2 / 2 + |phi_x|^2 / 2 + U(phi))`, with `phi` from
/// the Maxwell-Boltzmann Poisson solve.
pub fn energy(setup: &ColdIonSetup) -> Result<EnergyReport> {
    setup.validate()?;
    let n = setup.n();
    let h = setup.spacing();
    let phi = solve_poisson_mb(&setup.rho0, setup.l, 1e-10)?;

    let mut kinetic = 0.0;
    let mut field = 0.0;
    let mut internal = 0.0;
    for i in 0..n {
        let weight = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
        let dphi = if i == 0 {
            (phi[1] - phi[0]) / h
        } else if i == n - 1 {
            (phi[n - 1] - phi[n - 2]) / h
        } else {
            (phi[i + 1] - phi[i - 1]) / (2.0 * h)
        };
        kinetic += weight * h * 0.5 * setup.rho0[i] * setup.u0[i] * setup.u0[i];
        field += weight * h * 0.5 * dphi * dphi;
        internal += weight * h * u_eval(phi[i]);
    }
    let total = kinetic + field + internal;
    let (c_minus, c_plus) = potential_bounds(total)?;
    Ok(EnergyReport {
        h: total,
        kinetic,
        field,
        internal,
        c_minus,
        c_plus,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegularityVerdict {
    Global,
    NotGuaranteed,
}

#[derive(Debug, Clone, Serialize)]
pub struct FailingPoint {
    pub x: f64,
    pub w: f64,
    pub s: f64,
    pub label: VerdictLabel,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub verdict: RegularityVerdict,
    pub energy: EnergyReport,
    pub closing: ClosingReport,
    pub n_points: usize,
    pub failing: Vec<FailingPoint>,
}

/// Global-regularity criterion: the closing condition must hold for the
/// energy-derived `(c-, c+)` and every phase point
/// `(w, s) = (u0'/rho0, 1/rho0)` must be subcritical.
pub fn global_regularity_check(setup: &ColdIonSetup) -> Result<RegularityReport> {
    setup.validate()?;
    let report = energy(setup)?;
    let params = Params::new(setup.nu, ForceSign::Repulsive, report.c_minus, report.c_plus)?;
    let closing = closing_condition(&params);

    let n = setup.n();
    let h = setup.spacing();
    let xs = setup.xs();
    let mut s_max: f64 = 1.0;
    let mut points = Vec::with_capacity(n);
    for i in 0..n {
        let du = if i == 0 {
            (setup.u0[1] - setup.u0[0]) / h
        } else if i == n - 1 {
            (setup.u0[n - 1] - setup.u0[n - 2]) / h
        } else {
            (setup.u0[i + 1] - setup.u0[i - 1]) / (2.0 * h)
        };
        let s = 1.0 / setup.rho0[i];
        points.push((xs[i], PhasePoint::new(du / setup.rho0[i], s)));
        s_max = s_max.max(s);
    }

    let mut failing = Vec::new();
    if closing.holds {
        let cls = RepulsiveClassifier::new(params, 1.5 * s_max + 1.0)?;
        for (x, p) in &points {
            let v = cls.classify(*p, 0.0)?;
            if v.label != VerdictLabel::Subcritical {
                failing.push(FailingPoint {
                    x: *x,
                    w: p.w,
                    s: p.s,
                    label: v.label,
                });
            }
        }
    }

    let verdict = if closing.holds && failing.is_empty() {
        RegularityVerdict::Global
    } else {
        RegularityVerdict::NotGuaranteed
    };
    Ok(RegularityReport {
        verdict,
        energy: report,
        closing,
        n_points: n,
        failing,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_eval_examples() {
        assert_eq!(u_eval(0.0), 0.0);
        assert_eq!(u_eval(1.0), 1.0);
        assert!((u_eval(-1.0) - (1.0 - 2.0 / std::f64::consts::E)).abs() < 1e-15);
        for i in 0..=100 {
            let r = -5.0 + 10.0 * i as f64 / 100.0;
            assert!(u_eval(r) >= 0.0);
            if r.abs() > 1e-6 {
                assert!(u_eval(r) > 1e-12 * r * r);
            }
        }
    }

    #[test]
    fn v_eval_matches_cubic_taylor() {
        assert_eq!(v_eval(0.0), 0.0);
        let taylor = |z: f64| 0.5 * z * z + z * z * z / 9.0;
        assert!((v_eval(0.1) - taylor(0.1)).abs() < 5e-5);
        assert!((v_eval(-0.1) - taylor(-0.1)).abs() < 5e-5);
        // Strict monotonicity on both half-lines.
        let mut prev = 0.0;
        for i in 1..=50 {
            let v = v_eval(0.1 * i as f64);
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn v_inverse_round_trip() {
        assert_eq!(v_inverse(VBranch::Plus, 0.0).unwrap(), 0.0);
        let z = v_inverse(VBranch::Plus, 1e-6).unwrap();
        assert!((z - (2e-6f64).sqrt()).abs() < 1e-6);
        for &x in &[1e-6, 1e-3, 0.3, 1.0, 10.0] {
            for branch in [VBranch::Plus, VBranch::Minus] {
                let z = v_inverse(branch, x).unwrap();
                match branch {
                    VBranch::Plus => assert!(z >= 0.0),
                    VBranch::Minus => assert!(z <= 0.0),
                }
                let back = v_eval(z);
                assert!(
                    (back - x).abs() <= 1e-9 * x.max(1e-12),
                    "x = {x}: round trip {back}"
                );
            }
        }
    }

    #[test]
    fn potential_bounds_examples() {
        let (cm, cp) = potential_bounds(0.0).unwrap();
        assert_eq!((cm, cp), (1.0, 1.0));

        let h0 = 1e-4;
        let (cm, cp) = potential_bounds(h0).unwrap();
        assert!(cm <= 1.0 && 1.0 <= cp);
        let ratio = cp / cm;
        let expected = 1.0 + 2.0 * (2.0 * h0).sqrt();
        assert!((ratio - expected).abs() < 1e-3, "ratio {ratio}");

        // Frozen regression from this quadrature + inversion machinery.
        let (cm, cp) = potential_bounds(0.01).unwrap();
        assert!((cm - 0.866162839885624).abs() < 1e-12, "c- = {cm}");
        assert!((cp - 1.149396195835588).abs() < 1e-12, "c+ = {cp}");
    }

    #[test]
    fn poisson_uniform_density_gives_zero_potential() {
        let rho = vec![1.0; 101];
        let phi = solve_poisson_mb(&rho, 5.0, 1e-10).unwrap();
        assert!(phi.iter().all(|&p| p == 0.0));
    }

    #[test]
    fn poisson_matches_linearization_for_small_bumps() {
        let l = 10.0;
        let n = 2001;
        let eps = 1e-3;
        let xs: Vec<f64> = (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect();
        let bump: Vec<f64> = xs.iter().map(|&x| (-0.5 * x * x).exp()).collect();
        let rho: Vec<f64> = bump.iter().map(|b| 1.0 + eps * b).collect();
        let phi = solve_poisson_mb(&rho, l, 1e-12).unwrap();

        // Linearized problem (-dxx + 1) psi = eps * bump via the same
        // tridiagonal solve with a frozen coefficient.
        let h = 2.0 * l / (n - 1) as f64;
        let h2 = h * h;
        let m = n - 2;
        let mut diag = vec![2.0 / h2 + 1.0; m];
        let off = -1.0 / h2;
        let mut rhs: Vec<f64> = (1..n - 1).map(|i| eps * bump[i]).collect();
        for i in 1..m {
            let w = off / diag[i - 1];
            diag[i] -= w * off;
            rhs[i] -= w * rhs[i - 1];
        }
        let mut psi = vec![0.0; n];
        psi[n - 2] = rhs[m - 1] / diag[m - 1];
        for i in (0..m - 1).rev() {
            psi[i + 1] = (rhs[i] - off * psi[i + 2]) / diag[i];
        }

        let worst = phi
            .iter()
            .zip(&psi)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        assert!(worst < 10.0 * eps * eps, "|phi - linearized| = {worst:e}");
    }

    #[test]
    fn poisson_second_order_convergence() {
        let l = 8.0;
        let datum = InitialDatum::Bump {
            base: 1.0,
            rho_amplitude: 0.3,
            rho_width: 1.0,
            u_amplitude: 0.0,
            u_width: 1.0,
        };
        let solve_at = |n: usize| -> f64 {
            let xs: Vec<f64> = (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect();
            let rho: Vec<f64> = xs.iter().map(|&x| datum.rho0(x)).collect();
            let phi = solve_poisson_mb(&rho, l, 1e-12).unwrap();
            phi[(n - 1) / 2]
        };
        let reference = solve_at(16001);
        let coarse = (solve_at(251) - reference).abs();
        let fine = (solve_at(501) - reference).abs();
        let rate = coarse / fine;
        assert!(
            (3.0..6.0).contains(&rate),
            "refinement ratio {rate} (coarse {coarse:e}, fine {fine:e})"
        );
    }

    #[test]
    fn poisson_discrete_maximum_principle() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let l = 8.0;
        let n = 401;
        let xs: Vec<f64> = (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect();
        for _ in 0..10 {
            let amp: f64 = rng.gen_range(0.01..0.5);
            let width: f64 = rng.gen_range(0.5..2.0);
            let center: f64 = rng.gen_range(-2.0..2.0);
            let above = rng.gen_bool(0.5);
            let rho: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let b = amp * (-0.5 * ((x - center) / width).powi(2)).exp();
                    if above {
                        1.0 + b
                    } else {
                        (1.0 - b).max(0.1)
                    }
                })
                .collect();
            let phi = solve_poisson_mb(&rho, l, 1e-10).unwrap();
            if above {
                assert!(phi.iter().all(|&p| p >= -1e-12));
            } else {
                assert!(phi.iter().all(|&p| p <= 1e-12));
            }
        }
    }

    #[test]
    fn energy_examples() {
        let flat = ColdIonSetup {
            l: 8.0,
            nu: 0.0,
            rho0: vec![1.0; 401],
            u0: vec![0.0; 401],
        };
        let e = energy(&flat).unwrap();
        assert_eq!(e.h, 0.0);
        assert_eq!((e.c_minus, e.c_plus), (1.0, 1.0));

        // Pure kinetic bump: H equals the kinetic integral.
        let l = 8.0;
        let n = 2001;
        let xs: Vec<f64> = (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect();
        let amp = 0.1;
        let u0: Vec<f64> = xs.iter().map(|&x| amp * (-0.5 * x * x).exp()).collect();
        let setup = ColdIonSetup {
            l,
            nu: 0.0,
            rho0: vec![1.0; n],
            u0,
        };
        let e = energy(&setup).unwrap();
        // integral of (amp^2/2) e^{-x^2} = amp^2/2 sqrt(pi).
        let expected = 0.5 * amp * amp * std::f64::consts::PI.sqrt();
        assert!((e.h - expected).abs() < 1e-6);
        assert_eq!(e.field, 0.0);
        assert_eq!(e.internal, 0.0);

        // Kinetic part scales quadratically under u0 -> lambda u0.
        let scaled = ColdIonSetup {
            u0: setup.u0.iter().map(|u| 2.0 * u).collect(),
            ..setup.clone()
        };
        let e2 = energy(&scaled).unwrap();
        assert!((e2.kinetic / e.kinetic - 4.0).abs() < 1e-8);
    }

    #[test]
    fn energy_of_small_density_bump_matches_linearized_quadratic_form() {
        let l = 10.0;
        let n = 2001;
        let eps = 1e-3;
        let h = 2.0 * l / (n - 1) as f64;
        let xs: Vec<f64> = (0..n).map(|i| -l + h * i as f64).collect();
        let bump: Vec<f64> = xs.iter().map(|&x| (-0.5 * x * x).exp()).collect();
        let setup = ColdIonSetup {
            l,
            nu: 0.0,
            rho0: bump.iter().map(|b| 1.0 + eps * b).collect(),
            u0: vec![0.0; n],
        };
        let e = energy(&setup).unwrap();
        assert!(e.h > 0.0);

        // Linearization: phi solves (-dxx + 1) phi = eps b, and
        // field + internal ~ (1/2) integral (phi_x^2 + phi^2).
        let phi = {
            let h2 = h * h;
            let m = n - 2;
            let mut diag = vec![2.0 / h2 + 1.0; m];
            let off = -1.0 / h2;
            let mut rhs: Vec<f64> = (1..n - 1).map(|i| eps * bump[i]).collect();
            for i in 1..m {
                let w = off / diag[i - 1];
                diag[i] -= w * off;
                rhs[i] -= w * rhs[i - 1];
            }
            let mut phi = vec![0.0; n];
            phi[n - 2] = rhs[m - 1] / diag[m - 1];
            for i in (0..m - 1).rev() {
                phi[i + 1] = (rhs[i] - off * phi[i + 2]) / diag[i];
            }
            phi
        };
        let mut quad = 0.0;
        for i in 1..n - 1 {
            let dphi = (phi[i + 1] - phi[i - 1]) / (2.0 * h);
            quad += h * 0.5 * (dphi * dphi + phi[i] * phi[i]);
        }
        let computed = e.field + e.internal;
        assert!(
            (computed - quad).abs() <= 0.1 * quad,
            "field+internal {computed:e} vs linearized {quad:e}"
        );
    }

    #[test]
    fn global_regularity_examples() {
        let flat = ColdIonSetup {
            l: 8.0,
            nu: 0.1,
            rho0: vec![1.0; 201],
            u0: vec![0.0; 201],
        };
        let r = global_regularity_check(&flat).unwrap();
        assert_eq!(r.verdict, RegularityVerdict::Global);

        // Tiny kinetic bump with moderate damping stays global.
        let n = 801;
        let l = 8.0;
        let xs: Vec<f64> = (0..n).map(|i| -l + 2.0 * l * i as f64 / (n - 1) as f64).collect();
        let amp = 1.5e-3;
        let tiny = ColdIonSetup {
            l,
            nu: 0.5,
            rho0: vec![1.0; n],
            u0: xs.iter().map(|&x| amp * (-0.5 * x * x).exp()).collect(),
        };
        let r = global_regularity_check(&tiny).unwrap();
        assert!(r.energy.h < 1e-5);
        assert_eq!(r.verdict, RegularityVerdict::Global);

        // Undamped with any positive energy: closing fails.
        let undamped = ColdIonSetup { nu: 0.0, ..tiny };
        let r = global_regularity_check(&undamped).unwrap();
        assert_eq!(r.verdict, RegularityVerdict::NotGuaranteed);
        assert!(!r.closing.holds);
    }
}
