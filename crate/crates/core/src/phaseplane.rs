//! Simulation of the reduced system `w' = -nu w + k (1 - c(t) s), s' = w`
//! with blow-up detection, a-posteriori comparison-principle checks, and the
//! resonance demonstration.

use serde::{Deserialize, Serialize};

use crate::background::BackgroundSpec;
use crate::error::{CtError, Result};
use crate::odeint::{integrate, EventDirection, EventSpec, IntegratorOptions, Trajectory};
use crate::params::{validate_params, ForceSign, Params, PhasePoint};
use crate::thresholds::{solve_n, solve_p, Branch, RepulsiveClassifier, ThresholdCurve};

#[derive(Debug, Clone, Copy)]
pub struct SimOptions {
    pub integrator: IntegratorOptions,
    /// A blow-up registered at a turning point of `s` (grazing contact)
    /// requires `s` below this value.
    pub graze_tol: f64,
    /// Minimum `|w|` for a plain `s = 0` crossing to count as transversal.
    pub transversal_min_w: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions {
            integrator: IntegratorOptions {
                // Dense output is cubic Hermite; the step cap keeps its
                // interpolation error at the level the a-posteriori checks
                // assume.
                max_step: 0.02,
                ..Default::default()
            },
            graze_tol: 1e-6,
            transversal_min_w: 1e-5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Blowup {
    pub t: f64,
    pub w: f64,
    pub event_id: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub bound: f64,
    pub satisfied: bool,
}

/// Outcome of one reduced-system simulation.
#[derive(Debug)]
pub struct SimOutcome {
    pub trajectory: Trajectory,
    pub blowup: Option<Blowup>,
    pub horizon: f64,
    pub bound_check: Option<BoundCheck>,
}

impl SimOutcome {
    /// Compares the observed blow-up time against a breakdown bound.
    pub fn attach_bound_check(&mut self, bound: f64) {
        let satisfied = match &self.blowup {
            Some(b) => b.t <= bound + 1e-6,
            None => false,
        };
        self.bound_check = Some(BoundCheck { bound, satisfied });
    }

    pub fn phase_point(&self, t: f64) -> Result<PhasePoint> {
        let y = self.trajectory.eval_dense(t)?;
        Ok(PhasePoint::new(y[0], y[1]))
    }
}

/// Integrates the reduced system from `point` up to `horizon`, stopping at
/// the first time `s` reaches zero.
///
/// Blow-up is detected by a transversal `s = 0` crossing, by a turning point
/// of `s` at height below `graze_tol` (the grazing contact of boundary
/// trajectories), or by a deep crossing fallback; the earliest firing wins
/// and the time is refined on the dense output.
pub fn simulate_ws(
    point: PhasePoint,
    params: &Params,
    bg: &BackgroundSpec,
    horizon: f64,
    opts: &SimOptions,
) -> Result<SimOutcome> {
    let params = validate_params(*params)?;
    bg.validate()?;
    if !(point.s > 0.0) {
        return Err(CtError::InvalidInput(format!(
            "initial phase point must have s > 0, got s = {}",
            point.s
        )));
    }
    if !(horizon > 0.0) {
        return Err(CtError::InvalidInput("horizon must be positive".into()));
    }
    let (lo, hi) = bg.bounds();
    if lo < params.c_minus - 1e-9 || hi > params.c_plus + 1e-9 {
        return Err(CtError::InvalidInput(format!(
            "background range [{lo}, {hi}] exceeds declared bounds [{}, {}]",
            params.c_minus, params.c_plus
        )));
    }
    if !bg.covers(0.0, horizon) {
        return Err(CtError::BackgroundOutOfRange { t: horizon });
    }

    let k = params.k.sign();
    let nu = params.nu;
    let bg = bg.clone();
    let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
        let c = bg.eval_clamped(t);
        dy[0] = -nu * y[0] + k * (1.0 - c * y[1]);
        dy[1] = y[0];
    };

    let graze = opts.graze_tol;
    let wmin = opts.transversal_min_w;
    let events = vec![
        EventSpec::new("blowup-crossing", EventDirection::Decreasing, true, |_t, y: &[f64]| {
            y[1]
        })
        .with_guard(move |_t, y: &[f64]| y[0].abs() >= wmin),
        EventSpec::new("blowup-graze", EventDirection::Increasing, true, |_t, y: &[f64]| y[0])
            .with_guard(move |_t, y: &[f64]| y[1] <= graze),
        EventSpec::new("blowup-deep", EventDirection::Decreasing, true, move |_t, y: &[f64]| {
            y[1] + 10.0 * graze
        }),
    ];

    let trajectory = integrate(
        rhs,
        &[point.w, point.s],
        0.0,
        horizon,
        &opts.integrator,
        &events,
    )?;
    let blowup = trajectory.event().map(|e| Blowup {
        t: e.t,
        w: e.state[0],
        event_id: e.id.clone(),
    });
    Ok(SimOutcome {
        trajectory,
        blowup,
        horizon,
        bound_check: None,
    })
}

/// Oscillating-background experiment: `k = +1`, `nu = 0`,
/// `c(t) = 1 + eps sin t`, start `(w, s) = (0, 1)`.
pub fn resonance_demo(epsilon: f64, horizon: f64) -> Result<SimOutcome> {
    resonance_demo_with(epsilon, 0.0, horizon, &SimOptions::default())
}

pub fn resonance_demo_with(
    epsilon: f64,
    phase: f64,
    horizon: f64,
    opts: &SimOptions,
) -> Result<SimOutcome> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(CtError::InvalidInput(format!(
            "resonance amplitude must satisfy 0 <= eps < 1, got {epsilon}"
        )));
    }
    let params = Params::new(0.0, ForceSign::Repulsive, 1.0 - epsilon, 1.0 + epsilon)?;
    let bg = BackgroundSpec::sinusoid(1.0, epsilon, 1.0, phase);
    simulate_ws(PhasePoint::new(0.0, 1.0), &params, &bg, horizon, opts)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ComparisonMode {
    Weak,
    Strong,
}

/// Result of one Lyapunov sign-preservation check along a trajectory.
#[derive(Debug, Clone, Serialize)]
pub struct LyapunovCheck {
    pub name: String,
    pub precondition_met: bool,
    pub start_value: f64,
    pub max_violation: f64,
    pub first_violation_t: Option<f64>,
    /// Time at which the check was truncated because `s` left the relevant
    /// curve domain, per the comparison principles' provisos.
    pub domain_exit_t: Option<f64>,
    pub samples: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ComparisonReport {
    pub mode: ComparisonMode,
    pub tolerance: f64,
    pub checks: Vec<LyapunovCheck>,
}

impl ComparisonReport {
    pub fn max_violation(&self) -> f64 {
        self.checks
            .iter()
            .filter(|c| c.precondition_met)
            .map(|c| c.max_violation)
            .fold(0.0, f64::max)
    }
}

const COMPARISON_SAMPLES: usize = 1000;
const COMPARISON_TOL: f64 = 1e-7;

/// Verifies the comparison principles a posteriori on dense output.
///
/// Weak mode: `L_{P-} <= 0` and `L_{N+} >= 0` are preserved from the start.
/// Strong mode: strict signs of `L_{P+}` and `L_{N-}` are preserved. Each
/// check runs until blow-up or until `s` leaves the curve domain.
pub fn check_comparison(
    outcome: &SimOutcome,
    params: &Params,
    mode: ComparisonMode,
) -> Result<ComparisonReport> {
    let params = validate_params(*params)?;
    if params.k != ForceSign::Repulsive {
        return Err(CtError::InvalidParams(
            "comparison principles apply to the repulsive system".into(),
        ));
    }
    let nu = params.nu;
    let (c_minus, c_plus) = (params.c_minus, params.c_plus);
    let s_hi_traj = (0..COMPARISON_SAMPLES)
        .map(|i| {
            let t = outcome.trajectory.t0()
                + (outcome.trajectory.t_end() - outcome.trajectory.t0()) * i as f64
                    / (COMPARISON_SAMPLES - 1) as f64;
            outcome.trajectory.eval_dense(t).map(|y| y[1])
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0f64, f64::max);

    struct CheckSpec {
        name: &'static str,
        curve: ThresholdCurve,
        /// +1: preserve `L >= 0`; -1: preserve `L <= 0`.
        keep_sign: f64,
    }

    let mut specs: Vec<CheckSpec> = Vec::new();
    match mode {
        ComparisonMode::Weak => {
            let cap = match crate::params::gamma_exponent(nu, c_minus) {
                Some(g) => 1.01 * (1.0 + g.exp()) / c_minus,
                None => (s_hi_traj * 1.1).max(1.0),
            };
            specs.push(CheckSpec {
                name: "L_P-",
                curve: solve_p(c_minus, nu, cap)?,
                keep_sign: -1.0,
            });
            if let Some(g) = crate::params::gamma_exponent(nu, c_minus) {
                let s_star = (1.0 + g.exp()) / c_minus;
                specs.push(CheckSpec {
                    name: "L_N+",
                    curve: solve_n(c_plus, nu, s_star)?,
                    keep_sign: 1.0,
                });
            }
        }
        ComparisonMode::Strong => {
            let cap = match crate::params::gamma_exponent(nu, c_plus) {
                Some(g) => 1.01 * (1.0 + g.exp()) / c_plus,
                None => (s_hi_traj * 1.1).max(1.0),
            };
            specs.push(CheckSpec {
                name: "L_P+",
                curve: solve_p(c_plus, nu, cap)?,
                keep_sign: 1.0,
            });
            if let Some(g) = crate::params::gamma_exponent(nu, c_plus) {
                let s_plus = (1.0 + g.exp()) / c_plus;
                if s_plus > 1.0 / c_minus {
                    specs.push(CheckSpec {
                        name: "L_N-",
                        curve: solve_n(c_minus, nu, s_plus)?,
                        keep_sign: -1.0,
                    });
                }
            }
        }
    }

    let traj = &outcome.trajectory;
    let (t0, t1) = (traj.t0(), traj.t_end());
    let mut checks = Vec::new();
    for spec in &specs {
        let lyap = |w: f64, s: f64| -> f64 {
            let g = spec.curve.g_clamped(s);
            match spec.curve.branch {
                Branch::P => w + g,
                Branch::N => w - g,
            }
        };
        let start = traj.state(0);
        let start_value = if spec.curve.contains(start[1]) {
            lyap(start[0], start[1])
        } else {
            f64::NAN
        };
        // Weak P-: requires L <= 0 at start; N+: L >= 0. Strong P+: L > 0;
        // N-: L < 0. In all cases the preserved sign is -keep... the sign of
        // the start value must match what the principle preserves.
        let precondition_met = start_value.is_finite()
            && if spec.keep_sign > 0.0 {
                start_value >= 0.0
            } else {
                start_value <= 0.0
            };
        if !precondition_met {
            checks.push(LyapunovCheck {
                name: spec.name.to_string(),
                precondition_met: false,
                start_value,
                max_violation: 0.0,
                first_violation_t: None,
                domain_exit_t: None,
                samples: 0,
            });
            continue;
        }
        let mut max_violation = 0.0f64;
        let mut first_violation_t = None;
        let mut domain_exit_t = None;
        let mut samples = 0usize;
        let mut buf = vec![0.0; traj.dim()];
        for i in 0..COMPARISON_SAMPLES {
            let t = t0 + (t1 - t0) * i as f64 / (COMPARISON_SAMPLES - 1) as f64;
            traj.eval_dense_into(t, &mut buf)?;
            let (w, s) = (buf[0], buf[1]);
            // Below the floor the sqrt slope of g amplifies integration error
            // without bound; the principles' provisos end at s = 0 anyway.
            if !spec.curve.contains(s) || s < 1e-6 {
                domain_exit_t = Some(t);
                break;
            }
            samples += 1;
            let val = lyap(w, s);
            let violation = if spec.keep_sign > 0.0 { -val } else { val };
            if violation > max_violation {
                max_violation = violation;
                if violation > COMPARISON_TOL && first_violation_t.is_none() {
                    first_violation_t = Some(t);
                }
            }
        }
        checks.push(LyapunovCheck {
            name: spec.name.to_string(),
            precondition_met: true,
            start_value,
            max_violation,
            first_violation_t,
            domain_exit_t,
            samples,
        });
    }
    Ok(ComparisonReport {
        mode,
        tolerance: COMPARISON_TOL,
        checks,
    })
}

/// Angle coordinate `theta_-(w, s) = arctan(sqrt(c-) (s - 1/c-) / w)`,
/// defined for `w != 0`.
pub fn theta_minus(point: PhasePoint, c_minus: f64) -> Result<f64> {
    if point.w == 0.0 {
        return Err(CtError::AngleUndefined);
    }
    Ok(((c_minus.sqrt() * (point.s - 1.0 / c_minus)) / point.w).atan())
}

/// Minimum subcritical margin along the dense trajectory (1000 samples).
pub fn min_margin_along(outcome: &SimOutcome, cls: &RepulsiveClassifier) -> Result<f64> {
    let traj = &outcome.trajectory;
    let mut min_margin = f64::INFINITY;
    let mut buf = vec![0.0; traj.dim()];
    for i in 0..COMPARISON_SAMPLES {
        let t = traj.t0()
            + (traj.t_end() - traj.t0()) * i as f64 / (COMPARISON_SAMPLES - 1) as f64;
        traj.eval_dense_into(t, &mut buf)?;
        if buf[1] <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        match cls.subcritical_margin(PhasePoint::new(buf[0], buf[1]))? {
            Some(m) => min_margin = min_margin.min(m),
            None => return Err(CtError::InvalidInput("no subcritical construction".into())),
        }
    }
    Ok(min_margin)
}

pub mod sampling {
    //! Seeded random sampling helpers for the batch property runs.

    use rand::Rng;

    use super::*;
    use crate::params::VerdictLabel;

    /// Random sinusoid background whose range stays inside `[c-, c+]`.
    pub fn random_admissible_sinusoid<R: Rng>(
        rng: &mut R,
        c_minus: f64,
        c_plus: f64,
    ) -> BackgroundSpec {
        if c_plus - c_minus < 1e-12 {
            return BackgroundSpec::constant(c_minus);
        }
        let half_width = 0.5 * (c_plus - c_minus);
        let amplitude = rng.gen_range(0.0..half_width);
        let mean = rng.gen_range((c_minus + amplitude)..=(c_plus - amplitude));
        let omega = rng.gen_range(0.1..3.0);
        let phase = rng.gen_range(0.0..std::f64::consts::TAU);
        BackgroundSpec::sinusoid(mean, amplitude, omega, phase)
    }

    /// Rejection-samples phase points with the requested verdict.
    pub fn sample_with_label<R: Rng>(
        rng: &mut R,
        cls: &RepulsiveClassifier,
        label: VerdictLabel,
        count: usize,
        w_range: (f64, f64),
        s_range: (f64, f64),
        min_margin: f64,
    ) -> Vec<PhasePoint> {
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count && attempts < count * 10_000 {
            attempts += 1;
            let p = PhasePoint::new(
                rng.gen_range(w_range.0..w_range.1),
                rng.gen_range(s_range.0..s_range.1),
            );
            if let Ok(v) = cls.classify(p, 0.0) {
                if v.label == label && v.margin >= min_margin {
                    out.push(p);
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rep(nu: f64, c_minus: f64, c_plus: f64) -> Params {
        Params::new(nu, ForceSign::Repulsive, c_minus, c_plus).unwrap()
    }

    #[test]
    fn equilibrium_stays_put() {
        let outcome = simulate_ws(
            PhasePoint::new(0.0, 1.0),
            &rep(0.0, 1.0, 1.0),
            &BackgroundSpec::constant(1.0),
            100.0,
            &SimOptions::default(),
        )
        .unwrap();
        assert!(outcome.blowup.is_none());
        for i in 0..=200 {
            let y = outcome.trajectory.eval_dense(0.5 * i as f64).unwrap();
            assert!(y[0].abs() < 1e-9 && (y[1] - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn boundary_trajectory_blows_up_at_pi() {
        let mut opts = SimOptions::default();
        opts.integrator.rel_tol = 1e-12;
        opts.integrator.abs_tol = 1e-14;
        let outcome = simulate_ws(
            PhasePoint::new(0.0, 2.0),
            &rep(0.0, 1.0, 1.0),
            &BackgroundSpec::constant(1.0),
            10.0,
            &opts,
        )
        .unwrap();
        let b = outcome.blowup.expect("blow-up expected");
        assert!(
            (b.t - std::f64::consts::PI).abs() < 1e-6,
            "t* = {} via {}",
            b.t,
            b.event_id
        );
    }

    #[test]
    fn attractive_stable_line_converges() {
        let outcome = simulate_ws(
            PhasePoint::new(-0.5, 1.5),
            &Params::new(0.0, ForceSign::Attractive, 1.0, 1.0).unwrap(),
            &BackgroundSpec::constant(1.0),
            20.0,
            &SimOptions::default(),
        )
        .unwrap();
        assert!(outcome.blowup.is_none());
        let end = outcome.trajectory.last_state();
        assert!(end[0].abs() < 1e-6 && (end[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn resonance_small_amplitude_blows_up() {
        let outcome = resonance_demo(0.05, 200.0).unwrap();
        let b = outcome.blowup.expect("resonance must blow up before 200");
        assert!(b.t < 200.0);

        let calm = resonance_demo(0.0, 50.0).unwrap();
        assert!(calm.blowup.is_none());
    }

    #[test]
    fn comparison_equality_case_propagates() {
        // Start exactly on L_P- = 0 at constant background: equality rides.
        let curve = solve_p(1.0, 0.0, 3.0).unwrap();
        let s0 = 0.5;
        let w0 = -curve.g(s0).unwrap();
        let mut opts = SimOptions::default();
        opts.integrator.rel_tol = 1e-12;
        opts.integrator.abs_tol = 1e-14;
        let outcome = simulate_ws(
            PhasePoint::new(w0, s0),
            &rep(0.0, 1.0, 1.0),
            &BackgroundSpec::constant(1.0),
            10.0,
            &opts,
        )
        .unwrap();
        let report = check_comparison(&outcome, &rep(0.0, 1.0, 1.0), ComparisonMode::Weak).unwrap();
        let pm = &report.checks[0];
        assert!(pm.precondition_met);
        assert!(pm.max_violation <= 1e-7, "violation {:e}", pm.max_violation);
    }

    #[test]
    fn comparison_precondition_not_met() {
        let outcome = simulate_ws(
            PhasePoint::new(0.1, 1.0),
            &rep(0.0, 0.95, 1.05),
            &BackgroundSpec::sinusoid(1.0, 0.05, 1.0, 0.0),
            5.0,
            &SimOptions::default(),
        )
        .unwrap();
        // L_P-(start) = 0.1 + g(1) > 0: the weak P- check must refuse.
        let report =
            check_comparison(&outcome, &rep(0.0, 0.95, 1.05), ComparisonMode::Weak).unwrap();
        assert!(!report.checks[0].precondition_met);
    }

    #[test]
    fn weak_comparison_preserved_under_oscillation() {
        let params = rep(0.0, 0.95, 1.05);
        let bg = BackgroundSpec::sinusoid(1.0, 0.05, 1.0, 0.0);
        let curve = solve_p(0.95, 0.0, 4.0).unwrap();
        let s0 = 1.0;
        let w0 = -curve.g(s0).unwrap() - 0.1;
        let outcome = simulate_ws(PhasePoint::new(w0, s0), &params, &bg, 50.0, &SimOptions::default())
            .unwrap();
        let report = check_comparison(&outcome, &params, ComparisonMode::Weak).unwrap();
        let pm = &report.checks[0];
        assert!(pm.precondition_met);
        assert!(pm.max_violation <= 1e-7, "violation {:e}", pm.max_violation);
    }

    #[test]
    fn theta_minus_examples() {
        assert_eq!(theta_minus(PhasePoint::new(1.0, 0.5), 2.0).unwrap(), 0.0);
        let v = theta_minus(PhasePoint::new(1.0, 2.0), 1.0).unwrap();
        assert!((v - std::f64::consts::FRAC_PI_4).abs() < 1e-12);
        assert!(matches!(
            theta_minus(PhasePoint::new(0.0, 2.0), 1.0),
            Err(CtError::AngleUndefined)
        ));
    }

    #[test]
    fn blowup_outcome_invariants() {
        let outcome = simulate_ws(
            PhasePoint::new(-2.0, 1.0),
            &rep(0.0, 1.0, 1.0),
            &BackgroundSpec::constant(1.0),
            20.0,
            &SimOptions::default(),
        )
        .unwrap();
        let b = outcome.blowup.as_ref().expect("supercritical start");
        assert!(b.t <= outcome.horizon);
        for i in 0..1000 {
            let t = b.t * i as f64 / 1000.0;
            let y = outcome.trajectory.eval_dense(t).unwrap();
            assert!(y[1] > 0.0, "s(t) must stay positive before t*");
        }
    }

    #[test]
    fn rejects_inconsistent_background() {
        let err = simulate_ws(
            PhasePoint::new(0.0, 1.0),
            &rep(0.0, 1.0, 1.0),
            &BackgroundSpec::sinusoid(1.0, 0.5, 1.0, 0.0),
            10.0,
            &SimOptions::default(),
        )
        .unwrap_err();
        assert!(err.to_string().contains("exceeds declared bounds"));
    }
}
