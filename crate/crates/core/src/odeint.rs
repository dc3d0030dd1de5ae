//! Adaptive explicit Runge-Kutta integration with dense output and event
//! detection.
//!
//! The stepper is the Dormand-Prince 5(4) embedded pair with the free cubic
//! Hermite interpolant (state and derivative are stored at every accepted
//! step). Events fire on sign changes of a scalar test function scanned over
//! the dense output and are refined by bisection; an optional guard predicate
//! lets callers reject firings, which is how grazing contacts are filtered.

use crate::error::{CtError, Result};

#[derive(Debug, Clone, Copy)]
pub struct IntegratorOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            max_step: f64::INFINITY,
            max_steps: 10_000_000,
        }
    }
}

impl IntegratorOptions {
    pub fn with_tols(rel_tol: f64, abs_tol: f64) -> Self {
        IntegratorOptions {
            rel_tol,
            abs_tol,
            ..Default::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if self.rel_tol <= 0.0 || self.abs_tol <= 0.0 || self.max_steps == 0 {
            return Err(CtError::InvalidInput(
                "integrator tolerances and max_steps must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventDirection {
    Any,
    Decreasing,
    Increasing,
}

type TestFn = Box<dyn Fn(f64, &[f64]) -> f64 + Send + Sync>;
type GuardFn = Box<dyn Fn(f64, &[f64]) -> bool + Send + Sync>;

/// Scalar event: fires when `test` changes sign along the trajectory in the
/// requested direction and the guard (if any) accepts the refined point.
pub struct EventSpec {
    pub id: String,
    pub test: TestFn,
    pub direction: EventDirection,
    pub terminal: bool,
    pub guard: Option<GuardFn>,
}

impl EventSpec {
    pub fn new(
        id: impl Into<String>,
        direction: EventDirection,
        terminal: bool,
        test: impl Fn(f64, &[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        EventSpec {
            id: id.into(),
            test: Box::new(test),
            direction,
            terminal,
            guard: None,
        }
    }

    pub fn with_guard(mut self, guard: impl Fn(f64, &[f64]) -> bool + Send + Sync + 'static) -> Self {
        self.guard = Some(Box::new(guard));
        self
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventHit {
    pub t: f64,
    pub state: Vec<f64>,
    pub id: String,
}

/// Dense-output record of an integration: samples at accepted steps plus the
/// derivative at each sample, interpolated with cubic Hermite polynomials.
#[derive(Debug, Clone)]
pub struct Trajectory {
    dim: usize,
    times: Vec<f64>,
    states: Vec<f64>,
    derivs: Vec<f64>,
    event: Option<EventHit>,
}

impl Trajectory {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn t0(&self) -> f64 {
        self.times[0]
    }

    pub fn t_end(&self) -> f64 {
        self.times[self.times.len() - 1]
    }

    pub fn state(&self, i: usize) -> &[f64] {
        &self.states[i * self.dim..(i + 1) * self.dim]
    }

    pub fn last_state(&self) -> &[f64] {
        self.state(self.len() - 1)
    }

    pub fn event(&self) -> Option<&EventHit> {
        self.event.as_ref()
    }

    /// Interpolated state at any `t` within the integration range.
    pub fn eval_dense(&self, t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.eval_dense_into(t, &mut out)?;
        Ok(out)
    }

    pub fn eval_dense_into(&self, t: f64, out: &mut [f64]) -> Result<()> {
        let (lo, hi) = (self.t0(), self.t_end());
        if t < lo - 1e-12 || t > hi + 1e-12 {
            return Err(CtError::OutOfRange { t, lo, hi });
        }
        let t = t.clamp(lo, hi);
        let i = match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(i) => {
                out.copy_from_slice(self.state(i));
                return Ok(());
            }
            Err(i) => i.clamp(1, self.len() - 1),
        };
        hermite_eval(
            self.times[i - 1],
            self.times[i],
            self.state(i - 1),
            self.state(i),
            &self.derivs[(i - 1) * self.dim..i * self.dim],
            &self.derivs[i * self.dim..(i + 1) * self.dim],
            t,
            out,
        );
        Ok(())
    }

    /// `n` evenly spaced sample times covering the full range.
    pub fn sample_times(&self, n: usize) -> Vec<f64> {
        let (a, b) = (self.t0(), self.t_end());
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1).max(1) as f64)
            .collect()
    }
}

#[allow(clippy::too_many_arguments)]
fn hermite_eval(t0: f64, t1: f64, y0: &[f64], y1: &[f64], f0: &[f64], f1: &[f64], t: f64, out: &mut [f64]) {
    let h = t1 - t0;
    let u = (t - t0) / h;
    let u2 = u * u;
    let u3 = u2 * u;
    let h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    let h10 = u3 - 2.0 * u2 + u;
    let h01 = -2.0 * u3 + 3.0 * u2;
    let h11 = u3 - u2;
    for j in 0..out.len() {
        out[j] = h00 * y0[j] + h10 * h * f0[j] + h01 * y1[j] + h11 * h * f1[j];
    }
}

// Dormand-Prince 5(4) tableau.
const A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
// b_higher - b_lower, applied to k1..k7 for the embedded error estimate.
const E: [f64; 7] = [
    35.0 / 384.0 - 5179.0 / 57600.0,
    0.0,
    500.0 / 1113.0 - 7571.0 / 16695.0,
    125.0 / 192.0 - 393.0 / 640.0,
    -2187.0 / 6784.0 + 92097.0 / 339200.0,
    11.0 / 84.0 - 187.0 / 2100.0,
    -1.0 / 40.0,
];

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1 > t0`.
///
/// Local error per step is controlled by the embedded 4th-order estimate; a
/// terminal event stops integration at the refined event time.
pub fn integrate<F>(
    f: F,
    y0: &[f64],
    t0: f64,
    t1: f64,
    opts: &IntegratorOptions,
    events: &[EventSpec],
) -> Result<Trajectory>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    opts.validate()?;
    if !(t1 > t0) {
        return Err(CtError::InvalidInput(format!(
            "integration range must have t1 > t0, got [{t0}, {t1}]"
        )));
    }
    let dim = y0.len();
    let mut k = vec![vec![0.0; dim]; 7];
    let mut y = y0.to_vec();
    let mut t = t0;

    f(t, &y, &mut k[0]);
    if !k[0].iter().all(|v| v.is_finite()) || !y.iter().all(|v| v.is_finite()) {
        return Err(CtError::NonFiniteState { t });
    }

    let mut traj = Trajectory {
        dim,
        times: vec![t0],
        states: y.clone(),
        derivs: k[0].clone(),
        event: None,
    };

    let mut h = initial_step(&f, t0, t1, &y, &k[0], opts);
    let mut y_new = vec![0.0; dim];
    let mut y_stage = vec![0.0; dim];
    let mut steps = 0usize;

    while t < t1 {
        if steps >= opts.max_steps {
            return Err(CtError::MaxSteps { t });
        }
        steps += 1;
        h = h.min(opts.max_step).min(t1 - t);
        if h < 1e-14 * (t1 - t0) {
            return Err(CtError::StepUnderflow { t });
        }

        // Stages 2..7 (k1 is the FSAL derivative from the previous step).
        for i in 0..6 {
            for j in 0..dim {
                let mut acc = 0.0;
                for (l, kl) in k.iter().enumerate().take(i + 1) {
                    acc += A[i][l] * kl[j];
                }
                y_stage[j] = y[j] + h * acc;
            }
            let (head, tail) = k.split_at_mut(i + 1);
            let _ = head;
            f(t + C[i] * h, &y_stage, &mut tail[0]);
        }
        // 5th-order solution is the last stage state (b row equals a7 row).
        y_new.copy_from_slice(&y_stage);

        let mut err_sq = 0.0;
        for j in 0..dim {
            let mut e = 0.0;
            for (l, kl) in k.iter().enumerate() {
                e += E[l] * kl[j];
            }
            e *= h;
            let sc = opts.abs_tol + opts.rel_tol * y[j].abs().max(y_new[j].abs());
            err_sq += (e / sc) * (e / sc);
        }
        let err = (err_sq / dim as f64).sqrt();

        if !err.is_finite() || !y_new.iter().all(|v| v.is_finite()) {
            h *= 0.25;
            continue;
        }

        if err <= 1.0 {
            let t_new = t + h;
            let stop = scan_events(
                events, &mut traj, t, &y, &k[0], t_new, &y_new, &k[6], &f,
            );
            if let Some((te, ye, id)) = stop {
                let mut fe = vec![0.0; dim];
                f(te, &ye, &mut fe);
                traj.times.push(te);
                traj.states.extend_from_slice(&ye);
                traj.derivs.extend_from_slice(&fe);
                traj.event = Some(EventHit {
                    t: te,
                    state: ye,
                    id,
                });
                return Ok(traj);
            }
            traj.times.push(t_new);
            traj.states.extend_from_slice(&y_new);
            traj.derivs.extend_from_slice(&k[6]);
            t = t_new;
            std::mem::swap(&mut y, &mut y_new);
            let k6 = k[6].clone();
            k[0].copy_from_slice(&k6);
            let scale = (0.9 * err.powf(-0.2)).clamp(0.2, 5.0);
            h *= scale;
        } else {
            let scale = (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
            h *= scale;
        }
    }
    Ok(traj)
}

/// Interpolated state at `t`; error of the same order as the step tolerance.
pub fn eval_dense(traj: &Trajectory, t: f64) -> Result<Vec<f64>> {
    traj.eval_dense(t)
}

fn initial_step<F>(f: &F, t0: f64, t1: f64, y0: &[f64], f0: &[f64], opts: &IntegratorOptions) -> f64
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    let dim = y0.len();
    let sc: Vec<f64> = y0
        .iter()
        .map(|v| opts.abs_tol + opts.rel_tol * v.abs())
        .collect();
    let d0 = rms(y0, &sc);
    let d1 = rms(f0, &sc);
    let mut h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    h0 = h0.min(t1 - t0);
    let y1: Vec<f64> = (0..dim).map(|j| y0[j] + h0 * f0[j]).collect();
    let mut f1 = vec![0.0; dim];
    f(t0 + h0, &y1, &mut f1);
    let df: Vec<f64> = (0..dim).map(|j| f1[j] - f0[j]).collect();
    let d2 = rms(&df, &sc) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(t1 - t0).min(opts.max_step)
}

fn rms(v: &[f64], sc: &[f64]) -> f64 {
    let s: f64 = v
        .iter()
        .zip(sc)
        .map(|(x, s)| (x / s) * (x / s))
        .sum();
    (s / v.len() as f64).sqrt()
}

/// Scans all events over the accepted step `[ta, tb]`, checking signs at a few
/// interior dense samples so short-lived crossings are not missed. Returns the
/// earliest accepted terminal firing.
#[allow(clippy::too_many_arguments)]
fn scan_events<F>(
    events: &[EventSpec],
    traj: &mut Trajectory,
    ta: f64,
    ya: &[f64],
    fa: &[f64],
    tb: f64,
    yb: &[f64],
    fb: &[f64],
    _f: &F,
) -> Option<(f64, Vec<f64>, String)>
where
    F: Fn(f64, &[f64], &mut [f64]),
{
    if events.is_empty() {
        return None;
    }
    const SUBDIV: usize = 8;
    let dim = ya.len();
    let mut buf = vec![0.0; dim];
    let dense = |t: f64, out: &mut [f64]| {
        if t <= ta {
            out.copy_from_slice(ya);
        } else if t >= tb {
            out.copy_from_slice(yb);
        } else {
            hermite_eval(ta, tb, ya, yb, fa, fb, t, out);
        }
    };

    let mut best: Option<(f64, Vec<f64>, String, bool)> = None;
    for ev in events {
        let mut t_prev = ta;
        let mut g_prev = (ev.test)(ta, ya);
        for m in 1..=SUBDIV {
            let t_cur = ta + (tb - ta) * m as f64 / SUBDIV as f64;
            dense(t_cur, &mut buf);
            let g_cur = (ev.test)(t_cur, &buf);
            if crossing(g_prev, g_cur, ev.direction) {
                // Bisection on the dense output, to 1e-12 in t.
                let (mut lo, mut hi) = (t_prev, t_cur);
                let mut g_lo = g_prev;
                while hi - lo > 1e-12 * hi.abs().max(1.0) {
                    let mid = 0.5 * (lo + hi);
                    dense(mid, &mut buf);
                    let g_mid = (ev.test)(mid, &buf);
                    if (g_lo <= 0.0) == (g_mid <= 0.0) {
                        lo = mid;
                        g_lo = g_mid;
                    } else {
                        hi = mid;
                    }
                }
                let te = 0.5 * (lo + hi);
                dense(te, &mut buf);
                let accepted = ev
                    .guard
                    .as_ref()
                    .is_none_or(|guard| guard(te, &buf));
                if accepted {
                    let earlier = best.as_ref().is_none_or(|(tb_, _, _, _)| te < *tb_);
                    if earlier {
                        best = Some((te, buf.clone(), ev.id.clone(), ev.terminal));
                    }
                    break;
                }
            }
            t_prev = t_cur;
            g_prev = g_cur;
        }
    }

    match best {
        Some((te, ye, id, true)) => Some((te, ye, id)),
        Some((te, ye, id, false)) => {
            if traj.event.is_none() {
                traj.event = Some(EventHit {
                    t: te,
                    state: ye,
                    id,
                });
            }
            None
        }
        None => None,
    }
}

fn crossing(ga: f64, gb: f64, dir: EventDirection) -> bool {
    match dir {
        EventDirection::Decreasing => ga > 0.0 && gb <= 0.0,
        EventDirection::Increasing => ga < 0.0 && gb >= 0.0,
        EventDirection::Any => {
            (ga > 0.0 && gb <= 0.0) || (ga < 0.0 && gb >= 0.0)
        }
    }
}
