//! Constant-background solver for the full system along characteristics,
//! with closed-form Jacobians at `nu = 0` and the neutrality,
//! anomalous-solution, and non-existence demonstrations.
//!
//! Per label the closed Lagrangian system is
//! `x' = u, u' = -nu u + k E, E' = -c u` with `E = -phi_x` (so that
//! `E_x = rho - c`), while the velocity gradient is propagated through the
//! reduced `(w, s)` variables; the Jacobian is recovered as
//! `Gamma = rho0 * s`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CtError, Result};
use crate::odeint::{integrate, EventDirection, EventSpec, IntegratorOptions, Trajectory};
use crate::params::ForceSign;
use crate::quad::adaptive_simpson;

/// Initial profiles `(rho0, u0)` with their closed-form derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialDatum {
    /// `rho0 = c`, `u0 = 0`.
    Constant { c_bar: f64 },
    /// Gaussian velocity bump and a neutral density wiggle:
    /// `rho0 = base + ra (1 - (x/rw)^2) exp(-x^2 / (2 rw^2))` (zero integral),
    /// `u0 = ua exp(-x^2 / (2 uw^2))`.
    Bump {
        base: f64,
        rho_amplitude: f64,
        rho_width: f64,
        u_amplitude: f64,
        u_width: f64,
    },
    /// `rho0 = base`, `u0 = sin x / (1 + x^2)^{3/8}`: neutral at t = 0 with
    /// `u0'` not integrable.
    AnomalousVelocity { base: f64 },
    /// Sampled profiles on a label grid.
    Table {
        alpha: Vec<f64>,
        rho0: Vec<f64>,
        u0: Vec<f64>,
        du0: Vec<f64>,
    },
}

impl InitialDatum {
    pub fn velocity_bump(base: f64, amplitude: f64, width: f64) -> Self {
        InitialDatum::Bump {
            base,
            rho_amplitude: 0.0,
            rho_width: 1.0,
            u_amplitude: amplitude,
            u_width: width,
        }
    }

    pub fn rho0(&self, x: f64) -> f64 {
        match self {
            InitialDatum::Constant { c_bar } => *c_bar,
            InitialDatum::Bump {
                base,
                rho_amplitude,
                rho_width,
                ..
            } => {
                let z = x / rho_width;
                base + rho_amplitude * (1.0 - z * z) * (-0.5 * z * z).exp()
            }
            InitialDatum::AnomalousVelocity { base } => *base,
            InitialDatum::Table { alpha, rho0, .. } => table_interp(alpha, rho0, x),
        }
    }

    pub fn u0(&self, x: f64) -> f64 {
        match self {
            InitialDatum::Constant { .. } => 0.0,
            InitialDatum::Bump {
                u_amplitude,
                u_width,
                ..
            } => {
                let z = x / u_width;
                u_amplitude * (-0.5 * z * z).exp()
            }
            InitialDatum::AnomalousVelocity { .. } => x.sin() / (1.0 + x * x).powf(0.375),
            InitialDatum::Table { alpha, u0, .. } => table_interp(alpha, u0, x),
        }
    }

    pub fn du0(&self, x: f64) -> f64 {
        match self {
            InitialDatum::Constant { .. } => 0.0,
            InitialDatum::Bump {
                u_amplitude,
                u_width,
                ..
            } => {
                let z = x / u_width;
                -u_amplitude * x / (u_width * u_width) * (-0.5 * z * z).exp()
            }
            InitialDatum::AnomalousVelocity { .. } => {
                let q = 1.0 + x * x;
                x.cos() / q.powf(0.375) - 0.75 * x * x.sin() / q.powf(1.375)
            }
            InitialDatum::Table { alpha, du0, .. } => table_interp(alpha, du0, x),
        }
    }
}

fn table_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let x = x.clamp(xs[0], xs[xs.len() - 1]);
    let i = match xs.binary_search_by(|v| v.partial_cmp(&x).unwrap()) {
        Ok(i) => return ys[i],
        Err(i) => i.clamp(1, xs.len() - 1),
    };
    let u = (x - xs[i - 1]) / (xs[i] - xs[i - 1]);
    ys[i - 1] + u * (ys[i] - ys[i - 1])
}

/// Uniform Lagrangian label grid on `[-l, l]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelGrid {
    pub l: f64,
    pub n: usize,
}

impl LabelGrid {
    pub fn alphas(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| -self.l + 2.0 * self.l * i as f64 / (self.n - 1) as f64)
            .collect()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.l / (self.n - 1) as f64
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 3 || !(self.l > 0.0) {
            return Err(CtError::InvalidInput("label grid needs n >= 3, l > 0".into()));
        }
        Ok(())
    }
}

/// Closed-form Jacobian of the characteristic map at `nu = 0`:
/// repulsive `Gamma = 1 + (rho0/c - 1)(1 - cos(sqrt(c) t)) + u0' sin(sqrt(c) t)/sqrt(c)`,
/// attractive with `cosh`/`sinh` in place of `cos`/`sin`.
pub fn gamma_exact(datum: &InitialDatum, c_bar: f64, k: ForceSign, t: f64, alpha: f64) -> f64 {
    let rc = c_bar.sqrt();
    let a = datum.rho0(alpha) / c_bar - 1.0;
    let b = datum.du0(alpha);
    match k {
        ForceSign::Repulsive => 1.0 + a * (1.0 - (rc * t).cos()) + b * (rc * t).sin() / rc,
        ForceSign::Attractive => 1.0 + a * (1.0 - (rc * t).cosh()) + b * (rc * t).sinh() / rc,
    }
}

/// Eulerian snapshot assembled from the per-label trajectories.
#[derive(Debug, Clone, Serialize)]
pub struct FluidState {
    pub t: f64,
    pub alpha: Vec<f64>,
    pub x: Vec<f64>,
    pub gamma: Vec<f64>,
    pub rho: Vec<f64>,
    pub u: Vec<f64>,
    pub e: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharBlowup {
    pub t: f64,
    pub alpha: f64,
}

#[derive(Debug)]
pub struct CharSolution {
    pub states: Vec<FluidState>,
    pub blowup: Option<CharBlowup>,
    /// Per-label trajectories over `[x, u, E, w, s]`, in label order.
    pub label_trajectories: Vec<Trajectory>,
    pub alphas: Vec<f64>,
    pub rho0: Vec<f64>,
}

#[derive(Debug, Clone, Copy)]
pub struct CharOptions {
    pub integrator: IntegratorOptions,
    pub n_snapshots: usize,
    /// Maximum allowed profile deviation from the far-field state at the
    /// truncation boundary.
    pub tail_tol: f64,
    /// Neutrality threshold: reject when `|integral(rho0 - c)| > tol * l`.
    pub neutrality_tol: f64,
}

impl Default for CharOptions {
    fn default() -> Self {
        CharOptions {
            integrator: IntegratorOptions {
                max_step: 0.02,
                ..Default::default()
            },
            n_snapshots: 9,
            tail_tol: 1e-6,
            neutrality_tol: 1e-6,
        }
    }
}

/// Integrates the closed per-label system up to `horizon`, stopping at the
/// first Jacobian zero over all labels.
pub fn solve_characteristics(
    datum: &InitialDatum,
    c_bar: f64,
    k: ForceSign,
    nu: f64,
    grid: &LabelGrid,
    horizon: f64,
    opts: &CharOptions,
) -> Result<CharSolution> {
    grid.validate()?;
    if !(c_bar > 0.0) || !(nu >= 0.0) || !(horizon > 0.0) {
        return Err(CtError::InvalidInput(
            "solver needs c > 0, nu >= 0, horizon > 0".into(),
        ));
    }
    let alphas = grid.alphas();
    let n = alphas.len();
    let rho0: Vec<f64> = alphas.iter().map(|&a| datum.rho0(a)).collect();
    let u0: Vec<f64> = alphas.iter().map(|&a| datum.u0(a)).collect();
    let du0: Vec<f64> = alphas.iter().map(|&a| datum.du0(a)).collect();

    if rho0.iter().any(|&r| !(r > 0.0)) {
        return Err(CtError::InvalidInput("rho0 must be positive".into()));
    }
    let tail_dev = (rho0[0] - c_bar)
        .abs()
        .max((rho0[n - 1] - c_bar).abs())
        .max(u0[0].abs())
        .max(u0[n - 1].abs());
    if tail_dev > opts.tail_tol {
        return Err(CtError::InvalidInput(format!(
            "datum does not decay at the truncation boundary (deviation {tail_dev:.3e})"
        )));
    }

    // E(0, alpha) by cumulative trapezoid of rho0 - c from the left, where the
    // field vanishes; neutrality makes it vanish on the right too.
    let h = grid.spacing();
    let mut e0 = vec![0.0; n];
    for i in 1..n {
        e0[i] = e0[i - 1] + 0.5 * h * ((rho0[i - 1] - c_bar) + (rho0[i] - c_bar));
    }
    let total = e0[n - 1];
    if total.abs() > opts.neutrality_tol * grid.l {
        return Err(CtError::NonNeutral {
            excess: total.abs(),
        });
    }

    let ks = k.sign();
    let graze = 1e-6;
    let label_trajectories: Vec<Trajectory> = (0..n)
        .into_par_iter()
        .map(|i| {
            let rhs = move |t: f64, y: &[f64], dy: &mut [f64]| {
                let _ = t;
                // y = [x, u, E, w, s]
                dy[0] = y[1];
                dy[1] = -nu * y[1] + ks * y[2];
                dy[2] = -c_bar * y[1];
                dy[3] = -nu * y[3] + ks * (1.0 - c_bar * y[4]);
                dy[4] = y[3];
            };
            let events = vec![
                EventSpec::new("gamma-zero", EventDirection::Decreasing, true, |_t, y: &[f64]| {
                    y[4]
                })
                .with_guard(|_t, y: &[f64]| y[3].abs() >= 1e-5),
                EventSpec::new("gamma-graze", EventDirection::Increasing, true, |_t, y: &[f64]| {
                    y[3]
                })
                .with_guard(move |_t, y: &[f64]| y[4] <= graze),
                EventSpec::new("gamma-deep", EventDirection::Decreasing, true, move |_t, y: &[f64]| {
                    y[4] + 10.0 * graze
                }),
            ];
            let y0 = [
                alphas[i],
                u0[i],
                e0[i],
                du0[i] / rho0[i],
                1.0 / rho0[i],
            ];
            integrate(rhs, &y0, 0.0, horizon, &opts.integrator, &events)
        })
        .collect::<Result<Vec<_>>>()?;

    let blowup = label_trajectories
        .iter()
        .enumerate()
        .filter_map(|(i, tr)| tr.event().map(|e| (e.t, alphas[i])))
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .map(|(t, alpha)| CharBlowup { t, alpha });

    let t_end = blowup.as_ref().map_or(horizon, |b| b.t);
    let n_snap = opts.n_snapshots.max(2);
    let mut states = Vec::with_capacity(n_snap);
    let mut buf = [0.0; 5];
    for j in 0..n_snap {
        let t = t_end * j as f64 / (n_snap - 1) as f64;
        let mut state = FluidState {
            t,
            alpha: alphas.clone(),
            x: vec![0.0; n],
            gamma: vec![0.0; n],
            rho: vec![0.0; n],
            u: vec![0.0; n],
            e: vec![0.0; n],
        };
        for i in 0..n {
            let tr = &label_trajectories[i];
            tr.eval_dense_into(t.min(tr.t_end()), &mut buf)?;
            state.x[i] = buf[0];
            state.u[i] = buf[1];
            state.e[i] = buf[2];
            let gamma = rho0[i] * buf[4];
            state.gamma[i] = gamma;
            state.rho[i] = rho0[i] / gamma;
        }
        states.push(state);
    }

    Ok(CharSolution {
        states,
        blowup,
        label_trajectories,
        alphas,
        rho0,
    })
}

/// Per-snapshot neutrality and regularity diagnostics, all computed in
/// Lagrangian variables: `I(t) = integral of (rho0 - c Gamma) d alpha`.
#[derive(Debug, Clone, Serialize)]
pub struct NeutralityReport {
    pub times: Vec<f64>,
    pub mass_fluctuation: Vec<f64>,
    pub l1_fluctuation: Vec<f64>,
    pub velocity_tv: Vec<f64>,
    pub u0_integral: f64,
    pub u0_integral_zero: bool,
}

pub fn neutrality_report(states: &[FluidState], c_bar: f64) -> Result<NeutralityReport> {
    if states.is_empty() {
        return Err(CtError::InvalidInput("no states to report on".into()));
    }
    let mut report = NeutralityReport {
        times: Vec::new(),
        mass_fluctuation: Vec::new(),
        l1_fluctuation: Vec::new(),
        velocity_tv: Vec::new(),
        u0_integral: 0.0,
        u0_integral_zero: false,
    };
    for state in states {
        let n = state.alpha.len();
        let h = (state.alpha[n - 1] - state.alpha[0]) / (n - 1) as f64;
        let mut mass = 0.0;
        let mut l1 = 0.0;
        for i in 0..n {
            let weight = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
            let rho0 = state.rho[i] * state.gamma[i];
            let dev = rho0 - c_bar * state.gamma[i];
            mass += weight * h * dev;
            l1 += weight * h * dev.abs();
        }
        let tv: f64 = state.u.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
        report.times.push(state.t);
        report.mass_fluctuation.push(mass);
        report.l1_fluctuation.push(l1);
        report.velocity_tv.push(tv);
    }
    let first = &states[0];
    let n = first.alpha.len();
    report.u0_integral = first.u[n - 1] - first.u[0];
    report.u0_integral_zero = report.u0_integral.abs() <= 1e-8;
    Ok(report)
}

/// Symmetric-window integrals of `Gamma(t, .) - 1` for a sequence of
/// truncation radii, with the absolute-integral growth diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct AnomalousReport {
    pub t: f64,
    pub r: Vec<f64>,
    /// `J(R) = integral of (Gamma - 1) over [-R, R]`.
    pub j: Vec<f64>,
    /// `integral of |Gamma - 1|` over the same windows.
    pub abs_integral: Vec<f64>,
    /// Log-log slope of the absolute integral against R.
    pub growth_exponent: f64,
    /// Spread (max - min) of the last three `J` values.
    pub tail_spread: f64,
}

fn window_integrals(
    datum: &InitialDatum,
    c_bar: f64,
    t: f64,
    r_list: &[f64],
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rs: Vec<f64> = r_list.to_vec();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let gamma_dev = |alpha: f64| gamma_exact(datum, c_bar, ForceSign::Repulsive, t, alpha) - 1.0;
    // Composite Simpson in symmetric pairs, accumulated outward so each
    // radius reuses the inner windows.
    let step = 0.02;
    let mut j = Vec::with_capacity(rs.len());
    let mut j_abs = Vec::with_capacity(rs.len());
    let mut acc = 0.0;
    let mut acc_abs = 0.0;
    let mut prev_r = 0.0;
    for &r in &rs {
        let span = r - prev_r;
        // Simpson weights require an even panel count.
        let panels = (((span / step).ceil() as usize).max(2) + 1) & !1usize;
        let h = span / panels as f64;
        // Integrand folded onto [0, R]: f(a) + f(-a).
        let folded = |a: f64| gamma_dev(a) + gamma_dev(-a);
        let folded_abs = |a: f64| gamma_dev(a).abs() + gamma_dev(-a).abs();
        let mut sum = folded(prev_r) + folded(r);
        let mut sum_abs = folded_abs(prev_r) + folded_abs(r);
        for m in 1..panels {
            let a = prev_r + m as f64 * h;
            let weight = if m % 2 == 1 { 4.0 } else { 2.0 };
            sum += weight * folded(a);
            sum_abs += weight * folded_abs(a);
        }
        acc += sum * h / 3.0;
        acc_abs += sum_abs * h / 3.0;
        j.push(acc);
        j_abs.push(acc_abs);
        prev_r = r;
    }
    Ok((j, j_abs))
}

pub fn anomalous_demo(
    datum: &InitialDatum,
    c_bar: f64,
    t: f64,
    r_list: &[f64],
) -> Result<AnomalousReport> {
    if r_list.len() < 3 {
        return Err(CtError::InvalidInput(
            "anomalous demo needs at least three radii".into(),
        ));
    }
    let (j, abs_integral) = window_integrals(datum, c_bar, t, r_list)?;
    let m = j.len();
    let tail = &j[m - 3..];
    let tail_spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut rs: Vec<f64> = r_list.to_vec();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let growth_exponent = {
        let (x0, x1) = (rs[0].ln(), rs[m - 1].ln());
        let (y0, y1) = (
            abs_integral[0].max(1e-300).ln(),
            abs_integral[m - 1].max(1e-300).ln(),
        );
        (y1 - y0) / (x1 - x0)
    };
    Ok(AnomalousReport {
        t,
        r: rs,
        j,
        abs_integral,
        growth_exponent,
        tail_spread,
    })
}

/// Far-field velocity jump for the non-neutral datum `rho0 = c + 1/(1+x^2)`,
/// `u0 = 0`: `Delta(R, t) = integral of g over [-R, R] * sin(sqrt(c) t)/sqrt(c)`,
/// with limit `pi sin(sqrt(c) t)/sqrt(c)`.
#[derive(Debug, Clone, Serialize)]
pub struct NonexistenceReport {
    pub t: f64,
    pub r: Vec<f64>,
    pub delta: Vec<f64>,
    pub limit: f64,
}

pub fn nonexistence_demo(c_bar: f64, t: f64, r_list: &[f64]) -> Result<NonexistenceReport> {
    if !(c_bar > 0.0) {
        return Err(CtError::InvalidInput("c must be positive".into()));
    }
    let rc = c_bar.sqrt();
    let factor = (rc * t).sin() / rc;
    let mut rs: Vec<f64> = r_list.to_vec();
    rs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut delta = Vec::with_capacity(rs.len());
    for &r in &rs {
        // integral of 1/(1+x^2) over [-R, R]; fold the tail |x| > 1 onto
        // [1/R, 1] via x -> 1/x, where the integrand is form-invariant.
        let core = adaptive_simpson(|x| 1.0 / (1.0 + x * x), -1.0, 1.0, 1e-12)?;
        let tail = if r > 1.0 {
            2.0 * adaptive_simpson(|y| 1.0 / (1.0 + y * y), 1.0 / r, 1.0, 1e-12)?
        } else {
            2.0 * adaptive_simpson(|x| 1.0 / (1.0 + x * x), 0.0, r, 1e-12)? - core
        };
        delta.push((core + tail) * factor);
    }
    Ok(NonexistenceReport {
        t,
        r: rs,
        delta,
        limit: std::f64::consts::PI * factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gamma_exact_examples() {
        let steady = InitialDatum::Constant { c_bar: 1.0 };
        for t in [0.0, 0.7, 3.0] {
            assert_eq!(gamma_exact(&steady, 1.0, ForceSign::Repulsive, t, 0.3), 1.0);
            assert_eq!(gamma_exact(&steady, 1.0, ForceSign::Attractive, t, 0.3), 1.0);
        }

        // rho0 = 1, u0' = -2 at the probed label: Gamma = 1 - 2 sin t,
        // first zero at t = pi/6.
        let datum = InitialDatum::Table {
            alpha: vec![-1.0, 0.0, 1.0],
            rho0: vec![1.0, 1.0, 1.0],
            u0: vec![0.0, 0.0, 0.0],
            du0: vec![-2.0, -2.0, -2.0],
        };
        let t_star = std::f64::consts::PI / 6.0;
        assert!(gamma_exact(&datum, 1.0, ForceSign::Repulsive, t_star, 0.0).abs() < 1e-12);
        assert!(gamma_exact(&datum, 1.0, ForceSign::Repulsive, 0.5 * t_star, 0.0) > 0.0);

        // Attractive with u0' = 1: Gamma = 1 + sinh t > 0 for t >= 0.
        let datum = InitialDatum::Table {
            alpha: vec![-1.0, 0.0, 1.0],
            rho0: vec![1.0, 1.0, 1.0],
            u0: vec![0.0, 0.0, 0.0],
            du0: vec![1.0, 1.0, 1.0],
        };
        for t in [0.0, 1.0, 2.5] {
            let g = gamma_exact(&datum, 1.0, ForceSign::Attractive, t, 0.0);
            assert!((g - (1.0 + t.sinh())).abs() < 1e-12);
        }
    }

    #[test]
    fn steady_state_stays_constant() {
        let datum = InitialDatum::Constant { c_bar: 1.0 };
        let grid = LabelGrid { l: 5.0, n: 51 };
        let sol = solve_characteristics(
            &datum,
            1.0,
            ForceSign::Repulsive,
            0.0,
            &grid,
            2.0,
            &CharOptions::default(),
        )
        .unwrap();
        assert!(sol.blowup.is_none());
        let last = sol.states.last().unwrap();
        for i in 0..last.alpha.len() {
            assert!((last.gamma[i] - 1.0).abs() < 1e-9);
            assert!((last.rho[i] - 1.0).abs() < 1e-9);
            assert!(last.u[i].abs() < 1e-9);
        }
    }

    #[test]
    fn numeric_jacobian_matches_closed_form() {
        let datum = InitialDatum::Bump {
            base: 1.0,
            rho_amplitude: 0.2,
            rho_width: 1.0,
            u_amplitude: 0.3,
            u_width: 1.2,
        };
        let grid = LabelGrid { l: 8.0, n: 201 };
        let mut opts = CharOptions::default();
        opts.integrator.rel_tol = 1e-10;
        opts.n_snapshots = 5;
        let sol =
            solve_characteristics(&datum, 1.0, ForceSign::Repulsive, 0.0, &grid, 1.0, &opts)
                .unwrap();
        let mut worst: f64 = 0.0;
        for state in &sol.states {
            for (i, &alpha) in state.alpha.iter().enumerate() {
                let exact = gamma_exact(&datum, 1.0, ForceSign::Repulsive, state.t, alpha);
                worst = worst.max((state.gamma[i] - exact).abs());
            }
        }
        assert!(worst <= 1e-6, "max |Gamma - exact| = {worst:e}");
    }

    #[test]
    fn supercritical_bump_blowup_location_and_time() {
        // u0' minimum is -2 at the label where the closed form first
        // vanishes: t* = pi/6 for c = 1.
        let width: f64 = 1.0;
        let amp = 2.0 * width * (0.5f64).exp() / 1.0_f64;
        let datum = InitialDatum::velocity_bump(1.0, -amp, width);
        let du_min = (0..=1000)
            .map(|i| datum.du0(-3.0 + 6.0 * i as f64 / 1000.0))
            .fold(f64::INFINITY, f64::min);
        assert!((du_min + 2.0).abs() < 1e-4, "du0 min = {du_min}");

        let grid = LabelGrid { l: 10.0, n: 401 };
        let sol = solve_characteristics(
            &datum,
            1.0,
            ForceSign::Repulsive,
            0.0,
            &grid,
            2.0,
            &CharOptions::default(),
        )
        .unwrap();
        let b = sol.blowup.expect("supercritical bump must break down");
        assert!(
            (b.t - std::f64::consts::PI / 6.0).abs() < 1e-4,
            "t* = {} at alpha = {}",
            b.t,
            b.alpha
        );
        assert!((b.alpha + width).abs() < grid.spacing() + 1e-9);
    }

    #[test]
    fn neutrality_propagates_for_zero_mean_du0() {
        let datum = InitialDatum::velocity_bump(1.0, 0.4, 1.0);
        let grid = LabelGrid { l: 8.0, n: 401 };
        let sol = solve_characteristics(
            &datum,
            1.0,
            ForceSign::Repulsive,
            0.0,
            &grid,
            3.0,
            &CharOptions::default(),
        )
        .unwrap();
        let report = neutrality_report(&sol.states, 1.0).unwrap();
        assert!(report.u0_integral_zero);
        for (t, i_t) in report.times.iter().zip(&report.mass_fluctuation) {
            assert!(i_t.abs() <= 1e-8, "I({t}) = {i_t:e}");
        }
    }

    #[test]
    fn non_neutral_datum_is_rejected() {
        // One-signed density bump: E cannot decay on both sides.
        let datum = InitialDatum::Table {
            alpha: (0..201).map(|i| -8.0 + 16.0 * i as f64 / 200.0).collect(),
            rho0: (0..201)
                .map(|i| {
                    let x: f64 = -8.0 + 16.0 * i as f64 / 200.0;
                    1.0 + 0.3 * (-0.5 * x * x).exp()
                })
                .collect(),
            u0: vec![0.0; 201],
            du0: vec![0.0; 201],
        };
        let grid = LabelGrid { l: 8.0, n: 201 };
        let err = solve_characteristics(
            &datum,
            1.0,
            ForceSign::Repulsive,
            0.0,
            &grid,
            1.0,
            &CharOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, CtError::NonNeutral { .. }));
    }

    #[test]
    fn anomalous_velocity_fails_to_converge() {
        let datum = InitialDatum::AnomalousVelocity { base: 1.0 };
        let radii = [1e2, 1e3, 1e4, 1e5];
        let report = anomalous_demo(&datum, 1.0, 0.1, &radii).unwrap();

        let control = InitialDatum::velocity_bump(1.0, 1.0, 1.0);
        let control_report = anomalous_demo(&control, 1.0, 0.1, &radii).unwrap();

        // At t = 0 nothing has moved.
        let zero = anomalous_demo(&datum, 1.0, 0.0, &radii).unwrap();
        assert!(zero.j.iter().all(|v| v.abs() < 1e-12));

        // Schwartz control converges; the anomalous tail keeps oscillating.
        assert!(control_report.tail_spread < 1e-10);
        assert!(
            report.tail_spread > 10.0 * control_report.tail_spread.max(1e-12),
            "spread {:e} vs control {:e}",
            report.tail_spread,
            control_report.tail_spread
        );
        // The L1 mass of Gamma - 1 grows like R^(1/4).
        assert!(
            (report.growth_exponent - 0.25).abs() < 0.05,
            "exponent {}",
            report.growth_exponent
        );
    }

    #[test]
    fn nonexistence_far_field_jump() {
        let radii = [1e2, 1e3, 1e4, 1e5];
        let quarter = nonexistence_demo(1.0, std::f64::consts::FRAC_PI_2, &radii).unwrap();
        assert!((quarter.limit - std::f64::consts::PI).abs() < 1e-12);
        let last = *quarter.delta.last().unwrap();
        assert!((last - quarter.limit).abs() < 1e-4, "Delta = {last}");

        let zero = nonexistence_demo(1.0, 0.0, &radii).unwrap();
        assert!(zero.delta.iter().all(|v| v.abs() < 1e-12));

        let full = nonexistence_demo(1.0, std::f64::consts::PI, &radii).unwrap();
        assert!(full.delta.iter().all(|v| v.abs() < 1e-10));
    }
}
