//! Threshold curves `sqrt(2P)`, `sqrt(2N)`, their domains and endpoint
//! formulas, the closing condition, and classification of phase points for
//! the repulsive system.
//!
//! Both curve families are maximal solutions of the scalar family
//! `dV/dsigma = nu*sqrt(2V) + d - c*sigma, V(0) = 0` with `d > 0`: the P
//! branch uses `sigma = s, d = 1`, the N branch integrates backward from its
//! anchor via `sigma = s* - s, d = c2*s* - 1`. The square-root singularity at
//! the anchor is handled by a local series seed; the far zero of `V` is a
//! transversal crossing located by event detection.

use serde::{Deserialize, Serialize};

use crate::error::{CtError, Result};
use crate::odeint::{integrate, EventDirection, EventSpec, IntegratorOptions};
use crate::params::{
    gamma_exponent, validate_params, CaseTag, ForceSign, Params, PhasePoint, Verdict, VerdictLabel,
};
use crate::quad::{integral_inv_sqrt_left, integral_inv_sqrt_right};

/// Number of tabulated samples per curve.
pub const CURVE_SAMPLES: usize = 4001;

/// Default classification tolerance for the indeterminate band.
pub const DEFAULT_CLASSIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    P,
    N,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Unbounded,
    Bounded,
}

/// Tabulated threshold curve `g(s) = sqrt(2P(s))` or `sqrt(2N(s))`.
///
/// Internally the smooth quantity `V = P` (or `N`) is stored together with its
/// exact ODE derivative at every sample; evaluation is cubic Hermite on `V`
/// followed by the square root, which preserves `g >= 0` and reproduces the
/// root-type behavior at the endpoints.
#[derive(Debug, Clone)]
pub struct ThresholdCurve {
    pub branch: Branch,
    pub c_param: f64,
    pub nu: f64,
    /// The `s` where `g = 0` by construction: 0 for P, `s*` for N.
    pub anchor: f64,
    /// `[s_lo, s_hi]`, ascending.
    pub domain: (f64, f64),
    /// True when the stored range was cut by the construction cap rather
    /// than by a zero of `V` or the `s = 0` floor.
    pub truncated: bool,
    s: Vec<f64>,
    v: Vec<f64>,
    dvds: Vec<f64>,
}

impl ThresholdCurve {
    fn grace(&self) -> f64 {
        1e-9 * (1.0 + self.domain.1.abs())
    }

    pub fn contains(&self, s: f64) -> bool {
        let eps = self.grace();
        s >= self.domain.0 - eps && s <= self.domain.1 + eps
    }

    /// `V(s)` (that is `P(s)` or `N(s)`), clamped to the domain.
    pub fn value_clamped(&self, s: f64) -> f64 {
        let s = s.clamp(self.domain.0, self.domain.1);
        let i = match self.s.binary_search_by(|x| x.partial_cmp(&s).unwrap()) {
            Ok(i) => return self.v[i].max(0.0),
            Err(i) => i.clamp(1, self.s.len() - 1),
        };
        let (s0, s1) = (self.s[i - 1], self.s[i]);
        let h = s1 - s0;
        let u = (s - s0) / h;
        let (u2, u3) = (u * u, u * u * u);
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * self.v[i - 1]
            + (u3 - 2.0 * u2 + u) * h * self.dvds[i - 1]
            + (-2.0 * u3 + 3.0 * u2) * self.v[i]
            + (u3 - u2) * h * self.dvds[i];
        v.max(0.0)
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        if !self.contains(s) {
            return Err(CtError::OutOfDomain {
                s,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        Ok(self.value_clamped(s))
    }

    /// `g(s) = sqrt(2V(s))`.
    pub fn g(&self, s: f64) -> Result<f64> {
        Ok((2.0 * self.value(s)?).sqrt())
    }

    pub fn g_clamped(&self, s: f64) -> f64 {
        (2.0 * self.value_clamped(s)).sqrt()
    }

    /// Tabulated `(s, g)` samples, ascending in `s`.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.s
            .iter()
            .zip(&self.v)
            .map(|(&s, &v)| (s, (2.0 * v.max(0.0)).sqrt()))
    }

    /// `integral of ds / sqrt(2V)` over the whole stored domain, with the
    /// square-root substitution at both endpoint zeros.
    pub fn inverse_speed_integral(&self) -> Result<f64> {
        let (lo, hi) = self.domain;
        let n = self.s.len();
        let i_peak = (0..n)
            .max_by(|&a, &b| self.v[a].partial_cmp(&self.v[b]).unwrap())
            .unwrap();
        let sm = self.s[i_peak].clamp(lo, hi);
        let q = |s: f64| 2.0 * self.value_clamped(s);
        let qp_lo = 2.0 * self.dvds[0];
        let qp_hi = 2.0 * self.dvds[n - 1];
        let tol = 1e-11;
        let left = if self.v[0].abs() < 1e-300 {
            integral_inv_sqrt_left(q, lo, sm, qp_lo, tol)?
        } else {
            crate::quad::adaptive_simpson(|s| 1.0 / q(s).sqrt(), lo, sm, tol)?
        };
        let right = if self.v[n - 1].abs() < 1e-300 {
            integral_inv_sqrt_right(q, sm, hi, qp_hi, tol)?
        } else {
            crate::quad::adaptive_simpson(|s| 1.0 / q(s).sqrt(), sm, hi, tol)?
        };
        Ok(left + right)
    }

    /// `integral of ds / sqrt(2V)` over `[s_lo, s_to]`, assuming the only
    /// zero of `V` in the range is the left domain endpoint.
    pub fn inverse_speed_integral_to(&self, s_to: f64) -> Result<f64> {
        if !self.contains(s_to) {
            return Err(CtError::OutOfDomain {
                s: s_to,
                lo: self.domain.0,
                hi: self.domain.1,
            });
        }
        let lo = self.domain.0;
        let q = |s: f64| 2.0 * self.value_clamped(s);
        integral_inv_sqrt_left(q, lo, s_to.max(lo), 2.0 * self.dvds[0], 1e-11)
    }
}

struct RawCurve {
    sigma: Vec<f64>,
    v: Vec<f64>,
    dv: Vec<f64>,
    /// Location of the far zero of `V`, when one was found before the cap.
    sigma_end: Option<f64>,
}

/// Local series `V(sigma)` of the maximal solution of
/// `dV/dsigma = nu_signed sqrt(2V) + d - c sigma, V(0) = 0` near the anchor:
/// `g = sqrt(2 d sigma) (1 + a sqrt(sigma) + b sigma)`.
fn family_series_v(nu_signed: f64, d: f64, c: f64, sigma: f64) -> f64 {
    let a = nu_signed * std::f64::consts::SQRT_2 / (3.0 * d.sqrt());
    let b = (2.0 * nu_signed * nu_signed / 9.0 - c) / (4.0 * d);
    let g = (2.0 * d * sigma).sqrt() * (1.0 + a * sigma.sqrt() + b * sigma);
    0.5 * g * g
}

fn family_switch_radius(c: f64) -> f64 {
    1e-6 * (1.0 / c).max(1.0)
}

/// Integrates the family ODE from its series seed up to `sigma_cap`,
/// optionally stopping where `V` returns to zero.
fn integrate_family(
    nu_signed: f64,
    d: f64,
    c: f64,
    sigma_cap: f64,
    stop_at_zero: bool,
) -> Result<crate::odeint::Trajectory> {
    let switch = family_switch_radius(c);
    let v0 = family_series_v(nu_signed, d, c, switch);
    let rhs = move |sigma: f64, y: &[f64], dy: &mut [f64]| {
        dy[0] = nu_signed * (2.0 * y[0].max(0.0)).sqrt() + d - c * sigma;
    };
    let events = if stop_at_zero {
        vec![EventSpec::new(
            "v-zero",
            EventDirection::Decreasing,
            true,
            |_s, y: &[f64]| y[0],
        )]
    } else {
        Vec::new()
    };
    // The dense output is a cubic Hermite, so its interpolation error scales
    // like h^4 independent of the step controller; the step cap keeps dense
    // values accurate enough for the tabulated samples.
    let opts = IntegratorOptions {
        rel_tol: 1e-12,
        abs_tol: 1e-14,
        max_step: sigma_cap / 2000.0,
        ..Default::default()
    };
    integrate(rhs, &[v0], switch, sigma_cap, &opts, &events)
}

/// Solves `dV/dsigma = nu*sqrt(2V) + d - c*sigma`, `V(0) = 0`, `d > 0`,
/// stopping at the return of `V` to zero or at `sigma_cap`.
///
/// When the domain is bounded, the far half of the curve is re-integrated
/// backward from the located zero (the mirrored member of the same family),
/// so that samples near each singular endpoint come from a solve anchored at
/// that endpoint.
fn sqrt_ode_curve(nu: f64, d: f64, c: f64, sigma_cap: f64, n: usize) -> Result<RawCurve> {
    if !(d > 0.0 && c > 0.0 && nu >= 0.0 && sigma_cap > 0.0) {
        return Err(CtError::InvalidInput(format!(
            "sqrt-ODE needs d, c, sigma_cap > 0 and nu >= 0 (d={d}, c={c}, nu={nu}, cap={sigma_cap})"
        )));
    }
    let switch = family_switch_radius(c);
    if sigma_cap <= 4.0 * switch {
        return Err(CtError::InvalidInput(format!(
            "curve range cap {sigma_cap} too small (seed radius {switch})"
        )));
    }
    let traj = integrate_family(nu, d, c, sigma_cap, true)?;
    let bounded = traj.event().is_some();
    let mut hi = traj.t_end();
    if bounded {
        // Newton-polish the far zero on the dense output; the bisected event
        // time alone leaves a relative error in V that the sqrt amplifies
        // near the endpoint.
        for _ in 0..3 {
            let v_here = traj.eval_dense(hi.min(traj.t_end()))?[0];
            let slope = nu * (2.0 * v_here.max(0.0)).sqrt() + d - c * hi;
            if slope.abs() < 1e-300 {
                break;
            }
            hi -= v_here / slope;
        }
        hi = hi.clamp(switch, sigma_cap);
    }
    let sigma_end = bounded.then_some(hi);

    // Mirrored solve anchored at the far zero, covering the outer half.
    let back = if bounded {
        let d_back = c * hi - d;
        Some((d_back, integrate_family(-nu, d_back, c, 0.5 * hi, false)?))
    } else {
        None
    };

    let mut sigma = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    for j in 0..n {
        let xi = j as f64 / (n - 1) as f64;
        // sqrt-graded sampling at the anchor (and at the far zero when there
        // is one) keeps finite differences of g accurate near the endpoints.
        let sg = if bounded {
            hi * (0.5 * std::f64::consts::PI * xi).sin().powi(2)
        } else {
            hi * xi * xi
        };
        let val = if sg <= switch {
            family_series_v(nu, d, c, sg)
        } else if j == n - 1 && bounded {
            0.0
        } else if j == n - 1 {
            traj.last_state()[0].max(0.0)
        } else {
            match &back {
                Some((d_back, back_traj)) if sg > 0.5 * hi => {
                    let tau = hi - sg;
                    if tau <= switch {
                        family_series_v(-nu, *d_back, c, tau)
                    } else {
                        back_traj.eval_dense(tau.min(back_traj.t_end()))?[0].max(0.0)
                    }
                }
                _ => traj.eval_dense(sg.min(traj.t_end()))?[0].max(0.0),
            }
        };
        sigma.push(sg);
        v.push(val);
    }
    let dv: Vec<f64> = sigma
        .iter()
        .zip(&v)
        .map(|(&sg, &val)| nu * (2.0 * val.max(0.0)).sqrt() + d - c * sg)
        .collect();
    Ok(RawCurve {
        sigma,
        v,
        dv,
        sigma_end,
    })
}

/// Constructs `g = sqrt(2P)` for `dP/ds = nu sqrt(2P) + 1 - c1 s, P(0) = 0`
/// on `Dom(P) intersected with [0, s_max]`.
pub fn solve_p(c1: f64, nu: f64, s_max: f64) -> Result<ThresholdCurve> {
    let raw = sqrt_ode_curve(nu, 1.0, c1, s_max, CURVE_SAMPLES)?;
    let hi = *raw.sigma.last().unwrap();
    Ok(ThresholdCurve {
        branch: Branch::P,
        c_param: c1,
        nu,
        anchor: 0.0,
        domain: (0.0, hi),
        truncated: raw.sigma_end.is_none() && gamma_exponent(nu, c1).is_some(),
        s: raw.sigma,
        v: raw.v,
        dvds: raw.dv,
    })
}

/// Constructs `g = sqrt(2N)` for `dN/ds = -nu sqrt(2N) + 1 - c2 s, N(s*) = 0`
/// by backward integration from `s*` down to `max(s**, 0)`.
pub fn solve_n(c2: f64, nu: f64, s_star: f64) -> Result<ThresholdCurve> {
    if !(s_star > 1.0 / c2) {
        return Err(CtError::InvalidInput(format!(
            "N-curve anchor must satisfy s* > 1/c2, got s* = {s_star}, 1/c2 = {}",
            1.0 / c2
        )));
    }
    let d = c2 * s_star - 1.0;
    let raw = sqrt_ode_curve(nu, d, c2, s_star, CURVE_SAMPLES)?;
    let n = raw.sigma.len();
    let mut s = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut dvds = Vec::with_capacity(n);
    for j in (0..n).rev() {
        s.push(s_star - raw.sigma[j]);
        v.push(raw.v[j]);
        dvds.push(-raw.dv[j]);
    }
    let lo = s[0].max(0.0);
    s[0] = lo;
    Ok(ThresholdCurve {
        branch: Branch::N,
        c_param: c2,
        nu,
        anchor: s_star,
        domain: (lo, s_star),
        truncated: false,
        s,
        v,
        dvds,
    })
}

/// Closed-form domain endpoints of the auxiliary curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DomainReport {
    pub s_tilde: Option<f64>,
    pub s_star: f64,
    pub s_star_star: Option<f64>,
    pub gamma1: Option<f64>,
    pub gamma2: Option<f64>,
    pub regime_p: Regime,
    pub regime_n: Regime,
}

/// Endpoint formulas: `s~ = (1 + e^gamma1)/c1` and
/// `s** = 1/c2 - (s* - 1/c2) e^gamma2` when `nu < 2 sqrt(c_i)`.
pub fn domain_endpoints(c1: f64, c2: f64, nu: f64, s_star: f64) -> Result<DomainReport> {
    if !(c1 > 0.0 && c2 > 0.0 && nu >= 0.0) {
        return Err(CtError::InvalidInput(
            "domain endpoints need c1, c2 > 0 and nu >= 0".into(),
        ));
    }
    if !(s_star > 1.0 / c2) {
        return Err(CtError::InvalidInput(format!(
            "s* must exceed 1/c2, got s* = {s_star}, 1/c2 = {}",
            1.0 / c2
        )));
    }
    let gamma1 = gamma_exponent(nu, c1);
    let gamma2 = gamma_exponent(nu, c2);
    Ok(DomainReport {
        s_tilde: gamma1.map(|g| (1.0 + g.exp()) / c1),
        s_star,
        s_star_star: gamma2.map(|g| 1.0 / c2 - (s_star - 1.0 / c2) * g.exp()),
        gamma1,
        gamma2,
        regime_p: if gamma1.is_some() {
            Regime::Bounded
        } else {
            Regime::Unbounded
        },
        regime_n: if gamma2.is_some() {
            Regime::Bounded
        } else {
            Regime::Unbounded
        },
    })
}

/// Result of the closing-condition evaluation, carrying both the case
/// analysis and the equivalent endpoint sign test `s** <= 0` computed with
/// `(c1, c2) = (c+, c-)` and `s* = s+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosingReport {
    pub holds: bool,
    pub case_tag: CaseTag,
    pub s_plus: Option<f64>,
    pub s_star_star: Option<f64>,
    pub sign_test: bool,
}

pub fn closing_condition(params: &Params) -> ClosingReport {
    let (nu, c_minus, c_plus) = (params.nu, params.c_minus, params.c_plus);
    let s_plus = gamma_exponent(nu, c_plus).map(|g| (1.0 + g.exp()) / c_plus);

    // Case analysis route of the global-regularity criterion.
    let (holds, case_tag) = match s_plus {
        None => (true, CaseTag::Rep1),
        Some(sp) => {
            if nu >= 2.0 * c_minus.sqrt() {
                if sp * c_minus > 1.0 {
                    (true, CaseTag::Rep21)
                } else {
                    (false, CaseTag::None)
                }
            } else {
                let gm = gamma_exponent(nu, c_minus).expect("nu < 2 sqrt(c-)");
                if gm.exp() * (sp * c_minus - 1.0) >= 1.0 {
                    (true, CaseTag::Rep22)
                } else {
                    (false, CaseTag::None)
                }
            }
        }
    };

    // Independent sign test on the endpoint formula.
    let (sign_test, s_star_star) = match s_plus {
        None => (true, None),
        Some(sp) => match gamma_exponent(nu, c_minus) {
            // Dom(N) is unbounded below whenever the anchor is admissible.
            None => (sp > 1.0 / c_minus, None),
            Some(gm) => {
                let ss = 1.0 / c_minus - (sp - 1.0 / c_minus) * gm.exp();
                (ss <= 0.0, Some(ss))
            }
        },
    };

    ClosingReport {
        holds,
        case_tag,
        s_plus,
        s_star_star,
        sign_test,
    }
}

/// `L_P(w, s) = w + g(s)` for a P-branch curve, `L_N(w, s) = w - g(s)` for N.
pub fn lyapunov_eval(curve: &ThresholdCurve, point: PhasePoint) -> Result<f64> {
    let g = curve.g(point.s)?;
    Ok(match curve.branch {
        Branch::P => point.w + g,
        Branch::N => point.w - g,
    })
}

/// Pre-built threshold constructions for one repulsive parameter set.
///
/// Building the curves once and classifying many points against them is the
/// intended batch pattern; the curves are immutable and shareable.
#[derive(Debug)]
pub struct RepulsiveClassifier {
    params: Params,
    closing: ClosingReport,
    p_minus: ThresholdCurve,
    n_plus: Option<ThresholdCurve>,
    /// Closed-form anchor `s~(c-)` of the supercritical construction, when
    /// `nu < 2 sqrt(c-)`.
    s_star_sup: Option<f64>,
    p_plus: Option<ThresholdCurve>,
    n_minus: Option<ThresholdCurve>,
}

impl RepulsiveClassifier {
    /// `s_max` caps the tabulated range of curves with unbounded domains;
    /// classification beyond the cap reports an out-of-range error.
    pub fn new(params: Params, s_max: f64) -> Result<Self> {
        let params = validate_params(params)?;
        if params.k != ForceSign::Repulsive {
            return Err(CtError::InvalidParams(
                "repulsive classifier requires k = +1".into(),
            ));
        }
        if !(s_max > 0.0) {
            return Err(CtError::InvalidParams("s_max must be positive".into()));
        }
        let (nu, c_minus, c_plus) = (params.nu, params.c_minus, params.c_plus);
        let closing = closing_condition(&params);

        let s_star_sup = gamma_exponent(nu, c_minus).map(|g| (1.0 + g.exp()) / c_minus);
        let p_minus_cap = match s_star_sup {
            Some(st) => 1.01 * st,
            None => s_max.max(1.0),
        };
        let p_minus = solve_p(c_minus, nu, p_minus_cap)?;
        let n_plus = match s_star_sup {
            Some(st) => Some(solve_n(c_plus, nu, st)?),
            None => None,
        };

        let (p_plus, n_minus) = if closing.holds {
            match closing.s_plus {
                Some(sp) => (
                    Some(solve_p(c_plus, nu, 1.01 * sp)?),
                    Some(solve_n(c_minus, nu, sp)?),
                ),
                None => (Some(solve_p(c_plus, nu, s_max.max(1.0))?), None),
            }
        } else {
            (None, None)
        };

        Ok(RepulsiveClassifier {
            params,
            closing,
            p_minus,
            n_plus,
            s_star_sup,
            p_plus,
            n_minus,
        })
    }

    pub fn params(&self) -> &Params {
        &self.params
    }

    pub fn closing(&self) -> &ClosingReport {
        &self.closing
    }

    /// Constructed curves, labeled for export: ("P-", "N+", "P+", "N-").
    pub fn curves(&self) -> Vec<(&'static str, &ThresholdCurve)> {
        let mut out = vec![("P-", &self.p_minus)];
        if let Some(c) = &self.n_plus {
            out.push(("N+", c));
        }
        if let Some(c) = &self.p_plus {
            out.push(("P+", c));
        }
        if let Some(c) = &self.n_minus {
            out.push(("N-", c));
        }
        out
    }

    /// Margin of membership in the invariant subcritical construction:
    /// positive inside, negative outside, `None` when no subcritical region
    /// was constructed (closing condition fails).
    pub fn subcritical_margin(&self, point: PhasePoint) -> Result<Option<f64>> {
        if !self.closing.holds {
            return Ok(None);
        }
        let (w, s) = (point.w, point.s);
        let pp = self.p_plus.as_ref().expect("p_plus built when closing holds");
        let m = match (self.closing.s_plus, &self.n_minus) {
            (Some(sp), Some(nm)) => {
                if s >= sp {
                    sp - s
                } else {
                    let lower = w + pp.g_clamped(s);
                    let upper = nm.g_clamped(s) - w;
                    lower.min(upper)
                }
            }
            _ => {
                if !pp.contains(s) {
                    return Err(CtError::OutOfDomain {
                        s,
                        lo: pp.domain.0,
                        hi: pp.domain.1,
                    });
                }
                w + pp.g_clamped(s)
            }
        };
        Ok(Some(m))
    }

    pub fn classify(&self, point: PhasePoint, tol: f64) -> Result<Verdict> {
        let (w, s) = (point.w, point.s);
        if !(s > 0.0) || !w.is_finite() || !s.is_finite() {
            return Err(CtError::InvalidInput(format!(
                "phase point must have finite w and s > 0, got (w, s) = ({w}, {s})"
            )));
        }

        let in_sup = match self.s_star_sup {
            Some(st) => {
                if s >= st {
                    true
                } else {
                    let np = self.n_plus.as_ref().expect("N+ built when nu < 2 sqrt(c-)");
                    !(w > -self.p_minus.g_clamped(s) && w < np.g_clamped(s))
                }
            }
            None => {
                if !self.p_minus.contains(s) {
                    return Err(CtError::OutOfDomain {
                        s,
                        lo: self.p_minus.domain.0,
                        hi: self.p_minus.domain.1,
                    });
                }
                w <= -self.p_minus.g_clamped(s)
            }
        };

        let in_sub = if !self.closing.holds {
            false
        } else {
            let pp = self.p_plus.as_ref().expect("p_plus built when closing holds");
            match (self.closing.s_plus, &self.n_minus) {
                (Some(sp), Some(nm)) => {
                    s < sp && w > -pp.g_clamped(s) && w < nm.g_clamped(s)
                }
                _ => {
                    if !pp.contains(s) {
                        return Err(CtError::OutOfDomain {
                            s,
                            lo: pp.domain.0,
                            hi: pp.domain.1,
                        });
                    }
                    w > -pp.g_clamped(s)
                }
            }
        };

        // Distance in w to the nearest constructed curve at this s; where no
        // curve crosses the line, fall back to distance to the construction
        // apex (0, s*).
        let mut dist = f64::INFINITY;
        let mut any = false;
        if self.p_minus.contains(s) {
            dist = dist.min((w + self.p_minus.g_clamped(s)).abs());
            any = true;
        }
        if let Some(np) = &self.n_plus {
            if np.contains(s) {
                dist = dist.min((w - np.g_clamped(s)).abs());
                any = true;
            }
        }
        if let Some(pp) = &self.p_plus {
            if pp.contains(s) {
                dist = dist.min((w + pp.g_clamped(s)).abs());
                any = true;
            }
        }
        if let Some(nm) = &self.n_minus {
            if nm.contains(s) {
                dist = dist.min((w - nm.g_clamped(s)).abs());
                any = true;
            }
        }
        if !any {
            let apex = self.s_star_sup.unwrap_or(self.p_minus.domain.1);
            dist = (w * w + (s - apex) * (s - apex)).sqrt();
        }

        let (label, margin) = if in_sub && !in_sup {
            (VerdictLabel::Subcritical, dist)
        } else if in_sup && !in_sub {
            (VerdictLabel::Supercritical, dist)
        } else {
            (VerdictLabel::Indeterminate, -dist)
        };
        let (label, margin) = if margin.abs() < tol {
            (VerdictLabel::Indeterminate, -margin.abs())
        } else {
            (label, margin)
        };
        let case_tag = if label == VerdictLabel::Subcritical {
            self.closing.case_tag
        } else {
            CaseTag::None
        };
        Ok(Verdict {
            label,
            margin,
            case_tag,
        })
    }

    /// Upper bound on the blow-up time of a supercritical point; `None` for
    /// points not classified supercritical.
    pub fn breakdown_time_bound(&self, point: PhasePoint) -> Result<Option<f64>> {
        let v = self.classify(point, 0.0)?;
        if v.label != VerdictLabel::Supercritical {
            return Ok(None);
        }
        match self.s_star_sup {
            // 0 <= nu < 2 sqrt(c-): uniform bound pi/mu- + (pi/2)/sqrt(c-) + pi/mu+.
            Some(_) => {
                let mu_m = self.params.mu_minus();
                let mu_p = self.params.mu_plus();
                let pi = std::f64::consts::PI;
                Ok(Some(
                    pi / mu_m + 0.5 * pi / self.params.c_minus.sqrt() + pi / mu_p,
                ))
            }
            // nu >= 2 sqrt(c-): T0 = integral of ds / sqrt(2 P-) over [0, s0].
            None => Ok(Some(self.p_minus.inverse_speed_integral_to(point.s)?)),
        }
    }
}

/// One-off classification; batch callers should build a
/// [`RepulsiveClassifier`] once instead.
pub fn classify_point(point: PhasePoint, params: &Params, tol: f64) -> Result<Verdict> {
    let cls = RepulsiveClassifier::new(*params, point.s * 1.05 + 1.0)?;
    cls.classify(point, tol)
}

/// One-off breakdown-time bound for a supercritical point.
pub fn breakdown_time_bound(point: PhasePoint, params: &Params) -> Result<Option<f64>> {
    let cls = RepulsiveClassifier::new(*params, point.s * 1.05 + 1.0)?;
    cls.breakdown_time_bound(point)
}

/// Rectangular grid in the `(w, s)` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub w_min: f64,
    pub w_max: f64,
    pub n_w: usize,
    pub s_min: f64,
    pub s_max: f64,
    pub n_s: usize,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_min < self.w_max && self.s_min < self.s_max) || self.n_w < 2 || self.n_s < 2 {
            return Err(CtError::InvalidInput("degenerate sweep grid".into()));
        }
        if !(self.s_min > 0.0) {
            return Err(CtError::InvalidInput("sweep grid needs s_min > 0".into()));
        }
        Ok(())
    }

    pub fn w(&self, i: usize) -> f64 {
        self.w_min + (self.w_max - self.w_min) * i as f64 / (self.n_w - 1) as f64
    }

    pub fn s(&self, j: usize) -> f64 {
        self.s_min + (self.s_max - self.s_min) * j as f64 / (self.n_s - 1) as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub w: f64,
    pub s: f64,
    pub verdict: Verdict,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub grid: SweepGrid,
    pub params: Params,
    /// Row-major: `s` ascending in the outer loop, `w` ascending inside.
    pub cells: Vec<SweepCell>,
}

/// Classifies every grid node. Cells are independent and processed in
/// parallel; the output order is deterministic row-major.
pub fn region_sweep(grid: &SweepGrid, params: &Params, tol: f64) -> Result<SweepResult> {
    use rayon::prelude::*;
    grid.validate()?;
    let cls = RepulsiveClassifier::new(*params, grid.s_max * 1.01 + 1e-9)?;
    // The uniform bound is point-independent in the oscillatory regime.
    let uniform_bound = if cls.s_star_sup.is_some() {
        let pi = std::f64::consts::PI;
        Some(pi / params.mu_minus() + 0.5 * pi / params.c_minus.sqrt() + pi / params.mu_plus())
    } else {
        None
    };
    let cells: Vec<SweepCell> = (0..grid.n_s * grid.n_w)
        .into_par_iter()
        .map(|idx| {
            let j = idx / grid.n_w;
            let i = idx % grid.n_w;
            let point = PhasePoint::new(grid.w(i), grid.s(j));
            let verdict = cls.classify(point, tol)?;
            let bound = if verdict.label == VerdictLabel::Supercritical {
                match uniform_bound {
                    Some(b) => Some(b),
                    None => cls.breakdown_time_bound(point)?,
                }
            } else {
                None
            };
            Ok(SweepCell {
                w: point.w,
                s: point.s,
                verdict,
                bound,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        grid: *grid,
        params: *params,
        cells,
    })
}
