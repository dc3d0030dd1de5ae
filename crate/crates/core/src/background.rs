//! Background density profiles `c(t)` evaluated along a characteristic.
//!
//! The spatial dependence of a variable background is represented by choosing
//! a different profile per characteristic; the reduced dynamics only sees the
//! value along the path.

use serde::{Deserialize, Serialize};

use crate::error::{CtError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BackgroundSpec {
    Constant {
        value: f64,
    },
    Sinusoid {
        mean: f64,
        amplitude: f64,
        omega: f64,
        phase: f64,
    },
    /// Sampled profile with piecewise-linear interpolation; linear pieces
    /// never overshoot the declared bounds.
    Table {
        t: Vec<f64>,
        c: Vec<f64>,
    },
}

impl BackgroundSpec {
    pub fn constant(value: f64) -> Self {
        BackgroundSpec::Constant { value }
    }

    pub fn sinusoid(mean: f64, amplitude: f64, omega: f64, phase: f64) -> Self {
        BackgroundSpec::Sinusoid {
            mean,
            amplitude,
            omega,
            phase,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            BackgroundSpec::Constant { value } => {
                if !value.is_finite() || *value <= 0.0 {
                    return Err(CtError::InvalidInput(format!(
                        "constant background must be positive, got {value}"
                    )));
                }
            }
            BackgroundSpec::Sinusoid {
                mean, amplitude, ..
            } => {
                if mean - amplitude.abs() <= 0.0 {
                    return Err(CtError::InvalidInput(
                        "sinusoid background reaches vacuum".into(),
                    ));
                }
            }
            BackgroundSpec::Table { t, c } => {
                if t.len() != c.len() || t.len() < 2 {
                    return Err(CtError::InvalidInput(
                        "table background needs matching t/c samples (at least two)".into(),
                    ));
                }
                if !t.windows(2).all(|p| p[1] > p[0]) {
                    return Err(CtError::InvalidInput(
                        "table background times must be strictly increasing".into(),
                    ));
                }
                if c.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                    return Err(CtError::InvalidInput(
                        "table background values must be positive".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    /// Tight bounds `(c-, c+)` on the evaluated profile.
    pub fn bounds(&self) -> (f64, f64) {
        match self {
            BackgroundSpec::Constant { value } => (*value, *value),
            BackgroundSpec::Sinusoid {
                mean, amplitude, ..
            } => (mean - amplitude.abs(), mean + amplitude.abs()),
            BackgroundSpec::Table { c, .. } => {
                let lo = c.iter().cloned().fold(f64::INFINITY, f64::min);
                let hi = c.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        match self {
            BackgroundSpec::Constant { value } => Ok(*value),
            BackgroundSpec::Sinusoid {
                mean,
                amplitude,
                omega,
                phase,
            } => Ok(mean + amplitude * (omega * t + phase).sin()),
            BackgroundSpec::Table { t: ts, c } => {
                if t < ts[0] || t > ts[ts.len() - 1] {
                    return Err(CtError::BackgroundOutOfRange { t });
                }
                Ok(table_interp(ts, c, t))
            }
        }
    }

    /// Like [`eval`](Self::eval) but clamps table queries to the sampled range.
    ///
    /// Used inside ODE right-hand sides after the caller has verified that the
    /// integration window is covered (event bisection may query epsilon outside).
    pub fn eval_clamped(&self, t: f64) -> f64 {
        match self {
            BackgroundSpec::Table { t: ts, c } => {
                let t = t.clamp(ts[0], ts[ts.len() - 1]);
                table_interp(ts, c, t)
            }
            _ => self.eval(t).expect("formula backgrounds are total"),
        }
    }

    /// True when `[t0, t1]` lies inside the evaluable range.
    pub fn covers(&self, t0: f64, t1: f64) -> bool {
        match self {
            BackgroundSpec::Table { t, .. } => t0 >= t[0] && t1 <= t[t.len() - 1],
            _ => true,
        }
    }
}

fn table_interp(ts: &[f64], cs: &[f64], t: f64) -> f64 {
    let i = match ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => return cs[i],
        Err(i) => i.clamp(1, ts.len() - 1),
    };
    let (t0, t1) = (ts[i - 1], ts[i]);
    let u = (t - t0) / (t1 - t0);
    cs[i - 1] + u * (cs[i] - cs[i - 1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_is_exact() {
        let bg = BackgroundSpec::constant(1.0);
        assert_eq!(bg.eval(17.3).unwrap(), 1.0);
    }

    #[test]
    fn sinusoid_values() {
        let bg = BackgroundSpec::sinusoid(1.0, 0.05, 1.0, 0.0);
        assert!((bg.eval(std::f64::consts::FRAC_PI_2).unwrap() - 1.05).abs() < 1e-15);
        assert_eq!(bg.eval(0.0).unwrap(), 1.0);
    }

    #[test]
    fn table_interpolates_and_errors_outside() {
        let bg = BackgroundSpec::Table {
            t: vec![0.0, 1.0, 2.0],
            c: vec![1.0, 2.0, 1.5],
        };
        bg.validate().unwrap();
        assert!((bg.eval(0.5).unwrap() - 1.5).abs() < 1e-15);
        assert!((bg.eval(1.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(matches!(
            bg.eval(3.0),
            Err(CtError::BackgroundOutOfRange { .. })
        ));
        assert_eq!(bg.eval_clamped(3.0), 1.5);
    }

    #[test]
    fn json_encoding_matches_contract() {
        let bg = BackgroundSpec::sinusoid(1.0, 0.05, 1.0, 0.0);
        let json = serde_json::to_value(&bg).unwrap();
        assert_eq!(json["kind"], "sinusoid");
        assert_eq!(json["amplitude"], 0.05);
        let parsed: BackgroundSpec =
            serde_json::from_str(r#"{"kind":"constant","value":1.0}"#).unwrap();
        assert_eq!(parsed, BackgroundSpec::constant(1.0));
        let parsed: BackgroundSpec =
            serde_json::from_str(r#"{"kind":"table","t":[0.0,1.0],"c":[1.0,1.2]}"#).unwrap();
        parsed.validate().unwrap();
    }

    #[test]
    fn evaluation_is_deterministic_and_in_bounds() {
        let specs = [
            BackgroundSpec::constant(2.0),
            BackgroundSpec::sinusoid(1.0, 0.3, 2.5, 0.7),
            BackgroundSpec::Table {
                t: vec![0.0, 0.5, 1.7, 4.0],
                c: vec![1.0, 1.4, 0.9, 1.1],
            },
        ];
        for spec in &specs {
            let (lo, hi) = spec.bounds();
            for i in 0..200 {
                let t = 4.0 * i as f64 / 199.0;
                let a = spec.eval(t).unwrap();
                let b = spec.eval(t).unwrap();
                assert_eq!(a.to_bits(), b.to_bits());
                assert!(a >= lo - 1e-12 && a <= hi + 1e-12);
            }
        }
    }
}
