//! System parameters, phase-plane points, and classification verdicts.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CtError, Result};

/// Sign of the forcing term: repulsive (`k = +1`) or attractive (`k = -1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ForceSign {
    Attractive,
    Repulsive,
}

impl ForceSign {
    pub fn sign(self) -> f64 {
        match self {
            ForceSign::Attractive => -1.0,
            ForceSign::Repulsive => 1.0,
        }
    }

    pub fn from_int(k: i64) -> Result<Self> {
        match k {
            -1 => Ok(ForceSign::Attractive),
            1 => Ok(ForceSign::Repulsive),
            _ => Err(CtError::InvalidParams(format!(
                "force sign k must be -1 or +1, got {k}"
            ))),
        }
    }
}

impl Serialize for ForceSign {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_i8(self.sign() as i8)
    }
}

impl<'de> Deserialize<'de> for ForceSign {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let k = i64::deserialize(deserializer)?;
        ForceSign::from_int(k).map_err(serde::de::Error::custom)
    }
}

/// Damping, force sign, and the uniform background bounds `0 < c- <= c+`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub nu: f64,
    pub k: ForceSign,
    pub c_minus: f64,
    pub c_plus: f64,
}

impl Params {
    pub fn new(nu: f64, k: ForceSign, c_minus: f64, c_plus: f64) -> Result<Self> {
        validate_params(Params {
            nu,
            k,
            c_minus,
            c_plus,
        })
    }

    /// Constant-background parameters, `c- = c+ = c_bar`.
    pub fn constant(nu: f64, k: ForceSign, c_bar: f64) -> Result<Self> {
        Self::new(nu, k, c_bar, c_bar)
    }

    pub fn mu_minus(&self) -> f64 {
        (self.c_minus - 0.25 * self.nu * self.nu).sqrt()
    }

    pub fn mu_plus(&self) -> f64 {
        (self.c_plus - 0.25 * self.nu * self.nu).sqrt()
    }
}

/// Exponent `gamma = pi*nu / sqrt(4c - nu^2)`, defined for `nu < 2 sqrt(c)`.
pub fn gamma_exponent(nu: f64, c: f64) -> Option<f64> {
    let disc = 4.0 * c - nu * nu;
    if disc > 0.0 {
        Some(std::f64::consts::PI * nu / disc.sqrt())
    } else {
        None
    }
}

/// Checks the invariants `nu >= 0`, `0 < c- <= c+` and returns the input unchanged.
pub fn validate_params(raw: Params) -> Result<Params> {
    if !raw.nu.is_finite() || raw.nu < 0.0 {
        return Err(CtError::InvalidParams(format!(
            "damping nu must be finite and >= 0, got {}",
            raw.nu
        )));
    }
    if !raw.c_minus.is_finite() || raw.c_minus <= 0.0 {
        return Err(CtError::InvalidParams(format!(
            "lower bound c- must be finite and > 0, got {}",
            raw.c_minus
        )));
    }
    if !raw.c_plus.is_finite() || raw.c_plus < raw.c_minus {
        return Err(CtError::InvalidParams(format!(
            "bounds out of order: c- = {} > c+ = {}",
            raw.c_minus, raw.c_plus
        )));
    }
    Ok(raw)
}

/// A point in the reduced phase plane: `w = u_x / rho`, `s = 1 / rho`.
///
/// `s > 0` for regular states; `s = 0` encodes blow-up.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    pub w: f64,
    pub s: f64,
}

impl PhasePoint {
    pub fn new(w: f64, s: f64) -> Self {
        PhasePoint { w, s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictLabel {
    Subcritical,
    Supercritical,
    Indeterminate,
}

impl std::fmt::Display for VerdictLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            VerdictLabel::Subcritical => write!(f, "subcritical"),
            VerdictLabel::Supercritical => write!(f, "supercritical"),
            VerdictLabel::Indeterminate => write!(f, "indeterminate"),
        }
    }
}

/// Which global-regularity case applied to a sub-critical classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CaseTag {
    #[serde(rename = "rep-#1")]
    Rep1,
    #[serde(rename = "rep-#2.1")]
    Rep21,
    #[serde(rename = "rep-#2.2")]
    Rep22,
    #[serde(rename = "attractive-borderline")]
    AttractiveBorderline,
    #[serde(rename = "none")]
    None,
}

impl std::fmt::Display for CaseTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CaseTag::Rep1 => write!(f, "rep-#1"),
            CaseTag::Rep21 => write!(f, "rep-#2.1"),
            CaseTag::Rep22 => write!(f, "rep-#2.2"),
            CaseTag::AttractiveBorderline => write!(f, "attractive-borderline"),
            CaseTag::None => write!(f, "none"),
        }
    }
}

/// Classification outcome for one phase point.
///
/// `margin` is the signed distance in `w` (at fixed `s`) to the nearest
/// constructed threshold curve: positive for classified points, negative for
/// indeterminate ones. Where no curve crosses the horizontal line at `s`,
/// the distance to the apex of the construction is used instead.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub label: VerdictLabel,
    pub margin: f64,
    pub case_tag: CaseTag,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn accepts_canonical_constant_background() {
        let p = Params::new(0.0, ForceSign::Repulsive, 1.0, 1.0).unwrap();
        assert_eq!(p.c_minus, 1.0);
        assert_eq!(p.c_plus, 1.0);
    }

    #[test]
    fn accepts_ordered_bounds() {
        assert!(Params::new(0.1, ForceSign::Repulsive, 1.0, 2.0).is_ok());
    }

    #[test]
    fn rejects_bounds_out_of_order() {
        let err = Params::new(0.0, ForceSign::Repulsive, 2.0, 1.0).unwrap_err();
        assert!(err.to_string().contains("out of order"));
    }

    #[test]
    fn rejects_negative_damping_and_nonpositive_c() {
        assert!(Params::new(-0.1, ForceSign::Repulsive, 1.0, 1.0).is_err());
        assert!(Params::new(0.0, ForceSign::Repulsive, 0.0, 1.0).is_err());
        assert!(Params::new(0.0, ForceSign::Repulsive, -1.0, 1.0).is_err());
    }

    #[test]
    fn force_sign_round_trips_as_integer() {
        let p = Params::new(0.5, ForceSign::Attractive, 1.0, 2.0).unwrap();
        let json = serde_json::to_string(&p).unwrap();
        assert!(json.contains("\"k\":-1"));
        let back: Params = serde_json::from_str(&json).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<Params>(
            "{\"nu\":0.0,\"k\":2,\"c_minus\":1.0,\"c_plus\":1.0}"
        )
        .is_err());
    }
}
