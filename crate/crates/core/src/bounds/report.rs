//! Bound reports, DU-spread reductions and their serialized forms.

use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Measure {
    EssInf,
    EssSup,
    Var,
    Es,
    Rvar,
    Prob,
}

impl Measure {
    pub fn as_str(self) -> &'static str {
        match self {
            Measure::EssInf => "ess_inf",
            Measure::EssSup => "ess_sup",
            Measure::Var => "var",
            Measure::Es => "es",
            Measure::Rvar => "rvar",
            Measure::Prob => "prob",
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "essinf" => Ok(Measure::EssInf),
            "esssup" => Ok(Measure::EssSup),
            "var" => Ok(Measure::Var),
            "es" => Ok(Measure::Es),
            "rvar" => Ok(Measure::Rvar),
            "prob" => Ok(Measure::Prob),
            _ => Err(Error::domain(format!("unknown measure '{s}'"))),
        }
    }
}

/// Dependence structure attaining one of the four reported values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Attainer {
    DlUpperTail,
    DlLowerTail,
    Comonotone,
    CountermonotoneTail,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Attaining {
    pub constrained_worst: Attainer,
    pub constrained_best: Attainer,
    pub unconstrained_worst: Attainer,
    pub unconstrained_best: Attainer,
}

/// Lower, upper and total reduction of the DU-spread.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DuReduction {
    pub r_l: f64,
    pub r_u: f64,
    pub r: f64,
}

/// `R_L = (Lo - L)/(U - L)`, `R_U = (U - Uo)/(U - L)`, `R = R_L + R_U`.
pub fn du_reduction(l: f64, u: f64, lo: f64, uo: f64) -> Result<DuReduction> {
    if !(l.is_finite() && u.is_finite()) {
        return Err(Error::InfiniteSpread);
    }
    if !(u > l) {
        return Err(Error::DegenerateSpread { lower: l, upper: u });
    }
    let r_l = (lo - l) / (u - l);
    let r_u = (u - uo) / (u - l);
    Ok(DuReduction { r_l, r_u, r: r_l + r_u })
}

/// Best/worst values of one measure at one level, with and without the order
/// constraint.
///
/// For `prob` the "worst" values are the lower probability bounds `m^o`, `m`
/// and the "best" values the upper bounds `M^o`, `M`, so the nesting reads
/// `m <= m^o <= M^o <= M`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundReport {
    pub measure: Measure,
    #[serde(serialize_with = "ext_real_opt")]
    pub p: Option<f64>,
    #[serde(serialize_with = "ext_real_opt")]
    pub q: Option<f64>,
    #[serde(serialize_with = "ext_real_opt")]
    pub t: Option<f64>,
    #[serde(serialize_with = "ext_real")]
    pub constrained_worst: f64,
    #[serde(serialize_with = "ext_real")]
    pub constrained_best: f64,
    #[serde(serialize_with = "ext_real")]
    pub unconstrained_worst: f64,
    #[serde(serialize_with = "ext_real")]
    pub unconstrained_best: f64,
    /// `null` when the spread is infinite or not defined for the measure.
    #[serde(rename = "R_L", serialize_with = "ext_real_opt")]
    pub r_l: Option<f64>,
    #[serde(rename = "R_U", serialize_with = "ext_real_opt")]
    pub r_u: Option<f64>,
    #[serde(rename = "R", serialize_with = "ext_real_opt")]
    pub r: Option<f64>,
    pub attaining: Attaining,
    pub grid_n: usize,
    pub truncation_m: f64,
}

impl BoundReport {
    pub fn du(&self) -> Option<DuReduction> {
        match (self.r_l, self.r_u, self.r) {
            (Some(r_l), Some(r_u), Some(r)) => Some(DuReduction { r_l, r_u, r }),
            _ => None,
        }
    }

    /// Feasible-set nesting of the four values, up to `tol`.
    pub fn nesting_holds(&self, tol: f64) -> bool {
        let (l, lo, uo, u) = if self.measure == Measure::Prob {
            (self.unconstrained_worst, self.constrained_worst, self.constrained_best, self.unconstrained_best)
        } else {
            (self.unconstrained_best, self.constrained_best, self.constrained_worst, self.unconstrained_worst)
        };
        let le = |a: f64, b: f64| a <= b || (a - b) <= tol * (1.0 + a.abs().max(b.abs())) || a == b;
        le(l, lo) && le(lo, uo) && le(uo, u)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Infinite values are written as the strings `"inf"` / `"-inf"`.
pub fn ext_real<S: Serializer>(v: &f64, s: S) -> std::result::Result<S::Ok, S::Error> {
    if v.is_finite() {
        s.serialize_f64(*v)
    } else if v.is_nan() {
        s.serialize_none()
    } else if *v > 0.0 {
        s.serialize_str("inf")
    } else {
        s.serialize_str("-inf")
    }
}

fn ext_real_opt<S: Serializer>(v: &Option<f64>, s: S) -> std::result::Result<S::Ok, S::Error> {
    match v {
        Some(x) => ext_real(x, s),
        None => s.serialize_none(),
    }
}

/// Formats an extended real for CSV output.
pub fn fmt_ext(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        String::new()
    } else if v > 0.0 {
        "inf".to_string()
    } else {
        "-inf".to_string()
    }
}
