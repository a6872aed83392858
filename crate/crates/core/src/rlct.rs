//! Pole extraction: read the learning coefficient lambda_1 and multiplicity
//! m_1 off normal-crossing chart data, and evaluate the learning-curve and
//! stochastic-complexity asymptotics they control.

use crate::error::{Error, Result};
use crate::lattice::Rat;
use crate::resolution::{is_normal_crossing, ChartState};
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Value};

/// Candidate poles of one chart. With prefactor u^(2k) and Jacobian monomial
/// u^h, integrating u^(2kz) u^h du gives a pole of J(z) at z = -(h_i+1)/(2k_i)
/// per variable with k_i > 0; the chart contributes the smallest lambda.
#[derive(Clone, Debug, PartialEq)]
pub struct PoleSpectrum {
    /// (lambda candidate, variable name), in variable order.
    pub candidates: Vec<(Rat, String)>,
    /// None means the chart sees no singularity (H is a unit there).
    pub lambda: Option<Rat>,
    pub multiplicity: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RlctReport {
    /// None when no chart carries a positive prefactor exponent.
    pub lambda1: Option<Rat>,
    pub m1: usize,
    pub charts: Vec<PoleSpectrum>,
    /// lambda1 <= d/2 sanity gate (d = parameter-space dimension), when the
    /// dimension was supplied.
    pub bound_d_over_2: Option<bool>,
}

/// Pole candidates of a terminal chart. The prefactor exponents must all be
/// even: H >= 0 forces H(g(u)) = (monomial)^2 * unit locally.
pub fn chart_poles(state: &ChartState) -> Result<PoleSpectrum> {
    if !is_normal_crossing(state).ok {
        return Err(Error::IncompleteResolution(
            "chart residual is not a unit at the origin".into(),
        ));
    }
    if !state.jacobian_valid {
        return Err(Error::JacobianUnavailable);
    }
    let mut candidates = Vec::new();
    for (i, var) in state.vars().iter().enumerate() {
        let k = &state.prefactor.0[i];
        if k.is_zero() {
            continue;
        }
        if (k % 2i32) != num_bigint::BigInt::from(0) {
            return Err(Error::OddPrefactor {
                var: var.clone(),
                exponent: k.to_string(),
            });
        }
        let h = &state.jacobian.0[i];
        let lambda = Rat::new(h + 1, k.clone());
        candidates.push((lambda, var.clone()));
    }
    let lambda = candidates.iter().map(|(l, _)| l.clone()).min();
    let multiplicity = match &lambda {
        Some(l) => candidates.iter().filter(|(c, _)| c == l).count(),
        None => 0,
    };
    Ok(PoleSpectrum { candidates, lambda, multiplicity })
}

/// Merge chart spectra: global lambda1 is the smallest chart lambda, m1 the
/// largest multiplicity among charts attaining it (log-power dominance).
pub fn aggregate(spectra: &[PoleSpectrum]) -> Result<RlctReport> {
    if spectra.is_empty() {
        return Err(Error::EmptyInput("no chart spectra to aggregate".into()));
    }
    let lambda1 = spectra.iter().filter_map(|s| s.lambda.clone()).min();
    let m1 = match &lambda1 {
        Some(l) => spectra
            .iter()
            .filter(|s| s.lambda.as_ref() == Some(l))
            .map(|s| s.multiplicity)
            .max()
            .unwrap(),
        None => 0,
    };
    Ok(RlctReport {
        lambda1,
        m1,
        charts: spectra.to_vec(),
        bound_d_over_2: None,
    })
}

impl RlctReport {
    pub fn with_bound_check(mut self, d: usize) -> Self {
        self.bound_d_over_2 = Some(half_dim_bound_check(&self, d));
        self
    }
}

/// Expected generalization error shape K(n) = lambda1/n + (m1-1)/(n ln n).
pub fn learning_curve(report: &RlctReport, n: u64) -> Result<f64> {
    if n < 2 {
        return Err(Error::OutOfRange("learning_curve requires n >= 2".into()));
    }
    let lambda = report
        .lambda1
        .as_ref()
        .map(|l| l.to_f64().unwrap())
        .unwrap_or(0.0);
    let nf = n as f64;
    Ok(lambda / nf + (report.m1.saturating_sub(1)) as f64 / (nf * nf.ln()))
}

/// The C-free part of the stochastic complexity bound:
/// lambda1 ln n - (m1-1) ln ln n.
pub fn stochastic_complexity_bound(report: &RlctReport, n: u64) -> Result<f64> {
    if n < 3 {
        return Err(Error::OutOfRange(
            "stochastic_complexity_bound requires n >= 3".into(),
        ));
    }
    let lambda = report
        .lambda1
        .as_ref()
        .map(|l| l.to_f64().unwrap())
        .unwrap_or(0.0);
    let nf = n as f64;
    Ok(lambda * nf.ln() - (report.m1.saturating_sub(1)) as f64 * nf.ln().ln())
}

/// Sanity gate: lambda1 <= d/2 must hold for a model with d parameters and a
/// positive smooth prior (exact rational comparison).
pub fn half_dim_bound_check(report: &RlctReport, d: usize) -> bool {
    match &report.lambda1 {
        Some(l) => *l <= Rat::new((d as i64).into(), 2.into()),
        None => true,
    }
}

impl PoleSpectrum {
    pub fn to_json(&self) -> Value {
        json!({
            "lambda": self.lambda.as_ref().map(|l| l.to_string()),
            "multiplicity": self.multiplicity,
            "candidates": self.candidates.iter()
                .map(|(l, v)| json!([l.to_string(), v]))
                .collect::<Vec<_>>(),
        })
    }
}

impl RlctReport {
    /// Wire format with rationals as strings, e.g. {"lambda1":"3/4","m1":1,...}.
    pub fn to_json(&self) -> Value {
        json!({
            "lambda1": self.lambda1.as_ref().map(|l| l.to_string()),
            "m1": self.m1,
            "charts": self.charts.iter().map(|c| c.to_json()).collect::<Vec<_>>(),
            "bound_d_over_2": self.bound_d_over_2,
        })
    }

    pub fn from_json(v: &Value) -> Result<RlctReport> {
        let bad = |m: &str| Error::Parse { position: 0, message: m.to_string() };
        let lambda1 = match v.get("lambda1") {
            None => return Err(bad("missing lambda1")),
            Some(Value::Null) => None,
            Some(Value::String(s)) => {
                Some(s.parse::<Rat>().map_err(|_| bad("invalid lambda1 rational"))?)
            }
            _ => return Err(bad("lambda1 must be a string rational or null")),
        };
        let m1 = v
            .get("m1")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing m1"))? as usize;
        let mut charts = Vec::new();
        if let Some(arr) = v.get("charts").and_then(Value::as_array) {
            for c in arr {
                let lambda = match c.get("lambda") {
                    Some(Value::String(s)) => {
                        Some(s.parse::<Rat>().map_err(|_| bad("invalid chart lambda"))?)
                    }
                    _ => None,
                };
                let multiplicity =
                    c.get("multiplicity").and_then(Value::as_u64).unwrap_or(0) as usize;
                let mut candidates = Vec::new();
                if let Some(cands) = c.get("candidates").and_then(Value::as_array) {
                    for pair in cands {
                        let l = pair
                            .get(0)
                            .and_then(Value::as_str)
                            .ok_or_else(|| bad("candidate lambda missing"))?
                            .parse::<Rat>()
                            .map_err(|_| bad("invalid candidate rational"))?;
                        let var = pair
                            .get(1)
                            .and_then(Value::as_str)
                            .ok_or_else(|| bad("candidate variable missing"))?
                            .to_string();
                        candidates.push((l, var));
                    }
                }
                charts.push(PoleSpectrum { candidates, lambda, multiplicity });
            }
        }
        let bound_d_over_2 = v.get("bound_d_over_2").and_then(Value::as_bool);
        Ok(RlctReport { lambda1, m1, charts, bound_d_over_2 })
    }
}
