use serde::{Deserialize, Serialize};

use crate::error::{invalid_arg, Result};
use crate::exec::Estimate;

/// Standard errors added to estimated inputs before they enter a bound.
const SLACK_SIGMAS: f64 = 3.0;

fn check_probability(name: &str, p: f64) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        invalid_arg(format!("{name} = {p} is not a probability"))
    }
}

/// Worst-case upper end of an estimated probability.
fn upper(e: Estimate) -> f64 {
    if e.stderr.is_finite() {
        e.upper(SLACK_SIGMAS).min(1.0)
    } else {
        1.0
    }
}

/// `q_nt ≥ τ² / max Var`; `+∞` when the variance vanishes.
pub fn qnt_via_variance(variance_max: impl Into<Estimate>, tau: f64) -> Result<f64> {
    let v = variance_max.into();
    if !(v.value >= 0.0) || !(tau >= 0.0) {
        return invalid_arg("variance and tolerance must be non-negative");
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    let v = if v.stderr.is_finite() {
        v.upper(SLACK_SIGMAS)
    } else {
        f64::INFINITY
    };
    Ok(if v == 0.0 {
        f64::INFINITY
    } else {
        tau * tau / v
    })
}

/// `q ≥ (β − triv) / frac`, floored at zero; `+∞` when `frac = 0`.
pub fn deterministic_avg_lower_bound(
    beta: f64,
    triv: impl Into<Estimate>,
    frac: impl Into<Estimate>,
) -> Result<f64> {
    let (triv, frac) = (triv.into(), frac.into());
    check_probability("beta", beta)?;
    check_probability("triv", triv.value)?;
    check_probability("frac", frac.value)?;
    let gap = beta - upper(triv);
    if gap <= 0.0 {
        return Ok(0.0);
    }
    let f = upper(frac);
    Ok(if f == 0.0 { f64::INFINITY } else { gap / f })
}

/// `q ≥ 2(α − ½) / frac`, floored at zero.
pub fn random_lower_bound_dec(alpha: f64, frac: impl Into<Estimate>) -> Result<f64> {
    verifiable_lower_bound(alpha, 1.0, 0.0, frac, 0.0)
}

/// `q ≥ 2(α − ½)(β − excluded) / frac − p_v`, floored at zero. With
/// `excluded = Pr[d(s, s*) < 2ε + τ]` and `p_v = 1` this is the ε-learning
/// bound.
pub fn verifiable_lower_bound(
    alpha: f64,
    beta: f64,
    p_v: f64,
    frac: impl Into<Estimate>,
    excluded_mass: impl Into<Estimate>,
) -> Result<f64> {
    let (frac, excluded) = (frac.into(), excluded_mass.into());
    check_probability("alpha", alpha)?;
    check_probability("beta", beta)?;
    check_probability("frac", frac.value)?;
    check_probability("excluded mass", excluded.value)?;
    if !(p_v >= 0.0) {
        return invalid_arg("verification cost must be non-negative");
    }
    let numerator = 2.0 * (alpha - 0.5) * (beta - upper(excluded));
    if numerator <= 0.0 {
        return Ok(0.0);
    }
    let f = upper(frac);
    if f == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok((numerator / f - p_v).max(0.0))
}

/// Parameters echoed into a [`BoundReport`].
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundParameters {
    pub beta: Option<f64>,
    pub alpha: Option<f64>,
    pub tau: Option<f64>,
    pub eps: Option<f64>,
    pub p_v: Option<f64>,
    pub n: Option<usize>,
}

/// The quantities entering a query-complexity lower bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub problem: String,
    pub triv: f64,
    pub frac: f64,
    pub qnt_lower: f64,
    pub lower_bound_value: f64,
    pub parameters: BoundParameters,
}

impl BoundReport {
    pub fn validate(&self) -> Result<()> {
        check_probability("triv", self.triv)?;
        check_probability("frac", self.frac)?;
        if !(self.qnt_lower >= 0.0) || !(self.lower_bound_value >= 0.0) {
            return invalid_arg("bounds must be non-negative");
        }
        Ok(())
    }
}

/// Closed-form report for self-learning `n`-qubit basis states:
/// `triv = frac = 2^{-n}`, `q ≥ (β − 2^{-n}) 2^n`, and `q_nt ≥ τ² 2^n`.
pub fn basis_state_report(n: usize, beta: f64, tau: f64) -> Result<BoundReport> {
    if n == 0 || n > 1000 {
        return invalid_arg("basis-state report needs 1 <= n <= 1000");
    }
    if !(tau > 0.0 && tau < 1.0) {
        return invalid_arg("tolerance must lie in (0, 1)");
    }
    let p = 0.5f64.powi(n as i32);
    Ok(BoundReport {
        problem: format!("basis_states(n={n})"),
        triv: p,
        frac: p,
        qnt_lower: qnt_via_variance(p, tau)?,
        lower_bound_value: deterministic_avg_lower_bound(beta, p, p)?,
        parameters: BoundParameters {
            beta: Some(beta),
            tau: Some(tau),
            n: Some(n),
            ..Default::default()
        },
    })
}
