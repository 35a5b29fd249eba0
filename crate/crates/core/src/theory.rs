//! Closed-form exponents of the fractal Weyl and resolvent bounds, for
//! overlay against empirical fits.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fup::beta_e;

/// Gap parameters. `δ` is required; the others enable the formulas that use them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GapInputs {
    pub delta: f64,
    /// Surface gap exponent, user supplied.
    pub beta_bd: Option<f64>,
    /// Baker gap exponent, from Fekete bounds or user supplied.
    pub beta: Option<f64>,
    /// Energy gap exponent; derived from `gamma` when absent.
    pub beta_e: Option<f64>,
    /// Additive-energy exponent.
    pub gamma: Option<f64>,
}

impl GapInputs {
    pub fn validate(&self) -> Result<()> {
        require_delta(self.delta)?;
        for (name, v) in [
            ("beta_bd", self.beta_bd),
            ("beta", self.beta),
            ("beta_e", self.beta_e),
            ("gamma", self.gamma),
        ] {
            if let Some(v) = v {
                if !v.is_finite() {
                    return Err(Error::Domain(format!("{name} = {v} is not finite")));
                }
            }
        }
        Ok(())
    }

    /// `β_E`, taken as given or derived from `γ`.
    pub fn resolved_beta_e(&self) -> Result<Option<f64>> {
        match (self.beta_e, self.gamma) {
            (Some(b), _) => Ok(Some(b)),
            (None, Some(g)) => beta_e(self.delta, g).map(Some),
            (None, None) => Ok(None),
        }
    }
}

fn require_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("δ = {delta} is outside (0, 1)")))
    }
}

/// `min(4(ν − β_BD), 2(ν − (1/2 − δ)), δ)`; negative for `ν < β_BD`.
pub fn surface_weyl_exponent(nu: f64, delta: f64, beta_bd: f64) -> Result<f64> {
    require_delta(delta)?;
    Ok((4.0 * (nu - beta_bd))
        .min(2.0 * (nu - (0.5 - delta)))
        .min(delta))
}

/// `(1 + (1 − δ − 2β_BD)/(1 − δ − 2ν))·ν` for `0 < ν ≤ β_BD`.
///
/// The endpoint `ν = β_BD` is accepted so overlays are continuous; the bound
/// itself is stated on the open interval.
pub fn resolvent_exponent(nu: f64, delta: f64, beta_bd: f64) -> Result<f64> {
    require_delta(delta)?;
    if beta_bd.is_nan() || beta_bd <= 0.0 {
        return Err(Error::Domain(format!("β_BD = {beta_bd} must be > 0")));
    }
    if !(nu > 0.0 && nu <= beta_bd) {
        return Err(Error::Domain(format!(
            "ν = {nu} is outside (0, β_BD] with β_BD = {beta_bd}"
        )));
    }
    let denom = 1.0 - delta - 2.0 * nu;
    if denom.is_nan() || denom <= 0.0 {
        return Err(Error::Domain(format!(
            "1 − δ − 2ν = {denom} must be positive (β_BD must not exceed (1 − δ)/2)"
        )));
    }
    Ok((1.0 + (1.0 - delta - 2.0 * beta_bd) / denom) * nu)
}

/// `min(4(ν − β), 4(ν − β_E), 2(ν − (1/2 − δ)), δ)`.
pub fn baker_weyl_exponent(nu: f64, delta: f64, beta: f64, beta_e: f64) -> Result<f64> {
    require_delta(delta)?;
    Ok((4.0 * (nu - beta))
        .min(4.0 * (nu - beta_e))
        .min(2.0 * (nu - (0.5 - delta)))
        .min(delta))
}

/// Where a supplied `β_BD` sits relative to `1/2 − δ` and `1/2 − δ + δ/8`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BetaBdSanity {
    pub lower: f64,
    pub upper: f64,
    /// `β_BD > 1/2 − δ`.
    pub above_trivial: bool,
    /// `β_BD ≤ 1/2 − δ + δ/8`; advisory only.
    pub within_upper: bool,
}

pub fn beta_bd_sanity(delta: f64, beta_bd: f64) -> Result<BetaBdSanity> {
    require_delta(delta)?;
    let lower = 0.5 - delta;
    let upper = lower + delta / 8.0;
    Ok(BetaBdSanity {
        lower,
        upper,
        above_trivial: beta_bd > lower,
        within_upper: beta_bd <= upper,
    })
}

/// One row of an exponent grid; absent entries lack inputs or fall outside
/// the formula's domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TheoryRow {
    pub nu: f64,
    pub surface: Option<f64>,
    pub resolvent: Option<f64>,
    pub baker: Option<f64>,
}

pub fn exponent_grid(inputs: &GapInputs, nus: &[f64]) -> Result<Vec<TheoryRow>> {
    inputs.validate()?;
    let be = inputs.resolved_beta_e()?;
    let d = inputs.delta;
    Ok(nus
        .iter()
        .map(|&nu| TheoryRow {
            nu,
            surface: inputs
                .beta_bd
                .and_then(|b| surface_weyl_exponent(nu, d, b).ok()),
            resolvent: inputs
                .beta_bd
                .and_then(|b| resolvent_exponent(nu, d, b).ok()),
            baker: inputs
                .beta
                .zip(be)
                .and_then(|(b, e)| baker_weyl_exponent(nu, d, b, e).ok()),
        })
        .collect())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.17e}")).unwrap_or_default()
}

/// CSV with columns `nu,surface,resolvent,baker`; missing values are empty.
pub fn write_grid_csv<W: Write>(mut w: W, header: &str, rows: &[TheoryRow]) -> Result<()> {
    writeln!(w, "# {header}")?;
    writeln!(w, "nu,surface,resolvent,baker")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.nu,
            cell(r.surface),
            cell(r.resolvent),
            cell(r.baker)
        )?;
    }
    Ok(())
}
