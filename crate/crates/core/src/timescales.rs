//! Characteristic times of an atomic electron: the quantum time τ_q, the
//! light-crossing time τ_ed of a region, and the radiation-reaction time τ_r.

use serde::{Deserialize, Serialize};

use crate::constants::PhysicalConstants;
use crate::error::{Error, Result};

/// Accepted region sizes for [`hierarchy_report`], cm (0.1 Å to 100 Å).
pub const SIZE_RANGE_CM: (f64, f64) = (1e-9, 1e-6);

/// τ_q = ħ³/(m e⁴), s.
pub fn atomic_time(c: &PhysicalConstants) -> f64 {
    c.hbar.powi(3) / (c.electron_mass * c.elementary_charge.powi(4))
}

/// τ_ed = size/c, s. `size` in cm.
pub fn electrodynamic_time(size: f64, c: &PhysicalConstants) -> Result<f64> {
    if !(size.is_finite() && size > 0.0) {
        return Err(Error::invalid(
            "size",
            format!("must be positive, got {size}"),
        ));
    }
    Ok(size / c.light_speed)
}

/// τ_r = e²/(m c³), s.
pub fn radiation_time(c: &PhysicalConstants) -> f64 {
    c.elementary_charge.powi(2) / (c.electron_mass * c.light_speed.powi(3))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimescaleReport {
    /// Region size, cm.
    pub size: f64,
    pub tau_q: f64,
    pub tau_ed: f64,
    pub tau_r: f64,
    /// τ_ed/τ_q.
    pub ed_over_q: f64,
    /// τ_r/τ_ed.
    pub r_over_ed: f64,
}

impl TimescaleReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// All three times for a region of the given size (cm), which must be
/// ordered τ_r < τ_ed < τ_q.
///
/// With CODATA values τ_ed overtakes τ_q for regions wider than about
/// 72 Å, so the top of the accepted size range reports an ordering
/// violation.
pub fn hierarchy_report(size: f64, c: &PhysicalConstants) -> Result<TimescaleReport> {
    let (lo, hi) = SIZE_RANGE_CM;
    if !(lo..=hi).contains(&size) {
        return Err(Error::invalid(
            "size",
            format!("must lie in [{lo:e}, {hi:e}] cm, got {size:e}"),
        ));
    }
    c.validate()?;
    let tau_q = atomic_time(c);
    let tau_ed = electrodynamic_time(size, c)?;
    let tau_r = radiation_time(c);
    if !(tau_r < tau_ed && tau_ed < tau_q) {
        return Err(Error::OrderingViolation {
            tau_r,
            tau_ed,
            tau_q,
        });
    }
    Ok(TimescaleReport {
        size,
        tau_q,
        tau_ed,
        tau_r,
        ed_over_q: tau_ed / tau_q,
        r_over_ed: tau_r / tau_ed,
    })
}
