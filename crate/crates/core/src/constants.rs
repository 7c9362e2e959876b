//! Physical constants in Gaussian-CGS units and the oscillator unit system.
//!
//! Atomic and relativistic formulas use [`PhysicalConstants`]; every
//! oscillator simulation is parameterised by [`OscillatorUnits`], which
//! defaults to natural units (ħ = m = ω_c = 1).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Fundamental constants, Gaussian-CGS.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    /// Reduced Planck constant, erg·s.
    pub hbar: f64,
    /// Electron rest mass, g.
    pub electron_mass: f64,
    /// Elementary charge, statcoulomb (esu).
    pub elementary_charge: f64,
    /// Speed of light, cm/s.
    pub light_speed: f64,
    /// Energy of one electronvolt, erg.
    pub ev_to_erg: f64,
}

/// CODATA-2018 values. The esu charge is the exact SI charge times c/10.
pub const CODATA_2018: PhysicalConstants = PhysicalConstants {
    hbar: 1.054_571_817e-27,
    electron_mass: 9.109_383_701_5e-28,
    elementary_charge: 4.803_204_712_570_263e-10,
    light_speed: 2.997_924_58e10,
    ev_to_erg: 1.602_176_634e-12,
};

impl Default for PhysicalConstants {
    fn default() -> Self {
        CODATA_2018
    }
}

impl PhysicalConstants {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("hbar", self.hbar),
            ("electron_mass", self.electron_mass),
            ("elementary_charge", self.elementary_charge),
            ("light_speed", self.light_speed),
            ("ev_to_erg", self.ev_to_erg),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        Ok(())
    }

    /// Planck constant h = 2πħ.
    pub fn planck(&self) -> f64 {
        2.0 * std::f64::consts::PI * self.hbar
    }

    /// Electron rest energy m₀c², erg.
    pub fn electron_rest_energy(&self) -> f64 {
        self.electron_mass * self.light_speed * self.light_speed
    }

    pub fn ev_to_erg(&self, ev: f64) -> f64 {
        ev * self.ev_to_erg
    }

    pub fn erg_to_ev(&self, erg: f64) -> f64 {
        erg / self.ev_to_erg
    }

    /// Angular frequency whose quantum ħω equals `ev` electronvolts.
    pub fn omega_from_ev(&self, ev: f64) -> f64 {
        self.ev_to_erg(ev) / self.hbar
    }

    /// Pretty-printed JSON table with the derived fine-structure constant.
    pub fn to_json(&self) -> String {
        let table = serde_json::json!({
            "units": "gaussian-cgs",
            "source": "CODATA-2018",
            "hbar_erg_s": self.hbar,
            "electron_mass_g": self.electron_mass,
            "elementary_charge_esu": self.elementary_charge,
            "light_speed_cm_s": self.light_speed,
            "ev_to_erg": self.ev_to_erg,
            "fine_structure": fine_structure(self),
            "electron_rest_energy_ev": self.erg_to_ev(self.electron_rest_energy()),
        });
        serde_json::to_string_pretty(&table).expect("constants table serializes")
    }
}

/// Fine-structure constant e²/(ħc).
pub fn fine_structure(c: &PhysicalConstants) -> f64 {
    c.elementary_charge * c.elementary_charge / (c.hbar * c.light_speed)
}

/// Mass, classical frequency and ħ of a harmonic oscillator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillatorUnits {
    mass: f64,
    omega_c: f64,
    hbar: f64,
}

impl OscillatorUnits {
    pub fn new(mass: f64, omega_c: f64, hbar: f64) -> Result<Self> {
        for (name, value) in [("mass", mass), ("omega_c", omega_c), ("hbar", hbar)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(
                    name,
                    format!("must be positive, got {value}"),
                ));
            }
        }
        Ok(Self {
            mass,
            omega_c,
            hbar,
        })
    }

    pub fn mass(&self) -> f64 {
        self.mass
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Inverse ground-state width, α = sqrt(m ω_c / ħ).
    pub fn alpha(&self) -> f64 {
        (self.mass * self.omega_c / self.hbar).sqrt()
    }

    /// Force constant k = m ω_c².
    pub fn k(&self) -> f64 {
        self.mass * self.omega_c * self.omega_c
    }

    /// Level spacing ħω_c.
    pub fn quantum(&self) -> f64 {
        self.hbar * self.omega_c
    }

    /// Classical period 2π/ω_c.
    pub fn period(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.omega_c
    }
}

impl Default for OscillatorUnits {
    fn default() -> Self {
        natural_units()
    }
}

/// ħ = m = ω_c = 1.
pub fn natural_units() -> OscillatorUnits {
    OscillatorUnits {
        mass: 1.0,
        omega_c: 1.0,
        hbar: 1.0,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn natural_units_are_unit() {
        let u = natural_units();
        assert_eq!(u.alpha(), 1.0);
        assert_eq!(u.k(), 1.0);
        assert_eq!(u.quantum(), 1.0);
    }

    #[test]
    fn fine_structure_codata() {
        let alpha = fine_structure(&CODATA_2018);
        // e, ħ, c from CODATA-2018 give α = 0.0072973525...
        assert_relative_eq!(alpha, 0.007_297_352_5, max_relative = 1e-8);
        assert!(alpha > 0.007297 && alpha < 0.007298);
        assert!((1.0 / alpha - 137.036).abs() < 0.01);
        assert!(((1.0 / alpha) / 137.036 - 1.0).abs() < 5e-4);
    }

    #[test]
    fn doubling_charge_quadruples_alpha() {
        let mut c = CODATA_2018;
        let base = fine_structure(&c);
        c.elementary_charge *= 2.0;
        assert_relative_eq!(fine_structure(&c), 4.0 * base, max_relative = 1e-15);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(OscillatorUnits::new(0.0, 1.0, 1.0).is_err());
        assert!(OscillatorUnits::new(1.0, -1.0, 1.0).is_err());
        let mut c = CODATA_2018;
        c.light_speed = 0.0;
        assert!(c.validate().is_err());
        assert!(CODATA_2018.validate().is_ok());
    }

    #[test]
    fn constants_json_round_trips() {
        let json = CODATA_2018.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["hbar_erg_s"].as_f64().unwrap(), CODATA_2018.hbar);
        assert!((v["fine_structure"].as_f64().unwrap() - 0.0072973525).abs() < 1e-10);
    }

    proptest! {
        #[test]
        fn ev_erg_round_trip(ev in 1e-6f64..1e9) {
            let c = CODATA_2018;
            let back = c.erg_to_ev(c.ev_to_erg(ev));
            prop_assert!((back / ev - 1.0).abs() < 1e-14);
        }

        #[test]
        fn alpha_squared_relation(m in 1e-3f64..1e3, w in 1e-3f64..1e3, h in 1e-3f64..1e3) {
            let u = OscillatorUnits::new(m, w, h).unwrap();
            let lhs = u.alpha() * u.alpha() * u.hbar();
            prop_assert!((lhs / (m * w) - 1.0).abs() < 1e-14);
        }
    }
}
