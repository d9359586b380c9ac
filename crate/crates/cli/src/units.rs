//! Conversion from reduced units to SI at the output boundary.

use serde::Serialize;

use crate::config::UnitSystem;

/// Planck constant in J s.
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light in m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Physical dimension of an emitted number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Energy,
    Force,
    Length,
    Frequency,
    Dimensionless,
}

/// Scale factors for one run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Units {
    pub system: UnitSystem,
    /// Length unit `L` in meters.
    pub length_m: f64,
}

impl Units {
    pub fn reduced() -> Self {
        Self {
            system: UnitSystem::Reduced,
            length_m: 1.0,
        }
    }

    pub fn new(system: UnitSystem, length_m: Option<f64>) -> Self {
        match system {
            UnitSystem::Reduced => Self::reduced(),
            UnitSystem::Si => Self {
                system,
                length_m: length_m.unwrap_or(1.0),
            },
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.system {
            UnitSystem::Reduced => "reduced",
            UnitSystem::Si => "si",
        }
    }

    fn hbar_c() -> f64 {
        PLANCK / (2.0 * std::f64::consts::PI) * SPEED_OF_LIGHT
    }

    /// Factor taking a reduced value of dimension `dim` to the output system.
    pub fn factor(&self, dim: Dim) -> f64 {
        if self.system == UnitSystem::Reduced {
            return 1.0;
        }
        let l = self.length_m;
        match dim {
            Dim::Energy => Self::hbar_c() / l,
            Dim::Force => Self::hbar_c() / (l * l),
            Dim::Length => l,
            Dim::Frequency => SPEED_OF_LIGHT / l,
            Dim::Dimensionless => 1.0,
        }
    }

    pub fn unit(&self, dim: Dim) -> &'static str {
        match (self.system, dim) {
            (_, Dim::Dimensionless) => "1",
            (UnitSystem::Reduced, Dim::Energy) => "hbar*c/L",
            (UnitSystem::Reduced, Dim::Force) => "hbar*c/L^2",
            (UnitSystem::Reduced, Dim::Length) => "L",
            (UnitSystem::Reduced, Dim::Frequency) => "c/L",
            (UnitSystem::Si, Dim::Energy) => "J",
            (UnitSystem::Si, Dim::Force) => "N",
            (UnitSystem::Si, Dim::Length) => "m",
            (UnitSystem::Si, Dim::Frequency) => "rad/s",
        }
    }

    pub fn quantity(&self, value: f64, std_err: f64, dim: Dim) -> Quantity {
        let k = self.factor(dim);
        Quantity {
            value: value * k,
            std_err: std_err * k,
            unit: self.unit(dim),
        }
    }

    pub fn band(&self, mid: f64, half_width: f64, dim: Dim) -> BandQuantity {
        let k = self.factor(dim);
        BandQuantity {
            value: mid * k,
            half_width: (half_width * k).abs(),
            lo: (mid - half_width) * k,
            hi: (mid + half_width) * k,
            unit: self.unit(dim),
        }
    }
}

/// A value with its numerical uncertainty.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantity {
    pub value: f64,
    pub std_err: f64,
    pub unit: &'static str,
}

/// A value carried as an interval.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandQuantity {
    pub value: f64,
    pub half_width: f64,
    pub lo: f64,
    pub hi: f64,
    pub unit: &'static str,
}
