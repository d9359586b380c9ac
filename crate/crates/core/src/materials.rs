//! Spectral response models on the imaginary frequency axis.

use crate::error::{Error, Result};

/// One electronic transition `(omega_n0, |d_0n|^2)` of the atom.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition {
    pub omega: f64,
    pub dipole_sq: f64,
}

/// Ground-state polarizability `alpha(iu) = (2/3) sum_n omega_n |d_n|^2 / (omega_n^2 + u^2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarizabilityModel {
    lines: Vec<Transition>,
}

impl PolarizabilityModel {
    pub fn new(lines: Vec<Transition>) -> Result<Self> {
        if lines.is_empty() {
            return Err(Error::InvalidInput(
                "polarizability needs at least one line".into(),
            ));
        }
        for t in &lines {
            if !(t.omega > 0.0
                && t.omega.is_finite()
                && t.dipole_sq > 0.0
                && t.dipole_sq.is_finite())
            {
                return Err(Error::InvalidInput(format!(
                    "transition frequency and dipole strength must be positive, got {t:?}"
                )));
            }
        }
        Ok(Self { lines })
    }

    /// Single line with static polarizability `alpha0` at frequency `omega`.
    pub fn single_line(alpha0: f64, omega: f64) -> Result<Self> {
        Self::new(vec![Transition {
            omega,
            dipole_sq: 1.5 * alpha0 * omega,
        }])
    }

    pub fn lines(&self) -> &[Transition] {
        &self.lines
    }

    pub fn alpha_iu(&self, u: f64) -> f64 {
        let u2 = u * u;
        self.lines
            .iter()
            .map(|t| 2.0 / 3.0 * t.omega * t.dipole_sq / (t.omega * t.omega + u2))
            .sum()
    }

    pub fn static_value(&self) -> f64 {
        self.alpha_iu(0.0)
    }

    /// Smallest and largest transition frequency.
    pub fn frequency_range(&self) -> (f64, f64) {
        frequency_range(self.lines.iter().map(|t| t.omega))
    }
}

/// Damped oscillator `omega_p^2 / (omega_t^2 + u^2 + gamma u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oscillator {
    pub omega_t: f64,
    pub omega_p: f64,
    pub gamma: f64,
}

/// Medium susceptibility `chi(iu)`.
#[derive(Debug, Clone, PartialEq)]
pub enum SusceptibilityModel {
    /// Sum of Drude-Lorentz oscillators.
    Oscillators(Vec<Oscillator>),
    /// Linearized microscopic medium, `chi = n alpha_B(iu)`.
    Dilute {
        density: f64,
        medium: PolarizabilityModel,
    },
    /// Clausius-Mosotti medium, `chi = x / (1 - x/3)` with `x = n alpha_B(iu)`.
    ClausiusMosotti {
        density: f64,
        medium: PolarizabilityModel,
    },
}

impl SusceptibilityModel {
    pub fn oscillators(oscillators: Vec<Oscillator>) -> Result<Self> {
        if oscillators.is_empty() {
            return Err(Error::InvalidInput(
                "susceptibility needs at least one oscillator".into(),
            ));
        }
        for o in &oscillators {
            if !(o.omega_t > 0.0 && o.omega_p > 0.0 && o.gamma >= 0.0)
                || !(o.omega_t.is_finite() && o.omega_p.is_finite() && o.gamma.is_finite())
            {
                return Err(Error::InvalidInput(format!(
                    "oscillator needs omega_t > 0, omega_p > 0, gamma >= 0, got {o:?}"
                )));
            }
        }
        Ok(Self::Oscillators(oscillators))
    }

    /// Single undamped oscillator with static value `chi0` at resonance `omega_t`.
    pub fn single_oscillator(chi0: f64, omega_t: f64) -> Result<Self> {
        Self::oscillators(vec![Oscillator {
            omega_t,
            omega_p: (chi0 * omega_t * omega_t).sqrt(),
            gamma: 0.0,
        }])
    }

    pub fn dilute(density: f64, medium: PolarizabilityModel) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "density must be nonnegative, got {density}"
            )));
        }
        Ok(Self::Dilute { density, medium })
    }

    /// Fails with [`Error::ValidityViolation`] when `n alpha_B(0) / 3 >= 1`.
    pub fn clausius_mosotti(density: f64, medium: PolarizabilityModel) -> Result<Self> {
        NumberDensityField::uniform(density)?.check(&medium)?;
        Ok(Self::ClausiusMosotti { density, medium })
    }

    pub fn chi_iu(&self, u: f64) -> f64 {
        match self {
            Self::Oscillators(list) => list
                .iter()
                .map(|o| o.omega_p * o.omega_p / (o.omega_t * o.omega_t + u * u + o.gamma * u))
                .sum(),
            Self::Dilute { density, medium } => density * medium.alpha_iu(u),
            Self::ClausiusMosotti { density, medium } => {
                let x = density * medium.alpha_iu(u);
                x / (1.0 - x / 3.0)
            }
        }
    }

    pub fn static_value(&self) -> f64 {
        self.chi_iu(0.0)
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Oscillators(_) => false,
            Self::Dilute { density, .. } | Self::ClausiusMosotti { density, .. } => *density == 0.0,
        }
    }

    /// Smallest and largest resonance frequency.
    pub fn frequency_range(&self) -> (f64, f64) {
        match self {
            Self::Oscillators(list) => frequency_range(list.iter().map(|o| o.omega_t)),
            Self::Dilute { medium, .. } | Self::ClausiusMosotti { medium, .. } => {
                medium.frequency_range()
            }
        }
    }
}

fn frequency_range(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, 0.0), |(lo, hi), w| (lo.min(w), hi.max(w)))
}

/// Uniform number density of medium atoms inside a body.
/// Atomic polarizability paired with a body susceptibility.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectra {
    pub atom: PolarizabilityModel,
    pub medium: SusceptibilityModel,
}

impl Spectra {
    pub fn new(atom: PolarizabilityModel, medium: SusceptibilityModel) -> Self {
        Self { atom, medium }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumberDensityField {
    pub density: f64,
}

impl NumberDensityField {
    pub fn uniform(density: f64) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "density must be nonnegative, got {density}"
            )));
        }
        Ok(Self { density })
    }

    /// Checks `n alpha_B(iu) / 3 < 1`; the static value is the largest.
    pub fn check(&self, medium: &PolarizabilityModel) -> Result<()> {
        let x = self.density * medium.static_value();
        if x / 3.0 < 1.0 {
            Ok(())
        } else {
            Err(Error::ValidityViolation(format!(
                "n alpha_B / 3 = {} is not below 1",
                x / 3.0
            )))
        }
    }
}

/// `chi = x / (1 - x/3)` for `x = n alpha_B`.
pub fn clausius_mosotti(n: f64, alpha_b: f64) -> Result<f64> {
    let x = n * alpha_b;
    if !(x >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "n alpha_B must be nonnegative, got {x}"
        )));
    }
    if x / 3.0 >= 1.0 {
        return Err(Error::ValidityViolation(format!(
            "n alpha_B / 3 = {} is not below 1",
            x / 3.0
        )));
    }
    Ok(x / (1.0 - x / 3.0))
}

/// Inverse map `x = chi / (1 + chi/3)`.
pub fn inverse_clausius_mosotti(chi: f64) -> Result<f64> {
    if !(chi >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "chi must be nonnegative, got {chi}"
        )));
    }
    Ok(chi / (1.0 + chi / 3.0))
}
