//! Atom on the symmetry axis of a thin homogeneous dielectric ring.

use std::f64::consts::PI;

use crate::born::{Regime, Spectral};
use crate::error::{Error, Result};
use crate::kernels::TriangleGeometry;
use crate::materials::Spectra;
use crate::quad::{
    integrate_halfline, richardson_deltas, richardson_pair_mc, Estimate, LogBall, MCSpec,
    PairSample, QuadratureSpec,
};
use crate::Point;

/// Tube-to-ring radius ratio above which the thin-ring formulas are refused.
pub const MAX_THICKNESS: f64 = 0.1;
/// Tube-to-ring radius ratio above which a warning is logged.
pub const THIN_RING_WARNING: f64 = 0.02;

/// Ring of radius `r0` and tube radius `a` in the plane `z = 0`, atom at
/// `(0, 0, z_a)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingGeometry {
    pub r0: f64,
    pub a: f64,
    pub z_a: f64,
}

impl RingGeometry {
    pub fn new(r0: f64, a: f64, z_a: f64) -> Result<Self> {
        if !(r0 > 0.0 && a > 0.0 && z_a.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "ring needs r0 > 0 and a > 0, got r0 = {r0}, a = {a}"
            )));
        }
        if a / r0 > MAX_THICKNESS {
            return Err(Error::ValidityViolation(format!(
                "a / r0 = {} exceeds the thin-ring bound {MAX_THICKNESS}",
                a / r0
            )));
        }
        if a / r0 > THIN_RING_WARNING {
            log::warn!(
                "a / r0 = {} is above {THIN_RING_WARNING}; thin-ring formulas lose accuracy",
                a / r0
            );
        }
        Ok(Self { r0, a, z_a })
    }

    pub fn rho_a(&self) -> f64 {
        self.z_a.hypot(self.r0)
    }

    pub fn volume(&self) -> f64 {
        2.0 * PI * PI * self.r0 * self.a * self.a
    }

    pub fn atom_position(&self) -> Point {
        Point::new(0.0, 0.0, self.z_a)
    }
}

/// Range of the split parameter between the near-cylinder and open-ring parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaBand {
    pub lo: f64,
    pub hi: f64,
}

impl Default for LambdaBand {
    fn default() -> Self {
        Self { lo: 0.5, hi: 1.5 }
    }
}

impl LambdaBand {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::InvalidInput(format!(
                "lambda band needs 0 < lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Self { lo, hi })
    }

    /// Midpoint and half-range of `f` over the band.
    pub fn band_of(&self, f: impl Fn(f64) -> f64) -> Band {
        let n = 10_000;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for i in 0..=n {
            let v = f(self.lo + (self.hi - self.lo) * i as f64 / n as f64);
            lo = lo.min(v);
            hi = hi.max(v);
        }
        Band::from_range(lo, hi)
    }
}

/// A modeling band `mid +- half_width`, kept apart from statistical errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Band {
    pub mid: f64,
    pub half_width: f64,
}

impl Band {
    pub fn from_range(lo: f64, hi: f64) -> Self {
        Self {
            mid: 0.5 * (lo + hi),
            half_width: 0.5 * (hi - lo),
        }
    }

    pub fn lo(&self) -> f64 {
        self.mid - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.mid + self.half_width
    }

    pub fn affine(&self, offset: f64, slope: f64) -> Self {
        Self::from_range(offset + slope * self.lo(), offset + slope * self.hi()).normalized()
    }

    fn normalized(self) -> Self {
        Self {
            mid: self.mid,
            half_width: self.half_width.abs(),
        }
    }
}

/// `f(lambda) = 1 / lambda^2 + 2 lambda / sqrt(1 + lambda^2)`.
pub fn band_function(lambda: f64) -> f64 {
    1.0 / (lambda * lambda) + 2.0 * lambda / (1.0 + lambda * lambda).sqrt()
}

fn static_weight(spectra: &Spectra, power: i32) -> f64 {
    spectra.atom.static_value() * spectra.medium.static_value().powi(power)
}

fn frequency_integral(spectra: &Spectra, power: i32, quad: &QuadratureSpec) -> Result<Estimate> {
    integrate_halfline(
        |u| spectra.atom.alpha_iu(u) * spectra.medium.chi_iu(u).powi(power),
        quad,
    )
}

fn order1_with_power(
    geom: &RingGeometry,
    spectra: &Spectra,
    power: i32,
    quad: &QuadratureSpec,
    regime: Regime,
) -> Result<Estimate> {
    let rho = geom.rho_a();
    let v = geom.volume();
    let k = -v / (32.0 * PI.powi(3) * rho.powi(6));
    match regime {
        Regime::Full => {
            let j = integrate_halfline(
                |u| {
                    spectra.atom.alpha_iu(u)
                        * spectra.medium.chi_iu(u).powi(power)
                        * crate::kernels::g2(u * rho)
                },
                quad,
            )?;
            Ok(j.scale(k))
        }
        Regime::Retarded => Ok(Estimate::exact(
            -23.0 * v * static_weight(spectra, power) / (64.0 * PI.powi(3) * rho.powi(7)),
        )),
        Regime::Nonretarded => {
            let j = frequency_integral(spectra, power, quad)?;
            Ok(j.scale(-3.0 * v / (16.0 * PI.powi(3) * rho.powi(6))))
        }
    }
}

fn regime_warning(geom: &RingGeometry, spectra: &Spectra, regime: Regime) {
    let (a_lo, a_hi) = spectra.atom.frequency_range();
    let (c_lo, c_hi) = spectra.medium.frequency_range();
    crate::born::RegimeMargins {
        r_min: geom.rho_a(),
        r_max: geom.rho_a(),
        omega_min: a_lo.min(c_lo),
        omega_max: a_hi.max(c_hi),
    }
    .warn(regime);
}

/// First-order potential with all body points at distance `rho_A`.
pub fn ring_delta1(
    geom: &RingGeometry,
    spectra: &Spectra,
    quad: &QuadratureSpec,
    regime: Regime,
) -> Result<Estimate> {
    regime_warning(geom, spectra, regime);
    order1_with_power(geom, spectra, 1, quad, regime)
}

/// Single-point second-order term: [`ring_delta1`] with `chi -> -chi^2 / 3`.
pub fn ring_delta2_single(
    geom: &RingGeometry,
    spectra: &Spectra,
    quad: &QuadratureSpec,
    regime: Regime,
) -> Result<Estimate> {
    regime_warning(geom, spectra, regime);
    Ok(order1_with_power(geom, spectra, 2, quad, regime)?.scale(-1.0 / 3.0))
}

/// Prefactor multiplying `f(lambda)` in the split estimate of the two-point term.
fn split_prefactor(
    geom: &RingGeometry,
    spectra: &Spectra,
    regime: Regime,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let rho = geom.rho_a();
    let v = geom.volume();
    match regime {
        Regime::Retarded => {
            Ok(7.0 * v * static_weight(spectra, 2) / (512.0 * PI.powi(3) * rho.powi(7)))
        }
        Regime::Nonretarded => {
            let j = frequency_integral(spectra, 2, quad)?.value;
            Ok(3.0 * v * j / (128.0 * PI.powi(3) * rho.powi(6)))
        }
        Regime::Full => Err(Error::InvalidInput(
            "the split two-point estimate exists only in the retarded and nonretarded limits"
                .into(),
        )),
    }
}

/// Two-point term from the near-cylinder / open-ring split at parameter `lambda`.
pub fn ring_delta2_two_split(
    geom: &RingGeometry,
    spectra: &Spectra,
    regime: Regime,
    lambda: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    if !(0.1..=10.0).contains(&lambda) {
        return Err(Error::InvalidInput(format!(
            "lambda must lie in [0.1, 10], got {lambda}"
        )));
    }
    Ok(Estimate::exact(
        split_prefactor(geom, spectra, regime, quad)? * band_function(lambda),
    ))
}

/// The split estimate over a band of `lambda`.
pub fn ring_delta2_two_band(
    geom: &RingGeometry,
    spectra: &Spectra,
    regime: Regime,
    band: &LambdaBand,
    quad: &QuadratureSpec,
) -> Result<Band> {
    let k = split_prefactor(geom, spectra, regime, quad)?;
    Ok(band.band_of(band_function).affine(0.0, k))
}

/// Dimensionless two-point coefficient `c` in
/// `Delta_2^2 = c V alpha(0) chi(0)^2 / (pi^3 rho^7)` (retarded) or
/// `Delta_2^2 = c V int alpha chi^2 / (pi^3 rho^6)` (nonretarded).
pub fn two_point_coefficient_band(regime: Regime, band: &LambdaBand) -> Result<Band> {
    let f = band.band_of(band_function);
    match regime {
        Regime::Retarded => Ok(f.affine(0.0, 7.0 / 512.0)),
        Regime::Nonretarded => Ok(f.affine(0.0, 3.0 / 128.0)),
        Regime::Full => Err(Error::InvalidInput(
            "no closed coefficient in the full regime".into(),
        )),
    }
}

/// Converts a two-point potential to the dimensionless coefficient of
/// [`two_point_coefficient_band`].
pub fn two_point_coefficient(
    geom: &RingGeometry,
    spectra: &Spectra,
    regime: Regime,
    delta2_two: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let rho = geom.rho_a();
    let v = geom.volume();
    match regime {
        Regime::Retarded => {
            Ok(delta2_two * PI.powi(3) * rho.powi(7) / (v * static_weight(spectra, 2)))
        }
        Regime::Nonretarded => {
            let j = frequency_integral(spectra, 2, quad)?.value;
            Ok(delta2_two * PI.powi(3) * rho.powi(6) / (v * j))
        }
        Regime::Full => Err(Error::InvalidInput(
            "no closed coefficient in the full regime".into(),
        )),
    }
}

/// Coefficient `k` of the quadratic bracket `[1 - k chi]`, i.e.
/// `-(Delta_2^1 + Delta_2^2) / Delta_1[chi -> chi^2]`, over the band.
pub fn bracket_coefficient_band(regime: Regime, band: &LambdaBand) -> Result<Band> {
    let f = band.band_of(band_function);
    match regime {
        Regime::Retarded => Ok(f.affine(1.0 / 3.0, 7.0 / 184.0)),
        Regime::Nonretarded => Ok(f.affine(1.0 / 3.0, 1.0 / 8.0)),
        Regime::Full => Err(Error::InvalidInput(
            "no closed bracket in the full regime".into(),
        )),
    }
}

/// Thin-ring limit of the factor that `f(lambda)` approximates: the
/// principal-value depolarization integral of an infinite straight cylinder
/// taken transverse to its axis.
pub const THIN_RING_LIMIT: f64 = 2.0 / 3.0;

/// Two-point term in the limit `a / r0 -> 0`.
pub fn ring_delta2_two_thin_limit(
    geom: &RingGeometry,
    spectra: &Spectra,
    regime: Regime,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    Ok(Estimate::exact(
        split_prefactor(geom, spectra, regime, quad)? * THIN_RING_LIMIT,
    ))
}

/// Bracket coefficient `k` in the limit `a / r0 -> 0`.
pub fn thin_ring_bracket_coefficient(regime: Regime) -> Result<f64> {
    match regime {
        Regime::Retarded => Ok(1.0 / 3.0 + 7.0 / 184.0 * THIN_RING_LIMIT),
        Regime::Nonretarded => Ok(1.0 / 3.0 + THIN_RING_LIMIT / 8.0),
        Regime::Full => Err(Error::InvalidInput(
            "no closed bracket in the full regime".into(),
        )),
    }
}

/// Bracket coefficient `k` implied by a two-point coefficient `c`, for
/// example one measured by Monte Carlo.
pub fn bracket_coefficient_from_two_point(regime: Regime, c: f64) -> Result<f64> {
    match regime {
        Regime::Retarded => Ok(1.0 / 3.0 + c * (7.0 / 184.0) / (7.0 / 512.0)),
        Regime::Nonretarded => Ok(1.0 / 3.0 + c * (1.0 / 8.0) / (3.0 / 128.0)),
        Regime::Full => Err(Error::InvalidInput(
            "no closed bracket in the full regime".into(),
        )),
    }
}

/// Linear and quadratic terms of the ring potential.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingQuadratic {
    pub delta1: Estimate,
    pub delta2_single: Estimate,
    pub delta2_two: Band,
    pub total: Band,
    /// `k` in `[1 - k chi]`.
    pub bracket_coefficient: Band,
    /// `total / delta1`; exactly 1 for a vanishing susceptibility.
    pub bracket: Band,
}

pub fn ring_total_quadratic(
    geom: &RingGeometry,
    spectra: &Spectra,
    regime: Regime,
    band: &LambdaBand,
    quad: &QuadratureSpec,
) -> Result<RingQuadratic> {
    let delta1 = ring_delta1(geom, spectra, quad, regime)?;
    let delta2_single = ring_delta2_single(geom, spectra, quad, regime)?;
    let delta2_two = ring_delta2_two_band(geom, spectra, regime, band, quad)?;
    let total = delta2_two.affine(delta1.value + delta2_single.value, 1.0);
    let bracket = if delta1.value == 0.0 {
        Band {
            mid: 1.0,
            half_width: 0.0,
        }
    } else {
        total.affine(0.0, 1.0 / delta1.value)
    };
    Ok(RingQuadratic {
        delta1,
        delta2_single,
        delta2_two,
        total,
        bracket_coefficient: bracket_coefficient_band(regime, band)?,
        bracket,
    })
}

/// Two-point term by direct pair Monte Carlo over the exact torus.
///
/// Rotational symmetry fixes the azimuth of the first point, which is then
/// drawn uniformly from the tube cross-section with weight `2 pi R_cyl`. The
/// second point comes from a mixture of uniform torus sampling, an azimuth
/// density peaked at the first point, and a log-radial ball around it.
pub fn ring_delta2_two_mc(
    geom: &RingGeometry,
    spectra: &Spectra,
    regime: Regime,
    mc: &MCSpec,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    mc.validate()?;
    let alpha = &spectra.atom;
    let chi = &spectra.medium;
    let spectral = Spectral::new(|u| alpha.alpha_iu(u) * chi.chi_iu(u).powi(2), regime, quad)?;
    let (r0, a) = (geom.r0, geom.a);
    let ra = geom.atom_position();
    let delta0 = mc.coincidence_delta * 2.0 * (r0 + a);
    let delta_min = *richardson_deltas(mc, delta0).last().unwrap();
    let ball = LogBall::new(delta_min, 4.0 * a);
    let peak = AzimuthPeak::new(a / r0);
    let tube = PI * a * a;

    let est = richardson_pair_mc(mc, delta0, 8, |u| {
        let rho1 = a * u[0].sqrt();
        let phi1 = 2.0 * PI * u[1];
        let r1 = r0 + rho1 * phi1.cos();
        let s1 = Point::new(r1, 0.0, rho1 * phi1.sin());
        let w1 = 2.0 * PI * r1 * tube;

        let s2 = if u[2] < 0.25 {
            torus_point(r0, a, 2.0 * PI * u[3] - PI, u[4], u[5])
        } else if u[2] < 0.75 {
            let t = peak.sample(u[3], u[6]);
            torus_point(r0, a, t, u[4], u[5])
        } else {
            s1 + ball.sample(&[u[3], u[4], u[5]])
        };
        let beta = (s1 - s2).norm();
        let r2 = s2.x.hypot(s2.y);
        if beta < delta_min || (r2 - r0).powi(2) + s2.z * s2.z > a * a {
            return PairSample::ZERO;
        }
        let theta2 = s2.y.atan2(s2.x);
        let pdf = 0.25 / (2.0 * PI * tube * r2)
            + 0.5 * peak.pdf(theta2) / (tube * r2)
            + 0.25 * ball.pdf(beta);
        let kernel = match TriangleGeometry::from_points(&ra, &s1, &s2) {
            Ok(tri) => spectral.triple(&tri, regime, quad),
            Err(_) => return PairSample::ZERO,
        };
        PairSample {
            weight: w1 * kernel / pdf,
            separation: beta,
        }
    })?;
    Ok(est.scale(1.0 / (128.0 * PI.powi(4))))
}

fn torus_point(r0: f64, a: f64, theta: f64, u_rho: f64, u_phi: f64) -> Point {
    let rho = a * u_rho.sqrt();
    let phi = 2.0 * PI * u_phi;
    let r = r0 + rho * phi.cos();
    Point::new(r * theta.cos(), r * theta.sin(), rho * phi.sin())
}

/// Azimuth density `h(theta) = 1 / (2 Z (|theta| + w)^2)` on `[-pi, pi]`.
struct AzimuthPeak {
    w: f64,
    z: f64,
}

impl AzimuthPeak {
    fn new(w: f64) -> Self {
        Self {
            w,
            z: 1.0 / w - 1.0 / (PI + w),
        }
    }

    fn sample(&self, v: f64, sign: f64) -> f64 {
        let t = 1.0 / (1.0 / self.w - v * self.z) - self.w;
        if sign < 0.5 {
            -t
        } else {
            t
        }
    }

    fn pdf(&self, theta: f64) -> f64 {
        1.0 / (2.0 * self.z * (theta.abs() + self.w).powi(2))
    }
}
