//! Atom in front of a stratified half space `z < 0` with depth profile
//! `chi(z, iu) = p(z) chi(iu)`, the atom sitting at height `z_A`.

use std::f64::consts::PI;

use crate::born::Regime;
use crate::error::{Error, Result};
use crate::materials::Spectra;
use crate::quad::{best_value, integrate_halfline, Estimate, QuadratureSpec};

/// Slice thickness times maximal profile slope above which a warning is logged.
pub const SLICE_SMOOTHNESS_WARNING: f64 = 0.1;

/// Depth profile `p(z)` of the susceptibility, with `z` measured into the
/// medium from its surface and `max p = 1`.
#[derive(Debug, Clone, PartialEq)]
pub enum Profile {
    /// `p = 1`.
    Homogeneous,
    /// `p = cos^2(kz z)`.
    Oscillating { kz: f64 },
    /// Piecewise-linear table with an exponential tail.
    Tabulated(TabulatedProfile),
}

/// Piecewise-linear profile through `(z[i], p[i])`, continued beyond the last
/// node by an exponential fitted to the last two nodes (constant if they do
/// not decrease).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    z: Vec<f64>,
    p: Vec<f64>,
    /// `int_0^{z[i]} p`.
    cumulative: Vec<f64>,
    /// Decay rate of the tail.
    kappa: f64,
}

impl TabulatedProfile {
    pub fn new(z: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if z.len() < 2 || z.len() != p.len() {
            return Err(Error::InvalidInput(
                "a tabulated profile needs at least two nodes and equal-length columns".into(),
            ));
        }
        if z[0] != 0.0 || z.windows(2).any(|w| !(w[1] > w[0])) || z.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput(
                "profile depths must start at 0 and increase strictly".into(),
            ));
        }
        if p.iter().any(|&v| !(v >= 0.0 && v.is_finite())) {
            return Err(Error::InvalidInput(
                "profile values must be finite and nonnegative".into(),
            ));
        }
        let max = p.iter().cloned().fold(0.0, f64::max);
        if (max - 1.0).abs() > 1e-12 {
            return Err(Error::ValidityViolation(format!(
                "profile must be normalized to max p = 1, got {max}"
            )));
        }
        let n = z.len() - 1;
        let kappa = if p[n] > 0.0 && p[n - 1] > p[n] {
            (p[n - 1] / p[n]).ln() / (z[n] - z[n - 1])
        } else {
            0.0
        };
        let mut cumulative = vec![0.0; z.len()];
        for i in 0..n {
            cumulative[i + 1] = cumulative[i] + 0.5 * (p[i] + p[i + 1]) * (z[i + 1] - z[i]);
        }
        Ok(Self {
            z,
            p,
            cumulative,
            kappa,
        })
    }

    pub fn nodes(&self) -> (&[f64], &[f64]) {
        (&self.z, &self.p)
    }

    fn last(&self) -> usize {
        self.z.len() - 1
    }

    fn value(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        let n = self.last();
        if z >= self.z[n] {
            return self.p[n] * (-self.kappa * (z - self.z[n])).exp();
        }
        let i = self.z.partition_point(|&zi| zi <= z) - 1;
        let t = (z - self.z[i]) / (self.z[i + 1] - self.z[i]);
        self.p[i] + t * (self.p[i + 1] - self.p[i])
    }

    fn slope(&self, i: usize) -> f64 {
        (self.p[i + 1] - self.p[i]) / (self.z[i + 1] - self.z[i])
    }

    fn laplace(&self, x: f64) -> f64 {
        let n = self.last();
        let mut sum = 0.0;
        for i in 0..n {
            let h = self.z[i + 1] - self.z[i];
            let s = self.slope(i);
            sum += (-x * self.z[i]).exp()
                * (self.p[i] * exp_moment(0, x, h) + s * exp_moment(1, x, h));
        }
        if self.p[n] > 0.0 {
            sum += self.p[n] * (-x * self.z[n]).exp() / (x + self.kappa);
        }
        sum
    }

    fn q_transform(&self, b: f64) -> f64 {
        let n = self.last();
        let x = 2.0 * b;
        let mut sum = 0.0;
        for i in 0..n {
            let h = self.z[i + 1] - self.z[i];
            let s = self.slope(i);
            let (p, c) = (self.p[i], self.cumulative[i]);
            let coeffs = [p * c, p * p + s * c, 1.5 * p * s, 0.5 * s * s];
            let poly: f64 = coeffs
                .iter()
                .enumerate()
                .map(|(k, ck)| ck * exp_moment(k as u32, x, h))
                .sum();
            sum += (-x * self.z[i]).exp() * poly;
        }
        let (pn, cn, k) = (self.p[n], self.cumulative[n], self.kappa);
        if pn > 0.0 {
            sum += (-x * self.z[n]).exp() * pn * (cn / (x + k) + pn / ((x + k) * (x + 2.0 * k)));
        }
        sum
    }

    fn slice_laplace(&self, x: f64, d: f64) -> f64 {
        let n = self.last();
        let end = self.z[n];
        let mut sum = 0.0;
        let mut i = 0usize;
        loop {
            let z = (i as f64 + 0.5) * d;
            if z >= end {
                break;
            }
            sum += self.value(z) * (-x * z).exp();
            i += 1;
        }
        let z_first = (i as f64 + 0.5) * d;
        let ratio = (-(x + self.kappa) * d).exp();
        sum += self.value(z_first) * (-x * z_first).exp() / (1.0 - ratio);
        d * sum
    }

    fn max_slope(&self) -> f64 {
        (0..self.last())
            .map(|i| self.slope(i).abs())
            .fold(self.kappa * self.p[self.last()], f64::max)
    }
}

/// `int_0^h t^n e^{-s t} dt`.
fn exp_moment(n: u32, s: f64, h: f64) -> f64 {
    let y = s * h;
    if y < 2.0 {
        let mut sum = 0.0;
        let mut term = h.powi(n as i32 + 1);
        for m in 0..80 {
            let contrib = term / (n + m + 1) as f64;
            sum += contrib;
            if contrib.abs() <= 1e-17 * sum.abs() {
                break;
            }
            term *= -y / (m + 1) as f64;
        }
        sum
    } else {
        let mut partial = 0.0;
        let mut term = 1.0;
        let mut fact = 1.0;
        for k in 0..=n {
            if k > 0 {
                term *= y;
                fact *= k as f64;
            }
            partial += term / fact;
        }
        let n_fact: f64 = (1..=n).map(|k| k as f64).product();
        n_fact / s.powi(n as i32 + 1) * (1.0 - (-y).exp() * partial)
    }
}

impl Profile {
    pub fn oscillating(kz: f64) -> Result<Self> {
        if !(kz >= 0.0 && kz.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "kz must be finite and nonnegative, got {kz}"
            )));
        }
        Ok(Self::Oscillating { kz })
    }

    pub fn tabulated(z: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        Ok(Self::Tabulated(TabulatedProfile::new(z, p)?))
    }

    /// `p(z)`, zero outside the medium.
    pub fn value(&self, z: f64) -> f64 {
        if z < 0.0 {
            return 0.0;
        }
        match self {
            Self::Homogeneous => 1.0,
            Self::Oscillating { kz } => (kz * z).cos().powi(2),
            Self::Tabulated(t) => t.value(z),
        }
    }

    /// Laplace transform `P(x) = int_0^inf e^{-x z} p(z) dz`.
    pub fn laplace(&self, x: f64) -> f64 {
        match self {
            Self::Homogeneous => 1.0 / x,
            Self::Oscillating { kz } => {
                let b = 0.5 * x;
                let k2 = kz * kz;
                (2.0 * b * b + k2) / (4.0 * b * (b * b + k2))
            }
            Self::Tabulated(t) => t.laplace(x),
        }
    }

    /// `Q(b) = int dz p(z) int_z^inf dz' e^{-2 b z'} p(z')`.
    pub fn q_transform(&self, b: f64) -> f64 {
        match self {
            Self::Homogeneous => 1.0 / (4.0 * b * b),
            Self::Oscillating { kz } => {
                let (b2, k2) = (b * b, kz * kz);
                let num =
                    2.0 * b2.powi(3) + 8.0 * b2 * b2 * k2 + 5.0 * b2 * k2 * k2 + 2.0 * k2.powi(3);
                num / (8.0 * b2 * (b2 + k2).powi(2) * (b2 + 4.0 * k2))
            }
            Self::Tabulated(t) => t.q_transform(b),
        }
    }

    /// Midpoint slice sum `d sum_i p(z_i) e^{-x z_i}`, `z_i = (i + 1/2) d`,
    /// which replaces [`Profile::laplace`] when the medium is built from
    /// slices of thickness `d`.
    pub fn slice_laplace(&self, x: f64, d: f64) -> f64 {
        let a = 0.5 * x * d;
        match self {
            Self::Homogeneous => d / (2.0 * a.sinh()),
            Self::Oscillating { kz } => {
                let b = -kz * d;
                let (sa, ca) = (a.sinh(), a.cosh());
                let (sb, cb) = b.sin_cos();
                let re = sa * cb / (sa * sa * cb * cb + ca * ca * sb * sb);
                0.5 * d / (2.0 * sa) + 0.25 * d * re
            }
            Self::Tabulated(t) => t.slice_laplace(x, d),
        }
    }

    /// `max |p'(z)|`.
    pub fn max_slope(&self) -> f64 {
        match self {
            Self::Homogeneous => 0.0,
            Self::Oscillating { kz } => *kz,
            Self::Tabulated(t) => t.max_slope(),
        }
    }
}

/// [`Profile::laplace`] with its domain check.
pub fn laplace_profile(profile: &Profile, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::InvalidInput(format!(
            "Laplace argument must be positive, got {x}"
        )));
    }
    Ok(profile.laplace(x))
}

/// Variable of the inner transverse integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InnerPath {
    /// Transverse wave number `q` on `[0, inf)`.
    Raw,
    /// `v = b / u` on `[1, inf)`.
    #[default]
    Scaled,
}

/// `pref int du w(u) int dq q K(u, b)`, `b = sqrt(u^2 + q^2)`.
fn nested<W, K>(
    pref: f64,
    w: W,
    kernel: K,
    path: InnerPath,
    quad: &QuadratureSpec,
) -> Result<Estimate>
where
    W: Fn(f64) -> f64,
    K: Fn(f64, f64) -> f64,
{
    quad.validate()?;
    let inner = |u: f64| -> f64 {
        let r = match path {
            InnerPath::Raw => integrate_halfline(|q| q * kernel(u, u.hypot(q)), quad),
            InnerPath::Scaled => integrate_halfline(
                |t| {
                    let v = 1.0 + t;
                    u * u * v * kernel(u, u * v)
                },
                quad,
            ),
        };
        best_value(r).unwrap_or(f64::NAN)
    };
    let outer = integrate_halfline(
        |u| {
            let wu = w(u);
            if wu == 0.0 {
                0.0
            } else {
                wu * inner(u)
            }
        },
        quad,
    )?;
    if !outer.value.is_finite() {
        return Err(Error::InvalidInput(
            "half-space integrand is not finite".into(),
        ));
    }
    Ok(Estimate::new(
        pref * outer.value,
        pref.abs() * outer.std_err.hypot(quad.rel_tol * outer.value.abs()),
        outer.evals,
    ))
}

fn check_height(z_a: f64) -> Result<()> {
    if !(z_a > 0.0 && z_a.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "atom height must be positive, got {z_a}"
        )));
    }
    Ok(())
}

fn delta1_with<P>(
    z_a: f64,
    laplace: P,
    spectra: &Spectra,
    path: InnerPath,
    quad: &QuadratureSpec,
) -> Result<Estimate>
where
    P: Fn(f64) -> f64,
{
    check_height(z_a)?;
    nested(
        -1.0 / (4.0 * PI * PI),
        |u| spectra.atom.alpha_iu(u) * spectra.medium.chi_iu(u),
        |u, b| {
            let e = (-2.0 * b * z_a).exp();
            if e == 0.0 {
                return 0.0;
            }
            let (u2, b2) = (u * u, b * b);
            e * laplace(2.0 * b) * (b2 - u2 + 0.5 * u2 * u2 / b2)
        },
        path,
        quad,
    )
}

/// First-order potential.
pub fn strata_delta1(
    z_a: f64,
    profile: &Profile,
    spectra: &Spectra,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    strata_delta1_path(z_a, profile, spectra, InnerPath::default(), quad)
}

pub fn strata_delta1_path(
    z_a: f64,
    profile: &Profile,
    spectra: &Spectra,
    path: InnerPath,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    delta1_with(z_a, |x| profile.laplace(x), spectra, path, quad)
}

/// First-order potential of the medium assembled from slices of thickness `d`.
pub fn strata_delta1_slices(
    z_a: f64,
    profile: &Profile,
    spectra: &Spectra,
    d: f64,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    if !(d > 0.0) {
        return Err(Error::InvalidInput(format!(
            "slice thickness must be positive, got {d}"
        )));
    }
    let smooth = d * profile.max_slope();
    if smooth >= 1.0 {
        return Err(Error::ValidityViolation(format!(
            "slice thickness times profile slope is {smooth}, not small"
        )));
    }
    if smooth > SLICE_SMOOTHNESS_WARNING {
        log::warn!("slice thickness times profile slope is {smooth}");
    }
    delta1_with(
        z_a,
        |x| profile.slice_laplace(x, d),
        spectra,
        InnerPath::default(),
        quad,
    )
}

/// Single-point second-order term.
pub fn strata_delta2_single(
    z_a: f64,
    profile: &Profile,
    spectra: &Spectra,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    strata_delta2_single_path(z_a, profile, spectra, InnerPath::default(), quad)
}

pub fn strata_delta2_single_path(
    z_a: f64,
    profile: &Profile,
    spectra: &Spectra,
    path: InnerPath,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    check_height(z_a)?;
    nested(
        1.0 / (4.0 * PI * PI),
        |u| spectra.atom.alpha_iu(u) * spectra.medium.chi_iu(u).powi(2),
        |u, b| {
            let e = (-2.0 * b * z_a).exp();
            if e == 0.0 {
                return 0.0;
            }
            let (u2, b2) = (u * u, b * b);
            e * profile.laplace(2.0 * b) * (0.5 * b2 - 0.75 * u2 + 0.25 * u2 * u2 / b2)
        },
        path,
        quad,
    )
}

/// Two-point second-order term.
pub fn strata_delta2_two(
    z_a: f64,
    profile: &Profile,
    spectra: &Spectra,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    strata_delta2_two_path(z_a, profile, spectra, InnerPath::default(), quad)
}

pub fn strata_delta2_two_path(
    z_a: f64,
    profile: &Profile,
    spectra: &Spectra,
    path: InnerPath,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    check_height(z_a)?;
    nested(
        1.0 / (2.0 * PI * PI),
        |u| spectra.atom.alpha_iu(u) * spectra.medium.chi_iu(u).powi(2),
        |u, b| {
            let e = (-2.0 * b * z_a).exp();
            if e == 0.0 {
                return 0.0;
            }
            let r2 = (u / b).powi(2);
            b * e * profile.q_transform(b) * u * u * (0.5 - 0.5 * r2 + 0.25 * r2 * r2)
        },
        path,
        quad,
    )
}

/// Potential through second order.
pub fn strata_potential(
    z_a: f64,
    profile: &Profile,
    spectra: &Spectra,
    quad: &QuadratureSpec,
) -> Result<crate::born::PotentialBreakdown> {
    Ok(crate::born::PotentialBreakdown::new(
        strata_delta1(z_a, profile, spectra, quad)?,
        strata_delta2_single(z_a, profile, spectra, quad)?,
        strata_delta2_two(z_a, profile, spectra, quad)?,
        Regime::Full,
    ))
}

fn structure_check(j: u32, x: f64) -> Result<()> {
    if j > 4 {
        return Err(Error::InvalidInput(format!(
            "structure functions are defined for j <= 4, got {j}"
        )));
    }
    if !(x >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "structure argument must be nonnegative, got {x}"
        )));
    }
    Ok(())
}

fn structure<K>(j: u32, x: f64, kernel: K, quad: &QuadratureSpec) -> Result<f64>
where
    K: Fn(f64, f64) -> f64,
{
    let norm = 2f64.powi(j as i32) / (1..=j).map(|k| k as f64).product::<f64>();
    let est = integrate_halfline(|t| t.powi(j as i32) * (-2.0 * t).exp() * kernel(t, x), quad);
    Ok(norm * best_value(est)?)
}

/// `F_j(x) = (2^j / j!) int_0^inf dt t^j e^{-2t} (2t^2 + x^2) / (t^2 + x^2)`;
/// `F_j(0) = 1`, `F_j(inf) = 1/2`.
pub fn structure_f(j: u32, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    structure_check(j, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.5);
    }
    structure(
        j,
        x,
        |t, x| {
            let (t2, x2) = (t * t, x * x);
            (2.0 * t2 + x2) / (t2 + x2)
        },
        quad,
    )
}

/// `H_j(x)` with kernel
/// `(2t^6 + 8x^2t^4 + 5x^4t^2 + 2x^6) / ((t^2 + x^2)^2 (t^2 + 4x^2))`;
/// `H_j(0) = 1`, `H_j(inf) = 1/4`.
pub fn structure_h(j: u32, x: f64, quad: &QuadratureSpec) -> Result<f64> {
    structure_check(j, x)?;
    if x == 0.0 {
        return Ok(1.0);
    }
    if x.is_infinite() {
        return Ok(0.25);
    }
    structure(
        j,
        x,
        |t, x| {
            let (t2, x2) = (t * t, x * x);
            let num = 2.0 * t2.powi(3) + 8.0 * x2 * t2 * t2 + 5.0 * x2 * x2 * t2 + 2.0 * x2.powi(3);
            num / ((t2 + x2).powi(2) * (t2 + 4.0 * x2))
        },
        quad,
    )
}

/// `F_j` and `H_j` tabulated on a logarithmic grid.
#[derive(Debug, Clone, PartialEq)]
pub struct StructureFunctionTable {
    pub j: u32,
    pub x: Vec<f64>,
    pub f: Vec<f64>,
    pub h: Vec<f64>,
}

impl StructureFunctionTable {
    pub fn new(
        j: u32,
        x_min: f64,
        x_max: f64,
        points: usize,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        if !(x_min > 0.0 && x_max > x_min && points >= 2) {
            return Err(Error::InvalidInput(
                "table needs 0 < x_min < x_max and two points".into(),
            ));
        }
        let step = (x_max / x_min).ln() / (points - 1) as f64;
        let x: Vec<f64> = (0..points)
            .map(|i| x_min * (step * i as f64).exp())
            .collect();
        let f = x
            .iter()
            .map(|&v| structure_f(j, v, quad))
            .collect::<Result<_>>()?;
        let h = x
            .iter()
            .map(|&v| structure_h(j, v, quad))
            .collect::<Result<_>>()?;
        Ok(Self { j, x, f, h })
    }

    /// Interpolates linearly in `ln x`, using the exact limits outside the grid.
    pub fn lookup(&self, x: f64) -> (f64, f64) {
        let n = self.x.len();
        if x <= self.x[0] {
            return if x == 0.0 {
                (1.0, 1.0)
            } else {
                (self.f[0], self.h[0])
            };
        }
        if x >= self.x[n - 1] {
            return if x.is_infinite() {
                (0.5, 0.25)
            } else {
                (self.f[n - 1], self.h[n - 1])
            };
        }
        let i = self.x.partition_point(|&v| v <= x) - 1;
        let t = (x / self.x[i]).ln() / (self.x[i + 1] / self.x[i]).ln();
        (
            self.f[i] + t * (self.f[i + 1] - self.f[i]),
            self.h[i] + t * (self.h[i + 1] - self.h[i]),
        )
    }
}

/// Distance-law coefficients of the homogeneous half space, `U = -C4 / z^4`
/// (retarded) and `U = -C3 / z^3` (nonretarded), with their linear and
/// quadratic terms in the susceptibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HalfspaceCoefficients {
    pub c4: f64,
    pub c3: f64,
    pub delta1_c4: f64,
    pub delta2_c4: f64,
    pub delta1_c3: f64,
    pub delta2_c3: f64,
}

/// Static susceptibility above which the coefficient expansions are refused.
pub const MAX_EXPANSION_CHI: f64 = 5.0;

pub fn halfspace_coefficients(
    spectra: &Spectra,
    quad: &QuadratureSpec,
) -> Result<HalfspaceCoefficients> {
    let alpha0 = spectra.atom.static_value();
    let chi0 = spectra.medium.static_value();
    if !(chi0 < MAX_EXPANSION_CHI) {
        return Err(Error::ValidityViolation(format!(
            "static susceptibility {chi0} is outside the expansion range chi(0) < {MAX_EXPANSION_CHI}"
        )));
    }
    let c4 = if chi0 == 0.0 {
        0.0
    } else {
        let v_integral = integrate_halfline(
            |t| {
                let v = 1.0 + t;
                let root = (chi0 + v * v).sqrt();
                let r_tm = ((chi0 + 1.0) * v - root) / ((chi0 + 1.0) * v + root);
                let r_te = (v - root) / (v + root);
                let v2 = v * v;
                r_tm * (2.0 / v2 - 1.0 / (v2 * v2)) - r_te / (v2 * v2)
            },
            quad,
        )?;
        3.0 * alpha0 / (64.0 * PI * PI) * v_integral.value
    };
    let alpha = &spectra.atom;
    let chi = &spectra.medium;
    let c3 = integrate_halfline(
        |u| {
            let c = chi.chi_iu(u);
            alpha.alpha_iu(u) * c / (c + 2.0)
        },
        quad,
    )?
    .value
        / (16.0 * PI * PI);
    let int1 = integrate_halfline(|u| alpha.alpha_iu(u) * chi.chi_iu(u), quad)?.value;
    let int2 = integrate_halfline(|u| alpha.alpha_iu(u) * chi.chi_iu(u).powi(2), quad)?.value;
    Ok(HalfspaceCoefficients {
        c4,
        c3,
        delta1_c4: 23.0 * alpha0 * chi0 / (640.0 * PI * PI),
        delta2_c4: -169.0 * alpha0 * chi0 * chi0 / (8960.0 * PI * PI),
        delta1_c3: int1 / (32.0 * PI * PI),
        delta2_c3: -int2 / (64.0 * PI * PI),
    })
}

/// Far-field forms for the `cos^2(kz z)` profile: retarded
/// `-z^-4 {D1C4 F3 + D2C4 [(126/169) F3 + (43/169) H3]}`, nonretarded
/// `-(D1C3 + D2C3) F2 / z^3`, all at argument `kz z_A`.
pub fn oscillating_asymptotic(
    z_a: f64,
    kz: f64,
    spectra: &Spectra,
    regime: Regime,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    check_height(z_a)?;
    let c = halfspace_coefficients(spectra, quad)?;
    Ok(Estimate::exact(asymptotic_from(&c, z_a, kz, regime, quad)?))
}

fn asymptotic_from(
    c: &HalfspaceCoefficients,
    z_a: f64,
    kz: f64,
    regime: Regime,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let x = kz * z_a;
    match regime {
        Regime::Retarded => {
            let f3 = structure_f(3, x, quad)?;
            let h3 = structure_h(3, x, quad)?;
            Ok(
                -(c.delta1_c4 * f3 + c.delta2_c4 * (126.0 / 169.0 * f3 + 43.0 / 169.0 * h3))
                    / z_a.powi(4),
            )
        }
        Regime::Nonretarded => {
            let f2 = structure_f(2, x, quad)?;
            Ok(-(c.delta1_c3 + c.delta2_c3) * f2 / z_a.powi(3))
        }
        Regime::Full => Err(Error::InvalidInput(
            "the oscillating far-field form exists only in the retarded and nonretarded limits"
                .into(),
        )),
    }
}

/// Nonretarded term `H_0(kz z_A) int du u^2 alpha chi^2 / (32 pi^2 z_A)`,
/// omitted from [`oscillating_asymptotic`].
pub fn h0_near_field_term(
    z_a: f64,
    kz: f64,
    spectra: &Spectra,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    check_height(z_a)?;
    let h0 = structure_h(0, kz * z_a, quad)?;
    let j = integrate_halfline(
        |u| u * u * spectra.atom.alpha_iu(u) * spectra.medium.chi_iu(u).powi(2),
        quad,
    )?;
    Ok(j.scale(h0 / (32.0 * PI * PI * z_a)))
}

/// Which distance-law figure to tabulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    /// Retarded far field with `chi(0) = 1/2`.
    Retarded,
    /// Nonretarded near field.
    Nonretarded,
}

impl Figure {
    /// Ratios `kz c / omega_A` of the reference curves; infinity and zero are
    /// the envelopes.
    pub fn default_ratios(&self) -> Vec<f64> {
        match self {
            Self::Retarded => vec![f64::INFINITY, 4.0, 2.0, 1.0, 0.0],
            Self::Nonretarded => vec![f64::INFINITY, 20.0, 6.0, 2.0, 0.0],
        }
    }

    pub fn regime(&self) -> Regime {
        match self {
            Self::Retarded => Regime::Retarded,
            Self::Nonretarded => Regime::Nonretarded,
        }
    }

    /// Unit atom with `omega_A = 1` and a medium with `chi(0) = 1/2`.
    pub fn default_spectra() -> Spectra {
        Spectra {
            atom: crate::materials::PolarizabilityModel::single_line(1.0, 1.0).expect("valid line"),
            medium: crate::materials::SusceptibilityModel::single_oscillator(0.5, 1.0)
                .expect("valid oscillator"),
        }
    }
}

/// Potential curves on a height grid, one column per `kz` ratio.
#[derive(Debug, Clone, PartialEq)]
pub struct FigureTable {
    pub ratios: Vec<f64>,
    pub z: Vec<f64>,
    /// `values[i][c]` is curve `c` at `z[i]`.
    pub values: Vec<Vec<f64>>,
}

impl FigureTable {
    /// Column labels, `z_A` first.
    pub fn header(&self) -> Vec<String> {
        std::iter::once("z_A".to_string())
            .chain(self.ratios.iter().map(|r| {
                if r.is_infinite() {
                    "kz_ratio=inf".to_string()
                } else {
                    format!("kz_ratio={r}")
                }
            }))
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<f64> {
        self.values.iter().map(|row| row[c]).collect()
    }
}

/// Tabulates the far-field forms for `kz = ratio * omega_A`, with
/// `omega_A` the lowest atomic transition frequency.
pub fn figure_data(
    figure: Figure,
    spectra: &Spectra,
    ratios: &[f64],
    grid: &[f64],
    quad: &QuadratureSpec,
) -> Result<FigureTable> {
    if ratios.iter().any(|r| !(*r >= 0.0)) {
        return Err(Error::InvalidInput(
            "kz ratios must be nonnegative or infinite".into(),
        ));
    }
    for &z in grid {
        check_height(z)?;
    }
    let omega_a = spectra.atom.frequency_range().0;
    let c = halfspace_coefficients(spectra, quad)?;
    let values = grid
        .iter()
        .map(|&z| {
            ratios
                .iter()
                .map(|&r| asymptotic_from(&c, z, r * omega_a, figure.regime(), quad))
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FigureTable {
        ratios: ratios.to_vec(),
        z: grid.to_vec(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::materials::{PolarizabilityModel, SusceptibilityModel};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn spectra(chi0: f64, omega: f64) -> Spectra {
        Spectra::new(
            PolarizabilityModel::single_line(1.0, omega).unwrap(),
            SusceptibilityModel::single_oscillator(chi0, omega).unwrap(),
        )
    }

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn laplace_closed_forms() {
        assert_relative_eq!(Profile::Homogeneous.laplace(2.5), 0.4);
        let osc = Profile::oscillating(1e-9).unwrap();
        assert_relative_eq!(osc.laplace(3.0), 1.0 / 3.0, max_relative = 1e-12);
        assert!(laplace_profile(&Profile::Homogeneous, 0.0).is_err());
    }

    #[test]
    fn oscillating_transforms_match_quadrature() {
        let kz = 1.7;
        let p = Profile::oscillating(kz).unwrap();
        for b in [0.05, 0.6, 3.0] {
            let direct = integrate_halfline(|z| (-2.0 * b * z).exp() * p.value(z), &quad())
                .unwrap()
                .value;
            assert_relative_eq!(p.laplace(2.0 * b), direct, max_relative = 1e-9);
            let q = integrate_halfline(
                |z| {
                    let cum = 0.5 * z + (2.0 * kz * z).sin() / (4.0 * kz);
                    (-2.0 * b * z).exp() * p.value(z) * cum
                },
                &quad(),
            )
            .unwrap()
            .value;
            assert_relative_eq!(p.q_transform(b), q, max_relative = 1e-9);
        }
    }

    #[test]
    fn tabulated_transforms_match_quadrature() {
        let z = vec![0.0, 0.3, 0.7, 1.5, 2.0];
        let pv = vec![0.2, 1.0, 0.6, 0.5, 0.25];
        let p = Profile::tabulated(z, pv).unwrap();
        let Profile::Tabulated(t) = &p else {
            unreachable!()
        };
        for x in [1e-3, 0.4, 5.0, 80.0] {
            let direct = integrate_halfline(|z| (-x * z).exp() * p.value(z), &quad())
                .unwrap()
                .value;
            assert_relative_eq!(p.laplace(x), direct, max_relative = 1e-8);
        }
        for b in [0.2, 1.0, 6.0] {
            let direct = integrate_halfline(
                |z| {
                    let c = crate::quad::integrate_interval(
                        |s| p.value(s),
                        0.0,
                        z.max(1e-300),
                        &quad(),
                    )
                    .map(|e| e.value)
                    .unwrap_or(0.0);
                    (-2.0 * b * z).exp() * p.value(z) * c
                },
                &quad().with_rel_tol(1e-7),
            );
            let direct = best_value(direct).unwrap();
            assert_relative_eq!(t.q_transform(b), direct, max_relative = 1e-5);
        }
    }

    #[test]
    fn exp_moment_matches_closed_form() {
        for &(s, h) in &[(1e-6, 1.0), (0.5, 1.0), (3.0, 1.0), (50.0, 0.2)] {
            for n in 0..4u32 {
                let direct = crate::quad::integrate_interval(
                    |t| t.powi(n as i32) * (-s * t).exp(),
                    0.0,
                    h,
                    &quad(),
                )
                .unwrap()
                .value;
                assert_relative_eq!(exp_moment(n, s, h), direct, max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn tabulated_validation() {
        assert!(Profile::tabulated(vec![0.0, 1.0], vec![0.5, 0.5]).is_err());
        assert!(Profile::tabulated(vec![0.1, 1.0], vec![1.0, 0.5]).is_err());
        assert!(Profile::tabulated(vec![0.0, 1.0, 0.5], vec![1.0, 0.5, 0.2]).is_err());
        assert!(Profile::tabulated(vec![0.0, 1.0], vec![1.0, -0.5]).is_err());
    }

    #[test]
    fn homogeneous_retarded_limit() {
        let s = spectra(0.5, 1.0);
        let z = 1e3;
        let c = halfspace_coefficients(&s, &quad()).unwrap();
        let d1 = strata_delta1(z, &Profile::Homogeneous, &s, &quad())
            .unwrap()
            .value;
        assert_relative_eq!(d1, -c.delta1_c4 / z.powi(4), max_relative = 0.01);
        let d2 = strata_delta2_single(z, &Profile::Homogeneous, &s, &quad())
            .unwrap()
            .value
            + strata_delta2_two(z, &Profile::Homogeneous, &s, &quad())
                .unwrap()
                .value;
        assert_relative_eq!(d2, -c.delta2_c4 / z.powi(4), max_relative = 0.01);
    }

    #[test]
    fn homogeneous_nonretarded_limit() {
        let s = spectra(0.5, 1.0);
        let z = 1e-3;
        let c = halfspace_coefficients(&s, &quad()).unwrap();
        let d1 = strata_delta1(z, &Profile::Homogeneous, &s, &quad())
            .unwrap()
            .value;
        assert_relative_eq!(d1, -c.delta1_c3 / z.powi(3), max_relative = 0.01);
    }

    #[test]
    fn inner_paths_agree() {
        let s = spectra(0.5, 1.0);
        let p = Profile::oscillating(2.0).unwrap();
        for z in [0.1, 1.0, 10.0] {
            let raw = strata_delta1_path(z, &p, &s, InnerPath::Raw, &quad())
                .unwrap()
                .value;
            let scaled = strata_delta1_path(z, &p, &s, InnerPath::Scaled, &quad())
                .unwrap()
                .value;
            assert_relative_eq!(raw, scaled, max_relative = 1e-7);
            let raw = strata_delta2_two_path(z, &p, &s, InnerPath::Raw, &quad())
                .unwrap()
                .value;
            let scaled = strata_delta2_two_path(z, &p, &s, InnerPath::Scaled, &quad())
                .unwrap()
                .value;
            assert_relative_eq!(raw, scaled, max_relative = 1e-7);
        }
    }

    #[test]
    fn zero_wavenumber_reduces_to_homogeneous() {
        let s = spectra(0.5, 1.0);
        let osc = Profile::oscillating(0.0).unwrap();
        let z = 0.7;
        let pairs = [
            (
                strata_delta1(z, &osc, &s, &quad()).unwrap().value,
                strata_delta1(z, &Profile::Homogeneous, &s, &quad())
                    .unwrap()
                    .value,
            ),
            (
                strata_delta2_single(z, &osc, &s, &quad()).unwrap().value,
                strata_delta2_single(z, &Profile::Homogeneous, &s, &quad())
                    .unwrap()
                    .value,
            ),
            (
                strata_delta2_two(z, &osc, &s, &quad()).unwrap().value,
                strata_delta2_two(z, &Profile::Homogeneous, &s, &quad())
                    .unwrap()
                    .value,
            ),
        ];
        for (a, b) in pairs {
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
    }

    #[test]
    fn slice_sum_converges_quadratically() {
        let s = spectra(0.5, 1.0);
        let p = Profile::oscillating(1.0).unwrap();
        let z = 0.5;
        let exact = strata_delta1(z, &p, &s, &quad()).unwrap().value;
        let e: Vec<f64> = [0.08, 0.04, 0.02]
            .iter()
            .map(|&d| strata_delta1_slices(z, &p, &s, d, &quad()).unwrap().value - exact)
            .collect();
        assert!((e[0] / e[1] - 4.0).abs() < 0.2, "{e:?}");
        assert!((e[1] / e[2] - 4.0).abs() < 0.2, "{e:?}");
        assert!(
            strata_delta1_slices(z, &Profile::oscillating(100.0).unwrap(), &s, 0.05, &quad())
                .is_err()
        );
    }

    #[test]
    fn slice_laplace_limits() {
        let p = Profile::oscillating(0.8).unwrap();
        assert_relative_eq!(
            p.slice_laplace(1.3, 1e-4),
            p.laplace(1.3),
            max_relative = 1e-8
        );
        let t = Profile::tabulated(vec![0.0, 1.0, 2.0], vec![1.0, 0.5, 0.25]).unwrap();
        assert_relative_eq!(
            t.slice_laplace(0.9, 1e-3),
            t.laplace(0.9),
            max_relative = 1e-6
        );
    }

    #[test]
    fn structure_limits() {
        let q = quad();
        assert_eq!(structure_f(3, 0.0, &q).unwrap(), 1.0);
        assert!((structure_f(3, 1e-4, &q).unwrap() - 1.0).abs() < 1e-6);
        assert!((structure_h(3, 1e-4, &q).unwrap() - 1.0).abs() < 1e-6);
        assert!((structure_f(2, 1e-4, &q).unwrap() - 1.0).abs() < 1e-6);
        assert!((structure_f(3, 1e3, &q).unwrap() - 0.5).abs() < 1e-3);
        assert!((structure_h(3, 1e3, &q).unwrap() - 0.25).abs() < 1e-3);
        assert!(structure_f(5, 1.0, &q).is_err());
    }

    #[test]
    fn structure_table_interpolates() {
        let t = StructureFunctionTable::new(3, 1e-3, 1e3, 61, &quad()).unwrap();
        let (f, h) = t.lookup(0.7);
        assert_relative_eq!(
            f,
            structure_f(3, 0.7, &quad()).unwrap(),
            max_relative = 1e-2
        );
        assert_relative_eq!(
            h,
            structure_h(3, 0.7, &quad()).unwrap(),
            max_relative = 1e-2
        );
        assert_eq!(t.lookup(f64::INFINITY), (0.5, 0.25));
    }

    #[test]
    fn coefficient_expansions() {
        let s = spectra(1e-3, 1.0);
        let c = halfspace_coefficients(&s, &quad()).unwrap();
        assert_relative_eq!((c.c4 - c.delta1_c4) / c.delta2_c4, 1.0, max_relative = 0.01);
        assert_relative_eq!((c.c3 - c.delta1_c3) / c.delta2_c3, 1.0, max_relative = 0.01);
        assert_relative_eq!(
            c.delta2_c4 / c.delta1_c4,
            -169.0 / 322.0 * 1e-3,
            max_relative = 1e-12
        );
        assert!(halfspace_coefficients(&spectra(6.0, 1.0), &quad()).is_err());
    }

    #[test]
    fn asymptotic_zero_wavenumber() {
        let s = spectra(0.5, 1.0);
        let c = halfspace_coefficients(&s, &quad()).unwrap();
        let z = 3.0;
        let r = oscillating_asymptotic(z, 0.0, &s, Regime::Retarded, &quad())
            .unwrap()
            .value;
        assert_relative_eq!(
            r,
            -(c.delta1_c4 + c.delta2_c4) / z.powi(4),
            max_relative = 1e-14
        );
    }

    #[test]
    fn asymptotic_matches_quadrature_path() {
        let s = spectra(0.5, 1.0);
        let z = 1e3;
        let kz = 1.0 / z;
        let p = Profile::oscillating(kz).unwrap();
        let full = strata_potential(z, &p, &s, &quad()).unwrap().total.value;
        let asym = oscillating_asymptotic(z, kz, &s, Regime::Retarded, &quad())
            .unwrap()
            .value;
        assert_relative_eq!(full, asym, max_relative = 0.02);
    }

    #[test]
    fn figure_envelopes() {
        for fig in [Figure::Retarded, Figure::Nonretarded] {
            let grid: Vec<f64> = (0..41).map(|i| 10f64.powf(-2.0 + 0.1 * i as f64)).collect();
            let t = figure_data(
                fig,
                &Figure::default_spectra(),
                &fig.default_ratios(),
                &grid,
                &quad(),
            )
            .unwrap();
            assert_eq!(t.header().len(), 6);
            for row in &t.values {
                let (hi, lo) = (row[0], row[4]);
                for v in &row[1..4] {
                    assert!(*v >= hi.min(lo) && *v <= hi.max(lo));
                }
            }
        }
    }

    proptest! {
        #[test]
        fn structure_functions_are_bounded(j in 0u32..5, x in 1e-3f64..1e3) {
            let f = structure_f(j, x, &quad()).unwrap();
            let h = structure_h(j, x, &quad()).unwrap();
            prop_assert!(f > 0.5 - 1e-9 && f < 1.0 + 1e-9);
            prop_assert!(h > 0.25 - 1e-9 && h < 1.0 + 1e-9);
        }

        #[test]
        fn oscillating_laplace_between_limits(b in 1e-3f64..1e3, kz in 0.0f64..1e3) {
            let p = Profile::oscillating(kz).unwrap().laplace(2.0 * b);
            prop_assert!(p <= 1.0 / (2.0 * b) * (1.0 + 1e-12));
            prop_assert!(p >= 1.0 / (4.0 * b) * (1.0 - 1e-12));
        }
    }
}
