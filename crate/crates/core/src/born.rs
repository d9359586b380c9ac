//! Casimir-Polder potential of an atom near weakly dielectric bodies,
//! order by order in the Born expansion of the Green tensor.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::geometry::{Region, Shape, Voxel};
use crate::kernels::{
    g2, g2_radial_gradient, g3, g3_static, g3_u_integral_closed, hv, Displacement, Tensor3,
    TriangleGeometry,
};
use crate::materials::{PolarizabilityModel, SusceptibilityModel};
use crate::quad::{
    best_value, integrate_halfline, integrate_pair_mc, integrate_region_mc_vec, stratified_mc,
    Estimate, MCSpec, QuadratureSpec,
};
use crate::Point;

/// Margin below which a regime inequality triggers a warning.
pub const REGIME_MARGIN: f64 = 10.0;

/// `int_0^inf g2(x) dx`.
const G2_INTEGRAL: f64 = 11.5;
/// `int_0^inf g2_radial_gradient(x) dx`.
const G2_GRADIENT_INTEGRAL: f64 = 80.5;

#[derive(Debug, Clone, PartialEq)]
pub struct Atom {
    pub position: Point,
    pub polarizability: PolarizabilityModel,
}

impl Atom {
    pub fn new(position: Point, polarizability: PolarizabilityModel) -> Self {
        Self {
            position,
            polarizability,
        }
    }

    pub fn shifted(&self, d: Point) -> Self {
        Self::new(self.position + d, self.polarizability.clone())
    }
}

/// A dielectric body: support, spatial factor (from the shape) and spectrum,
/// so that `chi(r, iu) = shape.scale(r) * susceptibility(iu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BodyRegion {
    pub shape: Shape,
    pub susceptibility: SusceptibilityModel,
}

impl BodyRegion {
    pub fn new(shape: Shape, susceptibility: SusceptibilityModel) -> Self {
        Self {
            shape,
            susceptibility,
        }
    }
}

/// Which form of the frequency integral to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Regime {
    Full,
    /// Long distances: static response, one extra inverse power of distance.
    Retarded,
    /// Short distances: instantaneous interaction.
    Nonretarded,
}

impl Regime {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Retarded => "retarded",
            Self::Nonretarded => "nonretarded",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PotentialBreakdown {
    pub delta1: Estimate,
    pub delta2_single: Estimate,
    pub delta2_two: Estimate,
    pub total: Estimate,
    pub regime: Regime,
}

impl PotentialBreakdown {
    pub fn new(
        delta1: Estimate,
        delta2_single: Estimate,
        delta2_two: Estimate,
        regime: Regime,
    ) -> Self {
        Self {
            delta1,
            delta2_single,
            delta2_two,
            total: Estimate::sum([delta1, delta2_single, delta2_two]),
            regime,
        }
    }
}

/// Provider of the regular part of the background Green tensor.
pub trait GreenBackground: Sync {
    fn regular(&self, r: &Point, rp: &Point, u: f64) -> Result<Tensor3>;
}

/// Free space.
#[derive(Debug, Clone, Copy, Default)]
pub struct VacuumBackground;

impl GreenBackground for VacuumBackground {
    fn regular(&self, r: &Point, rp: &Point, u: f64) -> Result<Tensor3> {
        hv(r, rp, u)
    }
}

/// Distances and frequencies that decide which asymptotic form applies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeMargins {
    pub r_min: f64,
    pub r_max: f64,
    pub omega_min: f64,
    pub omega_max: f64,
}

impl RegimeMargins {
    /// `r_min omega_min`: retarded forms need this to be large.
    pub fn retarded(&self) -> f64 {
        self.r_min * self.omega_min
    }

    /// `1 / (r_max omega_max)`: nonretarded forms need this to be large.
    pub fn nonretarded(&self) -> f64 {
        1.0 / (self.r_max * self.omega_max)
    }

    pub fn warn(&self, regime: Regime) {
        match regime {
            Regime::Retarded if self.retarded() < REGIME_MARGIN => log::warn!(
                "retarded form used with r_min * omega_min = {:.3e} (below {REGIME_MARGIN})",
                self.retarded()
            ),
            Regime::Nonretarded if self.nonretarded() < REGIME_MARGIN => log::warn!(
                "nonretarded form used with 1 / (r_max * omega_max) = {:.3e} (below {REGIME_MARGIN})",
                self.nonretarded()
            ),
            _ => {}
        }
    }
}

pub fn regime_check(atom: &Atom, body: &BodyRegion) -> RegimeMargins {
    let (r_min, r_max) = body.shape.distance_range(&atom.position);
    let (a_lo, a_hi) = atom.polarizability.frequency_range();
    let (c_lo, c_hi) = body.susceptibility.frequency_range();
    RegimeMargins {
        r_min,
        r_max,
        omega_min: a_lo.min(c_lo),
        omega_max: a_hi.max(c_hi),
    }
}

fn check_outside(atom: &Atom, shape: &Shape) -> Result<()> {
    let (near, _) = shape.distance_range(&atom.position);
    if shape.contains(&atom.position) || !(near > 0.0) {
        return Err(Error::AtomInsideBody {
            position: atom.position.into(),
        });
    }
    Ok(())
}

/// Spectral weight `w(u)` of an integrand together with its static value and
/// frequency integral, as needed by the three regimes.
pub(crate) struct Spectral<'a> {
    w: Box<dyn Fn(f64) -> f64 + Sync + 'a>,
    at_zero: f64,
    integral: f64,
}

impl<'a> Spectral<'a> {
    pub(crate) fn new(
        w: impl Fn(f64) -> f64 + Sync + 'a,
        regime: Regime,
        quad: &QuadratureSpec,
    ) -> Result<Self> {
        let integral = if regime == Regime::Nonretarded {
            integrate_halfline(&w, quad)?.value
        } else {
            0.0
        };
        Ok(Self {
            at_zero: w(0.0),
            integral,
            w: Box::new(w),
        })
    }

    /// `int w(u) g2(u rho) du / rho^6` in the chosen regime.
    pub(crate) fn pair(&self, rho: f64, regime: Regime, quad: &QuadratureSpec) -> f64 {
        match regime {
            Regime::Full => {
                best_value(integrate_halfline(|u| (self.w)(u) * g2(u * rho), quad))
                    .unwrap_or(f64::NAN)
                    / rho.powi(6)
            }
            Regime::Retarded => self.at_zero * G2_INTEGRAL / rho.powi(7),
            Regime::Nonretarded => self.integral * g2(0.0) / rho.powi(6),
        }
    }

    /// `int w(u) g2_radial_gradient(u rho) du / rho^7`.
    pub(crate) fn pair_gradient(&self, rho: f64, regime: Regime, quad: &QuadratureSpec) -> f64 {
        match regime {
            Regime::Full => {
                best_value(integrate_halfline(
                    |u| (self.w)(u) * g2_radial_gradient(u * rho),
                    quad,
                ))
                .unwrap_or(f64::NAN)
                    / rho.powi(7)
            }
            Regime::Retarded => self.at_zero * G2_GRADIENT_INTEGRAL / rho.powi(8),
            Regime::Nonretarded => self.integral * g2_radial_gradient(0.0) / rho.powi(7),
        }
    }

    /// `int w(u) g3(u, tri) du / (alpha beta gamma)^3`.
    pub(crate) fn triple(
        &self,
        tri: &TriangleGeometry,
        regime: Regime,
        quad: &QuadratureSpec,
    ) -> f64 {
        let (a, b, c) = tri.sides();
        let denom = (a * b * c).powi(3);
        let v = match regime {
            Regime::Full => best_value(integrate_halfline(|u| (self.w)(u) * g3(u, tri), quad))
                .unwrap_or(f64::NAN),
            Regime::Retarded => self.at_zero * g3_u_integral_closed(tri),
            Regime::Nonretarded => self.integral * g3_static(tri),
        };
        v / denom
    }
}

/// `int d^3s scale(s)^power * kernel(s)`: midpoint rule over voxels, Monte
/// Carlo otherwise.
fn spatial<K>(shape: &Shape, power: i32, mc: &MCSpec, kernel: K) -> Result<Estimate>
where
    K: Fn(&Point) -> f64 + Sync,
{
    spatial_vec(shape, power, mc, 1, |p, out| out[0] = kernel(p)).map(|v| v[0])
}

fn spatial_vec<K>(
    shape: &Shape,
    power: i32,
    mc: &MCSpec,
    width: usize,
    kernel: K,
) -> Result<Vec<Estimate>>
where
    K: Fn(&Point, &mut [f64]) + Sync,
{
    match shape {
        Shape::VoxelGrid(g) => {
            let mut acc = vec![0.0; width];
            let mut out = vec![0.0; width];
            for v in g.voxels() {
                let w = v.volume() * v.scale.powi(power);
                if w == 0.0 {
                    continue;
                }
                out.iter_mut().for_each(|o| *o = 0.0);
                kernel(&v.center, &mut out);
                for j in 0..width {
                    acc[j] += w * out[j];
                }
            }
            if acc.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidInput("voxel integrand is not finite".into()));
            }
            Ok(acc
                .into_iter()
                .map(|a| Estimate::new(a, 0.0, g.voxels().len()))
                .collect())
        }
        _ => integrate_region_mc_vec(
            |p, out| {
                let s = shape.scale(p).powi(power);
                if s != 0.0 {
                    kernel(p, out);
                    out.iter_mut().for_each(|o| *o *= s);
                }
            },
            width,
            shape,
            mc,
        ),
    }
}

/// Attaches the nominal quadrature error to deterministic voxel sums.
fn with_quad_error(e: Estimate, quad: &QuadratureSpec, regime: Regime) -> Estimate {
    if e.std_err == 0.0 && regime != Regime::Retarded {
        Estimate::new(e.value, quad.rel_tol * e.value.abs(), e.evals)
    } else {
        e
    }
}

/// Order-one integral with a general spectral weight:
/// `-(1/32 pi^3) int du w(u) int d^3s scale^power g2(u rho) / rho^6`.
#[allow(clippy::too_many_arguments)]
fn order1(
    atom: &Atom,
    body: &BodyRegion,
    chi: &(dyn Fn(f64) -> f64 + Sync),
    power: i32,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<Estimate> {
    check_outside(atom, &body.shape)?;
    regime_check(atom, body).warn(regime);
    if body.susceptibility.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let alpha = &atom.polarizability;
    let spectral = Spectral::new(|u| alpha.alpha_iu(u) * chi(u), regime, quad)?;
    let ra = atom.position;
    let e = spatial(&body.shape, power, mc, |s| {
        spectral.pair((ra - s).norm(), regime, quad)
    })?;
    Ok(with_quad_error(e, quad, regime).scale(-1.0 / (32.0 * PI.powi(3))))
}

/// First-order potential `Delta_1 U`.
pub fn delta1_u(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
) -> Result<Estimate> {
    delta1_u_regime(atom, body, quad, mc, Regime::Full)
}

pub fn delta1_u_regime(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<Estimate> {
    let chi = |u| body.susceptibility.chi_iu(u);
    order1(atom, body, &chi, 1, quad, mc, regime)
}

/// Retarded form `-(23 alpha(0) / 64 pi^3) int d^3s chi(s, 0) / rho^7`.
pub fn delta1_u_retarded(atom: &Atom, body: &BodyRegion, mc: &MCSpec) -> Result<Estimate> {
    delta1_u_regime(atom, body, &QuadratureSpec::default(), mc, Regime::Retarded)
}

/// Nonretarded form `-(3 / 16 pi^3) int du alpha chi int d^3s scale / rho^6`.
pub fn delta1_u_nonretarded(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
) -> Result<Estimate> {
    delta1_u_regime(atom, body, quad, mc, Regime::Nonretarded)
}

/// First-order integral with `chi` replaced by `chi^2`.
pub fn delta1_u_chi_squared(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<Estimate> {
    let chi2 = |u: f64| body.susceptibility.chi_iu(u).powi(2);
    order1(atom, body, &chi2, 2, quad, mc, regime)
}

/// Single-point second-order term: the first-order result with
/// `chi -> -chi^2 / 3`.
pub fn delta2_single_point(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<Estimate> {
    Ok(delta1_u_chi_squared(atom, body, quad, mc, regime)?.scale(-1.0 / 3.0))
}

/// Two-point second-order term
/// `(1/128 pi^4) int du alpha chi^2 int int g3 / (alpha beta gamma)^3`.
pub fn delta2_two_point(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<Estimate> {
    check_outside(atom, &body.shape)?;
    regime_check(atom, body).warn(regime);
    if body.susceptibility.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let alpha = &atom.polarizability;
    let chi = &body.susceptibility;
    let spectral = Spectral::new(|u| alpha.alpha_iu(u) * chi.chi_iu(u).powi(2), regime, quad)?;
    let ra = atom.position;
    let shape = &body.shape;
    let kernel = |s1: &Point, s2: &Point| -> f64 {
        match TriangleGeometry::from_points(&ra, s1, s2) {
            Ok(tri) => spectral.triple(&tri, regime, quad),
            Err(_) => 0.0,
        }
    };
    let e = match shape {
        Shape::VoxelGrid(g) => {
            let e = voxel_pairs(g.voxels(), g.voxels(), true, &kernel)?;
            with_quad_error(e, quad, regime)
        }
        _ => integrate_pair_mc(
            |s1, s2| shape.scale(s1) * shape.scale(s2) * kernel(s1, s2),
            shape,
            mc,
        )?,
    };
    Ok(e.scale(1.0 / (128.0 * PI.powi(4))))
}

/// `sum_{m in a, n in b, m != n} V_m V_n s_m s_n K(c_m, c_n)`.
fn voxel_pairs(
    a: &[Voxel],
    b: &[Voxel],
    same: bool,
    kernel: &(dyn Fn(&Point, &Point) -> f64 + Sync),
) -> Result<Estimate> {
    let mut acc = 0.0;
    for (m, vm) in a.iter().enumerate() {
        for (n, vn) in b.iter().enumerate() {
            if same && m == n {
                continue;
            }
            let w = vm.volume() * vn.volume() * vm.scale * vn.scale;
            if w != 0.0 {
                acc += w * kernel(&vm.center, &vn.center);
            }
        }
    }
    if !acc.is_finite() {
        return Err(Error::InvalidInput("voxel pair sum is not finite".into()));
    }
    Ok(Estimate::new(acc, 0.0, a.len() * b.len()))
}

/// All three terms up to second order.
pub fn potential(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<PotentialBreakdown> {
    Ok(PotentialBreakdown::new(
        delta1_u_regime(atom, body, quad, mc, regime)?,
        delta2_single_point(atom, body, quad, mc, regime)?,
        delta2_two_point(atom, body, quad, mc, regime)?,
        regime,
    ))
}

/// Order-`k` Born term on a voxel body, summed over voxel `k`-tuples of
/// `(-1)^k / (2 pi) int du u^(2k+2) alpha prod(chi) Tr[G ... G]`.
///
/// Consecutive points in different voxels are joined by the regular tensor;
/// a repeated voxel contributes the local part `chi / (3 u^2)`.
pub fn born_term_k(
    atom: &Atom,
    body: &BodyRegion,
    k: usize,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    born_term_k_with(&VacuumBackground, atom, body, k, quad)
}

pub fn born_term_k_with(
    background: &dyn GreenBackground,
    atom: &Atom,
    body: &BodyRegion,
    k: usize,
    quad: &QuadratureSpec,
) -> Result<Estimate> {
    let Shape::VoxelGrid(grid) = &body.shape else {
        return Err(Error::InvalidInput("born_term_k needs a voxel body".into()));
    };
    if !(1..=3).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "born_term_k supports k = 1, 2, 3, got {k}"
        )));
    }
    check_outside(atom, &body.shape)?;
    let voxels: Vec<&Voxel> = grid.voxels().iter().filter(|v| v.scale != 0.0).collect();
    let n = voxels.len();
    let tuples = (n as f64).powi(k as i32);
    if tuples > quad.max_evals as f64 {
        return Err(Error::ComplexityRefusal(format!(
            "{n} voxels give {tuples:.3e} {k}-tuples, above max_evals = {}",
            quad.max_evals
        )));
    }
    if n == 0 || body.susceptibility.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let ra = atom.position;
    let sign = if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let integrand = |u: f64| -> f64 {
        match chain_trace(
            background,
            &ra,
            &voxels,
            k,
            u,
            body.susceptibility.chi_iu(u),
        ) {
            Ok(tr) => {
                sign / (2.0 * PI) * u.powi(2 * k as i32 + 2) * atom.polarizability.alpha_iu(u) * tr
            }
            Err(_) => f64::NAN,
        }
    };
    integrate_halfline(integrand, quad)
}

fn chain_trace(
    background: &dyn GreenBackground,
    ra: &Point,
    voxels: &[&Voxel],
    k: usize,
    u: f64,
    chi: f64,
) -> Result<f64> {
    let n = voxels.len();
    let weight: Vec<f64> = voxels.iter().map(|v| chi * v.scale * v.volume()).collect();
    let mut chain: Vec<Matrix3<f64>> = voxels
        .iter()
        .zip(&weight)
        .map(|(v, w)| background.regular(ra, &v.center, u).map(|h| h.matrix * *w))
        .collect::<Result<_>>()?;
    if k > 1 {
        let mut inner = vec![Matrix3::zeros(); n * n];
        for m in 0..n {
            for l in 0..n {
                inner[m * n + l] = if m == l {
                    Matrix3::identity() * (chi * voxels[l].scale / (3.0 * u * u))
                } else {
                    background
                        .regular(&voxels[m].center, &voxels[l].center, u)?
                        .matrix
                        * weight[l]
                };
            }
        }
        for _ in 1..k {
            chain = (0..n)
                .map(|l| (0..n).map(|m| chain[m] * inner[m * n + l]).sum())
                .collect();
        }
    }
    let mut trace = 0.0;
    for (m, v) in voxels.iter().enumerate() {
        trace += (chain[m] * background.regular(&v.center, ra, u)?.matrix).trace();
    }
    Ok(trace)
}

/// Born terms of several disjoint bodies, keyed by the (sorted) set of bodies
/// involved. Order 1 has one entry per body; order 2 adds one cross entry per
/// pair, holding both orderings of the two-point correlation.
pub fn decompose_contributions(
    atom: &Atom,
    bodies: &[BodyRegion],
    k: usize,
    quad: &QuadratureSpec,
    mc: &MCSpec,
) -> Result<BTreeMap<Vec<usize>, Estimate>> {
    if !(1..=2).contains(&k) {
        return Err(Error::InvalidInput(format!(
            "decomposition supports k = 1, 2, got {k}"
        )));
    }
    for i in 0..bodies.len() {
        for j in i + 1..bodies.len() {
            if bodies[i].shape.overlaps(&bodies[j].shape) {
                return Err(Error::Overlap {
                    first: i,
                    second: j,
                });
            }
        }
    }
    let mut out = BTreeMap::new();
    for (i, body) in bodies.iter().enumerate() {
        let e = if k == 1 {
            delta1_u(atom, body, quad, mc)?
        } else {
            delta2_single_point(atom, body, quad, mc, Regime::Full)?.plus(delta2_two_point(
                atom,
                body,
                quad,
                mc,
                Regime::Full,
            )?)
        };
        out.insert(vec![i], e);
    }
    if k == 2 {
        for i in 0..bodies.len() {
            for j in i + 1..bodies.len() {
                out.insert(
                    vec![i, j],
                    cross_two_point(atom, &bodies[i], &bodies[j], quad, mc, Regime::Full)?,
                );
            }
        }
    }
    Ok(out)
}

/// Two-point correlation between two disjoint bodies, both orderings.
pub fn cross_two_point(
    atom: &Atom,
    a: &BodyRegion,
    b: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<Estimate> {
    check_outside(atom, &a.shape)?;
    check_outside(atom, &b.shape)?;
    if a.susceptibility.is_zero() || b.susceptibility.is_zero() {
        return Ok(Estimate::exact(0.0));
    }
    let alpha = &atom.polarizability;
    let spectral = Spectral::new(
        |u| alpha.alpha_iu(u) * a.susceptibility.chi_iu(u) * b.susceptibility.chi_iu(u),
        regime,
        quad,
    )?;
    let ra = atom.position;
    let kernel = |s1: &Point, s2: &Point| -> f64 {
        match TriangleGeometry::from_points(&ra, s1, s2) {
            Ok(tri) => spectral.triple(&tri, regime, quad),
            Err(_) => 0.0,
        }
    };
    let e = match (&a.shape, &b.shape) {
        (Shape::VoxelGrid(ga), Shape::VoxelGrid(gb)) => {
            let ab = voxel_pairs(ga.voxels(), gb.voxels(), false, &kernel)?;
            let ba = voxel_pairs(gb.voxels(), ga.voxels(), false, &kernel)?;
            with_quad_error(ab.plus(ba), quad, regime)
        }
        (sa, sb) => {
            let est = stratified_mc(mc, 8, 1, |u, out| {
                let (s1, p1) = sa.sample(&u[0..4]);
                let (s2, p2) = sb.sample(&u[4..8]);
                if p1 > 0.0 && p2 > 0.0 {
                    let w = sa.scale(&s1) * sb.scale(&s2) / (p1 * p2);
                    out[0] = w * (kernel(&s1, &s2) + kernel(&s2, &s1));
                }
            })?;
            est[0]
        }
    };
    Ok(e.scale(1.0 / (128.0 * PI.powi(4))))
}

/// Force on the atom: the order-one part from the analytic central-force
/// kernel, and the total from central differences of the full second-order
/// potential with step `1e-4` times the distance to the body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Force {
    pub order1: [Estimate; 3],
    pub total: [Estimate; 3],
}

impl Force {
    pub fn order1_vector(&self) -> Point {
        Point::new(
            self.order1[0].value,
            self.order1[1].value,
            self.order1[2].value,
        )
    }

    pub fn total_vector(&self) -> Point {
        Point::new(
            self.total[0].value,
            self.total[1].value,
            self.total[2].value,
        )
    }
}

/// Order-one force `-(1/32 pi^3) int du alpha chi int d^3s rho_hat G(u rho) / rho^7`
/// with `rho_hat` pointing from the body point to the atom.
pub fn cp_force_order1(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<[Estimate; 3]> {
    check_outside(atom, &body.shape)?;
    if body.susceptibility.is_zero() {
        return Ok([Estimate::exact(0.0); 3]);
    }
    let alpha = &atom.polarizability;
    let chi = &body.susceptibility;
    let spectral = Spectral::new(|u| alpha.alpha_iu(u) * chi.chi_iu(u), regime, quad)?;
    let ra = atom.position;
    let est = spatial_vec(&body.shape, 1, mc, 3, |s, out| {
        if let Ok(d) = Displacement::between(&ra, s) {
            let g = spectral.pair_gradient(d.rho, regime, quad);
            for (o, r) in out.iter_mut().zip(d.rho_hat.iter()) {
                *o = r * g;
            }
        }
    })?;
    let k = -1.0 / (32.0 * PI.powi(3));
    Ok([0, 1, 2].map(|i| with_quad_error(est[i], quad, regime).scale(k)))
}

pub fn cp_force(
    atom: &Atom,
    body: &BodyRegion,
    quad: &QuadratureSpec,
    mc: &MCSpec,
    regime: Regime,
) -> Result<Force> {
    let order1 = cp_force_order1(atom, body, quad, mc, regime)?;
    let (near, _) = body.shape.distance_range(&atom.position);
    let h = 1e-4 * near;
    let mut total = [Estimate::exact(0.0); 3];
    for (i, slot) in total.iter_mut().enumerate() {
        let mut step = Point::zeros();
        step[i] = h;
        let plus = potential(&atom.shifted(step), body, quad, mc, regime)?.total;
        let minus = potential(&atom.shifted(-step), body, quad, mc, regime)?.total;
        // Both sides share their sample points: the difference carries the
        // relative error of the potential, plus the sampling noise of the
        // direct order-one estimate of the same component.
        let value = -(plus.value - minus.value) / (2.0 * h);
        let rel = [plus, minus]
            .iter()
            .map(|e| {
                if e.value == 0.0 {
                    0.0
                } else {
                    e.relative_error()
                }
            })
            .fold(0.0, f64::max);
        let err = (value * rel).hypot(order1[i].std_err);
        *slot = Estimate::new(value, err, plus.evals + minus.evals);
    }
    Ok(Force { order1, total })
}
