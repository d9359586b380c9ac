//! Microscopic many-atom van der Waals potentials and their correspondence
//! with the Born expansion of a dilute medium.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::born::{
    born_term_k, delta2_single_point, delta2_two_point, Atom, BodyRegion, GreenBackground, Regime,
};
use crate::error::{Error, Result};
use crate::geometry::{Shape, VoxelGrid};
use crate::kernels::{g2, g3, Displacement, TriangleGeometry};
use crate::materials::{PolarizabilityModel, SusceptibilityModel};
use crate::quad::{integrate_halfline, MCSpec, QuadratureSpec};
use crate::Point;

/// Largest cluster for which classes are enumerated.
pub const MAX_CLASS_SIZE: usize = 8;
/// Largest cluster for [`u_many`].
pub const MAX_CLUSTER_SIZE: usize = 6;

/// Atoms at distinct positions, each with its own polarizability.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomCluster {
    pub positions: Vec<Point>,
    pub polarizabilities: Vec<PolarizabilityModel>,
}

impl AtomCluster {
    pub fn new(positions: Vec<Point>, polarizabilities: Vec<PolarizabilityModel>) -> Result<Self> {
        if positions.len() != polarizabilities.len() {
            return Err(Error::InvalidInput(
                "cluster needs one polarizability per position".into(),
            ));
        }
        if positions.len() < 2 {
            return Err(Error::InvalidInput(
                "cluster needs at least two atoms".into(),
            ));
        }
        for i in 0..positions.len() {
            for j in i + 1..positions.len() {
                Displacement::between(&positions[i], &positions[j])?;
            }
        }
        Ok(Self {
            positions,
            polarizabilities,
        })
    }

    pub fn identical(positions: Vec<Point>, alpha: &PolarizabilityModel) -> Result<Self> {
        let n = positions.len();
        Self::new(positions, vec![alpha.clone(); n])
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// One representative ordering per class of orderings equivalent under
/// cyclic rotation and reversal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PermClassSet {
    pub j: usize,
    pub representatives: Vec<Vec<usize>>,
}

/// `j! / ((2 - delta_{2j}) j)`.
pub fn perm_class_count(j: usize) -> usize {
    let fact: usize = (1..=j).product();
    fact / (if j == 2 { 1 } else { 2 } * j)
}

fn canonical(seq: &[usize]) -> Vec<usize> {
    let n = seq.len();
    let mut best = seq.to_vec();
    let reversed: Vec<usize> = seq.iter().rev().copied().collect();
    for base in [seq, reversed.as_slice()] {
        for r in 0..n {
            let rot: Vec<usize> = (0..n).map(|i| base[(i + r) % n]).collect();
            if rot < best {
                best = rot;
            }
        }
    }
    best
}

/// Enumerates orderings that start with element 0 and keeps the ones that
/// are lexicographically minimal among their rotations and reflections.
pub fn perm_class_representatives(j: usize) -> Result<PermClassSet> {
    if j > MAX_CLASS_SIZE {
        return Err(Error::SizeRefusal {
            size: j,
            max: MAX_CLASS_SIZE,
        });
    }
    if j < 2 {
        return Err(Error::InvalidInput(format!(
            "permutation classes need j >= 2, got {j}"
        )));
    }
    let mut rest: Vec<usize> = (1..j).collect();
    let mut representatives = Vec::new();
    permute(&mut rest, 0, &mut |tail| {
        let mut seq = Vec::with_capacity(j);
        seq.push(0);
        seq.extend_from_slice(tail);
        if canonical(&seq) == seq {
            representatives.push(seq);
        }
    });
    representatives.sort();
    Ok(PermClassSet { j, representatives })
}

fn permute(items: &mut [usize], k: usize, visit: &mut dyn FnMut(&[usize])) {
    if k == items.len() {
        visit(items);
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

/// Two-atom potential `-(1/32 pi^3 r^6) int du g2(u r) alpha_A alpha_B`.
pub fn u_ab(
    r1: &Point,
    r2: &Point,
    a: &PolarizabilityModel,
    b: &PolarizabilityModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let d = Displacement::between(r1, r2)?;
    let r = d.rho;
    let i = integrate_halfline(|u| g2(u * r) * a.alpha_iu(u) * b.alpha_iu(u), quad)?;
    Ok(-i.value / (32.0 * PI.powi(3) * r.powi(6)))
}

/// Retarded two-atom form `-23 alpha_A(0) alpha_B(0) / (64 pi^3 r^7)`.
pub fn u_ab_retarded(r: f64, a: &PolarizabilityModel, b: &PolarizabilityModel) -> f64 {
    -23.0 * a.static_value() * b.static_value() / (64.0 * PI.powi(3) * r.powi(7))
}

/// Nonretarded two-atom form `-(3 / 16 pi^3 r^6) int du alpha_A alpha_B`.
pub fn u_ab_nonretarded(
    r: f64,
    a: &PolarizabilityModel,
    b: &PolarizabilityModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let i = integrate_halfline(|u| a.alpha_iu(u) * b.alpha_iu(u), quad)?;
    Ok(-3.0 * i.value / (16.0 * PI.powi(3) * r.powi(6)))
}

/// Three-atom potential
/// `(1 / 64 pi^4 r12^3 r23^3 r31^3) int du alpha_A alpha_B alpha_C g3`.
pub fn u_abc(
    r: [&Point; 3],
    alphas: [&PolarizabilityModel; 3],
    quad: &QuadratureSpec,
) -> Result<f64> {
    let tri = TriangleGeometry::from_points(r[0], r[1], r[2])?;
    let (x, y, z) = tri.sides();
    let i = integrate_halfline(
        |u| alphas[0].alpha_iu(u) * alphas[1].alpha_iu(u) * alphas[2].alpha_iu(u) * g3(u, &tri),
        quad,
    )?;
    Ok(i.value / (64.0 * PI.powi(4) * (x * y * z).powi(3)))
}

/// Retarded three-atom form with the closed-form frequency integral.
pub fn u_abc_retarded(r: [&Point; 3], alphas: [&PolarizabilityModel; 3]) -> Result<f64> {
    let tri = TriangleGeometry::from_points(r[0], r[1], r[2])?;
    let (x, y, z) = tri.sides();
    let a0: f64 = alphas.iter().map(|a| a.static_value()).product();
    Ok(a0 * crate::kernels::g3_u_integral_closed(&tri) / (64.0 * PI.powi(4) * (x * y * z).powi(3)))
}

/// Axilrod-Teller form
/// `(3 / 64 pi^4) [1 - 3 cos cos cos] / (r12 r23 r31)^3 int du alpha alpha alpha`.
pub fn u_abc_nonretarded(
    r: [&Point; 3],
    alphas: [&PolarizabilityModel; 3],
    quad: &QuadratureSpec,
) -> Result<f64> {
    let tri = TriangleGeometry::from_points(r[0], r[1], r[2])?;
    let (x, y, z) = tri.sides();
    let i = integrate_halfline(
        |u| alphas[0].alpha_iu(u) * alphas[1].alpha_iu(u) * alphas[2].alpha_iu(u),
        quad,
    )?;
    Ok(3.0 * axilrod_teller_factor(&tri) * i.value / (64.0 * PI.powi(4) * (x * y * z).powi(3)))
}

/// `1 - 3 (a.b)(b.c)(c.a)` for the three edge directions.
pub fn axilrod_teller_factor(tri: &TriangleGeometry) -> f64 {
    let (ab, bc, ca) = tri.cosines();
    1.0 - 3.0 * ab * bc * ca
}

/// Symmetrized `j`-atom potential on a background,
/// `((-1)^(j-1) / ((1 + delta_{2j}) pi)) int du u^(2j) prod(alpha) S Tr[H ... H]`,
/// with one trace per permutation class.
pub fn u_many(
    cluster: &AtomCluster,
    background: &dyn GreenBackground,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let j = cluster.len();
    if j > MAX_CLUSTER_SIZE {
        return Err(Error::SizeRefusal {
            size: j,
            max: MAX_CLUSTER_SIZE,
        });
    }
    let classes = perm_class_representatives(j)?;
    let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
    let delta = if j == 2 { 2.0 } else { 1.0 };
    let pos = &cluster.positions;
    let integrand = |u: f64| -> f64 {
        let mut h = vec![Matrix3::zeros(); j * j];
        for a in 0..j {
            for b in 0..j {
                if a != b {
                    match background.regular(&pos[a], &pos[b], u) {
                        Ok(t) => h[a * j + b] = t.matrix,
                        Err(_) => return f64::NAN,
                    }
                }
            }
        }
        let traces: f64 = classes
            .representatives
            .iter()
            .map(|perm| {
                let mut m = Matrix3::<f64>::identity();
                for i in 0..j {
                    m *= h[perm[i] * j + perm[(i + 1) % j]];
                }
                m.trace()
            })
            .sum();
        let alphas: f64 = cluster
            .polarizabilities
            .iter()
            .map(|a| a.alpha_iu(u))
            .product();
        u.powi(2 * j as i32) * alphas * traces
    };
    let i = integrate_halfline(integrand, quad)?;
    Ok(sign / (delta * PI) * i.value)
}

/// Outcome of comparing a dilute lattice of medium atoms with the Born
/// potential of the corresponding voxel body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrespondenceReport {
    /// `sum_j U_AB(r_A, s_j)`.
    pub micro_pairs: f64,
    /// `(1/2) sum_{j != k} U_ABB(r_A, s_j, s_k)`.
    pub micro_triples: f64,
    /// First-order Born term with linearized `chi = n alpha_B`.
    pub born_linear: f64,
    /// `Delta_1[chi_CM] - Delta_1[n alpha_B]`.
    pub born_cm_shift: f64,
    /// Single-point second-order term with the Clausius-Mosotti `chi`.
    pub born_single: f64,
    /// Two-point second-order term with the Clausius-Mosotti `chi`.
    pub born_two: f64,
}

impl CorrespondenceReport {
    /// Born second-order total at matched order in `n alpha_B`.
    pub fn born_quadratic(&self) -> f64 {
        self.born_cm_shift + self.born_single + self.born_two
    }

    pub fn linear_discrepancy(&self) -> f64 {
        relative(self.born_linear, self.micro_pairs)
    }

    pub fn quadratic_discrepancy(&self) -> f64 {
        relative(self.born_quadratic(), self.micro_triples)
    }
}

fn relative(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        (a - b).abs() / b.abs()
    }
}

/// Compares the microscopic pair and triple sums over a lattice of identical
/// medium atoms (one per voxel of edge `spacing`) with the Born expansion of
/// the corresponding body.
pub fn microscopic_vs_born(
    atom: &Atom,
    lattice: &AtomCluster,
    spacing: f64,
    quad: &QuadratureSpec,
    mc: &MCSpec,
) -> Result<CorrespondenceReport> {
    let n = lattice.len();
    if n > 125 {
        return Err(Error::SizeRefusal { size: n, max: 125 });
    }
    let medium = &lattice.polarizabilities[0];
    if lattice.polarizabilities.iter().any(|p| p != medium) {
        return Err(Error::InvalidInput(
            "lattice atoms must be identical".into(),
        ));
    }
    let density = 1.0 / spacing.powi(3);
    let cm = SusceptibilityModel::clausius_mosotti(density, medium.clone())?;
    let linear = SusceptibilityModel::dilute(density, medium.clone())?;

    let ra = &atom.position;
    let alpha_a = &atom.polarizability;
    let mut micro_pairs = 0.0;
    for s in &lattice.positions {
        micro_pairs += u_ab(ra, s, alpha_a, medium, quad)?;
    }
    let mut micro_triples = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            let p = [ra, &lattice.positions[j], &lattice.positions[k]];
            micro_triples += u_abc(p, [alpha_a, medium, medium], quad)?;
        }
    }

    let grid = VoxelGrid::new(
        lattice
            .positions
            .iter()
            .map(|&center| crate::geometry::Voxel {
                center,
                edge: spacing,
                scale: 1.0,
            })
            .collect(),
    )?;
    let shape = Shape::VoxelGrid(grid);
    let lin_body = BodyRegion::new(shape.clone(), linear);
    let cm_body = BodyRegion::new(shape, cm);
    let born_linear = born_term_k(atom, &lin_body, 1, quad)?.value;
    let x = |u: f64| density * medium.alpha_iu(u);
    // chi_CM - x = x^2 / (3 - x), evaluated without cancellation
    let born_cm_shift = order1_with(atom, &lin_body, &|u| x(u) * x(u) / (3.0 - x(u)), quad)?;
    let born_single = delta2_single_point(atom, &cm_body, quad, mc, Regime::Full)?.value;
    let born_two = delta2_two_point(atom, &cm_body, quad, mc, Regime::Full)?.value;
    Ok(CorrespondenceReport {
        micro_pairs,
        micro_triples,
        born_linear,
        born_cm_shift,
        born_single,
        born_two,
    })
}

/// Midpoint-rule first-order term of a voxel body with an arbitrary spectrum.
fn order1_with(
    atom: &Atom,
    body: &BodyRegion,
    chi: &dyn Fn(f64) -> f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let Shape::VoxelGrid(g) = &body.shape else {
        return Err(Error::InvalidInput("voxel body expected".into()));
    };
    let mut acc = 0.0;
    for v in g.voxels() {
        let rho = (atom.position - v.center).norm();
        let j = integrate_halfline(
            |u| atom.polarizability.alpha_iu(u) * chi(u) * g2(u * rho),
            quad,
        )?;
        acc += v.volume() * v.scale * j.value / rho.powi(6);
    }
    Ok(-acc / (32.0 * PI.powi(3)))
}
