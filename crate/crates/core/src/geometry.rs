//! Spatial supports of dielectric bodies and their samplers.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::strata::Profile;
use crate::Point;

/// A bounded body support that can be sampled for Monte Carlo integration.
pub trait Region: Sync {
    fn volume(&self) -> f64;

    /// Upper bound on the distance between two points of the region.
    fn diameter(&self) -> f64;

    fn contains(&self, p: &Point) -> bool;

    /// Maps four uniforms to a point of the region and the sampling density there.
    fn sample(&self, u: &[f64]) -> (Point, f64);

    /// Sampling density of [`Region::sample`] at `p`; zero outside.
    fn pdf(&self, p: &Point) -> f64;

    /// Smallest and largest distance from `p` to the region.
    fn distance_range(&self, p: &Point) -> (f64, f64);

    /// Spatial susceptibility factor at `p`.
    fn scale(&self, _p: &Point) -> f64 {
        1.0
    }
}

/// A cubic cell of a voxel grid with its own susceptibility factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Voxel {
    pub center: Point,
    pub edge: f64,
    pub scale: f64,
}

impl Voxel {
    pub fn volume(&self) -> f64 {
        self.edge.powi(3)
    }

    fn min(&self) -> Point {
        self.center - Point::repeat(0.5 * self.edge)
    }

    fn max(&self) -> Point {
        self.center + Point::repeat(0.5 * self.edge)
    }

    fn contains(&self, p: &Point) -> bool {
        let (lo, hi) = (self.min(), self.max());
        (0..3).all(|i| p[i] >= lo[i] && p[i] <= hi[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VoxelGrid {
    voxels: Vec<Voxel>,
    cumulative: Vec<f64>,
}

impl VoxelGrid {
    pub fn new(voxels: Vec<Voxel>) -> Result<Self> {
        if voxels.is_empty() {
            return Err(Error::InvalidInput("voxel grid is empty".into()));
        }
        for v in &voxels {
            if !(v.edge > 0.0 && v.scale >= 0.0 && v.center.iter().all(|c| c.is_finite())) {
                return Err(Error::InvalidInput(format!("invalid voxel {v:?}")));
            }
        }
        let mut acc = 0.0;
        let cumulative = voxels
            .iter()
            .map(|v| {
                acc += v.volume();
                acc
            })
            .collect();
        Ok(Self { voxels, cumulative })
    }

    /// Grid with cells `origin + (ijk + 1/2) * spacing`.
    pub fn from_indices(origin: Point, spacing: f64, cells: &[([i64; 3], f64)]) -> Result<Self> {
        Self::new(
            cells
                .iter()
                .map(|&(ijk, scale)| Voxel {
                    center: origin
                        + Point::new(
                            ijk[0] as f64 + 0.5,
                            ijk[1] as f64 + 0.5,
                            ijk[2] as f64 + 0.5,
                        ) * spacing,
                    edge: spacing,
                    scale,
                })
                .collect(),
        )
    }

    pub fn voxels(&self) -> &[Voxel] {
        &self.voxels
    }

    pub fn union(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.voxels
                .iter()
                .chain(other.voxels.iter())
                .copied()
                .collect(),
        )
    }

    fn total_volume(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn bounds(&self) -> (Point, Point) {
        let mut lo = Point::repeat(f64::INFINITY);
        let mut hi = Point::repeat(f64::NEG_INFINITY);
        for v in &self.voxels {
            lo = lo.inf(&v.min());
            hi = hi.sup(&v.max());
        }
        (lo, hi)
    }

    fn find(&self, p: &Point) -> Option<&Voxel> {
        self.voxels.iter().find(|v| v.contains(p))
    }
}

/// Body support.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    /// Ring of radius `r0` and tube radius `a`, symmetry axis parallel to z.
    Torus {
        center: Point,
        r0: f64,
        a: f64,
    },
    Cuboid {
        min: Point,
        max: Point,
    },
    /// Laterally truncated layer `z_min <= z <= z_max`, `|x|, |y| <= half_width`,
    /// with susceptibility factor `p(z - z_min)`.
    SlabStack {
        profile: Profile,
        z_min: f64,
        z_max: f64,
        half_width: f64,
    },
    VoxelGrid(VoxelGrid),
}

impl Shape {
    pub fn torus(center: Point, r0: f64, a: f64) -> Result<Self> {
        if !(r0 > 0.0 && a > 0.0 && a < r0) {
            return Err(Error::InvalidInput(format!(
                "torus needs 0 < a < r0, got r0 = {r0}, a = {a}"
            )));
        }
        Ok(Self::Torus { center, r0, a })
    }

    pub fn cuboid(min: Point, max: Point) -> Result<Self> {
        if !(0..3).all(|i| max[i] > min[i]) {
            return Err(Error::InvalidInput(
                "cuboid needs max > min componentwise".into(),
            ));
        }
        Ok(Self::Cuboid { min, max })
    }

    /// Axis-aligned cube of edge `edge` centred at `center`.
    pub fn cube(center: Point, edge: f64) -> Result<Self> {
        Self::cuboid(
            center - Point::repeat(0.5 * edge),
            center + Point::repeat(0.5 * edge),
        )
    }

    pub fn slab_stack(profile: Profile, z_min: f64, z_max: f64, half_width: f64) -> Result<Self> {
        if !(z_max > z_min && half_width > 0.0) {
            return Err(Error::InvalidInput(
                "slab needs z_max > z_min and half_width > 0".into(),
            ));
        }
        Ok(Self::SlabStack {
            profile,
            z_min,
            z_max,
            half_width,
        })
    }

    /// Axis-aligned bounding box.
    pub fn bounding_box(&self) -> (Point, Point) {
        match self {
            Self::Torus { center, r0, a } => {
                let ext = Point::new(r0 + a, r0 + a, *a);
                (center - ext, center + ext)
            }
            Self::Cuboid { min, max } => (*min, *max),
            Self::SlabStack {
                z_min,
                z_max,
                half_width,
                ..
            } => (
                Point::new(-half_width, -half_width, *z_min),
                Point::new(*half_width, *half_width, *z_max),
            ),
            Self::VoxelGrid(g) => g.bounds(),
        }
    }

    /// True when the supports may share interior points.
    pub fn overlaps(&self, other: &Shape) -> bool {
        if let (Self::VoxelGrid(a), Self::VoxelGrid(b)) = (self, other) {
            return a.voxels.iter().any(|v| {
                b.voxels
                    .iter()
                    .any(|w| (0..3).all(|i| v.min()[i] < w.max()[i] && w.min()[i] < v.max()[i]))
            });
        }
        let (a0, a1) = self.bounding_box();
        let (b0, b1) = other.bounding_box();
        (0..3).all(|i| a0[i] < b1[i] && b0[i] < a1[i])
    }

    fn box_sample(min: &Point, max: &Point, u: &[f64]) -> Point {
        Point::new(
            min.x + (max.x - min.x) * u[0],
            min.y + (max.y - min.y) * u[1],
            min.z + (max.z - min.z) * u[2],
        )
    }
}

fn box_contains(min: &Point, max: &Point, p: &Point) -> bool {
    (0..3).all(|i| p[i] >= min[i] && p[i] <= max[i])
}

fn box_distance_range(min: &Point, max: &Point, p: &Point) -> (f64, f64) {
    let mut near = 0.0;
    let mut far = 0.0;
    for i in 0..3 {
        let d = if p[i] < min[i] {
            min[i] - p[i]
        } else if p[i] > max[i] {
            p[i] - max[i]
        } else {
            0.0
        };
        near += d * d;
        let f = (p[i] - min[i]).abs().max((p[i] - max[i]).abs());
        far += f * f;
    }
    (near.sqrt(), far.sqrt())
}

impl Region for Shape {
    fn volume(&self) -> f64 {
        match self {
            Self::Torus { r0, a, .. } => 2.0 * PI * PI * r0 * a * a,
            Self::Cuboid { min, max } => (max - min).iter().product(),
            Self::SlabStack {
                z_min,
                z_max,
                half_width,
                ..
            } => 4.0 * half_width * half_width * (z_max - z_min),
            Self::VoxelGrid(g) => g.total_volume(),
        }
    }

    fn diameter(&self) -> f64 {
        match self {
            Self::Torus { r0, a, .. } => 2.0 * (r0 + a),
            _ => {
                let (lo, hi) = self.bounding_box();
                (hi - lo).norm()
            }
        }
    }

    fn contains(&self, p: &Point) -> bool {
        match self {
            Self::Torus { center, r0, a } => {
                let d = p - center;
                let r = d.x.hypot(d.y);
                (r - r0).powi(2) + d.z * d.z <= a * a
            }
            Self::Cuboid { min, max } => box_contains(min, max, p),
            Self::SlabStack { .. } => {
                let (lo, hi) = self.bounding_box();
                box_contains(&lo, &hi, p)
            }
            Self::VoxelGrid(g) => g.find(p).is_some(),
        }
    }

    fn sample(&self, u: &[f64]) -> (Point, f64) {
        match self {
            Self::Torus { center, r0, a } => {
                let theta = 2.0 * PI * u[0];
                let rho = a * u[1].sqrt();
                let phi = 2.0 * PI * u[2];
                let r_cyl = r0 + rho * phi.cos();
                let p =
                    center + Point::new(r_cyl * theta.cos(), r_cyl * theta.sin(), rho * phi.sin());
                (p, 1.0 / (2.0 * PI * PI * a * a * r_cyl))
            }
            Self::Cuboid { min, max } => (Self::box_sample(min, max, u), 1.0 / self.volume()),
            Self::SlabStack { .. } => {
                let (lo, hi) = self.bounding_box();
                (Self::box_sample(&lo, &hi, u), 1.0 / self.volume())
            }
            Self::VoxelGrid(g) => {
                let target = u[0] * g.total_volume();
                let idx = g
                    .cumulative
                    .partition_point(|&c| c <= target)
                    .min(g.voxels.len() - 1);
                let v = &g.voxels[idx];
                (
                    Self::box_sample(&v.min(), &v.max(), &u[1..4]),
                    1.0 / g.total_volume(),
                )
            }
        }
    }

    fn pdf(&self, p: &Point) -> f64 {
        if !self.contains(p) {
            return 0.0;
        }
        match self {
            Self::Torus { center, a, .. } => {
                let d = p - center;
                1.0 / (2.0 * PI * PI * a * a * d.x.hypot(d.y))
            }
            _ => 1.0 / self.volume(),
        }
    }

    fn distance_range(&self, p: &Point) -> (f64, f64) {
        match self {
            Self::Torus { center, r0, a } => {
                let d = p - center;
                let r = d.x.hypot(d.y);
                let near = ((r - r0).powi(2) + d.z * d.z).sqrt() - a;
                let far = ((r + r0).powi(2) + d.z * d.z).sqrt() + a;
                (near.max(0.0), far)
            }
            Self::VoxelGrid(g) => g.voxels.iter().fold((f64::INFINITY, 0.0), |(n, f), v| {
                let (vn, vf) = box_distance_range(&v.min(), &v.max(), p);
                (n.min(vn), f.max(vf))
            }),
            _ => {
                let (lo, hi) = self.bounding_box();
                box_distance_range(&lo, &hi, p)
            }
        }
    }

    fn scale(&self, p: &Point) -> f64 {
        match self {
            Self::SlabStack { profile, z_min, .. } => profile.value(p.z - z_min),
            Self::VoxelGrid(g) => g.find(p).map_or(0.0, |v| v.scale),
            _ => 1.0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::{integrate_region_mc, MCSpec};

    #[test]
    fn torus_volume_by_sampling() {
        let torus = Shape::torus(Point::zeros(), 1.0, 0.05).unwrap();
        let spec = MCSpec::default().with_samples(20_000);
        let e = integrate_region_mc(|_| 1.0, &torus, &spec).unwrap();
        let exact = 2.0 * PI * PI * 0.0025;
        assert!(
            (e.value - exact).abs() <= 3.0 * e.std_err + 1e-15,
            "{e:?} vs {exact}"
        );
        assert!((torus.volume() - exact).abs() < 1e-15);
    }

    #[test]
    fn torus_samples_lie_inside() {
        let torus = Shape::torus(Point::new(0.3, -1.0, 2.0), 1.5, 0.2).unwrap();
        for i in 0..200 {
            let u = [
                i as f64 / 200.0,
                ((i * 37) % 200) as f64 / 200.0,
                ((i * 91) % 200) as f64 / 200.0,
                0.0,
            ];
            let (p, pdf) = torus.sample(&u);
            assert!(torus.contains(&p));
            assert!((torus.pdf(&p) / pdf - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn voxel_grid_sampling_and_lookup() {
        let g = VoxelGrid::from_indices(Point::zeros(), 0.5, &[([0, 0, 0], 1.0), ([3, 0, 0], 2.0)])
            .unwrap();
        let shape = Shape::VoxelGrid(g);
        assert!((shape.volume() - 0.25).abs() < 1e-15);
        assert_eq!(shape.scale(&Point::new(1.75, 0.25, 0.25)), 2.0);
        assert_eq!(shape.scale(&Point::new(1.0, 0.25, 0.25)), 0.0);
        let (p, _) = shape.sample(&[0.9, 0.5, 0.5, 0.5]);
        assert!((p - Point::new(1.75, 0.25, 0.25)).norm() < 1e-12);
    }

    #[test]
    fn overlap_detection() {
        let a = Shape::cube(Point::zeros(), 1.0).unwrap();
        let b = Shape::cube(Point::new(0.5, 0.0, 0.0), 1.0).unwrap();
        let c = Shape::cube(Point::new(1.0, 0.0, 0.0), 1.0).unwrap();
        assert!(a.overlaps(&b));
        assert!(!a.overlaps(&c));
    }

    #[test]
    fn distance_ranges() {
        let torus = Shape::torus(Point::zeros(), 1.0, 0.1).unwrap();
        let (n, f) = torus.distance_range(&Point::zeros());
        assert!((n - 0.9).abs() < 1e-14 && (f - 1.1).abs() < 1e-14);
        let cube = Shape::cube(Point::zeros(), 2.0).unwrap();
        let (n, f) = cube.distance_range(&Point::new(3.0, 0.0, 0.0));
        assert!((n - 2.0).abs() < 1e-14 && (f - (16.0f64 + 2.0).sqrt()).abs() < 1e-14);
    }
}
