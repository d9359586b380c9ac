//! Kernel and limit identities run as a smoke test of a build.

use std::f64::consts::PI;

use casimir_born::kernels::{g2, g3, g3_u_integral_closed, hv, triangle_defect, TriangleGeometry};
use casimir_born::quad::{integrate_halfline, QuadratureSpec};
use casimir_born::strata::{structure_f, structure_h};
use casimir_born::vdw::{axilrod_teller_factor, perm_class_count};
use casimir_born::{Point, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

/// Seed of the random configurations.
pub const SUITE_SEED: u64 = 0x5eed_cafe;

/// Signature of the three-point kernel under test.
pub type TripleKernel = fn(f64, &TriangleGeometry) -> f64;

/// Outcome of one identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityCheck {
    pub name: String,
    /// Worst deviation found.
    pub error: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl IdentityCheck {
    fn new(name: impl Into<String>, error: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            error,
            tolerance,
            passed: error <= tolerance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityReport {
    pub checks: Vec<IdentityCheck>,
}

impl IdentityReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&IdentityCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Fixed-width pass/fail table.
    pub fn table(&self) -> String {
        let width = self
            .checks
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = format!(
            "{:<width$}  {:>11}  {:>9}  result\n",
            "identity", "error", "tolerance"
        );
        for c in &self.checks {
            out.push_str(&format!(
                "{:<width$}  {:>11.3e}  {:>9.0e}  {}\n",
                c.name,
                c.error,
                c.tolerance,
                if c.passed { "PASS" } else { "FAIL" }
            ));
        }
        out
    }
}

fn random_point(rng: &mut ChaCha8Rng) -> Point {
    Point::new(
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
        rng.random_range(-1.0..1.0),
    )
}

/// Draws `n` points with all mutual distances above `min_sep`.
fn separated_points(rng: &mut ChaCha8Rng, n: usize, min_sep: f64) -> Vec<Point> {
    loop {
        let p: Vec<Point> = (0..n).map(|_| random_point(rng)).collect();
        if (0..n).all(|i| (i + 1..n).all(|j| (p[i] - p[j]).norm() > min_sep)) {
            return p;
        }
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.random_range(lo.ln()..hi.ln())).exp()
}

/// Worst relative error of `Tr[H(r,s) H(s,r)] = g2(u rho) / (16 pi^2 u^4 rho^6)`.
pub fn pair_trace_identity(configs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..configs {
        let p = separated_points(&mut rng, 2, 0.05);
        let u = log_uniform(&mut rng, 0.01, 20.0);
        let rho = (p[0] - p[1]).norm();
        let tr = (hv(&p[0], &p[1], u)?.matrix * hv(&p[1], &p[0], u)?.matrix).trace();
        let expected = g2(u * rho) / (16.0 * PI * PI * u.powi(4) * rho.powi(6));
        worst = worst.max((tr - expected).abs() / expected.abs());
    }
    Ok(worst)
}

/// Worst relative error of
/// `Tr[H(p1,p2) H(p2,p3) H(p3,p1)] = g3 / (64 pi^3 u^6 (a b c)^3)`.
pub fn triple_trace_identity(configs: usize, seed: u64, kernel: TripleKernel) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..configs {
        let p = separated_points(&mut rng, 3, 0.05);
        let u = log_uniform(&mut rng, 0.01, 20.0);
        let prod =
            hv(&p[0], &p[1], u)?.matrix * hv(&p[1], &p[2], u)?.matrix * hv(&p[2], &p[0], u)?.matrix;
        let tri = TriangleGeometry::from_points(&p[0], &p[1], &p[2])?;
        let (a, b, c) = tri.sides();
        let expected = kernel(u, &tri) / (64.0 * PI.powi(3) * u.powi(6) * (a * b * c).powi(3));
        worst = worst.max((prod.trace() - expected).abs() / expected.abs());
    }
    Ok(worst)
}

/// Largest `|T|` over random closed triangles.
pub fn closed_triangle_defect(configs: usize, seed: u64) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..configs {
        let p = separated_points(&mut rng, 3, 0.05);
        let tri = TriangleGeometry::from_points(&p[0], &p[1], &p[2])?;
        worst = worst.max(triangle_defect(&tri).abs());
    }
    Ok(worst)
}

/// `|int_0^inf g2 - 23/2|`.
pub fn g2_integral_error(quad: &QuadratureSpec) -> Result<f64> {
    Ok((integrate_halfline(g2, quad)?.value - 11.5).abs())
}

/// Worst relative gap between the quadrature of `g3` over `u` and its closed form.
pub fn retarded_closed_form(configs: usize, seed: u64, quad: &QuadratureSpec) -> Result<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..configs {
        let p = separated_points(&mut rng, 3, 0.05);
        let tri = TriangleGeometry::from_points(&p[0], &p[1], &p[2])?;
        let direct = integrate_halfline(|u| g3(u, &tri), quad)?.value;
        let closed = g3_u_integral_closed(&tri);
        worst = worst.max((direct - closed).abs() / closed.abs());
    }
    Ok(worst)
}

/// Largest deviation of `F3, H3` from `1, 1` at small and `1/2, 1/4` at large argument.
pub fn structure_limits(x_small: f64, x_large: f64, quad: &QuadratureSpec) -> Result<f64> {
    let checks = [
        (structure_f(3, x_small, quad)?, 1.0),
        (structure_f(3, x_large, quad)?, 0.5),
        (structure_h(3, x_small, quad)?, 1.0),
        (structure_h(3, x_large, quad)?, 0.25),
    ];
    Ok(checks
        .iter()
        .map(|(v, e)| (v - e).abs())
        .fold(0.0, f64::max))
}

/// Number of class counts for `j = 2..=5` differing from `1, 1, 3, 12`.
pub fn permutation_count_mismatches() -> f64 {
    [(2, 1), (3, 1), (4, 3), (5, 12)]
        .iter()
        .filter(|(j, n)| perm_class_count(*j) != *n)
        .count() as f64
}

/// `|AT - 11/8|` for an equilateral triangle.
pub fn axilrod_teller_equilateral() -> Result<f64> {
    let p = [
        Point::new(0.0, 0.0, 0.0),
        Point::new(1.0, 0.0, 0.0),
        Point::new(0.5, 3f64.sqrt() / 2.0, 0.0),
    ];
    let tri = TriangleGeometry::from_points(&p[0], &p[1], &p[2])?;
    Ok((axilrod_teller_factor(&tri) - 11.0 / 8.0).abs())
}

/// Runs every identity with the library kernels.
pub fn identity_suite() -> Result<IdentityReport> {
    identity_suite_with(g3)
}

/// Runs every identity with `kernel` standing in for `g3`.
pub fn identity_suite_with(kernel: TripleKernel) -> Result<IdentityReport> {
    let quad = QuadratureSpec::default().with_rel_tol(1e-12);
    Ok(IdentityReport {
        checks: vec![
            IdentityCheck::new("pair trace", pair_trace_identity(100, SUITE_SEED)?, 1e-12),
            IdentityCheck::new(
                "triple trace",
                triple_trace_identity(100, SUITE_SEED, kernel)?,
                1e-12,
            ),
            IdentityCheck::new(
                "closed triangle defect",
                closed_triangle_defect(10_000, SUITE_SEED)?,
                1e-12,
            ),
            IdentityCheck::new("int g2 = 11.5", g2_integral_error(&quad)?, 1e-10),
            IdentityCheck::new(
                "retarded closed form",
                retarded_closed_form(20, SUITE_SEED, &quad)?,
                1e-8,
            ),
            IdentityCheck::new("F3/H3 limits", structure_limits(1e-3, 1e3, &quad)?, 1e-3),
            IdentityCheck::new("permutation classes", permutation_count_mismatches(), 0.0),
            IdentityCheck::new("Axilrod-Teller 11/8", axilrod_teller_equilateral()?, 1e-12),
        ],
    })
}
