//! Closed-form kernels of the vacuum Green tensor on the imaginary frequency
//! axis and the scalar pair/triple kernels built from them.
//!
//! Everything here is in reduced units (c = 1): an argument `x` is the
//! dimensionless product `u * distance`.

use std::f64::consts::PI;

use nalgebra::Matrix3;

use crate::error::{Error, Result};
use crate::Point;

/// Separations below this (in units of L) are treated as coincident.
pub const EXCLUSION_RADIUS: f64 = 1e-9;

pub fn poly_a(x: f64) -> f64 {
    1.0 + x + x * x
}

pub fn poly_b(x: f64) -> f64 {
    3.0 + x * (3.0 + x)
}

/// Two-point kernel `g2(x) = 2 e^{-2x} (3 + 6x + 5x^2 + 2x^3 + x^4)`.
///
/// Equals `16 pi^2 u^4 rho^6 Tr[H_V H_V]` at `x = u rho`.
pub fn g2(x: f64) -> f64 {
    2.0 * (-2.0 * x).exp() * (3.0 + x * (6.0 + x * (5.0 + x * (2.0 + x))))
}

/// Analytic derivative of [`g2`].
pub fn g2_derivative(x: f64) -> f64 {
    -4.0 * (-2.0 * x).exp() * x * (1.0 + x * (2.0 + x * x))
}

/// `6 g2(x) - x g2'(x)`, so that the gradient of `g2(u r)/r^6` is
/// `-(r_hat / r^7) * g2_radial_gradient(u r)`.
pub fn g2_radial_gradient(x: f64) -> f64 {
    4.0 * (-2.0 * x).exp() * (9.0 + x * (18.0 + x * (16.0 + x * (8.0 + x * (3.0 + x)))))
}

/// A separation vector `r - r'` together with its length and direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Displacement {
    pub vector: Point,
    pub rho: f64,
    pub rho_hat: Point,
}

impl Displacement {
    pub fn new(vector: Point) -> Result<Self> {
        let rho = vector.norm();
        if !(rho >= EXCLUSION_RADIUS) {
            return Err(Error::CoincidentPoints {
                separation: rho,
                radius: EXCLUSION_RADIUS,
            });
        }
        Ok(Self {
            vector,
            rho,
            rho_hat: vector / rho,
        })
    }

    pub fn between(r: &Point, rp: &Point) -> Result<Self> {
        Self::new(r - rp)
    }
}

/// Real 3x3 tensor value of a Green-tensor kernel at imaginary frequency `u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tensor3 {
    pub matrix: Matrix3<f64>,
    pub u: f64,
}

impl Tensor3 {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn transpose(&self) -> Self {
        Self {
            matrix: self.matrix.transpose(),
            u: self.u,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.matrix.iter().all(|v| v.is_finite())
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace()
    }
}

/// Regular part `H_V(r, r', iu)` of the vacuum Green tensor:
///
/// `e^{-u rho} / (4 pi u^2 rho^3) * [a(u rho) I - b(u rho) rho_hat (x) rho_hat]`.
pub fn hv(r: &Point, rp: &Point, u: f64) -> Result<Tensor3> {
    if !(u > 0.0) {
        return Err(Error::InvalidInput(format!(
            "vacuum tensor needs u > 0, got {u}"
        )));
    }
    let d = Displacement::between(r, rp)?;
    Ok(hv_displacement(&d, u))
}

pub(crate) fn hv_displacement(d: &Displacement, u: f64) -> Tensor3 {
    let x = u * d.rho;
    let prefactor = (-x).exp() / (4.0 * PI * u * u * d.rho.powi(3));
    let outer = d.rho_hat * d.rho_hat.transpose();
    let matrix = (Matrix3::identity() * poly_a(x) - outer * poly_b(x)) * prefactor;
    Tensor3 { matrix, u }
}

/// Triangle spanned by an atom and two body points:
/// `alpha = r_A - s1`, `beta = s1 - s2`, `gamma = s2 - r_A`.
#[derive(Debug, Clone, Copy)]
pub struct TriangleGeometry {
    pub alpha_vec: Displacement,
    pub beta_vec: Displacement,
    pub gamma_vec: Displacement,
    pub sigma1: f64,
    pub sigma2: f64,
    pub sigma3: f64,
}

impl TriangleGeometry {
    /// Builds the triangle from three edge vectors. Closure is not enforced
    /// here; see [`triangle_defect`].
    pub fn from_edges(alpha: Point, beta: Point, gamma: Point) -> Result<Self> {
        let edges = [alpha, beta, gamma].map(|v| v.norm());
        let shortest = edges.iter().cloned().fold(f64::INFINITY, f64::min);
        if !(shortest >= EXCLUSION_RADIUS) {
            return Err(Error::DegenerateTriangle { side: shortest });
        }
        let alpha_vec = Displacement::new(alpha)?;
        let beta_vec = Displacement::new(beta)?;
        let gamma_vec = Displacement::new(gamma)?;
        let [a, b, c] = edges;
        Ok(Self {
            alpha_vec,
            beta_vec,
            gamma_vec,
            sigma1: a + b + c,
            sigma2: a * a + b * b + c * c,
            sigma3: a.powi(3) + b.powi(3) + c.powi(3),
        })
    }

    /// Triangle with vertices `p1 -> p2 -> p3`, edges `p1 - p2`, `p2 - p3`, `p3 - p1`.
    pub fn from_points(p1: &Point, p2: &Point, p3: &Point) -> Result<Self> {
        Self::from_edges(p1 - p2, p2 - p3, p3 - p1)
    }

    pub fn sides(&self) -> (f64, f64, f64) {
        (self.alpha_vec.rho, self.beta_vec.rho, self.gamma_vec.rho)
    }

    /// The three consecutive edge-direction cosines
    /// `(alpha_hat . beta_hat, beta_hat . gamma_hat, gamma_hat . alpha_hat)`.
    pub fn cosines(&self) -> (f64, f64, f64) {
        let (a, b, c) = (
            &self.alpha_vec.rho_hat,
            &self.beta_vec.rho_hat,
            &self.gamma_vec.rho_hat,
        );
        (a.dot(b), b.dot(c), c.dot(a))
    }

    pub fn max_side(&self) -> f64 {
        let (a, b, c) = self.sides();
        a.max(b).max(c)
    }
}

/// Three-point kernel, equal to `64 pi^3 u^6 (alpha beta gamma)^3 Tr[H_V H_V H_V]`
/// around the triangle.
pub fn g3(u: f64, tri: &TriangleGeometry) -> f64 {
    let (al, be, ga) = tri.sides();
    let (ab, bg, ga_) = tri.cosines();
    let (x, y, z) = (u * al, u * be, u * ga);
    let (ax, ay, az) = (poly_a(x), poly_a(y), poly_a(z));
    let (bx, by, bz) = (poly_b(x), poly_b(y), poly_b(z));
    let bracket = 3.0 * ax * ay * az - bx * ay * az - ax * by * az - ax * ay * bz
        + bx * by * az * ab * ab
        + ax * by * bz * bg * bg
        + bx * ay * bz * ga_ * ga_
        - bx * by * bz * ab * bg * ga_;
    (-u * tri.sigma1).exp() * bracket
}

/// Zero-frequency form `3 [1 - 3 (a.b)(b.c)(c.a)]`, valid on closed triangles.
pub fn g3_static(tri: &TriangleGeometry) -> f64 {
    let (ab, bg, ga) = tri.cosines();
    3.0 * (1.0 - 3.0 * ab * bg * ga)
}

/// Triangle defect `T = 1 - sum of squared cosines + 2 * their product`;
/// vanishes identically for closed triangles.
pub fn triangle_defect(tri: &TriangleGeometry) -> f64 {
    let (ab, bg, ga) = tri.cosines();
    1.0 - ab * ab - bg * bg - ga * ga + 2.0 * ab * bg * ga
}

/// Coefficient `f2(alpha, beta, gamma)` of the retarded two-point bracket.
pub fn f2(al: f64, be: f64, ga: f64) -> f64 {
    let s1 = al + be + ga;
    let s1_2 = s1 * s1;
    let s1_3 = s1_2 * s1;
    let s1_4 = s1_3 * s1;
    let s1_5 = s1_4 * s1;
    3.0 * (al * al / s1_2
        + 3.0 * al * al * (be + ga) / s1_3
        + 4.0 * be * ga * (3.0 * al * al - be * ga) / s1_4
        - 20.0 * al * be * be * ga * ga / s1_5)
}

/// The five dimensionless coefficients of the retarded two-point bracket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FCoefficients {
    pub f1: f64,
    /// `f2(gamma, alpha, beta)`, multiplies `(alpha_hat . beta_hat)^2`.
    pub f2_cab: f64,
    /// `f2(alpha, beta, gamma)`, multiplies `(beta_hat . gamma_hat)^2`.
    pub f2_abc: f64,
    /// `f2(beta, gamma, alpha)`, multiplies `(gamma_hat . alpha_hat)^2`.
    pub f2_bca: f64,
    pub f3: f64,
}

pub fn f_coeffs_from_sides(al: f64, be: f64, ga: f64) -> FCoefficients {
    let s1 = al + be + ga;
    let s2 = al * al + be * be + ga * ga;
    let s3 = al.powi(3) + be.powi(3) + ga.powi(3);
    let r2 = s2 / (s1 * s1);
    let r3 = s3 / s1.powi(3);
    let r22 = r2 * r2;
    let r23 = r2 * r3;
    let r33 = r3 * r3;
    FCoefficients {
        f1: 9.0 - 39.0 * r2 + 22.0 * r3 + 54.0 * r22 - 65.0 * r23 + 20.0 * r33,
        f2_cab: f2(ga, al, be),
        f2_abc: f2(al, be, ga),
        f2_bca: f2(be, ga, al),
        f3: -1.0 - 39.0 * r2 + 17.0 * r3 + 72.0 * r22 - 75.0 * r23 + 20.0 * r33,
    }
}

pub fn f_coeffs(tri: &TriangleGeometry) -> FCoefficients {
    let (a, b, c) = tri.sides();
    f_coeffs_from_sides(a, b, c)
}

/// Angular bracket of the retarded two-point term,
/// `f1 + f2(c,a,b)(a.b)^2 + f2(a,b,c)(b.c)^2 + f2(b,c,a)(c.a)^2 + f3 (a.b)(b.c)(c.a)`.
pub fn retarded_bracket(tri: &TriangleGeometry) -> f64 {
    let f = f_coeffs(tri);
    let (ab, bg, ga) = tri.cosines();
    f.f1 + f.f2_cab * ab * ab + f.f2_abc * bg * bg + f.f2_bca * ga * ga + f.f3 * ab * bg * ga
}

/// Closed form of `int_0^inf g3(u, tri) du` on a closed triangle:
/// `4 / sigma1 * retarded_bracket(tri)`.
pub fn g3_u_integral_closed(tri: &TriangleGeometry) -> f64 {
    4.0 / tri.sigma1 * retarded_bracket(tri)
}

/// Direct quadrature of `int_0^inf g3(u, tri) du` next to the independent
/// closed form. Returns `(direct, closed)`.
pub fn retarded_u_integral_check(
    tri: &TriangleGeometry,
    spec: &crate::quad::QuadratureSpec,
) -> Result<(f64, f64)> {
    let direct = crate::quad::integrate_halfline(|u| g3(u, tri), spec)?;
    Ok((direct.value, g3_u_integral_closed(tri)))
}
