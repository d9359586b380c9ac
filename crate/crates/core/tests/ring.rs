use casimir_born::born::{delta1_u_regime, delta2_two_point, Atom, BodyRegion, Regime};
use casimir_born::geometry::Shape;
use casimir_born::materials::{PolarizabilityModel, Spectra, SusceptibilityModel};
use casimir_born::quad::{MCSpec, QuadratureSpec};
use casimir_born::ring::*;
use casimir_born::Point;

fn spectra() -> Spectra {
    Spectra::new(
        PolarizabilityModel::single_line(1.0, 1.0).unwrap(),
        SusceptibilityModel::single_oscillator(0.5, 1.0).unwrap(),
    )
}

fn coefficient(a: f64, regime: Regime, samples: usize) -> (f64, f64) {
    let quad = QuadratureSpec::default();
    let geom = RingGeometry::new(1.0, a, 0.0).unwrap();
    let mc = MCSpec::default().with_samples(samples).with_seed(7);
    let e = ring_delta2_two_mc(&geom, &spectra(), regime, &mc, &quad).unwrap();
    (
        two_point_coefficient(&geom, &spectra(), regime, e.value, &quad).unwrap(),
        two_point_coefficient(&geom, &spectra(), regime, e.std_err, &quad).unwrap(),
    )
}

#[test]
fn monte_carlo_converges_with_thickness() {
    for regime in [Regime::Retarded, Regime::Nonretarded] {
        let (c2, s2) = coefficient(0.02, regime, 2_000_000);
        let (c1, s1) = coefficient(0.01, regime, 2_000_000);
        let diff = (c2 - c1).abs();
        assert!(
            diff < 5.0 * 0.02 * c1 + 3.0 * s1.hypot(s2),
            "{regime:?}: {c2} vs {c1}"
        );
    }
}

#[test]
fn monte_carlo_approaches_thin_ring_limit() {
    let quad = QuadratureSpec::default();
    let geom = RingGeometry::new(1.0, 0.005, 0.0).unwrap();
    for regime in [Regime::Retarded, Regime::Nonretarded] {
        let limit = ring_delta2_two_thin_limit(&geom, &spectra(), regime, &quad)
            .unwrap()
            .value;
        let limit = two_point_coefficient(&geom, &spectra(), regime, limit, &quad).unwrap();
        let (c, s) = coefficient(0.005, regime, 4_000_000);
        assert!(
            (c - limit).abs() < 3.0 * s + 5.0 * 0.005 * limit,
            "{regime:?}: {c} +- {s} vs {limit}"
        );
    }
}

#[test]
fn first_order_matches_torus_body() {
    let quad = QuadratureSpec::default();
    let a = 0.02;
    let geom = RingGeometry::new(1.0, a, 0.4).unwrap();
    let s = spectra();
    let atom = Atom::new(geom.atom_position(), s.atom.clone());
    let body = BodyRegion::new(
        Shape::torus(Point::zeros(), 1.0, a).unwrap(),
        s.medium.clone(),
    );
    let mc = MCSpec::default().with_samples(400_000);
    for regime in [Regime::Full, Regime::Retarded, Regime::Nonretarded] {
        let general = delta1_u_regime(&atom, &body, &quad, &mc, regime).unwrap();
        let ring = ring_delta1(&geom, &s, &quad, regime).unwrap().value;
        let tol = 3.0 * general.std_err + 10.0 * a * a * ring.abs();
        assert!(
            (general.value - ring).abs() < tol,
            "{regime:?}: {} vs {ring}",
            general.value
        );
    }
}

#[test]
fn two_point_matches_general_pair_sampler() {
    let quad = QuadratureSpec::default();
    let a = 0.05;
    let geom = RingGeometry::new(1.0, a, 0.0).unwrap();
    let s = spectra();
    let atom = Atom::new(Point::zeros(), s.atom.clone());
    let body = BodyRegion::new(
        Shape::torus(Point::zeros(), 1.0, a).unwrap(),
        s.medium.clone(),
    );
    for regime in [Regime::Retarded, Regime::Nonretarded] {
        let general = delta2_two_point(
            &atom,
            &body,
            &quad,
            &MCSpec::default().with_samples(2_000_000),
            regime,
        )
        .unwrap();
        let ring = ring_delta2_two_mc(
            &geom,
            &s,
            regime,
            &MCSpec::default().with_samples(1_000_000),
            &quad,
        )
        .unwrap();
        let sigma = general.std_err.hypot(ring.std_err);
        assert!(
            (general.value - ring.value).abs() < 4.0 * sigma,
            "{regime:?}: {general:?} vs {ring:?}"
        );
    }
}

#[test]
fn totals_follow_power_laws() {
    let quad = QuadratureSpec::default();
    let band = LambdaBand::default();
    for (regime, power) in [(Regime::Retarded, -7.0), (Regime::Nonretarded, -6.0)] {
        let near = RingGeometry::new(1.0, 0.02, 0.0).unwrap();
        let far = RingGeometry::new(2.0, 0.04, 0.0).unwrap();
        let v = |g: &RingGeometry| {
            let q = ring_total_quadratic(g, &spectra(), regime, &band, &quad).unwrap();
            q.total.mid / g.volume()
        };
        let slope = (v(&far) / v(&near)).ln() / 2f64.ln();
        assert!((slope - power).abs() < 1e-3, "{regime:?}: {slope}");
    }
}

#[test]
fn vanishing_susceptibility_gives_unit_bracket() {
    let quad = QuadratureSpec::default();
    let s = Spectra::new(
        PolarizabilityModel::single_line(1.0, 1.0).unwrap(),
        SusceptibilityModel::dilute(0.0, PolarizabilityModel::single_line(1.0, 1.0).unwrap())
            .unwrap(),
    );
    let geom = RingGeometry::new(1.0, 0.02, 0.0).unwrap();
    let q =
        ring_total_quadratic(&geom, &s, Regime::Retarded, &LambdaBand::default(), &quad).unwrap();
    assert_eq!(q.bracket.mid, 1.0);
    assert_eq!(q.bracket.half_width, 0.0);
    assert_eq!(
        ring_delta2_single(&geom, &s, &quad, Regime::Full)
            .unwrap()
            .value,
        0.0
    );
}
