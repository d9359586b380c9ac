//! Dispatch from a validated configuration to the library computations.

use casimir_born::born::{
    cp_force, potential, regime_check, Atom, BodyRegion, Regime, VacuumBackground,
};
use casimir_born::geometry::{Shape, VoxelGrid};
use casimir_born::quad::Estimate;
use casimir_born::ring::{
    band_function, bracket_coefficient_band, bracket_coefficient_from_two_point,
    ring_delta2_two_mc, ring_delta2_two_thin_limit, ring_total_quadratic,
    thin_ring_bracket_coefficient, two_point_coefficient, two_point_coefficient_band, Band,
    LambdaBand, RingGeometry, THIN_RING_WARNING,
};
use casimir_born::strata::{
    figure_data, h0_near_field_term, halfspace_coefficients, oscillating_asymptotic,
    strata_potential, Figure, Profile,
};
use casimir_born::vdw::{u_ab, u_abc, u_many, AtomCluster};
use casimir_born::Point;
use serde_json::{json, Map, Value};

use crate::config::{FigureName, ProfileKind, ScenarioConfig, ScenarioKind, ShapeKind};
use crate::error::{is_numerical, CliError};
use crate::identities::identity_suite;
use crate::units::{Dim, Units};

/// A table destined for a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

/// Results of one scenario before serialization.
#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub results: Map<String, Value>,
    pub tables: Vec<CsvTable>,
    pub flags: Vec<String>,
    /// Set when an identity or an optional computation failed numerically.
    pub failed: bool,
}

struct Writer<'a> {
    out: &'a mut Outcome,
    units: Units,
}

impl Writer<'_> {
    fn estimate(&mut self, key: &str, e: &Estimate, dim: Dim) {
        let q = self.units.quantity(e.value, e.std_err, dim);
        self.out.results.insert(key.into(), json!(q));
    }

    fn exact(&mut self, key: &str, v: f64, dim: Dim) {
        self.estimate(key, &Estimate::exact(v), dim);
    }

    fn band(&mut self, key: &str, b: &Band, dim: Dim) {
        let q = self.units.band(b.mid, b.half_width, dim);
        self.out.results.insert(key.into(), json!(q));
    }

    fn raw(&mut self, key: &str, v: Value) {
        self.out.results.insert(key.into(), v);
    }

    fn flag(&mut self, f: impl Into<String>) {
        self.out.flags.push(f.into());
    }
}

fn estimate_json(units: &Units, e: &Estimate, dim: Dim) -> Value {
    json!(units.quantity(e.value, e.std_err, dim))
}

fn point(p: [f64; 3]) -> Point {
    Point::new(p[0], p[1], p[2])
}

/// Runs the configured scenario.
pub fn execute(cfg: &ScenarioConfig) -> Result<Outcome, CliError> {
    let units = Units::new(cfg.units, cfg.length_unit_m);
    let mut out = Outcome::default();
    let mut w = Writer {
        out: &mut out,
        units,
    };
    match cfg.scenario {
        ScenarioKind::Ring => ring(cfg, &mut w)?,
        ScenarioKind::Halfspace => halfspace(cfg, &mut w)?,
        ScenarioKind::Body => body(cfg, &mut w)?,
        ScenarioKind::VdwCluster => cluster(cfg, &mut w)?,
        ScenarioKind::IdentitySuite => identities(&mut w)?,
    }
    Ok(out)
}

fn ring(cfg: &ScenarioConfig, w: &mut Writer) -> Result<(), CliError> {
    let r = cfg.ring.as_ref().expect("validated");
    let geom = RingGeometry::new(r.r0, r.a, r.z_a)?;
    if r.a / r.r0 > THIN_RING_WARNING {
        w.flag(format!(
            "thick_ring: a/r0 = {} exceeds {THIN_RING_WARNING}",
            r.a / r.r0
        ));
    }
    let spectra = cfg.spectra_pair(&r.atom, &r.medium, "ring")?;
    let regime = Regime::from(r.regime);
    let band = LambdaBand::new(r.lambda_band[0], r.lambda_band[1])?;
    let quad = cfg.quad.spec();

    let q = ring_total_quadratic(&geom, &spectra, regime, &band, &quad)?;
    w.estimate("delta1", &q.delta1, Dim::Energy);
    w.estimate("delta2_single", &q.delta2_single, Dim::Energy);
    w.band("delta2_two", &q.delta2_two, Dim::Energy);
    w.band("total", &q.total, Dim::Energy);
    w.band("bracket", &q.bracket, Dim::Dimensionless);
    w.band(
        "bracket_coefficient",
        &q.bracket_coefficient,
        Dim::Dimensionless,
    );
    w.band(
        "two_point_coefficient",
        &two_point_coefficient_band(regime, &band)?,
        Dim::Dimensionless,
    );

    let thin = ring_delta2_two_thin_limit(&geom, &spectra, regime, &quad)?;
    w.estimate("thin_ring_delta2_two", &thin, Dim::Energy);
    w.exact(
        "thin_ring_two_point_coefficient",
        two_point_coefficient(&geom, &spectra, regime, thin.value, &quad)?,
        Dim::Dimensionless,
    );
    w.exact(
        "thin_ring_bracket_coefficient",
        thin_ring_bracket_coefficient(regime)?,
        Dim::Dimensionless,
    );

    if r.monte_carlo {
        match ring_delta2_two_mc(&geom, &spectra, regime, &cfg.mc_spec(), &quad) {
            Ok(mc) => {
                let c = two_point_coefficient(&geom, &spectra, regime, mc.value, &quad)?;
                let c_err =
                    two_point_coefficient(&geom, &spectra, regime, mc.std_err, &quad)?.abs();
                let k = bracket_coefficient_from_two_point(regime, c)?;
                let k_err = (bracket_coefficient_from_two_point(regime, c + c_err)? - k).abs();
                w.estimate("mc_delta2_two", &mc, Dim::Energy);
                w.estimate(
                    "mc_two_point_coefficient",
                    &Estimate::new(c, c_err, mc.evals),
                    Dim::Dimensionless,
                );
                w.estimate(
                    "mc_bracket_coefficient",
                    &Estimate::new(k, k_err, mc.evals),
                    Dim::Dimensionless,
                );
            }
            Err(e) if is_numerical(&e) => {
                w.flag(format!("mc_failed: {e}"));
                w.out.failed = true;
            }
            Err(e) => return Err(e.into()),
        }
    }

    let n = 21;
    let rows = (0..n)
        .map(|i| {
            let lambda = band.lo + (band.hi - band.lo) * i as f64 / (n - 1) as f64;
            let point = LambdaBand {
                lo: lambda,
                hi: lambda,
            };
            Ok(vec![
                lambda,
                band_function(lambda),
                two_point_coefficient_band(regime, &point)?.mid,
                bracket_coefficient_band(regime, &point)?.mid,
            ])
        })
        .collect::<Result<Vec<_>, casimir_born::Error>>()?;
    w.out.tables.push(CsvTable {
        name: "ring_lambda_scan".into(),
        header: [
            "lambda",
            "f",
            "two_point_coefficient",
            "bracket_coefficient",
        ]
        .map(String::from)
        .to_vec(),
        rows,
    });
    Ok(())
}

fn halfspace(cfg: &ScenarioConfig, w: &mut Writer) -> Result<(), CliError> {
    let h = cfg.halfspace.as_ref().expect("validated");
    let spectra = cfg.spectra_pair(&h.atom, &h.medium, "halfspace")?;
    let quad = cfg.quad.spec();
    let units = w.units;

    if let Some(name) = h.figure {
        let (figure, label) = match name {
            FigureName::Retarded => (Figure::Retarded, "retarded"),
            FigureName::Nonretarded => (Figure::Nonretarded, "nonretarded"),
        };
        let ratios = h.ratios.clone().unwrap_or_else(|| figure.default_ratios());
        let table = figure_data(figure, &spectra, &ratios, &h.heights, &quad)?;
        let k = units.factor(Dim::Energy);
        let rows: Vec<Vec<f64>> = table
            .z
            .iter()
            .zip(&table.values)
            .map(|(z, vals)| {
                std::iter::once(z * units.factor(Dim::Length))
                    .chain(vals.iter().map(|v| v * k))
                    .collect()
            })
            .collect();
        let header = table.header();
        w.raw(
            "figure",
            json!({
                "regime": label,
                "columns": header,
                "rows": rows,
                "unit": units.unit(Dim::Energy),
            }),
        );
        w.out.tables.push(CsvTable {
            name: format!("distance_law_{label}"),
            header,
            rows,
        });
        return Ok(());
    }

    let profile = match h.profile {
        ProfileKind::Homogeneous => Profile::Homogeneous,
        ProfileKind::Oscillating => Profile::oscillating(h.kz)?,
        ProfileKind::Tabulated => Profile::tabulated(h.z_table.clone(), h.p_table.clone())?,
    };
    let regime = Regime::from(h.regime);
    let c = halfspace_coefficients(&spectra, &quad)?;
    w.raw(
        "coefficients",
        json!({
            "c4": c.c4, "c3": c.c3,
            "delta1_c4": c.delta1_c4, "delta2_c4": c.delta2_c4,
            "delta1_c3": c.delta1_c3, "delta2_c3": c.delta2_c3,
            "unit": "reduced",
        }),
    );

    let mut points = Vec::with_capacity(h.heights.len());
    let mut rows = Vec::with_capacity(h.heights.len());
    for &z in &h.heights {
        let b = strata_potential(z, &profile, &spectra, &quad)?;
        let mut entry = json!({
            "zA": units.quantity(z, 0.0, Dim::Length),
            "delta1": estimate_json(&units, &b.delta1, Dim::Energy),
            "delta2_single": estimate_json(&units, &b.delta2_single, Dim::Energy),
            "delta2_two": estimate_json(&units, &b.delta2_two, Dim::Energy),
            "total": estimate_json(&units, &b.total, Dim::Energy),
        });
        let mut row = vec![
            z,
            b.delta1.value,
            b.delta2_single.value,
            b.delta2_two.value,
            b.total.value,
        ];
        let kz = match profile {
            Profile::Homogeneous => Some(0.0),
            Profile::Oscillating { kz } => Some(kz),
            Profile::Tabulated(_) => None,
        };
        if let (Some(kz), Regime::Retarded | Regime::Nonretarded) = (kz, regime) {
            let a = oscillating_asymptotic(z, kz, &spectra, regime, &quad)?;
            entry["asymptotic"] = estimate_json(&units, &a, Dim::Energy);
            row.push(a.value);
            if regime == Regime::Nonretarded && kz > 0.0 {
                entry["h0_term"] = estimate_json(
                    &units,
                    &h0_near_field_term(z, kz, &spectra, &quad)?,
                    Dim::Energy,
                );
            }
        }
        points.push(entry);
        rows.push(row);
    }
    w.raw("heights", Value::Array(points));

    let mut header: Vec<String> = ["zA", "delta1", "delta2_single", "delta2_two", "total"]
        .map(String::from)
        .to_vec();
    if rows.first().is_some_and(|r| r.len() > header.len()) {
        header.push("asymptotic".into());
    }
    w.out.tables.push(CsvTable {
        name: "halfspace".into(),
        header,
        rows,
    });
    Ok(())
}

fn body_shape(b: &crate::config::BodyConfig) -> Result<Shape, CliError> {
    let need =
        |key: &str| CliError::Config(format!("body.{key} is required for shape {:?}", b.shape));
    Ok(match b.shape {
        ShapeKind::Cube => Shape::cube(
            point(b.center.ok_or_else(|| need("center"))?),
            b.edge.ok_or_else(|| need("edge"))?,
        )?,
        ShapeKind::Cuboid => Shape::cuboid(
            point(b.min.ok_or_else(|| need("min"))?),
            point(b.max.ok_or_else(|| need("max"))?),
        )?,
        ShapeKind::Torus => Shape::torus(
            point(b.center.ok_or_else(|| need("center"))?),
            b.r0.ok_or_else(|| need("r0"))?,
            b.a.ok_or_else(|| need("a"))?,
        )?,
        ShapeKind::Voxels => {
            let cells = b.cells.as_ref().ok_or_else(|| need("cells"))?;
            let scales = b.scales.clone().unwrap_or_else(|| vec![1.0; cells.len()]);
            if scales.len() != cells.len() {
                return Err(CliError::Config(
                    "body.scales must match body.cells in length".into(),
                ));
            }
            let cells: Vec<([i64; 3], f64)> = cells.iter().copied().zip(scales).collect();
            Shape::VoxelGrid(VoxelGrid::from_indices(
                point(b.origin.unwrap_or([0.0; 3])),
                b.spacing.ok_or_else(|| need("spacing"))?,
                &cells,
            )?)
        }
    })
}

fn body(cfg: &ScenarioConfig, w: &mut Writer) -> Result<(), CliError> {
    let b = cfg.body.as_ref().expect("validated");
    let atom = Atom::new(point(b.atom_position), cfg.atom("body.atom", &b.atom)?);
    let region = BodyRegion::new(body_shape(b)?, cfg.medium("body.medium", &b.medium)?);
    let regime = Regime::from(b.regime);
    let (quad, mc) = (cfg.quad.spec(), cfg.mc_spec());

    let margins = regime_check(&atom, &region);
    margins.warn(regime);
    w.raw(
        "regime_margins",
        json!({ "retarded": margins.retarded(), "nonretarded": margins.nonretarded() }),
    );

    let p = potential(&atom, &region, &quad, &mc, regime)?;
    w.raw("regime", json!(p.regime.name()));
    w.estimate("delta1", &p.delta1, Dim::Energy);
    w.estimate("delta2_single", &p.delta2_single, Dim::Energy);
    w.estimate("delta2_two", &p.delta2_two, Dim::Energy);
    w.estimate("total", &p.total, Dim::Energy);

    if b.force {
        let f = cp_force(&atom, &region, &quad, &mc, regime)?;
        let units = w.units;
        let vec = |v: &[Estimate; 3]| {
            Value::Array(
                v.iter()
                    .map(|e| estimate_json(&units, e, Dim::Force))
                    .collect(),
            )
        };
        w.raw("force_order1", vec(&f.order1));
        w.raw("force", vec(&f.total));
    }
    Ok(())
}

fn cluster(cfg: &ScenarioConfig, w: &mut Writer) -> Result<(), CliError> {
    let c = cfg.vdw_cluster.as_ref().expect("validated");
    let positions: Vec<Point> = c.positions.iter().copied().map(point).collect();
    let names: Vec<&String> = if c.atoms.len() == 1 {
        vec![&c.atoms[0]; positions.len()]
    } else {
        c.atoms.iter().collect()
    };
    let alphas = names
        .iter()
        .map(|n| cfg.atom("vdw_cluster.atoms", n))
        .collect::<Result<Vec<_>, _>>()?;
    let quad = cfg.quad.spec();
    let cl = AtomCluster::new(positions.clone(), alphas.clone())?;
    let total = u_many(&cl, &VacuumBackground, &quad)?;
    w.exact("u_many", total, Dim::Energy);

    let n = positions.len();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let v = u_ab(&positions[i], &positions[j], &alphas[i], &alphas[j], &quad)?;
            pairs.push(json!({ "atoms": [i, j], "u": w.units.quantity(v, 0.0, Dim::Energy) }));
        }
    }
    w.raw("pairs", Value::Array(pairs));
    let mut triples = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in j + 1..n {
                let v = u_abc(
                    [&positions[i], &positions[j], &positions[k]],
                    [&alphas[i], &alphas[j], &alphas[k]],
                    &quad,
                )?;
                triples.push(
                    json!({ "atoms": [i, j, k], "u": w.units.quantity(v, 0.0, Dim::Energy) }),
                );
            }
        }
    }
    w.raw("triples", Value::Array(triples));
    Ok(())
}

fn identities(w: &mut Writer) -> Result<(), CliError> {
    let report = identity_suite()?;
    for c in &report.checks {
        if !c.passed {
            w.flag(format!("identity_failed: {}", c.name));
        }
    }
    w.out.failed = !report.all_passed();
    w.raw("checks", json!(report.checks));
    Ok(())
}
