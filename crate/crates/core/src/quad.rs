//! Deterministic half-line quadrature and seeded, stratified Monte Carlo.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Region;
use crate::Point;

/// How the half line is covered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadScheme {
    /// Adaptive subdivision of fixed decade intervals plus a mapped tail.
    AdaptiveInterval,
    /// The substitution `u = t / (1 - t)` onto `(0, 1)`, then adaptive subdivision.
    #[default]
    HalfLineMapped,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_evals: usize,
    pub scheme: QuadScheme,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            abs_tol: 1e-14,
            max_evals: 1_000_000,
            scheme: QuadScheme::default(),
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidInput(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if self.max_evals < 100 {
            return Err(Error::InvalidInput("max_evals must be at least 100".into()));
        }
        Ok(())
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// A numerical result with its error estimate and evaluation count.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
    pub evals: usize,
}

impl Estimate {
    pub fn new(value: f64, std_err: f64, evals: usize) -> Self {
        Self {
            value,
            std_err,
            evals,
        }
    }

    pub fn exact(value: f64) -> Self {
        Self::new(value, 0.0, 0)
    }

    pub fn scale(self, k: f64) -> Self {
        Self::new(self.value * k, self.std_err * k.abs(), self.evals)
    }

    /// Sum with errors combined in quadrature.
    pub fn plus(self, other: Self) -> Self {
        Self::new(
            self.value + other.value,
            self.std_err.hypot(other.std_err),
            self.evals + other.evals,
        )
    }

    pub fn minus(self, other: Self) -> Self {
        self.plus(other.scale(-1.0))
    }

    pub fn sum(items: impl IntoIterator<Item = Self>) -> Self {
        items.into_iter().fold(Self::default(), Self::plus)
    }

    pub fn relative_error(&self) -> f64 {
        self.std_err / self.value.abs()
    }
}

// Gauss-Kronrod 7/15 abscissae and weights.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
enum Map {
    Identity,
    /// `u = offset + t / (1 - t)`.
    Tail(f64),
}

impl Map {
    fn apply<F: Fn(f64) -> f64>(&self, f: &F, t: f64) -> f64 {
        match *self {
            Map::Identity => f(t),
            Map::Tail(offset) => {
                let s = 1.0 - t;
                f(offset + t / s) / (s * s)
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    map: Map,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then(other.a.total_cmp(&self.a))
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, map: Map) -> Result<Segment> {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = map.apply(f, c);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let f1 = map.apply(f, c - h * x);
        let f2 = map.apply(f, c + h * x);
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * h;
    if !value.is_finite() {
        return Err(Error::InvalidInput(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }
    Ok(Segment {
        a,
        b,
        map,
        value,
        error: ((kronrod - gauss) * h).abs(),
    })
}

fn adaptive<F: Fn(f64) -> f64>(
    f: &F,
    initial: &[(f64, f64, Map)],
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    spec.validate()?;
    let mut heap = BinaryHeap::new();
    let mut done = Vec::new();
    let mut evals = 0usize;
    let mut total = 0.0;
    let mut total_err = 0.0;
    for &(a, b, map) in initial {
        let s = gauss_kronrod(f, a, b, map)?;
        evals += 15;
        total += s.value;
        total_err += s.error;
        heap.push(s);
    }
    loop {
        if total_err <= spec.abs_tol.max(spec.rel_tol * total.abs()) {
            break;
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if !(mid > worst.a && mid < worst.b) || (worst.b - worst.a) < 1e-15 * mid.abs() {
            done.push(worst);
            continue;
        }
        if evals + 30 > spec.max_evals {
            heap.push(worst);
            let estimate = finish(heap.into_vec(), done, evals);
            return Err(Error::ToleranceNotReached { estimate });
        }
        let left = gauss_kronrod(f, worst.a, mid, worst.map)?;
        let right = gauss_kronrod(f, mid, worst.b, worst.map)?;
        evals += 30;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    let estimate = finish(heap.into_vec(), done, evals);
    if estimate.std_err <= spec.abs_tol.max(spec.rel_tol * estimate.value.abs()) {
        Ok(estimate)
    } else {
        Err(Error::ToleranceNotReached { estimate })
    }
}

fn finish(mut segments: Vec<Segment>, done: Vec<Segment>, evals: usize) -> Estimate {
    segments.extend(done);
    segments.sort_by(|x, y| x.a.total_cmp(&y.a).then(x.b.total_cmp(&y.b)));
    let values: Vec<f64> = segments.iter().map(|s| s.value).collect();
    let errors: Vec<f64> = segments.iter().map(|s| s.error).collect();
    Estimate::new(pairwise_sum(&values), pairwise_sum(&errors), evals)
}

const DECADES: std::ops::RangeInclusive<i32> = -6..=6;

/// `int_0^inf f(u) du`.
pub fn integrate_halfline<F: Fn(f64) -> f64>(f: F, spec: &QuadratureSpec) -> Result<Estimate> {
    let mut initial = Vec::new();
    match spec.scheme {
        QuadScheme::HalfLineMapped => {
            let mut prev = 0.0;
            for k in DECADES {
                let u = 10f64.powi(k);
                let t = u / (1.0 + u);
                initial.push((prev, t, Map::Tail(0.0)));
                prev = t;
            }
            initial.push((prev, 1.0, Map::Tail(0.0)));
        }
        QuadScheme::AdaptiveInterval => {
            let mut prev = 0.0;
            for k in DECADES {
                let u = 10f64.powi(k);
                initial.push((prev, u, Map::Identity));
                prev = u;
            }
            initial.push((0.0, 1.0, Map::Tail(prev)));
        }
    }
    adaptive(&f, &initial, spec)
}

/// `int_a^b f(x) dx` over a finite interval.
pub fn integrate_interval<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::InvalidInput("finite interval expected".into()));
    }
    if a == b {
        return Ok(Estimate::exact(0.0));
    }
    let pieces = 8;
    let initial: Vec<_> = (0..pieces)
        .map(|i| {
            let x0 = a + (b - a) * i as f64 / pieces as f64;
            let x1 = a + (b - a) * (i + 1) as f64 / pieces as f64;
            (x0, x1, Map::Identity)
        })
        .collect();
    adaptive(&f, &initial, spec)
}

/// Best available value of a nested integral: a tolerance miss still
/// yields its estimate, which the outer error budget absorbs.
pub(crate) fn best_value(r: Result<Estimate>) -> Result<f64> {
    match r {
        Ok(e) => Ok(e.value),
        Err(Error::ToleranceNotReached { estimate }) => Ok(estimate.value),
        Err(e) => Err(e),
    }
}

/// Pairwise (tree) summation in a fixed order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1 => values[0],
        n if n <= 8 => values.iter().sum(),
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MCSpec {
    pub seed: u64,
    pub samples: usize,
    pub strata: usize,
    /// Exclusion radius for coincident pairs, as a fraction of the body diameter.
    pub coincidence_delta: f64,
    pub richardson_levels: usize,
}

impl Default for MCSpec {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 100_000,
            strata: 64,
            coincidence_delta: 1e-3,
            richardson_levels: 3,
        }
    }
}

impl MCSpec {
    pub fn validate(&self) -> Result<()> {
        if self.samples < 1000 {
            return Err(Error::InvalidInput(
                "MC samples must be at least 1000".into(),
            ));
        }
        if self.strata == 0 || self.samples < 2 * self.strata {
            return Err(Error::InvalidInput(
                "MC needs at least one stratum and two samples per stratum".into(),
            ));
        }
        if self.richardson_levels == 0 {
            return Err(Error::InvalidInput(
                "richardson_levels must be at least 1".into(),
            ));
        }
        if !(self.coincidence_delta > 0.0 && self.coincidence_delta < 1.0) {
            return Err(Error::InvalidInput(
                "coincidence_delta must lie in (0, 1)".into(),
            ));
        }
        Ok(())
    }

    pub fn with_samples(mut self, samples: usize) -> Self {
        self.samples = samples;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }
}

struct StratumStats {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

/// Stratified Monte Carlo over the unit hypercube of dimension `dim`.
///
/// `f` receives the uniforms and writes `width` outputs per sample. The first
/// coordinate is stratified into `spec.strata` equal slabs; each stratum owns
/// a ChaCha stream keyed by its index, so results do not depend on how strata
/// are scheduled across threads.
pub fn stratified_mc<F>(spec: &MCSpec, dim: usize, width: usize, f: F) -> Result<Vec<Estimate>>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    spec.validate()?;
    if dim == 0 || width == 0 {
        return Err(Error::InvalidInput(
            "MC dimension and width must be positive".into(),
        ));
    }
    let s = spec.strata;
    let stats: Vec<StratumStats> = (0..s)
        .into_par_iter()
        .map(|k| {
            let n = spec.samples / s + usize::from(k < spec.samples % s);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            rng.set_stream(k as u64);
            let mut u = vec![0.0; dim];
            let mut out = vec![0.0; width];
            let mut mean = vec![0.0; width];
            let mut m2 = vec![0.0; width];
            for i in 0..n {
                u[0] = (k as f64 + rng.random::<f64>()) / s as f64;
                for x in u.iter_mut().skip(1) {
                    *x = rng.random::<f64>();
                }
                out.iter_mut().for_each(|o| *o = 0.0);
                f(&u, &mut out);
                let count = (i + 1) as f64;
                for j in 0..width {
                    let d = out[j] - mean[j];
                    mean[j] += d / count;
                    m2[j] += d * (out[j] - mean[j]);
                }
            }
            StratumStats { n, mean, m2 }
        })
        .collect();

    let sf = s as f64;
    let mut result = Vec::with_capacity(width);
    for j in 0..width {
        let means: Vec<f64> = stats.iter().map(|st| st.mean[j] / sf).collect();
        let vars: Vec<f64> = stats
            .iter()
            .map(|st| st.m2[j] / ((st.n - 1) as f64 * st.n as f64 * sf * sf))
            .collect();
        let value = pairwise_sum(&means);
        let var = pairwise_sum(&vars);
        if !(value.is_finite() && var.is_finite()) {
            return Err(Error::InvalidInput(
                "Monte Carlo integrand is not finite".into(),
            ));
        }
        result.push(Estimate::new(value, var.sqrt(), spec.samples));
    }
    Ok(result)
}

/// `int_region f(s) d^3s` by importance sampling with the region's sampler.
pub fn integrate_region_mc<R, F>(f: F, region: &R, spec: &MCSpec) -> Result<Estimate>
where
    R: Region + ?Sized,
    F: Fn(&Point) -> f64 + Sync,
{
    integrate_region_mc_vec(|p, out| out[0] = f(p), 1, region, spec).map(|v| v[0])
}

/// Vector-valued variant of [`integrate_region_mc`].
pub fn integrate_region_mc_vec<R, F>(
    f: F,
    width: usize,
    region: &R,
    spec: &MCSpec,
) -> Result<Vec<Estimate>>
where
    R: Region + ?Sized,
    F: Fn(&Point, &mut [f64]) + Sync,
{
    stratified_mc(spec, 4, width, |u, out| {
        let (p, pdf) = region.sample(u);
        if pdf > 0.0 {
            f(&p, out);
            out.iter_mut().for_each(|o| *o /= pdf);
        }
    })
}

/// One weighted pair sample: `weight = f(s1, s2) / pdf(s1, s2)` and the
/// separation `|s1 - s2|` used for the coincidence exclusion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub weight: f64,
    pub separation: f64,
}

impl PairSample {
    pub const ZERO: Self = Self {
        weight: 0.0,
        separation: f64::INFINITY,
    };
}

/// Radii `delta0 / 2^l` for `l < spec.richardson_levels`.
pub fn richardson_deltas(spec: &MCSpec, delta0: f64) -> Vec<f64> {
    (0..spec.richardson_levels)
        .map(|l| delta0 / 2f64.powi(l as i32))
        .collect()
}

/// Weights that extrapolate values at the given radii to zero radius with
/// the interpolating polynomial.
pub fn richardson_weights(deltas: &[f64]) -> Vec<f64> {
    (0..deltas.len())
        .map(|l| {
            deltas
                .iter()
                .enumerate()
                .filter(|&(m, _)| m != l)
                .map(|(_, &dm)| dm / (dm - deltas[l]))
                .product()
        })
        .collect()
}

/// Pair integral with coincidence exclusion and Richardson extrapolation.
///
/// Every sample is scored at all exclusion radii at once, so the levels share
/// their samples. The reported error combines the statistical error of the
/// extrapolant with the gap to the extrapolant of one fewer level. The sampler
/// must return [`PairSample::ZERO`] for separations below the smallest radius.
pub fn richardson_pair_mc<S>(spec: &MCSpec, delta0: f64, dim: usize, sample: S) -> Result<Estimate>
where
    S: Fn(&[f64]) -> PairSample + Sync,
{
    let deltas = richardson_deltas(spec, delta0);
    let levels = deltas.len();
    let full = richardson_weights(&deltas);
    let reduced = if levels > 1 {
        richardson_weights(&deltas[..levels - 1])
    } else {
        Vec::new()
    };
    let est = stratified_mc(spec, dim, 3, |u, out| {
        let s = sample(u);
        if s.weight == 0.0 {
            return;
        }
        let mut hi = 0.0;
        let mut lo = 0.0;
        for (l, &d) in deltas.iter().enumerate() {
            if s.separation >= d {
                hi += full[l] * s.weight;
                if l + 1 < levels {
                    lo += reduced[l] * s.weight;
                }
            }
        }
        out[0] = hi;
        out[1] = lo;
        out[2] = hi - lo;
    })?;
    if levels == 1 {
        return Ok(est[0]);
    }
    let (value, gap) = (est[0], est[2]);
    let sigma = gap.std_err.hypot(value.std_err);
    if gap.value.abs() > 5.0 * sigma {
        return Err(Error::NonConvergentExtrapolation {
            difference: gap.value,
            sigmas: gap.value.abs() / sigma,
        });
    }
    Ok(Estimate::new(
        value.value,
        value.std_err.hypot(gap.value),
        value.evals,
    ))
}

/// `int_region int_region f(s1, s2) d^3s1 d^3s2`, excluding `|s1 - s2| < delta`
/// and extrapolating `delta -> 0`.
///
/// `s2` is drawn from an equal mixture of the region sampler and a ball
/// around `s1` with log-uniform radius, which keeps `|s1 - s2|^-3` kernels at
/// bounded variance.
pub fn integrate_pair_mc<R, F>(f: F, region: &R, spec: &MCSpec) -> Result<Estimate>
where
    R: Region + ?Sized,
    F: Fn(&Point, &Point) -> f64 + Sync,
{
    spec.validate()?;
    let diameter = region.diameter();
    let delta0 = spec.coincidence_delta * diameter;
    let deltas = richardson_deltas(spec, delta0);
    let delta_min = *deltas.last().unwrap();
    let ball = LogBall::new(delta_min, diameter);
    richardson_pair_mc(spec, delta0, 9, |u| {
        let (s1, p1) = region.sample(&u[0..4]);
        if p1 <= 0.0 {
            return PairSample::ZERO;
        }
        let s2 = if u[4] < 0.5 {
            region.sample(&u[5..9]).0
        } else {
            s1 + ball.sample(&u[5..8])
        };
        let beta = (s1 - s2).norm();
        if beta < delta_min || !region.contains(&s2) {
            return PairSample::ZERO;
        }
        let p2 = 0.5 * region.pdf(&s2) + 0.5 * ball.pdf(beta);
        PairSample {
            weight: f(&s1, &s2) / (p1 * p2),
            separation: beta,
        }
    })
}

/// Isotropic offsets with log-uniform radius in `[r_min, r_max]`.
#[derive(Debug, Clone, Copy)]
pub struct LogBall {
    r_min: f64,
    r_max: f64,
    log_ratio: f64,
}

impl LogBall {
    pub fn new(r_min: f64, r_max: f64) -> Self {
        Self {
            r_min,
            r_max,
            log_ratio: (r_max / r_min).ln(),
        }
    }

    pub fn sample(&self, u: &[f64]) -> Point {
        let r = self.r_min * (self.log_ratio * u[0]).exp();
        r * unit_vector(u[1], u[2])
    }

    pub fn pdf(&self, r: f64) -> f64 {
        if r >= self.r_min && r <= self.r_max {
            1.0 / (4.0 * PI * r.powi(3) * self.log_ratio)
        } else {
            0.0
        }
    }
}

/// Uniformly distributed direction from two uniforms.
pub fn unit_vector(u1: f64, u2: f64) -> Point {
    let cos_t = 1.0 - 2.0 * u1;
    let sin_t = (1.0 - cos_t * cos_t).max(0.0).sqrt();
    let phi = 2.0 * PI * u2;
    Point::new(sin_t * phi.cos(), sin_t * phi.sin(), cos_t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Shape;
    use crate::kernels::g2;
    use approx::assert_relative_eq;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    #[test]
    fn halfline_known_integrals() {
        let spec = QuadratureSpec::default();
        let e = integrate_halfline(g2, &spec).unwrap();
        assert!((e.value - 11.5).abs() < 1e-10 * 11.5);
        let e = integrate_halfline(|u: f64| (-u).exp(), &spec).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        let e = integrate_halfline(|u: f64| u.powi(3) * (-2.0 * u).exp(), &spec).unwrap();
        assert_relative_eq!(e.value, 6.0 / 16.0, max_relative = 1e-10);
    }

    #[test]
    fn moments_of_exponential() {
        for scheme in [QuadScheme::HalfLineMapped, QuadScheme::AdaptiveInterval] {
            let spec = QuadratureSpec {
                scheme,
                ..Default::default()
            };
            for j in 0..=6 {
                for s1 in [0.5, 1.0, 2.0] {
                    let e =
                        integrate_halfline(|u: f64| u.powi(j) * (-u * s1).exp(), &spec).unwrap();
                    let exact = factorial(j as u32) / s1.powi(j + 1);
                    assert!(
                        (e.value / exact - 1.0).abs() < 1e-10,
                        "j={j} s1={s1} {scheme:?}"
                    );
                }
            }
        }
    }

    #[test]
    fn algebraic_decay() {
        let spec = QuadratureSpec::default();
        let e = integrate_halfline(|u: f64| 1.0 / (1.0 + u * u), &spec).unwrap();
        assert_relative_eq!(e.value, PI / 2.0, max_relative = 1e-9);
        let e = integrate_halfline(|u: f64| 1.0 / (1e-4 + u * u), &spec).unwrap();
        assert_relative_eq!(e.value, PI / 2.0 / 1e-2, max_relative = 1e-9);
    }

    #[test]
    fn tolerance_failure_returns_estimate() {
        let spec = QuadratureSpec {
            rel_tol: 1e-15,
            abs_tol: 1e-300,
            max_evals: 200,
            ..Default::default()
        };
        match integrate_halfline(|u: f64| (u.sin() / (1.0 + u)).abs(), &spec) {
            Err(Error::ToleranceNotReached { estimate }) => assert!(estimate.value > 0.0),
            other => panic!("expected tolerance failure, got {other:?}"),
        }
    }

    #[test]
    fn finite_interval() {
        let spec = QuadratureSpec::default();
        let e = integrate_interval(|x: f64| x.cos(), 0.0, PI / 2.0, &spec).unwrap();
        assert_relative_eq!(e.value, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn richardson_weights_cancel_powers() {
        let deltas = [0.4, 0.2, 0.1];
        let w = richardson_weights(&deltas);
        assert_relative_eq!(w.iter().sum::<f64>(), 1.0, max_relative = 1e-14);
        for p in 1..3 {
            let s: f64 = w.iter().zip(&deltas).map(|(w, d)| w * d.powi(p)).sum();
            assert!(s.abs() < 1e-14);
        }
    }

    #[test]
    fn pairwise_sum_matches_naive() {
        let v: Vec<f64> = (0..1000).map(|i| i as f64 * 0.5).collect();
        assert_eq!(pairwise_sum(&v), v.iter().sum::<f64>());
    }

    #[test]
    fn mc_volume_of_unit_cube() {
        let cube = Shape::cuboid(Point::zeros(), Point::new(1.0, 1.0, 1.0)).unwrap();
        let spec = MCSpec::default().with_samples(10_000);
        let e = integrate_region_mc(|_| 1.0, &cube, &spec).unwrap();
        assert!((e.value - 1.0).abs() <= 3.0 * e.std_err + 1e-12);
    }

    #[test]
    fn mc_is_deterministic_across_thread_counts() {
        let cube = Shape::cuboid(Point::zeros(), Point::new(1.0, 2.0, 0.5)).unwrap();
        let spec = MCSpec::default().with_samples(20_000).with_seed(99);
        let run = |threads: usize| {
            rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .unwrap()
                .install(|| integrate_region_mc(|p| p.x * p.y.exp(), &cube, &spec).unwrap())
        };
        let a = run(1);
        let b = run(4);
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.std_err.to_bits(), b.std_err.to_bits());
    }

    #[test]
    fn mc_error_scales_as_inverse_sqrt() {
        let cube = Shape::cuboid(Point::zeros(), Point::new(1.0, 1.0, 1.0)).unwrap();
        let f = |p: &Point| (3.0 * p.x).sin() + p.y * p.z;
        let small = MCSpec::default().with_samples(4_000);
        let large = MCSpec::default().with_samples(64_000);
        let e1 = integrate_region_mc(f, &cube, &small).unwrap();
        let e2 = integrate_region_mc(f, &cube, &large).unwrap();
        let slope = (e2.std_err / e1.std_err).ln() / 16f64.ln();
        assert!((slope + 0.5).abs() < 0.1, "slope {slope}");
    }

    #[test]
    fn pair_mc_constant_gives_volume_squared() {
        let cube = Shape::cuboid(Point::zeros(), Point::new(1.0, 1.0, 1.0)).unwrap();
        let spec = MCSpec::default().with_samples(20_000);
        let e = integrate_pair_mc(|_, _| 1.0, &cube, &spec).unwrap();
        assert!((e.value - 1.0).abs() <= 3.0 * e.std_err, "{e:?}");
    }

    #[test]
    fn angular_cancellation_of_the_nonretarded_kernel() {
        // fixed short edge beta, atom far away: average over beta_hat of
        // [1 - 3 (a.b)(b.c)(c.a)] / beta^3 vanishes
        let r_a = Point::new(0.0, 0.0, 5.0);
        let s1 = Point::zeros();
        let beta_len = 1e-3;
        let spec = MCSpec::default().with_samples(20_000);
        let est = stratified_mc(&spec, 2, 1, |u, out| {
            let s2 = s1 - beta_len * unit_vector(u[0], u[1]);
            let tri = crate::kernels::TriangleGeometry::from_points(&r_a, &s1, &s2).unwrap();
            out[0] = crate::kernels::g3_static(&tri) / 3.0 / beta_len.powi(3);
        })
        .unwrap();
        let scale = 1.0 / beta_len.powi(3);
        assert!(
            est[0].value.abs() <= 3.0 * est[0].std_err + 1e-9 * scale,
            "{:?}",
            est[0]
        );
    }

    #[test]
    fn unit_vectors_are_normalized() {
        for i in 0..50 {
            let v = unit_vector(i as f64 / 50.0, (i * 7 % 50) as f64 / 50.0);
            assert!((v.norm() - 1.0).abs() < 1e-14);
        }
    }
}
