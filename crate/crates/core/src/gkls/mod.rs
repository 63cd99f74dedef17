//! GKLS-style classes of continuously differentiable multiextremal test
//! functions with known minima.
//!
//! A function is the paraboloid `g(x) = |x - T|^2 + t` with `m - 1` balls cut
//! into it. Inside ball `i` (centre `M_i`, radius `rho_i`) the paraboloid is
//! replaced by a cubic in the distance `r = |x - M_i|` that equals `f_i` at
//! the centre, has zero gradient there, and matches the paraboloid's value
//! and gradient on the sphere. Minimum 0 is the paraboloid vertex itself and
//! minimum 1 is the global one, at distance `r_dist` from the vertex.
//!
//! Functions are drawn from `ChaCha8Rng` seeded with `class_seed ^ index`
//! (index 1..=100), so a class is reproducible on any platform.

mod manifest;

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use manifest::{read_manifest, write_manifest, GklsClass};

use crate::error::{input, Error, Result};
use crate::problem::{euclidean, BoxDomain};

/// Functions per class.
pub const CLASS_SIZE: usize = 100;
/// Value of the paraboloid at its vertex.
pub const PARABOLOID_MIN: f64 = 0.0;
/// Distance below which two minima count as coincident.
const PRECISION: f64 = 1e-10;
/// Smallest gap between a local minimum value and `f*`.
const VALUE_MARGIN: f64 = 1e-6;
/// Shrink factor keeping local balls strictly apart.
const RADIUS_WEIGHT: f64 = 0.99;
const MAX_ATTEMPTS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Preset {
    Simple,
    Hard,
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Preset::Simple => "simple",
            Preset::Hard => "hard",
        })
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "simple" => Ok(Preset::Simple),
            "hard" => Ok(Preset::Hard),
            other => input(format!("unknown preset `{other}` (expected simple or hard)")),
        }
    }
}

/// Accuracy coefficient used with the presets of dimension `n`.
pub fn preset_delta(n: usize) -> Option<f64> {
    match n {
        2 => Some(1e-4),
        3 | 4 => Some(1e-6),
        5 => Some(1e-7),
        _ => None,
    }
}

/// Parameters shared by every function of a class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GklsClassSpec {
    pub dim: usize,
    /// Number of minima, counting the paraboloid vertex and the global one.
    pub minima: usize,
    pub global_value: f64,
    /// Radius of the global minimizer's ball.
    pub global_radius: f64,
    /// Distance from the paraboloid vertex to the global minimizer.
    pub global_dist: f64,
    pub domain: BoxDomain,
    pub seed: u64,
    /// Name recorded in manifests, e.g. `simple`.
    pub name: String,
}

impl GklsClassSpec {
    /// The standard classes: ten minima, `f* = -1` on `[-1, 1]^n`, `n` in 2..=5.
    pub fn preset(n: usize, preset: Preset, seed: u64) -> Result<Self> {
        let (global_dist, global_radius) = match (n, preset) {
            (2, Preset::Simple) => (0.90, 0.20),
            (2, Preset::Hard) => (0.90, 0.10),
            (3 | 4, Preset::Simple) => (0.66, 0.20),
            (3 | 4, Preset::Hard) => (0.90, 0.20),
            (5, Preset::Simple) => (0.66, 0.30),
            (5, Preset::Hard) => (0.66, 0.20),
            _ => return input(format!("no preset for dimension {n} (available: 2 to 5)")),
        };
        let spec = Self {
            dim: n,
            minima: 10,
            global_value: -1.0,
            global_radius,
            global_dist,
            domain: BoxDomain::cube(n, -1.0, 1.0)?,
            seed,
            name: preset.to_string(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_minima(mut self, m: usize) -> Result<Self> {
        self.minima = m;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim < 1 || self.domain.dim() != self.dim {
            return input("class dimension must match a domain of dimension >= 1");
        }
        if self.minima < 2 {
            return input("a class needs at least two minima (vertex and global)");
        }
        if !(self.global_value < PARABOLOID_MIN - PRECISION) {
            return input(format!(
                "global value {} must lie below the paraboloid minimum {PARABOLOID_MIN}",
                self.global_value
            ));
        }
        let min_side = (0..self.dim).map(|j| self.domain.width(j)).fold(f64::INFINITY, f64::min);
        if !(self.global_dist > PRECISION && self.global_dist < 0.5 * min_side - PRECISION) {
            return input(format!(
                "global distance {} must lie in (0, {})",
                self.global_dist,
                0.5 * min_side
            ));
        }
        if !(self.global_radius > PRECISION && self.global_radius < 0.5 * self.global_dist) {
            return input(format!(
                "global radius {} must lie in (0, global distance / 2)",
                self.global_radius
            ));
        }
        Ok(())
    }

    /// Seed of the `index`-th function (1-based).
    pub fn function_seed(&self, index: usize) -> u64 {
        self.seed ^ index as u64
    }
}

/// One recorded minimum: location, value and attraction radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Minimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub radius: f64,
}

/// A generated test function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GklsFunction {
    pub domain: BoxDomain,
    /// Entry 0 is the paraboloid vertex, entry 1 the global minimum.
    pub minima: Vec<Minimum>,
}

impl GklsFunction {
    /// Builds a function from a minima census, checking the construction's
    /// invariants.
    pub fn from_minima(domain: BoxDomain, minima: Vec<Minimum>) -> Result<Self> {
        if minima.len() < 2 {
            return Err(Error::Generation("need the vertex and the global minimum".into()));
        }
        let n = domain.dim();
        for (i, m) in minima.iter().enumerate() {
            if m.point.len() != n || !domain.contains(&m.point) {
                return Err(Error::Generation(format!("minimum {i} lies outside the domain")));
            }
            if !(m.radius > 0.0) || !m.value.is_finite() {
                return Err(Error::Generation(format!("minimum {i} has an invalid radius or value")));
            }
        }
        let f_star = minima[1].value;
        if minima.iter().enumerate().any(|(i, m)| i != 1 && m.value < f_star + VALUE_MARGIN) {
            return Err(Error::Generation("a local minimum is not above the global value".into()));
        }
        for i in 1..minima.len() {
            for j in i + 1..minima.len() {
                if euclidean(&minima[i].point, &minima[j].point) < minima[i].radius + minima[j].radius {
                    return Err(Error::Generation(format!("balls {i} and {j} overlap")));
                }
            }
            if euclidean(&minima[i].point, &minima[0].point) <= minima[i].radius {
                return Err(Error::Generation(format!("ball {i} contains the paraboloid vertex")));
            }
        }
        Ok(Self { domain, minima })
    }

    pub fn dim(&self) -> usize {
        self.domain.dim()
    }

    pub fn vertex(&self) -> &Minimum {
        &self.minima[0]
    }

    pub fn global(&self) -> &Minimum {
        &self.minima[1]
    }

    fn ball_of(&self, x: &[f64]) -> Option<usize> {
        (1..self.minima.len()).find(|&i| euclidean(x, &self.minima[i].point) <= self.minima[i].radius)
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if !self.domain.contains(x) {
            return Err(Error::Domain(format!("{x:?} lies outside the function's domain")));
        }
        Ok(())
    }

    /// Value at `x` without the domain check.
    pub fn value(&self, x: &[f64]) -> f64 {
        let t = self.vertex();
        let Some(i) = self.ball_of(x) else {
            let r = euclidean(x, &t.point);
            return r * r + t.value;
        };
        let mi = &self.minima[i];
        let r = euclidean(x, &mi.point);
        if r < PRECISION {
            return mi.value;
        }
        let rho = mi.radius;
        let (s, a) = self.ball_terms(i, x);
        let cubic = 2.0 * s / (r * rho * rho) - 2.0 * a / rho.powi(3);
        let quad = 1.0 - 4.0 * s / (r * rho) + 3.0 * a / (rho * rho);
        (cubic * r + quad) * r * r + mi.value
    }

    /// `<x - M_i, T - M_i>` and `|T - M_i|^2 + t - f_i`.
    fn ball_terms(&self, i: usize, x: &[f64]) -> (f64, f64) {
        let t = self.vertex();
        let mi = &self.minima[i];
        let s: f64 = x
            .iter()
            .zip(&mi.point)
            .zip(&t.point)
            .map(|((xj, mj), tj)| (xj - mj) * (tj - mj))
            .sum();
        let dt = euclidean(&t.point, &mi.point);
        (s, dt * dt + t.value - mi.value)
    }

    /// Analytic gradient at `x` without the domain check.
    pub fn gradient_unchecked(&self, x: &[f64]) -> Vec<f64> {
        let t = self.vertex();
        let Some(i) = self.ball_of(x) else {
            return x.iter().zip(&t.point).map(|(xj, tj)| 2.0 * (xj - tj)).collect();
        };
        let mi = &self.minima[i];
        let r = euclidean(x, &mi.point);
        if r < PRECISION {
            return vec![0.0; x.len()];
        }
        let rho = mi.radius;
        let (s, a) = self.ball_terms(i, x);
        // f = (2/rho^2) s r^2 - (2A/rho^3) r^3 + (1 + 3A/rho^2) r^2 - (4/rho) s r + f_i
        let coef_d = 4.0 * s / (rho * rho) - 6.0 * a * r / rho.powi(3) + 2.0 + 6.0 * a / (rho * rho)
            - 4.0 * s / (rho * r);
        let coef_w = 2.0 * r * r / (rho * rho) - 4.0 * r / rho;
        x.iter()
            .zip(&mi.point)
            .zip(&t.point)
            .map(|((xj, mj), tj)| coef_d * (xj - mj) + coef_w * (tj - mj))
            .collect()
    }
}

/// Value of `f` at `x`.
pub fn gkls_eval(f: &GklsFunction, x: &[f64]) -> Result<f64> {
    f.check(x)?;
    Ok(f.value(x))
}

pub fn gkls_gradient(f: &GklsFunction, x: &[f64]) -> Result<Vec<f64>> {
    f.check(x)?;
    Ok(f.gradient_unchecked(x))
}

/// The construction-time census: vertex, global minimum, then the locals.
pub fn gkls_minima(f: &GklsFunction) -> &[Minimum] {
    &f.minima
}

fn uniform_point(rng: &mut ChaCha8Rng, domain: &BoxDomain) -> Vec<f64> {
    (0..domain.dim())
        .map(|j| domain.lower()[j] + rng.gen::<f64>() * domain.width(j))
        .collect()
}

/// Uniform direction on the unit sphere by rejection from the cube.
fn unit_direction(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if len > 1e-3 && len <= 1.0 {
            return v.into_iter().map(|x| x / len).collect();
        }
    }
}

fn boundary_distance(domain: &BoxDomain, x: &[f64]) -> f64 {
    (0..domain.dim())
        .map(|j| (x[j] - domain.lower()[j]).min(domain.upper()[j] - x[j]))
        .fold(f64::INFINITY, f64::min)
}

/// Generates function `index` (1-based) of the class.
pub fn generate_function(spec: &GklsClassSpec, index: usize) -> Result<GklsFunction> {
    spec.validate()?;
    if !(1..=CLASS_SIZE).contains(&index) {
        return input(format!("function index {index} outside 1..={CLASS_SIZE}"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.function_seed(index));
    let d = &spec.domain;
    let n = spec.dim;
    let m = spec.minima;
    let rho_g = spec.global_radius;

    let mut attempts = 0;
    let (vertex, global) = 'placed: loop {
        let vertex = uniform_point(&mut rng, d);
        for _ in 0..100 {
            attempts += 1;
            if attempts > MAX_ATTEMPTS {
                return Err(Error::Generation(format!(
                    "global minimizer at distance {} from the vertex cannot keep {} from the boundary",
                    spec.global_dist,
                    0.5 * spec.global_dist
                )));
            }
            let dir = unit_direction(&mut rng, n);
            let g: Vec<f64> = vertex.iter().zip(&dir).map(|(t, u)| t + spec.global_dist * u).collect();
            // The margin r_dist / 2 exceeds every admissible radius, so the
            // global ball fits and its placement does not depend on the radius.
            if d.contains(&g) && boundary_distance(d, &g) >= 0.5 * spec.global_dist {
                break 'placed (vertex, g);
            }
        }
    };

    let mut points = vec![vertex, global];
    while points.len() < m {
        attempts += 1;
        if attempts > MAX_ATTEMPTS {
            return Err(Error::Generation(format!(
                "could not place {m} minima {} apart, {} from the global minimizer and {} from the boundary",
                rho_g,
                2.0 * rho_g,
                0.5 * rho_g
            )));
        }
        // Spacing keeps every local ball at least about rho_g / 2 wide, so no
        // basin of attraction degenerates to a sliver.
        let p = uniform_point(&mut rng, d);
        let far_from_global = euclidean(&p, &points[1]) >= 2.0 * rho_g;
        let spaced = points.iter().all(|q| euclidean(&p, q) >= rho_g);
        let inside = boundary_distance(d, &p) >= 0.5 * rho_g;
        if far_from_global && spaced && inside {
            points.push(p);
        }
    }

    let mut rho = vec![0.0; m];
    for i in 0..m {
        rho[i] = (0..m)
            .filter(|&j| j != i)
            .map(|j| euclidean(&points[i], &points[j]))
            .fold(f64::INFINITY, f64::min)
            / 2.0;
    }
    rho[1] = rho_g;
    for i in 2..m {
        rho[i] = rho[i].min(euclidean(&points[i], &points[1]) - rho_g - PRECISION);
    }
    for i in (0..m).filter(|&i| i != 1) {
        let room = (0..m)
            .filter(|&j| j != i)
            .map(|j| euclidean(&points[i], &points[j]) - rho[j])
            .fold(f64::INFINITY, f64::min);
        if room > rho[i] + PRECISION {
            rho[i] = room;
        }
    }
    for i in (0..m).filter(|&i| i != 1) {
        rho[i] *= RADIUS_WEIGHT;
        rho[i] = rho[i].min(RADIUS_WEIGHT * boundary_distance(d, &points[i]));
    }
    if rho.iter().any(|r| !(*r > 0.0)) {
        return Err(Error::Generation("a minimum lies on the domain boundary".into()));
    }

    let f_star = spec.global_value;
    let mut values = vec![PARABOLOID_MIN, f_star];
    for i in 2..m {
        let u: f64 = rng.gen();
        let dt = euclidean(&points[0], &points[i]);
        let floor = (rho[i] - dt).powi(2) + PARABOLOID_MIN;
        let peak = ((1.0 + u) * rho[i]).min(u * (floor - f_star));
        values.push((floor - peak).max(f_star + VALUE_MARGIN));
    }

    let minima = points
        .into_iter()
        .zip(values)
        .zip(rho)
        .map(|((point, value), radius)| Minimum { point, value, radius })
        .collect();
    GklsFunction::from_minima(d.clone(), minima)
}

/// All [`CLASS_SIZE`] functions of a class, in index order.
pub fn generate_class(spec: &GklsClassSpec) -> Result<Vec<GklsFunction>> {
    (1..=CLASS_SIZE).map(|i| generate_function(spec, i)).collect()
}
