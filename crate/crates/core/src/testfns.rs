//! Cone-based test functions with a known Lipschitz constant, and a few
//! classical named problems.

use rand::Rng;
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::problem::{euclidean, BoxDomain};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ConeKind {
    /// `min_i (v_i + s_i |x - c_i|)`: funnels, global minimum at the lowest apex.
    Funnels,
    /// `max_i (v_i - s_i |x - c_i|)`: peaks.
    Peaks,
    /// `max_i (v_i + s_i |x - c_i|)`: a convex envelope of funnels.
    Envelope,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeFunction {
    pub kind: ConeKind,
    pub apexes: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub slopes: Vec<f64>,
}

impl ConeFunction {
    fn random<R: Rng>(rng: &mut R, kind: ConeKind, dim: usize, count: usize) -> Self {
        let apexes = (0..count)
            .map(|_| (0..dim).map(|_| rng.gen_range(0.05..0.95)).collect())
            .collect();
        let values = (0..count).map(|_| rng.gen_range(0.0..1.0)).collect();
        let slopes = (0..count).map(|_| rng.gen_range(1.0..10.0)).collect();
        Self {
            kind,
            apexes,
            values,
            slopes,
        }
    }

    /// `count` funnels with apexes inside the unit cube.
    pub fn random_funnels<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Self {
        Self::random(rng, ConeKind::Funnels, dim, count)
    }

    pub fn random_peaks<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Self {
        Self::random(rng, ConeKind::Peaks, dim, count)
    }

    pub fn random_envelope<R: Rng>(rng: &mut R, dim: usize, count: usize) -> Self {
        Self::random(rng, ConeKind::Envelope, dim, count)
    }

    pub fn dim(&self) -> usize {
        self.apexes.first().map_or(0, Vec::len)
    }

    pub fn lipschitz_constant(&self) -> f64 {
        self.slopes.iter().copied().fold(0.0, f64::max)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let terms = self
            .apexes
            .iter()
            .zip(&self.values)
            .zip(&self.slopes)
            .map(|((c, v), s)| match self.kind {
                ConeKind::Funnels | ConeKind::Envelope => v + s * euclidean(x, c),
                ConeKind::Peaks => v - s * euclidean(x, c),
            });
        match self.kind {
            ConeKind::Funnels => terms.fold(f64::INFINITY, f64::min),
            ConeKind::Peaks | ConeKind::Envelope => terms.fold(f64::NEG_INFINITY, f64::max),
        }
    }

    /// Lowest apex of a funnel function.
    ///
    /// # Panics
    /// For peak functions, whose minimum is not at an apex.
    pub fn global_minimum(&self) -> (Vec<f64>, f64) {
        assert_eq!(self.kind, ConeKind::Funnels, "only funnels have apex minima");
        let k = (0..self.values.len())
            .min_by(|&a, &b| self.values[a].total_cmp(&self.values[b]))
            .expect("at least one cone");
        (self.apexes[k].clone(), self.values[k])
    }

    /// Exact minimizer of a univariate envelope over `[0, 1]`.
    ///
    /// The envelope is convex and piecewise linear, so its minimum sits at an
    /// endpoint, an apex, or a crossing of two cone flanks.
    pub fn envelope_minimum_1d(&self) -> (f64, f64) {
        assert_eq!(self.kind, ConeKind::Envelope);
        assert_eq!(self.dim(), 1);
        // flanks as (slope, intercept)
        let mut lines = Vec::new();
        for ((c, v), s) in self.apexes.iter().zip(&self.values).zip(&self.slopes) {
            lines.push((*s, v - s * c[0]));
            lines.push((-*s, v + s * c[0]));
        }
        let mut cands = vec![0.0, 1.0];
        cands.extend(self.apexes.iter().map(|c| c[0]));
        for (i, &(s1, b1)) in lines.iter().enumerate() {
            for &(s2, b2) in &lines[i + 1..] {
                if s1 != s2 {
                    let x = (b2 - b1) / (s1 - s2);
                    if (0.0..=1.0).contains(&x) {
                        cands.push(x);
                    }
                }
            }
        }
        cands
            .into_iter()
            .map(|x| (x, self.eval(&[x])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("endpoints are candidates")
    }
}

/// `sum_j (x_j - c_j)^2`.
pub fn sphere(center: &[f64]) -> impl Fn(&[f64]) -> f64 + Clone + '_ {
    move |x: &[f64]| x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum()
}

/// A named classical problem with its known global minimum value.
#[derive(Debug, Clone)]
pub struct Builtin {
    pub name: &'static str,
    pub domain: BoxDomain,
    pub f: fn(&[f64]) -> f64,
    pub global_value: f64,
    /// A valid Lipschitz constant, where one is known in closed form.
    pub lipschitz: Option<f64>,
}

fn sine_1d(x: &[f64]) -> f64 {
    x[0].sin() + (10.0 * x[0] / 3.0).sin()
}

fn sphere_2d(x: &[f64]) -> f64 {
    (x[0] - 0.3).powi(2) + (x[1] + 0.2).powi(2)
}

fn branin(x: &[f64]) -> f64 {
    let (a, b, c) = (1.0, 5.1 / (4.0 * PI * PI), 5.0 / PI);
    let (r, s, t) = (6.0, 10.0, 1.0 / (8.0 * PI));
    a * (x[1] - b * x[0] * x[0] + c * x[0] - r).powi(2) + s * (1.0 - t) * x[0].cos() + s
}

fn six_hump(x: &[f64]) -> f64 {
    let (u, v) = (x[0], x[1]);
    (4.0 - 2.1 * u * u + u.powi(4) / 3.0) * u * u + u * v + (-4.0 + 4.0 * v * v) * v * v
}

pub const BUILTIN_NAMES: [&str; 4] = ["sine1d", "sphere2d", "branin", "six-hump"];

/// Looks up a builtin problem by name.
pub fn builtin(name: &str) -> Result<Builtin> {
    let (domain, f, global_value, lipschitz): (BoxDomain, fn(&[f64]) -> f64, f64, Option<f64>) = match name {
        "sine1d" => (BoxDomain::new(vec![2.7], vec![7.5])?, sine_1d, -1.899_599_349_152_113, Some(1.0 + 10.0 / 3.0)),
        "sphere2d" => (BoxDomain::cube(2, -1.0, 1.0)?, sphere_2d, 0.0, None),
        "branin" => (BoxDomain::new(vec![-5.0, 0.0], vec![10.0, 15.0])?, branin, 0.397_887_357_729_738_2, None),
        "six-hump" => (BoxDomain::new(vec![-3.0, -2.0], vec![3.0, 2.0])?, six_hump, -1.031_628_453_489_877, None),
        other => {
            return Err(Error::Input(format!(
                "unknown builtin `{other}` (available: {})",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(Builtin { name: BUILTIN_NAMES.iter().find(|n| **n == name).expect("listed"), domain, f, global_value, lipschitz })
}
