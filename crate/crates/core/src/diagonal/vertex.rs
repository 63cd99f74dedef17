//! Exact ternary vertex coordinates and the evaluated-vertex store.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, EvalError, Result};
use crate::problem::{BoxDomain, Objective};

/// Deepest subdivision level representable: `3^40 < 2^64`.
pub const MAX_DEPTH: u8 = 40;

const fn pow3(k: u8) -> u64 {
    let mut p = 1u64;
    let mut i = 0;
    while i < k {
        p *= 3;
        i += 1;
    }
    p
}

/// One coordinate `num / 3^depth` of the unit interval, in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Ternary {
    num: u64,
    depth: u8,
}

impl Ternary {
    pub const ZERO: Ternary = Ternary { num: 0, depth: 0 };
    pub const ONE: Ternary = Ternary { num: 1, depth: 0 };

    pub fn new(num: u64, depth: u8) -> Result<Self> {
        if depth > MAX_DEPTH {
            return Err(Error::Structural(format!("ternary depth {depth} exceeds cap {MAX_DEPTH}")));
        }
        if num > pow3(depth) {
            return Err(Error::Input(format!("{num}/3^{depth} lies outside [0, 1]")));
        }
        let (mut num, mut depth) = (num, depth);
        while depth > 0 && num % 3 == 0 {
            num /= 3;
            depth -= 1;
        }
        Ok(Self { num, depth })
    }

    pub fn numerator(self) -> u64 {
        self.num
    }

    pub fn depth(self) -> u8 {
        self.depth
    }

    /// Numerator over `3^depth` for some `depth >= self.depth`.
    fn scaled(self, depth: u8) -> u128 {
        self.num as u128 * pow3(depth - self.depth) as u128
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / pow3(self.depth) as f64
    }

    /// `|self - other|` as `(numerator, depth)`, not reduced.
    pub fn distance(self, other: Ternary) -> (u128, u8) {
        let d = self.depth.max(other.depth);
        (self.scaled(d).abs_diff(other.scaled(d)), d)
    }

    /// The point two thirds of the way from `self` to `toward`.
    pub fn two_thirds_toward(self, toward: Ternary) -> Result<Ternary> {
        let d = self.depth.max(toward.depth);
        if d >= MAX_DEPTH {
            return Err(Error::Structural(format!("ternary depth cap {MAX_DEPTH} reached")));
        }
        let num = self.scaled(d) + 2 * toward.scaled(d);
        Ternary::new(num as u64, d + 1)
    }
}

fn cmp_lengths(x: (u128, u8), y: (u128, u8)) -> Ordering {
    let d = x.1.max(y.1);
    (x.0 * pow3(d - x.1) as u128).cmp(&(y.0 * pow3(d - y.1) as u128))
}

/// A vertex of the ternary mesh over the search box.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExactVertex(pub Vec<Ternary>);

impl ExactVertex {
    pub fn lower_corner(dim: usize) -> Self {
        Self(vec![Ternary::ZERO; dim])
    }

    pub fn upper_corner(dim: usize) -> Self {
        Self(vec![Ternary::ONE; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_point(&self, domain: &BoxDomain) -> Vec<f64> {
        let unit: Vec<f64> = self.0.iter().map(|t| t.to_f64()).collect();
        domain.from_unit(&unit)
    }
}

/// Result of splitting one diagonal cell into three slabs.
#[derive(Debug, Clone, PartialEq)]
pub struct Trisection {
    pub axis: usize,
    pub u: ExactVertex,
    pub v: ExactVertex,
    /// Main diagonals of the children, in order along the split axis from `a`.
    pub children: [(ExactVertex, ExactVertex); 3],
}

/// Axis of the longest edge (lowest index on ties) of the box spanned by a
/// main diagonal.
pub fn longest_edge(a: &ExactVertex, b: &ExactVertex) -> Result<usize> {
    if a.dim() != b.dim() || a.dim() == 0 {
        return Err(Error::Structural("diagonal endpoints of different dimension".into()));
    }
    let mut best = 0;
    let mut best_len = a.0[0].distance(b.0[0]);
    for j in 0..a.dim() {
        let len = a.0[j].distance(b.0[j]);
        if len.0 == 0 {
            return Err(Error::Structural(format!("degenerate diagonal on axis {j}")));
        }
        if cmp_lengths(len, best_len) == Ordering::Greater {
            best = j;
            best_len = len;
        }
    }
    Ok(best)
}

/// Splits the cell with main diagonal `(a, b)` into three equal slabs across
/// its longest edge. The new vertices are `u` (from `a`, moved two thirds of
/// the edge toward `b`) and `v` (from `b`, moved two thirds toward `a`); the
/// children have diagonals `(a, v)`, `(u, v)` and `(u, b)`.
pub fn trisect_diagonal(a: &ExactVertex, b: &ExactVertex) -> Result<Trisection> {
    let axis = longest_edge(a, b)?;
    let mut u = a.clone();
    u.0[axis] = a.0[axis].two_thirds_toward(b.0[axis])?;
    let mut v = b.clone();
    v.0[axis] = b.0[axis].two_thirds_toward(a.0[axis])?;
    Ok(Trisection {
        axis,
        children: [(a.clone(), v.clone()), (u.clone(), v.clone()), (u.clone(), b.clone())],
        u,
        v,
    })
}

/// Values of every evaluated vertex, keyed by exact coordinates.
#[derive(Debug, Default, Clone)]
pub struct VertexStore {
    values: HashMap<ExactVertex, f64>,
    hits: u64,
    misses: u64,
}

impl VertexStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: &ExactVertex) -> Option<f64> {
        self.values.get(v).copied()
    }

    /// Cached value of `v`, evaluating the objective only on a miss.
    pub fn fetch(&mut self, v: &ExactVertex, objective: &mut Objective<'_>) -> Result<f64, EvalError> {
        if let Some(z) = self.values.get(v) {
            self.hits += 1;
            return Ok(*z);
        }
        let x = v.to_point(objective.domain());
        let z = objective.evaluate(&x)?;
        self.misses += 1;
        self.values.insert(v.clone(), z);
        Ok(z)
    }
}

/// Convenience wrapper over [`VertexStore::fetch`].
pub fn vertex_fetch(store: &mut VertexStore, v: &ExactVertex, objective: &mut Objective<'_>) -> Result<f64> {
    Ok(store.fetch(v, objective)?)
}
