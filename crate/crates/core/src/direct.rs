//! Centre-sampling baselines: DIRECT and its locally biased variant DIRECT-l.
//!
//! The domain is normalized to the unit cube. Each rectangle is sampled at its
//! centre; side lengths are powers of `1/3`, and centres are kept as exact
//! odd multiples of `1 / (2 * 3^level)` so that centre identity is exact.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::framework::{run_with_state, Cell, CellId, CellSeed, DivideTheBest, PartitionState, Region, StoppingCriteria};
use crate::hull::{improvement_threshold, potentially_optimal_pairs, Multiplicity, SizeClasses};
use crate::problem::{BoxDomain, Objective, SolverResult, DEFAULT_EPSILON};

/// Deepest side level: `2 * 3^39 < 2^64`.
pub const MAX_LEVEL: u8 = 39;

fn pow3(k: u8) -> u64 {
    3u64.pow(k as u32)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DirectVariant {
    /// Split along every longest side.
    Direct,
    /// Split one longest side and take one rectangle per size class.
    DirectL,
}

impl fmt::Display for DirectVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DirectVariant::Direct => "direct",
            DirectVariant::DirectL => "direct-l",
        })
    }
}

impl FromStr for DirectVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "direct" => Ok(DirectVariant::Direct),
            "direct-l" | "directl" => Ok(DirectVariant::DirectL),
            other => input(format!("unknown DIRECT variant `{other}`")),
        }
    }
}

/// A rectangle of the unit cube sampled at its centre.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterRect {
    /// Centre coordinate on axis `j` is `center[j] / (2 * 3^levels[j])`.
    pub center: Vec<u64>,
    /// Side along axis `j` is `3^-levels[j]`.
    pub levels: Vec<u8>,
    pub value: f64,
    /// Half the diagonal in unit-cube coordinates.
    pub measure: f64,
}

impl CenterRect {
    /// The measure is derived from `levels`; `center` is taken as given.
    pub fn new(center: Vec<u64>, levels: Vec<u8>, value: f64) -> Self {
        let measure = half_diagonal(&levels);
        Self {
            center,
            levels,
            value,
            measure,
        }
    }

    pub fn unit_center(&self) -> Vec<f64> {
        self.center
            .iter()
            .zip(&self.levels)
            .map(|(&c, &l)| c as f64 / (2 * pow3(l)) as f64)
            .collect()
    }

    pub fn side(&self, axis: usize) -> f64 {
        3f64.powi(-(self.levels[axis] as i32))
    }

    pub fn region(&self, domain: &BoxDomain) -> Region {
        let c = self.unit_center();
        let lo: Vec<f64> = (0..c.len()).map(|j| c[j] - self.side(j) / 2.0).collect();
        let hi: Vec<f64> = (0..c.len()).map(|j| c[j] + self.side(j) / 2.0).collect();
        Region::new(domain.from_unit(&lo), domain.from_unit(&hi))
    }

    fn min_level(&self) -> u8 {
        *self.levels.iter().min().expect("at least one axis")
    }

    /// Axes carrying a longest side.
    pub fn longest_axes(&self) -> Vec<usize> {
        let k = self.min_level();
        (0..self.levels.len()).filter(|&j| self.levels[j] == k).collect()
    }

    /// Centre shifted by one third of the side along `axis`, at the child level.
    fn shifted(&self, axis: usize, up: bool) -> Vec<u64> {
        let mut c = self.center.clone();
        c[axis] = if up { 3 * c[axis] + 2 } else { 3 * c[axis] - 2 };
        c
    }
}

/// Half the diagonal of a unit-cube rectangle with the given side levels;
/// summed in ascending order so equal level multisets give equal bits.
pub fn half_diagonal(levels: &[u8]) -> f64 {
    let mut sq: Vec<f64> = levels.iter().map(|&l| 9f64.powi(-(l as i32))).collect();
    sq.sort_by(f64::total_cmp);
    0.5 * sq.iter().sum::<f64>().sqrt()
}

/// Potentially optimal rectangles among `rects` for the improvement margin
/// `epsilon`; ascending indices.
pub fn potentially_optimal(rects: &[CenterRect], f_min: f64, epsilon: f64) -> Vec<usize> {
    let pairs: Vec<(f64, f64)> = rects.iter().map(|r| (r.measure, r.value)).collect();
    potentially_optimal_pairs(&pairs, f_min, epsilon)
}

/// The sampled neighbours of a centre: `(axis, value below, value above)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitSamples(pub Vec<(usize, f64, f64)>);

/// Children of `rect` given the values at its new sample points.
///
/// Axes are split in order of increasing `min(f(c - d e_i), f(c + d e_i))`,
/// so the best new centres end up in the largest children. The parent's
/// centre is inherited by the last (central) child.
pub fn trisect_rect(rect: &CenterRect, samples: &SplitSamples) -> Vec<CenterRect> {
    let mut order = samples.0.clone();
    order.sort_by(|a, b| a.1.min(a.2).total_cmp(&b.1.min(b.2)));
    let mut levels = rect.levels.clone();
    let mut center = rect.center.clone();
    let mut out = Vec::with_capacity(2 * order.len() + 1);
    for &(axis, below, above) in &order {
        levels[axis] += 1;
        center[axis] *= 3;
        let mut lo = center.clone();
        lo[axis] -= 2;
        let mut hi = center.clone();
        hi[axis] += 2;
        out.push(CenterRect::new(lo, levels.clone(), below));
        out.push(CenterRect::new(hi, levels.clone(), above));
    }
    out.push(CenterRect::new(center, levels, rect.value));
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectParams {
    pub variant: DirectVariant,
    pub epsilon: f64,
}

impl DirectParams {
    pub fn new(variant: DirectVariant) -> Self {
        Self {
            variant,
            epsilon: DEFAULT_EPSILON,
        }
    }
}

/// Divide-the-Best hooks for DIRECT and DIRECT-l.
#[derive(Debug)]
pub struct DirectSearch {
    params: DirectParams,
    domain: Option<BoxDomain>,
    classes: SizeClasses,
}

impl DirectSearch {
    pub fn new(params: DirectParams) -> Result<Self> {
        if !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
            return input(format!("epsilon must be a nonnegative number, got {}", params.epsilon));
        }
        Ok(Self {
            params,
            domain: None,
            classes: SizeClasses::default(),
        })
    }

    fn domain(&self) -> &BoxDomain {
        self.domain.as_ref().expect("initialized")
    }

    fn split_axes(&self, rect: &CenterRect) -> Vec<usize> {
        let axes = rect.longest_axes();
        match self.params.variant {
            DirectVariant::Direct => axes,
            DirectVariant::DirectL => axes[..1].to_vec(),
        }
    }
}

impl DivideTheBest for DirectSearch {
    type Data = CenterRect;
    type Placement = SplitSamples;

    fn initialize(&mut self, domain: &BoxDomain, objective: &mut Objective<'_>) -> Result<Vec<CellSeed<CenterRect>>> {
        self.domain = Some(domain.clone());
        let n = domain.dim();
        let value = objective.evaluate(&domain.center())?;
        let rect = CenterRect::new(vec![1; n], vec![0; n], value);
        Ok(vec![CellSeed::new(rect.region(domain), rect)])
    }

    fn compute_characteristic(&self, _: &PartitionState<CenterRect>, cell: &Cell<CenterRect>) -> f64 {
        cell.data.value
    }

    fn select(&mut self, state: &PartitionState<CenterRect>, objective: &Objective<'_>) -> Result<Vec<CellId>> {
        let threshold = improvement_threshold(objective.best_value(), self.params.epsilon);
        let multiplicity = match self.params.variant {
            DirectVariant::Direct => Multiplicity::AllNondominated,
            DirectVariant::DirectL => Multiplicity::OnePerMeasure,
        };
        Ok(self.classes.select(threshold, multiplicity, |id| state.is_retired(id)))
    }

    fn place_trials(&mut self, cell: &Cell<CenterRect>, objective: &mut Objective<'_>) -> Result<Option<SplitSamples>> {
        let rect = &cell.data;
        if rect.min_level() >= MAX_LEVEL {
            return Ok(None);
        }
        let domain = self.domain().clone();
        let mut samples = Vec::new();
        for axis in self.split_axes(rect) {
            let mut vals = [0.0; 2];
            for (k, up) in [false, true].into_iter().enumerate() {
                let probe = CenterRect::new(rect.shifted(axis, up), bump(&rect.levels, axis), 0.0);
                vals[k] = objective.evaluate(&domain.from_unit(&probe.unit_center()))?;
            }
            samples.push((axis, vals[0], vals[1]));
        }
        Ok(Some(SplitSamples(samples)))
    }

    fn subdivide(&mut self, cell: &Cell<CenterRect>, samples: SplitSamples) -> Result<Vec<CellSeed<CenterRect>>> {
        let domain = self.domain().clone();
        Ok(trisect_rect(&cell.data, &samples)
            .into_iter()
            .map(|r| CellSeed::new(r.region(&domain), r))
            .collect())
    }

    fn on_insert(&mut self, cell: &Cell<CenterRect>) {
        self.classes.insert(cell.data.measure, cell.data.value, cell.id);
    }

    fn on_remove(&mut self, cell: &Cell<CenterRect>) {
        self.classes.remove(cell.data.measure, cell.data.value, cell.id);
    }
}

fn bump(levels: &[u8], axis: usize) -> Vec<u8> {
    let mut l = levels.to_vec();
    l[axis] += 1;
    l
}

pub fn run_direct(
    objective: &mut Objective<'_>,
    params: DirectParams,
    stop: &StoppingCriteria,
) -> Result<(SolverResult, PartitionState<CenterRect>)> {
    let mut search = DirectSearch::new(params)?;
    run_with_state(&mut search, objective, stop)
}

pub fn solve_direct(objective: &mut Objective<'_>, params: DirectParams, stop: &StoppingCriteria) -> Result<SolverResult> {
    Ok(run_direct(objective, params, stop)?.0)
}
