//! Generic adaptive-partition engine.
//!
//! Every iteration scores the live cells, picks the most promising ones,
//! places new trials inside them and replaces each by its children. The
//! concrete method lives in a [`DivideTheBest`] implementation; the engine
//! owns the cell bookkeeping, the structural checks and the stopping rule.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use crate::error::{input, Error, Result};
use crate::problem::{BoxDomain, Objective, SolverResult, Termination};

pub type CellId = usize;

const VOLUME_RTOL: f64 = 1e-9;

/// `f64` with a total order, for use as an ordered-set key.
#[derive(Debug, Clone, Copy)]
pub struct TotalF64(pub f64);

impl PartialEq for TotalF64 {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}
impl Eq for TotalF64 {}
impl PartialOrd for TotalF64 {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for TotalF64 {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Axis-aligned sub-box of the search domain.
#[derive(Debug, Clone, PartialEq)]
pub struct Region {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Region {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { lower, upper }
    }

    pub fn of_domain(domain: &BoxDomain) -> Self {
        Self::new(domain.lower().to_vec(), domain.upper().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn volume(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| b - a)
            .product()
    }

    pub fn diameter(&self) -> f64 {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| (b - a) * (b - a))
            .sum::<f64>()
            .sqrt()
    }

    fn contains_region(&self, other: &Region, tol: &[f64]) -> bool {
        (0..self.dim()).all(|j| {
            other.lower[j] >= self.lower[j] - tol[j] && other.upper[j] <= self.upper[j] + tol[j]
        })
    }

    fn overlap_volume(&self, other: &Region) -> f64 {
        (0..self.dim())
            .map(|j| (self.upper[j].min(other.upper[j]) - self.lower[j].max(other.lower[j])).max(0.0))
            .product()
    }
}

/// A live member of the partition.
#[derive(Debug, Clone)]
pub struct Cell<D> {
    pub id: CellId,
    pub parent: Option<CellId>,
    pub generation: u32,
    pub region: Region,
    /// `NaN` until first computed.
    pub characteristic: f64,
    pub data: D,
}

/// A cell as produced by a hook, before the engine assigns its identity.
#[derive(Debug, Clone)]
pub struct CellSeed<D> {
    pub region: Region,
    pub data: D,
}

impl<D> CellSeed<D> {
    pub fn new(region: Region, data: D) -> Self {
        Self { region, data }
    }
}

/// Which end of the characteristic scale is "best".
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Minimize,
    Maximize,
}

/// Whether characteristics must be refreshed for every live cell each
/// iteration or only computed once for new cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Recompute {
    All,
    NewCellsOnly,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StoppingCriteria {
    pub max_trials: usize,
    pub min_cell_volume_fraction: Option<f64>,
    pub max_iterations: Option<usize>,
}

impl StoppingCriteria {
    pub fn trials(max_trials: usize) -> Self {
        Self {
            max_trials,
            min_cell_volume_fraction: None,
            max_iterations: None,
        }
    }

    pub fn with_min_volume_fraction(mut self, fraction: f64) -> Self {
        self.min_cell_volume_fraction = Some(fraction);
        self
    }

    pub fn with_max_iterations(mut self, iterations: usize) -> Self {
        self.max_iterations = Some(iterations);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_trials == 0 {
            return input("max_trials must be positive");
        }
        if let Some(f) = self.min_cell_volume_fraction {
            if !(f.is_finite() && f > 0.0) {
                return input(format!("volume fraction must be positive, got {f}"));
            }
        }
        Ok(())
    }
}

/// Live cells plus the ranking used by the default selection rule.
#[derive(Debug)]
pub struct PartitionState<D> {
    cells: BTreeMap<CellId, Cell<D>>,
    ranked: BTreeSet<(TotalF64, CellId)>,
    retired: BTreeSet<CellId>,
    direction: Direction,
    iteration: usize,
    next_id: CellId,
    domain_volume: f64,
}

impl<D> PartitionState<D> {
    pub fn new(direction: Direction, domain_volume: f64) -> Self {
        Self {
            cells: BTreeMap::new(),
            ranked: BTreeSet::new(),
            retired: BTreeSet::new(),
            direction,
            iteration: 0,
            next_id: 0,
            domain_volume,
        }
    }

    fn rank_key(&self, r: f64) -> TotalF64 {
        match self.direction {
            Direction::Minimize => TotalF64(r),
            Direction::Maximize => TotalF64(-r),
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn iteration(&self) -> usize {
        self.iteration
    }

    /// Total number of cells ever created.
    pub fn created(&self) -> usize {
        self.next_id
    }

    pub fn domain_volume(&self) -> f64 {
        self.domain_volume
    }

    pub fn get(&self, id: CellId) -> Option<&Cell<D>> {
        self.cells.get(&id)
    }

    pub fn cells(&self) -> impl Iterator<Item = &Cell<D>> {
        self.cells.values()
    }

    pub fn live_volume(&self) -> f64 {
        self.cells.values().map(|c| c.region.volume()).sum()
    }

    /// Best-ranked cell, ties resolved towards the older cell.
    pub fn best_cell(&self) -> Option<&Cell<D>> {
        self.ranked.iter().next().map(|(_, id)| &self.cells[id])
    }

    pub fn insert(&mut self, seed: CellSeed<D>, parent: Option<&Cell<D>>) -> CellId {
        let id = self.next_id;
        self.next_id += 1;
        let cell = Cell {
            id,
            parent: parent.map(|p| p.id),
            generation: parent.map_or(0, |p| p.generation + 1),
            region: seed.region,
            characteristic: f64::NAN,
            data: seed.data,
        };
        self.cells.insert(id, cell);
        id
    }

    /// Cells that could not be refined further; they stay in the partition
    /// but are no longer ranked or selected.
    pub fn is_retired(&self, id: CellId) -> bool {
        self.retired.contains(&id)
    }

    pub fn retire(&mut self, id: CellId) {
        if let Some(cell) = self.cells.get(&id) {
            if !cell.characteristic.is_nan() {
                let key = self.rank_key(cell.characteristic);
                self.ranked.remove(&(key, id));
            }
            self.retired.insert(id);
        }
    }

    pub fn remove(&mut self, id: CellId) -> Option<Cell<D>> {
        let cell = self.cells.remove(&id)?;
        self.retired.remove(&id);
        if !cell.characteristic.is_nan() {
            let key = self.rank_key(cell.characteristic);
            self.ranked.remove(&(key, id));
        }
        Some(cell)
    }

    pub fn set_characteristic(&mut self, id: CellId, r: f64) -> Result<()> {
        if !r.is_finite() {
            return Err(Error::Structural(format!("cell {id} received non-finite characteristic {r}")));
        }
        let old = match self.cells.get(&id) {
            Some(c) => c.characteristic,
            None => return Err(Error::Structural(format!("unknown cell {id}"))),
        };
        if self.retired.contains(&id) {
            self.cells.get_mut(&id).expect("checked above").characteristic = r;
            return Ok(());
        }
        if !old.is_nan() {
            let key = self.rank_key(old);
            self.ranked.remove(&(key, id));
        }
        let key = self.rank_key(r);
        self.ranked.insert((key, id));
        self.cells.get_mut(&id).expect("checked above").characteristic = r;
        Ok(())
    }

    /// The `multiplicity` best cells by characteristic; ties go to the lower id.
    pub fn select_best_cells(&self, multiplicity: usize) -> Result<Vec<CellId>> {
        if multiplicity < 1 {
            return input("multiplicity must be at least 1");
        }
        if self.ranked.is_empty() {
            return Err(Error::Structural("no selectable cells".into()));
        }
        if self.ranked.len() + self.retired.len() != self.cells.len() {
            return Err(Error::Structural("characteristics missing for some live cells".into()));
        }
        Ok(self.ranked.iter().take(multiplicity).map(|(_, id)| *id).collect())
    }
}

/// Stop decision made after each iteration.
pub fn check_stop<D>(
    state: &PartitionState<D>,
    best_cell: Option<&Cell<D>>,
    trials_used: usize,
    stop: &StoppingCriteria,
) -> Option<Termination> {
    if trials_used >= stop.max_trials {
        return Some(Termination::MaxTrials);
    }
    if let (Some(threshold), Some(cell)) = (stop.min_cell_volume_fraction, best_cell) {
        if cell.region.volume() / state.domain_volume <= threshold {
            return Some(Termination::CellVolume);
        }
    }
    if let Some(max_it) = stop.max_iterations {
        if state.iteration >= max_it {
            return Some(Termination::MaxIterations);
        }
    }
    None
}

/// Hooks that turn the engine into a concrete method.
pub trait DivideTheBest {
    /// Per-cell payload (trial values, diagonal vertices, ...).
    type Data;
    /// New trial information produced for a selected cell before it is split.
    type Placement;

    fn direction(&self) -> Direction {
        Direction::Minimize
    }

    fn recompute(&self) -> Recompute {
        Recompute::NewCellsOnly
    }

    /// Initial partition; may evaluate the objective.
    fn initialize(&mut self, domain: &BoxDomain, objective: &mut Objective<'_>) -> Result<Vec<CellSeed<Self::Data>>>;

    /// Refreshes whole-partition quantities (global slope estimates and the
    /// like) before characteristics are computed.
    fn prepare(&mut self, _state: &PartitionState<Self::Data>, _objective: &Objective<'_>) -> Result<()> {
        Ok(())
    }

    /// Side-effect free score of one cell.
    fn compute_characteristic(&self, state: &PartitionState<Self::Data>, cell: &Cell<Self::Data>) -> f64;

    fn select(&mut self, state: &PartitionState<Self::Data>, _objective: &Objective<'_>) -> Result<Vec<CellId>> {
        state.select_best_cells(1)
    }

    /// Evaluates the new trials for `cell`. `Ok(None)` means the cell cannot
    /// be refined further.
    fn place_trials(&mut self, cell: &Cell<Self::Data>, objective: &mut Objective<'_>) -> Result<Option<Self::Placement>>;

    fn subdivide(&mut self, cell: &Cell<Self::Data>, placement: Self::Placement) -> Result<Vec<CellSeed<Self::Data>>>;

    fn on_insert(&mut self, _cell: &Cell<Self::Data>) {}

    fn on_remove(&mut self, _cell: &Cell<Self::Data>) {}
}

fn check_children<D>(parent: &Region, children: &[CellSeed<D>], scale: &[f64]) -> Result<()> {
    if children.is_empty() {
        return Err(Error::Structural("subdivision produced no children".into()));
    }
    let pv = parent.volume();
    // Deep cells are narrow compared with the domain, so rounding at the
    // domain's scale bounds how exactly their regions can be compared.
    let width: Vec<f64> = (0..parent.dim())
        .map(|j| (parent.upper[j] - parent.lower[j]).abs().max(f64::MIN_POSITIVE))
        .collect();
    let rounding: Vec<f64> = (0..parent.dim())
        .map(|j| 8.0 * f64::EPSILON * scale[j])
        .collect();
    let tol: Vec<f64> = (0..parent.dim()).map(|j| 1e-12 * width[j] + rounding[j]).collect();
    let rtol = VOLUME_RTOL + 4.0 * (0..parent.dim()).map(|j| rounding[j] / width[j]).sum::<f64>();
    let mut sum = 0.0;
    for (k, c) in children.iter().enumerate() {
        if c.region.dim() != parent.dim() {
            return Err(Error::Structural("child dimension mismatch".into()));
        }
        let v = c.region.volume();
        if !(v > 0.0) {
            return Err(Error::Structural(format!("child {k} has non-positive volume")));
        }
        if !parent.contains_region(&c.region, &tol) {
            return Err(Error::Structural(format!("child {k} escapes its parent")));
        }
        for other in &children[k + 1..] {
            if c.region.overlap_volume(&other.region) > rtol * pv {
                return Err(Error::Structural("children overlap".into()));
            }
        }
        sum += v;
    }
    if (sum - pv).abs() > rtol * pv {
        return Err(Error::Structural(format!(
            "children volume {sum} does not match parent volume {pv}"
        )));
    }
    Ok(())
}

fn insert_cells<S: DivideTheBest>(
    strategy: &mut S,
    state: &mut PartitionState<S::Data>,
    seeds: Vec<CellSeed<S::Data>>,
    parent: Option<&Cell<S::Data>>,
) -> Result<()> {
    for seed in seeds {
        let id = state.insert(seed, parent);
        let cell = state.get(id).expect("just inserted");
        strategy.on_insert(cell);
        if strategy.recompute() == Recompute::NewCellsOnly {
            let r = strategy.compute_characteristic(state, state.get(id).expect("live"));
            state.set_characteristic(id, r)?;
        }
    }
    Ok(())
}

fn finish<D>(
    state: PartitionState<D>,
    objective: &Objective<'_>,
    why: Termination,
) -> Result<(SolverResult, PartitionState<D>)> {
    let result = SolverResult::from_history(
        objective.history().to_vec(),
        state.len(),
        state.created(),
        state.iteration(),
        why,
    );
    Ok((result, state))
}

fn clean_stop(err: &Error) -> Option<Termination> {
    match err {
        Error::Eval(e) if e.is_clean_stop() => Some(if matches!(e, crate::error::EvalError::Halted { .. }) {
            Termination::Halted
        } else {
            Termination::BudgetExhausted
        }),
        _ => None,
    }
}

/// Runs the partition loop until a stopping rule fires.
pub fn run_divide_the_best<S: DivideTheBest>(
    strategy: &mut S,
    objective: &mut Objective<'_>,
    stop: &StoppingCriteria,
) -> Result<SolverResult> {
    let (result, _) = run_with_state(strategy, objective, stop)?;
    Ok(result)
}

/// As [`run_divide_the_best`], also returning the final partition.
pub fn run_with_state<S: DivideTheBest>(
    strategy: &mut S,
    objective: &mut Objective<'_>,
    stop: &StoppingCriteria,
) -> Result<(SolverResult, PartitionState<S::Data>)> {
    stop.validate()?;
    objective.restrict_budget(stop.max_trials);
    let domain = objective.domain().clone();
    let mut state = PartitionState::new(strategy.direction(), domain.volume());


    let seeds = match strategy.initialize(&domain, objective) {
        Ok(s) => s,
        Err(e) => match clean_stop(&e) {
            Some(why) => return finish(state, objective, why),
            None => return Err(e),
        },
    };
    let root = Region::of_domain(&domain);
    let scale: Vec<f64> = (0..domain.dim())
        .map(|j| domain.lower()[j].abs().max(domain.upper()[j].abs()))
        .collect();
    check_children(&root, &seeds, &scale)?;
    insert_cells(strategy, &mut state, seeds, None)?;
    if let Some(why) = check_stop(&state, state.best_cell(), objective.history().len(), stop) {
        return finish(state, objective, why);
    }

    loop {
        strategy.prepare(&state, objective)?;
        if strategy.recompute() == Recompute::All {
            let ids: Vec<CellId> = state
                .cells
                .keys()
                .copied()
                .filter(|id| !state.retired.contains(id))
                .collect();
            for id in ids {
                let r = strategy.compute_characteristic(&state, &state.cells[&id]);
                state.set_characteristic(id, r)?;
            }
        }
        let selected = strategy.select(&state, objective)?;
        if selected.is_empty() {
            if state.ranked.is_empty() {
                return finish(state, objective, Termination::Resolution);
            }
            return Err(Error::Structural("selection returned no cells".into()));
        }
        let mut refined = 0;
        for id in selected {
            let Some(cell) = state.get(id) else {
                return Err(Error::Structural(format!("selected cell {id} is not live")));
            };
            let placement = match strategy.place_trials(cell, objective) {
                Ok(Some(p)) => p,
                Ok(None) => {
                    state.retire(id);
                    continue;
                }
                Err(e) => match clean_stop(&e) {
                    Some(why) => {
                        state.iteration += 1;
                        return finish(state, objective, why);
                    }
                    None => return Err(e),
                },
            };
            let children = strategy.subdivide(cell, placement)?;
            check_children(&cell.region, &children, &scale)?;
            let parent = state.remove(id).expect("live");
            strategy.on_remove(&parent);
            insert_cells(strategy, &mut state, children, Some(&parent))?;
            refined += 1;
        }
        state.iteration += 1;
        if refined == 0 && state.ranked.is_empty() {
            return finish(state, objective, Termination::Resolution);
        }
        if let Some(why) = check_stop(&state, state.best_cell(), objective.history().len(), stop) {
            return finish(state, objective, why);
        }
    }
}
