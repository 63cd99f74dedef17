//! Multidimensional search on diagonal partitions.
//!
//! Every cell is a box of the ternary mesh over the search domain, and the
//! objective is evaluated only at the two endpoints of its main diagonal.
//! Cells are split into three slabs across the longest edge, which keeps the
//! trial points on a regular mesh: a vertex can end up as a diagonal endpoint
//! of up to `2^N` cells, and every repeated request is served from a
//! [`VertexStore`]. Cells to split are chosen with multiple Lipschitz
//! estimates, as the lower-right convex hull of (half diagonal, mean endpoint
//! value) pairs.

mod vertex;

use std::collections::HashMap;
use std::io::{self, Write};

pub use vertex::{longest_edge, trisect_diagonal, vertex_fetch, ExactVertex, Ternary, Trisection, VertexStore, MAX_DEPTH};

use crate::error::{input, Result};
use crate::framework::{
    run_with_state, Cell, CellId, CellSeed, DivideTheBest, PartitionState, Region, StoppingCriteria,
};
pub use crate::hull::Multiplicity;
use crate::hull::{improvement_threshold, potentially_optimal_pairs, SizeClasses};
use crate::problem::{BoxDomain, Objective, SolverResult, DEFAULT_EPSILON};

/// A cell of the diagonal partition.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagHyperinterval {
    pub a: ExactVertex,
    pub b: ExactVertex,
    pub z_a: f64,
    pub z_b: f64,
    /// Subdivision level per axis: the edge along axis `j` is `3^-levels[j]`
    /// of the domain width.
    pub levels: Vec<u8>,
    /// Euclidean length of the main diagonal in domain coordinates.
    pub diagonal: f64,
}

impl DiagHyperinterval {
    pub fn new(a: ExactVertex, b: ExactVertex, z_a: f64, z_b: f64, levels: Vec<u8>, domain: &BoxDomain) -> Self {
        let diagonal = diagonal_length(&levels, domain);
        Self {
            a,
            b,
            z_a,
            z_b,
            levels,
            diagonal,
        }
    }

    /// `(d, m)`: half diagonal and mean endpoint value.
    pub fn pair(&self) -> (f64, f64) {
        (self.diagonal / 2.0, (self.z_a + self.z_b) / 2.0)
    }

    pub fn region(&self, domain: &BoxDomain) -> Region {
        let pa = self.a.to_point(domain);
        let pb = self.b.to_point(domain);
        let lower = pa.iter().zip(&pb).map(|(x, y)| x.min(*y)).collect();
        let upper = pa.iter().zip(&pb).map(|(x, y)| x.max(*y)).collect();
        Region::new(lower, upper)
    }
}

/// Diagonal length from the per-axis levels. Squared edges are summed in
/// ascending order, so cells with the same level vector get bit-identical
/// lengths.
pub fn diagonal_length(levels: &[u8], domain: &BoxDomain) -> f64 {
    let mut sq: Vec<f64> = levels
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let e = domain.width(j) * 3f64.powi(-(l as i32));
            e * e
        })
        .collect();
    sq.sort_by(f64::total_cmp);
    sq.iter().sum::<f64>().sqrt()
}

/// Cells among `cells` that are best for some positive Lipschitz estimate
/// and improve on `f_best` by the `epsilon` margin. Returns ascending indices.
pub fn select_nondominated(cells: &[DiagHyperinterval], f_best: f64, epsilon: f64) -> Vec<usize> {
    let pairs: Vec<(f64, f64)> = cells.iter().map(DiagHyperinterval::pair).collect();
    potentially_optimal_pairs(&pairs, f_best, epsilon)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagonalParams {
    pub epsilon: f64,
    pub multiplicity: Multiplicity,
}

impl Default for DiagonalParams {
    fn default() -> Self {
        Self {
            epsilon: DEFAULT_EPSILON,
            multiplicity: Multiplicity::AllNondominated,
        }
    }
}

/// Divide-the-Best hooks for the diagonal method.
#[derive(Debug)]
pub struct DiagonalSearch {
    params: DiagonalParams,
    domain: Option<BoxDomain>,
    store: VertexStore,
    classes: SizeClasses,
    incidence: HashMap<ExactVertex, u32>,
    max_incidence: u32,
    depth_capped: usize,
}

impl DiagonalSearch {
    pub fn new(params: DiagonalParams) -> Result<Self> {
        if !(params.epsilon >= 0.0 && params.epsilon.is_finite()) {
            return input(format!("epsilon must be a nonnegative number, got {}", params.epsilon));
        }
        Ok(Self {
            params,
            domain: None,
            store: VertexStore::new(),
            classes: SizeClasses::default(),
            incidence: HashMap::new(),
            max_incidence: 0,
            depth_capped: 0,
        })
    }

    pub fn store(&self) -> &VertexStore {
        &self.store
    }

    /// Number of live cells having `v` as a diagonal endpoint.
    pub fn incidence(&self, v: &ExactVertex) -> u32 {
        self.incidence.get(v).copied().unwrap_or(0)
    }

    pub fn incidences(&self) -> impl Iterator<Item = (&ExactVertex, u32)> {
        self.incidence.iter().map(|(v, n)| (v, *n))
    }

    /// Largest incidence seen at any time during the run.
    pub fn max_incidence(&self) -> u32 {
        self.max_incidence
    }

    /// Cells left unsplit because their vertices reached [`MAX_DEPTH`].
    pub fn depth_capped(&self) -> usize {
        self.depth_capped
    }

    fn domain(&self) -> &BoxDomain {
        self.domain.as_ref().expect("initialized")
    }
}

/// Trial values at the two new vertices of a trisection.
#[derive(Debug, Clone)]
pub struct DiagPlacement {
    split: Trisection,
    z_u: f64,
    z_v: f64,
}

impl DivideTheBest for DiagonalSearch {
    type Data = DiagHyperinterval;
    type Placement = DiagPlacement;

    fn initialize(&mut self, domain: &BoxDomain, objective: &mut Objective<'_>) -> Result<Vec<CellSeed<DiagHyperinterval>>> {
        self.domain = Some(domain.clone());
        let n = domain.dim();
        let a = ExactVertex::lower_corner(n);
        let b = ExactVertex::upper_corner(n);
        let z_a = self.store.fetch(&a, objective)?;
        let z_b = self.store.fetch(&b, objective)?;
        let cell = DiagHyperinterval::new(a, b, z_a, z_b, vec![0; n], domain);
        Ok(vec![CellSeed::new(Region::of_domain(domain), cell)])
    }

    fn compute_characteristic(&self, _: &PartitionState<DiagHyperinterval>, cell: &Cell<DiagHyperinterval>) -> f64 {
        cell.data.pair().1
    }

    fn select(&mut self, state: &PartitionState<DiagHyperinterval>, objective: &Objective<'_>) -> Result<Vec<CellId>> {
        let threshold = improvement_threshold(objective.best_value(), self.params.epsilon);
        Ok(self
            .classes
            .select(threshold, self.params.multiplicity, |id| state.is_retired(id)))
    }

    fn place_trials(&mut self, cell: &Cell<DiagHyperinterval>, objective: &mut Objective<'_>) -> Result<Option<DiagPlacement>> {
        let split = match trisect_diagonal(&cell.data.a, &cell.data.b) {
            Ok(s) => s,
            Err(crate::Error::Structural(_)) if cell.data.levels.iter().any(|&l| l >= MAX_DEPTH) => {
                self.depth_capped += 1;
                return Ok(None);
            }
            Err(e) => return Err(e),
        };
        let z_u = self.store.fetch(&split.u, objective)?;
        let z_v = self.store.fetch(&split.v, objective)?;
        Ok(Some(DiagPlacement { split, z_u, z_v }))
    }

    fn subdivide(&mut self, cell: &Cell<DiagHyperinterval>, p: DiagPlacement) -> Result<Vec<CellSeed<DiagHyperinterval>>> {
        let domain = self.domain().clone();
        let mut levels = cell.data.levels.clone();
        levels[p.split.axis] += 1;
        let d = &cell.data;
        let [(a0, b0), (a1, b1), (a2, b2)] = p.split.children;
        let kids = [
            DiagHyperinterval::new(a0, b0, d.z_a, p.z_v, levels.clone(), &domain),
            DiagHyperinterval::new(a1, b1, p.z_u, p.z_v, levels.clone(), &domain),
            DiagHyperinterval::new(a2, b2, p.z_u, d.z_b, levels, &domain),
        ];
        Ok(kids
            .into_iter()
            .map(|k| CellSeed::new(k.region(&domain), k))
            .collect())
    }

    fn on_insert(&mut self, cell: &Cell<DiagHyperinterval>) {
        let (d, m) = cell.data.pair();
        self.classes.insert(d, m, cell.id);
        for v in [&cell.data.a, &cell.data.b] {
            let n = self.incidence.entry(v.clone()).or_insert(0);
            *n += 1;
            self.max_incidence = self.max_incidence.max(*n);
        }
    }

    fn on_remove(&mut self, cell: &Cell<DiagHyperinterval>) {
        let (d, m) = cell.data.pair();
        self.classes.remove(d, m, cell.id);
        for v in [&cell.data.a, &cell.data.b] {
            if let Some(n) = self.incidence.get_mut(v) {
                *n -= 1;
                if *n == 0 {
                    self.incidence.remove(v);
                }
            }
        }
    }
}

/// A finished diagonal run with its final partition and vertex statistics.
#[derive(Debug)]
pub struct DiagonalRun {
    pub result: SolverResult,
    pub state: PartitionState<DiagHyperinterval>,
    pub search: DiagonalSearch,
}

pub fn run_multidim_diagonal(objective: &mut Objective<'_>, params: DiagonalParams, stop: &StoppingCriteria) -> Result<DiagonalRun> {
    let mut search = DiagonalSearch::new(params)?;
    let (result, state) = run_with_state(&mut search, objective, stop)?;
    Ok(DiagonalRun { result, state, search })
}

pub fn solve_multidim_diagonal(objective: &mut Objective<'_>, params: DiagonalParams, stop: &StoppingCriteria) -> Result<SolverResult> {
    Ok(run_multidim_diagonal(objective, params, stop)?.result)
}

/// Writes one line per live cell: `cell_id parent_id a... b... z_a z_b`,
/// with `-` for the root's parent. Cells are listed by id.
pub fn write_partition_trace<W: Write>(
    out: &mut W,
    state: &PartitionState<DiagHyperinterval>,
    domain: &BoxDomain,
) -> io::Result<()> {
    let mut cells: Vec<&Cell<DiagHyperinterval>> = state.cells().collect();
    cells.sort_by_key(|c| c.id);
    for c in cells {
        let parent = c.parent.map_or_else(|| "-".to_string(), |p| p.to_string());
        write!(out, "{} {}", c.id, parent)?;
        for x in c.data.a.to_point(domain).iter().chain(&c.data.b.to_point(domain)) {
            write!(out, " {x:?}")?;
        }
        writeln!(out, " {:?} {:?}", c.data.z_a, c.data.z_b)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hull::oracle;
    use crate::problem::Termination;
    use crate::testfns::sphere;
    use num_bigint::BigUint;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::ops::ControlFlow;

    fn cell_with(d: f64, m: f64) -> DiagHyperinterval {
        DiagHyperinterval {
            a: ExactVertex::lower_corner(1),
            b: ExactVertex::upper_corner(1),
            z_a: m,
            z_b: m,
            levels: vec![0],
            diagonal: 2.0 * d,
        }
    }

    #[test]
    fn selection_examples() {
        let cells = [cell_with(0.25, 4.5), cell_with(0.5, 4.0), cell_with(1.0, 5.0)];
        assert_eq!(select_nondominated(&cells, 4.0, 1e-4), vec![1, 2]);
        assert_eq!(select_nondominated(&cells[..1], 4.5, 1e-4), vec![0]);
        let same = [cell_with(0.5, 2.0), cell_with(0.5, 1.0)];
        assert_eq!(select_nondominated(&same, 1.0, 1e-4), vec![1]);
    }

    /// Exact volume of the box spanned by a diagonal, in units of `3^-depth`
    /// per axis: `(numerator, total depth)`.
    fn exact_volume(a: &ExactVertex, b: &ExactVertex) -> (BigUint, u32) {
        let mut num = BigUint::from(1u32);
        let mut depth = 0u32;
        for (x, y) in a.0.iter().zip(&b.0) {
            let (n, d) = x.distance(*y);
            num *= BigUint::from(n);
            depth += d as u32;
        }
        (num, depth)
    }

    fn rescale((n, d): (BigUint, u32), to: u32) -> BigUint {
        n * BigUint::from(3u32).pow(to - d)
    }

    #[test]
    fn random_trisections_conserve_volume_exactly() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..200 {
            let n = rng.gen_range(1..=4);
            let mut cells = vec![(ExactVertex::lower_corner(n), ExactVertex::upper_corner(n))];
            for _ in 0..30 {
                let k = rng.gen_range(0..cells.len());
                let (a, b) = cells.swap_remove(k);
                let s = trisect_diagonal(&a, &b).unwrap();
                let parent = exact_volume(&a, &b);
                let kids: Vec<_> = s.children.iter().map(|(x, y)| exact_volume(x, y)).collect();
                let top = kids.iter().map(|k| k.1).max().unwrap().max(parent.1);
                let sum: BigUint = kids.iter().cloned().map(|k| rescale(k, top)).sum();
                assert_eq!(sum, rescale(parent, top));
                cells.extend(s.children.iter().cloned());
            }
            let top = cells.iter().map(|(a, b)| exact_volume(a, b).1).max().unwrap();
            let total: BigUint = cells.iter().map(|(a, b)| rescale(exact_volume(a, b), top)).sum();
            assert_eq!(total, BigUint::from(3u32).pow(top));
        }
    }

    #[test]
    fn sphere_is_hit_quickly() {
        let c = [0.37, 0.61];
        let d = BoxDomain::unit(2).unwrap();
        let tol = 1e-4f64.sqrt();
        let mut obj = Objective::new(d, sphere(&c)).with_observer(move |_, t| {
            if t.point.iter().zip(&c).all(|(x, y)| (x - y).abs() <= tol) {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        let res = solve_multidim_diagonal(&mut obj, DiagonalParams::default(), &StoppingCriteria::trials(500)).unwrap();
        assert_eq!(res.termination, Termination::Halted);
        assert!(res.trials_used <= 500);
    }

    #[test]
    fn deep_refinement_near_the_origin() {
        let c = [-0.00142, -0.11207];
        let d = BoxDomain::cube(2, -1.0, 1.0).unwrap();
        let mut obj = Objective::new(d, sphere(&c));
        let res = solve_multidim_diagonal(&mut obj, DiagonalParams::default(), &StoppingCriteria::trials(20_000)).unwrap();
        assert!(res.best_value < 1e-10, "{}", res.best_value);
    }

    #[test]
    fn constant_function_runs_to_budget() {
        let d = BoxDomain::unit(3).unwrap();
        let mut obj = Objective::new(d, |_| 2.5);
        let run = run_multidim_diagonal(&mut obj, DiagonalParams::default(), &StoppingCriteria::trials(100)).unwrap();
        assert!(matches!(run.result.termination, Termination::BudgetExhausted | Termination::MaxTrials));
        assert!(run.result.trials_used <= 100);
        assert!(run.state.cells().all(|c| c.characteristic == 2.5));
    }

    #[test]
    fn vertex_reuse_and_incidence() {
        let d = BoxDomain::unit(2).unwrap();
        let mut obj = Objective::new(d, |x| (5.0 * x[0]).sin() + (7.0 * x[1]).cos());
        let stop = StoppingCriteria::trials(usize::MAX).with_max_iterations(200);
        let run = run_multidim_diagonal(&mut obj, DiagonalParams::default(), &stop).unwrap();
        let corner_uses = 2 * run.result.cells_created;
        assert!((run.search.store().misses() as usize) < corner_uses);
        assert_eq!(run.search.store().misses() as usize, run.result.trials_used);
        assert!(run.search.max_incidence() >= 3);
        assert!(run.search.max_incidence() <= 4);
        for (v, n) in run.search.incidences() {
            let live = run.state.cells().filter(|c| &c.data.a == v || &c.data.b == v).count();
            assert_eq!(live as u32, n);
        }
    }

    #[test]
    fn incidence_bounded_in_three_dimensions() {
        let d = BoxDomain::unit(3).unwrap();
        let mut obj = Objective::new(d, |x| x.iter().map(|v| (9.0 * v).sin()).sum());
        let stop = StoppingCriteria::trials(3000);
        let run = run_multidim_diagonal(&mut obj, DiagonalParams::default(), &stop).unwrap();
        assert!(run.search.max_incidence() <= 8);
    }

    #[test]
    fn partition_tiles_and_diagonals_match_geometry() {
        let d = BoxDomain::new(vec![-1.0, 2.0], vec![3.0, 2.5]).unwrap();
        let mut obj = Objective::new(d.clone(), |x| (x[0] - 0.4).abs() + (x[1] - 2.2).powi(2));
        let run = run_multidim_diagonal(&mut obj, DiagonalParams::default(), &StoppingCriteria::trials(400)).unwrap();
        let vol: f64 = run.state.cells().map(|c| c.region.volume()).sum();
        assert!((vol - d.volume()).abs() <= 1e-9 * d.volume());
        for c in run.state.cells() {
            // edge lengths straight from the exact endpoint coordinates
            let geo = c
                .data
                .a
                .0
                .iter()
                .zip(&c.data.b.0)
                .enumerate()
                .map(|(j, (x, y))| {
                    let (n, k) = x.distance(*y);
                    (n as f64 / 3f64.powi(k as i32) * d.width(j)).powi(2)
                })
                .sum::<f64>()
                .sqrt();
            assert!((geo - c.data.diagonal).abs() <= 1e-12 * geo);
            let pa = c.data.a.to_point(&d);
            let pb = c.data.b.to_point(&d);
            assert!(pa.iter().zip(&pb).all(|(x, y)| x != y));
        }
    }

    #[test]
    fn incumbent_never_increases() {
        let d = BoxDomain::unit(2).unwrap();
        let mut obj = Objective::new(d, |x| ((13.0 * x[0]).sin() * (11.0 * x[1]).cos()).abs());
        let res = solve_multidim_diagonal(&mut obj, DiagonalParams::default(), &StoppingCriteria::trials(600)).unwrap();
        let mut best = f64::INFINITY;
        for t in &res.trial_history {
            best = best.min(t.value);
        }
        assert_eq!(best, res.best_value);
        let prefix: Vec<f64> = res
            .trial_history
            .iter()
            .scan(f64::INFINITY, |b, t| {
                *b = b.min(t.value);
                Some(*b)
            })
            .collect();
        assert!(prefix.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn one_per_measure_takes_oldest() {
        let d = BoxDomain::unit(2).unwrap();
        let mut obj = Objective::new(d, |_| 0.0);
        let params = DiagonalParams {
            multiplicity: Multiplicity::OnePerMeasure,
            ..DiagonalParams::default()
        };
        let res = solve_multidim_diagonal(&mut obj, params, &StoppingCriteria::trials(50)).unwrap();
        assert!(res.trials_used <= 50);
    }

    #[test]
    fn trace_lines() {
        let d = BoxDomain::unit(2).unwrap();
        let mut obj = Objective::new(d.clone(), |x| x[0] * x[1]);
        let run = run_multidim_diagonal(&mut obj, DiagonalParams::default(), &StoppingCriteria::trials(4)).unwrap();
        let mut buf = Vec::new();
        write_partition_trace(&mut buf, &run.state, &d).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), run.state.len());
        assert!(lines.iter().all(|l| l.split(' ').count() == 2 + 4 + 2));
    }

    proptest! {
        #![proptest_config(crate::test_support::fixed(64))]
        #[test]
        fn selection_matches_grid_oracle(
            raw in prop::collection::vec((0u8..5, 0u8..5, 0.0f64..10.0), 1..20),
            below in 0.0f64..1.0,
        ) {
            let d = BoxDomain::unit(2).unwrap();
            let cells: Vec<DiagHyperinterval> = raw
                .iter()
                .map(|&(l0, l1, m)| {
                    DiagHyperinterval::new(
                        ExactVertex::lower_corner(2), ExactVertex::upper_corner(2), m, m, vec![l0, l1], &d,
                    )
                })
                .collect();
            let pairs: Vec<(f64, f64)> = cells.iter().map(DiagHyperinterval::pair).collect();
            let f_best = pairs.iter().map(|p| p.1).fold(f64::INFINITY, f64::min) - below;
            let got = select_nondominated(&cells, f_best, 1e-4);
            prop_assert_eq!(got, oracle::brute_force(&pairs, f_best, 1e-4, &oracle::k_grid(20_000)));
        }
    }
}
