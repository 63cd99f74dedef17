//! Univariate geometric methods: Piyavskij–Shubert with a known constant, with
//! an adaptive global estimate, and with local tuning.
//!
//! Each subinterval between neighbouring trials is scored by the minimum of
//! the two-cone minorant over it; the lowest one is split at the cone
//! intersection.

use std::collections::HashMap;

use crate::error::{input, Error, Result};
use crate::framework::{
    run_divide_the_best, Cell, CellId, CellSeed, DivideTheBest, PartitionState, Recompute, Region,
    StoppingCriteria,
};
use crate::minorant::pair_minimum;
use crate::problem::{BoxDomain, LipschitzSpec, Objective, SolverResult, Trial, DEFAULT_RELIABILITY};

/// Subinterval `[x_left, x_right]` with the trial values at its ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntervalCell {
    pub x_left: f64,
    pub z_left: f64,
    pub x_right: f64,
    pub z_right: f64,
}

impl IntervalCell {
    pub fn new(x_left: f64, z_left: f64, x_right: f64, z_right: f64) -> Self {
        Self {
            x_left,
            z_left,
            x_right,
            z_right,
        }
    }

    pub fn width(&self) -> f64 {
        self.x_right - self.x_left
    }

    pub fn slope(&self) -> f64 {
        (self.z_right - self.z_left).abs() / self.width()
    }
}

fn check_cell(cell: &IntervalCell) -> Result<()> {
    if !(cell.width() > 0.0) {
        return Err(Error::Structural(format!(
            "degenerate interval [{}, {}]",
            cell.x_left, cell.x_right
        )));
    }
    Ok(())
}

fn check_positive(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return input(format!("Lipschitz estimate must be positive, got {l}"));
    }
    Ok(())
}

/// Minimum of the two-cone minorant over the interval.
pub fn interval_characteristic(cell: &IntervalCell, l: f64) -> Result<f64> {
    check_cell(cell)?;
    check_positive(l)?;
    Ok(pair_minimum(cell.x_left, cell.z_left, cell.x_right, cell.z_right, l).1)
}

/// Abscissa of the cone intersection. Fails with [`Error::SlopeCondition`]
/// when `l` does not exceed the interval slope, since the point would then
/// fall on or beyond an endpoint.
pub fn next_trial_point(cell: &IntervalCell, l: f64) -> Result<f64> {
    check_cell(cell)?;
    check_positive(l)?;
    let slope = cell.slope();
    if l <= slope {
        return Err(Error::SlopeCondition { slope, l });
    }
    Ok(pair_minimum(cell.x_left, cell.z_left, cell.x_right, cell.z_right, l).0)
}

fn sorted_abscissae(trials: &[Trial]) -> Result<(Vec<f64>, Vec<f64>)> {
    if trials.len() < 2 {
        return input("slope estimates need at least two trials");
    }
    let mut xs = Vec::with_capacity(trials.len());
    let mut zs = Vec::with_capacity(trials.len());
    for t in trials {
        if t.point.len() != 1 {
            return input("univariate estimate expects scalar trial points");
        }
        xs.push(t.point[0]);
        zs.push(t.value);
    }
    for w in xs.windows(2) {
        if w[0] == w[1] {
            return input(format!("duplicate abscissa {}", w[0]));
        }
        if w[0] > w[1] {
            return input("trials must be sorted by abscissa");
        }
    }
    Ok((xs, zs))
}

fn check_reliability(r: f64, xi: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return input(format!("reliability factor must be positive, got {r}"));
    }
    if !(xi.is_finite() && xi > 0.0) {
        return input(format!("slope floor must be positive, got {xi}"));
    }
    Ok(())
}

fn slopes(xs: &[f64], zs: &[f64]) -> Vec<f64> {
    (0..xs.len() - 1)
        .map(|i| (zs[i + 1] - zs[i]).abs() / (xs[i + 1] - xs[i]))
        .collect()
}

/// Per-interval local estimates from interval widths and slopes.
fn local_estimates(widths: &[f64], slopes: &[f64], r: f64, xi: f64) -> Vec<f64> {
    let global = slopes.iter().copied().fold(0.0, f64::max);
    let x_max = widths.iter().copied().fold(0.0, f64::max);
    (0..slopes.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 1).min(slopes.len() - 1);
            let lambda = slopes[lo..=hi].iter().copied().fold(0.0, f64::max);
            let gamma = global * widths[i] / x_max;
            r * lambda.max(gamma).max(xi)
        })
        .collect()
}

/// `r * max(xi, largest adjacent slope)`.
pub fn estimate_l_global(trials: &[Trial], r: f64, xi: f64) -> Result<f64> {
    check_reliability(r, xi)?;
    let (xs, zs) = sorted_abscissae(trials)?;
    let max = slopes(&xs, &zs).into_iter().fold(0.0, f64::max);
    Ok(r * max.max(xi))
}

/// Local estimate for interval `i` (between trials `i` and `i + 1`).
///
/// Blends the largest slope over the neighbouring intervals `i-1, i, i+1`
/// with the global slope scaled by the interval's share of the widest
/// interval, so large unexplored intervals keep a global-sized estimate.
pub fn estimate_l_local(trials: &[Trial], i: usize, r: f64, xi: f64) -> Result<f64> {
    check_reliability(r, xi)?;
    let (xs, zs) = sorted_abscissae(trials)?;
    if i + 1 >= xs.len() {
        return input(format!("interval index {i} out of range for {} trials", xs.len()));
    }
    let widths: Vec<f64> = xs.windows(2).map(|w| w[1] - w[0]).collect();
    Ok(local_estimates(&widths, &slopes(&xs, &zs), r, xi)[i])
}

/// Partition hooks for the univariate methods.
#[derive(Debug)]
pub struct Piyavskij {
    spec: LipschitzSpec,
    /// Factor used to inflate an estimate that falls below an interval slope.
    inflation: f64,
    global_estimate: f64,
    local: HashMap<CellId, f64>,
    min_separation: f64,
}

impl Piyavskij {
    pub fn new(spec: LipschitzSpec) -> Result<Self> {
        spec.validate()?;
        let inflation = match spec {
            LipschitzSpec::APriori { .. } => DEFAULT_RELIABILITY,
            LipschitzSpec::AdaptiveGlobal { r, .. } | LipschitzSpec::LocalTuning { r, .. } => r,
            LipschitzSpec::MultipleEstimates { .. } => {
                return input("univariate geometric methods need a single-estimate Lipschitz mode")
            }
        };
        let global_estimate = match spec {
            LipschitzSpec::APriori { l } => l,
            _ => f64::NAN,
        };
        Ok(Self {
            spec,
            inflation,
            global_estimate,
            local: HashMap::new(),
            min_separation: 0.0,
        })
    }

    fn raw_estimate(&self, id: CellId) -> f64 {
        match self.spec {
            LipschitzSpec::LocalTuning { .. } => self.local[&id],
            _ => self.global_estimate,
        }
    }

    /// Estimate actually used for a cell: inflated until it exceeds the
    /// interval's own slope.
    fn estimate(&self, cell: &Cell<IntervalCell>) -> f64 {
        let slope = cell.data.slope();
        let mut l = self.raw_estimate(cell.id);
        while l <= slope {
            l *= self.inflation;
        }
        l
    }
}

impl DivideTheBest for Piyavskij {
    type Data = IntervalCell;
    type Placement = (f64, f64);

    fn recompute(&self) -> Recompute {
        match self.spec {
            LipschitzSpec::APriori { .. } => Recompute::NewCellsOnly,
            _ => Recompute::All,
        }
    }

    fn initialize(&mut self, domain: &BoxDomain, objective: &mut Objective<'_>) -> Result<Vec<CellSeed<IntervalCell>>> {
        if domain.dim() != 1 {
            return input(format!("univariate method called on a {}-dimensional domain", domain.dim()));
        }
        let (a, b) = (domain.lower()[0], domain.upper()[0]);
        // slack of a few ulps so the separation survives rounding
        self.min_separation = 1e-12 * (b - a) + 4.0 * f64::EPSILON * a.abs().max(b.abs());
        let za = objective.evaluate(&[a])?;
        let zb = objective.evaluate(&[b])?;
        Ok(vec![CellSeed::new(
            Region::new(vec![a], vec![b]),
            IntervalCell::new(a, za, b, zb),
        )])
    }

    fn prepare(&mut self, state: &PartitionState<IntervalCell>, _: &Objective<'_>) -> Result<()> {
        match self.spec {
            LipschitzSpec::APriori { .. } | LipschitzSpec::MultipleEstimates { .. } => {}
            LipschitzSpec::AdaptiveGlobal { r, xi } => {
                let max = state.cells().map(|c| c.data.slope()).fold(0.0, f64::max);
                self.global_estimate = r * max.max(xi);
            }
            LipschitzSpec::LocalTuning { r, xi } => {
                let mut cells: Vec<&Cell<IntervalCell>> = state.cells().collect();
                cells.sort_by(|a, b| a.data.x_left.total_cmp(&b.data.x_left));
                let widths: Vec<f64> = cells.iter().map(|c| c.data.width()).collect();
                let slopes: Vec<f64> = cells.iter().map(|c| c.data.slope()).collect();
                let est = local_estimates(&widths, &slopes, r, xi);
                self.local = cells.iter().zip(est).map(|(c, l)| (c.id, l)).collect();
            }
        }
        Ok(())
    }

    fn compute_characteristic(&self, _: &PartitionState<IntervalCell>, cell: &Cell<IntervalCell>) -> f64 {
        let d = &cell.data;
        pair_minimum(d.x_left, d.z_left, d.x_right, d.z_right, self.estimate(cell)).1
    }

    fn place_trials(&mut self, cell: &Cell<IntervalCell>, objective: &mut Objective<'_>) -> Result<Option<(f64, f64)>> {
        let d = &cell.data;
        let sep = self.min_separation;
        if d.width() <= 2.0 * sep {
            return Ok(None);
        }
        let x = match next_trial_point(d, self.estimate(cell)) {
            Ok(x) => x,
            Err(Error::SlopeCondition { .. }) => unreachable!("estimate is inflated past the slope"),
            Err(e) => return Err(e),
        };
        let x = x.clamp(d.x_left + sep, d.x_right - sep);
        let z = objective.evaluate(&[x])?;
        Ok(Some((x, z)))
    }

    fn subdivide(&mut self, cell: &Cell<IntervalCell>, (x, z): (f64, f64)) -> Result<Vec<CellSeed<IntervalCell>>> {
        let d = cell.data;
        Ok(vec![
            CellSeed::new(
                Region::new(vec![d.x_left], vec![x]),
                IntervalCell::new(d.x_left, d.z_left, x, z),
            ),
            CellSeed::new(
                Region::new(vec![x], vec![d.x_right]),
                IntervalCell::new(x, z, d.x_right, d.z_right),
            ),
        ])
    }
}

/// Piyavskij–Shubert search over the objective's one-dimensional domain.
pub fn solve_piyavskij(objective: &mut Objective<'_>, spec: LipschitzSpec, stop: &StoppingCriteria) -> Result<SolverResult> {
    let mut hooks = Piyavskij::new(spec)?;
    run_divide_the_best(&mut hooks, objective, stop)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::framework::run_with_state;
    use crate::minorant::minorant_value;
    use crate::testfns::ConeFunction;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid_min(cell: &IntervalCell, l: f64) -> (f64, f64) {
        let tr = [Trial::at(cell.x_left, cell.z_left), Trial::at(cell.x_right, cell.z_right)];
        let n = 100_000;
        (0..=n)
            .map(|k| cell.x_left + cell.width() * k as f64 / n as f64)
            .map(|x| (x, minorant_value(&tr, l, &[x]).unwrap()))
            .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc })
    }

    #[test]
    fn characteristic_examples() {
        let c = IntervalCell::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(interval_characteristic(&c, 2.0).unwrap(), -0.5);
        assert!((grid_min(&c, 2.0).1 + 0.5).abs() < 1e-9);
        let c = IntervalCell::new(0.0, 4.0, 1.0, 4.0);
        assert_eq!(interval_characteristic(&c, 3.0).unwrap(), 4.0 - 1.5);
        let c = IntervalCell::new(0.0, 0.0, 2.0, 2.0);
        assert_eq!(interval_characteristic(&c, 1.0).unwrap(), 0.0);
        assert!(matches!(
            interval_characteristic(&IntervalCell::new(1.0, 0.0, 1.0, 0.0), 1.0),
            Err(Error::Structural(_))
        ));
    }

    #[test]
    fn trial_point_examples() {
        let c = IntervalCell::new(0.0, 1.0, 1.0, 0.0);
        assert_eq!(next_trial_point(&c, 2.0).unwrap(), 0.75);
        assert!((grid_min(&c, 2.0).0 - 0.75).abs() < 1e-4);
        assert_eq!(next_trial_point(&IntervalCell::new(0.0, 5.0, 1.0, 5.0), 7.0).unwrap(), 0.5);
        assert_eq!(next_trial_point(&IntervalCell::new(0.0, 0.0, 1.0, 1.0), 2.0).unwrap(), 0.25);
        assert!(matches!(
            next_trial_point(&IntervalCell::new(0.0, 0.0, 1.0, 1.0), 1.0),
            Err(Error::SlopeCondition { .. })
        ));
    }

    #[test]
    fn global_estimate_examples() {
        let tr = [Trial::at(0.0, 0.0), Trial::at(1.0, 3.0)];
        assert_eq!(estimate_l_global(&tr, 1.5, 1e-8).unwrap(), 4.5);
        let tr = [Trial::at(0.0, 2.0), Trial::at(0.5, 2.0), Trial::at(1.0, 2.0)];
        assert_eq!(estimate_l_global(&tr, 2.0, 1e-8).unwrap(), 2e-8);
        let tr = [Trial::at(0.0, 0.0), Trial::at(0.5, 1.0), Trial::at(1.0, 1.0)];
        assert_eq!(estimate_l_global(&tr, 1.0, 1e-8).unwrap(), 2.0);
        let dup = [Trial::at(0.0, 0.0), Trial::at(0.0, 1.0)];
        assert!(estimate_l_global(&dup, 1.5, 1e-8).is_err());
    }

    #[test]
    fn local_estimate_examples() {
        // uniform grid, constant slope
        let tr: Vec<Trial> = (0..6).map(|k| Trial::at(k as f64 * 0.2, 3.0 * k as f64 * 0.2)).collect();
        for i in 0..5 {
            assert!((estimate_l_local(&tr, i, 1.0, 1e-8).unwrap() - 3.0).abs() < 1e-12);
        }
        // flat region far from a steep one: lambda = 0, global slope 10, width ratio 0.1
        let tr = [
            Trial::at(0.0, 0.0),
            Trial::at(0.1, 0.0),
            Trial::at(0.2, 0.0),
            Trial::at(0.3, 0.0),
            Trial::at(1.3, 10.0),
        ];
        assert!((estimate_l_local(&tr, 1, 1.0, 1e-8).unwrap() - 1.0).abs() < 1e-12);
        let tr = [Trial::at(0.0, 0.0), Trial::at(1.0, 3.0)];
        assert!((estimate_l_local(&tr, 0, 1.2, 1e-8).unwrap() - 3.6).abs() < 1e-12);
        assert!(estimate_l_local(&tr, 1, 1.2, 1e-8).is_err());
    }

    #[test]
    fn abs_function_a_priori() {
        let d = BoxDomain::unit(1).unwrap();
        let mut obj = Objective::new(d, |x| (x[0] - 0.3).abs());
        let res = solve_piyavskij(&mut obj, LipschitzSpec::APriori { l: 1.0 }, &StoppingCriteria::trials(50)).unwrap();
        assert!(res.best_value <= 1e-3, "{}", res.best_value);
        assert!((res.best_point[0] - 0.3).abs() <= 2e-3);
    }

    #[test]
    fn constant_function_any_spec() {
        for spec in [
            LipschitzSpec::APriori { l: 2.0 },
            LipschitzSpec::adaptive_global(),
            LipschitzSpec::local_tuning(),
        ] {
            let d = BoxDomain::new(vec![-2.0], vec![5.0]).unwrap();
            let mut obj = Objective::new(d, |_| 1.25);
            let res = solve_piyavskij(&mut obj, spec, &StoppingCriteria::trials(2)).unwrap();
            assert_eq!(res.trials_used, 2);
            assert_eq!(res.best_value, 1.25);
        }
    }

    #[test]
    fn multiple_estimates_rejected() {
        assert!(Piyavskij::new(LipschitzSpec::MultipleEstimates { epsilon: 1e-4 }).is_err());
        let d = BoxDomain::unit(2).unwrap();
        let mut obj = Objective::new(d, |_| 0.0);
        assert!(solve_piyavskij(&mut obj, LipschitzSpec::adaptive_global(), &StoppingCriteria::trials(5)).is_err());
    }

    #[test]
    fn optimality_gap_is_valid_with_true_constant() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let f = ConeFunction::random_funnels(&mut rng, 1, 5);
            let l = f.lipschitz_constant();
            let d = BoxDomain::unit(1).unwrap();
            let f_star = f.global_minimum().1;
            let g = f.clone();
            let mut obj = Objective::new(d, move |x| g.eval(x));
            let budget = rng.gen_range(5..200);
            let mut hooks = Piyavskij::new(LipschitzSpec::APriori { l }).unwrap();
            let (res, state) = run_with_state(&mut hooks, &mut obj, &StoppingCriteria::trials(budget)).unwrap();
            let min_r = state.cells().map(|c| c.characteristic).fold(f64::INFINITY, f64::min);
            assert!(res.best_value - min_r >= 0.0);
            assert!(res.best_value - min_r >= res.best_value - f_star - 1e-9);
        }
    }

    #[test]
    fn trials_never_duplicate() {
        let d = BoxDomain::unit(1).unwrap();
        for spec in [LipschitzSpec::APriori { l: 1.0 }, LipschitzSpec::adaptive_global(), LipschitzSpec::local_tuning()] {
            let mut obj = Objective::new(d.clone(), |x| (x[0] - 0.3).abs());
            let res = solve_piyavskij(&mut obj, spec, &StoppingCriteria::trials(3000)).unwrap();
            let mut xs: Vec<f64> = res.trial_history.iter().map(|t| t.point[0]).collect();
            xs.sort_by(f64::total_cmp);
            assert!(xs.windows(2).all(|w| w[1] - w[0] >= 1e-12), "{spec:?}");
        }
    }

    #[test]
    fn local_tuning_refines_around_global_minimizer() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let f = ConeFunction::random_funnels(&mut rng, 1, 5);
            let (x_star, _) = f.global_minimum();
            let g = f.clone();
            let d = BoxDomain::unit(1).unwrap();
            let mut obj = Objective::new(d, move |x| g.eval(x));
            let spec = LipschitzSpec::LocalTuning { r: 4.0, xi: 1e-8 };
            let mut hooks = Piyavskij::new(spec).unwrap();
            let (_, state) = run_with_state(&mut hooks, &mut obj, &StoppingCriteria::trials(2000)).unwrap();
            let holder = state
                .cells()
                .find(|c| c.data.x_left <= x_star[0] && x_star[0] <= c.data.x_right)
                .unwrap();
            assert!(holder.data.width() < 1e-6, "width {}", holder.data.width());
        }
    }

    fn hits_within(f: &ConeFunction, x_star: f64, spec: LipschitzSpec, budget: usize) -> bool {
        let g = f.clone();
        let d = BoxDomain::unit(1).unwrap();
        let mut obj = Objective::new(d, move |x| g.eval(x)).with_observer(move |_, t| {
            if (t.point[0] - x_star).abs() <= 1e-4 {
                std::ops::ControlFlow::Break(())
            } else {
                std::ops::ControlFlow::Continue(())
            }
        });
        let res = solve_piyavskij(&mut obj, spec, &StoppingCriteria::trials(budget)).unwrap();
        res.termination == crate::problem::Termination::Halted
    }

    #[test]
    fn adaptive_global_hits_cone_envelopes() {
        let hits = (0..100)
            .filter(|seed| {
                let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
                let f = ConeFunction::random_envelope(&mut rng, 1, 5);
                let (x_star, _) = f.envelope_minimum_1d();
                hits_within(&f, x_star, LipschitzSpec::adaptive_global(), 1000)
            })
            .count();
        assert!(hits >= 95, "hits {hits}");
    }

    #[test]
    fn a_priori_constant_hits_every_funnel_minimum() {
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let f = ConeFunction::random_funnels(&mut rng, 1, 5);
            let (x_star, _) = f.global_minimum();
            let spec = LipschitzSpec::APriori { l: f.lipschitz_constant() };
            assert!(hits_within(&f, x_star[0], spec, 1000), "seed {seed}");
        }
    }
}
