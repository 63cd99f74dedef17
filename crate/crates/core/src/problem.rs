//! Problem statement: the box domain, evaluated trials, the counted objective
//! and the result record every solver returns.

use std::fmt;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::error::{input, EvalError, Result};

/// Axis-aligned search box `[a, b]` with `a(j) < b(j)` on every axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxDomain {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoxDomain {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return input("domain dimension must be at least 1");
        }
        if lower.len() != upper.len() {
            return input(format!(
                "bound length mismatch: {} lower vs {} upper",
                lower.len(),
                upper.len()
            ));
        }
        for (j, (a, b)) in lower.iter().zip(&upper).enumerate() {
            if !a.is_finite() || !b.is_finite() {
                return input(format!("non-finite bound on axis {j}"));
            }
            if a >= b {
                return input(format!("axis {j}: lower bound {a} not below upper bound {b}"));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[lo, hi]^n`.
    pub fn cube(n: usize, lo: f64, hi: f64) -> Result<Self> {
        Self::new(vec![lo; n], vec![hi; n])
    }

    pub fn unit(n: usize) -> Result<Self> {
        Self::cube(n, 0.0, 1.0)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|j| self.width(j)).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim()
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (a, b))| *v >= *a && *v <= *b)
    }

    /// Maps a point of the unit cube into the box, clamping rounding spill.
    pub fn from_unit(&self, t: &[f64]) -> Vec<f64> {
        t.iter()
            .enumerate()
            .map(|(j, tj)| {
                let x = self.lower[j] + tj * self.width(j);
                x.clamp(self.lower[j], self.upper[j])
            })
            .collect()
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .enumerate()
            .map(|(j, xj)| (xj - self.lower[j]) / self.width(j))
            .collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(a, b)| 0.5 * (a + b))
            .collect()
    }
}

/// One evaluated point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub point: Vec<f64>,
    pub value: f64,
}

impl Trial {
    pub fn new(point: Vec<f64>, value: f64) -> Self {
        Self { point, value }
    }

    /// Convenience constructor for univariate trials.
    pub fn at(x: f64, value: f64) -> Self {
        Self { point: vec![x], value }
    }
}

pub fn euclidean(x: &[f64], y: &[f64]) -> f64 {
    x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

type Evaluator<'a> = Box<dyn FnMut(&[f64]) -> f64 + 'a>;
type Observer<'a> = Box<dyn FnMut(usize, &Trial) -> ControlFlow<()> + 'a>;

/// A black-box objective that counts every call and records the trial history.
///
/// Once the budget is spent, or an observer breaks, further calls fail instead
/// of evaluating.
pub struct Objective<'a> {
    evaluator: Evaluator<'a>,
    domain: BoxDomain,
    budget: Option<usize>,
    history: Vec<Trial>,
    calls: usize,
    best: Option<usize>,
    observer: Option<Observer<'a>>,
    halted: bool,
}

impl fmt::Debug for Objective<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Objective")
            .field("domain", &self.domain)
            .field("budget", &self.budget)
            .field("evaluation_count", &self.history.len())
            .field("halted", &self.halted)
            .finish()
    }
}

impl<'a> Objective<'a> {
    pub fn new(domain: BoxDomain, f: impl FnMut(&[f64]) -> f64 + 'a) -> Self {
        Self {
            evaluator: Box::new(f),
            domain,
            budget: None,
            history: Vec::new(),
            calls: 0,
            best: None,
            observer: None,
            halted: false,
        }
    }

    pub fn with_budget(mut self, budget: usize) -> Self {
        self.budget = Some(budget);
        self
    }

    /// Installs a callback run after every successful evaluation with the
    /// 1-based trial index. Returning `Break` halts the objective.
    pub fn with_observer(
        mut self,
        observer: impl FnMut(usize, &Trial) -> ControlFlow<()> + 'a,
    ) -> Self {
        self.observer = Some(Box::new(observer));
        self
    }

    /// Lowers the budget to `limit` if it is currently larger or unset.
    pub fn restrict_budget(&mut self, limit: usize) {
        self.budget = Some(self.budget.map_or(limit, |b| b.min(limit)));
    }

    pub fn domain(&self) -> &BoxDomain {
        &self.domain
    }

    pub fn budget(&self) -> Option<usize> {
        self.budget
    }

    /// Number of evaluator invocations, including a final rejected non-finite one.
    pub fn evaluation_count(&self) -> usize {
        self.calls
    }

    pub fn history(&self) -> &[Trial] {
        &self.history
    }

    pub fn best(&self) -> Option<&Trial> {
        self.best.map(|i| &self.history[i])
    }

    pub fn best_value(&self) -> f64 {
        self.best().map_or(f64::INFINITY, |t| t.value)
    }

    pub fn is_halted(&self) -> bool {
        self.halted
    }

    pub fn remaining(&self) -> Option<usize> {
        self.budget.map(|b| b.saturating_sub(self.history.len()))
    }

    pub fn evaluate(&mut self, x: &[f64]) -> Result<f64, EvalError> {
        if self.halted {
            return Err(EvalError::Halted {
                trials: self.history.len(),
            });
        }
        if let Some(budget) = self.budget {
            if self.history.len() >= budget {
                return Err(EvalError::BudgetExhausted { budget });
            }
        }
        if !self.domain.contains(x) {
            return Err(EvalError::OutsideDomain { point: x.to_vec() });
        }
        let value = (self.evaluator)(x);
        self.calls += 1;
        if !value.is_finite() {
            return Err(EvalError::NonFinite {
                point: x.to_vec(),
                value,
            });
        }
        let trial = Trial::new(x.to_vec(), value);
        self.history.push(trial);
        let idx = self.history.len() - 1;
        if self.best.is_none_or(|b| value < self.history[b].value) {
            self.best = Some(idx);
        }
        if let Some(obs) = self.observer.as_mut() {
            if obs(idx + 1, &self.history[idx]).is_break() {
                self.halted = true;
            }
        }
        Ok(value)
    }
}

/// How a solver obtains its Lipschitz information.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LipschitzSpec {
    /// Known constant `L`.
    APriori { l: f64 },
    /// One estimate for the whole domain, `r * max(xi, max slope)`.
    AdaptiveGlobal { r: f64, xi: f64 },
    /// Per-interval estimates blending local and global slope information.
    LocalTuning { r: f64, xi: f64 },
    /// All positive estimates at once (potentially-optimal selection).
    MultipleEstimates { epsilon: f64 },
}

pub const DEFAULT_RELIABILITY: f64 = 1.5;
pub const DEFAULT_XI: f64 = 1e-8;
pub const DEFAULT_EPSILON: f64 = 1e-4;

impl LipschitzSpec {
    pub fn adaptive_global() -> Self {
        LipschitzSpec::AdaptiveGlobal {
            r: DEFAULT_RELIABILITY,
            xi: DEFAULT_XI,
        }
    }

    pub fn local_tuning() -> Self {
        LipschitzSpec::LocalTuning {
            r: DEFAULT_RELIABILITY,
            xi: DEFAULT_XI,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            LipschitzSpec::APriori { l } => {
                if !(l.is_finite() && l > 0.0) {
                    return input(format!("a priori Lipschitz constant must be positive and finite, got {l}"));
                }
            }
            LipschitzSpec::AdaptiveGlobal { r, xi } | LipschitzSpec::LocalTuning { r, xi } => {
                if !(r.is_finite() && r > 1.0) {
                    return input(format!("reliability factor must exceed 1, got {r}"));
                }
                if !(xi.is_finite() && xi > 0.0) {
                    return input(format!("slope floor must be positive, got {xi}"));
                }
            }
            LipschitzSpec::MultipleEstimates { epsilon } => {
                if !(epsilon.is_finite() && epsilon >= 0.0) {
                    return input(format!("epsilon must be nonnegative, got {epsilon}"));
                }
            }
        }
        Ok(())
    }
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Termination {
    MaxTrials,
    MaxIterations,
    CellVolume,
    BudgetExhausted,
    Halted,
    /// The selected cell could not be refined any further.
    Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverResult {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub trials_used: usize,
    /// Size of the final partition.
    pub hyperintervals_generated: usize,
    /// Every cell ever created, including subdivided parents.
    pub cells_created: usize,
    pub iterations: usize,
    pub termination: Termination,
    pub trial_history: Vec<Trial>,
}

impl SolverResult {
    pub(crate) fn from_history(
        history: Vec<Trial>,
        hyperintervals: usize,
        cells_created: usize,
        iterations: usize,
        termination: Termination,
    ) -> Self {
        let (best_point, best_value) = history
            .iter()
            .fold(None::<&Trial>, |acc, t| match acc {
                Some(b) if b.value <= t.value => Some(b),
                _ => Some(t),
            })
            .map_or((Vec::new(), f64::INFINITY), |t| (t.point.clone(), t.value));
        Self {
            best_point,
            best_value,
            trials_used: history.len(),
            hyperintervals_generated: hyperintervals,
            cells_created,
            iterations,
            termination,
            trial_history: history,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn domain_rejects_bad_bounds() {
        assert!(BoxDomain::new(vec![], vec![]).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![0.0]).is_err());
        assert!(BoxDomain::new(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(BoxDomain::new(vec![0.0], vec![f64::INFINITY]).is_err());
        let d = BoxDomain::new(vec![-1.0, 0.0], vec![1.0, 3.0]).unwrap();
        assert_eq!(d.dim(), 2);
        assert_eq!(d.volume(), 6.0);
    }

    #[test]
    fn objective_counts_and_enforces_budget() {
        let d = BoxDomain::unit(1).unwrap();
        let mut obj = Objective::new(d, |x| x[0] * 2.0).with_budget(2);
        assert_eq!(obj.evaluate(&[0.5]).unwrap(), 1.0);
        assert_eq!(obj.evaluate(&[0.25]).unwrap(), 0.5);
        assert_eq!(obj.evaluation_count(), 2);
        assert!(matches!(
            obj.evaluate(&[0.1]),
            Err(EvalError::BudgetExhausted { budget: 2 })
        ));
        assert_eq!(obj.evaluation_count(), 2);
        assert_eq!(obj.best().unwrap().value, 0.5);
    }

    #[test]
    fn objective_rejects_nonfinite_and_outside() {
        let d = BoxDomain::unit(1).unwrap();
        let mut obj = Objective::new(d, |x| if x[0] > 0.5 { f64::NAN } else { 0.0 });
        assert!(matches!(obj.evaluate(&[0.9]), Err(EvalError::NonFinite { .. })));
        assert!(matches!(obj.evaluate(&[1.5]), Err(EvalError::OutsideDomain { .. })));
        assert_eq!(obj.evaluation_count(), 1);
        assert!(obj.history().is_empty());
    }

    #[test]
    fn observer_halts_after_break() {
        let d = BoxDomain::unit(1).unwrap();
        let mut obj = Objective::new(d, |x| x[0]).with_observer(|k, _| {
            if k == 2 {
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        obj.evaluate(&[0.1]).unwrap();
        obj.evaluate(&[0.2]).unwrap();
        assert!(obj.is_halted());
        assert!(matches!(obj.evaluate(&[0.3]), Err(EvalError::Halted { trials: 2 })));
    }

    #[test]
    fn lipschitz_spec_validation() {
        assert!(LipschitzSpec::APriori { l: 0.0 }.validate().is_err());
        assert!(LipschitzSpec::APriori { l: f64::INFINITY }.validate().is_err());
        assert!(LipschitzSpec::AdaptiveGlobal { r: 1.0, xi: 1e-8 }.validate().is_err());
        assert!(LipschitzSpec::LocalTuning { r: 1.5, xi: 0.0 }.validate().is_err());
        assert!(LipschitzSpec::MultipleEstimates { epsilon: -1.0 }.validate().is_err());
        assert!(LipschitzSpec::adaptive_global().validate().is_ok());
    }

    #[test]
    fn unit_mapping_clamps() {
        let d = BoxDomain::new(vec![-1.0], vec![0.3]).unwrap();
        let x = d.from_unit(&[1.0]);
        assert!(d.contains(&x));
    }
}
