//! Selection of cells that are optimal for some positive Lipschitz estimate.
//!
//! Each cell is reduced to a pair `(d, m)`: a size measure and a value. A cell
//! is potentially optimal when some `K > 0` makes `m - K d` the smallest lower
//! bound in the partition and also improves on the incumbent by the
//! `epsilon` margin. Those cells are the lower-right convex hull of the
//! point cloud, trimmed by the improvement test.

use std::collections::{BTreeMap, BTreeSet};

use crate::framework::{CellId, TotalF64};

/// Absolute floor of the improvement margin, used when `|f_best|` is tiny.
pub const IMPROVEMENT_FLOOR: f64 = 1e-8;

/// `f_best - max(eps |f_best|, 1e-8)`; no margin at all when `eps == 0`.
pub fn improvement_threshold(f_best: f64, epsilon: f64) -> f64 {
    if epsilon > 0.0 {
        f_best - (epsilon * f_best.abs()).max(IMPROVEMENT_FLOOR)
    } else {
        f_best
    }
}

/// One size class: all cells sharing the measure `d`, represented by the
/// smallest value `m` among them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Group {
    pub measure: f64,
    pub value: f64,
}

fn cross(o: Group, a: Group, b: Group) -> f64 {
    (a.measure - o.measure) * (b.value - o.value) - (a.value - o.value) * (b.measure - o.measure)
}

/// Indices of the potentially optimal groups.
///
/// `groups` must be sorted by strictly increasing positive measure.
pub fn select_groups(groups: &[Group], threshold: f64) -> Vec<usize> {
    if groups.is_empty() {
        return Vec::new();
    }
    debug_assert!(groups.windows(2).all(|w| w[0].measure < w[1].measure));
    // The lowest value anchors the hull; on ties the larger measure wins,
    // since the smaller one would need K <= 0.
    let start = (0..groups.len())
        .rev()
        .min_by(|&a, &b| groups[a].value.total_cmp(&groups[b].value))
        .expect("nonempty");

    let mut hull: Vec<usize> = Vec::new();
    for k in start..groups.len() {
        while hull.len() >= 2 {
            let h0 = groups[hull[hull.len() - 2]];
            let h1 = groups[hull[hull.len() - 1]];
            if cross(h0, h1, groups[k]) < 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(k);
    }

    let slope = |a: usize, b: usize| (groups[b].value - groups[a].value) / (groups[b].measure - groups[a].measure);
    let mut out = Vec::new();
    for (pos, &g) in hull.iter().enumerate() {
        let lo = if pos == 0 { 0.0 } else { slope(hull[pos - 1], g) };
        let hi = if pos + 1 == hull.len() {
            f64::INFINITY
        } else {
            slope(g, hull[pos + 1])
        };
        if hi <= 0.0 || lo > hi {
            continue;
        }
        let need = (groups[g].value - threshold) / groups[g].measure;
        if hi >= need {
            out.push(g);
        }
    }
    out
}

/// Potentially optimal members of a set of `(measure, value)` pairs.
///
/// Returns indices into `pairs` in ascending order. All members tied at
/// the minimum value of a selected size class are returned.
pub fn potentially_optimal_pairs(pairs: &[(f64, f64)], f_best: f64, epsilon: f64) -> Vec<usize> {
    if pairs.is_empty() {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&a, &b| {
        pairs[a]
            .0
            .total_cmp(&pairs[b].0)
            .then(pairs[a].1.total_cmp(&pairs[b].1))
            .then(a.cmp(&b))
    });
    let mut groups: Vec<Group> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for &i in &order {
        let (d, m) = pairs[i];
        match groups.last() {
            Some(g) if g.measure == d => {
                if m == g.value {
                    members.last_mut().expect("parallel").push(i);
                }
            }
            _ => {
                groups.push(Group { measure: d, value: m });
                members.push(vec![i]);
            }
        }
    }
    let threshold = improvement_threshold(f_best, epsilon);
    let mut out: Vec<usize> = select_groups(&groups, threshold)
        .into_iter()
        .flat_map(|g| members[g].iter().copied())
        .collect();
    out.sort_unstable();
    out
}

/// How many cells to take from a selected size class whose best value is
/// shared by several cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Multiplicity {
    /// Every cell tied at the class minimum.
    #[default]
    AllNondominated,
    /// Only the oldest of them.
    OnePerMeasure,
}

/// Live cells indexed by measure, then value, then id; keeps selection
/// proportional to the number of distinct measures.
#[derive(Debug, Clone, Default)]
pub struct SizeClasses {
    classes: BTreeMap<TotalF64, BTreeSet<(TotalF64, CellId)>>,
}

impl SizeClasses {
    pub fn insert(&mut self, measure: f64, value: f64, id: CellId) {
        self.classes
            .entry(TotalF64(measure))
            .or_default()
            .insert((TotalF64(value), id));
    }

    pub fn remove(&mut self, measure: f64, value: f64, id: CellId) {
        let key = TotalF64(measure);
        if let Some(c) = self.classes.get_mut(&key) {
            c.remove(&(TotalF64(value), id));
            if c.is_empty() {
                self.classes.remove(&key);
            }
        }
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Potentially optimal cells, by increasing measure. Cells for which
    /// `skip` holds are ignored.
    pub fn select(&self, threshold: f64, multiplicity: Multiplicity, skip: impl Fn(CellId) -> bool) -> Vec<CellId> {
        let mut groups = Vec::new();
        let mut heads = Vec::new();
        for (d, members) in &self.classes {
            let mut live = members.iter().filter(|(_, id)| !skip(*id));
            if let Some(&(m, id)) = live.next() {
                groups.push(Group { measure: d.0, value: m.0 });
                let mut ids = vec![id];
                if multiplicity == Multiplicity::AllNondominated {
                    ids.extend(live.take_while(|(v, _)| *v == m).map(|(_, i)| *i));
                }
                heads.push(ids);
            }
        }
        select_groups(&groups, threshold)
            .into_iter()
            .flat_map(|g| heads[g].iter().copied())
            .collect()
    }
}
