#![allow(dead_code)]

use lipgo::gkls::{gkls_minima, GklsFunction};
use lipgo::problem::euclidean;
use rayon::prelude::*;

/// Largest move of one descent step; well below the smallest ball radius of
/// the classes under test, so a step cannot hop across a basin.
const MAX_STEP: f64 = 2e-3;

/// Projected steepest descent with Armijo backtracking, stopped when no step
/// decreases the value any more.
pub fn descend(f: &GklsFunction, mut x: Vec<f64>) -> Vec<f64> {
    let (lo, hi) = (f.domain.lower(), f.domain.upper());
    let mut fx = f.value(&x);
    for _ in 0..100_000 {
        let g = f.gradient_unchecked(&x);
        let gn = g.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn < 1e-12 {
            break;
        }
        let mut t = MAX_STEP / gn;
        let mut accepted = None;
        while t * gn > 1e-15 {
            let y: Vec<f64> = (0..x.len()).map(|j| (x[j] - t * g[j]).clamp(lo[j], hi[j])).collect();
            let fy = f.value(&y);
            let moved = euclidean(&x, &y);
            if fy < fx - 1e-4 * gn * moved {
                accepted = Some((y, fy, moved));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((y, fy, moved)) => {
                x = y;
                fx = fy;
                if moved < 1e-14 {
                    break;
                }
            }
            None => break,
        }
    }
    x
}

/// Outcome of descending from every node of a `side x side` grid.
pub struct Multistart {
    /// How many descents ended at each recorded minimum.
    pub hits: Vec<usize>,
    /// End points matching no recorded minimum.
    pub strays: Vec<Vec<f64>>,
}

pub fn multistart_2d(f: &GklsFunction, side: usize, tol: f64) -> Multistart {
    let (lo, hi) = (f.domain.lower().to_vec(), f.domain.upper().to_vec());
    let mins = gkls_minima(f);
    let ends: Vec<Vec<f64>> = (0..side * side)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / side, k % side);
            let x = vec![
                lo[0] + (hi[0] - lo[0]) * (a as f64 + 0.5) / side as f64,
                lo[1] + (hi[1] - lo[1]) * (b as f64 + 0.5) / side as f64,
            ];
            descend(f, x)
        })
        .collect();
    let mut out = Multistart { hits: vec![0; mins.len()], strays: Vec::new() };
    for end in ends {
        match mins.iter().position(|m| euclidean(&m.point, &end) <= tol) {
            Some(i) => out.hits[i] += 1,
            None => out.strays.push(end),
        }
    }
    out
}

/// Smallest value over the nodes of a `side x side` grid spanning the domain.
pub fn grid_minimum_2d(f: &GklsFunction, side: usize) -> f64 {
    let (lo, hi) = (f.domain.lower().to_vec(), f.domain.upper().to_vec());
    (0..side * side)
        .into_par_iter()
        .map(|k| {
            let (a, b) = (k / side, k % side);
            let x = [
                lo[0] + (hi[0] - lo[0]) * a as f64 / (side - 1) as f64,
                lo[1] + (hi[1] - lo[1]) * b as f64 / (side - 1) as f64,
            ];
            f.value(&x)
        })
        .reduce(|| f64::INFINITY, f64::min)
}
