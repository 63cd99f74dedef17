//! Lipschitz lower-bounding functions built from cones at evaluated points.

use crate::error::{input, Error, Result};
use crate::problem::{euclidean, Trial};

fn check_constant(l: f64) -> Result<()> {
    if !(l.is_finite() && l > 0.0) {
        return input(format!("Lipschitz constant must be positive and finite, got {l}"));
    }
    Ok(())
}

/// `F(x) = max_i { z_i - L * |x - x_i| }`.
pub fn minorant_value(trials: &[Trial], l: f64, x: &[f64]) -> Result<f64> {
    if trials.is_empty() {
        return Err(Error::Domain("minorant needs at least one trial".into()));
    }
    check_constant(l)?;
    if x.iter().any(|v| !v.is_finite()) {
        return input("non-finite evaluation point");
    }
    let mut best = f64::NEG_INFINITY;
    for t in trials {
        if t.point.len() != x.len() {
            return input("trial dimension does not match evaluation point");
        }
        if !t.value.is_finite() || t.point.iter().any(|v| !v.is_finite()) {
            return input("non-finite trial");
        }
        best = best.max(t.value - l * euclidean(&t.point, x));
    }
    Ok(best)
}

/// Lowest point of the cone pair spanned by two neighbouring samples:
/// returns `(x_hat, value)`.
pub(crate) fn pair_minimum(x0: f64, z0: f64, x1: f64, z1: f64, l: f64) -> (f64, f64) {
    let x_hat = 0.5 * (x0 + x1) - (z1 - z0) / (2.0 * l);
    let value = 0.5 * (z0 + z1) - l * (x1 - x0) / 2.0;
    (x_hat, value)
}

/// Global minimum of the univariate minorant over `[a, b]`.
///
/// Trials must be sorted by abscissa and must include both endpoints. The
/// pairwise candidates are exact when `L` bounds every adjacent slope.
pub fn minorant_minimum_1d(trials: &[Trial], l: f64, interval: (f64, f64)) -> Result<(f64, f64)> {
    check_constant(l)?;
    let (a, b) = interval;
    if trials.len() < 2 {
        return input("need at least the two endpoint trials");
    }
    if trials.iter().any(|t| t.point.len() != 1) {
        return input("univariate minorant expects scalar trial points");
    }
    if trials.windows(2).any(|w| w[0].point[0] >= w[1].point[0]) {
        return input("trials must be strictly sorted by abscissa");
    }
    if trials[0].point[0] != a || trials[trials.len() - 1].point[0] != b {
        return input("endpoint trials missing");
    }
    let mut best = (f64::NAN, f64::INFINITY);
    for w in trials.windows(2) {
        let cand = pair_minimum(w[0].point[0], w[0].value, w[1].point[0], w[1].value, l);
        if cand.1 < best.1 {
            best = cand;
        }
    }
    Ok(best)
}

/// Lower bound of the two-cone minorant along a diagonal of the given length.
pub fn diagonal_lower_bound(z_a: f64, z_b: f64, diag_length: f64, l: f64) -> Result<f64> {
    check_constant(l)?;
    if !(diag_length.is_finite() && diag_length > 0.0) {
        return input(format!("diagonal length must be positive, got {diag_length}"));
    }
    Ok(0.5 * (z_a + z_b) - l * diag_length / 2.0)
}

/// First pair `(i, j)`, `i < j`, whose values differ by more than `L` times their distance.
pub fn lipschitz_violation_witness(trials: &[Trial], l: f64) -> Option<(usize, usize)> {
    for i in 0..trials.len() {
        for j in i + 1..trials.len() {
            let gap = (trials[i].value - trials[j].value).abs();
            if gap > l * euclidean(&trials[i].point, &trials[j].point) {
                return Some((i, j));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t(x: f64, z: f64) -> Trial {
        Trial::at(x, z)
    }

    /// Dense-grid minimum of the minorant, independent of the closed form.
    fn grid_min(trials: &[Trial], l: f64, a: f64, b: f64, n: usize) -> (f64, f64) {
        (0..=n)
            .map(|k| a + (b - a) * k as f64 / n as f64)
            .map(|x| (x, minorant_value(trials, l, &[x]).unwrap()))
            .fold((f64::NAN, f64::INFINITY), |acc, p| if p.1 < acc.1 { p } else { acc })
    }

    #[test]
    fn value_examples() {
        let tr = [t(0.0, 1.0), t(1.0, 0.0)];
        assert_eq!(minorant_value(&tr, 2.0, &[0.5]).unwrap(), 0.0);
        assert_eq!(minorant_value(&[t(0.3, 7.0)], 123.0, &[0.3]).unwrap(), 7.0);
        let sym = [t(0.0, 0.0), t(1.0, 0.0)];
        assert_eq!(minorant_value(&sym, 1.0, &[0.5]).unwrap(), -0.5);
        let (_, g) = grid_min(&sym, 1.0, 0.0, 1.0, 10_000);
        assert!((g + 0.5).abs() < 1e-12);
    }

    #[test]
    fn value_errors() {
        assert!(matches!(minorant_value(&[], 1.0, &[0.0]), Err(Error::Domain(_))));
        assert!(matches!(minorant_value(&[t(0.0, 0.0)], 0.0, &[0.0]), Err(Error::Input(_))));
        assert!(matches!(
            minorant_value(&[t(0.0, 0.0)], 1.0, &[f64::NAN]),
            Err(Error::Input(_))
        ));
        assert!(matches!(
            minorant_value(&[t(0.0, f64::INFINITY)], 1.0, &[0.0]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn minimum_1d_examples_match_grid() {
        let tr = [t(0.0, 1.0), t(1.0, 0.0)];
        let (x, v) = minorant_minimum_1d(&tr, 2.0, (0.0, 1.0)).unwrap();
        assert_eq!((x, v), (0.75, -0.5));
        let (gx, gv) = grid_min(&tr, 2.0, 0.0, 1.0, 100_000);
        assert!((gx - 0.75).abs() < 1e-4 && (gv - v).abs() < 1e-6);

        let sym = [t(0.0, 0.0), t(1.0, 0.0)];
        assert_eq!(minorant_minimum_1d(&sym, 1.0, (0.0, 1.0)).unwrap(), (0.5, -0.5));
        for l in [0.1, 1.0, 42.0] {
            let c = [t(0.0, 3.0), t(1.0, 3.0)];
            assert_eq!(minorant_minimum_1d(&c, l, (0.0, 1.0)).unwrap().0, 0.5);
        }
    }

    #[test]
    fn minimum_1d_errors() {
        let tr = [t(1.0, 0.0), t(0.0, 1.0)];
        assert!(minorant_minimum_1d(&tr, 1.0, (0.0, 1.0)).is_err());
        let tr = [t(0.0, 0.0), t(1.0, 1.0)];
        assert!(minorant_minimum_1d(&tr, -1.0, (0.0, 1.0)).is_err());
        assert!(minorant_minimum_1d(&tr, 1.0, (0.0, 2.0)).is_err());
    }

    #[test]
    fn diagonal_bound_examples() {
        assert_eq!(diagonal_lower_bound(1.0, 0.0, 1.0, 2.0).unwrap(), -0.5);
        assert_eq!(diagonal_lower_bound(2.5, 2.5, 3.0, 0.5).unwrap(), 2.5 - 0.75);
        assert_eq!(diagonal_lower_bound(0.0, 0.0, 2.0, 0.5).unwrap(), -0.5);
        assert!(diagonal_lower_bound(0.0, 0.0, 0.0, 1.0).is_err());
        assert!(diagonal_lower_bound(0.0, 0.0, 1.0, 0.0).is_err());
        // grid cross-check along the diagonal parametrised by arc length
        let tr = [t(0.0, 1.0), t(1.0, 0.0)];
        let (_, g) = grid_min(&tr, 2.0, 0.0, 1.0, 100_000);
        assert!((g - diagonal_lower_bound(1.0, 0.0, 1.0, 2.0).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn violation_witness_examples() {
        let tr = [t(0.0, 0.0), t(1.0, 10.0)];
        assert_eq!(lipschitz_violation_witness(&tr, 1.0), Some((0, 1)));
        assert_eq!(lipschitz_violation_witness(&tr, 10.0), None);
        assert_eq!(lipschitz_violation_witness(&[t(0.0, 5.0)], 0.1), None);
    }
}
