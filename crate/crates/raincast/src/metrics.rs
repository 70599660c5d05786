//! Regression error metrics shared by the DMD and LSTM pipelines.

use faer::MatRef;

use crate::error::{RaincastError, Result};

/// Units attached to a metric value: raw rainfall or min-max normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Units {
    MmPerDay,
    Normalized,
}

impl std::fmt::Display for Units {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Units::MmPerDay => write!(f, "mm/day"),
            Units::Normalized => write!(f, "normalized"),
        }
    }
}

/// Pooled evaluation summary. `rmse >= mae` always holds.
#[derive(Debug, Clone, Copy)]
pub struct EvalReport {
    pub rmse: f64,
    pub mae: f64,
    pub n: usize,
    pub units: Units,
}

fn check_lengths(truth: &[f64], pred: &[f64]) -> Result<()> {
    if truth.len() != pred.len() {
        return Err(RaincastError::Shape {
            expected: format!("{} values", truth.len()),
            got: format!("{} values", pred.len()),
        });
    }
    if truth.is_empty() {
        return Err(RaincastError::EmptyInput("metric over zero samples"));
    }
    Ok(())
}

/// Root mean squared error: sqrt(mean((y - y_hat)^2)).
pub fn rmse(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_lengths(truth, pred)?;
    let mse = truth
        .iter()
        .zip(pred)
        .map(|(y, p)| (y - p) * (y - p))
        .sum::<f64>()
        / truth.len() as f64;
    Ok(mse.sqrt())
}

/// Mean absolute error: mean(|y - y_hat|).
pub fn mae(truth: &[f64], pred: &[f64]) -> Result<f64> {
    check_lengths(truth, pred)?;
    Ok(truth
        .iter()
        .zip(pred)
        .map(|(y, p)| (y - p).abs())
        .sum::<f64>()
        / truth.len() as f64)
}

/// Evaluate a grid forecast by pooling every (location, month) entry into
/// one flat residual vector.
pub fn evaluate_grid(truth: MatRef<'_, f64>, pred: MatRef<'_, f64>, units: Units) -> Result<EvalReport> {
    if truth.nrows() != pred.nrows() || truth.ncols() != pred.ncols() {
        return Err(RaincastError::Shape {
            expected: format!("{} x {}", truth.nrows(), truth.ncols()),
            got: format!("{} x {}", pred.nrows(), pred.ncols()),
        });
    }
    let flatten = |m: MatRef<'_, f64>| -> Vec<f64> {
        (0..m.nrows())
            .flat_map(|i| (0..m.ncols()).map(move |j| m[(i, j)]))
            .collect()
    };
    let t = flatten(truth);
    let p = flatten(pred);
    Ok(EvalReport {
        rmse: rmse(&t, &p)?,
        mae: mae(&t, &p)?,
        n: t.len(),
        units,
    })
}

/// Evaluate two flat series.
pub fn evaluate_series(truth: &[f64], pred: &[f64], units: Units) -> Result<EvalReport> {
    Ok(EvalReport {
        rmse: rmse(truth, pred)?,
        mae: mae(truth, pred)?,
        n: truth.len(),
        units,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use faer::Mat;
    use proptest::prelude::*;

    #[test]
    fn identical_vectors_give_zero() {
        let y = [1.0, 2.0, 3.0];
        assert_eq!(rmse(&y, &y).unwrap(), 0.0);
        assert_eq!(mae(&y, &y).unwrap(), 0.0);
    }

    #[test]
    fn known_residuals() {
        let y = [0.0, 0.0];
        let p = [3.0, 4.0];
        // rmse = sqrt((9 + 16) / 2), mae = (3 + 4) / 2
        assert!((rmse(&y, &p).unwrap() - (25.0f64 / 2.0).sqrt()).abs() < 1e-15);
        assert_eq!(mae(&y, &p).unwrap(), 3.5);
    }

    #[test]
    fn single_element() {
        assert_eq!(rmse(&[5.0], &[3.0]).unwrap(), 2.0);
        assert_eq!(mae(&[5.0], &[3.0]).unwrap(), 2.0);
    }

    #[test]
    fn length_mismatch_and_empty() {
        assert!(matches!(
            rmse(&[1.0], &[1.0, 2.0]),
            Err(RaincastError::Shape { .. })
        ));
        assert!(matches!(mae(&[], &[]), Err(RaincastError::EmptyInput(_))));
    }

    #[test]
    fn grid_report_pools_all_entries() {
        let truth = Mat::<f64>::zeros(3, 4);
        let pred = Mat::from_fn(3, 4, |_, _| 2.5);
        let report = evaluate_grid(truth.as_ref(), pred.as_ref(), Units::MmPerDay).unwrap();
        assert_eq!(report.n, 12);
        // Constant residual: mae == rmse == offset.
        assert_eq!(report.mae, 2.5);
        assert_eq!(report.rmse, 2.5);
    }

    #[test]
    fn grid_shape_mismatch() {
        let a = Mat::<f64>::zeros(2, 3);
        let b = Mat::<f64>::zeros(3, 2);
        assert!(matches!(
            evaluate_grid(a.as_ref(), b.as_ref(), Units::MmPerDay),
            Err(RaincastError::Shape { .. })
        ));
    }

    #[test]
    fn grid_matches_straight_loop_oracle() {
        let truth = Mat::from_fn(3, 4, |i, j| (i * 7 + j) as f64 * 0.37);
        let pred = Mat::from_fn(3, 4, |i, j| (i * 3 + j * 2) as f64 * 0.21);
        let report = evaluate_grid(truth.as_ref(), pred.as_ref(), Units::MmPerDay).unwrap();

        let mut sq = 0.0;
        let mut ab = 0.0;
        let mut n = 0usize;
        for i in 0..3 {
            for j in 0..4 {
                let d: f64 = truth[(i, j)] - pred[(i, j)];
                sq += d * d;
                ab += d.abs();
                n += 1;
            }
        }
        assert!((report.rmse - (sq / n as f64).sqrt()).abs() < 1e-12);
        assert!((report.mae - ab / n as f64).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn rmse_dominates_mae(
            y in proptest::collection::vec(-1e3f64..1e3, 1..50),
            noise in proptest::collection::vec(-1e3f64..1e3, 1..50),
        ) {
            let n = y.len().min(noise.len());
            let p: Vec<f64> = y[..n].iter().zip(&noise[..n]).map(|(a, b)| a + b).collect();
            prop_assert!(rmse(&y[..n], &p).unwrap() >= mae(&y[..n], &p).unwrap() - 1e-12);
        }

        #[test]
        fn translation_invariant_and_scale_equivariant(
            y in proptest::collection::vec(-100f64..100.0, 2..20),
            p in proptest::collection::vec(-100f64..100.0, 2..20),
            c in -50f64..50.0,
            alpha in -4f64..4.0,
        ) {
            let n = y.len().min(p.len());
            let (y, p) = (&y[..n], &p[..n]);
            let shift = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| x + c).collect() };
            let scale = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| alpha * x).collect() };

            let tol = 1e-9;
            prop_assert!((rmse(&shift(y), &shift(p)).unwrap() - rmse(y, p).unwrap()).abs() < tol);
            prop_assert!((mae(&shift(y), &shift(p)).unwrap() - mae(y, p).unwrap()).abs() < tol);
            prop_assert!((rmse(&scale(y), &scale(p)).unwrap() - alpha.abs() * rmse(y, p).unwrap()).abs() < tol);
            prop_assert!((mae(&scale(y), &scale(p)).unwrap() - alpha.abs() * mae(y, p).unwrap()).abs() < tol);
        }

        #[test]
        fn mae_is_symmetric(
            y in proptest::collection::vec(-1e3f64..1e3, 1..30),
            p in proptest::collection::vec(-1e3f64..1e3, 1..30),
        ) {
            let n = y.len().min(p.len());
            prop_assert_eq!(mae(&y[..n], &p[..n]).unwrap(), mae(&p[..n], &y[..n]).unwrap());
        }
    }
}
