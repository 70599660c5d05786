//! Seeded synthetic data generators.
//!
//! These serve as ground-truth oracles: the linear-system generator builds
//! snapshots from a known propagator so DMD recovery can be checked against
//! the exact spectrum, and the seasonal generator produces monsoon-shaped
//! monthly series for the learning pipeline when no real data is present.

use chrono::{Datelike, Days, NaiveDate};
use faer::Mat;
use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{RaincastError, Result};
use crate::ingest::{DailyRecords, GridPoint, MonthlySeries, RainfallGrid, YearMonth};
use crate::preprocess::SnapshotMatrix;

/// Month axis origin assigned to synthetic series and grids.
pub const SYNTH_ORIGIN: YearMonth = YearMonth {
    year: 2000,
    month: 1,
};

/// Seasonal period in months.
pub const PERIOD: usize = 12;

/// A discrete linear system with a prescribed spectrum.
#[derive(Debug, Clone)]
pub struct LinearSystemSpec {
    /// Ambient state dimension (number of synthetic "grid points").
    pub dim: usize,
    /// Requested eigenvalues; must be closed under conjugation and have
    /// modulus at most 1.05.
    pub eigenvalues: Vec<Complex<f64>>,
    pub seed: u64,
    /// Number of snapshots to generate.
    pub snapshots: usize,
    /// Initial state, length `dim`. When fewer eigenvalues than dimensions
    /// are requested, it is projected onto the invariant subspace of the
    /// requested spectrum so the generated snapshots have exact rank.
    pub initial_state: Vec<f64>,
}

/// Ground-truth output of [`gen_linear_system`].
#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub snapshots: SnapshotMatrix,
    pub eigenvalues: Vec<Complex<f64>>,
    /// The exact propagator A with x_{t+1} = A x_t.
    pub propagator: Mat<f64>,
}

const CONJ_TOL: f64 = 1e-12;

fn check_conjugate_closed(eigenvalues: &[Complex<f64>]) -> Result<()> {
    let mut claimed = vec![false; eigenvalues.len()];
    for (i, ev) in eigenvalues.iter().enumerate() {
        if ev.im.abs() <= CONJ_TOL || claimed[i] {
            continue;
        }
        let partner = eigenvalues.iter().enumerate().position(|(j, other)| {
            j != i
                && !claimed[j]
                && (other.re - ev.re).abs() <= CONJ_TOL
                && (other.im + ev.im).abs() <= CONJ_TOL
        });
        match partner {
            Some(j) => {
                claimed[i] = true;
                claimed[j] = true;
            }
            None => {
                return Err(RaincastError::Param(format!(
                    "spectrum is not closed under conjugation: {ev} has no conjugate partner"
                )))
            }
        }
    }
    Ok(())
}

/// Build snapshots of x_{t+1} = A x_t where A realizes the requested
/// spectrum via an orthogonal change of basis.
pub fn gen_linear_system(spec: &LinearSystemSpec) -> Result<LinearSystem> {
    let n = spec.dim;
    let k = spec.eigenvalues.len();
    if n == 0 || k == 0 || k > n {
        return Err(RaincastError::Param(format!(
            "need 1 <= |spectrum| <= dim, got {k} eigenvalues for dimension {n}"
        )));
    }
    if spec.snapshots < 2 {
        return Err(RaincastError::Param(
            "need at least 2 snapshots".into(),
        ));
    }
    if spec.initial_state.len() != n {
        return Err(RaincastError::Shape {
            expected: format!("initial state of length {n}"),
            got: format!("length {}", spec.initial_state.len()),
        });
    }
    if let Some(ev) = spec.eigenvalues.iter().find(|ev| ev.norm() > 1.05) {
        return Err(RaincastError::Param(format!(
            "eigenvalue {ev} exceeds the modulus bound 1.05"
        )));
    }
    check_conjugate_closed(&spec.eigenvalues)?;

    // Real block-diagonal form: [a] for real eigenvalues, [[a, b], [-b, a]]
    // for each conjugate pair a +- bi.
    let mut block = Mat::<f64>::zeros(k, k);
    let mut used = vec![false; k];
    let mut cursor = 0usize;
    for i in 0..k {
        if used[i] {
            continue;
        }
        let ev = spec.eigenvalues[i];
        if ev.im.abs() <= CONJ_TOL {
            block[(cursor, cursor)] = ev.re;
            used[i] = true;
            cursor += 1;
        } else {
            let j = (0..k)
                .find(|&j| {
                    j != i
                        && !used[j]
                        && (spec.eigenvalues[j].re - ev.re).abs() <= CONJ_TOL
                        && (spec.eigenvalues[j].im + ev.im).abs() <= CONJ_TOL
                })
                .expect("conjugate closure already checked");
            let b = ev.im.abs();
            block[(cursor, cursor)] = ev.re;
            block[(cursor, cursor + 1)] = b;
            block[(cursor + 1, cursor)] = -b;
            block[(cursor + 1, cursor + 1)] = ev.re;
            used[i] = true;
            used[j] = true;
            cursor += 2;
        }
    }
    debug_assert_eq!(cursor, k);

    // Orthonormal frame from a seeded Gaussian matrix; with k == n this is
    // an orthogonal similarity, with k < n an isometric embedding whose
    // complement carries zero dynamics.
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let gauss = Mat::from_fn(n, k, |_, _| rng.sample::<f64, _>(StandardNormal));
    let frame = gauss.qr().compute_thin_Q();
    let propagator = &frame * &block * frame.transpose();

    // Project the initial state onto range(frame): x0 = Q Q^T x0_given.
    let x0_given = Mat::from_fn(n, 1, |i, _| spec.initial_state[i]);
    let x0 = &frame * (frame.transpose() * &x0_given);

    let mut data = Mat::<f64>::zeros(n, spec.snapshots);
    let mut state = x0;
    for t in 0..spec.snapshots {
        for i in 0..n {
            data[(i, t)] = state[(i, 0)];
        }
        if t + 1 < spec.snapshots {
            state = &propagator * &state;
        }
    }

    let mut months = Vec::with_capacity(spec.snapshots);
    let mut ym = SYNTH_ORIGIN;
    for _ in 0..spec.snapshots {
        months.push(ym);
        ym = ym.succ();
    }
    let points = (0..n).map(|i| GridPoint::new(i as f64, 0.0)).collect();

    Ok(LinearSystem {
        snapshots: SnapshotMatrix {
            data,
            points,
            months,
        },
        eigenvalues: spec.eigenvalues.clone(),
        propagator,
    })
}

/// Monsoon-shaped monthly rainfall: a squared-rectified sine (sharp wet
/// season, long dry season) plus optional trend and seeded Gaussian noise,
/// clamped at zero.
#[derive(Debug, Clone)]
pub struct SeasonalSpec {
    /// Peak of the seasonal signal, mm/day.
    pub amplitude: f64,
    /// Phase offset in months.
    pub phase: f64,
    /// Standard deviation of the additive noise.
    pub noise_sigma: f64,
    /// Linear trend per month.
    pub trend: f64,
    /// Series length in months; at least two periods.
    pub length: usize,
    pub seed: u64,
}

impl Default for SeasonalSpec {
    fn default() -> Self {
        Self {
            amplitude: 10.0,
            phase: 0.0,
            noise_sigma: 0.0,
            trend: 0.0,
            length: 480,
            seed: 0,
        }
    }
}

/// Generate the seasonal monthly series described by `spec`.
pub fn gen_seasonal(spec: &SeasonalSpec) -> Result<MonthlySeries> {
    if spec.length < 2 * PERIOD {
        return Err(RaincastError::Param(format!(
            "seasonal series needs at least {} months, got {}",
            2 * PERIOD,
            spec.length
        )));
    }
    if spec.noise_sigma < 0.0 {
        return Err(RaincastError::Param(format!(
            "noise sigma must be non-negative, got {}",
            spec.noise_sigma
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut values = Vec::with_capacity(spec.length);
    let mut months = Vec::with_capacity(spec.length);
    let mut ym = SYNTH_ORIGIN;
    for t in 0..spec.length {
        let arg = 2.0 * std::f64::consts::PI * (t as f64 + spec.phase) / PERIOD as f64;
        let seasonal = spec.amplitude * arg.sin().max(0.0).powi(2);
        let noise: f64 = if spec.noise_sigma > 0.0 {
            spec.noise_sigma * rng.sample::<f64, _>(StandardNormal)
        } else {
            0.0
        };
        values.push((seasonal + spec.trend * t as f64 + noise).max(0.0));
        months.push(ym);
        ym = ym.succ();
    }
    Ok(MonthlySeries { months, values })
}

/// A multi-point rainfall grid of seasonal series, one per grid point, with
/// deterministic per-point amplitude/phase variation.
pub fn seasonal_grid(points: &[GridPoint], spec: &SeasonalSpec) -> Result<RainfallGrid> {
    if points.is_empty() {
        return Err(RaincastError::Param("need at least one grid point".into()));
    }
    let mut months = Vec::new();
    let mut values = Vec::with_capacity(points.len());
    for (i, _) in points.iter().enumerate() {
        let local = SeasonalSpec {
            amplitude: spec.amplitude * (1.0 + 0.2 * ((i as f64 * 0.7).sin())),
            phase: spec.phase + 0.3 * ((i % 5) as f64 - 2.0) / 2.0,
            seed: spec.seed.wrapping_add(i as u64),
            ..spec.clone()
        };
        let series = gen_seasonal(&local)?;
        if months.is_empty() {
            months = series.months;
        }
        values.push(series.values);
    }
    Ok(RainfallGrid {
        points: points.to_vec(),
        months,
        values,
    })
}

/// Expand a monthly series at one point into daily records where every day
/// of a month carries that month's mean, so re-aggregation is exact. Used
/// for end-to-end pipeline tests against the daily CSV boundary.
pub fn daily_from_monthly(series: &MonthlySeries, point: GridPoint) -> Result<DailyRecords> {
    if series.months.is_empty() {
        return Err(RaincastError::Structure("empty series".into()));
    }
    let mut dates = Vec::new();
    let mut values = Vec::new();
    for (ym, &v) in series.months.iter().zip(&series.values) {
        let first = NaiveDate::from_ymd_opt(ym.year, ym.month, 1).ok_or_else(|| {
            RaincastError::Structure(format!("bad month {ym}"))
        })?;
        let mut day = first;
        while day.month() == ym.month {
            dates.push(day);
            values.push(v);
            day = match day.checked_add_days(Days::new(1)) {
                Some(d) => d,
                None => break,
            };
        }
    }
    Ok(DailyRecords {
        points: vec![point],
        dates,
        values: vec![values],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::monthly_average;

    #[test]
    fn constant_system_from_unit_eigenvalue() {
        let spec = LinearSystemSpec {
            dim: 1,
            eigenvalues: vec![Complex::new(1.0, 0.0)],
            seed: 3,
            snapshots: 10,
            initial_state: vec![4.0],
        };
        let system = gen_linear_system(&spec).unwrap();
        for t in 0..10 {
            assert!((system.snapshots.data[(0, t)].abs() - 4.0).abs() < 1e-12);
        }
    }

    #[test]
    fn geometric_decay_scalar_system() {
        let spec = LinearSystemSpec {
            dim: 1,
            eigenvalues: vec![Complex::new(0.5, 0.0)],
            seed: 0,
            snapshots: 5,
            initial_state: vec![8.0],
        };
        let system = gen_linear_system(&spec).unwrap();
        let series: Vec<f64> = (0..5).map(|t| system.snapshots.data[(0, t)]).collect();
        // 1x1 orthogonal frame is +-1, so the series is exactly 8,4,2,1,0.5
        // up to a global sign.
        let sign = series[0].signum();
        let expected = [8.0, 4.0, 2.0, 1.0, 0.5];
        for (got, want) in series.iter().zip(expected) {
            assert!((got - sign * want).abs() < 1e-12);
        }
    }

    #[test]
    fn shift_identity_holds_by_construction() {
        let spec = LinearSystemSpec {
            dim: 6,
            eigenvalues: vec![
                Complex::new(0.95 * (std::f64::consts::PI / 6.0).cos(), 0.95 * (std::f64::consts::PI / 6.0).sin()),
                Complex::new(0.95 * (std::f64::consts::PI / 6.0).cos(), -0.95 * (std::f64::consts::PI / 6.0).sin()),
                Complex::new(0.8, 0.0),
                Complex::new(0.6, 0.0),
            ],
            seed: 7,
            snapshots: 40,
            initial_state: vec![1.0, -0.5, 2.0, 0.25, -1.5, 0.75],
        };
        let system = gen_linear_system(&spec).unwrap();
        let x = &system.snapshots.data;
        let m = x.ncols();
        let x1 = x.submatrix(0, 0, x.nrows(), m - 1);
        let x2 = x.submatrix(0, 1, x.nrows(), m - 1);
        let resid = x2 - &system.propagator * x1;
        let mut frob = 0.0;
        for i in 0..resid.nrows() {
            for j in 0..resid.ncols() {
                frob += resid[(i, j)] * resid[(i, j)];
            }
        }
        assert!(frob.sqrt() < 1e-10);
    }

    #[test]
    fn spec_validation_errors() {
        let base = LinearSystemSpec {
            dim: 2,
            eigenvalues: vec![Complex::new(1.2, 0.0)],
            seed: 0,
            snapshots: 4,
            initial_state: vec![1.0, 1.0],
        };
        // Modulus bound 1.05.
        assert!(matches!(
            gen_linear_system(&base),
            Err(RaincastError::Param(_))
        ));
        // Initial state length.
        let bad_state = LinearSystemSpec {
            eigenvalues: vec![Complex::new(0.5, 0.0)],
            initial_state: vec![1.0],
            ..base
        };
        assert!(matches!(
            gen_linear_system(&bad_state),
            Err(RaincastError::Shape { .. })
        ));

        // Seasonal: too short and negative noise.
        assert!(matches!(
            gen_seasonal(&SeasonalSpec {
                length: 23,
                ..SeasonalSpec::default()
            }),
            Err(RaincastError::Param(_))
        ));
        assert!(matches!(
            gen_seasonal(&SeasonalSpec {
                noise_sigma: -1.0,
                ..SeasonalSpec::default()
            }),
            Err(RaincastError::Param(_))
        ));
    }

    #[test]
    fn unpaired_complex_eigenvalue_rejected() {
        let spec = LinearSystemSpec {
            dim: 2,
            eigenvalues: vec![Complex::new(0.5, 0.3), Complex::new(0.5, 0.2)],
            seed: 0,
            snapshots: 4,
            initial_state: vec![1.0, 1.0],
        };
        assert!(matches!(
            gen_linear_system(&spec),
            Err(RaincastError::Param(_))
        ));
    }

    #[test]
    fn same_seed_same_output() {
        let spec = LinearSystemSpec {
            dim: 4,
            eigenvalues: vec![Complex::new(0.9, 0.0), Complex::new(0.7, 0.0)],
            seed: 11,
            snapshots: 12,
            initial_state: vec![1.0, 2.0, 3.0, 4.0],
        };
        let a = gen_linear_system(&spec).unwrap();
        let b = gen_linear_system(&spec).unwrap();
        for i in 0..4 {
            for j in 0..12 {
                assert_eq!(a.snapshots.data[(i, j)], b.snapshots.data[(i, j)]);
            }
        }

        let sspec = SeasonalSpec {
            noise_sigma: 1.0,
            length: 48,
            seed: 5,
            ..SeasonalSpec::default()
        };
        assert_eq!(
            gen_seasonal(&sspec).unwrap().values,
            gen_seasonal(&sspec).unwrap().values
        );
    }

    #[test]
    fn noiseless_seasonal_is_periodic_with_peak_amplitude() {
        let spec = SeasonalSpec {
            amplitude: 10.0,
            length: 48,
            ..SeasonalSpec::default()
        };
        let series = gen_seasonal(&spec).unwrap();
        for t in 0..36 {
            assert!((series.values[t] - series.values[t + PERIOD]).abs() < 1e-12);
        }
        let max = series.values.iter().cloned().fold(0.0, f64::max);
        assert!((max - 10.0).abs() < 1e-12);
    }

    #[test]
    fn noise_bias_matches_monte_carlo_oracle() {
        // The final clamp at zero rectifies noise during dry months, so the
        // long-run mean sits above the noiseless baseline. With roughly 7
        // of 12 months at zero signal the oracle bias is near
        // (7/12) * sigma / sqrt(2*pi) ~ 0.23 * sigma.
        let baseline = gen_seasonal(&SeasonalSpec {
            length: 120,
            ..SeasonalSpec::default()
        })
        .unwrap();
        let baseline_mean: f64 =
            baseline.values.iter().sum::<f64>() / baseline.values.len() as f64;

        let mut diffs = Vec::new();
        for seed in 0..20 {
            let noisy = gen_seasonal(&SeasonalSpec {
                noise_sigma: 1.0,
                length: 120,
                seed,
                ..SeasonalSpec::default()
            })
            .unwrap();
            let mean: f64 = noisy.values.iter().sum::<f64>() / noisy.values.len() as f64;
            diffs.push(mean - baseline_mean);
        }
        let avg_bias: f64 = diffs.iter().sum::<f64>() / diffs.len() as f64;
        let oracle = 7.0 / 12.0 / (2.0 * std::f64::consts::PI).sqrt();
        assert!(
            (avg_bias - oracle).abs() < 0.05,
            "clamp bias {avg_bias} differs from oracle {oracle}"
        );
    }

    #[test]
    fn daily_expansion_reaggregates_exactly() {
        let series = gen_seasonal(&SeasonalSpec {
            length: 24,
            ..SeasonalSpec::default()
        })
        .unwrap();
        let point = GridPoint::new(26.0, 92.0);
        let daily = daily_from_monthly(&series, point).unwrap();
        let grid = monthly_average(&daily).unwrap();
        assert_eq!(grid.months, series.months);
        for (got, want) in grid.values[0].iter().zip(&series.values) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn seasonal_grid_has_consistent_axes() {
        let points = [GridPoint::new(24.0, 91.0), GridPoint::new(25.0, 92.0)];
        let grid = seasonal_grid(&points, &SeasonalSpec {
            length: 36,
            ..SeasonalSpec::default()
        })
        .unwrap();
        grid.validate().unwrap();
        assert_eq!(grid.n_points(), 2);
        assert_eq!(grid.n_months(), 36);
        assert_ne!(grid.values[0], grid.values[1]);
    }
}
