//! Exact Dynamic Mode Decomposition.
//!
//! Given snapshots X = [x_1 ... x_m], split X1 = [x_1 ... x_{m-1}] and
//! X2 = [x_2 ... x_m], take the rank-r SVD X1 ~ U S V^T, form the reduced
//! operator A~ = U^T X2 V S^{-1}, eigendecompose A~ W = W L, and build the
//! exact DMD modes Phi = X2 V S^{-1} W. Each mode column is normalized to
//! unit length; the scale moves into the amplitudes b, solved by least
//! squares against the first snapshot. Forecasting propagates the discrete
//! eigenvalues: x(t) ~ Re(Phi diag(lambda^t) b).

use std::fmt::Write as _;
use std::path::Path;

use faer::prelude::*;
use faer::{Mat, MatRef};
use num_complex::Complex;

use crate::error::{RaincastError, Result};
use crate::ingest::YearMonth;
use crate::preprocess::SnapshotMatrix;

type C64 = Complex<f64>;

/// Singular values below `sigma_1 * RANK_DEFICIENCY_TOL` inside the kept
/// rank are treated as zero and rejected.
const RANK_DEFICIENCY_TOL: f64 = 1e-13;

/// Thin SVD truncated to rank r: U (rows x r), descending singular values,
/// V (cols x r).
#[derive(Debug, Clone)]
pub struct SvdFactors {
    pub u: Mat<f64>,
    pub sigma: Vec<f64>,
    pub v: Mat<f64>,
}

/// Best rank-r factors of `x`; singular values sorted descending.
pub fn truncated_svd(x: MatRef<'_, f64>, rank: usize) -> Result<SvdFactors> {
    let max_rank = x.nrows().min(x.ncols());
    if rank == 0 || rank > max_rank {
        return Err(RaincastError::Rank {
            rank,
            max: max_rank,
        });
    }
    let svd = x
        .thin_svd()
        .map_err(|e| RaincastError::Structure(format!("SVD failed to converge: {e:?}")))?;
    let u = svd.U();
    let s = svd.S();
    let v = svd.V();
    Ok(SvdFactors {
        u: Mat::from_fn(x.nrows(), rank, |i, j| u[(i, j)]),
        sigma: (0..rank).map(|k| s[k]).collect(),
        v: Mat::from_fn(x.ncols(), rank, |i, j| v[(i, j)]),
    })
}

/// Smallest rank whose cumulative squared singular-value energy reaches
/// `threshold` (a fraction in (0, 1]).
pub fn rank_by_energy(sigma: &[f64], threshold: f64) -> Result<usize> {
    if sigma.is_empty() {
        return Err(RaincastError::EmptyInput("no singular values"));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(RaincastError::Param(format!(
            "energy threshold must be in (0, 1], got {threshold}"
        )));
    }
    let total: f64 = sigma.iter().map(|s| s * s).sum();
    if total == 0.0 {
        return Err(RaincastError::Param("all singular values are zero".into()));
    }
    let mut cumulative = 0.0;
    for (k, s) in sigma.iter().enumerate() {
        cumulative += s * s;
        if cumulative / total >= threshold {
            return Ok(k + 1);
        }
    }
    Ok(sigma.len())
}

/// A fitted exact-DMD model.
#[derive(Debug, Clone)]
pub struct DmdModel {
    /// Projection rank r.
    pub rank: usize,
    /// Exact DMD modes, n x r, unit-norm columns.
    pub modes: Mat<C64>,
    /// Discrete-time eigenvalues, ordered by descending |amplitude|.
    pub eigenvalues: Vec<C64>,
    /// Continuous exponents omega_k = ln(lambda_k) / dt (principal branch);
    /// kept for reporting, propagation uses the discrete eigenvalues.
    pub exponents: Vec<C64>,
    /// Mode amplitudes fitted to the first snapshot.
    pub amplitudes: Vec<C64>,
    /// Snapshot spacing in months.
    pub dt: f64,
    /// State dimension n.
    pub state_dim: usize,
    /// Number of snapshots the model was fitted on.
    pub snapshot_count: usize,
    /// First month of the fitted snapshot axis.
    pub origin: YearMonth,
}

/// Fit exact DMD at projection rank `rank`.
pub fn dmd_fit(snapshots: &SnapshotMatrix, rank: usize) -> Result<DmdModel> {
    let x = snapshots.data.as_ref();
    let n = x.nrows();
    let m = x.ncols();
    if m < 2 {
        return Err(RaincastError::Structure(format!(
            "need at least 2 snapshots, got {m}"
        )));
    }
    let max_rank = n.min(m - 1);
    if rank == 0 || rank > max_rank {
        return Err(RaincastError::Rank {
            rank,
            max: max_rank,
        });
    }

    let x1 = x.submatrix(0, 0, n, m - 1);
    let x2 = x.submatrix(0, 1, n, m - 1);

    let SvdFactors { u, sigma, v } = truncated_svd(x1, rank)?;
    let ratio = sigma[rank - 1] / sigma[0];
    let usable = ratio > RANK_DEFICIENCY_TOL; // false for NaN as well
    if !usable {
        return Err(RaincastError::IllConditioned { ratio });
    }

    // X2 V S^{-1}, shared by the reduced operator and the exact modes.
    let mut x2_v_sinv = x2 * &v;
    for j in 0..rank {
        let inv = 1.0 / sigma[j];
        for i in 0..n {
            x2_v_sinv[(i, j)] *= inv;
        }
    }
    let reduced = u.transpose() * &x2_v_sinv;

    let evd = reduced
        .eigen()
        .map_err(|e| RaincastError::Structure(format!("eigendecomposition failed: {e:?}")))?;
    let lambda: Vec<C64> = (0..rank).map(|k| evd.S()[k]).collect();
    let w = evd.U();

    // Exact modes Phi = X2 V S^{-1} W, columns normalized to unit length.
    let mut modes = Mat::<C64>::zeros(n, rank);
    for k in 0..rank {
        for i in 0..n {
            let mut acc = C64::new(0.0, 0.0);
            for j in 0..rank {
                acc += C64::new(x2_v_sinv[(i, j)], 0.0) * w[(j, k)];
            }
            modes[(i, k)] = acc;
        }
        let norm: f64 = (0..n).map(|i| modes[(i, k)].norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-12 {
            for i in 0..n {
                modes[(i, k)] /= norm;
            }
        } else {
            // Degenerate exact mode (lambda ~ 0): fall back to the
            // projected mode U w_k, which spans the same dynamics.
            let mut fallback_norm = 0.0;
            for i in 0..n {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..rank {
                    acc += C64::new(u[(i, j)], 0.0) * w[(j, k)];
                }
                modes[(i, k)] = acc;
                fallback_norm += acc.norm_sqr();
            }
            let fallback_norm = fallback_norm.sqrt();
            for i in 0..n {
                modes[(i, k)] /= fallback_norm;
            }
        }
    }

    // Amplitudes from the initial condition: least squares Phi b ~ x_1.
    let x_first = Mat::<C64>::from_fn(n, 1, |i, _| C64::new(x[(i, 0)], 0.0));
    let b = modes.qr().solve_lstsq(&x_first);
    let mut amplitudes: Vec<C64> = (0..rank).map(|k| b[(k, 0)]).collect();

    // Deterministic ordering: descending |b_k|, conjugate pairs kept
    // adjacent by the eigenvalue tie-break.
    let mut order: Vec<usize> = (0..rank).collect();
    order.sort_by(|&a, &b_| {
        amplitudes[b_]
            .norm()
            .total_cmp(&amplitudes[a].norm())
            .then(lambda[b_].re.total_cmp(&lambda[a].re))
            .then(lambda[b_].im.total_cmp(&lambda[a].im))
    });
    let eigenvalues: Vec<C64> = order.iter().map(|&k| lambda[k]).collect();
    amplitudes = order.iter().map(|&k| amplitudes[k]).collect();
    let modes = Mat::from_fn(n, rank, |i, k| modes[(i, order[k])]);

    let dt = 1.0;
    let exponents = eigenvalues.iter().map(|l| l.ln() / dt).collect();

    Ok(DmdModel {
        rank,
        modes,
        eigenvalues,
        exponents,
        amplitudes,
        dt,
        state_dim: n,
        snapshot_count: m,
        origin: snapshots.months.first().copied().unwrap_or(YearMonth::new(0, 1)),
    })
}

impl DmdModel {
    /// State at discrete time `t` (months since the first snapshot):
    /// Re(Phi diag(lambda^t) b).
    fn propagate(&self, t: usize) -> Vec<f64> {
        let weights: Vec<C64> = self
            .eigenvalues
            .iter()
            .zip(&self.amplitudes)
            .map(|(l, b)| l.powu(t as u32) * b)
            .collect();
        (0..self.state_dim)
            .map(|i| {
                (0..self.rank)
                    .map(|k| (self.modes[(i, k)] * weights[k]).re)
                    .sum()
            })
            .collect()
    }
}

/// Reconstruct the state at month index `t` of the fitted window. Indices
/// at or beyond the snapshot count extrapolate with the same formula.
pub fn dmd_reconstruct(model: &DmdModel, t: usize) -> Vec<f64> {
    model.propagate(t)
}

/// Forecast `steps` months past the fitted window. Column j (1-based) is
/// the state at month index m - 1 + j, i.e. the first column continues
/// directly after the last fitted snapshot. Outputs are the raw real parts;
/// rainfall non-negativity is applied by the reporting layer, not here.
pub fn dmd_forecast(model: &DmdModel, steps: usize) -> Result<Mat<f64>> {
    if steps == 0 {
        return Err(RaincastError::Param("forecast needs at least 1 step".into()));
    }
    let mut out = Mat::<f64>::zeros(model.state_dim, steps);
    for j in 0..steps {
        let column = model.propagate(model.snapshot_count + j);
        for i in 0..model.state_dim {
            out[(i, j)] = column[i];
        }
    }
    Ok(out)
}

fn fmt_complex(z: C64) -> String {
    let mut s = String::new();
    if z.im >= 0.0 {
        let _ = write!(s, "{}+{}i", z.re, z.im);
    } else {
        let _ = write!(s, "{}{}i", z.re, z.im);
    }
    s
}

fn parse_complex(s: &str) -> Option<C64> {
    let body = s.strip_suffix('i')?;
    // Split at the sign of the imaginary part, skipping exponent signs.
    let bytes = body.as_bytes();
    for pos in (1..bytes.len()).rev() {
        let c = bytes[pos] as char;
        if (c == '+' || c == '-') && !matches!(bytes[pos - 1] as char, 'e' | 'E') {
            let re: f64 = body[..pos].parse().ok()?;
            let im: f64 = body[pos..].parse().ok()?;
            return Some(C64::new(re, im));
        }
    }
    None
}

impl DmdModel {
    /// Serialize as a CSV bundle in `dir`: `header.txt` with the scalar
    /// metadata, plus `modes.csv`, `eigenvalues.csv`, `amplitudes.csv` with
    /// complex entries formatted `re+imi`.
    pub fn save(&self, dir: impl AsRef<Path>) -> Result<()> {
        let dir = dir.as_ref();
        std::fs::create_dir_all(dir)?;
        let header = format!(
            "state_dim = {}\nsnapshot_count = {}\nrank = {}\ndt_months = {}\norigin = {}\n",
            self.state_dim, self.snapshot_count, self.rank, self.dt, self.origin
        );
        std::fs::write(dir.join("header.txt"), header)?;

        let mut writer = csv::Writer::from_path(dir.join("modes.csv"))?;
        for i in 0..self.state_dim {
            let row: Vec<String> = (0..self.rank)
                .map(|k| fmt_complex(self.modes[(i, k)]))
                .collect();
            writer.write_record(&row)?;
        }
        writer.flush()?;

        for (name, values) in [
            ("eigenvalues.csv", &self.eigenvalues),
            ("amplitudes.csv", &self.amplitudes),
        ] {
            let mut writer = csv::Writer::from_path(dir.join(name))?;
            for z in values {
                writer.write_record([fmt_complex(*z)])?;
            }
            writer.flush()?;
        }
        Ok(())
    }

    /// Load a bundle written by [`DmdModel::save`].
    pub fn load(dir: impl AsRef<Path>) -> Result<DmdModel> {
        let dir = dir.as_ref();
        let header = std::fs::read_to_string(dir.join("header.txt"))?;
        let mut state_dim = None;
        let mut snapshot_count = None;
        let mut rank = None;
        let mut dt = None;
        let mut origin = None;
        for line in header.lines() {
            let Some((key, value)) = line.split_once('=') else {
                continue;
            };
            let (key, value) = (key.trim(), value.trim());
            match key {
                "state_dim" => state_dim = value.parse::<usize>().ok(),
                "snapshot_count" => snapshot_count = value.parse::<usize>().ok(),
                "rank" => rank = value.parse::<usize>().ok(),
                "dt_months" => dt = value.parse::<f64>().ok(),
                "origin" => origin = YearMonth::parse(value),
                _ => {}
            }
        }
        let bad = |what: &str| RaincastError::Structure(format!("model header missing {what}"));
        let state_dim = state_dim.ok_or_else(|| bad("state_dim"))?;
        let snapshot_count = snapshot_count.ok_or_else(|| bad("snapshot_count"))?;
        let rank = rank.ok_or_else(|| bad("rank"))?;
        let dt = dt.ok_or_else(|| bad("dt_months"))?;
        let origin = origin.ok_or_else(|| bad("origin"))?;

        let read_column = |name: &str| -> Result<Vec<C64>> {
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(false)
                .from_path(dir.join(name))?;
            let mut out = Vec::new();
            for record in reader.records() {
                let record = record?;
                let cell = record.get(0).unwrap_or_default();
                out.push(parse_complex(cell).ok_or_else(|| {
                    RaincastError::Structure(format!("bad complex value `{cell}` in {name}"))
                })?);
            }
            Ok(out)
        };
        let eigenvalues = read_column("eigenvalues.csv")?;
        let amplitudes = read_column("amplitudes.csv")?;
        if eigenvalues.len() != rank || amplitudes.len() != rank {
            return Err(RaincastError::Structure(
                "eigenvalue/amplitude count does not match rank".into(),
            ));
        }

        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .from_path(dir.join("modes.csv"))?;
        let mut rows: Vec<Vec<C64>> = Vec::new();
        for record in reader.records() {
            let record = record?;
            let row: Vec<C64> = record
                .iter()
                .map(|cell| {
                    parse_complex(cell).ok_or_else(|| {
                        RaincastError::Structure(format!("bad complex value `{cell}` in modes.csv"))
                    })
                })
                .collect::<Result<_>>()?;
            if row.len() != rank {
                return Err(RaincastError::Structure(format!(
                    "mode row has {} entries for rank {rank}",
                    row.len()
                )));
            }
            rows.push(row);
        }
        if rows.len() != state_dim {
            return Err(RaincastError::Structure(format!(
                "modes.csv has {} rows for state dimension {state_dim}",
                rows.len()
            )));
        }
        let modes = Mat::from_fn(state_dim, rank, |i, k| rows[i][k]);
        let exponents = eigenvalues.iter().map(|l| l.ln() / dt).collect();

        Ok(DmdModel {
            rank,
            modes,
            eigenvalues,
            exponents,
            amplitudes,
            dt,
            state_dim,
            snapshot_count,
            origin,
        })
    }
}
