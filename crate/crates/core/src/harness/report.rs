use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::stats::{
    binomial_se, bound_luxemburg, bound_mean_square, bound_tail_pinelis, fit_rate, luxemburg_estimate, quantile,
    RateFit, SigmaTau,
};
use crate::error::{invalid, Result, SaaError};
use crate::stochastic::derive_seed;

/// Quantiles of the pooled errors at which exceedance is tabulated.
pub const EXCEEDANCE_QUANTILES: [f64; 3] = [0.5, 0.75, 0.9];

pub const CSV_HEADER: &str = "N,replication,seed,error,kkt_residual,iterations";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub n: usize,
    /// One-based.
    pub replication: usize,
    pub seed: u64,
    /// `‖u* - u_N*‖_{L²}`
    pub error: f64,
    pub kkt_residual: f64,
    pub iterations: usize,
    /// `‖∇F_N(u*) - ∇F(u*)‖_{L²}`, when computed.
    pub gradient_deviation: Option<f64>,
}

/// Seed of replication `r` at sample size `N`.
pub fn replication_seed(base_seed: u64, n: usize, replication: usize) -> u64 {
    derive_seed(base_seed, &[n as u64, replication as u64])
}

/// Runs `solve_one(N, r, seed)` for every `N` in the grid and `r = 1..=R`
/// in parallel; records come back ordered by `(N, r)`. The first failure in
/// that order is returned with its coordinates.
pub fn replicate<F>(n_grid: &[usize], replications: usize, base_seed: u64, solve_one: F) -> Result<Vec<ReplicationRecord>>
where
    F: Fn(usize, usize, u64) -> Result<ReplicationRecord> + Sync,
{
    if n_grid.is_empty() || n_grid.contains(&0) {
        return Err(invalid("N grid must be nonempty with positive entries"));
    }
    if replications == 0 {
        return Err(invalid("need at least one replication"));
    }
    let tasks: Vec<(usize, usize)> = n_grid
        .iter()
        .flat_map(|&n| (1..=replications).map(move |r| (n, r)))
        .collect();
    let results: Vec<Result<ReplicationRecord>> = tasks
        .par_iter()
        .map(|&(n, r)| {
            solve_one(n, r, replication_seed(base_seed, n, r)).map_err(|e| SaaError::Replication {
                n,
                replication: r,
                source: Box::new(e),
            })
        })
        .collect();
    results.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSizeStatistics {
    pub n: usize,
    pub mean_error: f64,
    pub mean_square_error: f64,
    pub luxemburg: f64,
    pub max_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceedanceRow {
    pub n: usize,
    pub epsilon: f64,
    pub empirical: f64,
    pub bound: f64,
    pub binomial_se: f64,
}

impl ExceedanceRow {
    pub fn dominated(&self) -> bool {
        self.empirical <= self.bound + 3.0 * self.binomial_se
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub alpha: f64,
    pub sigma_hat: f64,
    pub tau_hat: f64,
    pub deviation_samples: usize,
    pub mean_square_bound: Vec<f64>,
    pub luxemburg_bound: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailExperimentReport {
    pub n_grid: Vec<usize>,
    pub replications: usize,
    pub base_seed: u64,
    pub spec_digest: String,
    pub version: String,
    pub per_n: Vec<SampleSizeStatistics>,
    pub mean_fit: Option<RateFit>,
    pub luxemburg_fit: Option<RateFit>,
    pub bounds: Option<BoundSummary>,
    pub exceedance: Vec<ExceedanceRow>,
    /// Raw records; written to CSV rather than the JSON summary.
    #[serde(skip)]
    pub records: Vec<ReplicationRecord>,
}

impl TailExperimentReport {
    pub fn build(
        n_grid: &[usize],
        replications: usize,
        base_seed: u64,
        spec_digest: String,
        records: Vec<ReplicationRecord>,
    ) -> Result<Self> {
        let mut per_n = Vec::with_capacity(n_grid.len());
        for &n in n_grid {
            let errors: Vec<f64> = records.iter().filter(|r| r.n == n).map(|r| r.error).collect();
            if errors.is_empty() {
                return Err(invalid(format!("no records for N = {n}")));
            }
            let m = errors.len() as f64;
            per_n.push(SampleSizeStatistics {
                n,
                mean_error: errors.iter().sum::<f64>() / m,
                mean_square_error: errors.iter().map(|e| e * e).sum::<f64>() / m,
                luxemburg: luxemburg_estimate(&errors)?,
                max_error: errors.iter().copied().fold(0.0, f64::max),
            });
        }
        let fit = |values: Vec<f64>| {
            if n_grid.len() >= 2 && values.iter().all(|v| *v > 0.0) {
                fit_rate(n_grid, &values).ok()
            } else {
                None
            }
        };
        let mean_fit = fit(per_n.iter().map(|s| s.mean_error).collect());
        let luxemburg_fit = fit(per_n.iter().map(|s| s.luxemburg).collect());
        Ok(Self {
            n_grid: n_grid.to_vec(),
            replications,
            base_seed,
            spec_digest,
            version: env!("CARGO_PKG_VERSION").to_string(),
            per_n,
            mean_fit,
            luxemburg_fit,
            bounds: None,
            exceedance: Vec::new(),
            records,
        })
    }

    /// Adds the a-priori bounds with `σ̂`, `τ̂` and the exceedance table on the
    /// pooled-error quantile grid.
    pub fn attach_bounds(&mut self, alpha: f64, st: &SigmaTau) {
        let mean_square_bound = self.n_grid.iter().map(|&n| bound_mean_square(alpha, st.sigma_hat, n)).collect();
        let luxemburg_bound = self.n_grid.iter().map(|&n| bound_luxemburg(alpha, st.tau_hat, n)).collect();
        self.bounds = Some(BoundSummary {
            alpha,
            sigma_hat: st.sigma_hat,
            tau_hat: st.tau_hat,
            deviation_samples: st.samples,
            mean_square_bound,
            luxemburg_bound,
        });
        let pooled: Vec<f64> = self.records.iter().map(|r| r.error).collect();
        self.exceedance.clear();
        for q in EXCEEDANCE_QUANTILES {
            let eps = quantile(&pooled, q);
            for &n in &self.n_grid {
                let errors: Vec<f64> = self.records.iter().filter(|r| r.n == n).map(|r| r.error).collect();
                let p = errors.iter().filter(|&&e| e >= eps).count() as f64 / errors.len() as f64;
                self.exceedance.push(ExceedanceRow {
                    n,
                    epsilon: eps,
                    empirical: p,
                    bound: bound_tail_pinelis(alpha, st.tau_hat, n, eps),
                    binomial_se: binomial_se(p, errors.len()),
                });
            }
        }
    }

    pub fn errors_for(&self, n: usize) -> Vec<f64> {
        self.records.iter().filter(|r| r.n == n).map(|r| r.error).collect()
    }

    pub fn write_errors_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        write_errors_csv(&self.records, out)
    }
}

/// Floats carry 17 significant digits, so the file round-trips exactly.
pub fn write_errors_csv<W: Write>(records: &[ReplicationRecord], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{:.16e},{:.16e},{}",
            r.n, r.replication, r.seed, r.error, r.kkt_residual, r.iterations
        )?;
    }
    Ok(())
}

/// Hex SHA-256 of the JSON serialization of `value`.
pub fn json_digest<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value).map_err(|e| invalid(format!("cannot serialize for digest: {e}")))?;
    Ok(Sha256::digest(&bytes).iter().map(|b| format!("{b:02x}")).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(n: usize, r: usize, error: f64) -> ReplicationRecord {
        ReplicationRecord {
            n,
            replication: r,
            seed: replication_seed(1, n, r),
            error,
            kkt_residual: 0.0,
            iterations: 0,
            gradient_deviation: None,
        }
    }

    #[test]
    fn single_replication_single_error() {
        let recs = replicate(&[1], 1, 9, |n, r, _| Ok(record(n, r, 0.5))).unwrap();
        let report = TailExperimentReport::build(&[1], 1, 9, String::new(), recs).unwrap();
        assert_eq!(report.records.len(), 1);
        assert!(report.mean_fit.is_none());
    }

    #[test]
    fn records_are_ordered_and_failures_carry_coordinates() {
        let recs = replicate(&[4, 2], 3, 0, |n, r, _| Ok(record(n, r, 1.0))).unwrap();
        let coords: Vec<(usize, usize)> = recs.iter().map(|r| (r.n, r.replication)).collect();
        assert_eq!(coords, vec![(4, 1), (4, 2), (4, 3), (2, 1), (2, 2), (2, 3)]);
        let err = replicate(&[2, 4], 3, 0, |n, r, _| {
            if r >= 2 {
                Err(invalid("boom"))
            } else {
                Ok(record(n, r, 1.0))
            }
        })
        .unwrap_err();
        assert!(matches!(err, SaaError::Replication { n: 2, replication: 2, .. }));
    }

    #[test]
    fn exact_rate_data_fits_minus_half() {
        let grid = [2, 4, 8, 16];
        let recs = replicate(&grid, 2, 0, |n, r, _| Ok(record(n, r, 1.0 / (n as f64).sqrt()))).unwrap();
        let report = TailExperimentReport::build(&grid, 2, 0, String::new(), recs).unwrap();
        assert!((report.mean_fit.unwrap().rate + 0.5).abs() < 1e-12);
        assert!((report.luxemburg_fit.unwrap().rate + 0.5).abs() < 1e-9);
    }

    #[test]
    fn csv_has_seventeen_digits() {
        let mut buf = Vec::new();
        write_errors_csv(&[record(2, 1, 0.1)], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        let field = line.split(',').nth(3).unwrap();
        assert_eq!(field, "1.0000000000000001e-1");
        assert_eq!(field.parse::<f64>().unwrap(), 0.1);
    }

    #[test]
    fn digest_is_stable() {
        assert_eq!(json_digest(&[1, 2]).unwrap(), json_digest(&[1, 2]).unwrap());
        assert_ne!(json_digest(&[1, 2]).unwrap(), json_digest(&[2, 1]).unwrap());
    }
}
