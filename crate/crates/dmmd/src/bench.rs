//! MMD²-versus-m curves and coreset size per threshold, for several
//! algorithms on one shared gram cache. Timing covers selection only.

use std::time::Instant;

use dmmd_core::selection::fit;
use dmmd_core::{Algorithm, Error, FitConfig, GramCache, NoClock, Result, StopReason};

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub algorithm: Algorithm,
    pub m: usize,
    pub label: String,
    pub mmd_sq: f64,
    /// Selection time from the start of the fit to the end of iteration `m`.
    pub seconds: f64,
}

#[derive(Debug, Clone, Default)]
pub struct CurveRun {
    pub records: Vec<BenchRecord>,
    /// Algorithms whose fit failed, with the error text.
    pub failures: Vec<(Algorithm, String)>,
}

fn warm_up(cache: &GramCache, algorithm: Algorithm) {
    let config = FitConfig::new(algorithm, f64::MIN_POSITIVE).with_max_exemplars(1);
    let _ = fit(cache, &config, &NoClock);
}

/// Fits every algorithm without a usable threshold until `max_m` exemplars or
/// `max_seconds`, one record per `(algorithm, m, dataset)`. A failing
/// algorithm is reported in `failures` and does not stop the others.
pub fn run_curves(cache: &GramCache, algorithms: &[Algorithm], max_m: usize, max_seconds: f64) -> Result<CurveRun> {
    if max_m == 0 {
        return Err(Error::InvalidConfig("max_m must be at least 1".into()));
    }
    let mut run = CurveRun::default();
    for &algorithm in algorithms {
        let config = FitConfig::new(algorithm, f64::MIN_POSITIVE)
            .with_max_exemplars(max_m)
            .with_max_seconds(max_seconds);
        config.validate()?;
        warm_up(cache, algorithm);
        let start = Instant::now();
        match fit(cache, &config, &start) {
            Ok(c) => {
                for (m, rec) in c.trace.iter().enumerate() {
                    for (label, &v) in c.labels.iter().zip(&rec.mmd_sq) {
                        run.records.push(BenchRecord {
                            algorithm,
                            m: m + 1,
                            label: label.clone(),
                            mmd_sq: v,
                            seconds: rec.elapsed_seconds,
                        });
                    }
                }
            }
            Err(e) => run.failures.push((algorithm, e.to_string())),
        }
    }
    Ok(run)
}

#[derive(Debug, Clone, PartialEq)]
pub enum SizeOutcome {
    Finished,
    /// The binding budget or exhaustion that stopped the fit short.
    DidNotFinish(StopReason),
    Failed(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SizeCell {
    pub algorithm: Algorithm,
    pub epsilon_sq: f64,
    /// Support size at the end of the fit.
    pub size: usize,
    pub outcome: SizeOutcome,
}

/// Coreset size each algorithm needs to satisfy each threshold, under the
/// given budgets.
pub fn size_to_threshold(
    cache: &GramCache,
    algorithms: &[Algorithm],
    epsilons: &[f64],
    max_m: usize,
    max_seconds: f64,
) -> Result<Vec<SizeCell>> {
    if let Some(e) = epsilons.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::InvalidConfig(format!("thresholds must be positive, got {e}")));
    }
    let mut cells = Vec::with_capacity(algorithms.len() * epsilons.len());
    for &algorithm in algorithms {
        warm_up(cache, algorithm);
        for &eps in epsilons {
            let config = FitConfig::new(algorithm, eps)
                .with_max_exemplars(max_m)
                .with_max_seconds(max_seconds);
            config.validate()?;
            let start = Instant::now();
            let cell = match fit(cache, &config, &start) {
                Ok(c) => SizeCell {
                    algorithm,
                    epsilon_sq: eps,
                    size: c.len(),
                    outcome: if c.satisfied {
                        SizeOutcome::Finished
                    } else {
                        SizeOutcome::DidNotFinish(c.stop)
                    },
                },
                Err(e) => SizeCell {
                    algorithm,
                    epsilon_sq: eps,
                    size: 0,
                    outcome: SizeOutcome::Failed(e.to_string()),
                },
            };
            cells.push(cell);
        }
    }
    Ok(cells)
}
