//! Side-by-side evaluation of the baseline EKF and the dual filter.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::filters::{Estimator, FilterConfig, FilterKind, StepOutput};
use crate::harness::cycle::DriveCycle;
use crate::harness::metrics::{improvement_pct, max_abs, rmse};
use crate::harness::simulate::SyntheticDataset;
use crate::model::CellParameters;

/// Fraction of leading samples treated as the convergence window.
pub const DEFAULT_CONVERGENCE_FRACTION: f64 = 0.05;

/// Borrowed view of what a comparison needs: inputs, measured voltage, reference SOC.
#[derive(Debug, Clone, Copy)]
pub struct EvaluationInput<'a> {
    pub cycle: &'a DriveCycle,
    pub v_meas: &'a [f64],
    pub soc_true: &'a [f64],
}

impl SyntheticDataset {
    pub fn as_input(&self) -> EvaluationInput<'_> {
        EvaluationInput {
            cycle: &self.cycle,
            v_meas: &self.v_meas,
            soc_true: &self.soc_true,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Execution {
    Sequential,
    /// Uses the rayon pool when the `parallel` feature is on; sequential otherwise.
    #[default]
    Parallel,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CompareOptions {
    /// Exclude the first `fraction` of samples from the headline metrics.
    pub exclude_convergence: Option<f64>,
    pub execution: Execution,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterMetrics {
    /// SOC RMSE against the reference, %.
    pub soc_rmse_pct: f64,
    /// RMSE of the filtered model voltage against the measurement, mV.
    pub v_rmse_mv: f64,
    pub max_abs_soc_err_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunFailure {
    pub filter: String,
    pub step: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub soc_rmse_ekf: f64,
    pub soc_rmse_rbc: f64,
    pub v_rmse_ekf: f64,
    pub v_rmse_rbc: f64,
    pub improvement_soc: f64,
    pub improvement_v: f64,
    pub max_abs_soc_error_ekf: f64,
    pub max_abs_soc_error_rbc: f64,
    pub samples: usize,
    /// Leading samples excluded from the headline metrics.
    pub excluded_samples: usize,
    /// Metrics after the default convergence window, for reference.
    pub post_convergence: Option<(FilterMetrics, FilterMetrics)>,
    pub failure: Option<RunFailure>,
}

impl ComparisonReport {
    pub fn failed(&self) -> bool {
        self.failure.is_some()
    }

    fn from_failure(samples: usize, failure: RunFailure) -> Self {
        Self {
            soc_rmse_ekf: f64::NAN,
            soc_rmse_rbc: f64::NAN,
            v_rmse_ekf: f64::NAN,
            v_rmse_rbc: f64::NAN,
            improvement_soc: f64::NAN,
            improvement_v: f64::NAN,
            max_abs_soc_error_ekf: f64::NAN,
            max_abs_soc_error_rbc: f64::NAN,
            samples,
            excluded_samples: 0,
            post_convergence: None,
            failure: Some(failure),
        }
    }
}

/// Both traces plus the report built from them.
#[derive(Debug, Clone)]
pub struct ComparisonRun {
    pub report: ComparisonReport,
    pub ekf: Vec<StepOutput>,
    pub rbc: Vec<StepOutput>,
}

/// Runs one filter over the evaluation input.
pub fn run_filter(
    kind: FilterKind,
    input: EvaluationInput<'_>,
    params: &CellParameters,
    cfg: &FilterConfig,
) -> Result<Vec<StepOutput>> {
    check_lengths(input)?;
    let mut est = Estimator::new(kind, params.clone(), cfg.clone())?;
    est.run(&input.cycle.step_inputs(input.v_meas))
}

fn check_lengths(input: EvaluationInput<'_>) -> Result<()> {
    let n = input.cycle.len();
    if input.v_meas.len() != n || input.soc_true.len() != n {
        return Err(Error::data(None, None, "voltage and reference SOC must match the cycle length"));
    }
    Ok(())
}

pub fn filter_metrics(trace: &[StepOutput], input: EvaluationInput<'_>, skip: usize) -> Result<FilterMetrics> {
    let soc_err: Vec<f64> = trace[skip..]
        .iter()
        .zip(&input.soc_true[skip..])
        .map(|(o, s)| o.soc_cell - s)
        .collect();
    let v_err: Vec<f64> = trace[skip..]
        .iter()
        .zip(&input.v_meas[skip..])
        .map(|(o, v)| o.v_model - v)
        .collect();
    Ok(FilterMetrics {
        soc_rmse_pct: 100.0 * rmse(&soc_err)?,
        v_rmse_mv: 1000.0 * rmse(&v_err)?,
        max_abs_soc_err_pct: 100.0 * max_abs(&soc_err),
    })
}

/// Runs both filters with identical state-filter settings and compares them.
///
/// A numerical failure in either filter yields a report marked failed rather
/// than an error; configuration and data errors are returned as errors.
pub fn compare(
    input: EvaluationInput<'_>,
    params: &CellParameters,
    cfg: &FilterConfig,
    opts: &CompareOptions,
) -> Result<ComparisonRun> {
    check_lengths(input)?;
    params.validate()?;
    cfg.validate()?;
    let n = input.cycle.len();
    let run = |kind| run_filter(kind, input, params, cfg).map_err(|e| (kind, e));
    let (ekf, rbc) = join(opts.execution, || run(FilterKind::Ekf), || run(FilterKind::RbcDekf));
    let (ekf, rbc) = match (ekf, rbc) {
        (Ok(e), Ok(r)) => (e, r),
        (Err((kind, e)), _) | (_, Err((kind, e))) => {
            return match e {
                Error::NumericalFailure { step, reason } => Ok(ComparisonRun {
                    report: ComparisonReport::from_failure(
                        n,
                        RunFailure { filter: kind.to_string(), step, reason },
                    ),
                    ekf: Vec::new(),
                    rbc: Vec::new(),
                }),
                other => Err(other),
            }
        }
    };

    let skip = opts
        .exclude_convergence
        .map(|f| ((f.clamp(0.0, 1.0) * n as f64).floor() as usize).min(n - 1))
        .unwrap_or(0);
    let me = filter_metrics(&ekf, input, skip)?;
    let mr = filter_metrics(&rbc, input, skip)?;
    let post_skip = ((DEFAULT_CONVERGENCE_FRACTION * n as f64).floor() as usize).min(n - 1);
    let post = (
        filter_metrics(&ekf, input, post_skip)?,
        filter_metrics(&rbc, input, post_skip)?,
    );
    let report = ComparisonReport {
        soc_rmse_ekf: me.soc_rmse_pct,
        soc_rmse_rbc: mr.soc_rmse_pct,
        v_rmse_ekf: me.v_rmse_mv,
        v_rmse_rbc: mr.v_rmse_mv,
        improvement_soc: improvement_pct(me.soc_rmse_pct, mr.soc_rmse_pct),
        improvement_v: improvement_pct(me.v_rmse_mv, mr.v_rmse_mv),
        max_abs_soc_error_ekf: me.max_abs_soc_err_pct,
        max_abs_soc_error_rbc: mr.max_abs_soc_err_pct,
        samples: n,
        excluded_samples: skip,
        post_convergence: Some(post),
        failure: None,
    };
    Ok(ComparisonRun { report, ekf, rbc })
}

/// A single comparison job for [`compare_batch`].
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub dataset: SyntheticDataset,
    pub params: CellParameters,
    pub cfg: FilterConfig,
}

/// Compares every scenario, in parallel when requested. Results keep input order.
pub fn compare_batch(
    scenarios: &[Scenario],
    opts: &CompareOptions,
) -> Vec<Result<ComparisonReport>> {
    let inner = CompareOptions {
        execution: Execution::Sequential,
        ..*opts
    };
    let one = |s: &Scenario| compare(s.dataset.as_input(), &s.params, &s.cfg, &inner).map(|r| r.report);
    map_slice(opts.execution, scenarios, one)
}

pub(crate) fn join<A, B, RA, RB>(execution: Execution, a: A, b: B) -> (RA, RB)
where
    A: FnOnce() -> RA + Send,
    B: FnOnce() -> RB + Send,
    RA: Send,
    RB: Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => rayon::join(a, b),
        _ => (a(), b()),
    }
}

pub(crate) fn map_slice<T, R, F>(execution: Execution, items: &[T], f: F) -> Vec<R>
where
    T: Sync,
    R: Send,
    F: Fn(&T) -> R + Sync + Send,
{
    match execution {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            items.par_iter().map(f).collect()
        }
        _ => items.iter().map(f).collect(),
    }
}
