//! Truth simulation, synthetic cycles, ground truth and accuracy metrics.

pub mod compare;
pub mod cycle;
pub mod metrics;
pub mod profile;
pub mod simulate;

pub use compare::{
    compare, compare_batch, filter_metrics, run_filter, ComparisonReport, ComparisonRun, CompareOptions,
    EvaluationInput, Execution, FilterMetrics, RunFailure, Scenario,
};
pub use cycle::{DriveCycle, Sample};
pub use metrics::{coulomb_count, improvement_pct, max_abs, rmse, Integration, RmseAccumulator};
pub use profile::{gen_profile, ProfileKind, ProfileSpec, Template};
pub use simulate::{simulate_truth, true_soc, BiasSpec, SyntheticDataset};
