//! State-of-charge estimators: the single EKF baseline and the residual-bias
//! compensated dual EKF, plus SOC reconstruction.

pub mod bias_filter;
pub mod config;
pub mod estimator;
pub mod jacobian;
pub mod soc;
pub mod state_filter;

pub use bias_filter::{bias_predict, bias_update, BiasPrediction, BiasUpdate, BIAS_JACOBIAN};
pub use config::{soc_covariance, soc_direction, soc_process_noise, FilterConfig, JacobianMode};
pub use estimator::{ekf_step, rbc_dekf_step, Estimator, FilterKind, FilterState, StepInput, StepOutput};
pub use jacobian::{voltage_jacobian_fd, voltage_jacobian_states};
pub use soc::{soc_from_state, state_from_soc, SocEstimate};
pub use state_filter::{state_predict, state_update, StatePrediction, StateUpdate};
