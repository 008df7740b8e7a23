use nalgebra::{Matrix4, Vector4};

use crate::discretize::DEFAULT_REBUILD_DELTA_T;
use crate::error::{Error, Result};
use crate::filters::soc::state_from_soc;
use crate::model::{CellParameters, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum JacobianMode {
    #[default]
    Analytic,
    /// Central differences, for cross-checking the analytic path.
    FiniteDifference,
}

/// Noise covariances, initial conditions and options shared by both filters.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterConfig {
    /// State process-noise covariance.
    pub q_x: Matrix4<f64>,
    /// Voltage measurement-noise variance for the state filter, V².
    pub r_x: f64,
    /// Random-walk variance of the residual bias per step, V².
    pub q_theta: f64,
    /// Measurement variance seen by the bias filter, V².
    pub r_theta: f64,
    pub x0: StateVector,
    pub p0_x: Matrix4<f64>,
    pub theta0: f64,
    pub p0_theta: f64,
    pub jacobian: JacobianMode,
    /// Reject an update when `|y| > gate_sigma·√S`.
    pub gate_sigma: Option<f64>,
    /// Temperature drift (K) that triggers a rebuild of the discrete model.
    pub rebuild_delta_t: f64,
}

/// Default tuning, chosen on the bundled synthetic cell.
pub mod defaults {
    /// Initial SOC standard deviation.
    pub const INITIAL_SOC_STD: f64 = 0.05;
    /// Per-step SOC random-walk standard deviation.
    pub const PROCESS_SOC_STD: f64 = 5e-5;
    /// Independent per-state process noise, added on the diagonal.
    pub const PROCESS_STATE_VAR: f64 = 1e-12;
    /// State-filter measurement noise. Deliberately wider than the sensor
    /// noise: the state filter sees the bias estimate's error on top of it.
    pub const R_X: f64 = 0.06 * 0.06;
    pub const Q_THETA: f64 = (3e-3) * (3e-3);
    pub const R_THETA: f64 = (2e-3) * (2e-3);
    pub const P0_THETA: f64 = (10e-3) * (10e-3);
    /// Innovation gate, in innovation standard deviations.
    pub const GATE_SIGMA: f64 = 5.0;
}

/// Direction in state space along which a change of cell SOC moves every state.
pub fn soc_direction(params: &CellParameters) -> Vector4<f64> {
    let dp = params.positive.c_max - params.positive.c_min;
    let dn = params.negative.c_max - params.negative.c_min;
    Vector4::new(dp, dp, dn, dn)
}

/// Covariance of a state known only through an uncertain SOC: `σ² v vᵀ`.
pub fn soc_covariance(params: &CellParameters, soc_std: f64) -> Matrix4<f64> {
    let v = soc_direction(params);
    v * v.transpose() * (soc_std * soc_std)
}

/// Process noise of an SOC random walk with standard deviation `soc_std` per
/// step, plus a small independent term on every state.
pub fn soc_process_noise(params: &CellParameters, soc_std: f64) -> Matrix4<f64> {
    soc_covariance(params, soc_std) + Matrix4::identity() * defaults::PROCESS_STATE_VAR
}

impl FilterConfig {
    /// Default tuning with the state initialized at `initial_soc`.
    pub fn for_cell(params: &CellParameters, initial_soc: f64) -> Self {
        Self {
            q_x: soc_process_noise(params, defaults::PROCESS_SOC_STD),
            r_x: defaults::R_X,
            q_theta: defaults::Q_THETA,
            r_theta: defaults::R_THETA,
            x0: state_from_soc(initial_soc, params),
            p0_x: soc_covariance(params, defaults::INITIAL_SOC_STD),
            theta0: 0.0,
            p0_theta: defaults::P0_THETA,
            jacobian: JacobianMode::Analytic,
            gate_sigma: Some(defaults::GATE_SIGMA),
            rebuild_delta_t: DEFAULT_REBUILD_DELTA_T,
        }
    }

    /// Bias filter settings that leave θ̂ at zero forever.
    pub fn with_inert_bias(mut self) -> Self {
        self.q_theta = 0.0;
        self.p0_theta = 0.0;
        self.theta0 = 0.0;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_psd("state.process_noise", &self.q_x)?;
        check_psd("state.initial_covariance", &self.p0_x)?;
        if !(self.r_x.is_finite() && self.r_x > 0.0) {
            return Err(Error::param("state.measurement_noise", "must be positive"));
        }
        if !(self.r_theta.is_finite() && self.r_theta > 0.0) {
            return Err(Error::param("bias.measurement_noise", "must be positive"));
        }
        if !(self.q_theta.is_finite() && self.q_theta >= 0.0) {
            return Err(Error::param("bias.process_noise", "must be non-negative"));
        }
        if !(self.p0_theta.is_finite() && self.p0_theta >= 0.0) {
            return Err(Error::param("bias.initial_variance", "must be non-negative"));
        }
        if !self.theta0.is_finite() {
            return Err(Error::param("bias.initial", "must be finite"));
        }
        if !self.x0.is_finite() {
            return Err(Error::param("state.x0", "must be finite"));
        }
        if let Some(g) = self.gate_sigma {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::param("options.gate_sigma", "must be positive"));
            }
        }
        if !(self.rebuild_delta_t.is_finite() && self.rebuild_delta_t >= 0.0) {
            return Err(Error::param("options.rebuild_delta_t", "must be non-negative"));
        }
        Ok(())
    }
}

fn check_psd(key: &str, m: &Matrix4<f64>) -> Result<()> {
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::param(key, "non-finite entry"));
    }
    let scale = m.amax().max(f64::MIN_POSITIVE);
    if (m - m.transpose()).amax() > 1e-12 * scale {
        return Err(Error::param(key, "matrix is not symmetric"));
    }
    let min_eig = m.symmetric_eigenvalues().min();
    if min_eig < -1e-12 * scale {
        return Err(Error::param(
            key,
            format!("matrix is not positive semidefinite (min eigenvalue {min_eig:e})"),
        ));
    }
    Ok(())
}
