//! EKF over the four electrode states.

use nalgebra::{Matrix4, RowVector4, Vector4};

use crate::discretize::DiscreteModel;
use crate::error::{Error, Result};
use crate::filters::config::{FilterConfig, JacobianMode};
use crate::filters::jacobian::{voltage_jacobian_fd, voltage_jacobian_states, FD_STEP};
use crate::model::{model_input, CellParameters, StateVector, TemperatureAdjustedParams};

#[derive(Debug, Clone, PartialEq)]
pub struct StatePrediction {
    pub x: StateVector,
    pub p: Matrix4<f64>,
    /// Model voltage at the predicted state and the present current.
    pub v_spm: f64,
    /// `∂V/∂χ` at the predicted state.
    pub h: RowVector4<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateUpdate {
    pub x: StateVector,
    pub p: Matrix4<f64>,
    pub innovation: f64,
    pub innovation_var: f64,
    pub gated: bool,
}

/// Time update with the previous current, then the voltage prediction with
/// the present one. `prev_current = None` marks the first sample, where the
/// initial estimate already is the prior.
#[allow(clippy::too_many_arguments)]
pub fn state_predict(
    x: &StateVector,
    p: &Matrix4<f64>,
    prev_current: Option<f64>,
    current: f64,
    model: &DiscreteModel,
    tp: &TemperatureAdjustedParams,
    params: &CellParameters,
    cfg: &FilterConfig,
) -> Result<StatePrediction> {
    let (x_prior, p_prior) = match prev_current {
        Some(i_prev) => {
            let xp = model.propagate(x, model_input(i_prev));
            let pp = model.a * p * model.a.transpose() + cfg.q_x;
            (xp, symmetrize(pp))
        }
        None => (*x, *p),
    };
    let (v_spm, h) = match cfg.jacobian {
        JacobianMode::Analytic => voltage_jacobian_states(&x_prior, current, model, tp, params)?,
        JacobianMode::FiniteDifference => {
            voltage_jacobian_fd(&x_prior, current, model, tp, params, FD_STEP)?
        }
    };
    Ok(StatePrediction {
        x: x_prior,
        p: p_prior,
        v_spm,
        h,
    })
}

/// Measurement update against `z` with the bias held at `theta_prev`.
/// The covariance uses the Joseph form.
pub fn state_update(
    pred: &StatePrediction,
    z: f64,
    theta_prev: f64,
    cfg: &FilterConfig,
    step: usize,
) -> Result<StateUpdate> {
    let h = &pred.h;
    let innovation = z - (pred.v_spm + theta_prev);
    let ph_t: Vector4<f64> = pred.p * h.transpose();
    let s = (h * ph_t)[0] + cfg.r_x;
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::NumericalFailure {
            step,
            reason: format!("state innovation variance {s} is not positive"),
        });
    }
    if !innovation.is_finite() {
        return Err(Error::NumericalFailure {
            step,
            reason: format!("non-finite state innovation {innovation}"),
        });
    }
    if cfg.gate_sigma.is_some_and(|n| innovation.abs() > n * s.sqrt()) {
        return Ok(StateUpdate {
            x: pred.x,
            p: pred.p,
            innovation,
            innovation_var: s,
            gated: true,
        });
    }
    let k = ph_t / s;
    let x = StateVector::from_vector(&(pred.x.to_vector() + k * innovation));
    let i_kh = Matrix4::identity() - k * h;
    let p = i_kh * pred.p * i_kh.transpose() + k * k.transpose() * cfg.r_x;
    Ok(StateUpdate {
        x,
        p: symmetrize(p),
        innovation,
        innovation_var: s,
        gated: false,
    })
}

fn symmetrize(p: Matrix4<f64>) -> Matrix4<f64> {
    (p + p.transpose()) * 0.5
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::model::ContinuousModel;

    fn ctx() -> (CellParameters, DiscreteModel, TemperatureAdjustedParams, FilterConfig) {
        let p = fixtures::synthetic_lfp_cell();
        let tp = p.arrhenius_adjust(298.15).unwrap();
        let dm = DiscreteModel::zoh(&ContinuousModel::build(&tp, &p), 1.0, 298.15).unwrap();
        let cfg = FilterConfig::for_cell(&p, 0.5);
        (p, dm, tp, cfg)
    }

    #[test]
    fn identity_propagation_without_noise() {
        let (p, mut dm, tp, mut cfg) = ctx();
        dm.a = Matrix4::identity();
        cfg.q_x = Matrix4::zeros();
        let x = StateVector { q1_p: 0.5, q2_p: 0.52, q1_n: 0.4, q2_n: 0.41 };
        let cov = Matrix4::from_diagonal(&Vector4::new(1e-4, 2e-4, 3e-4, 4e-4));
        let pred = state_predict(&x, &cov, Some(0.0), 0.0, &dm, &tp, &p, &cfg).unwrap();
        assert_eq!(pred.x, x);
        assert_eq!(pred.p, cov);
    }

    #[test]
    fn zero_covariance_stays_zero() {
        let (p, dm, tp, mut cfg) = ctx();
        cfg.q_x = Matrix4::zeros();
        let x = StateVector::relaxed(0.5, 0.4);
        let pred = state_predict(&x, &Matrix4::zeros(), Some(1.0), 1.0, &dm, &tp, &p, &cfg).unwrap();
        assert_eq!(pred.p, Matrix4::zeros());
    }

    #[test]
    fn zero_innovation_leaves_state() {
        let (p, dm, tp, cfg) = ctx();
        let x = StateVector::relaxed(0.5, 0.4);
        let pred = state_predict(&x, &cfg.p0_x, Some(1.0), 1.0, &dm, &tp, &p, &cfg).unwrap();
        let up = state_update(&pred, pred.v_spm + 0.003, 0.003, &cfg, 0).unwrap();
        assert_eq!(up.innovation, 0.0);
        assert_eq!(up.x, pred.x);
    }

    #[test]
    fn unobservable_direction_is_untouched() {
        let (_, _, _, cfg) = ctx();
        let pred = StatePrediction {
            x: StateVector::relaxed(0.5, 0.4),
            p: cfg.p0_x,
            v_spm: 3.3,
            h: RowVector4::zeros(),
        };
        let up = state_update(&pred, 3.4, 0.0, &cfg, 0).unwrap();
        assert_eq!(up.x, pred.x);
        assert_eq!(up.p, pred.p);
    }

    #[test]
    fn scalar_gain() {
        // single observed state: K = P / (P + R) = 4e-4 / 5e-4
        let (_, _, _, mut cfg) = ctx();
        cfg.r_x = 1e-4;
        cfg.gate_sigma = None;
        let mut p = Matrix4::zeros();
        p[(1, 1)] = 4e-4;
        let pred = StatePrediction {
            x: StateVector::default(),
            p,
            v_spm: 0.0,
            h: RowVector4::new(0.0, 1.0, 0.0, 0.0),
        };
        let up = state_update(&pred, 1.0, 0.0, &cfg, 0).unwrap();
        assert!((up.x.q2_p - 0.8).abs() < 1e-15);
        // Joseph: (1-K)² P + K² R = 0.04·4e-4 + 0.64·1e-4
        assert!((up.p[(1, 1)] - 8e-5).abs() < 1e-18);
    }

    #[test]
    fn gate_rejects_outlier() {
        let (_, _, _, mut cfg) = ctx();
        cfg.gate_sigma = Some(6.0);
        cfg.r_x = 1e-6;
        let pred = StatePrediction {
            x: StateVector::default(),
            p: Matrix4::zeros(),
            v_spm: 0.0,
            h: RowVector4::new(0.0, 1.0, 0.0, 0.0),
        };
        let up = state_update(&pred, 0.1, 0.0, &cfg, 0).unwrap();
        assert!(up.gated);
        assert_eq!(up.x, pred.x);
        let up = state_update(&pred, 0.001, 0.0, &cfg, 0).unwrap();
        assert!(!up.gated);
    }

    #[test]
    fn non_finite_measurement_fails() {
        let (_, _, _, cfg) = ctx();
        let pred = StatePrediction {
            x: StateVector::default(),
            p: Matrix4::zeros(),
            v_spm: 0.0,
            h: RowVector4::zeros(),
        };
        let err = state_update(&pred, f64::NAN, 0.0, &cfg, 17).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { step: 17, .. }));
    }
}
