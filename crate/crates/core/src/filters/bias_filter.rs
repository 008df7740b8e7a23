//! Scalar EKF for the residual voltage bias.
//!
//! The bias is a random walk and enters the voltage observation additively,
//! so the observation Jacobian is exactly one.

use crate::discretize::DiscreteModel;
use crate::error::{Error, Result};
use crate::filters::config::FilterConfig;
use crate::model::{evaluate_voltage, model_input, CellParameters, StateVector, TemperatureAdjustedParams};

/// `∂z/∂θ`.
pub const BIAS_JACOBIAN: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasPrediction {
    pub theta: f64,
    pub p: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BiasUpdate {
    pub theta: f64,
    pub p: f64,
    pub innovation: f64,
    /// Model voltage at the state filter's posterior.
    pub v_spm: f64,
    pub gated: bool,
}

pub fn bias_predict(theta: f64, p_theta: f64, cfg: &FilterConfig) -> BiasPrediction {
    BiasPrediction {
        theta,
        p: p_theta + cfg.q_theta,
    }
}

/// Corrects the bias against the residual left by the state filter's posterior `x_post`.
#[allow(clippy::too_many_arguments)]
pub fn bias_update(
    pred: &BiasPrediction,
    x_post: &StateVector,
    model: &DiscreteModel,
    current: f64,
    z: f64,
    tp: &TemperatureAdjustedParams,
    params: &CellParameters,
    cfg: &FilterConfig,
    step: usize,
) -> Result<BiasUpdate> {
    let psi = model.output(x_post, model_input(current));
    let v_spm = evaluate_voltage(&psi, current, tp, params)?.voltage;
    let innovation = z - (v_spm + pred.theta);
    let h = BIAS_JACOBIAN;
    let s = h * pred.p * h + cfg.r_theta;
    if !(s.is_finite() && s > 0.0) || !innovation.is_finite() {
        return Err(Error::NumericalFailure {
            step,
            reason: format!("bias innovation {innovation} with variance {s}"),
        });
    }
    if cfg.gate_sigma.is_some_and(|n| innovation.abs() > n * s.sqrt()) {
        return Ok(BiasUpdate {
            theta: pred.theta,
            p: pred.p,
            innovation,
            v_spm,
            gated: true,
        });
    }
    let k = pred.p * h / s;
    let one_minus_kh = 1.0 - k * h;
    Ok(BiasUpdate {
        theta: pred.theta + k * innovation,
        p: one_minus_kh * pred.p * one_minus_kh + k * cfg.r_theta * k,
        innovation,
        v_spm,
        gated: false,
    })
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
    fn prediction_is_random_walk() {
        let (_, _, _, mut cfg) = ctx();
        cfg.q_theta = 0.0;
        assert_eq!(bias_predict(0.005, 1e-6, &cfg), BiasPrediction { theta: 0.005, p: 1e-6 });
        cfg.q_theta = 1e-8;
        let pred = bias_predict(0.005, 1e-6, &cfg);
        assert_eq!(pred.theta, 0.005);
        assert!((pred.p - 1.01e-6).abs() < 1e-21);
    }

    #[test]
    fn scalar_gain_and_zero_innovation() {
        let (p, dm, tp, mut cfg) = ctx();
        cfg.r_theta = 1e-4;
        let x = StateVector::relaxed(0.5, 0.4);
        let pred = BiasPrediction { theta: 0.01, p: 4e-4 };
        let psi = dm.output(&x, model_input(1.0));
        let v = evaluate_voltage(&psi, 1.0, &tp, &p).unwrap().voltage;

        let up = bias_update(&pred, &x, &dm, 1.0, v + 0.01, &tp, &p, &cfg, 0).unwrap();
        assert_eq!(up.theta, 0.01);

        let up = bias_update(&pred, &x, &dm, 1.0, v + 0.01 + 0.005, &tp, &p, &cfg, 0).unwrap();
        assert!((up.theta - (0.01 + 0.8 * 0.005)).abs() < 1e-12);
        // (1-K)² P + K² R with K = 0.8
        assert!((up.p - (0.04 * 4e-4 + 0.64 * 1e-4)).abs() < 1e-18);
    }

    #[test]
    fn jacobian_is_one_everywhere() {
        // the innovation moves one-for-one with θ regardless of state, current, temperature
        let (p, _, _, cfg) = ctx();
        for (t, i, soc) in [(263.15, 3.0, 0.2), (298.15, -1.0, 0.5), (318.15, 0.0, 0.9)] {
            let tp = p.arrhenius_adjust(t).unwrap();
            let dm = DiscreteModel::zoh(&ContinuousModel::build(&tp, &p), 1.0, t).unwrap();
            let x = crate::filters::soc::state_from_soc(soc, &p);
            let a = bias_update(&BiasPrediction { theta: 0.0, p: 0.0 }, &x, &dm, i, 3.3, &tp, &p, &cfg, 0).unwrap();
            let b = bias_update(&BiasPrediction { theta: 0.25, p: 0.0 }, &x, &dm, i, 3.3, &tp, &p, &cfg, 0).unwrap();
            assert!((a.innovation - b.innovation - 0.25).abs() < 1e-12);
        }
    }
}
