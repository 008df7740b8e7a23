//! The coupled residual-bias dual EKF and the single-EKF baseline.
//!
//! One sampling instant of the dual filter runs, in order:
//!
//! 1. state prediction and voltage prediction,
//! 2. state update against the measurement using the previous bias estimate,
//! 3. bias prediction and voltage prediction from the updated state,
//! 4. bias update.
//!
//! The baseline runs steps 1–2 only, with the bias pinned at zero.

use std::fmt;
use std::str::FromStr;

use nalgebra::Matrix4;

use crate::discretize::ModelCache;
use crate::error::{Error, Result};
use crate::filters::bias_filter::{bias_predict, bias_update};
use crate::filters::config::FilterConfig;
use crate::filters::soc::soc_from_state;
use crate::filters::state_filter::{state_predict, state_update};
use crate::model::{CellParameters, StateVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FilterKind {
    /// Single EKF over the electrochemical states.
    Ekf,
    /// State EKF plus scalar residual-bias EKF.
    RbcDekf,
}

impl fmt::Display for FilterKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FilterKind::Ekf => "ekf",
            FilterKind::RbcDekf => "rbc-dekf",
        })
    }
}

impl FromStr for FilterKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ekf" => Ok(FilterKind::Ekf),
            "rbc-dekf" | "rbc" | "dekf" => Ok(FilterKind::RbcDekf),
            other => Err(Error::param("filter", format!("unknown filter `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilterState {
    pub x_hat: StateVector,
    pub p_x: Matrix4<f64>,
    pub theta_hat: f64,
    pub p_theta: f64,
    pub last_v_pred: f64,
    pub last_innovation_x: f64,
    pub last_innovation_theta: f64,
    /// Current of the previous sample, used for the next time update.
    pub prev_current: Option<f64>,
    /// Number of samples processed.
    pub step: usize,
}

impl FilterState {
    pub fn initial(cfg: &FilterConfig) -> Self {
        Self {
            x_hat: cfg.x0,
            p_x: cfg.p0_x,
            theta_hat: cfg.theta0,
            p_theta: cfg.p0_theta,
            last_v_pred: f64::NAN,
            last_innovation_x: 0.0,
            last_innovation_theta: 0.0,
            prev_current: None,
            step: 0,
        }
    }
}

/// One sample of the input stream.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInput {
    /// Cell current, A, discharge positive.
    pub current: f64,
    /// Measured terminal voltage, V.
    pub voltage: f64,
    /// Cell temperature, K.
    pub temp: f64,
    /// Time since the previous sample, s.
    pub dt: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub step: usize,
    pub soc_cell: f64,
    pub soc_p: f64,
    pub soc_n: f64,
    pub soc_clamped: bool,
    pub theta_hat: f64,
    /// Model voltage at the posterior state plus the bias estimate.
    pub v_model: f64,
    /// Model voltage at the posterior state.
    pub v_spm: f64,
    /// Model voltage at the predicted state.
    pub v_pred: f64,
    pub x_hat: StateVector,
    pub p_x_diag: [f64; 4],
    pub p_theta: f64,
    pub innovation_x: f64,
    pub innovation_theta: f64,
    pub gated: bool,
}

/// Runs one filter over a stream of samples.
#[derive(Debug, Clone)]
pub struct Estimator {
    kind: FilterKind,
    params: CellParameters,
    cfg: FilterConfig,
    cache: ModelCache,
    state: FilterState,
}

impl Estimator {
    pub fn new(kind: FilterKind, params: CellParameters, cfg: FilterConfig) -> Result<Self> {
        params.validate()?;
        cfg.validate()?;
        let mut cfg = cfg;
        if kind == FilterKind::Ekf {
            cfg.theta0 = 0.0;
        }
        Ok(Self {
            kind,
            cache: ModelCache::new(cfg.rebuild_delta_t),
            state: FilterState::initial(&cfg),
            params,
            cfg,
        })
    }

    pub fn kind(&self) -> FilterKind {
        self.kind
    }

    pub fn state(&self) -> &FilterState {
        &self.state
    }

    pub fn config(&self) -> &FilterConfig {
        &self.cfg
    }

    pub fn params(&self) -> &CellParameters {
        &self.params
    }

    pub fn model_rebuilds(&self) -> usize {
        self.cache.rebuilds()
    }

    pub fn step(&mut self, input: &StepInput) -> Result<StepOutput> {
        let (state, out) = match self.kind {
            FilterKind::RbcDekf => {
                rbc_dekf_step(&self.state, input, &self.params, &self.cfg, &mut self.cache)?
            }
            FilterKind::Ekf => ekf_step(&self.state, input, &self.params, &self.cfg, &mut self.cache)?,
        };
        self.state = state;
        Ok(out)
    }

    pub fn run<'a>(&mut self, inputs: impl IntoIterator<Item = &'a StepInput>) -> Result<Vec<StepOutput>> {
        inputs.into_iter().map(|i| self.step(i)).collect()
    }
}

fn check_input(input: &StepInput, step: usize) -> Result<()> {
    let ok = input.current.is_finite()
        && input.voltage.is_finite()
        && input.temp.is_finite()
        && input.temp > 0.0
        && input.dt.is_finite()
        && input.dt > 0.0;
    if ok {
        Ok(())
    } else {
        Err(Error::NumericalFailure {
            step,
            reason: format!("invalid step input {input:?}"),
        })
    }
}

fn with_step(step: usize) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::Domain(reason) => Error::NumericalFailure { step, reason },
        other => other,
    }
}

/// One sampling instant of the dual filter.
pub fn rbc_dekf_step(
    s: &FilterState,
    input: &StepInput,
    params: &CellParameters,
    cfg: &FilterConfig,
    cache: &mut ModelCache,
) -> Result<(FilterState, StepOutput)> {
    coupled_step(s, input, params, cfg, cache, true)
}

/// One sampling instant of the baseline EKF: the state half of
/// [`rbc_dekf_step`] with the bias frozen at zero.
pub fn ekf_step(
    s: &FilterState,
    input: &StepInput,
    params: &CellParameters,
    cfg: &FilterConfig,
    cache: &mut ModelCache,
) -> Result<(FilterState, StepOutput)> {
    coupled_step(s, input, params, cfg, cache, false)
}

fn coupled_step(
    s: &FilterState,
    input: &StepInput,
    params: &CellParameters,
    cfg: &FilterConfig,
    cache: &mut ModelCache,
    with_bias: bool,
) -> Result<(FilterState, StepOutput)> {
    let k = s.step;
    check_input(input, k)?;
    let tp = params.arrhenius_adjust(input.temp).map_err(with_step(k))?;
    let model = cache.get(params, input.temp, input.dt).map_err(with_step(k))?;
    let theta_prev = if with_bias { s.theta_hat } else { 0.0 };

    // 1. state prediction with u_{k-1}, voltage prediction with u_k
    let pred = state_predict(&s.x_hat, &s.p_x, s.prev_current, input.current, model, &tp, params, cfg)
        .map_err(with_step(k))?;
    // 2. state update with the previous bias estimate
    let sx = state_update(&pred, input.voltage, theta_prev, cfg, k)?;
    if !sx.x.is_finite() {
        return Err(Error::NumericalFailure {
            step: k,
            reason: "state estimate became non-finite".into(),
        });
    }

    let (theta, p_theta, innovation_theta, v_spm, bias_gated) = if with_bias {
        // 3. bias prediction, voltage prediction from the updated state
        let bp = bias_predict(s.theta_hat, s.p_theta, cfg);
        // 4. bias update
        let bu = bias_update(&bp, &sx.x, model, input.current, input.voltage, &tp, params, cfg, k)
            .map_err(with_step(k))?;
        (bu.theta, bu.p, bu.innovation, bu.v_spm, bu.gated)
    } else {
        let psi = model.output(&sx.x, crate::model::model_input(input.current));
        let v = crate::model::evaluate_voltage(&psi, input.current, &tp, params)
            .map_err(with_step(k))?
            .voltage;
        (0.0, 0.0, 0.0, v, false)
    };

    if sx.gated || bias_gated {
        log::trace!("step {k}: innovation gated (state {}, bias {bias_gated})", sx.gated);
    }
    let soc = soc_from_state(&sx.x, params);
    let next = FilterState {
        x_hat: sx.x,
        p_x: sx.p,
        theta_hat: theta,
        p_theta,
        last_v_pred: pred.v_spm,
        last_innovation_x: sx.innovation,
        last_innovation_theta: innovation_theta,
        prev_current: Some(input.current),
        step: k + 1,
    };
    let out = StepOutput {
        step: k,
        soc_cell: soc.soc_cell,
        soc_p: soc.soc_p,
        soc_n: soc.soc_n,
        soc_clamped: soc.clamped,
        theta_hat: theta,
        v_model: v_spm + theta,
        v_spm,
        v_pred: pred.v_spm,
        x_hat: sx.x,
        p_x_diag: [sx.p[(0, 0)], sx.p[(1, 1)], sx.p[(2, 2)], sx.p[(3, 3)]],
        p_theta,
        innovation_x: sx.innovation,
        innovation_theta,
        gated: sx.gated || bias_gated,
    };
    Ok((next, out))
}
