//! Forward truth-model simulation with injected voltage bias and noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::discretize::ModelCache;
use crate::error::{Error, Result};
use crate::filters::state_from_soc;
use crate::harness::cycle::DriveCycle;
use crate::model::{evaluate_voltage, model_input, CellParameters, StateVector};

/// Additive voltage bias injected into the measurement, V.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum BiasSpec {
    #[default]
    None,
    Constant { volts: f64 },
    /// Linear from `start` at the first sample to `end` at the last.
    Ramp { start: f64, end: f64 },
    /// Piecewise-linear through `(t, volts)` knots, held flat outside them.
    Piecewise { knots: Vec<(f64, f64)> },
}

impl BiasSpec {
    pub fn at(&self, t: f64, t0: f64, t1: f64) -> f64 {
        match self {
            BiasSpec::None => 0.0,
            BiasSpec::Constant { volts } => *volts,
            BiasSpec::Ramp { start, end } => {
                let frac = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
                start + (end - start) * frac
            }
            BiasSpec::Piecewise { knots } => {
                let Some(first) = knots.first() else {
                    return 0.0;
                };
                if t <= first.0 {
                    return first.1;
                }
                for w in knots.windows(2) {
                    let ((ta, va), (tb, vb)) = (w[0], w[1]);
                    if t <= tb {
                        return va + (vb - va) * (t - ta) / (tb - ta);
                    }
                }
                knots[knots.len() - 1].1
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset {
    pub cycle: DriveCycle,
    pub v_true: Vec<f64>,
    /// `v_true + bias + noise`.
    pub v_meas: Vec<f64>,
    pub soc_true: Vec<f64>,
    pub bias: Vec<f64>,
    pub noise: Vec<f64>,
    pub noise_seed: u64,
    pub states: Vec<StateVector>,
}

/// Propagates the exact discrete model over `cycle` from a relaxed state at
/// `soc0`, recording the true and measured voltage and the true SOC.
pub fn simulate_truth(
    params: &CellParameters,
    cycle: &DriveCycle,
    soc0: f64,
    bias: &BiasSpec,
    noise_sigma: f64,
    seed: u64,
) -> Result<SyntheticDataset> {
    params.validate()?;
    if !(0.0..=1.0).contains(&soc0) {
        return Err(Error::param("soc0", format!("{soc0} not in [0, 1]")));
    }
    if !(noise_sigma.is_finite() && noise_sigma >= 0.0) {
        return Err(Error::param("noise_sigma", "must be finite and non-negative"));
    }
    let normal = Normal::new(0.0, noise_sigma).expect("validated sigma");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cache = ModelCache::new(0.0);
    let samples = cycle.samples();
    let (t0, t1) = (samples[0].t, samples[samples.len() - 1].t);
    let n = samples.len();

    let mut out = SyntheticDataset {
        cycle: cycle.clone(),
        v_true: Vec::with_capacity(n),
        v_meas: Vec::with_capacity(n),
        soc_true: Vec::with_capacity(n),
        bias: Vec::with_capacity(n),
        noise: Vec::with_capacity(n),
        noise_seed: seed,
        states: Vec::with_capacity(n),
    };
    let eps = params.clamp_eps;
    let mut x = state_from_soc(soc0, params);
    for (k, s) in samples.iter().enumerate() {
        let sim_err = |reason: String| Error::Simulation { sample: k, reason };
        let model = cache.get(params, s.temp, cycle.dt()).map_err(|e| sim_err(e.to_string()))?;
        if k > 0 {
            x = model.propagate(&x, model_input(samples[k - 1].current));
        }
        let psi = model.output(&x, model_input(s.current));
        for (name, c) in [("positive", psi.css_p), ("negative", psi.css_n)] {
            if !(c >= eps && c <= 1.0 - eps) {
                return Err(sim_err(format!(
                    "{name} surface concentration {c} left [{eps}, {}] (over-charge or over-discharge)",
                    1.0 - eps
                )));
            }
        }
        let tp = params.arrhenius_adjust(s.temp).map_err(|e| sim_err(e.to_string()))?;
        let v = evaluate_voltage(&psi, s.current, &tp, params)
            .map_err(|e| sim_err(e.to_string()))?
            .voltage;
        let b = bias.at(s.t, t0, t1);
        let noise = if noise_sigma > 0.0 { normal.sample(&mut rng) } else { 0.0 };
        out.v_true.push(v);
        out.bias.push(b);
        out.noise.push(noise);
        out.v_meas.push(v + b + noise);
        out.soc_true.push(true_soc(&x, params));
        out.states.push(x);
    }
    Ok(out)
}

/// Unclamped mean electrode SOC of a truth state.
pub fn true_soc(x: &StateVector, params: &CellParameters) -> f64 {
    let p = &params.positive;
    let n = &params.negative;
    0.5 * ((x.q1_p - p.c_min) / (p.c_max - p.c_min) + (x.q1_n - n.c_min) / (n.c_max - n.c_min))
}
