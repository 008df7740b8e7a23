//! `synthetic:` input strings for the command line.
//!
//! Grammar: `synthetic[:key=value[,key=value...]]`. Unset keys take the
//! defaults of [`SyntheticInput::default`], a two-hour biased random walk.
//!
//! | key | meaning |
//! |-----|---------|
//! | `kind` | `random-walk`, `pulse` or `dst` |
//! | `duration`, `dt` | seconds |
//! | `temp_c` | constant temperature |
//! | `level`, `initial`, `step_std`, `reversion`, `max_abs` | random-walk shape, A |
//! | `amplitude`, `on`, `off` | pulse shape, A and s |
//! | `scale`, `segment`, `jitter` | template shape, A, s, A |
//! | `soc0` | true initial SOC |
//! | `bias_mv` | constant bias, or ramp start when `bias_end_mv` is set |
//! | `bias_end_mv` | ramp end |
//! | `noise_mv` | measurement noise standard deviation |

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::harness::{gen_profile, simulate_truth, BiasSpec, ProfileKind, ProfileSpec, SyntheticDataset, Template};
use crate::model::CellParameters;
use crate::model::constants::celsius_to_kelvin;

pub const SYNTHETIC_PREFIX: &str = "synthetic";

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticInput {
    pub profile: ProfileSpec,
    pub soc0: f64,
    pub bias: BiasSpec,
    /// Measurement noise standard deviation, V.
    pub noise_sigma: f64,
}

pub mod benchmark {
    //! The default biased-cycle scenario.
    pub const DURATION_S: f64 = 7200.0;
    pub const DT_S: f64 = 1.0;
    pub const TEMP_C: f64 = 25.0;
    /// Negative: the walk charges on average, from empty towards full.
    pub const LEVEL_A: f64 = -1.0;
    pub const STEP_STD_A: f64 = 0.3;
    pub const REVERSION: f64 = 0.05;
    pub const MAX_ABS_A: f64 = 4.0;
    pub const INITIAL_A: f64 = -1.0;
    pub const SOC0: f64 = 0.03;
    pub const BIAS_V: f64 = 0.030;
    pub const NOISE_V: f64 = 0.002;
    /// Offset of the filters' initial SOC from the truth.
    pub const INITIAL_SOC_ERROR: f64 = 0.05;
    /// The measurement noise stream is seeded with `seed + NOISE_SEED_OFFSET`
    /// so that it differs from the current profile's stream.
    pub const NOISE_SEED_OFFSET: u64 = 1000;
}

impl SyntheticInput {
    /// Generates the current profile and simulates the truth model over it.
    pub fn generate(&self, params: &CellParameters, seed: u64) -> Result<SyntheticDataset> {
        let cycle = gen_profile(&self.profile, seed)?;
        simulate_truth(
            params,
            &cycle,
            self.soc0,
            &self.bias,
            self.noise_sigma,
            seed.wrapping_add(benchmark::NOISE_SEED_OFFSET),
        )
    }
}

impl Default for SyntheticInput {
    fn default() -> Self {
        use benchmark::*;
        Self {
            profile: ProfileSpec {
                kind: ProfileKind::RandomWalk {
                    level: LEVEL_A,
                    step_std: STEP_STD_A,
                    reversion: REVERSION,
                    max_abs: MAX_ABS_A,
                    initial: Some(INITIAL_A),
                },
                duration_s: DURATION_S,
                dt_s: DT_S,
                temp_k: celsius_to_kelvin(TEMP_C),
            },
            soc0: SOC0,
            bias: BiasSpec::Constant { volts: BIAS_V },
            noise_sigma: NOISE_V,
        }
    }
}

/// True when `input` names a synthetic source rather than a file.
pub fn is_synthetic(input: &str) -> bool {
    input == SYNTHETIC_PREFIX || input.starts_with("synthetic:")
}

pub fn parse_synthetic(input: &str) -> Result<SyntheticInput> {
    let body = input
        .strip_prefix(SYNTHETIC_PREFIX)
        .ok_or_else(|| Error::param("input", "expected `synthetic[:key=value,...]`"))?;
    let body = match body.strip_prefix(':') {
        Some(b) => b,
        None if body.is_empty() => "",
        None => return Err(Error::param("input", "expected `synthetic[:key=value,...]`")),
    };
    let mut kv: BTreeMap<String, String> = BTreeMap::new();
    for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::param(part, "expected key=value"))?;
        if kv.insert(k.trim().to_owned(), v.trim().to_owned()).is_some() {
            return Err(Error::param(k.trim(), "given more than once"));
        }
    }

    let mut take_f = |key: &str, default: f64| -> Result<f64> {
        match kv.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::param(key, format!("cannot parse `{v}` as a number"))),
        }
    };
    let mut out = SyntheticInput::default();
    out.profile.duration_s = take_f("duration", out.profile.duration_s)?;
    out.profile.dt_s = take_f("dt", out.profile.dt_s)?;
    out.profile.temp_k = celsius_to_kelvin(take_f("temp_c", benchmark::TEMP_C)?);
    out.soc0 = take_f("soc0", out.soc0)?;
    out.noise_sigma = take_f("noise_mv", out.noise_sigma * 1e3)? * 1e-3;
    let bias_start = take_f("bias_mv", benchmark::BIAS_V * 1e3)? * 1e-3;
    let bias_end = take_f("bias_end_mv", f64::NAN)?;
    out.bias = if bias_end.is_nan() {
        if bias_start == 0.0 {
            BiasSpec::None
        } else {
            BiasSpec::Constant { volts: bias_start }
        }
    } else {
        BiasSpec::Ramp { start: bias_start, end: bias_end * 1e-3 }
    };

    let kind = kv.remove("kind").unwrap_or_else(|| "random-walk".to_owned());
    let mut take_f = |key: &str, default: f64| -> Result<f64> {
        match kv.remove(key) {
            None => Ok(default),
            Some(v) => v
                .parse::<f64>()
                .map_err(|_| Error::param(key, format!("cannot parse `{v}` as a number"))),
        }
    };
    out.profile.kind = match kind.as_str() {
        "random-walk" => ProfileKind::RandomWalk {
            level: take_f("level", benchmark::LEVEL_A)?,
            step_std: take_f("step_std", benchmark::STEP_STD_A)?,
            reversion: take_f("reversion", benchmark::REVERSION)?,
            max_abs: take_f("max_abs", benchmark::MAX_ABS_A)?,
            initial: Some(take_f("initial", benchmark::INITIAL_A)?),
        },
        "pulse" => ProfileKind::Pulse {
            amplitude: take_f("amplitude", 2.0)?,
            on_s: take_f("on", 60.0)?,
            off_s: take_f("off", 60.0)?,
        },
        "dst" => ProfileKind::ScaledTemplate {
            template: Template::DstLike,
            scale: take_f("scale", 4.0)?,
            segment_s: take_f("segment", 20.0)?,
            jitter_std: take_f("jitter", 0.0)?,
        },
        other => return Err(Error::param("kind", format!("unknown profile kind `{other}`"))),
    };
    if let Some(k) = kv.keys().next() {
        return Err(Error::param(k.clone(), "unknown or inapplicable key"));
    }
    Ok(out)
}
