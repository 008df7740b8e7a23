//! Seeded synthetic current profiles.
//!
//! These stand in for recorded dynamic cycles. Every generator is a pure
//! function of its settings and seed.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::cycle::{DriveCycle, Sample};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ProfileKind {
    /// Discharge pulses of `amplitude` A lasting `on_s`, separated by `off_s` of rest.
    Pulse { amplitude: f64, on_s: f64, off_s: f64 },
    /// Mean-reverting random walk around `level` A, starting from `initial`
    /// (or `level` when unset).
    ///
    /// `I ← I + reversion·(level − I) + step_std·ε`, clipped to `±max_abs`.
    RandomWalk {
        level: f64,
        step_std: f64,
        reversion: f64,
        max_abs: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial: Option<f64>,
    },
    /// A stepwise current template (A per segment, one segment per `segment_s`),
    /// scaled and repeated to fill the duration, with optional seeded jitter.
    ScaledTemplate {
        template: Template,
        scale: f64,
        segment_s: f64,
        jitter_std: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Template {
    /// Synthetic step pattern in the spirit of a dynamic stress test.
    DstLike,
    Custom(Vec<f64>),
}

impl Template {
    pub fn steps(&self) -> &[f64] {
        // fractions of the scale; positive = discharge
        const DST_LIKE: [f64; 18] = [
            0.0, 0.25, 0.0, 0.5, -0.25, 0.25, 0.0, 1.0, -0.5, 0.5, 0.0, 0.25, -0.25, 0.75, 0.0,
            0.5, -0.5, 0.0,
        ];
        match self {
            Template::DstLike => &DST_LIKE,
            Template::Custom(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(flatten)]
    pub kind: ProfileKind,
    pub duration_s: f64,
    pub dt_s: f64,
    /// Constant cell temperature, K.
    pub temp_k: f64,
}

impl ProfileSpec {
    fn validate(&self) -> Result<()> {
        let pos = |k: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::param(k, format!("{v} must be positive")))
            }
        };
        pos("duration_s", self.duration_s)?;
        pos("dt_s", self.dt_s)?;
        pos("temp_k", self.temp_k)?;
        match &self.kind {
            ProfileKind::Pulse { on_s, off_s, amplitude } => {
                pos("on_s", *on_s)?;
                if !(off_s.is_finite() && *off_s >= 0.0) {
                    return Err(Error::param("off_s", "must be non-negative"));
                }
                if !amplitude.is_finite() {
                    return Err(Error::param("amplitude", "must be finite"));
                }
            }
            ProfileKind::RandomWalk { step_std, reversion, max_abs, level, initial } => {
                pos("max_abs", *max_abs)?;
                if initial.is_some_and(|i| !i.is_finite()) {
                    return Err(Error::param("initial", "must be finite"));
                }
                if !(level.is_finite() && step_std.is_finite() && *step_std >= 0.0) {
                    return Err(Error::param("step_std", "must be finite and non-negative"));
                }
                if !(0.0..=1.0).contains(reversion) {
                    return Err(Error::param("reversion", "must lie in [0, 1]"));
                }
            }
            ProfileKind::ScaledTemplate { template, segment_s, jitter_std, scale } => {
                pos("segment_s", *segment_s)?;
                if template.steps().is_empty() {
                    return Err(Error::param("template", "empty template"));
                }
                if !(scale.is_finite() && jitter_std.is_finite() && *jitter_std >= 0.0) {
                    return Err(Error::param("jitter_std", "must be finite and non-negative"));
                }
            }
        }
        Ok(())
    }
}

/// Generates the profile described by `spec` using `seed`.
pub fn gen_profile(spec: &ProfileSpec, seed: u64) -> Result<DriveCycle> {
    spec.validate()?;
    let n = (spec.duration_s / spec.dt_s).round() as usize + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let std_normal = Normal::new(0.0, 1.0).expect("unit normal");
    let times = (0..n).map(|k| k as f64 * spec.dt_s);
    let currents: Vec<f64> = match &spec.kind {
        ProfileKind::Pulse { amplitude, on_s, off_s } => times
            .map(|t| {
                let phase = t % (on_s + off_s);
                if phase < *on_s {
                    *amplitude
                } else {
                    0.0
                }
            })
            .collect(),
        ProfileKind::RandomWalk { level, step_std, reversion, max_abs, initial } => {
            let mut i = initial.unwrap_or(*level).clamp(-max_abs, *max_abs);
            times
                .map(|_| {
                    let out = i;
                    let eps: f64 = std_normal.sample(&mut rng);
                    i = (i + reversion * (level - i) + step_std * eps).clamp(-max_abs, *max_abs);
                    out
                })
                .collect()
        }
        ProfileKind::ScaledTemplate { template, scale, segment_s, jitter_std } => {
            let steps = template.steps();
            times
                .map(|t| {
                    let seg = (t / segment_s).floor() as usize % steps.len();
                    let jitter: f64 = std_normal.sample(&mut rng);
                    scale * steps[seg] + jitter_std * jitter
                })
                .collect()
        }
    };
    let samples = currents
        .into_iter()
        .enumerate()
        .map(|(k, current)| Sample {
            t: k as f64 * spec.dt_s,
            current,
            temp: spec.temp_k,
        })
        .collect();
    DriveCycle::new(samples)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn walk(level: f64) -> ProfileSpec {
        ProfileSpec {
            kind: ProfileKind::RandomWalk { level, step_std: 0.2, reversion: 0.02, max_abs: 10.0, initial: None },
            duration_s: 9999.0,
            dt_s: 1.0,
            temp_k: 298.15,
        }
    }

    #[test]
    fn zero_amplitude_pulse_is_rest() {
        let spec = ProfileSpec {
            kind: ProfileKind::Pulse { amplitude: 0.0, on_s: 10.0, off_s: 30.0 },
            duration_s: 600.0,
            dt_s: 1.0,
            temp_k: 273.15,
        };
        let c = gen_profile(&spec, 3).unwrap();
        assert_eq!(c.len(), 601);
        assert!(c.currents().all(|i| i == 0.0));
    }

    #[test]
    fn pulse_duty_cycle() {
        let spec = ProfileSpec {
            kind: ProfileKind::Pulse { amplitude: 2.0, on_s: 10.0, off_s: 30.0 },
            duration_s: 399.0,
            dt_s: 1.0,
            temp_k: 298.15,
        };
        let c = gen_profile(&spec, 0).unwrap();
        assert_eq!(c.currents().filter(|&i| i == 2.0).count(), 100);
    }

    #[test]
    fn same_seed_same_profile() {
        let a = gen_profile(&walk(1.0), 42).unwrap();
        let b = gen_profile(&walk(1.0), 42).unwrap();
        let c = gen_profile(&walk(1.0), 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_walk_mean_level() {
        let c = gen_profile(&walk(1.5), 7).unwrap();
        assert_eq!(c.len(), 10_000);
        let mean_abs = c.currents().map(f64::abs).sum::<f64>() / c.len() as f64;
        assert!((mean_abs - 1.5).abs() < 0.2 * 1.5, "{mean_abs}");
    }

    #[test]
    fn template_repeats() {
        let spec = ProfileSpec {
            kind: ProfileKind::ScaledTemplate {
                template: Template::Custom(vec![1.0, -1.0]),
                scale: 2.0,
                segment_s: 5.0,
                jitter_std: 0.0,
            },
            duration_s: 19.0,
            dt_s: 1.0,
            temp_k: 323.15,
        };
        let c = gen_profile(&spec, 0).unwrap();
        let i: Vec<f64> = c.currents().collect();
        assert_eq!(&i[..5], &[2.0; 5]);
        assert_eq!(&i[5..10], &[-2.0; 5]);
        assert_eq!(&i[10..15], &[2.0; 5]);
        assert!(c.samples().iter().all(|s| s.temp == 323.15));
    }

    #[test]
    fn invalid_specs() {
        let mut s = walk(1.0);
        s.dt_s = 0.0;
        assert!(gen_profile(&s, 0).is_err());
        let mut s = walk(1.0);
        s.kind = ProfileKind::RandomWalk { level: 1.0, step_std: 0.1, reversion: 2.0, max_abs: 5.0, initial: None };
        assert!(gen_profile(&s, 0).is_err());
    }
}
