use crate::error::{Error, Result};
use crate::filters::StepInput;

/// Relative tolerance on sample spacing for a cycle to count as uniform.
pub const UNIFORM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    /// Time, s.
    pub t: f64,
    /// Current, A, discharge positive.
    pub current: f64,
    /// Temperature, K.
    pub temp: f64,
}

/// A uniformly sampled current/temperature record, optionally with measured voltage.
#[derive(Debug, Clone, PartialEq)]
pub struct DriveCycle {
    samples: Vec<Sample>,
    dt: f64,
    voltage: Option<Vec<f64>>,
    soc_ref: Option<Vec<f64>>,
}

impl DriveCycle {
    pub fn new(samples: Vec<Sample>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::data(None, None, "a drive cycle needs at least two samples"));
        }
        for (i, s) in samples.iter().enumerate() {
            if !(s.t.is_finite() && s.current.is_finite() && s.temp.is_finite()) {
                return Err(Error::data(Some(i), None, "non-finite sample"));
            }
            if s.temp <= 0.0 {
                return Err(Error::data(Some(i), Some("temp"), "temperature must be positive kelvin"));
            }
        }
        let dt = samples[1].t - samples[0].t;
        for (i, w) in samples.windows(2).enumerate() {
            let step = w[1].t - w[0].t;
            if step <= 0.0 {
                return Err(Error::data(Some(i + 1), Some("t"), "time must be strictly increasing"));
            }
            if (step - dt).abs() > UNIFORM_TOLERANCE * dt {
                return Err(Error::data(
                    Some(i + 1),
                    Some("t"),
                    format!("non-uniform spacing {step} s (expected {dt} s)"),
                ));
            }
        }
        Ok(Self {
            samples,
            dt,
            voltage: None,
            soc_ref: None,
        })
    }

    pub fn with_voltage(mut self, voltage: Vec<f64>) -> Result<Self> {
        if voltage.len() != self.samples.len() {
            return Err(Error::data(None, Some("voltage"), "length differs from the cycle"));
        }
        if let Some(i) = voltage.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(Some(i), Some("voltage"), "non-finite voltage"));
        }
        self.voltage = Some(voltage);
        Ok(self)
    }

    pub fn with_soc_ref(mut self, soc: Vec<f64>) -> Result<Self> {
        if soc.len() != self.samples.len() {
            return Err(Error::data(None, Some("soc_ref"), "length differs from the cycle"));
        }
        self.soc_ref = Some(soc);
        Ok(self)
    }

    pub fn samples(&self) -> &[Sample] {
        &self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn duration(&self) -> f64 {
        self.samples[self.samples.len() - 1].t - self.samples[0].t
    }

    pub fn voltage(&self) -> Option<&[f64]> {
        self.voltage.as_deref()
    }

    pub fn soc_ref(&self) -> Option<&[f64]> {
        self.soc_ref.as_deref()
    }

    pub fn currents(&self) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().map(|s| s.current)
    }

    /// Filter inputs against the given voltage series.
    pub fn step_inputs(&self, voltage: &[f64]) -> Vec<StepInput> {
        self.samples
            .iter()
            .zip(voltage)
            .map(|(s, &v)| StepInput {
                current: s.current,
                voltage: v,
                temp: s.temp,
                dt: self.dt,
            })
            .collect()
    }
}
