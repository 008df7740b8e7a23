use crate::error::{Error, Result};
use crate::harness::cycle::DriveCycle;

/// Root-mean-square of a non-empty series.
pub fn rmse(errors: &[f64]) -> Result<f64> {
    let mut acc = RmseAccumulator::default();
    acc.extend(errors.iter().copied());
    acc.value()
}

/// Streaming RMSE; partial accumulators can be merged.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct RmseAccumulator {
    sum_sq: f64,
    count: usize,
}

impl RmseAccumulator {
    pub fn push(&mut self, e: f64) {
        self.sum_sq += e * e;
        self.count += 1;
    }

    pub fn merge(&mut self, other: &RmseAccumulator) {
        self.sum_sq += other.sum_sq;
        self.count += other.count;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn value(&self) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::Domain("RMSE of an empty series".into()));
        }
        Ok((self.sum_sq / self.count as f64).sqrt())
    }
}

impl Extend<f64> for RmseAccumulator {
    fn extend<T: IntoIterator<Item = f64>>(&mut self, iter: T) {
        for e in iter {
            self.push(e);
        }
    }
}

pub fn max_abs(errors: &[f64]) -> f64 {
    errors.iter().fold(0.0, |m, e| m.max(e.abs()))
}

/// `100·(1 − filtered/baseline)`, or zero when the baseline is zero.
pub fn improvement_pct(baseline: f64, filtered: f64) -> f64 {
    if baseline > 0.0 {
        100.0 * (1.0 - filtered / baseline)
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Integration {
    /// `Σ_{j<k} I_j·dt`, the exact charge moved under zero-order hold.
    #[default]
    Rectangular,
    Trapezoidal,
}

/// Coulomb-counted SOC with positive current discharging the cell.
/// Values are not clamped.
pub fn coulomb_count(cycle: &DriveCycle, capacity: f64, soc0: f64, rule: Integration) -> Vec<f64> {
    let dt = cycle.dt();
    let mut soc = soc0;
    let mut charge = 0.0;
    let mut out = Vec::with_capacity(cycle.len());
    let samples = cycle.samples();
    for (k, s) in samples.iter().enumerate() {
        if k > 0 {
            let moved = match rule {
                Integration::Rectangular => samples[k - 1].current,
                Integration::Trapezoidal => 0.5 * (samples[k - 1].current + s.current),
            };
            charge += moved * dt;
            soc = soc0 - charge / capacity;
        }
        out.push(soc);
    }
    out
}
