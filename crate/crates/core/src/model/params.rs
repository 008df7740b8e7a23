use crate::error::{Error, Result};
use crate::model::constants::GAS_CONSTANT;
use crate::model::ocp::OcpCurve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Electrode {
    Positive,
    Negative,
}

impl Electrode {
    /// Current direction sign inside the overpotential: −1 for the positive
    /// electrode, +1 for the negative one.
    pub fn current_sign(self) -> f64 {
        match self {
            Electrode::Positive => -1.0,
            Electrode::Negative => 1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Electrode::Positive => "positive",
            Electrode::Negative => "negative",
        }
    }
}

/// Per-electrode parameter group at the reference temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ElectrodeParams {
    /// Solid-phase diffusion time constant, s.
    pub alpha_ref: f64,
    /// Electrode capacity scale, A·s.
    pub capacity: f64,
    /// Inverse reaction time scale, 1/s.
    pub d_ref: f64,
    /// Normalized average concentration at 0 % state of charge.
    pub c_min: f64,
    /// Normalized average concentration at 100 % state of charge.
    pub c_max: f64,
    pub ocp: OcpCurve,
}

/// Activation energies (J/mol), one per temperature-dependent parameter.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActivationEnergies {
    /// E1, scales the negative-electrode diffusion time constant.
    pub alpha_n: f64,
    /// E2, scales the positive-electrode diffusion time constant.
    pub alpha_p: f64,
    /// E3, scales the negative-electrode reaction rate.
    pub d_n: f64,
    /// E4, scales the positive-electrode reaction rate.
    pub d_p: f64,
    /// E5, scales the ohmic resistance.
    pub r0: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellParameters {
    pub positive: ElectrodeParams,
    pub negative: ElectrodeParams,
    /// Ohmic resistance at the reference temperature, Ω.
    pub r0_ref: f64,
    pub activation: ActivationEnergies,
    /// Reference temperature, K.
    pub t_ref: f64,
    /// Cell capacity used for Coulomb counting, A·s.
    pub capacity_cell: f64,
    /// Surface concentrations are clamped to `[clamp_eps, 1 - clamp_eps]`.
    pub clamp_eps: f64,
}

/// Parameters evaluated at a specific temperature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureAdjustedParams {
    pub alpha_p: f64,
    pub alpha_n: f64,
    pub d_p: f64,
    pub d_n: f64,
    pub r0: f64,
    pub temp: f64,
}

impl TemperatureAdjustedParams {
    pub fn alpha(&self, electrode: Electrode) -> f64 {
        match electrode {
            Electrode::Positive => self.alpha_p,
            Electrode::Negative => self.alpha_n,
        }
    }

    pub fn d(&self, electrode: Electrode) -> f64 {
        match electrode {
            Electrode::Positive => self.d_p,
            Electrode::Negative => self.d_n,
        }
    }
}

impl CellParameters {
    pub fn electrode(&self, electrode: Electrode) -> &ElectrodeParams {
        match electrode {
            Electrode::Positive => &self.positive,
            Electrode::Negative => &self.negative,
        }
    }

    /// Checks every invariant, naming the first offending key.
    pub fn validate(&self) -> Result<()> {
        for (e, p) in [
            (Electrode::Positive, &self.positive),
            (Electrode::Negative, &self.negative),
        ] {
            let key = |k: &str| format!("{}.{k}", e.name());
            positive(&key("alpha_s"), p.alpha_ref)?;
            positive(&key("d_per_s"), p.d_ref)?;
            if !(p.c_min > 0.0 && p.c_min < 1.0) {
                return Err(Error::param(key("c_min"), format!("{} not in (0, 1)", p.c_min)));
            }
            if !(p.c_max > p.c_min && p.c_max < 1.0) {
                return Err(Error::param(
                    key("c_max"),
                    format!("{} must satisfy c_min < c_max < 1", p.c_max),
                ));
            }
            positive(&key("capacity"), p.capacity)?;
        }
        positive("cell.r0_ohm", self.r0_ref)?;
        positive("cell.t_ref", self.t_ref)?;
        positive("cell.capacity", self.capacity_cell)?;
        let a = &self.activation;
        for (k, v) in [
            ("activation_energy.alpha_n", a.alpha_n),
            ("activation_energy.alpha_p", a.alpha_p),
            ("activation_energy.d_n", a.d_n),
            ("activation_energy.d_p", a.d_p),
            ("activation_energy.r0", a.r0),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::param(k, format!("{v} must be finite and non-negative")));
            }
        }
        if !(self.clamp_eps > 0.0 && self.clamp_eps < 0.5) {
            return Err(Error::param("cell.clamp_eps", "must lie in (0, 0.5)"));
        }
        Ok(())
    }

    /// Arrhenius scaling of the temperature-dependent parameters to `temp` (K).
    pub fn arrhenius_adjust(&self, temp: f64) -> Result<TemperatureAdjustedParams> {
        if !(temp.is_finite() && temp > 0.0) {
            return Err(Error::Domain(format!("temperature {temp} K must be positive")));
        }
        let inv_gap = 1.0 / self.t_ref - 1.0 / temp;
        let factor = |e: f64| (e / GAS_CONSTANT * inv_gap).exp();
        let a = &self.activation;
        Ok(TemperatureAdjustedParams {
            alpha_n: self.negative.alpha_ref / factor(a.alpha_n),
            alpha_p: self.positive.alpha_ref / factor(a.alpha_p),
            d_n: self.negative.d_ref * factor(a.d_n),
            d_p: self.positive.d_ref * factor(a.d_p),
            r0: self.r0_ref / factor(a.r0),
            temp,
        })
    }
}

fn positive(key: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::param(key, format!("{v} must be finite and strictly positive")))
    }
}
