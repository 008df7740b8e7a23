//! Continuous-time state-space form of the single particle model.
//!
//! The state stacks the two electrodes in the order (positive, negative),
//! each contributing `[q1, q2]`. The output stacks `[c̄, c_ss]` per electrode.
//!
//! The linear model is driven by the charging current `u = -I`, where `I` is
//! the cell current with discharge positive. With positive capacities this
//! makes both normalized concentrations rise with state of charge, which is
//! the orientation the stoichiometric SOC normalization assumes.

use nalgebra::{Matrix4, Vector4};

use crate::model::params::{CellParameters, Electrode, TemperatureAdjustedParams};

/// Converts a cell current (discharge positive) into the model input.
#[inline]
pub fn model_input(current: f64) -> f64 {
    -current
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StateVector {
    pub q1_p: f64,
    pub q2_p: f64,
    pub q1_n: f64,
    pub q2_n: f64,
}

impl StateVector {
    pub fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.q1_p, self.q2_p, self.q1_n, self.q2_n)
    }

    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self {
            q1_p: v[0],
            q2_p: v[1],
            q1_n: v[2],
            q2_n: v[3],
        }
    }

    /// Relaxed state (q2 = q1) at the given average concentrations.
    pub fn relaxed(c_p: f64, c_n: f64) -> Self {
        Self {
            q1_p: c_p,
            q2_p: c_p,
            q1_n: c_n,
            q2_n: c_n,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.to_vector().iter().all(|v| v.is_finite())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct OutputVector {
    pub cbar_p: f64,
    pub css_p: f64,
    pub cbar_n: f64,
    pub css_n: f64,
}

impl OutputVector {
    pub fn from_vector(v: &Vector4<f64>) -> Self {
        Self {
            cbar_p: v[0],
            css_p: v[1],
            cbar_n: v[2],
            css_n: v[3],
        }
    }

    pub fn surface(&self, electrode: Electrode) -> f64 {
        match electrode {
            Electrode::Positive => self.css_p,
            Electrode::Negative => self.css_n,
        }
    }

    /// Surface concentrations clamped into `[eps, 1 - eps]`.
    pub fn clamped(self, eps: f64) -> Self {
        Self {
            css_p: self.css_p.clamp(eps, 1.0 - eps),
            css_n: self.css_n.clamp(eps, 1.0 - eps),
            ..self
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuousModel {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
    pub c: Matrix4<f64>,
    pub d: Vector4<f64>,
}

impl ContinuousModel {
    pub fn build(tp: &TemperatureAdjustedParams, params: &CellParameters) -> Self {
        let mut a = Matrix4::zeros();
        let mut b = Vector4::zeros();
        let mut d = Vector4::zeros();
        for (block, electrode) in [Electrode::Positive, Electrode::Negative].into_iter().enumerate() {
            let alpha = tp.alpha(electrode);
            let q = params.electrode(electrode).capacity;
            let (r0, r1) = (2 * block, 2 * block + 1);
            a[(r1, r0)] = 30.0 / alpha;
            a[(r1, r1)] = -30.0 / alpha;
            b[r0] = 1.0 / q;
            b[r1] = 19.0 / (7.0 * q);
            d[r1] = alpha / (105.0 * q);
        }
        Self {
            a,
            b,
            c: Matrix4::identity(),
            d,
        }
    }

    /// `ψ = C χ + D u`.
    pub fn output(&self, x: &StateVector, u: f64) -> OutputVector {
        output_map(&self.c, &self.d, x, u)
    }
}

pub(crate) fn output_map(
    c: &Matrix4<f64>,
    d: &Vector4<f64>,
    x: &StateVector,
    u: f64,
) -> OutputVector {
    OutputVector::from_vector(&(c * x.to_vector() + d * u))
}
