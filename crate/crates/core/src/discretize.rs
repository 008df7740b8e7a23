//! Exact zero-order-hold discretization.
//!
//! Each electrode block `[[0, 0], [λ, -λ]]` with `λ = 30/α` has a closed-form
//! exponential, so no general matrix exponential is needed on the hot path.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::model::{CellParameters, ContinuousModel, OutputVector, StateVector};
use crate::model::state_space::output_map;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteModel {
    pub a: Matrix4<f64>,
    pub b: Vector4<f64>,
    pub c: Matrix4<f64>,
    pub d: Vector4<f64>,
    pub dt: f64,
    /// Temperature the model was built at, K.
    pub temp: f64,
}

impl DiscreteModel {
    pub fn zoh(m: &ContinuousModel, dt: f64, temp: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::Domain(format!("sampling period {dt} s must be positive")));
        }
        let mut a = Matrix4::zeros();
        let mut b = Vector4::zeros();
        for block in 0..2 {
            let (r0, r1) = (2 * block, 2 * block + 1);
            let lambda = -m.a[(r1, r1)];
            let inv_q = m.b[r0];
            // e^{-λdt} and 1 - e^{-λdt}, the latter without cancellation for small λdt
            let decay = (-lambda * dt).exp();
            let settled = -(-lambda * dt).exp_m1();
            a[(r0, r0)] = 1.0;
            a[(r1, r0)] = settled;
            a[(r1, r1)] = decay;
            b[r0] = dt * inv_q;
            // B̃ = [1/Q, 19/(7Q)]: the surplus over the integrator row is (12/7)/Q
            let surplus = m.b[r1] - inv_q;
            b[r1] = dt * inv_q + surplus * settled / lambda;
        }
        Ok(Self {
            a,
            b,
            c: m.c,
            d: m.d,
            dt,
            temp,
        })
    }

    /// `χ_{k+1} = A_d χ_k + B_d u_k`.
    pub fn propagate(&self, x: &StateVector, u: f64) -> StateVector {
        StateVector::from_vector(&(self.a * x.to_vector() + self.b * u))
    }

    /// `ψ_k = C_d χ_k + D_d u_k`.
    pub fn output(&self, x: &StateVector, u: f64) -> OutputVector {
        output_map(&self.c, &self.d, x, u)
    }
}

/// Holds a [`DiscreteModel`] and rebuilds it when the temperature drifts by
/// more than `delta_t` from the build temperature or the sampling period changes.
#[derive(Debug, Clone)]
pub struct ModelCache {
    delta_t: f64,
    model: Option<DiscreteModel>,
    rebuilds: usize,
}

pub const DEFAULT_REBUILD_DELTA_T: f64 = 0.5;

impl ModelCache {
    pub fn new(delta_t: f64) -> Self {
        Self {
            delta_t,
            model: None,
            rebuilds: 0,
        }
    }

    pub fn get(&mut self, params: &CellParameters, temp: f64, dt: f64) -> Result<&DiscreteModel> {
        let stale = match &self.model {
            None => true,
            Some(m) => m.dt != dt || (m.temp - temp).abs() > self.delta_t,
        };
        if stale {
            log::debug!("building discrete model at {temp} K, dt {dt} s");
            let tp = params.arrhenius_adjust(temp)?;
            let cm = ContinuousModel::build(&tp, params);
            self.model = Some(DiscreteModel::zoh(&cm, dt, temp)?);
            self.rebuilds += 1;
        }
        Ok(self.model.as_ref().expect("model built above"))
    }

    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }
}

impl Default for ModelCache {
    fn default() -> Self {
        Self::new(DEFAULT_REBUILD_DELTA_T)
    }
}
