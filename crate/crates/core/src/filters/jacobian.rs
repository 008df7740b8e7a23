use nalgebra::{RowVector4, Vector4};

use crate::discretize::DiscreteModel;
use crate::error::Result;
use crate::model::{evaluate_voltage, model_input, CellParameters, StateVector, TemperatureAdjustedParams};

/// Largest step used by the finite-difference Jacobian.
pub const FD_STEP: f64 = 1e-6;

/// Near the clamp the step shrinks to this fraction of the distance between
/// the surface concentration and the clamp bound, since the overpotential's
/// curvature grows like `1/c²` there.
pub const FD_MARGIN_FRACTION: f64 = 1e-4;

/// Smallest step allowed when keeping a difference from straddling an OCP knot.
pub const FD_KNOT_MIN_STEP: f64 = 1e-9;

/// Voltage and `∂V/∂χ` at state `x`, chaining the surface-concentration
/// sensitivities through the output matrix.
pub fn voltage_jacobian_states(
    x: &StateVector,
    current: f64,
    model: &DiscreteModel,
    tp: &TemperatureAdjustedParams,
    params: &CellParameters,
) -> Result<(f64, RowVector4<f64>)> {
    let psi = model.output(x, model_input(current));
    let eval = evaluate_voltage(&psi, current, tp, params)?;
    let dv_dpsi = RowVector4::new(0.0, eval.dv_dcss_p, 0.0, eval.dv_dcss_n);
    Ok((eval.voltage, dv_dpsi * model.c))
}

/// Central-difference counterpart of [`voltage_jacobian_states`]. `step` is
/// an upper bound: it shrinks near the clamp (see [`FD_MARGIN_FRACTION`]) and
/// so that the difference stays inside one OCP spline segment, where the
/// curve is smooth.
pub fn voltage_jacobian_fd(
    x: &StateVector,
    current: f64,
    model: &DiscreteModel,
    tp: &TemperatureAdjustedParams,
    params: &CellParameters,
    step: f64,
) -> Result<(f64, RowVector4<f64>)> {
    let u = model_input(current);
    let v = |x: &Vector4<f64>| -> Result<f64> {
        let psi = model.output(&StateVector::from_vector(x), u);
        Ok(evaluate_voltage(&psi, current, tp, params)?.voltage)
    };
    let base = x.to_vector();
    let psi = model.output(x, u);
    let eps = params.clamp_eps;
    let limit = |c: f64, curve: &crate::model::OcpCurve| {
        let margin = (c - eps).min(1.0 - eps - c);
        let knot = curve.breakpoints().map(|(x, _)| (x - c).abs()).fold(f64::INFINITY, f64::min);
        let mut l = (0.5 * knot).max(FD_KNOT_MIN_STEP);
        if margin > 0.0 {
            l = l.min(FD_MARGIN_FRACTION * margin);
        }
        l
    };
    // indices 1 and 3 of the output are the surface concentrations
    let limits = [(1, limit(psi.css_p, &params.positive.ocp)), (3, limit(psi.css_n, &params.negative.ocp))];
    let mut h = RowVector4::zeros();
    for i in 0..4 {
        let mut step_i = step;
        for &(row, l) in &limits {
            if model.c[(row, i)] != 0.0 {
                step_i = step_i.min(l);
            }
        }
        let mut up = base;
        let mut down = base;
        up[i] += step_i;
        down[i] -= step_i;
        h[i] = (v(&up)? - v(&down)?) / (2.0 * step_i);
    }
    Ok((v(&base)?, h))
}
