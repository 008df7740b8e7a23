//! Control-oriented single particle model with Arrhenius temperature scaling.

pub mod constants;
pub mod ocp;
pub mod params;
pub mod state_space;
pub mod voltage;

pub use ocp::{Interpolation, OcpCurve};
pub use params::{ActivationEnergies, CellParameters, Electrode, ElectrodeParams, TemperatureAdjustedParams};
pub use state_space::{model_input, ContinuousModel, OutputVector, StateVector};
pub use voltage::{evaluate_voltage, overpotential, terminal_voltage, VoltageEval};
