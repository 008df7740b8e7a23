//! Bundled synthetic cells.
//!
//! Both cells are invented for testing and demonstration. They are not fits
//! of any commercial cell.

use crate::io::parse_cell_params;
use crate::model::CellParameters;

pub const SYNTHETIC_LFP_CELL_TOML: &str = include_str!("../fixtures/synthetic_lfp_cell.toml");
/// Same cell with a near-flat positive OCP across mid SOC.
pub const SYNTHETIC_LFP_FLAT_CELL_TOML: &str = include_str!("../fixtures/synthetic_lfp_flat_cell.toml");
pub const DEFAULT_FILTER_TOML: &str = include_str!("../fixtures/default_filter.toml");

pub fn synthetic_lfp_cell() -> CellParameters {
    parse_cell_params(SYNTHETIC_LFP_CELL_TOML).expect("bundled cell is valid")
}

pub fn synthetic_lfp_flat_cell() -> CellParameters {
    parse_cell_params(SYNTHETIC_LFP_FLAT_CELL_TOML).expect("bundled flat cell is valid")
}
