//! File formats: cell and filter TOML, cycle and trace CSV, reports, run manifests.

pub mod config;
pub mod cycle_csv;
pub mod manifest;
pub mod report;
pub mod synthetic;
pub mod trace;

pub use config::{load_cell_params, load_filter_config, parse_cell_params, parse_filter_config};
pub use cycle_csv::{load_cycle, load_cycle_with, read_cycle, write_cycle, CycleLoadOptions};
pub use manifest::RunManifest;
pub use report::{render_json, render_text};
pub use synthetic::{is_synthetic, parse_synthetic, SyntheticInput};
pub use trace::{write_trace, write_truth, TraceColumns};
