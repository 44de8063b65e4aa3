//! Train/test splitting, the experiment grid and result reporting.

pub mod grid;
pub mod report;
pub mod split;

pub use grid::{run_grid, run_grid_with_split, ExperimentRecord, GridConfig, GridOutput};
pub use report::{emit_curves_svg, emit_results_csv, parse_results_csv};
pub use split::{stratified_holdout, stratified_kfold, SplitPlan};
