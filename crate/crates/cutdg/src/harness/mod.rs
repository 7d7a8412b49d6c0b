//! Diagnostics and reproduction harness: experiment presets, error norms,
//! conservation traces, convergence tables, cut-fraction and stability-region
//! sweeps, CSV and SVG output.

pub mod csv;
pub mod norms;
pub mod presets;
pub mod runner;
pub mod svg;

pub use norms::NormSet;
pub use presets::PresetId;
pub use runner::{
    convergence_table, ls_order, mass_condition_at, parallel_map, region_map, run_acoustic,
    run_coupled_accuracy, run_coupled_conservation, run_cut_fraction, run_moving_accuracy,
    run_moving_conservation, run_stationary_accuracy, run_stationary_conservation,
    run_twod_conservation, run_twod_convergence, sweep_alpha, sweep_alpha_condition, ConvRow,
    RegionRow, RunReport, SweepRow,
};

/// Plain key=value configuration file mirroring the CLI flags; '#' starts a
/// comment line.
pub fn parse_config(text: &str) -> Vec<(String, String)> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .filter_map(|l| {
            l.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_parsing() {
        let cfg = parse_config("# comment\n n = 40 \npreset=acoustic\n\nbad line\n");
        assert_eq!(cfg.len(), 2);
        assert_eq!(cfg[0], ("n".into(), "40".into()));
        assert_eq!(cfg[1], ("preset".into(), "acoustic".into()));
    }
}
