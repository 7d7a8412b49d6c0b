//! Command line driver: run experiment presets, build convergence tables,
//! sweep cut fractions and map the interface stability region. Results are
//! written as CSV (optionally with SVG line plots); identical invocations
//! produce byte-identical files.

use clap::{Args, Parser, Subcommand};
use cutdg::harness::{
    convergence_table, csv, parse_config, region_map, run_acoustic, run_coupled_accuracy,
    run_coupled_conservation, run_moving_accuracy, run_moving_conservation,
    run_stationary_accuracy, run_stationary_conservation, run_twod_conservation,
    run_twod_convergence, svg, sweep_alpha, PresetId, RunReport,
};
use cutdg::spacetime::Formulation;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "cutdg", about = "Cut-cell DG solvers for interface problems", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Experiment preset name (see list-presets).
    #[arg(long)]
    preset: Option<String>,
    /// Elements per direction (single value, or comma list for converge).
    #[arg(long)]
    n: Option<String>,
    /// Polynomial degree.
    #[arg(long)]
    degree: Option<usize>,
    /// Interface penalty λ1.
    #[arg(long)]
    lambda1: Option<f64>,
    /// Interface penalty λ2.
    #[arg(long)]
    lambda2: Option<f64>,
    /// Final time override.
    #[arg(long)]
    t_end: Option<f64>,
    /// Space-time weak form: ibp (integrated by parts) or direct.
    #[arg(long)]
    formulation: Option<String>,
    /// Sample count for sweeps.
    #[arg(long)]
    samples: Option<usize>,
    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    output: PathBuf,
    /// Also write SVG line plots.
    #[arg(long)]
    svg: bool,
    /// key=value file supplying defaults for any flag above.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one preset and write its conservation/energy trace.
    Run(Common),
    /// Run a mesh-refinement study and write the error table.
    Converge(Common),
    /// Sweep the relative cut position of the interface.
    SweepAlpha(Common),
    /// Map the feasible stability region over the penalty plane.
    RegionMap(Common),
    /// List the available presets.
    ListPresets,
}

fn merge_config(common: &mut Common) -> Result<(), String> {
    let Some(path) = &common.config else { return Ok(()) };
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config: {e}"))?;
    for (k, v) in parse_config(&text) {
        match k.as_str() {
            "preset" => {
                common.preset.get_or_insert(v);
            }
            "n" => {
                common.n.get_or_insert(v);
            }
            "degree" => {
                common.degree.get_or_insert(v.parse().map_err(|_| "bad degree")?);
            }
            "lambda1" => {
                common.lambda1.get_or_insert(v.parse().map_err(|_| "bad lambda1")?);
            }
            "lambda2" => {
                common.lambda2.get_or_insert(v.parse().map_err(|_| "bad lambda2")?);
            }
            "t_end" => {
                common.t_end.get_or_insert(v.parse().map_err(|_| "bad t_end")?);
            }
            "formulation" => {
                common.formulation.get_or_insert(v);
            }
            "samples" => {
                common.samples.get_or_insert(v.parse().map_err(|_| "bad samples")?);
            }
            other => return Err(format!("unknown config key '{other}'")),
        }
    }
    Ok(())
}

fn parse_n_list(s: &Option<String>) -> Result<Vec<usize>, String> {
    match s {
        None => Err("missing --n".into()),
        Some(s) => s
            .split(',')
            .map(|p| p.trim().parse::<usize>().map_err(|_| format!("invalid element count '{p}'")))
            .collect(),
    }
}

fn formulation_of(common: &Common) -> Result<Formulation, String> {
    match common.formulation.as_deref() {
        None | Some("ibp") => Ok(Formulation::IntegratedByParts),
        Some("direct") => Ok(Formulation::Direct),
        Some(other) => Err(format!("unknown formulation '{other}' (use ibp or direct)")),
    }
}

fn preset_of(common: &Common) -> Result<PresetId, String> {
    let name = common.preset.as_deref().ok_or("missing --preset")?;
    PresetId::parse(name).ok_or_else(|| {
        let names: Vec<&str> = PresetId::all().iter().map(|p| p.name()).collect();
        format!("unknown preset '{name}'; available: {}", names.join(", "))
    })
}

fn lambda_of(common: &Common, default: (f64, f64)) -> (f64, f64) {
    (common.lambda1.unwrap_or(default.0), common.lambda2.unwrap_or(default.1))
}

fn ensure_dir(path: &Path) -> Result<(), String> {
    std::fs::create_dir_all(path).map_err(|e| format!("cannot create output path {}: {e}", path.display()))
}

fn run_preset(preset: PresetId, common: &Common) -> Result<RunReport, String> {
    let single_n = |default: usize| -> Result<usize, String> {
        match &common.n {
            None => Ok(default),
            Some(_) => {
                let ns = parse_n_list(&common.n)?;
                Ok(*ns.first().ok_or("empty --n")?)
            }
        }
    };
    let report = match preset {
        PresetId::StationaryScalarAccuracy => {
            run_stationary_accuracy(single_n(320)?, common.degree.unwrap_or(2), lambda_of(common, (0.1, -0.9)))
        }
        PresetId::StationaryScalarConservation => run_stationary_conservation(
            single_n(40)?,
            common.degree.unwrap_or(2),
            lambda_of(common, (0.1, -0.9)),
            common.t_end.unwrap_or(1.0),
        ),
        PresetId::Acoustic => run_acoustic(single_n(400)?, common.degree.unwrap_or(2)),
        PresetId::MovingAccuracy => run_moving_accuracy(single_n(320)?, common.degree.unwrap_or(1)),
        PresetId::MovingConservation => run_moving_conservation(
            single_n(400)?,
            formulation_of(common)?,
            common.t_end.unwrap_or(1.0),
        ),
        PresetId::Coupled => run_coupled_conservation(single_n(400)?, common.t_end.unwrap_or(1.0)),
        PresetId::TwodConvergence => {
            run_twod_convergence(single_n(40)?, common.degree.unwrap_or(1), lambda_of(common, (0.0, -1.0)))
        }
        PresetId::TwodConservation => {
            run_twod_conservation(single_n(100)?, lambda_of(common, (0.0, -1.0)))
        }
        PresetId::AlphaSweep | PresetId::RegionMap => {
            return Err(format!(
                "preset '{}' is driven by the sweep-alpha / region-map subcommands",
                preset.name()
            ))
        }
    };
    Ok(report)
}

fn cmd_run(mut common: Common) -> Result<(), String> {
    merge_config(&mut common)?;
    let preset = preset_of(&common)?;
    ensure_dir(&common.output)?;
    let report = run_preset(preset, &common)?;
    let trace_path = common.output.join(format!("{}_trace.csv", preset.name()));
    if report.conservation.first().map(|(_, e)| e.len()).unwrap_or(1) == 2 {
        csv::write_trace_components(&trace_path, &report, &["m", "q"]).map_err(|e| e.to_string())?;
    } else {
        csv::write_trace(&trace_path, &report).map_err(|e| e.to_string())?;
    }
    if common.svg {
        let pts: Vec<(f64, f64)> = report.conservation.iter().map(|(t, e)| (*t, e[0])).collect();
        svg::write_line_plot(
            &common.output.join(format!("{}_trace.svg", preset.name())),
            &format!("{} conservation error", preset.name()),
            &[svg::Series { label: "|e(t)|", points: &pts }],
            true,
        )
        .map_err(|e| e.to_string())?;
    }
    println!("preset          : {}", preset.name());
    println!("N, degree       : {}, {}", report.n, report.degree);
    for n in &report.norms {
        println!("{:<4} L1/L2/Linf : {:.5e} / {:.5e} / {:.5e}", n.label, n.l1, n.l2, n.linf);
    }
    println!("max |e(t)|      : {:.5e}", report.max_conservation_error(0));
    if let Some(k) = report.mass_condition {
        println!("mass condition  : {:.5e}", k);
    }
    println!("wall time       : {:.2} s", report.wall_seconds);
    println!("trace           : {}", trace_path.display());
    Ok(())
}

fn cmd_converge(mut common: Common) -> Result<(), String> {
    merge_config(&mut common)?;
    let preset = preset_of(&common)?;
    ensure_dir(&common.output)?;
    let ns = parse_n_list(&common.n).unwrap_or_else(|_| vec![20, 40, 80, 160, 320]);
    let degree = common.degree.unwrap_or(1);
    let lambda = lambda_of(&common, (0.1, -0.9));
    let reports: Vec<RunReport> = match preset {
        PresetId::StationaryScalarAccuracy => cutdg::harness::parallel_map(ns, |&n| {
            run_stationary_accuracy(n, degree, lambda)
        }),
        PresetId::Acoustic => cutdg::harness::parallel_map(ns, |&n| run_acoustic(n, degree)),
        PresetId::MovingAccuracy => cutdg::harness::parallel_map(ns, |&n| run_moving_accuracy(n, degree)),
        PresetId::Coupled => cutdg::harness::parallel_map(ns, |&n| run_coupled_accuracy(n)),
        PresetId::TwodConvergence => {
            let lambda = lambda_of(&common, (0.0, -1.0));
            cutdg::harness::parallel_map(ns, |&n| run_twod_convergence(n, degree, lambda))
        }
        other => return Err(format!("preset '{}' has no convergence study", other.name())),
    };
    let rows = convergence_table(reports);
    let path = common.output.join(format!("{}_convergence.csv", preset.name()));
    csv::write_convergence(&path, &rows).map_err(|e| e.to_string())?;
    println!("N        L2            order");
    for row in &rows {
        println!(
            "{:<8} {:.5e}    {}",
            row.report.n,
            row.report.norms[0].l2,
            row.order_l2.map(|o| format!("{o:.3}")).unwrap_or_else(|| "-".into())
        );
    }
    if common.svg {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .map(|r| ((r.report.n as f64).log10(), r.report.norms[0].l2))
            .collect();
        svg::write_line_plot(
            &common.output.join(format!("{}_convergence.svg", preset.name())),
            &format!("{} L2 convergence", preset.name()),
            &[svg::Series { label: "L2", points: &pts }],
            true,
        )
        .map_err(|e| e.to_string())?;
    }
    println!("table           : {}", path.display());
    Ok(())
}

fn cmd_sweep_alpha(mut common: Common) -> Result<(), String> {
    merge_config(&mut common)?;
    ensure_dir(&common.output)?;
    let n = parse_n_list(&common.n).map(|v| v[0]).unwrap_or(400);
    let degree = common.degree.unwrap_or(1);
    let samples = common.samples.unwrap_or(400);
    let rows = sweep_alpha(n, degree, samples);
    let path = common.output.join("alpha_sweep.csv");
    csv::write_sweep(&path, &rows).map_err(|e| e.to_string())?;
    let spread = {
        let l2: Vec<f64> = rows.iter().map(|r| r.l2).collect();
        let (lo, hi) = l2.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        (hi - lo) / (l2.iter().sum::<f64>() / l2.len() as f64)
    };
    let cond_ratio = {
        let (lo, hi) = rows
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| (lo.min(r.cond), hi.max(r.cond)));
        hi / lo
    };
    if common.svg {
        let e2: Vec<(f64, f64)> = rows.iter().map(|r| (r.alpha, r.l2)).collect();
        let kp: Vec<(f64, f64)> = rows.iter().map(|r| (r.alpha, r.cond)).collect();
        svg::write_line_plot(
            &common.output.join("alpha_sweep.svg"),
            "errors and conditioning over the cut fraction",
            &[svg::Series { label: "L2", points: &e2 }, svg::Series { label: "cond", points: &kp }],
            true,
        )
        .map_err(|e| e.to_string())?;
    }
    println!("samples         : {}", rows.len());
    println!("L2 spread       : {:.3}%", 100.0 * spread);
    println!("cond max/min    : {:.3}", cond_ratio);
    println!("table           : {}", path.display());
    Ok(())
}

fn cmd_region_map(mut common: Common) -> Result<(), String> {
    merge_config(&mut common)?;
    ensure_dir(&common.output)?;
    let grid = common.samples.unwrap_or(81);
    let rows = region_map(2.0, 1.0, grid);
    let path = common.output.join("region_map.csv");
    csv::write_region(&path, &rows).map_err(|e| e.to_string())?;
    let feasible = rows.iter().filter(|r| r.feasible).count();
    println!("grid            : {grid} x {grid}");
    println!("feasible points : {feasible}");
    println!("table           : {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(c) => cmd_run(c),
        Command::Converge(c) => cmd_converge(c),
        Command::SweepAlpha(c) => cmd_sweep_alpha(c),
        Command::RegionMap(c) => cmd_region_map(c),
        Command::ListPresets => {
            for p in PresetId::all() {
                println!("{}", p.name());
            }
            Ok(())
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
