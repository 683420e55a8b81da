use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use dosim::checks::{run_checks, Level};
use dosim::integrator::{do_initial_state, integrate, Sampling, StateVector};
use dosim::probabilities::{do_exact_table, do_time_table, finite_avg_table};
use dosim::sweep::{figure2_preset, figure2_trajectories, preset, run_sweep, GridRange, SweepSpec};
use dosim::{Basis, Table, TimeBound, Tols};

use crate::config::{ConfigFile, Format, ParamArgs, TolArgs};
use crate::CliError;

#[derive(Debug, Args)]
pub struct EvolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    tols: TolArgs,
    /// Start time; `-inf` starts from the asymptotic adiabatic image of the
    /// state
    #[arg(long, allow_hyphen_values = true)]
    from: TimeBound<f64>,
    /// End time
    #[arg(long, allow_hyphen_values = true)]
    to: f64,
    /// Initial diabatic state (1, 2 or 3)
    #[arg(long)]
    start_state: usize,
    /// Basis of the written populations and amplitudes
    #[arg(long, value_enum, default_value = "diabatic")]
    basis: BasisArg,
    /// Write this many equally spaced samples instead of every step
    #[arg(long)]
    samples: Option<usize>,
    /// Output file (default `<output dir>/evolve.csv`; `-` for stdout)
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum BasisArg {
    Diabatic,
    Adiabatic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum TableKindArg {
    /// Infinite window
    DoExact,
    /// Large-T averages for the window [-T, T]
    FiniteAvg,
    /// Large-t averages after a start at -inf
    DoTime,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, value_enum)]
    kind: TableKindArg,
    /// Window half-width, required for finite-avg
    #[arg(long = "T")]
    t_half: Option<f64>,
    /// Observation time, required for do-time
    #[arg(long = "t")]
    t_obs: Option<f64>,
    /// Print JSON instead of a labelled table
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// Figure preset: fig2, fig3, fig4 or fig5
    #[arg(long, conflicts_with = "spec", required_unless_present = "spec")]
    preset: Option<String>,
    /// TOML file holding a sweep specification
    #[arg(long)]
    spec: Option<PathBuf>,
    #[command(flatten)]
    tols: TolArgs,
    /// Override the number of grid points
    #[arg(long)]
    points: Option<usize>,
    /// Output format (default csv)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Directory for the output files (default: config file, then `$DOSIM_OUT_DIR`, then `.`)
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Record the wall-clock runtime in JSON metadata
    #[arg(long)]
    include_runtime: bool,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Analytic checks only (default)
    #[arg(long, conflicts_with = "full")]
    quick: bool,
    /// Also compare against numerical integration
    #[arg(long)]
    full: bool,
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))
}

pub fn evolve(a: &EvolveArgs, file: &ConfigFile) -> Result<(), CliError> {
    let params = a.params.resolve(file)?;
    let tols = a.tols.resolve(file, Tols::default())?;
    let start = match a.from {
        TimeBound::Finite(t) => StateVector::diabatic(a.start_state, t)?,
        TimeBound::NegInfinity => {
            let t0 = 20.0 * params.max_scale() / params.beta;
            do_initial_state(&params, a.start_state, t0)?
        }
        TimeBound::PosInfinity => return Err(CliError::usage("--from cannot be +inf")),
    };
    if a.to.is_nan() || a.to <= start.t {
        return Err(CliError::usage(format!(
            "--to {} must be later than the start time {}",
            a.to, start.t
        )));
    }
    let sampling = match a.samples {
        Some(n) if n >= 2 => Sampling::Grid(GridRange::linear(start.t, a.to, n).points()),
        Some(n) => return Err(CliError::usage(format!("--samples must be at least 2, got {n}"))),
        None => Sampling::Steps,
    };
    let (end, traj) = integrate(&params, &start, a.to, &tols, &sampling)?;
    let traj = match a.basis {
        BasisArg::Diabatic => traj,
        BasisArg::Adiabatic => traj.to_adiabatic(&params)?,
    };
    let out = a
        .output
        .clone()
        .unwrap_or_else(|| file.output_dir(None).join("evolve.csv"));
    if out.as_os_str() == "-" {
        traj.write_csv(std::io::stdout().lock())?;
    } else {
        traj.write_csv(create(&out)?)?;
        eprintln!("wrote {} samples to {}", traj.samples.len(), out.display());
    }
    let p = end.in_basis(&params, Basis::Diabatic)?.populations();
    eprintln!(
        "final diabatic populations at t = {}: P1 = {:.6}, P2 = {:.6}, P3 = {:.6}",
        a.to, p[0], p[1], p[2]
    );
    Ok(())
}

fn print_table(t: &Table, heading: &str) {
    println!("{heading}");
    println!("rows: initial state, columns: final state");
    print!("{:>5}", "");
    for n in 1..=3 {
        print!("{:>16}", format!("ψ{n}"));
    }
    println!();
    for m in 1..=3 {
        print!("{:>5}", format!("ψ{m}"));
        for n in 1..=3 {
            print!("{:>16.10}", t.prob(m, n));
        }
        println!();
    }
    if !t.within_bounds {
        println!("warning: some entries lie outside [0, 1]; the expansion is outside its domain");
    }
}

pub fn table(a: &TableArgs, file: &ConfigFile) -> Result<(), CliError> {
    let params = a.params.resolve(file)?;
    let need = |v: Option<f64>, flag: &str| v.ok_or_else(|| CliError::usage(format!("--kind needs {flag}")));
    let (t, heading) = match a.kind {
        TableKindArg::DoExact => (do_exact_table(&params), "infinite window".to_string()),
        TableKindArg::FiniteAvg => {
            let t_half = need(a.t_half, "--T")?;
            (
                finite_avg_table(&params, t_half)?,
                format!("average over the window [-{t_half}, {t_half}]"),
            )
        }
        TableKindArg::DoTime => {
            let t = need(a.t_obs, "--t")?;
            (
                do_time_table(&params, t)?,
                format!("average at t = {t} after a start at -inf"),
            )
        }
    };
    if a.json {
        let v = serde_json::json!({ "kind": t.kind, "p": t.p, "within_bounds": t.within_bounds });
        println!("{}", serde_json::to_string_pretty(&v).expect("table serializes"));
    } else {
        print_table(&t, &heading);
    }
    Ok(())
}

fn write_sweep(spec: &SweepSpec, dir: &Path, format: Format, include_runtime: bool) -> Result<(), CliError> {
    let r = run_sweep(spec)?;
    let errors = r.error_count();
    let path = dir.join(format!(
        "{}.{}",
        spec.name,
        match format {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    ));
    let mut w = create(&path)?;
    match format {
        Format::Csv => r.write_csv(&mut w)?,
        Format::Json => r.write_json(&mut w, include_runtime)?,
    }
    w.flush()
        .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display())))?;
    eprintln!(
        "{}: {} points in {:.2} s -> {}{}",
        spec.name,
        r.rows.len(),
        r.runtime_s,
        path.display(),
        if errors > 0 {
            format!(" ({errors} cells failed)")
        } else {
            String::new()
        }
    );
    Ok(())
}

fn figure2(a: &SweepArgs, dir: &Path, tols: &Tols) -> Result<(), CliError> {
    let (params, mut times) = figure2_preset();
    if let Some(n) = a.points {
        times = GridRange::linear(times[0], times[times.len() - 1], n.max(2)).points();
    }
    let (diabatic, adiabatic) = figure2_trajectories(&params, &times, tols)?;
    for (traj, name) in [(diabatic, "fig2_diabatic.csv"), (adiabatic, "fig2_adiabatic.csv")] {
        let path = dir.join(name);
        traj.write_csv(create(&path)?)?;
        eprintln!("fig2: {} samples -> {}", traj.samples.len(), path.display());
    }
    Ok(())
}

pub fn sweep(a: &SweepArgs, file: &ConfigFile) -> Result<(), CliError> {
    let dir = file.output_dir(a.output_dir.as_deref());
    let format = a.format.or(file.format).unwrap_or(Format::Csv);
    if a.preset.as_deref() == Some("fig2") {
        let tols = a.tols.resolve(file, Tols::default())?;
        return figure2(a, &dir, &tols);
    }
    let mut specs = match (&a.preset, &a.spec) {
        (Some(name), _) => preset(name)?,
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            vec![toml::from_str::<SweepSpec>(&text)
                .map_err(|e| CliError::usage(format!("sweep spec {}: {e}", path.display())))?]
        }
        (None, None) => return Err(CliError::usage("pass --preset or --spec")),
    };
    for s in &mut specs {
        s.tols = a.tols.resolve(file, s.tols)?;
        if let Some(n) = a.points {
            s.range.n_points = n;
        }
        write_sweep(s, &dir, format, a.include_runtime)?;
    }
    Ok(())
}

pub fn validate(a: &ValidateArgs) -> Result<(), CliError> {
    let level = if a.full { Level::Full } else { Level::Quick };
    let outcomes = run_checks(level);
    let width = outcomes.iter().map(|c| c.name.len()).max().unwrap_or(0);
    for c in &outcomes {
        let status = if c.passed { "ok" } else { "FAILED" };
        match &c.error {
            Some(e) => println!("{:<width$}  {status:<6}  error: {e}", c.name),
            None => println!(
                "{:<width$}  {status:<6}  {:.2e} (tolerance {:.0e})",
                c.name, c.measured, c.tolerance
            ),
        }
    }
    let failed = outcomes.iter().filter(|c| !c.passed).count();
    println!("{} of {} checks passed", outcomes.len() - failed, outcomes.len());
    if failed == 0 {
        Ok(())
    } else {
        Err(CliError::numerical(format!("{failed} check(s) failed")))
    }
}
