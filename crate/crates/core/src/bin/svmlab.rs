use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use svmlab::analysis::{scale_density, scale_field};
use svmlab::phase_space::{Axis, DensityField, Interpolation, PhaseGrid, TransportField};
use svmlab::scenario::{parse_config, run_scenario, Snapshot};
use svmlab::solver::majorant_existence_time;
use svmlab::{Error, Result};

#[derive(Parser)]
#[command(name = "svmlab", version, about = "Vlasov / transport-field solvers and diagnostics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario described by a config file.
    Run { config: PathBuf },
    /// Integrate F' = C (1 + t F)^2, F(0) = C, and print its blow-up time.
    Majorant {
        #[arg(long = "C")]
        c: f64,
        #[arg(long)]
        cap: f64,
        #[arg(long, default_value_t = 1.0 / 1024.0)]
        ds: f64,
    },
    /// Apply the scaling map with parameter u to one snapshot.
    Transform {
        #[arg(long, allow_hyphen_values = true)]
        u: f64,
        /// Grid bounds of the input, `x_min,x_max,v_min,v_max` (two values for a field).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        bounds: Vec<f64>,
        #[arg(long, default_value = "cubic")]
        interpolation: String,
        input: PathBuf,
        output: PathBuf,
    },
    /// Print the sup distance between two snapshots of equal shape.
    Diff { a: PathBuf, b: PathBuf },
}

fn run(config: PathBuf) -> Result<ExitCode> {
    let text = std::fs::read_to_string(&config).map_err(|e| Error::from(e).context(config.display().to_string()))?;
    let cfg = parse_config(&text).map_err(|e| e.context(config.display().to_string()))?;
    let art = run_scenario(&cfg)?;
    for c in &art.checks {
        let verdict = if c.pass { "pass" } else { "FAIL" };
        println!("{verdict} {:<32} {:e} (tol {:e})", c.name, c.value, c.tolerance);
    }
    println!("summary: {}", art.summary.display());
    Ok(ExitCode::from(art.exit_code() as u8))
}

fn transform(u: f64, bounds: &[f64], interpolation: &str, input: PathBuf, output: PathBuf) -> Result<ExitCode> {
    let interp = Interpolation::parse(interpolation)
        .ok_or_else(|| Error::InvalidArgument(format!("unknown interpolation `{interpolation}`")))?;
    let snap = Snapshot::read(&input)?;
    let x = |n: u32| Axis::new(bounds[0], bounds[1], n as usize);
    let out = if snap.is_field() {
        if bounds.len() != 2 && bounds.len() != 4 {
            return Err(Error::InvalidArgument("--bounds takes x_min,x_max for a field".into()));
        }
        let b = TransportField::new(x(snap.nx)?, snap.values, snap.time)?;
        let r = scale_field(&b, u, interp)?;
        println!("x: [{}, {}] on {} nodes", r.axis().min(), r.axis().max(), r.axis().len());
        Snapshot::from_field(&r)
    } else {
        if bounds.len() != 4 {
            return Err(Error::InvalidArgument("--bounds takes x_min,x_max,v_min,v_max for a density".into()));
        }
        let grid = PhaseGrid::new([bounds[0], bounds[1]], [bounds[2], bounds[3]], snap.nx as usize, snap.nv as usize)?;
        let f = DensityField::new(grid, snap.values, snap.time)?;
        let r = scale_density(&f, u, interp)?;
        let g = r.grid();
        println!(
            "x: [{}, {}] on {} nodes, v: [{}, {}] on {} nodes",
            g.x.min(),
            g.x.max(),
            g.nx(),
            g.v.min(),
            g.v.max(),
            g.nv()
        );
        Snapshot::from_density(&r)
    };
    out.write(&output)?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => run(config),
        Command::Majorant { c, cap, ds } => majorant_existence_time(c, cap, ds).map(|m| {
            match m.blowup_time {
                Some(t) => println!("{t}"),
                None => println!("none"),
            }
            ExitCode::SUCCESS
        }),
        Command::Transform {
            u,
            bounds,
            interpolation,
            input,
            output,
        } => transform(u, &bounds, &interpolation, input, output),
        Command::Diff { a, b } => Snapshot::read(&a)
            .and_then(|sa| sa.sup_distance(&Snapshot::read(&b)?))
            .map(|d| {
                println!("{d}");
                ExitCode::SUCCESS
            }),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
