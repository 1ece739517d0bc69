use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::RunConfig;
use super::snapshot::Snapshot;
use crate::analysis::{
    continuation_report, db_bound_check, derivative_rep_check, dyadic_offsets, field_bound_check, holder_quotient,
    iterate_envelope_check, pde_residual, scenario_monotone_check, support_recursion_check, BoundConstants,
    DiagnosticsTrace, ScenarioReport,
};
use crate::error::{Error, Result};
use crate::phase_space::Interpolation;
use crate::solver::{
    majorant_existence_time, solve_direct, solve_picard, EngineOptions, PicardTrace, SolutionHistory,
};

/// Verdict of one invariant check: it passes when `value <= tolerance`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl CheckResult {
    fn new(name: &str, value: f64, tolerance: f64) -> CheckResult {
        CheckResult {
            name: name.to_string(),
            value,
            tolerance,
            pass: value <= tolerance,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunArtifacts {
    pub out_dir: PathBuf,
    /// Every file written, summary last.
    pub files: Vec<PathBuf>,
    pub summary: PathBuf,
    pub checks: Vec<CheckResult>,
    pub pass: bool,
}

impl RunArtifacts {
    /// Process exit status: 0 when every enabled check passed, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.pass {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct PicardSummary {
    iterations: usize,
    converged: bool,
    final_b_diff: f64,
    final_f_diff: f64,
}

#[derive(Serialize)]
struct HolderSummary {
    max_space_quotient: f64,
    max_time_quotient: f64,
}

#[derive(Serialize)]
struct ResidualSummary {
    density_residual: f64,
    field_residual: f64,
    dv_rep_residual: f64,
    dx_rep_residual: f64,
}

#[derive(Serialize)]
struct MajorantSummary {
    c: f64,
    cap: f64,
    blowup_time: Option<f64>,
}

#[derive(Serialize)]
struct ContinuationSummary {
    cap: f64,
    max_indicator: f64,
    exceeds_cap: bool,
    exceeds_majorant: bool,
    blowup_suspected: bool,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a RunConfig,
    primary_engine: &'static str,
    levels: usize,
    mass_drift: f64,
    picard: Option<PicardSummary>,
    cross_engine_distance: Option<f64>,
    scenario: Option<&'a ScenarioReport>,
    holder: Option<HolderSummary>,
    residual: Option<ResidualSummary>,
    majorant: Option<MajorantSummary>,
    continuation: ContinuationSummary,
    checks: &'a [CheckResult],
    files: Vec<String>,
    pass: bool,
}

struct Writer {
    dir: PathBuf,
    files: Vec<PathBuf>,
}

impl Writer {
    fn put(&mut self, name: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| Error::from(e).context(path.display().to_string()))?;
        self.files.push(path);
        Ok(())
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn picard_csv(trace: &PicardTrace) -> String {
    let mut out = String::from("iteration,b_diff,f_diff,ratio\n");
    for (n, (b, f)) in trace.b_diffs.iter().zip(&trace.f_diffs).enumerate() {
        let ratio = (n > 0).then(|| b / trace.b_diffs[n - 1]);
        let _ = writeln!(out, "{},{b:?},{f:?},{}", n + 1, opt(ratio));
    }
    out
}

fn sup_norm_check(h: &SolutionHistory, f0_sup: f64, exact: bool) -> CheckResult {
    let peak = h.densities().iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
    let bound = if exact { f0_sup + 1e-12 } else { f0_sup * (1.0 + 1e-6) + 1e-12 };
    CheckResult::new("sup_norm", peak, bound)
}

/// Executes the configured engines and diagnostics and writes every output
/// under `config.out_dir`.
///
/// With `engine = both` the Picard history is the primary output and the
/// direct engine is used only for the cross-engine distance.
pub fn run_scenario(config: &RunConfig) -> Result<RunArtifacts> {
    let grid = config.grid()?;
    let data = &config.data;
    let opts = EngineOptions::default().with_interpolation(config.interpolation);
    std::fs::create_dir_all(&config.out_dir)
        .map_err(|e| Error::from(e).context(config.out_dir.display().to_string()))?;
    let mut w = Writer {
        dir: config.out_dir.clone(),
        files: Vec::new(),
    };
    let mut checks = Vec::new();
    let consts = BoundConstants::from_data(data);
    let (dt, dv) = (config.dt, grid.dv());

    let picard = if config.engine.runs_picard() {
        let (h, trace) = solve_picard(data, &grid, config.t_final, dt, config.picard_tol, config.picard_max_iter, &opts)
            .map_err(|e| e.context("picard engine"))?;
        Some((h, trace))
    } else {
        None
    };
    let direct = if config.engine.runs_direct() {
        Some(solve_direct(data, &grid, config.t_final, dt, &opts).map_err(|e| e.context("direct engine"))?)
    } else {
        None
    };

    let (primary, primary_name) = match (&picard, &direct) {
        (Some((h, _)), _) => (h, "picard"),
        (None, Some(h)) => (h, "direct"),
        (None, None) => unreachable!("every engine selection runs at least one engine"),
    };
    let exact = picard.is_some() || config.interpolation == Interpolation::MonotoneCubic;
    checks.push(sup_norm_check(primary, data.density.sup_norm(), exact));

    let trace = DiagnosticsTrace::from_history(primary);
    w.put("diagnostics.csv", trace.to_csv().as_bytes())?;
    let mass_drift = trace.mass_drift();
    checks.push(CheckResult::new("mass_conservation", mass_drift, config.mass_tol));

    let recursion = match &picard {
        Some((_, t)) => t
            .supports
            .iter()
            .zip(&t.driving_field_sups)
            .map(|(p, b)| support_recursion_check(p, b, dt, dv).max_ratio)
            .fold(0.0, f64::max),
        None => {
            let p: Vec<f64> = trace.records.iter().map(|r| r.support).collect();
            let b: Vec<f64> = trace.records.iter().map(|r| r.b_sup).collect();
            support_recursion_check(&p, &b, dt, dv).max_ratio
        }
    };
    checks.push(CheckResult::new("support_recursion", recursion, 1.0));
    checks.push(CheckResult::new("field_bound", field_bound_check(&trace, &consts, dv).max_ratio, 1.0));
    checks.push(CheckResult::new("db_bound", db_bound_check(&trace, &consts, dv).max_ratio, 1.0));

    let mut picard_summary = None;
    if let Some((_, t)) = &picard {
        w.put("picard_trace.csv", picard_csv(t).as_bytes())?;
        let env = iterate_envelope_check(&t.supports, dt, dv, &consts);
        checks.push(CheckResult::new("iterate_envelope", env.max_ratio, 1.0));
        let last = t.combined().last().copied().unwrap_or(0.0);
        checks.push(CheckResult::new("picard_converged", last, config.picard_tol));
        picard_summary = Some(PicardSummary {
            iterations: t.iterations,
            converged: t.converged,
            final_b_diff: t.b_diffs.last().copied().unwrap_or(0.0),
            final_f_diff: t.f_diffs.last().copied().unwrap_or(0.0),
        });
    }

    let mut cross = None;
    if let (Some((hp, _)), Some(hd)) = (&picard, &direct) {
        let d = hp.field_distance(hd)?;
        checks.push(CheckResult::new("cross_engine", d, config.cross_engine_tolerance(grid.dx())));
        cross = Some(d);
    }

    let scenario = if config.diag_scenario {
        let r = scenario_monotone_check(primary).map_err(|e| e.context("scenario check"))?;
        let mut csv = String::from("t,min_field,support_inf\n");
        for (k, lo) in r.support_inf.iter().enumerate() {
            let _ = writeln!(csv, "{:?},{:?},{}", primary.time(k), primary.field(k).min(), opt(*lo));
        }
        w.put("scenario.csv", csv.as_bytes())?;
        checks.push(CheckResult::new("scenario_field_nonnegative", -r.min_field, r.field_tolerance));
        checks.push(CheckResult::new(
            "scenario_support_nondecreasing",
            r.max_support_drop,
            r.support_tolerance,
        ));
        Some(r)
    } else {
        None
    };

    let holder = if config.diag_holder {
        let space = dyadic_offsets(grid.nx(), 1, 16);
        let time = dyadic_offsets(primary.len(), 1, 16);
        let r = holder_quotient(primary.fields(), dt, &space, &time)?;
        w.put("holder.csv", r.to_csv().as_bytes())?;
        Some(HolderSummary {
            max_space_quotient: r.max_space_quotient(),
            max_time_quotient: r.max_time_quotient(),
        })
    } else {
        None
    };

    let residual = if config.diag_residual {
        let pde = pde_residual(primary).map_err(|e| e.context("residual"))?;
        let rep = derivative_rep_check(primary, primary.end_time(), config.interpolation, 1)
            .map_err(|e| e.context("derivative representation"))?;
        let csv = format!(
            "quantity,value\ndensity_residual,{:?}\nfield_residual,{:?}\ndv_rep_residual,{:?}\ndx_rep_residual,{:?}\nnodes_checked,{}\nnodes_skipped,{}\n",
            pde.density, pde.field, rep.dv_residual, rep.dx_residual, rep.nodes_checked, rep.nodes_skipped
        );
        w.put("residual.csv", csv.as_bytes())?;
        Some(ResidualSummary {
            density_residual: pde.density,
            field_residual: pde.field,
            dv_rep_residual: rep.dv_residual,
            dx_rep_residual: rep.dx_residual,
        })
    } else {
        None
    };

    let majorant = match config.majorant_c {
        Some(c) => {
            let m = majorant_existence_time(c, config.majorant_cap, dt)?;
            let mut csv = String::from("t,F\n");
            for (t, f) in &m.trajectory {
                let _ = writeln!(csv, "{t:?},{f:?}");
            }
            w.put("majorant.csv", csv.as_bytes())?;
            Some(m)
        }
        None => None,
    };

    let cont = continuation_report(&trace, majorant.as_ref(), config.blowup_cap_factor);
    let mut csv = String::from("t,indicator,majorant\n");
    for (r, s) in trace.records.iter().zip(&cont.indicator) {
        let f = majorant.as_ref().and_then(|m| m.value_at(r.t));
        let _ = writeln!(csv, "{:?},{s:?},{}", r.t, opt(f));
    }
    w.put("continuation.csv", csv.as_bytes())?;
    let max_indicator = cont.indicator.iter().copied().fold(0.0, f64::max);
    checks.push(CheckResult::new("continuation", max_indicator, cont.cap));
    if majorant.is_some() {
        let excess = trace
            .records
            .iter()
            .zip(&cont.indicator)
            .filter_map(|(r, s)| majorant.as_ref().and_then(|m| m.value_at(r.t)).map(|f| s - f))
            .fold(f64::NEG_INFINITY, f64::max);
        checks.push(CheckResult::new("majorant_dominates", excess, 0.0));
    }

    for &t in &config.snapshot_times {
        let k = config.level_of(t);
        w.put(&format!("f_{k:06}.bin"), &Snapshot::from_density(primary.density(k)).to_bytes())?;
        w.put(&format!("B_{k:06}.bin"), &Snapshot::from_field(primary.field(k)).to_bytes())?;
    }

    let pass = checks.iter().all(|c| c.pass);
    let summary_path = config.out_dir.join("summary.json");
    let mut files: Vec<String> = w.files.iter().map(|p| file_name(p)).collect();
    files.push(file_name(&summary_path));
    let summary = Summary {
        config,
        primary_engine: primary_name,
        levels: primary.len(),
        mass_drift,
        picard: picard_summary,
        cross_engine_distance: cross,
        scenario: scenario.as_ref(),
        holder,
        residual,
        majorant: majorant.as_ref().map(|m| MajorantSummary {
            c: m.c,
            cap: m.cap,
            blowup_time: m.blowup_time,
        }),
        continuation: ContinuationSummary {
            cap: cont.cap,
            max_indicator,
            exceeds_cap: cont.exceeds_cap,
            exceeds_majorant: cont.exceeds_majorant,
            blowup_suspected: cont.blowup_suspected,
        },
        checks: &checks,
        files,
        pass,
    };
    let mut json = serde_json::to_string_pretty(&summary)?;
    json.push('\n');
    w.put("summary.json", json.as_bytes())?;
    Ok(RunArtifacts {
        out_dir: config.out_dir.clone(),
        summary: summary_path,
        files: w.files,
        checks,
        pass,
    })
}

fn file_name(p: &Path) -> String {
    p.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default()
}
