use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;

use swbench_core::diagnostics::{convergence_study, l1_error, ConvergenceStudy};
use swbench_core::solver::{ProbeValue, RunMeta};
use swbench_core::{run, RunReport, SchemeId};

use crate::config::{parse_schemes, parse_values, usage, Settings, CONSTANTS};
use crate::output::{num, opt_num, snapshot_csv, thin, write, write_json};

const RESIDUAL_HISTORY_LEN: usize = 1000;

#[derive(Serialize)]
struct Exact {
    h_r: Option<f64>,
    l1_error: Option<f64>,
}

#[derive(Serialize)]
struct Diagnostics {
    clip_events: usize,
    severe_clips: usize,
    min_raw_depth: f64,
    sonic_interfaces: usize,
    gate_failures: usize,
    total_mass: f64,
}

#[derive(Serialize)]
struct Summary<'a> {
    config: &'a Settings,
    meta: &'a RunMeta,
    steps: usize,
    final_time: f64,
    met_steady: Option<bool>,
    final_residual: Option<f64>,
    probes: &'a [ProbeValue],
    exact: Exact,
    diagnostics: Diagnostics,
    residual_history: Vec<(f64, f64)>,
}

fn simulate(settings: &Settings) -> anyhow::Result<RunReport> {
    let spec = settings.spec()?;
    Ok(run(&spec, &settings.scheme_config(), &CONSTANTS)?)
}

fn exact_for(settings: &Settings, report: &RunReport) -> anyhow::Result<Exact> {
    let preset = settings.preset()?;
    // no stationary state across the step (e.g. a supercritical inflow meeting a
    // rising bottom) leaves the column empty rather than failing the run
    let h_r = preset.exact_step(&CONSTANTS).and_then(|r| r.ok()).map(|w| w.h);
    let grid = preset.grid()?;
    let l1 = match preset.exact_profile(&grid, &CONSTANTS).transpose()? {
        Some(exact) => Some(l1_error(&report.final_snapshot().cells, &exact, grid.dx())?),
        None => None,
    };
    Ok(Exact { h_r, l1_error: l1 })
}

pub fn cmd_run(settings: &Settings, out: &Path) -> anyhow::Result<()> {
    let report = simulate(settings)?;
    let dx = settings.preset()?.grid()?.dx();
    let summary = Summary {
        config: settings,
        meta: &report.meta,
        steps: report.steps,
        final_time: report.final_time,
        met_steady: report.met_steady,
        final_residual: report.final_residual(),
        probes: &report.probes,
        exact: exact_for(settings, &report)?,
        diagnostics: Diagnostics {
            clip_events: report.clip_events,
            severe_clips: report.severe_clips,
            min_raw_depth: report.min_raw_depth,
            sonic_interfaces: report.sonic_interfaces,
            gate_failures: report.gate_failures,
            total_mass: report.final_state().total_mass(dx),
        },
        residual_history: thin(&report.residuals, RESIDUAL_HISTORY_LEN),
    };
    write(&out.join("snapshot_final.csv"), &snapshot_csv(&report, &CONSTANTS))?;
    write_json(&out.join("summary.json"), &summary)?;

    let steady = match report.met_steady {
        Some(true) => " steady",
        Some(false) => " NOT steady",
        None => "",
    };
    let probes: String = report.probes.iter().map(|p| format!(" {}={:.6}", p.name, p.h)).collect();
    println!(
        "test {} {} {} cells: t={:.4} steps={}{steady}{probes} clips={} -> {}",
        settings.test,
        settings.scheme,
        settings.cells,
        report.final_time,
        report.steps,
        report.clip_events,
        out.display()
    );
    Ok(())
}

struct SweepPoint {
    h_l: f64,
    h_r: f64,
    exact_h_r: Option<f64>,
    residual: Option<f64>,
    met_steady: Option<bool>,
}

struct SweepRow {
    value: f64,
    scheme: SchemeId,
    outcome: anyhow::Result<SweepPoint>,
}

/// Upstream/downstream depth: the feature probes when the preset has them,
/// otherwise the first and last cells.
fn sweep_point(settings: &Settings) -> anyhow::Result<SweepPoint> {
    let report = simulate(settings)?;
    let cells = &report.final_snapshot().cells;
    let h_l = report.probe("h_l").map_or(cells[0].h, |p| p.h);
    let h_r = report.probe("h_r").map_or(cells[cells.len() - 1].h, |p| p.h);
    Ok(SweepPoint {
        h_l,
        h_r,
        exact_h_r: exact_for(settings, &report)?.h_r,
        residual: report.final_residual(),
        met_steady: report.met_steady,
    })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn cmd_sweep(base: &Settings, param: &str, values: &str, schemes: &[SchemeId], out: &Path) -> anyhow::Result<PathBuf> {
    let values = parse_values(values)?;
    if !base.params.contains_key(param) {
        let known: Vec<&String> = base.params.keys().collect();
        return Err(usage(format!("test {} has no parameter `{param}` (known: {known:?})", base.test)));
    }
    let jobs: Vec<(f64, SchemeId)> = values.iter().flat_map(|&v| schemes.iter().map(move |&s| (v, s))).collect();
    // results come back in job order, independent of completion order
    let rows: Vec<SweepRow> = jobs
        .into_par_iter()
        .map(|(value, scheme)| SweepRow {
            value,
            scheme,
            outcome: sweep_point(&base.with_param(param, value).with_scheme(scheme)),
        })
        .collect();
    let mut csv = String::from("param,value,scheme,h_l,h_r,exact_h_r,steady_residual,met_steady,error\n");
    for row in &rows {
        let (fields, err) = match &row.outcome {
            Ok(p) => (
                [
                    num(p.h_l),
                    num(p.h_r),
                    opt_num(p.exact_h_r),
                    opt_num(p.residual),
                    p.met_steady.map(|b| b.to_string()).unwrap_or_default(),
                ],
                String::new(),
            ),
            Err(e) => (Default::default(), format!("{e:#}")),
        };
        let _ = writeln!(
            csv,
            "{param},{},{},{},{}",
            num(row.value),
            row.scheme,
            fields.join(","),
            csv_field(&err)
        );
    }
    let path = out.join("sweep.csv");
    write(&path, &csv)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    println!("sweep {param}: {} runs ({failed} failed) -> {}", rows.len(), path.display());
    Ok(path)
}

pub const LADDER: [usize; 6] = [100, 200, 400, 800, 1600, 3200];
pub const FULL_LADDER: [usize; 8] = [100, 200, 400, 800, 1600, 3200, 6400, 12800];

fn study(settings: &Settings, ladder: &[usize], bound: f64) -> anyhow::Result<ConvergenceStudy> {
    let preset = settings.preset()?;
    Ok(convergence_study(
        ladder,
        |n| Settings { cells: n, ..settings.clone() }.spec(),
        &settings.scheme_config(),
        |grid| preset.exact_profile(grid, &CONSTANTS).expect("convergence needs a smooth exact profile"),
        bound,
        &CONSTANTS,
    )?)
}

pub fn cmd_convergence(
    base: &Settings,
    schemes: &[SchemeId],
    ladder: &[usize],
    bound: f64,
    sweep: Option<(&str, &str)>,
    out: &Path,
) -> anyhow::Result<()> {
    if base.test != 6 {
        return Err(usage("convergence studies need the smooth channel (--test 6)"));
    }
    if ladder.is_empty() {
        return Err(usage("empty mesh ladder"));
    }
    let cases: Vec<Settings> = match sweep {
        Some((param, values)) => {
            if !base.params.contains_key(param) {
                return Err(usage(format!("test 6 has no parameter `{param}`")));
            }
            parse_values(values)?.into_iter().map(|v| base.with_param(param, v)).collect()
        }
        None => vec![base.clone()],
    };
    let jobs: Vec<Settings> = cases.iter().flat_map(|c| schemes.iter().map(|&s| c.with_scheme(s))).collect();
    let results: Vec<anyhow::Result<ConvergenceStudy>> = jobs.par_iter().map(|s| study(s, ladder, bound)).collect();

    let mut rows = String::from("dh,dl,scheme,n_cells,l1_error,met_bound,met_steady,error\n");
    let mut needed = String::from("dh,dl,scheme,bound,cells_needed,error\n");
    for (s, res) in jobs.iter().zip(&results) {
        let (dh, dl) = (num(s.params["dh"]), num(s.params["dl"]));
        match res {
            Ok(st) => {
                for r in &st.rows {
                    let steady = r.met_steady.map(|b| b.to_string()).unwrap_or_default();
                    let _ = writeln!(rows, "{dh},{dl},{},{},{},{},{steady},", s.scheme, r.n_cells, num(r.l1_error), r.met_bound);
                }
                let cells = st.cells_needed.map(|n| n.to_string()).unwrap_or_default();
                let _ = writeln!(needed, "{dh},{dl},{},{},{cells},", s.scheme, num(bound));
            }
            Err(e) => {
                let e = csv_field(&format!("{e:#}"));
                let _ = writeln!(rows, "{dh},{dl},{},,,,,{e}", s.scheme);
                let _ = writeln!(needed, "{dh},{dl},{},{},,{e}", s.scheme, num(bound));
            }
        }
    }
    write(&out.join("convergence.csv"), &rows)?;
    write(&out.join("cells_needed.csv"), &needed)?;
    for (s, res) in jobs.iter().zip(&results) {
        let cells = match res {
            Ok(st) => st.cells_needed.map_or_else(|| format!("> {}", ladder[ladder.len() - 1]), |n| n.to_string()),
            Err(e) => format!("failed: {e}"),
        };
        println!("dh={} dl={} {:<12} cells needed for L1 <= {bound}: {cells}", s.params["dh"], s.params["dl"], s.scheme.name());
    }
    println!("-> {}", out.display());
    Ok(())
}

pub fn cmd_list_schemes() {
    for s in SchemeId::ALL {
        let status = if s.is_implemented() { "" } else { "  [not implemented]" };
        println!("{:<12} {}{status}", s.name(), s.description());
    }
}

pub fn default_out(sub: &str, settings: &Settings) -> PathBuf {
    PathBuf::from("out").join(format!("{sub}-test{}-{}", settings.test, settings.scheme))
}

pub fn resolve_schemes(list: Option<&str>, settings: &Settings) -> anyhow::Result<Vec<SchemeId>> {
    match list {
        Some(l) => parse_schemes(l),
        None => Ok(vec![settings.scheme]),
    }
}
