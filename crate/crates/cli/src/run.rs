//! Command execution. Every command writes its table (or record) to `--out`
//! or stdout and a short summary to stderr.

use std::fs::File;
use std::io::{self, BufWriter, Write};

use serde_json::{json, Value};

use qre_core::bounds::sandwich_with_base;
use qre_core::comparison::{comparison_table, COMPARISON_HEADER};
use qre_core::conjecture::conjecture_search;
use qre_core::divergence::{compare_routes, ROUTE_ABS_TOL};
use qre_core::omd::{log_grid, normalization_residual, round_trip, OmdKind};
use qre_core::report::{format_f64, write_rows, Format, SweepRow};
use qre_core::states::StatePair;
use qre_core::sweep::{run_sweep, SweepConfig};
use qre_core::LogBase;

use crate::args::{Command, OutputFormat, RunConfig};
use crate::error::{exit, CliError};

/// Relative tolerance for route agreement in `divergence`.
pub const AGREEMENT_TOL: f64 = 1e-9;
/// Round-trip and normalization tolerance for `repr-check`.
pub const REPR_TOL: f64 = 1e-6;
pub const REPR_GRID: (f64, f64, usize) = (1e-3, 1e3, 60);

fn output(config: &RunConfig) -> Result<Box<dyn Write>, CliError> {
    Ok(match &config.out {
        Some(path) => {
            let file =
                File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Box::new(BufWriter::new(file))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn real(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        json!(format_f64(x))
    }
}

fn opt_real(x: Option<f64>) -> Value {
    x.map_or(Value::Null, real)
}

fn write_table(
    config: &RunConfig,
    header: &[&str],
    records: Vec<Vec<String>>,
    json_rows: Vec<Value>,
) -> Result<(), CliError> {
    let mut out = output(config)?;
    match config.format {
        OutputFormat::Csv => {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(header)
                .map_err(|e| CliError::Io(e.to_string()))?;
            for r in records {
                w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush()?;
        }
        OutputFormat::Json => {
            serde_json::to_writer_pretty(&mut out, &json_rows)
                .map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn load_pair(config: &RunConfig) -> Result<StatePair, CliError> {
    match &config.pair {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            Ok(StatePair::from_json(&text)?)
        }
        None => Ok(config.family.draw(config.dims[0], config.seed)?),
    }
}

fn format_of(config: &RunConfig) -> Format {
    match config.format {
        OutputFormat::Csv => Format::Csv,
        OutputFormat::Json => Format::Json,
    }
}

pub fn run(config: &RunConfig) -> Result<i32, CliError> {
    eprintln!("qre {}: seed={}", config.command.name(), config.seed);
    match config.command {
        Command::Divergence => divergence(config),
        Command::Bounds => bounds(config),
        Command::Sweep => sweep(config),
        Command::Conjecture => conjecture(config),
        Command::ReprCheck => repr_check(config),
        Command::PaperExample => paper_example(config),
    }
}

fn divergence(config: &RunConfig) -> Result<i32, CliError> {
    let pair = load_pair(config)?;
    let rows = compare_routes(&pair, &config.functions)?;
    let header = [
        "dim",
        "f_name",
        "spectral",
        "direct",
        "superoperator",
        "max_abs_diff",
        "max_rel_diff",
        "agree",
    ];
    let opt = |x: Option<f64>| x.map(format_f64).unwrap_or_default();
    let records = rows
        .iter()
        .map(|r| {
            vec![
                pair.dim().to_string(),
                r.f_name.clone(),
                opt(r.spectral),
                opt(r.direct),
                opt(r.superoperator),
                format_f64(r.max_abs_diff),
                format_f64(r.max_rel_diff),
                r.agrees(AGREEMENT_TOL).to_string(),
            ]
        })
        .collect();
    let json_rows = rows
        .iter()
        .map(|r| {
            json!({
                "dim": pair.dim(),
                "f_name": r.f_name,
                "spectral": opt_real(r.spectral),
                "direct": opt_real(r.direct),
                "superoperator": opt_real(r.superoperator),
                "max_abs_diff": real(r.max_abs_diff),
                "max_rel_diff": real(r.max_rel_diff),
                "agree": r.agrees(AGREEMENT_TOL),
            })
        })
        .collect();
    write_table(config, &header, records, json_rows)?;
    let worst_abs = rows.iter().map(|r| r.max_abs_diff).fold(0.0, f64::max);
    let worst_rel = rows.iter().map(|r| r.max_rel_diff).fold(0.0, f64::max);
    let agree = rows.iter().all(|r| r.agrees(AGREEMENT_TOL));
    eprintln!(
        "largest route difference: {worst_abs:.3e} absolute, {worst_rel:.3e} relative; agreement within {AGREEMENT_TOL:e} relative + {ROUTE_ABS_TOL:e} absolute: {agree}"
    );
    Ok(if agree { exit::OK } else { exit::CHECK_FAILED })
}

fn bounds(config: &RunConfig) -> Result<i32, CliError> {
    let pair = load_pair(config)?;
    let seed = pair.seed.unwrap_or(config.seed);
    let tag = pair.tags.first().cloned().unwrap_or_default();
    let mut rows = Vec::new();
    let mut clean = true;
    for f in &config.functions {
        let rep = sandwich_with_base(&pair, f, config.log_base)?;
        clean &= rep.is_clean();
        eprintln!(
            "{}: S = {} ({})",
            f.name(),
            format_f64(rep.divergence.value),
            rep.divergence.method.as_str()
        );
        let s = rep.divergence.value;
        rows.extend(rep.reports.iter().map(|r| {
            // Base-2 bounds are compared with the divergence in bits.
            let s = if r.inputs.log_base == Some(LogBase::Two) {
                s / std::f64::consts::LN_2
            } else {
                s
            };
            SweepRow::from_report(pair.dim(), 0, seed, &tag, s, r)
        }));
        rows.extend(
            rep.chains.iter().map(|c| {
                SweepRow::from_chain(pair.dim(), 0, seed, &tag, f.name(), f.tsallis_q(), c)
            }),
        );
    }
    write_rows(&rows, format_of(config), output(config)?)?;
    Ok(if clean { exit::OK } else { exit::CHECK_FAILED })
}

fn sweep(config: &RunConfig) -> Result<i32, CliError> {
    let summary = run_sweep(&SweepConfig {
        dims: config.dims.clone(),
        trials: config.trials,
        seed: config.seed,
        family: config.family,
        functions: config.functions.clone(),
        chain_qs: config.chain_qs.clone(),
        collect_rows: true,
    });
    write_rows(&summary.rows, format_of(config), output(config)?)?;
    for s in summary.stats.values() {
        eprintln!(
            "{:<18} {:<40} checks={:<7} violations={:<4} worst_slack={}",
            s.f_name,
            s.bound_name,
            s.checks,
            s.violations,
            format_f64(s.worst_slack)
        );
    }
    eprintln!(
        "{} pairs, {} checks, {} violations, {} errors",
        summary.pairs,
        summary.total_checks(),
        summary.total_violations(),
        summary.errors.len()
    );
    if let Some(e) = summary.errors.first() {
        return Err(CliError::Numerical(e.clone()));
    }
    Ok(if summary.total_violations() == 0 {
        exit::OK
    } else {
        exit::CHECK_FAILED
    })
}

fn conjecture(config: &RunConfig) -> Result<i32, CliError> {
    let record = conjecture_search(&config.search)?;
    let mut out = output(config)?;
    writeln!(out, "{}", record.to_json())?;
    out.flush()?;
    for f in &record.families {
        eprintln!(
            "{:?}: max_ratio={} (random {}), violations={}",
            f.family,
            format_f64(f.max_ratio),
            format_f64(f.max_ratio_random),
            f.violation_count
        );
    }
    let mut floors_hold = true;
    for s in &record.sanity {
        eprintln!(
            "sanity {} {:?}: max_ratio={} holds={}",
            s.label,
            s.family,
            format_f64(s.max_ratio),
            s.holds
        );
        floors_hold &= s.holds;
    }
    eprintln!("max_ratio={}", format_f64(record.max_ratio));
    Ok(if floors_hold {
        exit::OK
    } else {
        exit::CHECK_FAILED
    })
}

fn repr_check(config: &RunConfig) -> Result<i32, CliError> {
    let (lo, hi, n) = REPR_GRID;
    let grid = log_grid(lo, hi, n);
    let mut records = Vec::new();
    let mut json_rows = Vec::new();
    let mut ok = true;
    for f in &config.functions {
        let table = round_trip(f, &grid)?;
        let worst = table.iter().map(|r| r.rel_error).fold(0.0, f64::max);
        let residual = normalization_residual(f)?;
        let mut line = format!(
            "{}: max_rel_error={worst:.3e} normalization_residual={residual:.3e}",
            f.name()
        );
        if let OmdKind::NegPower { p } = f.kind() {
            let expected = (p * std::f64::consts::PI / 2.0).cos();
            line += &format!(
                " b={} cos(p*pi/2)={}",
                format_f64(f.unshifted_b()),
                format_f64(expected)
            );
        }
        eprintln!("{line}");
        ok &= worst < REPR_TOL && residual.abs() < REPR_TOL;
        for r in table {
            records.push(vec![
                f.name().to_string(),
                format_f64(r.x),
                format_f64(r.direct),
                format_f64(r.representation),
                format_f64(r.rel_error),
            ]);
            json_rows.push(json!({
                "f_name": f.name(),
                "x": r.x,
                "direct": real(r.direct),
                "representation": real(r.representation),
                "rel_error": real(r.rel_error),
            }));
        }
    }
    write_table(
        config,
        &["f_name", "x", "direct", "representation", "rel_error"],
        records,
        json_rows,
    )?;
    Ok(if ok { exit::OK } else { exit::CHECK_FAILED })
}

fn paper_example(config: &RunConfig) -> Result<i32, CliError> {
    let rows = comparison_table(&config.dims)?;
    let records = rows.iter().map(|r| r.csv_record().to_vec()).collect();
    let json_rows = rows
        .iter()
        .map(|r| serde_json::to_value(r).expect("finite row"))
        .collect();
    write_table(config, &COMPARISON_HEADER, records, json_rows)?;
    Ok(exit::OK)
}
