//! Command-line front end: generation, measurement, classification, searches
//! and reproduction reports.
//!
//! Exit codes: 0 on success, 2 when a checked invariant is violated, 1 on
//! usage or input errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{
    reproduce_table, search_mu, staircase_sweep, table_row, unit_profile,
    unit_profile_asymptotic, TableFamily,
};
use crate::error::{Error, Result};
use crate::generators::{
    befill, cantor_grid, class_regular, mu2_shape, shape_class_regular, ClassRegularSpec,
};
use crate::geometry::{Cube, SpaceParams};
use crate::metrics::{fmt_rational, measure_codim};
use crate::partition::Partition;
use crate::sfc::CurveSpec;
use crate::spacetree::{boxes_from_json, check_boxes, minimal_grid, Grid};

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for usage and input errors.
pub const EXIT_USAGE: i32 = 1;
/// Exit code for invariant violations.
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "spacefill", version, about = "Spacetree grids, space-filling curves and surface-to-volume analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a grid or partition family and write it as JSON.
    Gen {
        /// regular, class-regular, cantor, hc, befill or mu2-shape.
        #[arg(long)]
        family: String,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        d: Option<u32>,
        /// Depth M.
        #[arg(short = 'M', long = "depth")]
        m: Option<u32>,
        /// Target class (class-regular, hc).
        #[arg(long)]
        c: Option<u32>,
        /// Number of leading axes (class-regular).
        #[arg(long)]
        r: Option<u32>,
        /// Curve name (hc, befill, mu2-shape).
        #[arg(long)]
        curve: Option<String>,
        /// Target volume (befill).
        #[arg(long)]
        volume: Option<u64>,
        /// Staircase parameter N (mu2-shape).
        #[arg(long)]
        n: Option<u32>,
        /// Partition JSON whose shape replaces `{ℍ}` (hc, befill).
        #[arg(long)]
        shape: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Measure a grid (against itself) or a partition (against its grid).
    Measure {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        partition: Option<PathBuf>,
        /// Codimension of the boundary used for ds and cs.
        #[arg(long, default_value_t = 1)]
        c: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pre-classify and classify a partition.
    Classify {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduce the dv/ds table of the class-regular and Cantor grids.
    Table {
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long = "max-M", default_value_t = 10)]
        max_m: u32,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sweep the maximum asymptotic surface-to-volume ratio over volumes.
    Staircase {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(short = 'M', long = "depth")]
        m: u32,
        /// Number of geometric sample volumes.
        #[arg(long, default_value_t = 64)]
        points: usize,
        /// Use leading-order volumes instead of building each `H_c`.
        #[arg(long)]
        asymptotic: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Depth-bounded search for the extremal constant of one class.
    SearchMu {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(long)]
        c: u32,
        #[arg(long = "depth-bound", default_value_t = 3)]
        depth_bound: u32,
        /// Depth used for the vertex weight when c = d.
        #[arg(short = 'M', long = "depth", default_value_t = 8)]
        m: u32,
        #[arg(long, default_value_t = 2_000_000)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Sampled locality check of a curve on the regular grid.
    Locality {
        #[arg(long)]
        curve: String,
        #[arg(long)]
        k: Option<u32>,
        #[arg(long)]
        d: Option<u32>,
        #[arg(short = 'M', long = "depth")]
        m: u32,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check that a grid (or the grid of a partition) file is a grid.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
    },
}

/// Failure of a CLI run.
enum Failure {
    Usage(String),
    Violation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        Failure::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Runs the CLI on `args` (including the program name) and returns the exit
/// code. Reports go to `out` (or to `--out` files), diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = if code == EXIT_OK {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Violation(msg)) => {
            let _ = writeln!(out, "{msg}");
            let _ = writeln!(err, "violation: {msg}");
            EXIT_VIOLATION
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write) -> CliResult<()> {
    match cmd {
        Command::Gen {
            family,
            k,
            d,
            m,
            c,
            r,
            curve,
            volume,
            n,
            shape,
            out: path,
        } => {
            let text = gen(&family, k, d, m, c, r, curve.as_deref(), volume, n, shape.as_deref())?;
            emit(out, path.as_deref(), &text)
        }
        Command::Measure {
            input,
            partition,
            c,
            out: path,
        } => {
            let report = match partition {
                Some(p) => {
                    let part = Partition::from_json(&read(&p)?).map_err(|e| in_file(&p, e))?;
                    if let Ok(g) = Grid::from_json(&read(&input)?) {
                        if &g != part.grid() {
                            return Err(Failure::Usage(format!(
                                "{}: partition grid differs from {}",
                                p.display(),
                                input.display()
                            )));
                        }
                    }
                    measure_codim(part.cells(), Some(part.grid()), c)?
                }
                None => {
                    let text = read(&input)?;
                    match Grid::from_json(&text) {
                        Ok(g) => measure_codim(g.cells(), Some(&g), c)?,
                        Err(grid_err) => match Partition::from_json(&text) {
                            Ok(part) => measure_codim(part.cells(), Some(part.grid()), c)?,
                            Err(_) => return Err(in_file(&input, grid_err)),
                        },
                    }
                }
            };
            emit(out, path.as_deref(), &report.to_json())
        }
        Command::Classify { input, out: path } => {
            let part = Partition::from_json(&read(&input)?).map_err(|e| in_file(&input, e))?;
            let view = part.classify()?;
            emit(out, path.as_deref(), &view.to_json())
        }
        Command::Table { k, d, max_m, out: path } => table(k, d, max_m, out, path.as_deref()),
        Command::Staircase {
            curve,
            k,
            d,
            m,
            points,
            asymptotic,
            out: path,
        } => {
            let curve = curve_spec(&curve, k, d)?;
            let params = curve.params();
            let profile = if asymptotic {
                unit_profile_asymptotic(params, m)
            } else {
                unit_profile(params, m)?
            };
            let rows = staircase_sweep(params, &profile, m, points)?;
            if rows.windows(2).any(|w| w[0].r < w[1].r) {
                return Err(Failure::Violation("staircase is not nonincreasing".into()));
            }
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["V", "R_num", "R_den", "regime_c", "alpha"])
                .map_err(csv_err)?;
            for row in rows {
                w.write_record([
                    row.v.to_string(),
                    row.r.numer().to_string(),
                    row.r.denom().to_string(),
                    row.regime.to_string(),
                    fmt_rational(&row.alpha),
                ])
                .map_err(csv_err)?;
            }
            emit(out, path.as_deref(), &csv_text(w)?)
        }
        Command::SearchMu {
            curve,
            k,
            d,
            c,
            depth_bound,
            m,
            budget,
            out: path,
        } => {
            let curve = curve_spec(&curve, k, d)?;
            let est = search_mu(&curve, c, depth_bound, m, budget)?;
            let raw = MuJson {
                c: est.c,
                best: fmt_rational(&est.best),
                lower_bound: fmt_rational(&est.lower_bound),
                analytic_lower: fmt_rational(&est.analytic_lower),
                analytic_upper: fmt_rational(&est.analytic_upper),
                candidates: est.candidates,
                witness: est.witness.iter().map(Cube::to_string).collect(),
            };
            emit(out, path.as_deref(), &json_line(&raw))?;
            let d = curve.params().d();
            if (c < d && est.lower_bound < est.analytic_lower) || est.lower_bound > est.analytic_upper {
                return Err(Failure::Violation(format!(
                    "estimate {} outside the analytic bounds",
                    fmt_rational(&est.lower_bound)
                )));
            }
            Ok(())
        }
        Command::Locality {
            curve,
            k,
            d,
            m,
            samples,
            seed,
            out: path,
        } => {
            let curve = curve_spec(&curve, k, d)?;
            let report = curve.locality_check(m, samples, seed)?;
            let raw = LocalityJson {
                curve: curve.family().name(),
                m,
                samples,
                seed,
                worst_ratio: fmt_rational(&report.worst_ratio),
                worst_pair: [report.worst_pair.0, report.worst_pair.1],
                bound: fmt_rational(&report.bound),
                within_bound: report.within_bound(),
            };
            emit(out, path.as_deref(), &json_line(&raw))?;
            if !report.within_bound() {
                return Err(Failure::Violation(format!(
                    "locality ratio {} exceeds {}",
                    fmt_rational(&report.worst_ratio),
                    fmt_rational(&report.bound)
                )));
            }
            Ok(())
        }
        Command::Validate { input } => {
            let (params, boxes) = match boxes_from_json(&read(&input)?) {
                Ok(v) => v,
                Err(e @ Error::Format(_)) => return Err(in_file(&input, e)),
                Err(e) => return Err(Failure::Violation(format!("{}: {e}", input.display()))),
            };
            let check = check_boxes(params, &boxes);
            if let Some((outer, inner)) = &check.containment {
                return Err(Failure::Violation(format!(
                    "not a grid: {outer} contains {inner}"
                )));
            }
            if !check.is_grid() {
                return Err(Failure::Violation(format!(
                    "not a grid: coverage {}",
                    fmt_rational(&check.coverage)
                )));
            }
            let _ = writeln!(out, "ok: {} cells, coverage 1/1", boxes.len());
            Ok(())
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn gen(
    family: &str,
    k: Option<u32>,
    d: Option<u32>,
    m: Option<u32>,
    c: Option<u32>,
    r: Option<u32>,
    curve: Option<&str>,
    volume: Option<u64>,
    n: Option<u32>,
    shape_file: Option<&Path>,
) -> CliResult<String> {
    let need = |v: Option<u32>, flag: &str| {
        v.ok_or_else(|| Failure::Usage(format!("--family {family} needs {flag}")))
    };
    let plain = |k: Option<u32>, d: Option<u32>| -> CliResult<SpaceParams> {
        Ok(SpaceParams::new(k.unwrap_or(2), d.unwrap_or(2))?)
    };
    let shape_q = |params: SpaceParams| -> CliResult<Vec<Cube>> {
        match shape_file {
            Some(p) => {
                let part = Partition::from_json(&read(p)?).map_err(|e| in_file(p, e))?;
                part.params().ensure_same(&params)?;
                Ok(part.shape())
            }
            None => Ok(vec![Cube::root(params)]),
        }
    };
    match family {
        "regular" => Ok(Grid::regular(plain(k, d)?, need(m, "-M")?)?.to_json()),
        "class-regular" => {
            let spec = ClassRegularSpec::new(plain(k, d)?, need(c, "--c")?, need(r, "--r")?, need(m, "-M")?)?;
            Ok(class_regular(spec)?.to_json())
        }
        "cantor" => Ok(cantor_grid(SpaceParams::new(k.unwrap_or(3), d.unwrap_or(2))?, need(m, "-M")?)?.to_json()),
        "hc" => {
            let curve = curve_spec(curve.unwrap_or("hilbert2d"), k, d)?;
            let q = shape_q(curve.params())?;
            let cells = shape_class_regular(&q, need(m, "-M")?, need(c, "--c")?)?;
            Ok(partition_of(&curve, cells)?.to_json())
        }
        "befill" => {
            let curve = curve_spec(curve.unwrap_or("hilbert2d"), k, d)?;
            let q = shape_q(curve.params())?;
            let v = volume.ok_or_else(|| Failure::Usage("--family befill needs --volume".into()))?;
            let cells = befill(&q, v, need(m, "-M")?, &curve)?;
            Ok(partition_of(&curve, cells)?.to_json())
        }
        "mu2-shape" => {
            let curve = curve_spec(curve.unwrap_or("hilbert2d"), k, d)?;
            let cells = mu2_shape(need(n, "--n")?, &curve)?;
            Ok(partition_of(&curve, cells)?.to_json())
        }
        other => Err(Failure::Usage(format!(
            "unknown family {other:?} (regular, class-regular, cantor, hc, befill, mu2-shape)"
        ))),
    }
}

/// The cells as a partition over their minimal grid, ordered by the curve
/// when they are consecutive along it.
fn partition_of(curve: &CurveSpec, cells: Vec<Cube>) -> Result<Partition> {
    let grid = minimal_grid(curve.params(), &cells)?;
    match Partition::from_cells(grid.clone(), Some(curve.clone()), cells.clone()) {
        Err(Error::NotConsecutive) => Partition::from_cells(grid, None, cells),
        other => other,
    }
}

fn table(
    k: Option<u32>,
    d: Option<u32>,
    max_m: u32,
    out: &mut dyn Write,
    path: Option<&Path>,
) -> CliResult<()> {
    let families: Vec<TableFamily> = TableFamily::all()
        .into_iter()
        .filter(|f| {
            let p = f.params();
            k.is_none_or(|k| k == p.k()) && d.is_none_or(|d| d == p.d())
        })
        .collect();
    if families.is_empty() {
        return Err(Failure::Usage("no table rows for these parameters".into()));
    }
    let rows = if families.len() == TableFamily::all().len() {
        reproduce_table(max_m)?
    } else {
        let mut rows = Vec::new();
        for f in families {
            for m in 1..=max_m {
                rows.push(table_row(f, m)?);
            }
        }
        rows
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["grid", "k", "d", "M", "dv", "ds", "dr_num", "dr_den"])
        .map_err(csv_err)?;
    for row in &rows {
        w.write_record([
            row.grid.clone(),
            row.params.k().to_string(),
            row.params.d().to_string(),
            row.m.to_string(),
            row.dv.to_string(),
            row.ds.to_string(),
            row.dr.numer().to_string(),
            row.dr.denom().to_string(),
        ])
        .map_err(csv_err)?;
    }
    emit(out, path, &csv_text(w)?)?;
    if let Some(bad) = rows.iter().find(|r| !r.matches()) {
        return Err(Failure::Violation(format!(
            "{} at M={}: measured (dv, ds) = ({}, {}), closed form ({}, {})",
            bad.grid, bad.m, bad.dv, bad.ds, bad.expected.0, bad.expected.1
        )));
    }
    Ok(())
}

#[derive(Serialize)]
struct MuJson {
    c: u32,
    best: String,
    lower_bound: String,
    analytic_lower: String,
    analytic_upper: String,
    candidates: usize,
    witness: Vec<String>,
}

#[derive(Serialize)]
struct LocalityJson {
    curve: &'static str,
    m: u32,
    samples: usize,
    seed: u64,
    worst_ratio: String,
    worst_pair: [usize; 2],
    bound: String,
    within_bound: bool,
}

/// Resolves a curve name with `k` defaulting to 3 for Peano and 2 otherwise,
/// and `d` defaulting to 2.
fn curve_spec(name: &str, k: Option<u32>, d: Option<u32>) -> Result<CurveSpec> {
    let default_k = if name == "peano" { 3 } else { 2 };
    CurveSpec::from_name(name, SpaceParams::new(k.unwrap_or(default_k), d.unwrap_or(2))?)
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn in_file(path: &Path, e: Error) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn emit(out: &mut dyn Write, path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Usage(e.to_string())),
    }
}

fn json_line<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string(v).expect("report serializes");
    s.push('\n');
    s
}

fn csv_err(e: csv::Error) -> Failure {
    Failure::Usage(e.to_string())
}

fn csv_text(w: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = w.into_inner().map_err(|e| Failure::Usage(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::Usage(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["spacefill"];
        argv.extend_from_slice(args);
        let code = run(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(call(&[]).0, EXIT_USAGE);
        assert_eq!(call(&["gen", "--family", "nope", "-M", "2"]).0, EXIT_USAGE);
        assert_eq!(call(&["gen", "--family", "regular"]).0, EXIT_USAGE);
        assert_eq!(call(&["locality", "--curve", "hilbert2d", "-M", "3"]).0, EXIT_USAGE);
    }

    #[test]
    fn search_mu_reports_json() {
        let (code, out, _) = call(&["search-mu", "--curve", "hilbert2d", "--c", "0", "--depth-bound", "1"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("\"lower_bound\":\"1/1\""), "{out}");
    }

    #[test]
    fn table_small() {
        let (code, out, _) = call(&["table", "--k", "3", "--d", "2", "--max-M", "2"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(out.lines().nth(1), Some("cantor,3,2,1,9,12,4,3"));
    }
}
