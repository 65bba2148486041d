use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use metric_lj::inner_solver::{asymptotic_table, solve_inner, SolveOptions, TableRow};
use metric_lj::metric_polytope::FacetSystem;
use metric_lj::mve_oracle::{pattern_spread, solve_mve, symmetry_average, OracleOptions};
use metric_lj::outer_certificate::{john_certificate, outer_report, MAX_JOHN_N};
use metric_lj::pairspace::pairs;
use metric_lj::report::{csv_line, csv_number, table_csv, to_json};
use metric_lj::sandwich_analysis::{
    contact_points, containment_audit, corner_audit, ContainmentAudit, SandwichReport, MAX_AUDIT_N,
    TOL_TANGENCY,
};
use metric_lj::Error;
use serde_json::json;

const MAX_SPECTRAL_N: usize = 10_000;
const MAX_VECTOR_N: usize = 3_000;
const MAX_ORACLE_N: usize = 5;

#[derive(Debug, Parser)]
#[command(
    name = "metric-lj",
    version,
    about = "Löwner-John ellipsoids of the metric polytope"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Maximum-volume inscribed ellipsoid from the reduced program.
    Inner,
    /// Circumscribed ball, centred inscribed ball and shrink factor.
    Outer,
    /// Inflation factors, minimal coordinate and contact points, with audits for small n.
    Sandwich,
    /// Tangency points with a triangle facet and a bound facet.
    Contacts,
    /// John decomposition over all cut metrics.
    VerifyJohn,
    /// Generic inscribed-ellipsoid solver against the reduced program.
    OracleCompare,
    /// Reduced-program optimum for every n in --n-list.
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, clap::Args)]
struct Opts {
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Comma-separated list of n values.
    #[arg(long, global = true, value_delimiter = ',')]
    n_list: Option<Vec<usize>>,
    #[arg(long, global = true, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, global = true, default_value_t = 500)]
    max_iter: usize,
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true)]
    verbose: bool,
}

enum Failure {
    Usage(String),
    NotConverged(String),
    Check { output: String, reason: String },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::NotConverged { .. } | Error::Infeasible | Error::Unbounded => {
                Failure::NotConverged(e.to_string())
            }
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Usage(e.to_string())
    }
}

type Outcome = Result<String, Failure>;

impl Opts {
    fn n(&self, limit: usize, what: &str) -> Result<usize, Failure> {
        let n = self
            .n
            .ok_or_else(|| Failure::Usage(format!("{what} requires --n")))?;
        check_n(n, limit, what)?;
        Ok(n)
    }

    fn solve_options(&self) -> Result<SolveOptions, Failure> {
        let opts = SolveOptions {
            tol_kkt: self.tol,
            max_iter: self.max_iter,
        };
        opts.validate()?;
        Ok(opts)
    }

    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }
}

fn check_n(n: usize, limit: usize, what: &str) -> Result<(), Failure> {
    if n < 3 {
        return Err(Failure::Usage(format!(
            "{what}: n must be at least 3, got {n}"
        )));
    }
    if n > limit {
        return Err(Failure::Usage(format!(
            "{what}: n = {n} exceeds the limit {limit}"
        )));
    }
    Ok(())
}

fn inner(opts: &Opts) -> Outcome {
    let n = opts.n(MAX_SPECTRAL_N, "inner")?;
    let r = solve_inner(n, &opts.solve_options()?)?;
    opts.note(format!(
        "n={n} iterations={} kkt={:e}",
        r.iterations, r.kkt_residual
    ));
    Ok(match opts.format {
        Format::Json => to_json(&r.to_json())?,
        Format::Csv => table_csv(&[TableRow::from_result(&r)]),
    })
}

fn outer(opts: &Opts) -> Outcome {
    let n = opts.n(MAX_SPECTRAL_N, "outer")?;
    let r = outer_report(n)?;
    Ok(match opts.format {
        Format::Json => to_json(&r)?,
        Format::Csv => format!(
            "n,radius,center,inscribed_radius,triangle_distance,bound_distance,shrink_factor\n{n},{}\n",
            csv_line(&[
                r.radius,
                r.center,
                r.inscribed_radius,
                r.triangle_distance,
                r.bound_distance,
                r.shrink_factor
            ])
        ),
    })
}

fn audit_csv(a: &ContainmentAudit) -> String {
    let mut out = String::from(ContainmentAudit::CSV_HEADER);
    out.push('\n');
    for r in &a.rows {
        let _ = writeln!(
            out,
            "{},{},{}",
            r.sample_index,
            r.min_slack_constraint_kind,
            csv_number(r.min_slack)
        );
    }
    out
}

fn sandwich(opts: &Opts) -> Outcome {
    let n = opts.n(MAX_VECTOR_N, "sandwich")?;
    let solved = solve_inner(n, &opts.solve_options()?)?;
    let report = SandwichReport::build(&solved)?;
    if opts.format == Format::Csv && n > MAX_AUDIT_N {
        return Err(Failure::Usage(format!(
            "sandwich --format csv emits the containment audit, limited to n <= {MAX_AUDIT_N}"
        )));
    }
    let output = match opts.format {
        Format::Json => to_json(&report.to_json())?,
        Format::Csv => String::new(),
    };
    if n > MAX_AUDIT_N {
        opts.note(format!("n={n}: audits skipped above n = {MAX_AUDIT_N}"));
        return Ok(output);
    }
    let audit = containment_audit(&solved.ellipsoid, opts.samples, opts.seed)?;
    let corners = corner_audit(&solved.ellipsoid, opts.samples, opts.seed)?;
    opts.note(format!(
        "containment: samples={} min_slack={:e} violations={} triangle_contact={:e} bound_contact={:e}",
        audit.samples,
        audit.min_slack,
        audit.violations,
        audit.triangle_contact_slack,
        audit.bound_contact_slack
    ));
    opts.note(format!(
        "corners: points={} exhaustive={} max_dilation={} r_upper={}",
        corners.points, corners.exhaustive, corners.max_dilation, corners.bound
    ));
    let output = match opts.format {
        Format::Json => output,
        Format::Csv => audit_csv(&audit),
    };
    if !audit.passed || !corners.passed {
        return Err(Failure::Check {
            output,
            reason: format!(
                "audit failed: containment passed={} corners passed={}",
                audit.passed, corners.passed
            ),
        });
    }
    Ok(output)
}

fn contacts(opts: &Opts) -> Outcome {
    let n = opts.n(MAX_VECTOR_N, "contacts")?;
    let solved = solve_inner(n, &opts.solve_options()?)?;
    let c = contact_points(&solved.ellipsoid)?;
    let output = match opts.format {
        Format::Json => to_json(&json!({
            "n": n,
            "p": c.p.as_slice(),
            "q": c.q.as_slice(),
            "triangle_residual": c.triangle_residual,
            "bound_residual": c.bound_residual,
            "dilation_p": c.dilation_p,
            "dilation_q": c.dilation_q,
        }))?,
        Format::Csv => {
            let mut out = String::from("flat,i,j,p,q\n");
            for (k, (i, j)) in pairs(n).enumerate() {
                let _ = writeln!(out, "{k},{i},{j},{}", csv_line(&[c.p[k], c.q[k]]));
            }
            out
        }
    };
    if c.max_residual() > TOL_TANGENCY {
        return Err(Failure::Check {
            output,
            reason: format!(
                "tangency residual {:e} exceeds {TOL_TANGENCY:e}",
                c.max_residual()
            ),
        });
    }
    Ok(output)
}

fn verify_john(opts: &Opts) -> Outcome {
    let n = opts.n(MAX_JOHN_N, "verify-john")?;
    let cert = john_certificate(n)?;
    let output = match opts.format {
        Format::Json => to_json(&cert.to_json(opts.verbose))?,
        Format::Csv => format!(
            "n,num_contacts,lambda,barycenter_residual,identity_residual\n{n},{},{}\n",
            cert.num_contacts(),
            csv_line(&[
                cert.lambda(),
                cert.barycenter_residual,
                cert.identity_residual
            ])
        ),
    };
    opts.note(format!(
        "without the trivial cut: barycenter={:e} identity={:e}",
        cert.nontrivial_barycenter_residual, cert.nontrivial_identity_residual
    ));
    if !cert.is_valid() {
        return Err(Failure::Check {
            output,
            reason: "John decomposition residuals exceed 1e-12".into(),
        });
    }
    Ok(output)
}

fn oracle_compare(opts: &Opts) -> Outcome {
    let n = opts.n(MAX_ORACLE_N, "oracle-compare")?;
    let solved = solve_inner(n, &opts.solve_options()?)?;
    let hs = FacetSystem::build(n)?.to_halfspaces();
    let oracle_opts = OracleOptions {
        tol: opts.tol,
        ..OracleOptions::for_metric_polytope(n)
    };
    let oracle = solve_mve(&hs, &oracle_opts)?;
    let dense = solved.ellipsoid.materialize()?;
    let entry_diff = (&oracle.ellipsoid.a - &dense).amax();
    let center_diff = oracle
        .ellipsoid
        .c
        .iter()
        .map(|v| (v - solved.ellipsoid.delta).abs())
        .fold(0.0, f64::max);
    let log_det_diff = (oracle.log_det - solved.log_volume_factor).abs();
    let spread = pattern_spread(&oracle.ellipsoid, n)?;
    let averaged = symmetry_average(&oracle.ellipsoid, n)?;
    let output = match opts.format {
        Format::Json => to_json(&json!({
            "n": n,
            "inner": solved.ellipsoid.to_json(),
            "oracle": oracle.to_json(),
            "oracle_averaged": averaged.to_json(),
            "log_det_inner": solved.log_volume_factor,
            "log_det_oracle": oracle.log_det,
            "log_det_diff": log_det_diff,
            "max_entry_diff": entry_diff,
            "max_center_diff": center_diff,
            "pattern_spread": spread.classes,
        }))?,
        Format::Csv => format!(
            "n,log_det_inner,log_det_oracle,log_det_diff,max_entry_diff,max_center_diff,pattern_spread\n{n},{}\n",
            csv_line(&[
                solved.log_volume_factor,
                oracle.log_det,
                log_det_diff,
                entry_diff,
                center_diff,
                spread.max()
            ])
        ),
    };
    if entry_diff > 1e-5 || center_diff > 1e-5 || log_det_diff > 1e-6 || spread.max() > 1e-5 {
        return Err(Failure::Check {
            output,
            reason: "oracle and reduced program disagree".into(),
        });
    }
    Ok(output)
}

fn table(opts: &Opts) -> Outcome {
    let list = opts
        .n_list
        .clone()
        .or_else(|| opts.n.map(|n| vec![n]))
        .ok_or_else(|| Failure::Usage("table requires --n-list".into()))?;
    for &n in &list {
        check_n(n, MAX_SPECTRAL_N, "table")?;
    }
    let rows = asymptotic_table(&list, &opts.solve_options()?)?;
    Ok(match opts.format {
        Format::Csv => table_csv(&rows.iter().map(|(r, _)| *r).collect::<Vec<_>>()),
        Format::Json => to_json(&rows.iter().map(|(_, s)| s.to_json()).collect::<Vec<_>>())?,
    })
}

fn emit(opts: &Opts, text: &str) -> io::Result<()> {
    match &opts.out {
        Some(path) => fs::write(path, text),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(1),
            };
        }
    };
    let opts = &cli.opts;
    let outcome = match cli.command {
        Command::Inner => inner(opts),
        Command::Outer => outer(opts),
        Command::Sandwich => sandwich(opts),
        Command::Contacts => contacts(opts),
        Command::VerifyJohn => verify_john(opts),
        Command::OracleCompare => oracle_compare(opts),
        Command::Table => table(opts),
    };
    let (text, code, message) = match outcome {
        Ok(text) => (Some(text), 0, None),
        Err(Failure::Usage(m)) => (None, 1, Some(m)),
        Err(Failure::NotConverged(m)) => (None, 2, Some(m)),
        Err(Failure::Check { output, reason }) => (Some(output), 3, Some(reason)),
    };
    if let Some(m) = message {
        eprintln!("error: {m}");
    }
    if let Some(text) = text {
        if let Err(e) = emit(opts, &text) {
            eprintln!("error: cannot write output: {e}");
            return ExitCode::from(1);
        }
    }
    ExitCode::from(code)
}
