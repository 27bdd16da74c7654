//! Command-line frontend. Every subcommand builds a [`RunReport`] made of
//! named checks plus a result table, written as CSV or JSON.
//!
//! Exit codes: 0 all checks passed, 1 a check failed, 2 usage error,
//! 3 capacity exceeded.

use std::ffi::OsString;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use num_traits::Signed;
use serde::Serialize;
use serde_json::json;

use crate::auxiliary::{mean_inequality_check, segment_difference, upper_bound_check, BottomDistribution};
use crate::component::ClassProbabilities;
use crate::counting::{
    boundary_count, brute, cdiff_raw, check_identity_even, check_identity_odd, count_c1, count_c2, count_total, Triplet,
};
use crate::engine::Limits;
use crate::error::{Error, Result};
use crate::graph::{BunkbedGraph, Configuration, EdgeProbabilityVector, Network, OriginalGraph};
use crate::montecarlo::{estimate_connection, estimate_difference};
use crate::rational::{parse_decimal_or_fraction, parse_fraction, parse_grid, rat, to_f64, Rational};
use crate::verifier::{partition_check, row_check, theorem_check, threshold_search, CSV_HEADER};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_COUNTEREXAMPLE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

/// Largest K_n handled by the enumeration oracle without `--force`.
pub const ENUM_N_CAP: u32 = 5;
/// Largest K_n handled by the subset DP without `--force`.
pub const DP_N_CAP: u32 = 9;
/// Largest n for brute-force class counts without `--force`.
pub const BRUTE_N_CAP: u32 = 7;

#[derive(Debug, Parser)]
#[command(name = "bunkbed", version, about = "Exact checks of the bunkbed inequality on complete graphs")]
pub struct Cli {
    /// Worker threads.
    #[arg(long, global = true, env = "BUNKBED_WORKERS")]
    pub workers: Option<usize>,
    /// `csv`, `json`, or a file path (format from the extension, CSV unless `.json`).
    #[arg(long, global = true)]
    pub out: Option<String>,
    /// Lift the default size caps.
    #[arg(long, global = true)]
    pub force: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Class decomposition, the inequality, and the partition of unity on K_n.
    VerifyTheorem(VerifyArgs),
    /// The two reduced factorial identities over 1 <= z <= k <= k-max.
    Identities(IdentityArgs),
    /// Class counts B, C1, C2, C_diff and class sizes.
    Counts(CountsArgs),
    /// Averaged inequality, separation bound, or line segment.
    Aux(AuxArgs),
    /// Monte Carlo estimate.
    Mc(McArgs),
    /// Grid search for the smallest p from which the checks hold.
    Threshold(ThresholdArgs),
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("param").required(true).args(["p", "p_grid"])))]
pub struct VerifyArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_parser = parse_fraction)]
    pub p: Option<Rational>,
    /// `start:end:step`, inclusive.
    #[arg(long = "p-grid", value_parser = parse_p_grid)]
    pub p_grid: Option<Grid>,
}

/// Parameter values of `--p-grid`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid(pub Vec<Rational>);

fn parse_p_grid(s: &str) -> Result<Grid> {
    parse_grid(s).map(Grid)
}

#[derive(Debug, Args)]
pub struct IdentityArgs {
    #[arg(long = "k-max", default_value_t = 60)]
    pub k_max: u32,
    #[arg(long = "z-max")]
    pub z_max: Option<u32>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("which").required(true).args(["triplet", "all"])))]
pub struct CountsArgs {
    #[arg(long)]
    pub n: u32,
    /// `x,y,z`.
    #[arg(long, value_parser = parse_triplet)]
    pub triplet: Option<Triplet>,
    #[arg(long)]
    pub all: bool,
    /// Cross-check against enumeration of vertex sets.
    #[arg(long)]
    pub check: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AuxProp {
    /// Averaged inequality over a bottom-vertex law.
    #[value(alias = "2.3")]
    Averaged,
    /// Separation upper bound.
    #[value(alias = "2.4")]
    Separation,
    /// Line segment closed form.
    Segment,
}

#[derive(Debug, Args)]
pub struct AuxArgs {
    #[arg(long, value_enum)]
    pub prop: AuxProp,
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_parser = parse_fraction, default_value = "1/2")]
    pub p: Rational,
    /// Original graph for `averaged` and `separation`: `complete:N`, `path:N` or an edge-list file.
    #[arg(long)]
    pub graph: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum McTarget {
    Difference,
    Connection,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long)]
    pub n: Option<u32>,
    /// Decimal or fraction.
    #[arg(long, value_parser = parse_decimal_or_fraction)]
    pub p: Rational,
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "difference")]
    pub target: McTarget,
    /// Original graph instead of K_n.
    #[arg(long)]
    pub graph: Option<String>,
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long)]
    pub n: u32,
    #[arg(long, value_parser = parse_fraction, default_value = "1/50")]
    pub step: Rational,
}

fn parse_triplet(s: &str) -> Result<Triplet> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let bad = || Error::Parse(format!("expected `x,y,z`, got `{s}`"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let v: Vec<u32> = parts.iter().map(|p| p.parse().map_err(|_| bad())).collect::<Result<_>>()?;
    Ok(Triplet::new(v[0], v[1], v[2]))
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub counterexample: Option<serde_json::Value>,
    pub elapsed_seconds: f64,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

#[derive(Default)]
struct Builder {
    checks: Vec<Check>,
    counterexample: Option<serde_json::Value>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Builder {
    fn check(&mut self, name: impl Into<String>, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    fn witness(&mut self, value: serde_json::Value) {
        self.counterexample.get_or_insert(value);
    }

    fn columns(&mut self, cols: &[&str]) {
        self.columns = cols.iter().map(|c| c.to_string()).collect();
    }

    fn fraction_table(&mut self, names: &[&str], values: &[&Rational]) {
        self.columns = pair_columns(names);
        self.rows.push(pair_cells(values));
    }
}

fn frac(r: &Rational) -> String {
    r.to_string()
}

/// `name_num`, `name_den` column names.
fn pair_columns(names: &[&str]) -> Vec<String> {
    names.iter().flat_map(|n| [format!("{n}_num"), format!("{n}_den")]).collect()
}

fn pair_cells(values: &[&Rational]) -> Vec<String> {
    values.iter().flat_map(|r| [r.numer().to_string(), r.denom().to_string()]).collect()
}

fn cap(what: &'static str, size: u32, limit: u32, force: bool) -> Result<()> {
    if !force && size > limit {
        return Err(Error::Capacity { what, size: size as usize, limit: limit as usize });
    }
    Ok(())
}

fn limits(force: bool) -> Limits {
    if force {
        Limits { dp_vertices: Limits::HARD_DP_VERTICES, enum_edges: Configuration::MAX_WIDTH - 1 }
    } else {
        Limits::default()
    }
}

fn verify_theorem(a: &VerifyArgs, force: bool, b: &mut Builder) -> Result<()> {
    if a.n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {}", a.n)));
    }
    cap("K_n size for the subset DP", a.n, DP_N_CAP, force)?;
    let l = limits(force);
    let ps = match (&a.p, &a.p_grid) {
        (Some(p), _) => vec![p.clone()],
        (None, Some(g)) => g.0.clone(),
        (None, None) => unreachable!("clap enforces one of --p / --p-grid"),
    };
    for p in &ps {
        crate::rational::check_probability(p)?;
    }
    let check = theorem_check(a.n, &ps, &l)?;
    b.columns(&CSV_HEADER);
    b.rows = check.rows.clone();
    let half = rat(1, 2);
    for pt in &check.points {
        b.check(
            format!("decomposition p={}", pt.p),
            pt.decomposition_holds,
            format!("P(u<->v)={} P(u<->v')={}", pt.prob_v, pt.prob_v_prime),
        );
        let scope = if pt.in_scope { "" } else { " (p < 1/2, not asserted)" };
        b.check(
            format!("difference p={}", pt.p),
            !pt.in_scope || !pt.difference.is_negative(),
            format!("{}{scope}", pt.difference),
        );
        if !pt.passed() {
            b.witness(json!({ "n": a.n, "p": frac(&pt.p), "difference": frac(&pt.difference) }));
        }
        let classes = ClassProbabilities::new(pt.p.clone(), l)?;
        let partition = partition_check(a.n, &classes)?;
        b.check(format!("partition p={}", pt.p), partition, "sum of class weights");
        if !partition {
            b.witness(json!({ "n": a.n, "p": frac(&pt.p), "failed": "partition" }));
        }
        if pt.p >= half {
            let r = row_check(a.n, &classes)?;
            b.check(
                format!("row comparisons p={}", pt.p),
                r.passed(),
                format!(
                    "{} rows, {} comparisons ({} below anchor); literal (1-p) anchor factor fails {} times",
                    r.rows, r.comparisons, r.below_anchor, r.literal_factor_failures
                ),
            );
            if let Some(v) = r.violations.first() {
                b.witness(json!({ "n": a.n, "p": frac(&pt.p), "row_violation": v }));
            }
        }
    }
    Ok(())
}

fn identities(a: &IdentityArgs, b: &mut Builder) -> Result<()> {
    b.columns(&["k", "z", "even", "odd"]);
    let (mut cells, mut fails) = (0, 0);
    for k in 1..=a.k_max {
        for z in 1..=k.min(a.z_max.unwrap_or(k)) {
            let (even, odd) = (check_identity_even(k, z)?, check_identity_odd(k, z)?);
            cells += 1;
            if !(even && odd) {
                fails += 1;
                b.witness(json!({ "k": k, "z": z, "even": even, "odd": odd }));
            }
            b.rows.push(vec![k.to_string(), z.to_string(), even.to_string(), odd.to_string()]);
        }
    }
    b.check("identities", fails == 0, format!("{cells} cells, {fails} failures"));
    Ok(())
}

fn counts(a: &CountsArgs, force: bool, b: &mut Builder) -> Result<()> {
    let triplets = match a.triplet {
        Some(t) => {
            t.validate(a.n)?;
            vec![t]
        }
        None => Triplet::all(a.n),
    };
    b.columns(&["n", "x", "y", "z", "B", "C1", "C2", "C_diff", "total"]);
    for &t in &triplets {
        b.rows.push(vec![
            a.n.to_string(),
            t.x.to_string(),
            t.y.to_string(),
            t.z.to_string(),
            boundary_count(a.n, t)?.to_string(),
            count_c1(a.n, t)?.to_string(),
            count_c2(a.n, t)?.to_string(),
            cdiff_raw(a.n, t).to_string(),
            count_total(a.n, t)?.to_string(),
        ]);
    }
    if a.check {
        cap("n for brute-force class counts", a.n, BRUTE_N_CAP, force)?;
        let tally = brute::tally(a.n)?;
        let mut mismatches = 0;
        for &t in &triplets {
            let got = tally.get(&t).cloned().unwrap_or_default();
            let bnd = boundary_count(a.n, t)?;
            let ok = count_total(a.n, t)? == got.total.into()
                && count_c1(a.n, t)? == got.with_v.into()
                && count_c2(a.n, t)? == got.with_v_prime.into()
                && got.cut_sizes == [bnd];
            if !ok {
                mismatches += 1;
                b.witness(json!({ "n": a.n, "triplet": t, "brute_total": got.total,
                    "brute_c1": got.with_v, "brute_c2": got.with_v_prime, "brute_cuts": got.cut_sizes }));
            }
        }
        let members: u64 = tally.values().map(|c| c.total).sum();
        b.check(
            "counts match enumeration",
            mismatches == 0,
            format!("{} classes, {members} vertex sets, {mismatches} mismatches", triplets.len()),
        );
    }
    Ok(())
}

fn original_graph(spec: Option<&str>, n: u32) -> Result<OriginalGraph> {
    match spec {
        Some(s) => OriginalGraph::from_spec(s),
        None => OriginalGraph::complete(n as usize),
    }
}

fn aux(a: &AuxArgs, force: bool, b: &mut Builder) -> Result<()> {
    crate::rational::check_probability(&a.p)?;
    let l = limits(force);
    match a.prop {
        AuxProp::Averaged => {
            let g = BunkbedGraph::build(original_graph(a.graph.as_deref(), a.n)?);
            cap("columns for the enumeration oracle", g.columns() as u32, ENUM_N_CAP, force)?;
            let p = EdgeProbabilityVector::constant(g.edge_count(), a.p.clone())?;
            let d = BottomDistribution::uniform(g.columns())?;
            let r = mean_inequality_check(&g, &p, &d, &l)?;
            b.fraction_table(&["difference", "via_identity"], &[&r.difference, &r.via_identity]);
            b.check("averaged inequality", r.passed(), format!("{} (identity {})", r.difference, r.via_identity));
            if !r.passed() {
                b.witness(json!({ "difference": frac(&r.difference), "via_identity": frac(&r.via_identity) }));
            }
        }
        AuxProp::Separation => {
            let g = BunkbedGraph::build(original_graph(a.graph.as_deref(), a.n)?);
            cap("columns for the subset DP", g.columns() as u32, DP_N_CAP, force)?;
            if g.columns() < 2 {
                return Err(Error::InvalidParameter("need at least two columns".into()));
            }
            let p = EdgeProbabilityVector::constant(g.edge_count(), a.p.clone())?;
            let r = upper_bound_check(&g, &p, 0, 1, &l)?;
            let bound = r.chain_bound.as_ref().map(frac).unwrap_or_default();
            let diff = r.difference();
            b.fraction_table(&["difference", "separation", "u_separation"], &[&diff, &r.separation, &r.u_separation]);
            if let Some(c) = &r.chain_bound {
                b.columns.extend(pair_columns(&["chain_bound"]));
                b.rows[0].extend(pair_cells(&[c]));
            }
            b.check(
                "|difference| <= separation",
                r.inequality_holds(),
                format!("{} vs {}", r.difference(), r.separation),
            );
            if r.chain_bound.is_some() {
                b.check(
                    "separation chain",
                    r.chain_holds(),
                    format!("{} <= {} <= {bound}", r.separation, r.u_separation),
                );
            }
            if !r.passed() {
                b.witness(json!({ "difference": frac(&r.difference()), "separation": frac(&r.separation) }));
            }
        }
        AuxProp::Segment => {
            cap("segment length", a.n, DP_N_CAP, force)?;
            if a.n < 2 {
                return Err(Error::InvalidParameter("segment needs n >= 2".into()));
            }
            let g = BunkbedGraph::path(a.n as usize)?;
            let p = EdgeProbabilityVector::constant(g.edge_count(), a.p.clone())?;
            let r = segment_difference(&g, &p, &l)?;
            b.fraction_table(&["closed_form", "short_form", "engine"], &[&r.closed_form, &r.short_form, &r.engine]);
            b.check("closed form equals engine", r.closed_form_matches(), format!("{} vs {}", r.closed_form, r.engine));
            b.check(
                "form with n-1 vertical factors",
                true,
                format!(
                    "{} ({}); reported only",
                    r.short_form,
                    if r.short_form_matches() { "matches" } else { "differs from engine" }
                ),
            );
            if !r.closed_form_matches() {
                b.witness(json!({ "closed_form": frac(&r.closed_form), "engine": frac(&r.engine) }));
            }
        }
    }
    Ok(())
}

fn mc(a: &McArgs, b: &mut Builder) -> Result<()> {
    crate::rational::check_probability(&a.p)?;
    let n = a.n.unwrap_or(2);
    let g = BunkbedGraph::build(original_graph(a.graph.as_deref(), n)?);
    if g.columns() < 2 {
        return Err(Error::InvalidParameter("need at least two columns".into()));
    }
    let p = EdgeProbabilityVector::constant(g.edge_count(), a.p.clone())?;
    let e = match a.target {
        McTarget::Difference => estimate_difference(&g, &p, 0, 1, a.samples, a.seed)?,
        McTarget::Connection => estimate_connection(&g, &p, 0, 1, a.samples, a.seed)?,
    };
    b.columns(&["columns", "p_num", "p_den", "target", "samples", "seed", "estimate", "stderr"]);
    b.rows.push(vec![
        g.columns().to_string(),
        a.p.numer().to_string(),
        a.p.denom().to_string(),
        format!("{:?}", a.target).to_lowercase(),
        e.samples.to_string(),
        e.seed.to_string(),
        format!("{:.17e}", e.estimate),
        format!("{:.17e}", e.stderr),
    ]);
    if a.target == McTarget::Difference && a.p >= rat(1, 2) {
        let ok = e.estimate >= -5.0 * e.stderr;
        b.check("estimate >= -5 stderr", ok, format!("{} +- {}", e.estimate, e.stderr));
        if !ok {
            b.witness(json!({ "estimate": e.estimate, "stderr": e.stderr, "p": to_f64(&a.p) }));
        }
    }
    Ok(())
}

fn threshold(a: &ThresholdArgs, force: bool, b: &mut Builder) -> Result<()> {
    if a.n < 2 {
        return Err(Error::InvalidParameter(format!("need n >= 2, got {}", a.n)));
    }
    cap("K_n size for the subset DP", a.n, DP_N_CAP, force)?;
    let r = threshold_search(a.n, &a.step, &limits(force))?;
    b.columns(&["p_num", "p_den", "rows_hold", "diff_num", "diff_den"]);
    for pt in &r.points {
        b.rows.push(vec![
            pt.p.numer().to_string(),
            pt.p.denom().to_string(),
            pt.rows_hold.to_string(),
            pt.difference.numer().to_string(),
            pt.difference.denom().to_string(),
        ]);
    }
    let show = |t: &Option<Rational>| t.as_ref().map_or("none".to_string(), frac);
    b.check(
        "threshold (reported only)",
        true,
        format!(
            "row comparisons from {}, difference >= 0 from {}",
            show(&r.row_threshold),
            show(&r.difference_threshold)
        ),
    );
    Ok(())
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Capacity { .. } => EXIT_CAPACITY,
        Error::IdentityMismatch(_) => EXIT_COUNTEREXAMPLE,
        _ => EXIT_USAGE,
    }
}

enum Format {
    Csv,
    Json,
}

fn destination(out: Option<&str>) -> (Format, Option<&Path>) {
    match out {
        None | Some("csv") => (Format::Csv, None),
        Some("json") => (Format::Json, None),
        Some(path) => {
            let p = Path::new(path);
            let json = p.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
            (if json { Format::Json } else { Format::Csv }, Some(p))
        }
    }
}

fn render(report: &RunReport, format: Format) -> std::result::Result<Vec<u8>, String> {
    match format {
        Format::Json => {
            let mut v = serde_json::to_vec_pretty(report).map_err(|e| e.to_string())?;
            v.push(b'\n');
            Ok(v)
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&report.columns).map_err(|e| e.to_string())?;
            for r in &report.rows {
                w.write_record(r).map_err(|e| e.to_string())?;
            }
            w.into_inner().map_err(|e| e.to_string())
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Builder> {
    let mut b = Builder::default();
    match &cli.command {
        Command::VerifyTheorem(a) => verify_theorem(a, cli.force, &mut b)?,
        Command::Identities(a) => identities(a, &mut b)?,
        Command::Counts(a) => counts(a, cli.force, &mut b)?,
        Command::Aux(a) => aux(a, cli.force, &mut b)?,
        Command::Mc(a) => mc(a, &mut b)?,
        Command::Threshold(a) => threshold(a, cli.force, &mut b)?,
    }
    Ok(b)
}

/// Parses `args` (program name first), runs the command, writes the report,
/// and returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_PASS };
            let text = e.render();
            let _ = if e.use_stderr() { write!(stderr, "{text}") } else { write!(stdout, "{text}") };
            return code;
        }
    };
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(k) = cli.workers {
        if k == 0 {
            let _ = writeln!(stderr, "error: --workers must be at least 1");
            return EXIT_USAGE;
        }
        pool = pool.num_threads(k);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };

    let start = Instant::now();
    let built = match pool.install(|| dispatch(&cli)) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return exit_code(&e);
        }
    };
    let report = RunReport {
        command: args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect(),
        passed: built.checks.iter().all(|c| c.passed),
        checks: built.checks,
        counterexample: built.counterexample,
        elapsed_seconds: start.elapsed().as_secs_f64(),
        columns: built.columns,
        rows: built.rows,
    };
    for c in &report.checks {
        let _ = writeln!(stderr, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }

    let (format, path) = destination(cli.out.as_deref());
    let bytes = match render(&report, format) {
        Ok(b) => b,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let written = match path {
        Some(p) => std::fs::write(p, &bytes).map_err(|e| format!("{}: {e}", p.display())),
        None => stdout.write_all(&bytes).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: {e}");
        return EXIT_USAGE;
    }
    if report.passed {
        EXIT_PASS
    } else {
        EXIT_COUNTEREXAMPLE
    }
}
