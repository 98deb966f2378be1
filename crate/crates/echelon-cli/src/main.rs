//! Command-line front end: solve one partition, classify stability, sweep
//! the market-size ratio, or check the asymptotic limit tables.
//!
//! Exit codes: 0 success, 1 limit-check failure, 2 input error, 3 solver
//! error, 4 output I/O error.

mod jsonout;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use echelon::equilibria::{Diagnostics, EquilibriumOutcome};
use echelon::limits::{
    compare_derivative_limits, compare_worth_limits, LimitComparison, LimitEntry, LimitSchedule,
};
use echelon::model::{BlockerPolicy, Coalition, MarketParams, Partition, PayoffVector};
use echelon::stability::{partition_classification, Region};
use echelon::sweep::{sweep_classification, SweepGrid, SweepResult};
use echelon::worths::{compute_worth_table, pessimal_worth, WorthTable};

use jsonout::{fmt_float, Json};

#[derive(Parser)]
#[command(name = "echelon", version, about = "Two-echelon supply-chain coalition game solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one partition: prices, demands, utilities and diagnostics.
    Solve(SolveArgs),
    /// Classify all five partitions: worths, pessimal worths, stable regions.
    Stability(StabilityArgs),
    /// Sweep the market-size ratio against eps/gamma lists into a CSV.
    Sweep(SweepArgs),
    /// Compare numerical limit estimates against the closed-form tables.
    Limits(LimitsArgs),
}

#[derive(Args)]
struct SolveArgs {
    /// Market parameters JSON file.
    #[arg(long)]
    params: PathBuf,
    /// Partition to solve: GC, ALC, HC, VC1 or VC2.
    #[arg(long)]
    partition: String,
    /// Output file (stdout when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct StabilityArgs {
    #[arg(long)]
    params: PathBuf,
    /// Require strict slack against every blocker.
    #[arg(long)]
    strict: bool,
    /// Restrict blockers to mergers/splits plus the manufacturer pair.
    #[arg(long)]
    restricted: bool,
    /// Explicit blocker policy: full, mergers-splits or theorem3iii.
    #[arg(long)]
    policy: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    params: PathBuf,
    #[arg(long, default_value_t = 1.0)]
    ratio_min: f64,
    #[arg(long, default_value_t = 6.0)]
    ratio_max: f64,
    #[arg(long, default_value_t = 0.05)]
    ratio_step: f64,
    /// Eps values (defaults to the params file value).
    #[arg(long = "eps", num_args = 0.., value_delimiter = ',')]
    epss: Option<Vec<f64>>,
    /// Gamma values (defaults to the params file value).
    #[arg(long = "gamma", num_args = 0.., value_delimiter = ',')]
    gammas: Option<Vec<f64>>,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    restricted: bool,
    #[arg(long)]
    policy: Option<String>,
    /// Worker threads for the grid cells.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output CSV file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct LimitsArgs {
    #[arg(long)]
    params: PathBuf,
    /// Which table to check: worths, derivatives or both.
    #[arg(long, default_value = "both")]
    table: String,
    /// Restrict to one entry, e.g. V1:VC1 (worths also accept V1:pa).
    #[arg(long)]
    pair: Option<String>,
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }

    fn solver(err: echelon::Error) -> Failure {
        Failure { code: 3, message: err.to_string() }
    }

    fn io(message: impl Into<String>) -> Failure {
        Failure { code: 4, message: message.into() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Stability(args) => run_stability(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Limits(args) => run_limits(args),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn load_params(path: &PathBuf) -> Result<MarketParams, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::input(format!("cannot read {}: {e}", path.display())))?;
    let params: MarketParams = serde_json::from_str(&text)
        .map_err(|e| Failure::input(format!("invalid params JSON: {e}")))?;
    params.validate().map_err(|e| Failure::input(e.to_string()))?;
    Ok(params)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::io(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn policy_from(restricted: bool, policy: &Option<String>) -> Result<BlockerPolicy, Failure> {
    match policy {
        Some(name) => BlockerPolicy::parse(name).map_err(|e| Failure::input(e.to_string())),
        None if restricted => Ok(BlockerPolicy::Theorem3iii),
        None => Ok(BlockerPolicy::Full),
    }
}

fn run_solve(args: SolveArgs) -> Result<u8, Failure> {
    let params = load_params(&args.params)?;
    let partition =
        Partition::parse(&args.partition).map_err(|e| Failure::input(e.to_string()))?;
    let outcome = match partition {
        Partition::Grand => echelon::gc_optimum(&params),
        Partition::AllAlone => echelon::alc_sbe(&params),
        Partition::Horizontal => echelon::hc_sbe(&params),
        Partition::Vertical1 => echelon::vc_sbe(1, &params),
        Partition::Vertical2 => echelon::vc_sbe(2, &params),
    }
    .map_err(Failure::solver)?;
    emit(&args.out, &outcome_json(&outcome).render())?;
    Ok(0)
}

fn outcome_json(outcome: &EquilibriumOutcome) -> Json {
    let mut actions = Json::obj();
    for c in outcome.partition.coalitions() {
        let a = outcome.actions.action(c);
        let mut entry = Json::obj();
        entry.insert("operates".into(), Json::Bool(a.operates()));
        if let Some(p) = a.retail_price() {
            entry.insert("price".into(), Json::Num(p));
        }
        if let Some(q) = a.wholesale_quote() {
            entry.insert("quote".into(), Json::Num(q));
        }
        actions.insert(c.label().into(), Json::Obj(entry));
    }
    let num_map = |m: &BTreeMap<Coalition, f64>| {
        Json::Obj(
            m.iter()
                .map(|(c, v)| (c.label().to_string(), Json::Num(*v)))
                .collect(),
        )
    };
    let mut doc = Json::obj();
    doc.insert("actions".into(), Json::Obj(actions));
    doc.insert("demands".into(), num_map(&outcome.demands));
    doc.insert("diagnostics".into(), diagnostics_json(&outcome.diagnostics));
    doc.insert("partition".into(), Json::Str(outcome.partition.label().into()));
    doc.insert("regime".into(), Json::Str(outcome.regime.label()));
    doc.insert("utilities".into(), num_map(&outcome.utilities));
    Json::Obj(doc)
}

fn diagnostics_json(diagnostics: &Diagnostics) -> Json {
    let mut d = Json::obj();
    let scalars = diagnostics
        .scalars
        .iter()
        .map(|(k, v)| (k.clone(), Json::Num(*v)))
        .collect();
    d.insert("scalars".into(), Json::Obj(scalars));
    let candidates = diagnostics
        .candidates
        .iter()
        .map(|c| {
            let mut e = Json::obj();
            e.insert("label".into(), Json::Str(c.label.clone()));
            e.insert("price".into(), c.price.map_or(Json::Null, Json::Num));
            e.insert("quote".into(), c.quote.map_or(Json::Null, Json::Num));
            e.insert("value".into(), Json::Num(c.value));
            Json::Obj(e)
        })
        .collect();
    d.insert("candidates".into(), Json::Arr(candidates));
    Json::Obj(d)
}

fn payoff_json(p: &PayoffVector) -> Json {
    let mut m = Json::obj();
    m.insert("xM1".into(), Json::Num(p.x_m1));
    m.insert("xM2".into(), Json::Num(p.x_m2));
    m.insert("xS".into(), Json::Num(p.x_s));
    Json::Obj(m)
}

fn region_json(region: &Region) -> Json {
    let mut m = Json::obj();
    let certs = region
        .certificates
        .iter()
        .map(|c| {
            let mut e = Json::obj();
            e.insert("coalition".into(), Json::Str(c.coalition.label().into()));
            e.insert("deficit".into(), Json::Num(c.deficit));
            e.insert("payoff".into(), payoff_json(&c.payoff));
            Json::Obj(e)
        })
        .collect();
    m.insert("certificates".into(), Json::Arr(certs));
    m.insert(
        "interval".into(),
        region.interval.map_or(Json::Null, |(lo, hi)| {
            Json::Arr(vec![
                if lo.is_finite() { Json::Num(lo) } else { Json::Null },
                if hi.is_finite() { Json::Num(hi) } else { Json::Null },
            ])
        }),
    );
    m.insert("stable".into(), Json::Bool(region.feasible));
    m.insert(
        "witness".into(),
        region.witness.as_ref().map_or(Json::Null, payoff_json),
    );
    Json::Obj(m)
}

fn run_stability(args: StabilityArgs) -> Result<u8, Failure> {
    let params = load_params(&args.params)?;
    let policy = policy_from(args.restricted, &args.policy)?;
    let table = compute_worth_table(&params).map_err(Failure::solver)?;
    let report =
        partition_classification(&table, args.strict, policy).map_err(Failure::solver)?;

    let mut doc = Json::obj();
    let mut pessimal = Json::obj();
    for c in Coalition::ALL {
        let v = pessimal_worth(c, &table).map_err(Failure::solver)?;
        pessimal.insert(c.label().into(), Json::Num(v));
    }
    doc.insert("pessimal".into(), Json::Obj(pessimal));
    doc.insert("policy".into(), Json::Str(policy.label().into()));
    let mut regions = Json::obj();
    for region in &report.regions {
        regions.insert(region.partition.label().into(), region_json(region));
    }
    doc.insert("report".into(), Json::Obj(regions));
    doc.insert("strict".into(), Json::Bool(report.strict));
    doc.insert("worths".into(), worths_json(&table));
    emit(&args.out, &Json::Obj(doc).render())?;
    Ok(0)
}

fn worths_json(table: &WorthTable) -> Json {
    let rows = table
        .to_rows()
        .into_iter()
        .map(|(p, c, w)| {
            let mut e = Json::obj();
            e.insert("coalition".into(), Json::Str(c.label().into()));
            e.insert("partition".into(), Json::Str(p.label().into()));
            e.insert("worth".into(), Json::Num(w));
            Json::Obj(e)
        })
        .collect();
    Json::Arr(rows)
}

fn run_sweep(args: SweepArgs) -> Result<u8, Failure> {
    let params = load_params(&args.params)?;
    let policy = policy_from(args.restricted, &args.policy)?;
    if !(args.ratio_step > 0.0) || args.ratio_max < args.ratio_min {
        return Err(Failure::input("ratio range must satisfy lo <= hi with step > 0"));
    }
    let epss = args.epss.unwrap_or_else(|| vec![params.eps]);
    let gammas = args.gammas.unwrap_or_else(|| vec![params.gamma]);
    let jobs = args.jobs.max(1);

    // One slice per (eps, gamma) cell; slices run on the worker pool and are
    // reassembled in grid order.
    let cells: Vec<(f64, f64)> = epss
        .iter()
        .flat_map(|e| gammas.iter().map(move |g| (*e, *g)))
        .collect();
    let mut slices: Vec<Option<SweepResult>> = Vec::new();
    slices.resize_with(cells.len(), || None);
    let slice_grid = |eps: f64, gamma: f64| SweepGrid {
        ratio_min: args.ratio_min,
        ratio_max: args.ratio_max,
        ratio_step: args.ratio_step,
        epss: vec![eps],
        gammas: vec![gamma],
    };
    let errors: std::sync::Mutex<Vec<echelon::Error>> = std::sync::Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        let mut pending: Vec<(usize, &mut Option<SweepResult>)> =
            slices.iter_mut().enumerate().collect();
        let chunk = pending.len().div_ceil(jobs);
        if chunk == 0 {
            return;
        }
        while !pending.is_empty() {
            let batch: Vec<_> = pending
                .drain(..chunk.min(pending.len()))
                .collect();
            let cells = &cells;
            let errors = &errors;
            scope.spawn(move || {
                for (idx, slot) in batch {
                    let (eps, gamma) = cells[idx];
                    match sweep_classification(&params, &slice_grid(eps, gamma), args.strict, policy) {
                        Ok(result) => *slot = Some(result),
                        Err(e) => errors.lock().expect("poisoned").push(e),
                    }
                }
            });
        }
    });
    if let Some(e) = errors.into_inner().expect("poisoned").into_iter().next() {
        return Err(Failure::solver(e));
    }

    let mut csv = String::from(
        "ratio,eps,gamma,stable_PG,stable_PA,stable_PH,stable_PV1,stable_PV2,witness_xS,witness_xM1,witness_xM2\n",
    );
    let mut summary = String::new();
    for slice in slices.into_iter().flatten() {
        for row in &slice.rows {
            let flags: Vec<String> = row
                .stable
                .iter()
                .map(|s| if *s { "1".into() } else { "0".into() })
                .collect();
            let witness = match &row.witness {
                Some(w) => format!("{},{},{}", fmt_float(w.x_s), fmt_float(w.x_m1), fmt_float(w.x_m2)),
                None => ",,".into(),
            };
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                fmt_float(row.ratio),
                fmt_float(row.eps),
                fmt_float(row.gamma),
                flags.join(","),
                witness
            ));
        }
        for t in &slice.transitions {
            let ratio = t.ratio.map_or("none".into(), fmt_float);
            summary.push_str(&format!(
                "transition eps={} gamma={}: VC1 stable from ratio {}\n",
                fmt_float(t.eps),
                fmt_float(t.gamma),
                ratio
            ));
        }
    }
    fs::write(&args.out, csv)
        .map_err(|e| Failure::io(format!("cannot write {}: {e}", args.out.display())))?;
    eprint!("{summary}");
    Ok(0)
}

fn run_limits(args: LimitsArgs) -> Result<u8, Failure> {
    let params = load_params(&args.params)?;
    let schedule = LimitSchedule::default();
    let mut rows: Vec<(String, LimitComparison)> = Vec::new();
    let want_worths = matches!(args.table.as_str(), "worths" | "both");
    let want_derivatives = matches!(args.table.as_str(), "derivatives" | "both");
    if !(want_worths || want_derivatives) {
        return Err(Failure::input(format!(
            "unknown table `{}` (expected worths, derivatives or both)",
            args.table
        )));
    }
    let filter = match &args.pair {
        Some(text) => Some(LimitEntry::parse(text).map_err(|e| Failure::input(e.to_string()))?),
        None => None,
    };
    if want_worths {
        for cmp in compare_worth_limits(&params, &schedule).map_err(Failure::solver)? {
            rows.push(("worths".into(), cmp));
        }
    }
    if want_derivatives {
        for cmp in compare_derivative_limits(&params).map_err(Failure::solver)? {
            rows.push(("derivatives".into(), cmp));
        }
    }
    if let Some(entry) = filter {
        rows.retain(|(_, cmp)| cmp.entry == entry);
        if rows.is_empty() {
            return Err(Failure::input(format!(
                "entry {} not present in the selected table",
                entry.label()
            )));
        }
    }

    let all_pass = rows.iter().all(|(_, cmp)| cmp.pass);
    let entries = rows
        .into_iter()
        .map(|(table, cmp)| {
            let mut e = Json::obj();
            e.insert("abs_error".into(), Json::Num(cmp.abs_error));
            e.insert("closed_form".into(), Json::Num(cmp.closed_form));
            e.insert("converged".into(), Json::Bool(cmp.converged));
            e.insert("entry".into(), Json::Str(cmp.entry.label()));
            e.insert("estimate".into(), Json::Num(cmp.estimate));
            e.insert("pass".into(), Json::Bool(cmp.pass));
            e.insert("rel_error".into(), Json::Num(cmp.rel_error));
            e.insert("table".into(), Json::Str(table));
            Json::Obj(e)
        })
        .collect();
    let mut doc = Json::obj();
    doc.insert("entries".into(), Json::Arr(entries));
    doc.insert("pass".into(), Json::Bool(all_pass));
    emit(&args.out, &Json::Obj(doc).render())?;
    Ok(if all_pass { 0 } else { 1 })
}
