//! `nahm`: expand, verify and search q-series identities from the command line.

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use nahm_core::catalog::expr::{parse_product, Env};
use nahm_core::catalog::{
    builtin_catalog, eval_side, load_catalog, verify_all, verify_entry, IdentityEntry, Report,
    Verdict,
};
use nahm_core::discover::{
    builtin_quadruples, detect_period, parse_quadruples, prefactor, prodmake, search_quadruples,
    SearchGrid,
};
use nahm_core::rat::{fmt_rat, parse_rat};
use nahm_core::{eval_nahm, eval_product, NahmSpec, ProductSpec, PuiseuxSeries, Rat};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nahm",
    version,
    about = "Exact q-series expansion, identity verification and Nahm sum search"
)]
struct Cli {
    /// Worker threads for parallel verbs (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Subcommand)]
enum Verb {
    /// Print the q-expansion of a product, a Nahm sum or one side of an identity.
    Expand {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "20", value_parser = parse_order)]
        order: Rat,
    },
    /// Verify one catalog entry (all its instances) or one instance label.
    Verify {
        #[arg(long)]
        id: String,
        #[arg(long, default_value = "40", value_parser = parse_order)]
        order: Rat,
        #[command(flatten)]
        catalog: CatalogArg,
    },
    /// Verify every catalog entry whose id matches the filter.
    VerifyAll {
        #[arg(long, default_value = "40", value_parser = parse_order)]
        order: Rat,
        /// Glob on entry ids, e.g. `eq8-*`.
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        catalog: CatalogArg,
    },
    /// Recover the exponent profile of a series and look for an exact period.
    Prodmake {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "100", value_parser = parse_order)]
        order: Rat,
        /// Largest period tried (default: a third of the profile length).
        #[arg(long)]
        max_period: Option<usize>,
    },
    /// Search a grid of Nahm quadruples for exactly periodic profiles.
    Search {
        /// JSON grid file with keys A, B or B_each, L and optionally v.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long, default_value = "200", value_parser = parse_order)]
        order: Rat,
        #[arg(long, default_value_t = 60)]
        max_period: usize,
    },
    /// Compute the completion scalar C for a quadruple row or an explicit pair.
    Prefactor {
        /// Row id in the quadruple table.
        #[arg(long, conflicts_with_all = ["nahm", "product"])]
        id: Option<String>,
        /// Quadruple table to read instead of the built-in one.
        #[arg(long, requires = "id")]
        quadruples: Option<PathBuf>,
        /// Nahm quadruple as JSON, together with `--product`.
        #[arg(long, requires = "product")]
        nahm: Option<String>,
        #[arg(long, requires = "nahm")]
        product: Option<String>,
        #[arg(long, default_value = "40", value_parser = parse_order)]
        order: Rat,
        #[command(flatten)]
        catalog: CatalogArg,
    },
    /// List catalog entries.
    CatalogList {
        #[arg(long)]
        filter: Option<String>,
        #[command(flatten)]
        catalog: CatalogArg,
    },
}

#[derive(Args)]
struct CatalogArg {
    /// Catalog file to use instead of the built-in one.
    #[arg(long)]
    catalog: Option<PathBuf>,
}

#[derive(Args)]
#[command(group(ArgGroup::new("source").required(true).multiple(false)))]
struct Source {
    /// Product expression such as `(q;q)_inf^-1` or `1/(q,q^4;q^5)_inf`.
    #[arg(long, group = "source")]
    product: Option<String>,
    /// Nahm quadruple as JSON: {"A": .., "B": .., "C": .., "v": .., "L": ..}.
    #[arg(long, group = "source")]
    nahm: Option<String>,
    /// Catalog instance label; see `--side`.
    #[arg(long, group = "source")]
    id: Option<String>,
    #[arg(long, value_enum, default_value_t = Side::Lhs, requires = "id")]
    side: Side,
    #[command(flatten)]
    catalog: CatalogArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Side {
    Lhs,
    Rhs,
}

/// Why a run stopped: bad input (exit 2) or a failed check (exit 1).
enum Stop {
    Usage(String),
    Failed(String),
}

type Run = Result<(), Stop>;

fn usage(e: impl ToString) -> Stop {
    Stop::Usage(e.to_string())
}

fn failed(e: impl ToString) -> Stop {
    Stop::Failed(e.to_string())
}

fn parse_order(s: &str) -> Result<Rat, String> {
    match parse_rat(s) {
        Some(r) if r > Rat::from_integer(0.into()) => Ok(r),
        _ => Err(format!("expected a positive rational order, got {s:?}")),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Stop::Failed(m)) => {
            if !m.is_empty() {
                eprintln!("{m}");
            }
            ExitCode::from(1)
        }
        Err(Stop::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Run {
    let json = cli.json;
    match &cli.verb {
        Verb::Expand { source, order } => expand(source, order, json),
        Verb::Verify { id, order, catalog } => verify(id, order, catalog, json),
        Verb::VerifyAll {
            order,
            filter,
            catalog,
        } => {
            let entries = load(catalog)?;
            let report = verify_all(&entries, order, filter.as_deref()).map_err(usage)?;
            print_report(&report, json);
            if report.all_passed() {
                Ok(())
            } else {
                Err(failed(""))
            }
        }
        Verb::Prodmake {
            source,
            order,
            max_period,
        } => prodmake_cmd(source, order, *max_period, json),
        Verb::Search {
            grid,
            order,
            max_period,
        } => search(grid, order, *max_period, json),
        Verb::Prefactor {
            id,
            quadruples,
            nahm,
            product,
            order,
            catalog,
        } => prefactor_cmd(
            id.as_deref(),
            quadruples.as_deref(),
            nahm.as_deref(),
            product.as_deref(),
            order,
            catalog,
            json,
        ),
        Verb::CatalogList { filter, catalog } => catalog_list(filter.as_deref(), catalog, json),
    }
}

fn load(c: &CatalogArg) -> Result<Vec<IdentityEntry>, Stop> {
    match &c.catalog {
        Some(p) => load_catalog(p).map_err(usage),
        None => builtin_catalog().map_err(usage),
    }
}

fn parse_nahm(s: &str) -> Result<NahmSpec, Stop> {
    serde_json::from_str(s).map_err(|e| usage(format!("--nahm: {e}")))
}

fn parse_product_arg(s: &str) -> Result<ProductSpec, Stop> {
    parse_product(s, &Env::new()).map_err(|e| usage(format!("--product: {e}")))
}

fn evaluate(source: &Source, order: &Rat) -> Result<PuiseuxSeries, Stop> {
    if let Some(p) = &source.product {
        return eval_product(&parse_product_arg(p)?, order).map_err(failed);
    }
    if let Some(s) = &source.nahm {
        return eval_nahm(&parse_nahm(s)?, order).map_err(failed);
    }
    let label = source.id.as_deref().unwrap_or_default();
    let entries = load(&source.catalog)?;
    let entry_id = label.split('@').next().unwrap_or(label);
    let entry = entries
        .iter()
        .find(|e| e.id == entry_id)
        .ok_or_else(|| usage(format!("no catalog entry {entry_id}")))?;
    let inst = entry
        .instantiate()
        .map_err(usage)?
        .into_iter()
        .find(|i| i.label == label)
        .ok_or_else(|| usage(format!("no catalog instance {label}")))?;
    let side = match source.side {
        Side::Lhs => &inst.lhs,
        Side::Rhs => &inst.rhs,
    };
    eval_side(side, order).map_err(failed)
}

fn expand(source: &Source, order: &Rat, json: bool) -> Run {
    let f = evaluate(source, order)?;
    if json {
        println!("{}", serde_json::to_string(&f.to_json()).unwrap());
    } else {
        println!("{f}");
    }
    Ok(())
}

fn verify(id: &str, order: &Rat, catalog: &CatalogArg, json: bool) -> Run {
    let entries = load(catalog)?;
    let entry_id = id.split('@').next().unwrap_or(id);
    let entry = entries
        .iter()
        .find(|e| e.id == entry_id)
        .ok_or_else(|| usage(format!("no catalog entry {entry_id}")))?;
    let mut rows = verify_entry(entry, order).map_err(usage)?;
    if id.contains('@') {
        rows.retain(|r| r.id == id);
        if rows.is_empty() {
            return Err(usage(format!("no catalog instance {id}")));
        }
    }
    let report = Report {
        order: fmt_rat(order),
        total_millis: rows.iter().map(|r| r.millis).sum(),
        rows,
    };
    print_report(&report, json);
    if report.all_passed() {
        Ok(())
    } else {
        Err(failed(""))
    }
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::Pass => "pass".into(),
        Verdict::Fail { first_mismatch: m } => {
            format!(
                "FAIL first mismatch at q^{}: lhs {} vs rhs {}",
                m.exponent, m.lhs, m.rhs
            )
        }
        Verdict::Divergent { message } => format!("DIVERGENT {message}"),
        Verdict::Error { message } => format!("ERROR {message}"),
    }
}

fn print_report(report: &Report, json: bool) {
    if json {
        println!("{}", serde_json::to_string_pretty(report).unwrap());
        return;
    }
    let width = report.rows.iter().map(|r| r.id.len()).max().unwrap_or(0);
    for r in &report.rows {
        println!("{:width$}  {}", r.id, verdict_text(&r.verdict));
    }
    let bad = report.failures().count();
    println!(
        "{} passed, {} failed to q^{} in {} ms",
        report.rows.len() - bad,
        bad,
        report.order,
        report.total_millis
    );
}

fn prodmake_cmd(source: &Source, order: &Rat, max_period: Option<usize>, json: bool) -> Run {
    let f = evaluate(source, order)?;
    let prof = prodmake(&f, order).map_err(failed)?;
    let max = max_period.unwrap_or(prof.e.len() / 3).max(1);
    let period = detect_period(&prof, max, 3).map_err(failed)?;
    let product = period
        .as_ref()
        .map(|(p, pat)| prof.periodic_product(*p, pat));
    if json {
        let out = json!({
            "profile": prof,
            "period": period.as_ref().map(|(p, _)| p),
            "pattern": period.as_ref().map(|(_, pat)| pat),
            "product": product,
        });
        println!("{}", serde_json::to_string_pretty(&out).unwrap());
    } else {
        println!(
            "c = {}, mu = {}, lattice q^(1/{})",
            fmt_rat(&prof.c),
            fmt_rat(&prof.mu),
            prof.denom
        );
        println!("e = {:?}", prof.e);
        match (&period, &product) {
            (Some((p, pat)), Some(prod)) => {
                println!("period {p}: {pat:?}");
                println!("product: {prod}");
            }
            _ => println!("no exact period up to {max}"),
        }
    }
    Ok(())
}

fn search(grid: &Path, order: &Rat, max_period: usize, json: bool) -> Run {
    let text =
        std::fs::read_to_string(grid).map_err(|e| usage(format!("{}: {e}", grid.display())))?;
    let grid: SearchGrid =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", grid.display())))?;
    let found = search_quadruples(&grid, order, max_period).map_err(failed)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&found).unwrap());
    } else {
        for c in &found {
            println!("{}  C = {}  {}", c.spec, fmt_rat(&c.required_c), c.product);
        }
        println!("{} candidates", found.len());
    }
    Ok(())
}

fn prefactor_cmd(
    id: Option<&str>,
    quadruples: Option<&Path>,
    nahm: Option<&str>,
    product: Option<&str>,
    order: &Rat,
    catalog: &CatalogArg,
    json: bool,
) -> Run {
    let (spec, prod, printed) = match (id, nahm, product) {
        (Some(id), _, _) => {
            let rows = match quadruples {
                Some(p) => {
                    let text = std::fs::read_to_string(p)
                        .map_err(|e| usage(format!("{}: {e}", p.display())))?;
                    parse_quadruples(&text, &p.display().to_string()).map_err(usage)?
                }
                None => builtin_quadruples().map_err(usage)?,
            };
            let row = rows
                .into_iter()
                .find(|r| r.id == id)
                .ok_or_else(|| usage(format!("no quadruple row {id}")))?;
            let prod = row.product(&load(catalog)?).map_err(usage)?;
            (row.nahm, prod, Some(row.printed_c))
        }
        (None, Some(n), Some(p)) => (parse_nahm(n)?, parse_product_arg(p)?, None),
        _ => return Err(usage("give --id, or --nahm with --product")),
    };
    let pf = prefactor(&spec, &prod, order).map_err(failed)?;
    if json {
        let mut v = serde_json::to_value(&pf).unwrap();
        if let (Some(id), Some(p)) = (id, &printed) {
            v["id"] = json!(id);
            v["printed_C"] = json!(fmt_rat(p));
        }
        println!("{}", serde_json::to_string_pretty(&v).unwrap());
    } else {
        print!("required_C = {}", fmt_rat(&pf.c));
        if let Some(p) = &printed {
            print!("  (table: {})", fmt_rat(p));
        }
        println!();
        println!(
            "delta = {}, eta exponent = {}, weight = {}",
            fmt_rat(&pf.delta),
            fmt_rat(&pf.eta.exponent),
            fmt_rat(&pf.eta.weight)
        );
    }
    Ok(())
}

fn catalog_list(filter: Option<&str>, catalog: &CatalogArg, json: bool) -> Run {
    let entries = load(catalog)?;
    let pat = filter
        .map(glob::Pattern::new)
        .transpose()
        .map_err(|e| usage(format!("--filter: {e}")))?;
    let chosen: Vec<&IdentityEntry> = entries
        .iter()
        .filter(|e| pat.as_ref().is_none_or(|p| p.matches(&e.id)))
        .collect();
    if json {
        println!("{}", serde_json::to_string_pretty(&chosen).unwrap());
        return Ok(());
    }
    let width = chosen.iter().map(|e| e.id.len()).max().unwrap_or(0);
    for e in &chosen {
        let status = serde_json::to_value(e.status).unwrap();
        let n = e.instances.len().max(1);
        println!(
            "{:width$}  {:13}  {n:>2}  {}",
            e.id,
            status.as_str().unwrap_or(""),
            e.reference
        );
    }
    println!("{} entries", chosen.len());
    Ok(())
}
