use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rrid_core::search::{run_search, SearchGrid};
use rrid_core::series::parse_coefficients;
use rrid_core::verifier::{verify_many, IdentitySpec, VerificationReport};
use rrid_core::{
    count_sum_side, describe, detect_period, enumerate_sum_side, euler_factorize, ConditionSet,
    FixtureSet, Method, TruncatedSeries,
};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(
    name = "rrid",
    version,
    about = "Search for and verify partition identities of Rogers-Ramanujan type"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Sweep a grid of condition sets and report periodic product sides.
    Search {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the grid's order.
        #[arg(long)]
        order: Option<usize>,
        #[arg(long)]
        p_max: Option<usize>,
        #[arg(long)]
        min_repeats: Option<usize>,
        /// Worker threads; 0 picks the number of CPUs.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Re-check hits at this higher order.
        #[arg(long)]
        refine: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Include wall time in the report (breaks byte-identical output).
        #[arg(long)]
        timing: bool,
    },
    /// Check built-in identities to high order.
    Verify {
        /// I1..I6, or "all".
        #[arg(long)]
        identity: String,
        #[arg(long, default_value_t = 500)]
        order: usize,
        #[arg(long, value_enum, default_value_t = MethodArg::Recursion)]
        method: MethodArg,
        /// Alternative fixture file with the same schema as the built-in one.
        #[arg(long)]
        fixtures: Option<PathBuf>,
        /// Print the JSON reports instead of one line per identity.
        #[arg(long)]
        json: bool,
    },
    /// Factor a coefficient list into Euler-product exponents.
    Factor {
        #[arg(long)]
        coeffs: PathBuf,
        /// Use only b_0..b_N.
        #[arg(long)]
        order: Option<usize>,
    },
    /// Count (and optionally list) partitions of n under a condition set.
    Enumerate {
        #[arg(
            long,
            conflicts_with = "identity",
            required_unless_present = "identity"
        )]
        conditions: Option<PathBuf>,
        #[arg(long)]
        identity: Option<String>,
        #[arg(long)]
        n: u32,
        #[arg(long)]
        list: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Recursion,
    Enumeration,
    Both,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Recursion => Method::Recursion,
            MethodArg::Enumeration => Method::Enumeration,
            MethodArg::Both => Method::Both,
        }
    }
}

/// Error carrying the exit code it should produce.
struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if !f.message.is_empty() {
                eprintln!("error: {}", f.message);
            }
            ExitCode::from(f.code)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Search {
            config,
            order,
            p_max,
            min_repeats,
            jobs,
            refine,
            out,
            timing,
        } => {
            let text = read(&config)?;
            let mut grid = SearchGrid::from_json(&text)
                .map_err(|e| usage(format!("{}: {e}", config.display())))?;
            if let Some(n) = order {
                grid.order = n;
            }
            if let Some(p) = p_max {
                grid.p_max = p;
            }
            if let Some(r) = min_repeats {
                grid.min_repeats = r;
            }
            if refine.is_some() {
                grid.refine = refine;
            }
            grid.validate()
                .map_err(|e| usage(format!("{}: {e}", config.display())))?;
            eprintln!(
                "searching {} grid cells at order {}",
                grid.raw_size(),
                grid.order
            );
            let report = run_search(&grid, jobs, timing).map_err(|e| usage(e.to_string()))?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes") + "\n";
            eprintln!(
                "{} distinct cells, {} hits, {} failures",
                report.cells,
                report.hits.len(),
                report.failures.len()
            );
            match out {
                Some(path) => {
                    fs::write(&path, json).map_err(|e| usage(format!("{}: {e}", path.display())))?
                }
                None => print!("{json}"),
            }
            Ok(())
        }
        Command::Verify {
            identity,
            order,
            method,
            fixtures,
            json,
        } => {
            let owned;
            let set = match &fixtures {
                Some(path) => {
                    owned = FixtureSet::from_json(&read(path)?)
                        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
                    &owned
                }
                None => FixtureSet::builtin(),
            };
            let specs: Vec<IdentitySpec> = if identity.eq_ignore_ascii_case("all") {
                set.identities().to_vec()
            } else {
                vec![set
                    .identity(&identity)
                    .map_err(|e| usage(e.to_string()))?
                    .clone()]
            };
            let reports =
                verify_many(set, &specs, order, method.into()).map_err(|e| usage(e.to_string()))?;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&reports).expect("reports serialize")
                );
            } else {
                for r in &reports {
                    println!("{}", verify_line(r));
                }
            }
            for r in &reports {
                for w in &r.warnings {
                    eprintln!("warning: {w}");
                }
            }
            if reports.iter().all(|r| r.matched) {
                Ok(())
            } else {
                Err(Failure {
                    code: EXIT_MISMATCH,
                    message: String::new(),
                })
            }
        }
        Command::Factor { coeffs, order } => {
            let values = parse_coefficients(&read(&coeffs)?)
                .map_err(|e| usage(format!("{}: {e}", coeffs.display())))?;
            let n = match order {
                Some(n) if n + 1 > values.len() => {
                    return Err(usage(format!(
                        "--order {n} needs {} coefficients, file has {}",
                        n + 1,
                        values.len()
                    )))
                }
                Some(n) => n,
                None if values.is_empty() => return Err(usage("coefficient file is empty")),
                None => values.len() - 1,
            };
            let series = TruncatedSeries::from_coeffs(values, n);
            let exps = euler_factorize(&series)
                .map_err(|e| usage(format!("{}: {e}", coeffs.display())))?;
            for (i, a) in exps.as_slice().iter().enumerate() {
                println!("a_{} = {a}", i + 1);
            }
            match detect_period(
                &exps,
                rrid_core::product::DEFAULT_P_MAX,
                rrid_core::product::DEFAULT_MIN_REPEATS,
            ) {
                Ok(Some(shape)) => println!("period {}: {}", shape.period(), describe(&shape)),
                Ok(None) => println!("no period found"),
                Err(e) => println!("no period check: {e}"),
            }
            Ok(())
        }
        Command::Enumerate {
            conditions,
            identity,
            n,
            list,
        } => {
            let set = match (conditions, identity) {
                (Some(path), _) => ConditionSet::from_json(&read(&path)?)
                    .map_err(|e| usage(format!("{}: {e}", path.display())))?,
                (None, Some(name)) => FixtureSet::builtin()
                    .identity(&name)
                    .map_err(|e| usage(e.to_string()))?
                    .conditions
                    .clone(),
                (None, None) => return Err(usage("need --conditions or --identity")),
            };
            if list {
                let parts = enumerate_sum_side(&set, n);
                for p in &parts {
                    println!("{p}");
                }
                eprintln!("{} partitions of {n}", parts.len());
            } else {
                if n as usize > rrid_core::partition::MAX_COUNT_ORDER {
                    return Err(usage(format!(
                        "--n is limited to {} without --list",
                        rrid_core::partition::MAX_COUNT_ORDER
                    )));
                }
                let counts = count_sum_side(&set, n as usize);
                println!("{}", counts.coeffs()[n as usize]);
            }
            Ok(())
        }
    }
}

fn verify_line(r: &VerificationReport) -> String {
    match r.first_mismatch {
        None => {
            let method = format!("{:?}", r.method).to_lowercase();
            format!("{}: verified to q^{} ({method})", r.identity, r.order)
        }
        Some(k) => format!("{}: MISMATCH at q^{k} (order {})", r.identity, r.order),
    }
}
