//! Command dispatch for the `efm` binary.
//!
//! Exit codes are a stable contract:
//!
//! | code | meaning                                               |
//! |------|-------------------------------------------------------|
//! | 0    | success (matching found / check passed / report done)  |
//! | 1    | input, validation, or usage error                      |
//! | 2    | `solve`: the market has no envy-free matching          |
//! | 3    | `check`: the matching is infeasible or admits envy     |
//! | 4    | enumeration refused: search space exceeds the budget   |

pub mod doc;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use efm_core::oracle::{self, sat, OracleError};
use efm_core::predicates::{find_blocking_pairs, find_justified_envy};
use efm_core::{compile_instance, fixedpoint, gen, hr, Matching, MarketInstance, SolveOutcome};
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::Read;

pub const NO_ENVY_FREE: &str = "there is no envy-free matching";

#[derive(Parser)]
#[command(
    name = "efm",
    version,
    about = "Envy-free matchings in assignment markets with lower quotas"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Find an envy-free matching, or report that none exists.
    Solve {
        /// Instance file, or "-" for standard input.
        path: String,
        /// Which solver to run.
        #[arg(long, value_enum, default_value_t = Model::Csm)]
        model: Model,
        /// Output format for a found matching.
        #[arg(long, value_enum, default_value_t = Emit::Text)]
        emit: Emit,
        /// Enumeration budget for --model oracle (overrides EFM_BUDGET).
        #[arg(long)]
        budget: Option<u128>,
    },
    /// Verify a matching against an instance: feasibility, blocking pairs,
    /// justified envy.
    Check {
        /// Instance file, or "-" for standard input.
        path: String,
        /// Matching file: doctor<TAB>hospital lines or a JSON array of pairs.
        matching: String,
    },
    /// Generate an instance document on standard output.
    Generate {
        #[arg(long, value_enum)]
        kind: Kind,
        /// PRNG seed; identical seeds give byte-identical documents.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Variables for --kind sat (a positive multiple of 3).
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 6)]
        doctors: usize,
        #[arg(long, default_value_t = 3)]
        hospitals: usize,
        /// Probability of each doctor-hospital acceptability edge.
        #[arg(long, default_value_t = 0.5)]
        edge_prob: f64,
    },
    /// Exhaustively count feasible, envy-free, and stable matchings.
    Oracle {
        /// Instance file, or "-" for standard input.
        path: String,
        /// Enumeration budget (overrides EFM_BUDGET).
        #[arg(long)]
        budget: Option<u128>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Model {
    /// Interval-quota solver (lower-quota Gale-Shapley probe).
    Hrlq,
    /// Fixed-point solver over compiled classified quotas.
    Csm,
    /// Exhaustive search; works for any quota the validator accepts.
    Oracle,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Emit {
    Text,
    Json,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Kind {
    /// Market reduced from a random (3,B2)-SAT formula.
    Sat,
    /// Random market with interval quotas.
    RandomHrlq,
    /// Random market with laminar-class quotas.
    RandomLaminar,
    /// Random market with staffing-section quotas.
    RandomStaffing,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Solve { path, model, emit, budget } => cmd_solve(&path, model, emit, budget),
        Command::Check { path, matching } => cmd_check(&path, &matching),
        Command::Generate { kind, seed, n, doctors, hospitals, edge_prob } => {
            cmd_generate(kind, seed, n, doctors, hospitals, edge_prob)
        }
        Command::Oracle { path, budget } => cmd_oracle(&path, budget),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}

fn read_input(path: &str) -> Result<String> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin()
            .read_to_string(&mut buf)
            .context("reading standard input")?;
        Ok(buf)
    } else {
        std::fs::read_to_string(path).with_context(|| format!("reading {path}"))
    }
}

fn load_instance(path: &str) -> Result<MarketInstance> {
    doc::parse(&read_input(path)?)
}

/// Budget resolution order: command flag, then EFM_BUDGET, then the default.
fn resolve_budget(flag: Option<u128>) -> Result<u128> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("EFM_BUDGET") {
        Ok(raw) => raw
            .trim()
            .parse::<u128>()
            .with_context(|| format!("EFM_BUDGET is not a non-negative integer: {raw:?}")),
        Err(_) => Ok(oracle::DEFAULT_BUDGET),
    }
}

fn print_matching(inst: &MarketInstance, m: &Matching, emit: Emit) {
    let pairs = doc::matching_pairs(inst, m);
    match emit {
        Emit::Text => {
            for (d, h) in pairs {
                println!("{d}\t{h}");
            }
        }
        Emit::Json => {
            println!("{}", serde_json::to_string(&pairs).expect("pairs serialize"));
        }
    }
}

fn report_outcome(inst: &MarketInstance, outcome: &SolveOutcome, emit: Emit) -> i32 {
    match outcome {
        SolveOutcome::Matching(m) => {
            print_matching(inst, m, emit);
            0
        }
        SolveOutcome::NoEnvyFree => {
            println!("{NO_ENVY_FREE}");
            2
        }
    }
}

fn cmd_solve(path: &str, model: Model, emit: Emit, budget: Option<u128>) -> Result<i32> {
    let inst = load_instance(path)?;
    match model {
        Model::Hrlq => {
            let outcome = hr::ef_hrlq(&inst)?;
            Ok(report_outcome(&inst, &outcome, emit))
        }
        Model::Csm => match compile_instance(&inst) {
            Ok(ci) => Ok(report_outcome(&inst, &fixedpoint::solve(&ci).outcome, emit)),
            Err(e) => {
                eprintln!("error: {e}");
                eprintln!("hint: this quota family is outside the fixed-point solver's reach; re-run with --model oracle for exhaustive search");
                Ok(1)
            }
        },
        Model::Oracle => {
            let budget = resolve_budget(budget)?;
            match oracle::exists_envy_free(&inst, budget) {
                Ok(Some(m)) => Ok(report_outcome(&inst, &SolveOutcome::Matching(m), emit)),
                Ok(None) => Ok(report_outcome(&inst, &SolveOutcome::NoEnvyFree, emit)),
                Err(e @ OracleError::BudgetExceeded { .. }) => {
                    eprintln!("error: {e}");
                    Ok(4)
                }
            }
        }
    }
}

fn cmd_check(path: &str, matching_path: &str) -> Result<i32> {
    if path == "-" && matching_path == "-" {
        bail!("only one of the two inputs can come from standard input");
    }
    let inst = load_instance(path)?;
    let m = doc::parse_matching(&inst, &read_input(matching_path)?)?;

    let infeasible: Vec<_> = inst
        .hospitals()
        .filter(|&h| !inst.quota(h).member(m.roster(h)))
        .collect();
    if !infeasible.is_empty() {
        println!("feasible: no");
        for h in infeasible {
            println!(
                "  hospital {} holds {} doctors, violating its quota",
                inst.hospital_name(h),
                m.roster_size(h)
            );
        }
        return Ok(3);
    }
    println!("feasible: yes");

    let blocking = find_blocking_pairs(&inst, &m).expect("feasibility was just checked");
    println!("blocking pairs: {}", blocking.len());
    for (d, h) in &blocking {
        println!("  {}\t{}", inst.doctor_name(*d), inst.hospital_name(*h));
    }

    let envy = find_justified_envy(&inst, &m).expect("feasibility was just checked");
    println!("justified envy: {}", envy.len());
    for t in &envy {
        println!(
            "  {} envies {} at {}",
            inst.doctor_name(t.envier),
            inst.doctor_name(t.envied),
            inst.hospital_name(t.hospital)
        );
    }
    Ok(if envy.is_empty() { 0 } else { 3 })
}

fn cmd_generate(
    kind: Kind,
    seed: u64,
    n: usize,
    doctors: usize,
    hospitals: usize,
    edge_prob: f64,
) -> Result<i32> {
    if !(0.0..=1.0).contains(&edge_prob) {
        bail!("--edge-prob must lie in [0, 1], got {edge_prob}");
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let inst = match kind {
        Kind::Sat => {
            if n == 0 || n % 3 != 0 {
                bail!("--kind sat needs --n to be a positive multiple of 3, got {n}");
            }
            let cnf = sat::random_cnf(&mut rng, n);
            sat::reduce_sat(&cnf, sat::HospitalOrder::AscendingDoctors)
                .expect("generated formulas are well-formed")
        }
        Kind::RandomHrlq => gen::random_hrlq(&mut rng, doctors, hospitals, edge_prob),
        Kind::RandomLaminar => gen::random_laminar(&mut rng, doctors, hospitals, edge_prob),
        Kind::RandomStaffing => gen::random_staffing(&mut rng, doctors, hospitals, edge_prob),
    };
    print!("{}", doc::emit(&inst));
    Ok(0)
}

fn cmd_oracle(path: &str, budget: Option<u128>) -> Result<i32> {
    let inst = load_instance(path)?;
    let budget = resolve_budget(budget)?;
    let survey = match oracle::survey(&inst, budget) {
        Ok(s) => s,
        Err(e @ OracleError::BudgetExceeded { .. }) => {
            eprintln!("error: {e}");
            return Ok(4);
        }
    };
    println!("feasible: {}", survey.feasible);
    println!("envy-free: {}", survey.envy_free);
    println!("stable: {}", survey.stable);
    let witnesses = [
        ("first feasible", &survey.first_feasible),
        ("first envy-free", &survey.first_envy_free),
        ("first stable", &survey.first_stable),
    ];
    for (label, witness) in witnesses {
        if let Some(m) = witness {
            if m.is_empty() {
                println!("{label}: (empty matching)");
            } else {
                println!("{label}:");
                for (d, h) in doc::matching_pairs(&inst, m) {
                    println!("  {d}\t{h}");
                }
            }
        }
    }
    Ok(0)
}
