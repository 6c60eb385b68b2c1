//! Command-line front end: scenario ingestion, command dispatch, and
//! trace/report emission.
//!
//! Exit codes are a stable contract: 0 success, 2 input error, 3 cycle
//! detected, 4 step cap exceeded, 5 verification failure.

use clap::{Parser, Subcommand, ValueEnum};
use hierarchy_arb::aggregation::{compare_responsiveness, AggregationMap, Responsiveness};
use hierarchy_arb::dominance::{compute_ladder, opponent_product_at, DominanceLadder};
use hierarchy_arb::oracle::{run_verification, InstanceBounds};
use hierarchy_arb::scenario::{
    AggregationDoc, MarketScenario, Mode, ScenarioDocument, TradePlan,
};
use hierarchy_arb::tatonnement::{self, Terminal};
use hierarchy_arb::{dominance, Error};
use serde::Serialize;
use std::path::PathBuf;
use std::process::ExitCode;

const EXIT_INPUT: u8 = 2;
const EXIT_CYCLE: u8 = 3;
const EXIT_STEP_CAP: u8 = 4;
const EXIT_VERIFY_FAIL: u8 = 5;

#[derive(Parser)]
#[command(
    name = "hierarchy-arb",
    about = "Exact-rational market simulator: iterated dominance ladders, \
             arbitrage witnesses, price adjustment traces, and a seeded \
             verification suite",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Uniform,
    Pointwise,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Uniform => Mode::Uniform,
            ModeArg::Pointwise => Mode::Pointwise,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print every agent's elimination ladder (survivor and removed sets
    /// per round) and the stabilization round count.
    Ladder {
        #[arg(long)]
        scenario: PathBuf,
        /// Quantifier mode override (defaults to the document's flag).
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a strategy profile for a tradeable improvement and emit the
    /// zero-cost trade plan witnessing it.
    Arbitrage {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated strategy indices, one per agent (e.g. "0,2,1").
        #[arg(long)]
        profile: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the sequential revision loop from an initial profile and write
    /// the annotated trace.
    Tatonnement {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated initial profile (defaults to all zeros).
        #[arg(long)]
        profile: Option<String>,
        /// Step cap override (defaults to the document's flag).
        #[arg(long)]
        max_steps: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the seeded verification suite and write the verdict report.
    Verify {
        /// Generator bounds document (defaults apply when omitted).
        #[arg(long)]
        bounds: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tabulate per-agent minimal strict-containment orders across
    /// aggregation-map variants, sorted by responsiveness.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// JSON array of aggregation specs to sweep over.
        #[arg(long)]
        variants: PathBuf,
        /// Anchor profile (defaults to all zeros).
        #[arg(long)]
        profile: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn read_scenario(path: &PathBuf) -> Result<MarketScenario, Error> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
    ScenarioDocument::from_json(&text)?.to_scenario()
}

fn parse_profile(text: &str, scen: &MarketScenario) -> Result<Vec<usize>, Error> {
    let profile: Vec<usize> = text
        .split(',')
        .map(|part| {
            part.trim()
                .parse::<usize>()
                .map_err(|_| Error::Parse(format!("invalid strategy index {part:?}")))
        })
        .collect::<Result<_, _>>()?;
    scen.check_profile(&profile)?;
    Ok(profile)
}

fn emit(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => std::fs::write(path, content)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Ladder { scenario, mode, out } => cmd_ladder(&scenario, mode, &out),
        Command::Arbitrage { scenario, profile, out } => cmd_arbitrage(&scenario, &profile, &out),
        Command::Tatonnement { scenario, profile, max_steps, out } => {
            cmd_tatonnement(&scenario, profile.as_deref(), max_steps, &out)
        }
        Command::Verify { bounds, seed, out } => cmd_verify(bounds.as_ref(), seed, &out),
        Command::Sweep { scenario, variants, profile, out } => {
            cmd_sweep(&scenario, &variants, profile.as_deref(), &out)
        }
    }
}

#[derive(Serialize)]
struct LadderReport {
    mode: Mode,
    /// Rounds executed, including the final no-op verification round.
    rounds: usize,
    ladders: Vec<AgentLadderReport>,
}

#[derive(Serialize)]
struct AgentLadderReport {
    name: String,
    #[serde(flatten)]
    ladder: DominanceLadder,
}

fn cmd_ladder(
    scenario: &PathBuf,
    mode: Option<ModeArg>,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let scen = read_scenario(scenario)?;
    let mode = mode.map(Mode::from).unwrap_or(scen.flags.mode);
    let ladders = compute_ladder(&scen, mode)?;
    let report = LadderReport {
        mode,
        rounds: ladders[0].stabilization_index,
        ladders: ladders
            .into_iter()
            .enumerate()
            .map(|(i, ladder)| AgentLadderReport {
                name: scen.agents()[i].name.clone(),
                ladder,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(out, &text)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
#[serde(rename_all = "snake_case", tag = "verdict")]
enum ArbitrageReport {
    None { profile: Vec<usize> },
    Arbitrage(Box<ArbitrageWitness>),
}

#[derive(Serialize)]
struct ArbitrageWitness {
    profile: Vec<usize>,
    agent: usize,
    agent_name: String,
    current: usize,
    improving: usize,
    plan: TradePlan,
}

fn cmd_arbitrage(
    scenario: &PathBuf,
    profile: &str,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let scen = read_scenario(scenario)?;
    let profile = parse_profile(profile, &scen)?;
    let table = hierarchy_arb::scenario::GainTable::new(&scen);
    let mut report = ArbitrageReport::None { profile: profile.clone() };
    for i in 0..scen.agents().len() {
        let m = scen.map().aggregate(&profile, &scen);
        if let Some(a_star) = dominance::dominated_wrtp(&table, &scen, i, profile[i], &m)? {
            let opp = scen.opponent_part(i, &profile);
            let plan = hierarchy_arb::scenario::build_arbitrage_portfolio(
                &scen, i, profile[i], a_star, &opp,
            )?;
            report = ArbitrageReport::Arbitrage(Box::new(ArbitrageWitness {
                profile: profile.clone(),
                agent: i,
                agent_name: scen.agents()[i].name.clone(),
                current: profile[i],
                improving: a_star,
                plan,
            }));
            break;
        }
    }
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_tatonnement(
    scenario: &PathBuf,
    profile: Option<&str>,
    max_steps: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let scen = read_scenario(scenario)?;
    let initial = match profile {
        Some(text) => parse_profile(text, &scen)?,
        None => vec![0; scen.agents().len()],
    };
    let max_steps = max_steps.unwrap_or(scen.flags.max_steps);
    let mut trace = tatonnement::run(&scen, &initial, max_steps)?;
    let ladders = compute_ladder(&scen, Mode::Uniform)?;
    tatonnement::annotate_prop6(&mut trace, &ladders, &scen)?;
    let code = match trace.terminal {
        Terminal::NoArbitrage => ExitCode::SUCCESS,
        Terminal::CycleDetected => ExitCode::from(EXIT_CYCLE),
        Terminal::MaxStepsExceeded => ExitCode::from(EXIT_STEP_CAP),
    };
    emit(out, &trace.to_json())?;
    Ok(code)
}

fn cmd_verify(
    bounds: Option<&PathBuf>,
    seed: Option<u64>,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let mut bounds = match bounds {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
            InstanceBounds::from_json(&text)?
        }
        None => InstanceBounds::default(),
    };
    if let Some(seed) = seed {
        bounds.seed = seed;
    }
    if let Ok(threads) = std::env::var("HIERARCHY_ARB_THREADS") {
        let threads: usize = threads
            .parse()
            .map_err(|_| Error::Config(format!("HIERARCHY_ARB_THREADS={threads:?} is not a thread count")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    }
    let started = std::time::Instant::now();
    let report = run_verification(&bounds)?;
    eprintln!("verification wall time: {} ms", started.elapsed().as_millis());
    emit(out, &report.to_json())?;
    if report.total_failures() > 0 {
        eprintln!("verification failures: {}", report.total_failures());
        return Ok(ExitCode::from(EXIT_VERIFY_FAIL));
    }
    Ok(ExitCode::SUCCESS)
}

/// Sort rank for sweep rows: coarser maps first, incomparable last.
fn responsiveness_rank(r: Responsiveness) -> (u8, &'static str) {
    match r {
        Responsiveness::F1AtLeastF2 => (0, "less"),
        Responsiveness::Equal => (1, "equal"),
        Responsiveness::F2AtLeastF1 => (2, "more"),
        Responsiveness::Incomparable => (3, "incomparable"),
    }
}

fn cmd_sweep(
    scenario: &PathBuf,
    variants: &PathBuf,
    profile: Option<&str>,
    out: &Option<PathBuf>,
) -> Result<ExitCode, Error> {
    let scen = read_scenario(scenario)?;
    let anchor = match profile {
        Some(text) => parse_profile(text, &scen)?,
        None => vec![0; scen.agents().len()],
    };
    let text = std::fs::read_to_string(variants)
        .map_err(|e| Error::Parse(format!("cannot read {}: {e}", variants.display())))?;
    let docs: Vec<AggregationDoc> =
        serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))?;
    if docs.is_empty() {
        return Err(Error::Validation("variant list is empty".into()));
    }
    let grid_sizes: Vec<usize> = scen.agents().iter().map(|a| a.grid.len()).collect();
    let maps: Vec<AggregationMap> = docs
        .iter()
        .map(|doc| {
            let map = doc.to_map(&grid_sizes)?;
            map.validate(&scen)?;
            Ok(map)
        })
        .collect::<Result<_, Error>>()?;

    // Minimal k whose opponent UD^k product (from the given reference
    // ladder) is strictly inside the consistent opponent set under `map` at
    // the anchor profile. The monotonicity claim is only sound when the
    // reference ladder belongs to the less responsive map of the pair.
    let minimal_ks = |map: &AggregationMap, ladders: &[DominanceLadder]| -> Vec<Option<usize>> {
        let scen_v = scen.with_map(map.clone()).expect("validated variant");
        let m = map.aggregate(&anchor, &scen_v);
        let max_k = ladders[0].levels.len();
        (0..scen.agents().len())
            .map(|i| {
                let fiber = hierarchy_arb::aggregation::invert(map, &m, i, anchor[i], &scen_v);
                (0..=max_k).find(|&k| {
                    let product = opponent_product_at(&scen, ladders, i, k);
                    product.iter().all(|t| fiber.profiles.contains(t))
                        && fiber.profiles.len() > product.len()
                })
            })
            .collect()
    };
    let base_ladders = compute_ladder(&scen, Mode::Uniform)?;
    let base_ks = minimal_ks(scen.map(), &base_ladders);

    struct Row {
        variant: usize,
        kind: &'static str,
        rank: u8,
        label: &'static str,
        ks: Vec<Option<usize>>,
        /// Baseline minimal orders recomputed against this row's reference
        /// ladder (differs from `base_ks` only for coarser variants).
        base_ks: Vec<Option<usize>>,
    }
    let mut rows: Vec<Row> = Vec::with_capacity(maps.len());
    for (v, map) in maps.iter().enumerate() {
        let (rank, label) = responsiveness_rank(compare_responsiveness(scen.map(), map, &scen));
        let (ks, row_base_ks) = match label {
            // Baseline is the less responsive side: its ladder is the
            // shared reference.
            "more" | "equal" => (minimal_ks(map, &base_ladders), base_ks.clone()),
            // Variant is coarser (or incomparable): reference is the
            // variant's own ladder.
            _ => {
                let scen_v = scen.with_map(map.clone())?;
                let ladders_v = compute_ladder(&scen_v, Mode::Uniform)?;
                (minimal_ks(map, &ladders_v), minimal_ks(scen.map(), &ladders_v))
            }
        };
        rows.push(Row { variant: v, kind: map.kind_label(), rank, label, ks, base_ks: row_base_ks });
    }
    rows.sort_by_key(|row| (row.rank, row.variant));

    // Monotonicity audit along chains comparable with the baseline: the
    // more responsive side may only raise (or unbound) each agent's minimal
    // order relative to the shared reference ladder.
    let mut violation = false;
    let mut csv = String::from("variant,kind,responsiveness_vs_base,");
    csv.push_str(
        &scen
            .agents()
            .iter()
            .map(|a| format!("min_k_{}", a.name))
            .collect::<Vec<_>>()
            .join(","),
    );
    csv.push_str(",monotone_vs_base\n");
    for row in &rows {
        let monotone = match row.label {
            "incomparable" => "n/a".to_string(),
            // The finer side's minimal order may not drop below the coarser
            // side's; for coarser variants the roles swap.
            _ => {
                let (coarse, fine): (&[Option<usize>], &[Option<usize>]) =
                    if row.label == "less" {
                        (&row.ks, &row.base_ks)
                    } else {
                        (&row.base_ks, &row.ks)
                    };
                let ok = coarse.iter().zip(fine).all(|(c, f)| match (c, f) {
                    (None, Some(_)) => false,
                    (Some(c), Some(f)) => f >= c,
                    _ => true,
                });
                if !ok {
                    violation = true;
                }
                ok.to_string()
            }
        };
        let ks = row
            .ks
            .iter()
            .map(|k| k.map(|k| k.to_string()).unwrap_or_else(|| "unbounded".into()))
            .collect::<Vec<_>>()
            .join(",");
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.variant, row.kind, row.label, ks, monotone
        ));
    }
    emit(out, &csv)?;
    if violation {
        eprintln!("monotonicity violated along a comparable chain");
        return Ok(ExitCode::from(EXIT_VERIFY_FAIL));
    }
    Ok(ExitCode::SUCCESS)
}
