//! Command-line surface for the timed-opacity analyses.
//!
//! Exit codes: 0 for a conclusive result, 2 when an exploration budget
//! truncated the analysis (the printed result is still sound), 1 for
//! usage, parse or validation errors.

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use topacity::model;
use topacity::opacity::{
    compute_opaque_times, lu_emptiness, synth_opacity, EmptinessResult, OpacityProblem,
    OpacityStatus,
};
use topacity::oracle::{explore_durations, OracleOptions};
use topacity::pta::{LuClassification, Pta, UseSite};
use topacity::rational::{parse_rat, render_rat, Rat};
use topacity::symbolic::{explore, render_zone_graph, ExplorationBudget, ExploreOptions};

#[derive(Parser)]
#[command(
    name = "topacity",
    about = "Timed-opacity analysis and synthesis for (parametric) timed automata",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Model file (.pta)
    model: PathBuf,
    /// Additional private locations, beyond those marked in the model
    #[arg(long = "priv", value_name = "LOC")]
    private: Vec<String>,
    /// Parameter bindings, e.g. --bind eps=1 --bind p=1.002
    #[arg(long = "bind", value_name = "NAME=VALUE")]
    bind: Vec<String>,
    /// Maximum exploration depth
    #[arg(long = "max-depth", value_name = "N")]
    max_depth: Option<usize>,
    /// Maximum number of symbolic states
    #[arg(long = "max-states", value_name = "N", default_value_t = 100_000)]
    max_states: usize,
    /// Output format
    #[arg(long = "format", value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(clap::ValueEnum, Clone, Copy, PartialEq, Eq)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the parameter valuations reaching a target location
    Reach {
        #[command(flatten)]
        common: CommonArgs,
        /// Target location
        #[arg(long = "target", value_name = "LOC")]
        target: String,
    },
    /// Compute the visiting/avoiding duration sets and the opacity verdict
    Times {
        #[command(flatten)]
        common: CommonArgs,
        /// Final location (execution times are measured at its first entry)
        #[arg(long = "final", value_name = "LOC")]
        final_location: String,
    },
    /// Report only the opacity status
    Check {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "final", value_name = "LOC")]
        final_location: String,
    },
    /// Synthesize parameter valuations and execution times preserving opacity
    Synth {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "final", value_name = "LOC")]
        final_location: String,
        /// Parameters kept in the output (comma-separated); the
        /// execution-time parameter is always kept
        #[arg(long = "project", value_name = "P1,P2,...", value_delimiter = ',')]
        project: Option<Vec<String>>,
    },
    /// Classify parameters into lower/upper-bound use
    Classify {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Decide emptiness of the opacity synthesis problem (L/U models)
    Empty {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "final", value_name = "LOC")]
        final_location: String,
    },
    /// Enumerate concrete run durations on a grid (debugging aid)
    Oracle {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long = "final", value_name = "LOC")]
        final_location: String,
        /// Delay grid denominator (delays are multiples of 1/D)
        #[arg(long = "grid", value_name = "D")]
        grid: Option<u64>,
        /// Explore runs up to this duration
        #[arg(long = "time-bound", value_name = "Q")]
        time_bound: Option<String>,
        /// Maximum number of discrete steps per run
        #[arg(long = "step-bound", value_name = "N")]
        step_bound: Option<usize>,
    },
    /// Print the symbolic state graph
    DumpZonegraph {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_model(common: &CommonArgs) -> Result<Pta> {
    let text = std::fs::read_to_string(&common.model)
        .with_context(|| format!("cannot read {}", common.model.display()))?;
    let source = model::parse(&text).map_err(|d| anyhow!("{}: {d}", common.model.display()))?;
    let pta = source.compose()?;
    pta.validate()?;
    Ok(pta)
}

fn parse_bindings(common: &CommonArgs) -> Result<BTreeMap<String, Rat>> {
    let mut bindings = BTreeMap::new();
    for item in &common.bind {
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| anyhow!("--bind expects NAME=VALUE, got `{item}`"))?;
        let value = parse_rat(value)
            .ok_or_else(|| anyhow!("invalid rational `{value}` in --bind {item}"))?;
        bindings.insert(name.trim().to_string(), value);
    }
    Ok(bindings)
}

fn budget(common: &CommonArgs) -> ExplorationBudget {
    ExplorationBudget {
        max_depth: common.max_depth,
        max_states: Some(common.max_states),
    }
}

fn build_problem(common: &CommonArgs, final_location: &str) -> Result<OpacityProblem> {
    let pta = load_model(common)?;
    let mut problem = OpacityProblem::new(pta, final_location)?;
    for name in &common.private {
        problem.mark_private(name)?;
    }
    problem.bindings = parse_bindings(common)?;
    Ok(problem)
}

fn conclusive_exit(conclusive: bool) -> ExitCode {
    if conclusive {
        ExitCode::from(0)
    } else {
        eprintln!("inconclusive: exploration budget exhausted; result is a sound under-approximation");
        ExitCode::from(2)
    }
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Reach { common, target } => {
            let pta = load_model(&common)?;
            let bindings = parse_bindings(&common)?;
            let pta = pta.instantiate_model(&bindings)?;
            let expansion = pta.expand_discrete();
            let base = pta
                .location_id(&target)
                .ok_or_else(|| anyhow!("unknown location {target}"))?;
            let targets = expansion.locations_of_base(base);
            let (constraint, conclusive) =
                topacity::symbolic::efsynth(&expansion.pta, &targets, &budget(&common))?;
            match common.format {
                Format::Text => println!("{}", constraint.render()),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "constraint": constraint.to_json(),
                        "conclusive": conclusive,
                    })
                ),
            }
            Ok(conclusive_exit(conclusive))
        }
        Command::Times {
            common,
            final_location,
        } => {
            let problem = build_problem(&common, &final_location)?;
            let verdict = compute_opaque_times(&problem, &budget(&common))?;
            match common.format {
                Format::Text => {
                    println!("status: {}", verdict.status.as_str());
                    println!("visit: {}", verdict.visit.render());
                    println!("avoid: {}", verdict.avoid.render());
                    println!("opaque_times: {}", verdict.opaque_times.render());
                }
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "status": verdict.status.as_str(),
                        "visit": verdict.visit.to_json(),
                        "avoid": verdict.avoid.to_json(),
                        "opaque_times": verdict.opaque_times.to_json(),
                    })
                ),
            }
            Ok(conclusive_exit(verdict.status != OpacityStatus::Inconclusive))
        }
        Command::Check {
            common,
            final_location,
        } => {
            let problem = build_problem(&common, &final_location)?;
            let verdict = compute_opaque_times(&problem, &budget(&common))?;
            match common.format {
                Format::Text => println!("{}", verdict.status.as_str()),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({ "status": verdict.status.as_str() })
                ),
            }
            Ok(conclusive_exit(verdict.status != OpacityStatus::Inconclusive))
        }
        Command::Synth {
            common,
            final_location,
            project,
        } => {
            let mut problem = build_problem(&common, &final_location)?;
            if let Some(project) = project {
                problem.projection = Some(project.into_iter().collect());
            }
            let result = synth_opacity(&problem, &budget(&common))?;
            match common.format {
                Format::Text => println!("{}", result.constraint.render()),
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "constraint": result.constraint.to_json(),
                        "conclusive": result.conclusive,
                    })
                ),
            }
            Ok(conclusive_exit(result.conclusive))
        }
        Command::Classify { common } => {
            let pta = load_model(&common)?;
            let bindings = parse_bindings(&common)?;
            let pta = pta.instantiate_model(&bindings)?;
            let classification = pta.classify_lu();
            match common.format {
                Format::Text => match &classification {
                    LuClassification::Lu { lower, upper } => {
                        let names = |set: &BTreeSet<usize>| {
                            set.iter()
                                .map(|&p| pta.params[p].0.clone())
                                .collect::<Vec<_>>()
                                .join(", ")
                        };
                        println!("LU lower={{{}}} upper={{{}}}", names(lower), names(upper));
                    }
                    LuClassification::NotLu {
                        param,
                        lower_use,
                        upper_use,
                    } => {
                        println!(
                            "NotLU witness={} lower_use=[{} at {}] upper_use=[{} at {}]",
                            pta.params[*param].0,
                            lower_use.atom,
                            site(&pta, &lower_use.site),
                            upper_use.atom,
                            site(&pta, &upper_use.site),
                        );
                    }
                },
                Format::Json => {
                    let value = match &classification {
                        LuClassification::Lu { lower, upper } => {
                            let names = |set: &BTreeSet<usize>| {
                                set.iter()
                                    .map(|&p| pta.params[p].0.clone())
                                    .collect::<Vec<_>>()
                            };
                            serde_json::json!({
                                "verdict": "LU",
                                "lower": names(lower),
                                "upper": names(upper),
                            })
                        }
                        LuClassification::NotLu {
                            param,
                            lower_use,
                            upper_use,
                        } => serde_json::json!({
                            "verdict": "NotLU",
                            "param": pta.params[*param].0,
                            "lower_use": {"atom": lower_use.atom, "site": site(&pta, &lower_use.site)},
                            "upper_use": {"atom": upper_use.atom, "site": site(&pta, &upper_use.site)},
                        }),
                    };
                    println!("{value}");
                }
            }
            Ok(ExitCode::from(0))
        }
        Command::Empty {
            common,
            final_location,
        } => {
            let problem = build_problem(&common, &final_location)?;
            let outcome = lu_emptiness(&problem, &budget(&common))?;
            if let Some(note) = &outcome.note {
                eprintln!("note: {note}");
            }
            let conclusive = outcome.result != EmptinessResult::Inconclusive;
            match common.format {
                Format::Text => match &outcome.result {
                    EmptinessResult::Empty => println!("Empty"),
                    EmptinessResult::NonEmpty {
                        witness,
                        witness_duration,
                    } => {
                        let pairs = witness
                            .iter()
                            .map(|(n, v)| format!("{n}={}", render_rat(v)))
                            .collect::<Vec<_>>()
                            .join(", ");
                        println!(
                            "NonEmpty duration={} witness: {}",
                            render_rat(witness_duration),
                            pairs
                        );
                    }
                    EmptinessResult::NotApplicable { reason } => {
                        println!("NotApplicable: {reason}")
                    }
                    EmptinessResult::Inconclusive => println!("Inconclusive"),
                },
                Format::Json => {
                    let value = match &outcome.result {
                        EmptinessResult::Empty => serde_json::json!({"verdict": "Empty"}),
                        EmptinessResult::NonEmpty {
                            witness,
                            witness_duration,
                        } => serde_json::json!({
                            "verdict": "NonEmpty",
                            "witness": witness
                                .iter()
                                .map(|(n, v)| (n.clone(), render_rat(v)))
                                .collect::<BTreeMap<String, String>>(),
                            "duration": render_rat(witness_duration),
                        }),
                        EmptinessResult::NotApplicable { reason } => {
                            serde_json::json!({"verdict": "NotApplicable", "reason": reason})
                        }
                        EmptinessResult::Inconclusive => {
                            serde_json::json!({"verdict": "Inconclusive"})
                        }
                    };
                    println!("{value}");
                }
            }
            Ok(conclusive_exit(conclusive))
        }
        Command::Oracle {
            common,
            final_location,
            grid,
            time_bound,
            step_bound,
        } => {
            let pta = load_model(&common)?;
            let bindings = parse_bindings(&common)?;
            let pta = pta.instantiate_model(&bindings)?;
            if !pta.params.is_empty() {
                bail!(
                    "the oracle needs a fully instantiated model; unbound: {}",
                    pta.params
                        .iter()
                        .map(|(n, _)| n.as_str())
                        .collect::<Vec<_>>()
                        .join(", ")
                );
            }
            let mut priv_locs = pta.private_locations();
            for name in &common.private {
                let id = pta
                    .location_id(name)
                    .ok_or_else(|| anyhow!("unknown location {name}"))?;
                priv_locs.insert(id);
            }
            let final_loc = pta
                .location_id(&final_location)
                .ok_or_else(|| anyhow!("unknown location {final_location}"))?;
            let mut opts = OracleOptions::defaults_for(&pta);
            if let Some(grid) = grid {
                opts.grid_denominator = grid;
            }
            if let Some(bound) = &time_bound {
                opts.time_bound =
                    parse_rat(bound).ok_or_else(|| anyhow!("invalid --time-bound {bound}"))?;
            }
            if let Some(steps) = step_bound {
                opts.step_bound = steps;
            }
            let result =
                explore_durations(&pta, &priv_locs, &pta.private_edges(), final_loc, &opts)?;
            let render_set = |set: &BTreeSet<Rat>| {
                set.iter().map(render_rat).collect::<Vec<_>>().join(", ")
            };
            match common.format {
                Format::Text => {
                    println!("visit: {}", render_set(&result.visit_durations));
                    println!("avoid: {}", render_set(&result.avoid_durations));
                    println!("exhausted: {}", result.exhausted);
                }
                Format::Json => println!(
                    "{}",
                    serde_json::json!({
                        "visit": result.visit_durations.iter().map(render_rat).collect::<Vec<_>>(),
                        "avoid": result.avoid_durations.iter().map(render_rat).collect::<Vec<_>>(),
                        "exhausted": result.exhausted,
                    })
                ),
            }
            Ok(conclusive_exit(result.exhausted))
        }
        Command::DumpZonegraph { common } => {
            let pta = load_model(&common)?;
            let bindings = parse_bindings(&common)?;
            let pta = pta.instantiate_model(&bindings)?;
            let expansion = pta.expand_discrete();
            let opts = ExploreOptions {
                budget: budget(&common),
                stop: BTreeSet::new(),
                disable_subsumption: false,
            };
            let graph = explore(&expansion.pta, &opts)?;
            match common.format {
                Format::Text => print!("{}", render_zone_graph(&expansion.pta, &graph)),
                Format::Json => {
                    let states: Vec<serde_json::Value> = graph
                        .states
                        .iter()
                        .map(|s| {
                            serde_json::json!({
                                "location": expansion.pta.locations[s.location].name,
                                "zone": s.zone.to_json(),
                            })
                        })
                        .collect();
                    println!(
                        "{}",
                        serde_json::json!({
                            "states": states,
                            "transitions": graph.transitions,
                            "complete": graph.complete,
                        })
                    );
                }
            }
            Ok(conclusive_exit(graph.complete))
        }
    }
}

fn site(pta: &Pta, site: &UseSite) -> String {
    match site {
        UseSite::Invariant { name, .. } => format!("invariant of {name}"),
        UseSite::EdgeGuard { edge } => {
            let e = &pta.edges[*edge];
            format!(
                "edge {} -> {}",
                pta.locations[e.source].name, pta.locations[e.target].name
            )
        }
    }
}
