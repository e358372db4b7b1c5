//! Command-line surface of the task-decomposition engine.
//!
//! Exit codes: 0 success, 1 usage/parse error, 2 input conflict,
//! 3 infeasible decomposition, 4 solver failure.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use nalgebra::DVector;
use stldecomp_cli::pipeline::{self, Overrides, RunError};
use stldecomp_cli::reports::{self, ResultDoc};
use stldecomp_cli::scenario::load_scenario;

#[derive(Parser)]
#[command(
    name = "stldecomp",
    about = "Rewrite collaborative STL tasks between non-communicating agents \
             into conjunctions along communication paths."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the full decomposition pipeline on a scenario file.
    Decompose {
        scenario: PathBuf,
        /// "centralized" or "decentralized" (overrides the scenario).
        #[arg(long)]
        mode: Option<String>,
        /// Decentralized iteration budget (overrides the scenario).
        #[arg(long)]
        max_iter: Option<usize>,
        /// Output directory for reports (default: alongside the scenario).
        #[arg(long)]
        out: Option<PathBuf>,
        /// RNG seed for verification sampling (overrides the scenario).
        #[arg(long)]
        seed: Option<u64>,
        /// Witness samples per decomposed task (overrides the scenario).
        #[arg(long)]
        verify_samples: Option<usize>,
    },
    /// Lint a scenario: conflict and consistency analysis only, no solve.
    Check { scenario: PathBuf },
    /// Re-run the soundness oracle on a stored result directory.
    Verify {
        dir: PathBuf,
        /// Witness samples per decomposed task.
        #[arg(long, default_value_t = 1000)]
        samples: usize,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Run(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                RunError::InputConflict(_) => 2,
                RunError::Infeasible(_) => 3,
                RunError::Solver(_) => 4,
            })
        }
    }
}

enum Failure {
    Usage(String),
    Run(RunError),
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        Failure::Run(e)
    }
}

fn dispatch(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Decompose {
            scenario,
            mode,
            max_iter,
            out,
            seed,
            verify_samples,
        } => {
            let sc = load_scenario(&scenario).map_err(|e| Failure::Usage(e.to_string()))?;
            let overrides = Overrides {
                mode,
                max_iter,
                seed,
                verify_samples,
            };
            let result = pipeline::run(&sc, &overrides)?;
            let mode = overrides
                .mode
                .clone()
                .unwrap_or_else(|| sc.solver.mode.clone());

            println!("scenario        : {}", sc.name);
            println!("mode            : {mode}");
            println!("decomposed tasks: {}", result.index.units.len());
            println!("objective       : {:.6}", result.report.objective);
            println!("iterations      : {}", result.report.iterations);
            println!(
                "shared residual : {:.3e}",
                result.report.max_shared_residual
            );
            for u in &result.verification.units {
                println!(
                    "  task on ({}, {}) [{}]: accuracy {:.4}, path {:?}",
                    u.edge.0, u.edge.1, u.operator, u.alpha_sum, u.path
                );
            }
            let v = &result.verification;
            println!(
                "verification    : conflict-free={} consistent={} acyclic={} \
                 witnesses={}/{} negative-control={} signal-check={}",
                v.conflict_free,
                v.consistent,
                v.task_graph_acyclic,
                v.witness_pass,
                v.witness_total,
                v.negative_control_detected,
                v.signal_check
            );

            let out_dir = out.unwrap_or_else(|| {
                scenario
                    .parent()
                    .unwrap_or_else(|| std::path::Path::new("."))
                    .join(format!("{}_out", sc.name))
            });
            reports::emit_reports(&out_dir, &sc, &scenario, &mode, &result)
                .map_err(|e| Failure::Usage(format!("cannot write reports: {e}")))?;
            println!("reports written : {}", out_dir.display());

            let sound = v.conflict_free
                && v.consistent
                && v.task_graph_acyclic
                && v.witness_pass == v.witness_total
                && v.negative_control_detected
                && v.signal_check;
            if !sound {
                return Err(Failure::Run(RunError::Solver(
                    "verification failed on the computed decomposition".into(),
                )));
            }
            Ok(())
        }
        Command::Check { scenario } => {
            let sc = load_scenario(&scenario).map_err(|e| Failure::Usage(e.to_string()))?;
            let g = stldecomp::graphs::build_graphs(
                &sc.agents,
                &sc.tasks,
                sc.radius,
                sc.tokens.as_ref(),
            )
            .map_err(|e| Failure::Run(RunError::Solver(e.to_string())))?;
            let findings =
                pipeline::validate_input(&g, &sc).map_err(|e| Failure::Run(e.into()))?;
            let mut inconsistent = 0usize;
            for (edge, tasks) in &g.task_edges {
                if edge.0 == edge.1 {
                    continue;
                }
                for t in tasks {
                    if !stldecomp::graphs::task_consistent(&g, &sc.agents, t)
                        .map_err(|e| Failure::Run(RunError::Solver(e.to_string())))?
                    {
                        inconsistent += 1;
                        let (i, j) = sc.external_edge(*edge);
                        println!("inconsistent task on edge ({i}, {j})");
                    }
                }
            }
            println!("tasks           : {}", sc.tasks.len());
            println!("inconsistent    : {inconsistent}");
            if findings.is_empty() {
                println!("conflicts       : none");
                Ok(())
            } else {
                for f in &findings {
                    println!("conflict        : {f}");
                }
                Err(Failure::Run(RunError::InputConflict(format!(
                    "{} conflicting conjunctions",
                    findings.len()
                ))))
            }
        }
        Command::Verify { dir, samples } => {
            let sc = load_scenario(&dir.join("scenario.json"))
                .map_err(|e| Failure::Usage(e.to_string()))?;
            let text = std::fs::read_to_string(dir.join("result.json"))
                .map_err(|e| Failure::Usage(format!("cannot read result.json: {e}")))?;
            let doc: ResultDoc = serde_json::from_str(&text)
                .map_err(|e| Failure::Usage(format!("cannot parse result.json: {e}")))?;
            let mut chi = BTreeMap::new();
            for (key, vals) in &doc.chi {
                let edge = reports::parse_edge_key(&sc, key)
                    .ok_or_else(|| Failure::Usage(format!("bad edge key {key:?}")))?;
                chi.insert(edge, DVector::from_row_slice(vals));
            }
            let (residual, pass, total) = pipeline::reverify(&sc, &chi, samples)?;
            println!("shared residual : {residual:.3e}");
            println!("witnesses       : {pass}/{total}");
            if residual <= 1e-4 && pass == total {
                println!("verdict         : sound");
                Ok(())
            } else {
                Err(Failure::Run(RunError::Infeasible(
                    "stored decomposition fails re-verification".into(),
                )))
            }
        }
    }
}
