use std::fs::File;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use clap::{Parser, Subcommand};
use log::error;
use taskscope_demo::check::{schedule_violations, state_machine_violations};
use taskscope_demo::granularity::{format_table, write_csv};
use taskscope_demo::{
    generate_twin_trees, granularity_benchmark, run_random_dag, DemoError, RandomDagSpec,
    DEFAULT_TASKS_PER_WORKER,
};
use taskscope_runtime::{Runtime, RuntimeConfig, WaitOutcome};

/// Demo workloads for the taskscope runtime and debugger.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Demo,
}

#[derive(Debug, Subcommand)]
enum Demo {
    /// Two independent ten-task reduction trees.
    TwinTrees {
        /// Connect to a debugger waiting at this address.
        #[arg(long, value_name = "ADDR")]
        connect: Option<String>,
        /// Wait for a debugger to attach at this address.
        #[arg(long, value_name = "ADDR", conflicts_with = "connect")]
        listen: Option<String>,
        /// Record the frame stream to a trace file.
        #[arg(long, value_name = "FILE.ayu")]
        record: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
        /// Busy time of every task.
        #[arg(long, value_name = "DURATION", default_value = "10ms", value_parser = humantime::parse_duration)]
        task_time: Duration,
    },
    /// Tasks with seeded random accesses; always records a trace.
    RandomDag {
        #[arg(long, default_value_t = 50)]
        tasks: usize,
        #[arg(long, default_value_t = 8)]
        handles: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        workers: usize,
        /// Trace file; defaults to random-dag-<seed>.ayu.
        #[arg(long, value_name = "FILE.ayu")]
        record: Option<PathBuf>,
    },
    /// Parallel efficiency for a sweep of task durations.
    Granularity {
        #[arg(long, value_delimiter = ',', default_value = "10us,1ms,100ms", value_parser = humantime::parse_duration)]
        durations: Vec<Duration>,
        #[arg(long, default_value_t = 2)]
        workers: usize,
        #[arg(long, default_value_t = DEFAULT_TASKS_PER_WORKER)]
        tasks_per_worker: usize,
        /// Also write the table as CSV.
        #[arg(long, value_name = "FILE")]
        csv: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse().command) {
        Ok(code) => code,
        Err(e) => {
            error!("{e}");
            ExitCode::from(2)
        }
    }
}

fn run(demo: Demo) -> Result<ExitCode, DemoError> {
    match demo {
        Demo::TwinTrees {
            connect,
            listen,
            record,
            workers,
            task_time,
        } => {
            let mut config = RuntimeConfig::from_env().map_err(|e| DemoError::Usage(e.to_string()))?;
            if connect.is_some() || listen.is_some() {
                config.connect = connect;
                config.listen = listen;
            }
            config.workers = workers.or(config.workers);
            let mut builder = Runtime::builder().config(&config)?;
            if let Some(path) = &record {
                builder = builder.record_to(path).map_err(|source| DemoError::Io {
                    context: format!("cannot create {}", path.display()),
                    source,
                })?;
            }
            let runtime = builder.build();
            let trees = generate_twin_trees(&runtime, task_time)?;
            let summary = runtime.wait_all();
            println!(
                "twin-trees: {} tasks submitted, {} finished in {:.1} ms on {} workers",
                trees.tasks.len(),
                summary.finished,
                summary.wall.as_secs_f64() * 1e3,
                runtime.worker_count()
            );
            if let WaitOutcome::Stalled { unfinished } = &summary.outcome {
                println!("stalled; unfinished tasks: {unfinished:?}");
                return Ok(ExitCode::from(1));
            }
            Ok(ExitCode::SUCCESS)
        }
        Demo::RandomDag {
            tasks,
            handles,
            seed,
            workers,
            record,
        } => {
            let spec = RandomDagSpec {
                tasks,
                handles,
                seed,
                workers,
                ..RandomDagSpec::default()
            };
            let path = record.unwrap_or_else(|| PathBuf::from(format!("random-dag-{seed}.ayu")));
            let run = run_random_dag(&spec, Some(&path))?;
            let s = &run.summary;
            println!(
                "random-dag seed {seed}: {} tasks, {} finished, {} dependencies, max concurrency {}, {:.1} ms",
                s.created,
                s.finished,
                s.edges,
                s.max_concurrency,
                s.wall.as_secs_f64() * 1e3
            );
            println!("trace: {}", path.display());
            let violations: Vec<_> = schedule_violations(&run.frames)
                .into_iter()
                .chain(state_machine_violations(&run.frames, true))
                .collect();
            for v in &violations {
                println!("violation: {v}");
            }
            Ok(if violations.is_empty() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
        Demo::Granularity {
            durations,
            workers,
            tasks_per_worker,
            csv,
        } => {
            let rows = granularity_benchmark(&durations, workers, tasks_per_worker)?;
            print!("{}", format_table(&rows));
            if let Some(path) = csv {
                let file = File::create(&path).map_err(|source| DemoError::Io {
                    context: format!("cannot create {}", path.display()),
                    source,
                })?;
                write_csv(&rows, file)?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}
