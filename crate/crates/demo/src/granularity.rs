//! How task duration affects parallel efficiency.
//!
//! For each duration `d`, `workers * k` independent tasks each spin for
//! `d`. Efficiency is the busy time over the available worker time:
//! `(workers * k * d) / (workers * wall)`. Short tasks drown in scheduling
//! and instrumentation overhead; long ones approach 1.

use std::fmt::Write as _;
use std::io;
use std::time::{Duration, Instant};

use serde::Serialize;
use taskscope_runtime::{Runtime, WriterSink};

use crate::{busy_wait, DemoError};

pub const DEFAULT_TASKS_PER_WORKER: usize = 25;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GranularityRow {
    pub duration_us: u64,
    pub workers: usize,
    pub wall_ms: f64,
    pub efficiency: f64,
}

/// Runs one configuration. The runtime encodes its full event stream, as
/// it would with a debugger attached.
pub fn measure(duration: Duration, workers: usize, tasks_per_worker: usize) -> Result<GranularityRow, DemoError> {
    let workers = workers.max(1);
    let runtime = Runtime::builder()
        .workers(workers)
        .sink(WriterSink::new(io::sink()))
        .build();
    let busy = runtime.register_function("busy")?;
    let tasks = workers * tasks_per_worker;

    let start = Instant::now();
    for _ in 0..tasks {
        runtime.submit(busy, Vec::new(), move || busy_wait(duration))?;
    }
    runtime.wait_all();
    let wall = start.elapsed();
    drop(runtime);

    let busy_total = duration.as_secs_f64() * tasks as f64;
    Ok(GranularityRow {
        duration_us: duration.as_micros() as u64,
        workers,
        wall_ms: wall.as_secs_f64() * 1e3,
        efficiency: busy_total / (workers as f64 * wall.as_secs_f64()),
    })
}

pub fn granularity_benchmark(
    durations: &[Duration],
    workers: usize,
    tasks_per_worker: usize,
) -> Result<Vec<GranularityRow>, DemoError> {
    if durations.is_empty() {
        return Err(DemoError::Usage("no task durations given".into()));
    }
    durations
        .iter()
        .map(|&d| measure(d, workers, tasks_per_worker))
        .collect()
}

pub fn format_table(rows: &[GranularityRow]) -> String {
    let mut out = String::from("duration_us  workers     wall_ms  efficiency\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{:>11}  {:>7}  {:>10.2}  {:>10.3}",
            r.duration_us, r.workers, r.wall_ms, r.efficiency
        );
    }
    out
}

pub fn write_csv<W: io::Write>(rows: &[GranularityRow], out: W) -> Result<(), DemoError> {
    let mut writer = csv::Writer::from_writer(out);
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush().map_err(|source| DemoError::Io {
        context: "writing CSV".into(),
        source,
    })
}
