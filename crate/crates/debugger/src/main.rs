use std::io::BufRead;
use std::net::TcpListener;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::mpsc;
use std::thread;
use std::time::{Duration, Instant};

use clap::Parser;
use log::{error, info, warn};
use taskscope_debugger::app::{summary, Driver};
use taskscope_debugger::assets::{AssetServer, DEFAULT_ASSETS_ADDR};
use taskscope_debugger::{
    attach_external_debugger, load_trace, DebuggerError, DebuggerTemplate, Gateway, Session,
    VisualMapping, DEFAULT_UI_ADDR,
};

/// Live task-graph debugger for taskscope runtimes.
#[derive(Debug, Parser)]
#[command(version)]
struct Cli {
    /// Wait at this address for a runtime started with TASKSCOPE_CONNECT.
    #[arg(long, value_name = "ADDR")]
    listen: Option<String>,

    /// Connect to a runtime started with TASKSCOPE_LISTEN.
    #[arg(long, value_name = "ADDR", conflicts_with = "listen")]
    attach: Option<String>,

    /// Load a recorded trace instead of attaching to a runtime.
    #[arg(long, value_name = "FILE.ayu", conflicts_with_all = ["listen", "attach"])]
    replay: Option<PathBuf>,

    /// Record the session's frame stream to a trace file.
    #[arg(long, value_name = "FILE.ayu", conflicts_with = "replay")]
    record: Option<PathBuf>,

    /// Serve the WebSocket UI gateway.
    #[arg(long, value_name = "ADDR", num_args = 0..=1, default_missing_value = DEFAULT_UI_ADDR)]
    ui: Option<String>,

    /// Serve the browser UI's static files from this directory.
    #[arg(long, value_name = "DIR")]
    ui_serve: Option<PathBuf>,

    /// Address for --ui-serve.
    #[arg(long, value_name = "ADDR", default_value = DEFAULT_ASSETS_ADDR)]
    ui_serve_addr: String,

    /// External debugger command line, e.g. "gdb -p {pid}".
    #[arg(long, value_name = "CMD")]
    dbg_template: Option<String>,

    /// Also stop the runtime when a task of this function is dequeued.
    #[arg(long, value_name = "NAME", requires = "dbg_template")]
    dbg_function: Option<String>,

    /// Read commands such as `block 7` or `stop` from standard input.
    #[arg(long)]
    console: bool,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            error!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<(), DebuggerError> {
    let template = cli
        .dbg_template
        .as_deref()
        .map(DebuggerTemplate::parse)
        .transpose()?;
    let _assets = cli
        .ui_serve
        .as_ref()
        .map(|dir| AssetServer::start(dir, &cli.ui_serve_addr))
        .transpose()?;
    let gateway = cli.ui.as_deref().map(Gateway::bind).transpose()?;
    let mut driver = Driver::new(VisualMapping::default(), gateway);

    if let Some(path) = &cli.replay {
        if template.is_some() {
            return Err(DebuggerError::Config(
                "--dbg-template needs a live runtime".into(),
            ));
        }
        let loaded = load_trace(path)?;
        if let Some(note) = loaded.diagnostic() {
            warn!("{note}");
        }
        print!("{}", summary(&loaded.model));
        if driver.gateway().is_some() {
            info!("serving the replayed graph; stop with Ctrl-C");
            driver.serve_replay(&loaded.model, || true)?;
        }
        return Ok(());
    }

    let mut session = match (&cli.listen, &cli.attach) {
        (Some(addr), None) => {
            let listener = TcpListener::bind(addr)
                .map_err(|e| DebuggerError::io(format!("cannot listen on {addr}"), e))?;
            info!("waiting for a runtime on {addr}");
            Session::accept(&listener)?
        }
        (None, Some(addr)) => Session::connect(addr.as_str())?,
        _ => {
            return Err(DebuggerError::Config(
                "one of --listen, --attach or --replay is required".into(),
            ))
        }
    };
    if let Some(path) = &cli.record {
        session.record_to(path)?;
    }

    if let Some(template) = &template {
        if let Some(name) = &cli.dbg_function {
            wait_for_function(&mut session, name)?;
        }
        let attached = attach_external_debugger(&mut session, template, cli.dbg_function.as_deref())?;
        if let Some(ack) = &attached.breakpoint {
            info!("function breakpoint: {}", ack.status);
        }
        info!("external debugger running as pid {}", attached.child.id());
    }

    let console = cli.console.then(spawn_console);
    driver.publish(&mut session);
    driver.run_live(&mut session, console)?;
    if let Some(frames) = session.finish_recording()? {
        info!("recorded {frames} frames");
    }
    print!("{}", summary(session.model()));
    match session.take_close_error() {
        Some(e) => Err(DebuggerError::Protocol(e)),
        None => Ok(()),
    }
}

/// Pumps the session until `name` has been registered by the runtime.
fn wait_for_function(session: &mut Session, name: &str) -> Result<(), DebuggerError> {
    let deadline = Instant::now() + Duration::from_secs(5);
    while session.model().function_by_name(name).is_none() {
        if session.is_closed() || Instant::now() >= deadline {
            return Err(DebuggerError::Config(format!(
                "the runtime never registered a function named `{name}`"
            )));
        }
        session.pump(Duration::from_millis(50))?;
    }
    Ok(())
}

fn spawn_console() -> mpsc::Receiver<String> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        for line in std::io::stdin().lock().lines() {
            let Ok(line) = line else { break };
            if tx.send(line).is_err() {
                break;
            }
        }
    });
    rx
}
