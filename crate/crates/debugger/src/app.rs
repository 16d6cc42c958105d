//! The debugger's event loop: runtime frames in, UI messages in and out.

use std::fmt::Write as _;
use std::sync::mpsc::{Receiver, TryRecvError};
use std::time::Duration;

use log::{info, warn};
use taskscope_wire::Command;

use crate::analysis::{critical_path, weakly_connected_components, Weight};
use crate::duration::DurationBucket;
use crate::error::Result;
use crate::gateway::Gateway;
use crate::messages::{parse_command, parse_console_command, DeltaBuilder, Inbound, Outbound};
use crate::model::{GraphModel, NodeState};
use crate::session::Session;
use crate::visual::VisualMapping;

const PUMP_INTERVAL: Duration = Duration::from_millis(10);

/// Where the graph comes from.
pub enum Source<'a> {
    Live(&'a mut Session),
    Replay(&'a GraphModel),
}

impl Source<'_> {
    fn model(&self) -> &GraphModel {
        match self {
            Source::Live(s) => s.model(),
            Source::Replay(m) => m,
        }
    }
}

pub struct Driver {
    builder: DeltaBuilder,
    gateway: Option<Gateway>,
}

impl Driver {
    pub fn new(mapping: VisualMapping, gateway: Option<Gateway>) -> Self {
        Driver {
            builder: DeltaBuilder::new(mapping),
            gateway,
        }
    }

    pub fn gateway(&self) -> Option<&Gateway> {
        self.gateway.as_ref()
    }

    /// Greets new UI clients and handles their messages.
    pub fn service_gateway(&mut self, source: &mut Source<'_>) -> Result<()> {
        let Some(gateway) = &mut self.gateway else {
            return Ok(());
        };
        for client in gateway.accept_pending() {
            let snapshot = self.builder.snapshot(source.model());
            gateway.send_to(client, &Outbound::Delta(snapshot));
        }
        for (client, message) in gateway.poll() {
            let reply = match message {
                Ok(inbound) => self.handle_inbound(source, inbound)?,
                Err(e) => Some(e),
            };
            if let (Some(message), Some(gateway)) = (reply, &mut self.gateway) {
                gateway.send_to(client, &Outbound::Error { message });
            }
        }
        Ok(())
    }

    /// Returns an error text for the sending client, if any.
    fn handle_inbound(&mut self, source: &mut Source<'_>, inbound: Inbound) -> Result<Option<String>> {
        match inbound {
            Inbound::Command {
                name,
                task,
                function,
                function_name,
            } => {
                let command = match parse_command(&name, task, function, function_name.as_deref(), source.model()) {
                    Ok(c) => c,
                    Err(e) => return Ok(Some(e)),
                };
                match source {
                    // The ack reaches every client through the next batch.
                    Source::Live(session) => match session.send(command) {
                        Ok(()) => Ok(None),
                        Err(e) => Ok(Some(e.to_string())),
                    },
                    Source::Replay(_) => Ok(Some("replaying a trace: there is no runtime to command".into())),
                }
            }
            Inbound::Mapping {
                fill,
                margin,
                shape,
                edge,
            } => {
                if let Err(e) = self.builder.update_mapping(fill, margin, shape, edge) {
                    return Ok(Some(e));
                }
                let snapshot = self.builder.snapshot(source.model());
                self.broadcast(&Outbound::Delta(snapshot));
                Ok(None)
            }
        }
    }

    fn broadcast(&mut self, message: &Outbound) {
        if let Some(gateway) = &mut self.gateway {
            gateway.broadcast(message);
        }
    }

    /// Pushes what the session applied since the last call.
    pub fn publish(&mut self, session: &mut Session) {
        let batch = session.take_batch();
        if batch.is_empty() {
            return;
        }
        for ack in &batch.acks {
            info!("ack {}: {}", ack_label(ack), ack.status);
        }
        if self.gateway.is_none() {
            return;
        }
        let diagnostics = batch.diagnostics.iter().map(ToString::to_string).collect();
        let delta = self.builder.delta(session.model(), &batch.delta, diagnostics);
        self.broadcast(&Outbound::Delta(delta));
        for ack in &batch.acks {
            self.broadcast(&Outbound::Ack(ack.into()));
        }
    }

    /// Runs until the runtime disconnects.
    pub fn run_live(&mut self, session: &mut Session, console: Option<Receiver<String>>) -> Result<()> {
        let mut console = console;
        while !session.is_closed() {
            self.service_gateway(&mut Source::Live(session))?;
            if let Some(lines) = &console {
                match lines.try_recv() {
                    Ok(line) => console_line(session, &line),
                    Err(TryRecvError::Empty) => {}
                    Err(TryRecvError::Disconnected) => console = None,
                }
            }
            session.pump(PUMP_INTERVAL)?;
            self.publish(session);
        }
        Ok(())
    }

    /// Serves a loaded trace to UI clients until `keep_going` returns false.
    pub fn serve_replay(&mut self, model: &GraphModel, mut keep_going: impl FnMut() -> bool) -> Result<()> {
        while keep_going() {
            self.service_gateway(&mut Source::Replay(model))?;
            std::thread::sleep(PUMP_INTERVAL);
        }
        Ok(())
    }
}

fn ack_label(ack: &taskscope_wire::Ack) -> String {
    ack.decoded_command()
        .map_or_else(|| format!("command {}", ack.command), |c| c.to_string())
}

fn console_line(session: &mut Session, line: &str) {
    let line = line.trim();
    if line.is_empty() {
        return;
    }
    match parse_console_command(line, session.model()) {
        Ok(command) => {
            if let Err(e) = session.send(command) {
                warn!("cannot send `{command}`: {e}");
            }
            if command == Command::Detach {
                info!("detaching; the runtime continues without the debugger");
            }
        }
        Err(e) => warn!("{e}"),
    }
}

/// Plain-text overview of a model, printed at the end of a session.
pub fn summary(model: &GraphModel) -> String {
    let mut out = String::new();
    let finished = model
        .nodes()
        .filter(|n| n.state == NodeState::Finished)
        .count();
    let _ = writeln!(
        out,
        "tasks: {} ({} finished), dependencies: {}",
        model.node_count(),
        finished,
        model.edges().len()
    );
    let components = weakly_connected_components(model);
    let sizes: Vec<String> = components.iter().map(|c| c.len().to_string()).collect();
    let _ = writeln!(out, "components: {} [{}]", components.len(), sizes.join(", "));

    let by_count = critical_path(model, Weight::Unit);
    let by_time = critical_path(model, Weight::Duration);
    let _ = writeln!(
        out,
        "longest chain: {} tasks {:?}",
        by_count.weight, by_count.tasks
    );
    let _ = writeln!(
        out,
        "critical path: ~{} us {:?} (durations are approximate)",
        by_time.weight, by_time.tasks
    );
    let mut histogram = [0usize; DurationBucket::ALL.len()];
    for d in model.nodes().filter_map(|n| n.duration_us) {
        histogram[DurationBucket::of(d).ordinal()] += 1;
    }
    for (bucket, count) in DurationBucket::ALL.iter().zip(histogram) {
        if count > 0 {
            let _ = writeln!(out, "  {bucket}: {count} tasks");
        }
    }
    if !model.quarantine().is_empty() {
        let _ = writeln!(out, "quarantined events: {}", model.quarantine().len());
    }
    out
}
