//! JSON messages exchanged with UI clients over the gateway.
//!
//! Outbound: `delta` (graph changes; `reset: true` replaces the client's
//! whole state), `ack` (a runtime reply to a command) and `error`.
//! Inbound: `command` and `mapping`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use taskscope_wire::{Ack, AckStatus, Command, CommandId};

use crate::duration::DurationBucket;
use crate::model::{Delta, GraphModel, NodeState};
use crate::visual::{node_visual, EdgeSource, HandleColours, NodeSource, VisualMapping};

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Inbound {
    Command {
        name: String,
        #[serde(default)]
        task: Option<u64>,
        #[serde(default)]
        function: Option<u64>,
        #[serde(default)]
        function_name: Option<String>,
    },
    Mapping {
        #[serde(default)]
        fill: Option<NodeSource>,
        #[serde(default)]
        margin: Option<NodeSource>,
        #[serde(default)]
        shape: Option<NodeSource>,
        #[serde(default)]
        edge: Option<EdgeSource>,
    },
}

impl Inbound {
    pub fn parse(text: &str) -> Result<Inbound, String> {
        serde_json::from_str(text).map_err(|e| format!("malformed message: {e}"))
    }
}

/// Gateway name of a command id: `block`, `break_on_function`, ...
pub fn command_name(id: CommandId) -> &'static str {
    match id {
        CommandId::Block => "block",
        CommandId::Unblock => "unblock",
        CommandId::Stop => "stop",
        CommandId::Continue => "continue",
        CommandId::Step => "step",
        CommandId::Prioritize => "prioritize",
        CommandId::Deprioritize => "deprioritize",
        CommandId::BreakOnFunction => "break_on_function",
        CommandId::Detach => "detach",
    }
}

/// Builds a command from its name and argument. `function_name` is
/// resolved against the model's registered functions.
pub fn parse_command(
    name: &str,
    task: Option<u64>,
    function: Option<u64>,
    function_name: Option<&str>,
    model: &GraphModel,
) -> Result<Command, String> {
    let need_task = || task.ok_or_else(|| format!("`{name}` needs a \"task\""));
    Ok(match name {
        "block" => Command::Block(need_task()?),
        "unblock" => Command::Unblock(need_task()?),
        "prioritize" => Command::Prioritize(need_task()?),
        "deprioritize" => Command::Deprioritize(need_task()?),
        "stop" => Command::Stop,
        "continue" => Command::Continue,
        "step" => Command::Step,
        "detach" => Command::Detach,
        "break_on_function" => match (function, function_name) {
            (Some(f), _) => Command::BreakOnFunction(f),
            (None, Some(n)) => Command::BreakOnFunction(
                model
                    .function_by_name(n)
                    .ok_or_else(|| format!("no function named `{n}`"))?,
            ),
            (None, None) => return Err("`break_on_function` needs a \"function\"".into()),
        },
        other => return Err(format!("unknown command `{other}`")),
    })
}

/// Parses a console line such as `block 7`, `stop` or
/// `break_on_function reduce`.
pub fn parse_console_command(line: &str, model: &GraphModel) -> Result<Command, String> {
    let mut words = line.split_whitespace();
    let name = words.next().ok_or("empty command")?.replace('-', "_");
    let arg = words.next();
    if words.next().is_some() {
        return Err("too many arguments".into());
    }
    let number = arg.and_then(|a| a.parse::<u64>().ok());
    let (function, function_name) = match (number, arg) {
        (Some(n), _) => (Some(n), None),
        (None, Some(text)) => (None, Some(text)),
        (None, None) => (None, None),
    };
    if arg.is_some() && number.is_none() && name != "break_on_function" {
        return Err(format!("`{name}` takes a task id"));
    }
    parse_command(&name, number, function, function_name, model)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeMsg {
    pub task: u64,
    pub function: u64,
    pub function_name: Option<String>,
    pub state: NodeState,
    pub thread: Option<u64>,
    /// Approximate: measured under instrumentation.
    pub duration_us: Option<u64>,
    pub duration_bucket: Option<DurationBucket>,
    pub blocked: bool,
    pub prioritized: bool,
    pub fill: u64,
    pub margin: u64,
    pub shape: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EdgeMsg {
    pub pred: u64,
    pub succ: u64,
    pub handle: u64,
    pub kind: Option<&'static str>,
    pub color: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DeltaMsg {
    pub reset: bool,
    pub nodes: Vec<NodeMsg>,
    pub edges: Vec<EdgeMsg>,
    pub functions: BTreeMap<u64, String>,
    pub stopped: bool,
    pub breakpoint_task: Option<u64>,
    pub finished: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mapping: Option<VisualMapping>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AckMsg {
    /// Gateway command name, or the raw id of an unknown command.
    pub command: String,
    pub arg: u64,
    /// `ok`, `ineffective` or `error`.
    pub status: &'static str,
    /// Full status text as sent by the runtime.
    pub message: String,
}

impl From<&Ack> for AckMsg {
    fn from(ack: &Ack) -> Self {
        let command = match ack.decoded_command() {
            Some(c) => command_name(c.id()).to_owned(),
            None => ack.command.to_string(),
        };
        let status = match ack.status {
            AckStatus::Ok => "ok",
            AckStatus::Ineffective(_) => "ineffective",
            AckStatus::Error(_) => "error",
        };
        AckMsg {
            command,
            arg: ack.arg,
            status,
            message: ack.status.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Outbound {
    Delta(DeltaMsg),
    Ack(AckMsg),
    Error { message: String },
}

impl Outbound {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("gateway messages always serialize")
    }
}

/// Turns model changes into delta messages under the current mapping.
#[derive(Debug, Clone, Default)]
pub struct DeltaBuilder {
    mapping: VisualMapping,
    colours: HandleColours,
}

impl DeltaBuilder {
    pub fn new(mapping: VisualMapping) -> Self {
        DeltaBuilder {
            mapping,
            colours: HandleColours::new(),
        }
    }

    pub fn mapping(&self) -> VisualMapping {
        self.mapping
    }

    /// Merges a partial mapping update; rejects channel collisions.
    pub fn update_mapping(
        &mut self,
        fill: Option<NodeSource>,
        margin: Option<NodeSource>,
        shape: Option<NodeSource>,
        edge: Option<EdgeSource>,
    ) -> Result<(), String> {
        let next = VisualMapping {
            fill: fill.unwrap_or(self.mapping.fill),
            margin: margin.unwrap_or(self.mapping.margin),
            shape: shape.unwrap_or(self.mapping.shape),
            edge: edge.unwrap_or(self.mapping.edge),
        };
        next.validate().map_err(|e| e.to_string())?;
        self.mapping = next;
        Ok(())
    }

    fn node_msg(&self, model: &GraphModel, task: u64) -> Option<NodeMsg> {
        let n = model.node(task)?;
        let v = node_visual(n, &self.mapping);
        Some(NodeMsg {
            task,
            function: n.function,
            function_name: model.function_name(n.function).map(str::to_owned),
            state: n.state,
            thread: n.thread,
            duration_us: n.duration_us,
            duration_bucket: n.duration_us.map(DurationBucket::of),
            blocked: n.blocked,
            prioritized: n.prioritized,
            fill: v.fill,
            margin: v.margin,
            shape: v.shape,
        })
    }

    fn header(model: &GraphModel, reset: bool) -> DeltaMsg {
        DeltaMsg {
            reset,
            nodes: Vec::new(),
            edges: Vec::new(),
            functions: BTreeMap::new(),
            stopped: model.is_stopped(),
            breakpoint_task: model.breakpoint_task(),
            finished: model.is_shut_down(),
            mapping: None,
            diagnostics: Vec::new(),
        }
    }

    /// The whole graph; clients replace their state with it.
    pub fn snapshot(&mut self, model: &GraphModel) -> DeltaMsg {
        self.colours = HandleColours::new();
        let mut msg = Self::header(model, true);
        msg.nodes = model
            .nodes()
            .filter_map(|n| self.node_msg(model, n.task))
            .collect();
        msg.edges = model.edges().map(|e| self.edge_msg(e)).collect();
        msg.functions = model.function_names().clone();
        msg.mapping = Some(self.mapping);
        msg
    }

    /// Only what `delta` touched.
    pub fn delta(&mut self, model: &GraphModel, delta: &Delta, diagnostics: Vec<String>) -> DeltaMsg {
        let mut msg = Self::header(model, false);
        msg.nodes = delta
            .nodes
            .iter()
            .filter_map(|&t| self.node_msg(model, t))
            .collect();
        msg.edges = delta.edges.iter().map(|e| self.edge_msg(e)).collect();
        msg.functions = delta
            .functions
            .iter()
            .filter_map(|&f| model.function_name(f).map(|n| (f, n.to_owned())))
            .collect();
        msg.diagnostics = diagnostics;
        msg
    }

    fn edge_msg(&mut self, e: &crate::model::Edge) -> EdgeMsg {
        let v = self.colours.colour(e);
        EdgeMsg {
            pred: e.pred,
            succ: e.succ,
            handle: e.handle,
            kind: e.kind.map(|k| k.label()),
            color: v.color,
        }
    }
}

#[cfg(test)]
mod tests {
    use serde_json::json;
    use taskscope_wire::Event;

    use super::*;

    #[test]
    fn command_messages_map_one_to_one() {
        let m = GraphModel::new();
        let cases = [
            (json!({"type":"command","name":"block","task":7}), Command::Block(7)),
            (json!({"type":"command","name":"unblock","task":7}), Command::Unblock(7)),
            (json!({"type":"command","name":"stop"}), Command::Stop),
            (json!({"type":"command","name":"continue"}), Command::Continue),
            (json!({"type":"command","name":"step"}), Command::Step),
            (json!({"type":"command","name":"prioritize","task":3}), Command::Prioritize(3)),
            (json!({"type":"command","name":"deprioritize","task":3}), Command::Deprioritize(3)),
            (
                json!({"type":"command","name":"break_on_function","function":2}),
                Command::BreakOnFunction(2),
            ),
            (json!({"type":"command","name":"detach"}), Command::Detach),
        ];
        for (msg, expected) in cases {
            let Inbound::Command { name, task, function, function_name } =
                Inbound::parse(&msg.to_string()).unwrap()
            else {
                panic!("not a command");
            };
            assert_eq!(command_name(expected.id()), name);
            let got = parse_command(&name, task, function, function_name.as_deref(), &m).unwrap();
            assert_eq!(got, expected);
        }
    }

    #[test]
    fn malformed_messages_are_rejected() {
        assert!(Inbound::parse("{").is_err());
        assert!(Inbound::parse(r#"{"type":"launch"}"#).is_err());
        let m = GraphModel::new();
        assert!(parse_command("block", None, None, None, &m).is_err());
        assert!(parse_command("requeue", Some(1), None, None, &m).is_err());
    }

    #[test]
    fn console_commands() {
        let mut m = GraphModel::new();
        m.apply_frame(&taskscope_wire::Frame::Name(taskscope_wire::NameFrame {
            function: 4,
            name: "reduce".into(),
        }))
        .unwrap();
        assert_eq!(parse_console_command("block 7", &m), Ok(Command::Block(7)));
        assert_eq!(
            parse_console_command("break-on-function reduce", &m),
            Ok(Command::BreakOnFunction(4))
        );
        assert!(parse_console_command("block seven", &m).is_err());
    }

    #[test]
    fn ack_message_shape() {
        let ack = Ack::new(Command::Prioritize(5), AckStatus::Ineffective("already queued".into()));
        let json: serde_json::Value = serde_json::from_str(&Outbound::Ack((&ack).into()).to_json()).unwrap();
        assert_eq!(
            json,
            json!({"type":"ack","command":"prioritize","arg":5,"status":"ineffective",
                   "message":"ineffective: already queued"})
        );
    }

    #[test]
    fn mapping_update_rejects_collision() {
        let mut b = DeltaBuilder::default();
        assert!(b.update_mapping(None, Some(NodeSource::Function), None, None).is_err());
        assert_eq!(b.mapping(), VisualMapping::default());
        b.update_mapping(Some(NodeSource::Duration), None, None, None).unwrap();
        assert_eq!(b.mapping().fill, NodeSource::Duration);
    }

    #[test]
    fn snapshot_and_delta() {
        let mut m = GraphModel::new();
        let d1 = m.apply_event(&Event::task_created(1, 1, 0)).unwrap();
        let mut b = DeltaBuilder::default();
        let snap = b.snapshot(&m);
        assert!(snap.reset);
        assert_eq!(snap.nodes.len(), 1);
        let delta = b.delta(&m, &d1, vec![]);
        assert!(!delta.reset);
        assert_eq!(delta.nodes[0].state, NodeState::NotQueued);
        let v: serde_json::Value = serde_json::from_str(&Outbound::Delta(delta).to_json()).unwrap();
        assert_eq!(v["type"], "delta");
        assert_eq!(v["nodes"][0]["state"], "not_queued");
    }
}
