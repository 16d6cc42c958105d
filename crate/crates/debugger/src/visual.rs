//! Mapping of task data onto the four visual channels: node fill colour,
//! node margin colour, node shape and edge colour.
//!
//! Index 0 in every channel means "no value" (a task not yet run has no
//! thread and no duration). Other values get indices 1.. up to the palette
//! size and wrap around once it is exhausted.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::duration::DurationBucket;
use crate::error::DebuggerError;
use crate::model::{Edge, GraphModel, NodeInfo};

pub const FILL_PALETTE: u64 = 12;
pub const MARGIN_PALETTE: u64 = 12;
pub const SHAPE_PALETTE: u64 = 6;
pub const EDGE_PALETTE: u64 = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSource {
    Function,
    Thread,
    State,
    Duration,
}

impl FromStr for NodeSource {
    type Err = DebuggerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "function" => Ok(NodeSource::Function),
            "thread" => Ok(NodeSource::Thread),
            "state" => Ok(NodeSource::State),
            "duration" => Ok(NodeSource::Duration),
            other => Err(DebuggerError::Config(format!("unknown node channel source `{other}`"))),
        }
    }
}

impl fmt::Display for NodeSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NodeSource::Function => "function",
            NodeSource::Thread => "thread",
            NodeSource::State => "state",
            NodeSource::Duration => "duration",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeSource {
    Handle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualMapping {
    pub fill: NodeSource,
    pub margin: NodeSource,
    pub shape: NodeSource,
    pub edge: EdgeSource,
}

impl Default for VisualMapping {
    fn default() -> Self {
        VisualMapping {
            fill: NodeSource::Function,
            margin: NodeSource::State,
            shape: NodeSource::Thread,
            edge: EdgeSource::Handle,
        }
    }
}

impl VisualMapping {
    /// Checks that the three node channels show three different sources.
    pub fn validate(&self) -> Result<(), DebuggerError> {
        let pairs = [
            ("fill", self.fill, "margin", self.margin),
            ("fill", self.fill, "shape", self.shape),
            ("margin", self.margin, "shape", self.shape),
        ];
        for (a, sa, b, sb) in pairs {
            if sa == sb {
                return Err(DebuggerError::Config(format!(
                    "{a} and {b} both show {sa}"
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct NodeVisual {
    pub task: u64,
    pub fill: u64,
    pub margin: u64,
    pub shape: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeVisual {
    pub pred: u64,
    pub succ: u64,
    pub handle: u64,
    pub color: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Visuals {
    pub nodes: Vec<NodeVisual>,
    pub edges: Vec<EdgeVisual>,
}

fn wrap(value: u64, palette: u64) -> u64 {
    if value == 0 {
        0
    } else {
        1 + (value - 1) % (palette - 1)
    }
}

/// Channel value before wrapping: 0 for "none", otherwise 1-based.
fn raw_value(node: &NodeInfo, source: NodeSource) -> u64 {
    match source {
        NodeSource::Function => node.function,
        NodeSource::Thread => node.thread.unwrap_or(0),
        NodeSource::State => node.state.ordinal() as u64 + 1,
        NodeSource::Duration => node
            .duration_us
            .map_or(0, |d| DurationBucket::of(d).ordinal() as u64 + 1),
    }
}

pub fn node_visual(node: &NodeInfo, mapping: &VisualMapping) -> NodeVisual {
    NodeVisual {
        task: node.task,
        fill: wrap(raw_value(node, mapping.fill), FILL_PALETTE),
        margin: wrap(raw_value(node, mapping.margin), MARGIN_PALETTE),
        shape: wrap(raw_value(node, mapping.shape), SHAPE_PALETTE),
    }
}

/// Edge colours follow the order in which handles first appear in the
/// edge list, which only ever grows at the end.
#[derive(Debug, Clone, Default)]
pub struct HandleColours {
    ranks: HashMap<u64, u64>,
}

impl HandleColours {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn colour(&mut self, edge: &Edge) -> EdgeVisual {
        let next = self.ranks.len() as u64 + 1;
        let rank = *self.ranks.entry(edge.handle).or_insert(next);
        EdgeVisual {
            pred: edge.pred,
            succ: edge.succ,
            handle: edge.handle,
            color: wrap(rank, EDGE_PALETTE),
        }
    }
}

/// Visual indices for every node and edge of the model.
pub fn assign_visual(model: &GraphModel, mapping: &VisualMapping) -> Result<Visuals, DebuggerError> {
    mapping.validate()?;
    let nodes = model.nodes().map(|n| node_visual(n, mapping)).collect();
    let mut colours = HandleColours::new();
    let edges = model.edges().map(|e| colours.colour(e)).collect();
    Ok(Visuals { nodes, edges })
}

#[cfg(test)]
mod tests {
    use taskscope_wire::{DepKind, Event};

    use super::*;

    #[test]
    fn same_function_same_fill() {
        let mut m = GraphModel::new();
        m.apply_event(&Event::task_created(1, 4, 0)).unwrap();
        m.apply_event(&Event::task_created(2, 4, 0)).unwrap();
        m.apply_event(&Event::task_created(3, 5, 0)).unwrap();
        let v = assign_visual(&m, &VisualMapping::default()).unwrap();
        assert_eq!(v.nodes[0].fill, v.nodes[1].fill);
        assert_ne!(v.nodes[0].fill, v.nodes[2].fill);
        assert_eq!(v.nodes[0].shape, 0);
    }

    #[test]
    fn collision_is_a_config_error() {
        let mapping = VisualMapping {
            margin: NodeSource::Function,
            ..VisualMapping::default()
        };
        assert!(matches!(
            assign_visual(&GraphModel::new(), &mapping),
            Err(DebuggerError::Config(_))
        ));
    }

    #[test]
    fn indices_stay_in_palette() {
        for v in 0..100 {
            let w = wrap(v, SHAPE_PALETTE);
            assert!(w < SHAPE_PALETTE);
            assert_eq!(w == 0, v == 0);
        }
        // Distinct until the palette is exhausted.
        let distinct: std::collections::BTreeSet<_> = (1..FILL_PALETTE).map(|v| wrap(v, FILL_PALETTE)).collect();
        assert_eq!(distinct.len() as u64, FILL_PALETTE - 1);
    }

    #[test]
    fn edge_colours_by_first_appearance() {
        let mut m = GraphModel::new();
        for t in 1..=3 {
            m.apply_event(&Event::task_created(t, 1, 0)).unwrap();
        }
        m.apply_event(&Event::dependency_added(1, 2, 0xBEEF, DepKind::Raw, 0)).unwrap();
        m.apply_event(&Event::dependency_added(1, 3, 0x10, DepKind::Raw, 0)).unwrap();
        m.apply_event(&Event::dependency_added(2, 3, 0xBEEF, DepKind::War, 0)).unwrap();
        let v = assign_visual(&m, &VisualMapping::default()).unwrap();
        let colours: Vec<u64> = v.edges.iter().map(|e| e.color).collect();
        assert_eq!(colours, vec![1, 2, 1]);
    }
}
