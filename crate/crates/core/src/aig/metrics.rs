use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{Aig, Node};

/// Technology-independent quality of results.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QoR {
    /// AND nodes reachable from the outputs.
    pub and_count: usize,
    /// Longest input-to-output path counted in AND levels.
    pub depth: u32,
}

impl QoR {
    /// Scalar value of this result under `objective`; lower is better.
    pub fn objective_value(&self, objective: Objective) -> u64 {
        match objective {
            Objective::NodeCount => self.and_count as u64,
            Objective::Depth => self.depth as u64,
            Objective::NodeDepthProduct => self.and_count as u64 * self.depth as u64,
        }
    }
}

/// What an exploration minimizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Objective {
    NodeCount,
    Depth,
    NodeDepthProduct,
}

impl Objective {
    pub const ALL: [Objective; 3] = [
        Objective::NodeCount,
        Objective::Depth,
        Objective::NodeDepthProduct,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Objective::NodeCount => "nodes",
            Objective::Depth => "depth",
            Objective::NodeDepthProduct => "node-depth",
        }
    }
}

impl fmt::Display for Objective {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Objective {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "nodes" | "nodecount" | "area" => Ok(Objective::NodeCount),
            "depth" | "delay" | "levels" => Ok(Objective::Depth),
            "node-depth" | "product" | "nodedepthproduct" => Ok(Objective::NodeDepthProduct),
            other => Err(format!("unknown objective `{other}` (expected nodes, depth or node-depth)")),
        }
    }
}

impl Aig {
    pub fn metrics(&self) -> QoR {
        let live = self.reachable();
        let levels = self.levels();
        let and_count = self
            .nodes
            .iter()
            .zip(&live)
            .filter(|(n, &l)| l && matches!(n, Node::And(..)))
            .count();
        let depth = self
            .outputs
            .iter()
            .map(|o| levels[o.index()])
            .max()
            .unwrap_or(0);
        QoR { and_count, depth }
    }
}
