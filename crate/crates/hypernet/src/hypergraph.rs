//! Growing hypergraph with incremental hyperdegree bookkeeping.
//!
//! Nodes and hyperedges are append-only: the growth model never deletes,
//! so aging is handled by attachment weights, not by pruning. Hyperedges
//! are deduplicated by their canonical key (the sorted member-id list);
//! inserting an edge with a member set seen before is reported as a
//! [`AddEdgeOutcome::Duplicate`] without mutating the graph.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};

use thiserror::Error;

/// Dense node index, assigned in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub(crate) fn from_index(i: usize) -> Self {
        NodeId(i as u32)
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Dense hyperedge index, assigned in insertion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(u32);

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One node of the hypernetwork.
#[derive(Debug, Clone)]
pub struct NodeRecord {
    pub id: NodeId,
    /// Time the node entered the network (continuous units).
    pub arrival_time: f64,
    /// Additive attractiveness entering the attachment weight.
    pub attractiveness: f64,
    /// Number of stored hyperedges containing this node.
    pub hyperdegree: u64,
    /// Index of the arrival batch; 0 is the initial graph.
    pub batch_index: u32,
}

/// One hyperedge: a duplicate-free, ascending member list.
#[derive(Debug, Clone)]
pub struct HyperEdge {
    pub id: EdgeId,
    pub members: Vec<NodeId>,
    pub created_at: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("attractiveness must be nonnegative, got {0}")]
    NegativeAttractiveness(f64),
    #[error("arrival time {time} precedes latest arrival {latest} of an earlier batch")]
    ArrivalOutOfOrder { time: f64, latest: f64 },
    #[error("unknown node id {0}")]
    UnknownNode(u32),
    #[error("hyperedge must have at least one member")]
    EmptyEdge,
}

/// Result of [`Hypergraph::add_hyperedge`]: a repeated member set is a
/// distinguishable outcome, not an error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AddEdgeOutcome {
    Inserted(EdgeId),
    Duplicate,
}

#[derive(Debug, Clone, Default)]
pub struct Hypergraph {
    nodes: Vec<NodeRecord>,
    edges: Vec<HyperEdge>,
    edge_keys: HashSet<Box<[u32]>>,
}

impl Hypergraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeRecord] {
        &self.nodes
    }

    pub fn edges(&self) -> &[HyperEdge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &NodeRecord {
        &self.nodes[id.index()]
    }

    /// Append a node with hyperdegree 0. Arrival times may not precede the
    /// latest arrival of an earlier batch; within a batch any order is fine.
    pub fn add_node(
        &mut self,
        arrival_time: f64,
        attractiveness: f64,
        batch_index: u32,
    ) -> Result<NodeId, GraphError> {
        if !(attractiveness >= 0.0) {
            return Err(GraphError::NegativeAttractiveness(attractiveness));
        }
        if let Some(latest) = self
            .nodes
            .iter()
            .rev()
            .find(|n| n.batch_index < batch_index)
        {
            if arrival_time < latest.arrival_time {
                return Err(GraphError::ArrivalOutOfOrder {
                    time: arrival_time,
                    latest: latest.arrival_time,
                });
            }
        }
        let id = NodeId::from_index(self.nodes.len());
        self.nodes.push(NodeRecord {
            id,
            arrival_time,
            attractiveness,
            hyperdegree: 0,
            batch_index,
        });
        Ok(id)
    }

    /// Insert a hyperedge, incrementing every member's hyperdegree.
    /// Member order is irrelevant; duplicates within `members` collapse.
    pub fn add_hyperedge(
        &mut self,
        members: &[NodeId],
        created_at: f64,
    ) -> Result<AddEdgeOutcome, GraphError> {
        if members.is_empty() {
            return Err(GraphError::EmptyEdge);
        }
        let mut sorted: Vec<NodeId> = members.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        for &id in &sorted {
            if id.index() >= self.nodes.len() {
                return Err(GraphError::UnknownNode(id.0));
            }
        }
        let key: Box<[u32]> = sorted.iter().map(|id| id.0).collect();
        if self.edge_keys.contains(&key) {
            return Ok(AddEdgeOutcome::Duplicate);
        }
        self.edge_keys.insert(key);
        for &id in &sorted {
            self.nodes[id.index()].hyperdegree += 1;
        }
        let edge_id = EdgeId(self.edges.len() as u32);
        self.edges.push(HyperEdge {
            id: edge_id,
            members: sorted,
            created_at,
        });
        Ok(AddEdgeOutcome::Inserted(edge_id))
    }

    /// Current hyperdegree of every node, in id order.
    pub fn hyperdegree_sequence(&self) -> Vec<(NodeId, u64)> {
        self.nodes.iter().map(|n| (n.id, n.hyperdegree)).collect()
    }

    /// Just the hyperdegrees, in id order.
    pub fn hyperdegrees(&self) -> Vec<u64> {
        self.nodes.iter().map(|n| n.hyperdegree).collect()
    }

    /// One line per edge: `edge_id<TAB>node,node,...` with ids ascending.
    pub fn write_edge_list<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for edge in &self.edges {
            write!(w, "{}\t", edge.id)?;
            for (i, m) in edge.members.iter().enumerate() {
                if i > 0 {
                    write!(w, ",")?;
                }
                write!(w, "{m}")?;
            }
            writeln!(w)?;
        }
        Ok(())
    }

    /// Bipartite incidence view: one `E<edge_id><TAB>v<node_id>` line per
    /// (edge, member) pair.
    pub fn write_bipartite<W: Write>(&self, w: &mut W) -> io::Result<()> {
        for edge in &self.edges {
            for m in &edge.members {
                writeln!(w, "E{}\tv{}", edge.id, m)?;
            }
        }
        Ok(())
    }
}
