//! Aging-preferential attachment: weights, target selection and batch edge
//! formation.
//!
//! A node's attachment weight at time `t` is `(k + y) * (t - t_i)^(-alpha)`
//! where `k` is its hyperdegree, `y` its attractiveness and `t_i` its
//! arrival time; targets are drawn proportionally to these weights. Two
//! sampler strategies hit the identical distribution: an O(N)-per-draw
//! exact scan kept as the slow reference, and the bucketed accelerator in
//! [`bucketed`] used for production runs.

pub mod bucketed;
mod fenwick;

use std::collections::HashSet;

use rand::Rng;
use rand_pcg::Pcg64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hypergraph::{Hypergraph, NodeId, NodeRecord};

pub use bucketed::BucketedSampler;

/// Resamples allowed per hyperedge before a batch aborts; collisions are
/// only possible when the old-node pool is tiny, and silently degrading
/// would bias the statistics.
pub const EDGE_RETRY_CAP: usize = 1000;

/// Consecutive rejections in the bucketed sampler before one draw falls
/// back to an exact scan over the remaining eligible nodes.
const REJECTION_FALLBACK: usize = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum AttachmentError {
    #[error("node arrived at {arrival} which is not before sampling time {now}")]
    NodeNotOld { arrival: f64, now: f64 },
    #[error("selection needs {needed} eligible old nodes, only {eligible} available")]
    InfeasibleSelection { needed: usize, eligible: usize },
    #[error("could not form {edges} distinct hyperedges within {attempts} resamples")]
    EdgeCollisionExhausted { edges: usize, attempts: usize },
    #[error("no eligible node carries positive weight at time {now}")]
    NoPositiveWeight { now: f64 },
}

/// How old-node targets are drawn. Both strategies realize the same
/// selection distribution; `AgeBucketed` is exact via rejection correction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SamplerStrategy {
    ExactScan,
    AgeBucketed { bucket_ratio: f64 },
}

/// The `m2` distinct old nodes chosen for one hyperedge.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSelection {
    pub chosen: Vec<NodeId>,
}

/// Attachment weight `(k + y) * (now - t_i)^(-alpha)` of one node.
pub fn weight(node: &NodeRecord, now: f64, alpha: f64) -> Result<f64, AttachmentError> {
    let age = now - node.arrival_time;
    if age <= 0.0 {
        return Err(AttachmentError::NodeNotOld {
            arrival: node.arrival_time,
            now,
        });
    }
    Ok((node.hyperdegree as f64 + node.attractiveness) * age.powf(-alpha))
}

/// Either sampler behind one interface; the engine keeps one alive across
/// the whole run so the bucketed structure amortizes its maintenance.
#[derive(Debug)]
pub enum TargetSampler {
    Exact(ExactScanSampler),
    Bucketed(BucketedSampler),
}

impl TargetSampler {
    pub fn new(strategy: SamplerStrategy, alpha: f64) -> Self {
        match strategy {
            SamplerStrategy::ExactScan => TargetSampler::Exact(ExactScanSampler::new(alpha)),
            SamplerStrategy::AgeBucketed { bucket_ratio } => {
                TargetSampler::Bucketed(BucketedSampler::new(alpha, bucket_ratio))
            }
        }
    }

    pub fn from_graph(
        strategy: SamplerStrategy,
        graph: &Hypergraph,
        now: f64,
        alpha: f64,
    ) -> Self {
        match strategy {
            SamplerStrategy::ExactScan => TargetSampler::Exact(ExactScanSampler::new(alpha)),
            SamplerStrategy::AgeBucketed { bucket_ratio } => {
                TargetSampler::Bucketed(BucketedSampler::from_graph(graph, now, alpha, bucket_ratio))
            }
        }
    }

    pub fn note_node_added(&mut self, id: NodeId) {
        match self {
            TargetSampler::Exact(s) => s.invalidate(),
            TargetSampler::Bucketed(s) => s.note_node_added(id),
        }
    }

    pub fn note_weight_changed(&mut self, graph: &Hypergraph, id: NodeId) {
        match self {
            TargetSampler::Exact(s) => s.invalidate(),
            TargetSampler::Bucketed(s) => s.note_weight_changed(graph, id),
        }
    }

    fn eligible_count(&mut self, graph: &Hypergraph, now: f64) -> usize {
        match self {
            TargetSampler::Exact(s) => {
                s.refresh(graph, now);
                s.eligible
            }
            TargetSampler::Bucketed(s) => {
                s.sync(graph, now);
                s.eligible_len()
            }
        }
    }

    fn is_eligible(&self, graph: &Hypergraph, now: f64, id: NodeId) -> bool {
        match self {
            TargetSampler::Exact(_) => graph.node(id).arrival_time < now,
            TargetSampler::Bucketed(s) => s.contains(id),
        }
    }

    fn draw(
        &mut self,
        graph: &Hypergraph,
        now: f64,
        banned: &Banned<'_>,
        rng: &mut Pcg64,
    ) -> Result<NodeId, AttachmentError> {
        match self {
            TargetSampler::Exact(s) => s.draw(graph, now, banned, rng),
            TargetSampler::Bucketed(s) => {
                let ban = |raw: u32| banned.contains(NodeId::from_index(raw as usize));
                match s.try_draw(graph, now, rng, &ban, REJECTION_FALLBACK) {
                    Some(id) => Ok(id),
                    // pathological rejection streak (bans dominate the
                    // weight); finish the draw exactly by direct scan
                    None => exact_weighted_draw(graph, now, s.alpha(), banned, rng),
                }
            }
        }
    }
}

/// Sequentially draw `m2` distinct targets proportional to the current
/// attachment weights, never choosing `excluded` ids (the incoming batch).
/// Each successive draw renormalizes over the not-yet-chosen nodes.
pub fn select_targets_with(
    sampler: &mut TargetSampler,
    graph: &Hypergraph,
    now: f64,
    m2: usize,
    rng: &mut Pcg64,
    excluded: &[NodeId],
) -> Result<TargetSelection, AttachmentError> {
    let mut eligible = sampler.eligible_count(graph, now);
    for &id in excluded {
        if sampler.is_eligible(graph, now, id) {
            eligible -= 1;
        }
    }
    if eligible < m2 {
        return Err(AttachmentError::InfeasibleSelection {
            needed: m2,
            eligible,
        });
    }
    let mut chosen: Vec<NodeId> = Vec::with_capacity(m2);
    while chosen.len() < m2 {
        let banned = Banned {
            excluded,
            chosen: &chosen,
        };
        let id = sampler.draw(graph, now, &banned, rng)?;
        chosen.push(id);
    }
    Ok(TargetSelection { chosen })
}

/// One-shot form of [`select_targets_with`] that builds a transient sampler
/// for the requested strategy.
pub fn select_targets(
    graph: &Hypergraph,
    now: f64,
    m2: usize,
    alpha: f64,
    rng: &mut Pcg64,
    excluded: &[NodeId],
    strategy: SamplerStrategy,
) -> Result<TargetSelection, AttachmentError> {
    let mut sampler = TargetSampler::from_graph(strategy, graph, now, alpha);
    select_targets_with(&mut sampler, graph, now, m2, rng, excluded)
}

/// Member sets for the `m` hyperedges of one batch: each set is the whole
/// incoming batch plus a fresh target selection, resampled until the `m`
/// sets are pairwise distinct. The graph is not mutated here, so all edges
/// of one batch sample against the same pre-batch weights.
pub fn form_batch_edges_with(
    sampler: &mut TargetSampler,
    graph: &Hypergraph,
    now: f64,
    new_nodes: &[NodeId],
    m: usize,
    m2: usize,
    rng: &mut Pcg64,
) -> Result<Vec<Vec<NodeId>>, AttachmentError> {
    assert!(!new_nodes.is_empty(), "a batch has at least one new node");
    let mut sets: Vec<Vec<NodeId>> = Vec::with_capacity(m);
    let mut keys: HashSet<Vec<NodeId>> = HashSet::with_capacity(m);
    for _ in 0..m {
        let mut attempts = 0;
        let members = loop {
            let selection = select_targets_with(sampler, graph, now, m2, rng, new_nodes)?;
            let mut members: Vec<NodeId> = new_nodes.to_vec();
            members.extend(selection.chosen);
            members.sort_unstable();
            if keys.insert(members.clone()) {
                break members;
            }
            attempts += 1;
            if attempts >= EDGE_RETRY_CAP {
                return Err(AttachmentError::EdgeCollisionExhausted {
                    edges: m,
                    attempts,
                });
            }
        };
        sets.push(members);
    }
    Ok(sets)
}

/// One-shot form of [`form_batch_edges_with`].
#[allow(clippy::too_many_arguments)]
pub fn form_batch_edges(
    graph: &Hypergraph,
    now: f64,
    new_nodes: &[NodeId],
    m: usize,
    m2: usize,
    alpha: f64,
    rng: &mut Pcg64,
    strategy: SamplerStrategy,
) -> Result<Vec<Vec<NodeId>>, AttachmentError> {
    let mut sampler = TargetSampler::from_graph(strategy, graph, now, alpha);
    form_batch_edges_with(&mut sampler, graph, now, new_nodes, m, m2, rng)
}

pub(crate) struct Banned<'a> {
    excluded: &'a [NodeId],
    chosen: &'a [NodeId],
}

impl Banned<'_> {
    fn contains(&self, id: NodeId) -> bool {
        self.excluded.contains(&id) || self.chosen.contains(&id)
    }

    fn is_empty(&self) -> bool {
        self.excluded.is_empty() && self.chosen.is_empty()
    }
}

/// Reference sampler: recomputes every eligible node's weight and walks the
/// cumulative sum. O(N) per draw, so it serves as the oracle the bucketed
/// accelerator is checked against; weights are cached per (time, degree)
/// state so repeated draws on a frozen graph stay affordable.
#[derive(Debug)]
pub struct ExactScanSampler {
    pub(crate) alpha: f64,
    cached_now: f64,
    weights: Vec<f64>,
    total: f64,
    eligible: usize,
    dirty: bool,
}

impl ExactScanSampler {
    pub fn new(alpha: f64) -> Self {
        assert!(alpha >= 0.0, "aging exponent must be nonnegative");
        ExactScanSampler {
            alpha,
            cached_now: f64::NAN,
            weights: Vec::new(),
            total: 0.0,
            eligible: 0,
            dirty: true,
        }
    }

    fn invalidate(&mut self) {
        self.dirty = true;
    }

    fn refresh(&mut self, graph: &Hypergraph, now: f64) {
        if !self.dirty && self.cached_now == now && self.weights.len() == graph.node_count() {
            return;
        }
        self.weights.clear();
        self.weights.reserve(graph.node_count());
        self.total = 0.0;
        self.eligible = 0;
        for node in graph.nodes() {
            let age = now - node.arrival_time;
            let w = if age > 0.0 {
                self.eligible += 1;
                (node.hyperdegree as f64 + node.attractiveness) * age.powf(-self.alpha)
            } else {
                0.0
            };
            self.total += w;
            self.weights.push(w);
        }
        self.cached_now = now;
        self.dirty = false;
    }

    fn draw(
        &mut self,
        graph: &Hypergraph,
        now: f64,
        banned: &Banned<'_>,
        rng: &mut Pcg64,
    ) -> Result<NodeId, AttachmentError> {
        self.refresh(graph, now);
        let banned_weight: f64 = if banned.is_empty() {
            0.0
        } else {
            banned
                .excluded
                .iter()
                .chain(banned.chosen)
                .filter(|id| id.index() < self.weights.len())
                .map(|id| self.weights[id.index()])
                .sum()
        };
        let available = self.total - banned_weight;
        if !(available > 0.0) {
            return Err(AttachmentError::NoPositiveWeight { now });
        }
        let target = rng.gen::<f64>() * available;
        let mut acc = 0.0;
        let mut last_positive = None;
        for (i, &w) in self.weights.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            let id = NodeId::from_index(i);
            if !banned.is_empty() && banned.contains(id) {
                continue;
            }
            acc += w;
            last_positive = Some(id);
            if target < acc {
                return Ok(id);
            }
        }
        // float edge: target landed within rounding of the total
        last_positive.ok_or(AttachmentError::NoPositiveWeight { now })
    }
}

/// Direct weighted draw over the graph, used as the bucketed sampler's
/// rejection-exhaustion fallback. Same conditional distribution.
fn exact_weighted_draw(
    graph: &Hypergraph,
    now: f64,
    alpha: f64,
    banned: &Banned<'_>,
    rng: &mut Pcg64,
) -> Result<NodeId, AttachmentError> {
    let mut scan = ExactScanSampler::new(alpha);
    scan.draw(graph, now, banned, rng)
}
