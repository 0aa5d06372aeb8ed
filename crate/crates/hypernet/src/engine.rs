//! End-to-end growth loop: initialization, Poisson event loop, batch
//! insertion and edge formation, with an in-memory event log and optional
//! snapshots.
//!
//! Each event advances the Poisson clock, draws a batch size and a batch
//! attractiveness, inserts the new nodes, forms `m` distinct hyperedges
//! joining the whole batch to `m2` preferentially chosen old nodes, and
//! only then exposes the new nodes to the sampler — so a batch can never
//! select itself and new ages are always positive at the next event.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::attachment::{
    form_batch_edges_with, AttachmentError, SamplerStrategy, TargetSampler,
};
use crate::hypergraph::{AddEdgeOutcome, EdgeId, GraphError, Hypergraph, NodeId};
use crate::stochastic::{
    ArrivalClock, AttractivenessSpec, BatchSizeSpec, RngStreams, StochasticError,
};

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("invalid model parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Stochastic(#[from] StochasticError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("batch {batch}: {source}")]
    Attachment {
        batch: u64,
        #[source]
        source: AttachmentError,
    },
}

/// Everything that defines one growth run.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelParams {
    /// Poisson arrival intensity.
    pub lambda: f64,
    /// Hyperedges formed per batch.
    pub m: u32,
    /// Old nodes per hyperedge.
    pub m2: u32,
    /// Initial node count; must satisfy `m * m2 <= m0`.
    pub m0: u32,
    /// Aging exponent; the mean-field theory holds at 1/2.
    pub alpha: f64,
    pub batch: BatchSizeSpec,
    pub attractiveness: AttractivenessSpec,
    pub stop: StopRule,
    pub seed: u64,
    pub sampler: SamplerStrategy,
    /// When true each node of a batch draws its own attractiveness instead
    /// of the batch sharing one value (sensitivity runs only).
    pub per_node_attractiveness: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StopRule {
    /// Stop after the batch that reaches or exceeds this many nodes.
    TargetNodeCount(u64),
    /// Stop before the first event past this time.
    MaxTime(f64),
}

impl ModelParams {
    pub fn validate(&self) -> Result<(), EngineError> {
        let bad = |msg: String| Err(EngineError::InvalidParams(msg));
        if !(self.lambda > 0.0) {
            return bad(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.m == 0 || self.m2 == 0 {
            return bad("m and m2 must be at least 1".into());
        }
        if u64::from(self.m) * u64::from(self.m2) > u64::from(self.m0) {
            return bad(format!(
                "m * m2 = {} exceeds initial node count m0 = {}",
                self.m * self.m2,
                self.m0
            ));
        }
        if !(self.alpha >= 0.0) {
            return bad(format!("alpha must be nonnegative, got {}", self.alpha));
        }
        if let SamplerStrategy::AgeBucketed { bucket_ratio } = self.sampler {
            if !(bucket_ratio > 1.0) {
                return bad(format!("bucket ratio must exceed 1, got {bucket_ratio}"));
            }
        }
        match self.stop {
            StopRule::TargetNodeCount(n) => {
                if n < u64::from(self.m0) {
                    return bad(format!(
                        "target node count {n} is below the initial {} nodes",
                        self.m0
                    ));
                }
            }
            StopRule::MaxTime(t) => {
                if !(t > 0.0) {
                    return bad(format!("max time must be positive, got {t}"));
                }
            }
        }
        self.batch.validate()?;
        self.attractiveness.validate()?;
        Ok(())
    }
}

/// One batch arrival, as recorded in the event log.
#[derive(Debug, Clone)]
pub struct GrowthEvent {
    pub batch_index: u64,
    pub event_time: f64,
    pub eta: u32,
    /// Batch attractiveness (first node's value under per-node draws).
    pub y: f64,
    pub new_nodes: Vec<NodeId>,
    pub edge_ids: Vec<EdgeId>,
}

#[derive(Debug, Clone)]
pub struct Snapshot {
    pub time: f64,
    pub node_count: usize,
    pub edge_count: usize,
    pub hyperdegree_sequence: Vec<u64>,
}

#[derive(Debug)]
pub struct RunOutput {
    pub graph: Hypergraph,
    pub events: Vec<GrowthEvent>,
    pub snapshots: Vec<Snapshot>,
}

/// Initial graph: `m0` nodes with synthetic negative arrival times spaced
/// by the natural timescale `1/lambda` (so every age is positive at the
/// first event), attractiveness drawn from the configured law, joined by a
/// single all-node hyperedge — the minimal connected choice, giving every
/// initial node hyperdegree 1.
pub fn init_graph(params: &ModelParams, streams: &mut RngStreams) -> Result<Hypergraph, EngineError> {
    params.validate()?;
    let mut graph = Hypergraph::new();
    let m0 = params.m0;
    for j in 0..m0 {
        // node 0 is the oldest so ids stay ordered by arrival time
        let arrival = -f64::from(m0 - j) / params.lambda;
        let y = params.attractiveness.sample(&mut streams.init);
        graph.add_node(arrival, y, 0)?;
    }
    let ids: Vec<NodeId> = graph.nodes().iter().map(|n| n.id).collect();
    match graph.add_hyperedge(&ids, 0.0)? {
        AddEdgeOutcome::Inserted(_) => Ok(graph),
        AddEdgeOutcome::Duplicate => unreachable!("first edge cannot be a duplicate"),
    }
}

/// A running growth process; `step` drives one batch arrival.
pub struct Simulation {
    pub params: ModelParams,
    graph: Hypergraph,
    clock: ArrivalClock,
    streams: RngStreams,
    sampler: TargetSampler,
    events: Vec<GrowthEvent>,
    snapshots: Vec<Snapshot>,
    snapshot_every: Option<u64>,
}

impl Simulation {
    pub fn new(params: ModelParams) -> Result<Self, EngineError> {
        Self::with_snapshots(params, None)
    }

    pub fn with_snapshots(
        params: ModelParams,
        snapshot_every: Option<u64>,
    ) -> Result<Self, EngineError> {
        let mut streams = RngStreams::from_seed(params.seed);
        let graph = init_graph(&params, &mut streams)?;
        let clock = ArrivalClock::new(params.lambda)?;
        let mut sampler = TargetSampler::new(params.sampler, params.alpha);
        for node in graph.nodes() {
            sampler.note_node_added(node.id);
        }
        Ok(Simulation {
            params,
            graph,
            clock,
            streams,
            sampler,
            events: Vec::new(),
            snapshots: Vec::new(),
            snapshot_every,
        })
    }

    pub fn graph(&self) -> &Hypergraph {
        &self.graph
    }

    pub fn events(&self) -> &[GrowthEvent] {
        &self.events
    }

    pub fn current_time(&self) -> f64 {
        self.clock.current_time()
    }

    /// Whether the stop rule is already satisfied.
    pub fn done(&self) -> bool {
        match self.params.stop {
            StopRule::TargetNodeCount(n) => self.graph.node_count() as u64 >= n,
            StopRule::MaxTime(_) => false, // decided per-event inside step
        }
    }

    /// Run one batch arrival. Returns the logged event, or `None` when a
    /// `MaxTime` stop rule rejects the next arrival.
    pub fn step(&mut self) -> Result<Option<&GrowthEvent>, EngineError> {
        let now = self.clock.next_arrival(&mut self.streams.arrivals);
        if let StopRule::MaxTime(t_max) = self.params.stop {
            if now > t_max {
                return Ok(None);
            }
        }
        let batch_index = self.clock.batch_counter();
        let eta = self.params.batch.sample(&mut self.streams.batch_sizes);
        let batch_y = self
            .params
            .attractiveness
            .sample(&mut self.streams.attractiveness);

        let mut new_nodes = Vec::with_capacity(eta as usize);
        for i in 0..eta {
            let y = if self.params.per_node_attractiveness && i > 0 {
                self.params
                    .attractiveness
                    .sample(&mut self.streams.attractiveness)
            } else {
                batch_y
            };
            new_nodes.push(self.graph.add_node(now, y, batch_index as u32)?);
        }

        let member_sets = form_batch_edges_with(
            &mut self.sampler,
            &self.graph,
            now,
            &new_nodes,
            self.params.m as usize,
            self.params.m2 as usize,
            &mut self.streams.targets,
        )
        .map_err(|source| EngineError::Attachment {
            batch: batch_index,
            source,
        })?;

        let mut edge_ids = Vec::with_capacity(member_sets.len());
        for members in &member_sets {
            match self.graph.add_hyperedge(members, now)? {
                AddEdgeOutcome::Inserted(id) => edge_ids.push(id),
                AddEdgeOutcome::Duplicate => {
                    unreachable!("form_batch_edges guarantees pairwise-distinct member sets")
                }
            }
            for &id in members {
                self.sampler.note_weight_changed(&self.graph, id);
            }
        }
        // new nodes become eligible targets only from the next event on
        for &id in &new_nodes {
            self.sampler.note_node_added(id);
        }

        self.events.push(GrowthEvent {
            batch_index,
            event_time: now,
            eta,
            y: batch_y,
            new_nodes,
            edge_ids,
        });
        if let Some(every) = self.snapshot_every {
            if every > 0 && batch_index.is_multiple_of(every) {
                self.snapshots.push(self.snapshot());
            }
        }
        Ok(Some(self.events.last().expect("just pushed")))
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot {
            time: self.clock.current_time(),
            node_count: self.graph.node_count(),
            edge_count: self.graph.edge_count(),
            hyperdegree_sequence: self.graph.hyperdegrees(),
        }
    }

    /// Drive the loop until the stop rule is satisfied.
    pub fn run_to_completion(mut self) -> Result<RunOutput, EngineError> {
        loop {
            match self.params.stop {
                StopRule::TargetNodeCount(n) => {
                    if self.graph.node_count() as u64 >= n {
                        break;
                    }
                    self.step()?;
                }
                StopRule::MaxTime(_) => {
                    if self.step()?.is_none() {
                        break;
                    }
                }
            }
        }
        self.snapshots.push(self.snapshot());
        Ok(RunOutput {
            graph: self.graph,
            events: self.events,
            snapshots: self.snapshots,
        })
    }
}

/// Convenience wrapper: initialize and run with the given parameters.
pub fn run(params: ModelParams) -> Result<RunOutput, EngineError> {
    Simulation::new(params)?.run_to_completion()
}
