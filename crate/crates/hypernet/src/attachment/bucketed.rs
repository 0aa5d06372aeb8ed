//! Age-bucketed accelerator for aging-preferential sampling.
//!
//! Nodes are partitioned by age into geometric buckets: bucket `j` holds
//! ages in `[r^j, r^(j+1))`. Each bucket keeps a Fenwick index over its
//! members' base weights `k + y`, so a draw picks a bucket by its upper
//! bound `sum(k+y) * (r^j)^(-alpha)`, a member within the bucket by
//! `k + y`, and then accepts with probability `age^(-alpha) / (r^j)^(-alpha)`
//! — which lies in `(r^(-alpha), 1]` once migrations are up to date, so the
//! method is exact by rejection-sampling correctness, never an approximation.
//!
//! As the clock advances every node's age grows; a node whose age crosses
//! its bucket's upper boundary is migrated before any draw. Each node
//! migrates only O(log(total age span)) times over a run, so maintenance
//! stays cheap while a single exact scan would cost O(N) per draw.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, BTreeMap};

use rand::Rng;
use rand_pcg::Pcg64;

use crate::hypergraph::{Hypergraph, NodeId};

use super::fenwick::Fenwick;

#[derive(Debug, Default)]
struct Bucket {
    members: Vec<u32>,
    weights: Fenwick,
    /// Min node id = oldest member (ids are assigned in arrival order).
    oldest: BinaryHeap<Reverse<u32>>,
    /// Upper bound on the age factor: (r^j)^(-alpha).
    bound_factor: f64,
    /// Ages at or above r^(j+1) belong to a later bucket.
    upper_age: f64,
}

#[derive(Debug)]
pub struct BucketedSampler {
    alpha: f64,
    log_ratio: f64,
    buckets: BTreeMap<i32, Bucket>,
    /// Per node id: Some((bucket, slot)) when bucketed.
    loc: Vec<Option<(i32, u32)>>,
    /// Node ids not yet old enough to be bucketed.
    pending: Vec<u32>,
    len: usize,
    synced_at: f64,
}

impl BucketedSampler {
    pub fn new(alpha: f64, bucket_ratio: f64) -> Self {
        assert!(bucket_ratio > 1.0, "bucket ratio must exceed 1");
        assert!(alpha >= 0.0, "aging exponent must be nonnegative");
        BucketedSampler {
            alpha,
            log_ratio: bucket_ratio.ln(),
            buckets: BTreeMap::new(),
            loc: Vec::new(),
            pending: Vec::new(),
            len: 0,
            synced_at: f64::NEG_INFINITY,
        }
    }

    /// Build over every node of an existing graph; nodes not yet older than
    /// `now` stay pending until a later sync.
    pub fn from_graph(graph: &Hypergraph, now: f64, alpha: f64, bucket_ratio: f64) -> Self {
        let mut s = Self::new(alpha, bucket_ratio);
        for node in graph.nodes() {
            s.note_node_added(node.id);
        }
        s.sync(graph, now);
        s
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Number of nodes currently bucketed (age > 0 at the last sync).
    pub fn eligible_len(&self) -> usize {
        self.len
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.loc.get(id.index()).copied().flatten().is_some()
    }

    /// Register a node that just entered the graph. It becomes samplable at
    /// the first sync where its age is positive.
    pub fn note_node_added(&mut self, id: NodeId) {
        if self.loc.len() <= id.index() {
            self.loc.resize(id.index() + 1, None);
        }
        self.pending.push(id.index() as u32);
    }

    /// Refresh a bucketed node's base weight after a hyperdegree change.
    /// Ids the sampler has not seen yet (the incoming batch) are ignored;
    /// they enter with their up-to-date weight at the next sync.
    pub fn note_weight_changed(&mut self, graph: &Hypergraph, id: NodeId) {
        if let Some((bucket_idx, slot)) = self.loc.get(id.index()).copied().flatten() {
            let node = graph.node(id);
            let w = node.hyperdegree as f64 + node.attractiveness;
            let bucket = self.buckets.get_mut(&bucket_idx).expect("loc in sync");
            bucket.weights.set(slot as usize, w);
        }
    }

    fn bucket_index(&self, age: f64) -> i32 {
        (age.ln() / self.log_ratio).floor() as i32
    }

    fn make_bucket(&self, idx: i32) -> Bucket {
        let lower_age = (f64::from(idx) * self.log_ratio).exp();
        let upper_age = (f64::from(idx + 1) * self.log_ratio).exp();
        Bucket {
            members: Vec::new(),
            weights: Fenwick::new(),
            oldest: BinaryHeap::new(),
            bound_factor: lower_age.powf(-self.alpha),
            upper_age,
        }
    }

    fn place(&mut self, graph: &Hypergraph, id: u32, age: f64) {
        let idx = self.bucket_index(age);
        if !self.buckets.contains_key(&idx) {
            let b = self.make_bucket(idx);
            self.buckets.insert(idx, b);
        }
        let node = graph.node(NodeId::from_index(id as usize));
        let w = node.hyperdegree as f64 + node.attractiveness;
        let bucket = self.buckets.get_mut(&idx).expect("just inserted");
        let slot = bucket.members.len() as u32;
        bucket.members.push(id);
        bucket.weights.push(w);
        bucket.oldest.push(Reverse(id));
        self.loc[id as usize] = Some((idx, slot));
    }

    fn remove(&mut self, bucket_idx: i32, slot: usize) -> u32 {
        let bucket = self.buckets.get_mut(&bucket_idx).expect("bucket exists");
        let id = bucket.members[slot];
        let last = bucket.members.len() - 1;
        if slot != last {
            let moved = bucket.members[last];
            bucket.members[slot] = moved;
            let w = bucket.weights.value(last);
            bucket.weights.set(slot, w);
            self.loc[moved as usize] = Some((bucket_idx, slot as u32));
        }
        bucket.members.pop();
        bucket.weights.pop();
        self.loc[id as usize] = None;
        id
    }

    /// Flush pending nodes and migrate members whose age crossed their
    /// bucket boundary. Must run whenever the sampling time moves;
    /// sampling times must be nondecreasing or the per-bucket factor
    /// bounds stop holding.
    pub fn sync(&mut self, graph: &Hypergraph, now: f64) {
        debug_assert!(
            now >= self.synced_at || self.synced_at == f64::NEG_INFINITY,
            "bucketed sampler synced backwards: {} -> {now}",
            self.synced_at
        );
        if now == self.synced_at && self.pending.is_empty() {
            return;
        }
        // pending nodes enter once their age is positive
        let mut still_pending = Vec::new();
        for id in std::mem::take(&mut self.pending) {
            let age = now - graph.node(NodeId::from_index(id as usize)).arrival_time;
            if age > 0.0 {
                self.place(graph, id, age);
                self.len += 1;
            } else {
                still_pending.push(id);
            }
        }
        self.pending = still_pending;

        // migrate, oldest member of each bucket first
        let keys: Vec<i32> = self.buckets.keys().copied().collect();
        for idx in keys {
            loop {
                let bucket = self.buckets.get_mut(&idx).expect("key snapshot");
                let Some(&Reverse(min_id)) = bucket.oldest.peek() else {
                    break;
                };
                let age = now - graph.node(NodeId::from_index(min_id as usize)).arrival_time;
                if age < bucket.upper_age {
                    break;
                }
                bucket.oldest.pop();
                let (b, slot) = self.loc[min_id as usize].expect("heap mirrors members");
                debug_assert_eq!(b, idx);
                let id = self.remove(idx, slot as usize);
                self.place(graph, id, age);
            }
        }
        self.synced_at = now;
    }

    /// One draw proportional to `(k + y) * age^(-alpha)` among bucketed
    /// nodes, rejecting ids for which `banned` returns true. Returns `None`
    /// when `max_attempts` rejections pass without an acceptance (callers
    /// fall back to an exact scan, keeping the overall method exact).
    pub fn try_draw<F: Fn(u32) -> bool>(
        &mut self,
        graph: &Hypergraph,
        now: f64,
        rng: &mut Pcg64,
        banned: &F,
        max_attempts: usize,
    ) -> Option<NodeId> {
        self.sync(graph, now);
        for _ in 0..max_attempts {
            let mut total = 0.0;
            for bucket in self.buckets.values() {
                total += bucket.weights.total() * bucket.bound_factor;
            }
            if total <= 0.0 {
                return None;
            }
            let mut target = rng.gen::<f64>() * total;
            let mut chosen: Option<i32> = None;
            for (&idx, bucket) in &self.buckets {
                let contribution = bucket.weights.total() * bucket.bound_factor;
                if target < contribution {
                    chosen = Some(idx);
                    break;
                }
                target -= contribution;
            }
            let idx = chosen.unwrap_or(*self.buckets.keys().last()?);
            let bucket = &self.buckets[&idx];
            if bucket.members.is_empty() {
                continue;
            }
            let slot = bucket.weights.search(target / bucket.bound_factor);
            let id = bucket.members[slot];
            let age = now - graph.node(NodeId::from_index(id as usize)).arrival_time;
            let accept = (age.powf(-self.alpha) / bucket.bound_factor).min(1.0);
            if rng.gen::<f64>() < accept && !banned(id) {
                return Some(NodeId::from_index(id as usize));
            }
        }
        None
    }

    #[cfg(test)]
    pub(crate) fn check_bucket_invariants(&self, graph: &Hypergraph, now: f64) {
        for (&idx, bucket) in &self.buckets {
            let lower_age = (f64::from(idx) * self.log_ratio).exp();
            for &id in &bucket.members {
                let age = now - graph.node(NodeId::from_index(id as usize)).arrival_time;
                assert!(
                    age < bucket.upper_age,
                    "node {id} age {age} escaped bucket {idx}"
                );
                // allow one ulp of slack at the lower boundary from the
                // ln-based bucket assignment
                assert!(
                    age >= lower_age * (1.0 - 1e-12),
                    "node {id} age {age} below bucket {idx} floor {lower_age}"
                );
            }
        }
    }
}
