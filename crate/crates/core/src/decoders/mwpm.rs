//! Exact minimum-weight perfect matching decoder.
//!
//! Defects are matched pairwise or to the boundary through shortest paths in
//! the detector graph. The matching itself is solved exactly by the blossom
//! algorithm on `2k` nodes: the `k` defects plus one boundary twin per
//! defect, with free twin–twin edges.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::blossom::max_weight_matching;
use super::{DecodeResult, DecodingProblem};
use crate::error::{Error, Result};
use crate::gf2::BitVec;

/// Path lengths are quantised to integers with this many units per nat
/// before matching.
const QUANTUM: f64 = 1e6;

#[derive(Clone, Copy, Debug)]
struct Edge {
    to: usize,
    weight: f64,
    mechanism: usize,
}

#[derive(Clone, Debug)]
pub struct MatchingDecoder {
    problem: DecodingProblem,
    /// Adjacency over detectors plus the boundary node `n_det`.
    adj: Vec<Vec<Edge>>,
}

struct ShortestPaths {
    dist: Vec<f64>,
    pred: Vec<Option<(usize, usize)>>,
}

impl MatchingDecoder {
    /// Builds the detector graph. Mechanisms flipping more than two
    /// detectors are dropped if `decompose` is set and they split into
    /// existing edges; otherwise the problem is rejected.
    pub fn new(p: &DecodingProblem, decompose: bool) -> Result<Self> {
        let n = p.num_checks();
        let boundary = n;
        let mut best: HashMap<(usize, usize), (f64, usize)> = HashMap::new();
        let mut hyper = Vec::new();
        for (j, checks) in p.var_checks.iter().enumerate() {
            let key = match checks.as_slice() {
                [] => continue,
                [a] => (*a, boundary),
                [a, b] => (*a.min(b), *a.max(b)),
                _ => {
                    hyper.push(j);
                    continue;
                }
            };
            let w = ((1.0 - p.priors[j]) / p.priors[j]).ln();
            let e = best.entry(key).or_insert((w, j));
            if w < e.0 {
                *e = (w, j);
            }
        }
        for j in hyper {
            let dets = &p.var_checks[j];
            if !(decompose && splits_into_edges(dets, &best, boundary)) {
                return Err(Error::NotMatchable {
                    mechanism: j,
                    count: dets.len(),
                });
            }
        }
        let mut keys: Vec<_> = best.into_iter().collect();
        keys.sort_by_key(|(k, _)| *k);
        let mut adj = vec![Vec::new(); n + 1];
        for ((a, b), (weight, mechanism)) in keys {
            adj[a].push(Edge { to: b, weight, mechanism });
            adj[b].push(Edge { to: a, weight, mechanism });
        }
        Ok(Self {
            problem: p.clone(),
            adj,
        })
    }

    pub fn problem(&self) -> &DecodingProblem {
        &self.problem
    }

    fn boundary(&self) -> usize {
        self.adj.len() - 1
    }

    /// Dijkstra from `src`; the boundary is a sink, never an intermediate.
    fn shortest_paths(&self, src: usize) -> ShortestPaths {
        let n = self.adj.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred = vec![None; n];
        let mut heap = BinaryHeap::new();
        dist[src] = 0.0;
        heap.push(Reverse((OrdF64(0.0), src)));
        while let Some(Reverse((OrdF64(d), u))) = heap.pop() {
            if d > dist[u] || u == self.boundary() {
                continue;
            }
            for e in &self.adj[u] {
                let nd = d + e.weight;
                if nd < dist[e.to] {
                    dist[e.to] = nd;
                    pred[e.to] = Some((u, e.mechanism));
                    heap.push(Reverse((OrdF64(nd), e.to)));
                }
            }
        }
        ShortestPaths { dist, pred }
    }

    /// Decodes and also returns the total weight of the chosen matching.
    pub fn decode_with_weight(&self, syndrome: &BitVec) -> Result<(DecodeResult, f64)> {
        self.problem.check_syndrome_len(syndrome)?;
        let defects: Vec<usize> = syndrome.iter_ones().collect();
        let k = defects.len();
        let v = self.problem.num_vars();
        let mut correction = BitVec::zeros(v);
        if k == 0 {
            return Ok((self.problem.result(correction, true, 0, Vec::new()), 0.0));
        }
        let paths: Vec<ShortestPaths> = defects.iter().map(|&d| self.shortest_paths(d)).collect();
        let b = self.boundary();
        let q = |x: f64| (x * QUANTUM).round() as i64;
        let mut raw = Vec::new();
        for i in 0..k {
            for j in i + 1..k {
                let d = paths[i].dist[defects[j]];
                if d.is_finite() {
                    raw.push((i, j, q(d)));
                }
            }
            let d = paths[i].dist[b];
            if d.is_finite() {
                raw.push((i, k + i, q(d)));
            }
            for j in i + 1..k {
                raw.push((k + i, k + j, 0));
            }
        }
        let top = raw.iter().map(|e| e.2).max().unwrap_or(0) + 1;
        let edges: Vec<(usize, usize, i64)> = raw.iter().map(|&(i, j, w)| (i, j, top - w)).collect();
        let mate = max_weight_matching(2 * k, &edges, true);
        let mut total = 0.0;
        for i in 0..k {
            let target = match mate[i] {
                Some(m) if m < k => {
                    if m < i {
                        continue;
                    }
                    defects[m]
                }
                Some(m) if m == k + i => b,
                _ => return Err(Error::Unmatchable(defects[i])),
            };
            total += paths[i].dist[target];
            let mut node = target;
            while let Some((prev, mech)) = paths[i].pred[node] {
                correction.flip(mech);
                node = prev;
            }
        }
        Ok((self.problem.result(correction, true, 0, Vec::new()), total))
    }

    pub fn decode(&self, syndrome: &BitVec) -> Result<DecodeResult> {
        self.decode_with_weight(syndrome).map(|r| r.0)
    }
}

/// Whether `dets` can be partitioned into existing pair or boundary edges.
fn splits_into_edges(dets: &[usize], edges: &HashMap<(usize, usize), (f64, usize)>, boundary: usize) -> bool {
    let Some((&first, rest)) = dets.split_first() else {
        return true;
    };
    if edges.contains_key(&(first, boundary)) && splits_into_edges(rest, edges, boundary) {
        return true;
    }
    for (i, &other) in rest.iter().enumerate() {
        if edges.contains_key(&(first.min(other), first.max(other))) {
            let mut remaining = rest.to_vec();
            remaining.remove(i);
            if splits_into_edges(&remaining, edges, boundary) {
                return true;
            }
        }
    }
    false
}

pub fn mwpm_decode(p: &DecodingProblem, syndrome: &BitVec) -> Result<DecodeResult> {
    MatchingDecoder::new(p, true)?.decode(syndrome)
}

#[derive(Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}
