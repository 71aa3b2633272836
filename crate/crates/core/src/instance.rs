use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{FlError, Result};
use crate::graph::{EmbeddedGraph, Sssp};
use crate::num::INF;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Client {
    pub vertex: usize,
    pub mult: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Facility {
    pub vertex: usize,
    pub cost: f64,
}

/// A facility location instance on an embedded planar graph. Facility ids are
/// positions in `facilities`; several facilities may share a vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct FlInstance {
    pub graph: EmbeddedGraph,
    pub coords: Option<Vec<[f64; 2]>>,
    pub clients: Vec<Client>,
    pub facilities: Vec<Facility>,
    pub label: String,
}

impl FlInstance {
    pub fn validate(&self) -> Result<()> {
        let n = self.graph.n();
        for e in &self.graph.edges {
            if e.u >= n || e.v >= n {
                return Err(FlError::Invalid("edge endpoint out of range".into()));
            }
            if !(e.w >= 0.0) {
                return Err(FlError::Invalid("negative or NaN edge weight".into()));
            }
        }
        for c in &self.clients {
            if c.vertex >= n || c.mult == 0 {
                return Err(FlError::Invalid(format!(
                    "bad client at vertex {}",
                    c.vertex
                )));
            }
        }
        for f in &self.facilities {
            if f.vertex >= n || !(f.cost >= 0.0) {
                return Err(FlError::Invalid(format!(
                    "bad facility at vertex {}",
                    f.vertex
                )));
            }
        }
        if !self.graph.is_planar_embedding() {
            return Err(FlError::Invalid("rotation system is not planar".into()));
        }
        Ok(())
    }

    pub fn client_weight(&self) -> u64 {
        self.clients.iter().map(|c| c.mult).sum()
    }

    pub fn opening_costs(&self) -> Vec<f64> {
        self.facilities.iter().map(|f| f.cost).collect()
    }

    /// Same instance with every opening cost multiplied by `factor`.
    pub fn with_scaled_open(&self, factor: f64) -> FlInstance {
        let mut out = self.clone();
        for f in &mut out.facilities {
            f.cost *= factor;
        }
        out
    }
}

pub fn shortest_dist(inst: &FlInstance, u: usize, v: usize) -> f64 {
    inst.graph.sssp(u).dist[v]
}

/// Shortest-path trees from a chosen set of sources.
#[derive(Clone, Debug)]
pub struct DistOracle {
    trees: BTreeMap<usize, Sssp>,
}

impl DistOracle {
    pub fn from_sources(g: &EmbeddedGraph, sources: impl IntoIterator<Item = usize>) -> Self {
        let mut trees = BTreeMap::new();
        for s in sources {
            trees.entry(s).or_insert_with(|| g.sssp(s));
        }
        DistOracle { trees }
    }

    pub fn all_pairs(g: &EmbeddedGraph) -> Self {
        Self::from_sources(g, 0..g.n())
    }

    /// Distance between `u` and `v`; one of them must be a source.
    pub fn dist(&self, u: usize, v: usize) -> f64 {
        if let Some(t) = self.trees.get(&u) {
            t.dist[v]
        } else {
            self.trees
                .get(&v)
                .expect("neither endpoint is a source")
                .dist[u]
        }
    }

    pub fn tree(&self, s: usize) -> Option<&Sssp> {
        self.trees.get(&s)
    }
}

/// Everything needed to price a facility subset: opening costs, client
/// weights, and client-to-facility and facility-to-facility distances.
#[derive(Clone, Debug)]
pub struct CostModel {
    pub open: Vec<f64>,
    pub weight: Vec<f64>,
    /// `dist[c][f]`.
    pub dist: Vec<Vec<f64>>,
    /// `fdist[f][g]`.
    pub fdist: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Solution {
    pub open_set: Vec<usize>,
    pub assignment: Vec<usize>,
    pub conn_cost: f64,
    pub open_cost: f64,
}

impl Solution {
    pub fn cost(&self) -> f64 {
        self.open_cost + self.conn_cost
    }
}

impl CostModel {
    pub fn new(inst: &FlInstance) -> Self {
        let oracle =
            DistOracle::from_sources(&inst.graph, inst.facilities.iter().map(|f| f.vertex));
        Self::with_oracle(inst, &oracle)
    }

    pub fn with_oracle(inst: &FlInstance, oracle: &DistOracle) -> Self {
        let dist = inst
            .clients
            .iter()
            .map(|c| {
                inst.facilities
                    .iter()
                    .map(|f| oracle.dist(f.vertex, c.vertex))
                    .collect()
            })
            .collect();
        let fdist = inst
            .facilities
            .iter()
            .map(|a| {
                inst.facilities
                    .iter()
                    .map(|b| oracle.dist(b.vertex, a.vertex))
                    .collect()
            })
            .collect();
        CostModel {
            open: inst.opening_costs(),
            weight: inst.clients.iter().map(|c| c.mult as f64).collect(),
            dist,
            fdist,
        }
    }

    pub fn with_open(&self, open: Vec<f64>) -> Self {
        CostModel {
            open,
            ..self.clone()
        }
    }

    /// Model over a subset of the clients, keeping facility ids.
    pub fn restrict_clients(&self, clients: &[usize]) -> Self {
        CostModel {
            open: self.open.clone(),
            weight: clients.iter().map(|&c| self.weight[c]).collect(),
            dist: clients.iter().map(|&c| self.dist[c].clone()).collect(),
            fdist: self.fdist.clone(),
        }
    }

    pub fn n_facilities(&self) -> usize {
        self.open.len()
    }

    pub fn n_clients(&self) -> usize {
        self.weight.len()
    }

    /// Nearest open facility under the order (distance, facility id).
    pub fn nearest(&self, c: usize, open_set: &[usize]) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for &f in open_set {
            let d = self.dist[c][f];
            match best {
                Some((bf, bd)) if d > bd || (d == bd && f > bf) => {}
                _ => best = Some((f, d)),
            }
        }
        best
    }

    /// Evaluates a facility subset; ids are sorted and deduplicated first.
    pub fn eval(&self, open_set: &[usize]) -> Result<Solution> {
        let mut open: Vec<usize> = open_set.to_vec();
        open.sort_unstable();
        open.dedup();
        if open.is_empty() && !self.weight.is_empty() {
            return Err(FlError::NoFacility);
        }
        let open_cost = open.iter().map(|&f| self.open[f]).sum();
        let mut conn_cost = 0.0;
        let mut assignment = Vec::with_capacity(self.n_clients());
        for c in 0..self.n_clients() {
            let (f, d) = self.nearest(c, &open).expect("nonempty");
            assignment.push(f);
            conn_cost += self.weight[c] * d;
        }
        Ok(Solution {
            open_set: open,
            assignment,
            conn_cost,
            open_cost,
        })
    }

    /// Total cost, or +∞ for an empty set with clients present.
    pub fn cost(&self, open_set: &[usize]) -> f64 {
        self.eval(open_set).map_or(INF, |s| s.cost())
    }

    /// Distance from facility `f` to the nearest member of `set`.
    pub fn dist_to_set(&self, f: usize, set: &[usize]) -> f64 {
        set.iter().map(|&g| self.fdist[f][g]).fold(INF, f64::min)
    }
}

pub fn eval_solution(inst: &FlInstance, open_set: &[usize]) -> Result<Solution> {
    CostModel::new(inst).eval(open_set)
}

/// Clusters of an evaluated solution, indexed like `open_set`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClusterMap {
    pub facilities: Vec<usize>,
    pub members: Vec<Vec<usize>>,
    /// Total multiplicity of each cluster.
    pub size: Vec<u64>,
    /// `None` marks a facility that serves nobody.
    pub avgcost: Vec<Option<f64>>,
}

impl ClusterMap {
    pub fn position(&self, f: usize) -> Option<usize> {
        self.facilities.binary_search(&f).ok()
    }

    pub fn avg(&self, f: usize) -> Option<f64> {
        self.position(f).and_then(|i| self.avgcost[i])
    }

    /// Σ |cluster(f)| · avgcost(f) over serving facilities.
    pub fn weighted_sum(&self) -> f64 {
        self.size
            .iter()
            .zip(&self.avgcost)
            .filter_map(|(&k, a)| a.map(|a| k as f64 * a))
            .sum()
    }
}

pub fn clusters_of(model: &CostModel, sol: &Solution) -> ClusterMap {
    let facilities = sol.open_set.clone();
    let mut members = vec![Vec::new(); facilities.len()];
    for (c, &f) in sol.assignment.iter().enumerate() {
        let i = facilities
            .binary_search(&f)
            .expect("assigned to an open facility");
        members[i].push(c);
    }
    let mut size = Vec::with_capacity(facilities.len());
    let mut avgcost = Vec::with_capacity(facilities.len());
    for (i, &f) in facilities.iter().enumerate() {
        let k: u64 = members[i].iter().map(|&c| model.weight[c] as u64).sum();
        size.push(k);
        if k == 0 {
            avgcost.push(None);
        } else {
            let conn: f64 = members[i]
                .iter()
                .map(|&c| model.weight[c] * model.dist[c][f])
                .sum();
            avgcost.push(Some((model.open[f] + conn) / k as f64));
        }
    }
    ClusterMap {
        facilities,
        members,
        size,
        avgcost,
    }
}

/// True when `f` lies so far from `d` that opening it must pay off for the
/// clients in `k`.
pub fn improvement_witness(model: &CostModel, d: &[usize], f: usize, k: &[usize]) -> Result<bool> {
    if k.is_empty() {
        return Err(FlError::EmptyClientSet);
    }
    let size: f64 = k.iter().map(|&c| model.weight[c]).sum();
    let local: f64 = k.iter().map(|&c| model.weight[c] * model.dist[c][f]).sum();
    Ok(model.dist_to_set(f, d) > 2.0 / size * (model.open[f] + local))
}
