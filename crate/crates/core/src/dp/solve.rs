use std::collections::{BTreeMap, HashMap};

use itertools::Itertools;
use serde::Serialize;

use super::{
    combine_children, is_compatible, leaf_dp, ChildAssignment, DpContext, DpEntry, GenInstance,
};
use crate::checks::{CheckLevel, Checks};
use crate::decomp::{decompose, default_spacing, Decomposition, NormalParams};
use crate::instance::{CostModel, FlInstance};
use crate::num::{approx_eq, leq, INF};
use crate::ringprep::{
    build_ring_graph, distance_rings, merge_ring_dp_solutions, trim_to_reach, RingInstance,
};

#[derive(Clone, Debug, Serialize)]
pub struct DpParams {
    /// Extra distance allowed when meeting requests at leaves.
    pub lambda: f64,
    pub normal: NormalParams,
    /// Largest candidate facility subset tried at an internal node.
    pub subset_size: usize,
    /// Most candidate subsets tried at an internal node.
    pub subset_cap: usize,
    /// Table size after which internal nodes try a single candidate.
    pub state_budget: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RingDpOutcome {
    pub open: Vec<usize>,
    pub cost: f64,
    pub fallback: bool,
    pub states: usize,
    pub budget_hit: bool,
}

type Key = (usize, Vec<i64>, Vec<i64>);

struct Solver<'a> {
    ctx: DpContext<'a>,
    dec: &'a Decomposition,
    params: &'a DpParams,
    node_clients: Vec<Vec<usize>>,
    node_facs: Vec<Vec<usize>>,
    dcirc: Vec<usize>,
    memo: HashMap<Key, Option<DpEntry>>,
    budget_hit: bool,
    checks: &'a mut Checks,
    level: CheckLevel,
}

impl Solver<'_> {
    fn values(&self, levels: &[i64]) -> Vec<f64> {
        levels
            .iter()
            .map(|&l| self.params.normal.value(l))
            .collect()
    }

    fn gen(&self, t: usize, pred: &[i64], req: &[i64]) -> GenInstance {
        GenInstance {
            clients: self.node_clients[t].clone(),
            portals: self.dec.node_portals[t].clone(),
            req: self.values(req),
            pred: self.values(pred),
        }
    }

    fn solve(&mut self, t: usize, pred: Vec<i64>, req: Vec<i64>) -> Option<DpEntry> {
        let key = (t, pred, req);
        if let Some(e) = self.memo.get(&key) {
            return e.clone();
        }
        if self.level > CheckLevel::Off {
            let portals = &self.dec.node_portals[t];
            let d = |i: usize, j: usize| self.ctx.dist[portals[i]][portals[j]];
            let ok =
                self.params.normal.is_normal(&key.1, d) && self.params.normal.is_normal(&key.2, d);
            self.checks
                .record("normal-keys", ok, || format!("node {t}"));
        }
        let k = self.gen(t, &key.1, &key.2);
        let entry = if self.dec.tree.nodes[t].children.is_empty() {
            leaf_dp(&self.ctx, &k, self.params.lambda)
        } else {
            self.solve_internal(t, &k)
        };
        self.memo.insert(key, entry.clone());
        entry
    }

    /// Facilities of the node covering its requests, picked greedily.
    fn cover(&self, t: usize, k: &GenInstance) -> Vec<usize> {
        let facs = &self.node_facs[t];
        let mut open: Vec<(usize, f64)> = k
            .portals
            .iter()
            .zip(&k.req)
            .filter(|(_, q)| q.is_finite())
            .map(|(&p, &q)| (p, q))
            .collect();
        let mut chosen = Vec::new();
        while !open.is_empty() {
            let best = facs
                .iter()
                .map(|&f| {
                    let v = self.ctx.fv(f);
                    (
                        open.iter()
                            .filter(|&&(p, q)| leq(self.ctx.dist[p][v], q))
                            .count(),
                        f,
                    )
                })
                .filter(|&(n, _)| n > 0)
                .max_by_key(|&(n, f)| (n, std::cmp::Reverse(f)));
            let Some((_, f)) = best else { break };
            let v = self.ctx.fv(f);
            open.retain(|&(p, q)| !leq(self.ctx.dist[p][v], q));
            chosen.push(f);
        }
        chosen.sort_unstable();
        chosen
    }

    fn candidates(&mut self, t: usize, k: &GenInstance) -> Vec<Vec<usize>> {
        let base = self.cover(t, k);
        let merge = |extra: &[usize]| -> Vec<usize> {
            let mut s: Vec<usize> = base.iter().chain(extra).copied().collect();
            s.sort_unstable();
            s.dedup();
            s
        };
        if self.memo.len() >= self.params.state_budget {
            self.budget_hit = true;
            return vec![base];
        }
        let facs = &self.node_facs[t];
        let mut out: Vec<Vec<usize>> = Vec::new();
        'outer: for size in 0..=self.params.subset_size.min(facs.len()) {
            for combo in facs.iter().copied().combinations(size) {
                if out.len() >= self.params.subset_cap {
                    break 'outer;
                }
                out.push(merge(&combo));
            }
        }
        let dc: Vec<usize> = self
            .dcirc
            .iter()
            .copied()
            .filter(|f| facs.contains(f))
            .collect();
        out.push(merge(&dc));
        let mut seen = std::collections::HashSet::new();
        out.retain(|s| seen.insert(s.clone()));
        out
    }

    fn child_keys(
        &self,
        t: usize,
        pred_t: &[f64],
        subset: &[usize],
    ) -> (Vec<(Vec<i64>, Vec<i64>)>, ChildAssignment) {
        let np = &self.params.normal;
        let dist = self.ctx.dist;
        let node = &self.dec.tree.nodes[t];
        let pt = &self.dec.node_portals[t];
        let mut phi = ChildAssignment::default();
        let mut req_levels = Vec::new();
        for &c in &node.children {
            let ps = self.dec.node_portals[c].clone();
            let mine: Vec<usize> = subset
                .iter()
                .copied()
                .filter(|f| self.node_facs[c].binary_search(f).is_ok())
                .collect();
            let lv: Vec<i64> = ps
                .iter()
                .map(|&rho| {
                    let d = mine
                        .iter()
                        .map(|&f| dist[rho][self.ctx.fv(f)])
                        .fold(INF, f64::min);
                    np.round_up(d)
                })
                .collect();
            phi.req.push(lv.iter().map(|&l| np.value(l)).collect());
            phi.portals.push(ps);
            req_levels.push(lv);
        }
        let mut keys = Vec::new();
        for (i, ps) in phi.portals.iter().enumerate() {
            let lv: Vec<i64> = ps
                .iter()
                .map(|&rho| {
                    let mut best = pt
                        .iter()
                        .zip(pred_t)
                        .map(|(&p, &pr)| pr + dist[rho][p])
                        .fold(INF, f64::min);
                    for (j, qs) in phi.portals.iter().enumerate() {
                        if j != i {
                            for (&rho2, &rq) in qs.iter().zip(&phi.req[j]) {
                                best = best.min(rq + dist[rho][rho2]);
                            }
                        }
                    }
                    np.round_up(best)
                })
                .collect();
            phi.pred.push(lv.iter().map(|&l| np.value(l)).collect());
            keys.push((lv, req_levels[i].clone()));
        }
        (keys, phi)
    }

    fn solve_internal(&mut self, t: usize, k: &GenInstance) -> Option<DpEntry> {
        let children = self.dec.tree.nodes[t].children.clone();
        let mut best: Option<DpEntry> = None;
        for subset in self.candidates(t, k) {
            let (keys, phi) = self.child_keys(t, &k.pred, &subset);
            if !is_compatible(self.ctx.dist, k, &phi) {
                continue;
            }
            let mut entries = Vec::with_capacity(children.len());
            for (&c, (p, r)) in children.iter().zip(keys) {
                match self.solve(c, p, r) {
                    Some(e) => entries.push(e),
                    None => break,
                }
            }
            if entries.len() < children.len() {
                continue;
            }
            let refs: Vec<&DpEntry> = entries.iter().collect();
            let combined = combine_children(&self.ctx, k, &refs, subset);
            if self.level > CheckLevel::Off {
                let sum: f64 = entries.iter().map(|e| e.cost).sum();
                self.checks.record("combine", leq(combined.cost, sum), || {
                    format!("node {t}: union {} > children {sum}", combined.cost)
                });
            }
            if best.as_ref().map_or(true, |b| combined.cost < b.cost) {
                best = Some(combined);
            }
        }
        best
    }
}

/// Bottom-up solution of one ring graph over its decomposition. Facility
/// ids are indices into `inst.facilities`; `dcirc` lists the designated ones.
pub fn solve_ring_dp(
    inst: &FlInstance,
    dist: &[Vec<f64>],
    dcirc: &[usize],
    dec: &Decomposition,
    params: &DpParams,
    level: CheckLevel,
    checks: &mut Checks,
) -> RingDpOutcome {
    let model = CostModel::new(inst);
    if inst.clients.is_empty() {
        return RingDpOutcome {
            open: Vec::new(),
            cost: 0.0,
            fallback: false,
            states: 0,
            budget_hit: false,
        };
    }
    let n_nodes = dec.tree.nodes.len();
    let mut node_clients = vec![Vec::new(); n_nodes];
    let mut node_facs = vec![Vec::new(); n_nodes];
    for (t, vs) in dec.node_vertices.iter().enumerate() {
        node_clients[t] = (0..inst.clients.len())
            .filter(|&c| vs.binary_search(&inst.clients[c].vertex).is_ok())
            .collect();
        node_facs[t] = (0..inst.facilities.len())
            .filter(|&f| vs.binary_search(&inst.facilities[f].vertex).is_ok())
            .collect();
    }
    let mut solver = Solver {
        ctx: DpContext { inst, dist },
        dec,
        params,
        node_clients,
        node_facs,
        dcirc: dcirc.to_vec(),
        memo: HashMap::new(),
        budget_hit: false,
        checks,
        level,
    };
    let root = solver.solve(0, Vec::new(), Vec::new());
    let states = solver.memo.len();
    let budget_hit = solver.budget_hit;
    match root {
        Some(e) => {
            let exact = model.cost(&e.open);
            if level > CheckLevel::Off {
                checks.record("root", approx_eq(exact, e.cost), || {
                    format!("root cost {} but instance cost {exact}", e.cost)
                });
            }
            RingDpOutcome {
                open: e.open,
                cost: exact,
                fallback: false,
                states,
                budget_hit,
            }
        }
        None => {
            let mut open = dcirc.to_vec();
            open.sort_unstable();
            let cost = model.cost(&open);
            RingDpOutcome {
                open,
                cost,
                fallback: true,
                states,
                budget_hit,
            }
        }
    }
}

/// Knobs of the ring stage.
#[derive(Clone, Debug, Serialize)]
pub struct RingSolveConfig {
    pub eps: f64,
    /// Portal spacing; derived from `eps` and the graph size when absent.
    pub portal_spacing: Option<f64>,
    /// Cap on the number of value levels inside a finite range.
    pub value_levels: Option<usize>,
    pub subset_size: usize,
    pub subset_cap: usize,
    pub state_budget: usize,
    pub level: CheckLevel,
}

impl RingSolveConfig {
    pub fn new(eps: f64, level: CheckLevel) -> Self {
        RingSolveConfig {
            eps,
            portal_spacing: None,
            value_levels: None,
            subset_size: 2,
            subset_cap: 24,
            state_budget: 4000,
            level,
        }
    }

    pub fn params(&self, r: f64, n: usize) -> DpParams {
        let spacing = self
            .portal_spacing
            .unwrap_or_else(|| default_spacing(self.eps, n));
        let lo = -5.0 * self.eps;
        let hi = 3.0 * r + 5.0 * self.eps;
        let d = match self.value_levels {
            Some(l) if hi.is_finite() && l > 0 => spacing.max((hi - lo) / l as f64),
            _ => spacing,
        };
        DpParams {
            lambda: 5.0 * self.eps,
            normal: NormalParams {
                d,
                lo,
                hi,
                slack: d,
            },
            subset_size: self.subset_size,
            subset_cap: self.subset_cap,
            state_budget: self.state_budget,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RingSolveStats {
    pub q: i64,
    /// Chosen residue per connected part.
    pub a: Vec<i64>,
    /// Portal spacing and path length bound of the last ring graph.
    pub delta: f64,
    pub len_bound: f64,
    pub parts: usize,
    pub ring_graphs: usize,
    pub fallbacks: usize,
    pub budget_hits: usize,
    pub dp_states: usize,
    pub max_depth: usize,
    pub max_portals: usize,
}

/// Full ring-stage pipeline: trim, layer by distance from a root, solve each
/// ring graph by the decomposition DP and merge. Returns facility ids local
/// to `ring.inst`.
pub fn solve_ring(
    ring: &RingInstance,
    cfg: &RingSolveConfig,
    checks: &mut Checks,
) -> crate::error::Result<(Vec<usize>, RingSolveStats)> {
    let mut stats = RingSolveStats::default();
    let mut out = Vec::new();
    for part in trim_to_reach(ring, checks) {
        stats.parts += 1;
        let dr = distance_rings(&part, cfg.eps, checks);
        stats.q = dr.q;
        stats.a.push(dr.a);
        let mut per_ring = BTreeMap::new();
        for (&j, band) in &dr.rings {
            if band.clients.is_empty() {
                continue;
            }
            let rg = build_ring_graph(&part, &dr, j, cfg.level, checks);
            let inst = rg.instance(&part);
            let dist = inst.graph.all_pairs();
            let dcirc: Vec<usize> = rg
                .dcirc
                .iter()
                .filter_map(|f| rg.facilities.binary_search(f).ok())
                .collect();
            let params = cfg.params(part.r, inst.graph.n());
            let dec = decompose(&inst.graph, rg.s, params.normal.d, checks);
            let res = solve_ring_dp(&inst, &dist, &dcirc, &dec, &params, cfg.level, checks);
            stats.ring_graphs += 1;
            stats.delta = params.normal.d;
            stats.len_bound = rg.len_bound;
            stats.fallbacks += res.fallback as usize;
            stats.budget_hits += res.budget_hit as usize;
            stats.dp_states += res.states;
            stats.max_depth = stats.max_depth.max(dec.tree.depth());
            stats.max_portals = stats
                .max_portals
                .max(dec.node_portals.iter().map(Vec::len).max().unwrap_or(0));
            let sol: Vec<usize> = res.open.iter().map(|&i| rg.facilities[i]).collect();
            per_ring.insert(j, (rg, sol));
        }
        let merged = merge_ring_dp_solutions(&part, &dr, cfg.eps, &per_ring, checks)?;
        out.extend(merged.iter().map(|&f| part.fac_ids[f]));
    }
    out.sort_unstable();
    out.dedup();
    Ok((out, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EmbeddedGraph;
    use crate::instance::{Client, Facility};
    use crate::oracles::exact_opt;

    fn grid(n: usize) -> EmbeddedGraph {
        let id = |r: usize, c: usize| r * n + c;
        let mut edges = Vec::new();
        let mut rot = vec![Vec::new(); n * n];
        for r in 0..n {
            for c in 0..n {
                let mut nb = Vec::new();
                if c + 1 < n {
                    nb.push(id(r, c + 1));
                }
                if r + 1 < n {
                    nb.push(id(r + 1, c));
                }
                if c > 0 {
                    nb.push(id(r, c - 1));
                }
                if r > 0 {
                    nb.push(id(r - 1, c));
                }
                for &v in &nb {
                    if v > id(r, c) {
                        edges.push((id(r, c), v, 1.0 + ((r * 7 + c * 3 + v) % 5) as f64 * 0.1));
                    }
                }
                rot[id(r, c)] = nb;
            }
        }
        EmbeddedGraph::from_rotation(n * n, &edges, &rot).unwrap()
    }

    #[test]
    fn generous_spacing_reaches_optimum() {
        let g = grid(3);
        let inst = FlInstance {
            graph: g,
            coords: None,
            clients: [0, 2, 4, 6, 8]
                .iter()
                .map(|&v| Client { vertex: v, mult: 1 })
                .collect(),
            facilities: [1, 4, 7, 8]
                .iter()
                .map(|&v| Facility {
                    vertex: v,
                    cost: 1.5,
                })
                .collect(),
            label: String::new(),
        };
        let dist = inst.graph.all_pairs();
        let mut checks = Checks::default();
        let dec = decompose(&inst.graph, 0, 0.05, &mut checks);
        let params = DpParams {
            lambda: 0.0,
            normal: NormalParams {
                d: 0.05,
                lo: 0.0,
                hi: INF,
                slack: 0.05,
            },
            subset_size: 2,
            subset_cap: 64,
            state_budget: 100_000,
        };
        let out = solve_ring_dp(
            &inst,
            &dist,
            &[1],
            &dec,
            &params,
            CheckLevel::Full,
            &mut checks,
        );
        let ex = exact_opt(&CostModel::new(&inst)).unwrap();
        assert!(!out.fallback);
        assert!(
            out.cost <= ex.cost * 1.0001,
            "dp {} vs opt {}",
            out.cost,
            ex.cost
        );
        assert_eq!(checks.count("root").failed, 0);
    }

    #[test]
    fn empty_ring() {
        let inst = FlInstance {
            graph: grid(2),
            coords: None,
            clients: vec![],
            facilities: vec![Facility {
                vertex: 0,
                cost: 1.0,
            }],
            label: String::new(),
        };
        let dist = inst.graph.all_pairs();
        let mut checks = Checks::default();
        let dec = decompose(&inst.graph, 0, 0.1, &mut checks);
        let params = RingSolveConfig::new(0.1, CheckLevel::Fast).params(1.0, 4);
        let out = solve_ring_dp(
            &inst,
            &dist,
            &[0],
            &dec,
            &params,
            CheckLevel::Fast,
            &mut checks,
        );
        assert!(out.open.is_empty());
    }
}
