//! Rescaling, client concentration, magnitude layering and the ring
//! instances handed to the ring solver.

use std::collections::BTreeMap;

use crate::baseline::{one_opt_closure, RobustSolution};
use crate::checks::Checks;
use crate::error::{FlError, Result};
use crate::graph::{edge_of, EmbeddedGraph};
use crate::instance::{Client, CostModel, DistOracle, FlInstance, Solution};
use crate::num::{approx_eq, leq};
use crate::ringprep::RingInstance;

#[derive(Clone, Debug)]
pub struct Preprocessed {
    pub inst: FlInstance,
    /// Factor applied to lengths and opening costs.
    pub scale: f64,
    /// Set when the baseline cost is zero and nothing was changed.
    pub degenerate: bool,
    /// Original vertex to preprocessed vertex.
    pub vertex_map: Vec<usize>,
    pub contracted_edges: usize,
    pub zeroed_facilities: usize,
}

pub fn preprocess_scale(inst: &FlInstance, eps: f64, baseline_cost: f64) -> Preprocessed {
    let identity: Vec<usize> = (0..inst.graph.n()).collect();
    if !(baseline_cost > 0.0) || !baseline_cost.is_finite() {
        return Preprocessed {
            inst: inst.clone(),
            scale: 1.0,
            degenerate: true,
            vertex_map: identity,
            contracted_edges: 0,
            zeroed_facilities: 0,
        };
    }
    let budget = inst.facilities.len() as f64 + inst.client_weight() as f64 * inst.graph.m() as f64;
    let scale = budget / (eps * baseline_cost);
    let scaled = inst.graph.scaled(scale);
    let short: Vec<bool> = scaled.edges.iter().map(|e| e.w < 1.0).collect();
    let contracted_edges = short.iter().filter(|&&s| s).count();
    let (graph, vertex_map) = if contracted_edges > 0 {
        scaled.contract_edges(&short)
    } else {
        (scaled, identity)
    };
    let coords = inst.coords.as_ref().map(|xy| {
        let mut out = vec![[0.0; 2]; graph.n()];
        for (v, &nv) in vertex_map.iter().enumerate().rev() {
            out[nv] = xy[v];
        }
        out
    });
    let mut zeroed = 0;
    let facilities = inst
        .facilities
        .iter()
        .map(|f| {
            let mut cost = f.cost * scale;
            if cost < 1.0 && cost != 0.0 {
                cost = 0.0;
                zeroed += 1;
            }
            crate::instance::Facility {
                vertex: vertex_map[f.vertex],
                cost,
            }
        })
        .collect();
    let clients = inst
        .clients
        .iter()
        .map(|c| Client {
            vertex: vertex_map[c.vertex],
            mult: c.mult,
        })
        .collect();
    Preprocessed {
        inst: FlInstance {
            graph,
            coords,
            clients,
            facilities,
            label: inst.label.clone(),
        },
        scale,
        degenerate: false,
        vertex_map,
        contracted_edges,
        zeroed_facilities: zeroed,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MovedClient {
    pub client: usize,
    pub from: usize,
    pub facility: usize,
    pub far: bool,
}

#[derive(Clone, Debug)]
pub struct ConcentratedInstance {
    pub inst: FlInstance,
    /// The robust facility set, ascending.
    pub robust: Vec<usize>,
    /// Per robust facility: average cost, concentrated cluster and anchor.
    pub avgcost: Vec<f64>,
    pub cluster: Vec<Vec<usize>>,
    pub anchor: Vec<usize>,
    pub moved: Vec<MovedClient>,
    pub psi: f64,
    /// Anchors that could not be placed on a path to a cluster member.
    pub anchor_fallbacks: usize,
}

impl ConcentratedInstance {
    /// open(f) plus the concentrated cluster's connection to f, per robust facility.
    pub fn contributions(&self, model: &CostModel) -> Vec<f64> {
        self.robust
            .iter()
            .enumerate()
            .map(|(i, &f)| {
                model.open[f]
                    + self.cluster[i]
                        .iter()
                        .map(|&c| model.weight[c] * model.dist[c][f])
                        .sum::<f64>()
            })
            .collect()
    }
}

/// Vertex at distance exactly `target` from `src` along the tree path to
/// `dest`, subdividing an edge when no vertex sits there.
fn place_on_path(g: &mut EmbeddedGraph, src: usize, dest: usize, target: f64) -> usize {
    let tree = g.sssp(src);
    let mut path = g.tree_path(&tree, dest);
    path.reverse();
    for win in path.windows(2) {
        let (a, b) = (win[0], win[1]);
        let (da, db) = (tree.dist[a], tree.dist[b]);
        if da == target {
            return a;
        }
        if db == target {
            return b;
        }
        if da < target && target < db {
            let d = tree.parent[b].expect("tree edge");
            let e = edge_of(d);
            let off = target - da;
            let w1 = if g.edges[e].u == a {
                off
            } else {
                g.edges[e].w - off
            };
            return g.subdivide(e, w1);
        }
    }
    dest
}

/// Moves far and close clients of every robust facility onto its anchor.
pub fn concentrate(
    inst: &FlInstance,
    model: &CostModel,
    robust: &RobustSolution,
    eps: f64,
    checks: &mut Checks,
) -> Result<ConcentratedInstance> {
    let mut graph = inst.graph.clone();
    let mut clients = inst.clients.clone();
    let e2 = eps * eps;
    let mut avgcost = Vec::new();
    let mut cluster = Vec::new();
    let mut anchor = Vec::new();
    let mut moved = Vec::new();
    let mut psi = 0.0;
    let mut fallbacks = 0;
    for (i, &f) in robust.clusters.facilities.iter().enumerate() {
        let avg = robust.clusters.avgcost[i].ok_or_else(|| FlError::Assertion {
            tag: "robust-served".into(),
            msg: format!("facility {f} serves no client"),
        })?;
        let members = robust.clusters.members[i].clone();
        let fv = inst.facilities[f].vertex;
        let target = e2 * avg;
        let x = if target == 0.0 {
            fv
        } else {
            let far_member = members
                .iter()
                .copied()
                .max_by(|&a, &b| {
                    model.dist[a][f]
                        .total_cmp(&model.dist[b][f])
                        .then(b.cmp(&a))
                })
                .expect("nonempty cluster");
            if model.dist[far_member][f] >= target {
                place_on_path(&mut graph, fv, inst.clients[far_member].vertex, target)
            } else {
                fallbacks += 1;
                let tree = graph.sssp(fv);
                let far_vertex = (0..graph.n())
                    .filter(|&v| tree.dist[v].is_finite())
                    .max_by(|&a, &b| tree.dist[a].total_cmp(&tree.dist[b]).then(b.cmp(&a)))
                    .unwrap_or(fv);
                if tree.dist[far_vertex] >= target {
                    place_on_path(&mut graph, fv, far_vertex, target)
                } else {
                    let p = graph.add_vertex();
                    graph.push_edge(fv, p, target);
                    p
                }
            }
        };
        for &c in &members {
            let d = model.dist[c][f];
            let far = d > avg / e2;
            if far || d < target {
                if far {
                    psi += model.weight[c] * d;
                }
                moved.push(MovedClient {
                    client: c,
                    from: clients[c].vertex,
                    facility: f,
                    far,
                });
                clients[c].vertex = x;
            }
        }
        avgcost.push(avg);
        cluster.push(members);
        anchor.push(x);
    }
    let coords = inst
        .coords
        .as_ref()
        .filter(|xy| xy.len() == graph.n())
        .cloned();
    let conc = ConcentratedInstance {
        inst: FlInstance {
            graph,
            coords,
            clients,
            facilities: inst.facilities.clone(),
            label: inst.label.clone(),
        },
        robust: robust.clusters.facilities.clone(),
        avgcost,
        cluster,
        anchor,
        moved,
        psi,
        anchor_fallbacks: fallbacks,
    };
    verify_concentration(&conc, model, eps, checks);
    Ok(conc)
}

fn verify_concentration(
    conc: &ConcentratedInstance,
    before: &CostModel,
    eps: f64,
    checks: &mut Checks,
) {
    let e2 = eps * eps;
    let after = CostModel::new(&conc.inst);
    for (i, &f) in conc.robust.iter().enumerate() {
        let avg = conc.avgcost[i];
        let fv = conc.inst.facilities[f].vertex;
        let dx = DistOracle::from_sources(&conc.inst.graph, [fv]).dist(fv, conc.anchor[i]);
        checks.record("anchor-distance", approx_eq(dx, e2 * avg), || {
            format!("facility {f}: dist to anchor {dx}, wanted {}", e2 * avg)
        });
        let mut ok = true;
        let mut local = after.open[f];
        for &c in &conc.cluster[i] {
            let d = after.dist[c][f];
            local += after.weight[c] * d;
            ok &= leq(e2 * avg, d) && leq(d, avg / e2);
        }
        checks.record("concentration", ok, || {
            format!("facility {f} has a far or close client")
        });
        let size: f64 = conc.cluster[i].iter().map(|&c| before.weight[c]).sum();
        checks.record(
            "cluster-budget",
            leq(local, (1.0 + e2) * size * avg),
            || format!("facility {f}: {local} > (1+eps^2)·{size}·{avg}"),
        );
    }
}

/// Layering of the robust facilities by the magnitude of their averages.
#[derive(Clone, Debug)]
pub struct MagnitudeLayering {
    pub eps: f64,
    pub q: i64,
    pub a: i64,
    /// Layer per robust facility; `None` for a zero average.
    pub layer: Vec<Option<i64>>,
    pub ell: BTreeMap<i64, f64>,
    pub skipped: Vec<usize>,
    pub skipped_clients: Vec<usize>,
    pub rings: BTreeMap<i64, Vec<usize>>,
    pub ring_clients: BTreeMap<i64, Vec<usize>>,
    pub skipped_sum: f64,
    pub total: f64,
}

impl MagnitudeLayering {
    /// Facilities that are free in the ring-`j` instance.
    pub fn free_set(&self, j: i64) -> Vec<usize> {
        let mut out = self.skipped.clone();
        for (_, w) in self.rings.range(j + 1..) {
            out.extend(w);
        }
        out.sort_unstable();
        out
    }

    pub fn ring_open(&self, open: &[f64], j: i64) -> Vec<f64> {
        let mut o = open.to_vec();
        for f in self.free_set(j) {
            o[f] = 0.0;
        }
        o
    }
}

pub fn magnitude_index(avg: f64, eps: f64) -> i64 {
    let mut i = (avg.ln() / (4.0 * eps.ln())).floor() as i64;
    while !(eps.powf(4.0 * i as f64) >= avg) {
        i -= 1;
    }
    while !(avg > eps.powf(4.0 * i as f64 + 4.0)) {
        i += 1;
    }
    i
}

pub fn magnitude_layers(
    conc: &ConcentratedInstance,
    model: &CostModel,
    eps: f64,
    checks: &mut Checks,
) -> MagnitudeLayering {
    let q = (1.0 / (eps * eps)).ceil() as i64;
    let contrib = conc.contributions(model);
    let layer: Vec<Option<i64>> = conc
        .avgcost
        .iter()
        .map(|&avg| (avg > 0.0).then(|| magnitude_index(avg, eps)))
        .collect();
    let mut ell: BTreeMap<i64, f64> = BTreeMap::new();
    for (i, l) in layer.iter().enumerate() {
        if let Some(l) = l {
            *ell.entry(*l).or_default() += contrib[i];
        }
    }
    let mut class = vec![0.0f64; q as usize];
    for (&i, &v) in &ell {
        class[i.rem_euclid(q) as usize] += v;
    }
    let mut a = 0usize;
    for r in 1..class.len() {
        if class[r] < class[a] {
            a = r;
        }
    }
    let a = a as i64;
    let mut skipped = Vec::new();
    let mut skipped_clients = Vec::new();
    let mut rings: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut ring_clients: BTreeMap<i64, Vec<usize>> = BTreeMap::new();
    let mut skipped_sum = 0.0;
    for (i, &f) in conc.robust.iter().enumerate() {
        match layer[i] {
            Some(l) if (l - a).rem_euclid(q) != 0 => {
                let j = (l - a).div_euclid(q);
                rings.entry(j).or_default().push(f);
                ring_clients.entry(j).or_default().extend(&conc.cluster[i]);
            }
            _ => {
                skipped.push(f);
                skipped_clients.extend(&conc.cluster[i]);
                skipped_sum += contrib[i];
            }
        }
    }
    for cl in ring_clients.values_mut() {
        cl.sort_unstable();
    }
    skipped_clients.sort_unstable();
    let total: f64 = contrib.iter().sum();
    checks.record("layer-cost", leq(skipped_sum, eps * eps * total), || {
        format!("skipped class sum {skipped_sum} exceeds eps^2·{total}")
    });
    let mut seen = vec![0u32; model.n_clients()];
    for c in skipped_clients
        .iter()
        .chain(ring_clients.values().flatten())
    {
        seen[*c] += 1;
    }
    checks.record("layer-partition", seen.iter().all(|&k| k == 1), || {
        "skipped and ring clients do not partition the clients".into()
    });
    for (i, &f) in conc.robust.iter().enumerate() {
        if let Some(l) = layer[i] {
            if (l - a).rem_euclid(q) != 0 {
                let j = (l - a).div_euclid(q);
                let avg = conc.avgcost[i];
                let hi = eps.powf(4.0 * (j * q + a + 1) as f64);
                let lo = eps.powf(4.0 * (j * q + q + a) as f64);
                checks.record("ring-averages", leq(avg, hi) && avg > lo, || {
                    format!("facility {f} average {avg} outside ring {j}")
                });
            }
        }
    }
    MagnitudeLayering {
        eps,
        q,
        a,
        layer,
        ell,
        skipped,
        skipped_clients,
        rings,
        ring_clients,
        skipped_sum,
        total,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub enum ConstantsMode {
    Strict,
    Capped,
}

/// A ring instance together with the factor that produced its units.
#[derive(Clone, Debug)]
pub struct RingSpec {
    pub j: i64,
    pub scale: f64,
    pub ring: RingInstance,
}

/// Builds the scaled instance for every nontrivial ring.
pub fn ring_instances(
    conc: &ConcentratedInstance,
    model: &CostModel,
    layering: &MagnitudeLayering,
    mode: ConstantsMode,
    checks: &mut Checks,
) -> Result<Vec<RingSpec>> {
    let eps = layering.eps;
    let (q, a) = (layering.q, layering.a);
    let mut out = Vec::new();
    for (&j, wj) in &layering.rings {
        let pos: Vec<usize> = wj
            .iter()
            .map(|f| {
                conc.robust
                    .binary_search(f)
                    .expect("ring facility is robust")
            })
            .collect();
        let (scale, r) = match mode {
            ConstantsMode::Strict => {
                let scale = eps.powf(-((4 * (j * q + q + a) + 2) as f64));
                if !scale.is_finite() || scale == 0.0 {
                    return Err(FlError::StrictInfeasible(format!(
                        "ring {j} scale factor is not a finite positive number"
                    )));
                }
                // May overflow to +∞, which makes every distance bound vacuous.
                (scale, 2.0 * eps.powf(-4.0 * q as f64))
            }
            ConstantsMode::Capped => {
                let mut dmin = f64::INFINITY;
                let mut tight = 0.0f64;
                for &p in &pos {
                    let f = conc.robust[p];
                    let mut size = 0.0;
                    let mut local = model.open[f];
                    for &c in &conc.cluster[p] {
                        let d = model.dist[c][f];
                        dmin = dmin.min(d);
                        tight = tight.max(d);
                        size += model.weight[c];
                        local += model.weight[c] * d;
                    }
                    tight = tight.max(local / size);
                }
                let scale = 1.0 / dmin;
                (scale, (tight * scale).max(1.0) * (1.0 + 1e-9))
            }
        };
        let ring = build_ring(conc, model, layering, j, &pos, scale, r);
        let rm = CostModel::new(&ring.inst);
        for (k, &f) in ring.dcirc.iter().enumerate() {
            let mut local = rm.open[f];
            let mut size = 0.0;
            let mut ok = true;
            for &c in &ring.clusters[k] {
                let d = rm.dist[c][f];
                ok &= leq(1.0, d)
                    && leq(
                        d,
                        r / if mode == ConstantsMode::Strict {
                            2.0
                        } else {
                            1.0
                        },
                    );
                local += rm.weight[c] * d;
                size += rm.weight[c];
            }
            checks.record("ring-radius", ok, || {
                format!("ring {j} facility {f} cluster outside [1, r]")
            });
            checks.record("ring-budget", leq(local, size * r), || {
                format!("ring {j} facility {f}: {local} > {size}·r")
            });
        }
        out.push(RingSpec { j, scale, ring });
    }
    Ok(out)
}

fn build_ring(
    conc: &ConcentratedInstance,
    model: &CostModel,
    layering: &MagnitudeLayering,
    j: i64,
    pos: &[usize],
    scale: f64,
    r: f64,
) -> RingInstance {
    let client_ids = layering.ring_clients[&j].clone();
    let open = layering.ring_open(&model.open, j);
    let mut inst = conc.inst.clone();
    inst.graph = inst.graph.scaled(scale);
    inst.clients = client_ids.iter().map(|&c| conc.inst.clients[c]).collect();
    for (f, fac) in inst.facilities.iter_mut().enumerate() {
        fac.cost = open[f] * scale;
    }
    let local: BTreeMap<usize, usize> = client_ids
        .iter()
        .enumerate()
        .map(|(i, &c)| (c, i))
        .collect();
    let dcirc: Vec<usize> = pos.iter().map(|&p| conc.robust[p]).collect();
    let clusters = pos
        .iter()
        .map(|&p| conc.cluster[p].iter().map(|c| local[c]).collect())
        .collect();
    let nf = inst.facilities.len();
    RingInstance {
        inst,
        fac_ids: (0..nf).collect(),
        client_ids,
        dcirc,
        clusters,
        r,
    }
}

/// Reassembles ring solutions into a solution of the concentrated instance.
pub fn combine_ring_solutions(
    model: &CostModel,
    layering: &MagnitudeLayering,
    robust_weighted_avg: f64,
    per_ring: &BTreeMap<i64, Vec<usize>>,
    checks: &mut Checks,
) -> Result<Solution> {
    let eps = layering.eps;
    let mut open: Vec<usize> = layering.skipped.clone();
    let mut ring_total = 0.0;
    for (&j, clients) in &layering.ring_clients {
        let dj = per_ring.get(&j).ok_or(FlError::MissingRing(j))?;
        let jm = model
            .restrict_clients(clients)
            .with_open(layering.ring_open(&model.open, j));
        let free = layering.free_set(j);
        let mut start: Vec<usize> = dj.iter().chain(&free).copied().collect();
        start.sort_unstable();
        start.dedup();
        let closed = one_opt_closure(&jm, &jm.eval(&start)?);
        ring_total += closed.cost();
        open.extend(
            closed
                .open_set
                .iter()
                .filter(|f| free.binary_search(f).is_err()),
        );
    }
    open.sort_unstable();
    open.dedup();
    let sol = model.eval(&open)?;
    let slack = layering.skipped_sum + 8.0 * eps.powi(4) * robust_weighted_avg;
    checks.record(
        "ring-combination",
        leq(sol.cost(), ring_total + slack),
        || format!("{} > {} + {}", sol.cost(), ring_total, slack),
    );
    Ok(sol)
}
