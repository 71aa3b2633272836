//! Ring instances: trimming, distance layering from a root vertex, the
//! surgery graphs for each distance ring, and merging their solutions.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::checks::{CheckLevel, Checks};
use crate::graph::EmbeddedGraph;
use crate::instance::{Client, CostModel, Facility, FlInstance};
use crate::num::{approx_eq, leq, INF};

/// An instance with a designated facility set whose clusters have bounded
/// radius `r`. Facility and client indices are local to `inst`; `fac_ids`
/// and `client_ids` translate them to the caller's numbering.
#[derive(Clone, Debug)]
pub struct RingInstance {
    pub inst: FlInstance,
    pub fac_ids: Vec<usize>,
    pub client_ids: Vec<usize>,
    pub dcirc: Vec<usize>,
    pub clusters: Vec<Vec<usize>>,
    pub r: f64,
}

impl RingInstance {
    pub fn contributions(&self, model: &CostModel) -> Vec<f64> {
        self.dcirc
            .iter()
            .zip(&self.clusters)
            .map(|(&f, cl)| {
                model.open[f]
                    + cl.iter()
                        .map(|&c| model.weight[c] * model.dist[c][f])
                        .sum::<f64>()
            })
            .collect()
    }

    pub fn m(&self, model: &CostModel) -> f64 {
        self.contributions(model).iter().sum()
    }
}

/// Restricts a ring instance to the vertices within `4r` of its designated
/// facilities, one instance per connected component.
pub fn trim_to_reach(ring: &RingInstance, checks: &mut Checks) -> Vec<RingInstance> {
    let g = &ring.inst.graph;
    let sources: Vec<usize> = ring
        .dcirc
        .iter()
        .map(|&f| ring.inst.facilities[f].vertex)
        .collect();
    let reach = g.sssp_multi(&sources);
    let keep: Vec<bool> = reach
        .dist
        .iter()
        .map(|&d| d.is_finite() && d <= 4.0 * ring.r)
        .collect();
    let all_in = ring.inst.clients.iter().all(|c| keep[c.vertex]);
    checks.record("trim-keeps-clients", all_in, || {
        "a client lies beyond 4r of every centre".into()
    });
    let (sub, map) = g.induced(&keep);
    let comp = sub.components();
    let ncomp = comp.iter().copied().max().map_or(0, |c| c + 1);
    let mut parts = Vec::new();
    for k in 0..ncomp {
        let mask: Vec<bool> = comp.iter().map(|&c| c == k).collect();
        let (pg, pmap) = sub.induced(&mask);
        let to_part = |v: usize| map[v].and_then(|x| pmap[x]);
        let mut fac_local = BTreeMap::new();
        let mut facilities = Vec::new();
        let mut fac_ids = Vec::new();
        for (f, fac) in ring.inst.facilities.iter().enumerate() {
            if let Some(v) = to_part(fac.vertex) {
                fac_local.insert(f, facilities.len());
                facilities.push(Facility {
                    vertex: v,
                    cost: fac.cost,
                });
                fac_ids.push(ring.fac_ids[f]);
            }
        }
        let mut cl_local = BTreeMap::new();
        let mut clients = Vec::new();
        let mut client_ids = Vec::new();
        for (c, cl) in ring.inst.clients.iter().enumerate() {
            if let Some(v) = to_part(cl.vertex) {
                cl_local.insert(c, clients.len());
                clients.push(Client {
                    vertex: v,
                    mult: cl.mult,
                });
                client_ids.push(ring.client_ids[c]);
            }
        }
        let mut dcirc = Vec::new();
        let mut clusters = Vec::new();
        for (i, &f) in ring.dcirc.iter().enumerate() {
            if let Some(&lf) = fac_local.get(&f) {
                dcirc.push(lf);
                clusters.push(
                    ring.clusters[i]
                        .iter()
                        .filter_map(|c| cl_local.get(c).copied())
                        .collect(),
                );
            }
        }
        if dcirc.is_empty() {
            continue;
        }
        let inst = FlInstance {
            graph: pg,
            coords: None,
            clients,
            facilities,
            label: ring.inst.label.clone(),
        };
        parts.push(RingInstance {
            inst,
            fac_ids,
            client_ids,
            dcirc,
            clusters,
            r: ring.r,
        });
    }
    parts
}

/// A band of consecutive distance layers and what lives in it.
#[derive(Clone, Debug, Default)]
pub struct DistanceBand {
    /// Designated facilities (local ids) strictly inside the band.
    pub dcirc: Vec<usize>,
    pub clients: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct DistanceRings {
    pub s: usize,
    pub dist_s: Vec<f64>,
    pub layer: Vec<i64>,
    pub q: i64,
    pub a: i64,
    pub skipped: Vec<usize>,
    pub skipped_clients: Vec<usize>,
    pub rings: BTreeMap<i64, DistanceBand>,
    pub skipped_sum: f64,
    pub m: f64,
}

impl DistanceRings {
    pub fn ring_of_layer(&self, i: i64) -> Option<i64> {
        ((i - self.a).rem_euclid(self.q) != 0).then(|| (i - self.a).div_euclid(self.q))
    }
}

/// Layers of width `8r` around vertex 0 and the cheapest residue class of
/// layers to buy outright.
pub fn distance_rings(ring: &RingInstance, eps: f64, checks: &mut Checks) -> DistanceRings {
    let model = CostModel::new(&ring.inst);
    let s = 0;
    let dist_s = ring.inst.graph.sssp(s).dist;
    let width = 8.0 * ring.r;
    let layer: Vec<i64> = dist_s
        .iter()
        .map(|&d| {
            if width.is_finite() {
                (d / width).floor() as i64
            } else {
                0
            }
        })
        .collect();
    let q = (1.0 / eps).ceil() as i64;
    let contrib = ring.contributions(&model);
    let fac_layers: Vec<i64> = ring
        .inst
        .facilities
        .iter()
        .map(|f| layer[f.vertex])
        .collect();
    let fac_layer = |f: usize| fac_layers[f];
    let mut class: BTreeMap<i64, f64> = BTreeMap::new();
    for (k, &f) in ring.dcirc.iter().enumerate() {
        *class.entry(fac_layer(f).rem_euclid(q)).or_default() += contrib[k];
    }
    // The lowest residue with the smallest class sum; empty classes sum to zero.
    let mut a = 0i64;
    let mut best = INF;
    for r in 0..q {
        let v = class.get(&r).copied().unwrap_or(0.0);
        if v < best {
            best = v;
            a = r;
        }
        if v == 0.0 {
            break;
        }
    }
    let mut out = DistanceRings {
        s,
        dist_s,
        layer,
        q,
        a,
        skipped: Vec::new(),
        skipped_clients: Vec::new(),
        rings: BTreeMap::new(),
        skipped_sum: 0.0,
        m: contrib.iter().sum(),
    };
    for (k, &f) in ring.dcirc.iter().enumerate() {
        match out.ring_of_layer(fac_layer(f)) {
            Some(j) => {
                let band = out.rings.entry(j).or_default();
                band.dcirc.push(f);
                band.clients.extend(&ring.clusters[k]);
            }
            None => {
                out.skipped.push(f);
                out.skipped_clients.extend(&ring.clusters[k]);
                out.skipped_sum += contrib[k];
            }
        }
    }
    for band in out.rings.values_mut() {
        band.clients.sort_unstable();
    }
    checks.record("isolation", leq(out.skipped_sum, eps * out.m), || {
        format!(
            "skipped contribution {} > eps·M = {}",
            out.skipped_sum,
            eps * out.m
        )
    });
    check_rings_separated(ring, &out, checks);
    out
}

fn check_rings_separated(ring: &RingInstance, dr: &DistanceRings, checks: &mut Checks) {
    let g = &ring.inst.graph;
    let ring_of_vertex: Vec<Option<i64>> = dr.layer.iter().map(|&i| dr.ring_of_layer(i)).collect();
    let ids: Vec<i64> = {
        let mut v: Vec<i64> = ring_of_vertex.iter().flatten().copied().collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    if ids.len() < 2 {
        return;
    }
    for &j in &ids {
        let src: Vec<usize> = (0..g.n())
            .filter(|&v| ring_of_vertex[v] == Some(j))
            .collect();
        let d = g.sssp_multi(&src).dist;
        let ok = (0..g.n())
            .filter(|&v| matches!(ring_of_vertex[v], Some(k) if k != j))
            .all(|v| d[v] > 8.0 * ring.r);
        checks.record("rings-separated", ok, || {
            format!("ring {j} is within 8r of another ring")
        });
    }
}

/// Graph of one distance ring with far layers removed and near layers
/// contracted onto the root.
#[derive(Clone, Debug)]
pub struct RingGraph {
    pub j: i64,
    pub graph: EmbeddedGraph,
    pub s: usize,
    /// Vertex of the trimmed graph to vertex of this graph.
    pub vmap: Vec<Option<usize>>,
    /// Facilities (local ids of the trimmed instance) in the band.
    pub facilities: Vec<usize>,
    pub clients: Vec<usize>,
    pub dcirc: Vec<usize>,
    pub len_bound: f64,
}

impl RingGraph {
    /// Instance on this graph with the band's facilities and clients.
    pub fn instance(&self, ring: &RingInstance) -> FlInstance {
        FlInstance {
            graph: self.graph.clone(),
            coords: None,
            clients: self
                .clients
                .iter()
                .map(|&c| {
                    let cl = ring.inst.clients[c];
                    Client {
                        vertex: self.vmap[cl.vertex].expect("client kept"),
                        mult: cl.mult,
                    }
                })
                .collect(),
            facilities: self
                .facilities
                .iter()
                .map(|&f| {
                    let fac = ring.inst.facilities[f];
                    Facility {
                        vertex: self.vmap[fac.vertex].expect("facility kept"),
                        cost: fac.cost,
                    }
                })
                .collect(),
            label: ring.inst.label.clone(),
        }
    }
}

pub fn build_ring_graph(
    ring: &RingInstance,
    dr: &DistanceRings,
    j: i64,
    level: CheckLevel,
    checks: &mut Checks,
) -> RingGraph {
    let g = &ring.inst.graph;
    let lo = j * dr.q + dr.a;
    let hi = (j + 1) * dr.q + dr.a;
    let keep: Vec<bool> = dr.layer.iter().map(|&i| i <= hi).collect();
    let (kept, kmap) = g.induced(&keep);
    let back: Vec<usize> = {
        let mut b = vec![0; kept.n()];
        for (v, m) in kmap.iter().enumerate() {
            if let Some(x) = m {
                b[*x] = v;
            }
        }
        b
    };
    let inner: Vec<bool> = back.iter().map(|&v| dr.layer[v] < lo).collect();
    let (graph, vmap) = if inner.iter().any(|&x| x) {
        let merge: Vec<bool> = kept
            .edges
            .iter()
            .map(|e| inner[e.u] && inner[e.v])
            .collect();
        let (mut h, cmap) = kept.contract_edges(&merge);
        let s_h = cmap[kmap[dr.s].expect("root kept")];
        let mut orig = vec![usize::MAX; h.n()];
        for (kv, &hv) in cmap.iter().enumerate() {
            if !inner[kv] {
                orig[hv] = back[kv];
            }
        }
        for e in h.edges.iter_mut() {
            if e.u == s_h && e.v != s_h {
                e.w = dr.dist_s[orig[e.v]];
            } else if e.v == s_h && e.u != s_h {
                e.w = dr.dist_s[orig[e.u]];
            }
        }
        let vmap: Vec<Option<usize>> = kmap.iter().map(|m| m.map(|x| cmap[x])).collect();
        (h, vmap)
    } else {
        (kept, kmap)
    };
    let s = vmap[dr.s].expect("root kept");
    let in_band = |v: usize| (lo..=hi).contains(&dr.layer[v]);
    let facilities: Vec<usize> = (0..ring.inst.facilities.len())
        .filter(|&f| in_band(ring.inst.facilities[f].vertex))
        .collect();
    let band = dr.rings.get(&j).cloned().unwrap_or_default();
    let clients_ok = band
        .clients
        .iter()
        .all(|&c| vmap[ring.inst.clients[c].vertex].is_some());
    checks.record("band-clients", clients_ok, || {
        format!("ring {j} loses a client")
    });
    let rg = RingGraph {
        j,
        graph,
        s,
        vmap,
        facilities,
        clients: band.clients.clone(),
        dcirc: band.dcirc.clone(),
        len_bound: 8.0 * ring.r * (dr.q + 1) as f64,
    };
    if level > CheckLevel::Off {
        check_ring_distances(ring, dr, &rg, level, checks);
    }
    rg
}

/// Compares distances in the ring graph with those in the trimmed graph.
fn check_ring_distances(
    ring: &RingInstance,
    dr: &DistanceRings,
    rg: &RingGraph,
    level: CheckLevel,
    checks: &mut Checks,
) {
    let g = &ring.inst.graph;
    let hv: Vec<(usize, usize)> = rg
        .vmap
        .iter()
        .enumerate()
        .filter_map(|(v, m)| m.map(|h| (v, h)))
        .collect();
    // Contracted vertices share the root's image; compare only distinct images.
    let mut rep: BTreeMap<usize, usize> = BTreeMap::new();
    for &(v, h) in &hv {
        let e = rep.entry(h).or_insert(v);
        if h == rg.s {
            *e = dr.s;
        }
    }
    let verts: Vec<(usize, usize)> = rep.iter().map(|(&h, &v)| (v, h)).collect();
    let in_ring = |v: usize| dr.ring_of_layer(dr.layer[v]) == Some(rg.j);
    let sh = rg.graph.sssp(rg.s).dist;
    let mut p2 = true;
    for &(v, h) in &verts {
        p2 &= approx_eq(sh[h], dr.dist_s[v]);
    }
    checks.record("ring-root-distance", p2, || {
        format!("ring {} changes a distance to s", rg.j)
    });
    let full = verts.len() <= 40 || level == CheckLevel::Full;
    let pairs: Vec<(usize, usize)> = if full {
        (0..verts.len())
            .flat_map(|a| (0..verts.len()).map(move |b| (a, b)))
            .collect()
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(rg.j as u64);
        (0..1000)
            .map(|_| (rng.gen_range(0..verts.len()), rng.gen_range(0..verts.len())))
            .collect()
    };
    let mut by_src: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (a, b) in pairs {
        by_src.entry(a).or_default().push(b);
    }
    let (mut p1, mut p3) = (true, true);
    for (a, bs) in by_src {
        let (u, hu) = verts[a];
        let dg = g.sssp(u).dist;
        let dh = rg.graph.sssp(hu).dist;
        for b in bs {
            let (v, hv) = verts[b];
            p1 &= leq(dg[v], dh[hv]);
            if in_ring(u) && dg[v] <= 3.0 * ring.r {
                p3 &= approx_eq(dg[v], dh[hv]);
            }
        }
    }
    checks.record("ring-no-shortcut", p1, || {
        format!("ring {} shortens a distance", rg.j)
    });
    checks.record("ring-local-distance", p3, || {
        format!("ring {} distorts a local distance", rg.j)
    });
}

/// Union of the bought facilities and the per-ring solutions.
pub fn merge_ring_dp_solutions(
    ring: &RingInstance,
    dr: &DistanceRings,
    eps: f64,
    per_ring: &BTreeMap<i64, (RingGraph, Vec<usize>)>,
    checks: &mut Checks,
) -> crate::error::Result<Vec<usize>> {
    let mut out = dr.skipped.clone();
    let mut ring_sum = 0.0;
    for (&j, band) in &dr.rings {
        if band.clients.is_empty() {
            continue;
        }
        let (rg, sol) = per_ring
            .get(&j)
            .ok_or(crate::error::FlError::MissingRing(j))?;
        let inst = rg.instance(ring);
        let local: Vec<usize> = sol
            .iter()
            .map(|f| rg.facilities.binary_search(f).expect("band facility"))
            .collect();
        ring_sum += CostModel::new(&inst).cost(&local);
        out.extend(sol);
    }
    out.sort_unstable();
    out.dedup();
    let model = CostModel::new(&ring.inst);
    let merged = model.cost(&out);
    checks.record(
        "layering-separation",
        leq(merged, eps * dr.m + ring_sum),
        || format!("merged {merged} > eps·M {} + rings {ring_sum}", eps * dr.m),
    );
    Ok(out)
}
