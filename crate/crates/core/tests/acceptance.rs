mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use common::{brute_opt, cost_of, floyd, micro_instance, rng, within};
use planar_flp::baseline::{build_robust, constant_factor_approx, ALPHA};
use planar_flp::checks::{CheckLevel, Checks};
use planar_flp::decomp::{decompose, enumerate_normal, place_portals, NormalParams, INF_LEVEL};
use planar_flp::dp::{leaf_dp, solve_ring_dp, DpContext, GenInstance, RingSolveConfig};
use planar_flp::generate::{generate, GenKind, GenParams};
use planar_flp::oracles::local_search;
use planar_flp::reduce::{
    concentrate, magnitude_layers, preprocess_scale, ring_instances, ConstantsMode, RingSpec,
};
use planar_flp::ringprep::{
    build_ring_graph, distance_rings, merge_ring_dp_solutions, trim_to_reach, RingInstance,
};
use planar_flp::run::{run_ptas, RunOptions};
use planar_flp::{Client, CostModel, EmbeddedGraph, Facility, FlError, FlInstance};
use rand::seq::SliceRandom;
use rand::Rng;

const EPS: f64 = 0.09;

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Verdict {
    Verdict { ok, detail }
}

/// Random planar graph with small integer edge weights.
fn integer_graph(seed: u64, points: usize) -> EmbeddedGraph {
    let inst = generate(
        &GenParams::new(GenKind::DelaunayLike { points }, 1, 1),
        seed,
    )
    .unwrap();
    let mut r = rng(seed.wrapping_mul(31));
    let mut g = inst.graph;
    for e in &mut g.edges {
        e.w = r.gen_range(1..=6) as f64;
    }
    g
}

/// Exhaustive reference for a leaf subproblem.
fn leaf_reference(inst: &FlInstance, d: &[Vec<f64>], k: &GenInstance, lambda: f64) -> Option<f64> {
    let nf = inst.facilities.len();
    let fv = |f: usize| inst.facilities[f].vertex;
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << nf) {
        let set: Vec<usize> = (0..nf).filter(|&f| mask >> f & 1 == 1).collect();
        let feasible = k
            .portals
            .iter()
            .zip(&k.req)
            .filter(|(_, q)| q.is_finite())
            .all(|(&p, &q)| set.iter().any(|&f| d[p][fv(f)] <= q + lambda));
        if !feasible {
            continue;
        }
        let mut cost: f64 = set.iter().map(|&f| inst.facilities[f].cost).sum();
        for &c in &k.clients {
            let v = inst.clients[c].vertex;
            let mut best_c = f64::INFINITY;
            for &f in &set {
                best_c = best_c.min(d[v][fv(f)]);
            }
            for (&p, &pr) in k.portals.iter().zip(&k.pred) {
                best_c = best_c.min(d[v][p] + pr);
            }
            cost += inst.clients[c].mult as f64 * best_c;
        }
        if cost.is_finite() && best.map_or(true, |b| cost < b) {
            best = Some(cost);
        }
    }
    best
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut infeasible = 0;
    for seed in 0..200u64 {
        let mut r = rng(1_000 + seed);
        let g = integer_graph(seed, r.gen_range(6..=14));
        let n = g.n();
        let nf = r.gen_range(1..=10);
        let facilities = (0..nf)
            .map(|_| Facility {
                vertex: r.gen_range(0..n),
                cost: r.gen_range(0..=6) as f64,
            })
            .collect();
        let mut verts: Vec<usize> = (0..n).collect();
        verts.shuffle(&mut r);
        let client_verts = &verts[..r.gen_range(1..=3)];
        let clients = (0..r.gen_range(1..=5))
            .map(|_| Client {
                vertex: *client_verts.choose(&mut r).unwrap(),
                mult: r.gen_range(1..=3),
            })
            .collect::<Vec<_>>();
        verts.shuffle(&mut r);
        let portals: Vec<usize> = verts[..r.gen_range(0..=4)].to_vec();
        let value = |r: &mut rand_chacha::ChaCha8Rng| {
            if r.gen_bool(0.5) {
                f64::INFINITY
            } else {
                r.gen_range(0..=8) as f64
            }
        };
        let req = portals.iter().map(|_| value(&mut r)).collect();
        let pred = portals.iter().map(|_| value(&mut r)).collect();
        let lambda = r.gen_range(0..=2) as f64;
        let inst = FlInstance {
            graph: g,
            coords: None,
            clients,
            facilities,
            label: String::new(),
        };
        let k = GenInstance {
            clients: (0..inst.clients.len()).collect(),
            portals,
            req,
            pred,
        };
        let dist = inst.graph.all_pairs();
        let got = leaf_dp(
            &DpContext {
                inst: &inst,
                dist: &dist,
            },
            &k,
            lambda,
        )
        .map(|e| e.cost);
        let want = leaf_reference(&inst, &floyd(&inst.graph), &k, lambda);
        if want.is_none() {
            infeasible += 1;
        }
        if got != want {
            mismatches.push(format!("seed {seed}: dp {got:?} vs exhaustive {want:?}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches.is_empty() && secs < 30.0,
        format!(
            "200 instances ({infeasible} infeasible), {} mismatches, {secs:.2}s {}",
            mismatches.len(),
            mismatches.first().cloned().unwrap_or_default()
        ),
    )
}

struct Run2 {
    verdict: Verdict,
    instances: Vec<FlInstance>,
    checks: Checks,
}

fn criterion_2() -> Run2 {
    let start = Instant::now();
    let bound = 1.0 + 28.0 * ALPHA * EPS;
    let opts = RunOptions {
        strict: true,
        level: CheckLevel::Full,
        ..RunOptions::default()
    };
    let mut checks = Checks::default();
    let mut instances = Vec::new();
    let (mut strict, mut worst, mut problems) = (0, 1.0f64, Vec::new());
    for seed in 0..50u64 {
        let inst = micro_instance(2_000 + seed, 12, 6);
        assert!(inst.graph.n() <= 12 && inst.facilities.len() <= 6);
        let d = floyd(&inst.graph);
        let (opt, _) = brute_opt(&inst, &d);
        let out = run_ptas(&inst, &opts, &mut checks).expect("pipeline runs");
        if out.constants.constants_mode == ConstantsMode::Strict {
            strict += 1;
        }
        let cost = cost_of(&inst, &d, &out.solution.open_set, 1.0);
        let base = cost_of(&inst, &d, &out.baseline.open_set, 1.0);
        worst = worst.max(if opt > 0.0 { cost / opt } else { 1.0 });
        if !within(cost, bound * opt) {
            problems.push(format!("seed {seed}: {cost} > {bound}·{opt}"));
        }
        if !within(cost, base) {
            problems.push(format!("seed {seed}: {cost} above baseline {base}"));
        }
        if (cost - out.solution.cost()).abs() > 1e-9 * (1.0 + cost) {
            problems.push(format!(
                "seed {seed}: reported {} vs recomputed {cost}",
                out.solution.cost()
            ));
        }
        instances.push(inst);
    }
    let secs = start.elapsed().as_secs_f64();
    Run2 {
        verdict: verdict(
            problems.is_empty() && secs < 300.0,
            format!(
                "50 instances, {strict} strict / {} capped, worst ratio {worst:.4} (bound {bound:.2}), {secs:.2}s {}",
                50 - strict,
                problems.join("; ")
            ),
        ),
        instances,
        checks,
    }
}

fn criterion_3(instances: &[FlInstance]) -> Verdict {
    let mut problems = Vec::new();
    let (mut scanned, mut close) = (0, 0);
    let extra: Vec<FlInstance> = (0..50).map(|s| micro_instance(3_000 + s, 12, 8)).collect();
    for (i, inst) in instances.iter().chain(&extra).enumerate() {
        let d = floyd(&inst.graph);
        let robust = build_robust(&CostModel::new(inst), EPS).unwrap();
        let base = cost_of(inst, &d, &robust.open_set, EPS);
        for f in 0..inst.facilities.len() {
            if robust.open_set.contains(&f) {
                continue;
            }
            let mut with = robust.open_set.clone();
            with.push(f);
            scanned += 1;
            if !within(base, cost_of(inst, &d, &with, EPS)) {
                problems.push(format!("instance {i}: adding {f} improves"));
            }
        }
        let (_, opt) = brute_opt(inst, &d);
        let cl = &robust.clusters;
        for (k, &f) in cl.facilities.iter().enumerate() {
            let Some(avg) = cl.avgcost[k] else { continue };
            let fv = inst.facilities[f].vertex;
            let to_opt = opt
                .iter()
                .map(|&g| d[fv][inst.facilities[g].vertex])
                .fold(f64::INFINITY, f64::min);
            close += 1;
            if !within(to_opt, 2.0 * avg) {
                problems.push(format!("instance {i}: facility {f} at {to_opt} > 2·{avg}"));
            }
        }
    }
    verdict(
        problems.is_empty(),
        format!(
            "100 instances, {scanned} single additions scanned, {close} close-opt tests {}",
            problems.join("; ")
        ),
    )
}

fn criterion_4() -> Verdict {
    let mut problems = Vec::new();
    let mut max_faces = 0;
    let mut checks = Checks::default();
    for k in 0..100u64 {
        let g = if k % 4 == 0 {
            let rows = 2 + (k as usize / 4) % 8;
            generate(
                &GenParams::new(
                    GenKind::Grid {
                        rows,
                        cols: rows + 1,
                    },
                    1,
                    1,
                ),
                k,
            )
            .unwrap()
            .graph
        } else {
            generate(
                &GenParams::new(
                    GenKind::DelaunayLike {
                        points: 4 + k as usize * 96 / 99,
                    },
                    1,
                    1,
                ),
                k,
            )
            .unwrap()
            .graph
        };
        let dec = decompose(&g, 0, 0.5, &mut checks);
        let nfaces = dec.fs.faces.len();
        max_faces = max_faces.max(nfaces);
        let fg = &dec.fs.graph;
        if fg.n() as i64 - fg.m() as i64 + nfaces as i64 != 2 {
            problems.push(format!("graph {k}: Euler count"));
        }
        let tree = &dec.tree;
        let depth = tree.nodes.iter().map(|n| n.depth).max().unwrap();
        if depth as f64 > (nfaces as f64).log2() {
            problems.push(format!("graph {k}: T1 depth {depth} with {nfaces} faces"));
        }
        if tree.nodes[0].block != (0..nfaces).collect::<Vec<_>>() {
            problems.push(format!("graph {k}: T3"));
        }
        for (t, node) in tree.nodes.iter().enumerate() {
            if node.beta.len() > 3 {
                problems.push(format!("graph {k} node {t}: T2"));
            }
            if node.children.is_empty() {
                if node.block.len() != 1 {
                    problems.push(format!("graph {k} node {t}: T4"));
                }
                continue;
            }
            let mut seen = BTreeSet::new();
            let mut disjoint = true;
            for &c in &node.children {
                for &f in &tree.nodes[c].block {
                    disjoint &= seen.insert(f);
                }
            }
            let covers = seen == node.block.iter().copied().collect();
            let inherits = node.beta.iter().all(|a| {
                node.children
                    .iter()
                    .any(|&c| tree.nodes[c].beta.contains(a))
            });
            if node.children.len() > 7 || !disjoint || !covers || !inherits {
                problems.push(format!("graph {k} node {t}: T5"));
            }
        }
    }
    let lib_failed: u64 = ["T1", "T2", "T3", "T4", "T5"]
        .iter()
        .map(|t| checks.count(t).failed)
        .sum();
    verdict(
        problems.is_empty() && lib_failed == 0 && max_faces <= 200,
        format!(
            "100 graphs up to {max_faces} faces, {} independent failures, {lib_failed} recorded failures {}",
            problems.len(),
            problems.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    )
}

fn brute_normal(
    n: usize,
    dist: &[Vec<f64>],
    p: &NormalParams,
    lo: i64,
    hi: i64,
) -> BTreeSet<Vec<i64>> {
    let mut values: Vec<i64> = (lo..=hi).collect();
    values.push(INF_LEVEL);
    let mut out = BTreeSet::new();
    let total = values.len().pow(n as u32);
    for code in 0..total {
        let mut c = code;
        let f: Vec<i64> = (0..n)
            .map(|_| {
                let v = values[c % values.len()];
                c /= values.len();
                v
            })
            .collect();
        let ok = (0..n).all(|i| {
            (0..n).all(|j| {
                f[i] == INF_LEVEL
                    || f[j] == INF_LEVEL
                    || ((f[i] - f[j]).abs() as f64 * p.d) <= dist[i][j] + p.slack
            })
        });
        if ok {
            out.insert(f);
        }
    }
    out
}

fn criterion_5() -> Verdict {
    let mut problems = Vec::new();
    // Covering on shortest paths.
    let mut r = rng(5);
    for k in 0..100u64 {
        let inst = micro_instance(5_000 + k, 30, 1);
        let g = &inst.graph;
        let d = floyd(g);
        let s = r.gen_range(0..g.n());
        let v = r.gen_range(0..g.n());
        let sp = g.sssp(s);
        let mut path = g.tree_path(&sp, v);
        path.reverse();
        let spacing = r.gen_range(0.2..3.0);
        let portals = place_portals(&path, &sp.dist, spacing);
        let len = d[s][v];
        let covered = path.iter().all(|&x| {
            portals
                .iter()
                .any(|&p| (d[s][x] - d[s][p]).abs() <= spacing + 1e-9)
        });
        let ok = covered
            && portals.contains(&s)
            && portals.iter().all(|p| path.contains(p))
            && portals.len() as f64 <= len / spacing + 2.0 + 1e-9;
        if !ok {
            problems.push(format!("path {k}: portals {portals:?} on {path:?}"));
        }
    }
    // Enumeration against brute force.
    let mut families = 0;
    for trial in 0..300u64 {
        let mut r = rng(50_000 + trial);
        let n = (trial % 4) as usize;
        let d = if r.gen_bool(0.5) { 1.0 } else { 0.5 };
        let lo_level = r.gen_range(-2..=1i64);
        let levels = r.gen_range(1..=6i64);
        let p = NormalParams {
            d,
            lo: lo_level as f64 * d,
            hi: (lo_level + levels - 1) as f64 * d,
            slack: [0.0, d / 2.0, d][r.gen_range(0..3)],
        };
        let mut dist = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..i {
                let x = r.gen_range(0..=12) as f64 * 0.25;
                dist[i][j] = x;
                dist[j][i] = x;
            }
        }
        let got = enumerate_normal(n, |i, j| dist[i][j], &p);
        let set: BTreeSet<Vec<i64>> = got.iter().cloned().collect();
        let want = brute_normal(n, &dist, &p, lo_level, lo_level + levels - 1);
        families += 1;
        if set.len() != got.len() || set != want {
            problems.push(format!(
                "enumeration trial {trial}: {} listed, {} expected",
                got.len(),
                want.len()
            ));
        }
    }
    // Portal snapping.
    let mut samples = 0;
    let mut lib = Checks::default();
    for k in 0..20u64 {
        let g = generate(
            &GenParams::new(
                GenKind::DelaunayLike {
                    points: 15 + 2 * k as usize,
                },
                1,
                1,
            ),
            6_000 + k,
        )
        .unwrap()
        .graph;
        let d = floyd(&g);
        let mut r = rng(7_000 + k);
        let delta = r.gen_range(0.2..2.0);
        let dec = decompose(&g, 0, delta, &mut lib);
        let nodes: Vec<usize> = (0..dec.tree.nodes.len())
            .filter(|&t| !dec.node_vertices[t].is_empty())
            .collect();
        let mut done = 0;
        while done < 1000 {
            let s = *nodes.choose(&mut r).unwrap();
            let t = *nodes.choose(&mut r).unwrap();
            if dec.tree.is_ancestor(s, t) || dec.tree.is_ancestor(t, s) {
                continue;
            }
            let u = *dec.node_vertices[s].choose(&mut r).unwrap();
            let v = *dec.node_vertices[t].choose(&mut r).unwrap();
            let ok = dec.node_portals[t]
                .iter()
                .any(|&p| within(d[u][p] + d[p][v] - 2.0 * delta, d[u][v]));
            if !ok {
                problems.push(format!("graph {k}: snap fails for {u},{v} nodes {s},{t}"));
            }
            done += 1;
            samples += 1;
        }
        planar_flp::decomp::check_portal_snap(&dec, &|a, b| d[a][b], 1000, k, &mut lib);
    }
    let lib_failed = lib.count("portal-snap").failed + lib.count("portal-cover").failed;
    verdict(
        problems.is_empty() && lib_failed == 0,
        format!(
            "100 paths, {families} normal families, {samples} snap triples, {} failures, {lib_failed} recorded failures {}",
            problems.len(),
            problems.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    )
}

/// A ring instance on a small generated graph whose radius forces several
/// distance rings.
fn surgery_ring(seed: u64) -> (RingInstance, f64) {
    let inst = micro_instance(8_000 + seed, 12, 6);
    let d = floyd(&inst.graph);
    let mut r = rng(9_000 + seed);
    let eps = [0.5, 0.34, 0.25][r.gen_range(0..3)];
    let q = (1.0 / eps as f64).ceil();
    let far = d[0]
        .iter()
        .copied()
        .filter(|x| x.is_finite())
        .fold(0.0, f64::max);
    let radius = far / (8.0 * q * r.gen_range(1..=4) as f64) + 1e-3;
    let nf = inst.facilities.len();
    let mut dcirc: Vec<usize> = (0..nf).filter(|_| r.gen_bool(0.6)).collect();
    if dcirc.is_empty() {
        dcirc.push(0);
    }
    let mut clusters = vec![Vec::new(); dcirc.len()];
    for (c, cl) in inst.clients.iter().enumerate() {
        let k = (0..dcirc.len())
            .min_by(|&a, &b| {
                let da = d[cl.vertex][inst.facilities[dcirc[a]].vertex];
                let db = d[cl.vertex][inst.facilities[dcirc[b]].vertex];
                da.total_cmp(&db)
            })
            .unwrap();
        clusters[k].push(c);
    }
    let ring = RingInstance {
        fac_ids: (0..nf).collect(),
        client_ids: (0..inst.clients.len()).collect(),
        dcirc,
        clusters,
        r: radius,
        inst,
    };
    (ring, eps)
}

fn criterion_6(run2: &Checks) -> Verdict {
    let mut problems = Vec::new();
    let (mut graphs, mut multi) = (0, 0);
    let mut checks = Checks::default();
    for seed in 0..100u64 {
        let (ring, eps) = surgery_ring(seed);
        let g = &ring.inst.graph;
        let dg = floyd(g);
        let width = 8.0 * ring.r;
        let layer: Vec<i64> = dg[0].iter().map(|&x| (x / width).floor() as i64).collect();
        let dr = distance_rings(&ring, eps, &mut checks);
        let q = dr.q;
        let contrib: Vec<f64> = ring
            .dcirc
            .iter()
            .zip(&ring.clusters)
            .map(|(&f, cl)| {
                let fv = ring.inst.facilities[f].vertex;
                ring.inst.facilities[f].cost
                    + cl.iter()
                        .map(|&c| {
                            let c = ring.inst.clients[c];
                            c.mult as f64 * dg[c.vertex][fv]
                        })
                        .sum::<f64>()
            })
            .collect();
        let m: f64 = contrib.iter().sum();
        let class = |a: i64| -> f64 {
            ring.dcirc
                .iter()
                .zip(&contrib)
                .filter(|(&f, _)| (layer[ring.inst.facilities[f].vertex] - a).rem_euclid(q) == 0)
                .map(|(_, x)| x)
                .sum()
        };
        let best = (0..q).map(class).fold(f64::INFINITY, f64::min);
        let a_ok = (0..dr.a).all(|a| class(a) > best) && within(class(dr.a), best);
        if !a_ok || !within(class(dr.a), eps * m) {
            problems.push(format!("ring {seed}: isolation"));
        }
        let ring_of = |v: usize| {
            let i = layer[v] - dr.a;
            (i.rem_euclid(q) != 0).then(|| i.div_euclid(q))
        };
        let ids: BTreeSet<i64> = (0..g.n()).filter_map(ring_of).collect();
        if ids.len() > 1 {
            multi += 1;
        }
        for u in 0..g.n() {
            for v in 0..g.n() {
                if let (Some(a), Some(b)) = (ring_of(u), ring_of(v)) {
                    if a != b && dg[u][v] <= width {
                        problems.push(format!("ring {seed}: rings {a},{b} within 8r"));
                    }
                }
            }
        }
        for &j in dr.rings.keys() {
            graphs += 1;
            let rg = build_ring_graph(&ring, &dr, j, CheckLevel::Full, &mut checks);
            let dh = floyd(&rg.graph);
            let (lo, hi) = (j * q + dr.a, (j + 1) * q + dr.a);
            let exact: Vec<usize> = (0..g.n())
                .filter(|&v| v == 0 || (layer[v] >= lo && layer[v] <= hi))
                .collect();
            for &v in &exact {
                let Some(hv) = rg.vmap[v] else {
                    problems.push(format!("ring {seed}/{j}: vertex {v} dropped"));
                    continue;
                };
                if (dh[rg.s][hv] - dg[0][v]).abs() > 1e-9 * (1.0 + dg[0][v]) {
                    problems.push(format!("ring {seed}/{j}: P2 at {v}"));
                }
                for &u in &exact {
                    let hu = rg.vmap[u].unwrap();
                    if !within(dg[u][v], dh[hu][hv]) {
                        problems.push(format!("ring {seed}/{j}: P1 at {u},{v}"));
                    }
                    if ring_of(u) == Some(j)
                        && dg[u][v] <= 3.0 * ring.r
                        && (dh[hu][hv] - dg[u][v]).abs() > 1e-9 * (1.0 + dg[u][v])
                    {
                        problems.push(format!("ring {seed}/{j}: P3 at {u},{v}"));
                    }
                }
            }
            for u in (0..g.n()).filter(|&u| ring_of(u) == Some(j)) {
                for v in 0..g.n() {
                    if dg[u][v] <= 3.0 * ring.r && rg.vmap[v].is_none() {
                        problems.push(format!("ring {seed}/{j}: near vertex {v} removed"));
                    }
                }
            }
        }
    }
    let tags = [
        "ring-no-shortcut",
        "ring-root-distance",
        "ring-local-distance",
        "rings-separated",
        "isolation",
    ];
    let mut lib = checks.clone();
    lib.merge(run2.clone());
    let lib_failed: u64 = tags.iter().map(|t| lib.count(t).failed).sum();
    verdict(
        problems.is_empty() && lib_failed == 0,
        format!(
            "100 ring instances ({multi} with several rings), {graphs} ring graphs, {} failures, {lib_failed} recorded failures {}",
            problems.len(),
            problems.iter().take(3).cloned().collect::<Vec<_>>().join("; ")
        ),
    )
}

/// Ring instances exactly as the pipeline builds them.
fn pipeline_rings(inst: &FlInstance, checks: &mut Checks) -> Vec<RingSpec> {
    let m0 = CostModel::new(inst);
    let base = constant_factor_approx(&m0).unwrap();
    let pre = preprocess_scale(inst, EPS, base.cost());
    let model = CostModel::new(&pre.inst);
    let robust = build_robust(&model, EPS).unwrap();
    let conc = concentrate(&pre.inst, &model, &robust, EPS, checks).unwrap();
    let cm = CostModel::new(&conc.inst);
    let lay = magnitude_layers(&conc, &cm, EPS, checks);
    match ring_instances(&conc, &cm, &lay, ConstantsMode::Strict, checks) {
        Ok(s) => s,
        Err(FlError::StrictInfeasible(_)) => {
            ring_instances(&conc, &cm, &lay, ConstantsMode::Capped, checks).unwrap()
        }
        Err(e) => panic!("{e}"),
    }
}

fn criterion_7(instances: &[FlInstance], run2: &Checks) -> Verdict {
    let mut problems = Vec::new();
    let mut merges = 0;
    let mut checks = Checks::default();
    let cfg = RingSolveConfig::new(EPS * EPS / 11.0, CheckLevel::Full);
    for (i, inst) in instances.iter().enumerate() {
        for spec in pipeline_rings(inst, &mut checks) {
            for part in trim_to_reach(&spec.ring, &mut checks) {
                let dr = distance_rings(&part, cfg.eps, &mut checks);
                let mut per_ring = BTreeMap::new();
                let mut ring_sum = 0.0;
                for (&j, band) in &dr.rings {
                    if band.clients.is_empty() {
                        continue;
                    }
                    let rg = build_ring_graph(&part, &dr, j, cfg.level, &mut checks);
                    let ri = rg.instance(&part);
                    let dist = ri.graph.all_pairs();
                    let dcirc: Vec<usize> = rg
                        .dcirc
                        .iter()
                        .filter_map(|f| rg.facilities.binary_search(f).ok())
                        .collect();
                    let params = cfg.params(part.r, ri.graph.n());
                    let dec = decompose(&ri.graph, rg.s, params.normal.d, &mut checks);
                    let res =
                        solve_ring_dp(&ri, &dist, &dcirc, &dec, &params, cfg.level, &mut checks);
                    ring_sum += cost_of(&ri, &floyd(&ri.graph), &res.open, 1.0);
                    let sol: Vec<usize> = res.open.iter().map(|&k| rg.facilities[k]).collect();
                    per_ring.insert(j, (rg, sol));
                }
                let merged =
                    merge_ring_dp_solutions(&part, &dr, cfg.eps, &per_ring, &mut checks).unwrap();
                let dp = floyd(&part.inst.graph);
                let m: f64 = part
                    .dcirc
                    .iter()
                    .zip(&part.clusters)
                    .map(|(&f, cl)| {
                        let fv = part.inst.facilities[f].vertex;
                        part.inst.facilities[f].cost
                            + cl.iter()
                                .map(|&c| {
                                    let c = part.inst.clients[c];
                                    c.mult as f64 * dp[c.vertex][fv]
                                })
                                .sum::<f64>()
                    })
                    .sum();
                merges += 1;
                let cost = cost_of(&part.inst, &dp, &merged, 1.0);
                if !within(cost, cfg.eps * m + ring_sum) {
                    problems.push(format!(
                        "instance {i}: merged {cost} > {} + {ring_sum}",
                        cfg.eps * m
                    ));
                }
            }
        }
    }
    let mut lib = checks.clone();
    lib.merge(run2.clone());
    let combine = lib.count("combine");
    let sep = lib.count("layering-separation");
    verdict(
        problems.is_empty() && combine.failed == 0 && sep.failed == 0 && combine.passed > 0,
        format!(
            "{merges} merges re-evaluated, combine {}/{} and layering-separation {}/{} recorded checks passed {}",
            combine.passed,
            combine.passed + combine.failed,
            sep.passed,
            sep.passed + sep.failed,
            problems.join("; ")
        ),
    )
}

fn criterion_8() -> Verdict {
    let mut problems = Vec::new();
    let (mut worst_base, mut worst_ls, mut min_ls) = (1.0f64, 1.0f64, f64::INFINITY);
    for seed in 0..100u64 {
        let inst = micro_instance(10_000 + seed, 16, 10);
        let d = floyd(&inst.graph);
        let (opt, _) = brute_opt(&inst, &d);
        let model = CostModel::new(&inst);
        let base = cost_of(
            &inst,
            &d,
            &constant_factor_approx(&model).unwrap().open_set,
            1.0,
        );
        let ls = cost_of(&inst, &d, &local_search(&model, 2).unwrap().open_set, 1.0);
        let (rb, rl) = if opt > 0.0 {
            (base / opt, ls / opt)
        } else {
            (1.0, 1.0)
        };
        worst_base = worst_base.max(rb);
        worst_ls = worst_ls.max(rl);
        min_ls = min_ls.min(rl);
        if !within(base, 3.0 * opt) {
            problems.push(format!("seed {seed}: baseline ratio {rb}"));
        }
        if !within(opt, ls) {
            problems.push(format!("seed {seed}: local search below optimum"));
        }
    }
    verdict(
        problems.is_empty(),
        format!(
            "100 instances, baseline worst ratio {worst_base:.4}, local search ratio in [{min_ls:.4}, {worst_ls:.4}] {}",
            problems.join("; ")
        ),
    )
}

#[test]
fn acceptance() {
    let mut results: Vec<(usize, &str, Verdict)> = Vec::new();
    results.push((1, "leaf DP equals exhaustive search", criterion_1()));
    let run2 = criterion_2();
    results.push((2, "end-to-end approximation bound", run2.verdict));
    results.push((3, "robust solution contract", criterion_3(&run2.instances)));
    results.push((4, "decomposition tree properties", criterion_4()));
    results.push((5, "portals and normal functions", criterion_5()));
    results.push((6, "ring graph surgery", criterion_6(&run2.checks)));
    results.push((
        7,
        "combination inequalities",
        criterion_7(&run2.instances, &run2.checks),
    ));
    results.push((8, "baseline and local search ratios", criterion_8()));
    for (id, name, v) in &results {
        println!(
            "{} criterion {id}: {name}: {}",
            if v.ok { "PASS" } else { "FAIL" },
            v.detail.trim_end()
        );
    }
    let failed: Vec<usize> = results
        .iter()
        .filter(|(_, _, v)| !v.ok)
        .map(|(id, _, _)| *id)
        .collect();
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
