//! Planar decomposition of a ring graph: triangulation, shortest-path and
//! dual trees, the hierarchical block tree and portals on tree paths.

pub mod dual;
pub mod normal;
pub mod portals;
pub mod tree;
pub mod triangulate;

use std::collections::BTreeMap;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub use dual::{build_dual_trees, DualTrees};
pub use normal::{enumerate_normal, NormalParams, INF_LEVEL};
pub use portals::place_portals;
pub use tree::{build_decomposition, DecompTree};
pub use triangulate::{triangulate, FaceStructure};

use crate::checks::Checks;
use crate::graph::EmbeddedGraph;

/// Portal spacing for a graph with `n` vertices.
pub fn default_spacing(eps: f64, n: usize) -> f64 {
    eps / (n.max(2) as f64).log2()
}

#[derive(Clone, Debug)]
pub struct Decomposition {
    pub fs: FaceStructure,
    pub dual: DualTrees,
    pub tree: DecompTree,
    pub spacing: f64,
    /// Portals of the tree path of every boundary vertex.
    pub vertex_portals: BTreeMap<usize, Vec<usize>>,
    pub node_portals: Vec<Vec<usize>>,
    /// Vertices whose assigned face lies in the node's block.
    pub node_vertices: Vec<Vec<usize>>,
}

impl Decomposition {
    pub fn path(&self, v: usize) -> Vec<usize> {
        let mut p = self.fs.graph.tree_path(&self.dual.tree, v);
        p.reverse();
        p
    }
}

pub fn decompose(g: &EmbeddedGraph, s: usize, spacing: f64, checks: &mut Checks) -> Decomposition {
    let fs = triangulate(g);
    let dual = build_dual_trees(&fs, s, checks);
    let tree = build_decomposition(&dual, checks);

    let mut vertex_portals = BTreeMap::new();
    let mut node_portals = Vec::with_capacity(tree.nodes.len());
    for node in &tree.nodes {
        let mut pis = Vec::new();
        for &a in &node.beta {
            let e = &fs.graph.edges[dual.arcs[a].edge];
            for v in [e.u, e.v] {
                let entry = vertex_portals.entry(v).or_insert_with(|| {
                    let mut path = fs.graph.tree_path(&dual.tree, v);
                    path.reverse();
                    place_portals(&path, &dual.tree.dist, spacing)
                });
                pis.extend(entry.iter().copied());
            }
        }
        pis.sort_unstable();
        pis.dedup();
        node_portals.push(pis);
    }

    let mut by_face: Vec<Vec<usize>> = vec![Vec::new(); dual.n_faces];
    for (u, &f) in fs.xi.iter().enumerate() {
        by_face[f].push(u);
    }
    let node_vertices = tree
        .nodes
        .iter()
        .map(|n| {
            let mut vs: Vec<usize> = n
                .block
                .iter()
                .flat_map(|&f| by_face[f].iter().copied())
                .collect();
            vs.sort_unstable();
            vs
        })
        .collect();

    let d = Decomposition {
        fs,
        dual,
        tree,
        spacing,
        vertex_portals,
        node_portals,
        node_vertices,
    };
    check_portal_covering(&d, checks);
    d
}

/// Every vertex of each portalized path lies within the spacing of a portal,
/// the source is a portal and the count respects the length bound.
pub fn check_portal_covering(d: &Decomposition, checks: &mut Checks) {
    let dist = &d.dual.tree.dist;
    for (&v, portals) in &d.vertex_portals {
        let path = d.path(v);
        let radius = portals::covering_radius(&path, dist, portals);
        let len = path.get(1).map_or(0.0, |&u| dist[v] - dist[u]);
        let ok = radius <= d.spacing * (1.0 + 1e-9)
            && portals.contains(&d.dual.s)
            && portals.len() as f64 <= len / d.spacing + 2.0 + 1e-9;
        checks.record("portal-cover", ok, || {
            format!(
                "vertex {v}: radius {radius}, {} portals, length {len}",
                portals.len()
            )
        });
    }
}

/// Samples vertex pairs from unrelated nodes and checks that some portal of
/// the second node lies on a near-shortest route between them.
pub fn check_portal_snap(
    d: &Decomposition,
    dist: &dyn Fn(usize, usize) -> f64,
    samples: usize,
    seed: u64,
    checks: &mut Checks,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let nodes: Vec<usize> = (0..d.tree.nodes.len())
        .filter(|&t| !d.node_vertices[t].is_empty())
        .collect();
    if nodes.len() < 2 {
        return;
    }
    let mut done = 0;
    let mut tries = 0;
    while done < samples && tries < samples * 20 {
        tries += 1;
        let s = nodes[rng.gen_range(0..nodes.len())];
        let t = nodes[rng.gen_range(0..nodes.len())];
        if d.tree.is_ancestor(s, t) || d.tree.is_ancestor(t, s) {
            continue;
        }
        let us = &d.node_vertices[s];
        let vs = &d.node_vertices[t];
        let u = us[rng.gen_range(0..us.len())];
        let v = vs[rng.gen_range(0..vs.len())];
        let duv = dist(u, v);
        let ok = d.node_portals[t]
            .iter()
            .any(|&p| duv + 2.0 * d.spacing * (1.0 + 1e-9) + 1e-9 * duv >= dist(u, p) + dist(p, v));
        checks.record("portal-snap", ok, || {
            format!("nodes {s},{t} vertices {u},{v}")
        });
        done += 1;
    }
}
