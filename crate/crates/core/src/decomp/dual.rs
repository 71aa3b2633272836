use std::collections::VecDeque;

use super::triangulate::FaceStructure;
use crate::checks::Checks;
use crate::graph::{edge_of, Sssp};

/// An oriented dual edge crossing primal edge `edge` from face `from` to `to`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Arc {
    pub from: usize,
    pub to: usize,
    pub edge: usize,
}

#[derive(Clone, Debug)]
pub struct DualTrees {
    pub s: usize,
    pub tree: Sssp,
    pub in_tree: Vec<bool>,
    /// Arcs `2k` and `2k + 1` are the two orientations of the k-th dual edge.
    pub arcs: Vec<Arc>,
    /// Per face: `(neighbour face, arc leaving this face)`.
    pub adj: Vec<Vec<(usize, usize)>>,
    pub n_faces: usize,
    parent: Vec<Option<usize>>,
    tin: Vec<usize>,
    tout: Vec<usize>,
}

pub fn reverse(a: usize) -> usize {
    a ^ 1
}

impl DualTrees {
    fn in_subtree(&self, x: usize, root: usize) -> bool {
        self.tin[root] <= self.tin[x] && self.tout[x] <= self.tout[root]
    }

    /// Whether face `x` lies on the `to` side of arc `a`.
    pub fn in_l(&self, a: usize, x: usize) -> bool {
        let Arc { from, to, .. } = self.arcs[a];
        if self.parent[to] == Some(from) {
            self.in_subtree(x, to)
        } else {
            !self.in_subtree(x, from)
        }
    }

    pub fn l_set(&self, a: usize) -> Vec<usize> {
        (0..self.n_faces).filter(|&x| self.in_l(a, x)).collect()
    }

    /// Faces on the inner side of every arc in `beta`.
    pub fn region(&self, beta: &[usize]) -> Vec<usize> {
        (0..self.n_faces)
            .filter(|&x| beta.iter().all(|&a| self.in_l(a, x)))
            .collect()
    }
}

/// Shortest-path tree from `s` and the dual spanning tree formed by the
/// remaining edges, rooted at face 0.
pub fn build_dual_trees(fs: &FaceStructure, s: usize, checks: &mut Checks) -> DualTrees {
    let g = &fs.graph;
    let tree = g.sssp(s);
    let mut in_tree = vec![false; g.m()];
    for d in tree.parent.iter().flatten() {
        in_tree[edge_of(*d)] = true;
    }
    let reached = tree.dist.iter().filter(|d| d.is_finite()).count();
    let tree_edges = in_tree.iter().filter(|&&b| b).count();
    checks.record(
        "sp-tree",
        reached == g.n() && tree_edges + 1 == g.n(),
        || {
            format!(
                "reached {reached} of {} with {tree_edges} tree edges",
                g.n()
            )
        },
    );

    let n_faces = fs.n_faces();
    let mut arcs = Vec::new();
    let mut adj = vec![Vec::new(); n_faces];
    for e in 0..g.m() {
        if in_tree[e] {
            continue;
        }
        let (f1, f2) = (fs.face_of[2 * e], fs.face_of[2 * e + 1]);
        let k = arcs.len();
        arcs.push(Arc {
            from: f1,
            to: f2,
            edge: e,
        });
        arcs.push(Arc {
            from: f2,
            to: f1,
            edge: e,
        });
        adj[f1].push((f2, k));
        adj[f2].push((f1, k + 1));
    }

    let mut parent = vec![None; n_faces];
    let mut seen = vec![false; n_faces];
    let mut order = Vec::with_capacity(n_faces);
    let mut queue = VecDeque::from([0]);
    seen[0] = true;
    let mut acyclic = true;
    while let Some(f) = queue.pop_front() {
        order.push(f);
        for &(h, _) in &adj[f] {
            if !seen[h] {
                seen[h] = true;
                parent[h] = Some(f);
                queue.push_back(h);
            } else if parent[f] != Some(h) {
                acyclic = false;
            }
        }
    }
    let spanning = order.len() == n_faces;
    checks.record(
        "dual-tree",
        spanning && acyclic && arcs.len() + 2 == 2 * n_faces,
        || format!("{} dual edges over {n_faces} faces", arcs.len() / 2),
    );

    let mut tin = vec![0; n_faces];
    let mut tout = vec![0; n_faces];
    let mut clock = 0;
    let mut stack = vec![(0usize, 0usize)];
    tin[0] = clock;
    while let Some((f, i)) = stack.pop() {
        if let Some(&(h, _)) = adj[f].get(i) {
            stack.push((f, i + 1));
            if parent[h] == Some(f) {
                clock += 1;
                tin[h] = clock;
                stack.push((h, 0));
            }
        } else {
            tout[f] = clock;
        }
    }
    DualTrees {
        s,
        tree,
        in_tree,
        arcs,
        adj,
        n_faces,
        parent,
        tin,
        tout,
    }
}

/// Checks that every arc splits the faces into its two sides.
pub fn check_arc_partition(dt: &DualTrees, checks: &mut Checks) {
    for a in (0..dt.arcs.len()).step_by(2) {
        let fwd = dt.l_set(a);
        let back = dt.l_set(reverse(a));
        let disjoint = fwd.iter().all(|x| back.binary_search(x).is_err());
        let ok = disjoint && fwd.len() + back.len() == dt.n_faces;
        checks.record("arc-partition", ok, || format!("arc {a}"));
    }
}
