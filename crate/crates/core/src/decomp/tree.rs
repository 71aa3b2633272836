use std::collections::VecDeque;

use super::dual::DualTrees;
use crate::checks::Checks;

#[derive(Clone, Debug)]
pub struct DecompNode {
    /// Sorted faces of the block.
    pub block: Vec<usize>,
    /// Arcs entering the block from outside.
    pub beta: Vec<usize>,
    pub children: Vec<usize>,
    pub parent: Option<usize>,
    pub depth: usize,
}

#[derive(Clone, Debug)]
pub struct DecompTree {
    /// Node 0 is the root; children always have larger ids than parents.
    pub nodes: Vec<DecompNode>,
}

impl DecompTree {
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.depth).max().unwrap_or(0)
    }

    pub fn is_ancestor(&self, a: usize, mut b: usize) -> bool {
        loop {
            if a == b {
                return true;
            }
            match self.nodes[b].parent {
                Some(p) => b = p,
                None => return false,
            }
        }
    }
}

struct Splitter<'a> {
    dt: &'a DualTrees,
    mark: Vec<u32>,
    stamp: u32,
}

impl Splitter<'_> {
    fn set_block(&mut self, block: &[usize]) {
        self.stamp += 1;
        for &f in block {
            self.mark[f] = self.stamp;
        }
    }

    fn inside(&self, f: usize) -> bool {
        self.mark[f] == self.stamp
    }

    /// Components of the current block after deleting `removed`.
    fn components(&self, block: &[usize], removed: &[usize]) -> Vec<Vec<usize>> {
        let mut comp_of = std::collections::HashMap::new();
        let mut out = Vec::new();
        for &f in block {
            if removed.contains(&f) || comp_of.contains_key(&f) {
                continue;
            }
            let id = out.len();
            let mut comp = vec![f];
            comp_of.insert(f, id);
            let mut q = VecDeque::from([f]);
            while let Some(x) = q.pop_front() {
                for &(y, _) in &self.dt.adj[x] {
                    if self.inside(y) && !removed.contains(&y) && !comp_of.contains_key(&y) {
                        comp_of.insert(y, id);
                        comp.push(y);
                        q.push_back(y);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    fn boundary_size(&self, piece: &[usize]) -> usize {
        piece
            .iter()
            .flat_map(|&x| self.dt.adj[x].iter())
            .filter(|(y, _)| piece.binary_search(y).is_err())
            .count()
    }

    fn pieces(&self, block: &[usize], x: usize, y: usize) -> Vec<Vec<usize>> {
        let removed: Vec<usize> = if x == y { vec![x] } else { vec![x, y] };
        let mut out = self.components(block, &removed);
        for r in removed {
            out.push(vec![r]);
        }
        out.sort();
        out
    }

    fn valid(&self, block: &[usize], pieces: &[Vec<usize>]) -> bool {
        pieces
            .iter()
            .all(|p| 2 * p.len() <= block.len() && self.boundary_size(p) <= 3)
    }

    /// Splits a block of at least two faces into at most seven blocks, each
    /// with at most three boundary edges and at most half the faces.
    fn split(&mut self, block: &[usize]) -> Option<Vec<Vec<usize>>> {
        self.set_block(block);
        let z: Vec<usize> = block
            .iter()
            .copied()
            .filter(|&f| self.dt.adj[f].iter().any(|&(g, _)| !self.inside(g)))
            .collect();
        let xs: Vec<usize> = block
            .iter()
            .copied()
            .filter(|&x| {
                self.components(block, &[x])
                    .iter()
                    .all(|c| c.iter().filter(|f| z.binary_search(f).is_ok()).count() <= 1)
            })
            .collect();
        let ys: Vec<usize> = block
            .iter()
            .copied()
            .filter(|&y| {
                self.components(block, &[y])
                    .iter()
                    .all(|c| 2 * c.len() <= block.len())
            })
            .collect();
        for &x in &xs {
            for &y in &ys {
                let p = self.pieces(block, x, y);
                if p.len() <= 7 && self.valid(block, &p) {
                    return Some(p);
                }
            }
        }
        for &x in block {
            for &y in block {
                let p = self.pieces(block, x, y);
                if p.len() <= 7 && self.valid(block, &p) {
                    return Some(p);
                }
            }
        }
        None
    }

    fn inward_arcs(&self, piece: &[usize]) -> Vec<usize> {
        let mut beta: Vec<usize> = piece
            .iter()
            .flat_map(|&x| self.dt.adj[x].iter())
            .filter(|(y, _)| piece.binary_search(y).is_err())
            .map(|&(_, a)| super::dual::reverse(a))
            .collect();
        beta.sort_unstable();
        beta
    }
}

pub fn build_decomposition(dt: &DualTrees, checks: &mut Checks) -> DecompTree {
    let mut sp = Splitter {
        dt,
        mark: vec![0; dt.n_faces],
        stamp: 0,
    };
    let root = DecompNode {
        block: (0..dt.n_faces).collect(),
        beta: Vec::new(),
        children: Vec::new(),
        parent: None,
        depth: 0,
    };
    let mut nodes = vec![root];
    let mut i = 0;
    while i < nodes.len() {
        if nodes[i].block.len() > 1 {
            let block = nodes[i].block.clone();
            let pieces = match sp.split(&block) {
                Some(p) => p,
                None => {
                    checks.record("block-partition", false, || {
                        format!("no valid split for a block of {} faces", block.len())
                    });
                    block.iter().map(|&f| vec![f]).collect()
                }
            };
            for piece in pieces {
                let id = nodes.len();
                let beta = sp.inward_arcs(&piece);
                nodes.push(DecompNode {
                    block: piece,
                    beta,
                    children: Vec::new(),
                    parent: Some(i),
                    depth: nodes[i].depth + 1,
                });
                nodes[i].children.push(id);
            }
        }
        i += 1;
    }
    let tree = DecompTree { nodes };
    check_tree(dt, &tree, checks);
    tree
}

/// Records the structural properties of the decomposition tree.
pub fn check_tree(dt: &DualTrees, tree: &DecompTree, checks: &mut Checks) {
    let bound = (dt.n_faces.max(1) as f64).log2() + 1e-9;
    let depth = tree.depth();
    checks.record("T1", depth as f64 <= bound, || {
        format!("depth {depth} over {} faces", dt.n_faces)
    });
    let all: Vec<usize> = (0..dt.n_faces).collect();
    checks.record("T3", dt.region(&tree.nodes[0].beta) == all, || {
        "root region".into()
    });
    for (t, node) in tree.nodes.iter().enumerate() {
        checks.record("T2", node.beta.len() <= 3, || {
            format!("node {t} has {} arcs", node.beta.len())
        });
        let region = dt.region(&node.beta);
        checks.record("region", region == node.block, || format!("node {t}"));
        if node.children.is_empty() {
            checks.record("T4", node.block.len() == 1, || format!("leaf {t}"));
            continue;
        }
        let mut union: Vec<usize> = node
            .children
            .iter()
            .flat_map(|&c| tree.nodes[c].block.iter().copied())
            .collect();
        union.sort_unstable();
        let child_beta: Vec<usize> = node
            .children
            .iter()
            .flat_map(|&c| tree.nodes[c].beta.iter().copied())
            .collect();
        let ok = node.children.len() <= 7
            && union == node.block
            && node.beta.iter().all(|a| child_beta.contains(a));
        checks.record("T5", ok, || format!("node {t}"));
    }
}
