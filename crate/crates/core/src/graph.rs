//! Embedded multigraphs stored as rotation systems over darts.
//!
//! Edge `e` owns darts `2e` (from `u` to `v`) and `2e + 1` (from `v` to `u`).
//! Each vertex keeps its darts in counter-clockwise order. Faces are traced by
//! `next(d) = successor of twin(d) in the rotation at head(d)`.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use ordered_float::OrderedFloat;

use crate::num::INF;

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
    /// Sentinel edges exist only to complete faces and are never traversed.
    pub sentinel: bool,
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct EmbeddedGraph {
    pub edges: Vec<Edge>,
    rot: Vec<Vec<usize>>,
}

#[inline]
pub fn twin(d: usize) -> usize {
    d ^ 1
}

#[inline]
pub fn edge_of(d: usize) -> usize {
    d / 2
}

/// Single-source shortest paths with a deterministic parent choice.
#[derive(Clone, Debug)]
pub struct Sssp {
    pub dist: Vec<f64>,
    /// Dart entering each vertex from its parent, `None` at the source and
    /// at unreachable vertices.
    pub parent: Vec<Option<usize>>,
}

impl EmbeddedGraph {
    pub fn with_vertices(n: usize) -> Self {
        EmbeddedGraph {
            edges: Vec::new(),
            rot: vec![Vec::new(); n],
        }
    }

    /// Builds a graph whose rotation at each vertex lists neighbours in
    /// counter-clockwise order. Requires a simple graph.
    pub fn from_rotation(
        n: usize,
        edges: &[(usize, usize, f64)],
        rotation: &[Vec<usize>],
    ) -> Result<Self, String> {
        if rotation.len() != n {
            return Err("rotation system must list every vertex".into());
        }
        let mut lookup = std::collections::HashMap::new();
        let mut g = EmbeddedGraph::with_vertices(n);
        for (i, &(u, v, w)) in edges.iter().enumerate() {
            lookup.insert((u, v), 2 * i);
            lookup.insert((v, u), 2 * i + 1);
            g.edges.push(Edge {
                u,
                v,
                w,
                sentinel: false,
            });
        }
        for (u, nbrs) in rotation.iter().enumerate() {
            let mut seen = std::collections::HashSet::new();
            for &x in nbrs {
                let d = *lookup
                    .get(&(u, x))
                    .ok_or_else(|| format!("rotation of {u} names non-neighbour {x}"))?;
                if !seen.insert(x) {
                    return Err(format!("rotation of {u} repeats neighbour {x}"));
                }
                g.rot[u].push(d);
            }
        }
        let degree = g.degrees();
        for u in 0..n {
            if degree[u] != g.rot[u].len() {
                return Err(format!("rotation of {u} does not list all incident edges"));
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.rot.len()
    }

    pub fn m(&self) -> usize {
        self.edges.len()
    }

    pub fn tail(&self, d: usize) -> usize {
        let e = &self.edges[edge_of(d)];
        if d % 2 == 0 {
            e.u
        } else {
            e.v
        }
    }

    pub fn head(&self, d: usize) -> usize {
        self.tail(twin(d))
    }

    pub fn rotation(&self, u: usize) -> &[usize] {
        &self.rot[u]
    }

    pub fn neighbours(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.rot[u].iter().map(move |&d| self.head(d))
    }

    fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.n()];
        for e in &self.edges {
            deg[e.u] += 1;
            deg[e.v] += 1;
        }
        deg
    }

    pub fn add_vertex(&mut self) -> usize {
        self.rot.push(Vec::new());
        self.rot.len() - 1
    }

    /// Appends an edge at the end of both rotations.
    pub fn push_edge(&mut self, u: usize, v: usize, w: f64) -> usize {
        let e = self.edges.len();
        self.edges.push(Edge {
            u,
            v,
            w,
            sentinel: false,
        });
        self.rot[u].push(2 * e);
        self.rot[v].push(2 * e + 1);
        e
    }

    fn position(&self, d: usize) -> usize {
        let u = self.tail(d);
        self.rot[u]
            .iter()
            .position(|&x| x == d)
            .expect("dart missing from rotation")
    }

    /// Successor of `d` in the face traversal.
    pub fn next_in_face(&self, d: usize) -> usize {
        let t = twin(d);
        let v = self.tail(t);
        let i = self.position(t);
        self.rot[v][(i + 1) % self.rot[v].len()]
    }

    /// Face boundary walks; `face_of[d]` gives the face containing dart `d`.
    pub fn faces(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let nd = 2 * self.m();
        let mut face_of = vec![usize::MAX; nd];
        let mut pos = vec![0usize; nd];
        for u in 0..self.n() {
            for (i, &d) in self.rot[u].iter().enumerate() {
                pos[d] = i;
            }
        }
        let mut faces = Vec::new();
        for start in 0..nd {
            if face_of[start] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let mut walk = Vec::new();
            let mut d = start;
            loop {
                face_of[d] = id;
                walk.push(d);
                let t = twin(d);
                let v = self.tail(t);
                d = self.rot[v][(pos[t] + 1) % self.rot[v].len()];
                if d == start {
                    break;
                }
            }
            faces.push(walk);
        }
        (faces, face_of)
    }

    pub fn components(&self) -> Vec<usize> {
        let mut comp = vec![usize::MAX; self.n()];
        let mut next = 0;
        for s in 0..self.n() {
            if comp[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            comp[s] = next;
            while let Some(u) = stack.pop() {
                for x in self.neighbours(u).collect::<Vec<_>>() {
                    if comp[x] == usize::MAX {
                        comp[x] = next;
                        stack.push(x);
                    }
                }
            }
            next += 1;
        }
        comp
    }

    /// V − E + F computed per component, where an isolated vertex has one face.
    /// Equals `2 · components` exactly when the rotation system is planar.
    pub fn euler_characteristic(&self) -> (i64, usize) {
        let comp = self.components();
        let k = comp.iter().copied().max().map_or(0, |c| c + 1);
        let (faces, _) = self.faces();
        let isolated = (0..self.n()).filter(|&u| self.rot[u].is_empty()).count();
        let chi = self.n() as i64 - self.m() as i64 + (faces.len() + isolated) as i64;
        (chi, k)
    }

    pub fn is_planar_embedding(&self) -> bool {
        let (chi, k) = self.euler_characteristic();
        chi == 2 * k as i64
    }

    /// Dijkstra over non-sentinel edges. Among equal-length routes the parent
    /// with the lower vertex id wins.
    pub fn sssp(&self, src: usize) -> Sssp {
        self.sssp_multi(&[src])
    }

    pub fn sssp_multi(&self, sources: &[usize]) -> Sssp {
        let n = self.n();
        let mut dist = vec![INF; n];
        let mut parent: Vec<Option<usize>> = vec![None; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        for &s in sources {
            dist[s] = 0.0;
            heap.push(Reverse((OrderedFloat(0.0), s)));
        }
        while let Some(Reverse((OrderedFloat(du), u))) = heap.pop() {
            if done[u] || du > dist[u] {
                continue;
            }
            done[u] = true;
            for &d in &self.rot[u] {
                let e = &self.edges[edge_of(d)];
                if e.sentinel {
                    continue;
                }
                let v = self.head(d);
                if done[v] {
                    continue;
                }
                let nd = du + e.w;
                let better =
                    nd < dist[v] || (nd == dist[v] && parent[v].is_some_and(|p| u < self.tail(p)));
                if better {
                    if nd < dist[v] {
                        heap.push(Reverse((OrderedFloat(nd), v)));
                    }
                    dist[v] = nd;
                    parent[v] = Some(d);
                }
            }
        }
        Sssp { dist, parent }
    }

    /// All-pairs distances, row-major.
    pub fn all_pairs(&self) -> Vec<Vec<f64>> {
        (0..self.n()).map(|s| self.sssp(s).dist).collect()
    }

    /// Inserts a chord between `tail(a)` and `tail(b)`, which must be darts of
    /// one face. The face splits into `[c, b, …]` and `[twin(c), a, …]` where
    /// `c` is the new dart leaving `tail(a)`.
    pub fn add_chord(&mut self, a: usize, b: usize, w: f64, sentinel: bool) -> usize {
        let u = self.tail(a);
        let v = self.tail(b);
        let e = self.edges.len();
        self.edges.push(Edge { u, v, w, sentinel });
        let pa = self.position(a);
        self.rot[u].insert(pa, 2 * e);
        let pb = self.position(b);
        self.rot[v].insert(pb, 2 * e + 1);
        e
    }

    /// Splits edge `e = (u, v)` at distance `w1` from `u`; returns the new vertex.
    pub fn subdivide(&mut self, e: usize, w1: f64) -> usize {
        let Edge { v, w, sentinel, .. } = self.edges[e].clone();
        let x = self.add_vertex();
        let e2 = self.edges.len();
        self.edges.push(Edge {
            u: x,
            v,
            w: w - w1,
            sentinel,
        });
        self.edges[e].v = x;
        self.edges[e].w = w1;
        let pv = self.rot[v]
            .iter()
            .position(|&d| d == 2 * e + 1)
            .expect("dart");
        self.rot[v][pv] = 2 * e2 + 1;
        self.rot[x] = vec![2 * e + 1, 2 * e2];
        x
    }

    /// Keeps the vertices flagged in `keep` and every edge between them.
    /// Returns the subgraph and the old-to-new vertex map.
    pub fn induced(&self, keep: &[bool]) -> (EmbeddedGraph, Vec<Option<usize>>) {
        let mut map = vec![None; self.n()];
        let mut k = 0;
        for u in 0..self.n() {
            if keep[u] {
                map[u] = Some(k);
                k += 1;
            }
        }
        let mut emap = vec![None; self.m()];
        let mut g = EmbeddedGraph::with_vertices(k);
        for (i, e) in self.edges.iter().enumerate() {
            if let (Some(a), Some(b)) = (map[e.u], map[e.v]) {
                emap[i] = Some(g.edges.len());
                g.edges.push(Edge {
                    u: a,
                    v: b,
                    w: e.w,
                    sentinel: e.sentinel,
                });
            }
        }
        for u in 0..self.n() {
            if let Some(nu) = map[u] {
                g.rot[nu] = self.rot[u]
                    .iter()
                    .filter_map(|&d| emap[edge_of(d)].map(|ne| 2 * ne + d % 2))
                    .collect();
            }
        }
        (g, map)
    }

    /// Contracts every edge flagged in `contract` (endpoints merge), then drops
    /// loops and keeps only the first of each group of parallel edges, whose
    /// weight becomes the group minimum. Returns the new graph and vertex map.
    pub fn contract_edges(&self, contract: &[bool]) -> (EmbeddedGraph, Vec<usize>) {
        let mut g = self.clone();
        let n = g.n();
        let mut alive_e = vec![true; g.m()];
        let mut rep: Vec<usize> = (0..n).collect();
        fn find(rep: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while rep[r] != r {
                r = rep[r];
            }
            let mut y = x;
            while rep[y] != r {
                let nx = rep[y];
                rep[y] = r;
                y = nx;
            }
            r
        }
        for e in 0..g.m() {
            if !contract[e] || !alive_e[e] {
                continue;
            }
            let u = g.edges[e].u;
            let v = g.edges[e].v;
            if u == v {
                g.drop_edge(e, &mut alive_e);
                continue;
            }
            // Merge v into u: rotation (a1..ak) after e at u, then (b1..bm) after e at v.
            let pu = g.rot[u].iter().position(|&d| d == 2 * e).expect("dart");
            let pv = g.rot[v].iter().position(|&d| d == 2 * e + 1).expect("dart");
            let ru = g.rot[u].clone();
            let rv = g.rot[v].clone();
            let mut merged = Vec::with_capacity(ru.len() + rv.len());
            for i in 1..ru.len() {
                merged.push(ru[(pu + i) % ru.len()]);
            }
            for i in 1..rv.len() {
                merged.push(rv[(pv + i) % rv.len()]);
            }
            for &d in &rv {
                let f = edge_of(d);
                if d % 2 == 0 {
                    g.edges[f].u = u;
                } else {
                    g.edges[f].v = u;
                }
            }
            g.rot[u] = merged;
            g.rot[v].clear();
            alive_e[e] = false;
            rep[v] = u;
            // Loops created by edges parallel to e.
            let loops: Vec<usize> = g.rot[u]
                .iter()
                .map(|&d| edge_of(d))
                .filter(|&f| g.edges[f].u == g.edges[f].v)
                .collect();
            for f in loops {
                if alive_e[f] {
                    g.drop_edge(f, &mut alive_e);
                }
            }
        }
        // Parallel edges: keep the first, with the minimum weight.
        let mut best: std::collections::HashMap<(usize, usize), usize> = Default::default();
        for e in 0..g.m() {
            if !alive_e[e] {
                continue;
            }
            let (a, b) = (
                g.edges[e].u.min(g.edges[e].v),
                g.edges[e].u.max(g.edges[e].v),
            );
            if a == b {
                g.drop_edge(e, &mut alive_e);
                continue;
            }
            match best.get(&(a, b)) {
                Some(&k) => {
                    let w = g.edges[e].w;
                    if w < g.edges[k].w {
                        g.edges[k].w = w;
                    }
                    g.drop_edge(e, &mut alive_e);
                }
                None => {
                    best.insert((a, b), e);
                }
            }
        }
        let mut vmap = vec![0; n];
        for v in 0..n {
            vmap[v] = find(&mut rep, v);
        }
        let keep: Vec<bool> = (0..n).map(|v| vmap[v] == v).collect();
        let (h, m) = g.without_edges(&alive_e).induced(&keep);
        let vmap = vmap
            .iter()
            .map(|&r| m[r].expect("representative kept"))
            .collect();
        (h, vmap)
    }

    fn drop_edge(&mut self, e: usize, alive: &mut [bool]) {
        alive[e] = false;
        let (u, v) = (self.edges[e].u, self.edges[e].v);
        self.rot[u].retain(|&d| edge_of(d) != e);
        self.rot[v].retain(|&d| edge_of(d) != e);
    }

    fn without_edges(&self, alive: &[bool]) -> EmbeddedGraph {
        let mut emap = vec![None; self.m()];
        let mut g = EmbeddedGraph::with_vertices(self.n());
        for (i, e) in self.edges.iter().enumerate() {
            if alive[i] {
                emap[i] = Some(g.edges.len());
                g.edges.push(e.clone());
            }
        }
        for u in 0..self.n() {
            g.rot[u] = self.rot[u]
                .iter()
                .filter_map(|&d| emap[edge_of(d)].map(|ne| 2 * ne + d % 2))
                .collect();
        }
        g
    }

    /// Multiplies every finite edge weight by `factor`.
    pub fn scaled(&self, factor: f64) -> EmbeddedGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            if !e.sentinel {
                e.w *= factor;
            }
        }
        g
    }

    /// Neighbour lists in rotation order, one per vertex.
    pub fn rotation_neighbours(&self) -> Vec<Vec<usize>> {
        (0..self.n())
            .map(|u| self.neighbours(u).collect())
            .collect()
    }

    /// Vertex path from `v` back to the source of `tree`.
    pub fn tree_path(&self, tree: &Sssp, v: usize) -> Vec<usize> {
        let mut path = vec![v];
        let mut x = v;
        while let Some(d) = tree.parent[x] {
            x = self.tail(d);
            path.push(x);
        }
        path
    }
}
