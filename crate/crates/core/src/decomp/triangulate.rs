use std::collections::HashSet;

use crate::graph::{twin, EmbeddedGraph};
use crate::num::INF;

/// A triangulated embedding with its faces and a face chosen per vertex.
#[derive(Clone, Debug)]
pub struct FaceStructure {
    pub graph: EmbeddedGraph,
    /// Dart walks of the faces.
    pub faces: Vec<Vec<usize>>,
    pub face_of: Vec<usize>,
    /// Face assigned to each vertex: the face of its first rotation dart.
    pub xi: Vec<usize>,
    pub added: usize,
}

impl FaceStructure {
    pub fn n_faces(&self) -> usize {
        self.faces.len().max(1)
    }
}

fn adjacent(g: &EmbeddedGraph, a: usize, b: usize) -> bool {
    g.neighbours(a).any(|x| x == b)
}

/// Cuts ears off every face longer than three darts with non-traversable
/// chords. Chords between non-adjacent vertices are preferred.
pub fn triangulate(h: &EmbeddedGraph) -> FaceStructure {
    let mut g = h.clone();
    let (faces, _) = g.faces();
    let mut added = 0;
    for face in faces {
        let mut walk = face;
        while walk.len() > 3 {
            let k = walk.len();
            let tails: Vec<usize> = walk.iter().map(|&d| g.tail(d)).collect();
            let mut pick = None;
            let mut fallback = None;
            let mut seen_pairs = HashSet::new();
            for i in 0..k {
                let prev = tails[(i + k - 1) % k];
                let next = tails[(i + 1) % k];
                if prev == next || !seen_pairs.insert((prev.min(next), prev.max(next))) {
                    continue;
                }
                if !adjacent(&g, prev, next) {
                    pick = Some(i);
                    break;
                }
                if fallback.is_none() {
                    fallback = Some(i);
                }
            }
            let Some(i) = pick.or(fallback) else { break };
            let a = walk[(i + 1) % k];
            let b = walk[(i + k - 1) % k];
            let e = g.add_chord(a, b, INF, true);
            added += 1;
            // Remaining face: the new dart leaving tail(b), then a and onwards.
            let mut rest = Vec::with_capacity(k - 1);
            rest.push(twin(2 * e));
            let mut j = (i + 1) % k;
            while j != (i + k - 1) % k {
                rest.push(walk[j]);
                j = (j + 1) % k;
            }
            walk = rest;
        }
    }
    let (faces, face_of) = g.faces();
    let xi = (0..g.n())
        .map(|u| g.rotation(u).first().map_or(0, |&d| face_of[d]))
        .collect();
    FaceStructure {
        graph: g,
        faces,
        face_of,
        xi,
        added,
    }
}
