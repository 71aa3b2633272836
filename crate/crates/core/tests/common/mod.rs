//! Reference computations that share no code with the library beyond the
//! instance types.

#![allow(dead_code)]

use planar_flp::generate::{generate, GenKind, GenParams};
use planar_flp::{EmbeddedGraph, FlInstance};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// All-pairs distances by Floyd–Warshall over non-sentinel edges.
pub fn floyd(g: &EmbeddedGraph) -> Vec<Vec<f64>> {
    let n = g.n();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for e in g.edges.iter().filter(|e| !e.sentinel) {
        if e.w < d[e.u][e.v] {
            d[e.u][e.v] = e.w;
            d[e.v][e.u] = e.w;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

/// Opening plus weighted connection cost of `set`, with per-facility opening
/// costs multiplied by `open_scale`.
pub fn cost_of(inst: &FlInstance, d: &[Vec<f64>], set: &[usize], open_scale: f64) -> f64 {
    let open: f64 = set
        .iter()
        .map(|&f| open_scale * inst.facilities[f].cost)
        .sum();
    let conn: f64 = inst
        .clients
        .iter()
        .map(|c| {
            let best = set
                .iter()
                .map(|&f| d[c.vertex][inst.facilities[f].vertex])
                .fold(f64::INFINITY, f64::min);
            c.mult as f64 * best
        })
        .sum();
    open + conn
}

/// Optimum over all nonempty facility subsets.
pub fn brute_opt(inst: &FlInstance, d: &[Vec<f64>]) -> (f64, Vec<usize>) {
    let nf = inst.facilities.len();
    assert!(nf <= 16);
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 1u32..(1 << nf) {
        let set: Vec<usize> = (0..nf).filter(|&f| mask >> f & 1 == 1).collect();
        let c = cost_of(inst, d, &set, 1.0);
        if c < best.0 {
            best = (c, set);
        }
    }
    best
}

pub fn within(a: f64, b: f64) -> bool {
    a <= b + 1e-9 * (1.0 + b.abs())
}

/// Small random instance of one of the three generator families.
pub fn micro_instance(seed: u64, max_vertices: usize, max_facilities: usize) -> FlInstance {
    let mut r = rng(seed ^ 0x5eed);
    let kind = match seed % 3 {
        0 => {
            let rows = r.gen_range(2..=3);
            let cols = r.gen_range(2..=(max_vertices / rows).max(2));
            GenKind::Grid { rows, cols }
        }
        1 => GenKind::Wheel {
            rim: r.gen_range(3..max_vertices),
        },
        _ => GenKind::DelaunayLike {
            points: r.gen_range(4..=max_vertices),
        },
    };
    let n = match kind {
        GenKind::Grid { rows, cols } => rows * cols,
        GenKind::Wheel { rim } => rim + 1,
        GenKind::DelaunayLike { points } => points,
    };
    let facilities = r.gen_range(1..=max_facilities.min(n));
    let clients = r.gen_range(1..=8);
    let mut p = GenParams::new(kind, clients, facilities);
    p.max_mult = r.gen_range(1..=3);
    generate(&p, seed).expect("valid generator parameters")
}
