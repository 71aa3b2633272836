//! Seeded generators of embedded planar instances.

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{FlError, Result};
use crate::graph::EmbeddedGraph;
use crate::instance::{Client, Facility, FlInstance};
use crate::io::rotation_from_coords;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GenKind {
    Grid {
        rows: usize,
        cols: usize,
    },
    Wheel {
        rim: usize,
    },
    /// Greedy planar triangulation of random points.
    DelaunayLike {
        points: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenParams {
    pub kind: GenKind,
    pub clients: usize,
    pub facilities: usize,
    pub open_min: f64,
    pub open_max: f64,
    pub max_mult: u64,
}

impl GenParams {
    pub fn new(kind: GenKind, clients: usize, facilities: usize) -> Self {
        GenParams {
            kind,
            clients,
            facilities,
            open_min: 1.0,
            open_max: 5.0,
            max_mult: 1,
        }
    }
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn segments_cross(p: [f64; 2], q: [f64; 2], r: [f64; 2], s: [f64; 2]) -> bool {
    let orient = |a: [f64; 2], b: [f64; 2], c: [f64; 2]| {
        (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    };
    let (o1, o2) = (orient(p, q, r), orient(p, q, s));
    let (o3, o4) = (orient(r, s, p), orient(r, s, q));
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

fn greedy_triangulation(xy: &[[f64; 2]]) -> Vec<(usize, usize, f64)> {
    let n = xy.len();
    let len =
        |a: usize, b: usize| ((xy[a][0] - xy[b][0]).powi(2) + (xy[a][1] - xy[b][1]).powi(2)).sqrt();
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    pairs.sort_by(|&(a, b), &(c, d)| len(a, b).total_cmp(&len(c, d)).then((a, b).cmp(&(c, d))));
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    for (a, b) in pairs {
        let blocked = edges.iter().any(|&(c, d, _)| {
            let shared = a == c || a == d || b == c || b == d;
            !shared && segments_cross(xy[a], xy[b], xy[c], xy[d])
        }) || (0..n).any(|k| {
            // A point lying on the open segment would break planarity.
            k != a && k != b && {
                let (p, q, r) = (xy[a], xy[b], xy[k]);
                let cross = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
                let dot = (r[0] - p[0]) * (q[0] - p[0]) + (r[1] - p[1]) * (q[1] - p[1]);
                cross.abs() < 1e-12 && dot > 0.0 && dot < len(a, b).powi(2)
            }
        });
        if !blocked {
            edges.push((a, b, round3(len(a, b)).max(0.001)));
        }
    }
    edges
}

pub fn generate(params: &GenParams, seed: u64) -> Result<FlInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (xy, edges, label): (Vec<[f64; 2]>, Vec<(usize, usize, f64)>, String) = match params.kind {
        GenKind::Grid { rows, cols } => {
            if rows == 0 || cols == 0 {
                return Err(FlError::BadParams(format!("{rows}x{cols} grid")));
            }
            let id = |r: usize, c: usize| r * cols + c;
            let xy = (0..rows * cols)
                .map(|v| [(v % cols) as f64, (v / cols) as f64])
                .collect();
            let mut edges = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    if c + 1 < cols {
                        edges.push((id(r, c), id(r, c + 1), round3(rng.gen_range(1.0..2.0))));
                    }
                    if r + 1 < rows {
                        edges.push((id(r, c), id(r + 1, c), round3(rng.gen_range(1.0..2.0))));
                    }
                }
            }
            (xy, edges, format!("grid {rows}x{cols} seed {seed}"))
        }
        GenKind::Wheel { rim } => {
            if rim < 3 {
                return Err(FlError::BadParams(format!("wheel with {rim} rim vertices")));
            }
            let mut xy = vec![[0.0, 0.0]];
            for i in 0..rim {
                let t = std::f64::consts::TAU * i as f64 / rim as f64;
                xy.push([round3(10.0 * t.cos()), round3(10.0 * t.sin())]);
            }
            let mut edges = Vec::new();
            for i in 1..=rim {
                edges.push((0, i, round3(rng.gen_range(1.0..2.0))));
                edges.push((i, i % rim + 1, round3(rng.gen_range(1.0..2.0))));
            }
            (xy, edges, format!("wheel {rim} seed {seed}"))
        }
        GenKind::DelaunayLike { points } => {
            if points < 3 {
                return Err(FlError::BadParams(format!("{points} points")));
            }
            let xy: Vec<[f64; 2]> = (0..points)
                .map(|_| {
                    [
                        round3(rng.gen_range(0.0..10.0)),
                        round3(rng.gen_range(0.0..10.0)),
                    ]
                })
                .collect();
            let edges = greedy_triangulation(&xy);
            (xy, edges, format!("delaunay-like {points} seed {seed}"))
        }
    };
    let n = xy.len();
    if params.facilities > n {
        return Err(FlError::BadParams(format!(
            "{} facilities on {n} vertices",
            params.facilities
        )));
    }
    if params.open_min < 0.0 || params.open_min > params.open_max || params.max_mult == 0 {
        return Err(FlError::BadParams(
            "opening cost range or multiplicity".into(),
        ));
    }
    let rotation = rotation_from_coords(n, &edges, &xy);
    let graph = EmbeddedGraph::from_rotation(n, &edges, &rotation).map_err(FlError::Invalid)?;
    let clients = (0..params.clients)
        .map(|_| Client {
            vertex: rng.gen_range(0..n),
            mult: rng.gen_range(1..=params.max_mult),
        })
        .collect();
    let mut fac_vertices = sample(&mut rng, n, params.facilities).into_vec();
    fac_vertices.sort_unstable();
    let facilities = fac_vertices
        .into_iter()
        .map(|vertex| {
            let cost = if params.open_max > params.open_min {
                round3(rng.gen_range(params.open_min..params.open_max))
            } else {
                params.open_min
            };
            Facility { vertex, cost }
        })
        .collect();
    let inst = FlInstance {
        graph,
        coords: Some(xy),
        clients,
        facilities,
        label,
    };
    inst.validate()?;
    Ok(inst)
}
