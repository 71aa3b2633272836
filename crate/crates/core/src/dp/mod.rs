//! Portal-constrained subproblems over the decomposition tree and the
//! dynamic program that solves a ring graph.

pub mod leaf;
pub mod solve;

pub use leaf::leaf_dp;
pub use solve::{solve_ring, solve_ring_dp, DpParams, RingDpOutcome, RingSolveConfig};

use serde::Serialize;

use crate::instance::FlInstance;
use crate::num::{leq, INF};

/// Facility data and vertex distances of one ring graph.
pub struct DpContext<'a> {
    pub inst: &'a FlInstance,
    /// All-pairs vertex distances.
    pub dist: &'a [Vec<f64>],
}

impl DpContext<'_> {
    pub fn fv(&self, f: usize) -> usize {
        self.inst.facilities[f].vertex
    }

    pub fn cv(&self, c: usize) -> usize {
        self.inst.clients[c].vertex
    }

    pub fn weight(&self, c: usize) -> f64 {
        self.inst.clients[c].mult as f64
    }

    pub fn open(&self, f: usize) -> f64 {
        self.inst.facilities[f].cost
    }

    pub fn n_facilities(&self) -> usize {
        self.inst.facilities.len()
    }

    fn dist_to_set(&self, v: usize, r: &[usize]) -> f64 {
        r.iter()
            .map(|&f| self.dist[v][self.fv(f)])
            .fold(INF, f64::min)
    }
}

/// Clients to serve, portal vertices, and per-portal requests and
/// predictions (`INF` when absent).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GenInstance {
    pub clients: Vec<usize>,
    pub portals: Vec<usize>,
    pub req: Vec<f64>,
    pub pred: Vec<f64>,
}

impl GenInstance {
    pub fn plain(clients: Vec<usize>) -> Self {
        GenInstance {
            clients,
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum Provenance {
    Leaf,
    Combined { subset: Vec<usize> },
    Fallback,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DpEntry {
    pub open: Vec<usize>,
    pub cost: f64,
    pub provenance: Provenance,
}

/// Cheapest way for client `c` to reach an open facility or a predicted one
/// through a portal.
pub fn conn_cost(ctx: &DpContext, k: &GenInstance, c: usize, r: &[usize]) -> f64 {
    let v = ctx.cv(c);
    let via_portal = k
        .portals
        .iter()
        .zip(&k.pred)
        .map(|(&p, &pr)| ctx.dist[v][p] + pr)
        .fold(INF, f64::min);
    ctx.dist_to_set(v, r).min(via_portal)
}

/// Opening cost of `r` plus weighted connection costs of the clients.
pub fn gen_cost(ctx: &DpContext, k: &GenInstance, r: &[usize]) -> f64 {
    let open: f64 = r.iter().map(|&f| ctx.open(f)).sum();
    k.clients.iter().fold(open, |acc, &c| {
        let w = ctx.weight(c);
        if w == 0.0 {
            acc
        } else {
            acc + w * conn_cost(ctx, k, c, r)
        }
    })
}

/// Every finite request is met by a facility of `r` within `lambda` extra.
pub fn is_near_feasible(ctx: &DpContext, k: &GenInstance, r: &[usize], lambda: f64) -> bool {
    k.portals.iter().zip(&k.req).all(|(&p, &q)| {
        !q.is_finite() || r.iter().any(|&f| leq(ctx.dist[p][ctx.fv(f)], q + lambda))
    })
}

pub fn is_gamma_close(ctx: &DpContext, k: &GenInstance, r: &[usize], gamma: f64) -> bool {
    k.clients.iter().all(|&c| conn_cost(ctx, k, c, r) <= gamma)
        && k.portals
            .iter()
            .zip(&k.req)
            .all(|(&p, &q)| !q.is_finite() || ctx.dist_to_set(p, r) <= gamma)
}

/// Request and prediction values handed to each child.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ChildAssignment {
    pub portals: Vec<Vec<usize>>,
    pub pred: Vec<Vec<f64>>,
    pub req: Vec<Vec<f64>>,
}

/// Parent requests must be covered by child requests, and child predictions
/// must be backed by a parent prediction or a sibling's request.
pub fn is_compatible(dist: &[Vec<f64>], parent: &GenInstance, phi: &ChildAssignment) -> bool {
    let covered = parent.portals.iter().zip(&parent.req).all(|(&p, &q)| {
        !q.is_finite()
            || phi.portals.iter().zip(&phi.req).any(|(ps, rs)| {
                ps.iter()
                    .zip(rs)
                    .any(|(&rho, &rq)| rq.is_finite() && leq(rq + dist[p][rho], q))
            })
    });
    if !covered {
        return false;
    }
    phi.portals.iter().enumerate().all(|(i, ps)| {
        ps.iter().zip(&phi.pred[i]).all(|(&rho, &pr)| {
            if !pr.is_finite() {
                return true;
            }
            let from_parent = parent
                .portals
                .iter()
                .zip(&parent.pred)
                .any(|(&p, &pp)| pp.is_finite() && leq(pp + dist[rho][p], pr));
            from_parent
                || phi.portals.iter().enumerate().any(|(j, qs)| {
                    j != i
                        && qs
                            .iter()
                            .zip(&phi.req[j])
                            .any(|(&rho2, &rq)| rq.is_finite() && leq(rq + dist[rho][rho2], pr))
                })
        })
    })
}

/// Union of child solutions priced in the parent subproblem.
pub fn combine_children(
    ctx: &DpContext,
    parent: &GenInstance,
    children: &[&DpEntry],
    subset: Vec<usize>,
) -> DpEntry {
    let mut open: Vec<usize> = children
        .iter()
        .flat_map(|e| e.open.iter().copied())
        .collect();
    open.sort_unstable();
    open.dedup();
    let cost = gen_cost(ctx, parent, &open);
    DpEntry {
        open,
        cost,
        provenance: Provenance::Combined { subset },
    }
}
