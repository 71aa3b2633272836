use std::collections::BTreeMap;

use super::{gen_cost, DpContext, DpEntry, GenInstance, Provenance};
use crate::num::leq;

/// Requests whose satisfying facility sets are minimal under inclusion; the
/// rest are implied by them.
fn essential_requests(sat: &[Vec<bool>]) -> Vec<usize> {
    let subset = |a: &[bool], b: &[bool]| a.iter().zip(b).all(|(&x, &y)| !x || y);
    (0..sat.len())
        .filter(|&i| {
            !(0..sat.len())
                .any(|j| j != i && subset(&sat[j], &sat[i]) && (!subset(&sat[i], &sat[j]) || j < i))
        })
        .collect()
}

/// Cheapest `lambda`-near feasible solution of a subproblem whose clients sit
/// on a handful of vertices. States are (requests met, client vertices
/// handled); each vertex is handled either through a portal prediction or by
/// one chosen facility. `None` when some request cannot be met.
pub fn leaf_dp(ctx: &DpContext, k: &GenInstance, lambda: f64) -> Option<DpEntry> {
    let nf = ctx.n_facilities();
    let sat: Vec<Vec<bool>> = k
        .portals
        .iter()
        .zip(&k.req)
        .filter(|(_, q)| q.is_finite())
        .map(|(&p, &q)| {
            (0..nf)
                .map(|f| leq(ctx.dist[p][ctx.fv(f)], q + lambda))
                .collect()
        })
        .collect();
    if sat.iter().any(|s| !s.contains(&true)) {
        return None;
    }
    let reqs = essential_requests(&sat);
    if reqs.len() > 128 {
        return None;
    }
    let pattern: Vec<u128> = (0..nf)
        .map(|f| {
            reqs.iter()
                .enumerate()
                .fold(0u128, |m, (b, &i)| if sat[i][f] { m | (1 << b) } else { m })
        })
        .collect();
    let full_a: u128 = if reqs.len() == 128 {
        u128::MAX
    } else {
        (1u128 << reqs.len()) - 1
    };

    let mut verts: Vec<usize> = k.clients.iter().map(|&c| ctx.cv(c)).collect();
    verts.sort_unstable();
    verts.dedup();
    let gamma: Vec<f64> = verts
        .iter()
        .map(|&v| {
            k.clients
                .iter()
                .filter(|&&c| ctx.cv(c) == v)
                .map(|&c| ctx.weight(c))
                .sum()
        })
        .collect();
    let nb = verts.len();
    assert!(nb <= 16, "leaf has {nb} client vertices");
    let full_b: u32 = (1u32 << nb) - 1;
    let portal_cost: Vec<f64> = verts
        .iter()
        .map(|&v| {
            k.portals
                .iter()
                .zip(&k.pred)
                .map(|(&p, &pr)| ctx.dist[v][p] + pr)
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let handle = |b: u32, cost_of: &dyn Fn(usize) -> f64| -> f64 {
        (0..nb)
            .filter(|&i| b >> i & 1 == 1)
            .map(|i| {
                if gamma[i] == 0.0 {
                    0.0
                } else {
                    gamma[i] * cost_of(i)
                }
            })
            .sum()
    };

    let mut states: BTreeMap<(u128, u32), (f64, Vec<usize>)> = BTreeMap::new();
    for b in 0..=full_b {
        let c = handle(b, &|i| portal_cost[i]);
        if c.is_finite() {
            states.insert((0, b), (c, Vec::new()));
        }
    }
    for f in 0..nf {
        let v = ctx.fv(f);
        let mut next = states.clone();
        for (&(a, b), (cost, set)) in &states {
            let rest = full_b & !b;
            let mut sub = rest;
            loop {
                if sub != 0 || pattern[f] & !a != 0 {
                    let c = cost + ctx.open(f) + handle(sub, &|i| ctx.dist[verts[i]][v]);
                    let key = (a | pattern[f], b | sub);
                    if next.get(&key).map_or(true, |(old, _)| c < *old) {
                        let mut s = set.clone();
                        s.push(f);
                        next.insert(key, (c, s));
                    }
                }
                if sub == 0 {
                    break;
                }
                sub = (sub - 1) & rest;
            }
        }
        states = next;
    }
    let (_, open) = states.remove(&(full_a, full_b))?;
    let cost = gen_cost(ctx, k, &open);
    Some(DpEntry {
        open,
        cost,
        provenance: Provenance::Leaf,
    })
}
