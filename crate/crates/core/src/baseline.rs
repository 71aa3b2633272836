//! Primal-dual approximation and the robust solution built from it.

use crate::error::{FlError, Result};
use crate::instance::{clusters_of, ClusterMap, CostModel, Solution};
use crate::num::INF;

/// Guarantee of the primal-dual method implemented here.
pub const ALPHA: f64 = 3.0;

/// Weighted primal-dual algorithm with dual ascent followed by a greedy
/// independent set over temporarily opened facilities.
pub fn constant_factor_approx(model: &CostModel) -> Result<Solution> {
    let nc = model.n_clients();
    let nf = model.n_facilities();
    if nc == 0 {
        return Err(FlError::EmptyClientSet);
    }
    let mut alpha = vec![INF; nc];
    let mut active = vec![true; nc];
    let mut opened_at: Vec<Option<f64>> = vec![None; nf];
    let mut order: Vec<usize> = Vec::new();
    let mut t = 0.0f64;
    loop {
        if !active.iter().any(|&a| a) {
            break;
        }
        // Freeze active clients already tight with an open facility.
        let mut froze = false;
        for c in 0..nc {
            if active[c] && order.iter().any(|&f| model.dist[c][f] <= t) {
                active[c] = false;
                alpha[c] = t;
                froze = true;
            }
        }
        if froze {
            continue;
        }
        let mut next = INF;
        for c in (0..nc).filter(|&c| active[c]) {
            for f in 0..nf {
                let d = model.dist[c][f];
                if d > t && d < next {
                    next = d;
                }
            }
        }
        let mut hits: Vec<(f64, usize)> = Vec::new();
        for f in (0..nf).filter(|&f| opened_at[f].is_none()) {
            let mut paid = 0.0;
            let mut slope = 0.0;
            for c in 0..nc {
                let d = model.dist[c][f];
                if active[c] {
                    if d <= t {
                        paid += model.weight[c] * (t - d);
                        slope += model.weight[c];
                    }
                } else if alpha[c] > d {
                    paid += model.weight[c] * (alpha[c] - d);
                }
            }
            let due = model.open[f] - paid;
            let at = if due <= 0.0 {
                t
            } else if slope > 0.0 {
                t + due / slope
            } else {
                INF
            };
            if at <= next {
                hits.push((at, f));
            }
        }
        if hits.is_empty() {
            if next == INF {
                break;
            }
            t = next;
            continue;
        }
        let first = hits.iter().map(|h| h.0).fold(INF, f64::min);
        t = t.max(first);
        for &(at, f) in &hits {
            if at == first {
                opened_at[f] = Some(t);
                order.push(f);
            }
        }
    }
    // Greedy independent set in opening order; ties in time by id.
    let mut temp: Vec<usize> = (0..nf).filter(|&f| opened_at[f].is_some()).collect();
    temp.sort_by(|&a, &b| {
        opened_at[a]
            .partial_cmp(&opened_at[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let contributes = |c: usize, f: usize| alpha[c].is_finite() && alpha[c] > model.dist[c][f];
    let mut chosen: Vec<usize> = Vec::new();
    for &f in &temp {
        let conflict = chosen
            .iter()
            .any(|&g| (0..nc).any(|c| contributes(c, f) && contributes(c, g)));
        if !conflict {
            chosen.push(f);
        }
    }
    if chosen.is_empty() {
        return Err(FlError::NoFacility);
    }
    model.eval(&chosen)
}

/// Adds any facility whose opening strictly lowers the cost, scanning ids in
/// ascending order until a full pass changes nothing.
pub fn one_opt_closure(model: &CostModel, start: &Solution) -> Solution {
    let mut cur = start.open_set.clone();
    let mut cost = model.cost(&cur);
    loop {
        let mut added = false;
        for f in 0..model.n_facilities() {
            if cur.binary_search(&f).is_ok() {
                continue;
            }
            let mut cand = cur.clone();
            let pos = cand.binary_search(&f).unwrap_err();
            cand.insert(pos, f);
            let c = model.cost(&cand);
            if c < cost {
                cur = cand;
                cost = c;
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    model.eval(&cur).expect("closure keeps a feasible set")
}

/// Drops every open facility that is nobody's nearest choice.
pub fn prune_unserved(model: &CostModel, sol: &Solution) -> Solution {
    if model.n_clients() == 0 {
        return sol.clone();
    }
    let mut keep: Vec<usize> = sol.assignment.clone();
    keep.sort_unstable();
    keep.dedup();
    model.eval(&keep).expect("served facilities remain")
}

/// First facility that violates the single-addition property, if any.
pub fn one_opt_violation(model: &CostModel, set: &[usize]) -> Option<usize> {
    let base = model.cost(set);
    (0..model.n_facilities()).find(|&f| {
        let mut cand = set.to_vec();
        cand.push(f);
        model.cost(&cand) < base
    })
}

#[derive(Clone, Debug)]
pub struct RobustSolution {
    pub open_set: Vec<usize>,
    pub alpha: f64,
    /// Clusters with averages priced in the original opening costs.
    pub clusters: ClusterMap,
    pub scaled: bool,
    pub cost_scaled: f64,
    pub cost: f64,
}

pub fn build_robust(model: &CostModel, eps: f64) -> Result<RobustSolution> {
    if !(eps > 0.0 && eps < 0.1) {
        return Err(FlError::EpsOutOfRange(eps));
    }
    let scaled = model.with_open(model.open.iter().map(|o| eps * o).collect());
    let approx = constant_factor_approx(&scaled)?;
    let closed = one_opt_closure(&scaled, &approx);
    let pruned = prune_unserved(&scaled, &closed);
    let original = model.eval(&pruned.open_set)?;
    let clusters = clusters_of(model, &original);
    Ok(RobustSolution {
        open_set: pruned.open_set.clone(),
        alpha: ALPHA,
        clusters,
        scaled: true,
        cost_scaled: pruned.cost(),
        cost: original.cost(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EmbeddedGraph;
    use crate::instance::{Client, Facility, FlInstance};

    fn two_towns() -> CostModel {
        // Two client groups 10 apart, one facility in each plus one between.
        let mut g = EmbeddedGraph::with_vertices(3);
        g.push_edge(0, 1, 5.0);
        g.push_edge(1, 2, 5.0);
        let inst = FlInstance {
            graph: g,
            coords: None,
            clients: vec![Client { vertex: 0, mult: 3 }, Client { vertex: 2, mult: 3 }],
            facilities: vec![
                Facility {
                    vertex: 0,
                    cost: 1.0,
                },
                Facility {
                    vertex: 1,
                    cost: 1.0,
                },
                Facility {
                    vertex: 2,
                    cost: 1.0,
                },
            ],
            label: String::new(),
        };
        CostModel::new(&inst)
    }

    #[test]
    fn primal_dual_opens_both_towns() {
        let m = two_towns();
        let s = constant_factor_approx(&m).unwrap();
        assert_eq!(s.open_set, vec![0, 2]);
        assert_eq!(s.cost(), 2.0);
    }

    #[test]
    fn closure_fixed_points() {
        let m = two_towns();
        let full = m.eval(&[0, 1, 2]).unwrap();
        assert_eq!(one_opt_closure(&m, &full).open_set, vec![0, 1, 2]);
        let one = m.eval(&[1]).unwrap();
        let closed = one_opt_closure(&m, &one);
        assert_eq!(closed.open_set, vec![0, 1, 2]);
        assert_eq!(prune_unserved(&m, &closed).open_set, vec![0, 2]);
        assert!(one_opt_violation(&m, &[0, 2]).is_none());
    }

    #[test]
    fn robust_rejects_bad_eps() {
        let m = two_towns();
        assert!(matches!(
            build_robust(&m, 0.1),
            Err(FlError::EpsOutOfRange(_))
        ));
        assert!(matches!(
            build_robust(&m, 0.0),
            Err(FlError::EpsOutOfRange(_))
        ));
        let r = build_robust(&m, 0.05).unwrap();
        assert_eq!(r.open_set, vec![0, 2]);
        assert_eq!(r.clusters.avg(0), Some(1.0 / 3.0));
    }
}
