//! Exact enumeration and local search, used as reference solvers.

use itertools::Itertools;

use crate::error::{FlError, Result};
use crate::instance::{CostModel, Solution};
use crate::num::INF;

pub const EXACT_GUARD: usize = 24;

#[derive(Clone, Debug, PartialEq)]
pub struct ExactResult {
    pub open_set: Vec<usize>,
    pub cost: f64,
    pub enumerated: u64,
}

struct Search<'a> {
    model: &'a CostModel,
    best_cost: f64,
    best_mask: u64,
    enumerated: u64,
}

impl Search<'_> {
    /// Visits every subset containing `mask` plus any facilities `≥ next`.
    fn dfs(&mut self, next: usize, mask: u64, open_sum: f64, mins: &[f64]) {
        let nf = self.model.n_facilities();
        if mask != 0 || self.model.n_clients() == 0 {
            self.enumerated += 1;
            let conn: f64 = self.model.weight.iter().zip(mins).map(|(w, d)| w * d).sum();
            let cost = open_sum + conn;
            if cost < self.best_cost || (cost == self.best_cost && mask < self.best_mask) {
                self.best_cost = cost;
                self.best_mask = mask;
            }
        }
        let mut child = vec![0.0; mins.len()];
        for f in next..nf {
            for (c, m) in child.iter_mut().enumerate() {
                *m = mins[c].min(self.model.dist[c][f]);
            }
            self.dfs(f + 1, mask | 1 << f, open_sum + self.model.open[f], &child);
        }
    }
}

/// Cheapest facility subset by full enumeration. Ties go to the subset with
/// the smaller bitmask.
pub fn exact_opt(model: &CostModel) -> Result<ExactResult> {
    let nf = model.n_facilities();
    if nf > EXACT_GUARD {
        return Err(FlError::TooLarge(nf, EXACT_GUARD));
    }
    if nf == 0 && model.n_clients() > 0 {
        return Err(FlError::NoFacility);
    }
    let mut s = Search {
        model,
        best_cost: INF,
        best_mask: u64::MAX,
        enumerated: 0,
    };
    s.dfs(0, 0, 0.0, &vec![INF; model.n_clients()]);
    let open_set: Vec<usize> = (0..nf).filter(|&f| s.best_mask >> f & 1 == 1).collect();
    let cost = model.cost(&open_set);
    Ok(ExactResult {
        open_set,
        cost,
        enumerated: s.enumerated,
    })
}

fn greedy_start(model: &CostModel) -> Vec<usize> {
    let nf = model.n_facilities();
    let mut best = (INF, usize::MAX);
    for f in 0..nf {
        let c = model.cost(&[f]);
        if c < best.0 {
            best = (c, f);
        }
    }
    if best.1 == usize::MAX {
        return Vec::new();
    }
    let mut cur = vec![best.1];
    let mut cur_cost = best.0;
    loop {
        let mut pick = None;
        for f in (0..nf).filter(|f| !cur.contains(f)) {
            let mut cand = cur.clone();
            cand.push(f);
            let c = model.cost(&cand);
            if c < pick.map_or(cur_cost, |(pc, _)| pc) {
                pick = Some((c, f));
            }
        }
        match pick {
            Some((c, f)) => {
                cur.push(f);
                cur.sort_unstable();
                cur_cost = c;
            }
            None => return cur,
        }
    }
}

/// Moves in scan order: additions, then removals, then exchanges, each over
/// sets of at most `k` facilities in ascending lexicographic order.
fn first_improvement(model: &CostModel, cur: &[usize], k: usize) -> Option<Vec<usize>> {
    let nf = model.n_facilities();
    let base = model.cost(cur);
    let closed: Vec<usize> = (0..nf).filter(|f| !cur.contains(f)).collect();
    let try_set = |cand: Vec<usize>| -> Option<Vec<usize>> {
        let mut cand = cand;
        cand.sort_unstable();
        (model.cost(&cand) < base).then_some(cand)
    };
    for size in 1..=k {
        for add in closed.iter().copied().combinations(size) {
            let cand = cur.iter().copied().chain(add).collect();
            if let Some(c) = try_set(cand) {
                return Some(c);
            }
        }
    }
    for size in 1..=k.min(cur.len()) {
        for drop in cur.iter().copied().combinations(size) {
            let cand = cur.iter().copied().filter(|f| !drop.contains(f)).collect();
            if let Some(c) = try_set(cand) {
                return Some(c);
            }
        }
    }
    for out in 1..=k.min(cur.len()) {
        for drop in cur.iter().copied().combinations(out) {
            for inn in 1..=k {
                for add in closed.iter().copied().combinations(inn) {
                    let cand = cur
                        .iter()
                        .copied()
                        .filter(|f| !drop.contains(f))
                        .chain(add)
                        .collect();
                    if let Some(c) = try_set(cand) {
                        return Some(c);
                    }
                }
            }
        }
    }
    None
}

pub fn local_search(model: &CostModel, swap_size: usize) -> Result<Solution> {
    local_search_from(model, greedy_start(model), swap_size)
}

pub fn local_search_from(
    model: &CostModel,
    start: Vec<usize>,
    swap_size: usize,
) -> Result<Solution> {
    let mut cur = start;
    cur.sort_unstable();
    cur.dedup();
    while let Some(next) = first_improvement(model, &cur, swap_size.max(1)) {
        cur = next;
    }
    model.eval(&cur)
}
