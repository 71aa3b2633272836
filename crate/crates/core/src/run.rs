//! Solver modes, the end-to-end approximation pipeline and run reports.

use std::collections::BTreeMap;
use std::str::FromStr;
use std::time::Instant;

use serde::Serialize;

use crate::baseline::{build_robust, constant_factor_approx, one_opt_violation};
use crate::checks::{CheckLevel, Checks, Tally};
use crate::dp::solve::RingSolveStats;
use crate::dp::{solve_ring, RingSolveConfig};
use crate::error::{FlError, Result};
use crate::instance::{CostModel, FlInstance, Solution};
use crate::num::leq;
use crate::oracles::{exact_opt, local_search, EXACT_GUARD};
use crate::reduce::{
    combine_ring_solutions, concentrate, magnitude_layers, preprocess_scale, ring_instances,
    ConstantsMode,
};

/// Largest facility count for which runs compute the exact optimum unasked.
pub const AUTO_ORACLE_LIMIT: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    Exact,
    Baseline,
    LocalSearch,
    Ptas,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "exact" => Ok(Mode::Exact),
            "baseline" => Ok(Mode::Baseline),
            "local-search" => Ok(Mode::LocalSearch),
            "ptas" => Ok(Mode::Ptas),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub mode: Mode,
    pub eps: f64,
    pub seed: u64,
    pub strict: bool,
    pub portal_spacing: Option<f64>,
    pub value_levels: Option<usize>,
    pub subset_size: usize,
    pub subset_cap: usize,
    pub state_budget: usize,
    pub swap_size: usize,
    pub level: CheckLevel,
    /// Compute the exact optimum when the instance is small enough.
    pub oracle: bool,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        let ring = RingSolveConfig::new(0.0, CheckLevel::Fast);
        RunOptions {
            mode: Mode::Ptas,
            eps: 0.09,
            seed: 0,
            strict: false,
            portal_spacing: None,
            value_levels: None,
            subset_size: ring.subset_size,
            subset_cap: ring.subset_cap,
            state_budget: ring.state_budget,
            swap_size: 2,
            level: CheckLevel::Fast,
            oracle: true,
            timings: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RingReport {
    pub j: i64,
    pub scale: f64,
    pub r: f64,
    pub eps_inner: f64,
    pub stats: RingSolveStats,
}

#[derive(Clone, Debug, Serialize)]
pub struct PtasConstants {
    pub constants_mode: ConstantsMode,
    /// Strict constants were requested but not representable.
    pub strict_fallback: bool,
    pub scale: f64,
    pub degenerate: bool,
    pub contracted_edges: usize,
    pub zeroed_facilities: usize,
    pub robust_set: Vec<usize>,
    pub q: i64,
    pub a: i64,
    pub psi: f64,
    pub anchor_fallbacks: usize,
    pub skipped_facilities: usize,
    pub rings: Vec<RingReport>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckSummary {
    pub passed: u64,
    pub failed: u64,
    pub tally: BTreeMap<String, Tally>,
    pub failures: Vec<String>,
}

impl From<&Checks> for CheckSummary {
    fn from(c: &Checks) -> Self {
        CheckSummary {
            passed: c.tally.values().map(|t| t.passed).sum(),
            failed: c.failed(),
            tally: c.tally.clone(),
            failures: c.failures.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub label: String,
    pub mode: Mode,
    pub eps: f64,
    pub vertices: usize,
    pub edges: usize,
    pub clients: usize,
    pub facilities: usize,
    pub constants: Option<PtasConstants>,
    pub open_set: Vec<usize>,
    pub open_cost: f64,
    pub conn_cost: f64,
    pub cost: f64,
    pub baseline_cost: Option<f64>,
    pub oracle_cost: Option<f64>,
    pub ratio: Option<f64>,
    pub checks: CheckSummary,
    pub timings_ms: Option<BTreeMap<String, f64>>,
}

impl RunReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn csv_header() -> &'static str {
        "label,mode,eps,vertices,facilities,clients,cost,baseline_cost,oracle_cost,ratio,checks_failed"
    }

    pub fn csv_row(&self) -> String {
        let opt = |x: Option<f64>| x.map_or(String::new(), |v| v.to_string());
        format!(
            "\"{}\",{},{},{},{},{},{},{},{},{},{}",
            self.label.replace('"', "'"),
            serde_json::to_value(self.mode)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default(),
            self.eps,
            self.vertices,
            self.facilities,
            self.clients,
            self.cost,
            opt(self.baseline_cost),
            opt(self.oracle_cost),
            opt(self.ratio),
            self.checks.failed
        )
    }
}

struct Clock {
    on: bool,
    start: Instant,
    laps: BTreeMap<String, f64>,
}

impl Clock {
    fn lap(&mut self, name: &str) {
        if self.on {
            let now = Instant::now();
            self.laps
                .insert(name.to_string(), (now - self.start).as_secs_f64() * 1e3);
            self.start = now;
        }
    }
}

/// Result of the approximation pipeline on one instance.
#[derive(Clone, Debug)]
pub struct PtasOutcome {
    pub solution: Solution,
    pub baseline: Solution,
    pub constants: PtasConstants,
}

fn ptas(
    inst: &FlInstance,
    opts: &RunOptions,
    checks: &mut Checks,
    clock: &mut Clock,
) -> Result<PtasOutcome> {
    let eps = opts.eps;
    let model0 = CostModel::new(inst);
    let baseline = constant_factor_approx(&model0)?;
    clock.lap("baseline");
    let pre = preprocess_scale(inst, eps, baseline.cost());
    let model = CostModel::new(&pre.inst);
    let robust = build_robust(&model, eps)?;
    let scaled = model.with_open(model.open.iter().map(|o| eps * o).collect());
    checks.record(
        "robust-closure",
        one_opt_violation(&scaled, &robust.open_set).is_none(),
        || "a single addition improves the robust solution".into(),
    );
    clock.lap("robust");
    let conc = concentrate(&pre.inst, &model, &robust, eps, checks)?;
    let cmodel = CostModel::new(&conc.inst);
    let layering = magnitude_layers(&conc, &cmodel, eps, checks);
    clock.lap("concentrate");

    let requested = if opts.strict {
        ConstantsMode::Strict
    } else {
        ConstantsMode::Capped
    };
    let (mode, specs) = match ring_instances(&conc, &cmodel, &layering, requested, checks) {
        Ok(s) => (requested, s),
        Err(FlError::StrictInfeasible(_)) => (
            ConstantsMode::Capped,
            ring_instances(&conc, &cmodel, &layering, ConstantsMode::Capped, checks)?,
        ),
        Err(e) => return Err(e),
    };
    let eps_inner = eps * eps / 11.0;
    let mut ring_cfg = RingSolveConfig::new(eps_inner, opts.level);
    ring_cfg.portal_spacing = opts.portal_spacing;
    ring_cfg.value_levels = opts.value_levels;
    ring_cfg.subset_size = opts.subset_size;
    ring_cfg.subset_cap = opts.subset_cap;
    ring_cfg.state_budget = opts.state_budget;
    let mut per_ring = BTreeMap::new();
    let mut rings = Vec::new();
    for spec in &specs {
        let (local, stats) = solve_ring(&spec.ring, &ring_cfg, checks)?;
        let global: Vec<usize> = local.iter().map(|&f| spec.ring.fac_ids[f]).collect();
        per_ring.insert(spec.j, global);
        rings.push(RingReport {
            j: spec.j,
            scale: spec.scale,
            r: spec.ring.r,
            eps_inner,
            stats,
        });
    }
    clock.lap("rings");
    let weighted = robust.clusters.weighted_sum();
    let combined = combine_ring_solutions(&cmodel, &layering, weighted, &per_ring, checks)?;
    let solution = model0.eval(&combined.open_set)?;
    clock.lap("combine");
    let constants = PtasConstants {
        constants_mode: mode,
        strict_fallback: mode != requested,
        scale: pre.scale,
        degenerate: pre.degenerate,
        contracted_edges: pre.contracted_edges,
        zeroed_facilities: pre.zeroed_facilities,
        robust_set: robust.open_set.clone(),
        q: layering.q,
        a: layering.a,
        psi: conc.psi,
        anchor_fallbacks: conc.anchor_fallbacks,
        skipped_facilities: layering.skipped.len(),
        rings,
    };
    Ok(PtasOutcome {
        solution,
        baseline,
        constants,
    })
}

/// Runs the approximation pipeline alone and returns its pieces.
pub fn run_ptas(inst: &FlInstance, opts: &RunOptions, checks: &mut Checks) -> Result<PtasOutcome> {
    let mut clock = Clock {
        on: false,
        start: Instant::now(),
        laps: BTreeMap::new(),
    };
    ptas(inst, opts, checks, &mut clock)
}

pub fn run(inst: &FlInstance, opts: &RunOptions) -> Result<RunReport> {
    inst.validate()?;
    let mut checks = Checks::default();
    let mut clock = Clock {
        on: opts.timings,
        start: Instant::now(),
        laps: BTreeMap::new(),
    };
    let model = CostModel::new(inst);
    let nf = inst.facilities.len();
    let mut constants = None;
    let mut baseline_cost = None;
    let empty = inst.clients.is_empty();
    let solution = match opts.mode {
        _ if empty => model.eval(&[])?,
        Mode::Exact => {
            let ex = exact_opt(&model)?;
            model.eval(&ex.open_set)?
        }
        Mode::Baseline => constant_factor_approx(&model)?,
        Mode::LocalSearch => local_search(&model, opts.swap_size)?,
        Mode::Ptas => {
            let out = ptas(inst, opts, &mut checks, &mut clock)?;
            baseline_cost = Some(out.baseline.cost());
            constants = Some(out.constants);
            out.solution
        }
    };
    clock.lap("solve");
    let want_oracle =
        opts.mode == Mode::Exact || (opts.oracle && nf <= AUTO_ORACLE_LIMIT.min(EXACT_GUARD));
    let oracle_cost = if empty {
        Some(0.0)
    } else if want_oracle {
        Some(exact_opt(&model)?.cost)
    } else {
        None
    };
    clock.lap("oracle");
    let ratio = oracle_cost.map(|o| if o > 0.0 { solution.cost() / o } else { 1.0 });
    Ok(RunReport {
        label: inst.label.clone(),
        mode: opts.mode,
        eps: opts.eps,
        vertices: inst.graph.n(),
        edges: inst.graph.m(),
        clients: inst.clients.len(),
        facilities: nf,
        constants,
        open_set: solution.open_set.clone(),
        open_cost: solution.open_cost,
        conn_cost: solution.conn_cost,
        cost: solution.cost(),
        baseline_cost,
        oracle_cost,
        ratio,
        checks: CheckSummary::from(&checks),
        timings_ms: opts.timings.then_some(clock.laps),
    })
}

/// Every edge is a shortest path between its endpoints.
pub fn check_metric(inst: &FlInstance, checks: &mut Checks) {
    let g = &inst.graph;
    for u in 0..g.n() {
        let d = g.sssp(u).dist;
        for &dart in g.rotation(u) {
            let e = &g.edges[dart / 2];
            let v = g.head(dart);
            if !e.sentinel && u < v {
                checks.record("metric", leq(e.w, d[v]), || {
                    format!("edge {u}-{v} of weight {} exceeds distance {}", e.w, d[v])
                });
            }
        }
    }
}

/// The approximation pipeline with all checks enabled plus instance-level
/// and oracle comparisons where the instance is small enough.
pub fn verify(inst: &FlInstance, opts: &RunOptions) -> Result<RunReport> {
    let mut opts = opts.clone();
    opts.mode = Mode::Ptas;
    opts.level = opts.level.max(CheckLevel::Fast);
    let mut extra = Checks::default();
    extra.record("planar", inst.graph.is_planar_embedding(), || {
        "Euler characteristic".into()
    });
    check_metric(inst, &mut extra);
    let mut report = run(inst, &opts)?;
    if !inst.clients.is_empty() && inst.facilities.len() <= AUTO_ORACLE_LIMIT {
        let model = CostModel::new(inst);
        let opt = exact_opt(&model)?;
        if let Some(b) = report.baseline_cost {
            extra.record("baseline-factor", leq(b, 3.0 * opt.cost), || {
                format!("baseline {b} > 3·{}", opt.cost)
            });
        }
        let robust = build_robust(&model, opts.eps)?;
        for (i, &f) in robust.clusters.facilities.iter().enumerate() {
            if let Some(avg) = robust.clusters.avgcost[i] {
                let d = model.dist_to_set(f, &opt.open_set);
                extra.record("close-opt", leq(d, 2.0 * avg), || {
                    format!("facility {f}: distance {d} to the optimum exceeds 2·{avg}")
                });
            }
        }
    }
    let mut all = Checks {
        tally: report.checks.tally.clone(),
        failures: report.checks.failures.clone(),
    };
    all.merge(extra);
    report.checks = CheckSummary::from(&all);
    Ok(report)
}
