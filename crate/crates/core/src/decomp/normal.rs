use serde::Serialize;

/// Level value standing for `+∞`.
pub const INF_LEVEL: i64 = i64::MAX;

/// Parameters of a normal family: values are multiples of `d` in `[lo, hi]`
/// (or infinite) and finite pairs differ by at most distance plus `slack`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalParams {
    pub d: f64,
    pub lo: f64,
    pub hi: f64,
    pub slack: f64,
}

impl NormalParams {
    pub fn min_level(&self) -> i64 {
        level_ceil(self.lo / self.d)
    }

    pub fn max_level(&self) -> i64 {
        if self.hi.is_infinite() {
            INF_LEVEL - 1
        } else {
            (self.hi / self.d + 1e-9).floor() as i64
        }
    }

    pub fn value(&self, level: i64) -> f64 {
        if level == INF_LEVEL {
            f64::INFINITY
        } else {
            level as f64 * self.d
        }
    }

    /// Smallest level whose value is at least `x`, or `INF_LEVEL` if that
    /// exceeds the range.
    pub fn round_up(&self, x: f64) -> i64 {
        if !x.is_finite() {
            return INF_LEVEL;
        }
        let k = level_ceil(x / self.d).max(self.min_level());
        if k > self.max_level() {
            INF_LEVEL
        } else {
            k
        }
    }

    pub fn compatible(&self, a: i64, b: i64, dist: f64) -> bool {
        if a == INF_LEVEL || b == INF_LEVEL {
            return true;
        }
        let gap = (self.value(a) - self.value(b)).abs();
        gap <= dist + self.slack + 1e-9 * (1.0 + gap)
    }

    pub fn is_normal(&self, f: &[i64], dist: impl Fn(usize, usize) -> f64) -> bool {
        let (lo, hi) = (self.min_level(), self.max_level());
        f.iter().all(|&k| k == INF_LEVEL || (lo..=hi).contains(&k))
            && (0..f.len()).all(|i| (0..i).all(|j| self.compatible(f[i], f[j], dist(i, j))))
    }
}

fn level_ceil(x: f64) -> i64 {
    let r = x.round();
    if (x - r).abs() <= 1e-9 * (1.0 + x.abs()) {
        r as i64
    } else {
        x.ceil() as i64
    }
}

/// All normal functions on `n` portals, in lexicographic order of level
/// vectors with finite levels before `+∞`. `dist(i, j)` is the distance
/// between portals `i` and `j`.
pub fn enumerate_normal(
    n: usize,
    dist: impl Fn(usize, usize) -> f64,
    params: &NormalParams,
) -> Vec<Vec<i64>> {
    let (lo, hi) = (params.min_level(), params.max_level());
    assert!(
        hi < INF_LEVEL - 1 || n == 0,
        "unbounded range cannot be enumerated"
    );
    let mut choices: Vec<i64> = (lo..=hi).collect();
    choices.push(INF_LEVEL);
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn rec(
        n: usize,
        choices: &[i64],
        dist: &dyn Fn(usize, usize) -> f64,
        params: &NormalParams,
        cur: &mut Vec<i64>,
        out: &mut Vec<Vec<i64>>,
    ) {
        let i = cur.len();
        if i == n {
            out.push(cur.clone());
            return;
        }
        for &k in choices {
            if (0..i).all(|j| params.compatible(k, cur[j], dist(i, j))) {
                cur.push(k);
                rec(n, choices, dist, params, cur, out);
                cur.pop();
            }
        }
    }
    rec(n, &choices, &dist, params, &mut cur, &mut out);
    out
}
