/// Portals on a shortest path `path` that starts at `s` (path[0] = s).
/// Walking outward from the vertex after `s`, one portal is taken per
/// distance interval of width `d`: the first vertex in that interval.
/// `dist_s` holds distances from `s`.
pub fn place_portals(path: &[usize], dist_s: &[f64], d: f64) -> Vec<usize> {
    let Some((&s, rest)) = path.split_first() else {
        return Vec::new();
    };
    let mut portals = vec![s];
    if let Some(&u) = rest.first() {
        let base = dist_s[u];
        let mut last: Option<f64> = None;
        for &w in rest {
            let k = ((dist_s[w] - base) / d).floor();
            if last != Some(k) {
                portals.push(w);
                last = Some(k);
            }
        }
    }
    portals.sort_unstable();
    portals.dedup();
    portals
}

/// Largest gap between a vertex of `path` and its nearest portal, measured
/// along the path.
pub fn covering_radius(path: &[usize], dist_s: &[f64], portals: &[usize]) -> f64 {
    let pd: Vec<f64> = portals.iter().map(|&p| dist_s[p]).collect();
    path.iter()
        .map(|&w| {
            pd.iter()
                .map(|&x| (x - dist_s[w]).abs())
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}
