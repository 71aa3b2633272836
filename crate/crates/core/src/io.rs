//! The `planar-fl v1` text format.
//!
//! ```text
//! planar-fl v1
//! # label: tiny triangle
//! v 0 0 0
//! v 1 1 0
//! v 2 0 1
//! e 0 1 1
//! e 1 2 1.5
//! e 0 2 1
//! rot 0 1 2
//! c 1 2
//! f 2 3.5
//! ```
//!
//! `rot` lines are optional when every vertex has coordinates; the rotation is
//! then the counter-clockwise angular order of the neighbours.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use crate::error::{FlError, Result};
use crate::graph::EmbeddedGraph;
use crate::instance::{Client, Facility, FlInstance};

const HEADER: &str = "planar-fl v1";

fn err(line: usize, msg: impl Into<String>) -> FlError {
    FlError::Parse {
        line,
        msg: msg.into(),
    }
}

fn num<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| err(line, format!("cannot parse {what} `{tok}`")))
}

/// Neighbour lists sorted counter-clockwise by angle around each vertex.
pub fn rotation_from_coords(
    n: usize,
    edges: &[(usize, usize, f64)],
    xy: &[[f64; 2]],
) -> Vec<Vec<usize>> {
    let mut rot = vec![Vec::new(); n];
    for &(u, v, _) in edges {
        rot[u].push(v);
        rot[v].push(u);
    }
    for (u, nb) in rot.iter_mut().enumerate() {
        let angle = |x: usize| (xy[x][1] - xy[u][1]).atan2(xy[x][0] - xy[u][0]);
        nb.sort_by(|&a, &b| angle(a).total_cmp(&angle(b)).then(a.cmp(&b)));
    }
    rot
}

pub fn parse_instance(text: &str) -> Result<FlInstance> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let mut label = String::new();
    let mut header_seen = false;
    let mut verts: BTreeMap<usize, (usize, Option<[f64; 2]>)> = BTreeMap::new();
    let mut edges: Vec<(usize, usize, f64, usize)> = Vec::new();
    let mut rots: BTreeMap<usize, (usize, Vec<usize>)> = BTreeMap::new();
    let mut clients: Vec<(usize, u64, usize)> = Vec::new();
    let mut facs: Vec<(usize, f64, usize)> = Vec::new();
    for (ln, line) in &mut lines {
        if line.is_empty() {
            continue;
        }
        if let Some(c) = line.strip_prefix('#') {
            if let Some(l) = c.trim_start().strip_prefix("label:") {
                label = l.trim().to_string();
            }
            continue;
        }
        if !header_seen {
            if line != HEADER {
                return Err(err(ln, format!("expected `{HEADER}` header")));
            }
            header_seen = true;
            continue;
        }
        let mut tok = line.split_whitespace();
        let kind = tok.next().unwrap_or_default();
        match kind {
            "v" => {
                let id: usize = num(tok.next(), ln, "vertex id")?;
                let xy = match tok.next() {
                    Some(x) => Some([num(Some(x), ln, "x")?, num(tok.next(), ln, "y")?]),
                    None => None,
                };
                if verts.insert(id, (ln, xy)).is_some() {
                    return Err(err(ln, format!("duplicate vertex {id}")));
                }
            }
            "e" => {
                let u: usize = num(tok.next(), ln, "endpoint")?;
                let v: usize = num(tok.next(), ln, "endpoint")?;
                let w: f64 = num(tok.next(), ln, "weight")?;
                if !(w >= 0.0) || !w.is_finite() {
                    return Err(err(ln, format!("negative or non-finite weight {w}")));
                }
                edges.push((u, v, w, ln));
            }
            "rot" => {
                let u: usize = num(tok.next(), ln, "vertex id")?;
                let nb = tok
                    .map(|t| num(Some(t), ln, "neighbour"))
                    .collect::<Result<Vec<usize>>>()?;
                if rots.insert(u, (ln, nb)).is_some() {
                    return Err(err(ln, format!("second rotation for vertex {u}")));
                }
                continue;
            }
            "c" => {
                let v: usize = num(tok.next(), ln, "client vertex")?;
                let m: u64 = match tok.next() {
                    Some(t) => num(Some(t), ln, "multiplicity")?,
                    None => 1,
                };
                if m == 0 {
                    return Err(err(ln, "multiplicity must be positive"));
                }
                clients.push((v, m, ln));
            }
            "f" => {
                let v: usize = num(tok.next(), ln, "facility vertex")?;
                let c: f64 = num(tok.next(), ln, "opening cost")?;
                if !(c >= 0.0) || !c.is_finite() {
                    return Err(err(ln, format!("negative or non-finite opening cost {c}")));
                }
                facs.push((v, c, ln));
            }
            other => return Err(err(ln, format!("unknown record `{other}`"))),
        }
        if tok.next().is_some() {
            return Err(err(ln, "trailing tokens"));
        }
    }
    if !header_seen {
        return Err(err(1, format!("missing `{HEADER}` header")));
    }
    let n = verts.len();
    if let Some((&id, &(ln, _))) = verts.iter().find(|(&id, _)| id >= n) {
        return Err(err(ln, format!("vertex ids must be 0..{n}, found {id}")));
    }
    let known = |v: usize, ln: usize| -> Result<()> {
        if v < n {
            Ok(())
        } else {
            Err(err(ln, format!("unknown vertex {v}")))
        }
    };
    let mut seen = HashSet::new();
    for &(u, v, _, ln) in &edges {
        known(u, ln)?;
        known(v, ln)?;
        if u == v {
            return Err(err(ln, format!("self-loop at {u}")));
        }
        if !seen.insert((u.min(v), u.max(v))) {
            return Err(err(ln, format!("duplicate edge {u} {v}")));
        }
    }
    for &(v, _, ln) in &clients {
        known(v, ln)?;
    }
    for &(v, _, ln) in &facs {
        known(v, ln)?;
    }
    let plain: Vec<(usize, usize, f64)> = edges.iter().map(|&(u, v, w, _)| (u, v, w)).collect();
    let coords: Option<Vec<[f64; 2]>> = verts.values().map(|(_, xy)| *xy).collect();
    let mut rotation = match &coords {
        Some(xy) => rotation_from_coords(n, &plain, xy),
        None => vec![Vec::new(); n],
    };
    let mut degree = vec![0usize; n];
    for &(u, v, _) in &plain {
        degree[u] += 1;
        degree[v] += 1;
    }
    for (&u, (ln, nb)) in &rots {
        known(u, *ln)?;
        rotation[u] = nb.clone();
    }
    if coords.is_none() {
        for u in 0..n {
            if rots.contains_key(&u) {
                continue;
            }
            if degree[u] > 2 {
                let ln = verts[&u].0;
                return Err(err(
                    ln,
                    format!("vertex {u} needs a rotation or coordinates"),
                ));
            }
            rotation[u] = plain
                .iter()
                .filter_map(|&(a, b, _)| {
                    if a == u {
                        Some(b)
                    } else if b == u {
                        Some(a)
                    } else {
                        None
                    }
                })
                .collect();
        }
    }
    let rot_line = |u: usize| rots.get(&u).map_or(verts[&u].0, |r| r.0);
    let graph = EmbeddedGraph::from_rotation(n, &plain, &rotation).map_err(|m| {
        let u = m
            .split_whitespace()
            .nth(2)
            .and_then(|t| t.parse().ok())
            .filter(|&u: &usize| u < n);
        err(u.map_or(1, rot_line), m)
    })?;
    if !graph.is_planar_embedding() {
        let ln = rots.values().map(|r| r.0).min().unwrap_or(1);
        return Err(err(
            ln,
            "rotation system is not planar (Euler characteristic check failed)",
        ));
    }
    Ok(FlInstance {
        graph,
        coords,
        clients: clients
            .iter()
            .map(|&(vertex, mult, _)| Client { vertex, mult })
            .collect(),
        facilities: facs
            .iter()
            .map(|&(vertex, cost, _)| Facility { vertex, cost })
            .collect(),
        label,
    })
}

pub fn serialize_instance(inst: &FlInstance) -> String {
    let mut out = String::new();
    out.push_str(HEADER);
    out.push('\n');
    if !inst.label.is_empty() {
        let _ = writeln!(out, "# label: {}", inst.label);
    }
    let g = &inst.graph;
    for v in 0..g.n() {
        match &inst.coords {
            Some(xy) => {
                let _ = writeln!(out, "v {v} {} {}", xy[v][0], xy[v][1]);
            }
            None => {
                let _ = writeln!(out, "v {v}");
            }
        }
    }
    for e in &g.edges {
        let _ = writeln!(out, "e {} {} {}", e.u, e.v, e.w);
    }
    for v in 0..g.n() {
        if g.rotation(v).is_empty() {
            continue;
        }
        let nb: Vec<String> = g.neighbours(v).map(|x| x.to_string()).collect();
        let _ = writeln!(out, "rot {v} {}", nb.join(" "));
    }
    for c in &inst.clients {
        let _ = writeln!(out, "c {} {}", c.vertex, c.mult);
    }
    for f in &inst.facilities {
        let _ = writeln!(out, "f {} {}", f.vertex, f.cost);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE: &str = "planar-fl v1\n# label: t\nv 0 0 0\nv 1 1 0\nv 2 0 1\ne 0 1 1\ne 1 2 1.5\ne 0 2 1\nc 1 2\nf 2 3.5\n";

    #[test]
    fn triangle_has_two_faces() {
        let inst = parse_instance(TRIANGLE).unwrap();
        assert_eq!(inst.graph.faces().0.len(), 2);
        assert_eq!(inst.label, "t");
        assert_eq!(inst.clients, vec![Client { vertex: 1, mult: 2 }]);
    }

    #[test]
    fn round_trip() {
        let inst = parse_instance(TRIANGLE).unwrap();
        let text = serialize_instance(&inst);
        let again = parse_instance(&text).unwrap();
        assert_eq!(again, inst);
        assert_eq!(serialize_instance(&again), text);
    }

    #[test]
    fn unknown_facility_vertex_names_line() {
        let bad = TRIANGLE.replace("f 2 3.5", "f 7 3.5");
        match parse_instance(&bad) {
            Err(FlError::Parse { line, .. }) => assert_eq!(line, 10),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn distinct_diagnostics() {
        let dup = TRIANGLE.replace("e 0 2 1\n", "e 0 2 1\ne 2 0 4\n");
        assert!(matches!(
            parse_instance(&dup),
            Err(FlError::Parse { line: 9, .. })
        ));
        let neg = TRIANGLE.replace("e 1 2 1.5", "e 1 2 -1");
        assert!(matches!(
            parse_instance(&neg),
            Err(FlError::Parse { line: 7, .. })
        ));
        let k4 = "planar-fl v1\nv 0\nv 1\nv 2\nv 3\ne 0 1 1\ne 0 2 1\ne 0 3 1\ne 1 2 1\ne 1 3 1\ne 2 3 1\n\
                  rot 0 1 2 3\nrot 1 0 2 3\nrot 2 0 1 3\nrot 3 0 1 2\n";
        let e = parse_instance(k4).unwrap_err();
        assert!(e.to_string().contains("not planar"), "{e}");
    }
}
