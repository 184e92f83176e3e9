//! Marching-squares isolines of a resolvent grid.

use std::collections::HashMap;

use serde::Serialize;

use super::resolvent::ResolventGrid;

#[derive(Debug, Clone, Serialize)]
pub struct Polyline {
    pub level: f64,
    /// Points `(Re z, Im z)`.
    pub points: Vec<(f64, f64)>,
    pub closed: bool,
}

/// Edge identifier: `(is_vertical, i, j)` for the edge starting at node `(i, j)`.
type EdgeId = (bool, usize, usize);

/// Even-odd point-in-polygon test.
pub fn point_in_polygon(pt: (f64, f64), poly: &[(f64, f64)]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for k in 0..n {
        let (a, b) = (poly[k], poly[(k + 1) % n]);
        if (a.1 > pt.1) != (b.1 > pt.1) {
            let x = a.0 + (pt.1 - a.1) / (b.1 - a.1) * (b.0 - a.0);
            if pt.0 < x {
                inside = !inside;
            }
        }
    }
    inside
}

pub fn contour_extract(grid: &ResolventGrid, levels: &[f64]) -> Vec<Polyline> {
    let mut out = Vec::new();
    let vmin = grid.values.iter().copied().fold(f64::INFINITY, f64::min);
    let vmax = grid.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for &level in levels {
        if !(level > vmin && level < vmax) {
            continue;
        }
        out.extend(isolines(grid, level));
    }
    out
}

fn isolines(g: &ResolventGrid, level: f64) -> Vec<Polyline> {
    let (nr, ni) = g.shape;
    let f = |i: usize, j: usize| g.value(i, j) - level;
    let point_on = |e: EdgeId| -> (f64, f64) {
        let (vert, i, j) = e;
        let (i2, j2) = if vert { (i, j + 1) } else { (i + 1, j) };
        let (a, b) = (f(i, j), f(i2, j2));
        let t = if a == b { 0.5 } else { a / (a - b) };
        let (za, zb) = (g.node(i, j), g.node(i2, j2));
        (za.re + t * (zb.re - za.re), za.im + t * (zb.im - za.im))
    };
    let mut segments: Vec<(EdgeId, EdgeId)> = Vec::new();
    for j in 0..ni - 1 {
        for i in 0..nr - 1 {
            let c = [f(i, j), f(i + 1, j), f(i + 1, j + 1), f(i, j + 1)];
            let code = c.iter().enumerate().fold(0u8, |acc, (k, v)| acc | (u8::from(*v < 0.0) << k));
            // edges: 0 bottom, 1 right, 2 top, 3 left
            let e = [(false, i, j), (true, i + 1, j), (false, i, j + 1), (true, i, j)];
            let center = c.iter().sum::<f64>() / 4.0;
            let pairs: &[(usize, usize)] = match code {
                0 | 15 => &[],
                1 | 14 => &[(3, 0)],
                2 | 13 => &[(0, 1)],
                3 | 12 => &[(3, 1)],
                4 | 11 => &[(1, 2)],
                6 | 9 => &[(0, 2)],
                7 | 8 => &[(3, 2)],
                5 => {
                    if center < 0.0 {
                        &[(3, 2), (0, 1)]
                    } else {
                        &[(3, 0), (1, 2)]
                    }
                }
                10 => {
                    if center < 0.0 {
                        &[(3, 0), (1, 2)]
                    } else {
                        &[(3, 2), (0, 1)]
                    }
                }
                _ => unreachable!(),
            };
            for &(a, b) in pairs {
                segments.push((e[a], e[b]));
            }
        }
    }
    let mut adj: HashMap<EdgeId, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        adj.entry(*a).or_default().push(k);
        adj.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start: EdgeId, used: &mut Vec<bool>, chain: &mut Vec<EdgeId>| {
        let mut cur = start;
        loop {
            let next = adj[&cur].iter().copied().find(|&k| !used[k]);
            let Some(k) = next else { break };
            used[k] = true;
            let (a, b) = segments[k];
            cur = if a == cur { b } else { a };
            chain.push(cur);
        }
    };
    // open chains start at edges with a single incident segment
    let mut starts: Vec<EdgeId> = adj.iter().filter(|(_, v)| v.len() == 1).map(|(e, _)| *e).collect();
    starts.sort();
    for s in starts {
        if adj[&s].iter().all(|&k| used[k]) {
            continue;
        }
        let mut chain = vec![s];
        walk(s, &mut used, &mut chain);
        lines.push(Polyline { level, points: chain.into_iter().map(point_on).collect(), closed: false });
    }
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        used[k] = true;
        let (a, b) = segments[k];
        let mut chain = vec![a, b];
        walk(b, &mut used, &mut chain);
        let closed = chain.len() > 2 && chain.first() == chain.last();
        if closed {
            chain.pop();
        }
        lines.push(Polyline { level, points: chain.into_iter().map(point_on).collect(), closed });
    }
    lines
}
