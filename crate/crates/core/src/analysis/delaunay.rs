use std::collections::{HashMap, HashSet, VecDeque};

/// Twice the signed area of `abc`; positive when counter-clockwise.
fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// Positive when `d` lies inside the circumcircle of the counter-clockwise
/// triangle `abc`.
fn in_circle(a: [f64; 2], b: [f64; 2], c: [f64; 2], d: [f64; 2]) -> f64 {
    let (adx, ady) = (a[0] - d[0], a[1] - d[1]);
    let (bdx, bdy) = (b[0] - d[0], b[1] - d[1]);
    let (cdx, cdy) = (c[0] - d[0], c[1] - d[1]);
    let ad = adx * adx + ady * ady;
    let bd = bdx * bdx + bdy * bdy;
    let cd = cdx * cdx + cdy * cdy;
    adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)
}

/// Delaunay triangulation of a planar point set.
#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    /// Distinct input points, sorted lexicographically.
    pub points: Vec<[f64; 2]>,
    /// Counter-clockwise vertex triples indexing `points`.
    pub triangles: Vec<[usize; 3]>,
}

impl Triangulation {
    pub fn area(&self) -> f64 {
        self.triangles
            .iter()
            .map(|t| 0.5 * orient(self.points[t[0]], self.points[t[1]], self.points[t[2]]))
            .sum()
    }
}

fn dedup_sorted(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    pts
}

/// Maps the points into a box of unit span centred on the origin.
fn normalize(points: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in points {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let centre = [(lo[0] + hi[0]) / 2.0, (lo[1] + hi[1]) / 2.0];
    points
        .iter()
        .map(|p| [(p[0] - centre[0]) / span, (p[1] - centre[1]) / span])
        .collect()
}

fn all_collinear(points: &[[f64; 2]]) -> bool {
    let a = points[0];
    let far = points
        .iter()
        .copied()
        .max_by(|p, q| {
            let dp = (p[0] - a[0]).hypot(p[1] - a[1]);
            let dq = (q[0] - a[0]).hypot(q[1] - a[1]);
            dp.total_cmp(&dq)
        })
        .expect("non-empty");
    points.iter().all(|&p| orient(a, far, p) == 0.0)
}

/// Bowyer–Watson insertion with a bounding super-triangle, followed by a
/// pass that closes reflex notches along the boundary so the triangles tile
/// the convex hull. Duplicate points are merged first. Fewer than three
/// distinct points, or collinear ones, give no triangles.
pub fn delaunay(points: &[[f64; 2]]) -> Triangulation {
    let points = dedup_sorted(points);
    if points.len() < 3 || all_collinear(&points) {
        return Triangulation {
            points,
            triangles: Vec::new(),
        };
    }
    let n = points.len();
    let mut v = normalize(&points);
    const M: f64 = 100.0;
    v.extend([[-M, -M], [M, -M], [0.0, M]]);

    let mut tris: Vec<[usize; 3]> = vec![[n, n + 1, n + 2]];
    for p in 0..n {
        insert(&v, &mut tris, p);
    }
    tris.retain(|t| t.iter().all(|&i| i < n));
    fill_reflex_notches(&v[..n], &mut tris);
    legalize(&v[..n], &mut tris);
    Triangulation {
        points,
        triangles: tris,
    }
}

fn insert(v: &[[f64; 2]], tris: &mut Vec<[usize; 3]>, p: usize) {
    let pt = v[p];
    let contains = |t: &[usize; 3]| {
        (0..3).all(|k| orient(v[t[k]], v[t[(k + 1) % 3]], pt) >= 0.0)
    };
    let seeds: Vec<usize> = (0..tris.len()).filter(|&i| contains(&tris[i])).collect();
    let mut candidate: HashSet<usize> = (0..tris.len())
        .filter(|&i| {
            let t = tris[i];
            in_circle(v[t[0]], v[t[1]], v[t[2]], pt) > 0.0
        })
        .collect();
    candidate.extend(seeds.iter().copied());

    let cavity = loop {
        let cavity = connected_from(tris, &candidate, &seeds);
        // every boundary edge must see the new point strictly on its left,
        // otherwise the cavity is not star-shaped; drop offending triangles
        let mut bad = None;
        for (edge, owner) in boundary_edges(tris, &cavity) {
            if orient(v[edge.0], v[edge.1], pt) <= 0.0 && !seeds.contains(&owner) {
                bad = Some(owner);
                break;
            }
        }
        match bad {
            Some(t) => {
                candidate.remove(&t);
            }
            None => break cavity,
        }
    };

    let boundary = boundary_edges(tris, &cavity);
    let mut kill: Vec<usize> = cavity.into_iter().collect();
    kill.sort_unstable_by(|a, b| b.cmp(a));
    for k in kill {
        tris.swap_remove(k);
    }
    for ((a, b), _) in boundary {
        if orient(v[a], v[b], pt) > 0.0 {
            tris.push([a, b, p]);
        }
    }
}

fn connected_from(tris: &[[usize; 3]], candidate: &HashSet<usize>, seeds: &[usize]) -> Vec<usize> {
    let mut by_edge: HashMap<(usize, usize), usize> = HashMap::new();
    for &i in candidate {
        let t = tris[i];
        for k in 0..3 {
            by_edge.insert((t[k], t[(k + 1) % 3]), i);
        }
    }
    let mut seen: HashSet<usize> = seeds.iter().copied().collect();
    let mut queue: VecDeque<usize> = seeds.iter().copied().collect();
    while let Some(i) = queue.pop_front() {
        let t = tris[i];
        for k in 0..3 {
            if let Some(&j) = by_edge.get(&(t[(k + 1) % 3], t[k])) {
                if seen.insert(j) {
                    queue.push_back(j);
                }
            }
        }
    }
    let mut out: Vec<usize> = seen.into_iter().collect();
    out.sort_unstable();
    out
}

/// Directed edges of the cavity whose twin lies outside it, with the
/// owning triangle, in a deterministic order.
fn boundary_edges(tris: &[[usize; 3]], cavity: &[usize]) -> Vec<((usize, usize), usize)> {
    let edges: HashSet<(usize, usize)> = cavity
        .iter()
        .flat_map(|&i| {
            let t = tris[i];
            (0..3).map(move |k| (t[k], t[(k + 1) % 3]))
        })
        .collect();
    let mut out = Vec::new();
    for &i in cavity {
        let t = tris[i];
        for k in 0..3 {
            let e = (t[k], t[(k + 1) % 3]);
            if !edges.contains(&(e.1, e.0)) {
                out.push((e, i));
            }
        }
    }
    out
}

fn fill_reflex_notches(v: &[[f64; 2]], tris: &mut Vec<[usize; 3]>) {
    loop {
        let edges: HashSet<(usize, usize)> = tris
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .collect();
        let mut next: Vec<(usize, usize)> = edges
            .iter()
            .copied()
            .filter(|&(a, b)| !edges.contains(&(b, a)))
            .collect();
        next.sort_unstable();
        let succ: HashMap<usize, usize> = next.iter().copied().collect();

        let mut added = false;
        for &(u, w0) in &next {
            let Some(&w) = succ.get(&w0) else { continue };
            let vtx = w0;
            if w == u || orient(v[u], v[vtx], v[w]) >= 0.0 {
                continue;
            }
            let tri = [u, w, vtx];
            let empty = (0..v.len()).all(|x| {
                tri.contains(&x)
                    || !(0..3).all(|k| orient(v[tri[k]], v[tri[(k + 1) % 3]], v[x]) > 0.0)
            });
            if empty {
                tris.push(tri);
                added = true;
                break;
            }
        }
        if !added {
            return;
        }
    }
}

/// Lawson flips until every interior edge is locally Delaunay. Needed for
/// the triangles added along the hull, whose circumcircles may hold points.
fn legalize(v: &[[f64; 2]], tris: &mut [[usize; 3]]) {
    const TOL: f64 = 1e-12;
    for _ in 0..(tris.len() * tris.len()).max(16) {
        let mut owner: HashMap<(usize, usize), usize> = HashMap::new();
        for (i, t) in tris.iter().enumerate() {
            for k in 0..3 {
                owner.insert((t[k], t[(k + 1) % 3]), i);
            }
        }
        let mut flipped = false;
        'scan: for i in 0..tris.len() {
            for k in 0..3 {
                let t = tris[i];
                let (a, b, c) = (t[k], t[(k + 1) % 3], t[(k + 2) % 3]);
                let Some(&j) = owner.get(&(b, a)) else { continue };
                let u = tris[j];
                let d = u.iter().copied().find(|&x| x != a && x != b).expect("triangle");
                if in_circle(v[a], v[b], v[c], v[d]) > TOL
                    && orient(v[a], v[d], v[c]) > 0.0
                    && orient(v[b], v[c], v[d]) > 0.0
                {
                    tris[i] = [a, d, c];
                    tris[j] = [b, c, d];
                    flipped = true;
                    break 'scan;
                }
            }
        }
        if !flipped {
            return;
        }
    }
}

/// Area covered by the Delaunay triangulation of one cluster; equals its
/// convex-hull area.
pub fn cluster_area(points: &[[f64; 2]]) -> f64 {
    delaunay(points).area()
}

#[cfg(test)]
pub(crate) mod oracle {
    /// Andrew's monotone chain hull area.
    pub fn hull_area(points: &[[f64; 2]]) -> f64 {
        let mut p = points.to_vec();
        p.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        p.dedup();
        if p.len() < 3 {
            return 0.0;
        }
        let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| {
            (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
        };
        let mut hull: Vec<[f64; 2]> = Vec::new();
        for pass in 0..2 {
            let start = hull.len();
            let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 {
                Box::new(p.iter())
            } else {
                Box::new(p.iter().rev())
            };
            for &q in iter {
                while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], q) <= 0.0 {
                    hull.pop();
                }
                hull.push(q);
            }
            hull.pop();
        }
        let n = hull.len();
        (0..n)
            .map(|i| {
                let (a, b) = (hull[i], hull[(i + 1) % n]);
                a[0] * b[1] - a[1] * b[0]
            })
            .sum::<f64>()
            .abs()
            / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::oracle::hull_area;
    use super::*;
    use crate::util::seeded_rng;
    use rand::Rng;

    fn is_delaunay(t: &Triangulation) -> bool {
        let v = normalize(&t.points);
        t.triangles.iter().all(|tri| {
            (0..v.len()).all(|d| {
                tri.contains(&d) || in_circle(v[tri[0]], v[tri[1]], v[tri[2]], v[d]) <= 1e-9
            })
        })
    }

    #[test]
    fn unit_square() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        assert!((cluster_area(&sq) - 1.0).abs() < 1e-15);
        assert_eq!(delaunay(&sq).triangles.len(), 2);
    }

    #[test]
    fn degenerate_inputs_have_no_area() {
        assert_eq!(cluster_area(&[]), 0.0);
        assert_eq!(cluster_area(&[[0.0, 0.0], [1.0, 1.0]]), 0.0);
        assert_eq!(cluster_area(&[[0.0, 0.0], [1.0, 1.0], [2.0, 2.0]]), 0.0);
        assert_eq!(cluster_area(&[[1.0, 1.0]; 5]), 0.0);
    }

    #[test]
    fn duplicates_are_merged() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 0.0]];
        assert!((cluster_area(&pts) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn random_sets_match_hull() {
        let mut rng = seeded_rng(21);
        for case in 0..200 {
            let n = rng.gen_range(3..120);
            let sx = rng.gen_range(0.01..10.0);
            let pts: Vec<[f64; 2]> = (0..n)
                .map(|_| [rng.gen_range(-sx..sx), rng.gen_range(-1.0..1.0)])
                .collect();
            let t = delaunay(&pts);
            let hull = hull_area(&pts);
            assert!((t.area() - hull).abs() <= 1e-9 * hull.max(1.0), "case {case}");
            assert!(t.triangles.iter().all(|tri| orient(t.points[tri[0]], t.points[tri[1]], t.points[tri[2]]) > 0.0));
            assert!(is_delaunay(&t), "case {case}");
        }
    }

    #[test]
    fn lattice_points_match_hull() {
        // cocircular and collinear everywhere
        let mut rng = seeded_rng(4);
        for _ in 0..30 {
            let (w, h) = (rng.gen_range(2..12), rng.gen_range(2..12));
            let theta: f64 = rng.gen_range(0.0..std::f64::consts::PI);
            let (c, s) = (theta.cos(), theta.sin());
            let pts: Vec<[f64; 2]> = (0..w)
                .flat_map(|i| (0..h).map(move |j| (i as f64 * 0.1, j as f64 * 0.1)))
                .map(|(x, y)| [c * x - s * y, s * x + c * y])
                .collect();
            let expect = (w - 1) as f64 * 0.1 * (h - 1) as f64 * 0.1;
            assert!((cluster_area(&pts) - expect).abs() < 1e-9, "{w}x{h}");
            assert!((hull_area(&pts) - expect).abs() < 1e-9);
        }
    }

    #[test]
    fn dense_unit_square_sample() {
        let mut rng = seeded_rng(8);
        let pts: Vec<[f64; 2]> = (0..2000)
            .map(|_| [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)])
            .collect();
        let a = cluster_area(&pts);
        assert!((a - 1.0).abs() < 0.02, "area {a}");
        assert!((a - hull_area(&pts)).abs() < 1e-9);
    }
}
