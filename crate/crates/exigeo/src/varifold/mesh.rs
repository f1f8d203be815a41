//! Triangle meshes in `R^3` (surface dimension n = 2): OFF/OBJ ingestion,
//! exact triangle-ball clipping, and boundary-polyline extraction.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{ExigeoError, Result};
use crate::linalg::VecN;

#[derive(Clone, Debug)]
pub struct TriangleMesh {
    pub vertices: Vec<[f64; 3]>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriangleMesh {
    pub fn new(vertices: Vec<[f64; 3]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        for t in &triangles {
            for &i in t {
                if i >= vertices.len() {
                    return Err(ExigeoError::validation("triangle index out of range"));
                }
            }
        }
        Ok(TriangleMesh { vertices, triangles })
    }

    pub fn read_off<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut lines = BufReader::new(file).lines();
        let mut tokens: Vec<String> = Vec::new();
        let mut first = true;
        while let Some(line) = lines.next() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim().to_string();
            if body.is_empty() {
                continue;
            }
            if first {
                if body != "OFF" {
                    return Err(ExigeoError::validation("missing OFF header"));
                }
                first = false;
                continue;
            }
            tokens.extend(body.split_whitespace().map(|s| s.to_string()));
        }
        let mut it = tokens.into_iter();
        let mut next_num = |what: &str| -> Result<f64> {
            it.next()
                .ok_or_else(|| ExigeoError::validation(format!("OFF truncated at {what}")))?
                .parse::<f64>()
                .map_err(|_| ExigeoError::validation(format!("bad number in OFF ({what})")))
        };
        let nv = next_num("vertex count")? as usize;
        let nf = next_num("face count")? as usize;
        let _ne = next_num("edge count")?;
        let mut vertices = Vec::with_capacity(nv);
        for _ in 0..nv {
            vertices.push([next_num("x")?, next_num("y")?, next_num("z")?]);
        }
        let mut triangles = Vec::with_capacity(nf);
        for _ in 0..nf {
            let k = next_num("face arity")? as usize;
            if k != 3 {
                return Err(ExigeoError::validation("only triangle faces are supported"));
            }
            let a = next_num("i")? as usize;
            let b = next_num("j")? as usize;
            let c = next_num("k")? as usize;
            triangles.push([a, b, c]);
        }
        TriangleMesh::new(vertices, triangles)
    }

    pub fn read_obj<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for line in BufReader::new(file).lines() {
            let line = line?;
            let body = line.split('#').next().unwrap_or("").trim().to_string();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            match parts.next() {
                Some("v") => {
                    let xs: Vec<f64> = parts
                        .take(3)
                        .map(|t| t.parse::<f64>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| ExigeoError::validation("bad vertex in OBJ"))?;
                    if xs.len() != 3 {
                        return Err(ExigeoError::validation("vertex needs 3 coordinates"));
                    }
                    vertices.push([xs[0], xs[1], xs[2]]);
                }
                Some("f") => {
                    // normals/texcoords after '/' are ignored
                    let idx: Vec<usize> = parts
                        .map(|t| {
                            t.split('/')
                                .next()
                                .unwrap_or("")
                                .parse::<usize>()
                                .map(|i| i - 1)
                                .map_err(|_| ExigeoError::validation("bad face index in OBJ"))
                        })
                        .collect::<Result<_>>()?;
                    if idx.len() != 3 {
                        return Err(ExigeoError::validation("only triangle faces are supported"));
                    }
                    triangles.push([idx[0], idx[1], idx[2]]);
                }
                _ => {}
            }
        }
        TriangleMesh::new(vertices, triangles)
    }

    pub fn read_auto<P: AsRef<Path>>(path: P) -> Result<Self> {
        let p = path.as_ref();
        match p.extension().and_then(|e| e.to_str()).map(|s| s.to_ascii_lowercase()) {
            Some(ref e) if e == "off" => Self::read_off(p),
            Some(ref e) if e == "obj" => Self::read_obj(p),
            _ => Err(ExigeoError::validation("mesh files must end in .off or .obj")),
        }
    }

    pub fn write_off<W: Write>(&self, out: &mut W) -> Result<()> {
        writeln!(out, "OFF")?;
        writeln!(out, "{} {} 0", self.vertices.len(), self.triangles.len())?;
        for v in &self.vertices {
            writeln!(out, "{:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn write_obj<W: Write>(&self, out: &mut W) -> Result<()> {
        for v in &self.vertices {
            writeln!(out, "v {:.17e} {:.17e} {:.17e}", v[0], v[1], v[2])?;
        }
        for t in &self.triangles {
            writeln!(out, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
        }
        Ok(())
    }

    pub fn total_area(&self) -> f64 {
        self.triangles.iter().map(|t| self.triangle_area(t)).sum()
    }

    fn triangle_area(&self, t: &[usize; 3]) -> f64 {
        let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
        let u = sub(b, a);
        let v = sub(c, a);
        0.5 * norm(cross(u, v))
    }

    /// Exact area of (mesh intersect ball of radius `r` about the origin).
    /// Each triangle meets the ball in (triangle intersect disk) within its
    /// own plane, which is computed in closed form.
    pub fn area_within_ball(&self, r: f64) -> f64 {
        self.triangles.iter().map(|t| self.triangle_ball_area(t, r)).sum()
    }

    fn triangle_ball_area(&self, t: &[usize; 3], r: f64) -> f64 {
        let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
        let u = sub(b, a);
        let v = sub(c, a);
        let nrm = cross(u, v);
        let nn = norm(nrm);
        if nn < 1e-300 {
            return 0.0;
        }
        let unit = [nrm[0] / nn, nrm[1] / nn, nrm[2] / nn];
        // distance from origin to the triangle plane
        let dist = dot(unit, a);
        let rad_sq = r * r - dist * dist;
        if rad_sq <= 0.0 {
            return 0.0;
        }
        // in-plane frame centered at the disk center (foot of the origin)
        let center = [unit[0] * dist, unit[1] * dist, unit[2] * dist];
        let e1n = {
            let mut e = u;
            let d = dot(e, unit);
            e = [e[0] - d * unit[0], e[1] - d * unit[1], e[2] - d * unit[2]];
            let l = norm(e);
            [e[0] / l, e[1] / l, e[2] / l]
        };
        let e2n = cross(unit, e1n);
        let to2d = |p: [f64; 3]| -> (f64, f64) {
            let q = sub(p, center);
            (dot(q, e1n), dot(q, e2n))
        };
        let poly = [to2d(a), to2d(b), to2d(c)];
        polygon_disk_area(&poly, rad_sq.sqrt()).abs()
    }

    /// Boundary edges: edges incident to exactly one triangle, with the
    /// outward in-plane conormal of the incident triangle.
    pub fn boundary_edges(&self) -> Vec<BoundaryEdge> {
        let mut count: HashMap<(usize, usize), (usize, usize)> = HashMap::new();
        for (ti, t) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (i, j) = (t[k], t[(k + 1) % 3]);
                let key = (i.min(j), i.max(j));
                let e = count.entry(key).or_insert((0, ti));
                e.0 += 1;
                e.1 = ti;
            }
        }
        let mut out = Vec::new();
        for ((i, j), (c, ti)) in count {
            if c != 1 {
                continue;
            }
            let t = self.triangles[ti];
            let [a, b] = [self.vertices[i], self.vertices[j]];
            let opp = t.iter().copied().find(|&v| v != i && v != j).unwrap();
            let o = self.vertices[opp];
            let e = sub(b, a);
            let len = norm(e);
            let eu = [e[0] / len, e[1] / len, e[2] / len];
            // in-plane direction perpendicular to the edge, away from the triangle
            let mid = [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0, (a[2] + b[2]) / 2.0];
            let to_opp = sub(o, mid);
            let mut conormal = sub(to_opp, [eu[0] * dot(to_opp, eu), eu[1] * dot(to_opp, eu), eu[2] * dot(to_opp, eu)]);
            let cl = norm(conormal);
            conormal = [-conormal[0] / cl, -conormal[1] / cl, -conormal[2] / cl];
            out.push(BoundaryEdge {
                midpoint: VecN::from_slice(&mid),
                conormal: VecN::from_slice(&conormal),
                length: len,
            });
        }
        // deterministic order
        out.sort_by(|a, b| {
            a.midpoint
                .as_slice()
                .partial_cmp(b.midpoint.as_slice())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        out
    }

    pub fn radius_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for v in &self.vertices {
            let r = norm(*v);
            lo = lo.min(r);
            hi = hi.max(r);
        }
        (lo, hi)
    }

    /// Moller-Trumbore ray-triangle intersections from the origin.
    pub fn ray_intersections(&self, dir: &VecN) -> Vec<f64> {
        let d = [dir.get(0), dir.get(1), dir.get(2)];
        let mut hits = Vec::new();
        for t in &self.triangles {
            let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
            let e1 = sub(b, a);
            let e2 = sub(c, a);
            let p = cross(d, e2);
            let det = dot(e1, p);
            if det.abs() < 1e-300 {
                continue;
            }
            let inv = 1.0 / det;
            let tv = [-a[0], -a[1], -a[2]];
            let uu = dot(tv, p) * inv;
            if !(-1e-12..=1.0 + 1e-12).contains(&uu) {
                continue;
            }
            let q = cross(tv, e1);
            let vv = dot(d, q) * inv;
            if vv < -1e-12 || uu + vv > 1.0 + 1e-12 {
                continue;
            }
            let dist = dot(e2, q) * inv;
            if dist > 1e-12 {
                hits.push(dist);
            }
        }
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        hits.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * (*a + *b));
        hits
    }

    pub fn sample_points(&self) -> Vec<VecN> {
        self.triangles
            .iter()
            .map(|t| {
                let [a, b, c] = [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]];
                VecN::from_slice(&[
                    (a[0] + b[0] + c[0]) / 3.0,
                    (a[1] + b[1] + c[1]) / 3.0,
                    (a[2] + b[2] + c[2]) / 3.0,
                ])
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct BoundaryEdge {
    pub midpoint: VecN,
    pub conormal: VecN,
    pub length: f64,
}

/// Signed area of (polygon intersect disk of radius `r` centered at the
/// origin) by Green's theorem: each directed edge contributes the area of
/// the circular-sector-clipped triangle (origin, p, q).
fn polygon_disk_area(poly: &[(f64, f64)], r: f64) -> f64 {
    let mut area = 0.0;
    let m = poly.len();
    for i in 0..m {
        let p = poly[i];
        let q = poly[(i + 1) % m];
        area += edge_disk_contribution(p, q, r);
    }
    area
}

fn cross2(a: (f64, f64), b: (f64, f64)) -> f64 {
    a.0 * b.1 - a.1 * b.0
}

fn norm2_sq(a: (f64, f64)) -> f64 {
    a.0 * a.0 + a.1 * a.1
}

/// Area of triangle (0, p, q) intersected with the disk, signed by the
/// orientation of (p, q).
fn edge_disk_contribution(p: (f64, f64), q: (f64, f64), r: f64) -> f64 {
    let r_sq = r * r;
    let p_in = norm2_sq(p) <= r_sq;
    let q_in = norm2_sq(q) <= r_sq;
    // intersections of segment p + t (q - p) with the circle
    let d = (q.0 - p.0, q.1 - p.1);
    let a = norm2_sq(d);
    if a < 1e-300 {
        return 0.0;
    }
    let b = 2.0 * (p.0 * d.0 + p.1 * d.1);
    let c = norm2_sq(p) - r_sq;
    let disc = b * b - 4.0 * a * c;
    let mut ts: Vec<f64> = Vec::new();
    if disc > 0.0 {
        let sq = disc.sqrt();
        for t in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
            if t > 1e-14 && t < 1.0 - 1e-14 {
                ts.push(t);
            }
        }
    }
    ts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let at = |t: f64| (p.0 + t * d.0, p.1 + t * d.1);
    let mut total = 0.0;
    let mut prev_t = 0.0;
    let mut prev_pt = p;
    let mut prev_in = p_in;
    let mut pieces = ts.iter().copied().chain(std::iter::once(1.0));
    loop {
        let t = match pieces.next() {
            Some(t) => t,
            None => break,
        };
        let pt = if t >= 1.0 { q } else { at(t) };
        let mid = at(0.5 * (prev_t + t));
        let mid_in = norm2_sq(mid) <= r_sq;
        if mid_in {
            // straight piece inside: triangle (0, prev_pt, pt)
            total += 0.5 * cross2(prev_pt, pt);
        } else {
            // piece outside: circular sector between the two directions
            let a0 = prev_pt.1.atan2(prev_pt.0);
            let a1 = pt.1.atan2(pt.0);
            let mut da = a1 - a0;
            while da > std::f64::consts::PI {
                da -= 2.0 * std::f64::consts::PI;
            }
            while da < -std::f64::consts::PI {
                da += 2.0 * std::f64::consts::PI;
            }
            total += 0.5 * r_sq * da;
        }
        prev_t = t;
        prev_pt = pt;
        prev_in = mid_in;
    }
    let _ = (q_in, prev_in);
    total
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn norm(a: [f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn disk_area_of_containing_triangle() {
        // big triangle containing the unit disk
        let poly = [(-10.0, -10.0), (10.0, -10.0), (0.0, 10.0)];
        let a = polygon_disk_area(&poly, 1.0);
        assert!((a - PI).abs() < 1e-12, "{a}");
    }

    #[test]
    fn disk_area_small_triangle_inside() {
        let poly = [(0.1, 0.1), (0.3, 0.1), (0.1, 0.4)];
        let a = polygon_disk_area(&poly, 2.0);
        assert!((a - 0.5 * 0.2 * 0.3).abs() < 1e-14);
    }

    #[test]
    fn disk_area_triangle_outside() {
        let poly = [(2.0, 0.0), (3.0, 0.0), (2.0, 1.0)];
        let a = polygon_disk_area(&poly, 1.0);
        assert!(a.abs() < 1e-12, "{a}");
    }

    #[test]
    fn disk_area_straddling_vs_monte_carlo() {
        let poly = [(-0.2, -0.3), (1.4, 0.1), (0.2, 1.3)];
        let r = 0.9;
        let exact = polygon_disk_area(&poly, r);
        // deterministic grid estimate
        let m = 4000;
        let mut count = 0usize;
        let (x0, x1, y0, y1) = (-0.3f64, 1.5f64, -0.4f64, 1.4f64);
        for i in 0..m {
            for j in 0..m {
                let x = x0 + (x1 - x0) * (i as f64 + 0.5) / m as f64;
                let y = y0 + (y1 - y0) * (j as f64 + 0.5) / m as f64;
                if x * x + y * y > r * r {
                    continue;
                }
                // inside triangle?
                let sgn = |a: (f64, f64), b: (f64, f64)| (x - a.0) * (b.1 - a.1) - (y - a.1) * (b.0 - a.0);
                let d0 = sgn(poly[0], poly[1]);
                let d1 = sgn(poly[1], poly[2]);
                let d2 = sgn(poly[2], poly[0]);
                if (d0 >= 0.0 && d1 >= 0.0 && d2 >= 0.0) || (d0 <= 0.0 && d1 <= 0.0 && d2 <= 0.0) {
                    count += 1;
                }
            }
        }
        let approx = count as f64 * (x1 - x0) * (y1 - y0) / (m * m) as f64;
        assert!((exact - approx).abs() < 3e-4, "{exact} vs {approx}");
    }

    fn annulus_mesh(hole: f64, outer: f64, rings: usize, sectors: usize) -> TriangleMesh {
        let mut vertices = Vec::new();
        for i in 0..=rings {
            let r = hole + (outer - hole) * i as f64 / rings as f64;
            for j in 0..sectors {
                let t = 2.0 * PI * j as f64 / sectors as f64;
                vertices.push([r * t.cos(), r * t.sin(), 0.0]);
            }
        }
        let mut triangles = Vec::new();
        let idx = |i: usize, j: usize| i * sectors + (j % sectors);
        for i in 0..rings {
            for j in 0..sectors {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        TriangleMesh::new(vertices, triangles).unwrap()
    }

    #[test]
    fn flat_mesh_mass_is_exact_polygon_area() {
        let mesh = annulus_mesh(0.5, 3.0, 8, 64);
        // the mesh is a polygonal annulus in the plane z=0; clipped at r the
        // outer part is polygon-circle intersection, exact by construction.
        let r = 2.0;
        let got = mesh.area_within_ball(r);
        // oracle: outer boundary is a regular 64-gon inscribed at radii;
        // within r=2 the mesh covers the full disk minus the inner 64-gon hole
        let k = 64.0;
        let hole_area = 0.5 * k * 0.5 * 0.5 * (2.0 * PI / k).sin();
        let expect = PI * r * r - hole_area;
        assert!((got - expect).abs() < 1e-10, "{got} vs {expect}");
    }

    #[test]
    fn boundary_edges_of_annulus() {
        let mesh = annulus_mesh(1.0, 2.0, 2, 16);
        let edges = mesh.boundary_edges();
        assert_eq!(edges.len(), 32); // 16 inner + 16 outer
        for e in &edges {
            let r = e.midpoint.norm();
            assert!(e.conormal.norm() > 0.999);
            // inner-rim conormals point inward (negative x . conormal)
            if r < 1.5 {
                assert!(e.midpoint.dot(&e.conormal) < 0.0);
            } else {
                assert!(e.midpoint.dot(&e.conormal) > 0.0);
            }
        }
    }

    #[test]
    fn obj_off_round_trip() {
        let mesh = annulus_mesh(1.0, 2.0, 1, 8);
        let dir = std::env::temp_dir().join("exigeo_mesh_test");
        std::fs::create_dir_all(&dir).unwrap();
        let off = dir.join("m.off");
        let obj = dir.join("m.obj");
        mesh.write_off(&mut std::fs::File::create(&off).unwrap()).unwrap();
        mesh.write_obj(&mut std::fs::File::create(&obj).unwrap()).unwrap();
        let m1 = TriangleMesh::read_auto(&off).unwrap();
        let m2 = TriangleMesh::read_auto(&obj).unwrap();
        assert_eq!(m1.triangles, mesh.triangles);
        assert_eq!(m2.triangles, mesh.triangles);
        assert!((m1.total_area() - mesh.total_area()).abs() < 1e-12);
        assert!((m2.total_area() - mesh.total_area()).abs() < 1e-12);
    }

    #[test]
    fn ray_intersection_counts() {
        // tilt and offset the annulus so rays from the origin are transversal
        let mut mesh = annulus_mesh(0.5, 3.0, 4, 32);
        for v in &mut mesh.vertices {
            v[2] = 0.2 * v[0] + 0.5;
        }
        let hit = mesh.ray_intersections(&VecN::from_slice(&[1.0, 0.0, 0.4]).normalized().unwrap());
        assert_eq!(hit.len(), 1, "{hit:?}");
        // this one exits through the hole
        let miss = mesh.ray_intersections(&VecN::from_slice(&[0.6, 0.0, 0.8]));
        assert!(miss.is_empty());
    }
}
