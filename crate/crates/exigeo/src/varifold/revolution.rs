//! Surfaces of revolution about an axis in `R^{n+1}`, represented by dense
//! Hermite tables over piecewise-smooth generating-curve parametrizations.
//! Vertical tangents (unduloid waist, catenoid neck, sphere poles) are
//! handled by choosing parameters in which the curve stays smooth.

use std::sync::Arc;

use crate::error::{ExigeoError, Result};
use crate::linalg::{unit_ball_volume, VecN};

type CurveFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;
type CurveDerivFn = Arc<dyn Fn(f64) -> (f64, f64) + Send + Sync>;

/// One smooth piece of a generating curve `s -> (rho(s), z(s))`, `s in [0,1]`.
#[derive(Clone)]
pub struct CurveSegment {
    pub gamma: CurveFn,
    pub dgamma: CurveDerivFn,
}

impl CurveSegment {
    pub fn new<F, D>(gamma: F, dgamma: D) -> Self
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
        D: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        CurveSegment { gamma: Arc::new(gamma), dgamma: Arc::new(dgamma) }
    }

    /// Graph segment `rho -> (rho, f(rho))` over `[a, b]`.
    pub fn graph<F, D>(f: F, df: D, a: f64, b: f64) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        D: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        let w = b - a;
        CurveSegment::new(
            move |s| {
                let rho = a + w * s;
                (rho, f(rho))
            },
            move |s| {
                let rho = a + w * s;
                (w, w * df(rho))
            },
        )
    }
}

#[derive(Clone, Debug)]
struct Node {
    s: f64,
    rho: f64,
    z: f64,
    drho: f64,
    dz: f64,
    /// cumulative lateral area from the start of the curve
    area: f64,
    /// |x|^2 = rho^2 + z^2
    radius_sq: f64,
}

/// A revolution hypersurface in `R^{n+1}` about `axis`, with the generating
/// curve sampled on a dense parameter grid per segment.
#[derive(Clone)]
pub struct RevolutionSurface {
    n: usize,
    axis: VecN,
    /// orthonormal basis of the axis complement
    frame: Vec<VecN>,
    segments: Vec<CurveSegment>,
    nodes: Vec<Vec<Node>>,
    area_total: f64,
}

impl RevolutionSurface {
    pub fn new(n: usize, axis: VecN, segments: Vec<CurveSegment>, samples_per_segment: usize) -> Result<Self> {
        if segments.is_empty() {
            return Err(ExigeoError::validation("revolution surface needs at least one segment"));
        }
        let axis = axis.normalized()?;
        if axis.dim() != n + 1 {
            return Err(ExigeoError::validation("axis dimension must be n + 1"));
        }
        // frame of axis^perp via the hyperplane helper
        let plane = crate::geometry::OrientedHyperplane::new(axis)?;
        let frame = plane.tangent_basis();
        let area_coeff = n as f64 * unit_ball_volume(n);
        let mut nodes = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for seg in &segments {
            let m = samples_per_segment.max(64);
            let mut rows = Vec::with_capacity(m + 1);
            let integrand = |s: f64| {
                let (rho, _) = (seg.gamma)(s);
                let (dr, dz) = (seg.dgamma)(s);
                area_coeff * rho.abs().powi(n as i32 - 1) * (dr * dr + dz * dz).sqrt()
            };
            for i in 0..=m {
                let s = i as f64 / m as f64;
                let (rho, z) = (seg.gamma)(s);
                let (drho, dz) = (seg.dgamma)(s);
                if i > 0 {
                    let a = (i - 1) as f64 / m as f64;
                    let h = 1.0 / m as f64;
                    acc += h / 6.0 * (integrand(a) + 4.0 * integrand(a + 0.5 * h) + integrand(s));
                }
                rows.push(Node { s, rho, z, drho, dz, area: acc, radius_sq: rho * rho + z * z });
            }
            nodes.push(rows);
        }
        Ok(RevolutionSurface { n, axis, frame, segments, nodes, area_total: acc })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn axis(&self) -> &VecN {
        &self.axis
    }

    pub fn total_area(&self) -> f64 {
        self.area_total
    }

    /// Ambient point of the generating curve at `(segment, s)` in the
    /// meridian of the unit direction `dir` (a unit vector in the axis
    /// complement).
    pub fn point(&self, seg: usize, s: f64, dir: &VecN) -> VecN {
        let (rho, z) = (self.segments[seg].gamma)(s);
        dir.scale(rho).axpy(z, &self.axis)
    }

    pub fn curve(&self, seg: usize, s: f64) -> (f64, f64) {
        (self.segments[seg].gamma)(s)
    }

    pub fn curve_deriv(&self, seg: usize, s: f64) -> (f64, f64) {
        (self.segments[seg].dgamma)(s)
    }

    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    /// Smallest and largest `|x|` over the sampled curve.
    pub fn radius_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for rows in &self.nodes {
            for nd in rows {
                lo = lo.min(nd.radius_sq);
                hi = hi.max(nd.radius_sq);
            }
        }
        (lo.sqrt(), hi.sqrt())
    }

    /// Endpoints of the generating curve: `(segment, s, rho, z, unit tangent
    /// pointing into the surface)` at the start and at the end.
    pub fn curve_start(&self) -> (f64, f64, (f64, f64)) {
        let nd = &self.nodes[0][0];
        let t = norm2(nd.drho, nd.dz);
        (nd.rho, nd.z, (nd.drho / t, nd.dz / t))
    }

    pub fn curve_end(&self) -> (f64, f64, (f64, f64)) {
        let rows = self.nodes.last().unwrap();
        let nd = rows.last().unwrap();
        let t = norm2(nd.drho, nd.dz);
        (nd.rho, nd.z, (-nd.drho / t, -nd.dz / t))
    }

    /// Cumulative lateral area from the curve start to `(seg, s)`, by cubic
    /// Hermite interpolation of the cached table.
    fn area_to(&self, seg: usize, s: f64) -> f64 {
        let rows = &self.nodes[seg];
        let m = rows.len() - 1;
        let t = (s * m as f64).clamp(0.0, m as f64);
        let i = (t.floor() as usize).min(m - 1);
        let frac = t - i as f64;
        let h = 1.0 / m as f64;
        let n = self.n;
        let coeff = n as f64 * unit_ball_volume(n);
        let deriv = |nd: &Node| coeff * nd.rho.abs().powi(n as i32 - 1) * norm2(nd.drho, nd.dz);
        let (v0, v1) = (rows[i].area, rows[i + 1].area);
        let (d0, d1) = (deriv(&rows[i]), deriv(&rows[i + 1]));
        let s2 = frac * frac;
        let s3 = s2 * frac;
        v0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * h * (s3 - 2.0 * s2 + frac)
            + v1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * h * (s3 - s2)
    }

    /// Parameter intervals (in cumulative-area coordinates) where `|x| <= r`,
    /// returned as total lateral area.
    pub fn area_within_ball(&self, r: f64) -> f64 {
        let r_sq = r * r;
        let mut total = 0.0;
        for (seg, rows) in self.nodes.iter().enumerate() {
            let inside = |s: f64| {
                let (rho, z) = (self.segments[seg].gamma)(s);
                rho * rho + z * z - r_sq
            };
            let mut prev = &rows[0];
            let mut open_start: Option<f64> = if prev.radius_sq <= r_sq { Some(0.0) } else { None };
            for nd in rows.iter().skip(1) {
                let was_in = prev.radius_sq <= r_sq;
                let is_in = nd.radius_sq <= r_sq;
                if was_in != is_in {
                    let cross = crate::quad::bisect_root(inside, prev.s, nd.s, 1e-15)
                        .unwrap_or(0.5 * (prev.s + nd.s));
                    if is_in {
                        open_start = Some(cross);
                    } else if let Some(a) = open_start.take() {
                        total += self.area_to(seg, cross) - self.area_to(seg, a);
                    }
                }
                prev = nd;
            }
            if let Some(a) = open_start {
                total += self.area_to(seg, 1.0) - self.area_to(seg, a);
            }
        }
        total
    }

    /// Integrate `f(x, weight)` over the surface restricted to
    /// `r < |x| < s`, resolving the orbit spheres with `orbit` quadrature
    /// directions (pairs of unit direction in the axis complement and
    /// weight summing to `n omega_n`).
    pub fn integrate_in_annulus<F>(&self, r: f64, s: f64, orbit: &[(VecN, f64)], f: F) -> f64
    where
        F: Fn(&VecN) -> f64,
    {
        let n = self.n;
        let mut total = 0.0;
        for (seg, rows) in self.nodes.iter().enumerate() {
            let m = rows.len() - 1;
            let radius_at = |t: f64| {
                let (rho, z) = (self.segments[seg].gamma)(t);
                (rho * rho + z * z).sqrt()
            };
            let eval_at = |t: f64| -> f64 {
                let (rho, z) = (self.segments[seg].gamma)(t);
                let (dr, dz) = (self.segments[seg].dgamma)(t);
                let speed = norm2(dr, dz);
                let mut orbit_sum = 0.0;
                for (dir, w) in orbit {
                    let x = dir.scale(rho).axpy(z, &self.axis);
                    orbit_sum += w * f(&x);
                }
                rho.abs().powi(n as i32 - 1) * speed * orbit_sum
            };
            for i in 0..m {
                let a = &rows[i];
                let b = &rows[i + 1];
                let lo = a.radius_sq.min(b.radius_sq).sqrt();
                let hi = a.radius_sq.max(b.radius_sq).sqrt();
                if hi <= r || lo >= s {
                    continue;
                }
                // split the cell exactly at the clip radii, then integrate
                // each smooth sub-piece that lies inside the window
                let mut cuts = vec![a.s, b.s];
                for clip in [r, s] {
                    if lo < clip && clip < hi {
                        if let Ok(c) =
                            crate::quad::bisect_root(|t| radius_at(t) - clip, a.s, b.s, 1e-15)
                        {
                            cuts.push(c);
                        }
                    }
                }
                cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
                for pair in cuts.windows(2) {
                    let (t0, t1) = (pair[0], pair[1]);
                    if t1 - t0 < 1e-15 {
                        continue;
                    }
                    let mid_radius = radius_at(0.5 * (t0 + t1));
                    if mid_radius <= r || mid_radius >= s {
                        continue;
                    }
                    // 4-panel Simpson on the smooth sub-piece
                    let parts = 4;
                    for p in 0..parts {
                        let u0 = t0 + (t1 - t0) * p as f64 / parts as f64;
                        let u1 = t0 + (t1 - t0) * (p + 1) as f64 / parts as f64;
                        let um = 0.5 * (u0 + u1);
                        total += (u1 - u0) / 6.0 * (eval_at(u0) + 4.0 * eval_at(um) + eval_at(u1));
                    }
                }
            }
        }
        total
    }

    /// All ray parameters `t > 0` with `t * dir` on the surface.
    pub fn ray_intersections(&self, dir: &VecN) -> Vec<f64> {
        let d_ax = dir.dot(&self.axis);
        let mut d_perp = *dir;
        d_perp = d_perp.axpy(-d_ax, &self.axis);
        let dp = d_perp.norm();
        let mut hits = Vec::new();
        if dp < 1e-14 {
            return hits;
        }
        let slope = d_ax / dp;
        for (seg, rows) in self.nodes.iter().enumerate() {
            let g = |s: f64| {
                let (rho, z) = (self.segments[seg].gamma)(s);
                z - rho * slope
            };
            let mut prev_s = rows[0].s;
            let mut prev_g = g(prev_s);
            for nd in rows.iter().skip(1) {
                let cur_g = g(nd.s);
                if prev_g == 0.0 || prev_g * cur_g < 0.0 {
                    if let Ok(root) = crate::quad::bisect_root(g, prev_s, nd.s, 1e-15) {
                        let (rho, _) = (self.segments[seg].gamma)(root);
                        if rho > 1e-14 {
                            hits.push(rho / dp);
                        }
                    }
                }
                prev_s = nd.s;
                prev_g = cur_g;
            }
        }
        hits.sort_by(|a, b| a.partial_cmp(b).unwrap());
        hits.dedup_by(|a, b| (*a - *b).abs() < 1e-10 * (*a + *b));
        hits
    }

    /// Deterministic point sample of the surface for principal-axis fits.
    pub fn sample_points(&self, per_segment: usize, orbit: &[(VecN, f64)]) -> Vec<VecN> {
        let mut pts = Vec::new();
        for (seg, _) in self.nodes.iter().enumerate() {
            for i in 0..per_segment {
                let s = (i as f64 + 0.5) / per_segment as f64;
                let (rho, z) = (self.segments[seg].gamma)(s);
                for (dir, _) in orbit {
                    pts.push(dir.scale(rho).axpy(z, &self.axis));
                }
            }
        }
        pts
    }

    pub fn frame(&self) -> &[VecN] {
        &self.frame
    }

    /// Tessellate the revolution surface (n = 2) into a triangle mesh with
    /// `rows` samples along the generating curve per segment and `sectors`
    /// around the orbit.
    pub fn tessellate(&self, rows: usize, sectors: usize) -> Result<super::TriangleMesh> {
        if self.n != 2 {
            return Err(ExigeoError::validation("tessellation is implemented for n = 2"));
        }
        if rows < 2 || sectors < 3 {
            return Err(ExigeoError::validation("tessellation needs rows >= 2 and sectors >= 3"));
        }
        let mut vertices: Vec<[f64; 3]> = Vec::new();
        let mut triangles: Vec<[usize; 3]> = Vec::new();
        for seg in 0..self.segments.len() {
            let base = vertices.len();
            for i in 0..=rows {
                let s = i as f64 / rows as f64;
                let (rho, z) = (self.segments[seg].gamma)(s);
                for j in 0..sectors {
                    let t = 2.0 * std::f64::consts::PI * j as f64 / sectors as f64;
                    let dir = self.frame[0].scale(t.cos()).axpy(t.sin(), &self.frame[1]);
                    let pnt = dir.scale(rho).axpy(z, &self.axis);
                    vertices.push([pnt.get(0), pnt.get(1), pnt.get(2)]);
                }
            }
            let idx = |i: usize, j: usize| base + i * sectors + (j % sectors);
            for i in 0..rows {
                for j in 0..sectors {
                    triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                    triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
                }
            }
        }
        super::TriangleMesh::new(vertices, triangles)
    }
}

fn norm2(a: f64, b: f64) -> f64 {
    (a * a + b * b).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn flat_plane(n: usize, hole: f64, outer: f64) -> RevolutionSurface {
        let axis = VecN::basis(n + 1, n);
        let seg = CurveSegment::graph(|_| 0.0, |_| 0.0, hole, outer);
        RevolutionSurface::new(n, axis, vec![seg], 2048).unwrap()
    }

    #[test]
    fn plane_annulus_mass() {
        let s = flat_plane(2, 0.5, 3.0);
        // planar annulus pi (r^2 - R^2)
        let got = s.area_within_ball(2.0);
        let expect = PI * (4.0 - 0.25);
        assert!((got - expect).abs() <= 1e-9 * expect, "{got} vs {expect}");
        assert!(s.area_within_ball(0.5) <= 1e-12);
    }

    #[test]
    fn sphere_cap_masses() {
        // sphere of radius 1 centered at distance 2 on the axis
        let axis = VecN::basis(3, 2);
        let seg = CurveSegment::new(
            |t| ((PI * t).sin(), 2.0 + (PI * t).cos()),
            |t| (PI * (PI * t).cos(), -PI * (PI * t).sin()),
        );
        let s = RevolutionSurface::new(2, axis, vec![seg], 2048).unwrap();
        assert!((s.total_area() - 4.0 * PI).abs() <= 1e-8);
        // |x| = r cuts the sphere at cos(theta) = (r^2 - 5) / 4 from the far pole:
        // |x|^2 = 1 + 4 + 4 cos(polar from center) => cap area 2 pi (1 - cos t0)?
        for r in [1.5f64, 2.0, 2.5] {
            let cos_c = (r * r - 5.0) / 4.0;
            // cap around the near pole (theta measured from +axis direction at center)
            let expect = 2.0 * PI * (1.0 + cos_c);
            let got = s.area_within_ball(r);
            assert!((got - expect).abs() <= 1e-8 * expect.max(1.0), "r={r}: {got} vs {expect}");
        }
    }

    #[test]
    fn ray_hits_sphere_twice() {
        let axis = VecN::basis(3, 2);
        let seg = CurveSegment::new(
            |t| ((PI * t).sin(), 2.0 + (PI * t).cos()),
            |t| (PI * (PI * t).cos(), -PI * (PI * t).sin()),
        );
        let s = RevolutionSurface::new(2, axis, vec![seg], 2048).unwrap();
        // a ray up the middle of the sphere crosses it twice
        let dir = VecN::from_slice(&[0.1, 0.0, 1.0]).normalized().unwrap();
        let hits = s.ray_intersections(&dir);
        assert_eq!(hits.len(), 2, "{hits:?}");
        // a horizontal ray misses it
        assert!(s.ray_intersections(&VecN::from_slice(&[1.0, 0.0, 0.0])).is_empty());
    }

    #[test]
    fn annulus_integral_of_one_is_mass() {
        let s = flat_plane(2, 0.5, 3.0);
        let plane = crate::geometry::OrientedHyperplane::coordinate(2);
        let orbit: Vec<(VecN, f64)> = {
            let grid = plane.grid(128);
            grid.points().iter().cloned().zip(grid.weights().iter().cloned()).collect()
        };
        let got = s.integrate_in_annulus(1.0, 2.0, &orbit, |_| 1.0);
        let expect = PI * (4.0 - 1.0);
        assert!((got - expect).abs() <= 1e-6 * expect, "{got} vs {expect}");
    }
}
