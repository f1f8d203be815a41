//! Compact obstacles: balls, coaxial ball unions, and planar polygons or
//! segments for n = 1, with exact or grid-refined section and projection
//! suprema.

use crate::error::{ExigeoError, Result};
use crate::linalg::{unit_ball_volume, VecN};
use crate::quad::golden_section_min;

#[derive(Clone, Debug)]
pub enum ObstacleShape {
    Empty,
    Ball { center: VecN, radius: f64 },
    /// balls centered at `offset * axis`
    AxisUnion { axis: VecN, balls: Vec<(f64, f64)> },
    /// convex planar polygon, n = 1
    Polygon { vertices: Vec<[f64; 2]> },
    /// planar segment, n = 1
    Segment { a: [f64; 2], b: [f64; 2] },
}

#[derive(Clone, Debug)]
pub struct Obstacle {
    n: usize,
    shape: ObstacleShape,
}

impl Obstacle {
    pub fn empty(n: usize) -> Self {
        Obstacle { n, shape: ObstacleShape::Empty }
    }

    pub fn ball(n: usize, center: &[f64], radius: f64) -> Result<Self> {
        if center.len() != n + 1 {
            return Err(ExigeoError::validation("ball center must have n+1 coordinates"));
        }
        if radius < 0.0 {
            return Err(ExigeoError::validation("radius must be nonnegative"));
        }
        if radius == 0.0 {
            return Ok(Self::empty(n));
        }
        Ok(Obstacle {
            n,
            shape: ObstacleShape::Ball { center: VecN::from_slice(center), radius },
        })
    }

    /// Balls centered on the last coordinate axis at the given offsets.
    pub fn axis_union(n: usize, balls: &[(f64, f64)]) -> Result<Self> {
        if balls.is_empty() {
            return Ok(Self::empty(n));
        }
        if balls.iter().any(|&(_, r)| r <= 0.0) {
            return Err(ExigeoError::validation("ball radii must be positive"));
        }
        if balls.len() == 1 {
            let mut c = vec![0.0; n + 1];
            c[n] = balls[0].0;
            return Self::ball(n, &c, balls[0].1);
        }
        Ok(Obstacle {
            n,
            shape: ObstacleShape::AxisUnion { axis: VecN::basis(n + 1, n), balls: balls.to_vec() },
        })
    }

    pub fn segment(a: &[f64; 2], b: &[f64; 2]) -> Result<Self> {
        if a == b {
            return Err(ExigeoError::validation("degenerate segment"));
        }
        Ok(Obstacle { n: 1, shape: ObstacleShape::Segment { a: *a, b: *b } })
    }

    /// Convex planar polygon; vertices are reordered to positive orientation
    /// and convexity is validated.
    pub fn polygon(vertices: &[[f64; 2]]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(ExigeoError::validation("polygon needs at least 3 vertices"));
        }
        let mut v = vertices.to_vec();
        let area2: f64 = v
            .windows(2)
            .map(|w| w[0][0] * w[1][1] - w[1][0] * w[0][1])
            .sum::<f64>()
            + v[v.len() - 1][0] * v[0][1]
            - v[0][0] * v[v.len() - 1][1];
        if area2 < 0.0 {
            v.reverse();
        }
        let m = v.len();
        for i in 0..m {
            let a = v[i];
            let b = v[(i + 1) % m];
            let c = v[(i + 2) % m];
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            if cross < -1e-12 {
                return Err(ExigeoError::validation("polygon obstacles must be convex"));
            }
        }
        Ok(Obstacle { n: 1, shape: ObstacleShape::Polygon { vertices: v } })
    }

    /// Parse the line-oriented `key = value` obstacle format. The `shape`
    /// key discriminates; unknown keys are rejected.
    pub fn from_spec_str(text: &str) -> Result<Self> {
        let mut shape: Option<String> = None;
        let mut n: Option<usize> = None;
        let mut center: Option<Vec<f64>> = None;
        let mut radius: Option<f64> = None;
        let mut balls: Vec<(f64, f64)> = Vec::new();
        let mut vertices: Vec<[f64; 2]> = Vec::new();
        let mut endpoints: Vec<[f64; 2]> = Vec::new();
        for raw in text.lines() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| ExigeoError::validation(format!("expected key = value, got: {line}")))?;
            let key = key.trim();
            let value = value.trim();
            let nums = || -> Result<Vec<f64>> {
                value
                    .split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| ExigeoError::validation(format!("bad number: {t}")))
                    })
                    .collect()
            };
            match key {
                "shape" => shape = Some(value.to_string()),
                "n" => {
                    n = Some(value.parse::<usize>().map_err(|_| {
                        ExigeoError::validation(format!("bad dimension: {value}"))
                    })?)
                }
                "center" => center = Some(nums()?),
                "radius" => radius = Some(nums()?[0]),
                "ball" => {
                    let v = nums()?;
                    if v.len() != 2 {
                        return Err(ExigeoError::validation("ball lines need: offset radius"));
                    }
                    balls.push((v[0], v[1]));
                }
                "vertex" => {
                    let v = nums()?;
                    if v.len() != 2 {
                        return Err(ExigeoError::validation("vertex lines need: x y"));
                    }
                    vertices.push([v[0], v[1]]);
                }
                "endpoint" => {
                    let v = nums()?;
                    if v.len() != 2 {
                        return Err(ExigeoError::validation("endpoint lines need: x y"));
                    }
                    endpoints.push([v[0], v[1]]);
                }
                other => {
                    return Err(ExigeoError::validation(format!("unknown key: {other}")));
                }
            }
        }
        let shape = shape.ok_or_else(|| ExigeoError::validation("missing shape"))?;
        match shape.as_str() {
            "empty" => Ok(Self::empty(n.unwrap_or(1))),
            "ball" => {
                let n = n.ok_or_else(|| ExigeoError::validation("ball needs n"))?;
                let c = center.unwrap_or_else(|| vec![0.0; n + 1]);
                Self::ball(n, &c, radius.ok_or_else(|| ExigeoError::validation("missing radius"))?)
            }
            "axis_union" => {
                let n = n.ok_or_else(|| ExigeoError::validation("axis_union needs n"))?;
                Self::axis_union(n, &balls)
            }
            "polygon" => Self::polygon(&vertices),
            "segment" => {
                if endpoints.len() != 2 {
                    return Err(ExigeoError::validation("segment needs two endpoint lines"));
                }
                Self::segment(&endpoints[0], &endpoints[1])
            }
            other => Err(ExigeoError::validation(format!("unknown shape: {other}"))),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn shape(&self) -> &ObstacleShape {
        &self.shape
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.shape, ObstacleShape::Empty)
    }

    pub fn diameter(&self) -> f64 {
        match &self.shape {
            ObstacleShape::Empty => 0.0,
            ObstacleShape::Ball { radius, .. } => 2.0 * radius,
            ObstacleShape::AxisUnion { balls, .. } => {
                let mut d = 0.0f64;
                for (i, &(ti, ri)) in balls.iter().enumerate() {
                    d = d.max(2.0 * ri);
                    for &(tj, rj) in balls.iter().skip(i + 1) {
                        d = d.max((ti - tj).abs() + ri + rj);
                    }
                }
                d
            }
            ObstacleShape::Polygon { vertices } => {
                let mut d = 0.0f64;
                for (i, p) in vertices.iter().enumerate() {
                    for q in vertices.iter().skip(i + 1) {
                        d = d.max(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
                    }
                }
                d
            }
            ObstacleShape::Segment { a, b } => {
                ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
            }
        }
    }

    /// Signed distance to W (negative inside); for lower-dimensional shapes
    /// the distance is nonnegative.
    pub fn distance(&self, x: &VecN) -> f64 {
        match &self.shape {
            ObstacleShape::Empty => f64::INFINITY,
            ObstacleShape::Ball { center, radius } => x.dist(center) - radius,
            ObstacleShape::AxisUnion { axis, balls } => balls
                .iter()
                .map(|&(t, r)| x.dist(&axis.scale(t)) - r)
                .fold(f64::INFINITY, f64::min),
            ObstacleShape::Polygon { vertices } => {
                let p = [x.get(0), x.get(1)];
                let m = vertices.len();
                let mut dist = f64::INFINITY;
                let mut inside = true;
                for i in 0..m {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % m];
                    dist = dist.min(point_segment_distance(&p, &a, &b));
                    let cross = (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0]);
                    if cross < 0.0 {
                        inside = false;
                    }
                }
                if inside {
                    -dist
                } else {
                    dist
                }
            }
            ObstacleShape::Segment { a, b } => {
                point_segment_distance(&[x.get(0), x.get(1)], a, b)
            }
        }
    }

    /// Slab extent `[min x.nu, max x.nu]` over W.
    pub fn slab(&self, nu: &VecN) -> (f64, f64) {
        match &self.shape {
            ObstacleShape::Empty => (0.0, 0.0),
            ObstacleShape::Ball { center, radius } => {
                let c = center.dot(nu);
                (c - radius, c + radius)
            }
            ObstacleShape::AxisUnion { axis, balls } => {
                let ca = axis.dot(nu);
                balls.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(t, r)| {
                    (lo.min(t * ca - r), hi.max(t * ca + r))
                })
            }
            ObstacleShape::Polygon { vertices } => {
                vertices.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                    let d = v[0] * nu.get(0) + v[1] * nu.get(1);
                    (lo.min(d), hi.max(d))
                })
            }
            ObstacleShape::Segment { a, b } => {
                let da = a[0] * nu.get(0) + a[1] * nu.get(1);
                let db = b[0] * nu.get(0) + b[1] * nu.get(1);
                (da.min(db), da.max(db))
            }
        }
    }

    /// Radius of the smallest axis-`nu` cylinder containing W.
    pub fn enclosing_cylinder_radius(&self, nu: &VecN) -> f64 {
        let perp = |p: &VecN| p.axpy(-p.dot(nu), nu).norm();
        match &self.shape {
            ObstacleShape::Empty => 0.0,
            ObstacleShape::Ball { center, radius } => perp(center) + radius,
            ObstacleShape::AxisUnion { axis, balls } => balls
                .iter()
                .map(|&(t, r)| perp(&axis.scale(t)) + r)
                .fold(0.0, f64::max),
            ObstacleShape::Polygon { vertices } => vertices
                .iter()
                .map(|v| perp(&VecN::from_slice(v)))
                .fold(0.0, f64::max),
            ObstacleShape::Segment { a, b } => [a, b]
                .iter()
                .map(|v| perp(&VecN::from_slice(*v)))
                .fold(0.0, f64::max),
        }
    }

    /// Area of the hyperplane section `{x . nu = tau}` of W.
    pub fn plane_section_area(&self, nu: &VecN, tau: f64) -> f64 {
        let n = self.n;
        match &self.shape {
            ObstacleShape::Empty => 0.0,
            ObstacleShape::Ball { center, radius } => {
                let d = (center.dot(nu) - tau).abs();
                let rsq = radius * radius - d * d;
                if rsq <= 0.0 {
                    0.0
                } else {
                    unit_ball_volume(n) * rsq.powf(n as f64 / 2.0)
                }
            }
            ObstacleShape::AxisUnion { axis, balls } => {
                let ca = axis.dot(nu);
                let sa = (1.0 - ca * ca).max(0.0).sqrt();
                let disks: Vec<(f64, f64)> = balls
                    .iter()
                    .filter_map(|&(t, r)| {
                        let d = (t * ca - tau).abs();
                        let rsq = r * r - d * d;
                        if rsq <= 0.0 {
                            None
                        } else {
                            Some((t * sa, rsq.sqrt()))
                        }
                    })
                    .collect();
                collinear_disks_area(n, &disks)
            }
            ObstacleShape::Polygon { vertices } => {
                // chord length of the convex polygon against the line
                let m = vertices.len();
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                let tangent = VecN::from_slice(&[-nu.get(1), nu.get(0)]);
                let mut any = false;
                for i in 0..m {
                    let a = vertices[i];
                    let b = vertices[(i + 1) % m];
                    let da = a[0] * nu.get(0) + a[1] * nu.get(1) - tau;
                    let db = b[0] * nu.get(0) + b[1] * nu.get(1) - tau;
                    if da == 0.0 {
                        let s = a[0] * tangent.get(0) + a[1] * tangent.get(1);
                        lo = lo.min(s);
                        hi = hi.max(s);
                        any = true;
                    }
                    if da * db < 0.0 {
                        let lam = da / (da - db);
                        let px = a[0] + lam * (b[0] - a[0]);
                        let py = a[1] + lam * (b[1] - a[1]);
                        let s = px * tangent.get(0) + py * tangent.get(1);
                        lo = lo.min(s);
                        hi = hi.max(s);
                        any = true;
                    }
                }
                if any {
                    hi - lo
                } else {
                    0.0
                }
            }
            ObstacleShape::Segment { a, b } => {
                // positive measure only when the line contains the segment
                let da = a[0] * nu.get(0) + a[1] * nu.get(1) - tau;
                let db = b[0] * nu.get(0) + b[1] * nu.get(1) - tau;
                if da.abs() < 1e-12 && db.abs() < 1e-12 {
                    self.diameter()
                } else {
                    0.0
                }
            }
        }
    }

    /// `S(W) = sup_Pi H^n(W cap Pi)`. Closed-form for balls; plane-family
    /// grid plus coordinate refinement for coaxial unions; the longest chord
    /// (= diameter) for convex n = 1 shapes.
    pub fn section_sup(&self) -> Result<f64> {
        let n = self.n;
        match &self.shape {
            ObstacleShape::Empty => Ok(0.0),
            ObstacleShape::Ball { radius, .. } => {
                Ok(unit_ball_volume(n) * radius.powi(n as i32))
            }
            ObstacleShape::AxisUnion { balls, .. } => {
                // plane with normal at angle alpha to the axis, offset tau
                let tmin = balls.iter().map(|b| b.0 - b.1).fold(f64::INFINITY, f64::min);
                let tmax = balls.iter().map(|b| b.0 + b.1).fold(f64::NEG_INFINITY, f64::max);
                let area = |alpha: f64, tau: f64| -> f64 {
                    let (ca, sa) = (alpha.cos(), alpha.sin());
                    let disks: Vec<(f64, f64)> = balls
                        .iter()
                        .filter_map(|&(t, r)| {
                            let d = (t * ca - tau).abs();
                            let rsq = r * r - d * d;
                            if rsq <= 0.0 {
                                None
                            } else {
                                Some((t * sa, rsq.sqrt()))
                            }
                        })
                        .collect();
                    collinear_disks_area(n, &disks)
                };
                let mut best = (0.0f64, 0.0f64, 0.0f64);
                for i in 0..=32 {
                    let alpha = std::f64::consts::FRAC_PI_2 * i as f64 / 32.0;
                    for j in 0..=64 {
                        let tau = tmin + (tmax - tmin) * j as f64 / 64.0;
                        let a = area(alpha, tau);
                        if a > best.0 {
                            best = (a, alpha, tau);
                        }
                    }
                }
                // coordinate refinement
                let (mut alpha, mut tau) = (best.1, best.2);
                for _ in 0..4 {
                    let (t2, _) = golden_section_min(
                        |t| -area(alpha, t),
                        (tau - 0.2 * (tmax - tmin)).max(tmin),
                        (tau + 0.2 * (tmax - tmin)).min(tmax),
                        1e-12,
                    )?;
                    tau = t2;
                    let (a2, _) = golden_section_min(
                        |a| -area(a, tau),
                        (alpha - 0.2).max(0.0),
                        (alpha + 0.2).min(std::f64::consts::FRAC_PI_2),
                        1e-12,
                    )?;
                    alpha = a2;
                }
                Ok(area(alpha, tau).max(best.0))
            }
            ObstacleShape::Polygon { .. } | ObstacleShape::Segment { .. } => Ok(self.diameter()),
        }
    }

    /// `P(W) = sup_nu H^n(p_{nu^perp}(W))`. Closed-form for balls; angle
    /// grid plus refinement for coaxial unions; the width supremum
    /// (= diameter) for convex n = 1 shapes.
    pub fn projection_sup(&self) -> Result<f64> {
        let n = self.n;
        match &self.shape {
            ObstacleShape::Empty => Ok(0.0),
            ObstacleShape::Ball { radius, .. } => {
                Ok(unit_ball_volume(n) * radius.powi(n as i32))
            }
            ObstacleShape::AxisUnion { balls, .. } => {
                let area = |alpha: f64| -> f64 {
                    let sa = alpha.sin();
                    let disks: Vec<(f64, f64)> =
                        balls.iter().map(|&(t, r)| (t * sa, r)).collect();
                    collinear_disks_area(n, &disks)
                };
                let mut best = 0.0f64;
                let mut best_alpha = 0.0;
                for i in 0..=64 {
                    let alpha = std::f64::consts::FRAC_PI_2 * i as f64 / 64.0;
                    let a = area(alpha);
                    if a > best {
                        best = a;
                        best_alpha = alpha;
                    }
                }
                let (a2, neg) = golden_section_min(
                    |a| -area(a),
                    (best_alpha - 0.05).max(0.0),
                    (best_alpha + 0.05).min(std::f64::consts::FRAC_PI_2),
                    1e-12,
                )?;
                let _ = a2;
                Ok(best.max(-neg))
            }
            ObstacleShape::Polygon { .. } | ObstacleShape::Segment { .. } => Ok(self.diameter()),
        }
    }

    /// Natural competitor axes: the symmetry axis when there is one, plus
    /// the last coordinate direction.
    pub fn axis_candidates(&self) -> Vec<VecN> {
        match &self.shape {
            ObstacleShape::AxisUnion { axis, .. } => vec![*axis],
            _ => vec![VecN::basis(self.n + 1, self.n)],
        }
    }
}

/// Area of a union of collinear `n`-disks (centers at offsets `s_i` on a
/// line, radii `r_i`) by slicing perpendicular to the line: the slice of
/// the union is the largest (n-1)-ball, so
/// `area = int omega_{n-1} max_i (r_i^2 - (x - s_i)^2)_+^{(n-1)/2} dx`.
fn collinear_disks_area(n: usize, disks: &[(f64, f64)]) -> f64 {
    if disks.is_empty() {
        return 0.0;
    }
    let omega = unit_ball_volume(n - 1);
    let integrand = |x: f64| -> f64 {
        let best = disks
            .iter()
            .map(|&(s, r)| r * r - (x - s) * (x - s))
            .fold(f64::NEG_INFINITY, f64::max);
        if best <= 0.0 {
            0.0
        } else {
            omega * best.powf((n as f64 - 1.0) / 2.0)
        }
    };
    // breakpoints: disk endpoints and pairwise switch points of the max
    let mut cuts: Vec<f64> = Vec::new();
    for &(s, r) in disks {
        cuts.push(s - r);
        cuts.push(s + r);
    }
    for (i, &(si, ri)) in disks.iter().enumerate() {
        for &(sj, rj) in disks.iter().skip(i + 1) {
            if (sj - si).abs() > 1e-14 {
                cuts.push((ri * ri - rj * rj - si * si + sj * sj) / (2.0 * (sj - si)));
            }
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        if w[1] - w[0] > 1e-14 {
            total += crate::quad::adaptive_simpson(integrand, w[0], w[1], 1e-11);
        }
    }
    total
}

fn point_segment_distance(p: &[f64; 2], a: &[f64; 2], b: &[f64; 2]) -> f64 {
    let ab = [b[0] - a[0], b[1] - a[1]];
    let ap = [p[0] - a[0], p[1] - a[1]];
    let t = ((ap[0] * ab[0] + ap[1] * ab[1]) / (ab[0] * ab[0] + ab[1] * ab[1])).clamp(0.0, 1.0);
    let q = [a[0] + t * ab[0], a[1] + t * ab[1]];
    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
}
