//! Planar (n = 1) exterior isoperimetric minimization: projected-gradient
//! descent on the vertex positions of a closed polyline, with an augmented
//! area constraint and closest-point projection onto the complement of the
//! obstacle interior. Boundary pieces lying on the obstacle are free.

use crate::error::{ExigeoError, Result};
use crate::residue::Obstacle;

#[derive(Clone, Debug)]
pub struct PolygonParams {
    pub vertices: usize,
    pub max_iters: usize,
    pub snap_tol_rel: f64,
    pub grad_tol: f64,
    /// print descent diagnostics (development aid)
    pub verbose: bool,
}

impl Default for PolygonParams {
    fn default() -> Self {
        PolygonParams {
            vertices: 256,
            max_iters: 40_000,
            snap_tol_rel: 2e-3,
            grad_tol: 1e-7,
            verbose: false,
        }
    }
}

/// A closed vertex loop with per-vertex obstacle contact flags.
#[derive(Clone, Debug)]
pub struct PolylineRegion {
    pub vertices: Vec<[f64; 2]>,
    pub contact: Vec<bool>,
    /// relative perimeter (free pieces on the obstacle excluded)
    pub energy: f64,
    pub area: f64,
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let m = v.len();
    let mut a = 0.0;
    for i in 0..m {
        let p = v[i];
        let q = v[(i + 1) % m];
        a += p[0] * q[1] - q[0] * p[1];
    }
    0.5 * a
}

fn dist2(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Distance from a point to the obstacle boundary (absolute value of the
/// signed distance; obstacles without interior give their plain distance).
fn boundary_distance(w: &Obstacle, p: &[f64; 2]) -> f64 {
    w.distance(&crate::linalg::VecN::from_slice(p)).abs()
}

/// Closest point on the obstacle boundary, by projected gradient of the
/// distance function (obstacles are convex or segments, so this is stable).
fn project_to_boundary(w: &Obstacle, p: &[f64; 2]) -> [f64; 2] {
    let mut x = *p;
    for _ in 0..40 {
        let d = w.distance(&crate::linalg::VecN::from_slice(&x));
        if d.abs() < 1e-14 {
            break;
        }
        let h = 1e-7;
        let gx = (w.distance(&crate::linalg::VecN::from_slice(&[x[0] + h, x[1]]))
            - w.distance(&crate::linalg::VecN::from_slice(&[x[0] - h, x[1]])))
            / (2.0 * h);
        let gy = (w.distance(&crate::linalg::VecN::from_slice(&[x[0], x[1] + h]))
            - w.distance(&crate::linalg::VecN::from_slice(&[x[0], x[1] - h])))
            / (2.0 * h);
        let gn = (gx * gx + gy * gy).sqrt().max(1e-12);
        x = [x[0] - d * gx / gn, x[1] - d * gy / gn];
    }
    x
}

struct FlowState {
    v: Vec<[f64; 2]>,
    snap_tol: f64,
}

impl FlowState {
    fn contacts(&self, w: &Obstacle) -> Vec<bool> {
        self.v.iter().map(|p| boundary_distance(w, p) <= self.snap_tol).collect()
    }

    /// counted energy: edges whose endpoints and midpoint all hug the
    /// obstacle are free
    fn energy(&self, w: &Obstacle) -> f64 {
        let m = self.v.len();
        let contact = self.contacts(w);
        let mut e = 0.0;
        for i in 0..m {
            let j = (i + 1) % m;
            let free = contact[i] && contact[j] && {
                let mid = [
                    0.5 * (self.v[i][0] + self.v[j][0]),
                    0.5 * (self.v[i][1] + self.v[j][1]),
                ];
                boundary_distance(w, &mid) <= self.snap_tol
            };
            if !free {
                e += dist2(&self.v[i], &self.v[j]);
            }
        }
        e
    }
}

/// Solve the n = 1 exterior isoperimetric problem for area `v` outside `w`.
/// Multistart (far ball, tangent ball, engulfing ball), best energy wins.
pub fn solve_polygon(
    w: &Obstacle,
    target_area: f64,
    params: &PolygonParams,
) -> Result<PolylineRegion> {
    if target_area <= 0.0 {
        return Err(ExigeoError::validation("area must be positive"));
    }
    if w.n() != 1 && !w.is_empty() {
        return Err(ExigeoError::validation("polygon solver needs a planar obstacle"));
    }
    let radius = (target_area / std::f64::consts::PI).sqrt();
    let diam = w.diameter();
    let snap_tol = params.snap_tol_rel * diam.max(radius * 0.05);
    // obstacle anchor: midpoint of the slab box
    let anchor = if w.is_empty() {
        [0.0, 0.0]
    } else {
        let (x0, x1) = w.slab(&crate::linalg::VecN::from_slice(&[1.0, 0.0]));
        let (y0, y1) = w.slab(&crate::linalg::VecN::from_slice(&[0.0, 1.0]));
        [0.5 * (x0 + x1), 0.5 * (y0 + y1)]
    };
    let circle = |center: [f64; 2]| -> Vec<[f64; 2]> {
        (0..params.vertices)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / params.vertices as f64;
                [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
            })
            .collect()
    };
    let mut starts: Vec<Vec<[f64; 2]>> = vec![
        // far away: no contact
        circle([anchor[0], anchor[1] + diam + 4.0 * radius]),
        // engulfing / straddling
        circle(anchor),
    ];
    if let Some(contact) = contact_start(w, target_area, params.vertices, snap_tol) {
        starts.push(contact);
    } else {
        // tangent fallback
        starts.push(circle([anchor[0], anchor[1] + radius - 0.5 * snap_tol]));
    }
    let mut best: Option<PolylineRegion> = None;
    for init in starts {
        if let Ok(sol) = descend(w, target_area, init, snap_tol, params) {
            let better = match &best {
                None => true,
                Some(b) => sol.energy < b.energy,
            };
            if better {
                best = Some(sol);
            }
        }
    }
    best.ok_or_else(|| ExigeoError::numerical("all polygon descents failed to converge"))
}

fn descend(
    w: &Obstacle,
    target_area: f64,
    init: Vec<[f64; 2]>,
    snap_tol: f64,
    params: &PolygonParams,
) -> Result<PolylineRegion> {
    let m = init.len();
    let mut st = FlowState { v: init, snap_tol };
    let scale = (target_area / std::f64::consts::PI).sqrt();
    let mut grad_norm = f64::INFINITY;
    let mut grad_checkpoint = f64::INFINITY;
    let mut window_energy = f64::INFINITY;
    let mut energy_stalled = false;
    for iter in 0..params.max_iters {
        if iter == params.max_iters * 3 / 5 {
            grad_checkpoint = grad_norm;
        }
        if iter % 500 == 0 {
            let e = st.energy(w);
            if params.verbose && iter % 4000 == 0 {
                let nc = st.contacts(w).iter().filter(|&&c| c).count();
                eprintln!(
                    "  iter {iter}: energy {e:.8} contacts {nc} grad {grad_norm:.3e} area {:.3e}",
                    shoelace(&st.v) - target_area
                );
            }
            if (window_energy - e).abs() < 1e-12 * e.max(1.0) && iter > 1000 {
                energy_stalled = true;
                break;
            }
            window_energy = e;
        }
        let contact = st.contacts(w);
        // length gradient per vertex: sum of unit vectors into the vertex
        // along counted edges; area gradient: half the rotated chord
        let mut glen = vec![[0.0f64; 2]; m];
        let mut garea = vec![[0.0f64; 2]; m];
        let mid_free = |i: usize, j: usize| -> bool {
            contact[i] && contact[j] && {
                let mid = [
                    0.5 * (st.v[i][0] + st.v[j][0]),
                    0.5 * (st.v[i][1] + st.v[j][1]),
                ];
                boundary_distance(w, &mid) <= st.snap_tol
            }
        };
        for i in 0..m {
            let j = (i + 1) % m;
            let free = mid_free(i, j);
            if free {
                continue;
            }
            let d = dist2(&st.v[i], &st.v[j]).max(1e-14);
            let ux = (st.v[j][0] - st.v[i][0]) / d;
            let uy = (st.v[j][1] - st.v[i][1]) / d;
            glen[i][0] -= ux;
            glen[i][1] -= uy;
            glen[j][0] += ux;
            glen[j][1] += uy;
        }
        for i in 0..m {
            let p = st.v[(i + m - 1) % m];
            let q = st.v[(i + 1) % m];
            garea[i] = [0.5 * (q[1] - p[1]), -0.5 * (q[0] - p[0])];
        }
        // Lagrange multiplier from the least-squares stationarity of
        // length - lambda * area
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 0..m {
            num += glen[i][0] * garea[i][0] + glen[i][1] * garea[i][1];
            den += garea[i][0] * garea[i][0] + garea[i][1] * garea[i][1];
        }
        let lambda = num / den.max(1e-300);
        // step size: curvature-flow stability scale
        // stability scale from the counted edges only: free-run vertices
        // carry no length force, so their spacing does not constrain dt
        let hmin = (0..m)
            .filter(|&i| !mid_free(i, (i + 1) % m))
            .map(|i| dist2(&st.v[i], &st.v[(i + 1) % m]))
            .fold(f64::INFINITY, f64::min)
            .min(scale)
            .max(1e-6 * scale);
        let dt = 0.2 * hmin * hmin / scale;
        let before = st.v.clone();
        for i in 0..m {
            let gx = glen[i][0] - lambda * garea[i][0];
            let gy = glen[i][1] - lambda * garea[i][1];
            st.v[i][0] -= dt * gx;
            st.v[i][1] -= dt * gy;
        }
        // keep vertices out of the obstacle interior; snap near-boundary
        // ones; contact vertices release only when leaving actually lowers
        // the counted energy (converting free edges back to counted is a
        // discontinuous cost the smooth gradient cannot see)
        for i in 0..m {
            let was_contact = boundary_distance(w, &before[i]) <= st.snap_tol;
            let d = w.distance(&crate::linalg::VecN::from_slice(&st.v[i]));
            if d < 0.0 || d.abs() <= st.snap_tol {
                st.v[i] = project_to_boundary(w, &st.v[i]);
            } else if was_contact {
                let candidate = st.v[i];
                let snapped = project_to_boundary(w, &before[i]);
                let local = |p: &[f64; 2]| -> f64 {
                    let mut e = 0.0;
                    for (u, vtx) in [((i + m - 1) % m, p), (i, p)] {
                        let (pa, pb) = if u == i {
                            (*vtx, st.v[(i + 1) % m])
                        } else {
                            (st.v[u], *vtx)
                        };
                        let free = boundary_distance(w, &pa) <= st.snap_tol
                            && boundary_distance(w, &pb) <= st.snap_tol
                            && boundary_distance(
                                w,
                                &[0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                            ) <= st.snap_tol;
                        if !free {
                            e += dist2(&pa, &pb);
                        }
                    }
                    e
                };
                if local(&candidate) >= local(&snapped) - 1e-14 {
                    st.v[i] = snapped;
                }
            }
        }
        // convergence is judged on the normal part of the constrained
        // displacement: pinned vertices keep a raw gradient forever, and the
        // tangent-difference flow keeps equidistributing vertices (an
        // energy-neutral drift) long after the shape is stationary
        grad_norm = 0.0;
        for i in 0..m {
            let dx = (st.v[i][0] - before[i][0]) / dt;
            let dy = (st.v[i][1] - before[i][1]) / dt;
            let nn = (garea[i][0] * garea[i][0] + garea[i][1] * garea[i][1]).sqrt().max(1e-14);
            let normal_rate = (dx * garea[i][0] + dy * garea[i][1]).abs() / nn;
            grad_norm = grad_norm.max(normal_rate);
        }
        // exact area restoration by uniform normal offset of the non-contact
        // vertices (augmented-Lagrangian style outer correction)
        let area = shoelace(&st.v);
        let defect = target_area - area;
        if defect.abs() > 1e-12 * target_area {
            let per: f64 = (0..m).map(|i| dist2(&st.v[i], &st.v[(i + 1) % m])).sum();
            let h = defect / per;
            let contact2 = st.contacts(w);
            for i in 0..m {
                if contact2[i] {
                    continue;
                }
                let p = st.v[(i + m - 1) % m];
                let q = st.v[(i + 1) % m];
                let nx = q[1] - p[1];
                let ny = -(q[0] - p[0]);
                let nn = (nx * nx + ny * ny).sqrt().max(1e-14);
                st.v[i][0] += h * nx / nn;
                st.v[i][1] += h * ny / nn;
            }
        }
        if iter > 200 && grad_norm < params.grad_tol {
            break;
        }
    }
    let _ = energy_stalled;
    if grad_norm > 1e4 * params.grad_tol && grad_norm > 0.9 * grad_checkpoint {
        // the normal rate stopped decreasing while still large: a genuine
        // plateau rather than a slowly finishing descent
        return Err(ExigeoError::numerical(format!(
            "polygon descent plateaued with gradient {grad_norm:.3e}"
        )));
    }
    let area = shoelace(&st.v);
    let energy = st.energy(w);
    let contact = st.contacts(w);
    Ok(PolylineRegion { vertices: st.v, contact, energy, area })
}

/// A start configuration that already carries a contact run: for segments
/// the exact arc-family shape; for obstacles with interior, an overlapping
/// circle with the interior vertices projected onto the boundary.
fn contact_start(
    w: &Obstacle,
    target_area: f64,
    m: usize,
    snap_tol: f64,
) -> Option<Vec<[f64; 2]>> {
    use crate::residue::ObstacleShape;
    match w.shape() {
        ObstacleShape::Segment { a, b } => {
            let d = dist2(a, b);
            let build = |alpha: f64| -> Vec<[f64; 2]> {
                let r = d / (2.0 * alpha.sin());
                let e = [(b[0] - a[0]) / d, (b[1] - a[1]) / d];
                let nrm = [-e[1], e[0]];
                let mid = [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])];
                let center =
                    [mid[0] + r * alpha.cos() * nrm[0], mid[1] + r * alpha.cos() * nrm[1]];
                // counterclockwise: chord a -> b, then the major arc b -> a
                let m_chord = (m / 6).max(4);
                let m_arc = m - m_chord;
                let mut v = Vec::with_capacity(m);
                for k in 0..m_chord {
                    let t = k as f64 / m_chord as f64;
                    v.push([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]);
                }
                let ang_b = (b[1] - center[1]).atan2(b[0] - center[0]);
                let ang_a = (a[1] - center[1]).atan2(a[0] - center[0]);
                let mut sweep = ang_a - ang_b;
                while sweep <= 0.0 {
                    sweep += 2.0 * std::f64::consts::PI;
                }
                for k in 0..m_arc {
                    let t = ang_b + sweep * k as f64 / m_arc as f64;
                    v.push([center[0] + r * t.cos(), center[1] + r * t.sin()]);
                }
                v
            };
            // bisect alpha so the discrete polygon area matches exactly,
            // avoiding an area-restoration kick on the first iteration
            let (_, alpha0) = segment_arc_family(d, target_area).ok()?;
            let mut lo = alpha0;
            let mut hi = alpha0;
            // discrete area < smooth area, so the defect is negative: widen
            for _ in 0..60 {
                lo *= 0.8;
                if shoelace(&build(lo)) > target_area {
                    break;
                }
            }
            for _ in 0..60 {
                hi = (hi * 1.25).min(std::f64::consts::FRAC_PI_2 * 0.999);
                if shoelace(&build(hi)) < target_area {
                    break;
                }
            }
            let alpha = crate::quad::bisect_root(
                |t| shoelace(&build(t)) - target_area,
                lo,
                hi,
                1e-14,
            )
            .ok()?;
            Some(build(alpha))
        }
        ObstacleShape::Ball { .. } | ObstacleShape::Polygon { .. } => {
            // overlapping circle, interior vertices projected out
            let radius = (target_area / std::f64::consts::PI).sqrt();
            let (y0, y1) = w.slab(&crate::linalg::VecN::from_slice(&[0.0, 1.0]));
            let (x0, x1) = w.slab(&crate::linalg::VecN::from_slice(&[1.0, 0.0]));
            let center = [0.5 * (x0 + x1), y1 + radius - 0.25 * (y1 - y0).max(snap_tol)];
            let mut v: Vec<[f64; 2]> = (0..m)
                .map(|k| {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                    [center[0] + radius * t.cos(), center[1] + radius * t.sin()]
                })
                .collect();
            for p in &mut v {
                if w.distance(&crate::linalg::VecN::from_slice(p)) < 0.0 {
                    *p = project_to_boundary(w, p);
                }
            }
            Some(v)
        }
        _ => None,
    }
}

/// Exact one-parameter oracle for the segment obstacle: the region bounded
/// by a circular arc through the segment endpoints, with the chord free.
/// Returns `(energy, area)` at the half-angle `alpha`, and the optimal
/// energy at a target area by bisection on `alpha`.
pub fn segment_arc_family(d: f64, target_area: f64) -> Result<(f64, f64)> {
    // area(alpha) = r^2 (pi - alpha + sin alpha cos alpha), r = d/(2 sin alpha)
    let area = |alpha: f64| {
        let r = d / (2.0 * alpha.sin());
        r * r * (std::f64::consts::PI - alpha + alpha.sin() * alpha.cos())
    };
    if area(std::f64::consts::FRAC_PI_2 * 0.999_999) > target_area {
        return Err(ExigeoError::validation("target area too small for the arc family"));
    }
    let alpha = crate::quad::bisect_root(
        |a| area(a) - target_area,
        1e-9,
        std::f64::consts::FRAC_PI_2 * 0.999_999,
        1e-14,
    )?;
    let r = d / (2.0 * alpha.sin());
    let energy = 2.0 * r * (std::f64::consts::PI - alpha);
    Ok((energy, alpha))
}


#[cfg(test)]
mod large_volume_tests {
    use super::*;
    use crate::solvers::ball_perimeter;

    #[test]
    fn segment_gap_window_at_large_volume() {
        // v = 400 d^2 for the unit segment: the gap sits in (-d, -0.8 d)
        let w = Obstacle::segment(&[-0.5, 0.0], &[0.5, 0.0]).unwrap();
        let v = 400.0;
        let sol = solve_polygon(&w, v, &PolygonParams::default()).unwrap();
        let gap = sol.energy - ball_perimeter(1, v);
        assert!(gap > -1.0 && gap < -0.8, "gap {gap}");
        // the competitor-family oracle is an upper bound for the energy
        let (oracle, _) = segment_arc_family(1.0, v).unwrap();
        assert!(sol.energy <= oracle + 5e-2, "{} vs oracle {oracle}", sol.energy);
    }
}
