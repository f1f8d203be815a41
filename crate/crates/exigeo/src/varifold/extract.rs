//! Empirical graphicality: fit a reference hyperplane by principal-axis
//! analysis and extract the surface as a spherical graph over it.

use super::{ExteriorSurface, SurfaceGeometry};
use crate::error::{ExigeoError, Result};
use crate::geometry::{FieldNorms, GeometryConfig, OrientedHyperplane, SphericalGraphField};
use crate::linalg::{sym_eigen, VecN};

/// Uniformly spaced directions on the unit sphere of the axis complement:
/// angularly balanced, so principal-axis fits of axisymmetric samples stay
/// aligned with the axis.
fn uniform_orbit(n: usize, axis: &VecN, count: usize) -> Vec<(VecN, f64)> {
    let plane = OrientedHyperplane::new(*axis).expect("unit axis");
    let tb = plane.tangent_basis();
    let mut out = Vec::new();
    match n {
        1 => out.push((tb[0], 1.0)),
        2 => {
            for j in 0..count {
                let t = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                out.push((tb[0].scale(t.cos()).axpy(t.sin(), &tb[1]), 1.0));
            }
        }
        _ => {
            let m = count.max(8) / 4;
            for i in 0..m {
                let phi = std::f64::consts::PI * (i as f64 + 0.5) / m as f64;
                for j in 0..count {
                    let t = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
                    let dir = tb[0]
                        .scale(t.cos() * phi.sin())
                        .axpy(t.sin() * phi.sin(), &tb[1])
                        .axpy(phi.cos(), &tb[2]);
                    out.push((dir, phi.sin()));
                }
            }
        }
    }
    out
}

/// Surface samples inside the annulus `r < |x| < s`.
fn annulus_samples(surface: &ExteriorSurface, r: f64, s: f64) -> Vec<VecN> {
    let pts: Vec<VecN> = match surface.geometry() {
        SurfaceGeometry::Revolution(rev) => {
            let orbit = uniform_orbit(surface.n(), rev.axis(), 64);
            rev.sample_points(512, &orbit)
        }
        SurfaceGeometry::Mesh(m) => m.sample_points(),
        SurfaceGeometry::SphericalGraph(f) => {
            let grid = f.plane().grid(64);
            let (r1, r2) = f.radial_interval();
            let mut out = Vec::new();
            for k in 0..64 {
                let rad = r1 + (r2 - r1) * (k as f64 + 0.5) / 64.0;
                for omega in grid.points() {
                    out.push(f.point(omega, rad));
                }
            }
            out
        }
    };
    pts.into_iter()
        .filter(|p| {
            let n = p.norm();
            n > r && n < s
        })
        .collect()
}

/// Fit the reference hyperplane: smallest-variance principal direction of
/// the centered samples, with a deterministic sign.
fn fit_plane(n: usize, samples: &[VecN]) -> Result<OrientedHyperplane> {
    if samples.len() < n + 2 {
        return Err(ExigeoError::numerical("too few surface samples in the annulus"));
    }
    let d = n + 1;
    let mut mean = VecN::zeros(d);
    for p in samples {
        mean = mean.add(p);
    }
    mean = mean.scale(1.0 / samples.len() as f64);
    let mut cov = vec![0.0; d * d];
    for p in samples {
        let q = p.sub(&mean);
        for i in 0..d {
            for j in 0..d {
                cov[i * d + j] += q.get(i) * q.get(j);
            }
        }
    }
    let (_, vecs) = sym_eigen(&cov, d);
    let mut normal = VecN::zeros(d);
    for i in 0..d {
        normal.set(i, vecs[i * d]); // smallest eigenvalue comes first
    }
    // deterministic sign: largest-magnitude component positive
    let mut k = 0;
    for i in 1..d {
        if normal.get(i).abs() > normal.get(k).abs() {
            k = i;
        }
    }
    if normal.get(k) < 0.0 {
        normal = normal.scale(-1.0);
    }
    OrientedHyperplane::from_direction(normal)
}

/// Extract the surface as a spherical graph over a fitted hyperplane on the
/// annulus `(r, s)`. Fails, naming the offending direction, when some
/// meridian misses the surface or meets it more than once.
pub fn extract_graphical_annulus(
    surface: &ExteriorSurface,
    r: f64,
    s: f64,
) -> Result<(OrientedHyperplane, SphericalGraphField, FieldNorms)> {
    if !(surface.hole_radius() <= r && r < s && s <= surface.extent() * (1.0 + 1e-9)) {
        return Err(ExigeoError::validation("annulus outside the surface extent"));
    }
    let n = surface.n();
    let samples = annulus_samples(surface, r, s);
    let mut plane = fit_plane(n, &samples)?;

    // snap to the symmetry axis when the fit lands next to it
    if let SurfaceGeometry::Revolution(rev) = surface.geometry() {
        let a = rev.axis();
        if plane.normal().dist(a).min(plane.normal().add(a).norm()) < 1e-6 {
            let aligned = if plane.normal().dot(a) >= 0.0 { *a } else { a.scale(-1.0) };
            plane = OrientedHyperplane::new(aligned)?;
        }
    }

    // graphicality scan before handing out the evaluator
    let grid = plane.grid(32);
    for k in 0..8 {
        let t = r + (s - r) * (k as f64 + 0.5) / 8.0;
        for omega in grid.points().iter().step_by(2) {
            solve_height(surface, &plane, omega, t)?;
        }
    }

    let surf = surface.clone();
    let plane2 = plane.clone();
    let field = SphericalGraphField::new(plane.clone(), r, s, move |omega, t| {
        solve_height(&surf, &plane2, omega, t)
            .unwrap_or_else(|e| panic!("graph extraction failed: {e}"))
    })?;
    let cfg = GeometryConfig::default();
    let norms = field.norms(&cfg);
    Ok((plane, field, norms))
}

/// Height `w` with the point `t (omega + w nu)/sqrt(1+w^2)` on the surface,
/// or an error when the meridian misses the surface or is multivalued.
fn solve_height(
    surface: &ExteriorSurface,
    plane: &OrientedHyperplane,
    omega: &VecN,
    t: f64,
) -> Result<f64> {
    let nu = plane.normal();
    match surface.geometry() {
        SurfaceGeometry::Revolution(rev) => {
            let axis = rev.axis();
            let aligned = nu.dist(axis).min(nu.add(axis).norm()) < 1e-9;
            if !aligned {
                return Err(ExigeoError::numerical(
                    "extraction over a plane tilted against the revolution axis is not supported",
                ));
            }
            let sign = nu.dot(axis).signum();
            // |x| = t picks the curve parameter; w = z / rho
            let mut found: Option<(f64, f64)> = None;
            let mut count = 0;
            for seg in 0..rev.segment_count() {
                let g = |ss: f64| {
                    let (rho, z) = rev.curve(seg, ss);
                    rho * rho + z * z - t * t
                };
                let m = 256;
                let mut prev = 0.0;
                let mut prev_g = g(0.0);
                for k in 1..=m {
                    let ss = k as f64 / m as f64;
                    let cur = g(ss);
                    if prev_g * cur < 0.0 || (prev_g == 0.0 && cur != 0.0) {
                        let root = crate::quad::bisect_root(g, prev, ss, 1e-15)?;
                        let (rho, z) = rev.curve(seg, root);
                        if rho > 1e-13 {
                            count += 1;
                            found = Some((rho, z));
                        }
                    }
                    prev = ss;
                    prev_g = cur;
                }
            }
            match (count, found) {
                (1, Some((rho, z))) => Ok(sign * z / rho),
                (0, _) => Err(ExigeoError::numerical(format!(
                    "no surface point at radius {t:.6e}: missing coverage"
                ))),
                _ => Err(ExigeoError::numerical(format!(
                    "meridian at radius {t:.6e} meets the surface {count} times"
                ))),
            }
        }
        SurfaceGeometry::SphericalGraph(f) => {
            // Newton on w -> height of the direction over the base plane
            let h = f.plane().clone();
            let residual = |w: f64| -> f64 {
                let c = omega.axpy(w, nu).scale(1.0 / (1.0 + w * w).sqrt());
                let (p, q) = h.project(&c);
                let pn = p.norm();
                q / pn - f.value(&p.scale(1.0 / pn), t)
            };
            let mut w = 0.0;
            let mut rres = residual(w);
            for _ in 0..60 {
                if rres.abs() < 1e-13 {
                    return Ok(w);
                }
                let step = 1e-7;
                let dr = (residual(w + step) - residual(w - step)) / (2.0 * step);
                if !dr.is_finite() || dr.abs() < 1e-8 {
                    break;
                }
                w -= (rres / dr).clamp(-0.5, 0.5);
                rres = residual(w);
            }
            if rres.abs() < 1e-10 {
                Ok(w)
            } else {
                Err(ExigeoError::numerical(format!(
                    "no graph point over omega = {:?} at radius {t:.6e}: missing coverage",
                    omega.as_slice()
                )))
            }
        }
        SurfaceGeometry::Mesh(mesh) => {
            // Intersect each triangle with the meridian half-plane
            // {a omega + b nu : a > 0} and solve |x| = t on the resulting
            // segments.
            let m_normal = cross3(omega, nu);
            let mut ws: Vec<f64> = Vec::new();
            for tidx in &mesh.triangles {
                let verts = [
                    mesh.vertices[tidx[0]],
                    mesh.vertices[tidx[1]],
                    mesh.vertices[tidx[2]],
                ];
                let d: Vec<f64> = verts
                    .iter()
                    .map(|v| v[0] * m_normal.get(0) + v[1] * m_normal.get(1) + v[2] * m_normal.get(2))
                    .collect();
                // collect plane-crossing points of the triangle edges
                let mut pts: Vec<VecN> = Vec::new();
                for e in 0..3 {
                    let (i, j) = (e, (e + 1) % 3);
                    if d[i] == 0.0 {
                        pts.push(VecN::from_slice(&verts[i]));
                    }
                    if d[i] * d[j] < 0.0 {
                        let lam = d[i] / (d[i] - d[j]);
                        pts.push(VecN::from_slice(&[
                            verts[i][0] + lam * (verts[j][0] - verts[i][0]),
                            verts[i][1] + lam * (verts[j][1] - verts[i][1]),
                            verts[i][2] + lam * (verts[j][2] - verts[i][2]),
                        ]));
                    }
                }
                if pts.len() < 2 {
                    continue;
                }
                let (p, q) = (pts[0], pts[1]);
                // solve |p + lam (q - p)| = t, lam in [0, 1]
                let dseg = q.sub(&p);
                let a = dseg.dot(&dseg);
                if a < 1e-300 {
                    continue;
                }
                let b = 2.0 * p.dot(&dseg);
                let c = p.dot(&p) - t * t;
                let disc = b * b - 4.0 * a * c;
                if disc < 0.0 {
                    continue;
                }
                let sq = disc.sqrt();
                for lam in [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)] {
                    if !(0.0..=1.0).contains(&lam) {
                        continue;
                    }
                    let x = p.axpy(lam, &dseg);
                    let aco = x.dot(omega);
                    if aco <= 1e-12 {
                        continue;
                    }
                    ws.push(x.dot(nu) / aco);
                }
            }
            ws.sort_by(|a, b| a.partial_cmp(b).unwrap());
            ws.dedup_by(|a, b| (*a - *b).abs() < 1e-9 * (1.0 + a.abs()));
            match ws.len() {
                1 => Ok(ws[0]),
                0 => Err(ExigeoError::numerical(format!(
                    "no mesh point over omega = {:?} at radius {t:.6e}: missing coverage",
                    omega.as_slice()
                ))),
                k => Err(ExigeoError::numerical(format!(
                    "meridian over omega = {:?} at radius {t:.6e} meets the mesh {k} times",
                    omega.as_slice()
                ))),
            }
        }
    }
}

fn cross3(a: &VecN, b: &VecN) -> VecN {
    VecN::from_slice(&[
        a.get(1) * b.get(2) - a.get(2) * b.get(1),
        a.get(2) * b.get(0) - a.get(0) * b.get(2),
        a.get(0) * b.get(1) - a.get(1) * b.get(0),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plane_extraction_recovers_plane() {
        let s = ExteriorSurface::plane_with_hole(2, 0.5, 8.0).unwrap();
        let (plane, field, norms) = extract_graphical_annulus(&s, 1.0, 4.0).unwrap();
        let e3 = VecN::basis(3, 2);
        let d = plane.normal().dist(&e3).min(plane.normal().add(&e3).norm());
        assert!(d < 1e-10, "normal error {d}");
        assert!(norms.c0 < 1e-10 && norms.c1 < 1e-8);
        let omega = VecN::from_slice(&[1.0, 0.0, 0.0]);
        assert!(field.value(&omega, 2.0).abs() < 1e-12);
    }

    #[test]
    fn constructed_graph_recovered() {
        // V = Sigma_H(u0) for a known small field: the extracted graph must
        // match u0 as a point set.
        let h = OrientedHyperplane::coordinate(2);
        let u0 = SphericalGraphField::new(h.clone(), 1.0, 4.0, |omega, r| {
            0.02 * omega.get(0) + 0.01 * (r - 2.0) * 0.1
        })
        .unwrap();
        let surf = ExteriorSurface::from_spherical_graph(u0.clone(), 0.5).unwrap();
        let (plane, field, _) = extract_graphical_annulus(&surf, 1.5, 3.5).unwrap();
        let grid = plane.grid(16);
        for omega in grid.points() {
            for t in [2.0, 2.5, 3.0] {
                let w = field.value(omega, t);
                let p = plane.spherical_graph_point(omega, w, t).unwrap();
                let (ph, q) = h.project(&p);
                let rho = ph.norm();
                let omega_h = ph.scale(1.0 / rho);
                let expected = u0.value(&omega_h, p.norm());
                assert!(
                    (q / rho - expected).abs() < 1e-8,
                    "height mismatch {} vs {expected}",
                    q / rho
                );
            }
        }
    }

    #[test]
    fn mesh_plane_extraction() {
        // flat annulus mesh in the plane z = 0
        let mut vertices = Vec::new();
        let sectors = 64;
        for i in 0..=8 {
            let r = 0.5 + 2.5 * i as f64 / 8.0;
            for j in 0..sectors {
                let t = 2.0 * std::f64::consts::PI * j as f64 / sectors as f64;
                vertices.push([r * t.cos(), r * t.sin(), 0.0]);
            }
        }
        let mut triangles = Vec::new();
        let idx = |i: usize, j: usize| i * sectors + (j % sectors);
        for i in 0..8 {
            for j in 0..sectors {
                triangles.push([idx(i, j), idx(i + 1, j), idx(i + 1, j + 1)]);
                triangles.push([idx(i, j), idx(i + 1, j + 1), idx(i, j + 1)]);
            }
        }
        let mesh = super::super::TriangleMesh::new(vertices, triangles).unwrap();
        let surf = ExteriorSurface::from_mesh(mesh, 0.0).unwrap();
        let (plane, _field, norms) = extract_graphical_annulus(&surf, 1.0, 2.5).unwrap();
        let e3 = VecN::basis(3, 2);
        let d = plane.normal().dist(&e3).min(plane.normal().add(&e3).norm());
        assert!(d < 1e-9, "normal error {d}");
        assert!(norms.c0 < 1e-9);
    }

    #[test]
    fn sphere_about_origin_is_not_graphical() {
        // |x| is constant on the sphere about 0: no full annulus is covered
        let s = ExteriorSurface::sphere(2, 1.0, 0.0).unwrap();
        let r = extract_graphical_annulus(&s, 0.8, 1.0);
        assert!(r.is_err());
    }

    #[test]
    fn off_axis_sphere_zone_is_graphical() {
        // a sphere centered on the axis away from 0 is a legitimate
        // spherical graph over the equator of the axis plane on radius
        // windows crossing it once
        let s = ExteriorSurface::sphere(2, 1.0, 3.0).unwrap();
        let (plane, _field, norms) = extract_graphical_annulus(&s, 2.2, 3.8).unwrap();
        assert!(plane.normal().get(2).abs() > 0.999);
        assert!(norms.c0 > 0.5, "sphere zone heights are order one");
    }
}
