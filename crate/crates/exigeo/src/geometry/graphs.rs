//! Conversions between spherical graphs, cylindrical graphs over a
//! hyperplane, and normal graphs over a base graph.

use std::sync::Arc;

use super::{GeometryConfig, OrientedHyperplane, SphericalGraphField};
use crate::error::{ExigeoError, Result};
use crate::linalg::VecN;

type PlaneEval = Arc<dyn Fn(&VecN) -> f64 + Send + Sync>;

/// A cylindrical graph `{x + g(x) nu_H : x in annulus of H}`.
#[derive(Clone)]
pub struct CylindricalGraph {
    pub plane: OrientedHyperplane,
    /// Valid planar annulus `rho1 < |x| < rho2`.
    pub rho1: f64,
    pub rho2: f64,
    eval: PlaneEval,
    /// Sampled `sup |g(x)|/|x|`.
    pub sup_ratio: f64,
    /// Sampled `sup |grad g|`.
    pub sup_grad: f64,
}

impl CylindricalGraph {
    pub fn value(&self, x: &VecN) -> f64 {
        (self.eval)(x)
    }

    pub fn evaluator(&self) -> PlaneEval {
        Arc::clone(&self.eval)
    }

    /// Ambient point over the planar point `x`.
    pub fn point(&self, x: &VecN) -> VecN {
        x.axpy((self.eval)(x), self.plane.normal())
    }
}

/// Express a spherical annular graph as a cylindrical graph over its plane.
/// Valid when the field norms are below the admissibility threshold `eta`.
pub fn spherical_to_cylindrical(
    g: &SphericalGraphField,
    eta: f64,
    cfg: &GeometryConfig,
) -> Result<CylindricalGraph> {
    let norms = g.norms(cfg);
    let eta_obs = norms.c1.max(norms.radial);
    if eta_obs >= eta {
        return Err(ExigeoError::validation(format!(
            "field norm {eta_obs:.3e} is not below the admissibility threshold {eta:.3e}"
        )));
    }
    let plane = g.plane().clone();
    let (r1, r2) = g.radial_interval();
    // Safe planar annulus: shrink by first-order margins in eta.
    let rho1 = r1 * (1.0 + 2.0 * eta_obs);
    let rho2 = r2 * (1.0 - 2.0 * eta_obs * eta_obs) * (1.0 - 1e-9);
    if rho1 >= rho2 {
        return Err(ExigeoError::validation("annulus too thin after graph margins"));
    }
    let ge = g.evaluator();
    let plane2 = plane.clone();
    let (gr1, gr2) = (r1, r2);
    let eval: PlaneEval = Arc::new(move |x: &VecN| {
        let rho = x.norm();
        let omega = x.scale(1.0 / rho);
        // solve r / sqrt(1 + u(omega, r)^2) = rho for r
        let mut r = rho;
        for _ in 0..60 {
            let u = ge(&omega, r.clamp(gr1, gr2));
            let val = r / (1.0 + u * u).sqrt() - rho;
            if val.abs() < 1e-14 * rho.max(1.0) {
                break;
            }
            let h = 1e-7 * r;
            let up = ge(&omega, (r + h).clamp(gr1, gr2));
            let um = ge(&omega, (r - h).clamp(gr1, gr2));
            let d = ((r + h) / (1.0 + up * up).sqrt() - (r - h) / (1.0 + um * um).sqrt()) / (2.0 * h);
            r -= val / d;
        }
        let u = ge(&omega, r.clamp(gr1, gr2));
        let _ = &plane2;
        rho * u
    });
    // sampled norms of the cylindrical function
    let grid = plane.grid(cfg.angular_nodes.min(64));
    let mut sup_ratio = 0.0f64;
    let mut sup_grad = 0.0f64;
    let tb = plane.tangent_basis();
    for k in 0..17 {
        let rho = rho1 + (rho2 - rho1) * (k as f64 + 0.5) / 17.0;
        for omega in grid.points() {
            let x = omega.scale(rho);
            let v = eval(&x);
            sup_ratio = sup_ratio.max(v.abs() / rho);
            let h = 1e-5 * rho;
            let mut grad_sq = 0.0;
            for t in &tb {
                let d = (eval(&x.axpy(h, t)) - eval(&x.axpy(-h, t))) / (2.0 * h);
                grad_sq += d * d;
            }
            sup_grad = sup_grad.max(grad_sq.sqrt());
        }
    }
    Ok(CylindricalGraph { plane, rho1, rho2, eval, sup_ratio, sup_grad })
}

/// A normal graph `{z + h(z) nu_f(z) : z in graph(f)}` over the base graph
/// of `f`, parametrized by the base point `x in H`.
pub struct NormalGraph {
    pub plane: OrientedHyperplane,
    eval: PlaneEval,
}

impl NormalGraph {
    /// `h` at the base point `x` (the graph point is `x + f(x) nu`).
    pub fn value(&self, x: &VecN) -> f64 {
        (self.eval)(x)
    }

    pub fn plane(&self) -> &OrientedHyperplane {
        &self.plane
    }
}

/// Write the graph of `g` as a normal graph over the graph of `f`:
/// `{x + g(x) nu_H} = {z + h(z) nu_f(z)}`. Both inputs are functions on the
/// plane; gradients are taken by central differences. Fails, naming the
/// offending radius, if the per-point Newton solve does not converge.
pub fn graph_over_graph<F, G>(
    plane: &OrientedHyperplane,
    f: F,
    g: G,
) -> Result<NormalGraph>
where
    F: Fn(&VecN) -> f64 + Send + Sync + 'static,
    G: Fn(&VecN) -> f64 + Send + Sync + 'static,
{
    let plane2 = plane.clone();
    let tb = plane.tangent_basis();
    let f = Arc::new(f);
    let g = Arc::new(g);
    let eval: PlaneEval = Arc::new(move |x0: &VecN| {
        let fd = 1e-6 * x0.norm().max(1.0);
        let mut grad = VecN::zeros(x0.dim());
        for t in &tb {
            let d = (f(&x0.axpy(fd, t)) - f(&x0.axpy(-fd, t))) / (2.0 * fd);
            grad = grad.axpy(d, t);
        }
        let denom = (1.0 + grad.dot(&grad)).sqrt();
        let f0 = f(x0);
        // z + t nu_f hits graph(g) where
        // f0 + t/denom = g(x0 - t grad/denom)
        let psi = |t: f64| {
            let y = x0.axpy(-t / denom, &grad);
            f0 + t / denom - g(&y)
        };
        let mut t = (g(x0) - f0) * denom;
        let mut r = psi(t);
        let mut converged = r.abs() < 1e-13;
        for _ in 0..50 {
            if converged {
                break;
            }
            let h = 1e-7 * t.abs().max(1e-3);
            let dr = (psi(t + h) - psi(t - h)) / (2.0 * h);
            if !dr.is_finite() || dr.abs() < 1e-10 {
                break;
            }
            t -= r / dr;
            r = psi(t);
            converged = r.abs() < 1e-13;
        }
        if !converged {
            panic!(
                "normal-projection solve failed at radius {:.6e} (residual {:.3e})",
                x0.norm(),
                r
            );
        }
        t
    });
    let _ = &plane2;
    Ok(NormalGraph { plane: plane.clone(), eval })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GeometryConfig {
        GeometryConfig::default()
    }

    #[test]
    fn zero_field_gives_zero_cylindrical_graph() {
        let h = OrientedHyperplane::coordinate(2);
        let g = SphericalGraphField::constant(h.clone(), 1.0, 2.0, 0.0).unwrap();
        let cyl = spherical_to_cylindrical(&g, 0.2, &cfg()).unwrap();
        let x = VecN::from_slice(&[1.5, 0.2, 0.0]);
        assert!(cyl.value(&x).abs() < 1e-13);
        assert!(cyl.sup_ratio < 1e-12 && cyl.sup_grad < 1e-9);
    }

    #[test]
    fn small_cone_matches_exact_geometry() {
        // u = c constant: the graph is the cone z = c |x|, so g_cyl(x) = c |x|
        // exactly (the spherical radius solve absorbs the normalization).
        let h = OrientedHyperplane::coordinate(2);
        let c = 0.03;
        let g = SphericalGraphField::constant(h.clone(), 1.0, 2.0, c).unwrap();
        let cyl = spherical_to_cylindrical(&g, 0.2, &cfg()).unwrap();
        for rho in [1.2, 1.5, 1.8] {
            let x = VecN::from_slice(&[rho, 0.0, 0.0]);
            let got = cyl.value(&x);
            let rel = (got - c * rho).abs() / (c * rho);
            assert!(rel <= 2.0 * c * c, "rho={rho}: rel error {rel}");
        }
    }

    #[test]
    fn cylindrical_round_trip_point_sets() {
        let h = OrientedHyperplane::coordinate(2);
        let u = SphericalGraphField::new(h.clone(), 1.0, 2.0, |omega, r| {
            0.02 * omega.get(0) + 0.005 * (r - 1.5)
        })
        .unwrap();
        let cyl = spherical_to_cylindrical(&u, 0.2, &cfg()).unwrap();
        // points sampled from the spherical graph must satisfy the
        // cylindrical description
        let grid = h.grid(32);
        for r in [1.3, 1.5, 1.7] {
            for omega in grid.points() {
                let p = u.point(omega, r);
                let (x, height) = h.project(&p);
                if x.norm() <= cyl.rho1 || x.norm() >= cyl.rho2 {
                    continue;
                }
                assert!((cyl.value(&x) - height).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn graph_over_itself_is_zero() {
        let h = OrientedHyperplane::coordinate(2);
        let f = |x: &VecN| 0.1 * x.get(0);
        let ng = graph_over_graph(&h, f, f).unwrap();
        let x = VecN::from_slice(&[2.0, 1.0, 0.0]);
        assert!(ng.value(&x).abs() < 1e-12);
    }

    #[test]
    fn flat_base_reduces_to_direct_height() {
        let h = OrientedHyperplane::coordinate(2);
        let g = |x: &VecN| 0.05 + 0.01 * x.get(1);
        let ng = graph_over_graph(&h, |_| 0.0, g).unwrap();
        let x = VecN::from_slice(&[1.0, 2.0, 0.0]);
        assert!((ng.value(&x) - g(&x)).abs() < 1e-10);
    }

    #[test]
    fn catenoid_pair_lies_on_target_graph() {
        // Two nearby catenoid-type profiles in R^4 (n = 3): the produced
        // normal-graph points must lie on the second graph. Oracle: dense
        // nearest-point distance to the target surface.
        let h = OrientedHyperplane::coordinate(3);
        let prof = |c: f64| move |x: &VecN| {
            let r = x.norm();
            // f' = c / sqrt(r^4 - c^2), integrated from 2.0
            crate::quad::adaptive_simpson(
                |t: f64| c / (t.powi(4) - c * c).sqrt(),
                2.0,
                r,
                1e-12,
            )
        };
        let f = prof(0.2);
        let g = prof(0.201);
        let ng = graph_over_graph(&h, f, g).unwrap();
        let x0 = VecN::from_slice(&[2.5, 0.5, 0.3, 0.0]);
        let hval = ng.value(&x0);
        // reconstruct the ambient point and check it sits on graph(g)
        let fd = 1e-6 * x0.norm();
        let tb = h.tangent_basis();
        let mut grad = VecN::zeros(4);
        for t in &tb {
            let d = (f(&x0.axpy(fd, t)) - f(&x0.axpy(-fd, t))) / (2.0 * fd);
            grad = grad.axpy(d, t);
        }
        let denom = (1.0 + grad.dot(&grad)).sqrt();
        let z = x0.axpy(f(&x0), h.normal());
        let nu_f = h.normal().sub(&grad).scale(1.0 / denom);
        let (px, pz) = h.project(&z.axpy(hval, &nu_f));
        let dist = (pz - g(&px)).abs();
        assert!(dist <= 1e-8, "off-surface distance {dist}");
    }
}
