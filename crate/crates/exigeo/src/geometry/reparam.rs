//! Reparametrization of spherical graphs between tilted hyperplanes and the
//! recentering step that annihilates the Jacobi projection.

use std::sync::Arc;

use super::{
    equator_tangent_frame, jacobi_projection, rotate_between, AngularField, GeometryConfig,
    OrientedHyperplane, SphericalGraphField,
};
use crate::error::{ExigeoError, Result};
use crate::linalg::{solve_dense, VecN};

/// Given a unit point `omega_k` on `Sigma_K` and a slice field `u` on
/// `Sigma_H`, find `w` with `(omega_k + w nu_K)/sqrt(1+w^2)` on the graph
/// `Sigma_H(u)`. Safeguarded Newton around `w = 0`.
fn solve_height(
    plane_h: &OrientedHyperplane,
    nu_k: &VecN,
    omega_k: &VecN,
    u: &dyn Fn(&VecN) -> f64,
) -> Result<f64> {
    let residual = |w: f64| -> f64 {
        let c = omega_k.axpy(w, nu_k).scale(1.0 / (1.0 + w * w).sqrt());
        let (p, q) = plane_h.project(&c);
        let pn = p.norm();
        // graph direction through c: height over Sigma_H is q/|p|
        q / pn - u(&p.scale(1.0 / pn))
    };
    let mut w = 0.0;
    let mut r = residual(w);
    for _ in 0..60 {
        if r.abs() < 1e-14 {
            return Ok(w);
        }
        let h = 1e-7;
        let dr = (residual(w + h) - residual(w - h)) / (2.0 * h);
        if !dr.is_finite() || dr.abs() < 1e-8 {
            break;
        }
        let step = (r / dr).clamp(-0.5, 0.5);
        w -= step;
        r = residual(w);
    }
    if r.abs() < 1e-10 {
        return Ok(w);
    }
    Err(ExigeoError::numerical(format!(
        "height solve did not converge (residual {r:.3e})"
    )))
}

/// Reparametrize an angular graph `Sigma_H(u)` as a graph `Sigma_K(v)` over a
/// nearby equatorial sphere. The returned field evaluates by inverting the
/// slice map pointwise, so the set identity holds to solver tolerance.
pub fn reparametrize_angular(
    k: &OrientedHyperplane,
    u: &AngularField,
    cfg: &GeometryConfig,
) -> Result<AngularField> {
    let h = u.plane().clone();
    let tilt = h.normal().dist(k.normal());
    if tilt > cfg.eps0 {
        return Err(ExigeoError::validation(format!(
            "tilt |nu_H - nu_K| = {tilt:.3e} exceeds eps0 = {:.3e}",
            cfg.eps0
        )));
    }
    let norms = u.norms(&h.grid(cfg.angular_nodes.min(64)), cfg);
    if !norms.within(cfg.sigma0) {
        return Err(ExigeoError::validation(format!(
            "field norm (C1 = {:.3e}, radial = {:.3e}) exceeds sigma0 = {:.3e}",
            norms.c1, norms.radial, cfg.sigma0
        )));
    }
    let nu_k = *k.normal();
    let ue = u.evaluator();
    let h2 = h.clone();
    Ok(AngularField::new(k.clone(), move |omega_k| {
        solve_height(&h2, &nu_k, omega_k, &*ue).expect("reparametrized field evaluation failed")
    }))
}

/// Annular version: reparametrize slice-by-slice, preserving the set
/// identity `Sigma_H(u, r1, r2) = Sigma_K(v, r1, r2)`.
pub fn reparametrize(
    k: &OrientedHyperplane,
    u: &SphericalGraphField,
    cfg: &GeometryConfig,
) -> Result<SphericalGraphField> {
    let h = u.plane().clone();
    let tilt = h.normal().dist(k.normal());
    if tilt > cfg.eps0 {
        return Err(ExigeoError::validation(format!(
            "tilt |nu_H - nu_K| = {tilt:.3e} exceeds eps0 = {:.3e}",
            cfg.eps0
        )));
    }
    let norms = u.norms(cfg);
    if !norms.within(cfg.sigma0) {
        return Err(ExigeoError::validation(format!(
            "field norm (C1 = {:.3e}, radial = {:.3e}) exceeds sigma0 = {:.3e}",
            norms.c1, norms.radial, cfg.sigma0
        )));
    }
    let (r1, r2) = u.radial_interval();
    let nu_k = *k.normal();
    let ue = u.evaluator();
    let h2 = h.clone();
    SphericalGraphField::new(k.clone(), r1, r2, move |omega_k, r| {
        let ue = Arc::clone(&ue);
        let slice = move |omega: &VecN| ue(omega, r);
        solve_height(&h2, &nu_k, omega_k, &slice).expect("reparametrized field evaluation failed")
    })
}

/// The forward slice map `T_u^K`: push a point of `Sigma_H` to `Sigma_K`
/// through the graph of `u`.
pub fn forward_map(
    h: &OrientedHyperplane,
    k: &OrientedHyperplane,
    omega: &VecN,
    u: f64,
) -> (VecN, f64) {
    let f = omega.axpy(u, h.normal()).scale(1.0 / (1.0 + u * u).sqrt());
    let (p, q) = k.project(&f);
    let pn = p.norm();
    (p.scale(1.0 / pn), q / pn)
}

/// Tangential Jacobian of `T_u^K` at `omega`, by geodesic differences.
fn forward_jacobian(
    h: &OrientedHyperplane,
    k: &OrientedHyperplane,
    u: &dyn Fn(&VecN) -> f64,
    omega: &VecN,
    step: f64,
) -> f64 {
    let frame = equator_tangent_frame(h, omega);
    if frame.is_empty() {
        return 1.0;
    }
    let m = frame.len();
    let mut diffs: Vec<VecN> = Vec::with_capacity(m);
    for t in &frame {
        let plus = omega.scale(step.cos()).axpy(step.sin(), t);
        let minus = omega.scale(step.cos()).axpy(-step.sin(), t);
        let (tp, _) = forward_map(h, k, &plus, u(&plus));
        let (tm, _) = forward_map(h, k, &minus, u(&minus));
        diffs.push(tp.sub(&tm).scale(1.0 / (2.0 * step)));
    }
    // Gram determinant of the pushed frame
    match m {
        1 => diffs[0].norm(),
        2 => {
            let g11 = diffs[0].dot(&diffs[0]);
            let g12 = diffs[0].dot(&diffs[1]);
            let g22 = diffs[1].dot(&diffs[1]);
            (g11 * g22 - g12 * g12).max(0.0).sqrt()
        }
        _ => unreachable!("n <= 3"),
    }
}

/// Coefficients of the reparametrized field `v_u^K` against the Jacobi basis
/// of `Sigma_K`, evaluated by pulling the integral back to the `H`-grid
/// (no inverse map needed). The `K`-basis is parallel transported from `H`.
fn jacobi_coefficients_on_k(
    h: &OrientedHyperplane,
    k: &OrientedHyperplane,
    u: &AngularField,
    tau_h: &[VecN],
    cfg: &GeometryConfig,
) -> Vec<f64> {
    let grid = h.grid(cfg.angular_nodes);
    let c0 = k.jacobi_constant();
    let ue = u.evaluator();
    let tau_k: Vec<VecN> = tau_h
        .iter()
        .map(|t| rotate_between(h.normal(), k.normal(), t))
        .collect();
    let mut coeffs = vec![0.0; tau_k.len()];
    for (omega, &w) in grid.points().iter().zip(grid.weights()) {
        let uv = ue(omega);
        let (t_omega, v) = forward_map(h, k, omega, uv);
        let jac = forward_jacobian(h, k, &*ue, omega, cfg.fd_step);
        for (c, tau) in coeffs.iter_mut().zip(&tau_k) {
            *c += w * v * c0 * t_omega.dot(tau) * jac;
        }
    }
    coeffs
}

/// Recenter the reference hyperplane: find `K` near `H` and `v` with
/// `Sigma_H(u) = Sigma_K(v)` and vanishing Jacobi projection of `v`.
/// Damped Newton with finite-difference Jacobian on the tilt coordinates.
pub fn recenter_hyperplane(
    u: &AngularField,
    cfg: &GeometryConfig,
) -> Result<(OrientedHyperplane, AngularField)> {
    let h = u.plane().clone();
    let n = h.n();
    let norms = u.norms(&h.grid(cfg.angular_nodes.min(64)), cfg);
    if !norms.within(cfg.sigma0) {
        return Err(ExigeoError::validation(format!(
            "field norm {:.3e} exceeds sigma0 = {:.3e}",
            norms.c1, cfg.sigma0
        )));
    }
    // Already centered?
    let proj = jacobi_projection(u, cfg);
    if proj.coefficient_norm() <= cfg.recenter_tol {
        return Ok((h, u.clone()));
    }
    let tau_h = h.tangent_basis();
    let plane_of = |t: &[f64]| -> OrientedHyperplane {
        let mut nu = *h.normal();
        for (c, tau) in t.iter().zip(&tau_h) {
            nu = nu.axpy(*c, tau);
        }
        OrientedHyperplane::from_direction(nu).expect("tilt chart degenerate")
    };
    let psi = |t: &[f64]| -> Vec<f64> {
        let k = plane_of(t);
        jacobi_coefficients_on_k(&h, &k, u, &tau_h, cfg)
    };

    let mut t = vec![0.0; n];
    let mut f = psi(&t);
    let mut best_res = f.iter().map(|x| x * x).sum::<f64>().sqrt();
    let step_cap = 0.5 * cfg.eps0;
    for _ in 0..cfg.recenter_max_iter {
        if best_res <= cfg.recenter_tol {
            break;
        }
        // finite-difference Jacobian
        let fd = 1e-7;
        let mut jac = vec![0.0; n * n];
        for j in 0..n {
            let mut tp = t.clone();
            tp[j] += fd;
            let fp = psi(&tp);
            for i in 0..n {
                jac[i * n + j] = (fp[i] - f[i]) / fd;
            }
        }
        let mut rhs = f.clone();
        let delta = solve_dense(&mut jac, &mut rhs, n)
            .map_err(|_| ExigeoError::numerical("recenter Newton system singular"))?;
        let dn = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
        let scale = if dn > step_cap { step_cap / dn } else { 1.0 };
        // damped update with backtracking
        let mut lambda = scale;
        let mut improved = false;
        for _ in 0..8 {
            let cand: Vec<f64> = t.iter().zip(&delta).map(|(a, d)| a - lambda * d).collect();
            let fc = psi(&cand);
            let res = fc.iter().map(|x| x * x).sum::<f64>().sqrt();
            if res < best_res {
                t = cand;
                f = fc;
                best_res = res;
                improved = true;
                break;
            }
            lambda *= 0.5;
        }
        if !improved {
            break;
        }
    }
    if best_res > cfg.recenter_tol.max(1e-9) {
        return Err(ExigeoError::numerical(format!(
            "recentering did not converge: residual {best_res:.3e}"
        )));
    }
    let k = plane_of(&t);
    let v = reparametrize_angular(&k, u, cfg)?;
    Ok((k, v))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> GeometryConfig {
        GeometryConfig { angular_nodes: 96, ..GeometryConfig::default() }
    }

    fn tilted_plane(theta: f64) -> OrientedHyperplane {
        OrientedHyperplane::from_direction(VecN::from_slice(&[theta.sin(), 0.0, theta.cos()]))
            .unwrap()
    }

    #[test]
    fn identity_reparametrization() {
        let h = OrientedHyperplane::coordinate(2);
        let u = AngularField::new(h.clone(), |omega| 0.02 * omega.get(0) * omega.get(1));
        let v = reparametrize_angular(&h, &u, &cfg()).unwrap();
        let grid = h.grid(41);
        for omega in grid.points() {
            assert!((v.value(omega) - u.value(omega)).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_graph_over_tilted_plane() {
        // u = 0 on Sigma_H, reparametrized over K tilted by 0.05: the point
        // sets must coincide. Oracle: direct normalization of H-equator points.
        let h = OrientedHyperplane::coordinate(2);
        let k = tilted_plane(0.05);
        let u = AngularField::constant(h.clone(), 0.0);
        let v = reparametrize_angular(&k, &u, &cfg()).unwrap();
        // sample 1000 points of Sigma_K, map through v, check they lie on H (u = 0 graph)
        for i in 0..1000 {
            let t = 2.0 * std::f64::consts::PI * i as f64 / 1000.0;
            let tb = k.tangent_basis();
            let omega_k = tb[0].scale(t.cos()).axpy(t.sin(), &tb[1]);
            let w = v.value(&omega_k);
            let point = omega_k.axpy(w, k.normal()).scale(1.0 / (1.0 + w * w).sqrt());
            // the point must lie on Sigma_H(0), i.e. have zero H-normal part
            assert!(point.dot(h.normal()).abs() <= 1e-10, "mismatch {}", point.dot(h.normal()));
        }
    }

    #[test]
    fn round_trip_recovers_field() {
        let h = OrientedHyperplane::coordinate(2);
        let k = tilted_plane(0.015);
        // small enough that the C0 (sigma + eps) growth of the forward trip
        // stays admissible for the return trip
        let u = SphericalGraphField::new(h.clone(), 1.0, 2.0, |omega, r| {
            0.008 * omega.get(0) + 0.004 * (r - 1.5) * omega.get(1)
        })
        .unwrap();
        let v = reparametrize(&k, &u, &cfg()).unwrap();
        let back = reparametrize(&h, &v, &cfg()).unwrap();
        let grid = h.grid(24);
        for r in [1.2, 1.5, 1.8] {
            for omega in grid.points() {
                assert!((back.value(omega, r) - u.value(omega, r)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn recenter_recovers_tilted_plane() {
        // Express the zero graph over a plane tilted by 0.01 rad as a field u
        // over H; recentering must recover the tilted plane and kill v.
        let h = OrientedHyperplane::coordinate(2);
        let k_true = tilted_plane(0.01);
        let zero = AngularField::constant(k_true.clone(), 0.0);
        let u = reparametrize_angular(&h, &zero, &cfg()).unwrap();
        let (k, v) = recenter_hyperplane(&u, &cfg()).unwrap();
        let tilt_err = k.normal().dist(k_true.normal()).min(k.normal().add(k_true.normal()).norm());
        assert!(tilt_err <= 1e-8, "tilt error {tilt_err}");
        let grid = k.grid(64);
        let l2 = v.l2_squared(&grid).sqrt();
        assert!(l2 <= 1e-8, "residual field norm {l2}");
    }

    #[test]
    fn recenter_is_noop_when_centered() {
        let h = OrientedHyperplane::coordinate(2);
        // second harmonic: orthogonal to the Jacobi fields
        let u = AngularField::new(h.clone(), |omega| {
            0.01 * (omega.get(0) * omega.get(0) - omega.get(1) * omega.get(1))
        });
        let (k, v) = recenter_hyperplane(&u, &cfg()).unwrap();
        assert!(k.normal().dist(h.normal()) <= 1e-12);
        let grid = h.grid(32);
        for omega in grid.points() {
            assert!((v.value(omega) - u.value(omega)).abs() <= 1e-12);
        }
    }

    #[test]
    fn rejects_inadmissible_inputs() {
        let h = OrientedHyperplane::coordinate(2);
        let k = tilted_plane(0.2); // beyond eps0
        let u = AngularField::constant(h.clone(), 0.0);
        assert!(reparametrize_angular(&k, &u, &cfg()).is_err());
        let big = AngularField::constant(h.clone(), 0.4); // beyond sigma0
        assert!(reparametrize_angular(&h, &big, &cfg()).is_err());
    }
}
