//! Jacobi-field projections and the annular area expansion.

use super::{AngularField, GeometryConfig, OrientedHyperplane, SphericalGraphField};
use crate::error::Result;

use crate::quad::gauss_legendre_on;

/// Projection of an angular field onto the span of the Jacobi fields
/// `phi_H^i(omega) = c_0(n) (omega . tau_H^i)` of the equatorial sphere.
#[derive(Clone, Debug)]
pub struct JacobiProjection {
    plane: OrientedHyperplane,
    /// One coefficient per tangent basis direction.
    pub coefficients: Vec<f64>,
}

impl JacobiProjection {
    pub fn coefficient_norm(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// The projected part `E0[u] = sum_i gamma_i phi_H^i` as a field.
    pub fn projected_field(&self) -> AngularField {
        let c0 = self.plane.jacobi_constant();
        let basis = self.plane.tangent_basis();
        let coeff = self.coefficients.clone();
        AngularField::new(self.plane.clone(), move |omega| {
            coeff
                .iter()
                .zip(&basis)
                .map(|(&g, tau)| g * c0 * omega.dot(tau))
                .sum()
        })
    }

    /// The complement `u - E0[u]`.
    pub fn complement(&self, u: &AngularField) -> AngularField {
        let proj = self.projected_field();
        let ue = u.evaluator();
        let pe = proj.evaluator();
        AngularField::new(self.plane.clone(), move |omega| ue(omega) - pe(omega))
    }
}

/// Coefficients `gamma_i = int_{Sigma_H} u phi_H^i` of the Jacobi projection.
pub fn jacobi_projection(u: &AngularField, cfg: &GeometryConfig) -> JacobiProjection {
    let plane = u.plane().clone();
    let grid = plane.grid(cfg.angular_nodes);
    let c0 = plane.jacobi_constant();
    let coefficients = plane
        .tangent_basis()
        .iter()
        .map(|tau| grid.integrate(|omega| u.value(omega) * c0 * omega.dot(tau)))
        .collect();
    JacobiProjection { plane, coefficients }
}

/// Area of the annular spherical graph `Sigma_H(u, r1, r2)` by product
/// quadrature with the exact area element, together with the quadratic form
/// of the second-variation expansion,
/// `1/2 int r^{n-1} (|grad u|^2 + (r d_r u)^2 - (n-1) u^2)`.
pub fn annulus_area(g: &SphericalGraphField, cfg: &GeometryConfig) -> Result<(f64, f64)> {
    let plane = g.plane().clone();
    let n = plane.n();
    let (r1, r2) = g.radial_interval();
    let grid = plane.grid(cfg.angular_nodes);
    let (rs, rw) = gauss_legendre_on(cfg.radial_nodes, r1, r2);
    let mut area = 0.0;
    let mut quad = 0.0;
    for (&r, &wr) in rs.iter().zip(&rw) {
        let rpow = r.powi(n as i32 - 1);
        for (omega, &wa) in grid.points().iter().zip(grid.weights()) {
            let u = g.value(omega, r);
            let gradn = if n >= 2 { g.gradient_norm(omega, r, cfg.fd_step) } else { 0.0 };
            let du = r * g.radial_derivative(omega, r, 1e-5);
            let s2 = 1.0 / (1.0 + u * u);
            let q2 = s2 * s2 * gradn * gradn;
            let p2 = s2 * s2 * du * du;
            // |det| of the graph metric factors as r^{2(n-1)} s^{2(n-2)} (s^2 + |q|^2 + p^2 s^2)
            let element = s2.powf((n as f64 - 2.0) / 2.0) * (s2 + q2 + p2 * s2).sqrt();
            area += wr * wa * rpow * element;
            quad += 0.5 * wr * wa * rpow * (gradn * gradn + du * du - (n as f64 - 1.0) * u * u);
        }
    }
    Ok((area, quad))
}

/// Closed-form area of the cone annulus `Sigma_H(u = c, r1, r2)`:
/// `omega_n (r2^n - r1^n) (1 + c^2)^{-(n-1)/2}`.
pub fn cone_annulus_area(n: usize, c: f64, r1: f64, r2: f64) -> f64 {
    let omega_n = crate::linalg::unit_ball_volume(n);
    omega_n * (r2.powi(n as i32) - r1.powi(n as i32)) * (1.0 + c * c).powf(-((n as f64 - 1.0) / 2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::unit_ball_volume;

    fn cfg() -> GeometryConfig {
        GeometryConfig::default()
    }

    #[test]
    fn jacobi_of_basis_field_is_unit_coefficient() {
        let plane = OrientedHyperplane::coordinate(2);
        let tau = plane.tangent_basis()[0];
        let c0 = plane.jacobi_constant();
        let u = AngularField::new(plane.clone(), move |omega| c0 * omega.dot(&tau));
        let proj = jacobi_projection(&u, &cfg());
        assert!((proj.coefficients[0] - 1.0).abs() < 1e-12);
        assert!(proj.coefficients[1].abs() < 1e-12);
    }

    #[test]
    fn jacobi_of_constant_vanishes() {
        for n in [1usize, 2, 3] {
            let plane = OrientedHyperplane::coordinate(n);
            let u = AngularField::constant(plane, 0.7);
            let proj = jacobi_projection(&u, &cfg());
            assert!(proj.coefficient_norm() < 1e-12, "n={n}");
        }
    }

    #[test]
    fn jacobi_cubic_against_quadrature_oracle() {
        // u(omega) = (omega . tau1)^3 on n = 2; coefficient_1 must equal the
        // 1-D circle quadrature of c0(2) * cos^4.
        let plane = OrientedHyperplane::coordinate(2);
        let tau = plane.tangent_basis()[0];
        let u = AngularField::new(plane.clone(), move |omega| omega.dot(&tau).powi(3));
        let proj = jacobi_projection(&u, &cfg());
        // independent oracle: composite Simpson over the circle parameter
        let c0 = plane.jacobi_constant();
        let m = 4096;
        let mut oracle = 0.0;
        for k in 0..m {
            let t = 2.0 * std::f64::consts::PI * (k as f64 + 0.5) / m as f64;
            oracle += t.cos().powi(4);
        }
        oracle *= c0 * 2.0 * std::f64::consts::PI / m as f64;
        assert!((proj.coefficients[0] - oracle).abs() < 1e-10, "{} vs {oracle}", proj.coefficients[0]);
        // and the closed form (3/4) sqrt(pi)
        assert!((oracle - 0.75 * std::f64::consts::PI.sqrt()).abs() < 1e-10);
    }

    #[test]
    fn jacobi_is_idempotent() {
        let plane = OrientedHyperplane::coordinate(2);
        let u = AngularField::new(plane.clone(), |omega| {
            0.03 * omega.get(0) - 0.01 * omega.get(1) + 0.02 * omega.get(0) * omega.get(1)
        });
        let p1 = jacobi_projection(&u, &cfg());
        let p2 = jacobi_projection(&p1.projected_field(), &cfg());
        for (a, b) in p1.coefficients.iter().zip(&p2.coefficients) {
            assert!((a - b).abs() < 1e-10);
        }
        // complement has zero coefficients
        let comp = p1.complement(&u);
        let p3 = jacobi_projection(&comp, &cfg());
        assert!(p3.coefficient_norm() < 1e-10);
    }

    #[test]
    fn flat_annulus_area() {
        for n in [2usize, 3] {
            let plane = OrientedHyperplane::coordinate(n);
            let g = SphericalGraphField::constant(plane, 1.0, 2.0, 0.0).unwrap();
            let c = GeometryConfig { angular_nodes: if n == 3 { 48 } else { 128 }, ..cfg() };
            let (area, q) = annulus_area(&g, &c).unwrap();
            let expect = unit_ball_volume(n) * (2.0f64.powi(n as i32) - 1.0);
            assert!((area - expect).abs() < 1e-9 * expect, "n={n}: {area} vs {expect}");
            assert!(q.abs() < 1e-12);
        }
    }

    #[test]
    fn cone_annulus_area_matches_closed_form() {
        let plane = OrientedHyperplane::coordinate(2);
        let c = 0.2;
        let g = SphericalGraphField::constant(plane, 1.0, 3.0, c).unwrap();
        let (area, _) = annulus_area(&g, &cfg()).unwrap();
        let expect = cone_annulus_area(2, c, 1.0, 3.0);
        assert!((area - expect).abs() <= 1e-8 * expect, "{area} vs {expect}");
    }
}
