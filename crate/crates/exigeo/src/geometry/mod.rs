//! Spherical-graph calculus over equatorial spheres: projections, angular
//! flatness, graph maps, reparametrization between tilted hyperplanes,
//! Jacobi-field projections, and spherical/cylindrical conversions.

mod field;
mod graphs;
mod ops;
mod reparam;

pub use field::{AngularField, FieldNorms, SphericalGraphField};
pub use graphs::{graph_over_graph, spherical_to_cylindrical, CylindricalGraph, NormalGraph};
pub use ops::{annulus_area, cone_annulus_area, jacobi_projection, JacobiProjection};
pub use reparam::{recenter_hyperplane, reparametrize, reparametrize_angular};

use crate::error::{ExigeoError, Result};
use crate::linalg::{unit_ball_volume, VecN};
use crate::quad::gauss_legendre_on;

/// Tunable thresholds and resolutions for the spherical-graph operations.
/// The admissibility constants of the reparametrization lemmas are not
/// constructive, so they are configuration with conservative defaults.
#[derive(Clone, Debug)]
pub struct GeometryConfig {
    /// Largest admissible hyperplane tilt `|nu_H - nu_K|`.
    pub eps0: f64,
    /// Largest admissible C1 field norm.
    pub sigma0: f64,
    /// Angular quadrature nodes per angular dimension.
    pub angular_nodes: usize,
    /// Radial quadrature nodes for annular integrals.
    pub radial_nodes: usize,
    /// Geodesic step for tangential finite differences.
    pub fd_step: f64,
    /// Target size for Jacobi coefficients after recentering.
    pub recenter_tol: f64,
    /// Newton budget for recentering.
    pub recenter_max_iter: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            eps0: 0.05,
            sigma0: 0.05,
            angular_nodes: 128,
            radial_nodes: 65,
            fd_step: 1e-5,
            recenter_tol: 1e-10,
            recenter_max_iter: 50,
        }
    }
}

/// A hyperplane through the origin with a chosen unit normal. `n` is the
/// dimension of the surfaces the plane hosts; the ambient space is `R^{n+1}`.
#[derive(Clone, Debug)]
pub struct OrientedHyperplane {
    normal: VecN,
}

impl OrientedHyperplane {
    /// Build from a unit normal; rejects normals off the unit sphere by more
    /// than 1e-14.
    pub fn new(normal: VecN) -> Result<Self> {
        if (normal.norm() - 1.0).abs() > 1e-14 {
            return Err(ExigeoError::validation("hyperplane normal must be unit"));
        }
        Ok(OrientedHyperplane { normal })
    }

    /// Build from any nonzero direction by normalizing it.
    pub fn from_direction(dir: VecN) -> Result<Self> {
        Ok(OrientedHyperplane { normal: dir.normalized()? })
    }

    /// Coordinate hyperplane `{x_{n+1} = 0}` in `R^{n+1}`.
    pub fn coordinate(n: usize) -> Self {
        OrientedHyperplane { normal: VecN::basis(n + 1, n) }
    }

    pub fn normal(&self) -> &VecN {
        &self.normal
    }

    /// Surface dimension `n`; ambient dimension is `n + 1`.
    pub fn n(&self) -> usize {
        self.normal.dim() - 1
    }

    pub fn ambient_dim(&self) -> usize {
        self.normal.dim()
    }

    /// Orthogonal split `x = p + q nu` with `p` in the plane.
    pub fn project(&self, x: &VecN) -> (VecN, f64) {
        let q = x.dot(&self.normal);
        (x.axpy(-q, &self.normal), q)
    }

    /// Angle between the ray through `y` and the plane, in `[0, pi/2]`.
    /// By convention the value is `pi/2` when the tangential part vanishes.
    pub fn angular_flatness(&self, y: &VecN) -> Result<f64> {
        if y.norm() == 0.0 {
            return Err(ExigeoError::validation("angular flatness of the origin is undefined"));
        }
        let (p, q) = self.project(y);
        Ok(q.abs().atan2(p.norm()))
    }

    /// Deterministic orthonormal tangent basis: Gram-Schmidt over the
    /// standard basis, skipping the axis most parallel to the normal.
    pub fn tangent_basis(&self) -> Vec<VecN> {
        let d = self.ambient_dim();
        let mut skip = 0;
        let mut best = 0.0;
        for i in 0..d {
            if self.normal.get(i).abs() > best {
                best = self.normal.get(i).abs();
                skip = i;
            }
        }
        let mut basis: Vec<VecN> = Vec::with_capacity(d - 1);
        for i in 0..d {
            if i == skip {
                continue;
            }
            let mut v = VecN::basis(d, i);
            v = v.axpy(-v.dot(&self.normal), &self.normal);
            for b in &basis {
                v = v.axpy(-v.dot(b), b);
            }
            if let Ok(unit) = v.normalized() {
                basis.push(unit);
            }
        }
        debug_assert_eq!(basis.len(), d - 1);
        basis
    }

    /// Point on the spherical graph: `r (omega + u nu) / sqrt(1 + u^2)`.
    /// `omega` must lie on the equatorial sphere.
    pub fn spherical_graph_point(&self, omega: &VecN, u: f64, r: f64) -> Result<VecN> {
        if (omega.norm() - 1.0).abs() > 1e-10 || omega.dot(&self.normal).abs() > 1e-10 {
            return Err(ExigeoError::validation("omega must lie on the equatorial sphere"));
        }
        if r <= 0.0 {
            return Err(ExigeoError::validation("radius must be positive"));
        }
        let denom = (1.0 + u * u).sqrt();
        Ok(omega.axpy(u, &self.normal).scale(r / denom))
    }

    /// Measure of the equatorial sphere, `n omega_n`.
    pub fn equator_measure(&self) -> f64 {
        let n = self.n();
        n as f64 * unit_ball_volume(n)
    }

    /// Normalization constant of the Jacobi fields,
    /// `c_0(n) = (n / H^{n-1}(Sigma_H))^{1/2} = omega_n^{-1/2}`.
    pub fn jacobi_constant(&self) -> f64 {
        (self.n() as f64 / self.equator_measure()).sqrt()
    }

    /// Quadrature grid on the equatorial sphere.
    pub fn grid(&self, nodes_per_dim: usize) -> AngularGrid {
        AngularGrid::new(self, nodes_per_dim)
    }
}

/// Rotate `v` by the rotation of `R^{d}` that maps unit vector `a` to unit
/// vector `b` in their common plane (identity on the orthogonal complement).
pub fn rotate_between(a: &VecN, b: &VecN, v: &VecN) -> VecN {
    let c = a.dot(b);
    if c <= -1.0 + 1e-12 {
        // antipodal normals never occur within the admissible tilts
        return v.scale(-1.0);
    }
    let ab = a.add(b);
    v.axpy(-ab.dot(v) / (1.0 + c), &ab).axpy(2.0 * a.dot(v), b)
}

/// Tensor Gauss-Legendre quadrature nodes on an equatorial sphere
/// `Sigma_H = H cap S^n`. For `n = 1` the equator is two points with
/// counting measure.
#[derive(Clone, Debug)]
pub struct AngularGrid {
    points: Vec<VecN>,
    weights: Vec<f64>,
}

impl AngularGrid {
    pub fn new(plane: &OrientedHyperplane, nodes_per_dim: usize) -> Self {
        let tb = plane.tangent_basis();
        match plane.n() {
            1 => {
                let t = &tb[0];
                AngularGrid {
                    points: vec![*t, t.scale(-1.0)],
                    weights: vec![1.0, 1.0],
                }
            }
            2 => {
                let (theta, w) = gauss_legendre_on(nodes_per_dim, 0.0, 2.0 * std::f64::consts::PI);
                let mut points = Vec::with_capacity(nodes_per_dim);
                for &t in &theta {
                    points.push(tb[0].scale(t.cos()).axpy(t.sin(), &tb[1]));
                }
                AngularGrid { points, weights: w }
            }
            3 => {
                let (theta, wt) = gauss_legendre_on(nodes_per_dim, 0.0, 2.0 * std::f64::consts::PI);
                let (phi, wp) = gauss_legendre_on(nodes_per_dim, 0.0, std::f64::consts::PI);
                let mut points = Vec::with_capacity(nodes_per_dim * nodes_per_dim);
                let mut weights = Vec::with_capacity(nodes_per_dim * nodes_per_dim);
                for (ip, &p) in phi.iter().enumerate() {
                    for (it, &t) in theta.iter().enumerate() {
                        let omega = tb[0]
                            .scale(t.cos() * p.sin())
                            .axpy(t.sin() * p.sin(), &tb[1])
                            .axpy(p.cos(), &tb[2]);
                        points.push(omega);
                        weights.push(wt[it] * wp[ip] * p.sin());
                    }
                }
                AngularGrid { points, weights }
            }
            n => panic!("angular grids are implemented for n <= 3, got n = {n}"),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[VecN] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Integrate a function over the equatorial sphere.
    pub fn integrate<F: Fn(&VecN) -> f64>(&self, f: F) -> f64 {
        self.points.iter().zip(&self.weights).map(|(p, &w)| w * f(p)).sum()
    }
}

/// Orthonormal basis of the tangent space of the equatorial sphere at
/// `omega` (the directions in `H` orthogonal to `omega`).
pub fn equator_tangent_frame(plane: &OrientedHyperplane, omega: &VecN) -> Vec<VecN> {
    let mut frame = Vec::with_capacity(plane.n().saturating_sub(1));
    for b in plane.tangent_basis() {
        let mut v = b.axpy(-b.dot(omega), omega);
        for f in &frame {
            v = v.axpy(-v.dot(f), f);
        }
        if let Ok(unit) = v.normalized() {
            if unit.norm() > 0.5 {
                frame.push(unit);
            }
        }
        if frame.len() == plane.n() - 1 {
            break;
        }
    }
    frame
}
