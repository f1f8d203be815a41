//! Scalar fields on equatorial spheres and on annular products
//! `Sigma_H x (r1, r2)`, stored as evaluators so that reparametrizations
//! compose without interpolation loss.

use std::sync::Arc;

use super::{equator_tangent_frame, AngularGrid, GeometryConfig, OrientedHyperplane};
use crate::error::{ExigeoError, Result};
use crate::linalg::VecN;

type AngularEval = Arc<dyn Fn(&VecN) -> f64 + Send + Sync>;
type GraphEval = Arc<dyn Fn(&VecN, f64) -> f64 + Send + Sync>;

/// Sampled sup norms of a field.
#[derive(Clone, Copy, Debug, Default)]
pub struct FieldNorms {
    /// `sup |u|`
    pub c0: f64,
    /// `sup (|u| + |grad u|)`
    pub c1: f64,
    /// `sup |r d_r u|`; zero for purely angular fields
    pub radial: f64,
}

impl FieldNorms {
    /// Membership test for the admissibility class `X_sigma`.
    pub fn within(&self, sigma: f64) -> bool {
        self.c1 < sigma && self.radial <= sigma
    }
}

/// A scalar field on the equatorial sphere of `plane`.
#[derive(Clone)]
pub struct AngularField {
    plane: OrientedHyperplane,
    eval: AngularEval,
}

impl AngularField {
    pub fn new<F>(plane: OrientedHyperplane, f: F) -> Self
    where
        F: Fn(&VecN) -> f64 + Send + Sync + 'static,
    {
        AngularField { plane, eval: Arc::new(f) }
    }

    pub fn constant(plane: OrientedHyperplane, c: f64) -> Self {
        Self::new(plane, move |_| c)
    }

    pub fn plane(&self) -> &OrientedHyperplane {
        &self.plane
    }

    pub fn value(&self, omega: &VecN) -> f64 {
        (self.eval)(omega)
    }

    pub fn evaluator(&self) -> AngularEval {
        Arc::clone(&self.eval)
    }

    /// Tangential gradient by geodesic central differences along an
    /// orthonormal frame of the equator at `omega`.
    pub fn gradient_norm(&self, omega: &VecN, h: f64) -> f64 {
        let frame = equator_tangent_frame(&self.plane, omega);
        let mut sq = 0.0;
        for t in frame {
            let plus = omega.scale(h.cos()).axpy(h.sin(), &t);
            let minus = omega.scale(h.cos()).axpy(-h.sin(), &t);
            let d = ((self.eval)(&plus) - (self.eval)(&minus)) / (2.0 * h);
            sq += d * d;
        }
        sq.sqrt()
    }

    pub fn integrate(&self, grid: &AngularGrid) -> f64 {
        grid.integrate(|omega| (self.eval)(omega))
    }

    pub fn l2_squared(&self, grid: &AngularGrid) -> f64 {
        grid.integrate(|omega| {
            let v = (self.eval)(omega);
            v * v
        })
    }

    pub fn norms(&self, grid: &AngularGrid, cfg: &GeometryConfig) -> FieldNorms {
        let mut c0 = 0.0f64;
        let mut c1 = 0.0f64;
        for omega in grid.points() {
            let v = (self.eval)(omega).abs();
            let g = if self.plane.n() >= 2 { self.gradient_norm(omega, cfg.fd_step) } else { 0.0 };
            c0 = c0.max(v);
            c1 = c1.max(v + g);
        }
        FieldNorms { c0, c1, radial: 0.0 }
    }
}

/// A scalar field `u(omega, r)` on `Sigma_H x (r1, r2)` describing the
/// spherical graph `Sigma_H(u, r1, r2)`.
#[derive(Clone)]
pub struct SphericalGraphField {
    plane: OrientedHyperplane,
    r1: f64,
    r2: f64,
    eval: GraphEval,
}

impl SphericalGraphField {
    pub fn new<F>(plane: OrientedHyperplane, r1: f64, r2: f64, f: F) -> Result<Self>
    where
        F: Fn(&VecN, f64) -> f64 + Send + Sync + 'static,
    {
        if !(0.0 < r1 && r1 < r2) {
            return Err(ExigeoError::validation("need 0 < r1 < r2"));
        }
        Ok(SphericalGraphField { plane, r1, r2, eval: Arc::new(f) })
    }

    pub fn constant(plane: OrientedHyperplane, r1: f64, r2: f64, c: f64) -> Result<Self> {
        Self::new(plane, r1, r2, move |_, _| c)
    }

    /// Promote an angular field to a radius-independent graph field.
    pub fn from_angular(field: &AngularField, r1: f64, r2: f64) -> Result<Self> {
        let eval = field.evaluator();
        Self::new(field.plane().clone(), r1, r2, move |omega, _| eval(omega))
    }

    pub fn plane(&self) -> &OrientedHyperplane {
        &self.plane
    }

    pub fn radial_interval(&self) -> (f64, f64) {
        (self.r1, self.r2)
    }

    pub fn value(&self, omega: &VecN, r: f64) -> f64 {
        (self.eval)(omega, r)
    }

    pub fn evaluator(&self) -> GraphEval {
        Arc::clone(&self.eval)
    }

    /// The slice `u_r` as an angular field.
    pub fn slice(&self, r: f64) -> AngularField {
        let eval = Arc::clone(&self.eval);
        AngularField::new(self.plane.clone(), move |omega| eval(omega, r))
    }

    /// Restrict to a sub-interval of radii.
    pub fn restricted(&self, r1: f64, r2: f64) -> Result<Self> {
        let eval = Arc::clone(&self.eval);
        Self::new(self.plane.clone(), r1, r2, move |omega, r| eval(omega, r))
    }

    /// Ambient point of the graph over `(omega, r)`.
    pub fn point(&self, omega: &VecN, r: f64) -> VecN {
        let u = (self.eval)(omega, r);
        let denom = (1.0 + u * u).sqrt();
        omega.axpy(u, self.plane.normal()).scale(r / denom)
    }

    pub fn radial_derivative(&self, omega: &VecN, r: f64, h_rel: f64) -> f64 {
        let h = h_rel * r;
        ((self.eval)(omega, r + h) - (self.eval)(omega, r - h)) / (2.0 * h)
    }

    pub fn gradient_norm(&self, omega: &VecN, r: f64, h: f64) -> f64 {
        let frame = equator_tangent_frame(&self.plane, omega);
        let mut sq = 0.0;
        for t in frame {
            let plus = omega.scale(h.cos()).axpy(h.sin(), &t);
            let minus = omega.scale(h.cos()).axpy(-h.sin(), &t);
            let d = ((self.eval)(&plus, r) - (self.eval)(&minus, r)) / (2.0 * h);
            sq += d * d;
        }
        sq.sqrt()
    }

    /// Sampled sup norms over a product grid; decides membership in
    /// `X_sigma(Sigma_H, r1, r2)`.
    pub fn norms(&self, cfg: &GeometryConfig) -> FieldNorms {
        let grid = self.plane.grid(cfg.angular_nodes.min(64));
        let radial = cfg.radial_nodes.min(33);
        let mut out = FieldNorms::default();
        for k in 0..radial {
            // keep FD stencils inside the interval
            let t = (k as f64 + 0.5) / radial as f64;
            let r = self.r1 + (self.r2 - self.r1) * t;
            for omega in grid.points() {
                let v = (self.eval)(omega, r).abs();
                let g = if self.plane.n() >= 2 { self.gradient_norm(omega, r, cfg.fd_step) } else { 0.0 };
                let dr = (r * self.radial_derivative(omega, r, 1e-5)).abs();
                out.c0 = out.c0.max(v);
                out.c1 = out.c1.max(v + g);
                out.radial = out.radial.max(dr);
            }
        }
        out
    }
}
