//! Isoperimetric residues: hyperplane sections and projections of compact
//! obstacles, residual perimeters of plane-like exterior minimal graphs,
//! residue maximization, and the asymptotic fit of maximizer profiles.

mod obstacle;

pub use obstacle::{Obstacle, ObstacleShape};

use crate::error::{ExigeoError, Result};
use crate::linalg::{least_squares, unit_ball_volume, VecN};
use crate::quad::{golden_section_min, integrate_sqrt_endpoints};

/// An axisymmetric plane-like competitor `(F, nu)`: either an exact plane at
/// a given height or a catenoid-type radial minimal graph attached
/// tangentially to a sphere of the obstacle. The first integral
/// `rho^{n-1} f' / sqrt(1 + f'^2) = c` holds exactly along the profile.
#[derive(Clone, Debug)]
pub struct ExteriorMinimalGraph {
    pub n: usize,
    pub axis: VecN,
    /// attachment radius; 0 for a free plane
    pub rho_att: f64,
    /// profile height at the attachment
    pub z_att: f64,
    /// first-integral constant (0 gives the plane)
    pub c: f64,
    /// +1 when the profile rises with rho, -1 when it falls
    pub sign: f64,
}

impl ExteriorMinimalGraph {
    pub fn plane(n: usize, axis: VecN, height: f64) -> Self {
        ExteriorMinimalGraph { n, axis, rho_att: 0.0, z_att: height, c: 0.0, sign: 1.0 }
    }

    /// Catenoid-type graph tangentially attached to a sphere of radius
    /// `ball_radius` centered on the axis at offset `ball_center`, at
    /// planar attachment radius `rho_att`. Tangency (Young's law against
    /// the sphere) fixes `c = rho_att^n / ball_radius`.
    pub fn attached(
        n: usize,
        axis: VecN,
        ball_center: f64,
        ball_radius: f64,
        rho_att: f64,
        upper_branch: bool,
    ) -> Result<Self> {
        if !(0.0 < rho_att && rho_att < ball_radius) {
            return Err(ExigeoError::validation("attachment radius must lie in (0, ball_radius)"));
        }
        if n < 3 {
            return Err(ExigeoError::validation(
                "catenoid-type competitors exist for n >= 3 (n = 2 tails are logarithmic)",
            ));
        }
        let c = rho_att.powi(n as i32) / ball_radius;
        let cap = (ball_radius * ball_radius - rho_att * rho_att).sqrt();
        let (z_att, sign) = if upper_branch {
            // attach on the lower hemisphere going up-and-out
            (ball_center - cap, 1.0)
        } else {
            (ball_center + cap, -1.0)
        };
        Ok(ExteriorMinimalGraph { n, axis, rho_att, z_att, c, sign })
    }

    /// `f'(rho)` from the first integral.
    pub fn slope(&self, rho: f64) -> f64 {
        if self.c == 0.0 {
            return 0.0;
        }
        let denom = rho.powi(2 * (self.n as i32 - 1)) - self.c * self.c;
        self.sign * self.c / denom.max(0.0).sqrt()
    }

    /// Profile height by quadrature of the first integral (the integrand has
    /// an inverse-square-root endpoint when the attachment is tangential).
    pub fn height(&self, rho: f64) -> f64 {
        if self.c == 0.0 {
            return self.z_att;
        }
        let c = self.c;
        let n = self.n as i32;
        let singular = (self.rho_att.powi(2 * (n - 1)) - c * c).abs() < 1e-12;
        self.z_att
            + self.sign
                * integrate_sqrt_endpoints(
                    |t: f64| c / (t.powi(2 * (n - 1)) - c * c).sqrt(),
                    self.rho_att,
                    rho,
                    singular,
                    false,
                    1e-12,
                )
    }

    /// Asymptotic profile height `a = lim f(rho)`; finite for n >= 3.
    pub fn asymptotic_height(&self) -> f64 {
        if self.c == 0.0 {
            return self.z_att;
        }
        // split at 4 rho_att, then integrate the tail in u = 1/rho
        let mid = 4.0 * self.rho_att.max(self.c.powf(1.0 / (2.0 * (self.n as f64 - 1.0))));
        let base = self.height(mid);
        let c = self.c;
        let n = self.n as i32;
        let tail = crate::quad::adaptive_simpson(
            |u: f64| {
                // rho = 1/u, drho = -du/u^2
                let rho = 1.0 / u;
                c / (rho.powi(2 * (n - 1)) - c * c).sqrt() / (u * u)
            },
            1e-12,
            1.0 / mid,
            1e-12,
        );
        base + self.sign * tail
    }

    /// Graph area over the planar annulus `(rho_att, R)`:
    /// `n omega_n int rho^{n-1} sqrt(1+f'^2) drho` with
    /// `sqrt(1+f'^2) = rho^{n-1}/sqrt(rho^{2(n-1)} - c^2)`.
    pub fn area_to(&self, big_r: f64) -> f64 {
        let n = self.n;
        let nom = n as f64 * unit_ball_volume(n);
        if self.c == 0.0 {
            return nom * (big_r.powi(n as i32) - self.rho_att.powi(n as i32)) / n as f64;
        }
        let c = self.c;
        let ni = n as i32;
        let singular = (self.rho_att.powi(2 * (ni - 1)) - c * c).abs() < 1e-12;
        integrate_sqrt_endpoints(
            |t: f64| nom * t.powi(2 * (ni - 1)) / (t.powi(2 * (ni - 1)) - c * c).sqrt(),
            self.rho_att,
            big_r,
            singular,
            false,
            1e-12,
        )
    }

    /// Largest drift of the first integral along the profile, recovered by
    /// finite differences of `height` (a consistency diagnostic).
    pub fn first_integral_drift(&self, radii: &[f64]) -> f64 {
        let mut worst = 0.0f64;
        for &rho in radii {
            let h = 1e-5 * rho;
            let fp = (self.height(rho + h) - self.height(rho - h)) / (2.0 * h);
            let drift =
                (rho.powi(self.n as i32 - 1) * fp / (1.0 + fp * fp).sqrt() - self.sign * self.c).abs();
            worst = worst.max(drift);
        }
        worst
    }
}

/// Values `omega_n R^n - P(F; C_R \ W)` on a radius list, plus the limit
/// estimated by two-point Richardson extrapolation in `R^{2-n}` (the tail
/// of the perimeter excess is `int rho^{n-1} |f'|^2/2 ~ R^{2-n}` for
/// n >= 3; plane competitors are exactly constant).
pub fn residual_perimeter(
    graph: &ExteriorMinimalGraph,
    obstacle: &Obstacle,
    radii: &[f64],
) -> Result<(Vec<f64>, f64)> {
    if radii.len() < 2 {
        return Err(ExigeoError::validation("need at least two radii"));
    }
    for w in radii.windows(2) {
        if w[1] <= w[0] {
            return Err(ExigeoError::validation("radii must be increasing"));
        }
    }
    let n = graph.n;
    let omega_n = unit_ball_volume(n);
    let min_r = obstacle.enclosing_cylinder_radius(&graph.axis);
    if radii[0] <= min_r {
        return Err(ExigeoError::validation(
            "radii must exceed the obstacle's enclosing cylinder",
        ));
    }
    // omega_n R^n - P = omega_n rho_att^n - n omega_n int rho^{n-1} (sqrt(1+f'^2) - 1),
    // with the integrand in the cancellation-free form
    // rho^{n-1} c^2 / (sqrt(D) (rho^{n-1} + sqrt(D))), D = rho^{2(n-1)} - c^2,
    // so the large-R values do not lose precision to the area scale.
    let deficit_to = |r: f64| -> f64 {
        if graph.c == 0.0 {
            return 0.0;
        }
        let c = graph.c;
        let ni = n as i32;
        let singular = (graph.rho_att.powi(2 * (ni - 1)) - c * c).abs() < 1e-12;
        integrate_sqrt_endpoints(
            |t: f64| {
                let d = t.powi(2 * (ni - 1)) - c * c;
                let sq = d.max(0.0).sqrt();
                t.powi(ni - 1) * c * c / (sq * (t.powi(ni - 1) + sq))
            },
            graph.rho_att,
            r,
            singular,
            false,
            1e-12,
        )
    };
    let values: Vec<f64> = radii
        .iter()
        .map(|&r| {
            let mut v = omega_n * graph.rho_att.powi(n as i32)
                - n as f64 * omega_n * deficit_to(r);
            if graph.c == 0.0 && graph.rho_att == 0.0 {
                // free plane: the obstacle section is not part of P(F; . \ W)
                v = obstacle.plane_section_area(&graph.axis, graph.z_att);
            }
            v
        })
        .collect();
    for w in values.windows(2) {
        if w[1] > w[0] + 1e-8 * (1.0 + w[0].abs()) {
            return Err(ExigeoError::numerical(
                "residual values increase: profile is not minimal or quadrature failed",
            ));
        }
    }
    let limit = if graph.c == 0.0 || n == 2 {
        *values.last().unwrap()
    } else {
        // v(R) = L - kappa R^{2-n}: eliminate kappa with the last two radii
        let (r1, r2) = (radii[radii.len() - 2], radii[radii.len() - 1]);
        let (v1, v2) = (values[values.len() - 2], values[values.len() - 1]);
        let p = 2.0 - n as f64;
        let (w1, w2) = (r1.powf(p), r2.powf(p));
        (v1 * w2 - v2 * w1) / (w2 - w1)
    };
    Ok((values, limit))
}

/// Outcome of residue maximization: a certified bracket, exact when the
/// ball equality conditions verify.
#[derive(Clone, Debug)]
pub struct ResidueResult {
    pub lower: f64,
    pub upper: f64,
    pub exact: bool,
    pub maximizer: MaximizerKind,
}

#[derive(Clone, Debug)]
pub enum MaximizerKind {
    /// plane through the stated height with the stated normal
    Plane { axis: VecN, height: f64 },
    /// two half-lines through the farthest points (n = 1)
    HalfLines { through: ([f64; 2], [f64; 2]) },
    /// attached catenoid-type profile
    Attached(ExteriorMinimalGraph),
    /// nothing to delete
    Trivial,
}

/// Maximize the residue over the parametric competitor family. Balls (and
/// connected n = 1 obstacles) hit the equality case of the ball bound and
/// return exact values; otherwise a bracket `[best found, P(W)]`.
pub fn maximize_residue(obstacle: &Obstacle) -> Result<ResidueResult> {
    let n = obstacle.n();
    let omega_n = unit_ball_volume(n);
    match obstacle.shape() {
        ObstacleShape::Empty => Ok(ResidueResult {
            lower: 0.0,
            upper: 0.0,
            exact: true,
            maximizer: MaximizerKind::Trivial,
        }),
        ObstacleShape::Ball { center, radius } => {
            // equality conditions of the ball characterization:
            // (1) W contains an (n-1)-sphere of diameter diam W: the equator
            //     of the ball itself; (2) the section plugs the deleted disk,
            //     leaving exactly two unbounded components.
            let axis = VecN::basis(n + 1, n);
            let equator_ok = {
                // sampled equator points of B_{d/2}(center) lie in W
                let frame = crate::geometry::OrientedHyperplane::new(axis)?.tangent_basis();
                let mut ok = true;
                for k in 0..64 {
                    let t = 2.0 * std::f64::consts::PI * k as f64 / 64.0;
                    let mut p = *center;
                    p = p.axpy(radius * t.cos(), &frame[0]);
                    if frame.len() > 1 {
                        p = p.axpy(radius * t.sin(), &frame[1]);
                    }
                    ok &= obstacle.distance(&p) <= 1e-12;
                }
                ok
            };
            let plugs = obstacle.plane_section_area(&axis, center.get(n))
                >= omega_n * radius.powi(n as i32) * (1.0 - 1e-12);
            if equator_ok && plugs {
                Ok(ResidueResult {
                    lower: omega_n * radius.powi(n as i32),
                    upper: omega_n * radius.powi(n as i32),
                    exact: true,
                    maximizer: MaximizerKind::Plane { axis, height: center.get(n) },
                })
            } else {
                Err(ExigeoError::numerical("ball equality conditions failed to verify"))
            }
        }
        ObstacleShape::Segment { a, b } => Ok(ResidueResult {
            lower: obstacle.diameter(),
            upper: obstacle.diameter(),
            exact: true,
            maximizer: MaximizerKind::HalfLines { through: (*a, *b) },
        }),
        ObstacleShape::Polygon { vertices } => {
            // connected compact W in the plane: R(W) = diam W, realized by
            // the line through a farthest vertex pair
            let mut best = (0.0, ([0.0; 2], [0.0; 2]));
            for (i, p) in vertices.iter().enumerate() {
                for q in vertices.iter().skip(i + 1) {
                    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                    if d > best.0 {
                        best = (d, (*p, *q));
                    }
                }
            }
            Ok(ResidueResult {
                lower: best.0,
                upper: best.0,
                exact: true,
                maximizer: MaximizerKind::HalfLines { through: best.1 },
            })
        }
        ObstacleShape::AxisUnion { axis, balls } => {
            // plane family: best hyperplane section
            let mut lower = obstacle.section_sup()?;
            let mut maximizer = MaximizerKind::Plane { axis: *axis, height: f64::NAN };
            // catenoid-corrected family for n >= 3, attached to each ball
            if n >= 3 {
                for &(center, radius) in balls {
                    for upper_branch in [true, false] {
                        let value = |rho_att: f64| -> f64 {
                            match attached_residue(obstacle, n, axis, center, radius, rho_att, upper_branch) {
                                Ok(v) => -v,
                                Err(_) => f64::INFINITY,
                            }
                        };
                        if let Ok((best_rho, neg)) =
                            golden_section_min(value, 1e-3 * radius, radius * (1.0 - 1e-6), 1e-10)
                        {
                            if -neg > lower {
                                lower = -neg;
                                maximizer = MaximizerKind::Attached(ExteriorMinimalGraph::attached(
                                    n,
                                    *axis,
                                    center,
                                    radius,
                                    best_rho,
                                    upper_branch,
                                )?);
                            }
                        }
                    }
                }
            }
            let upper = obstacle.projection_sup()?;
            Ok(ResidueResult { lower, upper: upper.max(lower), exact: false, maximizer })
        }
    }
}

/// Residue of an attached catenoid-type competitor, or an error when the
/// profile collides with the rest of the obstacle.
fn attached_residue(
    obstacle: &Obstacle,
    n: usize,
    axis: &VecN,
    center: f64,
    radius: f64,
    rho_att: f64,
    upper_branch: bool,
) -> Result<f64> {
    let g = ExteriorMinimalGraph::attached(n, *axis, center, radius, rho_att, upper_branch)?;
    // slab confinement: total height variation must stay within the slab of W
    let (slab_lo, slab_hi) = obstacle.slab(axis);
    let a = g.asymptotic_height();
    if !(slab_lo - 1e-9 <= a && a <= slab_hi + 1e-9) {
        return Err(ExigeoError::numerical("profile escapes the obstacle slab"));
    }
    // clearance against the other balls
    let cyl = obstacle.enclosing_cylinder_radius(axis);
    for k in 0..64 {
        let rho = rho_att + (cyl * 1.5 - rho_att) * (k as f64 + 0.5) / 64.0;
        let z = g.height(rho);
        let mut p = axis.scale(z);
        let frame = crate::geometry::OrientedHyperplane::new(*axis)?.tangent_basis();
        p = p.axpy(rho, &frame[0]);
        if obstacle.distance(&p) < -1e-9 {
            return Err(ExigeoError::numerical("profile enters the obstacle"));
        }
    }
    let radii = [cyl * 8.0, cyl * 16.0, cyl * 32.0, cyl * 64.0];
    let (_, limit) = residual_perimeter(&g, obstacle, &radii)?;
    Ok(limit)
}

/// Least-squares fit of graph samples against the asymptotic model
/// `f(x) = a + b |x|^{2-n} + (c . x) |x|^{-n}` (the `b` term is dropped for
/// n = 2, where slab confinement kills the logarithm). Points are given in
/// `nu^perp` coordinates. Returns `(a, b, c, max |residual| * |x|^n)`.
pub fn asymptotic_fit(
    points: &[(Vec<f64>, f64)],
    n: usize,
) -> Result<(f64, f64, Vec<f64>, f64)> {
    if n < 2 {
        return Err(ExigeoError::validation("asymptotic fit needs n >= 2"));
    }
    if points.len() < n + 3 {
        return Err(ExigeoError::validation("too few samples"));
    }
    let radii: Vec<f64> = points
        .iter()
        .map(|(x, _)| x.iter().map(|t| t * t).sum::<f64>().sqrt())
        .collect();
    let (rmin, rmax) = radii
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &r| (lo.min(r), hi.max(r)));
    if rmax / rmin < 4.0 {
        return Err(ExigeoError::validation("radial span too small for a stable fit"));
    }
    let with_b = n >= 3;
    let rows_full: Vec<Vec<f64>> = points
        .iter()
        .zip(&radii)
        .map(|((x, _), &r)| {
            let mut row = vec![1.0];
            if with_b {
                row.push(r.powf(2.0 - n as f64));
            }
            for xi in x {
                row.push(xi * r.powf(-(n as f64)));
            }
            row
        })
        .collect();
    // columns with no sample variation (e.g. all points coplanar) are pinned
    // to zero rather than making the normal equations singular
    let ncols = rows_full[0].len();
    let mut keep = vec![true; ncols];
    for j in 1..ncols {
        let mx = rows_full.iter().map(|r| r[j].abs()).fold(0.0f64, f64::max);
        if mx < 1e-13 {
            keep[j] = false;
        }
    }
    let rows: Vec<Vec<f64>> = rows_full
        .iter()
        .map(|r| r.iter().zip(&keep).filter(|(_, &k)| k).map(|(v, _)| *v).collect())
        .collect();
    let y: Vec<f64> = points.iter().map(|(_, v)| *v).collect();
    let (coef_kept, _) = least_squares(&rows, &y)?;
    let mut coef = vec![0.0; ncols];
    let mut it = coef_kept.into_iter();
    for (c, &k) in coef.iter_mut().zip(&keep) {
        if k {
            *c = it.next().unwrap();
        }
    }
    let a = coef[0];
    let b = if with_b { coef[1] } else { 0.0 };
    let c: Vec<f64> = coef[if with_b { 2 } else { 1 }..].to_vec();
    let mut worst = 0.0f64;
    for (((x, v), row), &r) in points.iter().zip(&rows_full).zip(&radii) {
        let _ = x;
        let pred: f64 = row.iter().zip(&coef).map(|(a, b)| a * b).sum();
        worst = worst.max((pred - v).abs() * r.powf(n as f64));
    }
    Ok((a, b, c, worst))
}
