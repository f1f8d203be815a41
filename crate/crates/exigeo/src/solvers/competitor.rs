//! The glued competitor: a residue maximizer inside a finite cylinder joined
//! to a volume-`v` ball outside it, with the ball placed so its tangent
//! plane at the cylinder-axis crossing matches the best half-space
//! approximation of the maximizer.

use crate::error::{ExigeoError, Result};
use crate::linalg::unit_ball_volume;
use crate::residue::{ExteriorMinimalGraph, Obstacle};

/// Energy accounting of the competitor at cylinder radius `r` and ball
/// volume `v`.
#[derive(Clone, Copy, Debug)]
pub struct CompetitorEnergy {
    /// total relative perimeter of the glued set
    pub energy: f64,
    /// the lateral-boundary mismatch term
    pub gluing_error: f64,
    /// energy - P(B^(v)); the study's gap
    pub gap: f64,
}

/// Build the competitor for an axisymmetric maximizer graph and a compact
/// obstacle, at finite `v`. Fails when the ball cannot span the cylinder.
pub fn build_competitor(
    graph: &ExteriorMinimalGraph,
    obstacle: &Obstacle,
    r: f64,
    v: f64,
) -> Result<CompetitorEnergy> {
    let n = graph.n;
    if n != 2 {
        return Err(ExigeoError::validation("the competitor study is built for n = 2"));
    }
    let omega_n = unit_ball_volume(n);
    let cyl = obstacle.enclosing_cylinder_radius(&graph.axis);
    if r <= cyl {
        return Err(ExigeoError::validation("cylinder must contain the obstacle"));
    }
    // the graph's own height on the lateral cylinder and the best
    // half-space height there (b and c vanish for these axisymmetric
    // families at the fitted order; a is the asymptotic height)
    let f_r = graph.height(r);
    let a_height = graph.asymptotic_height();
    // ball of volume v tangent to the half-space boundary at the axis
    let ball_radius = (v / unit_ball_volume(n + 1)).powf(1.0 / (n as f64 + 1.0));
    if ball_radius <= r {
        return Err(ExigeoError::validation(
            "ball too small to span the cylinder: increase v",
        ));
    }
    // sagitta of the sphere over the lateral circle, in a cancellation-free
    // form: rho - sqrt(rho^2 - r^2) = r^2 / (rho + sqrt(rho^2 - r^2))
    let sagitta = r * r / (ball_radius + (ball_radius * ball_radius - r * r).sqrt());
    // slab tall enough for the obstacle, the graph variation, and the cap
    let (slab_lo, slab_hi) = obstacle.slab(&graph.axis);
    let alpha = slab_lo.min(f_r.min(a_height) - sagitta) - 1.0;
    let beta = slab_hi.max(f_r.max(a_height)) + 1.0;
    if a_height - sagitta <= alpha {
        return Err(ExigeoError::validation("ball cap escapes the gluing slab"));
    }
    let _ = beta;
    // P(F; C_r \ W): graph area minus nothing (attached graphs start on the
    // obstacle; the free plane deletes its section)
    let term_f = if graph.c == 0.0 && graph.rho_att == 0.0 {
        omega_n * r.powi(n as i32) - obstacle.plane_section_area(&graph.axis, graph.z_att)
    } else {
        graph.area_to(r)
    };
    // P(B; complement of the closed finite cylinder) - P(B^{(v)}) = -zone,
    // the spherical zone of the cap over the lateral disk
    let zone = 2.0 * std::f64::consts::PI * ball_radius * sagitta;
    // gluing error: the ball boundary inside the lateral wall sits at
    // height a - sagitta; the graph at f(r)
    let gluing_error =
        n as f64 * omega_n * r.powi(n as i32 - 1) * (f_r - (a_height - sagitta)).abs();
    let p_ball = crate::solvers::ball_perimeter(n, v);
    let energy = term_f + (p_ball - zone) + gluing_error;
    let gap = term_f - omega_n * r.powi(n as i32) + (omega_n * r.powi(n as i32) - zone)
        + gluing_error;
    Ok(CompetitorEnergy { energy, gluing_error, gap })
}

/// The `v -> infinity` limit of the competitor gap at fixed `r`:
/// `P(F; C_r \ W) - omega_n r^n` plus the limiting lateral mismatch
/// `n omega_n r^{n-1} |f(r) - a|` (the ball converges to the half-space).
pub fn competitor_gap_limit(
    graph: &ExteriorMinimalGraph,
    obstacle: &Obstacle,
    r: f64,
) -> Result<f64> {
    let n = graph.n;
    let omega_n = unit_ball_volume(n);
    let cyl = obstacle.enclosing_cylinder_radius(&graph.axis);
    if r <= cyl {
        return Err(ExigeoError::validation("cylinder must contain the obstacle"));
    }
    let term_f = if graph.c == 0.0 && graph.rho_att == 0.0 {
        omega_n * r.powi(n as i32) - obstacle.plane_section_area(&graph.axis, graph.z_att)
    } else {
        graph.area_to(r)
    };
    let mismatch = n as f64
        * omega_n
        * r.powi(n as i32 - 1)
        * (graph.height(r) - graph.asymptotic_height()).abs();
    Ok(term_f - omega_n * r.powi(n as i32) + mismatch)
}
