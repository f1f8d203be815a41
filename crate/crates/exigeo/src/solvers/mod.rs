//! Desk-scale exterior isoperimetric solvers and the energy-expansion study
//! reproducing the large-volume limit `psi_W(v) - P(B^(v)) -> -R(W)`.

mod axisym;
mod competitor;
mod polygon;

pub use axisym::{solve_axisym, CmcProfile};
pub use competitor::{build_competitor, competitor_gap_limit, CompetitorEnergy};
pub use polygon::{segment_arc_family, solve_polygon, PolygonParams, PolylineRegion};

use crate::error::{ExigeoError, Result};
use crate::linalg::{least_squares, unit_ball_volume};
use crate::par::par_map;
use crate::residue::{maximize_residue, Obstacle, ObstacleShape};

/// Perimeter of the ball of volume `v` in `R^{n+1}`:
/// `(n+1) omega_{n+1}^{1/(n+1)} v^{n/(n+1)}`.
pub fn ball_perimeter(n: usize, v: f64) -> f64 {
    let m = n + 1;
    (m as f64) * unit_ball_volume(m).powf(1.0 / m as f64) * v.powf(n as f64 / m as f64)
}

/// Half-space benchmark `psi_J(v) = P(B^(v)) / 2^{1/(n+1)}`: the exterior
/// isoperimetric profile of a half-space, a lower bound for convex
/// obstacles.
pub fn half_space_energy(n: usize, v: f64) -> f64 {
    ball_perimeter(n, v) / 2f64.powf(1.0 / (n as f64 + 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    /// planar polyline descent (n = 1)
    Polygon,
    /// axisymmetric CMC shooting (n = 2, ball obstacles)
    Axisym,
}

/// One row of the energy-expansion study.
#[derive(Clone, Copy, Debug)]
pub struct StudyRow {
    pub volume: f64,
    pub energy: f64,
    pub ball_perimeter: f64,
    pub gap: f64,
}

/// The energy-expansion study: per-volume solves, the extrapolated intercept
/// of `gap(v) = -R_est + c1 v^{-1/(n+1)}`, and the reference residue.
#[derive(Clone, Debug)]
pub struct ExpansionStudy {
    pub rows: Vec<StudyRow>,
    /// extrapolated limit of the gap (the estimate of `-R(W)`)
    pub intercept: f64,
    pub rate_coefficient: f64,
    pub fit_residual: f64,
    /// `-R(W)` from the residue module, for comparison
    pub target: f64,
}

/// Run the chosen solver across a volume grid and extrapolate the gap.
pub fn expansion_study(
    obstacle: &Obstacle,
    volumes: &[f64],
    solver: SolverKind,
) -> Result<ExpansionStudy> {
    if volumes.len() < 3 {
        return Err(ExigeoError::validation("need at least 3 volumes"));
    }
    let lo = volumes.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = volumes.iter().cloned().fold(0.0f64, f64::max);
    if hi / lo < 10.0 {
        return Err(ExigeoError::validation("volume grid should span at least a decade"));
    }
    let n = match solver {
        SolverKind::Polygon => 1usize,
        SolverKind::Axisym => 2usize,
    };
    let rows: Vec<Result<StudyRow>> = par_map(volumes, |&v| {
        let energy = match solver {
            SolverKind::Polygon => {
                solve_polygon(obstacle, v, &PolygonParams::default()).map(|s| s.energy)?
            }
            SolverKind::Axisym => {
                let r = match obstacle.shape() {
                    ObstacleShape::Empty => 0.0,
                    ObstacleShape::Ball { center, radius } => {
                        if center.norm() > 1e-12 {
                            return Err(ExigeoError::validation(
                                "axisymmetric solver needs the ball at the origin",
                            ));
                        }
                        *radius
                    }
                    _ => {
                        return Err(ExigeoError::validation(
                            "axisymmetric solver supports ball obstacles",
                        ))
                    }
                };
                solve_axisym(r, v).map(|s| s.energy)?
            }
        };
        let pb = ball_perimeter(n, v);
        Ok(StudyRow { volume: v, energy, ball_perimeter: pb, gap: energy - pb })
    });
    let rows: Vec<StudyRow> = rows.into_iter().collect::<Result<_>>()?;
    // least squares gap = intercept + c1 v^{-1/(n+1)}
    let design: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| vec![1.0, r.volume.powf(-1.0 / (n as f64 + 1.0))])
        .collect();
    let gaps: Vec<f64> = rows.iter().map(|r| r.gap).collect();
    let (coef, fit_residual) = least_squares(&design, &gaps)?;
    let target = -maximize_residue(obstacle)?.lower;
    Ok(ExpansionStudy {
        rows,
        intercept: coef[0],
        rate_coefficient: coef[1],
        fit_residual,
        target,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn ball_perimeter_values() {
        // unit ball in R^3: v = 4 pi / 3, P = 4 pi
        assert!((ball_perimeter(2, 4.0 * PI / 3.0) - 4.0 * PI).abs() < 1e-12);
        // unit disk in R^2: v = pi, P = 2 pi
        assert!((ball_perimeter(1, PI) - 2.0 * PI).abs() < 1e-12);
        // half-space value psi_J at n = 2, v = 4 pi/3: 4 pi / 2^{1/3}
        let psi_j = half_space_energy(2, 4.0 * PI / 3.0);
        assert!((psi_j - 4.0 * PI / 2f64.powf(1.0 / 3.0)).abs() < 1e-12);
        assert!((psi_j - 9.973934966328009).abs() < 1e-10);
    }

    #[test]
    fn empty_obstacle_study_intercept_near_zero() {
        let w = Obstacle::empty(1);
        let vols = [10.0, 31.6, 100.0, 316.0];
        let study = expansion_study(&w, &vols, SolverKind::Polygon).unwrap();
        assert!(study.intercept.abs() <= 0.05, "intercept {}", study.intercept);
        assert!(study.target.abs() < 1e-12);
    }
}
