//! The unduloid half-period family: surfaces of revolution with constant
//! mean curvature `n`, waist radius `eps`, and outer radius `R_eps`, given by
//! the radial graph
//! `f_eps(r) = int_eps^r [ (t^{n-1} / (t^n - eps^n + eps^{n-1}))^2 - 1 ]^{-1/2} dt`.

use crate::error::{ExigeoError, Result};
use crate::linalg::fit_line;
use crate::par::par_map;
use crate::quad::golden_section_min;

/// Guard on the waist parameter: beyond this the root separation degrades
/// and the half-period degenerates.
pub const EPS_MAX: f64 = 0.3;

/// Both solutions of `r^{n-1} = r^n - eps^n + eps^{n-1}`; the smaller is the
/// waist `eps` itself, the larger is the outer radius `R_eps`. The known
/// root `r = eps` is factored out before bracketed bisection plus a Newton
/// polish on the full polynomial.
pub fn waist_outer_radius(n: usize, eps: f64) -> Result<(f64, f64)> {
    if n < 2 {
        return Err(ExigeoError::validation("unduloids need n >= 2"));
    }
    if !(0.0 < eps && eps < 0.5) {
        return Err(ExigeoError::validation("need 0 < eps < 1/2 for root separation"));
    }
    // p(r) = r^n - r^{n-1} - eps^n + eps^{n-1}, p(eps) = 0.
    let c0 = eps.powi(n as i32 - 1) - eps.powi(n as i32);
    let p = |r: f64| r.powi(n as i32) - r.powi(n as i32 - 1) + c0;
    let dp = |r: f64| n as f64 * r.powi(n as i32 - 1) - (n as f64 - 1.0) * r.powi(n as i32 - 2);
    // synthetic division by (r - eps): q has degree n-1
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = 1.0;
    coeffs[n - 1] = -1.0;
    coeffs[0] = c0;
    let mut q = vec![0.0; n];
    q[n - 1] = coeffs[n];
    for k in (1..n).rev() {
        q[k - 1] = coeffs[k] + eps * q[k];
    }
    let qeval = |r: f64| {
        let mut acc = 0.0;
        for &c in q.iter().rev() {
            acc = acc * r + c;
        }
        acc
    };
    let lo = eps * (1.0 + 1e-12);
    let hi = 2.0;
    if qeval(lo) * qeval(hi) > 0.0 {
        return Err(ExigeoError::numerical(format!(
            "no outer root in ({eps}, 2): eps too large"
        )));
    }
    let mut r = crate::quad::bisect_root(qeval, lo, hi, 1e-13)?;
    for _ in 0..6 {
        let d = dp(r);
        if d.abs() < 1e-300 {
            break;
        }
        r -= p(r) / d;
    }
    Ok((eps, r))
}

/// Cubic Hermite interpolation on a uniform grid with exact endpoint slopes.
#[derive(Clone, Debug)]
struct HermiteTable {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
    derivs: Vec<f64>,
}

impl HermiteTable {
    /// Build the antiderivative of `deriv` starting from `value0` at `x0`,
    /// by per-interval Simpson on `deriv`.
    fn build<F: Fn(f64) -> f64>(x0: f64, x1: f64, cells: usize, value0: f64, deriv: F) -> Self {
        let dx = (x1 - x0) / cells as f64;
        let mut values = Vec::with_capacity(cells + 1);
        let mut derivs = Vec::with_capacity(cells + 1);
        let mut acc = value0;
        values.push(acc);
        derivs.push(deriv(x0));
        for i in 0..cells {
            let a = x0 + i as f64 * dx;
            let b = a + dx;
            let m = 0.5 * (a + b);
            let da = derivs[i];
            let db = deriv(b);
            acc += dx / 6.0 * (da + 4.0 * deriv(m) + db);
            values.push(acc);
            derivs.push(db);
        }
        HermiteTable { x0, dx, values, derivs }
    }

    fn eval(&self, x: f64) -> f64 {
        let t = ((x - self.x0) / self.dx).clamp(0.0, (self.values.len() - 1) as f64);
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let s = t - i as f64;
        let h = self.dx;
        let (v0, v1) = (self.values[i], self.values[i + 1]);
        let (d0, d1) = (self.derivs[i], self.derivs[i + 1]);
        let s2 = s * s;
        let s3 = s2 * s;
        v0 * (2.0 * s3 - 3.0 * s2 + 1.0)
            + d0 * h * (s3 - 2.0 * s2 + s)
            + v1 * (-2.0 * s3 + 3.0 * s2)
            + d1 * h * (s3 - s2)
    }

    fn last(&self) -> f64 {
        *self.values.last().unwrap()
    }
}

/// A half-period of the unduloid with mean curvature `n` and waist `eps`.
#[derive(Clone, Debug)]
pub struct UnduloidProfile {
    n: usize,
    eps: f64,
    r_outer: f64,
    kernel: GradientKernel,
    /// f in the inner substituted parameter t = sqrt(r - eps)
    inner: HermiteTable,
    /// tail integral in the outer parameter s = sqrt(R_eps - r)
    outer: HermiteTable,
    mid: f64,
}

impl UnduloidProfile {
    pub fn new(n: usize, eps: f64) -> Result<Self> {
        if eps > EPS_MAX {
            return Err(ExigeoError::validation(format!(
                "waist eps = {eps} beyond the guard {EPS_MAX}"
            )));
        }
        let (_, r_outer) = waist_outer_radius(n, eps)?;
        let mid = 0.5 * (eps + r_outer);
        let kernel = GradientKernel::new(n, eps, r_outer);
        let cells = 4096;
        let k1 = kernel.clone();
        let inner = HermiteTable::build(0.0, (mid - eps).sqrt(), cells, 0.0, move |t| k1.sub_inner(t));
        let k2 = kernel.clone();
        let outer =
            HermiteTable::build(0.0, (r_outer - mid).sqrt(), cells, 0.0, move |s| k2.sub_outer(s));
        Ok(UnduloidProfile { n, eps, r_outer, kernel, inner, outer, mid })
    }

    pub fn kernel(&self) -> &GradientKernel {
        &self.kernel
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn waist(&self) -> f64 {
        self.eps
    }

    pub fn outer_radius(&self) -> f64 {
        self.r_outer
    }

    /// Mean curvature of the family (sum of principal curvatures convention).
    pub fn mean_curvature(&self) -> f64 {
        self.n as f64
    }

    /// Profile height `f_eps(r)`, `eps <= r <= R_eps`.
    pub fn profile(&self, r: f64) -> Result<f64> {
        if !(self.eps <= r && r <= self.r_outer) {
            return Err(ExigeoError::validation(format!(
                "r = {r} outside [{}, {}]",
                self.eps, self.r_outer
            )));
        }
        if r <= self.mid {
            Ok(self.inner.eval((r - self.eps).sqrt()))
        } else {
            let tail_all = self.outer.last();
            let tail = self.outer.eval((self.r_outer - r).sqrt());
            Ok(self.inner.last() + tail_all - tail)
        }
    }

    /// Total height of the half-period, `f_eps(R_eps)`.
    pub fn total_height(&self) -> f64 {
        self.inner.last() + self.outer.last()
    }

    /// `|grad f_eps|(r)`, the closed-form integrand; `+inf` at the endpoints.
    pub fn gradient(&self, r: f64) -> Result<f64> {
        if !(self.eps <= r && r <= self.r_outer) {
            return Err(ExigeoError::validation(format!(
                "r = {r} outside [{}, {}]",
                self.eps, self.r_outer
            )));
        }
        if r == self.eps || r == self.r_outer {
            return Ok(f64::INFINITY);
        }
        Ok(self.kernel.eval(r))
    }

    /// `| -div( grad f / sqrt(1+|grad f|^2) ) - n |` from the closed-form
    /// radial expression, differentiated by central differences.
    pub fn mean_curvature_residual(&self, r: f64) -> Result<f64> {
        let margin = 1e-3 * (self.r_outer - self.eps);
        if !(self.eps + margin <= r && r <= self.r_outer - margin) {
            return Err(ExigeoError::validation("r too close to the profile endpoints"));
        }
        let kernel = self.kernel.clone();
        let nm1 = self.n as f64 - 1.0;
        let w = move |t: f64| {
            let g = kernel.eval(t);
            t.powf(nm1) * g / (1.0 + g * g).sqrt()
        };
        // the FD truncation error scales like h^2 n(n-1)(n-2) / (6 r^2), so
        // the step shrinks with r near the waist
        let h = (1e-4 * (self.r_outer - self.eps))
            .min(0.3 * (r - self.eps).min(self.r_outer - r))
            .min(3e-4 * r);
        let div = (w(r + h) - w(r - h)) / (2.0 * h) / r.powf(nm1);
        Ok((div - self.n as f64).abs())
    }

    /// Location and value of the minimal gradient, by golden-section search
    /// on `log r`; the window is unimodal in the mesoscale regime.
    pub fn min_gradient(&self) -> Result<(f64, f64)> {
        let kernel = self.kernel.clone();
        let lo = (self.eps * (1.0 + 1e-9)).ln();
        let hi = (self.r_outer * (1.0 - 1e-9)).ln();
        let (x, g) = golden_section_min(|t: f64| kernel.eval(t.exp()), lo, hi, 1e-13)?;
        Ok((x.exp(), g))
    }

    /// Lateral area between profile radii, `int n omega_n t^{n-1} sqrt(1+f'^2) dt`,
    /// with the inverse-square-root endpoint substitutions.
    pub fn area_between(&self, rho1: f64, rho2: f64) -> f64 {
        let n = self.n;
        let lo = rho1.max(self.eps);
        let hi = rho2.min(self.r_outer);
        if hi <= lo {
            return 0.0;
        }
        let nom = n as f64 * crate::linalg::unit_ball_volume(n);
        let kernel = self.kernel.clone();
        // split at the midpoint; each side in its own substituted parameter
        let m = 0.5 * (self.eps + self.r_outer);
        let mut total = 0.0;
        if lo < m.min(hi) {
            let b = m.min(hi);
            let k = kernel.clone();
            let eps = self.eps;
            total += crate::quad::adaptive_simpson(
                move |t: f64| {
                    let r = eps + t * t;
                    nom * r.powi(n as i32 - 1) * k.area_weight_inner(t)
                },
                (lo - self.eps).max(0.0).sqrt(),
                (b - self.eps).sqrt(),
                1e-12,
            );
        }
        if hi > m.max(lo) {
            let a = m.max(lo);
            let k = kernel;
            let router = self.r_outer;
            total += crate::quad::adaptive_simpson(
                move |s: f64| {
                    let r = router - s * s;
                    nom * r.powi(n as i32 - 1) * k.area_weight_outer(s)
                },
                (router - hi).max(0.0).sqrt(),
                (router - a).sqrt(),
                1e-12,
            );
        }
        total
    }
}

/// Evaluation kernel for `|grad f_eps|`. The naive form
/// `[(r^{n-1}/D)^2 - 1]^{-1/2}` cancels catastrophically near both roots of
/// `r^{n-1} = D(r)`, so the root polynomial is kept fully factored:
/// `r^{n-1} - D(r) = -(r - eps)(r - R_eps) w(r)` with `w > 0` on the
/// half-period, giving
/// `1/G^2 = (r - eps)(R_eps - r) w(r) (ratio + 1) / D(r)`.
#[derive(Clone, Debug)]
pub struct GradientKernel {
    n: usize,
    eps: f64,
    r_outer: f64,
    /// coefficients of w, ascending degree (degree n - 2)
    w: Vec<f64>,
    /// constant `eps^{n-1} - eps^n` of `D(r) = r^n + c`
    c: f64,
}

impl GradientKernel {
    pub fn new(n: usize, eps: f64, r_outer: f64) -> Self {
        // p(r) = r^n - r^{n-1} + c, deflate at eps then at r_outer
        let c = eps.powi(n as i32 - 1) - eps.powi(n as i32);
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        coeffs[n - 1] = -1.0;
        coeffs[0] = c;
        let mut q = vec![0.0; n];
        q[n - 1] = coeffs[n];
        for k in (1..n).rev() {
            q[k - 1] = coeffs[k] + eps * q[k];
        }
        let mut w = vec![0.0; n - 1];
        w[n - 2] = q[n - 1];
        for k in (1..n - 1).rev() {
            w[k - 1] = q[k] + r_outer * w[k];
        }
        GradientKernel { n, eps, r_outer, w, c }
    }

    fn weval(&self, r: f64) -> f64 {
        let mut acc = 0.0;
        for &cf in self.w.iter().rev() {
            acc = acc * r + cf;
        }
        acc
    }

    fn denom(&self, r: f64) -> f64 {
        r.powi(self.n as i32) + self.c
    }

    /// `1/G^2` from the factored differences `d_in = r - eps`,
    /// `d_out = R_eps - r` (passed separately so substituted parametrizations
    /// avoid re-deriving them with roundoff).
    fn inv_g_sq(&self, r: f64, d_in: f64, d_out: f64) -> f64 {
        let d = self.denom(r);
        let ratio = r.powi(self.n as i32 - 1) / d;
        d_in * d_out * self.weval(r) * (ratio + 1.0) / d
    }

    /// `|grad f|(r)`; infinite at the endpoints.
    pub fn eval(&self, r: f64) -> f64 {
        let arg = self.inv_g_sq(r, r - self.eps, self.r_outer - r);
        if arg <= 0.0 {
            f64::INFINITY
        } else {
            1.0 / arg.sqrt()
        }
    }

    /// Substituted profile integrand `2 t G(eps + t^2)`, finite at `t = 0`.
    pub fn sub_inner(&self, t: f64) -> f64 {
        let r = self.eps + t * t;
        2.0 / (self.inv_g_sq(r, 1.0, self.r_outer - r)).sqrt()
    }

    /// Substituted profile integrand `2 s G(R_eps - s^2)`, finite at `s = 0`.
    pub fn sub_outer(&self, s: f64) -> f64 {
        let r = self.r_outer - s * s;
        2.0 / (self.inv_g_sq(r, r - self.eps, 1.0)).sqrt()
    }

    /// Substituted area weight `2 t sqrt(1 + G(eps + t^2)^2)`: with
    /// `1/G^2 = t^2 * inv`, this is `2 sqrt(t^2 + 1/inv)`.
    pub fn area_weight_inner(&self, t: f64) -> f64 {
        let r = self.eps + t * t;
        let inv = self.inv_g_sq(r, 1.0, self.r_outer - r);
        2.0 * (t * t + inv.recip()).sqrt()
    }

    /// Substituted area weight `2 s sqrt(1 + G(R_eps - s^2)^2)`.
    pub fn area_weight_outer(&self, s: f64) -> f64 {
        let r = self.r_outer - s * s;
        let inv = self.inv_g_sq(r, r - self.eps, 1.0);
        2.0 * (s * s + inv.recip()).sqrt()
    }
}

// d/dt [ f(eps + t^2) ] at t = 0 equals kernel.sub_inner(0) by construction.

/// Log-log slopes across the family: flatness (squared minimal gradient) vs
/// eps, argmin radius vs eps, and `1 - R_eps` vs eps.
#[derive(Clone, Copy, Debug)]
pub struct MesoscaleExponents {
    pub slope_flatness: f64,
    pub slope_argmin: f64,
    pub slope_outer: f64,
}

/// Least-squares slopes over an eps sweep. The flatness measure is the
/// squared minimal gradient, the scale of the squared-angle flatness
/// integrands; its slope target is `2(n-1)/n`, while the raw gradient
/// scales with exponent `(n-1)/n`.
pub fn mesoscale_exponents(n: usize, eps_list: &[f64]) -> Result<MesoscaleExponents> {
    if eps_list.len() < 4 {
        return Err(ExigeoError::validation("need at least 4 eps values"));
    }
    let lo = eps_list.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = eps_list.iter().cloned().fold(0.0f64, f64::max);
    if hi / lo < 100.0 {
        return Err(ExigeoError::validation("eps sweep must span at least 2 decades"));
    }
    let rows: Vec<(f64, f64, f64)> = par_map(eps_list, |&eps| {
        let p = UnduloidProfile::new(n, eps).expect("profile in sweep");
        let (argmin, gmin) = p.min_gradient().expect("minimizer in sweep");
        (gmin, argmin, 1.0 - p.outer_radius())
    });
    let lx: Vec<f64> = eps_list.iter().map(|e| e.ln()).collect();
    let ly_flat: Vec<f64> = rows.iter().map(|r| (r.0 * r.0).ln()).collect();
    let ly_arg: Vec<f64> = rows.iter().map(|r| r.1.ln()).collect();
    let ly_out: Vec<f64> = rows.iter().map(|r| r.2.ln()).collect();
    let (_, slope_flatness) = fit_line(&lx, &ly_flat)?;
    let (_, slope_argmin) = fit_line(&lx, &ly_arg)?;
    let (_, slope_outer) = fit_line(&lx, &ly_out)?;
    Ok(MesoscaleExponents { slope_flatness, slope_argmin, slope_outer })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_n2_closed_form() {
        for eps in [1e-1, 1e-2, 1e-3, 1e-4] {
            let (w, r) = waist_outer_radius(2, eps).unwrap();
            assert_eq!(w, eps);
            assert!((r - (1.0 - eps)).abs() <= 1e-12, "eps={eps}: {r}");
        }
    }

    #[test]
    fn roots_n3_quadratic_form() {
        let (_, r) = waist_outer_radius(3, 0.1).unwrap();
        let expect = (0.9 + 1.17f64.sqrt()) / 2.0;
        assert!((r - expect).abs() <= 1e-10, "{r} vs {expect}");
    }

    #[test]
    fn root_identity_residual() {
        for n in [2usize, 3, 4] {
            for eps in [0.25, 0.1, 1e-3] {
                let (w, r) = waist_outer_radius(n, eps).unwrap();
                for root in [w, r] {
                    let lhs = root.powi(n as i32 - 1);
                    let rhs = root.powi(n as i32) - eps.powi(n as i32) + eps.powi(n as i32 - 1);
                    assert!((lhs - rhs).abs() <= 1e-12, "n={n} eps={eps} root={root}");
                }
            }
        }
    }

    #[test]
    fn profile_reference_value() {
        // Independent oracle: adaptive quadrature at 1e-13 on the substituted
        // integrand, evaluated here rather than through the cached tables.
        let p = UnduloidProfile::new(2, 0.1).unwrap();
        let kernel = GradientKernel::new(2, 0.1, 0.9);
        let oracle =
            crate::quad::adaptive_simpson(|t| kernel.sub_inner(t), 0.0, 0.4f64.sqrt(), 1e-13);
        let got = p.profile(0.5).unwrap();
        assert!((got - oracle).abs() <= 1e-10, "{got} vs {oracle}");
        // frozen from the oracle above (cross-checked at 40 digits)
        assert!((got - 0.400_777_235_017_447_52).abs() <= 1e-10, "{got}");
        assert_eq!(p.profile(0.1).unwrap(), 0.0);
    }

    #[test]
    fn profile_monotone() {
        let p = UnduloidProfile::new(3, 0.05).unwrap();
        let mut prev = 0.0;
        for k in 1..200 {
            let r = p.waist() + (p.outer_radius() - p.waist()) * k as f64 / 200.0;
            let v = p.profile(r).unwrap();
            assert!(v > prev, "not monotone at r={r}");
            prev = v;
        }
    }

    #[test]
    fn gradient_endpoints_infinite() {
        let p = UnduloidProfile::new(2, 0.05).unwrap();
        assert!(p.gradient(p.waist()).unwrap().is_infinite());
        assert!(p.gradient(p.outer_radius()).unwrap().is_infinite());
        assert!(p.gradient(0.5).unwrap().is_finite());
    }

    #[test]
    fn gradient_consistent_with_profile() {
        let p = UnduloidProfile::new(2, 0.1).unwrap();
        for r in [0.2, 0.4, 0.6, 0.8] {
            let h = 1e-5;
            let fd = (p.profile(r + h).unwrap() - p.profile(r - h).unwrap()) / (2.0 * h);
            let g = p.gradient(r).unwrap();
            assert!((fd - g).abs() <= 1e-6 * (1.0 + g), "r={r}: {fd} vs {g}");
        }
    }

    #[test]
    fn cmc_residual_small() {
        let p2 = UnduloidProfile::new(2, 0.1).unwrap();
        assert!(p2.mean_curvature_residual(0.5).unwrap() <= 1e-6);
        let p3 = UnduloidProfile::new(3, 0.05).unwrap();
        assert!(p3.mean_curvature_residual(0.4).unwrap() <= 1e-6);
    }

    #[test]
    fn argmin_matches_closed_form() {
        // d/dr (r + c r^{1-n}) = 0 at r = ((n-1) c)^{1/n}, c = eps^{n-1}(1-eps).
        for (n, eps) in [(2usize, 1e-4), (3usize, 1e-3)] {
            let p = UnduloidProfile::new(n, eps).unwrap();
            let (argmin, _) = p.min_gradient().unwrap();
            let c = eps.powi(n as i32 - 1) * (1.0 - eps);
            let expect = ((n as f64 - 1.0) * c).powf(1.0 / n as f64);
            assert!(
                (argmin - expect).abs() <= 1e-6 * expect,
                "n={n} eps={eps}: {argmin} vs {expect}"
            );
        }
    }

    #[test]
    fn exponent_sweep_n2() {
        let eps = [1e-1, 1e-2, 1e-3, 1e-4];
        let m = mesoscale_exponents(2, &eps).unwrap();
        assert!((m.slope_outer - 1.0).abs() <= 1e-6, "outer {}", m.slope_outer);
        assert!((m.slope_flatness - 1.0).abs() <= 0.1, "flatness {}", m.slope_flatness);
        assert!((m.slope_argmin - 0.5).abs() <= 0.05, "argmin {}", m.slope_argmin);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(waist_outer_radius(1, 0.1).is_err());
        assert!(waist_outer_radius(2, 0.7).is_err());
        assert!(UnduloidProfile::new(2, 0.4).is_err());
        let p = UnduloidProfile::new(2, 0.1).unwrap();
        assert!(p.profile(0.95).is_err());
    }
}
