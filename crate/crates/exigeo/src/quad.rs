//! Quadrature kernels: Gauss-Legendre nodes, adaptive Simpson, and an
//! integrator for inverse-square-root endpoint singularities.

use crate::error::{ExigeoError, Result};

/// Gauss-Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre polynomial.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Tricomi initial guess.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence for P_n(x) and P'_n(x).
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre nodes and weights mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&t| mid + half * t).collect(),
        w.iter().map(|&t| t * half).collect(),
    )
}

fn simpson(fa: f64, fm: f64, fb: f64, h: f64) -> f64 {
    h / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn adaptive_simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: usize,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(fa, flm, fm, m - a);
    let right = simpson(fm, frm, fb, b - m);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson on `[a, b]` with mixed absolute/relative tolerance.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    // Seed the scale with a coarse pass so the relative tolerance means
    // something even when the integral is small.
    let (xs, ws) = gauss_legendre_on(16, a, b);
    let coarse: f64 = xs.iter().zip(&ws).map(|(&x, &w)| w * f(x)).sum();
    let scale = coarse.abs().max(1e-12);
    let tol = rel_tol * scale;
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = simpson(fa, fm, fb, b - a);
    adaptive_simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 48)
}

/// Integrate `f` over `[a, b]` where `f ~ c (x-a)^{-1/2}` near `a` and/or
/// `f ~ c (b-x)^{-1/2}` near `b`. The substitution `t = sqrt(x - a)`
/// (mirrored at `b`) renders each half bounded before adaptive Simpson.
pub fn integrate_sqrt_endpoints<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    singular_at_a: bool,
    singular_at_b: bool,
    rel_tol: f64,
) -> f64 {
    if b <= a {
        return 0.0;
    }
    // After the substitution the integrand has a finite limit at t = 0, but
    // evaluating f exactly at the singular endpoint overflows; extend by the
    // value just inside instead.
    let guarded = |g: &dyn Fn(f64) -> f64, t: f64, tmax: f64| -> f64 {
        let tmin = 1e-8 * tmax;
        let v = if t <= tmin { g(tmin) } else { g(t) };
        if v.is_finite() {
            v
        } else {
            g(t.max(16.0 * tmin))
        }
    };
    match (singular_at_a, singular_at_b) {
        (false, false) => adaptive_simpson(f, a, b, rel_tol),
        (true, false) => {
            let t1 = (b - a).sqrt();
            let g = |t: f64| 2.0 * t * f(a + t * t);
            adaptive_simpson(|t| guarded(&g, t, t1), 0.0, t1, rel_tol)
        }
        (false, true) => {
            let t1 = (b - a).sqrt();
            let g = |t: f64| 2.0 * t * f(b - t * t);
            adaptive_simpson(|t| guarded(&g, t, t1), 0.0, t1, rel_tol)
        }
        (true, true) => {
            let m = 0.5 * (a + b);
            let ta = (m - a).sqrt();
            let tb = (b - m).sqrt();
            let ga = |t: f64| 2.0 * t * f(a + t * t);
            let gb = |t: f64| 2.0 * t * f(b - t * t);
            adaptive_simpson(|t| guarded(&ga, t, ta), 0.0, ta, rel_tol)
                + adaptive_simpson(|t| guarded(&gb, t, tb), 0.0, tb, rel_tol)
        }
    }
}

/// Golden-section minimization of a unimodal function on `[a, b]`.
pub fn golden_section_min<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if !(b > a) {
        return Err(ExigeoError::validation("golden section needs a < b"));
    }
    let inv_phi = (5.0f64.sqrt() - 1.0) / 2.0;
    let mut lo = a;
    let mut hi = b;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..300 {
        if hi - lo < tol {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    let x = 0.5 * (lo + hi);
    Ok((x, f(x)))
}

/// Bisection for a bracketed root of `f`, polished by a few secant steps.
pub fn bisect_root<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let mut fa = f(a);
    let mut fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa * fb > 0.0 {
        return Err(ExigeoError::numerical("root not bracketed"));
    }
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm == 0.0 || b - a < tol {
            return Ok(m);
        }
        if fa * fm < 0.0 {
            b = m;
            fb = fm;
        } else {
            a = m;
            fa = fm;
        }
    }
    let _ = fb;
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gl_integrates_polynomials_exactly() {
        let (x, w) = gauss_legendre(8);
        // degree 15 is exact for 8 nodes
        let got: f64 = x.iter().zip(&w).map(|(&t, &wt)| wt * t.powi(14)).sum();
        assert!((got - 2.0 / 15.0).abs() < 1e-14);
        let total: f64 = w.iter().sum();
        assert!((total - 2.0).abs() < 1e-14);
    }

    #[test]
    fn simpson_smooth() {
        let v = adaptive_simpson(|x| x.sin(), 0.0, std::f64::consts::PI, 1e-12);
        assert!((v - 2.0).abs() < 1e-10);
    }

    #[test]
    fn sqrt_singularity_both_ends() {
        // int_0^1 dx / sqrt(x(1-x)) = pi
        let v = integrate_sqrt_endpoints(|x| 1.0 / (x * (1.0 - x)).sqrt(), 0.0, 1.0, true, true, 1e-12);
        assert!((v - std::f64::consts::PI).abs() < 1e-9, "got {v}");
    }

    #[test]
    fn golden_section_quadratic() {
        let (x, _) = golden_section_min(|t| (t - 0.3) * (t - 0.3), 0.0, 1.0, 1e-12).unwrap();
        assert!((x - 0.3).abs() < 1e-8);
    }
}
