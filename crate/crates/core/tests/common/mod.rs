//! Oracles shared by the integration and acceptance tests. Nothing here
//! calls into the crate's density or solver code.

#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson(f, a, b, fa, fm, fb, whole, tol, 60)
}

#[allow(clippy::too_many_arguments)]
fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // below this the difference is rounding noise
    let floor = 64.0 * f64::EPSILON * (left.abs() + right.abs());
    if depth == 0 || !delta.is_finite() || delta.abs() <= 15.0 * tol.max(floor) {
        return left + right + delta / 15.0;
    }
    simpson(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + simpson(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Integral over `[lo, hi]` split at the kink `at`.
pub fn integrate_kinked<F: Fn(f64) -> f64>(f: &F, lo: f64, at: f64, hi: f64, tol: f64) -> f64 {
    integrate(f, lo, at, tol) + integrate(f, at, hi, tol)
}

/// Laplace density written out from its definition.
pub fn laplace_density(y: f64, theta: f64, b: f64) -> f64 {
    (-(y - theta).abs() / b).exp() / (2.0 * b)
}

/// Tilted-Laplace attack density written out from its definition.
pub fn attack_density(y: f64, theta: f64, b: f64, k1: f64) -> f64 {
    (k1 * k1 - b * b) / (2.0 * b * k1 * k1) * (-(y - theta).abs() / b + (y - theta) / k1).exp()
}

/// `∫ f_a ln(f_a / f0)` by quadrature.
pub fn kl_by_quadrature(b: f64, k1: f64) -> f64 {
    // ln(f_a/f0) from the two definitions; both densities underflow far out
    let log_ratio = |y: f64| ((k1 * k1 - b * b) / (k1 * k1)).ln() + y / k1;
    let integrand = |y: f64| attack_density(y, 0.0, b, k1) * log_ratio(y);
    // slowest decay is the right tail, rate 1/b - 1/k1
    let right = 60.0 / (1.0 / b - 1.0 / k1);
    let left = 60.0 * b;
    integrate_kinked(&integrand, -left, 0.0, right, 1e-13)
}

pub fn mean_and_var(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Pearson chi-square of `samples` against `density`, using `inner_bins`
/// equal-width bins on `[lo, hi]` plus one bin per tail. Returns
/// `(statistic, degrees of freedom)`.
pub fn chi_square<F: Fn(f64) -> f64>(samples: &[f64], density: &F, lo: f64, hi: f64, inner_bins: usize, kink: f64) -> (f64, usize) {
    let width = (hi - lo) / inner_bins as f64;
    let mut counts = vec![0usize; inner_bins + 2];
    for &x in samples {
        let idx = if x < lo {
            0
        } else if x >= hi {
            inner_bins + 1
        } else {
            1 + (((x - lo) / width) as usize).min(inner_bins - 1)
        };
        counts[idx] += 1;
    }
    let mut probs = Vec::with_capacity(inner_bins + 2);
    let mut inner = 0.0;
    let mut interior = Vec::with_capacity(inner_bins);
    for i in 0..inner_bins {
        let (a, b) = (lo + i as f64 * width, lo + (i + 1) as f64 * width);
        let p = if a < kink && kink < b {
            integrate_kinked(density, a, kink, b, 1e-14)
        } else {
            integrate(density, a, b, 1e-14)
        };
        inner += p;
        interior.push(p);
    }
    let left_tail = integrate(density, lo - 200.0 * (hi - lo), lo, 1e-14);
    probs.push(left_tail);
    probs.extend(interior);
    probs.push((1.0 - inner - left_tail).max(0.0));
    let n = samples.len() as f64;
    let stat = counts
        .iter()
        .zip(&probs)
        .map(|(&c, &p)| {
            let e = n * p;
            assert!(e >= 5.0, "expected count {e} too small for chi-square");
            (c as f64 - e).powi(2) / e
        })
        .sum();
    (stat, inner_bins + 1)
}

/// Closed-form false-positive rate of the rolling-mean detector on a
/// constant signal plus Laplace(b) noise: `P(|η - mean(η_1..η_w)| > τ)`.
/// Exact while the window mean stays inside `(-τ, τ)`, via the Laplace
/// moment generating function `E[e^{tη}] = 1/(1 - b²t²)`.
pub fn rolling_detector_fpr(tau: f64, b: f64, w: usize) -> f64 {
    let w = w as f64;
    (-tau / b).exp() * (1.0 - 1.0 / (w * w)).powf(-w)
}

/// Coefficient of determination of a least-squares line through `(x, y)`.
pub fn r_squared(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}
