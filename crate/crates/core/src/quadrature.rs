//! Gauss–Legendre rules and product rules over spheres and balls.

use std::f64::consts::PI;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on
/// the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        dp = if d != 0.0 { d } else { dp };
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    let dp = n * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Gauss–Legendre rule mapped onto `[a, b]`.
pub fn gauss_legendre_on(a: f64, b: f64, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    (
        x.iter().map(|t| mid + half * t).collect(),
        w.iter().map(|v| v * half).collect(),
    )
}

/// Integrate `f` over `[a, b]` with successively doubled Gauss–Legendre
/// rules until two agree to `tol` (absolute, scaled by `max(1, |I|)`).
/// Returns the value and the last change.
pub fn adaptive_gauss<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> (f64, f64, bool) {
    let eval = |n: usize| {
        let (x, w) = gauss_legendre_on(a, b, n);
        x.iter().zip(&w).map(|(x, w)| w * f(*x)).sum::<f64>()
    };
    let mut n = 16;
    let mut prev = eval(n);
    let mut change = f64::INFINITY;
    while n < 2048 {
        n *= 2;
        let next = eval(n);
        change = (next - prev).abs();
        if change <= tol * prev.abs().max(1.0) {
            return (next, change, true);
        }
        prev = next;
    }
    (prev, change, false)
}

/// Product quadrature on the unit sphere `S^{d-1} ⊂ R^d` in hyperspherical
/// coordinates. `order` nodes per polar angle, `2 * order` on the azimuth.
///
/// Converges exponentially in `order` for smooth integrands.
pub fn sphere_rule(d: usize, order: usize) -> Vec<(Vec<f64>, f64)> {
    assert!(d >= 1);
    if d == 1 {
        return vec![(vec![1.0], 1.0), (vec![-1.0], 1.0)];
    }
    // Azimuth: trapezoid on the circle is exact for trigonometric degree < 2*order.
    let m = 2 * order;
    let circle: Vec<(Vec<f64>, f64)> = (0..m)
        .map(|k| {
            let phi = 2.0 * PI * (k as f64 + 0.5) / m as f64;
            (vec![phi.cos(), phi.sin()], 2.0 * PI / m as f64)
        })
        .collect();
    let mut rule = circle;
    // Each additional dimension adds one polar angle φ ∈ [0, π]:
    // x_new = cos φ, the previous coordinates scale by sin φ, weight sin^{k-2} φ.
    for k in 3..=d {
        let (phis, ws) = gauss_legendre_on(0.0, PI, order + k);
        let mut next = Vec::with_capacity(rule.len() * phis.len());
        for (phi, w) in phis.iter().zip(&ws) {
            let (s, c) = phi.sin_cos();
            let jac = s.powi(k as i32 - 2);
            for (pt, pw) in &rule {
                let mut x: Vec<f64> = pt.iter().map(|v| v * s).collect();
                x.push(c);
                next.push((x, pw * w * jac));
            }
        }
        rule = next;
    }
    rule
}
