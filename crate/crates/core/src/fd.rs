//! Finite-difference stencils shared by the geometry, Picone and Rellich code.

/// Default first-derivative step: `eps^(1/3) * max(1, |x|_inf)`.
pub fn first_order_step(x: &[f64]) -> f64 {
    f64::EPSILON.cbrt() * x.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Default step for three-point second differences: `eps^(1/4) * max(1, |x|_inf)`.
pub fn second_order_step(x: &[f64]) -> f64 {
    f64::EPSILON.powf(0.25) * x.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

/// Central-difference gradient.
pub fn gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut y = x.to_vec();
    (0..x.len())
        .map(|j| {
            y[j] = x[j] + h;
            let fp = f(&y);
            y[j] = x[j] - h;
            let fm = f(&y);
            y[j] = x[j];
            (fp - fm) / (2.0 * h)
        })
        .collect()
}

/// Three-point Laplacian `Σ_j (f(x+h e_j) - 2 f(x) + f(x-h e_j)) / h²`.
pub fn laplacian(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> f64 {
    let f0 = f(x);
    let mut y = x.to_vec();
    let mut acc = 0.0;
    for j in 0..x.len() {
        y[j] = x[j] + h;
        let fp = f(&y);
        y[j] = x[j] - h;
        let fm = f(&y);
        y[j] = x[j];
        acc += fp - 2.0 * f0 + fm;
    }
    acc / (h * h)
}

/// Five-point first and second derivatives of a scalar function at `r`.
pub fn derivs5(f: &dyn Fn(f64) -> f64, r: f64, h: f64) -> (f64, f64) {
    let fm2 = f(r - 2.0 * h);
    let fm1 = f(r - h);
    let f0 = f(r);
    let fp1 = f(r + h);
    let fp2 = f(r + 2.0 * h);
    let d1 = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    let d2 = (-fm2 + 16.0 * fm1 - 30.0 * f0 + 16.0 * fp1 - fp2) / (12.0 * h * h);
    (d1, d2)
}

/// Seven-point first and second derivatives at `r`.
pub fn derivs7(f: &dyn Fn(f64) -> f64, r: f64, h: f64) -> (f64, f64) {
    let v: [f64; 7] = std::array::from_fn(|k| f(r + (k as f64 - 3.0) * h));
    let d1 = (-v[0] + 9.0 * v[1] - 45.0 * v[2] + 45.0 * v[4] - 9.0 * v[5] + v[6]) / (60.0 * h);
    let d2 = (2.0 * (v[0] + v[6]) - 27.0 * (v[1] + v[5]) + 270.0 * (v[2] + v[4]) - 490.0 * v[3])
        / (180.0 * h * h);
    (d1, d2)
}

/// Radial Laplacian `f'' + (n-1) f'/r` with seven-point stencils.
pub fn radial_laplacian7(f: &dyn Fn(f64) -> f64, n: f64, r: f64, h: f64) -> f64 {
    let (d1, d2) = derivs7(f, r, h);
    d2 + (n - 1.0) * d1 / r
}

/// Radial Laplacian `f'' + (n-1) f'/r` with five-point stencils.
pub fn radial_laplacian(f: &dyn Fn(f64) -> f64, n: f64, r: f64, h: f64) -> f64 {
    let (d1, d2) = derivs5(f, r, h);
    d2 + (n - 1.0) * d1 / r
}

/// Fornberg weights for the first derivative at `x0` from nodes `xs`.
pub fn first_derivative_weights(x0: f64, xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    // c[j][k]: weight of node j for derivative order k
    let mut c = vec![[0.0f64; 2]; n];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(1);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - x0;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gradient_of_quadratic() {
        let f = |x: &[f64]| x[0] * x[0];
        let g = gradient(&f, &[3.0, 5.0], 1e-5);
        assert!((g[0] - 6.0).abs() < 1e-8 && g[1].abs() < 1e-12);
    }

    #[test]
    fn laplacian_of_quadratic() {
        let f = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>();
        let l = laplacian(&f, &[0.3, -0.7, 1.1], 1e-3);
        assert!((l - 6.0).abs() < 1e-8);
    }

    #[test]
    fn fornberg_matches_central_weights() {
        let w = first_derivative_weights(0.0, &[-2.0, -1.0, 0.0, 1.0, 2.0]);
        let want = [1.0 / 12.0, -8.0 / 12.0, 0.0, 8.0 / 12.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(want) {
            assert!((a - b).abs() < 1e-14);
        }
        // exact on quartics for non-uniform nodes
        let xs = [0.9, 1.0, 1.15, 1.3, 1.6];
        let w = first_derivative_weights(1.15, &xs);
        let d: f64 = xs.iter().zip(&w).map(|(x, c)| c * x.powi(4)).sum();
        assert!((d - 4.0 * 1.15f64.powi(3)).abs() < 1e-10);
    }

    #[test]
    fn seven_point_is_sixth_order() {
        let f = |x: f64| x.exp();
        let err = |h: f64| {
            let (d1, d2) = derivs7(&f, 0.3, h);
            ((d1 - 0.3f64.exp()).abs(), (d2 - 0.3f64.exp()).abs())
        };
        let (a, b) = (err(0.1), err(0.05));
        assert!(a.0 / b.0 > 50.0 && a.1 / b.1 > 50.0, "{a:?} {b:?}");
    }

    #[test]
    fn radial_laplacian_of_powers() {
        let n = 5.0;
        for m in [2.0, 3.0, 4.0] {
            let f = |r: f64| r.powf(m);
            let r = 1.7;
            let h = f64::EPSILON.powf(1.0 / 6.0) * r;
            let got = radial_laplacian(&f, n, r, h);
            let want = m * (m + n - 2.0) * r.powf(m - 2.0);
            assert!(((got - want) / want).abs() < 1e-7, "{m}: {got} vs {want}");
        }
    }
}
