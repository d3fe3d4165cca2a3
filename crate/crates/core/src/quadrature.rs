//! Gauss–Legendre quadrature and Legendre polynomial evaluation on `[-1, 1]`.

/// Gauss–Legendre rule with `q` points on the reference interval `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct Quadrature {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    /// Exact for polynomials of degree `2q - 1`.
    pub fn gauss_legendre(q: usize) -> Self {
        assert!(q >= 1, "quadrature needs at least one point");
        let mut points = vec![0.0; q];
        let mut weights = vec![0.0; q];
        let m = (q + 1) / 2;
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_q.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (q as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre_with_derivative(q, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre_with_derivative(q, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            points[i] = -x;
            points[q - 1 - i] = x;
            weights[i] = w;
            weights[q - 1 - i] = w;
        }
        if q % 2 == 1 {
            points[q / 2] = 0.0;
        }
        Quadrature { points, weights }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
pub fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let (mut p0, mut p1) = (1.0, x);
    let (mut d0, mut d1) = (0.0, 1.0);
    for m in 1..n {
        let mf = m as f64;
        let p2 = ((2.0 * mf + 1.0) * x * p1 - mf * p0) / (mf + 1.0);
        let d2 = d0 + (2.0 * mf + 1.0) * p1;
        p0 = p1;
        p1 = p2;
        d0 = d1;
        d1 = d2;
    }
    (p1, d1)
}

/// Values `P_0(x) .. P_k(x)`.
pub fn legendre_all(k: usize, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k + 1);
    out.push(1.0);
    if k >= 1 {
        out.push(x);
    }
    for m in 1..k {
        let mf = m as f64;
        let next = ((2.0 * mf + 1.0) * x * out[m] - mf * out[m - 1]) / (mf + 1.0);
        out.push(next);
    }
    out
}

/// Derivatives `P_0'(x) .. P_k'(x)`.
pub fn legendre_derivatives_all(k: usize, x: f64) -> Vec<f64> {
    (0..=k).map(|n| legendre_with_derivative(n, x).1).collect()
}

/// Monomial coefficients of `P_0 .. P_k` in the reference variable: `coeffs[a][i]` multiplies `x^i`.
pub fn legendre_monomial_table(k: usize) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(k + 1);
    table.push({
        let mut v = vec![0.0; k + 1];
        v[0] = 1.0;
        v
    });
    if k >= 1 {
        let mut v = vec![0.0; k + 1];
        v[1] = 1.0;
        table.push(v);
    }
    for m in 1..k {
        let mf = m as f64;
        let mut next = vec![0.0; k + 1];
        for i in 0..=k {
            if i >= 1 {
                next[i] += (2.0 * mf + 1.0) * table[m][i - 1] / (mf + 1.0);
            }
            next[i] -= mf * table[m - 1][i] / (mf + 1.0);
        }
        table.push(next);
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_monomials() {
        for q in 1..=8 {
            let rule = Quadrature::gauss_legendre(q);
            for d in 0..=(2 * q - 1) {
                let num = rule.integrate(-1.0, 1.0, |x| x.powi(d as i32));
                let exact = if d % 2 == 1 {
                    0.0
                } else {
                    2.0 / (d as f64 + 1.0)
                };
                assert!((num - exact).abs() < 1e-14, "q={q} d={d}: {num} vs {exact}");
            }
        }
    }

    #[test]
    fn exact_on_shifted_interval() {
        // r^(2q-1) on [1, 2], relative error.
        for q in 1..=8 {
            let rule = Quadrature::gauss_legendre(q);
            let d = 2 * q - 1;
            let num = rule.integrate(1.0, 2.0, |r| r.powi(d as i32));
            let exact = (2f64.powi(d as i32 + 1) - 1.0) / (d as f64 + 1.0);
            assert!(((num - exact) / exact).abs() < 1e-14, "q={q}");
        }
    }

    #[test]
    fn monomial_table_matches_recurrence() {
        let k = 5;
        let table = legendre_monomial_table(k);
        for &x in &[-0.9, -0.3, 0.0, 0.41, 1.0] {
            let vals = legendre_all(k, x);
            for a in 0..=k {
                let horner: f64 = table[a].iter().rev().fold(0.0, |acc, c| acc * x + c);
                assert!((horner - vals[a]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        for n in 0..6 {
            let x = 0.37;
            let h = 1e-6;
            let fd = (legendre_with_derivative(n, x + h).0 - legendre_with_derivative(n, x - h).0)
                / (2.0 * h);
            assert!((fd - legendre_with_derivative(n, x).1).abs() < 1e-8);
        }
    }
}
