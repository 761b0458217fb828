//! Gauss-Legendre quadrature on [0, 1].
//!
//! The line-integral fields P and M integrate smooth Gaussians along the
//! segment parameter, so Gauss-Legendre converges spectrally and a fixed
//! order of 32 is at rounding level for every desk-scale configuration.
//! Nodes are found by Newton iteration on the Legendre polynomial from the
//! Chebyshev initial guess; weights from the standard derivative formula.

/// Nodes and weights on [0, 1]; weights sum to 1.
#[derive(Clone, Debug)]
pub struct SQuadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Legendre P_n(x) and its derivative, by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

impl SQuadrature {
    /// Gauss-Legendre rule of the given order, mapped from [-1, 1] to [0, 1].
    pub fn gauss_legendre(order: usize) -> Self {
        assert!(order >= 1, "quadrature order must be positive");
        let n = order;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n {
            // Chebyshev guess for the i-th root of P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(n, x);
                let step = p / dp;
                x -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            let (_, dp) = legendre(n, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            // map [-1, 1] -> [0, 1]
            nodes[n - 1 - i] = 0.5 * (x + 1.0);
            weights[n - 1 - i] = 0.5 * w;
        }
        SQuadrature { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Integrate f over [0, 1].
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&s, &w)| w * f(s))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for order in [2usize, 5, 16, 32, 64] {
            let q = SQuadrature::gauss_legendre(order);
            let s: f64 = q.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14, "order {order}: {s}");
        }
    }

    #[test]
    fn two_point_rule_is_the_textbook_one() {
        let q = SQuadrature::gauss_legendre(2);
        let r3 = 1.0 / 3.0_f64.sqrt();
        let expect = [0.5 * (1.0 - r3), 0.5 * (1.0 + r3)];
        for (n, e) in q.nodes.iter().zip(expect) {
            assert!((n - e).abs() < 1e-14);
        }
        for w in &q.weights {
            assert!((w - 0.5).abs() < 1e-14);
        }
    }

    #[test]
    fn exact_for_polynomials_up_to_degree_2n_minus_1() {
        let q = SQuadrature::gauss_legendre(8);
        for deg in 0..16usize {
            let got = q.integrate(|s| s.powi(deg as i32));
            let expect = 1.0 / (deg as f64 + 1.0);
            assert!(
                (got - expect).abs() < 1e-13,
                "degree {deg}: {got} vs {expect}"
            );
        }
    }

    #[test]
    fn first_moment_is_exactly_half() {
        // The magnetization weight integral: sum w_i s_i = 1/2.
        let q = SQuadrature::gauss_legendre(32);
        let m1: f64 = q.nodes.iter().zip(&q.weights).map(|(s, w)| s * w).sum();
        assert!((m1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn converges_on_a_narrow_gaussian() {
        // width 0.08 is narrower than any physical s-integrand here
        // (sigma / |x| >= 0.18 at desk scale); order 32 is converged to
        // rounding while order 24 is not yet.
        let f = |s: f64| (-(s - 0.37).powi(2) / (2.0 * 0.08_f64.powi(2))).exp();
        let fine = SQuadrature::gauss_legendre(96).integrate(f);
        let got = SQuadrature::gauss_legendre(32).integrate(f);
        assert!((got - fine).abs() < 1e-13, "{:.3e}", (got - fine).abs());
        let coarse = SQuadrature::gauss_legendre(24).integrate(f);
        assert!((coarse - fine).abs() > 1e-13);
    }
}
