//! Gauss-Legendre rules on `[0, 1]`.

/// Nodes and weights of the `s`-point Gauss-Legendre rule on `[0, 1]`,
/// exact for polynomials of degree `2s - 1`.
pub fn gauss_legendre(s: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(s >= 1, "need at least one node");
    let mut nodes = vec![0.0; s];
    let mut weights = vec![0.0; s];
    for i in 0..s.div_ceil(2) {
        // Newton on P_s from the Chebyshev-like initial guess
        let mut t = (std::f64::consts::PI * (i as f64 + 0.75) / (s as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(s, t);
            dp = d;
            let dt = p / d;
            t -= dt;
            if dt.abs() <= 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(s, t);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - t * t) * dp * dp);
        // map [-1, 1] -> [0, 1]
        nodes[i] = 0.5 * (1.0 - t);
        nodes[s - 1 - i] = 0.5 * (1.0 + t);
        weights[i] = 0.5 * w;
        weights[s - 1 - i] = 0.5 * w;
    }
    (nodes, weights)
}

/// `(P_s(t), P_s'(t))` by the three-term recurrence.
fn legendre(s: usize, t: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, t);
    if s == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=s {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = s as f64 * (t * p1 - p0) / (t * t - 1.0);
    (p1, d)
}

/// Number of nodes integrating a degree-`d` polynomial exactly.
pub fn nodes_for_degree(d: usize) -> usize {
    (d + 1).div_ceil(2).max(1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_point_rule() {
        let (x, w) = gauss_legendre(2);
        let r = 0.5 / 3f64.sqrt();
        assert!((x[0] - (0.5 - r)).abs() < 1e-15);
        assert!((x[1] - (0.5 + r)).abs() < 1e-15);
        assert!((w[0] - 0.5).abs() < 1e-15 && (w[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn three_point_rule() {
        let (x, w) = gauss_legendre(3);
        let r = 0.5 * 0.6f64.sqrt();
        assert!((x[0] - (0.5 - r)).abs() < 1e-15);
        assert!((x[1] - 0.5).abs() < 1e-15);
        assert!((w[0] - 5.0 / 18.0).abs() < 1e-15);
        assert!((w[1] - 8.0 / 18.0).abs() < 1e-15);
    }

    #[test]
    fn exact_on_monomials() {
        for s in 1..=12 {
            let (x, w) = gauss_legendre(s);
            for d in 0..2 * s {
                let q: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(d as i32)).sum();
                let exact = 1.0 / (d as f64 + 1.0);
                assert!((q - exact).abs() < 1e-14, "s={s} d={d}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn node_counts() {
        assert_eq!(nodes_for_degree(0), 1);
        assert_eq!(nodes_for_degree(1), 1);
        assert_eq!(nodes_for_degree(3), 2);
        assert_eq!(nodes_for_degree(4), 3);
        assert_eq!(nodes_for_degree(7), 4);
    }
}
