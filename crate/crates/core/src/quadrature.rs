//! Gauss-Legendre rules and the graded composite rules used for weakly
//! singular integrands.

use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            // Tricomi initial guess, then Newton on P_n
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
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
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussRule { nodes, weights }
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(t, w)| w * f(mid + half * t))
            .sum::<f64>()
            * half
    }

    /// Nodes and weights mapped onto `[a, b]`, appended to `out`.
    pub fn push_mapped(&self, a: f64, b: f64, out: &mut Vec<(f64, f64)>) {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            out.push((mid + half * t, w * half));
        }
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Cached rule of the given order (orders up to 32).
pub fn gauss(n: usize) -> &'static GaussRule {
    static RULES: OnceLock<Vec<GaussRule>> = OnceLock::new();
    let rules = RULES.get_or_init(|| (0..=32).map(|k| GaussRule::new(k.max(1))).collect());
    &rules[n]
}

/// Depth of geometric grading toward an endpoint singularity.
pub const GEOMETRIC_DEPTH: usize = 52;

/// Composite rule on `[0, 1]` geometrically graded toward 0: pieces
/// `[2^{-k-1}, 2^{-k}]` with `order` points each.
pub fn geometric_unit_rule(order: usize) -> &'static [(f64, f64)] {
    static RULE: OnceLock<Vec<(f64, f64)>> = OnceLock::new();
    assert_eq!(order, 12, "only the order-12 geometric rule is cached");
    RULE.get_or_init(|| {
        let g = gauss(12);
        let mut out = Vec::with_capacity(12 * GEOMETRIC_DEPTH);
        let mut b = 1.0f64;
        for _ in 0..GEOMETRIC_DEPTH {
            let a = 0.5 * b;
            g.push_mapped(a, b, &mut out);
            b = a;
        }
        out
    })
}

/// Composite rule on `[a, b]` for an integrand that is analytic on the
/// interval but singular at the point `sing` outside it: every piece is no
/// longer than its distance to `sing`.
pub fn graded_toward_external(a: f64, b: f64, sing: f64, order: usize, out: &mut Vec<(f64, f64)>) {
    let g = gauss(order);
    if sing <= a {
        let mut lo = a;
        while lo < b {
            let d = lo - sing;
            let hi = if d <= 0.0 { b } else { (lo + d).min(b) };
            // merge a short tail into the last piece
            let hi = if b - hi < 0.25 * (hi - lo) { b } else { hi };
            g.push_mapped(lo, hi, out);
            lo = hi;
        }
    } else if sing >= b {
        let mut hi = b;
        while hi > a {
            let d = sing - hi;
            let lo = if d <= 0.0 { a } else { (hi - d).max(a) };
            let lo = if lo - a < 0.25 * (hi - lo) { a } else { lo };
            g.push_mapped(lo, hi, out);
            hi = lo;
        }
    } else {
        panic!("singular point {sing} inside ({a}, {b})");
    }
}
