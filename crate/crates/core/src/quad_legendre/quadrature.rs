use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Evaluates the Legendre polynomial `L_k` and its derivative at `x`.
///
/// Uses the three-term recurrence for the value and
/// `L'_{n+1} = L'_{n-1} + (2n+1) L_n` for the derivative, which stays
/// accurate up to the endpoints.
pub fn legendre_eval(k: usize, x: f64) -> Result<(f64, f64)> {
    if x.is_nan() || x.abs() > 1.0 + 1e-12 {
        return Err(Error::Domain { x });
    }
    Ok(legendre_unchecked(k, x))
}

pub(crate) fn legendre_unchecked(k: usize, x: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let (mut p_prev, mut p) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for n in 1..k {
        let nf = n as f64;
        let p_next = ((2.0 * nf + 1.0) * x * p - nf * p_prev) / (nf + 1.0);
        let d_next = d_prev + (2.0 * nf + 1.0) * p;
        p_prev = p;
        p = p_next;
        d_prev = d;
        d = d_next;
    }
    (p, d)
}

/// Values of `L_0 .. L_{n-1}` and their derivatives at `x`.
pub(crate) fn legendre_all(n: usize, x: f64) -> (Vec<f64>, Vec<f64>) {
    let mut vals = vec![0.0; n];
    let mut ders = vec![0.0; n];
    if n == 0 {
        return (vals, ders);
    }
    vals[0] = 1.0;
    if n > 1 {
        vals[1] = x;
        ders[1] = 1.0;
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        vals[k + 1] = ((2.0 * kf + 1.0) * x * vals[k] - kf * vals[k - 1]) / (kf + 1.0);
        ders[k + 1] = ders[k - 1] + (2.0 * kf + 1.0) * vals[k];
    }
    (vals, ders)
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to `f`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Builds the `n`-point Gauss-Legendre rule.
///
/// Nodes are the roots of `L_n`, found by Newton iteration from
/// Chebyshev-type initial guesses; the negative half is mirrored from the
/// positive half so the rule is exactly symmetric.
pub fn gauss_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::InvalidArgument("quadrature needs at least one node".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let half = n / 2;
    let nf = n as f64;
    for i in 0..half {
        // i-th largest root
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut deriv = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_unchecked(n, x);
            let dx = p / d;
            x -= dx;
            deriv = d;
            if dx.abs() <= NEWTON_TOL * x.abs().max(1.0) {
                break;
            }
        }
        let (_, d) = legendre_unchecked(n, x);
        if d.is_finite() {
            deriv = d;
        }
        let w = 2.0 / ((1.0 - x * x) * deriv * deriv);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let (_, d) = legendre_unchecked(n, 0.0);
        nodes[half] = 0.0;
        weights[half] = 2.0 / (d * d);
    }
    Ok(QuadratureRule { nodes, weights })
}
