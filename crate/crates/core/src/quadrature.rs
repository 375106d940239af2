//! Globally adaptive Gauss–Legendre quadrature on finite intervals.
//!
//! Each interval carries two estimates: the `n`-point rule on the whole
//! interval and the sum of the rules on its two halves. Their difference is
//! the interval's error estimate. The interval with the largest estimate is
//! bisected until the summed estimate drops below tolerance. Integrable
//! endpoint singularities are handled by repeated bisection toward the
//! endpoint (nodes never touch the endpoints).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use thiserror::Error;

pub const DEFAULT_ORDER: usize = 10;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_BUDGET: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadratureError {
    #[error("quadrature budget of {budget} evaluations exhausted (error estimate {error:e}, value {value})")]
    Budget {
        budget: usize,
        error: f64,
        value: f64,
    },
    #[error("integrand is not finite at t = {0}")]
    NonFinite(f64),
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Rule applied on `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(mid + half * x))
            .sum::<f64>()
            * half
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
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
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

struct Interval {
    a: f64,
    b: f64,
    left: f64,
    right: f64,
    error: f64,
}

impl PartialEq for Interval {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Interval {}
impl PartialOrd for Interval {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Interval {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Adaptive integrator with a fixed rule, tolerance and evaluation budget.
#[derive(Debug, Clone)]
pub struct Integrator {
    rule: GaussLegendre,
    pub tol: f64,
    pub budget: usize,
}

impl Default for Integrator {
    fn default() -> Self {
        Self {
            rule: GaussLegendre::new(DEFAULT_ORDER),
            tol: DEFAULT_TOL,
            budget: DEFAULT_BUDGET,
        }
    }
}

impl Integrator {
    pub fn new(order: usize, tol: f64, budget: usize) -> Self {
        Self {
            rule: GaussLegendre::new(order),
            tol,
            budget,
        }
    }

    fn make<F: Fn(f64) -> f64>(&self, f: &F, a: f64, b: f64, whole: f64) -> Interval {
        let m = 0.5 * (a + b);
        let left = self.rule.integrate(f, a, m);
        let right = self.rule.integrate(f, m, b);
        Interval {
            a,
            b,
            left,
            right,
            error: (whole - left - right).abs(),
        }
    }

    /// `∫_a^b f`. Stops once the summed error estimate is below
    /// `tol · max(1, |value|)`.
    pub fn integrate<F: Fn(f64) -> f64>(
        &self,
        f: F,
        a: f64,
        b: f64,
    ) -> Result<Estimate, QuadratureError> {
        let n = self.rule.order();
        let whole = self.rule.integrate(&f, a, b);
        let first = self.make(&f, a, b, whole);
        let mut evaluations = 3 * n;
        let mut heap = BinaryHeap::new();
        heap.push(first);
        loop {
            let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), iv| {
                (v + iv.left + iv.right, e + iv.error)
            });
            if !value.is_finite() {
                let worst = heap.peek().map(|iv| iv.a).unwrap_or(a);
                return Err(QuadratureError::NonFinite(worst));
            }
            if error <= self.tol * value.abs().max(1.0) {
                return Ok(Estimate {
                    value,
                    error,
                    evaluations,
                });
            }
            if evaluations + 4 * n > self.budget {
                return Err(QuadratureError::Budget {
                    budget: self.budget,
                    error,
                    value,
                });
            }
            let worst = heap.pop().expect("heap is never empty");
            let m = 0.5 * (worst.a + worst.b);
            heap.push(self.make(&f, worst.a, m, worst.left));
            heap.push(self.make(&f, m, worst.b, worst.right));
            evaluations += 4 * n;
        }
    }
}
