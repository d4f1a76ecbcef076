//! Composite Gauss-Legendre quadrature on panels, with a cumulative
//! (spectral integration) matrix for integrals that end at interior nodes, and
//! a refinement driver that doubles the panel count until successive results
//! agree.

use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Nodes per panel. Panels are at most half a period of the fastest frequency
/// wide, which gives at least 32 nodes per period.
pub const NODES_PER_PANEL: usize = 16;

/// Relative agreement required between successive refinements.
pub const RELATIVE_TOLERANCE: f64 = 1e-9;

/// Absolute floor, as a fraction of the integral of the absolute integrand.
/// Guards integrals that cancel to (near) zero.
pub const CANCELLATION_FLOOR: f64 = 1e-12;

/// Refinement levels tried before giving up (level 0 is the base partition).
pub const MAX_LEVEL: u32 = 7;

pub(crate) struct GaussLegendre {
    pub nodes: [f64; NODES_PER_PANEL],
    pub weights: [f64; NODES_PER_PANEL],
    /// `cumulative[j][k] = ∫_{-1}^{x_j} ℓ_k(x) dx` for the Lagrange basis `ℓ_k`
    /// on the nodes, so `Σ_k cumulative[j][k] g(x_k) ≈ ∫_{-1}^{x_j} g`.
    pub cumulative: [[f64; NODES_PER_PANEL]; NODES_PER_PANEL],
}

pub(crate) fn rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(GaussLegendre::build)
}

/// Legendre polynomial `P_n(x)` and its derivative.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
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

impl GaussLegendre {
    fn build() -> Self {
        const N: usize = NODES_PER_PANEL;
        let mut nodes = [0.0; N];
        let mut weights = [0.0; N];
        for i in 0..N.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (N as f64 + 0.5)).cos();
            for _ in 0..100 {
                let (p, dp) = legendre(N, x);
                let dx = p / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, dp) = legendre(N, x);
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[N - 1 - i] = x;
            weights[i] = w;
            weights[N - 1 - i] = w;
        }

        let lagrange = |k: usize, y: f64| -> f64 {
            (0..N)
                .filter(|&m| m != k)
                .map(|m| (y - nodes[m]) / (nodes[k] - nodes[m]))
                .product()
        };
        let mut cumulative = [[0.0; N]; N];
        for (j, row) in cumulative.iter_mut().enumerate() {
            let half = 0.5 * (nodes[j] + 1.0);
            for (k, entry) in row.iter_mut().enumerate() {
                // ℓ_k has degree N-1, so the N-point rule on [-1, x_j] is exact.
                *entry = half
                    * (0..N)
                        .map(|i| weights[i] * lagrange(k, -1.0 + half * (nodes[i] + 1.0)))
                        .sum::<f64>();
            }
        }
        Self {
            nodes,
            weights,
            cumulative,
        }
    }
}

/// A partition of `[0, T]` into panels such that every requested break point
/// is a panel edge.
#[derive(Debug, Clone)]
pub(crate) struct Panels {
    /// Panel edges, `edges[0] = start`.
    pub edges: Vec<f64>,
    /// For each break point (in input order), the index of the edge equal to it.
    pub break_edges: Vec<usize>,
}

impl Panels {
    /// Panels covering `[start, max(breaks)]`, no wider than `max_width / 2^level`.
    ///
    /// `breaks` must be sorted ascending and `> start`.
    pub fn with_breaks(start: f64, breaks: &[f64], max_width: f64, level: u32) -> Self {
        let width = max_width / f64::from(1u32 << level);
        let mut edges = vec![start];
        let mut break_edges = Vec::with_capacity(breaks.len());
        let mut left = start;
        for &b in breaks {
            let span = b - left;
            if span > 0.0 {
                let count = (span / width).ceil().max(1.0) as usize;
                for i in 1..count {
                    edges.push(left + span * (i as f64) / (count as f64));
                }
                edges.push(b);
                left = b;
            }
            break_edges.push(edges.len() - 1);
        }
        Self { edges, break_edges }
    }

    pub fn uniform(start: f64, end: f64, max_width: f64, level: u32) -> Self {
        Self::with_breaks(start, &[end], max_width, level)
    }

    /// Integral of `f` over the whole partition.
    pub fn integrate(&self, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
        let gl = rule();
        let mut total = 0.0;
        let mut magnitude = 0.0;
        for w in self.edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let half = 0.5 * (b - a);
            for k in 0..NODES_PER_PANEL {
                let value = f(a + half * (gl.nodes[k] + 1.0)) * gl.weights[k] * half;
                total += value;
                magnitude += value.abs();
            }
        }
        (total, magnitude)
    }
}

/// Successive-refinement driver.
///
/// `evaluate(level)` returns values and, for each value, the integral of the
/// absolute integrand. Refinement stops once two consecutive levels agree to
/// [`RELATIVE_TOLERANCE`] (or to [`CANCELLATION_FLOOR`] times the magnitude)
/// in every component; the finer result is returned.
pub(crate) fn converge<F>(quantity: &'static str, evaluate: F) -> Result<Vec<f64>>
where
    F: FnMut(u32) -> (Vec<f64>, Vec<f64>),
{
    Ok(converge_with_magnitude(quantity, evaluate)?.0)
}

/// [`converge`], also returning the absolute-integrand magnitudes of the
/// accepted level.
pub(crate) fn converge_with_magnitude<F>(
    quantity: &'static str,
    mut evaluate: F,
) -> Result<(Vec<f64>, Vec<f64>)>
where
    F: FnMut(u32) -> (Vec<f64>, Vec<f64>),
{
    let (mut previous, _) = evaluate(0);
    let mut worst = f64::INFINITY;
    for level in 1..=MAX_LEVEL {
        let (current, magnitude) = evaluate(level);
        worst = 0.0;
        let mut ok = true;
        for ((&c, &p), &mag) in current.iter().zip(&previous).zip(&magnitude) {
            let diff = (c - p).abs();
            if !c.is_finite() {
                ok = false;
                worst = f64::INFINITY;
                continue;
            }
            let allowed = RELATIVE_TOLERANCE * c.abs() + CANCELLATION_FLOOR * mag;
            if diff > allowed {
                ok = false;
            }
            let scale = c.abs().max(CANCELLATION_FLOOR / RELATIVE_TOLERANCE * mag);
            if scale > 0.0 {
                worst = worst.max(diff / scale);
            }
        }
        if ok {
            return Ok((current, magnitude));
        }
        previous = current;
    }
    Err(Error::Quadrature {
        quantity,
        achieved: worst,
        target: RELATIVE_TOLERANCE,
    })
}
