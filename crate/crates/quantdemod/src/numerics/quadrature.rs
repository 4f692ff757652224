use crate::error::{QuantError, Result};
use crate::numerics::normal_pdf;
use nalgebra::DMatrix;

/// Half-width of the integration window used when the unit-Gaussian weight
/// is handled by panel rules: the tail mass beyond 14 sigma is ~5e-45.
const GAUSS_WINDOW: f64 = 14.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QuadKind {
    /// Nodes and weights for integrals against the unit Gaussian weight;
    /// exact for polynomials up to degree 2n - 1.
    GaussHermite,
    /// A Gauss-Legendre base panel applied adaptively (bisection with
    /// panel-vs-halves error control) to generic integrands.
    AdaptivePanel,
}

/// A fixed set of abscissae and positive weights, plus the integration
/// strategy they belong to.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    kind: QuadKind,
}

/// Nodes and weights of the n-point rule for a weight with Jacobi recurrence
/// coefficients (diag, offdiag) and total mass mu0, via the eigendecomposition
/// of the symmetric tridiagonal Jacobi matrix.
fn golub_welsch(offdiag: &[f64], mu0: f64) -> (Vec<f64>, Vec<f64>) {
    let n = offdiag.len() + 1;
    let mut m = DMatrix::<f64>::zeros(n, n);
    for (i, &b) in offdiag.iter().enumerate() {
        m[(i, i + 1)] = b;
        m[(i + 1, i)] = b;
    }
    let eig = m.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|j| {
            let v0 = eig.eigenvectors[(0, j)];
            (eig.eigenvalues[j], mu0 * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (nodes, weights) = pairs.into_iter().unzip();
    symmetrize(nodes, weights)
}

/// Both weight functions here are even, so nodes come in +- pairs with equal
/// weights; folding each pair onto its mirror removes the asymmetry left by
/// the eigendecomposition (otherwise odd moments come out ~1e-10, not 0).
fn symmetrize(mut nodes: Vec<f64>, mut weights: Vec<f64>) -> (Vec<f64>, Vec<f64>) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let x = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -x;
        nodes[j] = x;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

impl QuadratureRule {
    /// n-point rule for integrals against the unit Gaussian density
    /// (probabilists' convention: the weights sum to 1).
    pub fn gauss_hermite(n: usize) -> Result<Self> {
        Self::check_n(n)?;
        let offdiag: Vec<f64> = (1..n).map(|i| (i as f64).sqrt()).collect();
        let (nodes, weights) = golub_welsch(&offdiag, 1.0);
        let rule = Self { nodes, weights, kind: QuadKind::GaussHermite };
        rule.check_weights()?;
        Ok(rule)
    }

    /// n-point Gauss-Legendre panel on [-1, 1], used adaptively.
    pub fn adaptive_panel(n: usize) -> Result<Self> {
        Self::check_n(n)?;
        let offdiag: Vec<f64> =
            (1..n).map(|i| i as f64 / (4.0 * (i * i) as f64 - 1.0).sqrt()).collect();
        let (nodes, weights) = golub_welsch(&offdiag, 2.0);
        let rule = Self { nodes, weights, kind: QuadKind::AdaptivePanel };
        rule.check_weights()?;
        Ok(rule)
    }

    fn check_n(n: usize) -> Result<()> {
        if n < 16 {
            return Err(QuantError::InvalidParameter(format!(
                "node count {n} below the minimum of 16"
            )));
        }
        Ok(())
    }

    fn check_weights(&self) -> Result<()> {
        if self.weights.iter().any(|&w| !(w > 0.0)) {
            return Err(QuantError::InvalidParameter(
                "quadrature weights must be strictly positive".into(),
            ));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn kind(&self) -> QuadKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// E[f(Y)] for Y standard normal.
    pub fn expect_gaussian<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        match self.kind {
            QuadKind::GaussHermite => {
                self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
            }
            QuadKind::AdaptivePanel => self
                .expect_gaussian_piecewise(&[], f)
                .expect("panel rule integrates the Gaussian weight"),
        }
    }

    /// E[f(Y)] for Y standard normal, with the integration split at the
    /// given breakpoints so piecewise-smooth integrands (e.g. functions of a
    /// quantized output) stay smooth inside each panel. Panel rules only.
    pub fn expect_gaussian_piecewise<F: FnMut(f64) -> f64>(
        &self,
        breaks: &[f64],
        mut f: F,
    ) -> Result<f64> {
        if self.kind != QuadKind::AdaptivePanel {
            return Err(QuantError::InvalidParameter(
                "piecewise Gaussian expectation needs an adaptive-panel rule".into(),
            ));
        }
        let span = breaks.iter().fold(0.0f64, |m, &b| m.max(b.abs())) + GAUSS_WINDOW;
        let mut cuts = Vec::with_capacity(breaks.len() + 2);
        cuts.push(-span);
        cuts.extend(breaks.iter().cloned().filter(|b| b.abs() < span));
        cuts.push(span);
        cuts.sort_by(f64::total_cmp);
        let mut total = 0.0;
        for pair in cuts.windows(2) {
            if pair[1] > pair[0] {
                total += self.integrate(pair[0], pair[1], |y| f(y) * normal_pdf(y))?;
            }
        }
        Ok(total)
    }

    /// Adaptive integral of f over [lo, hi]: the base panel is compared with
    /// its two halves and bisected until the local error estimate falls
    /// below a relative tolerance of 1e-12.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, mut f: F) -> Result<f64> {
        if self.kind != QuadKind::AdaptivePanel {
            return Err(QuantError::InvalidParameter(
                "generic integration needs an adaptive-panel rule".into(),
            ));
        }
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(QuantError::InvalidParameter(format!(
                "integration bounds [{lo}, {hi}] must be finite and ordered"
            )));
        }
        let whole = self.panel(lo, hi, &mut f);
        let tol = 1e-12 * whole.abs().max(1e-3);
        Ok(self.bisect(lo, hi, whole, tol, 48, &mut f))
    }

    fn panel<F: FnMut(f64) -> f64>(&self, lo: f64, hi: f64, f: &mut F) -> f64 {
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let sum: f64 =
            self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(mid + half * x)).sum();
        sum * half
    }

    fn bisect<F: FnMut(f64) -> f64>(
        &self,
        lo: f64,
        hi: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        f: &mut F,
    ) -> f64 {
        let mid = 0.5 * (lo + hi);
        let left = self.panel(lo, mid, f);
        let right = self.panel(mid, hi, f);
        let refined = left + right;
        if depth == 0 || (whole - refined).abs() <= tol {
            return refined;
        }
        self.bisect(lo, mid, left, 0.5 * tol, depth - 1, f)
            + self.bisect(mid, hi, right, 0.5 * tol, depth - 1, f)
    }
}
