//! Finite-difference comparison of `(S_ε - k²)⁻¹` with the resolvent of its
//! ε → 0 limit on a truncated line `[-L, L]` with Dirichlet ends.
//!
//! The grid is staggered: `x_i = -L + i h`, `i = 1..=N`, `h = 2L/(N+1)`,
//! with `N` even, so x = 0 lies halfway between nodes `N/2` and `N/2 + 1`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::potential::PotentialProfile;
use crate::resonance::{classify, Classification};

pub const DEFAULT_HALF_WIDTH: f64 = 20.0;
/// Gives ε/h ≈ 128 at ε = 0.025 with L = 20.
pub const DEFAULT_INTERIOR_NODES: usize = 204_800;
pub const DEFAULT_EPS_LIST: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
/// Smallest admissible ε/h for [`discretize_seps`].
pub const MIN_EPS_OVER_H: f64 = 16.0;
pub const MIN_INTERIOR_NODES: usize = 64;

/// Default spectral parameter k² = i.
pub fn default_k_sq() -> Complex64 {
    Complex64::i()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Grid {
    half_width: f64,
    interior_nodes: usize,
}

impl Grid {
    pub fn new(half_width: f64, interior_nodes: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 1.0) {
            return Err(Error::invalid(format!("grid half-width must exceed 1, got {half_width}")));
        }
        if interior_nodes < MIN_INTERIOR_NODES || !interior_nodes.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "grid needs an even node count of at least {MIN_INTERIOR_NODES}, got {interior_nodes}"
            )));
        }
        Ok(Self { half_width, interior_nodes })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn interior_nodes(&self) -> usize {
        self.interior_nodes
    }

    pub fn h(&self) -> f64 {
        2.0 * self.half_width / (self.interior_nodes + 1) as f64
    }

    /// Node `i` in `0..N`, i.e. `x = -L + (i + 1) h`.
    pub fn node(&self, i: usize) -> f64 {
        -self.half_width + (i + 1) as f64 * self.h()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.interior_nodes).map(|i| self.node(i)).collect()
    }

    /// Indices of the two nodes adjacent to x = 0.
    pub fn interface(&self) -> (usize, usize) {
        let m = self.interior_nodes / 2;
        (m - 1, m)
    }

    /// Discrete L² norm `sqrt(h Σ |f_i|²)`.
    pub fn norm<T: Copy + Into<Complex64>>(&self, f: &[T]) -> f64 {
        (self.h() * f.iter().map(|&z| z.into().norm_sqr()).sum::<f64>()).sqrt()
    }
}

impl Default for Grid {
    fn default() -> Self {
        Self {
            half_width: DEFAULT_HALF_WIDTH,
            interior_nodes: DEFAULT_INTERIOR_NODES,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum OperatorKind {
    Seps { alpha: f64, eps: f64 },
    Coupled { theta: f64 },
    DirichletPair,
}

/// Symmetric tridiagonal matrix: `diag` has length N, `off` holds the
/// N - 1 entries `A[i][i+1] = A[i+1][i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteOperator {
    pub kind: OperatorKind,
    pub grid: Grid,
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl DiscreteOperator {
    pub fn dim(&self) -> usize {
        self.diag.len()
    }

    /// `A x`.
    pub fn apply<T>(&self, x: &[T]) -> Vec<T>
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::ops::Add<Output = T>,
    {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = x[i] * self.diag[i];
                if i > 0 {
                    s = s + x[i - 1] * self.off[i - 1];
                }
                if i + 1 < n {
                    s = s + x[i + 1] * self.off[i];
                }
                s
            })
            .collect()
    }

    /// Dense copy, row-major. Intended for small N.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = self.diag[i];
            if i + 1 < n {
                a[i][i + 1] = self.off[i];
                a[i + 1][i] = self.off[i];
            }
        }
        a
    }

    fn inf_norm(&self) -> f64 {
        let n = self.dim();
        (0..n)
            .map(|i| {
                let mut s = self.diag[i].abs();
                if i > 0 {
                    s += self.off[i - 1].abs();
                }
                if i + 1 < n {
                    s += self.off[i].abs();
                }
                s
            })
            .fold(0.0, f64::max)
    }
}

fn laplacian(grid: &Grid) -> (Vec<f64>, Vec<f64>) {
    let n = grid.interior_nodes();
    let ih2 = 1.0 / (grid.h() * grid.h());
    (vec![2.0 * ih2; n], vec![-ih2; n - 1])
}

/// `-d²/dx² + α ε⁻² Ψ(x/ε)` by central differences.
pub fn discretize_seps(profile: &PotentialProfile, alpha: f64, eps: f64, grid: &Grid) -> Result<DiscreteOperator> {
    if !alpha.is_finite() {
        return Err(Error::invalid(format!("alpha must be finite, got {alpha}")));
    }
    discretize_check(eps, grid)?;
    let (mut diag, off) = laplacian(grid);
    let scale = alpha / (eps * eps);
    if alpha != 0.0 {
        for (i, d) in diag.iter_mut().enumerate() {
            let xi = grid.node(i) / eps;
            if xi.abs() <= 1.0 {
                *d += scale * profile.eval(xi);
            }
        }
    }
    Ok(DiscreteOperator {
        kind: OperatorKind::Seps { alpha, eps },
        grid: *grid,
        diag,
        off,
    })
}

/// The limit operator: S(θ) for a resonance, the Dirichlet pair otherwise.
///
/// For S(θ), the values at the two ghost points across x = 0 are eliminated
/// using the interface conditions `y(0+) = θ y(0-)` and `θ y'(0+) = y'(0-)`
/// with centred differences. The result stays symmetric, and θ = 1 gives
/// back the free stencil.
pub fn discretize_limit(c: &Classification, grid: &Grid) -> DiscreteOperator {
    let (mut diag, mut off) = laplacian(grid);
    let ih2 = 1.0 / (grid.h() * grid.h());
    let (i, j) = grid.interface();
    let kind = match *c {
        Classification::Resonant { theta, .. } => {
            let t2 = theta * theta;
            let den = 1.0 + t2;
            diag[i] -= (1.0 - t2) / den * ih2;
            diag[j] -= (t2 - 1.0) / den * ih2;
            off[i] = -2.0 * theta / den * ih2;
            OperatorKind::Coupled { theta }
        }
        Classification::NonResonant => {
            diag[i] += ih2;
            diag[j] += ih2;
            off[i] = 0.0;
            OperatorKind::DirichletPair
        }
    };
    DiscreteOperator { kind, grid: *grid, diag, off }
}

/// Solves `(op - k²) x = f` by tridiagonal elimination with partial pivoting.
pub fn resolvent_apply(op: &DiscreteOperator, k_sq: Complex64, f: &[f64]) -> Result<Vec<Complex64>> {
    if !(k_sq.re.is_finite() && k_sq.im.is_finite()) || k_sq.im == 0.0 {
        return Err(Error::invalid(format!("k^2 must have a nonzero imaginary part, got {k_sq}")));
    }
    let n = op.dim();
    if f.len() != n {
        return Err(Error::invalid(format!("right-hand side has length {}, operator has {n}", f.len())));
    }
    let mut d: Vec<Complex64> = op.diag.iter().map(|&v| Complex64::new(v, 0.0) - k_sq).collect();
    let mut du: Vec<Complex64> = op.off.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let dl = du.clone();
    let mut du2 = vec![Complex64::new(0.0, 0.0); n.saturating_sub(2)];
    let mut b: Vec<Complex64> = f.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let breakdown = |i: usize| Error::numerical(format!("zero pivot at row {i} in tridiagonal elimination"));

    for i in 0..n.saturating_sub(1) {
        if d[i].norm() >= dl[i].norm() {
            if d[i] == Complex64::new(0.0, 0.0) {
                return Err(breakdown(i));
            }
            let fct = dl[i] / d[i];
            d[i + 1] -= fct * du[i];
            b[i + 1] = b[i + 1] - fct * b[i];
        } else {
            let fct = d[i] / dl[i];
            d[i] = dl[i];
            let tmp = d[i + 1];
            d[i + 1] = du[i] - fct * tmp;
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] = -fct * du2[i];
            }
            du[i] = tmp;
            let bi = b[i];
            b[i] = b[i + 1];
            b[i + 1] = bi - fct * b[i + 1];
        }
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    if d[n - 1] == Complex64::new(0.0, 0.0) {
        return Err(breakdown(n - 1));
    }
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    for i in (0..n).rev() {
        let mut s = b[i];
        if i + 1 < n {
            s -= du[i] * x[i + 1];
        }
        if i + 2 < n {
            s -= du2[i] * x[i + 2];
        }
        x[i] = s / d[i];
    }

    let ax = op.apply(&x);
    let fnorm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
    let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let res = ax
        .iter()
        .zip(&x)
        .zip(f)
        .map(|((a, xi), fi)| (a - k_sq * xi - fi).norm_sqr())
        .sum::<f64>()
        .sqrt();
    let bound = 1e-12 * (fnorm + (op.inf_norm() + k_sq.norm()) * xnorm);
    if !(res <= bound) {
        return Err(Error::numerical(format!(
            "resolvent residual {res:e} exceeds {bound:e}"
        )));
    }
    Ok(x)
}

/// Two Gaussians of width 0.5 centred at ∓1 and a smooth bump supported in
/// (0.5, 1.5), each normalized to unit discrete L² norm.
pub fn default_test_functions(grid: &Grid) -> Vec<Vec<f64>> {
    let x = grid.nodes();
    let gauss = |c: f64| -> Vec<f64> { x.iter().map(|&x| (-((x - c) / 0.5).powi(2)).exp()).collect() };
    let bump: Vec<f64> = x
        .iter()
        .map(|&x| {
            let t = (x - 1.0) / 0.5;
            if t.abs() < 1.0 {
                (-1.0 / (1.0 - t * t)).exp()
            } else {
                0.0
            }
        })
        .collect();
    [gauss(-1.0), gauss(1.0), bump]
        .into_iter()
        .map(|f| {
            let n = grid.norm(&f);
            f.into_iter().map(|v| v / n).collect()
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceEntry {
    pub eps: f64,
    pub error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceReport {
    /// Sorted by decreasing ε.
    pub entries: Vec<ConvergenceEntry>,
    /// Least-squares slope of log(error) against log(ε); NaN when some
    /// error is zero.
    pub fitted_rate: f64,
    pub limit_kind: Classification,
}

/// Classifies α with tolerance `tol`, then compares S_ε against the
/// corresponding limit. For a resonance, S_ε is built at the refined
/// resonant α so that the comparison is not polluted by detuning.
#[allow(clippy::too_many_arguments)]
pub fn study(
    profile: &PotentialProfile,
    alpha: f64,
    eps_list: &[f64],
    grid: &Grid,
    k_sq: Complex64,
    test_functions: &[Vec<f64>],
    tol: f64,
) -> Result<ConvergenceReport> {
    if profile.is_identically_zero() {
        return Err(Error::invalid(
            "the zero profile has no epsilon dependence and is not accepted by the convergence study",
        ));
    }
    let c = classify(profile, alpha, tol)?;
    let alpha_eps = match c {
        Classification::Resonant { alpha, .. } => alpha,
        Classification::NonResonant => alpha,
    };
    study_with_limit(profile, alpha_eps, &c, eps_list, grid, k_sq, test_functions)
}

/// Compares S_ε at the given α against the limit operator of `limit`,
/// without classifying.
pub fn study_with_limit(
    profile: &PotentialProfile,
    alpha: f64,
    limit: &Classification,
    eps_list: &[f64],
    grid: &Grid,
    k_sq: Complex64,
    test_functions: &[Vec<f64>],
) -> Result<ConvergenceReport> {
    if eps_list.len() < 2 {
        return Err(Error::invalid("at least two eps values are needed to fit a rate"));
    }
    if eps_list.windows(2).any(|w| !(w[0] > w[1])) {
        return Err(Error::invalid("eps values must be strictly decreasing"));
    }
    if test_functions.is_empty() {
        return Err(Error::invalid("no test functions given"));
    }
    let n = grid.interior_nodes();
    let mut norms = Vec::with_capacity(test_functions.len());
    for (i, f) in test_functions.iter().enumerate() {
        if f.len() != n {
            return Err(Error::invalid(format!("test function {i} has length {}, grid has {n}", f.len())));
        }
        let nf = grid.norm(f);
        if !(nf > 0.0 && nf.is_finite()) {
            return Err(Error::invalid(format!("test function {i} is zero or not finite")));
        }
        norms.push(nf);
    }
    // Validate every ε before doing any work.
    for &eps in eps_list {
        discretize_check(eps, grid)?;
    }

    let s0 = discretize_limit(limit, grid);
    let reference: Vec<Vec<Complex64>> = test_functions
        .par_iter()
        .map(|f| resolvent_apply(&s0, k_sq, f))
        .collect::<Result<_>>()?;

    let entries: Vec<ConvergenceEntry> = eps_list
        .par_iter()
        .map(|&eps| {
            let se = discretize_seps(profile, alpha, eps, grid)?;
            let mut error: f64 = 0.0;
            for ((f, y0), nf) in test_functions.iter().zip(&reference).zip(&norms) {
                let y = resolvent_apply(&se, k_sq, f)?;
                let diff: Vec<Complex64> = y.iter().zip(y0).map(|(a, b)| a - b).collect();
                error = error.max(grid.norm(&diff) / nf);
            }
            Ok(ConvergenceEntry { eps, error })
        })
        .collect::<Result<_>>()?;

    let fitted_rate = fit_rate(&entries);
    Ok(ConvergenceReport {
        entries,
        fitted_rate,
        limit_kind: *limit,
    })
}

fn discretize_check(eps: f64, grid: &Grid) -> Result<()> {
    if !(eps.is_finite() && eps > 0.0) {
        return Err(Error::invalid(format!("eps must be positive and finite, got {eps}")));
    }
    if eps / grid.h() < MIN_EPS_OVER_H {
        return Err(Error::invalid(format!(
            "eps = {eps} is under-resolved: eps/h = {:.3} < {MIN_EPS_OVER_H}; increase the node count",
            eps / grid.h()
        )));
    }
    Ok(())
}

/// Least-squares slope of log(error) against log(ε).
pub fn fit_rate(entries: &[ConvergenceEntry]) -> f64 {
    if entries.len() < 2 || entries.iter().any(|e| !(e.error > 0.0)) {
        return f64::NAN;
    }
    let pts: Vec<(f64, f64)> = entries.iter().map(|e| (e.eps.ln(), e.error.ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_validation_and_staggering() {
        assert!(Grid::new(1.0, 64).is_err());
        assert!(Grid::new(20.0, 63).is_err());
        assert!(Grid::new(20.0, 32).is_err());
        let g = Grid::new(20.0, 64).unwrap();
        let (i, j) = g.interface();
        assert!((g.node(i) + g.node(j)).abs() < 1e-12);
        assert!(g.node(i) < 0.0 && g.node(j) > 0.0);
        assert!((g.node(0) + 20.0 - g.h()).abs() < 1e-12);
        assert!((g.node(63) - 20.0 + g.h()).abs() < 1e-12);
    }

    #[test]
    fn fit_rate_of_power_law() {
        let e: Vec<_> = [0.2, 0.1, 0.05].iter().map(|&eps: &f64| ConvergenceEntry { eps, error: 3.0 * eps.powf(0.7) }).collect();
        assert!((fit_rate(&e) - 0.7).abs() < 1e-12);
        let z = [ConvergenceEntry { eps: 0.2, error: 0.0 }, ConvergenceEntry { eps: 0.1, error: 0.0 }];
        assert!(fit_rate(&z).is_nan());
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let g = Grid::new(20.0, 64).unwrap();
        let op = discretize_limit(&Classification::NonResonant, &g);
        let x = resolvent_apply(&op, Complex64::i(), &vec![0.0; 64]).unwrap();
        assert!(x.iter().all(|z| *z == Complex64::new(0.0, 0.0)));
    }
}
