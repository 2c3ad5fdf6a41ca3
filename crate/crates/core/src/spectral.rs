//! The spectral potential `lambda(phi) = ln r(A_phi)` and its gradient.
//!
//! The support graph of a nonnegative matrix splits into strongly connected
//! components; the spectral radius is the largest Perron root over the
//! components that carry a cycle, and is zero (so `lambda = -∞`) when there
//! are none. Each cyclic component is balanced by a diagonal similarity in
//! the log domain and then handled by shifted power iteration, whose
//! Collatz–Wielandt bounds `min (Bv)_i / v_i ≤ r ≤ max (Bv)_i / v_i` give a
//! certified residual.

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::matrix::{LogMatrix, Matrix};
use crate::system::{Measure, Potential};
use crate::transfer::TransferOperator;

/// Default tolerance on `lambda`.
pub const DEFAULT_TOL: f64 = 1e-10;
/// Default tolerance for Perron eigenvectors.
pub const EIGENVECTOR_TOL: f64 = 1e-8;

const MAX_POWER_ITERS: usize = 200_000;
const MAX_GELFAND_STEPS: usize = 1 << 20;
const MAX_BALANCE_SWEEPS: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralResult {
    pub lambda: ExtReal,
    pub iterations: usize,
    /// `ln(hi / lo)` of the final Collatz–Wielandt bracket.
    pub residual: f64,
}

/// Strongly connected components of the support graph that contain a cycle,
/// each sorted, ordered by smallest point.
pub(crate) fn cyclic_blocks(m: &LogMatrix) -> Vec<Vec<usize>> {
    let n = m.n();
    let mut g = DiGraph::<(), ()>::with_capacity(n, n);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for i in 0..n {
        for j in 0..n {
            if m.is_edge(i, j) {
                g.add_edge(nodes[j], nodes[i], ());
            }
        }
    }
    let mut blocks: Vec<Vec<usize>> = tarjan_scc(&g)
        .into_iter()
        .map(|c| {
            let mut b: Vec<usize> = c.into_iter().map(|ix| ix.index()).collect();
            b.sort_unstable();
            b
        })
        .filter(|b| b.len() > 1 || m.is_edge(b[0], b[0]))
        .collect();
    blocks.sort_by_key(|b| b[0]);
    blocks
}

/// Log-domain Osborne balancing in the max-norm: returns `s` such that
/// `l(i, j) + s_i − s_j` has comparable row and column maxima.
fn balance(m: &LogMatrix) -> Vec<f64> {
    let n = m.n();
    let mut s = vec![0.0; n];
    if n == 1 {
        return s;
    }
    for _ in 0..MAX_BALANCE_SWEEPS {
        let mut moved = 0.0f64;
        for i in 0..n {
            let mut row = f64::NEG_INFINITY;
            let mut col = f64::NEG_INFINITY;
            for j in (0..n).filter(|&j| j != i) {
                row = row.max(m.get(i, j) + s[i] - s[j]);
                col = col.max(m.get(j, i) + s[j] - s[i]);
            }
            if row.is_finite() && col.is_finite() {
                let d = 0.5 * (col - row);
                s[i] += d;
                moved = moved.max(d.abs());
            }
        }
        if moved < 0.25 {
            break;
        }
    }
    s
}

struct Perron {
    log_rho: f64,
    iterations: usize,
    residual: f64,
    /// `u_y v_y` normalized, when requested.
    gibbs: Option<Vec<f64>>,
}

/// Perron root (and optionally the Gibbs weights) of an irreducible block
/// with a cycle.
fn perron(block: &LogMatrix, tol: f64, with_gibbs: bool) -> Result<Perron> {
    let n = block.n();
    let s = balance(block);
    let mut top = f64::NEG_INFINITY;
    for i in 0..n {
        for j in 0..n {
            top = top.max(block.get(i, j) + s[i] - s[j]);
        }
    }
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push((block.get(i, j) + s[i] - s[j] - top).exp());
        }
    }
    let b = Matrix::from_row_major(n, data);
    let right = shifted_power(&b, tol)?;
    let mut out = Perron {
        log_rho: right.rho.ln() + top,
        iterations: right.iterations,
        residual: right.residual,
        gibbs: None,
    };
    if with_gibbs {
        let mut bt = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                bt.set(j, i, b.get(i, j));
            }
        }
        let left = shifted_power(&bt, tol)?;
        out.iterations += left.iterations;
        out.residual = out.residual.max(left.residual);
        // u_y v_y is invariant under the balancing similarity
        let w: Vec<f64> = left
            .vector
            .iter()
            .zip(&right.vector)
            .map(|(u, v)| u * v)
            .collect();
        let z: f64 = w.iter().sum();
        out.gibbs = Some(w.into_iter().map(|x| x / z).collect());
    }
    Ok(out)
}

struct PowerResult {
    rho: f64,
    iterations: usize,
    residual: f64,
    vector: Vec<f64>,
}

/// Power iteration on `B + c I` with `c` tracking the current estimate of
/// the Perron root; the shift makes periodic blocks primitive without moving
/// the Perron vector.
fn shifted_power(b: &Matrix, tol: f64) -> Result<PowerResult> {
    let n = b.n();
    let tol = tol.max(1e-15);
    let mut v = vec![1.0; n];
    let mut best = f64::NAN;
    for it in 1..=MAX_POWER_ITERS {
        let w = b.mul_vec(&v);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (wi, vi) in w.iter().zip(&v) {
            let r = wi / vi;
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::Convergence {
                what: "power iteration (degenerate iterate)",
                iterations: it,
                best: best.ln(),
            });
        }
        let residual = (hi / lo).ln();
        let est = (lo * hi).sqrt();
        best = est;
        if residual <= tol {
            return Ok(PowerResult {
                rho: est,
                iterations: it,
                residual,
                vector: v,
            });
        }
        let mut top = 0.0f64;
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi + est * *vi;
            top = top.max(*vi);
        }
        for vi in v.iter_mut() {
            *vi /= top;
        }
    }
    Err(Error::Convergence {
        what: "power iteration",
        iterations: MAX_POWER_ITERS,
        best: best.ln(),
    })
}

/// Log spectral radius of a nonnegative matrix given entrywise in log form.
pub(crate) fn log_spectral_radius(m: &LogMatrix, tol: f64) -> Result<SpectralResult> {
    let mut out = SpectralResult {
        lambda: ExtReal::NegInf,
        iterations: 0,
        residual: 0.0,
    };
    for block in cyclic_blocks(m) {
        let p = perron(&m.submatrix(&block), tol, false)?;
        out.lambda = out.lambda.max(ExtReal::Finite(p.log_rho));
        out.iterations += p.iterations;
        out.residual = out.residual.max(p.residual);
    }
    Ok(out)
}

fn check_args(a: &TransferOperator, phi: &Potential, tol: f64) -> Result<()> {
    if phi.len() != a.n_points() {
        return Err(Error::Dimension {
            expected: a.n_points(),
            got: phi.len(),
        });
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    Ok(())
}

/// `lambda(phi)`, the log spectral radius of `A_phi`.
pub fn spectral_potential(
    a: &TransferOperator,
    phi: &Potential,
    tol: f64,
) -> Result<SpectralResult> {
    check_args(a, phi, tol)?;
    log_spectral_radius(&a.twisted_log(phi), tol)
}

/// Shorthand for the value of [`spectral_potential`].
pub fn lambda(a: &TransferOperator, phi: &Potential, tol: f64) -> Result<ExtReal> {
    spectral_potential(a, phi, tol).map(|r| r.lambda)
}

/// `lambda` and Gibbs weights of one irreducible block twisted by `psi`
/// (indexed within the block).
pub(crate) fn block_gibbs(base: &LogMatrix, psi: &[f64], tol: f64) -> Result<(f64, Vec<f64>)> {
    let p = perron(&base.shift_columns(psi), tol, true)?;
    Ok((p.log_rho, p.gibbs.expect("requested")))
}

pub(crate) fn block_lambda(base: &LogMatrix, psi: &[f64], tol: f64) -> Result<f64> {
    perron(&base.shift_columns(psi), tol, false).map(|p| p.log_rho)
}

/// The gradient of `lambda` at `phi`: `mu_y ∝ u_y v_y` from the left and
/// right Perron vectors of `A_phi`. Requires the support graph to be
/// strongly connected.
pub fn gibbs_gradient(a: &TransferOperator, phi: &Potential, tol: f64) -> Result<Measure> {
    check_args(a, phi, tol)?;
    let m = a.twisted_log(phi);
    let blocks = cyclic_blocks(&m);
    if blocks.len() != 1 || blocks[0].len() != a.n_points() {
        return Err(Error::ReducibleOperator);
    }
    let p = perron(&m, (tol * 1e-3).max(1e-14), true)?;
    Ok(Measure::from_unnormalized(p.gibbs.expect("requested")))
}

/// Independent route to `lambda`: `(ln‖M^{2k} 1‖ − ln‖M^k 1‖) / k` with `k` a
/// multiple of every cycle length up to 12, doubled until the estimate
/// moves less than `tol`. Exact up to exponentially small terms on
/// irreducible matrices; no graph analysis or balancing involved.
pub fn gelfand_potential(a: &TransferOperator, phi: &Potential, tol: f64) -> Result<ExtReal> {
    check_args(a, phi, tol)?;
    let lm = a.twisted_log(phi);
    let top = lm.max_entry();
    if top == f64::NEG_INFINITY {
        return Ok(ExtReal::NegInf);
    }
    let n = a.n_points();
    let mut data = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            data.push((lm.get(i, j) - top).exp());
        }
    }
    let m = Matrix::from_row_major(n, data);

    let period = (1..=n.min(12)).fold(1usize, lcm);
    let mut v = vec![1.0; n];
    let mut log_norm = 0.0;
    let mut steps = 0usize;
    let advance = |k: usize, v: &mut Vec<f64>, log_norm: &mut f64| -> bool {
        for _ in 0..k {
            *v = m.mul_vec(v);
            let s = v.iter().copied().fold(0.0, f64::max);
            if s == 0.0 {
                return false;
            }
            *log_norm += s.ln();
            v.iter_mut().for_each(|x| *x /= s);
        }
        true
    };

    let mut k = period;
    if !advance(k, &mut v, &mut log_norm) {
        return Ok(ExtReal::NegInf);
    }
    steps += k;
    let mut prev_est: Option<f64> = None;
    loop {
        let at_k = log_norm;
        if !advance(k, &mut v, &mut log_norm) {
            return Ok(ExtReal::NegInf);
        }
        steps += k;
        let est = (log_norm - at_k) / k as f64;
        if let Some(p) = prev_est {
            if (est - p).abs() < tol {
                return Ok(ExtReal::Finite(est + top));
            }
        }
        if steps >= MAX_GELFAND_STEPS {
            return Err(Error::Convergence {
                what: "Gelfand iteration",
                iterations: steps,
                best: est + top,
            });
        }
        prev_est = Some(est);
        k = steps;
    }
}

fn lcm(a: usize, b: usize) -> usize {
    fn gcd(a: usize, b: usize) -> usize {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    a / gcd(a, b) * b
}

/// Outcome of the five structural checks on `lambda`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct LambdaProperties {
    pub monotonicity: bool,
    pub additive_homogeneity: bool,
    pub lipschitz: bool,
    pub convexity: bool,
    pub strong_invariance: bool,
}

impl LambdaProperties {
    pub const fn uniform(holds: bool) -> Self {
        LambdaProperties {
            monotonicity: holds,
            additive_homogeneity: holds,
            lipschitz: holds,
            convexity: holds,
            strong_invariance: holds,
        }
    }

    /// Property-wise conjunction.
    pub fn and(self, other: Self) -> Self {
        LambdaProperties {
            monotonicity: self.monotonicity && other.monotonicity,
            additive_homogeneity: self.additive_homogeneity && other.additive_homogeneity,
            lipschitz: self.lipschitz && other.lipschitz,
            convexity: self.convexity && other.convexity,
            strong_invariance: self.strong_invariance && other.strong_invariance,
        }
    }

    pub fn all(&self) -> bool {
        self.monotonicity
            && self.additive_homogeneity
            && self.lipschitz
            && self.convexity
            && self.strong_invariance
    }

    pub fn entries(&self) -> [(&'static str, bool); 5] {
        [
            ("monotonicity", self.monotonicity),
            ("additive_homogeneity", self.additive_homogeneity),
            ("lipschitz", self.lipschitz),
            ("convexity", self.convexity),
            ("strong_invariance", self.strong_invariance),
        ]
    }
}

/// Checks monotonicity, additive homogeneity, the Lipschitz bound,
/// convexity and strong delta-invariance of `lambda` at `(phi, psi, t)`.
///
/// Monotonicity is tested on the ordered pairs built from the pointwise
/// max and min of `phi` and `psi`.
pub fn check_lambda_properties(
    a: &TransferOperator,
    phi: &Potential,
    psi: &Potential,
    t: f64,
    tol: f64,
) -> Result<LambdaProperties> {
    check_args(a, phi, tol)?;
    check_args(a, psi, tol)?;
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::Argument(format!("t = {t} is outside [0, 1]")));
    }
    let inner = tol / 10.0;
    let lam = |f: &Potential| lambda(a, f, inner);

    let l_phi = lam(phi)?;
    let l_psi = lam(psi)?;

    let hi = phi.pointwise_max(psi);
    let lo = phi.pointwise_min(psi);
    let l_hi = lam(&hi)?;
    let l_lo = lam(&lo)?;
    let monotonicity = l_phi.le_tol(l_hi, tol)
        && l_psi.le_tol(l_hi, tol)
        && l_lo.le_tol(l_phi, tol)
        && l_lo.le_tol(l_psi, tol);

    let mut additive_homogeneity = true;
    for c in [1.0, -2.5] {
        let shifted = lam(&phi.shift(c))?;
        additive_homogeneity &= shifted.approx_eq(l_phi.add(c), tol);
    }

    let lipschitz = match (l_phi, l_psi) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => (x - y).abs() <= phi.dist(psi) + tol,
        (ExtReal::NegInf, ExtReal::NegInf) => true,
        _ => false,
    };

    let mix = phi.scale(1.0 - t).add(&psi.scale(t));
    let rhs = match (l_phi, l_psi) {
        (ExtReal::Finite(x), ExtReal::Finite(y)) => ExtReal::Finite((1.0 - t) * x + t * y),
        _ if t == 0.0 => l_phi,
        _ if t == 1.0 => l_psi,
        _ => ExtReal::NegInf,
    };
    let convexity = lam(&mix)?.le_tol(rhs, tol);

    let delta_psi = a.system().delta_map(psi)?;
    let strong_invariance = lam(&phi.add(&delta_psi))?.approx_eq(lam(&phi.add(psi))?, tol);

    Ok(LambdaProperties {
        monotonicity,
        additive_homogeneity,
        lipschitz,
        convexity,
        strong_invariance,
    })
}

/// `n lambda(phi, A) ≤ lambda(n phi, A^n) + tol`, where the right side is the
/// log spectral radius of the matrix power `A^n` with columns scaled by
/// `e^{n phi}`.
pub fn check_power_inequality(
    a: &TransferOperator,
    phi: &Potential,
    n: usize,
    tol: f64,
) -> Result<bool> {
    check_args(a, phi, tol)?;
    if n == 0 {
        return Err(Error::Argument("power inequality needs n >= 1".into()));
    }
    let left = lambda(a, phi, tol / 10.0)?.scale(n as f64);
    let power = a
        .matrix_power(n)
        .to_log()
        .shift_columns(phi.scale(n as f64).values());
    let right = log_spectral_radius(&power, tol / 10.0)?.lambda;
    Ok(left.le_tol(right, tol))
}
