//! t-entropy of a measure, by two routes.
//!
//! The direct route evaluates
//! `tau(mu) = inf_n inf_D (1/n) sup_m Σ_{g ∈ D} mu[g] ln(m[A^n g] / mu[g])`
//! over a finite family of partitions `D` and `n ≤ n_max`. The Legendre
//! route minimizes `lambda(phi) − mu[phi]` over potentials. For an invariant
//! measure both give the same number; for a non-invariant one the Legendre
//! objective is unbounded below.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::matrix::LogMatrix;
use crate::spectral::{self, block_gibbs, block_lambda, cyclic_blocks};
use crate::system::{FiniteSystem, Measure, PartitionOfUnity, Potential};
use crate::transfer::TransferOperator;

/// Tolerance used to decide whether a measure is invariant.
pub const INVARIANCE_TOL: f64 = 1e-10;
/// Default certificate tolerance for [`inner_sup`].
pub const INNER_TOL: f64 = 1e-10;
pub const DEFAULT_N_MAX: usize = 8;

const MAX_EM_ITERS: usize = 500_000;
const BLOCK_EIG_TOL: f64 = 1e-13;

/// Solution of the inner supremum for one `(n, D)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InnerSupResult {
    /// `tau_n(mu, D)`.
    pub value: ExtReal,
    /// The maximizing measure `m*`.
    pub optimizer: Measure,
    /// `C_n(mu, g, D) = m*[A^n g]` for every member `g`, in member order.
    pub c_table: Vec<f64>,
    /// `sup_m Σ_{mu[g] > 0} mu[g] m[A^n g] / C_n(g)`; `None` when the value is `-∞`.
    pub certificate: Option<f64>,
    pub iterations: usize,
}

struct Members {
    /// `A^n g`
    images: Vec<Vec<f64>>,
    /// `mu[g]`
    masses: Vec<f64>,
}

fn members(a: &TransferOperator, mu: &Measure, d: &PartitionOfUnity, n: usize) -> Result<Members> {
    let images = d
        .members()
        .iter()
        .map(|g| a.iterate_apply(g, n).map(Potential::into_values))
        .collect::<Result<Vec<_>>>()?;
    let masses = d.members().iter().map(|g| mu.expect(g)).collect();
    Ok(Members { images, masses })
}

fn dims(a: &TransferOperator, len: usize) -> Result<()> {
    if a.n_points() == len {
        Ok(())
    } else {
        Err(Error::Dimension {
            expected: a.n_points(),
            got: len,
        })
    }
}

/// `sup_m Σ_{g ∈ D} mu[g] ln(m[A^n g] / mu[g])` over probability measures `m`.
///
/// Solved by the multiplicative update
/// `m ← m · Σ_g mu[g] A^n g / m[A^n g]`, which preserves the simplex. The
/// iteration stops when `max_x Σ_g mu[g] (A^n g)(x) / m[A^n g]`, the supremum
/// of the linear certificate over all `m`, is within `tol` of one. Summands
/// with `mu[g] = 0` are dropped; a member with `mu[g] > 0` and `A^n g = 0`
/// makes the value `-∞`.
pub fn inner_sup(
    a: &TransferOperator,
    mu: &Measure,
    d: &PartitionOfUnity,
    n: usize,
    tol: f64,
) -> Result<InnerSupResult> {
    dims(a, mu.len())?;
    dims(a, d.n_points())?;
    if n == 0 {
        return Err(Error::Argument("inner supremum needs n >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::Argument(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let Members { images, masses } = members(a, mu, d, n)?;
    let points = a.n_points();
    let active: Vec<usize> = (0..masses.len()).filter(|&g| masses[g] > 0.0).collect();

    let c_of = |m: &Measure| -> Vec<f64> { images.iter().map(|h| m.expect_slice(h)).collect() };

    if active.iter().any(|&g| images[g].iter().all(|&v| v == 0.0)) {
        let m = Measure::uniform(points);
        return Ok(InnerSupResult {
            value: ExtReal::NegInf,
            c_table: c_of(&m),
            optimizer: m,
            certificate: None,
            iterations: 0,
        });
    }

    let value_at = |c: &[f64]| -> f64 {
        active
            .iter()
            .map(|&g| masses[g] * (c[g] / masses[g]).ln())
            .sum()
    };

    let mut m = Measure::uniform(points);
    for it in 1..=MAX_EM_ITERS {
        let c = c_of(&m);
        let mut ratio = vec![0.0; points];
        for &g in &active {
            let coef = masses[g] / c[g];
            for (r, h) in ratio.iter_mut().zip(&images[g]) {
                *r += coef * h;
            }
        }
        let certificate = ratio.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if certificate - 1.0 <= tol {
            return Ok(InnerSupResult {
                value: ExtReal::Finite(value_at(&c)),
                optimizer: m,
                c_table: c,
                certificate: Some(certificate),
                iterations: it,
            });
        }
        let next: Vec<f64> = m.weights().iter().zip(&ratio).map(|(w, r)| w * r).collect();
        m = Measure::from_unnormalized(next);
    }
    Err(Error::Convergence {
        what: "inner supremum",
        iterations: MAX_EM_ITERS,
        best: value_at(&c_of(&m)),
    })
}

/// `Σ_{mu[g] > 0} mu[g] m[A^n g] / c_table[g]` for a probe measure `m`.
///
/// At the optimizer of [`inner_sup`] this is at most one (up to its
/// tolerance) for every probability measure `m`.
pub fn certificate_value(
    a: &TransferOperator,
    mu: &Measure,
    d: &PartitionOfUnity,
    n: usize,
    c_table: &[f64],
    m: &Measure,
) -> Result<f64> {
    dims(a, m.len())?;
    if c_table.len() != d.len() {
        return Err(Error::Dimension {
            expected: d.len(),
            got: c_table.len(),
        });
    }
    let Members { images, masses } = members(a, mu, d, n)?;
    Ok(masses
        .iter()
        .zip(&images)
        .zip(c_table)
        .filter(|((&w, _), _)| w > 0.0)
        .map(|((w, h), c)| w * m.expect_slice(h) / c)
        .sum())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    Direct,
    Legendre,
}

/// One `(n, D)` cell of the direct route.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DirectRow {
    pub n: usize,
    /// 0 is the point partition, then the caller's partitions in order.
    pub partition: usize,
    /// `tau_n(mu, D)`
    pub value: ExtReal,
    /// `tau_n(mu, D) / n`
    pub per_step: ExtReal,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Diagnostics {
    pub iterations: usize,
    /// Sup-norm of the final projected gradient (Legendre route).
    pub gradient_norm: f64,
    /// `lambda(phi) − mu[phi]` at the witness (Legendre route).
    pub objective_at_witness: Option<ExtReal>,
    /// Per-`(n, D)` table (direct route).
    pub table: Vec<DirectRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TauResult {
    pub tau: ExtReal,
    pub route: Route,
    pub witness_phi: Option<Potential>,
    pub diagnostics: Diagnostics,
}

/// t-entropy from its definition, with the infimum over partitions taken over
/// the point partition followed by `extra_partitions`, and the infimum over
/// `n` truncated at `n_max`. Requires an invariant measure.
pub fn tau_direct(
    a: &TransferOperator,
    mu: &Measure,
    n_max: usize,
    extra_partitions: &[PartitionOfUnity],
) -> Result<TauResult> {
    dims(a, mu.len())?;
    if n_max == 0 {
        return Err(Error::Argument("n_max must be at least 1".into()));
    }
    if !a.system().is_invariant(mu, INVARIANCE_TOL) {
        return Err(Error::NotInvariant(
            "the direct definition applies to invariant measures only, use tau_legendre".into(),
        ));
    }
    let point = a.system().point_partition();
    let partitions: Vec<&PartitionOfUnity> = std::iter::once(&point)
        .chain(extra_partitions.iter())
        .collect();

    let mut tau = None::<ExtReal>;
    let mut diagnostics = Diagnostics::default();
    for n in 1..=n_max {
        for (k, d) in partitions.iter().enumerate() {
            let r = inner_sup(a, mu, d, n, INNER_TOL)?;
            diagnostics.iterations += r.iterations;
            let per_step = r.value.scale(1.0 / n as f64);
            tau = Some(tau.map_or(per_step, |t| t.min(per_step)));
            diagnostics.table.push(DirectRow {
                n,
                partition: k,
                value: r.value,
                per_step,
            });
        }
    }
    Ok(TauResult {
        tau: tau.expect("n_max >= 1"),
        route: Route::Direct,
        witness_phi: None,
        diagnostics,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LegendreOptions {
    /// Stop when the projected gradient's sup-norm falls below this.
    pub tol: f64,
    pub max_iters: usize,
    /// The `-∞` branch is reported only after the objective is seen below
    /// `-divergence_bound`.
    pub divergence_bound: f64,
}

impl Default for LegendreOptions {
    fn default() -> Self {
        LegendreOptions {
            tol: 1e-8,
            max_iters: 10_000,
            divergence_bound: 1e6,
        }
    }
}

/// `lambda(phi) − mu[phi]`.
pub fn legendre_objective(
    a: &TransferOperator,
    mu: &Measure,
    phi: &Potential,
    tol: f64,
) -> Result<ExtReal> {
    dims(a, mu.len())?;
    Ok(spectral::lambda(a, phi, tol)?.add(-mu.expect(phi)))
}

/// t-entropy as `inf_phi (lambda(phi) − mu[phi])`, for any probability `mu`.
///
/// Non-invariant measures, and invariant ones charging points that lie on
/// no cycle of the support graph, get `-∞` after the objective is driven
/// below `-divergence_bound` along an explicit direction.
///
/// Otherwise the support graph's cyclic components `B` are solved
/// separately: `lambda` is the maximum of the component potentials, which
/// are smooth, so each `inf_psi lambda_B(psi) − nu_B[psi]` with
/// `nu_B = mu|_B / mu(B)` is found by gradient descent in the mean-zero
/// gauge with backtracking, and `tau = Σ_B mu(B) tau_B`. The witness shifts
/// each charged component by a constant so that all of them tie at the top.
pub fn tau_legendre(
    a: &TransferOperator,
    mu: &Measure,
    opts: &LegendreOptions,
) -> Result<TauResult> {
    dims(a, mu.len())?;
    if !(opts.tol > 0.0) {
        return Err(Error::Argument(format!(
            "tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let n = a.n_points();
    let sys = a.system();

    if !sys.is_invariant(mu, INVARIANCE_TOL) {
        let d = divergence_direction(sys, mu)?;
        return certify_divergence(a, mu, &d, opts);
    }

    let zero = Potential::zeros(n);
    if spectral::lambda(a, &zero, spectral::DEFAULT_TOL)? == ExtReal::NegInf {
        return Ok(TauResult {
            tau: ExtReal::NegInf,
            route: Route::Legendre,
            witness_phi: Some(zero),
            diagnostics: Diagnostics {
                objective_at_witness: Some(ExtReal::NegInf),
                ..Diagnostics::default()
            },
        });
    }

    let base = a.twisted_log(&zero);
    let blocks = cyclic_blocks(&base);
    let mut on_cycle = vec![false; n];
    for b in &blocks {
        for &x in b {
            on_cycle[x] = true;
        }
    }
    let stray: Vec<usize> = (0..n)
        .filter(|&x| !on_cycle[x] && mu.weights()[x] > 0.0)
        .collect();
    if !stray.is_empty() {
        // lambda ignores these points, so raising phi there is free
        let mut d = vec![0.0; n];
        for x in stray {
            d[x] = 1.0;
        }
        return certify_divergence(a, mu, &Potential::from_vec(d), opts);
    }

    let mut diagnostics = Diagnostics::default();
    let mut solved = Vec::new();
    let mut idle = Vec::new();
    let mut upper = 0.0;
    for b in &blocks {
        let sub = base.submatrix(b);
        let mass: f64 = b.iter().map(|&x| mu.weights()[x]).sum();
        if mass > 0.0 {
            let nu: Vec<f64> = b.iter().map(|&x| mu.weights()[x] / mass).collect();
            let sol = descend(&sub, &nu, opts).map_err(|e| match e {
                Error::Convergence {
                    what,
                    iterations,
                    best,
                } => Error::Convergence {
                    what,
                    iterations,
                    best: upper + mass * best,
                },
                e => e,
            })?;
            upper += mass * sol.value;
            diagnostics.iterations += sol.iterations;
            diagnostics.gradient_norm = diagnostics.gradient_norm.max(sol.gradient_norm);
            solved.push((b, sol));
        } else {
            idle.push((b, block_lambda(&sub, &vec![0.0; b.len()], BLOCK_EIG_TOL)?));
        }
    }

    let top = solved
        .iter()
        .map(|(_, s)| s.lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut phi = vec![0.0; n];
    for (b, s) in &solved {
        for (&x, p) in b.iter().zip(&s.psi) {
            phi[x] = p + (top - s.lambda);
        }
    }
    for (b, l) in &idle {
        let shift = (top - l).min(0.0);
        for &x in b.iter() {
            phi[x] = shift;
        }
    }
    let phi = Potential::from_vec(phi);
    let tau = legendre_objective(a, mu, &phi, BLOCK_EIG_TOL)?;
    diagnostics.objective_at_witness = Some(tau);
    Ok(TauResult {
        tau,
        route: Route::Legendre,
        witness_phi: Some(phi),
        diagnostics,
    })
}

struct BlockSolution {
    psi: Vec<f64>,
    lambda: f64,
    value: f64,
    iterations: usize,
    gradient_norm: f64,
}

fn descend(base: &LogMatrix, nu: &[f64], opts: &LegendreOptions) -> Result<BlockSolution> {
    let m = nu.len();
    let dot = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).map(|(a, b)| a * b).sum() };
    let mut psi = vec![0.0; m];
    let (mut lam, mut gibbs) = block_gibbs(base, &psi, BLOCK_EIG_TOL)?;
    let mut value = lam - dot(nu, &psi);

    for it in 0..opts.max_iters {
        let mut grad: Vec<f64> = gibbs.iter().zip(nu).map(|(g, v)| g - v).collect();
        let mean = grad.iter().sum::<f64>() / m as f64;
        grad.iter_mut().for_each(|g| *g -= mean);
        let norm = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
        let done = |iterations| BlockSolution {
            psi: psi.clone(),
            lambda: lam,
            value,
            iterations,
            gradient_norm: norm,
        };
        if norm < opts.tol {
            return Ok(done(it));
        }
        let sq = dot(&grad, &grad);
        let mut step = 1.0;
        let accepted = loop {
            let cand: Vec<f64> = psi.iter().zip(&grad).map(|(p, g)| p - step * g).collect();
            let (l, g) = block_gibbs(base, &cand, BLOCK_EIG_TOL)?;
            let v = l - dot(nu, &cand);
            if v <= value - 1e-4 * step * sq {
                break Some((cand, l, g, v));
            }
            step *= 0.5;
            if step < 1e-20 {
                break None;
            }
        };
        match accepted {
            Some((cand, l, g, v)) => {
                psi = cand;
                lam = l;
                gibbs = g;
                value = v;
            }
            // no descent left at working precision
            None if norm < opts.tol.sqrt() => return Ok(done(it)),
            None => {
                return Err(Error::Convergence {
                    what: "Legendre descent (line search)",
                    iterations: it,
                    best: value,
                })
            }
        }
    }
    Err(Error::Convergence {
        what: "Legendre descent",
        iterations: opts.max_iters,
        best: value,
    })
}

/// Walks `t d` until `lambda(t d) − t mu[d] < -divergence_bound`.
fn certify_divergence(
    a: &TransferOperator,
    mu: &Measure,
    d: &Potential,
    opts: &LegendreOptions,
) -> Result<TauResult> {
    let slope = mu.expect(d);
    debug_assert!(slope > 0.0);
    let l0 = spectral::lambda(a, &Potential::zeros(a.n_points()), spectral::DEFAULT_TOL)?;
    let base = l0.finite().unwrap_or(0.0).max(0.0);
    let mut t = 2.0 * (opts.divergence_bound + base + 1.0) / slope;
    let target = ExtReal::Finite(-opts.divergence_bound);
    let mut last = ExtReal::NegInf;
    for doubling in 0..64 {
        let witness = d.scale(t);
        last = legendre_objective(a, mu, &witness, spectral::DEFAULT_TOL)?;
        if last < target {
            return Ok(TauResult {
                tau: ExtReal::NegInf,
                route: Route::Legendre,
                witness_phi: Some(witness),
                diagnostics: Diagnostics {
                    iterations: doubling + 1,
                    objective_at_witness: Some(last),
                    ..Diagnostics::default()
                },
            });
        }
        t *= 2.0;
    }
    Err(Error::Convergence {
        what: "divergence certificate",
        iterations: 64,
        best: last.to_f64(),
    })
}

/// A coboundary direction `d = s (delta psi − psi)`, with `psi` a point
/// indicator and `s = ±1`, along which `mu[d] > 0`. The point is the first
/// one maximizing `|(alpha_* mu)(x) − mu(x)|`.
pub fn divergence_direction(sys: &FiniteSystem, mu: &Measure) -> Result<Potential> {
    let pushed = sys.pushforward(mu)?;
    let mut best = (0usize, 0.0f64);
    for (x, (p, m)) in pushed.weights().iter().zip(mu.weights()).enumerate() {
        let diff = p - m;
        if diff.abs() > best.1.abs() {
            best = (x, diff);
        }
    }
    let (x, diff) = best;
    if diff.abs() <= INVARIANCE_TOL {
        return Err(Error::NoDirection);
    }
    let psi = Potential::indicator(sys.n_points(), x);
    let cob = sys.delta_map(&psi)?.sub(&psi);
    Ok(cob.scale(diff.signum()))
}

/// `phi_eps = (1/n) ln( Σ_{mu[g] > 0} mu[g] / C_n(g) · g + Σ_{mu[g] = 0} eps · g )`.
pub fn phi_eps_witness(
    a: &TransferOperator,
    mu: &Measure,
    d: &PartitionOfUnity,
    n: usize,
    c_table: &[f64],
    eps: f64,
) -> Result<Potential> {
    dims(a, mu.len())?;
    dims(a, d.n_points())?;
    if n == 0 {
        return Err(Error::Argument("witness needs n >= 1".into()));
    }
    if !(eps > 0.0) {
        return Err(Error::Argument(format!("eps must be positive, got {eps}")));
    }
    if c_table.len() != d.len() {
        return Err(Error::Dimension {
            expected: d.len(),
            got: c_table.len(),
        });
    }
    let mut arg = vec![0.0; a.n_points()];
    for (k, g) in d.members().iter().enumerate() {
        let mass = mu.expect(g);
        let coef = if mass > 0.0 {
            if !(c_table[k] > 0.0) {
                return Err(Error::Argument(format!(
                    "C_n of member {k} is {} although mu[g] > 0; the inner supremum is -inf",
                    c_table[k]
                )));
            }
            mass / c_table[k]
        } else {
            eps
        };
        for (s, v) in arg.iter_mut().zip(g.values()) {
            *s += coef * v;
        }
    }
    if let Some(x) = arg.iter().position(|&v| !(v > 0.0 && v.is_finite())) {
        return Err(Error::DegenerateSupport(x));
    }
    Ok(Potential::from_vec(
        arg.into_iter().map(|v| v.ln() / n as f64).collect(),
    ))
}

/// The two bounds satisfied by [`phi_eps_witness`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessBounds {
    /// `n lambda(phi_eps)`
    pub n_lambda: ExtReal,
    /// `eps ‖A^n‖`
    pub lambda_cap: f64,
    /// `mu[n phi_eps]`
    pub n_mean: f64,
    /// `-tau_n(mu, D)`
    pub mean_floor: f64,
    pub lambda_ok: bool,
    pub mean_ok: bool,
}

pub fn check_witness_bounds(
    a: &TransferOperator,
    mu: &Measure,
    n: usize,
    phi_eps: &Potential,
    tau_n: f64,
    eps: f64,
    tol: f64,
) -> Result<WitnessBounds> {
    let n_lambda = spectral::lambda(a, phi_eps, (tol * 0.01).max(1e-14))?.scale(n as f64);
    let lambda_cap = eps * a.power_norm(n);
    let n_mean = mu.expect(phi_eps) * n as f64;
    let mean_floor = -tau_n;
    Ok(WitnessBounds {
        n_lambda,
        lambda_cap,
        n_mean,
        mean_floor,
        lambda_ok: n_lambda.le_tol(ExtReal::Finite(lambda_cap), tol),
        mean_ok: n_mean >= mean_floor - tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sys2_op(a: f64, b: f64) -> TransferOperator {
        TransferOperator::new(
            FiniteSystem::new(vec![1, 0]).unwrap(),
            &[(0, 1, a), (1, 0, b)],
        )
        .unwrap()
    }
    fn nilp2() -> TransferOperator {
        TransferOperator::new(FiniteSystem::new(vec![0, 0]).unwrap(), &[(0, 1, 1.0)]).unwrap()
    }
    fn sysd4() -> TransferOperator {
        TransferOperator::new(
            FiniteSystem::new(vec![0, 2, 0, 2]).unwrap(),
            &[(0, 0, 1.0), (2, 1, 1.0), (0, 2, 1.0), (2, 3, 1.0)],
        )
        .unwrap()
    }
    fn diag3(w: [f64; 3]) -> TransferOperator {
        TransferOperator::new(
            FiniteSystem::new(vec![0, 1, 2]).unwrap(),
            &[(0, 0, w[0]), (1, 1, w[1]), (2, 2, w[2])],
        )
        .unwrap()
    }
    fn meas(v: &[f64]) -> Measure {
        Measure::new(v.to_vec()).unwrap()
    }
    fn fin(x: ExtReal) -> f64 {
        x.finite().expect("finite")
    }

    /// Grid search over the 1-simplex for a two-point inner supremum.
    fn grid_inner_sup(a: &TransferOperator, mu: &Measure, n: usize) -> f64 {
        let d = a.system().point_partition();
        let Members { images, masses } = members(a, mu, &d, n).unwrap();
        let mut best = f64::NEG_INFINITY;
        for i in 0..=20_000 {
            let p = i as f64 / 20_000.0;
            let m = [p, 1.0 - p];
            let v: f64 = (0..2)
                .filter(|&g| masses[g] > 0.0)
                .map(|g| {
                    let c = m[0] * images[g][0] + m[1] * images[g][1];
                    masses[g] * (c / masses[g]).ln()
                })
                .sum();
            best = best.max(v);
        }
        best
    }

    #[test]
    fn inner_sup_two_cycle() {
        let (a, b) = (2.0, 5.0);
        let op = sys2_op(a, b);
        let mu = Measure::uniform(2);
        let r = inner_sup(&op, &mu, &op.system().point_partition(), 1, 1e-12).unwrap();
        assert!((fin(r.value) - 0.5 * (a * b).ln()).abs() < 1e-12);
        assert!(r.optimizer.dist(&Measure::uniform(2)) < 1e-12);
        assert!((r.c_table[0] - b / 2.0).abs() < 1e-12);
        assert!((r.c_table[1] - a / 2.0).abs() < 1e-12);
        assert!((r.certificate.unwrap() - 1.0).abs() < 1e-12);
        let grid = grid_inner_sup(&op, &mu, 1);
        assert!((grid - fin(r.value)).abs() < 1e-6);
    }

    #[test]
    fn inner_sup_vertex_optimum() {
        let op = sys2_op(1.0, 3.0);
        let mu = Measure::point_mass(2, 0);
        let r = inner_sup(&op, &mu, &op.system().point_partition(), 1, 1e-12).unwrap();
        assert!((fin(r.value) - 3f64.ln()).abs() < 1e-12);
        assert!(r.optimizer.dist(&Measure::point_mass(2, 1)) < 1e-12);
        assert!((grid_inner_sup(&op, &mu, 1) - 3f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn inner_sup_neg_inf_convention() {
        let op = nilp2();
        let r = inner_sup(
            &op,
            &Measure::point_mass(2, 0),
            &op.system().point_partition(),
            1,
            1e-10,
        )
        .unwrap();
        assert_eq!(r.value, ExtReal::NegInf);
        assert_eq!(r.certificate, None);
    }

    #[test]
    fn direct_route_examples() {
        let op = sys2_op(2.0, 3.0);
        let r = tau_direct(&op, &Measure::uniform(2), 4, &[]).unwrap();
        assert!((fin(r.tau) - 0.5 * 6f64.ln()).abs() < 1e-12);
        for row in &r.diagnostics.table {
            assert!((fin(row.per_step) - 0.5 * 6f64.ln()).abs() < 1e-12);
        }
        let r = tau_direct(&sysd4(), &Measure::point_mass(4, 0), 4, &[]).unwrap();
        assert!(fin(r.tau).abs() < 1e-12);
        let r = tau_direct(&nilp2(), &Measure::point_mass(2, 0), 4, &[]).unwrap();
        assert_eq!(r.tau, ExtReal::NegInf);
        assert!(matches!(
            tau_direct(&op, &Measure::point_mass(2, 0), 4, &[]),
            Err(Error::NotInvariant(_))
        ));
    }

    #[test]
    fn legendre_route_examples() {
        let opts = LegendreOptions::default();
        let op = sys2_op(2.0, 3.0);
        let r = tau_legendre(&op, &Measure::uniform(2), &opts).unwrap();
        assert!((fin(r.tau) - 0.5 * 6f64.ln()).abs() < 1e-12);

        let r = tau_legendre(&sys2_op(1.0, 1.0), &meas(&[1.0, 0.0]), &opts).unwrap();
        assert_eq!(r.tau, ExtReal::NegInf);
        assert!(r.diagnostics.objective_at_witness.unwrap() < ExtReal::Finite(-1e6));

        let p = [0.2, 0.3, 0.5];
        let r = tau_legendre(&diag3([1.0, 2.0, 3.0]), &meas(&p), &opts).unwrap();
        let expect = 0.3 * 2f64.ln() + 0.5 * 3f64.ln();
        assert!((fin(r.tau) - expect).abs() < 1e-12);

        let r = tau_legendre(&nilp2(), &Measure::point_mass(2, 0), &opts).unwrap();
        assert_eq!(r.tau, ExtReal::NegInf);
    }

    #[test]
    fn legendre_witness_keeps_zero_when_optimal() {
        let opts = LegendreOptions::default();
        let r = tau_legendre(&diag3([1.0, 2.0, 3.0]), &Measure::point_mass(3, 2), &opts).unwrap();
        assert_eq!(r.witness_phi.unwrap(), Potential::zeros(3));
        let r = tau_legendre(&diag3([1.0, 2.0, 3.0]), &Measure::point_mass(3, 0), &opts).unwrap();
        let w = r.witness_phi.unwrap();
        assert_eq!(w.values()[0], 0.0);
        assert!((w.values()[1] + 2f64.ln()).abs() < 1e-12);
        assert!((w.values()[2] + 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn stray_mass_diverges() {
        // the fixed point 0 carries no weight, so delta_0 charges a point off
        // every cycle of the support graph
        let sys = FiniteSystem::new(vec![0, 0]).unwrap();
        let op = TransferOperator::new(sys, &[(0, 0, 0.0), (0, 1, 2.0)]).unwrap();
        let r = tau_legendre(&op, &Measure::point_mass(2, 0), &LegendreOptions::default()).unwrap();
        assert_eq!(r.tau, ExtReal::NegInf);
        // a system whose lambda is finite but mu sits off the cycle
        let sys = FiniteSystem::new(vec![0, 1]).unwrap();
        let op = TransferOperator::new(sys, &[(1, 1, 2.0)]).unwrap();
        let r = tau_legendre(&op, &Measure::uniform(2), &LegendreOptions::default()).unwrap();
        assert_eq!(r.tau, ExtReal::NegInf);
        assert!(r.diagnostics.objective_at_witness.unwrap() < ExtReal::Finite(-1e6));
    }

    #[test]
    fn divergence_direction_examples() {
        let sys2 = FiniteSystem::new(vec![1, 0]).unwrap();
        let d = divergence_direction(&sys2, &meas(&[1.0, 0.0])).unwrap();
        assert_eq!(d.values(), &[1.0, -1.0]);
        let sysd4 = FiniteSystem::new(vec![0, 2, 0, 2]).unwrap();
        let d = divergence_direction(&sysd4, &meas(&[0.0, 1.0, 0.0, 0.0])).unwrap();
        assert_eq!(d.values(), &[0.0, 1.0, 0.0, 0.0]);
        assert_eq!(
            divergence_direction(&sys2, &Measure::uniform(2)),
            Err(Error::NoDirection)
        );
    }

    #[test]
    fn witness_two_cycle() {
        let (a, b) = (2.0, 5.0);
        let op = sys2_op(a, b);
        let mu = Measure::uniform(2);
        let d = op.system().point_partition();
        let r = inner_sup(&op, &mu, &d, 1, 1e-12).unwrap();
        let w = phi_eps_witness(&op, &mu, &d, 1, &r.c_table, 0.1).unwrap();
        assert!((w.values()[0] + b.ln()).abs() < 1e-12);
        assert!((w.values()[1] + a.ln()).abs() < 1e-12);
        // no zero-mass members, so eps does not matter
        assert_eq!(
            w,
            phi_eps_witness(&op, &mu, &d, 1, &r.c_table, 7.0).unwrap()
        );
        let bounds = check_witness_bounds(&op, &mu, 1, &w, fin(r.value), 0.1, 1e-9).unwrap();
        assert!(bounds.lambda_ok && bounds.mean_ok, "{bounds:?}");
        assert!(fin(bounds.n_lambda).abs() < 1e-12);
    }

    #[test]
    fn witness_eps_terms_on_zero_mass_members() {
        let op = sysd4();
        let mu = Measure::point_mass(4, 0);
        let d = op.system().point_partition();
        let r = inner_sup(&op, &mu, &d, 1, 1e-12).unwrap();
        let w = phi_eps_witness(&op, &mu, &d, 1, &r.c_table, 0.1).unwrap();
        assert!(w.values()[0].abs() < 1e-12);
        for x in 1..4 {
            assert!((w.values()[x] - 0.1f64.ln()).abs() < 1e-12);
        }
        assert!(phi_eps_witness(&op, &mu, &d, 1, &r.c_table, 0.0).is_err());
        assert!(phi_eps_witness(&op, &mu, &d, 1, &[0.0, 1.0, 1.0, 1.0], 0.1).is_err());
    }
}
