//! Exponential bounds on `‖A^n χ_n‖` for indicators of the points whose
//! empirical measures fall in a neighborhood of `mu`.
//!
//! The neighborhood is the half-space `{nu : lambda(phi*) − nu[phi*] < tau + eps/3}`
//! for a near-minimizer `phi*` of `lambda(phi) − mu[phi]`, so a point `x` is
//! in `X_n` exactly when `S_n phi*(x) > n · threshold`. On a finite set the
//! indicator of `X_n` is itself continuous and serves as the majorant.
//!
//! When `tau(mu) = -∞` the rate `tau + eps` is replaced by `-1/eps`; this
//! module then works with the effective entropy `-1/eps − eps`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::matrix::LogMatrix;
use crate::spectral;
use crate::system::{FiniteSystem, Measure, Potential};
use crate::tentropy::{legendre_objective, tau_legendre, LegendreOptions, INVARIANCE_TOL};
use crate::transfer::TransferOperator;

/// Rows produced by default: `n = 1..=40`.
pub const DEFAULT_ROWS: usize = 40;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstConfig {
    pub mu: Measure,
    pub eps: f64,
    pub n_range: Vec<usize>,
    pub phi_star: Potential,
    /// `tau(mu)`, possibly `-∞`.
    pub tau: ExtReal,
    /// `tau(mu)` if finite, else `-1/eps − eps`.
    pub tau_effective: f64,
    /// `lambda(phi*)` if finite; otherwise `mu[phi*] + tau_effective`, a
    /// finite upper bound that the argument can use in its place.
    pub lambda_star: f64,
    /// `lambda_star − tau_effective − eps/3`.
    pub threshold: f64,
    /// `tau + eps`, or `-1/eps`.
    pub rate_target: f64,
}

impl EstConfig {
    /// Builds the configuration around a given `phi*`, which must satisfy
    /// `lambda(phi*) − mu[phi*] < tau_effective + eps/3`.
    pub fn from_witness(
        a: &TransferOperator,
        mu: &Measure,
        tau: ExtReal,
        eps: f64,
        n_range: Vec<usize>,
        phi_star: Potential,
    ) -> Result<Self> {
        check_eps(eps)?;
        if n_range.contains(&0) {
            return Err(Error::Argument("n_range entries must be >= 1".into()));
        }
        let tau_effective = tau.finite().unwrap_or(-1.0 / eps - eps);
        let lam = spectral::lambda(a, &phi_star, spectral::DEFAULT_TOL)?;
        let objective = lam.add(-mu.expect(&phi_star));
        if objective >= ExtReal::Finite(tau_effective + eps / 3.0) {
            return Err(Error::Argument(format!(
                "phi* has objective {objective}, not below tau + eps/3 = {}",
                tau_effective + eps / 3.0
            )));
        }
        let lambda_star = lam.finite().unwrap_or(mu.expect(&phi_star) + tau_effective);
        Ok(EstConfig {
            mu: mu.clone(),
            eps,
            n_range,
            phi_star,
            tau,
            tau_effective,
            lambda_star,
            threshold: lambda_star - tau_effective - eps / 3.0,
            rate_target: tau_effective + eps,
        })
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::Argument(format!("eps must be positive, got {eps}")))
    }
}

/// Picks `phi*` from the Legendre route and builds the neighborhood.
pub fn build_neighborhood(
    a: &TransferOperator,
    mu: &Measure,
    eps: f64,
    n_range: Vec<usize>,
) -> Result<EstConfig> {
    check_eps(eps)?;
    if !a.system().is_invariant(mu, INVARIANCE_TOL) {
        return Err(Error::NotInvariant(
            "the neighborhood is built around an invariant measure".into(),
        ));
    }
    let opts = LegendreOptions::default();
    let leg = tau_legendre(a, mu, &opts)?;
    let mut phi = leg
        .witness_phi
        .unwrap_or_else(|| Potential::zeros(a.n_points()));
    if leg.tau == ExtReal::NegInf {
        // push further along the witness until below -1/eps − 2 eps/3
        let target = ExtReal::Finite(-1.0 / eps - 2.0 * eps / 3.0);
        let mut tries = 0;
        while legendre_objective(a, mu, &phi, spectral::DEFAULT_TOL)? >= target {
            tries += 1;
            if tries > 64 {
                return Err(Error::Convergence {
                    what: "neighborhood witness",
                    iterations: tries,
                    best: legendre_objective(a, mu, &phi, spectral::DEFAULT_TOL)?.to_f64(),
                });
            }
            phi = phi.scale(2.0);
        }
    }
    EstConfig::from_witness(a, mu, leg.tau, eps, n_range, phi)
}

/// `χ_n(x) = 1` iff `S_n phi*(x) > n · threshold`.
pub fn indicator_set(
    sys: &FiniteSystem,
    phi_star: &Potential,
    threshold: f64,
    n: usize,
) -> Result<Potential> {
    let s = sys.birkhoff_sum(phi_star, n)?;
    let bar = n as f64 * threshold;
    Ok(Potential::from_vec(
        s.values()
            .iter()
            .map(|&v| if v > bar { 1.0 } else { 0.0 })
            .collect(),
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstRow {
    pub n: usize,
    /// `|X_n|`
    pub set_size: usize,
    /// `ln ‖A^n χ_n‖`
    pub log_norm: ExtReal,
    /// `log_norm / n`
    pub rate: ExtReal,
    /// `rate_target + ln(c_estimate) / n`
    pub bound: ExtReal,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EstReport {
    pub rows: Vec<EstRow>,
    /// `max_n ‖A_{phi*}^n‖ e^{-n (lambda_star + eps/2)}` over the rows.
    pub c_estimate: f64,
    pub log_c_estimate: ExtReal,
    pub rate_target: f64,
    pub pass: bool,
}

impl EstReport {
    /// Columns `n,set_size,log_norm,rate,bound`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("n,set_size,log_norm,rate,bound\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{}\n",
                r.n, r.set_size, r.log_norm, r.rate, r.bound
            ));
        }
        out
    }
}

/// `ln ‖M^n v‖` for `v ≥ 0` given as `ln v`, in the log domain.
fn log_norm_iterate(m: &LogMatrix, log_v: &[f64], n: usize) -> ExtReal {
    let mut v = log_v.to_vec();
    for _ in 0..n {
        v = m.log_mul_vec(&v);
    }
    ExtReal::from_f64(v.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn log_of(v: &Potential) -> Vec<f64> {
    v.values().iter().map(|x| x.ln()).collect()
}

pub fn est_rate_table(a: &TransferOperator, cfg: &EstConfig) -> Result<EstReport> {
    let n_points = a.n_points();
    let base = a.twisted_log(&Potential::zeros(n_points));
    let twisted = a.twisted_log(&cfg.phi_star);
    let ones = vec![0.0; n_points];

    let mut log_c = ExtReal::NegInf;
    for &n in &cfg.n_range {
        let norm = log_norm_iterate(&twisted, &ones, n);
        log_c = log_c.max(norm.add(-(n as f64) * (cfg.lambda_star + cfg.eps / 2.0)));
    }

    let mut rows = Vec::with_capacity(cfg.n_range.len());
    for &n in &cfg.n_range {
        let chi = indicator_set(a.system(), &cfg.phi_star, cfg.threshold, n)?;
        let set_size = chi.values().iter().filter(|&&v| v > 0.0).count();
        let log_norm = log_norm_iterate(&base, &log_of(&chi), n);
        let rate = log_norm.scale(1.0 / n as f64);
        let bound = log_c.scale(1.0 / n as f64).add(cfg.rate_target);
        rows.push(EstRow {
            n,
            set_size,
            log_norm,
            rate,
            bound,
            pass: rate.le_tol(bound, 1e-12),
        });
    }
    Ok(EstReport {
        pass: rows.iter().all(|r| r.pass),
        rows,
        c_estimate: log_c.to_f64().exp(),
        log_c_estimate: log_c,
        rate_target: cfg.rate_target,
    })
}

/// `ln ‖A^n(e^{S_n phi*} χ_n)‖ ≥ n(lambda_star − tau_eff − eps/2) + ln ‖A^n χ_n‖ − tol`.
pub fn check_filter_inequality(
    a: &TransferOperator,
    cfg: &EstConfig,
    n: usize,
    tol: f64,
) -> Result<bool> {
    let sys = a.system();
    let chi = indicator_set(sys, &cfg.phi_star, cfg.threshold, n)?;
    let s = sys.birkhoff_sum(&cfg.phi_star, n)?;
    let weighted: Vec<f64> = chi
        .values()
        .iter()
        .zip(s.values())
        .map(|(&c, &sv)| if c > 0.0 { sv } else { f64::NEG_INFINITY })
        .collect();
    let base = a.twisted_log(&Potential::zeros(a.n_points()));
    let lhs = log_norm_iterate(&base, &weighted, n);
    let rhs = log_norm_iterate(&base, &log_of(&chi), n)
        .add(n as f64 * (cfg.lambda_star - cfg.tau_effective - cfg.eps / 2.0));
    Ok(rhs.le_tol(lhs, tol))
}
