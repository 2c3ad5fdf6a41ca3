//! The variational principle for the spectral potential:
//! `lambda(phi) = max over invariant mu of (tau(mu) + mu[phi])`, attained at
//! the Gibbs gradient.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::ExtReal;
use crate::spectral::{self, gibbs_gradient, EIGENVECTOR_TOL};
use crate::system::{Measure, Potential};
use crate::tentropy::{tau_legendre, LegendreOptions};
use crate::transfer::TransferOperator;

/// Default bound on `|gap|`.
pub const DEFAULT_GAP_TOL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DualityReport {
    pub lambda: f64,
    pub maximizer: Measure,
    pub tau_at_maximizer: ExtReal,
    /// `lambda − (tau(mu*) + mu*[phi])`; positive means a duality shortfall.
    pub gap: f64,
    pub phi: Potential,
    pub pass: bool,
}

/// Evaluates the right-hand side at the Gibbs gradient `mu*` and reports the
/// gap to `lambda(phi)`. Requires a strongly connected support graph.
pub fn duality_check(a: &TransferOperator, phi: &Potential, tol: f64) -> Result<DualityReport> {
    let maximizer = gibbs_gradient(a, phi, EIGENVECTOR_TOL)?;
    let lambda = spectral::lambda(a, phi, 1e-12)?
        .finite()
        .ok_or(Error::ReducibleOperator)?;
    let tau = tau_legendre(a, &maximizer, &LegendreOptions::default())?.tau;
    let gap = match tau {
        ExtReal::Finite(t) => lambda - (t + maximizer.expect(phi)),
        ExtReal::NegInf => f64::INFINITY,
    };
    Ok(DualityReport {
        lambda,
        maximizer,
        tau_at_maximizer: tau,
        gap,
        phi: phi.clone(),
        pass: gap.abs() <= tol,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CandidateMax {
    /// `max_mu tau(mu) + mu[phi]` over the candidates.
    pub value: ExtReal,
    /// Index of the first maximizing candidate.
    pub argmax: usize,
    /// `tau(mu) + mu[phi]` per candidate.
    pub values: Vec<ExtReal>,
}

/// `max over candidates of tau_legendre(mu) + mu[phi]`. Never exceeds
/// `lambda(phi)`, and reaches it when the Gibbs maximizer is a candidate.
pub fn lambda_from_tau(
    a: &TransferOperator,
    phi: &Potential,
    candidates: &[Measure],
) -> Result<CandidateMax> {
    if candidates.is_empty() {
        return Err(Error::Argument("no candidate measures".into()));
    }
    let sys = a.system();
    let opts = LegendreOptions::default();
    let mut values = Vec::with_capacity(candidates.len());
    for (k, mu) in candidates.iter().enumerate() {
        if !sys.is_invariant(mu, 1e-8) {
            return Err(Error::Argument(format!("candidate {k} is not invariant")));
        }
        values.push(tau_legendre(a, mu, &opts)?.tau.add(mu.expect(phi)));
    }
    let (argmax, value) =
        values
            .iter()
            .enumerate()
            .fold((0, ExtReal::NegInf), |(i, best), (k, &v)| {
                if v > best {
                    (k, v)
                } else {
                    (i, best)
                }
            });
    Ok(CandidateMax {
        value,
        argmax,
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::FiniteSystem;

    fn sys2_op(a: f64, b: f64) -> TransferOperator {
        TransferOperator::new(
            FiniteSystem::new(vec![1, 0]).unwrap(),
            &[(0, 1, a), (1, 0, b)],
        )
        .unwrap()
    }
    fn pot(v: &[f64]) -> Potential {
        Potential::new(v.to_vec()).unwrap()
    }

    #[test]
    fn two_cycle_closed_forms() {
        let phi = pot(&[0.7, -1.3]);
        let r = duality_check(&sys2_op(2.0, 3.0), &phi, DEFAULT_GAP_TOL).unwrap();
        assert!((r.lambda - 0.5 * (6f64.ln() + 0.7 - 1.3)).abs() < 1e-11);
        assert!(r.maximizer.dist(&Measure::uniform(2)) < 1e-12);
        assert!(r
            .tau_at_maximizer
            .approx_eq(ExtReal::Finite(0.5 * 6f64.ln()), 1e-11));
        assert!(r.gap.abs() < 1e-10 && r.pass);

        let r = duality_check(&sys2_op(1.0, 1.0), &Potential::zeros(2), DEFAULT_GAP_TOL).unwrap();
        assert!(r.lambda.abs() < 1e-12 && r.gap.abs() < 1e-12);
    }

    #[test]
    fn reducible_is_an_error() {
        let sys = FiniteSystem::new(vec![0, 1, 2]).unwrap();
        let a = TransferOperator::new(sys, &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
        assert_eq!(
            duality_check(&a, &Potential::zeros(3), 1e-5),
            Err(Error::ReducibleOperator)
        );
    }

    #[test]
    fn candidate_maximum() {
        let sys = FiniteSystem::new(vec![0, 1, 2]).unwrap();
        let a =
            TransferOperator::new(sys.clone(), &[(0, 0, 1.0), (1, 1, 2.0), (2, 2, 3.0)]).unwrap();
        let r = lambda_from_tau(&a, &Potential::zeros(3), &sys.invariant_measures()).unwrap();
        assert_eq!(r.argmax, 2);
        assert!(r.value.approx_eq(ExtReal::Finite(3f64.ln()), 1e-12));
        assert!(r.values[1].approx_eq(ExtReal::Finite(2f64.ln()), 1e-12));
        assert!(lambda_from_tau(&a, &Potential::zeros(3), &[]).is_err());
        let bad = Measure::new(vec![0.5, 0.5, 0.0]).unwrap();
        // invariant under the identity, so accepted
        assert!(lambda_from_tau(&a, &Potential::zeros(3), &[bad]).is_ok());
        let b = sys2_op(1.0, 1.0);
        assert!(lambda_from_tau(&b, &Potential::zeros(2), &[Measure::point_mass(2, 0)]).is_err());
    }
}
