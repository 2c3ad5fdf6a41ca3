//! Transfer operators: nonnegative matrices supported on the graph of alpha.
//!
//! Entry `(x, y)` carries the value at `y` into the preimage sum at `x`, so
//! `(A f)(x) = Σ_{y : alpha[y] = x} a(x, y) f(y)`. On a finite set the
//! support constraint is equivalent to the homological identity
//! `A((delta f) g) = f · A g`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{LogMatrix, Matrix};
use crate::system::{FiniteSystem, Potential};

#[derive(Clone, Debug, PartialEq)]
pub struct TransferOperator {
    sys: FiniteSystem,
    entries: Matrix,
}

impl TransferOperator {
    /// Builds an operator from `(x, y, value)` triplets; absent entries are zero.
    pub fn new(sys: FiniteSystem, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let op = Self::from_triplets(sys, triplets)?;
        for (x, y, _) in op.triplets() {
            let image = op.sys.image(y);
            if image != x {
                return Err(Error::Support { x, y, image });
            }
        }
        Ok(op)
    }

    /// Like [`TransferOperator::new`] but skips the support check. The result
    /// may violate the homological identity; use it to build counterexamples.
    pub fn new_unchecked(sys: FiniteSystem, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        Self::from_triplets(sys, triplets)
    }

    fn from_triplets(sys: FiniteSystem, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let n = sys.n_points();
        let mut entries = Matrix::zeros(n);
        let mut seen = vec![false; n * n];
        for &(x, y, value) in triplets {
            if x >= n || y >= n {
                return Err(Error::Argument(format!(
                    "entry ({x}, {y}) out of range for {n} points"
                )));
            }
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    index: x * n + y,
                    value,
                });
            }
            if value < 0.0 {
                return Err(Error::Positivity { x, y, value });
            }
            if std::mem::replace(&mut seen[x * n + y], true) {
                return Err(Error::Argument(format!("duplicate entry ({x}, {y})")));
            }
            entries.set(x, y, value);
        }
        Ok(TransferOperator { sys, entries })
    }

    pub fn system(&self) -> &FiniteSystem {
        &self.sys
    }

    pub fn n_points(&self) -> usize {
        self.sys.n_points()
    }

    pub fn entry(&self, x: usize, y: usize) -> f64 {
        self.entries.get(x, y)
    }

    /// Nonzero entries in row-major order.
    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        let n = self.n_points();
        let mut out = Vec::new();
        for x in 0..n {
            for y in 0..n {
                let v = self.entries.get(x, y);
                if v != 0.0 {
                    out.push((x, y, v));
                }
            }
        }
        out
    }

    /// Whether every positive entry sits at `(alpha[y], y)`.
    pub fn satisfies_support(&self) -> bool {
        self.triplets()
            .iter()
            .all(|&(x, y, _)| self.sys.image(y) == x)
    }

    /// Log-domain entries of `A_phi`: `ln a(x, y) + phi(y)`.
    pub(crate) fn twisted_log(&self, phi: &Potential) -> LogMatrix {
        self.entries.to_log().shift_columns(phi.values())
    }

    fn check_dim(&self, f: &Potential) -> Result<()> {
        if f.len() == self.n_points() {
            Ok(())
        } else {
            Err(Error::Dimension {
                expected: self.n_points(),
                got: f.len(),
            })
        }
    }

    pub fn apply(&self, f: &Potential) -> Result<Potential> {
        self.check_dim(f)?;
        Ok(Potential::from_vec(self.entries.mul_vec(f.values())))
    }

    /// `A_phi f = A(e^phi f)`: column `y` scaled by `e^{phi(y)}`.
    pub fn twist(&self, phi: &Potential) -> Result<TransferOperator> {
        self.check_dim(phi)?;
        let n = self.n_points();
        let mut entries = self.entries.clone();
        for x in 0..n {
            for y in 0..n {
                entries.set(x, y, entries.get(x, y) * phi.values()[y].exp());
            }
        }
        Ok(TransferOperator {
            sys: self.sys.clone(),
            entries,
        })
    }

    /// `A^n f`; `n = 0` returns `f`.
    pub fn iterate_apply(&self, f: &Potential, n: usize) -> Result<Potential> {
        self.check_dim(f)?;
        let mut v = f.values().to_vec();
        for _ in 0..n {
            v = self.entries.mul_vec(&v);
        }
        Ok(Potential::from_vec(v))
    }

    /// `‖A^n‖ = ‖A^n 1‖`, the largest row sum of `A^n`.
    pub fn power_norm(&self, n: usize) -> f64 {
        let one = Potential::constant(self.n_points(), 1.0);
        self.iterate_apply(&one, n)
            .map(|v| v.max())
            .unwrap_or(f64::NAN)
    }

    pub(crate) fn matrix_power(&self, n: usize) -> Matrix {
        self.entries.pow(n)
    }

    /// Tests `A((delta f) g) = f · A g` on `trials` seeded random pairs with
    /// entries in `[-1, 1]`.
    pub fn check_homological(&self, trials: usize, seed: u64, tol: f64) -> bool {
        let n = self.n_points();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let random = |rng: &mut ChaCha8Rng| {
            Potential::from_vec((0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect())
        };
        (0..trials).all(|_| {
            let f = random(&mut rng);
            let g = random(&mut rng);
            homological_defect(self, &f, &g) <= tol
        })
    }

    /// Tests `A_phi^n f = A^n(e^{S_n phi} f)` at relative tolerance `tol`.
    pub fn check_twist_iterate(
        &self,
        phi: &Potential,
        f: &Potential,
        n: usize,
        tol: f64,
    ) -> Result<bool> {
        if n == 0 {
            return Err(Error::Argument("iterate identity needs n >= 1".into()));
        }
        self.check_dim(phi)?;
        self.check_dim(f)?;
        let lhs = self.twist(phi)?.iterate_apply(f, n)?;
        let weight = self.sys.birkhoff_sum(phi, n)?.exp();
        let rhs = self.iterate_apply(&weight.mul(f), n)?;
        let scale = 1.0 + f.sup_norm().max(lhs.sup_norm());
        Ok(lhs.dist(&rhs) <= tol * scale)
    }
}

/// `‖A((delta f) g) − f · A g‖`.
pub fn homological_defect(a: &TransferOperator, f: &Potential, g: &Potential) -> f64 {
    let sys = a.system();
    let lhs = a.entries.mul_vec(sys.delta_map(f).unwrap().mul(g).values());
    let ag = a.entries.mul_vec(g.values());
    lhs.iter()
        .zip(f.values().iter().zip(&ag))
        .fold(0.0, |m, (l, (fv, av))| m.max((l - fv * av).abs()))
}
