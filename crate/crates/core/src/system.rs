//! Finite dynamical systems and the function algebra over them.
//!
//! Points are the indices `0..n`. A [`Potential`] is a real function on the
//! points with pointwise operations and the sup-norm. A [`Measure`] is a
//! probability vector; `mu[f]` is [`Measure::expect`].

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::NORMALIZATION_TOL;

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::Dimension { expected, got })
    }
}

/// A real function on the points of a finite system.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Potential(Vec<f64>);

impl Potential {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NonFinite { index, value });
        }
        Ok(Potential(values))
    }

    /// Skips the finiteness check; callers guarantee it.
    pub(crate) fn from_vec(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| v.is_finite()), "{values:?}");
        Potential(values)
    }

    pub fn zeros(n: usize) -> Self {
        Potential(vec![0.0; n])
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Potential(vec![c; n])
    }

    pub fn indicator(n: usize, point: usize) -> Self {
        let mut v = vec![0.0; n];
        v[point] = 1.0;
        Potential(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_values(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn mean(&self) -> f64 {
        self.0.iter().sum::<f64>() / self.0.len() as f64
    }

    fn zip_with(&self, other: &Potential, op: impl Fn(f64, f64) -> f64) -> Potential {
        assert_eq!(self.len(), other.len(), "potential length mismatch");
        Potential(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| op(a, b))
                .collect(),
        )
    }

    pub fn add(&self, other: &Potential) -> Potential {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Potential) -> Potential {
        self.zip_with(other, |a, b| a - b)
    }

    /// Pointwise product.
    pub fn mul(&self, other: &Potential) -> Potential {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn pointwise_max(&self, other: &Potential) -> Potential {
        self.zip_with(other, f64::max)
    }

    pub fn pointwise_min(&self, other: &Potential) -> Potential {
        self.zip_with(other, f64::min)
    }

    pub fn scale(&self, c: f64) -> Potential {
        Potential(self.0.iter().map(|v| v * c).collect())
    }

    pub fn shift(&self, c: f64) -> Potential {
        Potential(self.0.iter().map(|v| v + c).collect())
    }

    /// `e^self`, pointwise.
    pub fn exp(&self) -> Potential {
        Potential(self.0.iter().map(|v| v.exp()).collect())
    }

    /// Subtracts the mean.
    pub fn centered(&self) -> Potential {
        self.shift(-self.mean())
    }

    pub fn dist(&self, other: &Potential) -> f64 {
        self.sub(other).sup_norm()
    }
}

/// A probability vector on the points.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Measure(Vec<f64>);

impl Measure {
    /// Rejects negative weights and sums off 1 by more than 1e-12.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::Argument("measure on an empty set".into()));
        }
        for (point, &value) in weights.iter().enumerate() {
            if !value.is_finite() {
                return Err(Error::NonFinite {
                    index: point,
                    value,
                });
            }
            if value < 0.0 {
                return Err(Error::NegativeWeight { point, value });
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::Normalization { sum });
        }
        Ok(Measure(weights))
    }

    /// Clamps round-off negatives and renormalizes. For computed weights only.
    pub(crate) fn from_unnormalized(mut weights: Vec<f64>) -> Self {
        for w in weights.iter_mut() {
            if *w < 0.0 {
                *w = 0.0;
            }
        }
        let sum: f64 = weights.iter().sum();
        debug_assert!(sum > 0.0 && sum.is_finite());
        for w in weights.iter_mut() {
            *w /= sum;
        }
        Measure(weights)
    }

    pub fn point_mass(n: usize, point: usize) -> Self {
        let mut w = vec![0.0; n];
        w[point] = 1.0;
        Measure(w)
    }

    pub fn uniform(n: usize) -> Self {
        Measure(vec![1.0 / n as f64; n])
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `mu[f] = Σ mu(x) f(x)`.
    pub fn expect(&self, f: &Potential) -> f64 {
        assert_eq!(self.len(), f.len(), "measure/potential length mismatch");
        self.expect_slice(f.values())
    }

    pub(crate) fn expect_slice(&self, f: &[f64]) -> f64 {
        self.0.iter().zip(f).map(|(m, v)| m * v).sum()
    }

    pub fn dist(&self, other: &Measure) -> f64 {
        assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Convex combination `Σ c_i mu_i`.
    pub fn mixture(parts: &[(f64, &Measure)]) -> Result<Measure> {
        let n = parts
            .first()
            .map(|(_, m)| m.len())
            .ok_or_else(|| Error::Argument("empty mixture".into()))?;
        let mut w = vec![0.0; n];
        for (c, m) in parts {
            check_len(n, m.len())?;
            if *c < 0.0 {
                return Err(Error::Argument(format!("negative mixture weight {c}")));
            }
            for (acc, v) in w.iter_mut().zip(&m.0) {
                *acc += c * v;
            }
        }
        Measure::new(w)
    }
}

impl<'de> Deserialize<'de> for Measure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let w = Vec::<f64>::deserialize(d)?;
        Measure::new(w).map_err(serde::de::Error::custom)
    }
}

/// Nonnegative functions summing pointwise to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionOfUnity {
    members: Vec<Potential>,
}

impl PartitionOfUnity {
    pub fn new(members: Vec<Potential>) -> Result<Self> {
        let n = members
            .first()
            .map(Potential::len)
            .ok_or_else(|| Error::Partition("no members".into()))?;
        for (k, g) in members.iter().enumerate() {
            check_len(n, g.len())?;
            if let Some(x) = g.values().iter().position(|&v| v < 0.0) {
                return Err(Error::Partition(format!(
                    "member {k} is negative at point {x}"
                )));
            }
        }
        for x in 0..n {
            let s: f64 = members.iter().map(|g| g.values()[x]).sum();
            if (s - 1.0).abs() > NORMALIZATION_TOL {
                return Err(Error::Partition(format!("members sum to {s} at point {x}")));
            }
        }
        Ok(PartitionOfUnity { members })
    }

    pub fn members(&self) -> &[Potential] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn n_points(&self) -> usize {
        self.members[0].len()
    }
}

/// The pair (points, alpha) with `alpha` a total map on `0..n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiniteSystem {
    alpha: Vec<usize>,
}

impl FiniteSystem {
    pub fn new(alpha: Vec<usize>) -> Result<Self> {
        let n = alpha.len();
        if n == 0 {
            return Err(Error::Argument("a system needs at least one point".into()));
        }
        if let Some((y, &x)) = alpha.iter().enumerate().find(|(_, &x)| x >= n) {
            return Err(Error::Argument(format!(
                "alpha[{y}] = {x} is not a point of a {n}-point system"
            )));
        }
        Ok(FiniteSystem { alpha })
    }

    pub fn n_points(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[usize] {
        &self.alpha
    }

    pub fn image(&self, y: usize) -> usize {
        self.alpha[y]
    }

    /// `delta f = f ∘ alpha`.
    pub fn delta_map(&self, f: &Potential) -> Result<Potential> {
        check_len(self.n_points(), f.len())?;
        Ok(Potential::from_vec(
            self.alpha.iter().map(|&ax| f.values()[ax]).collect(),
        ))
    }

    /// `delta^m f = f ∘ alpha^m`.
    pub fn delta_pow(&self, f: &Potential, m: usize) -> Result<Potential> {
        check_len(self.n_points(), f.len())?;
        let v = (0..self.n_points())
            .map(|x| f.values()[self.iterate(x, m)])
            .collect();
        Ok(Potential::from_vec(v))
    }

    /// `alpha^m(x)`.
    pub fn iterate(&self, mut x: usize, m: usize) -> usize {
        for _ in 0..m {
            x = self.alpha[x];
        }
        x
    }

    /// `S_n phi = phi + delta phi + ... + delta^{n-1} phi`.
    pub fn birkhoff_sum(&self, phi: &Potential, n: usize) -> Result<Potential> {
        check_len(self.n_points(), phi.len())?;
        if n == 0 {
            return Err(Error::Argument("Birkhoff sum needs n >= 1".into()));
        }
        let v = (0..self.n_points())
            .map(|x| {
                let mut y = x;
                let mut s = 0.0;
                for _ in 0..n {
                    s += phi.values()[y];
                    y = self.alpha[y];
                }
                s
            })
            .collect();
        Ok(Potential::from_vec(v))
    }

    /// The image measure `alpha_* mu`, adjoint to `delta`.
    pub fn pushforward(&self, mu: &Measure) -> Result<Measure> {
        check_len(self.n_points(), mu.len())?;
        let mut w = vec![0.0; self.n_points()];
        for (y, &m) in mu.weights().iter().enumerate() {
            w[self.alpha[y]] += m;
        }
        Ok(Measure(w))
    }

    /// `‖alpha_* mu − mu‖ ≤ tol` in the sup-norm. False on a length mismatch.
    pub fn is_invariant(&self, mu: &Measure, tol: f64) -> bool {
        match self.pushforward(mu) {
            Ok(p) => p.dist(mu) <= tol,
            Err(_) => false,
        }
    }

    /// Uniform measure on the first `n` points of the orbit of `x`.
    pub fn empirical_measure(&self, x: usize, n: usize) -> Result<Measure> {
        if x >= self.n_points() {
            return Err(Error::Argument(format!("point {x} out of range")));
        }
        if n == 0 {
            return Err(Error::Argument("empirical measure needs n >= 1".into()));
        }
        let mut w = vec![0.0; self.n_points()];
        let mut y = x;
        for _ in 0..n {
            w[y] += 1.0;
            y = self.alpha[y];
        }
        for v in w.iter_mut() {
            *v /= n as f64;
        }
        Ok(Measure(w))
    }

    /// Periodic orbits of alpha, each listed from its smallest point, ordered
    /// by that smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.n_points();
        // 0 = unvisited, 1 = on the current path, 2 = done
        let mut state = vec![0u8; n];
        let mut cycles = Vec::new();
        for start in 0..n {
            if state[start] != 0 {
                continue;
            }
            let mut path = Vec::new();
            let mut x = start;
            while state[x] == 0 {
                state[x] = 1;
                path.push(x);
                x = self.alpha[x];
            }
            if state[x] == 1 {
                let pos = path.iter().position(|&p| p == x).unwrap();
                let mut cycle = path[pos..].to_vec();
                let min_pos = cycle
                    .iter()
                    .enumerate()
                    .min_by_key(|(_, &p)| p)
                    .map(|(i, _)| i)
                    .unwrap();
                cycle.rotate_left(min_pos);
                cycles.push(cycle);
            }
            for p in path {
                state[p] = 2;
            }
        }
        cycles.sort_by_key(|c| c[0]);
        cycles
    }

    /// Extreme points of the invariant-measure polytope.
    ///
    /// The fixed points of `alpha_*` in the simplex are exactly the mixtures
    /// of uniform measures on periodic orbits, and those uniform measures are
    /// the vertices. Output is in descending lexicographic order of weights,
    /// which is the order of the orbits' smallest points.
    pub fn invariant_measures(&self) -> Vec<Measure> {
        let n = self.n_points();
        self.cycles()
            .into_iter()
            .map(|cycle| {
                let mut w = vec![0.0; n];
                let p = 1.0 / cycle.len() as f64;
                for x in cycle {
                    w[x] = p;
                }
                Measure(w)
            })
            .collect()
    }

    /// The coordinate indicators.
    pub fn point_partition(&self) -> PartitionOfUnity {
        let n = self.n_points();
        PartitionOfUnity {
            members: (0..n).map(|x| Potential::indicator(n, x)).collect(),
        }
    }

    /// `k` seeded uniform rows, each column renormalized to sum to one.
    pub fn random_partition(&self, k: usize, seed: u64) -> Result<PartitionOfUnity> {
        if k == 0 {
            return Err(Error::Argument("partition needs k >= 1".into()));
        }
        let n = self.n_points();
        if k == 1 {
            return Ok(PartitionOfUnity {
                members: vec![Potential::constant(n, 1.0)],
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows: Vec<Vec<f64>> = (0..k)
            .map(|_| (0..n).map(|_| rng.gen_range(0.0..1.0)).collect())
            .collect();
        for x in 0..n {
            let s: f64 = rows.iter().map(|r| r[x]).sum();
            if s == 0.0 {
                for r in rows.iter_mut() {
                    r[x] = 1.0 / k as f64;
                }
                continue;
            }
            for r in rows.iter_mut() {
                r[x] /= s;
            }
            // push the residual round-off into the largest row
            let resid = 1.0 - rows.iter().map(|r| r[x]).sum::<f64>();
            let top = (0..k)
                .max_by(|&a, &b| rows[a][x].total_cmp(&rows[b][x]))
                .unwrap();
            rows[top][x] += resid;
        }
        PartitionOfUnity::new(rows.into_iter().map(Potential::from_vec).collect())
    }
}
