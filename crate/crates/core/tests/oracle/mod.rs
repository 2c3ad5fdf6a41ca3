//! Independent reference computations for the integration tests. Nothing
//! here calls into the numerical routines under test.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use tdual::{FiniteSystem, Measure, Potential, TransferOperator};

/// A map `alpha` with weight `weights[y]` on the entry `(alpha[y], y)`.
#[derive(Clone, Debug)]
pub struct Instance {
    pub alpha: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Instance {
    pub fn new(alpha: Vec<usize>, weights: Vec<f64>) -> Self {
        Instance { alpha, weights }
    }

    /// One cycle through all `n` points: the irreducible case.
    pub fn random_cycle(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(rng);
        let mut alpha = vec![0; n];
        for i in 0..n {
            alpha[order[i]] = order[(i + 1) % n];
        }
        let weights = (0..n).map(|_| rng.gen_range(0.2..5.0)).collect();
        Instance { alpha, weights }
    }

    /// An arbitrary self-map: several cycles plus transient trees.
    pub fn random_map(rng: &mut ChaCha8Rng, n: usize) -> Self {
        let alpha = (0..n).map(|_| rng.gen_range(0..n)).collect();
        let weights = (0..n).map(|_| rng.gen_range(0.2..5.0)).collect();
        Instance { alpha, weights }
    }

    /// Reads the weights back from an operator supported on the graph of alpha.
    pub fn from_operator(a: &TransferOperator) -> Self {
        let alpha = a.system().alpha().to_vec();
        let weights = (0..alpha.len()).map(|y| a.entry(alpha[y], y)).collect();
        Instance { alpha, weights }
    }

    pub fn n(&self) -> usize {
        self.alpha.len()
    }

    /// The `k`-th matrix power, again a weighted map: `alpha^k` with the
    /// product of the weights along each path.
    pub fn power(&self, k: usize) -> Instance {
        let n = self.n();
        let mut alpha: Vec<usize> = (0..n).collect();
        let mut weights = vec![1.0; n];
        for y in 0..n {
            for _ in 0..k {
                weights[y] *= self.weights[alpha[y]];
                alpha[y] = self.alpha[alpha[y]];
            }
        }
        Instance { alpha, weights }
    }

    /// `phi + phi∘alpha + … + phi∘alpha^{k-1}`.
    pub fn birkhoff(&self, phi: &[f64], k: usize) -> Vec<f64> {
        (0..self.n())
            .map(|y| {
                let (mut x, mut s) = (y, 0.0);
                for _ in 0..k {
                    s += phi[x];
                    x = self.alpha[x];
                }
                s
            })
            .collect()
    }

    pub fn triplets(&self) -> Vec<(usize, usize, f64)> {
        (0..self.n())
            .map(|y| (self.alpha[y], y, self.weights[y]))
            .collect()
    }

    pub fn system(&self) -> FiniteSystem {
        FiniteSystem::new(self.alpha.clone()).unwrap()
    }

    pub fn operator(&self) -> TransferOperator {
        TransferOperator::new(self.system(), &self.triplets()).unwrap()
    }

    /// Cycles of `alpha`, each listed from its smallest point.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut out: Vec<Vec<usize>> = Vec::new();
        for start in 0..n {
            // after n steps every orbit is on its cycle
            let mut x = start;
            for _ in 0..n {
                x = self.alpha[x];
            }
            let mut cyc = vec![x];
            let mut y = self.alpha[x];
            while y != x {
                cyc.push(y);
                y = self.alpha[y];
            }
            let min_pos = cyc.iter().enumerate().min_by_key(|(_, &p)| p).unwrap().0;
            cyc.rotate_left(min_pos);
            if !out.contains(&cyc) {
                out.push(cyc);
            }
        }
        out.sort();
        out
    }

    /// `max_c mean_{y ∈ c} (ln w_y + phi_y)`: the Perron root of a weighted
    /// functional graph is the largest geometric cycle mean.
    pub fn lambda(&self, phi: &[f64]) -> f64 {
        self.cycles()
            .iter()
            .map(|c| {
                c.iter()
                    .map(|&y| self.weights[y].ln() + phi[y])
                    .sum::<f64>()
                    / c.len() as f64
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `Σ_c mu(c) · mean_{y ∈ c} ln w_y` for an invariant `mu`.
    pub fn tau(&self, mu: &[f64]) -> f64 {
        self.cycles()
            .iter()
            .map(|c| {
                let mass: f64 = c.iter().map(|&y| mu[y]).sum();
                let mean = c.iter().map(|&y| self.weights[y].ln()).sum::<f64>() / c.len() as f64;
                if mass > 0.0 {
                    mass * mean
                } else {
                    0.0
                }
            })
            .sum()
    }

    /// Random convex combination of the uniform measures on the cycles.
    pub fn random_invariant_measure(&self, rng: &mut ChaCha8Rng) -> Measure {
        let cycles = self.cycles();
        let p: Vec<f64> = cycles.iter().map(|_| rng.gen_range(0.05..1.0)).collect();
        let total: f64 = p.iter().sum();
        let mut w = vec![0.0; self.n()];
        for (c, pc) in cycles.iter().zip(&p) {
            for &y in c {
                w[y] = pc / total / c.len() as f64;
            }
        }
        normalized(w)
    }

    pub fn dense(&self) -> Dense {
        let n = self.n();
        let mut m = vec![vec![0.0; n]; n];
        for y in 0..n {
            m[self.alpha[y]][y] = self.weights[y];
        }
        Dense(m)
    }
}

/// Rescales nonnegative weights to sum exactly to one (within rounding).
pub fn normalized(mut w: Vec<f64>) -> Measure {
    let total: f64 = w.iter().sum();
    for v in &mut w {
        *v /= total;
    }
    let drift = 1.0 - w.iter().sum::<f64>();
    let i = (0..w.len()).max_by(|&a, &b| w[a].total_cmp(&w[b])).unwrap();
    w[i] += drift;
    Measure::new(w).unwrap()
}

pub fn random_measure(rng: &mut ChaCha8Rng, n: usize) -> Measure {
    normalized((0..n).map(|_| rng.gen_range(0.01..1.0)).collect())
}

pub fn random_potential(rng: &mut ChaCha8Rng, n: usize, bound: f64) -> Potential {
    Potential::new((0..n).map(|_| rng.gen_range(-bound..=bound)).collect()).unwrap()
}

/// Plain row-major dense matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Dense(pub Vec<Vec<f64>>);

impl Dense {
    pub fn from_operator(a: &TransferOperator) -> Self {
        let n = a.n_points();
        Dense(
            (0..n)
                .map(|x| (0..n).map(|y| a.entry(x, y)).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn mul(&self, other: &Dense) -> Dense {
        let n = self.n();
        let mut out = vec![vec![0.0; n]; n];
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    out[i][j] += self.0[i][k] * other.0[k][j];
                }
            }
        }
        Dense(out)
    }

    pub fn pow(&self, k: usize) -> Dense {
        let n = self.n();
        let mut out = Dense(
            (0..n)
                .map(|i| (0..n).map(|j| f64::from(u8::from(i == j))).collect())
                .collect(),
        );
        for _ in 0..k {
            out = out.mul(self);
        }
        out
    }

    pub fn apply(&self, f: &[f64]) -> Vec<f64> {
        self.0
            .iter()
            .map(|row| row.iter().zip(f).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Scales column `y` by `e^{phi[y]}`.
    pub fn twist(&self, phi: &[f64]) -> Dense {
        Dense(
            self.0
                .iter()
                .map(|row| row.iter().zip(phi).map(|(a, p)| a * p.exp()).collect())
                .collect(),
        )
    }

    /// Largest absolute row sum.
    pub fn norm(&self) -> f64 {
        self.0
            .iter()
            .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }
}

/// Spectral radius of a real 2×2 matrix from its characteristic polynomial.
pub fn spectral_radius_2x2(m: [[f64; 2]; 2]) -> f64 {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        (tr / 2.0 + r).abs().max((tr / 2.0 - r).abs())
    } else {
        // complex pair: |z|² = det
        det.sqrt()
    }
}

pub fn scenario(name: &str) -> tdual::scenario::Scenario {
    let path = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("scenarios")
        .join(format!("{name}.json"));
    tdual::scenario::parse_scenario(&std::fs::read(path).unwrap()).unwrap()
}
