//! Exact outcome distribution by direct density-operator evolution.
//!
//! Reference backend for validating the Monte-Carlo sampler. Every gate and
//! channel here is real-valued: H, X and Z have real matrix elements, CNOT
//! is a permutation, and conjugation by Y equals conjugation by Z followed
//! by X (the phases cancel), so the density matrix stays real throughout.

use super::{CircuitSpec, Gate, NoiseModel, OracleError, MAX_N};

/// Real dim x dim density matrix, row-major.
struct Rho {
    dim: usize,
    m: Vec<f64>,
}

impl Rho {
    fn ground(dim: usize) -> Self {
        let mut m = vec![0.0; dim * dim];
        m[0] = 1.0;
        Rho { dim, m }
    }

    fn conj_h(&mut self, q: usize) {
        let bit = 1usize << q;
        let s = std::f64::consts::FRAC_1_SQRT_2;
        // rows, then columns
        for i in 0..self.dim {
            if i & bit != 0 {
                continue;
            }
            let j = i | bit;
            for c in 0..self.dim {
                let (r0, r1) = (self.m[i * self.dim + c], self.m[j * self.dim + c]);
                self.m[i * self.dim + c] = s * (r0 + r1);
                self.m[j * self.dim + c] = s * (r0 - r1);
            }
        }
        for i in 0..self.dim {
            if i & bit != 0 {
                continue;
            }
            let j = i | bit;
            for r in 0..self.dim {
                let (c0, c1) = (self.m[r * self.dim + i], self.m[r * self.dim + j]);
                self.m[r * self.dim + i] = s * (c0 + c1);
                self.m[r * self.dim + j] = s * (c0 - c1);
            }
        }
    }

    /// Conjugate by any permutation of basis states, rho -> P rho P^T.
    fn conj_perm(&mut self, perm: impl Fn(usize) -> usize) {
        let mut out = vec![0.0; self.dim * self.dim];
        for r in 0..self.dim {
            let pr = perm(r);
            for c in 0..self.dim {
                out[pr * self.dim + perm(c)] = self.m[r * self.dim + c];
            }
        }
        self.m = out;
    }

    fn conj_x(&mut self, q: usize) {
        let bit = 1usize << q;
        self.conj_perm(|i| i ^ bit);
    }

    fn conj_z(&mut self, q: usize) {
        let bit = 1usize << q;
        for r in 0..self.dim {
            for c in 0..self.dim {
                if ((r ^ c) & bit) != 0 {
                    self.m[r * self.dim + c] = -self.m[r * self.dim + c];
                }
            }
        }
    }

    fn conj_pauli(&mut self, q: usize, p: u8) {
        match p {
            0 => {}
            1 => self.conj_x(q),
            2 => {
                self.conj_z(q);
                self.conj_x(q);
            }
            3 => self.conj_z(q),
            _ => unreachable!(),
        }
    }

    fn conj_cnot(&mut self, control: usize, target: usize) {
        self.conj_perm(|i| i ^ (((i >> control) & 1) << target));
    }

    /// Two-qubit depolarizing: (1-p) rho + p/15 sum over the 15 non-identity
    /// Pauli pairs of P rho P.
    fn depol2(&mut self, qa: usize, qb: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let mut acc: Vec<f64> = self.m.iter().map(|v| v * (1.0 - p)).collect();
        let base = self.m.clone();
        for r in 1..16u8 {
            self.m.copy_from_slice(&base);
            self.conj_pauli(qa, r & 3);
            self.conj_pauli(qb, (r >> 2) & 3);
            for (a, v) in acc.iter_mut().zip(&self.m) {
                *a += v * p / 15.0;
            }
        }
        self.m = acc;
    }

    fn depol1(&mut self, q: usize, p: f64) {
        if p == 0.0 {
            return;
        }
        let mut acc: Vec<f64> = self.m.iter().map(|v| v * (1.0 - p)).collect();
        let base = self.m.clone();
        for pauli in 1..4u8 {
            self.m.copy_from_slice(&base);
            self.conj_pauli(q, pauli);
            for (a, v) in acc.iter_mut().zip(&self.m) {
                *a += v * p / 3.0;
            }
        }
        self.m = acc;
    }
}

/// Exact pre-readout outcome probabilities, indexed by (a << n) | d.
///
/// Applies every gate and depolarizing channel of `circuit` to the full
/// density operator and returns its diagonal. Voltage noise is not included.
pub fn exact_outcome_distribution(
    circuit: &CircuitSpec,
    noise: &NoiseModel,
) -> Result<Vec<f64>, OracleError> {
    let n = circuit.n;
    if n == 0 || n > MAX_N {
        return Err(OracleError::DimensionExceeded(n));
    }
    let dim = 1usize << (n + 1);
    let mut rho = Rho::ground(dim);
    for gate in &circuit.gates {
        match *gate {
            Gate::H(q) => rho.conj_h(q),
            Gate::Cnot { control, target } => {
                rho.conj_cnot(control, target);
                rho.depol2(control, target, noise.two_qubit_depol);
            }
        }
    }
    for q in 0..=n {
        rho.depol1(q, noise.idle_depol);
    }
    let probs: Vec<f64> = (0..dim).map(|i| rho.m[i * dim + i]).collect();
    let total: f64 = probs.iter().sum();
    debug_assert!((total - 1.0).abs() < 1e-12, "trace drifted to {total}");
    Ok(probs)
}
