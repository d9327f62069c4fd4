//! The noisy parity oracle.
//!
//! One oracle call prepares the data register in a uniform superposition,
//! computes the parity D·k of the data with a hidden key k into an ancilla
//! via CNOTs, and measures everything. In Quantum mode a final layer of
//! Hadamards is appended, which turns the output state into
//! (|0_A 0_D> + |1_A k_D>)/sqrt(2): measuring the ancilla as 1 projects the
//! data register onto the key itself.
//!
//! The circuit is Clifford and the noise is stochastic Pauli (two-qubit
//! depolarizing after each CNOT, optional single-qubit depolarizing before
//! measurement), so shots are sampled exactly by Pauli-frame Monte Carlo:
//! draw one ideal measurement branch, then propagate randomly inserted Pauli
//! errors through the remaining gates and flip the affected outcome bits.
//! An exact density-operator reference backend is provided for validation.
//!
//! Qubit indexing: data qubits are 0..n-1 (bit i of a mask holds k_{i+1}),
//! the ancilla is qubit n. Outcome tables are indexed by (a << n) | d.

mod exact;

pub use exact::exact_outcome_distribution;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const MAX_N: usize = 6;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("register size {0} outside [1, {MAX_N}]")]
    BadRegisterSize(usize),
    #[error("key bit must be 0 or 1, got {0}")]
    BadKeyBit(u8),
    #[error("key string must be binary digits, got {0:?}")]
    BadKeyString(String),
    #[error("{name} = {value} outside {range}")]
    BadProbability {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error("eta_d has {got} entries, register has {want}")]
    EtaLength { got: usize, want: usize },
    #[error("state dimension exceeded: n = {0} > {MAX_N}")]
    DimensionExceeded(usize),
}

/// The hidden key k_1..k_n the solvers must learn.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Key {
    bits: Vec<u8>,
}

impl Key {
    pub fn new(bits: &[u8]) -> Result<Self, OracleError> {
        if bits.is_empty() || bits.len() > MAX_N {
            return Err(OracleError::BadRegisterSize(bits.len()));
        }
        if let Some(&b) = bits.iter().find(|&&b| b > 1) {
            return Err(OracleError::BadKeyBit(b));
        }
        Ok(Key {
            bits: bits.to_vec(),
        })
    }

    /// Key from a packed mask; bit i holds k_{i+1}.
    pub fn from_mask(mask: u8, n: usize) -> Result<Self, OracleError> {
        if n == 0 || n > MAX_N {
            return Err(OracleError::BadRegisterSize(n));
        }
        Ok(Key {
            bits: (0..n).map(|i| (mask >> i) & 1).collect(),
        })
    }

    /// All 2^n keys in mask order.
    pub fn all(n: usize) -> Result<Vec<Self>, OracleError> {
        if n == 0 || n > MAX_N {
            return Err(OracleError::BadRegisterSize(n));
        }
        Ok((0..1u16 << n)
            .map(|m| Key::from_mask(m as u8, n).unwrap())
            .collect())
    }

    pub fn n(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    /// k_{i+1}, i.e. zero-based access.
    pub fn bit(&self, i: usize) -> u8 {
        self.bits[i]
    }

    pub fn mask(&self) -> u8 {
        self.bits
            .iter()
            .enumerate()
            .fold(0, |m, (i, &b)| m | (b << i))
    }

    pub fn weight(&self) -> u32 {
        self.bits.iter().map(|&b| b as u32).sum()
    }
}

impl std::fmt::Display for Key {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for Key {
    type Err = OracleError;

    fn from_str(s: &str) -> Result<Self, OracleError> {
        let bits: Vec<u8> = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(OracleError::BadKeyString(s.to_string())),
            })
            .collect::<Result<_, _>>()?;
        Key::new(&bits)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleMode {
    /// Parity oracle only: data is measured in the computational basis.
    Classical,
    /// Appends the final Hadamard layer on all n+1 qubits.
    Quantum,
}

impl OracleMode {
    pub(crate) fn id(self) -> u64 {
        match self {
            OracleMode::Classical => 0,
            OracleMode::Quantum => 1,
        }
    }
}

impl std::fmt::Display for OracleMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            OracleMode::Classical => "Classical",
            OracleMode::Quantum => "Quantum",
        })
    }
}

/// Gate and readout error parameters for one device setting.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// Two-qubit depolarizing probability applied after each CNOT.
    pub two_qubit_depol: f64,
    /// Single-qubit depolarizing probability applied to every qubit once
    /// before measurement; stands in for decoherence during readout delay.
    #[serde(default)]
    pub idle_depol: f64,
    /// Ancilla readout assignment error.
    pub eta_a: f64,
    /// Per-data-qubit readout assignment errors, length n.
    pub eta_d: Vec<f64>,
}

impl NoiseModel {
    pub fn noiseless(n: usize) -> Self {
        NoiseModel {
            two_qubit_depol: 0.0,
            idle_depol: 0.0,
            eta_a: 0.0,
            eta_d: vec![0.0; n],
        }
    }

    /// Same assignment error on every data qubit.
    pub fn uniform(n: usize, two_qubit_depol: f64, idle_depol: f64, eta_a: f64, eta_d: f64) -> Self {
        NoiseModel {
            two_qubit_depol,
            idle_depol,
            eta_a,
            eta_d: vec![eta_d; n],
        }
    }

    pub fn n(&self) -> usize {
        self.eta_d.len()
    }

    pub fn validate(&self, n: usize) -> Result<(), OracleError> {
        let ranges: [(&'static str, f64, f64, f64, bool); 2] = [
            ("two_qubit_depol", self.two_qubit_depol, 0.0, 1.0, false),
            ("idle_depol", self.idle_depol, 0.0, 1.0, false),
        ];
        for (name, v, lo, hi, closed_hi) in ranges {
            let ok = v >= lo && if closed_hi { v <= hi } else { v < hi } && v.is_finite();
            if !ok {
                return Err(OracleError::BadProbability {
                    name,
                    value: v,
                    range: "[0, 1)",
                });
            }
        }
        if !(0.0..=0.5).contains(&self.eta_a) {
            return Err(OracleError::BadProbability {
                name: "eta_a",
                value: self.eta_a,
                range: "[0, 0.5]",
            });
        }
        if self.eta_d.len() != n {
            return Err(OracleError::EtaLength {
                got: self.eta_d.len(),
                want: n,
            });
        }
        for &e in &self.eta_d {
            if !(0.0..=0.5).contains(&e) {
                return Err(OracleError::BadProbability {
                    name: "eta_d",
                    value: e,
                    range: "[0, 0.5]",
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Gate {
    H(usize),
    /// CNOT with the given data qubit as control and the ancilla as target.
    Cnot { control: usize, target: usize },
}

/// Logical gate sequence for one oracle call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CircuitSpec {
    pub n: usize,
    pub mode: OracleMode,
    pub gates: Vec<Gate>,
}

impl CircuitSpec {
    /// Key support recovered from the CNOT controls.
    pub fn key_mask(&self) -> u8 {
        self.gates
            .iter()
            .filter_map(|g| match g {
                Gate::Cnot { control, .. } => Some(1u8 << control),
                Gate::H(_) => None,
            })
            .fold(0, |m, b| m | b)
    }
}

/// Preparation Hadamards, one CNOT per set key bit, and in Quantum mode the
/// final Hadamard layer (ancilla first, then data).
pub fn build_circuit(key: &Key, mode: OracleMode) -> CircuitSpec {
    let n = key.n();
    let mut gates: Vec<Gate> = (0..n).map(Gate::H).collect();
    for i in 0..n {
        if key.bit(i) == 1 {
            gates.push(Gate::Cnot {
                control: i,
                target: n,
            });
        }
    }
    if mode == OracleMode::Quantum {
        gates.push(Gate::H(n));
        gates.extend((0..n).map(Gate::H));
    }
    CircuitSpec { n, mode, gates }
}

/// True measurement bits of one shot, before any voltage noise.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotOutcome {
    pub a: u8,
    pub d: Vec<u8>,
}

impl ShotOutcome {
    pub fn d_mask(&self) -> u8 {
        self.d.iter().enumerate().fold(0, |m, (i, &b)| m | (b << i))
    }

    /// Index into an outcome table, (a << n) | d.
    pub fn index(&self) -> usize {
        ((self.a as usize) << self.d.len()) | self.d_mask() as usize
    }
}

fn parity(mask: u8) -> u8 {
    (mask.count_ones() & 1) as u8
}

/// Apply one uniformly random non-identity Pauli component pair, encoded as
/// r in 1..16 with the control's Pauli in the low two bits (0=I 1=X 2=Y 3=Z).
fn apply_pauli_pair(fx: &mut u32, fz: &mut u32, r: u8, q_lo: usize, q_hi: usize) {
    for (q, p) in [(q_lo, r & 3), (q_hi, (r >> 2) & 3)] {
        if p == 1 || p == 2 {
            *fx ^= 1 << q;
        }
        if p == 2 || p == 3 {
            *fz ^= 1 << q;
        }
    }
}

/// Draw one measurement outcome from the exact noisy-circuit distribution.
///
/// The ideal circuit admits a two-line branch sampler: in Classical mode the
/// data bits are uniform and the ancilla is their keyed parity; in Quantum
/// mode the state collapses to (a, d) = (0, 0...0) or (1, k) with equal
/// probability. Inserted Pauli errors are then carried through the rest of
/// the gate list as an (X, Z) frame and XORed onto the branch at the end
/// (only X components flip computational-basis outcomes).
pub fn sample_shot<R: Rng + ?Sized>(
    circuit: &CircuitSpec,
    noise: &NoiseModel,
    rng: &mut R,
) -> ShotOutcome {
    let n = circuit.n;
    let kmask = circuit.key_mask();

    let (a, d) = match circuit.mode {
        OracleMode::Classical => {
            let d: u8 = rng.gen_range(0..(1u16 << n)) as u8;
            (parity(d & kmask), d)
        }
        OracleMode::Quantum => {
            if rng.gen_range(0..2u8) == 1 {
                (1u8, kmask)
            } else {
                (0u8, 0u8)
            }
        }
    };

    let mut fx: u32 = 0;
    let mut fz: u32 = 0;
    for gate in &circuit.gates {
        match *gate {
            Gate::H(q) => {
                // H exchanges X and Z
                let xq = (fx >> q) & 1;
                let zq = (fz >> q) & 1;
                fx = (fx & !(1 << q)) | (zq << q);
                fz = (fz & !(1 << q)) | (xq << q);
            }
            Gate::Cnot { control, target } => {
                // X on control copies to target, Z on target copies to control
                fx ^= ((fx >> control) & 1) << target;
                fz ^= ((fz >> target) & 1) << control;
                if noise.two_qubit_depol > 0.0 && rng.gen::<f64>() < noise.two_qubit_depol {
                    let r = rng.gen_range(1..16u8);
                    apply_pauli_pair(&mut fx, &mut fz, r, control, target);
                }
            }
        }
    }
    if noise.idle_depol > 0.0 {
        for q in 0..=n {
            if rng.gen::<f64>() < noise.idle_depol {
                // Z errors this close to a computational-basis measurement are
                // invisible, so only the X component of X/Y/Z matters here.
                let p = rng.gen_range(1..4u8);
                if p == 1 || p == 2 {
                    fx ^= 1 << q;
                }
            }
        }
    }

    let flipped = (((a as u32) << n) | d as u32) ^ fx;
    ShotOutcome {
        a: ((flipped >> n) & 1) as u8,
        d: (0..n).map(|i| ((flipped >> i) & 1) as u8).collect(),
    }
}

/// Two-qubit depolarizing strength from an average gate fidelity,
/// p = (1 - F) d/(d - 1) with d = 4.
pub fn depol_from_fidelity(avg_fidelity: f64) -> Result<f64, OracleError> {
    if !(avg_fidelity > 0.5 && avg_fidelity <= 1.0) {
        return Err(OracleError::BadProbability {
            name: "avg_fidelity",
            value: avg_fidelity,
            range: "(0.5, 1]",
        });
    }
    Ok((1.0 - avg_fidelity) * 4.0 / 3.0)
}
