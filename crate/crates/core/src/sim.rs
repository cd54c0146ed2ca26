//! Dense statevector simulation.
//!
//! Qubit `k` occupies bit `k` of the state index, so qubit 0 is the least
//! significant bit. Gates are applied as in-place amplitude-pair updates
//! rather than full matrix products. Classical outcome strings render
//! classical bit 0 leftmost.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::circuit::{Circuit, GateKind, Instruction};

/// Largest register [`run_statevector`] and [`measurement_distribution`]
/// accept. 2^20 amplitudes keep memory and latency interactive.
pub const MAX_STATEVECTOR_QUBITS: usize = 20;

/// Largest register [`circuit_unitary`] accepts; the matrix has 4^n entries.
pub const MAX_UNITARY_QUBITS: usize = 10;

/// Probability mass below which an outcome is dropped from a distribution.
pub const PROBABILITY_FLOOR: f64 = 1e-12;

/// Outcome probabilities keyed by classical bitstring, sorted by key.
pub type Distribution = BTreeMap<String, f64>;

/// Sampled outcome counts keyed by classical bitstring, sorted by key.
pub type Histogram = BTreeMap<String, u64>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SimError {
    #[error("circuit has {got} qubits, simulator supports at most {limit}")]
    TooManyQubits { got: usize, limit: usize },
    #[error("circuit contains measurements, which this entry point does not support")]
    MeasurementsUnsupported,
    #[error("invalid circuit: instruction {position}: {message}")]
    InvalidCircuit { position: usize, message: String },
}

fn check_valid(circuit: &Circuit) -> Result<(), SimError> {
    match circuit.validate().into_iter().next() {
        None => Ok(()),
        Some(v) => Err(SimError::InvalidCircuit {
            position: v.position,
            message: v.message,
        }),
    }
}

/// 2x2 matrix of a single-qubit gate, row major.
pub fn gate_matrix_1q(kind: GateKind, param: Option<f64>) -> [[Complex64; 2]; 2] {
    let zero = Complex64::new(0.0, 0.0);
    let one = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    match kind {
        GateKind::I => [[one, zero], [zero, one]],
        GateKind::X => [[zero, one], [one, zero]],
        GateKind::Y => [[zero, -i], [i, zero]],
        GateKind::Z => [[one, zero], [zero, -one]],
        GateKind::H => {
            let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
            [[h, h], [h, -h]]
        }
        GateKind::S => [[one, zero], [zero, i]],
        GateKind::Sdg => [[one, zero], [zero, -i]],
        GateKind::T => [[one, zero], [zero, Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4)]],
        GateKind::Tdg => [[one, zero], [zero, Complex64::from_polar(1.0, -std::f64::consts::FRAC_PI_4)]],
        GateKind::Rx => {
            let half = param.expect("rx carries an angle") / 2.0;
            let (sin, cos) = half.sin_cos();
            let c = Complex64::new(cos, 0.0);
            let ms = Complex64::new(0.0, -sin);
            [[c, ms], [ms, c]]
        }
        GateKind::Ry => {
            let half = param.expect("ry carries an angle") / 2.0;
            let (sin, cos) = half.sin_cos();
            let c = Complex64::new(cos, 0.0);
            let s = Complex64::new(sin, 0.0);
            [[c, -s], [s, c]]
        }
        GateKind::Rz => {
            let half = param.expect("rz carries an angle") / 2.0;
            [
                [Complex64::from_polar(1.0, -half), zero],
                [zero, Complex64::from_polar(1.0, half)],
            ]
        }
        GateKind::Cx | GateKind::Cz | GateKind::Swap => {
            panic!("{} is not a single-qubit gate", kind)
        }
    }
}

fn apply_1q(state: &mut [Complex64], qubit: usize, m: &[[Complex64; 2]; 2]) {
    let stride = 1usize << qubit;
    let mut base = 0;
    while base < state.len() {
        for low in base..base + stride {
            let high = low | stride;
            let a = state[low];
            let b = state[high];
            state[low] = m[0][0] * a + m[0][1] * b;
            state[high] = m[1][0] * a + m[1][1] * b;
        }
        base += stride << 1;
    }
}

fn apply_cx(state: &mut [Complex64], control: usize, target: usize) {
    let cmask = 1usize << control;
    let tmask = 1usize << target;
    for idx in 0..state.len() {
        if idx & cmask != 0 && idx & tmask == 0 {
            state.swap(idx, idx | tmask);
        }
    }
}

fn apply_cz(state: &mut [Complex64], a: usize, b: usize) {
    let mask = (1usize << a) | (1usize << b);
    for (idx, amp) in state.iter_mut().enumerate() {
        if idx & mask == mask {
            *amp = -*amp;
        }
    }
}

fn apply_swap(state: &mut [Complex64], a: usize, b: usize) {
    let amask = 1usize << a;
    let bmask = 1usize << b;
    for idx in 0..state.len() {
        if idx & amask != 0 && idx & bmask == 0 {
            state.swap(idx, idx ^ amask ^ bmask);
        }
    }
}

/// Applies one gate instruction to a statevector in place. Measurements are
/// not gates and panic here; callers filter them first.
pub(crate) fn apply_gate(state: &mut [Complex64], instr: &Instruction) {
    let Instruction::Gate {
        kind,
        qubits,
        param,
    } = instr
    else {
        panic!("apply_gate called on a measurement");
    };
    match kind {
        GateKind::Cx => apply_cx(state, qubits[0], qubits[1]),
        GateKind::Cz => apply_cz(state, qubits[0], qubits[1]),
        GateKind::Swap => apply_swap(state, qubits[0], qubits[1]),
        _ => apply_1q(state, qubits[0], &gate_matrix_1q(*kind, *param)),
    }
}

fn fresh_state(num_qubits: usize) -> Vec<Complex64> {
    let mut state = vec![Complex64::new(0.0, 0.0); 1usize << num_qubits];
    state[0] = Complex64::new(1.0, 0.0);
    state
}

/// Runs a measurement-free circuit on |0…0⟩ and returns the final
/// statevector of 2^n amplitudes.
pub fn run_statevector(circuit: &Circuit) -> Result<Vec<Complex64>, SimError> {
    check_valid(circuit)?;
    if circuit.num_qubits > MAX_STATEVECTOR_QUBITS {
        return Err(SimError::TooManyQubits {
            got: circuit.num_qubits,
            limit: MAX_STATEVECTOR_QUBITS,
        });
    }
    if circuit.has_measure() {
        return Err(SimError::MeasurementsUnsupported);
    }
    let mut state = fresh_state(circuit.num_qubits);
    for instr in &circuit.instructions {
        apply_gate(&mut state, instr);
    }
    Ok(state)
}

/// Exact outcome distribution over the classical register.
///
/// Because measurement is terminal per qubit and later gates act on other
/// qubits only, running every gate first and then reading the measured
/// qubits reproduces the mid-circuit statistics exactly. Unwritten classical
/// bits read 0. Outcomes with probability below [`PROBABILITY_FLOOR`] are
/// omitted.
pub fn measurement_distribution(circuit: &Circuit) -> Result<Distribution, SimError> {
    check_valid(circuit)?;
    if circuit.num_qubits > MAX_STATEVECTOR_QUBITS {
        return Err(SimError::TooManyQubits {
            got: circuit.num_qubits,
            limit: MAX_STATEVECTOR_QUBITS,
        });
    }
    let mut state = fresh_state(circuit.num_qubits);
    for instr in &circuit.instructions {
        if !instr.is_measure() {
            apply_gate(&mut state, instr);
        }
    }
    let measures = circuit.measure_map();
    let mut dist = Distribution::new();
    for (idx, amp) in state.iter().enumerate() {
        let p = amp.norm_sqr();
        if p == 0.0 {
            continue;
        }
        let mut key = vec![b'0'; circuit.num_cbits];
        for &(qubit, cbit) in &measures {
            if idx >> qubit & 1 == 1 {
                key[cbit] = b'1';
            }
        }
        *dist
            .entry(String::from_utf8(key).expect("ascii key"))
            .or_insert(0.0) += p;
    }
    dist.retain(|_, p| *p >= PROBABILITY_FLOOR);
    Ok(dist)
}

/// Draws `shots` outcomes from a distribution with a seeded generator.
/// Identical seeds give identical histograms on every platform.
pub fn sample_counts(dist: &Distribution, shots: u64, seed: u64) -> Histogram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut histogram = Histogram::new();
    if dist.is_empty() {
        return histogram;
    }
    for _ in 0..shots {
        let draw: f64 = rng.random();
        let mut acc = 0.0;
        let mut chosen = None;
        for (key, p) in dist {
            acc += p;
            if draw < acc {
                chosen = Some(key);
                break;
            }
        }
        let key = chosen
            .or_else(|| dist.keys().next_back())
            .expect("distribution is non-empty");
        *histogram.entry(key.clone()).or_insert(0) += 1;
    }
    histogram
}

/// Unitary matrix of a measurement-free circuit, stored column major:
/// `data[col * dim + row]`. Column `j` is the circuit applied to basis
/// state `|j⟩`, which keeps the cost at one kernel sweep per column instead
/// of a full matrix product per gate.
#[derive(Debug, Clone, PartialEq)]
pub struct Unitary {
    pub dim: usize,
    pub data: Vec<Complex64>,
}

impl Unitary {
    pub fn at(&self, row: usize, col: usize) -> Complex64 {
        self.data[col * self.dim + row]
    }
}

/// Builds the full unitary of a measurement-free circuit.
pub fn circuit_unitary(circuit: &Circuit) -> Result<Unitary, SimError> {
    check_valid(circuit)?;
    if circuit.num_qubits > MAX_UNITARY_QUBITS {
        return Err(SimError::TooManyQubits {
            got: circuit.num_qubits,
            limit: MAX_UNITARY_QUBITS,
        });
    }
    if circuit.has_measure() {
        return Err(SimError::MeasurementsUnsupported);
    }
    let dim = 1usize << circuit.num_qubits;
    let mut data = vec![Complex64::new(0.0, 0.0); dim * dim];
    for col in 0..dim {
        let column = &mut data[col * dim..(col + 1) * dim];
        column[col] = Complex64::new(1.0, 0.0);
        for instr in &circuit.instructions {
            apply_gate(column, instr);
        }
    }
    Ok(Unitary { dim, data })
}

/// Whether `a = e^{iφ} b` entrywise within `tol`. The phase is estimated
/// from the largest-magnitude entry of `b`.
pub fn equivalent_up_to_global_phase(a: &[Complex64], b: &[Complex64], tol: f64) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let Some(pivot) = (0..b.len()).max_by(|&i, &j| {
        b[i].norm_sqr()
            .partial_cmp(&b[j].norm_sqr())
            .expect("finite amplitudes")
    }) else {
        return true;
    };
    if b[pivot].norm() == 0.0 {
        return a.iter().all(|x| x.norm() <= tol);
    }
    let ratio = a[pivot] / b[pivot];
    if ratio.norm() == 0.0 {
        return false;
    }
    let phase = ratio / ratio.norm();
    a.iter()
        .zip(b)
        .all(|(x, y)| (x - phase * y).norm() <= tol)
}
