//! Dense state-vector simulation.
//!
//! Qubit 0 is the most significant bit of the basis index. A register of `n`
//! qubits stores `2^n` amplitudes in ascending index order.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MAX_QUBITS: usize = 24;
pub const NORM_TOL: f64 = 1e-10;
pub const UNITARY_TOL: f64 = 1e-12;
const VANISHING_PROB: f64 = 1e-14;

pub const QUBIT_ORDER: &str = "qubit 0 is the most significant bit of the amplitude index";

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Single-qubit amplitude pair `cos(theta/4)|0> + sin(theta/4)|1>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitParam {
    pub theta: f64,
}

impl QubitParam {
    pub fn new(theta: f64) -> Self {
        Self { theta }
    }

    pub fn amplitudes(&self) -> [f64; 2] {
        let half = self.theta / 4.0;
        [half.cos(), half.sin()]
    }
}

pub type Matrix2 = [[Complex64; 2]; 2];

/// Gates used by the channel circuits, the protocol steps and the walks.
///
/// Controls come before the target in every multi-qubit variant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "UPPERCASE")]
pub enum Gate {
    H { target: usize },
    X { target: usize },
    Z { target: usize },
    Ry { target: usize, theta: f64 },
    Cnot { control: usize, target: usize },
    Ch { control: usize, target: usize },
    Ccnot { control1: usize, control2: usize, target: usize },
}

impl Gate {
    pub fn h(target: usize) -> Self {
        Gate::H { target }
    }
    pub fn x(target: usize) -> Self {
        Gate::X { target }
    }
    pub fn z(target: usize) -> Self {
        Gate::Z { target }
    }
    pub fn ry(target: usize, theta: f64) -> Self {
        Gate::Ry { target, theta }
    }
    pub fn cnot(control: usize, target: usize) -> Self {
        Gate::Cnot { control, target }
    }
    pub fn ch(control: usize, target: usize) -> Self {
        Gate::Ch { control, target }
    }
    pub fn ccnot(control1: usize, control2: usize, target: usize) -> Self {
        Gate::Ccnot { control1, control2, target }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Gate::H { .. } => "H",
            Gate::X { .. } => "X",
            Gate::Z { .. } => "Z",
            Gate::Ry { .. } => "RY",
            Gate::Cnot { .. } => "CNOT",
            Gate::Ch { .. } => "CH",
            Gate::Ccnot { .. } => "CCNOT",
        }
    }

    /// Qubits the gate touches, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match *self {
            Gate::H { target } | Gate::X { target } | Gate::Z { target } | Gate::Ry { target, .. } => {
                vec![target]
            }
            Gate::Cnot { control, target } | Gate::Ch { control, target } => vec![control, target],
            Gate::Ccnot { control1, control2, target } => vec![control1, control2, target],
        }
    }

    fn controls_and_target(&self) -> (Vec<usize>, usize) {
        let mut q = self.qubits();
        let t = q.pop().expect("every gate has a target");
        (q, t)
    }

    /// The 2x2 block applied to the target when all controls are set.
    pub fn target_block(&self) -> Matrix2 {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        match *self {
            Gate::H { .. } | Gate::Ch { .. } => [[h, h], [h, -h]],
            Gate::X { .. } | Gate::Cnot { .. } | Gate::Ccnot { .. } => [[ZERO, ONE], [ONE, ZERO]],
            Gate::Z { .. } => [[ONE, ZERO], [ZERO, -ONE]],
            Gate::Ry { theta, .. } => {
                let (s, c) = (theta / 2.0).sin_cos();
                [
                    [Complex64::new(c, 0.0), Complex64::new(-s, 0.0)],
                    [Complex64::new(s, 0.0), Complex64::new(c, 0.0)],
                ]
            }
        }
    }

    /// Full `2^k x 2^k` unitary over the gate's own qubits, first listed
    /// qubit most significant.
    pub fn matrix(&self) -> Vec<Vec<Complex64>> {
        let (controls, _) = self.controls_and_target();
        let k = controls.len() + 1;
        let dim = 1usize << k;
        let block = self.target_block();
        let mut m = vec![vec![ZERO; dim]; dim];
        let ctrl_mask = (dim - 1) & !1;
        for (row, m_row) in m.iter_mut().enumerate() {
            for (col, entry) in m_row.iter_mut().enumerate() {
                if row & !1 != col & !1 {
                    continue;
                }
                *entry = if col & ctrl_mask == ctrl_mask {
                    block[row & 1][col & 1]
                } else if row == col {
                    ONE
                } else {
                    ZERO
                };
            }
        }
        m
    }

    pub fn validate(&self, num_qubits: usize) -> Result<()> {
        let qs = self.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= num_qubits {
                return Err(Error::QubitIndex { index: q, num_qubits });
            }
            if qs[..i].contains(&q) {
                return Err(Error::DuplicateQubit(q));
            }
        }
        Ok(())
    }
}

/// Reduced single-qubit density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(pub Matrix2);

impl DensityMatrix {
    pub fn trace(&self) -> Complex64 {
        self.0[0][0] + self.0[1][1]
    }

    /// `<psi|rho|psi>` for a pure single-qubit state.
    pub fn expectation(&self, psi: [Complex64; 2]) -> f64 {
        let mut acc = ZERO;
        for (i, row) in self.0.iter().enumerate() {
            for (j, &rho) in row.iter().enumerate() {
                acc += psi[i].conj() * rho * psi[j];
            }
        }
        acc.re
    }

    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1];
        let mean = (a + d) / 2.0;
        let disc = (((a - d) / 2.0).powi(2) + b.norm_sqr()).sqrt();
        [mean - disc, mean + disc]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    num_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_count(n: usize) -> Result<()> {
    if (1..=MAX_QUBITS).contains(&n) {
        Ok(())
    } else {
        Err(Error::QubitCount(n))
    }
}

impl StateVector {
    /// `|0...0>` on `num_qubits` qubits.
    pub fn new(num_qubits: usize) -> Result<Self> {
        check_count(num_qubits)?;
        let mut amplitudes = vec![ZERO; 1 << num_qubits];
        amplitudes[0] = ONE;
        Ok(Self { num_qubits, amplitudes })
    }

    /// Computational basis state; `bits` is read left to right as qubits 0..n.
    pub fn basis(bits: &str) -> Result<Self> {
        let n = bits.len();
        check_count(n)?;
        let idx = usize::from_str_radix(bits, 2)
            .map_err(|_| Error::InvalidValue { key: "bits".into(), reason: bits.into() })?;
        let mut s = Self::new(n)?;
        s.amplitudes[0] = ZERO;
        s.amplitudes[idx] = ONE;
        Ok(s)
    }

    /// Normalizes the given amplitudes. Fails on a zero vector or a length
    /// that is not a power of two.
    pub fn from_amplitudes(amplitudes: Vec<Complex64>) -> Result<Self> {
        let len = amplitudes.len();
        if !len.is_power_of_two() {
            return Err(Error::InvalidValue { key: "amplitudes".into(), reason: format!("length {len}") });
        }
        let num_qubits = len.trailing_zeros() as usize;
        check_count(num_qubits)?;
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm < VANISHING_PROB {
            return Err(Error::InvalidValue { key: "amplitudes".into(), reason: "zero vector".into() });
        }
        Ok(Self { num_qubits, amplitudes: amplitudes.into_iter().map(|a| a / norm).collect() })
    }

    /// Builds a normalized state from `(coefficient, bitstring)` terms.
    pub fn from_terms(num_qubits: usize, terms: &[(Complex64, &str)]) -> Result<Self> {
        check_count(num_qubits)?;
        let mut amps = vec![ZERO; 1 << num_qubits];
        for (c, bits) in terms {
            if bits.len() != num_qubits {
                return Err(Error::InvalidValue { key: "bits".into(), reason: (*bits).to_string() });
            }
            let idx = usize::from_str_radix(bits, 2)
                .map_err(|_| Error::InvalidValue { key: "bits".into(), reason: (*bits).to_string() })?;
            amps[idx] += *c;
        }
        Self::from_amplitudes(amps)
    }

    pub fn prepare_qubit(p: QubitParam) -> Self {
        let [a, b] = p.amplitudes();
        Self { num_qubits: 1, amplitudes: vec![Complex64::new(a, 0.0), Complex64::new(b, 0.0)] }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitude(&self, bits: &str) -> Option<Complex64> {
        if bits.len() != self.num_qubits {
            return None;
        }
        usize::from_str_radix(bits, 2).ok().map(|i| self.amplitudes[i])
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    fn bit_mask(&self, qubit: usize) -> usize {
        1 << (self.num_qubits - 1 - qubit)
    }

    fn check_qubit(&self, qubit: usize) -> Result<()> {
        if qubit < self.num_qubits {
            Ok(())
        } else {
            Err(Error::QubitIndex { index: qubit, num_qubits: self.num_qubits })
        }
    }

    pub fn apply(&self, gate: &Gate) -> Result<Self> {
        let mut out = self.clone();
        out.apply_in_place(gate)?;
        Ok(out)
    }

    pub fn apply_all(&self, gates: &[Gate]) -> Result<Self> {
        let mut out = self.clone();
        for g in gates {
            out.apply_in_place(g)?;
        }
        Ok(out)
    }

    pub fn apply_in_place(&mut self, gate: &Gate) -> Result<()> {
        gate.validate(self.num_qubits)?;
        let (controls, target) = gate.controls_and_target();
        let ctrl_mask = controls.iter().fold(0, |m, &c| m | self.bit_mask(c));
        self.apply_controlled_block(ctrl_mask, target, gate.target_block());
        Ok(())
    }

    /// Applies an arbitrary 2x2 block to `target`; used for Pauli corrections.
    pub fn apply_block(&mut self, target: usize, block: Matrix2) -> Result<()> {
        self.check_qubit(target)?;
        self.apply_controlled_block(0, target, block);
        Ok(())
    }

    fn apply_controlled_block(&mut self, ctrl_mask: usize, target: usize, u: Matrix2) {
        let tmask = self.bit_mask(target);
        for i in 0..self.amplitudes.len() {
            if i & tmask != 0 || i & ctrl_mask != ctrl_mask {
                continue;
            }
            let j = i | tmask;
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[j];
            self.amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
            self.amplitudes[j] = u[1][0] * a0 + u[1][1] * a1;
        }
    }

    /// Kronecker product; `self` supplies the high-order qubits.
    pub fn tensor(&self, other: &StateVector) -> Result<Self> {
        let n = self.num_qubits + other.num_qubits;
        check_count(n)?;
        let mut amps = Vec::with_capacity(1 << n);
        for a in &self.amplitudes {
            for b in &other.amplitudes {
                amps.push(a * b);
            }
        }
        Ok(Self { num_qubits: n, amplitudes: amps })
    }

    /// Probability of reading `1` on `qubit`.
    pub fn prob_one(&self, qubit: usize) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.bit_mask(qubit);
        Ok(self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(i, _)| i & mask != 0)
            .map(|(_, a)| a.norm_sqr())
            .sum())
    }

    /// Projects `qubit` onto `outcome` without renormalizing. Returns the
    /// branch probability (squared norm of what is left).
    pub fn project_unnormalized(&mut self, qubit: usize, outcome: u8) -> Result<f64> {
        self.check_qubit(qubit)?;
        let mask = self.bit_mask(qubit);
        let keep_set = outcome != 0;
        let mut p = 0.0;
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if (i & mask != 0) == keep_set {
                p += a.norm_sqr();
            } else {
                *a = ZERO;
            }
        }
        Ok(p)
    }

    /// Projects onto `outcome` and renormalizes. Returns the probability of
    /// that outcome before projection.
    pub fn project(&mut self, qubit: usize, outcome: u8) -> Result<f64> {
        let before = self.norm().powi(2);
        let p = self.project_unnormalized(qubit, outcome)?;
        if p < VANISHING_PROB {
            return Err(Error::CorruptState(qubit));
        }
        self.renormalize();
        Ok(p / before)
    }

    pub fn renormalize(&mut self) {
        let n = self.norm();
        if n > 0.0 {
            for a in &mut self.amplitudes {
                *a /= n;
            }
        }
    }

    /// Born-rule measurement of one qubit with collapse.
    pub fn measure<R: Rng + ?Sized>(&self, qubit: usize, rng: &mut R) -> Result<(u8, StateVector, f64)> {
        let p1 = self.prob_one(qubit)?;
        let p0 = 1.0 - p1;
        if p1 < VANISHING_PROB && p0 < VANISHING_PROB {
            return Err(Error::CorruptState(qubit));
        }
        let outcome = u8::from(rng.gen::<f64>() < p1);
        let mut collapsed = self.clone();
        collapsed.project_unnormalized(qubit, outcome)?;
        collapsed.renormalize();
        Ok((outcome, collapsed, if outcome == 1 { p1 } else { p0 }))
    }

    /// Born probabilities of every basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    pub fn bitstring(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.num_qubits)
    }

    /// Samples `shots` full-register measurements.
    pub fn sample_all<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> BTreeMap<String, u64> {
        let mut cumulative = Vec::with_capacity(self.amplitudes.len());
        let mut acc = 0.0;
        for p in self.probabilities() {
            acc += p;
            cumulative.push(acc);
        }
        let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
        for _ in 0..shots {
            let r = rng.gen::<f64>() * acc;
            let idx = cumulative.partition_point(|&c| c <= r).min(cumulative.len() - 1);
            *counts.entry(idx).or_default() += 1;
        }
        counts.into_iter().map(|(i, c)| (self.bitstring(i), c)).collect()
    }

    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(self.num_qubits, other.num_qubits));
        }
        Ok(self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum())
    }

    /// `|<ideal|actual>|^2`, insensitive to global phase.
    pub fn fidelity(ideal: &StateVector, actual: &StateVector) -> Result<f64> {
        Ok(ideal.inner(actual)?.norm_sqr().clamp(0.0, 1.0))
    }

    /// Partial trace over every qubit except `qubit`.
    pub fn reduced_single_qubit(&self, qubit: usize) -> Result<DensityMatrix> {
        self.check_qubit(qubit)?;
        let mask = self.bit_mask(qubit);
        let mut rho = [[ZERO; 2]; 2];
        for i in 0..self.amplitudes.len() {
            if i & mask != 0 {
                continue;
            }
            let a0 = self.amplitudes[i];
            let a1 = self.amplitudes[i | mask];
            rho[0][0] += a0 * a0.conj();
            rho[0][1] += a0 * a1.conj();
            rho[1][0] += a1 * a0.conj();
            rho[1][1] += a1 * a1.conj();
        }
        Ok(DensityMatrix(rho))
    }

    /// Copy with global phase fixed so the first non-negligible amplitude is
    /// real and positive.
    pub fn phase_normalized(&self) -> StateVector {
        let mut out = self.clone();
        if let Some(first) = self.amplitudes.iter().find(|a| a.norm() > 1e-12) {
            let phase = first.conj() / first.norm();
            for a in &mut out.amplitudes {
                *a *= phase;
            }
        }
        out
    }

    /// Largest absolute amplitude difference after phase normalization.
    pub fn max_deviation(&self, other: &StateVector) -> Result<f64> {
        if self.num_qubits != other.num_qubits {
            return Err(Error::DimensionMismatch(self.num_qubits, other.num_qubits));
        }
        let a = self.phase_normalized();
        let b = other.phase_normalized();
        Ok(a.amplitudes.iter().zip(&b.amplitudes).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }

    /// Uniform superposition over all basis states.
    pub fn uniform(num_qubits: usize) -> Result<Self> {
        check_count(num_qubits)?;
        let dim = 1usize << num_qubits;
        let a = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
        Ok(Self { num_qubits, amplitudes: vec![a; dim] })
    }

    /// Flips the sign of every basis amplitude whose index is marked.
    pub fn phase_oracle(&mut self, marked: impl Fn(usize) -> bool) {
        for (i, a) in self.amplitudes.iter_mut().enumerate() {
            if marked(i) {
                *a = -*a;
            }
        }
    }

    /// Grover diffusion `2|s><s| - I` about the uniform state.
    pub fn diffuse(&mut self) {
        let mean: Complex64 = self.amplitudes.iter().sum::<Complex64>() / self.amplitudes.len() as f64;
        for a in &mut self.amplitudes {
            *a = mean * 2.0 - *a;
        }
    }

    pub fn to_dump(&self) -> StateDump {
        StateDump {
            num_qubits: self.num_qubits,
            qubit_order: QUBIT_ORDER.to_string(),
            amplitudes: self.amplitudes.iter().map(|a| [a.re, a.im]).collect(),
        }
    }

    pub fn from_dump(d: &StateDump) -> Result<Self> {
        if d.amplitudes.len() != 1usize.checked_shl(d.num_qubits as u32).unwrap_or(0) {
            return Err(Error::InvalidValue {
                key: "amplitudes".into(),
                reason: format!("expected 2^{} entries", d.num_qubits),
            });
        }
        Self::from_amplitudes(d.amplitudes.iter().map(|[re, im]| Complex64::new(*re, *im)).collect())
    }
}

/// JSON form of a state: `{"num_qubits", "qubit_order", "amplitudes": [[re, im], ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateDump {
    pub num_qubits: usize,
    pub qubit_order: String,
    pub amplitudes: Vec<[f64; 2]>,
}
