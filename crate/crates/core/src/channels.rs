//! Entangled resource states shared between Alice and Bob.
//!
//! Every composite channel has two constructions: direct amplitude
//! assignment from the closed-form expansion, and a gate circuit run on
//! `|0...0>`. [`verify_channel`] cross-checks them.

use std::f64::consts::{FRAC_1_SQRT_2, PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevec::{Gate, StateVector, MAX_QUBITS};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ChannelKind {
    Bell,
    Ghz3,
    W3,
    Wn { n: f64, beta: f64, eta: f64 },
    ClusterN { n: usize },
    WBell5,
    GhzBell5,
    ClusterBell6,
}

impl ChannelKind {
    pub fn num_qubits(&self) -> usize {
        match self {
            ChannelKind::Bell => 2,
            ChannelKind::Ghz3 | ChannelKind::W3 | ChannelKind::Wn { .. } => 3,
            ChannelKind::ClusterN { n } => *n,
            ChannelKind::WBell5 | ChannelKind::GhzBell5 => 5,
            ChannelKind::ClusterBell6 => 6,
        }
    }

    /// Short name used on the command line and in CSV output.
    pub fn label(&self) -> String {
        match self {
            ChannelKind::Bell => "bell".into(),
            ChannelKind::Ghz3 => "ghz3".into(),
            ChannelKind::W3 => "w3".into(),
            ChannelKind::Wn { n, .. } => format!("wn({n})"),
            ChannelKind::ClusterN { n } => format!("cluster{n}"),
            ChannelKind::WBell5 => "wbell".into(),
            ChannelKind::GhzBell5 => "ghzbell".into(),
            ChannelKind::ClusterBell6 => "clusterbell".into(),
        }
    }

    /// The three composite channels the teleportation protocols run on.
    pub fn composite() -> [ChannelKind; 3] {
        [ChannelKind::WBell5, ChannelKind::GhzBell5, ChannelKind::ClusterBell6]
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "bell" => Ok(ChannelKind::Bell),
            "ghz" | "ghz3" => Ok(ChannelKind::Ghz3),
            "w" | "w3" => Ok(ChannelKind::W3),
            "wbell" | "wbell5" => Ok(ChannelKind::WBell5),
            "ghzbell" | "ghzbell5" => Ok(ChannelKind::GhzBell5),
            "clusterbell" | "clusterbell6" => Ok(ChannelKind::ClusterBell6),
            other => other
                .strip_prefix("cluster")
                .and_then(|n| n.parse().ok())
                .map(|n| ChannelKind::ClusterN { n })
                .ok_or_else(|| Error::InvalidChannel(format!("unknown channel '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Holder {
    Alice,
    Bob,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    pub kind: ChannelKind,
    pub state: StateVector,
    /// Owner of each qubit, indexed by qubit.
    pub holders: Vec<Holder>,
}

impl ChannelState {
    pub fn qubits_of(&self, who: Holder) -> Vec<usize> {
        self.holders.iter().enumerate().filter(|(_, h)| **h == who).map(|(i, _)| i).collect()
    }
}

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// `(|100> + sqrt(n) e^{i beta}|010> + sqrt(n+1) e^{i eta}|001>) / sqrt(2+2n)`.
pub fn make_wn(n: f64, beta: f64, eta: f64) -> Result<StateVector> {
    if !(n.is_finite() && beta.is_finite() && eta.is_finite()) {
        return Err(Error::InvalidChannel("W_n parameters must be finite".into()));
    }
    if n < 0.0 {
        return Err(Error::InvalidChannel(format!("W_n requires n >= 0, got {n}")));
    }
    StateVector::from_terms(
        3,
        &[
            (real(1.0), "100"),
            (Complex64::from_polar(n.sqrt(), beta), "010"),
            (Complex64::from_polar((n + 1.0).sqrt(), eta), "001"),
        ],
    )
}

/// Linear cluster state `2^{-n/2} prod_d (|0>_d Z_{d+1} + |1>_d)`.
///
/// Basis amplitude signs are `(-1)^{sum_d (1 - b_d) b_{d+1}}`.
pub fn make_cluster(n: usize) -> Result<StateVector> {
    if n < 2 {
        return Err(Error::InvalidChannel(format!("cluster state needs n >= 2, got {n}")));
    }
    if n > MAX_QUBITS {
        return Err(Error::QubitCount(n));
    }
    let amps = (0..1usize << n)
        .map(|idx| {
            let bit = |d: usize| (idx >> (n - 1 - d)) & 1;
            let flips: usize = (0..n - 1).map(|d| (1 - bit(d)) * bit(d + 1)).sum();
            real(if flips.is_multiple_of(2) { 1.0 } else { -1.0 })
        })
        .collect();
    StateVector::from_amplitudes(amps)
}

fn bell() -> StateVector {
    StateVector::from_terms(2, &[(real(1.0), "00"), (real(1.0), "11")]).expect("static state")
}

fn ghz3() -> StateVector {
    StateVector::from_terms(3, &[(real(1.0), "000"), (real(1.0), "111")]).expect("static state")
}

fn holders_for(kind: &ChannelKind) -> Vec<Holder> {
    use Holder::{Alice as A, Bob as B};
    match kind {
        ChannelKind::WBell5 | ChannelKind::GhzBell5 => vec![A, B, B, B, A],
        ChannelKind::ClusterBell6 => vec![A, B, B, B, B, A],
        other => {
            let mut h = vec![B; other.num_qubits()];
            h[0] = A;
            h
        }
    }
}

/// Direct amplitude construction.
pub fn make_channel(kind: ChannelKind) -> Result<ChannelState> {
    let state = match kind {
        ChannelKind::Bell => bell(),
        ChannelKind::Ghz3 => ghz3(),
        ChannelKind::W3 => make_wn(1.0, 0.0, 0.0)?,
        ChannelKind::Wn { n, beta, eta } => make_wn(n, beta, eta)?,
        ChannelKind::ClusterN { n } => make_cluster(n)?,
        ChannelKind::WBell5 => {
            let c = 1.0 / (2.0 * SQRT_2);
            let r = SQRT_2 * c;
            StateVector::from_amplitudes(amps_from(
                5,
                &[(c, "10000"), (c, "01000"), (r, "00100"), (c, "10011"), (c, "01011"), (r, "00111")],
            ))?
        }
        ChannelKind::GhzBell5 => StateVector::from_amplitudes(amps_from(
            5,
            &[(0.5, "00000"), (0.5, "00011"), (0.5, "11100"), (0.5, "11111")],
        ))?,
        ChannelKind::ClusterBell6 => {
            let c = 1.0 / (2.0 * SQRT_2);
            let terms: Vec<(f64, &str)> = CLUSTER_BELL_TERMS.iter().map(|b| (c, *b)).collect();
            StateVector::from_amplitudes(amps_from(6, &terms))?
        }
    };
    Ok(ChannelState { kind, holders: holders_for(&kind), state })
}

const CLUSTER_BELL_TERMS: [&str; 8] =
    ["000000", "001100", "110000", "111100", "000011", "001111", "110011", "111111"];

fn amps_from(n: usize, terms: &[(f64, &str)]) -> Vec<Complex64> {
    let mut a = vec![Complex64::new(0.0, 0.0); 1 << n];
    for (c, bits) in terms {
        a[usize::from_str_radix(bits, 2).expect("static bitstring")] += real(*c);
    }
    a
}

fn w3_gates(a: usize, b: usize, aux: usize) -> Vec<Gate> {
    vec![Gate::ry(a, PI / 2.0), Gate::ch(a, b), Gate::cnot(b, aux), Gate::x(aux)]
}

fn ghz3_gates(a: usize, b: usize, c: usize) -> Vec<Gate> {
    vec![Gate::h(a), Gate::cnot(a, b), Gate::cnot(b, c)]
}

fn bell_gates(a: usize, b: usize) -> Vec<Gate> {
    vec![Gate::h(a), Gate::cnot(a, b)]
}

/// Gate list preparing `kind` from `|0...0>` and the state it produces.
///
/// The W construction is the rotation / controlled-Hadamard / CNOT / X
/// sequence; its output is not the weighted W state, and
/// [`verify_channel`] records how close it gets.
pub fn circuit_prepare(kind: ChannelKind) -> Result<(Vec<Gate>, StateVector)> {
    let gates = match kind {
        ChannelKind::Bell => bell_gates(0, 1),
        ChannelKind::Ghz3 => ghz3_gates(0, 1, 2),
        ChannelKind::W3 => w3_gates(0, 1, 2),
        ChannelKind::WBell5 => [w3_gates(0, 1, 2), bell_gates(3, 4)].concat(),
        ChannelKind::GhzBell5 => [ghz3_gates(0, 1, 2), bell_gates(3, 4)].concat(),
        ChannelKind::ClusterBell6 => [bell_gates(0, 1), bell_gates(2, 3), bell_gates(4, 5)].concat(),
        other => return Err(Error::UnsupportedChannel(other.label())),
    };
    let state = StateVector::new(kind.num_qubits())?.apply_all(&gates)?;
    Ok((gates, state))
}

/// Printed closed-form expansion: overall prefactor plus `(coefficient, ket)` terms.
pub fn printed_expansion(kind: ChannelKind) -> Option<(f64, Vec<(f64, &'static str)>)> {
    let terms = match kind {
        ChannelKind::Bell => (FRAC_1_SQRT_2, vec![(1.0, "00"), (1.0, "11")]),
        ChannelKind::Ghz3 => (FRAC_1_SQRT_2, vec![(1.0, "000"), (1.0, "111")]),
        ChannelKind::W3 => (0.5, vec![(1.0, "100"), (1.0, "010"), (SQRT_2, "001")]),
        ChannelKind::WBell5 => (
            1.0 / (2.0 * SQRT_2),
            vec![
                (1.0, "10000"),
                (1.0, "01000"),
                (SQRT_2, "00100"),
                (1.0, "10011"),
                (1.0, "01011"),
                (SQRT_2, "00111"),
            ],
        ),
        // Printed with a 1/sqrt(2) prefactor, which has norm sqrt(2).
        ChannelKind::GhzBell5 => (
            FRAC_1_SQRT_2,
            vec![(1.0, "00000"), (1.0, "00011"), (1.0, "11100"), (1.0, "11111")],
        ),
        ChannelKind::ClusterBell6 => {
            (1.0 / (2.0 * SQRT_2), CLUSTER_BELL_TERMS.iter().map(|b| (1.0, *b)).collect())
        }
        ChannelKind::Wn { .. } | ChannelKind::ClusterN { .. } => return None,
    };
    Some(terms)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelReport {
    pub channel: String,
    /// Direct construction vs the printed expansion after renormalizing the
    /// printed side.
    pub max_amplitude_error: f64,
    /// Norm of the printed expansion taken literally.
    pub printed_norm: f64,
    /// Fidelity of the circuit output against the direct construction.
    pub circuit_fidelity: Option<f64>,
}

pub fn verify_channel(kind: ChannelKind) -> Result<ChannelReport> {
    let direct = make_channel(kind)?.state;
    let (max_amplitude_error, printed_norm) = match printed_expansion(kind) {
        Some((pref, terms)) => {
            let raw = amps_from(kind.num_qubits(), &terms);
            let norm = pref * raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let printed = StateVector::from_amplitudes(raw)?;
            (direct.max_deviation(&printed)?, norm)
        }
        None => (0.0, direct.norm()),
    };
    let circuit_fidelity = match circuit_prepare(kind) {
        Ok((_, s)) => Some(StateVector::fidelity(&direct, &s)?),
        Err(Error::UnsupportedChannel(_)) => None,
        Err(e) => return Err(e),
    };
    Ok(ChannelReport { channel: kind.label(), max_amplitude_error, printed_norm, circuit_fidelity })
}
