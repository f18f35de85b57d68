use std::collections::BTreeMap;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use super::gate::{Gate, GateKind};
use super::StateVector;
use crate::error::{Error, Result};

/// Largest wire count accepted by [`Circuit::simulate`].
pub const MAX_SIM_WIRES: usize = 24;

/// An ordered gate list over named qubit wires.
///
/// In simulation wire 0 is the most significant bit of the basis index.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Circuit {
    wires: Vec<String>,
    gates: Vec<Gate>,
}

impl Circuit {
    pub fn new<S: Into<String>>(wires: impl IntoIterator<Item = S>) -> Self {
        Self { wires: wires.into_iter().map(Into::into).collect(), gates: Vec::new() }
    }

    pub fn wires(&self) -> &[String] {
        &self.wires
    }

    pub fn n_wires(&self) -> usize {
        self.wires.len()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn wire(&self, name: &str) -> Result<usize> {
        self.wires.iter().position(|w| w == name).ok_or_else(|| Error::UnknownWire(name.to_string()))
    }

    pub fn add_wire(&mut self, name: impl Into<String>) -> usize {
        self.wires.push(name.into());
        self.wires.len() - 1
    }

    pub fn push(&mut self, gate: Gate) -> Result<()> {
        let w = gate.wires();
        if let Some(&bad) = w.iter().find(|&&q| q >= self.wires.len()) {
            return Err(Error::UnknownWire(format!("#{bad}")));
        }
        for (k, a) in w.iter().enumerate() {
            if w[k + 1..].contains(a) {
                return Err(Error::InvalidArgument(format!("{gate} repeats wire {a}")));
            }
        }
        self.gates.push(gate);
        Ok(())
    }

    pub fn extend(&mut self, gates: impl IntoIterator<Item = Gate>) -> Result<()> {
        gates.into_iter().try_for_each(|g| self.push(g))
    }

    /// Appends `other`, whose wire `k` maps onto wire `map[k]` of `self`.
    pub fn append_mapped(&mut self, other: &Circuit, map: &[usize]) -> Result<()> {
        if map.len() != other.n_wires() {
            return Err(Error::dims(other.n_wires(), map.len()));
        }
        other.gates.iter().try_for_each(|g| self.push(g.remap(|q| map[q])))
    }

    pub fn count(&self, kind: GateKind) -> usize {
        self.gates.iter().filter(|g| g.kind() == kind).count()
    }

    pub fn counts(&self) -> BTreeMap<GateKind, usize> {
        let mut m = BTreeMap::new();
        for g in &self.gates {
            *m.entry(g.kind()).or_insert(0) += 1;
        }
        m
    }

    /// Reversed circuit with every gate inverted. Fails if some gate has no
    /// inverse inside the gate set.
    pub fn inverse(&self) -> Result<Circuit> {
        let gates = self
            .gates
            .iter()
            .rev()
            .map(|g| g.inverse().ok_or_else(|| Error::Unsupported(format!("inverse of {}", g.kind()))))
            .collect::<Result<Vec<_>>>()?;
        Ok(Circuit { wires: self.wires.clone(), gates })
    }

    /// Replaces each controlled square root of X by
    /// `H(t) T(c) T(t) CNOT T+(t) CNOT H(t)`.
    pub fn decompose_sqrt_cnot(&self) -> Circuit {
        let mut gates = Vec::with_capacity(self.gates.len());
        for &g in &self.gates {
            match g {
                Gate::SqrtCnot { control, target } => gates.extend([
                    Gate::H(target),
                    Gate::T(control),
                    Gate::T(target),
                    Gate::Cnot { control, target },
                    Gate::Tdg(target),
                    Gate::Cnot { control, target },
                    Gate::H(target),
                ]),
                g => gates.push(g),
            }
        }
        Circuit { wires: self.wires.clone(), gates }
    }

    fn check_cap(&self) -> Result<()> {
        if self.wires.len() > MAX_SIM_WIRES {
            return Err(Error::WireCapExceeded { wires: self.wires.len(), cap: MAX_SIM_WIRES });
        }
        Ok(())
    }

    /// Runs the circuit on a state over `2^n` amplitudes; the input's register
    /// split is kept.
    pub fn simulate(&self, input: &StateVector) -> Result<StateVector> {
        self.check_cap()?;
        let n = self.wires.len();
        if input.len() != 1usize << n {
            return Err(Error::dims(1usize << n, input.len()));
        }
        let mut out = input.clone();
        for g in &self.gates {
            apply_gate(out.amplitudes_mut(), n, g);
        }
        Ok(out)
    }

    /// Evaluates a phase-free reversible circuit on classical bits.
    pub fn apply_classical(&self, bits: &mut [bool]) -> Result<()> {
        if bits.len() != self.wires.len() {
            return Err(Error::dims(self.wires.len(), bits.len()));
        }
        for g in &self.gates {
            match *g {
                Gate::X(q) => bits[q] = !bits[q],
                Gate::Cnot { control, target } => bits[target] ^= bits[control],
                Gate::Toffoli { c1, c2, target } => bits[target] ^= bits[c1] && bits[c2],
                Gate::Fredkin { control, a, b } => {
                    if bits[control] {
                        bits.swap(a, b)
                    }
                }
                other => return Err(Error::Unsupported(format!("classical evaluation of {}", other.kind()))),
            }
        }
        Ok(())
    }

    /// Full `2^n x 2^n` unitary.
    pub fn unitary(&self) -> Result<DMatrix<Complex64>> {
        self.check_cap()?;
        let d = 1usize << self.wires.len();
        let mut m = DMatrix::zeros(d, d);
        for k in 0..d {
            let col = self.simulate(&StateVector::basis(vec![d], &[k])?)?;
            for (r, a) in col.amplitudes().iter().enumerate() {
                m[(r, k)] = *a;
            }
        }
        Ok(m)
    }

    /// Line-oriented text form: a `WIRES` header, then `GATE w[,w...]`.
    pub fn dump(&self) -> String {
        let mut s = format!("WIRES {}\n", self.wires.join(","));
        for g in &self.gates {
            let names: Vec<&str> = g.wires().iter().map(|&q| self.wires[q].as_str()).collect();
            let _ = writeln!(s, "{} {}", g.kind(), names.join(","));
        }
        s
    }

    pub fn parse(text: &str) -> Result<Circuit> {
        let mut circuit: Option<Circuit> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse { line: k + 1, message };
            let (head, rest) = line.split_once(char::is_whitespace).unwrap_or((line, ""));
            let operands: Vec<&str> = rest.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
            match (&mut circuit, head) {
                (None, "WIRES") => circuit = Some(Circuit::new(operands)),
                (None, _) => return Err(err("expected WIRES header".into())),
                (Some(_), "WIRES") => return Err(err("duplicate WIRES header".into())),
                (Some(c), name) => {
                    let kind = GateKind::from_mnemonic(name).ok_or_else(|| err(format!("unknown gate `{name}`")))?;
                    let w = operands
                        .iter()
                        .map(|o| c.wire(o))
                        .collect::<Result<Vec<_>>>()
                        .map_err(|e| err(e.to_string()))?;
                    let gate = Gate::from_parts(kind, &w)
                        .ok_or_else(|| err(format!("{name} takes {} operands, got {}", kind.arity(), w.len())))?;
                    c.push(gate).map_err(|e| err(e.to_string()))?;
                }
            }
        }
        circuit.ok_or(Error::Parse { line: 0, message: "empty circuit text".into() })
    }
}

fn apply_gate(amps: &mut [Complex64], n: usize, gate: &Gate) {
    let wires = gate.wires();
    let masks: Vec<usize> = wires.iter().map(|&w| 1usize << (n - 1 - w)).collect();
    let all: usize = masks.iter().sum();
    match *gate {
        Gate::X(_) | Gate::Cnot { .. } | Gate::Toffoli { .. } => {
            let ctrl = all & !masks[masks.len() - 1];
            let t = masks[masks.len() - 1];
            for k in 0..amps.len() {
                if k & all == ctrl {
                    amps.swap(k, k | t);
                }
            }
        }
        Gate::Fredkin { .. } => {
            for k in 0..amps.len() {
                if k & all == masks[0] | masks[1] {
                    amps.swap(k, k ^ masks[1] ^ masks[2]);
                }
            }
        }
        _ => {
            let m = gate.matrix();
            let d = 1usize << wires.len();
            let offsets: Vec<usize> = (0..d)
                .map(|local| {
                    masks
                        .iter()
                        .enumerate()
                        .filter(|(b, _)| local >> (wires.len() - 1 - b) & 1 == 1)
                        .map(|(_, &mk)| mk)
                        .sum()
                })
                .collect();
            let mut buf = vec![Complex64::new(0.0, 0.0); d];
            for base in 0..amps.len() {
                if base & all != 0 {
                    continue;
                }
                for (slot, &off) in buf.iter_mut().zip(&offsets) {
                    *slot = amps[base + off];
                }
                for (r, &off) in offsets.iter().enumerate() {
                    amps[base + off] = (0..d).map(|c| m[(r, c)] * buf[c]).sum();
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bell_circuit() -> Circuit {
        let mut c = Circuit::new(["a", "b"]);
        c.extend([Gate::H(0), Gate::Cnot { control: 0, target: 1 }]).unwrap();
        c
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = Circuit::new(["q0", "q1", "q2"]);
        let s = StateVector::basis(vec![8], &[5]).unwrap();
        assert_eq!(c.simulate(&s).unwrap(), s);
    }

    #[test]
    fn cnot_on_one_zero() {
        let mut c = Circuit::new(["c", "t"]);
        c.push(Gate::Cnot { control: 0, target: 1 }).unwrap();
        let s = StateVector::basis(vec![2, 2], &[1, 0]).unwrap();
        assert_eq!(c.simulate(&s).unwrap(), StateVector::basis(vec![2, 2], &[1, 1]).unwrap());
    }

    #[test]
    fn sqrt_cnot_decomposition_is_exact() {
        let mut c = Circuit::new(["c", "t"]);
        c.push(Gate::SqrtCnot { control: 0, target: 1 }).unwrap();
        let want = c.unitary().unwrap();
        let got = c.decompose_sqrt_cnot().unitary().unwrap();
        assert!((want - got).norm() < 1e-12);
    }

    #[test]
    fn controlled_s_from_t_gates() {
        let mut cs = Circuit::new(["c", "t"]);
        cs.push(Gate::CS { control: 0, target: 1 }).unwrap();
        let mut alt = Circuit::new(["c", "t"]);
        alt.extend([
            Gate::Cnot { control: 0, target: 1 },
            Gate::Tdg(1),
            Gate::Cnot { control: 0, target: 1 },
            Gate::T(0),
            Gate::T(1),
        ])
        .unwrap();
        assert!((cs.unitary().unwrap() - alt.unitary().unwrap()).norm() < 1e-12);
    }

    #[test]
    fn embedded_gates_match_matrices() {
        // a three-qubit gate on permuted wires against its matrix
        for gate in [
            Gate::Toffoli { c1: 2, c2: 0, target: 1 },
            Gate::Fredkin { control: 1, a: 2, b: 0 },
            Gate::SqrtSwap(2, 0),
            Gate::SqrtCnot { control: 2, target: 1 },
        ] {
            let mut c = Circuit::new(["x", "y", "z"]);
            c.push(gate).unwrap();
            let u = c.unitary().unwrap();
            let m = gate.matrix();
            let w = gate.wires();
            let d = m.nrows();
            for col in 0..8usize {
                for row in 0..8usize {
                    let bit = |k: usize, q: usize| k >> (2 - q) & 1;
                    let local = |k: usize| w.iter().fold(0, |acc, &q| acc << 1 | bit(k, q));
                    let spectators_equal = (0..3).filter(|q| !w.contains(q)).all(|q| bit(row, q) == bit(col, q));
                    let expect = if spectators_equal { m[(local(row), local(col))] } else { Complex64::new(0.0, 0.0) };
                    assert!((u[(row, col)] - expect).norm() < 1e-12, "{gate} {row} {col} d={d}");
                }
            }
        }
    }

    #[test]
    fn classical_matches_quantum_on_basis() {
        let mut c = Circuit::new(["a", "b", "c", "d"]);
        c.extend([
            Gate::X(0),
            Gate::Toffoli { c1: 0, c2: 1, target: 3 },
            Gate::Fredkin { control: 0, a: 2, b: 3 },
            Gate::Cnot { control: 3, target: 1 },
        ])
        .unwrap();
        for k in 0..16usize {
            let mut bits: Vec<bool> = (0..4).map(|q| k >> (3 - q) & 1 == 1).collect();
            c.apply_classical(&mut bits).unwrap();
            let idx = bits.iter().fold(0, |acc, &b| acc << 1 | b as usize);
            let out = c.simulate(&StateVector::basis(vec![16], &[k]).unwrap()).unwrap();
            assert_eq!(out.amplitudes()[idx], Complex64::new(1.0, 0.0));
        }
    }

    #[test]
    fn dump_parse_round_trip() {
        let mut c = bell_circuit();
        c.push(Gate::SqrtSwap(1, 0)).unwrap();
        let text = c.dump();
        assert_eq!(text, "WIRES a,b\nH a\nCNOT a,b\nSQRTSWAP b,a\n");
        assert_eq!(Circuit::parse(&text).unwrap(), c);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let e = Circuit::parse("WIRES a,b\nH a\nFOO b\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 3, .. }));
        assert!(Circuit::parse("H a\n").is_err());
        assert!(matches!(Circuit::parse("WIRES a\nCNOT a,zz\n").unwrap_err(), Error::Parse { line: 2, .. }));
    }

    #[test]
    fn push_validates_wires() {
        let mut c = Circuit::new(["a"]);
        assert!(c.push(Gate::X(1)).is_err());
        let mut c = Circuit::new(["a", "b"]);
        assert!(c.push(Gate::Cnot { control: 1, target: 1 }).is_err());
    }

    #[test]
    fn wire_cap() {
        let c = Circuit::new((0..25).map(|k| format!("q{k}")));
        let s = StateVector::zero(vec![2]);
        assert!(matches!(c.simulate(&s), Err(Error::WireCapExceeded { wires: 25, .. })));
    }

    #[test]
    fn inverse_undoes_clifford_t() {
        let mut c = Circuit::new(["a", "b", "c"]);
        c.extend([Gate::H(0), Gate::T(1), Gate::Toffoli { c1: 0, c2: 1, target: 2 }, Gate::Z(2)]).unwrap();
        let mut both = c.clone();
        both.extend(c.inverse().unwrap().gates().iter().copied()).unwrap();
        let u = both.unitary().unwrap();
        assert!((u - DMatrix::<Complex64>::identity(8, 8)).norm() < 1e-12);
    }

    fn state3() -> impl Strategy<Value = Vec<(f64, f64)>> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)
    }

    proptest! {
        #[test]
        fn simulation_is_linear(a in state3(), b in state3(), x in -2.0f64..2.0) {
            let mut c = Circuit::new(["p", "q", "r"]);
            c.extend([
                Gate::H(0), Gate::SqrtCnot { control: 0, target: 2 }, Gate::T(1),
                Gate::Fredkin { control: 2, a: 0, b: 1 }, Gate::SqrtSwap(1, 2), Gate::CS { control: 1, target: 0 },
            ]).unwrap();
            let mk = |v: &[(f64, f64)]| StateVector::new(
                v.iter().map(|&(r, i)| Complex64::new(r, i)).collect(), vec![8]).unwrap();
            let (sa, sb) = (mk(&a), mk(&b));
            let k = Complex64::new(x, 0.5);
            let lhs = c.simulate(&sa.axpy(k, &sb).unwrap()).unwrap();
            let rhs = c.simulate(&sa).unwrap().axpy(k, &c.simulate(&sb).unwrap()).unwrap();
            prop_assert!(lhs.distance(&rhs).unwrap() < 1e-10);
            prop_assert!((c.simulate(&sa).unwrap().norm() - sa.norm()).abs() < 1e-10);
        }
    }
}
