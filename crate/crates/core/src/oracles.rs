//! Oracle models over a quantized amplitude table, and the reversible
//! primitives that turn a digit oracle into a phase oracle.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::amplitudes::QuantizedAmplitudes;
use crate::ceil_log2;
use crate::error::{Error, Result};
use crate::statesim::{Circuit, Gate, GateKind, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OracleKind {
    /// `|i>|j> -> (-1)^{A_ij} |i>|j>`.
    PhaseBit,
    /// `|i>|y> -> |i>|y xor A_i>`.
    Digit,
}

/// An oracle materialized from a bit table, with run-local query counters.
#[derive(Debug)]
pub struct OracleModel<'a> {
    kind: OracleKind,
    bits: &'a QuantizedAmplitudes,
    queries: AtomicU64,
    round_queries: AtomicU64,
}

impl<'a> OracleModel<'a> {
    pub fn new(kind: OracleKind, bits: &'a QuantizedAmplitudes) -> Self {
        Self { kind, bits, queries: AtomicU64::new(0), round_queries: AtomicU64::new(0) }
    }

    pub fn phase(bits: &'a QuantizedAmplitudes) -> Self {
        Self::new(OracleKind::PhaseBit, bits)
    }

    pub fn digit(bits: &'a QuantizedAmplitudes) -> Self {
        Self::new(OracleKind::Digit, bits)
    }

    pub fn kind(&self) -> OracleKind {
        self.kind
    }

    pub fn bits(&self) -> &'a QuantizedAmplitudes {
        self.bits
    }

    /// Raw applications of this oracle.
    pub fn query_count(&self) -> u64 {
        self.queries.load(Ordering::Relaxed)
    }

    /// Phase queries served; equals `query_count` for a phase oracle and
    /// counts emulated phase queries for a digit oracle.
    pub fn round_query_count(&self) -> u64 {
        match self.kind {
            OracleKind::PhaseBit => self.query_count(),
            OracleKind::Digit => self.round_queries.load(Ordering::Relaxed),
        }
    }

    pub fn reset(&self) {
        self.queries.store(0, Ordering::Relaxed);
        self.round_queries.store(0, Ordering::Relaxed);
    }

    fn tick(&self) {
        self.queries.fetch_add(1, Ordering::Relaxed);
    }

    fn expect(&self, kind: OracleKind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::InvalidArgument(format!("{:?} oracle used as {:?}", self.kind, kind)));
        }
        Ok(())
    }

    /// Multiplies every component `(i, j)` with `A_ij = 1` by `phase`. One
    /// query. `phase = -1` is the plain phase oracle.
    pub fn apply_bit_phase(&self, state: &mut StateVector, phase: Complex64) -> Result<()> {
        self.expect(OracleKind::PhaseBit)?;
        let (n, g) = (self.bits.n(), self.bits.g());
        if state.dims() != [n, g] {
            return Err(Error::dims([n, g], state.dims()));
        }
        let amps = state.amplitudes_mut();
        for i in 0..n {
            let row = self.bits.row(i);
            for j in 0..g {
                if row >> (g - 1 - j) & 1 == 1 {
                    amps[i * g + j] *= phase;
                }
            }
        }
        self.tick();
        Ok(())
    }

    /// Digit query on the basis input `|i>|0>`, returning the digit string
    /// `A_i` read off the data register. One query.
    pub fn lookup(&self, i: usize) -> Result<u64> {
        self.expect(OracleKind::Digit)?;
        if i >= self.bits.n() {
            return Err(Error::OutOfRange(format!("index {i} of {}", self.bits.n())));
        }
        self.tick();
        Ok(self.bits.row(i))
    }
}

/// `U_omega` on a state with registers `[N, g]`.
pub fn apply_phase_oracle(state: &StateVector, o: &OracleModel) -> Result<StateVector> {
    let mut out = state.clone();
    o.apply_bit_phase(&mut out, Complex64::new(-1.0, 0.0))?;
    Ok(out)
}

/// `U_amp` on registers `[N, 2^D, ...]` with `D >= g`. The value `A_i` is
/// XORed into the top `g` bits of the data register; trailing registers are
/// spectators.
pub fn apply_digit_oracle(state: &StateVector, o: &OracleModel) -> Result<StateVector> {
    o.expect(OracleKind::Digit)?;
    let q = o.bits;
    let dims = state.dims();
    if dims.len() < 2 || dims[0] != q.n() {
        return Err(Error::dims(format!("[{}, 2^D, ...]", q.n()), dims));
    }
    let data_dim = dims[1];
    if !data_dim.is_power_of_two() || data_dim.trailing_zeros() as usize >= 64 {
        return Err(Error::dims("power-of-two data register", data_dim));
    }
    let d = data_dim.trailing_zeros() as usize;
    if d < q.g() {
        return Err(Error::dims(format!("data register of at least {} bits", q.g()), d));
    }
    let inner: usize = dims[2..].iter().product();
    let src = state.amplitudes();
    let mut out = vec![Complex64::new(0.0, 0.0); src.len()];
    for i in 0..q.n() {
        let v = (q.row(i) << (d - q.g())) as usize;
        let block = i * data_dim * inner;
        for y in 0..data_dim {
            let from = block + y * inner;
            let to = block + (y ^ v) * inner;
            out[to..to + inner].copy_from_slice(&src[from..from + inner]);
        }
    }
    o.tick();
    StateVector::new(out, dims.to_vec())
}

/// Result of one reversible comparison.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Comparison {
    /// `a >= b`.
    pub flag: bool,
    pub toffolis: usize,
    pub ancillas: usize,
}

/// Wire layout of [`comparator_circuit`]; every register is least
/// significant bit first.
#[derive(Clone, Debug)]
pub struct ComparatorCircuit {
    pub circuit: Circuit,
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub temp: Vec<usize>,
    pub carry: usize,
    pub flag: usize,
}

/// Computes `a >= b` into a flag as the carry out of `a + not(b) + 1`,
/// using a MAJ ladder on a copy of `a`, then uncomputes everything but the
/// flag.
pub fn comparator_circuit(g: usize) -> Result<ComparatorCircuit> {
    if g == 0 {
        return Err(Error::OutOfRange("comparator needs g >= 1".into()));
    }
    let mut c = Circuit::new(Vec::<String>::new());
    let a: Vec<usize> = (0..g).map(|k| c.add_wire(format!("a{k}"))).collect();
    let b: Vec<usize> = (0..g).map(|k| c.add_wire(format!("b{k}"))).collect();
    let temp: Vec<usize> = (0..g).map(|k| c.add_wire(format!("t{k}"))).collect();
    let carry = c.add_wire("carry");
    let flag = c.add_wire("flag");

    let mut compute = Vec::new();
    compute.extend((0..g).map(|k| Gate::Cnot { control: a[k], target: temp[k] }));
    compute.extend(b.iter().map(|&w| Gate::X(w)));
    compute.push(Gate::X(carry));
    for k in 0..g {
        let x = if k == 0 { carry } else { temp[k - 1] };
        compute.extend([
            Gate::Cnot { control: temp[k], target: b[k] },
            Gate::Cnot { control: temp[k], target: x },
            Gate::Toffoli { c1: x, c2: b[k], target: temp[k] },
        ]);
    }
    c.extend(compute.iter().copied())?;
    c.push(Gate::Cnot { control: temp[g - 1], target: flag })?;
    c.extend(compute.iter().rev().copied())?;
    Ok(ComparatorCircuit { circuit: c, a, b, temp, carry, flag })
}

/// Reversible `a >= b` on `g`-bit values, evaluated on the circuit.
pub fn comparator(a: u64, b: u64, g: usize) -> Result<Comparison> {
    if g == 0 || g > 63 {
        return Err(Error::OutOfRange(format!("comparator width {g}")));
    }
    if a >> g != 0 || b >> g != 0 {
        return Err(Error::OutOfRange(format!("operands {a}, {b} exceed {g} bits")));
    }
    let cc = comparator_circuit(g)?;
    let mut bits = vec![false; cc.circuit.n_wires()];
    for k in 0..g {
        bits[cc.a[k]] = a >> k & 1 == 1;
        bits[cc.b[k]] = b >> k & 1 == 1;
    }
    let before = bits.clone();
    cc.circuit.apply_classical(&mut bits)?;
    let flag = bits[cc.flag];
    bits[cc.flag] = false;
    debug_assert_eq!(bits, before, "ancillas restored");
    Ok(Comparison { flag, toffolis: cc.circuit.count(GateKind::Toffoli), ancillas: g + 1 })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum NetworkForm {
    /// Swaps outside the light cone of the addressed bit removed.
    #[default]
    Pruned,
    Full,
}

/// Fredkin network that applies Z to data qubit `x` for address `|x>`.
#[derive(Clone, Debug)]
pub struct PermutationNetwork {
    pub circuit: Circuit,
    pub q: usize,
    /// Data wires `d0..d(2^q - 1)`.
    pub data: Vec<usize>,
    /// Address wires, most significant first.
    pub address: Vec<usize>,
}

impl PermutationNetwork {
    pub fn fredkins(&self) -> usize {
        self.circuit.count(GateKind::Fredkin)
    }
}

/// [`build_permutation_network_with`] in pruned form.
pub fn build_permutation_network(q: usize) -> Result<PermutationNetwork> {
    build_permutation_network_with(q, NetworkForm::Pruned)
}

/// Butterfly of controlled swaps that brings data qubit `x` to position 0,
/// a Z there, and the mirror image.
pub fn build_permutation_network_with(q: usize, form: NetworkForm) -> Result<PermutationNetwork> {
    if q > 16 {
        return Err(Error::OutOfRange(format!("permutation network with {q} address qubits")));
    }
    let size = 1usize << q;
    let mut c = Circuit::new(Vec::<String>::new());
    let data: Vec<usize> = (0..size).map(|p| c.add_wire(format!("d{p}"))).collect();
    let address: Vec<usize> = (0..q).map(|b| c.add_wire(format!("a{b}"))).collect();
    let mut forward = Vec::new();
    for b in (0..q).rev() {
        let step = 1usize << b;
        let control = address[q - 1 - b];
        let pairs: Vec<usize> = match form {
            NetworkForm::Pruned => (0..step).collect(),
            NetworkForm::Full => (0..size).filter(|p| p & step == 0).collect(),
        };
        forward.extend(pairs.into_iter().map(|p| Gate::Fredkin { control, a: data[p], b: data[p + step] }));
    }
    c.extend(forward.iter().copied())?;
    c.push(Gate::Z(data[0]))?;
    c.extend(forward.iter().rev().copied())?;
    Ok(PermutationNetwork { circuit: c, q, data, address })
}

/// Per-query cost of emulating the phase oracle through the digit oracle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ReductionCost {
    /// Fredkins in the network, one Toffoli each.
    pub toffoli: usize,
    /// `2 g ceil(log2 g)`.
    pub toffoli_bound: usize,
    /// Data register plus address qubits.
    pub ancillas: usize,
}

/// Phase oracle emulated with two digit-oracle calls around a permutation
/// network.
#[derive(Debug)]
pub struct PhaseFromDigit<'o, 'a> {
    oracle: &'o OracleModel<'a>,
    network: PermutationNetwork,
}

pub fn phase_oracle_from_digit<'o, 'a>(o: &'o OracleModel<'a>) -> Result<PhaseFromDigit<'o, 'a>> {
    o.expect(OracleKind::Digit)?;
    let network = build_permutation_network(ceil_log2(o.bits.g()))?;
    Ok(PhaseFromDigit { oracle: o, network })
}

impl PhaseFromDigit<'_, '_> {
    pub fn network(&self) -> &PermutationNetwork {
        &self.network
    }

    pub fn cost(&self) -> ReductionCost {
        let g = self.oracle.bits.g();
        ReductionCost {
            toffoli: self.network.fredkins(),
            toffoli_bound: 2 * g * ceil_log2(g),
            ancillas: self.network.data.len() + self.network.q,
        }
    }

    /// Acts like [`apply_phase_oracle`] on `[N, g]`.
    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let bits = self.oracle.bits;
        let (n, g) = (bits.n(), bits.g());
        if state.dims() != [n, g] {
            return Err(Error::dims([n, g], state.dims()));
        }
        let q = self.network.q;
        let addr_dim = 1usize << q;
        let data_dim = 1usize << self.network.data.len();
        let padded = state.pad_register(1, addr_dim)?;
        let zero_data = StateVector::zero(vec![data_dim]);
        // [N, 2^q] -> [N, 2^D, 2^q] with the data register cleared
        let mut amps = Vec::with_capacity(n * data_dim * addr_dim);
        for i in 0..n {
            let row = &padded.amplitudes()[i * addr_dim..(i + 1) * addr_dim];
            for z in zero_data.amplitudes() {
                amps.extend(row.iter().map(|a| a * z));
            }
        }
        let full = StateVector::new(amps, vec![n, data_dim, addr_dim])?;
        let loaded = apply_digit_oracle(&full, self.oracle)?;

        let block = data_dim * addr_dim;
        let mut out = Vec::with_capacity(loaded.len());
        for i in 0..n {
            let slice = &loaded.amplitudes()[i * block..(i + 1) * block];
            let sv = StateVector::new(slice.to_vec(), vec![block])?;
            out.extend(self.network.circuit.simulate(&sv)?.into_amplitudes());
        }
        let marked = StateVector::new(out, vec![n, data_dim, addr_dim])?;
        let cleared = apply_digit_oracle(&marked, self.oracle)?;
        self.oracle.round_queries.fetch_add(1, Ordering::Relaxed);

        let total = cleared.norm().powi(2);
        let stray = total - cleared.marginal(1)?[0];
        if stray > 1e-12 * total.max(1.0) {
            return Err(Error::InvalidArgument(format!("data register left with weight {stray:e}")));
        }
        let back = cleared.project_register(1, zero_data.amplitudes())?;
        let (trimmed, _) = back.truncate_register(1, g)?;
        Ok(trimmed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::amplitudes::QuantizedAmplitudes;
    use proptest::prelude::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    #[test]
    fn single_sign_flip() {
        let q = QuantizedAmplitudes::from_rows(1, 0, vec![1, 0]).unwrap();
        let o = OracleModel::phase(&q);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = StateVector::from_real(&[h, h], vec![2, 1]).unwrap();
        let out = apply_phase_oracle(&s, &o).unwrap();
        assert_eq!(out.amplitudes(), &[c(-h), c(h)]);
        assert_eq!(o.query_count(), 1);
    }

    #[test]
    fn zero_table_is_identity() {
        let q = QuantizedAmplitudes::from_rows(3, 0, vec![0; 4]).unwrap();
        let o = OracleModel::phase(&q);
        let s = StateVector::from_real(&[0.25; 12], vec![4, 3]).unwrap();
        assert_eq!(apply_phase_oracle(&s, &o).unwrap(), s);
    }

    #[test]
    fn wrong_kind_or_dims() {
        let q = QuantizedAmplitudes::from_rows(2, 0, vec![1, 2]).unwrap();
        let s = StateVector::zero(vec![2, 2]);
        assert!(apply_phase_oracle(&s, &OracleModel::digit(&q)).is_err());
        assert!(apply_phase_oracle(&StateVector::zero(vec![2, 3]), &OracleModel::phase(&q)).is_err());
        assert!(apply_digit_oracle(&StateVector::zero(vec![2, 2]), &OracleModel::digit(&q)).is_err());
    }

    #[test]
    fn digit_oracle_writes_values() {
        let q = QuantizedAmplitudes::from_rows(3, 0, vec![5, 0, 7, 2]).unwrap();
        let o = OracleModel::digit(&q);
        for i in 0..4 {
            let s = StateVector::basis(vec![4, 8, 3], &[i, 0, 1]).unwrap();
            let out = apply_digit_oracle(&s, &o).unwrap();
            let want = StateVector::basis(vec![4, 8, 3], &[i, q.row(i) as usize, 1]).unwrap();
            assert_eq!(out, want);
            assert_eq!(apply_digit_oracle(&out, &o).unwrap(), s);
        }
        assert_eq!(o.query_count(), 8);
        assert_eq!(o.round_query_count(), 0);
    }

    #[test]
    fn digit_oracle_pads_low_bits() {
        let q = QuantizedAmplitudes::from_rows(3, 0, vec![0b101]).unwrap();
        let o = OracleModel::digit(&q);
        let out = apply_digit_oracle(&StateVector::zero(vec![1, 16]), &o).unwrap();
        assert_eq!(out, StateVector::basis(vec![1, 16], &[0, 0b1010]).unwrap());
    }

    #[test]
    fn comparator_exhaustive() {
        for g in 1..=4usize {
            for a in 0..1u64 << g {
                for b in 0..1u64 << g {
                    let r = comparator(a, b, g).unwrap();
                    assert_eq!(r.flag, a >= b, "g={g} a={a} b={b}");
                    assert_eq!(r.toffolis, 2 * g);
                    assert_eq!(r.ancillas, g + 1);
                }
            }
        }
        assert!(comparator(16, 0, 4).is_err());
    }

    #[test]
    fn comparator_extremes() {
        assert!(comparator(9, 9, 4).unwrap().flag);
        assert!(!comparator(0, 15, 4).unwrap().flag);
        assert!(!comparator(0, 1, 1).unwrap().flag);
    }

    fn check_network(net: &PermutationNetwork) {
        let n_data = net.data.len();
        let size = 1usize << net.circuit.n_wires();
        for x in 0..1usize << net.q {
            for d in 0..1usize << n_data {
                let k = d << net.q | x;
                let out = net.circuit.simulate(&StateVector::basis(vec![size], &[k]).unwrap()).unwrap();
                let sign = if d >> (n_data - 1 - x) & 1 == 1 { -1.0 } else { 1.0 };
                let want = StateVector::basis(vec![size], &[k]).unwrap().scaled(c(sign));
                assert!(out.distance(&want).unwrap() < 1e-12, "x={x} d={d:b}");
            }
        }
    }

    #[test]
    fn network_flips_addressed_bit() {
        for q in 0..=3 {
            check_network(&build_permutation_network(q).unwrap());
            check_network(&build_permutation_network_with(q, NetworkForm::Full).unwrap());
        }
    }

    #[test]
    fn network_sizes() {
        for q in 1..=6usize {
            let g = 1usize << q;
            let full = build_permutation_network_with(q, NetworkForm::Full).unwrap();
            let pruned = build_permutation_network(q).unwrap();
            assert_eq!(full.fredkins(), q * g);
            assert_eq!(pruned.fredkins(), 2 * (g - 1));
            assert!(full.fredkins() <= 2 * g * q);
            if q >= 2 {
                assert!(pruned.fredkins() < full.fredkins());
            }
        }
    }

    #[test]
    fn emulated_phase_toy() {
        let q = QuantizedAmplitudes::from_rows(2, 0, vec![0b10, 0b00]).unwrap();
        let o = OracleModel::digit(&q);
        let p = phase_oracle_from_digit(&o).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let s = StateVector::from_real(&[h, 0.0, h, 0.0], vec![2, 2]).unwrap();
        let out = p.apply(&s).unwrap();
        let want = StateVector::from_real(&[-h, 0.0, h, 0.0], vec![2, 2]).unwrap();
        assert!(out.distance(&want).unwrap() < 1e-12);
        assert_eq!(o.query_count(), 2);
        assert_eq!(o.round_query_count(), 1);
    }

    #[test]
    fn reduction_cost_within_bound() {
        for g in [2usize, 4, 8] {
            let q = QuantizedAmplitudes::from_rows(g, 0, vec![1]).unwrap();
            let o = OracleModel::digit(&q);
            let cost = phase_oracle_from_digit(&o).unwrap().cost();
            assert!(cost.toffoli <= cost.toffoli_bound);
            assert_eq!(cost.ancillas, g + ceil_log2(g));
        }
    }

    fn table() -> impl Strategy<Value = QuantizedAmplitudes> {
        (1usize..=5, 1usize..=6).prop_flat_map(|(g, n)| {
            prop::collection::vec(0u64..(1 << g), n)
                .prop_map(move |rows| QuantizedAmplitudes::from_rows(g, 0, rows).unwrap())
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn emulation_matches_phase_oracle(q in table(), seed in prop::collection::vec(-1.0f64..1.0, 60)) {
            let (n, g) = (q.n(), q.g());
            let amps: Vec<Complex64> = (0..n * g)
                .map(|k| Complex64::new(seed[k % 60], seed[(7 * k + 3) % 60]))
                .collect();
            let s = StateVector::new(amps, vec![n, g]).unwrap();
            let direct = apply_phase_oracle(&s, &OracleModel::phase(&q)).unwrap();
            let digit = OracleModel::digit(&q);
            let emulated = phase_oracle_from_digit(&digit).unwrap().apply(&s).unwrap();
            prop_assert!(direct.distance(&emulated).unwrap() < 1e-10);
        }

        #[test]
        fn oracles_are_involutions(q in table()) {
            let (n, g) = (q.n(), q.g());
            let s = StateVector::from_real(
                &(0..n * g).map(|k| (k as f64 * 0.37).sin()).collect::<Vec<_>>(), vec![n, g]).unwrap();
            let o = OracleModel::phase(&q);
            let twice = apply_phase_oracle(&apply_phase_oracle(&s, &o).unwrap(), &o).unwrap();
            prop_assert!(twice.distance(&s).unwrap() < 1e-14);
            prop_assert_eq!(o.query_count(), 2);
        }
    }
}
