//! Amplitude-gradient states and their gate-level preparation.

use crate::ceil_log2;
use crate::error::{Error, Result};
use crate::statesim::{Circuit, Gate, StateVector, MAX_SIM_WIRES};

/// Place-value weights of the address register.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientSpec {
    g: usize,
    weights: Option<Vec<f64>>,
}

impl GradientSpec {
    /// Binary weights `w_j = 2^-j`.
    pub fn binary(g: usize) -> Result<Self> {
        if g == 0 {
            return Err(Error::OutOfRange("gradient state needs g >= 1".into()));
        }
        Ok(Self { g, weights: None })
    }

    /// Arbitrary positive weights `w_j`.
    pub fn weighted(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::OutOfRange("gradient state needs g >= 1".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidArgument(format!("weight {w} is not strictly positive")));
        }
        Ok(Self { g: weights.len(), weights: Some(weights) })
    }

    pub fn g(&self) -> usize {
        self.g
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Normalized real amplitudes.
    pub fn amplitudes(&self) -> Vec<f64> {
        match &self.weights {
            // 2^((g-j-1)/2) / sqrt(2^g - 1), written to stay finite for large g
            None => {
                let norm = 1.0 - 2f64.powi(-(self.g as i32));
                (0..self.g).map(|j| (2f64.powi(-(j as i32 + 1)) / norm).sqrt()).collect()
            }
            Some(w) => {
                let total: f64 = w.iter().sum();
                w.iter().map(|x| (x / total).sqrt()).collect()
            }
        }
    }
}

/// `|g>_G` over a `g`-dimensional address register.
pub fn gradient_state(spec: &GradientSpec) -> StateVector {
    StateVector::from_real(&spec.amplitudes(), vec![spec.g]).expect("dims match")
}

/// Amplitudes `2^-(j+1)/2` for `j < g` plus a slack entry `2^-g/2`; already
/// normalized.
pub fn slack_gradient_amplitudes(g: usize) -> Vec<f64> {
    let mut a: Vec<f64> = (0..g).map(|j| 2f64.powf(-(j as f64 + 1.0) / 2.0)).collect();
    a.push(2f64.powf(-(g as f64) / 2.0));
    a
}

/// Gradient state with one slack dimension appended (`g + 1` entries whose
/// last two amplitudes coincide).
pub fn slack_gradient_state(g: usize) -> Result<StateVector> {
    if g == 0 {
        return Err(Error::OutOfRange("slack gradient state needs g >= 1".into()));
    }
    StateVector::from_real(&slack_gradient_amplitudes(g), vec![g + 1])
}

/// Two-qubit gate used to split amplitude along the unary chain.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum SplitGate {
    #[default]
    SqrtCnot,
    SqrtSwap,
}

/// Unary chain on `g + 1` wires: starting from `|10...0>`, leaves amplitude
/// `2^-(j+1)/2` on the one-hot state at `j < g` and `2^-g/2` at `g`.
pub fn unary_chain(g: usize, split: SplitGate) -> Result<Circuit> {
    if g == 0 {
        return Err(Error::OutOfRange("unary chain needs g >= 1".into()));
    }
    let mut c = Circuit::new((0..=g).map(|k| format!("u{k}")));
    for k in 0..g {
        match split {
            SplitGate::SqrtCnot => {
                c.push(Gate::SqrtCnot { control: k, target: k + 1 })?;
                c.push(Gate::Cnot { control: k + 1, target: k })?;
            }
            SplitGate::SqrtSwap => c.push(Gate::SqrtSwap(k, k + 1))?,
        }
        // both halves carry phases e^{+-i pi/4}; these make them real
        c.push(Gate::Tdg(k))?;
        c.push(Gate::T(k + 1))?;
    }
    Ok(c)
}

/// Gate-level preparation of the slack gradient state.
#[derive(Clone, Debug)]
pub struct GradientCircuit {
    pub circuit: Circuit,
    pub g: usize,
    /// Unary wires `u0..=ug`.
    pub unary: Vec<usize>,
    /// Address wires, most significant first.
    pub address: Vec<usize>,
}

impl GradientCircuit {
    /// `|10...0>|0...0>`.
    pub fn input_state(&self) -> StateVector {
        let n = self.circuit.n_wires();
        StateVector::basis(vec![1 << n], &[1 << (n - 1)]).expect("index in range")
    }

    /// Address-register state given that the unary register is back in
    /// `|0...0>`, truncated to the `g + 1` labels. Also returns the weight
    /// found outside that subspace.
    pub fn address_state(&self, output: &StateVector) -> Result<(StateVector, f64)> {
        let m = self.address.len();
        let split = output.reshape(vec![1 << self.unary.len(), 1 << m])?;
        let amps = split.amplitudes();
        let kept = &amps[..self.g + 1];
        let inside: f64 = kept.iter().map(|a| a.norm_sqr()).sum();
        let total: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        Ok((StateVector::new(kept.to_vec(), vec![self.g + 1])?, total - inside))
    }
}

/// [`build_gradient_circuit_with`] using controlled square roots of X.
pub fn build_gradient_circuit(g: usize) -> Result<GradientCircuit> {
    build_gradient_circuit_with(g, SplitGate::SqrtCnot)
}

/// Unary chain, unary-to-binary conversion onto `ceil(log2(g+1))` address
/// qubits, then half a permutation network that walks the one-hot marker
/// back to `u0`, where an X clears it.
pub fn build_gradient_circuit_with(g: usize, split: SplitGate) -> Result<GradientCircuit> {
    if g < 2 {
        return Err(Error::OutOfRange("gradient circuit needs g >= 2".into()));
    }
    let m = ceil_log2(g + 1);
    let n = g + 1 + m;
    if n > MAX_SIM_WIRES {
        return Err(Error::WireCapExceeded { wires: n, cap: MAX_SIM_WIRES });
    }
    let chain = unary_chain(g, split)?;
    let mut c = chain.clone();
    let address: Vec<usize> = (0..m).map(|b| c.add_wire(format!("a{b}"))).collect();
    let unary: Vec<usize> = (0..=g).collect();
    // address wire carrying the bit of weight 2^b
    let addr_bit = |b: usize| address[m - 1 - b];

    for (j, &u) in unary.iter().enumerate().skip(1) {
        for b in 0..m {
            if j >> b & 1 == 1 {
                c.push(Gate::Cnot { control: u, target: addr_bit(b) })?;
            }
        }
    }
    for b in (0..m).rev() {
        let step = 1usize << b;
        for p in 0..step {
            if p + step <= g {
                c.push(Gate::Fredkin { control: addr_bit(b), a: unary[p], b: unary[p + step] })?;
            }
        }
    }
    c.push(Gate::X(unary[0]))?;
    Ok(GradientCircuit { circuit: c, g, unary, address })
}
