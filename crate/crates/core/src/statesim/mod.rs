//! Dense statevectors over composite registers, plus a qubit-level circuit
//! simulator for the primitives.

mod circuit;
mod gate;

pub use circuit::{Circuit, MAX_SIM_WIRES};
pub use gate::{Gate, GateKind};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Amplitudes over a row-major product of registers. Register 0 is the
/// outermost (slowest varying) index.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amps: Vec<Complex64>,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amps: Vec<Complex64>, dims: Vec<usize>) -> Result<Self> {
        let len: usize = dims.iter().product();
        if dims.is_empty() || dims.contains(&0) || len != amps.len() {
            return Err(Error::dims(len, amps.len()));
        }
        Ok(Self { amps, dims })
    }

    pub fn from_real(values: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect(), dims)
    }

    /// `|0...0>`.
    pub fn zero(dims: Vec<usize>) -> Self {
        let mut amps = vec![ZERO; dims.iter().product()];
        amps[0] = ONE;
        Self { amps, dims }
    }

    pub fn basis(dims: Vec<usize>, index: &[usize]) -> Result<Self> {
        let mut s = Self { amps: vec![ZERO; dims.iter().product()], dims };
        let k = s.flat_index(index)?;
        s.amps[k] = ONE;
        Ok(s)
    }

    /// Tensor product, first factor outermost.
    pub fn product(factors: &[&StateVector]) -> Self {
        let mut amps = vec![ONE];
        let mut dims = Vec::new();
        for f in factors {
            amps = amps.iter().flat_map(|a| f.amps.iter().map(move |b| a * b)).collect();
            dims.extend_from_slice(&f.dims);
        }
        Self { amps, dims }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn flat_index(&self, index: &[usize]) -> Result<usize> {
        if index.len() != self.dims.len() {
            return Err(Error::dims(self.dims.len(), index.len()));
        }
        let mut k = 0;
        for (&i, &d) in index.iter().zip(&self.dims) {
            if i >= d {
                return Err(Error::OutOfRange(format!("index {i} in register of size {d}")));
            }
            k = k * d + i;
        }
        Ok(k)
    }

    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (slot, &d) in out.iter_mut().zip(&self.dims).rev() {
            *slot = k % d;
            k /= d;
        }
        out
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(self.scaled(Complex64::new(1.0 / n, 0.0)))
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { amps: self.amps.iter().map(|a| a * c).collect(), dims: self.dims.clone() }
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: Complex64, other: &StateVector) -> Result<Self> {
        self.check_dims(other)?;
        Ok(Self { amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + c * b).collect(), dims: self.dims.clone() })
    }

    fn check_dims(&self, other: &StateVector) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::dims(&self.dims, &other.dims));
        }
        Ok(())
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &StateVector) -> Result<Complex64> {
        self.check_dims(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    pub fn distance(&self, other: &StateVector) -> Result<f64> {
        self.check_dims(other)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt())
    }

    /// `|<self|other>|^2` for normalized inputs.
    pub fn fidelity(&self, other: &StateVector) -> Result<f64> {
        Ok(self.overlap(other)?.norm_sqr())
    }

    /// `(outer, dim, inner)` strides for register `r`.
    fn split(&self, r: usize) -> Result<(usize, usize, usize)> {
        if r >= self.dims.len() {
            return Err(Error::OutOfRange(format!("register {r} of a {}-register state", self.dims.len())));
        }
        let outer = self.dims[..r].iter().product();
        let inner = self.dims[r + 1..].iter().product();
        Ok((outer, self.dims[r], inner))
    }

    /// Applies `u` to register `target`, leaving the others untouched.
    pub fn apply_unitary(&self, u: &DMatrix<Complex64>, target: usize) -> Result<Self> {
        let mut out = self.clone();
        out.apply_unitary_mut(u, target)?;
        Ok(out)
    }

    pub fn apply_unitary_mut(&mut self, u: &DMatrix<Complex64>, target: usize) -> Result<()> {
        let (outer, d, inner) = self.split(target)?;
        if u.nrows() != d || u.ncols() != d {
            return Err(Error::dims(d, (u.nrows(), u.ncols())));
        }
        let mut buf = vec![ZERO; d];
        for o in 0..outer {
            for n in 0..inner {
                let base = o * d * inner + n;
                for (k, slot) in buf.iter_mut().enumerate() {
                    *slot = self.amps[base + k * inner];
                }
                for r in 0..d {
                    let mut acc = ZERO;
                    for (c, b) in buf.iter().enumerate() {
                        acc += u[(r, c)] * b;
                    }
                    self.amps[base + r * inner] = acc;
                }
            }
        }
        Ok(())
    }

    /// Contracts register `register` with `<v|`, removing it from the dims.
    pub fn project_register(&self, register: usize, v: &[Complex64]) -> Result<Self> {
        let (outer, d, inner) = self.split(register)?;
        if v.len() != d {
            return Err(Error::dims(d, v.len()));
        }
        if self.dims.len() == 1 {
            return Err(Error::InvalidArgument("cannot contract the only register".into()));
        }
        let mut amps = vec![ZERO; outer * inner];
        for o in 0..outer {
            for n in 0..inner {
                amps[o * inner + n] = (0..d).map(|k| v[k].conj() * self.amps[o * d * inner + k * inner + n]).sum();
            }
        }
        let mut dims = self.dims.clone();
        dims.remove(register);
        Ok(Self { amps, dims })
    }

    /// Probability of each value of `register`.
    pub fn marginal(&self, register: usize) -> Result<Vec<f64>> {
        let (outer, d, inner) = self.split(register)?;
        let mut p = vec![0.0; d];
        for o in 0..outer {
            for (k, pk) in p.iter_mut().enumerate() {
                let base = o * d * inner + k * inner;
                *pk += self.amps[base..base + inner].iter().map(|a| a.norm_sqr()).sum::<f64>();
            }
        }
        Ok(p)
    }

    /// Reinterprets the amplitudes under a different register split.
    pub fn reshape(&self, dims: Vec<usize>) -> Result<Self> {
        Self::new(self.amps.clone(), dims)
    }

    /// Zero-pads register `register` up to dimension `to`.
    pub fn pad_register(&self, register: usize, to: usize) -> Result<Self> {
        let (outer, d, inner) = self.split(register)?;
        if to < d {
            return Err(Error::dims(format!(">= {d}"), to));
        }
        let mut amps = vec![ZERO; outer * to * inner];
        for o in 0..outer {
            for k in 0..d {
                let src = o * d * inner + k * inner;
                let dst = o * to * inner + k * inner;
                amps[dst..dst + inner].copy_from_slice(&self.amps[src..src + inner]);
            }
        }
        let mut dims = self.dims.clone();
        dims[register] = to;
        Ok(Self { amps, dims })
    }

    /// Keeps the first `to` values of `register` and reports the weight dropped.
    pub fn truncate_register(&self, register: usize, to: usize) -> Result<(Self, f64)> {
        let (outer, d, inner) = self.split(register)?;
        if to > d || to == 0 {
            return Err(Error::dims(format!("1..={d}"), to));
        }
        let mut amps = Vec::with_capacity(outer * to * inner);
        let mut dropped = 0.0;
        for o in 0..outer {
            for k in 0..d {
                let src = o * d * inner + k * inner;
                let block = &self.amps[src..src + inner];
                if k < to {
                    amps.extend_from_slice(block);
                } else {
                    dropped += block.iter().map(|a| a.norm_sqr()).sum::<f64>();
                }
            }
        }
        let mut dims = self.dims.clone();
        dims[register] = to;
        Ok((Self { amps, dims }, dropped))
    }
}

/// Free-function form of [`StateVector::overlap`].
pub fn overlap(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.overlap(b)
}

/// Kronecker product of square matrices, first factor on the most
/// significant index.
pub fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

/// A state preparation `P = P_0 (x) P_1 (x) ...` built from one unitary per
/// register; `P|0> = |s>`.
#[derive(Clone, Debug)]
pub struct Preparation {
    factors: Vec<DMatrix<Complex64>>,
}

impl Preparation {
    pub fn new(factors: Vec<DMatrix<Complex64>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidArgument("preparation needs a register".into()));
        }
        for f in &factors {
            if f.nrows() != f.ncols() || f.nrows() == 0 {
                return Err(Error::dims("square matrix", (f.nrows(), f.ncols())));
            }
        }
        Ok(Self { factors })
    }

    pub fn dims(&self) -> Vec<usize> {
        self.factors.iter().map(|f| f.nrows()).collect()
    }

    pub fn factors(&self) -> &[DMatrix<Complex64>] {
        &self.factors
    }

    /// `P|0>`.
    pub fn prepare(&self) -> StateVector {
        let cols: Vec<StateVector> = self
            .factors
            .iter()
            .map(|f| StateVector { amps: f.column(0).iter().copied().collect(), dims: vec![f.nrows()] })
            .collect();
        StateVector::product(&cols.iter().collect::<Vec<_>>())
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        let mut out = state.clone();
        for (r, f) in self.factors.iter().enumerate() {
            out.apply_unitary_mut(f, r)?;
        }
        Ok(out)
    }

    pub fn apply_adjoint(&self, state: &StateVector) -> Result<StateVector> {
        let mut out = state.clone();
        for (r, f) in self.factors.iter().enumerate() {
            out.apply_unitary_mut(&f.adjoint(), r)?;
        }
        Ok(out)
    }

    /// Full matrix; only sensible for small registers.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_element(1, 1, ONE);
        for f in &self.factors {
            m = kron(&m, f);
        }
        m
    }
}

/// A unitary whose first column is `v` (a phased Householder reflection).
pub fn householder_preparation(v: &[Complex64]) -> Result<DMatrix<Complex64>> {
    let d = v.len();
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    if d == 0 || norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let v: Vec<Complex64> = v.iter().map(|a| a / norm).collect();
    let phase = if v[0].norm() > 0.0 { v[0] / v[0].norm() } else { ONE };
    // u = phase*e0 - v; H = I - 2uu^dag/|u|^2 maps phase*e0 to v
    let mut u: Vec<Complex64> = v.iter().map(|a| -a).collect();
    u[0] += phase;
    let un = u.iter().map(|a| a.norm_sqr()).sum::<f64>();
    let mut h = DMatrix::<Complex64>::identity(d, d);
    if un > 1e-30 {
        for r in 0..d {
            for c in 0..d {
                h[(r, c)] -= u[r] * u[c].conj() * (2.0 / un);
            }
        }
    }
    Ok(h * phase)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn hadamard() -> DMatrix<Complex64> {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        DMatrix::from_row_slice(2, 2, &[c(s), c(s), c(s), c(-s)])
    }

    #[test]
    fn identity_leaves_state() {
        let s = StateVector::from_real(&[0.6, 0.0, 0.0, 0.8], vec![2, 2]).unwrap();
        let out = s.apply_unitary(&DMatrix::identity(2, 2), 1).unwrap();
        assert_eq!(out, s);
    }

    #[test]
    fn hadamards_make_uniform() {
        let mut s = StateVector::zero(vec![2, 2, 2]);
        for r in 0..3 {
            s.apply_unitary_mut(&hadamard(), r).unwrap();
        }
        for a in s.amplitudes() {
            assert_abs_diff_eq!(a.re, 8f64.sqrt().recip(), epsilon = 1e-15);
            assert_abs_diff_eq!(a.im, 0.0);
        }
    }

    #[test]
    fn z_on_plus() {
        let z = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_real(&[s, s], vec![2]).unwrap();
        let out = plus.apply_unitary(&z, 0).unwrap();
        assert_eq!(out, StateVector::from_real(&[s, -s], vec![2]).unwrap());
    }

    #[test]
    fn mismatched_operator_is_rejected() {
        let s = StateVector::zero(vec![3, 2]);
        assert!(matches!(s.apply_unitary(&hadamard(), 0), Err(Error::DimensionMismatch { .. })));
        assert!(s.overlap(&StateVector::zero(vec![6])).is_err());
    }

    #[test]
    fn basis_overlaps() {
        let a = StateVector::basis(vec![4, 3], &[1, 2]).unwrap();
        let b = StateVector::basis(vec![4, 3], &[2, 2]).unwrap();
        assert_eq!(a.overlap(&b).unwrap(), ZERO);
        assert_eq!(a.overlap(&a).unwrap(), ONE);
        assert_eq!(a.multi_index(a.flat_index(&[1, 2]).unwrap()), vec![1, 2]);
    }

    #[test]
    fn projection_and_marginal() {
        let s = 0.5;
        let st = StateVector::from_real(&[s, s, s, -s], vec![2, 2]).unwrap();
        let p = st.project_register(1, &[c(1.0), c(0.0)]).unwrap();
        assert_eq!(p.dims(), &[2]);
        assert_eq!(p.amplitudes(), &[c(0.5), c(0.5)]);
        assert_eq!(st.marginal(0).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn pad_and_truncate_round_trip() {
        let st = StateVector::from_real(&[0.6, 0.8], vec![1, 2]).unwrap();
        let padded = st.pad_register(1, 4).unwrap();
        assert_eq!(padded.len(), 4);
        let (back, dropped) = padded.truncate_register(1, 2).unwrap();
        assert_eq!(back, st);
        assert_eq!(dropped, 0.0);
    }

    fn real_vec(d: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-1.0f64..1.0, d).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn householder_first_column(v in real_vec(5), phase in 0.0..std::f64::consts::TAU) {
            let v: Vec<Complex64> = v.iter().map(|&x| Complex64::from_polar(x, phase)).collect();
            let h = householder_preparation(&v).unwrap();
            let n = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            for (r, a) in v.iter().enumerate() {
                prop_assert!((h[(r, 0)] - a / n).norm() < 1e-12);
            }
            let err = (h.adjoint() * &h - DMatrix::<Complex64>::identity(5, 5)).norm();
            prop_assert!(err < 1e-12);
        }

        #[test]
        fn unitary_preserves_norm(v in real_vec(6), theta in 0.0..std::f64::consts::TAU) {
            let st = StateVector::from_real(&v, vec![3, 2]).unwrap().normalized().unwrap();
            let (s, co) = theta.sin_cos();
            let rot = DMatrix::from_row_slice(2, 2, &[c(co), c(-s), c(s), c(co)]);
            let out = st.apply_unitary(&rot, 1).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-10);
        }
    }
}
