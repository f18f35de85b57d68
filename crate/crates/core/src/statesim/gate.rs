use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Gates of the fixed gate set. Operands are wire indices; for controlled
/// gates the controls come first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Gate {
    H(usize),
    X(usize),
    Z(usize),
    T(usize),
    Tdg(usize),
    Cnot {
        control: usize,
        target: usize,
    },
    /// Controlled-S, `diag(1, 1, 1, i)`.
    CS {
        control: usize,
        target: usize,
    },
    Toffoli {
        c1: usize,
        c2: usize,
        target: usize,
    },
    /// Controlled swap of `a` and `b`.
    Fredkin {
        control: usize,
        a: usize,
        b: usize,
    },
    SqrtSwap(usize, usize),
    /// Controlled square root of X.
    SqrtCnot {
        control: usize,
        target: usize,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GateKind {
    H,
    X,
    Z,
    T,
    Tdg,
    Cnot,
    CS,
    Toffoli,
    Fredkin,
    SqrtSwap,
    SqrtCnot,
}

impl GateKind {
    pub const ALL: [GateKind; 11] = [
        GateKind::H,
        GateKind::X,
        GateKind::Z,
        GateKind::T,
        GateKind::Tdg,
        GateKind::Cnot,
        GateKind::CS,
        GateKind::Toffoli,
        GateKind::Fredkin,
        GateKind::SqrtSwap,
        GateKind::SqrtCnot,
    ];

    /// Mnemonic used in circuit dumps.
    pub fn mnemonic(self) -> &'static str {
        match self {
            GateKind::H => "H",
            GateKind::X => "X",
            GateKind::Z => "Z",
            GateKind::T => "T",
            GateKind::Tdg => "TDG",
            GateKind::Cnot => "CNOT",
            GateKind::CS => "CS",
            GateKind::Toffoli => "CCX",
            GateKind::Fredkin => "CSWAP",
            GateKind::SqrtSwap => "SQRTSWAP",
            GateKind::SqrtCnot => "SQRTCNOT",
        }
    }

    pub fn from_mnemonic(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.mnemonic() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            GateKind::H | GateKind::X | GateKind::Z | GateKind::T | GateKind::Tdg => 1,
            GateKind::Cnot | GateKind::CS | GateKind::SqrtSwap | GateKind::SqrtCnot => 2,
            GateKind::Toffoli | GateKind::Fredkin => 3,
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.mnemonic())
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn permutation(n: usize, map: impl Fn(usize) -> usize) -> DMatrix<Complex64> {
    let mut m = DMatrix::zeros(n, n);
    for k in 0..n {
        m[(map(k), k)] = c(1.0, 0.0);
    }
    m
}

fn controlled(u: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let d = u.nrows();
    let mut m = DMatrix::identity(2 * d, 2 * d);
    m.view_mut((d, d), (d, d)).copy_from(u);
    m
}

impl Gate {
    /// Builds a gate from its kind and operand list.
    pub fn from_parts(kind: GateKind, w: &[usize]) -> Option<Self> {
        if w.len() != kind.arity() {
            return None;
        }
        Some(match kind {
            GateKind::H => Gate::H(w[0]),
            GateKind::X => Gate::X(w[0]),
            GateKind::Z => Gate::Z(w[0]),
            GateKind::T => Gate::T(w[0]),
            GateKind::Tdg => Gate::Tdg(w[0]),
            GateKind::Cnot => Gate::Cnot { control: w[0], target: w[1] },
            GateKind::CS => Gate::CS { control: w[0], target: w[1] },
            GateKind::SqrtSwap => Gate::SqrtSwap(w[0], w[1]),
            GateKind::SqrtCnot => Gate::SqrtCnot { control: w[0], target: w[1] },
            GateKind::Toffoli => Gate::Toffoli { c1: w[0], c2: w[1], target: w[2] },
            GateKind::Fredkin => Gate::Fredkin { control: w[0], a: w[1], b: w[2] },
        })
    }

    pub fn kind(&self) -> GateKind {
        match self {
            Gate::H(_) => GateKind::H,
            Gate::X(_) => GateKind::X,
            Gate::Z(_) => GateKind::Z,
            Gate::T(_) => GateKind::T,
            Gate::Tdg(_) => GateKind::Tdg,
            Gate::Cnot { .. } => GateKind::Cnot,
            Gate::CS { .. } => GateKind::CS,
            Gate::Toffoli { .. } => GateKind::Toffoli,
            Gate::Fredkin { .. } => GateKind::Fredkin,
            Gate::SqrtSwap(..) => GateKind::SqrtSwap,
            Gate::SqrtCnot { .. } => GateKind::SqrtCnot,
        }
    }

    /// Operand wires in matrix order (first is the most significant).
    pub fn wires(&self) -> Vec<usize> {
        match *self {
            Gate::H(q) | Gate::X(q) | Gate::Z(q) | Gate::T(q) | Gate::Tdg(q) => vec![q],
            Gate::Cnot { control, target } | Gate::CS { control, target } | Gate::SqrtCnot { control, target } => {
                vec![control, target]
            }
            Gate::SqrtSwap(a, b) => vec![a, b],
            Gate::Toffoli { c1, c2, target } => vec![c1, c2, target],
            Gate::Fredkin { control, a, b } => vec![control, a, b],
        }
    }

    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Self {
        let w: Vec<usize> = self.wires().into_iter().map(f).collect();
        Gate::from_parts(self.kind(), &w).expect("arity preserved")
    }

    /// Inverse within the gate set, if it has one there.
    pub fn inverse(&self) -> Option<Self> {
        match *self {
            Gate::T(q) => Some(Gate::Tdg(q)),
            Gate::Tdg(q) => Some(Gate::T(q)),
            Gate::CS { .. } | Gate::SqrtSwap(..) | Gate::SqrtCnot { .. } => None,
            g => Some(g),
        }
    }

    /// True for gates that map computational basis states to basis states
    /// without phases.
    pub fn is_classical(&self) -> bool {
        matches!(self, Gate::X(_) | Gate::Cnot { .. } | Gate::Toffoli { .. } | Gate::Fredkin { .. })
    }

    pub fn matrix(&self) -> DMatrix<Complex64> {
        let one = c(1.0, 0.0);
        let zero = c(0.0, 0.0);
        let h = FRAC_1_SQRT_2;
        match self {
            Gate::H(_) => DMatrix::from_row_slice(2, 2, &[c(h, 0.0), c(h, 0.0), c(h, 0.0), c(-h, 0.0)]),
            Gate::X(_) => permutation(2, |k| k ^ 1),
            Gate::Z(_) => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![one, -one])),
            Gate::T(_) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![one, Complex64::from_polar(1.0, FRAC_PI_4)]))
            }
            Gate::Tdg(_) => {
                DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![one, Complex64::from_polar(1.0, -FRAC_PI_4)]))
            }
            Gate::Cnot { .. } => permutation(4, |k| if k >= 2 { k ^ 1 } else { k }),
            Gate::CS { .. } => DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![one, one, one, c(0.0, 1.0)])),
            Gate::Toffoli { .. } => permutation(8, |k| if k >= 6 { k ^ 1 } else { k }),
            Gate::Fredkin { .. } => permutation(8, |k| match k {
                5 => 6,
                6 => 5,
                k => k,
            }),
            Gate::SqrtSwap(..) => {
                let p = c(0.5, 0.5);
                let m = c(0.5, -0.5);
                DMatrix::from_row_slice(
                    4,
                    4,
                    &[one, zero, zero, zero, zero, p, m, zero, zero, m, p, zero, zero, zero, zero, one],
                )
            }
            Gate::SqrtCnot { .. } => {
                let p = c(0.5, 0.5);
                let m = c(0.5, -0.5);
                controlled(&DMatrix::from_row_slice(2, 2, &[p, m, m, p]))
            }
        }
    }
}

impl fmt::Display for Gate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w: Vec<String> = self.wires().iter().map(|w| w.to_string()).collect();
        write!(f, "{} {}", self.kind(), w.join(","))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn all_gates() -> Vec<Gate> {
        GateKind::ALL.iter().map(|&k| Gate::from_parts(k, &(0..k.arity()).collect::<Vec<_>>()).unwrap()).collect()
    }

    #[test]
    fn every_gate_is_unitary() {
        for g in all_gates() {
            let m = g.matrix();
            let d = m.nrows();
            assert_eq!(d, 1 << g.kind().arity());
            let err = (m.adjoint() * &m - DMatrix::<Complex64>::identity(d, d)).norm();
            assert!(err < 1e-12, "{g}: {err}");
        }
    }

    #[test]
    fn square_roots_square_to_parents() {
        let sc = Gate::SqrtCnot { control: 0, target: 1 }.matrix();
        let cn = Gate::Cnot { control: 0, target: 1 }.matrix();
        assert!((&sc * &sc - cn).norm() < 1e-12);
        let ss = Gate::SqrtSwap(0, 1).matrix();
        let swap = permutation(4, |k| [0, 2, 1, 3][k]);
        assert!((&ss * &ss - swap).norm() < 1e-12);
    }

    #[test]
    fn inverses_within_set() {
        for g in all_gates() {
            if let Some(inv) = g.inverse() {
                let prod = inv.matrix() * g.matrix();
                let d = prod.nrows();
                assert!((prod - DMatrix::<Complex64>::identity(d, d)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn mnemonics_round_trip() {
        for k in GateKind::ALL {
            assert_eq!(GateKind::from_mnemonic(k.mnemonic()), Some(k));
        }
    }
}
