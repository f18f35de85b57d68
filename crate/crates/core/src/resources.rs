//! Per-round gate and ancilla accounting.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::ceil_log2;
use crate::error::{Error, Result};
use crate::oracles::build_permutation_network;
use crate::statesim::{Circuit, GateKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Comparator with `2g + 1` ancillas.
    SandersV1,
    /// Comparator with `g + 2` ancillas.
    SandersV2,
    /// Bit-phase oracle on a gradient-state address register.
    OursV1,
    /// Digit oracle turned into a phase oracle by a permutation network.
    OursV2,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::SandersV1, Variant::SandersV2, Variant::OursV1, Variant::OursV2];

    pub fn name(self) -> &'static str {
        match self {
            Variant::SandersV1 => "sanders_v1",
            Variant::SandersV2 => "sanders_v2",
            Variant::OursV1 => "ours_v1",
            Variant::OursV2 => "ours_v2",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceTally {
    pub variant: Option<Variant>,
    pub g: Option<usize>,
    pub toffoli: usize,
    /// Closed-form upper bound where only a bound is known.
    pub toffoli_bound: Option<usize>,
    pub sqrt_swap: usize,
    pub t_gates: usize,
    pub cnot: usize,
    pub ancillas: usize,
}

/// Per-round costs for precision `g`, a power of two.
///
/// For `OursV2` the Toffoli count comes from the emitted permutation
/// network and `toffoli_bound` holds `2 g log2 g`.
pub fn tally_variant(variant: Variant, g: usize) -> Result<ResourceTally> {
    if g < 2 || !g.is_power_of_two() {
        return Err(Error::OutOfRange(format!("precision {g} is not a power of two >= 2")));
    }
    let log = ceil_log2(g);
    let base = ResourceTally { variant: Some(variant), g: Some(g), ..Default::default() };
    Ok(match variant {
        Variant::SandersV1 => ResourceTally { toffoli: 2 * g, ancillas: 2 * g + 1, ..base },
        Variant::SandersV2 => ResourceTally { toffoli: 4 * g - 2, ancillas: g + 2, ..base },
        Variant::OursV1 => ResourceTally { sqrt_swap: g, ancillas: log, ..base },
        Variant::OursV2 => {
            let net = build_permutation_network(log)?;
            let counted = tally_from_circuit(&net.circuit);
            ResourceTally {
                toffoli: counted.toffoli,
                toffoli_bound: Some(2 * g * log),
                sqrt_swap: g,
                cnot: counted.cnot,
                ancillas: net.data.len() + net.q,
                ..base
            }
        }
    })
}

/// Counts gates of an emitted circuit. A Fredkin is one Toffoli and two
/// CNOTs; a controlled square root of X is one square-root-swap equivalent
/// costing three T gates. Every wire counts as an ancilla.
pub fn tally_from_circuit(c: &Circuit) -> ResourceTally {
    let n = |k| c.count(k);
    ResourceTally {
        toffoli: n(GateKind::Toffoli) + n(GateKind::Fredkin),
        sqrt_swap: n(GateKind::SqrtSwap) + n(GateKind::SqrtCnot),
        t_gates: n(GateKind::T) + n(GateKind::Tdg) + 3 * n(GateKind::SqrtCnot),
        cnot: n(GateKind::Cnot) + 2 * n(GateKind::Fredkin),
        ancillas: c.n_wires(),
        ..Default::default()
    }
}

/// `32 (controls - 1) - 96` T gates for a multi-controlled X with
/// `controls = ceil(log2 g) + 1`.
pub fn mcx_t_cost(controls: usize) -> Result<usize> {
    let cost = 32 * controls as i64 - 32 - 96;
    if cost <= 0 {
        return Err(Error::OutOfRange(format!("T-count formula is nonpositive for {controls} controls")));
    }
    Ok(cost as usize)
}

/// Tallies of every variant at every precision, precision-major.
pub fn table(gs: &[usize]) -> Result<Vec<ResourceTally>> {
    gs.iter().flat_map(|&g| Variant::ALL.iter().map(move |&v| tally_variant(v, g))).collect()
}

/// Aligned text rendering with one column per precision.
pub fn render_table(gs: &[usize]) -> Result<String> {
    let rows = table(gs)?;
    let cell = |v: Variant, g: usize| rows.iter().find(|t| t.variant == Some(v) && t.g == Some(g)).copied();
    let mut out = String::new();
    let _ = write!(out, "{:<22}", "g");
    for g in gs {
        let _ = write!(out, "{g:>10}");
    }
    out.push('\n');
    for (section, get) in [
        (
            "toffoli",
            (|t: ResourceTally| match t.toffoli_bound {
                Some(b) => format!("{}<={}", t.toffoli, b),
                None => t.toffoli.to_string(),
            }) as fn(ResourceTally) -> String,
        ),
        ("sqrt_swap", |t: ResourceTally| t.sqrt_swap.to_string()),
        ("ancillas", |t: ResourceTally| t.ancillas.to_string()),
    ] {
        for v in Variant::ALL {
            let _ = write!(out, "{:<22}", format!("{section} {}", v.name()));
            for &g in gs {
                let t = cell(v, g).expect("tabulated");
                let _ = write!(out, "{:>10}", get(t));
            }
            out.push('\n');
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gradient::build_gradient_circuit;
    use crate::oracles::{build_permutation_network_with, NetworkForm};

    #[test]
    fn closed_form_cells() {
        let t = tally_variant(Variant::OursV1, 32).unwrap();
        assert_eq!((t.ancillas, t.toffoli, t.sqrt_swap), (5, 0, 32));
        let t = tally_variant(Variant::SandersV2, 32).unwrap();
        assert_eq!((t.ancillas, t.toffoli), (34, 126));
        let t = tally_variant(Variant::OursV2, 64).unwrap();
        assert_eq!(t.ancillas, 70);
        assert_eq!(t.toffoli_bound, Some(768));
        assert!(t.toffoli <= 768);
        assert!(tally_variant(Variant::OursV1, 12).is_err());
        assert!(tally_variant(Variant::OursV1, 1).is_err());
    }

    #[test]
    fn circuit_counts() {
        assert_eq!(tally_from_circuit(&Circuit::new(Vec::<String>::new())), ResourceTally::default());
        let pruned = tally_from_circuit(&build_permutation_network(2).unwrap().circuit);
        let full = tally_from_circuit(&build_permutation_network_with(2, NetworkForm::Full).unwrap().circuit);
        assert!(full.toffoli <= 16);
        assert!(pruned.toffoli < full.toffoli);
        assert_eq!(pruned.cnot, 2 * pruned.toffoli);
        let grad = tally_from_circuit(&build_gradient_circuit(4).unwrap().circuit);
        assert_eq!(grad.sqrt_swap, 4);
        assert_eq!(grad.t_gates, 4 * (3 + 2));
    }

    #[test]
    fn mcx_examples() {
        assert_eq!(mcx_t_cost(ceil_log2(16) + 1).unwrap(), 32);
        assert_eq!(mcx_t_cost(ceil_log2(64) + 1).unwrap(), 96);
        assert!(matches!(mcx_t_cost(ceil_log2(8) + 1), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn rendered_table_has_every_row() {
        let text = render_table(&[2, 4]).unwrap();
        assert_eq!(text.lines().count(), 1 + 3 * 4);
        assert!(text.contains("ancillas ours_v1"));
    }
}
