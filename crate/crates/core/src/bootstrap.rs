//! Average bit weights and the bootstrapped initial state.

use std::path::Path;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amplify::{self, PrimeBounds};
use crate::amplitudes::{AmplitudeVector, QuantizedAmplitudes};
use crate::error::{Error, Result};
use crate::oracles::OracleModel;
use crate::statesim::{householder_preparation, Preparation, StateVector};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProfileSource {
    Exact,
    Sampled,
}

/// Per-bit one frequencies and the weighted profile `Abar_j` built from them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BitWeightProfile {
    pub g: usize,
    /// Fraction of rows with bit `j` set.
    pub raw_frequencies: Vec<f64>,
    /// `2^{-(j+1)/2} N f_j`.
    pub weighted: Vec<f64>,
    pub source: ProfileSource,
    pub shots: Option<u64>,
}

fn weigh(raw: &[f64], n: usize) -> Vec<f64> {
    raw.iter().enumerate().map(|(j, f)| 2f64.powf(-(j as f64 + 1.0) / 2.0) * n as f64 * f).collect()
}

impl BitWeightProfile {
    /// Profile from raw one frequencies over `n` rows.
    pub fn from_frequencies(raw: Vec<f64>, n: usize, source: ProfileSource, shots: Option<u64>) -> Result<Self> {
        if raw.is_empty() {
            return Err(Error::InvalidArgument("empty profile".into()));
        }
        if let Some((j, &f)) = raw.iter().enumerate().find(|(_, f)| !(0.0..=1.0).contains(*f)) {
            return Err(Error::InvalidAmplitude { index: j, value: f });
        }
        Ok(Self { g: raw.len(), weighted: weigh(&raw, n), raw_frequencies: raw, source, shots })
    }

    pub fn l2(&self) -> f64 {
        self.weighted.iter().map(|w| w * w).sum::<f64>().sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.weighted.iter().all(|&w| w == 0.0)
    }

    pub fn read(path: &Path) -> Result<Self> {
        Ok(serde_json::from_str(&std::fs::read_to_string(path)?)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)? + "\n")?;
        Ok(())
    }
}

/// Exact profile `Abar_j = 2^{-(j+1)/2} sum_i A_ij`.
pub fn average_bit_weights(q: &QuantizedAmplitudes) -> BitWeightProfile {
    let n = q.n();
    let raw = q.column_counts().iter().map(|&c| c as f64 / n as f64).collect();
    BitWeightProfile::from_frequencies(raw, n, ProfileSource::Exact, None).expect("counts in range")
}

/// Estimates the profile from `shots` digit-oracle lookups of random
/// indices. Indices are drawn without replacement, reshuffling after every
/// full pass, so `shots = N` reads every row once.
///
/// Raw frequencies are kept as measured; the weighted profile floors each
/// frequency at `2^-g`.
pub fn estimate_bit_weights(o: &OracleModel, shots: u64, seed: u64) -> Result<BitWeightProfile> {
    if shots == 0 {
        return Err(Error::OutOfRange("shots must be positive".into()));
    }
    let q = o.bits();
    let (n, g) = (q.n(), q.g());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    let mut ones = vec![0u64; g];
    let mut pos = n;
    for _ in 0..shots {
        if pos == n {
            order.shuffle(&mut rng);
            pos = 0;
        }
        let row = o.lookup(order[pos])?;
        pos += 1;
        for (j, c) in ones.iter_mut().enumerate() {
            *c += row >> (g - 1 - j) & 1;
        }
    }
    let raw: Vec<f64> = ones.iter().map(|&c| c as f64 / shots as f64).collect();
    let floor = 2f64.powi(-(g as i32));
    let floored: Vec<f64> = raw.iter().map(|&f| f.max(floor)).collect();
    Ok(BitWeightProfile {
        g,
        weighted: weigh(&floored, n),
        raw_frequencies: raw,
        source: ProfileSource::Sampled,
        shots: Some(shots),
    })
}

/// `|s'> = uniform (x) |Abar>/|Abar|_2` and its per-register preparation.
pub fn optimized_initial_state(profile: &BitWeightProfile, n: usize) -> Result<(StateVector, Preparation)> {
    if profile.is_zero() {
        return Err(Error::ZeroVector);
    }
    let g = profile.g;
    let addr = StateVector::from_real(&profile.weighted, vec![g])?.normalized()?;
    let uniform = amplify::uniform_state(n);
    let prep = Preparation::new(vec![
        householder_preparation(uniform.amplitudes())?,
        householder_preparation(addr.amplitudes())?,
    ])?;
    Ok((StateVector::product(&[&uniform, &addr]), prep))
}

/// Largest per-bit deviation of a profile's raw frequencies from the exact
/// ones of `q`.
pub fn profile_mismatch(q: &QuantizedAmplitudes, profile: &BitWeightProfile) -> Result<f64> {
    if profile.g != q.g() {
        return Err(Error::dims(q.g(), profile.g));
    }
    let exact = average_bit_weights(q);
    Ok(exact.raw_frequencies.iter().zip(&profile.raw_frequencies).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
}

/// `|<omega|s'>|^2` for the address profile `profile`:
/// `<Abar, b>^2 / (|b|^2 N |A|_1)`, which is `|Abar|^2/(N |A|_1)` for the
/// exact profile.
pub fn lambda1_prime(q: &QuantizedAmplitudes, profile: &BitWeightProfile) -> Result<f64> {
    if q.is_zero() {
        return Err(Error::ZeroVector);
    }
    if profile.g != q.g() {
        return Err(Error::dims(q.g(), profile.g));
    }
    if profile.is_zero() {
        return Err(Error::ZeroVector);
    }
    let exact = average_bit_weights(q);
    let dot: f64 = exact.weighted.iter().zip(&profile.weighted).map(|(a, b)| a * b).sum();
    let l1 = q.norms().l1;
    let b2 = profile.l2().powi(2);
    Ok((dot * dot / (b2 * q.n() as f64 * l1)).min(1.0))
}

/// Brute-force `|<omega|s'>|^2`.
pub fn measured_lambda1_prime(q: &QuantizedAmplitudes, profile: &BitWeightProfile) -> Result<f64> {
    let (s, _) = optimized_initial_state(profile, q.n())?;
    amplify::intermediate_target(q)?.fidelity(&s)
}

/// Bootstrapped runtime bound. Requires `2^(1-g) |alpha|_1 < 1/2`.
pub fn runtime_bound_prime(
    q: &QuantizedAmplitudes,
    alpha: &AmplitudeVector,
    delta1: f64,
    delta2: f64,
    profile: &BitWeightProfile,
) -> Result<PrimeBounds> {
    if alpha.len() != q.n() {
        return Err(Error::dims(q.n(), alpha.len()));
    }
    if q.shift() != 0 {
        return Err(Error::Unsupported("runtime bounds assume an unshifted quantization".into()));
    }
    for d in [delta1, delta2] {
        if !(d > 0.0 && d < 1.0) {
            return Err(Error::OutOfRange(format!("delta {d} outside (0, 1)")));
        }
    }
    let l1 = alpha.normalized()?.norms().l1;
    let x = 2f64.powi(1 - q.g() as i32) * l1;
    if x >= 0.5 {
        return Err(Error::BoundInvalid { x });
    }
    let exact = average_bit_weights(q);
    let abar = exact.l2();
    if abar == 0.0 {
        return Err(Error::ZeroVector);
    }
    let logs = (2.0 / delta1).ln() * (2.0 / delta2).ln();
    let lp = lambda1_prime(q, profile)?;
    let (_, l2) = amplify::stage_overlaps(q)?;
    Ok(PrimeBounds {
        x,
        scaling: logs * (1.0 + x) * (q.n() as f64).sqrt() * l1 / abar,
        measured: logs / (lp * l2).sqrt(),
        core: amplify::core_rounds(lp * l2)?,
    })
}

/// `|A||B| / <A, B>`, the relative slowdown of loading with profile `approx`
/// instead of `exact`.
pub fn bootstrap_slowdown_ratio(exact: &BitWeightProfile, approx: &BitWeightProfile) -> Result<f64> {
    if exact.g != approx.g {
        return Err(Error::dims(exact.g, approx.g));
    }
    if exact.is_zero() || approx.is_zero() {
        return Err(Error::ZeroVector);
    }
    let dot: f64 = exact.weighted.iter().zip(&approx.weighted).map(|(a, b)| a * b).sum();
    if dot <= 0.0 {
        return Err(Error::OrthogonalProfiles);
    }
    Ok((exact.l2() * approx.l2() / dot).max(1.0))
}

/// Address register of a state with registers `[N, g]` after contracting
/// the index register with the uniform state.
pub fn address_register(state: &StateVector) -> Result<StateVector> {
    let n = state.dims()[0];
    let u = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    state.project_register(0, &u)
}
