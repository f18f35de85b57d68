//! Reflections, fixed-point amplitude amplification and the two-stage
//! loading protocol.

use std::sync::atomic::{AtomicU64, Ordering};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::amplitudes::{AmplitudeVector, QuantizedAmplitudes};
use crate::bootstrap::{self, BitWeightProfile};
use crate::error::{Error, Result};
use crate::gradient::{gradient_state, GradientSpec};
use crate::oracles::OracleModel;
use crate::statesim::{householder_preparation, Preparation, StateVector};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Applies a phase to a marked subspace.
pub trait PhaseMarker {
    /// Multiplies the marked component of `state` by `phase`; one call.
    fn mark(&self, state: &mut StateVector, phase: Complex64) -> Result<()>;

    /// Squared norm of the marked component, without counting a call.
    fn marked_weight(&self, state: &StateVector) -> Result<f64>;

    /// Calls made so far.
    fn calls(&self) -> u64;
}

impl PhaseMarker for OracleModel<'_> {
    fn mark(&self, state: &mut StateVector, phase: Complex64) -> Result<()> {
        self.apply_bit_phase(state, phase)
    }

    fn marked_weight(&self, state: &StateVector) -> Result<f64> {
        let bits = self.bits();
        let (n, g) = (bits.n(), bits.g());
        if state.dims() != [n, g] {
            return Err(Error::dims([n, g], state.dims()));
        }
        let a = state.amplitudes();
        Ok((0..n)
            .flat_map(|i| (0..g).filter(move |&j| bits.bit(i, j)).map(move |j| i * g + j))
            .map(|k| a[k].norm_sqr())
            .sum())
    }

    fn calls(&self) -> u64 {
        self.query_count()
    }
}

/// Marks a fixed set of basis states of a single-register state.
#[derive(Debug)]
pub struct IndexMarker {
    marked: Vec<bool>,
    calls: AtomicU64,
}

impl IndexMarker {
    pub fn new(marked: Vec<bool>) -> Self {
        Self { marked, calls: AtomicU64::new(0) }
    }

    fn check(&self, state: &StateVector) -> Result<()> {
        if state.len() != self.marked.len() {
            return Err(Error::dims(self.marked.len(), state.len()));
        }
        Ok(())
    }
}

impl PhaseMarker for IndexMarker {
    fn mark(&self, state: &mut StateVector, phase: Complex64) -> Result<()> {
        self.check(state)?;
        for (a, &m) in state.amplitudes_mut().iter_mut().zip(&self.marked) {
            if m {
                *a *= phase;
            }
        }
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    fn marked_weight(&self, state: &StateVector) -> Result<f64> {
        self.check(state)?;
        Ok(state.amplitudes().iter().zip(&self.marked).filter(|(_, &m)| m).map(|(a, _)| a.norm_sqr()).sum())
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Marks `I (x) |v><v|` on one register.
#[derive(Debug)]
pub struct AddressMarker {
    register: usize,
    v: Vec<Complex64>,
    calls: AtomicU64,
}

impl AddressMarker {
    pub fn new(register: usize, v: &StateVector) -> Result<Self> {
        let v = v.normalized()?;
        Ok(Self { register, v: v.into_amplitudes(), calls: AtomicU64::new(0) })
    }

    /// `(I (x) |v><v|) state`.
    pub fn project(&self, state: &StateVector) -> Result<StateVector> {
        let reduced = state.project_register(self.register, &self.v)?;
        // re-expand c_rest |v>
        let dims = state.dims().to_vec();
        let outer: usize = dims[..self.register].iter().product();
        let inner: usize = dims[self.register + 1..].iter().product();
        let d = dims[self.register];
        let mut amps = vec![ZERO; state.len()];
        let r = reduced.amplitudes();
        for o in 0..outer {
            for k in 0..d {
                for n in 0..inner {
                    amps[(o * d + k) * inner + n] = r[o * inner + n] * self.v[k];
                }
            }
        }
        StateVector::new(amps, dims)
    }
}

impl PhaseMarker for AddressMarker {
    fn mark(&self, state: &mut StateVector, phase: Complex64) -> Result<()> {
        let p = self.project(state)?;
        *state = state.axpy(phase - 1.0, &p)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    fn marked_weight(&self, state: &StateVector) -> Result<f64> {
        Ok(state.project_register(self.register, &self.v)?.norm().powi(2))
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// Marks the one-dimensional subspace spanned by a target state.
#[derive(Debug)]
pub struct StateMarker {
    target: StateVector,
    calls: AtomicU64,
}

impl StateMarker {
    pub fn new(target: &StateVector) -> Result<Self> {
        Ok(Self { target: target.normalized()?, calls: AtomicU64::new(0) })
    }
}

impl PhaseMarker for StateMarker {
    fn mark(&self, state: &mut StateVector, phase: Complex64) -> Result<()> {
        let c = self.target.overlap(state)?;
        *state = state.axpy((phase - 1.0) * c, &self.target)?;
        self.calls.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    fn marked_weight(&self, state: &StateVector) -> Result<f64> {
        Ok(self.target.overlap(state)?.norm_sqr())
    }

    fn calls(&self) -> u64 {
        self.calls.load(Ordering::Relaxed)
    }
}

/// `2|s><s| - I`, optionally remembering the preparation `P` with `P|0> = |s>`.
#[derive(Clone, Debug)]
pub struct Reflection {
    s: StateVector,
    prep: Option<Preparation>,
}

impl Reflection {
    pub fn about(s: &StateVector) -> Result<Self> {
        Ok(Self { s: s.normalized()?, prep: None })
    }

    pub fn state(&self) -> &StateVector {
        &self.s
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let c = self.s.overlap(psi)?;
        psi.scaled(Complex64::new(-1.0, 0.0)).axpy(2.0 * c, &self.s)
    }

    /// `I - (1 - e^{-i alpha}) |s><s|`.
    pub fn apply_phase(&self, psi: &StateVector, alpha: f64) -> Result<StateVector> {
        let c = self.s.overlap(psi)?;
        psi.axpy(-(Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -alpha)) * c, &self.s)
    }

    /// Dense operator. With a preparation this is `P (2|0><0| - I) P^dag`.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let d = self.s.len();
        match &self.prep {
            Some(p) => {
                let pm = p.matrix();
                let mut r0 = -DMatrix::<Complex64>::identity(d, d);
                r0[(0, 0)] = Complex64::new(1.0, 0.0);
                &pm * r0 * pm.adjoint()
            }
            None => {
                let v = nalgebra::DVector::from_column_slice(self.s.amplitudes());
                (&v * v.adjoint()) * Complex64::new(2.0, 0.0) - DMatrix::identity(d, d)
            }
        }
    }
}

/// Grover diffusion generated by `prep`.
pub fn diffusion_reflection(prep: &Preparation) -> Reflection {
    Reflection { s: prep.prepare(), prep: Some(prep.clone()) }
}

/// Uniform superposition over `n` values.
pub fn uniform_state(n: usize) -> StateVector {
    let a = 1.0 / (n as f64).sqrt();
    StateVector::from_real(&vec![a; n], vec![n]).expect("dims match")
}

/// `|s> = uniform (x) |g>_G` over `[N, g]`.
pub fn initial_state(n: usize, g: usize) -> Result<StateVector> {
    let grad = gradient_state(&GradientSpec::binary(g)?);
    Ok(StateVector::product(&[&uniform_state(n), &grad]))
}

/// Per-register preparation of [`initial_state`].
pub fn initial_preparation(n: usize, g: usize) -> Result<Preparation> {
    let grad = gradient_state(&GradientSpec::binary(g)?);
    Preparation::new(vec![
        householder_preparation(uniform_state(n).amplitudes())?,
        householder_preparation(grad.amplitudes())?,
    ])
}

/// `|omega> = |A|_1^{-1/2} sum_i |i> sum_j 2^{-(j+1)/2} A_ij |j>`.
pub fn intermediate_target(q: &QuantizedAmplitudes) -> Result<StateVector> {
    if q.is_zero() {
        return Err(Error::ZeroVector);
    }
    let (n, g) = (q.n(), q.g());
    let mut amps = vec![0.0; n * g];
    for i in 0..n {
        for j in 0..g {
            if q.bit(i, j) {
                amps[i * g + j] = 2f64.powf(-(j as f64 + 1.0) / 2.0);
            }
        }
    }
    StateVector::from_real(&amps, vec![n, g])?.normalized()
}

/// `|A> = A / |A|_2` on the index register.
pub fn final_target(q: &QuantizedAmplitudes) -> Result<StateVector> {
    StateVector::from_real(&q.values(), vec![q.n()])?.normalized()
}

/// `2^g / (2^g - 1)`.
pub(crate) fn gradient_gain(g: usize) -> f64 {
    1.0 / (1.0 - 2f64.powi(-(g as i32)))
}

/// Closed-form `(lambda_1, lambda_2)`.
pub fn stage_overlaps(q: &QuantizedAmplitudes) -> Result<(f64, f64)> {
    if q.is_zero() {
        return Err(Error::ZeroVector);
    }
    let norms = q.norms();
    let gain = gradient_gain(q.g());
    let l1 = norms.l1 / q.n() as f64 * gain;
    let l2 = gain * norms.l2 * norms.l2 / norms.l1;
    Ok((l1.min(1.0), l2.min(1.0)))
}

/// Brute-force `(|<omega|s>|^2, <omega|Pi|omega>)` from the statevectors.
pub fn measured_overlaps(q: &QuantizedAmplitudes) -> Result<(f64, f64)> {
    let omega = intermediate_target(q)?;
    let s = initial_state(q.n(), q.g())?;
    let grad = gradient_state(&GradientSpec::binary(q.g())?);
    let pi = AddressMarker::new(1, &grad)?;
    Ok((omega.fidelity(&s)?, pi.marked_weight(&omega)?))
}

fn ceil_tol(x: f64) -> usize {
    (x - 1e-9).ceil().max(1.0) as usize
}

/// `ceil(ln(2/delta)/sqrt(lambda))`, bumped to the next odd integer.
pub fn round_count(lambda: f64, delta: f64) -> Result<usize> {
    if !(lambda > 0.0) {
        return Err(Error::NoOverlap);
    }
    if !(lambda <= 1.0 + 1e-12) {
        return Err(Error::OutOfRange(format!("overlap {lambda} above 1")));
    }
    check_delta(delta)?;
    let l = ceil_tol((2.0 / delta).ln() / lambda.min(1.0).sqrt());
    Ok(if l.is_multiple_of(2) { l + 1 } else { l })
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::OutOfRange(format!("delta {delta} outside (0, 1)")));
    }
    Ok(())
}

/// `ceil(1/sqrt(lambda))` with log factors dropped.
pub fn core_rounds(lambda: f64) -> Result<usize> {
    if !(lambda > 0.0) {
        return Err(Error::NoOverlap);
    }
    Ok(ceil_tol(1.0 / lambda.sqrt()))
}

/// Overlap, target failure amplitude and the odd round count they imply.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StagePlan {
    pub lambda: f64,
    pub delta: f64,
    pub rounds: usize,
}

impl StagePlan {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        Ok(Self { lambda, delta, rounds: round_count(lambda, delta)? })
    }

    /// A plan with an explicit (odd) round count, at least the required one.
    pub fn with_rounds(lambda: f64, delta: f64, rounds: usize) -> Result<Self> {
        let need = round_count(lambda, delta)?;
        if rounds < need || rounds.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("{rounds} rounds; need an odd count of at least {need}")));
        }
        Ok(Self { lambda, delta, rounds })
    }

    /// Iterates of the phased Grover operator, `(L - 1)/2`.
    pub fn iterations(&self) -> usize {
        (self.rounds - 1) / 2
    }
}

/// Chebyshev polynomial `T_L(x)`, continued outside `[-1, 1]`.
pub fn chebyshev(l: f64, x: f64) -> f64 {
    if x.abs() <= 1.0 {
        (l * x.acos()).cos()
    } else if x > 1.0 {
        (l * x.acosh()).cosh()
    } else {
        let sign = if (l as i64) % 2 == 0 { 1.0 } else { -1.0 };
        sign * (l * (-x).acosh()).cosh()
    }
}

/// Success probability of the fixed-point sequence of length `rounds`.
pub fn fixed_point_success(lambda: f64, delta: f64, rounds: usize) -> f64 {
    let l = rounds as f64;
    let t = chebyshev(1.0 / l, 1.0 / delta);
    let c = chebyshev(l, t * (1.0 - lambda).max(0.0).sqrt());
    1.0 - delta * delta * c * c
}

/// Phase pairs `(alpha_j, beta_j)` for `j = 1..=(L-1)/2`.
pub fn fixed_point_phases(rounds: usize, delta: f64) -> Result<Vec<(f64, f64)>> {
    check_delta(delta)?;
    if rounds.is_multiple_of(2) {
        return Err(Error::InvalidArgument(format!("round count {rounds} is even")));
    }
    let l = (rounds - 1) / 2;
    let big_l = rounds as f64;
    let gamma = 1.0 / ((1.0 / delta).acosh() / big_l).cosh();
    let root = (1.0 - gamma * gamma).max(0.0).sqrt();
    let alpha: Vec<f64> = (1..=l)
        .map(|j| {
            let t = (2.0 * std::f64::consts::PI * j as f64 / big_l).tan();
            2.0 * 1f64.atan2(t * root)
        })
        .collect();
    // beta_{l-j+1} = -alpha_j
    Ok((0..l).map(|k| (alpha[k], -alpha[l - 1 - k])).collect())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmplifyStats {
    pub oracle_calls: u64,
    pub preparation_calls: u64,
}

/// Fixed-point amplification of the marked component of `initial`.
///
/// Reflections are taken about `initial` itself. Returns the amplified state
/// and the call counts: `(L-1)/2` marker calls and `L` uses of the
/// preparation (one up front, two per reflection).
pub fn fixed_point_amplify(
    initial: &StateVector,
    marker: &dyn PhaseMarker,
    plan: &StagePlan,
) -> Result<(StateVector, AmplifyStats)> {
    let s = Reflection::about(initial)?;
    let weight = marker.marked_weight(s.state())?;
    if weight <= 1e-300 {
        return Err(Error::NoOverlap);
    }
    if weight < plan.lambda * (1.0 - 1e-9) {
        return Err(Error::InvalidArgument(format!("initial overlap {weight} is below the planned {}", plan.lambda)));
    }
    let mut psi = s.state().clone();
    let phases = fixed_point_phases(plan.rounds, plan.delta)?;
    for &(alpha, beta) in &phases {
        marker.mark(&mut psi, Complex64::from_polar(1.0, beta))?;
        psi = s.apply_phase(&psi, alpha)?;
    }
    Ok((psi, AmplifyStats { oracle_calls: phases.len() as u64, preparation_calls: plan.rounds as u64 }))
}

/// How the address register is projected onto the gradient state.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage2Mode {
    /// Nested fixed-point amplification.
    #[default]
    Amplify,
    /// Single-shot measurement.
    Postselect,
}

#[derive(Clone, Debug)]
pub struct LoadConfig {
    pub delta1: f64,
    pub delta2: f64,
    pub bootstrap: bool,
    pub mode: Stage2Mode,
    /// Overrides the exact bit-weight profile when bootstrapping.
    pub profile: Option<BitWeightProfile>,
    /// Target amplitudes, needed for the runtime bounds.
    pub alpha: Option<AmplitudeVector>,
}

impl LoadConfig {
    pub fn new(delta1: f64, delta2: f64) -> Self {
        Self { delta1, delta2, bootstrap: false, mode: Stage2Mode::Amplify, profile: None, alpha: None }
    }
}

/// Query accounting of one loading run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts {
    /// Phase-oracle calls inside one stage-1 run.
    pub stage1_oracle_calls: u64,
    /// Preparations of the initial state inside one stage-1 run.
    pub stage1_preparation_calls: u64,
    /// Stage-1 runs (forward or inverse) used by stage 2.
    pub stage1_runs: u64,
    /// Gradient-projector reflections used by stage 2.
    pub stage2_marker_calls: u64,
    /// Total phase-oracle calls of the protocol.
    pub total_oracle_calls: u64,
    /// Digit-oracle calls if every phase query is emulated.
    pub digit_oracle_equivalent: u64,
}

/// Runtime bounds against the measured nested round count.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RuntimeBounds {
    /// `2^-g N / |alpha|_1`.
    pub x: f64,
    /// `ln(2/d1) ln(2/d2) (sqrt(N) + 1/2)`.
    pub scaling: f64,
    /// `ln(2/d2) (1 + g - log2 |alpha|_1)/2 (sqrt(N) + 1/2)`.
    pub resolved: f64,
    /// `ln(2/d1) ln(2/d2) / sqrt(lambda_1 lambda_2)` from measured overlaps.
    pub measured: f64,
}

/// Bootstrapped counterpart of [`RuntimeBounds`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrimeBounds {
    /// `2^(1-g) |alpha|_1`.
    pub x: f64,
    /// `ln(2/d1) ln(2/d2) (1 + x) sqrt(N) |alpha|_1 / |Abar|_2`.
    pub scaling: f64,
    /// `ln(2/d1) ln(2/d2) / sqrt(lambda_1' lambda_2)` from measured overlaps.
    pub measured: f64,
    pub core: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub n: usize,
    pub g: usize,
    pub shift: u32,
    pub delta1: f64,
    pub delta2: f64,
    pub bootstrap: bool,
    pub mode: Stage2Mode,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda1_prime: f64,
    /// Overlap actually amplified in stage 1 (`lambda1` or `lambda1_prime`).
    pub lambda_start: f64,
    #[serde(rename = "L1")]
    pub rounds1: usize,
    #[serde(rename = "L1_prime")]
    pub rounds1_prime: usize,
    /// Zero in postselection mode.
    #[serde(rename = "L2")]
    pub rounds2: usize,
    #[serde(rename = "L")]
    pub rounds: usize,
    #[serde(rename = "L_prime")]
    pub rounds_prime: usize,
    #[serde(rename = "L_core")]
    pub core: usize,
    #[serde(rename = "Lp_core")]
    pub core_prime: usize,
    pub fidelity_stage1: f64,
    pub stage2_success_probability: f64,
    pub final_fidelity: f64,
    pub queries: QueryCounts,
    pub bounds: Option<RuntimeBounds>,
    pub bounds_prime: Option<PrimeBounds>,
    pub warnings: Vec<String>,
}

/// Clipped default stage-1 error `2^((1-g)/2) sqrt(|alpha|_1)`.
pub fn default_delta1(g: usize, alpha_l1: f64) -> f64 {
    let d = 2f64.powf((1.0 - g as f64) / 2.0) * alpha_l1.sqrt();
    if d > 0.0 {
        d.min(0.5)
    } else {
        0.5
    }
}

fn alpha_l1(alpha: &AmplitudeVector) -> Result<f64> {
    Ok(alpha.normalized()?.norms().l1)
}

/// Nested runtime bound and its resolved form.
pub fn runtime_bounds(
    q: &QuantizedAmplitudes,
    alpha: &AmplitudeVector,
    delta1: f64,
    delta2: f64,
) -> Result<RuntimeBounds> {
    check_delta(delta1)?;
    check_delta(delta2)?;
    if alpha.len() != q.n() {
        return Err(Error::dims(q.n(), alpha.len()));
    }
    if q.shift() != 0 {
        return Err(Error::Unsupported("runtime bounds assume an unshifted quantization".into()));
    }
    let l1 = alpha_l1(alpha)?;
    let n = q.n() as f64;
    let x = 2f64.powi(-(q.g() as i32)) * n / l1;
    if x >= 0.5 {
        return Err(Error::BoundInvalid { x });
    }
    let (a, b) = ((2.0 / delta1).ln(), (2.0 / delta2).ln());
    let (m1, m2) = measured_overlaps(q)?;
    Ok(RuntimeBounds {
        x,
        scaling: a * b * (n.sqrt() + 0.5),
        resolved: b * 0.5 * (1.0 + q.g() as f64 - l1.log2()) * (n.sqrt() + 0.5),
        measured: a * b / (m1 * m2).sqrt(),
    })
}

/// Draws `shots` single-shot postselections with success probability `p`.
pub fn sample_postselection(p: f64, shots: u64, seed: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..shots).filter(|_| rng.random::<f64>() < p).count() as u64
}

/// Runs both stages and reports the index-register state conditional on a
/// successful projection onto the gradient state.
pub fn load_state(q: &QuantizedAmplitudes, cfg: &LoadConfig) -> Result<(StateVector, RunReport)> {
    check_delta(cfg.delta1)?;
    check_delta(cfg.delta2)?;
    if q.is_zero() {
        return Err(Error::ZeroVector);
    }
    let (n, g) = (q.n(), q.g());
    let mut warnings = Vec::new();
    let (lambda1, lambda2) = stage_overlaps(q)?;
    let omega = intermediate_target(q)?;
    let exact = bootstrap::average_bit_weights(q);
    let lambda1_prime = bootstrap::lambda1_prime(q, &exact)?;

    let oracle = OracleModel::phase(q);
    let (start, stage1) = if cfg.bootstrap {
        let profile = cfg.profile.clone().unwrap_or_else(|| exact.clone());
        let (s, _) = bootstrap::optimized_initial_state(&profile, n)?;
        warnings.push(
            "bootstrapped stage 1 reflects about the intermediate target; the bit oracle alone \
             does not keep the bootstrapped start and the target in one plane"
                .to_string(),
        );
        let marker = StateMarker::new(&omega)?;
        let lambda = marker.marked_weight(&s)?;
        let plan = StagePlan::new(lambda, cfg.delta1)?;
        let (out, stats) = fixed_point_amplify(&s, &marker, &plan)?;
        (lambda, (out, stats, plan))
    } else {
        let s = initial_state(n, g)?;
        let lambda = oracle.marked_weight(&s)?;
        let plan = StagePlan::new(lambda, cfg.delta1)?;
        let (out, stats) = fixed_point_amplify(&s, &oracle, &plan)?;
        (lambda, (out, stats, plan))
    };
    let (omega1, stats1, plan1) = stage1;
    let fidelity_stage1 = omega.fidelity(&omega1)?;

    let grad = gradient_state(&GradientSpec::binary(g)?);
    let projector = AddressMarker::new(1, &grad)?;
    let p_success = projector.marked_weight(&omega1)?;
    let (after, rounds2, stage2_calls) = match cfg.mode {
        Stage2Mode::Amplify => {
            let plan2 = StagePlan::new(p_success, cfg.delta2)?;
            let (out, stats2) = fixed_point_amplify(&omega1, &projector, &plan2)?;
            (out, plan2.rounds, stats2)
        }
        Stage2Mode::Postselect => (omega1.clone(), 0, AmplifyStats { oracle_calls: 0, preparation_calls: 1 }),
    };
    let stage2_success = projector.marked_weight(&after)?;
    let conditional = after.project_register(1, grad.amplitudes())?.normalized()?;
    let final_fidelity = final_target(q)?.fidelity(&conditional)?;

    let total_oracle = stats1.oracle_calls * stage2_calls.preparation_calls;
    let queries = QueryCounts {
        stage1_oracle_calls: stats1.oracle_calls,
        stage1_preparation_calls: stats1.preparation_calls,
        stage1_runs: stage2_calls.preparation_calls,
        stage2_marker_calls: stage2_calls.oracle_calls,
        total_oracle_calls: total_oracle,
        digit_oracle_equivalent: 2 * total_oracle,
    };

    let rounds1 = round_count(lambda1, cfg.delta1)?;
    let rounds1_prime = round_count(lambda1_prime, cfg.delta1)?;
    let rounds2_nominal = round_count(lambda2, cfg.delta2)?;
    let (bounds, bounds_prime) = match &cfg.alpha {
        Some(alpha) => {
            let b = match runtime_bounds(q, alpha, cfg.delta1, cfg.delta2) {
                Ok(b) => Some(b),
                Err(e @ (Error::BoundInvalid { .. } | Error::Unsupported(_))) => {
                    warnings.push(format!("{e}; bound omitted"));
                    None
                }
                Err(e) => return Err(e),
            };
            let bp = match bootstrap::runtime_bound_prime(q, alpha, cfg.delta1, cfg.delta2, &exact) {
                Ok(b) => Some(b),
                Err(e @ (Error::BoundInvalid { .. } | Error::Unsupported(_))) => {
                    warnings.push(format!("{e}; bootstrapped bound omitted"));
                    None
                }
                Err(e) => return Err(e),
            };
            (b, bp)
        }
        None => {
            warnings.push("no target amplitudes given; bounds omitted".into());
            (None, None)
        }
    };
    if plan1.rounds != if cfg.bootstrap { rounds1_prime } else { rounds1 } {
        warnings.push(format!(
            "measured stage-1 overlap gives {} rounds, closed form gives {}",
            plan1.rounds,
            if cfg.bootstrap { rounds1_prime } else { rounds1 }
        ));
    }

    let report = RunReport {
        n,
        g,
        shift: q.shift(),
        delta1: cfg.delta1,
        delta2: cfg.delta2,
        bootstrap: cfg.bootstrap,
        mode: cfg.mode,
        lambda1,
        lambda2,
        lambda1_prime,
        lambda_start: start,
        rounds1,
        rounds1_prime,
        rounds2,
        rounds: rounds1 * rounds2_nominal,
        rounds_prime: rounds1_prime * rounds2_nominal,
        core: core_rounds(lambda1 * lambda2)?,
        core_prime: core_rounds(lambda1_prime * lambda2)?,
        fidelity_stage1,
        stage2_success_probability: if cfg.mode == Stage2Mode::Postselect { p_success } else { stage2_success },
        final_fidelity,
        queries,
        bounds,
        bounds_prime,
        warnings,
    };
    Ok((conditional, report))
}
