//! Amplitude families used for benchmarking, and the sweep harness.

use std::fmt;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplify::{self, LoadConfig, Stage2Mode};
use crate::amplitudes::{quantize, AmplitudeVector};
use crate::bootstrap;
use crate::ceil_log2;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Family {
    Delta,
    Uniform,
    Triangle,
    PowerLaw { k: f64 },
    Normal { sigma: f64 },
    Random { seed: u64 },
    Sine,
}

impl Family {
    pub fn name(&self) -> &'static str {
        match self {
            Family::Delta => "delta",
            Family::Uniform => "uniform",
            Family::Triangle => "triangle",
            Family::PowerLaw { .. } => "powerlaw",
            Family::Normal { .. } => "normal",
            Family::Random { .. } => "random",
            Family::Sine => "sine",
        }
    }

    /// Builds a family from its name and the parameter flags that apply.
    pub fn from_parts(name: &str, k: Option<f64>, sigma: Option<f64>, seed: u64) -> Result<Self> {
        let need =
            |v: Option<f64>, flag: &str| v.ok_or_else(|| Error::InvalidArgument(format!("{name} needs --{flag}")));
        let f = match name {
            "delta" => Family::Delta,
            "uniform" => Family::Uniform,
            "triangle" => Family::Triangle,
            "powerlaw" => Family::PowerLaw { k: need(k, "k")? },
            "normal" => Family::Normal { sigma: need(sigma, "sigma")? },
            "random" => Family::Random { seed },
            "sine" => Family::Sine,
            other => return Err(Error::InvalidArgument(format!("unknown distribution {other:?}"))),
        };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Family::PowerLaw { k } if !(k > 0.0 && k.is_finite()) => {
                Err(Error::OutOfRange(format!("power-law exponent {k} must be positive")))
            }
            Family::Normal { sigma } if !(sigma > 0.0 && sigma.is_finite()) => {
                Err(Error::OutOfRange(format!("sigma {sigma} must be positive")))
            }
            _ => Ok(()),
        }
    }

    /// The family parameter as printed in sweep output.
    pub fn param(&self) -> String {
        match self {
            Family::PowerLaw { k } => k.to_string(),
            Family::Normal { sigma } => sigma.to_string(),
            Family::Random { seed } => seed.to_string(),
            _ => String::new(),
        }
    }

    pub fn seed(&self) -> u64 {
        match self {
            Family::Random { seed } => *seed,
            _ => 0,
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::PowerLaw { k } => write!(f, "powerlaw(k={k})"),
            Family::Normal { sigma } => write!(f, "normal(sigma={sigma})"),
            Family::Random { seed } => write!(f, "random(seed={seed})"),
            other => f.write_str(other.name()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    #[serde(flatten)]
    pub family: Family,
    pub n: usize,
}

impl DistributionSpec {
    pub fn new(family: Family, n: usize) -> Result<Self> {
        family.validate()?;
        if n < 2 {
            return Err(Error::OutOfRange(format!("need at least 2 elements, got {n}")));
        }
        Ok(Self { family, n })
    }
}

/// `sum_{r=1}^n r^-k`.
pub fn harmonic_number(n: usize, k: f64) -> f64 {
    // small terms first
    (1..=n).rev().map(|r| (r as f64).powf(-k)).sum()
}

/// Unit-norm amplitudes of the family.
pub fn generate(spec: &DistributionSpec) -> Result<AmplitudeVector> {
    spec.family.validate()?;
    let n = spec.n;
    let raw: Vec<f64> = match spec.family {
        Family::Delta => (0..n).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
        Family::Uniform => vec![1.0; n],
        Family::Triangle => (0..n).map(|i| i as f64).collect(),
        Family::PowerLaw { k } => {
            let h = harmonic_number(n, 2.0 * k).sqrt();
            (1..=n).map(|r| (r as f64).powf(-k) / h).collect()
        }
        Family::Normal { sigma } => {
            let mid = (n as f64 - 1.0) / 2.0;
            (0..n)
                .map(|i| {
                    let x = (i as f64 - mid) / sigma;
                    (-x * x / 2.0).exp()
                })
                .collect()
        }
        Family::Random { seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| rng.random::<f64>()).collect()
        }
        Family::Sine => {
            let c = (2.0 / (n as f64 + 1.0)).sqrt();
            (0..n).map(|i| c * (std::f64::consts::PI * (i as f64 + 1.0) / (n as f64 + 1.0)).sin()).collect()
        }
    };
    AmplitudeVector::new(raw)?.normalized()
}

/// `min(16, ceil(log2 N) + 4)`.
pub fn default_precision(n: usize) -> usize {
    (ceil_log2(n.max(1)) + 4).min(16)
}

/// One row of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub family: String,
    pub param: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub g: usize,
    pub shift: u32,
    /// `|alpha|_1` of the normalized target.
    pub l1: f64,
    /// `|Abar|_2` of the shifted quantization.
    pub l2: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda1_prime: f64,
    #[serde(rename = "L_core")]
    pub l_core: usize,
    #[serde(rename = "Lp_core")]
    pub lp_core: usize,
    /// Scaling bound on the unshifted quantization; absent when its
    /// precondition fails.
    #[serde(rename = "L_bound")]
    pub l_bound: Option<f64>,
    #[serde(rename = "Lp_bound")]
    pub lp_bound: Option<f64>,
    /// Bootstrapped end-to-end fidelity, when simulated.
    pub fidelity: Option<f64>,
    pub queries: Option<u64>,
    pub seed: u64,
}

impl SweepPoint {
    /// `1/sqrt(lambda1 lambda2)` before rounding.
    pub fn l_real(&self) -> f64 {
        1.0 / (self.lambda1 * self.lambda2).sqrt()
    }

    /// `1/sqrt(lambda1' lambda2)` before rounding.
    pub fn lp_real(&self) -> f64 {
        1.0 / (self.lambda1_prime * self.lambda2).sqrt()
    }
}

pub const SWEEP_COLUMNS: [&str; 17] = [
    "family",
    "param",
    "N",
    "g",
    "shift",
    "l1",
    "l2",
    "lambda1",
    "lambda2",
    "lambda1_prime",
    "L_core",
    "Lp_core",
    "L_bound",
    "Lp_bound",
    "fidelity",
    "queries",
    "seed",
];

#[derive(Clone, Debug, PartialEq)]
pub struct SweepOptions {
    /// Fixed precision; defaults per point to [`default_precision`].
    pub g: Option<usize>,
    pub shift: bool,
    /// Defaults per point to [`amplify::default_delta1`].
    pub delta1: Option<f64>,
    pub delta2: f64,
    /// Points with `N g` at most this are simulated end to end.
    pub simulate_up_to: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { g: None, shift: true, delta1: None, delta2: 0.1, simulate_up_to: 0 }
    }
}

/// Computes one sweep row.
pub fn sweep_point(spec: &DistributionSpec, opts: &SweepOptions) -> Result<SweepPoint> {
    let alpha = generate(spec)?;
    let g = opts.g.unwrap_or_else(|| default_precision(spec.n));
    let q = quantize(&alpha, g, opts.shift)?;
    let (lambda1, lambda2) = amplify::stage_overlaps(&q)?;
    let profile = bootstrap::average_bit_weights(&q);
    let lambda1_prime = bootstrap::lambda1_prime(&q, &profile)?;
    let l1 = alpha.norms().l1;
    let delta1 = opts.delta1.unwrap_or_else(|| amplify::default_delta1(g, l1));

    let plain = quantize(&alpha, g, false)?;
    let (l_bound, lp_bound) = if plain.is_zero() {
        (None, None)
    } else {
        let b = amplify::runtime_bounds(&plain, &alpha, delta1, opts.delta2).ok().map(|b| b.scaling);
        let bp = bootstrap::runtime_bound_prime(
            &plain,
            &alpha,
            delta1,
            opts.delta2,
            &bootstrap::average_bit_weights(&plain),
        )
        .ok()
        .map(|b| b.scaling);
        (b, bp)
    };

    let (fidelity, queries) = if spec.n * g <= opts.simulate_up_to {
        let mut cfg = LoadConfig::new(delta1, opts.delta2);
        cfg.bootstrap = true;
        cfg.mode = Stage2Mode::Amplify;
        let (_, rep) = amplify::load_state(&q, &cfg)?;
        (Some(rep.final_fidelity), Some(rep.queries.total_oracle_calls))
    } else {
        (None, None)
    };

    Ok(SweepPoint {
        family: spec.family.name().to_string(),
        param: spec.family.param(),
        n: spec.n,
        g,
        shift: q.shift(),
        l1,
        l2: profile.l2(),
        lambda1,
        lambda2,
        lambda1_prime,
        l_core: amplify::core_rounds(lambda1 * lambda2)?,
        lp_core: amplify::core_rounds(lambda1_prime * lambda2)?,
        l_bound,
        lp_bound,
        fidelity,
        queries,
        seed: spec.family.seed(),
    })
}

/// Evaluates every (family, N) pair in parallel; rows come back sorted by
/// family, parameter and N.
pub fn sweep(families: &[Family], ns: &[usize], opts: &SweepOptions) -> Result<Vec<SweepPoint>> {
    let jobs: Vec<(usize, DistributionSpec)> = families
        .iter()
        .enumerate()
        .flat_map(|(fi, &f)| ns.iter().map(move |&n| (fi, n, f)))
        .map(|(fi, n, f)| Ok((fi, DistributionSpec::new(f, n)?)))
        .collect::<Result<_>>()?;
    let mut rows: Vec<(usize, SweepPoint)> =
        jobs.par_iter().map(|(fi, spec)| Ok((*fi, sweep_point(spec, opts)?))).collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.n.cmp(&b.1.n)));
    Ok(rows.into_iter().map(|(_, p)| p).collect())
}

pub fn write_csv<W: Write>(points: &[SweepPoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for p in points {
        w.serialize(p)?;
    }
    if points.is_empty() {
        w.write_record(SWEEP_COLUMNS)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<SweepPoint>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != SWEEP_COLUMNS {
        return Err(Error::InvalidArgument(format!("unexpected sweep columns {header:?}")));
    }
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Least-squares line through `(ln x, ln y)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn log_log_fit(xs: &[f64], ys: &[f64]) -> Result<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidArgument("need at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|&v| !(v > 0.0)) {
        return Err(Error::OutOfRange("log-log fit needs positive values".into()));
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let m = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / m, ly.iter().sum::<f64>() / m);
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("all x values equal".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Ok(LogLogFit { slope, intercept: my - slope * mx })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub family: Family,
    /// Fit of `1/sqrt(lambda1' lambda2)` against N.
    pub bootstrapped: LogLogFit,
    /// Fit of `1/sqrt(lambda1 lambda2)` against N.
    pub plain: LogLogFit,
    /// Fit of `|Abar|_2` against N.
    pub abar: LogLogFit,
    pub points: Vec<SweepPoint>,
}

/// Sweeps `ns` (at least three octaves) with the dynamic-range shift on and
/// fits the unrounded round counts on a log-log scale.
pub fn scaling_check(family: Family, g: Option<usize>, ns: &[usize]) -> Result<ScalingReport> {
    let (lo, hi) = match (ns.iter().min(), ns.iter().max()) {
        (Some(&lo), Some(&hi)) => (lo, hi),
        _ => return Err(Error::InvalidArgument("empty N range".into())),
    };
    if (hi as f64) < 8.0 * lo as f64 {
        return Err(Error::InvalidArgument(format!("N range {lo}..{hi} spans under three octaves")));
    }
    let opts = SweepOptions { g, ..SweepOptions::default() };
    let points = sweep(&[family], ns, &opts)?;
    let xs: Vec<f64> = points.iter().map(|p| p.n as f64).collect();
    let fit = |f: &dyn Fn(&SweepPoint) -> f64| log_log_fit(&xs, &points.iter().map(f).collect::<Vec<_>>());
    Ok(ScalingReport {
        family,
        bootstrapped: fit(&|p| p.lp_real())?,
        plain: fit(&|p| p.l_real())?,
        abar: fit(&|p| p.l2)?,
        points,
    })
}

/// Powers of two `2^lo ..= 2^hi`.
pub fn powers_of_two(lo: u32, hi: u32) -> Vec<usize> {
    (lo..=hi).map(|e| 1usize << e).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn spec(f: Family, n: usize) -> DistributionSpec {
        DistributionSpec::new(f, n).unwrap()
    }

    #[test]
    fn generator_examples() {
        assert_eq!(generate(&spec(Family::Delta, 4)).unwrap().values(), &[1.0, 0.0, 0.0, 0.0]);
        let t = generate(&spec(Family::Triangle, 4)).unwrap();
        for (i, v) in t.values().iter().enumerate() {
            assert_abs_diff_eq!(*v, i as f64 / 14f64.sqrt(), epsilon = 1e-15);
        }
        let p = generate(&spec(Family::PowerLaw { k: 1.0 }, 2)).unwrap();
        assert_abs_diff_eq!(p.values()[0], 1.0 / 1.25f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(p.values()[1], 0.5 / 1.25f64.sqrt(), epsilon = 1e-15);
        let u = generate(&spec(Family::Uniform, 16)).unwrap();
        assert!(u.values().iter().all(|&v| (v - 0.25).abs() < 1e-15));
    }

    #[test]
    fn harmonic_examples() {
        assert_eq!(harmonic_number(1, 3.7), 1.0);
        assert_abs_diff_eq!(harmonic_number(4, 1.0), 25.0 / 12.0, epsilon = 1e-15);
        let h = harmonic_number(100, 0.5);
        assert_abs_diff_eq!(h, 18.5896, epsilon = 1e-4);
        assert!((h - 2.0 * 10.0).abs() < 2.0);
    }

    #[test]
    fn spec_validation() {
        assert!(DistributionSpec::new(Family::Uniform, 1).is_err());
        assert!(DistributionSpec::new(Family::PowerLaw { k: 0.0 }, 8).is_err());
        assert!(DistributionSpec::new(Family::Normal { sigma: -1.0 }, 8).is_err());
        assert!(Family::from_parts("powerlaw", None, None, 0).is_err());
        assert!(Family::from_parts("cauchy", None, None, 0).is_err());
        assert_eq!(Family::from_parts("normal", None, Some(3.0), 0).unwrap(), Family::Normal { sigma: 3.0 });
    }

    #[test]
    fn random_is_seeded() {
        let a = generate(&spec(Family::Random { seed: 5 }, 32)).unwrap();
        let b = generate(&spec(Family::Random { seed: 5 }, 32)).unwrap();
        let c = generate(&spec(Family::Random { seed: 6 }, 32)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_l1_expectation() {
        // E|alpha|_1 -> sqrt(3N)/2 for U[0,1) entries
        for &n in &[64usize, 1024] {
            let mean =
                (0..40).map(|s| generate(&spec(Family::Random { seed: s }, n)).unwrap().norms().l1).sum::<f64>() / 40.0;
            let want = (3.0 * n as f64).sqrt() / 2.0;
            assert!((mean / want - 1.0).abs() < 0.1, "n={n}: {mean} vs {want}");
        }
    }

    #[test]
    fn delta_core_rounds() {
        let opts = SweepOptions::default();
        let p = sweep_point(&spec(Family::Delta, 100), &opts).unwrap();
        assert_eq!(p.lp_core, 10);
        let p = sweep_point(&spec(Family::Delta, 16), &SweepOptions { shift: false, ..opts }).unwrap();
        assert_eq!(p.l_core, 4);
    }

    #[test]
    fn simulated_point() {
        let opts = SweepOptions { simulate_up_to: 1 << 10, ..SweepOptions::default() };
        let p = sweep_point(&spec(Family::Triangle, 16), &opts).unwrap();
        assert!(p.fidelity.unwrap() > 0.9);
        assert!(p.queries.unwrap() > 0);
    }

    #[test]
    fn csv_round_trip_and_order() {
        let fams = [Family::Sine, Family::PowerLaw { k: 2.0 }];
        let rows = sweep(&fams, &[64, 16, 32], &SweepOptions::default()).unwrap();
        let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
        assert_eq!(ns, vec![16, 32, 64, 16, 32, 64]);
        assert_eq!(rows[0].family, "sine");
        let mut buf = Vec::new();
        write_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
        assert_eq!(read_csv(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn fit_recovers_power() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
        let f = log_log_fit(&xs, &ys).unwrap();
        assert_abs_diff_eq!(f.slope, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, 3f64.ln(), epsilon = 1e-12);
        assert!(scaling_check(Family::Delta, None, &[16, 32]).is_err());
    }

    proptest! {
        #[test]
        fn every_family_is_normalized(n in 2usize..300, k in 0.1f64..3.0, sigma in 0.5f64..50.0, seed in 0u64..1000) {
            for f in [Family::Delta, Family::Uniform, Family::Triangle, Family::PowerLaw { k },
                      Family::Normal { sigma }, Family::Random { seed }, Family::Sine] {
                let v = generate(&spec(f, n)).unwrap();
                prop_assert_eq!(v.len(), n);
                prop_assert!((v.norms().l2 - 1.0).abs() < 1e-12);
                prop_assert!(v.values().iter().all(|&x| x >= 0.0));
            }
        }
    }
}
