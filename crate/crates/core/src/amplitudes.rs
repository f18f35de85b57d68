//! Target amplitude vectors and their fixed-point binary approximation.
//!
//! A quantized amplitude `A_i` is stored as a `g`-bit integer `v_i` with
//! `A_i = v_i / 2^g`. Bit `j` of the row (`j = 0` most significant) carries
//! weight `2^-(j+1)`, so `A_i = sum_j 2^-(j+1) A_ij`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest bit precision a row can hold.
pub const MAX_PRECISION: usize = 63;

/// Nonnegative real amplitudes `alpha_0 .. alpha_{N-1}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct AmplitudeVector {
    values: Vec<f64>,
}

impl AmplitudeVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("amplitude vector is empty".into()));
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidAmplitude { index, value });
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn norms(&self) -> NormSummary {
        NormSummary::of(&self.values)
    }

    /// Rescales to unit 2-norm.
    pub fn normalized(&self) -> Result<Self> {
        let l2 = self.norms().l2;
        if l2 == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self { values: self.values.iter().map(|v| v / l2).collect() })
    }
}

impl TryFrom<Vec<f64>> for AmplitudeVector {
    type Error = Error;

    fn try_from(values: Vec<f64>) -> Result<Self> {
        Self::new(values)
    }
}

impl From<AmplitudeVector> for Vec<f64> {
    fn from(v: AmplitudeVector) -> Self {
        v.values
    }
}

/// Free-function form of [`AmplitudeVector::normalized`].
pub fn normalize(v: &AmplitudeVector) -> Result<AmplitudeVector> {
    v.normalized()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormSummary {
    pub l1: f64,
    pub l2: f64,
}

impl NormSummary {
    pub fn of(values: &[f64]) -> Self {
        let l1 = values.iter().map(|v| v.abs()).sum();
        let l2 = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        Self { l1, l2 }
    }
}

/// The `N x g` bit matrix of a round-toward-zero binary approximation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantizedAmplitudes {
    g: usize,
    shift: u32,
    rows: Vec<u64>,
}

impl QuantizedAmplitudes {
    /// Builds the matrix from raw `g`-bit rows (`A_i = rows[i] / 2^g`).
    pub fn from_rows(g: usize, shift: u32, rows: Vec<u64>) -> Result<Self> {
        check_precision(g)?;
        if rows.is_empty() {
            return Err(Error::InvalidArgument("bit matrix has no rows".into()));
        }
        let limit = 1u64 << g;
        if let Some(r) = rows.iter().find(|&&r| r >= limit) {
            return Err(Error::OutOfRange(format!("row value {r} needs more than {g} bits")));
        }
        Ok(Self { g, shift, rows })
    }

    /// Builds the matrix from explicit bits, bit 0 first in every row.
    pub fn from_bits(g: usize, shift: u32, bits: &[Vec<bool>]) -> Result<Self> {
        check_precision(g)?;
        let mut rows = Vec::with_capacity(bits.len());
        for (i, row) in bits.iter().enumerate() {
            if row.len() != g {
                return Err(Error::dims(format!("row {i} of length {g}"), row.len()));
            }
            rows.push(row.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64));
        }
        Self::from_rows(g, shift, rows)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn g(&self) -> usize {
        self.g
    }

    /// Power-of-two offset `t`: the bits approximate `2^t alpha_i`.
    pub fn shift(&self) -> u32 {
        self.shift
    }

    pub fn rows(&self) -> &[u64] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> u64 {
        self.rows[i]
    }

    pub fn bit(&self, i: usize, j: usize) -> bool {
        debug_assert!(j < self.g);
        (self.rows[i] >> (self.g - 1 - j)) & 1 == 1
    }

    pub fn bits_of_row(&self, i: usize) -> Vec<bool> {
        (0..self.g).map(|j| self.bit(i, j)).collect()
    }

    /// `A_i`.
    pub fn value(&self, i: usize) -> f64 {
        self.rows[i] as f64 / pow2(self.g as i32)
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.n()).map(|i| self.value(i)).collect()
    }

    pub fn norms(&self) -> NormSummary {
        NormSummary::of(&self.values())
    }

    pub fn is_zero(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    /// Number of rows with bit `j` set, for every `j`.
    pub fn column_counts(&self) -> Vec<u64> {
        (0..self.g).map(|j| (0..self.n()).filter(|&i| self.bit(i, j)).count() as u64).collect()
    }

    pub fn to_file(&self, values: &[f64]) -> AmplitudeFile {
        AmplitudeFile {
            n: self.n(),
            g: self.g,
            shift: self.shift,
            values: values.to_vec(),
            bits: (0..self.n()).map(|i| self.bits_of_row(i).into_iter().map(u8::from).collect()).collect(),
        }
    }
}

fn check_precision(g: usize) -> Result<()> {
    if g == 0 || g > MAX_PRECISION {
        return Err(Error::OutOfRange(format!("bit precision g = {g} must lie in 1..={MAX_PRECISION}")));
    }
    Ok(())
}

pub(crate) fn pow2(e: i32) -> f64 {
    2f64.powi(e)
}

/// Smallest `t >= 0` with `2^t * max` in `[1/2, 1)`, or 0 when `max >= 1/2`.
pub fn dynamic_range_shift(max: f64) -> u32 {
    if max <= 0.0 {
        return 0;
    }
    let mut t = 0u32;
    while t < 1023 && max * pow2(t as i32 + 1) < 1.0 {
        t += 1;
    }
    t
}

/// Rounds every amplitude toward zero onto `g` bits.
///
/// With `shift` set, amplitudes are first multiplied by `2^t` so the largest
/// one has its leading one in bit 0. Amplitudes of exactly 1 (after scaling)
/// saturate to `1 - 2^-g`.
pub fn quantize(v: &AmplitudeVector, g: usize, shift: bool) -> Result<QuantizedAmplitudes> {
    check_precision(g)?;
    if v.max() > 1.0 {
        return Err(Error::OutOfRange(format!("largest amplitude {} exceeds 1; normalize first", v.max())));
    }
    let t = if shift { dynamic_range_shift(v.max()) } else { 0 };
    let scale = pow2((t as usize + g) as i32);
    let top = (1u64 << g) - 1;
    let rows = v.values().iter().map(|&a| ((a * scale).floor() as u64).min(top)).collect();
    QuantizedAmplitudes::from_rows(g, t, rows)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TraceDistance {
    /// `sqrt(1 - |<alpha|A/|A|_2>|^2)`.
    pub actual: f64,
    /// `2^((1-g)/2) sqrt(|alpha|_1)`.
    pub bound: f64,
}

/// Distance between the normalized target and its unshifted quantization.
pub fn trace_distance_bound(v: &AmplitudeVector, q: &QuantizedAmplitudes) -> Result<TraceDistance> {
    if q.shift() != 0 {
        return Err(Error::InvalidArgument("trace distance bound applies to unshifted quantization".into()));
    }
    if v.len() != q.n() {
        return Err(Error::dims(v.len(), q.n()));
    }
    let alpha = v.normalized()?;
    let a = q.values();
    let a_norm = NormSummary::of(&a).l2;
    let inner =
        if a_norm == 0.0 { 0.0 } else { alpha.values().iter().zip(&a).map(|(x, y)| x * y).sum::<f64>() / a_norm };
    let actual = (1.0 - inner * inner).max(0.0).sqrt();
    let bound = pow2(1 - q.g() as i32).sqrt() * alpha.norms().l1.sqrt();
    Ok(TraceDistance { actual, bound })
}

/// On-disk JSON form: `{"n", "g", "shift", "values", "bits"}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AmplitudeFile {
    pub n: usize,
    pub g: usize,
    pub shift: u32,
    pub values: Vec<f64>,
    pub bits: Vec<Vec<u8>>,
}

impl AmplitudeFile {
    pub fn quantized(&self) -> Result<QuantizedAmplitudes> {
        if self.bits.len() != self.n {
            return Err(Error::dims(self.n, self.bits.len()));
        }
        let bits: Vec<Vec<bool>> = self.bits.iter().map(|row| row.iter().map(|&b| b != 0).collect()).collect();
        QuantizedAmplitudes::from_bits(self.g, self.shift, &bits)
    }

    pub fn amplitudes(&self) -> Result<AmplitudeVector> {
        AmplitudeVector::new(self.values.clone())
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn av(v: &[f64]) -> AmplitudeVector {
        AmplitudeVector::new(v.to_vec()).unwrap()
    }

    #[test]
    fn normalize_examples() {
        let n = av(&[3.0, 4.0]).normalized().unwrap();
        assert_abs_diff_eq!(n.values()[0], 0.6, epsilon = 1e-15);
        assert_abs_diff_eq!(n.values()[1], 0.8, epsilon = 1e-15);
        let n = av(&[1.0; 4]).normalized().unwrap();
        assert!(n.values().iter().all(|&x| (x - 0.5).abs() < 1e-15));
        assert!(matches!(av(&[0.0, 0.0]).normalized(), Err(Error::ZeroVector)));
    }

    #[test]
    fn rejects_negative_and_nan() {
        assert!(matches!(AmplitudeVector::new(vec![0.5, -0.1]), Err(Error::InvalidAmplitude { index: 1, .. })));
        assert!(AmplitudeVector::new(vec![f64::NAN]).is_err());
        assert!(AmplitudeVector::new(vec![]).is_err());
    }

    #[test]
    fn quantize_floor() {
        let q = quantize(&av(&[0.8, 0.6]), 3, false).unwrap();
        assert_eq!(q.value(0), 0.75);
        assert_eq!(q.value(1), 0.5);
        assert_eq!(q.bits_of_row(0), vec![true, true, false]);
        assert_eq!(q.bits_of_row(1), vec![true, false, false]);
    }

    #[test]
    fn eight_coefficient_example_is_fixed() {
        let vals = [0.5, 0.5, 0.5, 0.5, 0.875, 0.625, 0.75, 0.75];
        let q = quantize(&av(&vals), 3, false).unwrap();
        assert_eq!(q.values(), vals.to_vec());
        assert_eq!(q.column_counts(), vec![8, 3, 2]);
    }

    #[test]
    fn one_eighth_is_a_single_low_bit() {
        let q = quantize(&av(&[0.125; 64]), 3, false).unwrap();
        for i in 0..64 {
            assert_eq!(q.bits_of_row(i), vec![false, false, true]);
        }
    }

    #[test]
    fn unit_amplitude_saturates() {
        let q = quantize(&av(&[1.0, 0.0, 0.0, 0.0]), 2, false).unwrap();
        assert_eq!(q.bits_of_row(0), vec![true, true]);
        assert_eq!(q.value(0), 0.75);
    }

    #[test]
    fn shift_places_leading_one_at_bit_zero() {
        assert_eq!(dynamic_range_shift(1.0), 0);
        assert_eq!(dynamic_range_shift(0.6), 0);
        assert_eq!(dynamic_range_shift(0.5), 0);
        assert_eq!(dynamic_range_shift(0.3), 1);
        assert_eq!(dynamic_range_shift(0.25), 1);
        assert_eq!(dynamic_range_shift(0.125), 2);
        // uniform over 64 elements: alpha = 1/8 becomes 0.1000 after a shift of 2
        let q = quantize(&av(&[0.125; 64]), 4, true).unwrap();
        assert_eq!(q.shift(), 2);
        assert_eq!(q.bits_of_row(5), vec![true, false, false, false]);
    }

    #[test]
    fn trace_distance_examples() {
        let v = av(&[0.5; 4]);
        let q = quantize(&v, 2, false).unwrap();
        assert_abs_diff_eq!(trace_distance_bound(&v, &q).unwrap().actual, 0.0, epsilon = 1e-7);

        let v = av(&[0.8, 0.6]);
        let q = quantize(&v, 3, false).unwrap();
        let d = trace_distance_bound(&v, &q).unwrap();
        // <alpha|A>/|A| = 0.9 / sqrt(0.8125)
        let inner = 0.9 / 0.8125f64.sqrt();
        assert_abs_diff_eq!(d.actual, (1.0 - inner * inner).sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(d.bound, 0.5 * 1.4f64.sqrt(), epsilon = 1e-12);
        assert!(d.actual <= d.bound);
    }

    #[test]
    fn file_round_trip() {
        let v = av(&[0.8, 0.6]);
        let q = quantize(&v, 3, false).unwrap();
        let f = q.to_file(v.values());
        assert_eq!(f.bits, vec![vec![1, 1, 0], vec![1, 0, 0]]);
        let json = serde_json::to_string(&f).unwrap();
        let back: AmplitudeFile = serde_json::from_str(&json).unwrap();
        assert_eq!(back.quantized().unwrap(), q);
    }

    fn unit_vector() -> impl Strategy<Value = AmplitudeVector> {
        prop::collection::vec(0.0f64..1.0, 1..64)
            .prop_filter_map("nonzero", |v| AmplitudeVector::new(v).ok()?.normalized().ok())
    }

    proptest! {
        #[test]
        fn round_toward_zero(v in unit_vector(), g in 1usize..20, shift in any::<bool>()) {
            let q = quantize(&v, g, shift).unwrap();
            let scale = pow2(q.shift() as i32);
            let eps = pow2(-(g as i32));
            for (i, &a) in v.values().iter().enumerate() {
                let target = scale * a;
                prop_assert!(q.value(i) <= target);
                // saturation at 1 is the only exception to the strict upper bound
                prop_assert!(target - q.value(i) < eps || target >= 1.0);
                prop_assert!(q.value(i) <= 1.0 - eps);
            }
        }

        #[test]
        fn quantize_idempotent(v in unit_vector(), g in 1usize..20) {
            let q = quantize(&v, g, false).unwrap();
            let again = quantize(&AmplitudeVector::new(q.values()).unwrap(), g, false).unwrap();
            prop_assert_eq!(q, again);
        }

        #[test]
        fn inner_product_dominates_quantized_norm(v in unit_vector(), g in 1usize..20) {
            let q = quantize(&v, g, false).unwrap();
            let a = q.values();
            let l2 = NormSummary::of(&a).l2;
            let inner: f64 = v.values().iter().zip(&a).map(|(x, y)| x * y).sum();
            if l2 > 0.0 {
                prop_assert!(inner / l2 >= l2 - 1e-12);
            }
            let d = trace_distance_bound(&v, &q).unwrap();
            prop_assert!(d.actual <= d.bound + 1e-12);
        }

        #[test]
        fn norm_ordering(v in unit_vector()) {
            let n = v.norms();
            prop_assert!(n.l2 <= n.l1 + 1e-12);
            prop_assert!(n.l1 <= (v.len() as f64).sqrt() * n.l2 + 1e-12);
        }
    }
}
