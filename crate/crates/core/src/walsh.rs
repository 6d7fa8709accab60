//! Fourier–Walsh calculus on the discrete cube `{-1,1}^n`.
//!
//! Points and frequencies share one bitmask encoding: bit `j` of a point index
//! is set iff `eps_j = -1`, and bit `j` of a frequency index is set iff `j` is
//! in the frequency set `A`. With this encoding `W_A(eps) = (-1)^{popcount(A & b)}`
//! and the transform is the unnormalized Hadamard matrix.
//!
//! Normalization: `h_hat(A) = 2^{-n} sum_eps h(eps) W_A(eps)` and
//! `h = sum_A h_hat(A) W_A`, so Parseval reads `||h||_2^2 = sum_A h_hat(A)^2`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::subset::Subset;

/// `len` independent standard normal draws from `ChaCha8Rng::seed_from_u64(seed)`.
pub fn gaussian_vector(len: usize, seed: u64) -> Vec<f64> {
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Largest supported cube dimension; `2^24` doubles is 128 MiB per function.
pub const MAX_DIM: usize = 24;

/// Mean-zero tolerance applied to `|h_hat(empty)|`, relative to `max(1, ||h||_inf)`.
pub const MEAN_ZERO_TOL: f64 = 1e-12;

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        Err(Error::DimensionOutOfRange(n, MAX_DIM))
    } else {
        Ok(())
    }
}

fn check_values(n: usize, values: &[f64]) -> Result<()> {
    check_dim(n)?;
    let expected = 1usize << n;
    if values.len() != expected {
        return Err(Error::LengthMismatch {
            expected,
            actual: values.len(),
        });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

/// Sign of coordinate `j` at the point with bitmask `b`.
#[inline]
pub fn sign(b: usize, j: usize) -> f64 {
    if b >> j & 1 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// `W_A` evaluated at the point with bitmask `b`.
#[inline]
pub fn walsh_character(a: u64, b: usize) -> f64 {
    if (a & b as u64).count_ones() % 2 == 1 {
        -1.0
    } else {
        1.0
    }
}

/// A real function on `{-1,1}^n`, stored pointwise in bitmask order.
#[derive(Debug, Clone, PartialEq)]
pub struct CubeFunction {
    n: usize,
    values: Vec<f64>,
}

impl CubeFunction {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        check_values(n, &values)?;
        Ok(Self { n, values })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize) -> f64) -> Result<Self> {
        check_dim(n)?;
        Self::new(n, (0..1usize << n).map(f).collect())
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::from_fn(n, |_| c)
    }

    /// The Walsh character `W_A`.
    pub fn character(n: usize, a: Subset) -> Result<Self> {
        a.check(n)?;
        Self::from_fn(n, |b| walsh_character(a.0, b))
    }

    /// Independent standard normal values, centered to mean zero.
    pub fn gaussian(n: usize, seed: u64) -> Result<Self> {
        check_dim(n)?;
        Ok(Self::new(n, gaussian_vector(1 << n, seed))?.centered())
    }

    /// Degree-one chaos `eps -> sum_j a_j eps_j`.
    pub fn linear(coeffs: &[f64]) -> Result<Self> {
        let n = coeffs.len();
        Self::from_fn(n, |b| coeffs.iter().enumerate().map(|(j, a)| sign(b, j) * a).sum())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn mean(&self) -> f64 {
        pairwise_sum(&self.values) / self.values.len() as f64
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Subtract the mean, returning the projection onto mean-zero functions.
    pub fn centered(&self) -> Self {
        let m = self.mean();
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v - m).collect(),
        }
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        same_dim(self.n, other.n)?;
        Ok(Self {
            n: self.n,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn p_norm(&self, p: f64) -> Result<f64> {
        p_norm(self, p)
    }

    /// Errors with [`Error::NotMeanZero`] unless the mean vanishes up to [`MEAN_ZERO_TOL`].
    pub fn require_mean_zero(&self) -> Result<()> {
        let mean = self.mean();
        if mean.abs() > MEAN_ZERO_TOL * self.max_abs().max(1.0) {
            Err(Error::NotMeanZero(mean))
        } else {
            Ok(())
        }
    }

    pub fn coordinate(&self, j: usize) -> Result<()> {
        if j >= self.n {
            Err(Error::CoordinateOutOfRange { coord: j, n: self.n })
        } else {
            Ok(())
        }
    }
}

fn same_dim(a: usize, b: usize) -> Result<()> {
    if a != b {
        Err(invalid(format!("dimension mismatch: {a} vs {b}")))
    } else {
        Ok(())
    }
}

/// Walsh coefficients `h_hat(A)` indexed by the bitmask of `A`.
#[derive(Debug, Clone, PartialEq)]
pub struct WalshSpectrum {
    n: usize,
    coeffs: Vec<f64>,
}

impl WalshSpectrum {
    pub fn new(n: usize, coeffs: Vec<f64>) -> Result<Self> {
        check_values(n, &coeffs)?;
        Ok(Self { n, coeffs })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        check_dim(n)?;
        Ok(Self {
            n,
            coeffs: vec![0.0; 1 << n],
        })
    }

    /// Spectrum with a single coefficient `c` at `a`.
    pub fn single(n: usize, a: Subset, c: f64) -> Result<Self> {
        a.check(n)?;
        let mut s = Self::zeros(n)?;
        s.coeffs[a.0 as usize] = c;
        Ok(s)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, a: Subset) -> f64 {
        self.coeffs[a.0 as usize]
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `sum_A h_hat(A)^2`.
    pub fn energy(&self) -> f64 {
        let sq: Vec<f64> = self.coeffs.iter().map(|c| c * c).collect();
        pairwise_sum(&sq)
    }

    /// Energy per level `|A| = 0..=n`.
    pub fn level_energy(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n + 1];
        for (a, c) in self.coeffs.iter().enumerate() {
            out[a.count_ones() as usize] += c * c;
        }
        out
    }
}

/// Fixed-order pairwise summation; the result does not depend on thread count.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    const LEAF: usize = 64;
    if xs.len() <= LEAF {
        xs.iter().sum()
    } else {
        let mid = xs.len() / 2;
        pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
    }
}

/// In-place unnormalized Hadamard butterfly, `O(n 2^n)`.
pub fn fwht_in_place(data: &mut [f64]) {
    let len = data.len();
    debug_assert!(len.is_power_of_two());
    let mut half = 1;
    while half < len {
        for block in data.chunks_exact_mut(2 * half) {
            let (lo, hi) = block.split_at_mut(half);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (a, b) = (*x, *y);
                *x = a + b;
                *y = a - b;
            }
        }
        half <<= 1;
    }
}

pub fn walsh_transform(h: &CubeFunction) -> WalshSpectrum {
    let mut coeffs = h.values.clone();
    fwht_in_place(&mut coeffs);
    let scale = 1.0 / coeffs.len() as f64;
    coeffs.iter_mut().for_each(|c| *c *= scale);
    WalshSpectrum { n: h.n, coeffs }
}

pub fn inverse_walsh_transform(s: &WalshSpectrum) -> CubeFunction {
    let mut values = s.coeffs.clone();
    fwht_in_place(&mut values);
    CubeFunction { n: s.n, values }
}

/// Largest dimension accepted by [`direct_walsh_transform`].
pub const DIRECT_MAX_DIM: usize = 10;

/// Direct `O(4^n)` summation of the Walsh coefficients. Used as an oracle.
pub fn direct_walsh_transform(h: &CubeFunction) -> Result<WalshSpectrum> {
    if h.n > DIRECT_MAX_DIM {
        return Err(Error::DimensionOutOfRange(h.n, DIRECT_MAX_DIM));
    }
    let len = h.values.len();
    let coeffs = (0..len as u64)
        .map(|a| {
            let terms: Vec<f64> = h
                .values
                .iter()
                .enumerate()
                .map(|(b, v)| v * walsh_character(a, b))
                .collect();
            pairwise_sum(&terms) / len as f64
        })
        .collect();
    Ok(WalshSpectrum { n: h.n, coeffs })
}

/// `(2^{-n} sum_eps |h(eps)|^p)^{1/p}` for `p >= 1`.
pub fn p_norm(h: &CubeFunction, p: f64) -> Result<f64> {
    Ok(p_moment(h, p)?.powf(1.0 / p))
}

/// `2^{-n} sum_eps |h(eps)|^p`, the `p`-th power of [`p_norm`].
pub fn p_moment(h: &CubeFunction, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be a finite real >= 1, got {p}")));
    }
    Ok(abs_moment(&h.values, p))
}

pub(crate) fn abs_moment(values: &[f64], p: f64) -> f64 {
    let powered: Vec<f64> = values.iter().map(|v| abs_pow(*v, p)).collect();
    pairwise_sum(&powered) / values.len() as f64
}

#[inline]
pub(crate) fn abs_pow(v: f64, p: f64) -> f64 {
    let a = v.abs();
    if p == 2.0 {
        a * a
    } else if p == 1.0 {
        a
    } else if p == 4.0 {
        let s = a * a;
        s * s
    } else {
        a.powf(p)
    }
}

/// Undivided difference `h(eps) - h(eps with eps_j flipped)`.
pub fn partial_derivative(h: &CubeFunction, j: usize) -> Result<CubeFunction> {
    h.coordinate(j)?;
    let bit = 1usize << j;
    let values = (0..h.values.len()).map(|b| h.values[b] - h.values[b ^ bit]).collect();
    Ok(CubeFunction { n: h.n, values })
}

/// `E_S h`: average over the coordinates in `S`, computed pointwise.
pub fn average_over(h: &CubeFunction, s: Subset) -> Result<CubeFunction> {
    s.check(h.n)?;
    let mut values = h.values.clone();
    for j in s.coords() {
        let bit = 1usize << j;
        for b in 0..values.len() {
            if b & bit == 0 {
                let avg = 0.5 * (values[b] + values[b | bit]);
                values[b] = avg;
                values[b | bit] = avg;
            }
        }
    }
    Ok(CubeFunction { n: h.n, values })
}

/// Fourier multipliers acting diagonally on Walsh coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Multiplier {
    /// `Rad_k`: keep `|A| = k`.
    RademacherProjection { k: usize },
    /// `Delta_S^alpha`: scale by `|A ∩ S|^alpha`, zero when `A ∩ S` is empty.
    FractionalLaplacian { set: Subset, alpha: f64 },
    /// `e^{-s Delta}`: scale by `e^{-s|A|}`.
    Heat { s: f64 },
    /// `R_j`: scale by `|A|^{-1/2}` on `A ∋ j`, zero otherwise (0-based `j`).
    Riesz { j: usize },
    /// `E_S`: keep `A` disjoint from `S`.
    Average { set: Subset },
    /// `I - Rad_0`: drop the mean.
    IdentityMinusRad0,
}

impl Multiplier {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            Multiplier::RademacherProjection { k } if k > n => {
                Err(invalid(format!("Rademacher level {k} exceeds dimension {n}")))
            }
            Multiplier::FractionalLaplacian { set, alpha } => {
                set.check(n)?;
                if alpha.is_finite() {
                    Ok(())
                } else {
                    Err(invalid("alpha must be finite"))
                }
            }
            Multiplier::Heat { s } if !(s >= 0.0) || !s.is_finite() => {
                Err(invalid(format!("heat time must be a finite s >= 0, got {s}")))
            }
            Multiplier::Riesz { j } if j >= n => Err(Error::CoordinateOutOfRange { coord: j, n }),
            Multiplier::Average { set } => set.check(n).map(|_| ()),
            _ => Ok(()),
        }
    }

    /// The multiplier's eigenvalue on `W_A`.
    pub fn factor(&self, a: u64) -> f64 {
        match *self {
            Multiplier::RademacherProjection { k } => {
                if a.count_ones() as usize == k {
                    1.0
                } else {
                    0.0
                }
            }
            Multiplier::FractionalLaplacian { set, alpha } => {
                let m = (a & set.0).count_ones();
                if m == 0 {
                    0.0
                } else {
                    (m as f64).powf(alpha)
                }
            }
            Multiplier::Heat { s } => (-s * a.count_ones() as f64).exp(),
            Multiplier::Riesz { j } => {
                if a >> j & 1 == 1 {
                    1.0 / (a.count_ones() as f64).sqrt()
                } else {
                    0.0
                }
            }
            Multiplier::Average { set } => {
                if a & set.0 == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Multiplier::IdentityMinusRad0 => {
                if a == 0 {
                    0.0
                } else {
                    1.0
                }
            }
        }
    }
}

pub fn apply_multiplier(s: &WalshSpectrum, m: Multiplier) -> Result<WalshSpectrum> {
    m.validate(s.n)?;
    let coeffs = s
        .coeffs
        .iter()
        .enumerate()
        .map(|(a, c)| c * m.factor(a as u64))
        .collect();
    Ok(WalshSpectrum { n: s.n, coeffs })
}

/// Apply a multiplier to a function through its spectrum.
pub fn apply_to_function(h: &CubeFunction, m: Multiplier) -> Result<CubeFunction> {
    let spec = apply_multiplier(&walsh_transform(h), m)?;
    Ok(inverse_walsh_transform(&spec))
}

pub fn fractional_laplacian(h: &CubeFunction, set: Subset, alpha: f64) -> Result<CubeFunction> {
    apply_to_function(h, Multiplier::FractionalLaplacian { set, alpha })
}

pub fn rademacher_projection(h: &CubeFunction, k: usize) -> Result<CubeFunction> {
    apply_to_function(h, Multiplier::RademacherProjection { k })
}

pub fn heat(h: &CubeFunction, s: f64) -> Result<CubeFunction> {
    apply_to_function(h, Multiplier::Heat { s })
}

/// `R_j h` through the spectral route (0-based `j`).
pub fn riesz_transform(h: &CubeFunction, j: usize) -> Result<CubeFunction> {
    h.coordinate(j)?;
    apply_to_function(h, Multiplier::Riesz { j })
}

/// Pointwise `(sum_j (R_j h)^2)^{1/2}` for mean-zero `h`.
pub fn riesz_square_function(h: &CubeFunction) -> Result<CubeFunction> {
    h.require_mean_zero()?;
    let spec = walsh_transform(h);
    let mut acc = vec![0.0; h.values.len()];
    for j in 0..h.n {
        let r = inverse_walsh_transform(&apply_multiplier(&spec, Multiplier::Riesz { j })?);
        for (a, v) in acc.iter_mut().zip(&r.values) {
            *a += v * v;
        }
    }
    acc.iter_mut().for_each(|v| *v = v.sqrt());
    Ok(CubeFunction { n: h.n, values: acc })
}

/// Which representation a serialized cube object carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Repr {
    Point,
    Walsh,
}

/// Wire format `{"n": int, "repr": "point"|"walsh", "data": [...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubeJson {
    pub n: usize,
    pub repr: Repr,
    pub data: Vec<f64>,
}

impl From<&CubeFunction> for CubeJson {
    fn from(h: &CubeFunction) -> Self {
        CubeJson {
            n: h.n,
            repr: Repr::Point,
            data: h.values.clone(),
        }
    }
}

impl From<&WalshSpectrum> for CubeJson {
    fn from(s: &WalshSpectrum) -> Self {
        CubeJson {
            n: s.n,
            repr: Repr::Walsh,
            data: s.coeffs.clone(),
        }
    }
}

impl CubeJson {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    /// Point values, converting from the Walsh representation if needed.
    pub fn into_function(self) -> Result<CubeFunction> {
        match self.repr {
            Repr::Point => CubeFunction::new(self.n, self.data),
            Repr::Walsh => Ok(inverse_walsh_transform(&WalshSpectrum::new(self.n, self.data)?)),
        }
    }

    pub fn into_spectrum(self) -> Result<WalshSpectrum> {
        match self.repr {
            Repr::Walsh => WalshSpectrum::new(self.n, self.data),
            Repr::Point => Ok(walsh_transform(&CubeFunction::new(self.n, self.data)?)),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(n: usize, coords: &[usize]) -> CubeFunction {
        CubeFunction::character(n, Subset::from_coords(coords.iter().copied())).unwrap()
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            CubeFunction::new(0, vec![1.0]),
            Err(Error::DimensionOutOfRange(0, _))
        ));
        assert!(matches!(
            CubeFunction::new(25, vec![]),
            Err(Error::DimensionOutOfRange(25, _))
        ));
        assert!(matches!(
            CubeFunction::new(2, vec![1.0; 3]),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            CubeFunction::new(1, vec![1.0, f64::NAN]),
            Err(Error::NonFinite(1))
        ));
    }

    #[test]
    fn transform_of_constant_and_character() {
        let s = walsh_transform(&CubeFunction::constant(2, 1.0).unwrap());
        assert_eq!(s.coeffs(), &[1.0, 0.0, 0.0, 0.0]);
        let s = walsh_transform(&w(2, &[0]));
        assert_eq!(s.coeffs(), &[0.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn inverse_of_single_coefficients() {
        let h = inverse_walsh_transform(&WalshSpectrum::single(2, Subset(1), 1.0).unwrap());
        assert_eq!(h, w(2, &[0]));
        let h = inverse_walsh_transform(&WalshSpectrum::single(3, Subset(0), 2.5).unwrap());
        assert_eq!(h, CubeFunction::constant(3, 2.5).unwrap());
    }

    #[test]
    fn norms() {
        let c = CubeFunction::constant(3, -2.0).unwrap();
        for p in [1.0, 2.0, 3.5] {
            assert!((p_norm(&c, p).unwrap() - 2.0).abs() < 1e-15);
            assert!((p_norm(&w(3, &[0]), p).unwrap() - 1.0).abs() < 1e-15);
        }
        // eps_1 + eps_2 takes values 2, 0, 0, -2
        let h = CubeFunction::linear(&[1.0, 1.0]).unwrap();
        assert!((p_norm(&h, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(p_norm(&h, 0.5).is_err());
    }

    #[test]
    fn derivatives_and_averages_on_characters() {
        assert_eq!(partial_derivative(&w(2, &[0]), 0).unwrap(), w(2, &[0]).scaled(2.0));
        assert_eq!(
            partial_derivative(&w(2, &[1]), 0).unwrap(),
            CubeFunction::constant(2, 0.0).unwrap()
        );
        assert!(partial_derivative(&w(2, &[1]), 2).is_err());
        let zero = CubeFunction::constant(2, 0.0).unwrap();
        assert_eq!(average_over(&w(2, &[0, 1]), Subset::singleton(1)).unwrap(), zero);
        assert_eq!(average_over(&w(2, &[0]), Subset::singleton(1)).unwrap(), w(2, &[0]));
        let h = CubeFunction::new(2, vec![1.0, 2.0, 3.0, 6.0]).unwrap();
        let e = average_over(&h, Subset::full(2)).unwrap();
        assert!(e.values().iter().all(|v| (v - 3.0).abs() < 1e-15));
    }

    #[test]
    fn multipliers_on_characters() {
        let a = Subset::from_coords([0, 1, 3]);
        let h = CubeFunction::character(4, a).unwrap();
        let heat_h = heat(&h, 0.3).unwrap();
        assert!(close(heat_h.values(), h.scaled((-0.9f64).exp()).values(), 1e-15));
        let inv = fractional_laplacian(&h, Subset::full(4), -0.5).unwrap();
        assert!(close(inv.values(), h.scaled(1.0 / 3f64.sqrt()).values(), 1e-15));
        let r = riesz_transform(&w(2, &[0, 1]), 0).unwrap();
        assert!(close(r.values(), w(2, &[0, 1]).scaled(0.5f64.sqrt()).values(), 1e-15));
        assert_eq!(riesz_transform(&w(2, &[0]), 0).unwrap(), w(2, &[0]));
        assert!(riesz_transform(&w(2, &[1]), 0)
            .unwrap()
            .values()
            .iter()
            .all(|v| *v == 0.0));
    }

    #[test]
    fn fractional_laplacian_kills_frequencies_missing_the_set() {
        let s = WalshSpectrum::new(2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let out = apply_multiplier(
            &s,
            Multiplier::FractionalLaplacian {
                set: Subset(0b10),
                alpha: -1.0,
            },
        )
        .unwrap();
        assert_eq!(out.coeffs(), &[0.0, 0.0, 3.0, 4.0]);
    }

    #[test]
    fn multiplier_parameter_errors() {
        let s = WalshSpectrum::zeros(3).unwrap();
        assert!(apply_multiplier(&s, Multiplier::RademacherProjection { k: 4 }).is_err());
        assert!(apply_multiplier(&s, Multiplier::Heat { s: -1.0 }).is_err());
        assert!(apply_multiplier(&s, Multiplier::Riesz { j: 3 }).is_err());
        assert!(apply_multiplier(&s, Multiplier::Average { set: Subset(0b1000) }).is_err());
    }

    #[test]
    fn square_function_of_low_characters() {
        let one = CubeFunction::constant(2, 1.0).unwrap();
        assert!(close(
            riesz_square_function(&w(2, &[0])).unwrap().values(),
            one.values(),
            1e-15
        ));
        assert!(close(
            riesz_square_function(&w(2, &[0, 1])).unwrap().values(),
            one.values(),
            1e-15
        ));
        assert!(matches!(
            riesz_square_function(&CubeFunction::constant(2, 1.0).unwrap()),
            Err(Error::NotMeanZero(_))
        ));
    }

    #[test]
    fn json_wire_format() {
        let h = CubeFunction::new(1, vec![0.5, -0.5]).unwrap();
        let text = CubeJson::from(&h).to_json();
        assert_eq!(text, r#"{"n":1,"repr":"point","data":[0.5,-0.5]}"#);
        let spec = CubeJson::parse(&text).unwrap().into_spectrum().unwrap();
        assert_eq!(spec.coeffs(), &[0.0, 0.5]);
        let back = CubeJson::parse(&CubeJson::from(&spec).to_json())
            .unwrap()
            .into_function()
            .unwrap();
        assert_eq!(back, h);
        assert!(CubeJson::parse(r#"{"n":1,"repr":"bogus","data":[]}"#).is_err());
        assert!(CubeJson::parse(r#"{"n":2,"repr":"point","data":[1]}"#)
            .unwrap()
            .into_function()
            .is_err());
    }
}
