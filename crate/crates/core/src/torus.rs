//! Real functions on the discrete torus `Z_{2r}^n`, the smoothing operator
//! `T_S`, the odd chaos lift onto the cube, and the three difference
//! statistics that enter the metric X_p inequality.
//!
//! A single half-period `r` covers both normalizations: the defining
//! inequality on `Z_{2m}^n` is `r = m`, and the sharp-scaling statement on
//! `Z_{8m}^n` is `r = 4m`. The long shift is always `r * eps_S`.

use std::fmt;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::subset::{binomial, k_subsets, Subset};
use crate::walsh::{abs_pow, pairwise_sum, sign, CubeFunction, MAX_DIM};

/// Largest dense table, in entries.
pub const MAX_DENSE: usize = 1 << 26;
/// Exact-mode work bound `(2r)^n 2^n`.
pub const EXACT_WORK_LIMIT: u128 = 1 << 26;
/// Largest `|S|` accepted by [`t_s_average`].
pub const MAX_SMOOTHING_SET: usize = 20;
/// Monte Carlo samples per RNG block.
pub const MC_BLOCK: u64 = 1024;

pub type Oracle = Arc<dyn Fn(&[usize]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum Backing {
    /// `(2r)^n` values, little-endian mixed-radix order.
    Dense(Vec<f64>),
    /// Deterministic point evaluator.
    Oracle(Oracle),
}

impl fmt::Debug for Backing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Backing::Dense(v) => f.debug_tuple("Dense").field(&v.len()).finish(),
            Backing::Oracle(_) => f.write_str("Oracle"),
        }
    }
}

/// A real function on `Z_{2r}^n`.
#[derive(Debug, Clone)]
pub struct TorusFunction {
    r: usize,
    n: usize,
    backing: Backing,
}

fn check_shape(r: usize, n: usize) -> Result<()> {
    if r == 0 {
        return Err(invalid("half-period r must be positive"));
    }
    if n == 0 || n > MAX_DIM {
        return Err(Error::DimensionOutOfRange(n, MAX_DIM));
    }
    Ok(())
}

fn dense_len(r: usize, n: usize) -> Result<usize> {
    let q = 2 * r as u128;
    let len = q.checked_pow(n as u32).unwrap_or(u128::MAX);
    if len > MAX_DENSE as u128 {
        Err(Error::BudgetExceeded {
            work: len,
            budget: MAX_DENSE as u128,
        })
    } else {
        Ok(len as usize)
    }
}

impl TorusFunction {
    pub fn dense(r: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(r, n)?;
        let expected = dense_len(r, n)?;
        if data.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: data.len(),
            });
        }
        if let Some(i) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self {
            r,
            n,
            backing: Backing::Dense(data),
        })
    }

    pub fn oracle(r: usize, n: usize, f: impl Fn(&[usize]) -> f64 + Send + Sync + 'static) -> Result<Self> {
        check_shape(r, n)?;
        Ok(Self {
            r,
            n,
            backing: Backing::Oracle(Arc::new(f)),
        })
    }

    /// Tabulate `f` densely.
    pub fn from_fn(r: usize, n: usize, f: impl Fn(&[usize]) -> f64 + Sync) -> Result<Self> {
        check_shape(r, n)?;
        let len = dense_len(r, n)?;
        let q = 2 * r;
        let data = (0..len)
            .into_par_iter()
            .map_init(
                || vec![0usize; n],
                |x, idx| {
                    decode(idx, q, x);
                    f(x)
                },
            )
            .collect();
        Self::dense(r, n, data)
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Group order `2r` per coordinate.
    pub fn modulus(&self) -> usize {
        2 * self.r
    }

    pub fn backing(&self) -> &Backing {
        &self.backing
    }

    pub fn dense_values(&self) -> Option<&[f64]> {
        match &self.backing {
            Backing::Dense(v) => Some(v),
            Backing::Oracle(_) => None,
        }
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.backing, Backing::Dense(_))
    }

    /// Number of points `(2r)^n` (saturating).
    pub fn point_count(&self) -> u128 {
        (self.modulus() as u128).checked_pow(self.n as u32).unwrap_or(u128::MAX)
    }

    /// Value at a point with coordinates already reduced mod `2r`.
    pub fn value(&self, x: &[usize]) -> f64 {
        match &self.backing {
            Backing::Dense(v) => v[encode(x, self.modulus())],
            Backing::Oracle(f) => f(x),
        }
    }

    /// Convert to dense backing, tabulating an oracle if necessary.
    pub fn to_dense(&self) -> Result<Self> {
        match &self.backing {
            Backing::Dense(_) => Ok(self.clone()),
            Backing::Oracle(f) => Self::from_fn(self.r, self.n, |x| f(x)),
        }
    }

    fn require_dense(&self) -> Result<&[f64]> {
        self.dense_values().ok_or(Error::OracleBacking)
    }

    pub fn min_max(&self) -> Option<(f64, f64)> {
        self.dense_values().map(|v| {
            v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                (lo.min(*x), hi.max(*x))
            })
        })
    }

    pub fn mean(&self) -> Option<f64> {
        self.dense_values().map(|v| pairwise_sum(v) / v.len() as f64)
    }
}

/// Little-endian mixed-radix index of `x` in `Z_q^n`.
pub fn encode(x: &[usize], q: usize) -> usize {
    x.iter().rev().fold(0, |acc, &c| acc * q + c)
}

pub fn decode(mut idx: usize, q: usize, x: &mut [usize]) {
    for c in x.iter_mut() {
        *c = idx % q;
        idx /= q;
    }
}

#[inline]
fn shifted(c: usize, delta: i64, q: usize) -> usize {
    (c as i64 + delta).rem_euclid(q as i64) as usize
}

/// Built-in test functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Generator {
    Constant {
        value: f64,
    },
    /// `cos(2 pi x_j / 2r)`.
    Cosine {
        coord: usize,
    },
    /// `sum_j a_j cos(2 pi x_j / 2r)`.
    CosineSum {
        coeffs: Vec<f64>,
    },
    /// `cos(2 pi xi . x / 2r)`.
    Character {
        freq: Vec<i64>,
    },
    /// Cyclic distance of `x_j` to 0, a 1-Lipschitz tent.
    Tent {
        coord: usize,
    },
    /// Independent uniform values in `[-1, 1]`.
    RandomDense {
        seed: u64,
    },
    /// `sum_t c_t cos(2 pi xi_t . x / 2r + phi_t)` with Gaussian `c_t`, uniform `xi_t`, `phi_t`.
    RandomTrig {
        seed: u64,
        terms: usize,
    },
}

impl Generator {
    pub fn name(&self) -> &'static str {
        match self {
            Generator::Constant { .. } => "constant",
            Generator::Cosine { .. } => "cosine",
            Generator::CosineSum { .. } => "cosine-sum",
            Generator::Character { .. } => "character",
            Generator::Tent { .. } => "tent",
            Generator::RandomDense { .. } => "random",
            Generator::RandomTrig { .. } => "random-trig",
        }
    }

    fn check(&self, n: usize) -> Result<()> {
        match self {
            Generator::Cosine { coord } | Generator::Tent { coord } if *coord >= n => {
                Err(Error::CoordinateOutOfRange { coord: *coord, n })
            }
            Generator::CosineSum { coeffs } if coeffs.len() != n => Err(Error::LengthMismatch {
                expected: n,
                actual: coeffs.len(),
            }),
            Generator::Character { freq } if freq.len() != n => Err(Error::LengthMismatch {
                expected: n,
                actual: freq.len(),
            }),
            _ => Ok(()),
        }
    }

    /// Tabulate the generator on `Z_{2r}^n`.
    pub fn build(&self, r: usize, n: usize) -> Result<TorusFunction> {
        check_shape(r, n)?;
        self.check(n)?;
        if let Generator::RandomDense { seed } = self {
            let len = dense_len(r, n)?;
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let data = (0..len).map(|_| rng.random_range(-1.0..=1.0)).collect();
            return TorusFunction::dense(r, n, data);
        }
        let f = self.evaluator(r, n);
        TorusFunction::from_fn(r, n, |x| f(x))
    }

    /// Oracle-backed version (random dense values are tabulated first).
    pub fn build_oracle(&self, r: usize, n: usize) -> Result<TorusFunction> {
        check_shape(r, n)?;
        self.check(n)?;
        if let Generator::RandomDense { .. } = self {
            let dense = self.build(r, n)?;
            return TorusFunction::oracle(r, n, move |x| dense.value(x));
        }
        let f = self.evaluator(r, n);
        TorusFunction::oracle(r, n, move |x| f(x))
    }

    fn evaluator(&self, r: usize, n: usize) -> Box<dyn Fn(&[usize]) -> f64 + Send + Sync> {
        let q = (2 * r) as f64;
        let tau = std::f64::consts::TAU;
        match self.clone() {
            Generator::Constant { value } => Box::new(move |_| value),
            Generator::Cosine { coord } => Box::new(move |x| (tau * x[coord] as f64 / q).cos()),
            Generator::CosineSum { coeffs } => {
                Box::new(move |x| coeffs.iter().zip(x).map(|(a, c)| a * (tau * *c as f64 / q).cos()).sum())
            }
            Generator::Character { freq } => Box::new(move |x| {
                let phase: i64 = freq.iter().zip(x).map(|(xi, c)| xi * *c as i64).sum();
                (tau * phase.rem_euclid(2 * r as i64) as f64 / q).cos()
            }),
            Generator::Tent { coord } => Box::new(move |x| x[coord].min(2 * r - x[coord]) as f64),
            Generator::RandomTrig { seed, terms } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let modes: Vec<(f64, Vec<i64>, f64)> = (0..terms)
                    .map(|_| {
                        let c: f64 = StandardNormal.sample(&mut rng);
                        let xi = (0..n).map(|_| rng.random_range(0..2 * r as i64)).collect();
                        let phi = rng.random_range(0.0..tau);
                        (c, xi, phi)
                    })
                    .collect();
                Box::new(move |x| {
                    modes
                        .iter()
                        .map(|(c, xi, phi)| {
                            let phase: i64 = xi.iter().zip(x).map(|(a, b)| a * *b as i64).sum();
                            c * (tau * phase as f64 / q + phi).cos()
                        })
                        .sum()
                })
            }
            Generator::RandomDense { .. } => unreachable!("tabulated directly"),
        }
    }
}

/// `T_S f(x) = 2^{-|S|} sum_{delta in {-1,1}^S} f(x + 2 delta_S)` at one point.
pub fn t_s_value(f: &TorusFunction, s: Subset, x: &[usize]) -> f64 {
    let q = f.modulus();
    let coords: Vec<usize> = s.coords().collect();
    let mut y = x.to_vec();
    let count = 1usize << coords.len();
    let terms: Vec<f64> = (0..count)
        .map(|b| {
            for (i, &j) in coords.iter().enumerate() {
                y[j] = shifted(x[j], 2 * sign(b, i) as i64, q);
            }
            f.value(&y)
        })
        .collect();
    pairwise_sum(&terms) / count as f64
}

/// The smoothing operator `T_S` on a dense function.
pub fn t_s_average(f: &TorusFunction, s: Subset) -> Result<TorusFunction> {
    let values = f.require_dense()?;
    s.check(f.n)?;
    if s.len() > MAX_SMOOTHING_SET {
        return Err(invalid(format!(
            "|S| = {} exceeds the smoothing limit {MAX_SMOOTHING_SET}",
            s.len()
        )));
    }
    // Averaging over +-2 in each coordinate of S factorizes into 1-D passes.
    let q = f.modulus();
    let mut data = values.to_vec();
    let mut scratch = vec![0.0; data.len()];
    for j in s.coords() {
        let stride = q.pow(j as u32);
        scratch.par_iter_mut().enumerate().for_each(|(idx, out)| {
            let c = (idx / stride) % q;
            let base = idx - c * stride;
            let up = base + shifted(c, 2, q) * stride;
            let down = base + shifted(c, -2, q) * stride;
            *out = 0.5 * (data[up] + data[down]);
        });
        std::mem::swap(&mut data, &mut scratch);
    }
    TorusFunction::dense(f.r, f.n, data)
}

/// `h_x(eps) = f(x + 2 eps) - f(x - 2 eps)`, an odd (hence mean-zero) cube function.
pub fn chaos_lift(f: &TorusFunction, x: &[usize]) -> Result<CubeFunction> {
    if x.len() != f.n {
        return Err(Error::LengthMismatch {
            expected: f.n,
            actual: x.len(),
        });
    }
    let q = f.modulus();
    if let Some(c) = x.iter().find(|c| **c >= q) {
        return Err(invalid(format!("coordinate value {c} not reduced mod {q}")));
    }
    let n = f.n;
    CubeFunction::from_fn(n, |b| {
        let mut plus = vec![0usize; n];
        let mut minus = vec![0usize; n];
        for j in 0..n {
            let e = 2 * sign(b, j) as i64;
            plus[j] = shifted(x[j], e, q);
            minus[j] = shifted(x[j], -e, q);
        }
        f.value(&plus) - f.value(&minus)
    })
}

/// Exact enumeration or seeded Monte Carlo.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    MonteCarlo,
}

/// How a statistic is evaluated. `budget` is the sample count per term in
/// Monte Carlo mode and is ignored in exact mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sampling {
    pub mode: Mode,
    pub budget: u64,
    pub seed: u64,
}

impl Sampling {
    pub fn exact() -> Self {
        Sampling {
            mode: Mode::Exact,
            budget: 0,
            seed: 0,
        }
    }

    pub fn monte_carlo(budget: u64, seed: u64) -> Self {
        Sampling {
            mode: Mode::MonteCarlo,
            budget,
            seed,
        }
    }
}

/// Per-term sample standard errors.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermErrors {
    pub long_term: f64,
    pub gradient_term: f64,
    pub diagonal_term: f64,
}

/// The three expectations of the metric X_p inequality for a real function.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceStats {
    pub p: f64,
    pub k: usize,
    /// `C(n,k)^{-1} sum_{|S|=k} E |f(x + r eps_S) - f(x)|^p`.
    pub long_term: f64,
    /// `sum_j E |f(x + e_j) - f(x)|^p`.
    pub gradient_term: f64,
    /// `E |f(x + eps) - f(x)|^p`.
    pub diagonal_term: f64,
    pub mode: Mode,
    pub sample_count: Option<u64>,
    pub seed: Option<u64>,
    pub stderr: Option<TermErrors>,
}

/// Normalization of the long shift's scale `m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scaling {
    /// Group `Z_{8m}^n`: `m = r / 4`, requires `4 | r`.
    Sharp,
    /// Group `Z_{2m}^n`: `m = r`.
    Generic,
}

impl Scaling {
    pub fn scale(self, r: usize) -> Result<f64> {
        match self {
            Scaling::Sharp if !r.is_multiple_of(4) => {
                Err(invalid(format!("sharp scaling needs r divisible by 4 (r = {r})")))
            }
            Scaling::Sharp => Ok((r / 4) as f64),
            Scaling::Generic => Ok(r as f64),
        }
    }
}

fn check_stats_args(f: &TorusFunction, p: f64, k: usize, sampling: &Sampling) -> Result<()> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be a finite real >= 1, got {p}")));
    }
    if k == 0 || k > f.n {
        return Err(invalid(format!("k = {k} out of range 1..={}", f.n)));
    }
    match sampling.mode {
        Mode::Exact => {
            f.require_dense()?;
            let work = f.point_count().saturating_mul(1u128 << f.n);
            if work > EXACT_WORK_LIMIT {
                return Err(Error::BudgetExceeded {
                    work,
                    budget: EXACT_WORK_LIMIT,
                });
            }
        }
        Mode::MonteCarlo => {
            if sampling.budget < 2 {
                return Err(invalid("Monte Carlo needs a budget of at least 2 samples"));
            }
        }
    }
    Ok(())
}

/// Sum `g(idx)` over `0..len` in fixed-size chunks reduced pairwise.
fn chunked_sum(len: usize, g: impl Fn(usize) -> f64 + Sync) -> f64 {
    const CHUNK: usize = 4096;
    let chunks = len.div_ceil(CHUNK);
    let partial: Vec<f64> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(len);
            let terms: Vec<f64> = (lo..hi).map(&g).collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&partial)
}

/// Index of `idx` shifted by `delta` in each coordinate of `coords`.
#[inline]
fn shift_index(idx: usize, q: usize, strides: &[usize], coords: impl Iterator<Item = (usize, i64)>) -> usize {
    let mut out = idx;
    for (j, delta) in coords {
        let c = (idx / strides[j]) % q;
        out = out + shifted(c, delta, q) * strides[j] - c * strides[j];
    }
    out
}

fn strides(q: usize, n: usize) -> Vec<usize> {
    (0..n).map(|j| q.pow(j as u32)).collect()
}

fn exact_gradient(values: &[f64], q: usize, n: usize, p: f64) -> f64 {
    let st = strides(q, n);
    let len = values.len();
    let per_coord: Vec<f64> = (0..n)
        .map(|j| {
            chunked_sum(len, |idx| {
                let y = shift_index(idx, q, &st, std::iter::once((j, 1)));
                abs_pow(values[y] - values[idx], p)
            }) / len as f64
        })
        .collect();
    pairwise_sum(&per_coord)
}

fn exact_diagonal(values: &[f64], q: usize, n: usize, p: f64) -> f64 {
    let st = strides(q, n);
    let len = values.len();
    let signs = 1usize << n;
    chunked_sum(len, |idx| {
        let terms: Vec<f64> = (0..signs)
            .map(|b| {
                let y = shift_index(idx, q, &st, (0..n).map(|j| (j, sign(b, j) as i64)));
                abs_pow(values[y] - values[idx], p)
            })
            .collect();
        pairwise_sum(&terms)
    }) / (len * signs) as f64
}

/// `E_x |g(x + r 1_S) - g(x)|^p` for a dense table. Since `r = -r` in
/// `Z_{2r}`, the antipodal shift `r eps_S` does not depend on the signs.
fn exact_long_for_set(values: &[f64], q: usize, n: usize, r: usize, s: Subset, p: f64) -> f64 {
    let st = strides(q, n);
    let len = values.len();
    chunked_sum(len, |idx| {
        let y = shift_index(idx, q, &st, s.coords().map(|j| (j, r as i64)));
        abs_pow(values[y] - values[idx], p)
    }) / len as f64
}

#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, v: f64) {
        self.count += 1;
        let d = v - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (v - self.mean);
    }

    fn merge(self, other: Moments) -> Moments {
        if self.count == 0 {
            return other;
        }
        if other.count == 0 {
            return self;
        }
        let count = self.count + other.count;
        let d = other.mean - self.mean;
        let mean = self.mean + d * other.count as f64 / count as f64;
        let m2 = self.m2 + other.m2 + d * d * self.count as f64 * other.count as f64 / count as f64;
        Moments { count, mean, m2 }
    }

    fn stderr(&self) -> f64 {
        if self.count < 2 {
            return f64::INFINITY;
        }
        (self.m2 / (self.count - 1) as f64 / self.count as f64).sqrt()
    }
}

/// Deterministic per-block RNG: master seed fixes the key, `(term, block)` the stream.
pub fn block_rng(seed: u64, term: u64, block: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(term << 40 | block);
    rng
}

/// Mean and standard error of `sampler` over `budget` draws, in fixed-size
/// blocks reduced in block order so the result is schedule-independent.
fn monte_carlo_mean(seed: u64, term: u64, budget: u64, sampler: impl Fn(&mut ChaCha8Rng) -> f64 + Sync) -> (f64, f64) {
    let blocks = budget.div_ceil(MC_BLOCK);
    let parts: Vec<Moments> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = block_rng(seed, term, b);
            let count = MC_BLOCK.min(budget - b * MC_BLOCK);
            let mut m = Moments::default();
            for _ in 0..count {
                m.push(sampler(&mut rng));
            }
            m
        })
        .collect();
    let total = parts.into_iter().fold(Moments::default(), Moments::merge);
    (total.mean, total.stderr())
}

fn random_point(rng: &mut ChaCha8Rng, q: usize, n: usize) -> Vec<usize> {
    (0..n).map(|_| rng.random_range(0..q)).collect()
}

fn random_subset(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Subset {
    Subset::from_coords(sample(rng, n, k))
}

const TERM_LONG: u64 = 1;
const TERM_GRADIENT: u64 = 2;
const TERM_DIAGONAL: u64 = 3;

fn mc_gradient_diagonal(f: &TorusFunction, p: f64, sampling: &Sampling) -> ((f64, f64), (f64, f64)) {
    let (q, n) = (f.modulus(), f.n);
    let gradient = monte_carlo_mean(sampling.seed, TERM_GRADIENT, sampling.budget, |rng| {
        let x = random_point(rng, q, n);
        let j = rng.random_range(0..n);
        let mut y = x.clone();
        y[j] = shifted(x[j], 1, q);
        n as f64 * abs_pow(f.value(&y) - f.value(&x), p)
    });
    let diagonal = monte_carlo_mean(sampling.seed, TERM_DIAGONAL, sampling.budget, |rng| {
        let x = random_point(rng, q, n);
        let y: Vec<usize> = x
            .iter()
            .map(|c| shifted(*c, if rng.random::<bool>() { 1 } else { -1 }, q))
            .collect();
        abs_pow(f.value(&y) - f.value(&x), p)
    });
    (gradient, diagonal)
}

/// The long-shift, gradient and diagonal moments of `f`.
pub fn difference_stats(f: &TorusFunction, p: f64, k: usize, sampling: Sampling) -> Result<DifferenceStats> {
    check_stats_args(f, p, k, &sampling)?;
    let (q, n, r) = (f.modulus(), f.n, f.r);
    match sampling.mode {
        Mode::Exact => {
            let values = f.require_dense()?;
            let per_set: Vec<f64> = k_subsets(n, k)
                .map(|s| exact_long_for_set(values, q, n, r, s, p))
                .collect();
            Ok(DifferenceStats {
                p,
                k,
                long_term: pairwise_sum(&per_set) / binomial(n, k) as f64,
                gradient_term: exact_gradient(values, q, n, p),
                diagonal_term: exact_diagonal(values, q, n, p),
                mode: Mode::Exact,
                sample_count: None,
                seed: None,
                stderr: None,
            })
        }
        Mode::MonteCarlo => {
            let long = monte_carlo_mean(sampling.seed, TERM_LONG, sampling.budget, |rng| {
                let s = random_subset(rng, n, k);
                let x = random_point(rng, q, n);
                let mut y = x.clone();
                for j in s.coords() {
                    let e = if rng.random::<bool>() { 1 } else { -1 };
                    y[j] = shifted(x[j], e * r as i64, q);
                }
                abs_pow(f.value(&y) - f.value(&x), p)
            });
            let (gradient, diagonal) = mc_gradient_diagonal(f, p, &sampling);
            Ok(mc_stats(p, k, long, gradient, diagonal, &sampling))
        }
    }
}

fn mc_stats(
    p: f64,
    k: usize,
    long: (f64, f64),
    gradient: (f64, f64),
    diagonal: (f64, f64),
    sampling: &Sampling,
) -> DifferenceStats {
    DifferenceStats {
        p,
        k,
        long_term: long.0,
        gradient_term: gradient.0,
        diagonal_term: diagonal.0,
        mode: Mode::MonteCarlo,
        sample_count: Some(sampling.budget),
        seed: Some(sampling.seed),
        stderr: Some(TermErrors {
            long_term: long.1,
            gradient_term: gradient.1,
            diagonal_term: diagonal.1,
        }),
    }
}

/// As [`difference_stats`], but the long term compares `T_{[n]\S} f` at both
/// endpoints and is divided by `m^p`, with `m` fixed by `scaling`.
pub fn smoothed_difference_stats(
    f: &TorusFunction,
    p: f64,
    k: usize,
    sampling: Sampling,
    scaling: Scaling,
) -> Result<DifferenceStats> {
    check_stats_args(f, p, k, &sampling)?;
    f.require_dense()?;
    let m = scaling.scale(f.r)?;
    let (q, n, r) = (f.modulus(), f.n, f.r);
    let norm = m.powf(p);
    match sampling.mode {
        Mode::Exact => {
            let values = f.require_dense()?;
            let per_set = k_subsets(n, k)
                .map(|s| {
                    let smooth = t_s_average(f, s.complement(n))?;
                    let v = smooth.require_dense()?;
                    Ok(exact_long_for_set(v, q, n, r, s, p))
                })
                .collect::<Result<Vec<f64>>>()?;
            Ok(DifferenceStats {
                p,
                k,
                long_term: pairwise_sum(&per_set) / binomial(n, k) as f64 / norm,
                gradient_term: exact_gradient(values, q, n, p),
                diagonal_term: exact_diagonal(values, q, n, p),
                mode: Mode::Exact,
                sample_count: None,
                seed: None,
                stderr: None,
            })
        }
        Mode::MonteCarlo => {
            let (mean, se) = monte_carlo_mean(sampling.seed, TERM_LONG, sampling.budget, |rng| {
                let s = random_subset(rng, n, k);
                let rest = s.complement(n);
                let x = random_point(rng, q, n);
                let mut y = x.clone();
                for j in s.coords() {
                    y[j] = shifted(x[j], r as i64, q);
                }
                abs_pow(t_s_value(f, rest, &y) - t_s_value(f, rest, &x), p)
            });
            let (gradient, diagonal) = mc_gradient_diagonal(f, p, &sampling);
            Ok(mc_stats(p, k, (mean / norm, se / norm), gradient, diagonal, &sampling))
        }
    }
}

/// `(E_x |f(x) - T_S f(x)|^p)^{1/p}` and the diagonal moment `E |f(x+eps) - f(x)|^p`.
pub fn smoothing_perturbation(f: &TorusFunction, s: Subset, p: f64) -> Result<(f64, f64)> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(invalid(format!("p must be a finite real >= 1, got {p}")));
    }
    let values = f.require_dense()?;
    let work = f.point_count().saturating_mul(1u128 << f.n);
    if work > EXACT_WORK_LIMIT {
        return Err(Error::BudgetExceeded {
            work,
            budget: EXACT_WORK_LIMIT,
        });
    }
    let smooth = t_s_average(f, s)?;
    let sv = smooth.require_dense()?;
    let dev = chunked_sum(values.len(), |i| abs_pow(values[i] - sv[i], p)) / values.len() as f64;
    let diag = exact_diagonal(values, f.modulus(), f.n, p);
    Ok((dev.powf(1.0 / p), diag))
}

/// Wire format `{"r": int, "n": int, "data": [...]}` for dense functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusJson {
    pub r: usize,
    pub n: usize,
    pub data: Vec<f64>,
}

impl TorusJson {
    pub fn from_function(f: &TorusFunction) -> Result<Self> {
        Ok(TorusJson {
            r: f.r,
            n: f.n,
            data: f.require_dense()?.to_vec(),
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    pub fn into_function(self) -> Result<TorusFunction> {
        TorusFunction::dense(self.r, self.n, self.data)
    }
}
