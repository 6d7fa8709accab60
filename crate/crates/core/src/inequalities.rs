//! Evaluators that compute both sides of each cube and torus inequality on a
//! concrete input and package them as an [`InequalityReport`].
//!
//! Implicit constants are never inputs. Every report carries
//! `ratio = lhs / rhs` with `rhs = rhs_scale * (sum of rhs_terms)^{1/rhs_power}`,
//! and `ratio = 0` whenever `rhs = 0`.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::subset::{binomial, deposit_bits, k_subsets, Subset};
use crate::torus::{
    block_rng, difference_stats, smoothed_difference_stats, smoothing_perturbation, Mode, Sampling, Scaling,
    TorusFunction, EXACT_WORK_LIMIT,
};
use crate::walsh::{
    abs_moment, abs_pow, apply_multiplier, average_over, fwht_in_place, inverse_walsh_transform, p_norm, pairwise_sum,
    partial_derivative, riesz_square_function, walsh_transform, CubeFunction, Multiplier, WalshSpectrum,
};

/// Slack allowed on explicit-constant inequalities, relative to `max(1, rhs)`.
pub const EXPLICIT_SLACK: f64 = 1e-12;
/// Largest `C(n,k)` enumerated by [`chaos_xp`].
pub const MAX_SUBSETS: u128 = 1 << 20;
/// Largest `C(n,k) 2^k` enumerated by [`linear_xp`].
pub const LINEAR_WORK_LIMIT: u128 = 1 << 30;
/// Largest cube dimension accepted by [`chaos_xp`].
pub const CHAOS_MAX_DIM: usize = 20;

/// Both sides of one inequality evaluated on one input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InequalityReport {
    pub name: String,
    pub params: BTreeMap<String, Value>,
    pub lhs: f64,
    /// Named right-hand-side pieces, constants excluded. Each is `>= 0`.
    pub rhs_terms: BTreeMap<String, f64>,
    pub rhs_scale: f64,
    pub rhs_power: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub mode: Mode,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<BTreeMap<String, f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub budget: Option<u64>,
    pub flags: BTreeMap<String, bool>,
    pub extras: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_secs: Option<f64>,
}

impl InequalityReport {
    fn new(name: &str) -> Self {
        InequalityReport {
            name: name.to_string(),
            params: BTreeMap::new(),
            lhs: 0.0,
            rhs_terms: BTreeMap::new(),
            rhs_scale: 1.0,
            rhs_power: 1.0,
            rhs: 0.0,
            ratio: 0.0,
            mode: Mode::Exact,
            stderr: None,
            seed: None,
            budget: None,
            flags: BTreeMap::new(),
            extras: BTreeMap::new(),
            wall_time_secs: None,
        }
    }

    fn param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }

    fn term(mut self, key: &str, value: f64) -> Self {
        self.rhs_terms.insert(key.to_string(), value);
        self
    }

    fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    fn flag(mut self, key: &str, value: bool) -> Self {
        self.flags.insert(key.to_string(), value);
        self
    }

    fn sampled(mut self, sampling: &Sampling) -> Self {
        self.mode = sampling.mode;
        if sampling.mode == Mode::MonteCarlo {
            self.seed = Some(sampling.seed);
            self.budget = Some(sampling.budget);
        }
        self
    }

    /// Set `lhs`, `rhs_scale`, `rhs_power`, then derive `rhs` and `ratio`.
    fn finish(mut self, lhs: f64, scale: f64, power: f64, started: Instant) -> Self {
        self.lhs = lhs;
        self.rhs_scale = scale;
        self.rhs_power = power;
        self.rhs = self.recompute_rhs();
        self.ratio = ratio_of(lhs, self.rhs);
        self.wall_time_secs = Some(started.elapsed().as_secs_f64());
        self
    }

    /// `rhs_scale * (sum of rhs_terms)^{1/rhs_power}`, summed in key order.
    pub fn recompute_rhs(&self) -> f64 {
        let total: f64 = self.rhs_terms.values().sum();
        self.rhs_scale * total.powf(1.0 / self.rhs_power)
    }

    /// True when the explicit-constant check recorded a violation.
    pub fn violated(&self) -> bool {
        self.flags.get("violated").copied().unwrap_or(false)
    }

    /// Flattened `(column, value)` pairs for CSV output: identity, params,
    /// sides, then terms, errors, extras and flags, each in key order.
    pub fn flatten(&self) -> Vec<(String, String)> {
        let mut out = vec![
            ("name".to_string(), self.name.clone()),
            ("mode".to_string(), mode_name(self.mode).to_string()),
            ("seed".to_string(), self.seed.map(|s| s.to_string()).unwrap_or_default()),
            (
                "budget".to_string(),
                self.budget.map(|s| s.to_string()).unwrap_or_default(),
            ),
        ];
        for (k, v) in &self.params {
            let text = match v {
                Value::String(s) => s.clone(),
                Value::Array(items) => items.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" "),
                other => other.to_string(),
            };
            out.push((k.clone(), text));
        }
        out.push(("lhs".into(), self.lhs.to_string()));
        out.push(("rhs".into(), self.rhs.to_string()));
        out.push(("ratio".into(), self.ratio.to_string()));
        for (k, v) in &self.rhs_terms {
            out.push((format!("term_{k}"), v.to_string()));
        }
        for (k, v) in self.stderr.iter().flatten() {
            out.push((format!("stderr_{k}"), v.to_string()));
        }
        for (k, v) in &self.extras {
            out.push((format!("extra_{k}"), v.to_string()));
        }
        for (k, v) in &self.flags {
            out.push((format!("flag_{k}"), v.to_string()));
        }
        out
    }
}

pub fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Exact => "exact",
        Mode::MonteCarlo => "monte_carlo",
    }
}

/// `lhs / rhs`, with `0 / 0 = 0`.
pub fn ratio_of(lhs: f64, rhs: f64) -> f64 {
    if rhs == 0.0 {
        0.0
    } else {
        lhs / rhs
    }
}

fn check_p(p: f64, min: f64) -> Result<()> {
    if !(p >= min) || !p.is_finite() {
        Err(invalid(format!("p must be a finite real >= {min}, got {p}")))
    } else {
        Ok(())
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k > n {
        Err(invalid(format!("k = {k} out of range 1..={n}")))
    } else {
        Ok(())
    }
}

fn set_param(s: Subset) -> Value {
    json!(s.coords().collect::<Vec<_>>())
}

/// `2^{-|coeffs|} sum_signs |sum_i sign_i c_i|^p`, using the global sign flip symmetry.
pub(crate) fn sign_moment(coeffs: &[f64], p: f64, buf: &mut Vec<f64>) -> f64 {
    buf.clear();
    let Some((first, rest)) = coeffs.split_first() else {
        return if p == 0.0 { 1.0 } else { 0.0 };
    };
    buf.push(*first);
    for c in rest {
        let len = buf.len();
        for i in 0..len {
            let v = buf[i];
            buf[i] = v + c;
            buf.push(v - c);
        }
    }
    abs_moment(buf, p)
}

/// The linear X_p inequality for `eps -> sum_j a_j eps_j`.
pub fn linear_xp(a: &[f64], p: f64, k: usize) -> Result<InequalityReport> {
    let started = Instant::now();
    let n = a.len();
    if n == 0 || n > crate::walsh::MAX_DIM {
        return Err(Error::DimensionOutOfRange(n, crate::walsh::MAX_DIM));
    }
    check_p(p, 2.0)?;
    check_k(n, k)?;
    if let Some(i) = a.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    let subsets = binomial(n, k);
    let work = subsets << k;
    if work > LINEAR_WORK_LIMIT {
        return Err(Error::BudgetExceeded {
            work,
            budget: LINEAR_WORK_LIMIT,
        });
    }
    let sets: Vec<Subset> = k_subsets(n, k).collect();
    let per_set: Vec<f64> = sets
        .par_iter()
        .map_init(Vec::new, |buf, s| {
            let coeffs: Vec<f64> = s.coords().map(|j| a[j]).collect();
            sign_moment(&coeffs, p, buf)
        })
        .collect();
    let lhs_moment = pairwise_sum(&per_set) / subsets as f64;
    let density = k as f64 / n as f64;
    let gradient = density * a.iter().map(|v| abs_pow(*v, p)).sum::<f64>();
    let diagonal = density.powf(p / 2.0) * sign_moment(a, p, &mut Vec::new());
    Ok(InequalityReport::new("linear_xp")
        .param("n", n)
        .param("k", k)
        .param("p", p)
        .param("a", a.to_vec())
        .term("gradient", gradient)
        .term("diagonal", diagonal)
        .finish(lhs_moment.powf(1.0 / p), 1.0, p, started))
}

/// `||E_{[n]\S} h||_p^p` for every `k`-subset `S` in colex order, computed
/// from the Walsh coefficients supported inside `S`.
pub fn marginal_moments(spec: &WalshSpectrum, k: usize, p: f64) -> Vec<f64> {
    let n = spec.n();
    let coeffs = spec.coeffs();
    let sets: Vec<Subset> = k_subsets(n, k).collect();
    sets.par_iter()
        .map_init(Vec::new, |buf: &mut Vec<f64>, s| {
            buf.clear();
            buf.extend((0..1u64 << k).map(|c| coeffs[deposit_bits(c, *s) as usize]));
            fwht_in_place(buf);
            abs_moment(buf, p)
        })
        .collect()
}

/// The X_p inequality for Rademacher chaos on a mean-zero `h`.
pub fn chaos_xp(h: &CubeFunction, p: f64, k: usize, refined: bool) -> Result<InequalityReport> {
    let started = Instant::now();
    let n = h.n();
    if n > CHAOS_MAX_DIM {
        return Err(Error::DimensionOutOfRange(n, CHAOS_MAX_DIM));
    }
    check_p(p, 2.0)?;
    check_k(n, k)?;
    h.require_mean_zero()?;
    let subsets = binomial(n, k);
    if subsets > MAX_SUBSETS {
        return Err(Error::BudgetExceeded {
            work: subsets,
            budget: MAX_SUBSETS,
        });
    }
    let spec = walsh_transform(h);
    let lhs_moment = pairwise_sum(&marginal_moments(&spec, k, p)) / subsets as f64;
    let grad_sum = (0..n)
        .map(|j| Ok(abs_moment(partial_derivative(h, j)?.values(), p)))
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum::<f64>();
    let h_moment = abs_moment(h.values(), p);
    let density = k as f64 / n as f64;
    let mut report = InequalityReport::new("chaos_xp")
        .param("n", n)
        .param("k", k)
        .param("p", p)
        .param("refined", refined)
        .term("gradient", density * grad_sum)
        .term("diagonal", density.powf(p / 2.0) * h_moment);
    if refined {
        let lp = p.ln();
        let bare_gradient = density.powf(1.0 / p) * grad_sum.powf(1.0 / p);
        let bare_diagonal = density.sqrt() * h_moment.powf(1.0 / p);
        report = report
            .extra("refined_gradient_bare", bare_gradient)
            .extra("refined_diagonal_bare", bare_diagonal)
            .extra("refined_gradient_prefactor", p.powf(2.5) / lp.sqrt())
            .extra("refined_diagonal_prefactor", p.powi(4) / lp);
    }
    Ok(report.finish(lhs_moment.powf(1.0 / p), 1.0, p, started))
}

/// The metric X_p inequality for a real function on `Z_{2r}^n`, with `m` set by `scaling`.
pub fn metric_xp(
    f: &TorusFunction,
    p: f64,
    k: usize,
    sampling: Sampling,
    scaling: Scaling,
) -> Result<InequalityReport> {
    let started = Instant::now();
    check_p(p, 2.0)?;
    let m = scaling.scale(f.r())?;
    let stats = difference_stats(f, p, k, sampling)?;
    let n = f.n();
    let density = k as f64 / n as f64;
    let mut report = InequalityReport::new("metric_xp")
        .param("r", f.r())
        .param("n", n)
        .param("k", k)
        .param("p", p)
        .param("m", m)
        .param("scaling", scaling_name(scaling))
        .sampled(&sampling)
        .term("gradient", density * stats.gradient_term)
        .term("diagonal", density.powf(p / 2.0) * stats.diagonal_term)
        .extra("long_term", stats.long_term)
        .extra("gradient_term", stats.gradient_term)
        .extra("diagonal_term", stats.diagonal_term)
        .flag("hypothesis_violated", m < (n as f64 / k as f64).sqrt());
    if let Some(se) = stats.stderr {
        report.stderr = Some(BTreeMap::from([
            ("long_term".to_string(), se.long_term),
            ("gradient_term".to_string(), se.gradient_term),
            ("diagonal_term".to_string(), se.diagonal_term),
        ]));
    }
    Ok(report.finish(stats.long_term.powf(1.0 / p), m, p, started))
}

pub fn scaling_name(s: Scaling) -> &'static str {
    match s {
        Scaling::Sharp => "sharp",
        Scaling::Generic => "generic",
    }
}

/// The smoothed long-shift moment against the gradient and diagonal moments
/// (all `p`-th powers, no root taken).
pub fn smoothed_xp(
    f: &TorusFunction,
    p: f64,
    k: usize,
    sampling: Sampling,
    scaling: Scaling,
) -> Result<InequalityReport> {
    let started = Instant::now();
    check_p(p, 2.0)?;
    let stats = smoothed_difference_stats(f, p, k, sampling, scaling)?;
    let density = k as f64 / f.n() as f64;
    let mut report = InequalityReport::new("smoothed_xp")
        .param("r", f.r())
        .param("n", f.n())
        .param("k", k)
        .param("p", p)
        .param("scaling", scaling_name(scaling))
        .sampled(&sampling)
        .term("gradient", density * stats.gradient_term)
        .term("diagonal", density.powf(p / 2.0) * stats.diagonal_term);
    if let Some(se) = stats.stderr {
        report.stderr = Some(BTreeMap::from([
            ("long_term".to_string(), se.long_term),
            ("gradient_term".to_string(), se.gradient_term),
            ("diagonal_term".to_string(), se.diagonal_term),
        ]));
    }
    Ok(report.finish(stats.long_term, 1.0, 1.0, started))
}

/// Riesz square function norm against `||h||_p`.
pub fn lust_piquard_square(h: &CubeFunction, p: f64) -> Result<InequalityReport> {
    let started = Instant::now();
    check_p(p, 2.0)?;
    let square = riesz_square_function(h)?;
    Ok(InequalityReport::new("lust_piquard_square")
        .param("n", h.n())
        .param("p", p)
        .term("h_norm_pow", abs_moment(h.values(), p))
        .extra("lower_envelope", p.powf(-1.5))
        .extra("upper_envelope", p)
        .finish(p_norm(&square, p)?, 1.0, p, started))
}

/// `(E_delta ||sum_{j in S} delta_j d_j h||_p^p)^{1/p}` against `||Delta_S^{1/2} h||_p`.
pub fn randomized_riesz(h: &CubeFunction, p: f64, set: Subset, sampling: Sampling) -> Result<InequalityReport> {
    let started = Instant::now();
    check_p(p, 2.0)?;
    set.check(h.n())?;
    h.require_mean_zero()?;
    let derivs = set
        .coords()
        .map(|j| partial_derivative(h, j))
        .collect::<Result<Vec<_>>>()?;
    let len = h.values().len();
    let combo_moment = |signs: u64| -> f64 {
        let mut acc = vec![0.0; len];
        for (i, d) in derivs.iter().enumerate() {
            let s = if signs >> i & 1 == 1 { -1.0 } else { 1.0 };
            for (a, v) in acc.iter_mut().zip(d.values()) {
                *a += s * v;
            }
        }
        abs_moment(&acc, p)
    };
    let k = derivs.len();
    let mut stderr = None;
    let lhs_moment = match sampling.mode {
        Mode::Exact => {
            let work = (len as u128) << k;
            if work > EXACT_WORK_LIMIT {
                return Err(Error::BudgetExceeded {
                    work,
                    budget: EXACT_WORK_LIMIT,
                });
            }
            // global sign flip leaves the norm unchanged: fix the first sign
            let half = if k == 0 { 1 } else { 1u64 << (k - 1) };
            let per: Vec<f64> = (0..half).into_par_iter().map(|b| combo_moment(b << 1)).collect();
            pairwise_sum(&per) / half as f64
        }
        Mode::MonteCarlo => {
            if sampling.budget < 2 {
                return Err(invalid("Monte Carlo needs a budget of at least 2 samples"));
            }
            use rand::Rng;
            let draws: Vec<f64> = (0..sampling.budget.div_ceil(crate::torus::MC_BLOCK))
                .into_par_iter()
                .flat_map_iter(|b| {
                    let mut rng = block_rng(sampling.seed, 7, b);
                    let count = crate::torus::MC_BLOCK.min(sampling.budget - b * crate::torus::MC_BLOCK);
                    (0..count)
                        .map(|_| combo_moment(rng.random::<u64>()))
                        .collect::<Vec<_>>()
                })
                .collect();
            let mean = pairwise_sum(&draws) / draws.len() as f64;
            let var = draws.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (draws.len() - 1) as f64;
            stderr = Some(BTreeMap::from([(
                "lhs_moment".to_string(),
                (var / draws.len() as f64).sqrt(),
            )]));
            mean
        }
    };
    let spec = walsh_transform(h);
    let half_laplacian = inverse_walsh_transform(&apply_multiplier(
        &spec,
        Multiplier::FractionalLaplacian { set, alpha: 0.5 },
    )?);
    let mut report = InequalityReport::new("randomized_riesz")
        .param("n", h.n())
        .param("p", p)
        .param("set", set_param(set))
        .sampled(&sampling)
        .term("half_laplacian_pow", abs_moment(half_laplacian.values(), p));
    report.stderr = stderr;
    Ok(report.finish(lhs_moment.powf(1.0 / p), 1.0, p, started))
}

/// `Delta_S^alpha` on a spectrum, zero on frequencies disjoint from `S`.
pub type FractionalLaplacianFn = fn(&WalshSpectrum, Subset, f64) -> Result<WalshSpectrum>;

pub fn spectral_fractional_laplacian(s: &WalshSpectrum, set: Subset, alpha: f64) -> Result<WalshSpectrum> {
    apply_multiplier(s, Multiplier::FractionalLaplacian { set, alpha })
}

/// `||E_{[n]\S} h||_p <= ||Delta_S^alpha Delta_{[n]}^{-alpha} h||_p` with constant one.
pub fn jensen_contraction(h: &CubeFunction, set: Subset, alpha: f64, p: f64) -> Result<InequalityReport> {
    jensen_contraction_with(h, set, alpha, p, spectral_fractional_laplacian)
}

/// [`jensen_contraction`] with a caller-supplied `Delta_S^alpha`.
pub fn jensen_contraction_with(
    h: &CubeFunction,
    set: Subset,
    alpha: f64,
    p: f64,
    laplacian: FractionalLaplacianFn,
) -> Result<InequalityReport> {
    let started = Instant::now();
    check_p(p, 1.0)?;
    set.check(h.n())?;
    h.require_mean_zero()?;
    let n = h.n();
    let lhs = p_norm(&average_over(h, set.complement(n))?, p)?;
    let spec = walsh_transform(h);
    let inner = laplacian(&spec, Subset::full(n), -alpha)?;
    let outer = laplacian(&inner, set, alpha)?;
    let rhs_fn = inverse_walsh_transform(&outer);
    let report = InequalityReport::new("jensen_contraction")
        .param("n", n)
        .param("p", p)
        .param("alpha", alpha)
        .param("set", set_param(set))
        .term("laplacian_ratio_pow", abs_moment(rhs_fn.values(), p))
        .finish(lhs, 1.0, p, started);
    let violated = report.lhs > report.rhs + EXPLICIT_SLACK * report.rhs.max(1.0);
    Ok(report.flag("violated", violated))
}

/// The normalized point mass `2^{-n/p} sum_A W_A`, of unit `L_{p*}` norm.
pub fn point_mass_test_function(n: usize, p: f64) -> Result<CubeFunction> {
    check_p(p, 1.0)?;
    let spec = WalshSpectrum::new(n, vec![2f64.powf(-(n as f64) / p); 1 << n])?;
    Ok(inverse_walsh_transform(&spec))
}

/// Probe of `||Delta^{-alpha}||` on the normalized point mass, in `L_{p*}`.
pub fn inverse_laplacian_probe(p: f64, alpha: f64, n: usize) -> Result<InequalityReport> {
    if n > CHAOS_MAX_DIM {
        return Err(Error::DimensionOutOfRange(n, CHAOS_MAX_DIM));
    }
    let input = point_mass_test_function(n, p)?;
    inverse_laplacian_probe_with(&input, p, alpha)
}

/// As [`inverse_laplacian_probe`] but on an arbitrary input; envelopes are
/// those of the point mass in dimension `input.n()`.
pub fn inverse_laplacian_probe_with(input: &CubeFunction, p: f64, alpha: f64) -> Result<InequalityReport> {
    let started = Instant::now();
    check_p(p, 2.0)?;
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be > 0, got {alpha}")));
    }
    let n = input.n();
    if n < 2 {
        return Err(invalid("the probe needs n >= 2 so that log n > 0"));
    }
    let dual = p / (p - 1.0);
    let spec = walsh_transform(input);
    let out = inverse_walsh_transform(&apply_multiplier(
        &spec,
        Multiplier::FractionalLaplacian {
            set: Subset::full(n),
            alpha: -alpha,
        },
    )?);
    let nf = n as f64;
    let g = gamma(1.0 + alpha);
    let log_n = nf.ln();
    let scale = 2f64.powf(-nf / p);
    let envelope = scale * log_n.powf(alpha) / (2f64.powf(alpha) * g);
    let pointwise = log_n.powf(alpha) / (2f64.powf(1.0 + alpha) * g);
    // kappa = number of +1 coordinates = n - popcount(b)
    let low_kappa: Vec<usize> = (0..out.values().len())
        .filter(|b| 2 * (n - b.count_ones() as usize) <= n)
        .collect();
    let count = low_kappa.len();
    let pointwise_ok = low_kappa
        .iter()
        .all(|&b| out.values()[b].abs() / scale >= pointwise * (1.0 - EXPLICIT_SLACK));
    let proof_bound = (count as f64 / out.values().len() as f64).powf(1.0 / dual) * scale * pointwise;
    Ok(InequalityReport::new("inverse_laplacian_probe")
        .param("n", n)
        .param("p", p)
        .param("alpha", alpha)
        .term("envelope", envelope)
        .extra("dual_exponent", dual)
        .extra("proof_bound", proof_bound)
        .extra("two_sided_target", p.ln().powf(alpha) / (2f64.powf(alpha) * g))
        .extra("kappa_half_count", count as f64)
        .flag("alpha_in_range", alpha <= (5.0 + p.ln()) / 4.0)
        .flag("half_cube_condition", 2 * count >= out.values().len())
        .flag("pointwise_bound_holds", pointwise_ok)
        .finish(p_norm(&out, dual)?, 1.0, 1.0, started))
}

/// `||f - T_S f||_p <= 2 (E |f(x+eps) - f(x)|^p)^{1/p}`.
pub fn ts_perturbation(f: &TorusFunction, set: Subset, p: f64) -> Result<InequalityReport> {
    let started = Instant::now();
    let (dev, diag) = smoothing_perturbation(f, set, p)?;
    let report = InequalityReport::new("ts_perturbation")
        .param("r", f.r())
        .param("n", f.n())
        .param("p", p)
        .param("set", set_param(set))
        .term("diagonal", diag)
        .finish(dev, 2.0, p, started);
    let violated = report.lhs > report.rhs + EXPLICIT_SLACK * report.rhs.max(1.0);
    Ok(report.flag("violated", violated))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::torus::Generator;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * b.abs().max(1.0)
    }

    #[test]
    fn linear_two_coordinates() {
        let r = linear_xp(&[1.0, 1.0], 2.0, 1).unwrap();
        assert!(close(r.lhs, 1.0, 1e-15));
        assert!(close(r.rhs, 2f64.sqrt(), 1e-15));
        assert!(close(r.ratio, 0.5f64.sqrt(), 1e-15));
    }

    #[test]
    fn linear_single_coordinate_closed_form() {
        for (n, k, p) in [(3, 1, 3.0), (5, 2, 4.0), (6, 6, 2.5)] {
            let mut a = vec![0.0; n];
            a[0] = 1.0;
            let r = linear_xp(&a, p, k).unwrap();
            let d = k as f64 / n as f64;
            assert!(close(r.ratio.powf(p), d / (d + d.powf(p / 2.0)), 1e-13));
        }
    }

    #[test]
    fn linear_zero_and_errors() {
        let r = linear_xp(&[0.0; 4], 3.0, 2).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
        assert!(linear_xp(&[1.0], 1.5, 1).is_err());
        assert!(linear_xp(&[1.0, 2.0], 2.0, 3).is_err());
        assert!(linear_xp(&[1.0, 2.0], 2.0, 0).is_err());
    }

    #[test]
    fn chaos_single_character() {
        let h = CubeFunction::character(2, Subset(1)).unwrap();
        let r = chaos_xp(&h, 2.0, 1, false).unwrap();
        assert!(close(r.lhs * r.lhs, 0.5, 1e-15));
        assert!(close(r.rhs_terms["gradient"], 2.0, 1e-15));
        assert!(close(r.rhs_terms["diagonal"], 0.5, 1e-15));
        assert!(close(r.ratio, 1.0 / 5f64.sqrt(), 1e-15));
    }

    #[test]
    fn chaos_top_character_has_zero_lhs() {
        let h = CubeFunction::character(4, Subset::full(4)).unwrap();
        let r = chaos_xp(&h, 3.0, 3, true).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(r.extras.contains_key("refined_gradient_prefactor"));
    }

    #[test]
    fn chaos_marginals_match_pointwise_averaging() {
        let h = Generator::RandomDense { seed: 2 }
            .build(1, 6)
            .map(|f| {
                CubeFunction::new(6, f.dense_values().unwrap().to_vec())
                    .unwrap()
                    .centered()
            })
            .unwrap();
        let spec = walsh_transform(&h);
        let p = 3.0;
        let moments = marginal_moments(&spec, 3, p);
        for (s, m) in k_subsets(6, 3).zip(moments) {
            let e = average_over(&h, s.complement(6)).unwrap();
            assert!(close(m, abs_moment(e.values(), p), 1e-12));
        }
    }

    #[test]
    fn chaos_rejects_non_mean_zero() {
        let h = CubeFunction::constant(3, 1.0).unwrap();
        assert!(matches!(chaos_xp(&h, 2.0, 1, false), Err(Error::NotMeanZero(_))));
    }

    #[test]
    fn lust_piquard_single_character() {
        let h = CubeFunction::character(3, Subset(1)).unwrap();
        let r = lust_piquard_square(&h, 5.0).unwrap();
        assert!(close(r.lhs, 1.0, 1e-14) && close(r.rhs, 1.0, 1e-14) && close(r.ratio, 1.0, 1e-14));
    }

    #[test]
    fn randomized_riesz_single_character_and_disjoint_set() {
        let h = CubeFunction::character(3, Subset(1)).unwrap();
        for p in [2.0, 3.0, 6.0] {
            let r = randomized_riesz(&h, p, Subset(1), Sampling::exact()).unwrap();
            assert!(close(r.lhs, 2.0, 1e-14) && close(r.rhs, 1.0, 1e-14));
        }
        let r = randomized_riesz(&h, 3.0, Subset(0b110), Sampling::exact()).unwrap();
        assert_eq!((r.lhs, r.rhs, r.ratio), (0.0, 0.0, 0.0));
        let r = randomized_riesz(&h, 3.0, Subset::EMPTY, Sampling::exact()).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
    }

    #[test]
    fn jensen_examples() {
        let h = CubeFunction::character(2, Subset(0b11)).unwrap();
        for p in [1.0, 2.0, 4.0] {
            let r = jensen_contraction(&h, Subset(1), 0.5, p).unwrap();
            assert!(r.lhs.abs() < 1e-15);
            assert!(close(r.rhs, 0.5f64.sqrt(), 1e-14));
            assert!(!r.violated());
        }
        let h = CubeFunction::character(2, Subset(1)).unwrap();
        for alpha in [-2.0, -0.5, 0.0, 1.5] {
            let r = jensen_contraction(&h, Subset(1), alpha, 2.5).unwrap();
            assert!(close(r.lhs, 1.0, 1e-14) && close(r.rhs, 1.0, 1e-14));
        }
    }

    #[test]
    fn probe_small_case_by_enumeration() {
        // n = 2, p = 2: coefficients 1/2 everywhere; Delta^{-1} gives 1/2, 1/2, 1/4 off the mean.
        let r = inverse_laplacian_probe(2.0, 1.0, 2).unwrap();
        let direct: f64 = (0..4usize)
            .map(|b| {
                let v: f64 = [(1u64, 0.5), (2, 0.5), (3, 0.25)]
                    .iter()
                    .map(|(a, c)| c * crate::walsh::walsh_character(*a, b))
                    .sum();
                v * v
            })
            .sum::<f64>()
            / 4.0;
        assert!(close(r.lhs, direct.sqrt(), 1e-15));
        assert!(close(r.lhs, 0.75, 1e-15));
        assert!(r.flags["half_cube_condition"]);
    }

    #[test]
    fn probe_of_zero_input_is_zero() {
        let zero = CubeFunction::constant(5, 0.0).unwrap();
        let r = inverse_laplacian_probe_with(&zero, 4.0, 0.7).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(inverse_laplacian_probe(4.0, 0.5, 1).is_err());
        assert!(inverse_laplacian_probe(4.0, 0.0, 4).is_err());
    }

    #[test]
    fn ts_perturbation_trivial_cases() {
        let c = Generator::Constant { value: 3.0 }.build(2, 2).unwrap();
        let r = ts_perturbation(&c, Subset(0b11), 2.0).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        let f = Generator::RandomDense { seed: 4 }.build(2, 2).unwrap();
        let r = ts_perturbation(&f, Subset::EMPTY, 4.0).unwrap();
        assert_eq!(r.lhs, 0.0);
        assert!(!r.violated());
    }

    #[test]
    fn metric_flags_hypothesis() {
        let f = Generator::CosineSum { coeffs: vec![1.0, 1.0] }.build(4, 2).unwrap();
        let r = metric_xp(&f, 2.0, 1, Sampling::exact(), Scaling::Sharp).unwrap();
        // m = 1 < sqrt(2)
        assert!(r.flags["hypothesis_violated"]);
        assert!(r.ratio.is_finite() && r.ratio > 0.0);
        let c = Generator::Constant { value: 1.0 }.build(4, 2).unwrap();
        let r = metric_xp(&c, 2.0, 2, Sampling::exact(), Scaling::Sharp).unwrap();
        assert_eq!(r.ratio, 0.0);
        assert!(!r.flags["hypothesis_violated"]);
    }

    #[test]
    fn report_ratio_recomputes_and_flattens() {
        let r = linear_xp(&[0.3, -1.2, 2.0], 3.0, 2).unwrap();
        assert!((r.ratio - r.lhs / r.recompute_rhs()).abs() <= 1e-12 * r.ratio);
        let cols: Vec<String> = r.flatten().into_iter().map(|(k, _)| k).collect();
        assert_eq!(&cols[..4], &["name", "mode", "seed", "budget"]);
        assert!(cols.contains(&"term_gradient".to_string()));
    }
}
