//! Seeded property campaigns. Each check draws its inputs from its own RNG
//! stream, so a report depends only on the suite, the options and the operators.

use std::str::FromStr;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::inequalities::{
    chaos_xp, inverse_laplacian_probe, jensen_contraction_with, linear_xp, lust_piquard_square, randomized_riesz,
    spectral_fractional_laplacian, ts_perturbation, FractionalLaplacianFn, EXPLICIT_SLACK,
};
use crate::quadrature::{inverse_laplacian_quadrature, QuadratureSpec};
use crate::subset::{binomial, Subset};
use crate::torus::{
    block_rng, chaos_lift, decode, difference_stats, smoothed_difference_stats, t_s_average, t_s_value, Generator,
    Sampling, Scaling, TorusFunction,
};
use crate::walsh::{
    average_over, direct_walsh_transform, fractional_laplacian, heat, inverse_walsh_transform, p_norm,
    partial_derivative, rademacher_projection, riesz_transform, walsh_transform, CubeFunction, MAX_DIM,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Walsh,
    Torus,
    InequalitiesExact,
    InequalitiesMc,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 5] = ["walsh", "torus", "inequalities-exact", "inequalities-mc", "all"];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Walsh => "walsh",
            Suite::Torus => "torus",
            Suite::InequalitiesExact => "inequalities-exact",
            Suite::InequalitiesMc => "inequalities-mc",
            Suite::All => "all",
        }
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "walsh" => Ok(Suite::Walsh),
            "torus" => Ok(Suite::Torus),
            "inequalities-exact" => Ok(Suite::InequalitiesExact),
            "inequalities-mc" => Ok(Suite::InequalitiesMc),
            "all" => Ok(Suite::All),
            other => Err(invalid(format!(
                "unknown suite '{other}' (expected one of {})",
                Suite::NAMES.join(", ")
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerifyOptions {
    /// Largest cube dimension drawn.
    pub n_max: usize,
    pub seed: u64,
    /// Trials for cheap checks; costly checks run a tenth as many.
    pub trials: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            n_max: 10,
            seed: 0,
            trials: 1000,
        }
    }
}

/// Operators under test; swapped out to confirm that checks can fail.
#[derive(Clone, Copy)]
pub struct Operators {
    pub fractional_laplacian: FractionalLaplacianFn,
}

impl Operators {
    pub fn standard() -> Self {
        Operators {
            fractional_laplacian: spectral_fractional_laplacian,
        }
    }

    /// `Delta_S^alpha` scaled by one half.
    pub fn corrupted() -> Self {
        fn half(s: &crate::WalshSpectrum, set: Subset, alpha: f64) -> Result<crate::WalshSpectrum> {
            let good = spectral_fractional_laplacian(s, set, alpha)?;
            crate::WalshSpectrum::new(good.n(), good.coeffs().iter().map(|c| 0.5 * c).collect())
        }
        Operators {
            fractional_laplacian: half,
        }
    }
}

impl Default for Operators {
    fn default() -> Self {
        Operators::standard()
    }
}

/// Outcome of one check. A trial violates when its `worst` exceeds `tolerance`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub trials: usize,
    pub violations: usize,
    pub allowed_violations: usize,
    /// Largest observed error (identities) or normalized excess `lhs - rhs` (inequalities).
    pub worst: f64,
    pub tolerance: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub suite: Suite,
    pub options: VerifyOptions,
    pub checks: Vec<CheckResult>,
    pub total_violations: usize,
    pub passed: bool,
}

impl VerifyReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn failures(&self) -> Vec<&str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.as_str())
            .collect()
    }
}

struct Campaign {
    name: &'static str,
    tolerance: f64,
    allowed: usize,
    trials: usize,
    worst: f64,
    violations: usize,
}

impl Campaign {
    fn new(name: &'static str, tolerance: f64, trials: usize) -> Self {
        Campaign {
            name,
            tolerance,
            allowed: 0,
            trials,
            worst: f64::NEG_INFINITY,
            violations: 0,
        }
    }

    fn allow(mut self, allowed: usize) -> Self {
        self.allowed = allowed;
        self
    }

    /// Run `trial` with a fresh RNG per trial; each returns its worst value.
    fn run(
        mut self,
        seed: u64,
        term: u64,
        mut trial: impl FnMut(&mut ChaCha8Rng) -> Result<f64>,
    ) -> Result<CheckResult> {
        for t in 0..self.trials {
            let mut rng = block_rng(seed, term, t as u64);
            let w = trial(&mut rng)?;
            // NaN counts as a violation
            if !(w <= self.tolerance) {
                self.violations += 1;
            }
            if w > self.worst || w.is_nan() {
                self.worst = w;
            }
        }
        Ok(CheckResult {
            name: self.name.to_string(),
            trials: self.trials,
            violations: self.violations,
            allowed_violations: self.allowed,
            worst: self.worst,
            tolerance: self.tolerance,
            passed: self.violations <= self.allowed,
        })
    }
}

/// Largest entrywise gap over the largest entry of `a`, `b` or the input.
fn rel_err(a: &[f64], b: &[f64], input: &[f64]) -> f64 {
    let scale = a.iter().chain(b).chain(input).fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    a.iter().zip(b).fold(0.0f64, |m, (x, y)| m.max((x - y).abs())) / scale
}

fn excess(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / rhs.max(1.0)
}

fn random_cube(rng: &mut ChaCha8Rng, n_max: usize, centered: bool) -> Result<CubeFunction> {
    let n = rng.random_range(1..=n_max);
    let values = (0..1usize << n).map(|_| StandardNormal.sample(rng)).collect();
    let h = CubeFunction::new(n, values)?;
    Ok(if centered { h.centered() } else { h })
}

fn random_set(rng: &mut ChaCha8Rng, n: usize) -> Subset {
    Subset(rng.random_range(0..1u64 << n))
}

fn random_torus(rng: &mut ChaCha8Rng, r: usize, n: usize) -> Result<TorusFunction> {
    let seed = rng.random::<u64>();
    if rng.random::<bool>() {
        Generator::RandomDense { seed }.build(r, n)
    } else {
        Generator::RandomTrig { seed, terms: 3 }.build(r, n)
    }
}

/// `T_S f` through the discrete Fourier transform on `Z_q^n`, where each
/// frequency `xi` is scaled by `prod_{j in S} cos(2 pi 2 xi_j / q)`.
pub fn smoothing_by_characters(f: &TorusFunction, s: Subset) -> Result<Vec<f64>> {
    let values = f.dense_values().ok_or(Error::OracleBacking)?;
    let (q, n) = (f.modulus(), f.n());
    let len = values.len();
    let tau = std::f64::consts::TAU;
    let (cos, sin): (Vec<f64>, Vec<f64>) = (0..q)
        .map(|m| ((tau * m as f64 / q as f64).cos(), (tau * m as f64 / q as f64).sin()))
        .unzip();
    let coords: Vec<Vec<usize>> = (0..len)
        .map(|i| {
            let mut x = vec![0; n];
            decode(i, q, &mut x);
            x
        })
        .collect();
    let phase = |a: &[usize], b: &[usize]| a.iter().zip(b).map(|(u, v)| u * v).sum::<usize>() % q;
    let mut spec = vec![(0.0, 0.0); len];
    for (xi, out) in coords.iter().zip(spec.iter_mut()) {
        let (mut re, mut im) = (0.0, 0.0);
        for (x, v) in coords.iter().zip(values) {
            let m = phase(xi, x);
            re += v * cos[m];
            im -= v * sin[m];
        }
        let lambda: f64 = s.coords().map(|j| cos[(2 * xi[j]) % q]).product();
        *out = (re * lambda, im * lambda);
    }
    Ok(coords
        .iter()
        .map(|x| {
            let total: f64 = coords
                .iter()
                .zip(&spec)
                .map(|(xi, (re, im))| {
                    let m = phase(xi, x);
                    re * cos[m] - im * sin[m]
                })
                .sum();
            total / len as f64
        })
        .collect())
}

fn walsh_checks(o: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let n_max = o.n_max;
    let few = (o.trials / 10).max(1);
    let seed = o.seed;
    Ok(vec![
        Campaign::new("parseval", 1e-12, few).run(seed, 101, |rng| {
            let h = random_cube(rng, n_max, false)?;
            let energy = walsh_transform(&h).energy();
            let mean_sq = h.values().iter().map(|v| v * v).sum::<f64>() / h.values().len() as f64;
            Ok((energy - mean_sq).abs() / mean_sq)
        })?,
        Campaign::new("transform_round_trip", 1e-12, few).run(seed, 102, |rng| {
            let h = random_cube(rng, n_max, false)?;
            Ok(rel_err(
                inverse_walsh_transform(&walsh_transform(&h)).values(),
                h.values(),
                h.values(),
            ))
        })?,
        Campaign::new("direct_transform", 1e-12, few).run(seed, 103, |rng| {
            let h = random_cube(rng, n_max.min(8), false)?;
            Ok(rel_err(
                walsh_transform(&h).coeffs(),
                direct_walsh_transform(&h)?.coeffs(),
                &[],
            ))
        })?,
        Campaign::new("derivative_spectrum", 1e-12, few).run(seed, 104, |rng| {
            let h = random_cube(rng, n_max, false)?;
            let j = rng.random_range(0..h.n());
            let got = walsh_transform(&partial_derivative(&h, j)?);
            let want: Vec<f64> = walsh_transform(&h)
                .coeffs()
                .iter()
                .enumerate()
                .map(|(a, c)| if a >> j & 1 == 1 { 2.0 * c } else { 0.0 })
                .collect();
            Ok(rel_err(got.coeffs(), &want, walsh_transform(&h).coeffs()))
        })?,
        Campaign::new("averaging_spectrum", 1e-12, few).run(seed, 105, |rng| {
            let h = random_cube(rng, n_max, false)?;
            let s = random_set(rng, h.n());
            let got = walsh_transform(&average_over(&h, s)?);
            let want: Vec<f64> = walsh_transform(&h)
                .coeffs()
                .iter()
                .enumerate()
                .map(|(a, c)| if a as u64 & s.0 == 0 { *c } else { 0.0 })
                .collect();
            Ok(rel_err(got.coeffs(), &want, walsh_transform(&h).coeffs()))
        })?,
        Campaign::new("riesz_identity", 1e-12, few).run(seed, 106, |rng| {
            let h = random_cube(rng, n_max, true)?;
            let half = fractional_laplacian(&h, Subset::full(h.n()), -0.5)?;
            let mut worst = 0.0f64;
            for j in 0..h.n() {
                let lhs = riesz_transform(&h, j)?;
                let rhs = partial_derivative(&half, j)?.scaled(0.5);
                worst = worst.max(rel_err(lhs.values(), rhs.values(), h.values()));
            }
            Ok(worst)
        })?,
        Campaign::new("heat_semigroup", 1e-12, few).run(seed, 107, |rng| {
            let h = random_cube(rng, n_max, false)?;
            let (s, t) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
            Ok(rel_err(
                heat(&heat(&h, s)?, t)?.values(),
                heat(&h, s + t)?.values(),
                h.values(),
            ))
        })?,
        Campaign::new("laplacian_ratio_identity", 1e-12, few).run(seed, 108, |rng| {
            let h = random_cube(rng, n_max, true)?;
            let n = h.n();
            let s = random_set(rng, n);
            let alpha = rng.random_range(-2.0..=2.0);
            let rest = s.complement(n);
            let inner = fractional_laplacian(&fractional_laplacian(&h, Subset::full(n), -alpha)?, s, alpha)?;
            Ok(rel_err(
                average_over(&inner, rest)?.values(),
                average_over(&h, rest)?.values(),
                h.values(),
            ))
        })?,
        Campaign::new("quadrature_equivalence", 1e-8, few).run(seed, 109, |rng| {
            let h = random_cube(rng, n_max.min(8), true)?;
            let alpha = if rng.random::<bool>() { 0.5 } else { 1.0 };
            let quad = inverse_laplacian_quadrature(&h, alpha, &QuadratureSpec::default())?;
            let spectral = fractional_laplacian(&h, Subset::full(h.n()), -alpha)?;
            Ok(rel_err(quad.values(), spectral.values(), h.values()))
        })?,
    ])
}

fn torus_checks(o: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let few = (o.trials / 10).max(1);
    let seed = o.seed;
    let n_cap = o.n_max.clamp(1, 4);
    Ok(vec![
        Campaign::new("smoothing_eigenvalues", 1e-10, few).run(seed, 201, |rng| {
            let r = rng.random_range(1..=4);
            let n = rng.random_range(1..=n_cap.min(3));
            let f = random_torus(rng, r, n)?;
            let s = random_set(rng, n);
            Ok(rel_err(
                t_s_average(&f, s)?.dense_values().unwrap_or(&[]),
                &smoothing_by_characters(&f, s)?,
                f.dense_values().unwrap_or(&[]),
            ))
        })?,
        Campaign::new("smoothing_pointwise", 1e-12, few).run(seed, 202, |rng| {
            let r = rng.random_range(1..=4);
            let n = rng.random_range(1..=n_cap.min(3));
            let f = random_torus(rng, r, n)?;
            let s = random_set(rng, n);
            let dense = t_s_average(&f, s)?;
            let mut x = vec![0; n];
            let pointwise: Vec<f64> = (0..f.point_count() as usize)
                .map(|i| {
                    decode(i, f.modulus(), &mut x);
                    t_s_value(&f, s, &x)
                })
                .collect();
            Ok(rel_err(
                dense.dense_values().unwrap_or(&[]),
                &pointwise,
                f.dense_values().unwrap_or(&[]),
            ))
        })?,
        Campaign::new("smoothing_factor_two", EXPLICIT_SLACK, o.trials).run(seed, 203, |rng| {
            let r = rng.random_range(1..=2);
            let n = rng.random_range(1..=n_cap);
            let p = [1.0, 2.0, 4.0][rng.random_range(0..3)];
            let f = random_torus(rng, r, n)?;
            let report = ts_perturbation(&f, random_set(rng, n), p)?;
            Ok(excess(report.lhs, report.rhs))
        })?,
        Campaign::new("chaos_lift_odd", 1e-12, few).run(seed, 204, |rng| {
            let r = rng.random_range(1..=4);
            let n = rng.random_range(1..=n_cap.min(3));
            let f = random_torus(rng, r, n)?;
            let x: Vec<usize> = (0..n).map(|_| rng.random_range(0..2 * r)).collect();
            let h = chaos_lift(&f, &x)?;
            let full = (1usize << n) - 1;
            let flipped: Vec<f64> = (0..1usize << n).map(|b| -h.values()[b ^ full]).collect();
            Ok(rel_err(h.values(), &flipped, &[]).max(h.mean().abs() / h.max_abs().max(1.0)))
        })?,
    ])
}

fn exact_inequality_checks(o: &VerifyOptions, ops: &Operators) -> Result<Vec<CheckResult>> {
    let n_max = o.n_max;
    let few = (o.trials / 10).max(1);
    let seed = o.seed;
    let laplacian = ops.fractional_laplacian;
    Ok(vec![
        Campaign::new("bonami", EXPLICIT_SLACK, o.trials).run(seed, 301, |rng| {
            let h = random_cube(rng, n_max, false)?;
            let k = rng.random_range(0..=h.n());
            let p = [2.0, 3.0, 4.0, 6.0][rng.random_range(0..4)];
            let input = if rng.random::<bool>() {
                rademacher_projection(&h, k)?
            } else {
                h
            };
            let lhs = p_norm(&rademacher_projection(&input, k)?, p)?;
            let rhs = p.powf(k as f64 / 2.0) * p_norm(&input, p)?;
            Ok(excess(lhs, rhs))
        })?,
        Campaign::new("jensen_contraction", EXPLICIT_SLACK, o.trials).run(seed, 302, |rng| {
            let h = random_cube(rng, n_max, true)?;
            let s = random_set(rng, h.n());
            let alpha = rng.random_range(-2.0..=2.0);
            let p = [1.0, 2.0, 2.5, 4.0][rng.random_range(0..4)];
            let report = jensen_contraction_with(&h, s, alpha, p, laplacian)?;
            Ok(excess(report.lhs, report.rhs))
        })?,
        Campaign::new("linear_quadratic_ratio", 1e-10, o.trials).run(seed, 303, |rng| {
            let n = rng.random_range(1..=n_max);
            let k = rng.random_range(1..=n);
            let a: Vec<f64> = (0..n).map(|_| StandardNormal.sample(rng)).collect();
            Ok((linear_xp(&a, 2.0, k)?.ratio - 0.5f64.sqrt()).abs())
        })?,
        Campaign::new("chaos_quadratic_marginal", 1e-12, o.trials).run(seed, 304, |rng| {
            let h = random_cube(rng, n_max, true)?;
            let n = h.n();
            let k = rng.random_range(1..=n);
            let report = chaos_xp(&h, 2.0, k, false)?;
            let spec = walsh_transform(&h);
            let want: f64 = spec
                .coeffs()
                .iter()
                .enumerate()
                .map(|(a, c)| {
                    let size = a.count_ones() as usize;
                    if size > k {
                        0.0
                    } else {
                        c * c * binomial(n - size, k - size) as f64 / binomial(n, k) as f64
                    }
                })
                .sum();
            Ok((report.lhs * report.lhs - want).abs() / want.max(f64::MIN_POSITIVE))
        })?,
        Campaign::new("square_function_quadratic", 1e-12, o.trials).run(seed, 305, |rng| {
            let h = random_cube(rng, n_max, true)?;
            Ok((lust_piquard_square(&h, 2.0)?.ratio - 1.0).abs())
        })?,
        Campaign::new("randomized_riesz_quadratic", 1e-12, few).run(seed, 306, |rng| {
            let h = random_cube(rng, n_max.min(6), true)?;
            let full = Subset::full(h.n());
            Ok((randomized_riesz(&h, 2.0, full, Sampling::exact())?.ratio - 2.0).abs() / 2.0)
        })?,
        Campaign::new("inverse_laplacian_probe", 0.0, few).run(seed, 307, |rng| {
            let n = rng.random_range(2..=n_max.clamp(2, 16));
            let p = [2.0, 3.0, 4.0, 6.0][rng.random_range(0..4)];
            let alpha = rng.random_range(0.05..=(5.0 + f64::ln(p)) / 4.0);
            let report = inverse_laplacian_probe(p, alpha, n)?;
            let bound = report.extras["proof_bound"];
            let structural = report.flags["half_cube_condition"] && report.flags["pointwise_bound_holds"];
            Ok(if structural {
                excess(bound * (1.0 - EXPLICIT_SLACK), report.lhs).max(0.0)
            } else {
                1.0
            })
        })?,
    ])
}

fn mc_checks(o: &VerifyOptions) -> Result<Vec<CheckResult>> {
    let seed = o.seed;
    const REPS: usize = 20;
    const BUDGET: u64 = 4096;
    let within = |mc: f64, exact: f64, se: f64| (mc - exact).abs() / (3.0 * se + EXPLICIT_SLACK * exact.abs().max(1.0));
    Ok(vec![
        Campaign::new("difference_terms_sampling", 1.0, REPS)
            .allow(2)
            .run(seed, 401, |rng| {
                let r = rng.random_range(1..=2);
                let n = rng.random_range(1..=o.n_max.clamp(1, 3));
                let k = rng.random_range(1..=n);
                let p = [2.0, 3.0][rng.random_range(0..2)];
                let f = random_torus(rng, r, n)?;
                let exact = difference_stats(&f, p, k, Sampling::exact())?;
                let mc = difference_stats(&f, p, k, Sampling::monte_carlo(BUDGET, rng.random()))?;
                let se = mc.stderr.expect("sampled stats carry errors");
                Ok(within(mc.long_term, exact.long_term, se.long_term)
                    .max(within(mc.gradient_term, exact.gradient_term, se.gradient_term))
                    .max(within(mc.diagonal_term, exact.diagonal_term, se.diagonal_term)))
            })?,
        Campaign::new("smoothed_terms_sampling", 1.0, REPS)
            .allow(2)
            .run(seed, 402, |rng| {
                let r = rng.random_range(1..=2);
                let n = rng.random_range(1..=o.n_max.clamp(1, 3));
                let k = rng.random_range(1..=n);
                let f = random_torus(rng, r, n)?;
                let exact = smoothed_difference_stats(&f, 2.0, k, Sampling::exact(), Scaling::Generic)?;
                let mc = smoothed_difference_stats(
                    &f,
                    2.0,
                    k,
                    Sampling::monte_carlo(BUDGET, rng.random()),
                    Scaling::Generic,
                )?;
                let se = mc.stderr.expect("sampled stats carry errors");
                Ok(within(mc.long_term, exact.long_term, se.long_term))
            })?,
        Campaign::new("randomized_riesz_sampling", 1.0, REPS)
            .allow(2)
            .run(seed, 403, |rng| {
                let h = random_cube(rng, o.n_max.clamp(1, 6), true)?;
                let s = random_set(rng, h.n());
                let p = 3.0;
                let exact = randomized_riesz(&h, p, s, Sampling::exact())?;
                let mc = randomized_riesz(&h, p, s, Sampling::monte_carlo(BUDGET, rng.random()))?;
                let se = mc.stderr.as_ref().map(|m| m["lhs_moment"]).unwrap_or(0.0);
                Ok(within(mc.lhs.powf(p), exact.lhs.powf(p), se))
            })?,
    ])
}

/// Run `suite` under `options` against `ops`.
pub fn run_suite(suite: Suite, options: &VerifyOptions, ops: &Operators) -> Result<VerifyReport> {
    if options.n_max == 0 || options.n_max > MAX_DIM {
        return Err(Error::DimensionOutOfRange(options.n_max, MAX_DIM));
    }
    if options.trials == 0 {
        return Err(invalid("trials must be >= 1"));
    }
    let mut checks = Vec::new();
    if matches!(suite, Suite::Walsh | Suite::All) {
        checks.extend(walsh_checks(options)?);
    }
    if matches!(suite, Suite::Torus | Suite::All) {
        checks.extend(torus_checks(options)?);
    }
    if matches!(suite, Suite::InequalitiesExact | Suite::All) {
        checks.extend(exact_inequality_checks(options, ops)?);
    }
    if matches!(suite, Suite::InequalitiesMc | Suite::All) {
        checks.extend(mc_checks(options)?);
    }
    let total_violations = checks.iter().map(|c| c.violations).sum();
    let passed = checks.iter().all(|c| c.passed);
    Ok(VerifyReport {
        suite,
        options: *options,
        checks,
        total_violations,
        passed,
    })
}
