//! Extremal-ratio search by derivative-free coordinate ascent with restarts.
//!
//! Every restart keeps its iterate normalized (and mean-zero for cube
//! functions), accepts only strict improvements, and records its best ratio
//! after each iteration, so each trajectory is non-decreasing.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::inequalities::{chaos_xp, linear_xp};
use crate::subset::Subset;
use crate::torus::block_rng;
use crate::walsh::{CubeFunction, MAX_DIM};

/// Largest cube dimension for the chaos objective.
pub const CHAOS_SEARCH_MAX_DIM: usize = 12;
/// Largest dimension for the linear objective.
pub const LINEAR_SEARCH_MAX_DIM: usize = 20;
const RNG_TERM: u64 = 0x5ea2c4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Constraint {
    MeanZero,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Coefficient vectors `a` of linear forms.
    Linear,
    /// Mean-zero functions on the cube, by point values.
    Chaos,
}

impl Objective {
    pub fn name(self) -> &'static str {
        match self {
            Objective::Linear => "linear",
            Objective::Chaos => "chaos",
        }
    }

    fn constraint(self) -> Constraint {
        match self {
            Objective::Linear => Constraint::None,
            Objective::Chaos => Constraint::MeanZero,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Random restarts, run in addition to the structured seeds.
    pub restarts: usize,
    pub iterations: usize,
    pub initial_step: f64,
    /// Step multiplier applied after an iteration gaining at most `tolerance`.
    pub decay: f64,
    /// Ratio gain counted as no progress; a restart stops once its step falls below it.
    pub tolerance: f64,
    pub seed: u64,
    /// Point values tried per iteration for cube functions.
    pub batch: usize,
    /// Set by the search from the objective.
    pub constraint: Constraint,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            restarts: 4,
            iterations: 40,
            initial_step: 0.5,
            decay: 0.5,
            tolerance: 1e-9,
            seed: 0,
            batch: 16,
            constraint: Constraint::None,
        }
    }
}

impl SearchConfig {
    pub fn validate(&self) -> Result<()> {
        if self.restarts < 1 {
            return Err(invalid("restarts must be >= 1"));
        }
        if self.iterations < 1 || self.batch < 1 {
            return Err(invalid("iterations and batch must be >= 1"));
        }
        if !(self.initial_step > 0.0 && self.initial_step.is_finite()) {
            return Err(invalid(format!("step must be > 0, got {}", self.initial_step)));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(invalid(format!("decay must lie in (0, 1), got {}", self.decay)));
        }
        if !(self.tolerance > 0.0) {
            return Err(invalid(format!("tolerance must be > 0, got {}", self.tolerance)));
        }
        Ok(())
    }
}

/// One restart's outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RestartRecord {
    pub seed_kind: String,
    pub best_ratio: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Best ratio after each iteration; non-decreasing.
    pub trajectory: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub objective: Objective,
    pub n: usize,
    pub k: usize,
    pub p: f64,
    pub best_ratio: f64,
    /// Coefficient vector (linear) or point values (chaos) of the best restart.
    pub argmax: Vec<f64>,
    pub best_restart: usize,
    pub restarts: Vec<RestartRecord>,
    /// True when the best restart hit the iteration cap before converging.
    pub iterations_exhausted: bool,
    pub config: SearchConfig,
}

impl SearchResult {
    /// The objective re-evaluated on [`SearchResult::argmax`].
    pub fn reevaluate(&self) -> Result<f64> {
        evaluate(self.objective, self.n, self.k, self.p, &self.argmax)
    }
}

/// The objective's ratio; zero input gives ratio zero. Exactly invariant
/// under scaling by a signed power of two.
pub fn evaluate(objective: Objective, n: usize, k: usize, p: f64, x: &[f64]) -> Result<f64> {
    let x = binade_normalized(x);
    match objective {
        Objective::Linear => Ok(linear_xp(&x, p, k)?.ratio),
        Objective::Chaos => Ok(chaos_xp(&CubeFunction::new(n, x)?, p, k, false)?.ratio),
    }
}

/// `x` scaled by a power of two so its largest entry lies in `[1, 2)`.
/// Inputs differing by a power-of-two factor map to the same vector.
fn binade_normalized(x: &[f64]) -> Vec<f64> {
    let top = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !top.is_normal() {
        return x.to_vec();
    }
    let exponent = ((top.to_bits() >> 52) & 0x7ff) as i32 - 1023;
    let scale = 2f64.powi(-exponent);
    x.iter().map(|v| v * scale).collect()
}

fn check_common(n: usize, k: usize, p: f64, max_n: usize) -> Result<()> {
    if n == 0 || n > max_n {
        return Err(crate::Error::DimensionOutOfRange(n, max_n));
    }
    if k == 0 || k > n {
        return Err(invalid(format!("k = {k} out of range 1..={n}")));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return Err(invalid(format!("p must be a finite real >= 2, got {p}")));
    }
    Ok(())
}

struct Problem {
    objective: Objective,
    n: usize,
    k: usize,
    p: f64,
}

impl Problem {
    fn dim(&self) -> usize {
        match self.objective {
            Objective::Linear => self.n,
            Objective::Chaos => 1 << self.n,
        }
    }

    /// Project to the constraint set and scale to unit `p`-norm; zero stays zero.
    fn normalize(&self, x: &mut [f64]) {
        if self.objective == Objective::Chaos {
            let mean = x.iter().sum::<f64>() / x.len() as f64;
            x.iter_mut().for_each(|v| *v -= mean);
        }
        let norm = x.iter().map(|v| v.abs().powf(self.p)).sum::<f64>().powf(1.0 / self.p);
        if norm > 0.0 && norm.is_finite() {
            x.iter_mut().for_each(|v| *v /= norm);
        }
    }

    fn ratio(&self, x: &[f64]) -> f64 {
        evaluate(self.objective, self.n, self.k, self.p, x).unwrap_or(0.0)
    }

    /// Typical entry size of a unit-norm iterate.
    fn entry_scale(&self) -> f64 {
        (self.dim() as f64).powf(-1.0 / self.p)
    }
}

fn ascend(
    problem: &Problem,
    start: Vec<f64>,
    cfg: &SearchConfig,
    rng: &mut ChaCha8Rng,
    kind: String,
) -> (RestartRecord, Vec<f64>) {
    let dim = problem.dim();
    let mut x = start;
    problem.normalize(&mut x);
    let mut best = problem.ratio(&x);
    let mut step = cfg.initial_step;
    let mut trajectory = Vec::with_capacity(cfg.iterations);
    let mut converged = false;
    let scale = problem.entry_scale();
    let try_point = |y: &mut Vec<f64>, x: &mut Vec<f64>, best: &mut f64| -> bool {
        problem.normalize(y);
        let r = problem.ratio(y);
        if r > *best {
            *best = r;
            std::mem::swap(x, y);
            true
        } else {
            false
        }
    };
    for _ in 0..cfg.iterations {
        let before = best;
        let coords: Vec<usize> = if dim <= cfg.batch {
            (0..dim).collect()
        } else {
            (0..cfg.batch).map(|_| rng.random_range(0..dim)).collect()
        };
        let mut moved = false;
        for &i in &coords {
            for dir in [1.0, -1.0] {
                let mut y = x.clone();
                y[i] += dir * step * scale;
                if try_point(&mut y, &mut x, &mut best) {
                    moved = true;
                    break;
                }
            }
        }
        if !moved {
            // central-difference ascent direction over the same coordinates
            let h = 0.1 * step * scale;
            let mut grad = vec![0.0; dim];
            for &i in &coords {
                let mut up = x.clone();
                up[i] += h;
                problem.normalize(&mut up);
                let mut down = x.clone();
                down[i] -= h;
                problem.normalize(&mut down);
                grad[i] = (problem.ratio(&up) - problem.ratio(&down)) / (2.0 * h);
            }
            let gnorm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
            if gnorm > 0.0 && gnorm.is_finite() {
                for t in [1.0, 0.5, 0.25] {
                    let mut y: Vec<f64> = x
                        .iter()
                        .zip(&grad)
                        .map(|(v, g)| v + t * step * scale * g / gnorm)
                        .collect();
                    if try_point(&mut y, &mut x, &mut best) {
                        break;
                    }
                }
            }
        }
        trajectory.push(best);
        if best - before <= cfg.tolerance {
            step *= cfg.decay;
            if step < cfg.tolerance {
                converged = true;
                break;
            }
        }
    }
    let record = RestartRecord {
        seed_kind: kind,
        best_ratio: best,
        iterations: trajectory.len(),
        converged,
        trajectory,
    };
    (record, x)
}

fn gaussian(rng: &mut ChaCha8Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn run(problem: Problem, seeds: Vec<(String, Vec<f64>)>, cfg: SearchConfig) -> SearchResult {
    let dim = problem.dim();
    let mut starts = seeds;
    for r in 0..cfg.restarts {
        let mut rng = block_rng(cfg.seed, RNG_TERM, r as u64);
        starts.push((format!("random_{r}"), gaussian(&mut rng, dim)));
    }
    let outcomes: Vec<(RestartRecord, Vec<f64>)> = starts
        .into_par_iter()
        .enumerate()
        .map(|(i, (kind, start))| {
            let mut rng = block_rng(cfg.seed, RNG_TERM + 1, i as u64);
            ascend(&problem, start, &cfg, &mut rng, kind)
        })
        .collect();
    let mut best_restart = 0;
    for (i, (rec, _)) in outcomes.iter().enumerate() {
        if rec.best_ratio > outcomes[best_restart].0.best_ratio {
            best_restart = i;
        }
    }
    let argmax = outcomes[best_restart].1.clone();
    let exhausted = !outcomes[best_restart].0.converged;
    let restarts: Vec<RestartRecord> = outcomes.into_iter().map(|(r, _)| r).collect();
    SearchResult {
        objective: problem.objective,
        n: problem.n,
        k: problem.k,
        p: problem.p,
        best_ratio: restarts[best_restart].best_ratio,
        argmax,
        best_restart,
        restarts,
        iterations_exhausted: exhausted,
        config: cfg,
    }
}

/// Maximize the linear ratio over coefficient vectors, seeded at `e_1`, the
/// all-ones vector and `config.restarts` Gaussian vectors.
pub fn maximize_linear_ratio(n: usize, k: usize, p: f64, config: &SearchConfig) -> Result<SearchResult> {
    check_common(n, k, p, LINEAR_SEARCH_MAX_DIM)?;
    config.validate()?;
    let cfg = SearchConfig {
        constraint: Objective::Linear.constraint(),
        ..*config
    };
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let seeds = vec![("e1".to_string(), e1), ("ones".to_string(), vec![1.0; n])];
    Ok(run(
        Problem {
            objective: Objective::Linear,
            n,
            k,
            p,
        },
        seeds,
        cfg,
    ))
}

/// Maximize the chaos ratio over mean-zero cube functions, seeded at the
/// linear form of the best linear coefficients, at Walsh characters on the
/// leading `1`, `2` and `k` coordinates, and at `config.restarts` Gaussian functions.
pub fn maximize_chaos_ratio(n: usize, k: usize, p: f64, config: &SearchConfig) -> Result<SearchResult> {
    check_common(n, k, p, CHAOS_SEARCH_MAX_DIM.min(MAX_DIM))?;
    config.validate()?;
    let cfg = SearchConfig {
        constraint: Objective::Chaos.constraint(),
        ..*config
    };
    let linear = maximize_linear_ratio(n, k, p, config)?;
    let mut seeds = vec![(
        "linear_lift".to_string(),
        CubeFunction::linear(&linear.argmax)?.into_values(),
    )];
    let mut levels = vec![1, 2.min(n), k];
    levels.sort_unstable();
    levels.dedup();
    for level in levels {
        let a = Subset::full(level);
        seeds.push((
            format!("character_{level}"),
            CubeFunction::character(n, a)?.into_values(),
        ));
    }
    Ok(run(
        Problem {
            objective: Objective::Chaos,
            n,
            k,
            p,
        },
        seeds,
        cfg,
    ))
}

/// How `k` follows `n` in a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KRule {
    Fixed(usize),
    /// `k = ceil(n / 2)`.
    Half,
    /// `k = ceil(sqrt(n))`.
    Sqrt,
}

impl KRule {
    pub fn k_for(self, n: usize) -> Result<usize> {
        let k = match self {
            KRule::Fixed(k) => k,
            KRule::Half => n.div_ceil(2),
            KRule::Sqrt => (1..=n).find(|k| k * k >= n).unwrap_or(1),
        };
        if k == 0 || k > n {
            return Err(invalid(format!("rule gives k = {k}, outside 1..={n}")));
        }
        Ok(k)
    }

    pub fn name(self) -> String {
        match self {
            KRule::Fixed(k) => format!("fixed:{k}"),
            KRule::Half => "half".into(),
            KRule::Sqrt => "sqrt".into(),
        }
    }
}

/// One search per `n`, in the given order, each with the same config.
pub fn constant_sweep(
    ns: &[usize],
    rule: KRule,
    p: f64,
    objective: Objective,
    config: &SearchConfig,
) -> Result<Vec<SearchResult>> {
    if ns.is_empty() {
        return Err(invalid("empty n range"));
    }
    ns.iter()
        .map(|&n| {
            let k = rule.k_for(n)?;
            match objective {
                Objective::Linear => maximize_linear_ratio(n, k, p, config),
                Objective::Chaos => maximize_chaos_ratio(n, k, p, config),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> SearchConfig {
        SearchConfig {
            restarts: 2,
            iterations: 10,
            ..SearchConfig::default()
        }
    }

    #[test]
    fn linear_p2_is_flat() {
        for (n, k) in [(3, 1), (5, 2), (6, 6)] {
            let r = maximize_linear_ratio(n, k, 2.0, &quick()).unwrap();
            assert!((r.best_ratio - 0.5f64.sqrt()).abs() < 1e-6);
        }
    }

    #[test]
    fn linear_single_coefficient() {
        for p in [2.0, 3.0, 5.5] {
            let r = maximize_linear_ratio(1, 1, p, &quick()).unwrap();
            assert!((r.best_ratio.powf(p) - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_dominates_structured_seeds() {
        let r = maximize_linear_ratio(8, 2, 4.0, &quick()).unwrap();
        let mut e1 = vec![0.0; 8];
        e1[0] = 1.0;
        assert!(r.best_ratio >= linear_xp(&e1, 4.0, 2).unwrap().ratio);
        assert!(r.best_ratio >= linear_xp(&[1.0; 8], 4.0, 2).unwrap().ratio);
        assert_eq!(r.best_ratio, r.reevaluate().unwrap());
    }

    #[test]
    fn trajectories_never_decrease() {
        let r = maximize_chaos_ratio(4, 2, 3.0, &quick()).unwrap();
        for rec in &r.restarts {
            assert!(rec.trajectory.windows(2).all(|w| w[0] <= w[1]));
        }
        assert!(r.best_ratio.is_finite());
        assert_eq!(r.best_ratio, r.reevaluate().unwrap());
    }

    #[test]
    fn invalid_configs() {
        let bad = SearchConfig {
            restarts: 0,
            ..SearchConfig::default()
        };
        assert!(maximize_linear_ratio(3, 1, 4.0, &bad).is_err());
        let bad = SearchConfig {
            initial_step: 0.0,
            ..SearchConfig::default()
        };
        assert!(maximize_linear_ratio(3, 1, 4.0, &bad).is_err());
        assert!(maximize_chaos_ratio(13, 1, 4.0, &quick()).is_err());
        assert!(constant_sweep(&[], KRule::Half, 4.0, Objective::Linear, &quick()).is_err());
    }

    #[test]
    fn k_rules() {
        assert_eq!(KRule::Half.k_for(7).unwrap(), 4);
        assert_eq!(KRule::Sqrt.k_for(10).unwrap(), 4);
        assert_eq!(KRule::Sqrt.k_for(9).unwrap(), 3);
        assert!(KRule::Fixed(5).k_for(4).is_err());
    }
}
