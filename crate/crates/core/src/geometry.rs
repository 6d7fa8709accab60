//! Closed-form distortion calculators for `l_q^n` grids and snowflakes in `L_p`.
//! All quantities carry constant one.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Parameters of a grid `{1..m}^n` with the `l_q` metric embedded into `L_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingParams {
    pub p: f64,
    pub q: f64,
    pub m: u64,
    pub n: u64,
}

impl EmbeddingParams {
    pub fn new(p: f64, q: f64, m: u64, n: u64) -> Result<Self> {
        check_pq(p, q, false)?;
        if m == 0 || n == 0 {
            return Err(invalid(format!("m and n must be >= 1 (m = {m}, n = {n})")));
        }
        Ok(EmbeddingParams { p, q, m, n })
    }
}

/// `2 <= q < p` (or `2 < q < p` when `strict`), all finite.
fn check_pq(p: f64, q: f64, strict: bool) -> Result<()> {
    let q_ok = if strict { q > 2.0 } else { q >= 2.0 };
    if !(p.is_finite() && q.is_finite() && q_ok && q < p) {
        let need = if strict { "2 < q < p" } else { "2 <= q < p" };
        return Err(invalid(format!("need {need}, got p = {p}, q = {q}")));
    }
    Ok(())
}

/// Growth exponents of the grid distortion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    /// Of `n` in the dimension term.
    pub n_exponent: f64,
    /// Of `m` in the side-length term.
    pub m_exponent: f64,
    /// Of `n` in the phase transition threshold for `m`.
    pub phase_exponent: f64,
}

/// Exponents written as single quotients, so rational inputs give correctly rounded outputs.
pub fn exponents(p: f64, q: f64) -> Result<Exponents> {
    check_pq(p, q, false)?;
    Ok(Exponents {
        n_exponent: ((p - q) * (q - 2.0)) / (q * q * (p - 2.0)),
        m_exponent: (q - 2.0) / q,
        phase_exponent: (p - q) / (q * (p - 2.0)),
    })
}

/// `min{ n^{n_exponent}, m^{m_exponent} }`.
pub fn grid_distortion_value(params: &EmbeddingParams) -> Result<f64> {
    let e = exponents(params.p, params.q)?;
    Ok((params.n as f64)
        .powf(e.n_exponent)
        .min((params.m as f64).powf(e.m_exponent)))
}

/// `n^{phase_exponent}`: the side length beyond which the dimension term wins.
pub fn phase_transition_threshold(p: f64, q: f64, n: u64) -> Result<f64> {
    check_pq(p, q, true)?;
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    Ok((n as f64).powf(exponents(p, q)?.phase_exponent))
}

/// `q / p`.
pub fn critical_snowflake_exponent(p: f64, q: f64) -> Result<f64> {
    check_pq(p, q, true)?;
    Ok(q / p)
}

/// An extremum over integer `k` with the smallest extremizing `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub value: f64,
    pub k: u64,
}

fn grid_objective(p: f64, q: f64, n: f64, k: f64) -> f64 {
    k.powf(1.0 / q) / (k + k.powf(p / 2.0) * n.powf(p / q - p / 2.0)).powf(1.0 / p)
}

/// Smallest admissible `k`: the least `k >= 1` with `16 m^2 k >= n`.
pub fn grid_k_min(n: u64, m: u64) -> u64 {
    let denom = 16u128 * (m as u128) * (m as u128);
    (n as u128).div_ceil(denom).max(1) as u64
}

/// Maximum of `k^{1/q} / (k + k^{p/2} n^{p/q - p/2})^{1/p}` over `k in [ceil(n/(16 m^2)), n]`.
pub fn grid_lower_bound(params: &EmbeddingParams) -> Result<Extremum> {
    grid_lower_bound_from(params, grid_k_min(params.n, params.m))
}

/// [`grid_lower_bound`] over `k in [k_min, n]`.
pub fn grid_lower_bound_from(params: &EmbeddingParams, k_min: u64) -> Result<Extremum> {
    let EmbeddingParams { p, q, n, .. } = *params;
    if k_min == 0 || k_min > n {
        return Err(invalid(format!("empty k range {k_min}..={n}")));
    }
    let nf = n as f64;
    let mut best = Extremum {
        value: f64::NEG_INFINITY,
        k: k_min,
    };
    for k in k_min..=n {
        let v = grid_objective(p, q, nf, k as f64);
        if v > best.value {
            best = Extremum { value: v, k };
        }
    }
    Ok(best)
}

/// [`grid_lower_bound`] for one `(p, q, n)` at many `m`, sharing one pass over `k`.
/// Entries equal the single-`m` results bit for bit.
pub fn grid_lower_bound_table(p: f64, q: f64, n: u64, ms: &[u64]) -> Result<Vec<Extremum>> {
    for &m in ms {
        EmbeddingParams::new(p, q, m, n)?;
    }
    let nf = n as f64;
    let lowest = ms.iter().map(|&m| grid_k_min(n, m)).min().unwrap_or(n);
    // suffix maxima over k in [k, n]; ties resolve to the smaller k
    let mut suffix = vec![
        Extremum {
            value: f64::NEG_INFINITY,
            k: n
        };
        (n - lowest + 1) as usize
    ];
    let mut best = suffix[0];
    for k in (lowest..=n).rev() {
        let v = grid_objective(p, q, nf, k as f64);
        if v >= best.value {
            best = Extremum { value: v, k };
        }
        suffix[(k - lowest) as usize] = best;
    }
    Ok(ms
        .iter()
        .map(|&m| suffix[(grid_k_min(n, m) - lowest) as usize])
        .collect())
}

/// The snowflake minimization and the distortion lower bound it implies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SnowflakeBound {
    /// `n^{(1-theta)/2} min_k (k + k^{p/2} n^{p(theta/q - 1/2)})^{1/p} k^{theta(1/2 - 1/q) - 1/2}`.
    pub min_factor: f64,
    /// `1 / min_factor`; grows without bound in `n` exactly when `theta > q/p`.
    pub distortion_lower_bound: f64,
    pub k: u64,
}

pub fn snowflake_bound(p: f64, q: f64, theta: f64, n: u64) -> Result<SnowflakeBound> {
    check_pq(p, q, true)?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(invalid(format!("theta must lie in (0, 1], got {theta}")));
    }
    if n == 0 {
        return Err(invalid("n must be >= 1"));
    }
    let nf = n as f64;
    let weight = nf.powf(p * (theta / q - 0.5));
    let tail = theta * (0.5 - 1.0 / q) - 0.5;
    let mut best = Extremum {
        value: f64::INFINITY,
        k: 1,
    };
    for k in 1..=n {
        let kf = k as f64;
        let v = (kf + kf.powf(p / 2.0) * weight).powf(1.0 / p) * kf.powf(tail);
        if v < best.value {
            best = Extremum { value: v, k };
        }
    }
    let min_factor = nf.powf((1.0 - theta) / 2.0) * best.value;
    Ok(SnowflakeBound {
        min_factor,
        distortion_lower_bound: 1.0 / min_factor,
        k: best.k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents_for_four_three() {
        let e = exponents(4.0, 3.0).unwrap();
        assert_eq!(e.n_exponent, 1.0 / 18.0);
        assert_eq!(e.m_exponent, 1.0 / 3.0);
        assert_eq!(e.phase_exponent, 1.0 / 6.0);
        assert_eq!(critical_snowflake_exponent(4.0, 3.0).unwrap(), 0.75);
        assert_eq!(critical_snowflake_exponent(6.0, 3.0).unwrap(), 0.5);
    }

    #[test]
    fn grid_distortion_examples() {
        let g = EmbeddingParams::new(4.0, 3.0, 2, 1 << 18).unwrap();
        let v = grid_distortion_value(&g).unwrap();
        assert!((v - 2f64.powf(1.0 / 3.0)).abs() < 1e-15);
        let flat = EmbeddingParams::new(5.0, 2.0, 1000, 1000).unwrap();
        assert_eq!(grid_distortion_value(&flat).unwrap(), 1.0);
        assert!(EmbeddingParams::new(3.0, 3.0, 1, 1).is_err());
        assert!(EmbeddingParams::new(4.0, 3.0, 0, 1).is_err());
    }

    #[test]
    fn phase_threshold_examples() {
        assert_eq!(phase_transition_threshold(4.0, 3.0, 1).unwrap(), 1.0);
        assert!((phase_transition_threshold(6.0, 4.0, 1 << 16).unwrap() - 4.0).abs() < 1e-14);
        assert!(phase_transition_threshold(4.0, 2.0, 8).is_err());
        assert!(phase_transition_threshold(4.0, 4.0, 8).is_err());
    }

    #[test]
    fn grid_lower_bound_single_point() {
        for p in [2.5, 4.0, 7.0] {
            let g = EmbeddingParams::new(p, 2.2, 3, 1).unwrap();
            let b = grid_lower_bound(&g).unwrap();
            assert_eq!(b.k, 1);
            assert!((b.value - 2f64.powf(-1.0 / p)).abs() < 1e-15);
        }
    }

    #[test]
    fn grid_k_min_rounds_up() {
        assert_eq!(grid_k_min(729, 729), 1);
        assert_eq!(grid_k_min(100, 1), 7);
        assert_eq!(grid_k_min(16, 1), 1);
        assert_eq!(grid_k_min(17, 1), 2);
    }

    #[test]
    fn table_matches_single_evaluations() {
        let ms = [1, 2, 3, 5, 8, 40];
        for n in [1u64, 17, 300, 729] {
            let table = grid_lower_bound_table(4.0, 3.0, n, &ms).unwrap();
            for (m, got) in ms.iter().zip(table) {
                let want = grid_lower_bound(&EmbeddingParams::new(4.0, 3.0, *m, n).unwrap()).unwrap();
                assert_eq!(got, want);
            }
        }
    }

    #[test]
    fn snowflake_single_point() {
        for p in [3.0, 4.0] {
            let s = snowflake_bound(p, 2.5, 0.9, 1).unwrap();
            assert_eq!(s.k, 1);
            assert!((s.min_factor - 2f64.powf(1.0 / p)).abs() < 1e-15);
        }
        assert!(snowflake_bound(4.0, 3.0, 0.0, 4).is_err());
        assert!(snowflake_bound(4.0, 3.0, 1.5, 4).is_err());
    }
}
