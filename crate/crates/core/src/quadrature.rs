//! Negative powers of the cube Laplacian through the heat semigroup,
//! `Delta^{-alpha} = Gamma(alpha)^{-1} int_0^inf s^{alpha-1} e^{-s Delta} (I - Rad_0) ds`.
//!
//! The integral over `[0, T]` is evaluated by composite Gauss–Legendre in the
//! variable `t = ln s`, which removes the `s^{alpha-1}` endpoint singularity.
//! Both truncations are bounded analytically: below `s_min` by
//! `s_min^alpha / alpha`, above `T` using the smallest nonzero eigenvalue.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Error, Result};
use crate::walsh::{inverse_walsh_transform, walsh_transform, CubeFunction, WalshSpectrum};

/// Gauss–Legendre nodes and weights on `[-1, 1]`, by Newton iteration on `P_order`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order >= 1);
    let mut nodes = vec![0.0; order];
    let mut weights = vec![0.0; order];
    let nf = order as f64;
    for i in 0..order.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=order {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if order == 1 { x } else { p1 };
            let pm = if order == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        if order == 1 {
            nodes[0] = 0.0;
            weights[0] = 2.0;
            break;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[order - 1 - i] = x;
        weights[i] = w;
        weights[order - 1 - i] = w;
    }
    (nodes, weights)
}

/// Quadrature settings for [`inverse_laplacian_quadrature`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureSpec {
    /// Total node count; split evenly between the lower and upper `ln s` ranges.
    pub nodes: usize,
    /// Upper integration limit `T`.
    pub truncation: f64,
    /// Relative error tolerance on each level weight.
    pub tolerance: f64,
}

/// Gauss order per panel.
const PANEL_ORDER: usize = 16;
/// Split point between the lower (`s^alpha`-dominated) and upper ranges in `t = ln s`.
const T_SPLIT: f64 = -4.0;

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            nodes: 512,
            truncation: 53.0 * std::f64::consts::LN_2,
            tolerance: 1e-10,
        }
    }
}

/// Composite Gauss–Legendre estimate of `int_{s_min}^{T} s^{alpha-1} e^{-k s} ds`,
/// integrated as `int e^{alpha t - k e^t} dt`.
fn integrate_level(k: f64, alpha: f64, t_lo: f64, t_hi: f64, panels: usize, rule: &(Vec<f64>, Vec<f64>)) -> f64 {
    let f = |t: f64| (alpha * t - k * t.exp()).exp();
    let mut total = 0.0;
    let ranges = [(t_lo, T_SPLIT.min(t_hi)), (T_SPLIT.max(t_lo), t_hi)];
    for (a, b) in ranges {
        if b <= a {
            continue;
        }
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + width * p as f64;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            let s: f64 = rule.0.iter().zip(&rule.1).map(|(x, w)| w * f(mid + half * x)).sum();
            total += half * s;
        }
    }
    total
}

/// Per-level weights `w(k) ~ k^{-alpha}` for `k = 0..=n` (with `w(0) = 0`), each
/// computed from the heat-semigroup integral, plus the largest relative error estimate.
pub fn inverse_power_weights(n: usize, alpha: f64, spec: &QuadratureSpec) -> Result<(Vec<f64>, f64)> {
    if !(alpha > 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be > 0, got {alpha}")));
    }
    if spec.nodes < 4 * PANEL_ORDER || !(spec.truncation > 0.0) || !(spec.tolerance > 0.0) {
        return Err(invalid(format!(
            "quadrature needs nodes >= {} and positive truncation/tolerance",
            4 * PANEL_ORDER
        )));
    }
    let g = gamma(alpha);
    let kmax = n.max(1) as f64;
    // lower cutoff where s_min^alpha kmax^alpha / (alpha Gamma(alpha)) = 1e-17
    let t_lo = (1e-17 * alpha * g).ln() / alpha - kmax.ln();
    let s_min_pow = (alpha * t_lo).exp();
    let t_hi = spec.truncation.ln();
    let panels = spec.nodes / (2 * PANEL_ORDER);
    let rule = gauss_legendre(PANEL_ORDER);

    let mut weights = vec![0.0; n + 1];
    let mut worst = 0.0f64;
    for (k, slot) in weights.iter_mut().enumerate().skip(1) {
        let kf = k as f64;
        let fine = integrate_level(kf, alpha, t_lo, t_hi, panels, &rule);
        let coarse = integrate_level(kf, alpha, t_lo, t_hi, (panels / 2).max(1), &rule);
        let lower_tail = s_min_pow / alpha;
        let t = spec.truncation;
        let drift = (alpha - 1.0).max(0.0) / t;
        let upper_tail = if kf > drift {
            t.powf(alpha - 1.0) * (-kf * t).exp() / (kf - drift)
        } else {
            f64::INFINITY
        };
        let value = fine / g;
        let estimate = ((fine - coarse).abs() + lower_tail + upper_tail) / g / value.abs();
        worst = worst.max(estimate);
        *slot = value;
    }
    if worst > spec.tolerance {
        return Err(Error::QuadratureUnresolved {
            estimate: worst,
            tolerance: spec.tolerance,
        });
    }
    Ok((weights, worst))
}

/// `Delta_{[n]}^{-alpha} h` by integrating the heat semigroup against `s^{alpha-1}`.
///
/// Independent of the direct `|A|^{-alpha}` multiplier; the two agree on mean-zero input.
pub fn inverse_laplacian_quadrature(h: &CubeFunction, alpha: f64, spec: &QuadratureSpec) -> Result<CubeFunction> {
    let (weights, _) = inverse_power_weights(h.n(), alpha, spec)?;
    let s = walsh_transform(h);
    let coeffs = s
        .coeffs()
        .iter()
        .enumerate()
        .map(|(a, c)| c * weights[a.count_ones() as usize])
        .collect();
    Ok(inverse_walsh_transform(&WalshSpectrum::new(h.n(), coeffs)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::Subset;

    #[test]
    fn gauss_legendre_integrates_polynomials() {
        for order in [1, 2, 5, 16] {
            let (x, w) = gauss_legendre(order);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-14);
            let deg = 2 * order - 1;
            // int_{-1}^{1} x^{deg-1} dx for even deg-1
            let d = deg - 1;
            let exact = if d % 2 == 0 { 2.0 / (d as f64 + 1.0) } else { 0.0 };
            let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32)).sum();
            assert!((got - exact).abs() < 1e-13, "order {order}");
        }
    }

    #[test]
    fn level_weights_match_inverse_powers() {
        let spec = QuadratureSpec::default();
        for alpha in [0.25, 0.5, 1.0, 2.0] {
            let (w, err) = inverse_power_weights(12, alpha, &spec).unwrap();
            assert!(err <= spec.tolerance);
            assert_eq!(w[0], 0.0);
            for (k, wk) in w.iter().enumerate().skip(1) {
                let exact = (k as f64).powf(-alpha);
                assert!(((wk - exact) / exact).abs() < 1e-10, "alpha {alpha} k {k}: {wk}");
            }
        }
    }

    #[test]
    fn character_examples() {
        let spec = QuadratureSpec::default();
        let h = CubeFunction::character(3, Subset(1)).unwrap();
        let out = inverse_laplacian_quadrature(&h, 1.0, &spec).unwrap();
        assert!(out.values().iter().zip(h.values()).all(|(a, b)| (a - b).abs() < 1e-12));
        let h = CubeFunction::character(4, Subset(0b1111)).unwrap();
        let out = inverse_laplacian_quadrature(&h, 0.5, &spec).unwrap();
        assert!(out
            .values()
            .iter()
            .zip(h.values())
            .all(|(a, b)| (a - 0.5 * b).abs() < 1e-12));
    }

    #[test]
    fn errors() {
        let h = CubeFunction::character(2, Subset(1)).unwrap();
        let spec = QuadratureSpec::default();
        assert!(inverse_laplacian_quadrature(&h, 0.0, &spec).is_err());
        assert!(inverse_laplacian_quadrature(&h, -1.0, &spec).is_err());
        let coarse = QuadratureSpec {
            truncation: 5.0,
            ..spec
        };
        assert!(matches!(
            inverse_laplacian_quadrature(&h, 1.0, &coarse),
            Err(Error::QuadratureUnresolved { .. })
        ));
    }
}
