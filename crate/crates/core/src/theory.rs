//! Closed-form predictions for the expected density of discordant edges.
//!
//! The short-time factor `phi(t)` is a Poisson(2t) mixture over the number of
//! jumps `k` of the discrete-time pair chain:
//!
//! ```text
//! phi(t) = 1 - 1/(2 delta) * sum_k Pois(2t)(k) * B_k
//! B_k    = 1{k>0} + 1{k>2} * sum_{s=1}^{floor((k-1)/2)} 4^{-s} C_s rho^s
//! ```
//!
//! `B_k` increases to `1 + S` with `S = 2(1 - sqrt(1-rho))/rho - 1`, which
//! gives the plateau value `phi(inf) = 1 - (1 - sqrt(1-rho))/(delta rho)`.
//! The full prediction multiplies `2u(1-u) phi(t)` by `exp(-2 t / (n theta))`.

use serde::Serialize;

use crate::degree::TheoryParams;
use crate::error::{Error, Result};

/// Default truncation tolerance for the Poisson mixture.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Catalan number `C_s` in exact integer arithmetic.
///
/// Uses `C_{s+1} = C_s * 2(2s+1) / (s+2)`; the product is always divisible, so
/// no rounding occurs. Fails once `u128` overflows (s > 67).
pub fn catalan(s: u32) -> Result<u128> {
    let mut c: u128 = 1;
    for j in 0..s as u128 {
        c = c
            .checked_mul(2 * (2 * j + 1))
            .ok_or_else(|| Error::Overflow(format!("catalan({s})")))?
            / (j + 2);
    }
    Ok(c)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("rho = {rho} outside (0, 1)")))
    }
}

/// Terms `4^{-s} C_s rho^s` for `s = 1, 2, ...` via the ratio
/// `rho (2s+1) / (2(s+2))`.
fn catalan_terms(rho: f64) -> impl Iterator<Item = f64> {
    (1u64..).scan(rho / 4.0, move |term, s| {
        let current = *term;
        *term *= rho * (2 * s + 1) as f64 / (2 * (s + 2)) as f64;
        Some(current)
    })
}

/// Partial sum `sum_{s=1}^{s_max} 4^{-s} C_s rho^s`; `None` sums to
/// convergence.
///
/// Convergence is declared once the remainder bound `term * rho / (1 - rho)`
/// (term ratios are below `rho`) drops under `1e-17`.
pub fn catalan_series_tail(rho: f64, s_max: Option<u64>) -> Result<f64> {
    check_rho(rho)?;
    let mut acc = crate::stats::CompensatedSum::new();
    match s_max {
        Some(s_max) => catalan_terms(rho).take(s_max as usize).for_each(|t| acc.add(t)),
        None => {
            for term in catalan_terms(rho) {
                acc.add(term);
                if term * rho / (1.0 - rho) < 1e-17 {
                    break;
                }
            }
        }
    }
    Ok(acc.value())
}

/// Closed form of the infinite series through the Catalan generating
/// function.
pub fn catalan_series_limit(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    Ok(2.0 * (1.0 - (1.0 - rho).sqrt()) / rho - 1.0)
}

/// Plateau value `1 - (1 - sqrt(1-rho)) / (delta rho)`.
pub fn phi_infinity(delta: f64, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("delta = {delta} must be positive")));
    }
    Ok(1.0 - (1.0 - (1.0 - rho).sqrt()) / (delta * rho))
}

/// Short-time factor `phi(t)`.
///
/// Evaluated as `phi(inf) + 1/(2 delta) * sum_k w_k (B_inf - B_k)`: the
/// deficits `B_inf - B_k` are non-increasing in `k`, so once
/// `(1 - sum_{j<=k} w_j) * deficit_k < tol` the neglected remainder is below
/// `tol` and the loop stops. Poisson weights come from the log-space recurrence
/// `ln w_{k+1} = ln w_k + ln(2t) - ln(k+1)`, which stays finite for any `t`.
pub fn phi(t: f64, delta: f64, rho: f64, tol: f64) -> Result<f64> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::Domain(format!("t = {t} must be finite and >= 0")));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tol = {tol} must be positive")));
    }
    let plateau = phi_infinity(delta, rho)?;
    let b_inf = 1.0 + catalan_series_limit(rho)?;
    if t == 0.0 {
        return Ok(plateau + b_inf / (2.0 * delta));
    }

    let lambda = 2.0 * t;
    let ln_lambda = lambda.ln();
    let mut ln_w = -lambda;
    let mut mass = 0.0;
    let mut excess = crate::stats::CompensatedSum::new();
    // partial Catalan sum S_j with j = floor((k-1)/2), advanced at odd k >= 3
    let mut partial = 0.0;
    let mut terms = catalan_terms(rho);
    let mut k: u64 = 0;
    loop {
        let b_k = match k {
            0 => 0.0,
            1 | 2 => 1.0,
            _ => {
                if k % 2 == 1 {
                    partial += terms.next().unwrap();
                }
                1.0 + partial
            }
        };
        let deficit = (b_inf - b_k).max(0.0);
        let w = ln_w.exp();
        excess.add(w * deficit);
        mass += w;
        if (1.0 - mass).max(0.0) * deficit < tol && k as f64 >= lambda.min(1.0) {
            break;
        }
        k += 1;
        ln_w += ln_lambda - (k as f64).ln();
    }
    Ok(plateau + excess.value() / (2.0 * delta))
}

/// `2u(1-u) phi(t) exp(-2 t / (n theta))`.
pub fn predicted_density(t: f64, n: usize, u: f64, params: &TheoryParams, tol: f64) -> Result<f64> {
    if !(u > 0.0 && u < 1.0) {
        return Err(Error::Domain(format!("u = {u} outside (0, 1)")));
    }
    if n == 0 {
        return Err(Error::Domain("n must be >= 1".into()));
    }
    let theta = params.theta_or_err()?;
    let phi_t = phi(t, params.delta, params.rho, tol)?;
    Ok(2.0 * u * (1.0 - u) * phi_t * (-2.0 * (t / n as f64) / theta).exp())
}

/// The plateau level `2u(1-u) phi(inf)`.
pub fn plateau_density(u: f64, params: &TheoryParams) -> Result<f64> {
    Ok(2.0 * u * (1.0 - u) * phi_infinity(params.delta, params.rho)?)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PredictionCurve {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub u: f64,
    pub params: TheoryParams,
    pub n: usize,
}

impl PredictionCurve {
    pub fn new(times: &[f64], n: usize, u: f64, params: TheoryParams, tol: f64) -> Result<Self> {
        let values = times
            .iter()
            .map(|&t| predicted_density(t, n, u, &params, tol))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            times: times.to_vec(),
            values,
            u,
            params,
            n,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::degree::{gen_regular, stats};
    use statrs::function::gamma::ln_gamma;

    /// The mixture evaluated exactly as written: Poisson weights from
    /// `ln_gamma`, Catalan terms from log-binomials, truncated far in the tail.
    fn phi_oracle(t: f64, delta: f64, rho: f64) -> f64 {
        let lambda = 2.0 * t;
        let k_max = (lambda + 12.0 * (lambda + 1.0).sqrt() + 60.0) as u64;
        let term = |s: u64| {
            let s = s as f64;
            (ln_gamma(2.0 * s + 1.0) - 2.0 * ln_gamma(s + 1.0) - (s + 1.0).ln()
                - 2.0 * s * 2f64.ln()
                + s * rho.ln())
            .exp()
        };
        let mut total = 0.0;
        for k in 0..=k_max {
            let w = if lambda == 0.0 {
                if k == 0 { 1.0 } else { 0.0 }
            } else {
                (-lambda + k as f64 * lambda.ln() - ln_gamma(k as f64 + 1.0)).exp()
            };
            let mut inner = if k > 0 { 1.0 } else { 0.0 };
            if k > 2 {
                inner += (1..=(k - 1) / 2).map(term).sum::<f64>();
            }
            total += w * inner;
        }
        1.0 - total / (2.0 * delta)
    }

    #[test]
    fn catalan_small_values() {
        let expected = [1u128, 1, 2, 5, 14, 42, 132];
        for (s, &c) in expected.iter().enumerate() {
            assert_eq!(catalan(s as u32).unwrap(), c);
        }
        // binom(20, 10) / 11
        assert_eq!(catalan(10).unwrap(), 184_756 / 11);
        assert_eq!(catalan(10).unwrap(), 16_796);
    }

    #[test]
    fn catalan_overflow_is_an_error() {
        assert!(catalan(60).is_ok());
        assert!(matches!(catalan(200), Err(Error::Overflow(_))));
    }

    #[test]
    fn series_examples() {
        let rho = 1.0 / 3.0;
        // 1/12, 1/12 + 1/72, + 5/1728
        assert!((catalan_series_tail(rho, Some(1)).unwrap() - 1.0 / 12.0).abs() < 1e-15);
        assert!((catalan_series_tail(rho, Some(2)).unwrap() - 0.097_222_222).abs() < 1e-8);
        assert!((catalan_series_tail(rho, Some(3)).unwrap() - 0.100_115_741).abs() < 1e-8);
        let full = catalan_series_tail(rho, None).unwrap();
        assert!((full - 0.101_020).abs() < 1e-6);
        assert!(catalan_series_tail(1e-9, None).unwrap() < 1e-9);
        assert!(catalan_series_tail(0.0, None).is_err());
        assert!(catalan_series_tail(1.0, None).is_err());
    }

    #[test]
    fn series_matches_generating_function() {
        for i in 1..20 {
            let rho = 0.05 * i as f64;
            let sum = catalan_series_tail(rho, None).unwrap();
            let closed = catalan_series_limit(rho).unwrap();
            assert!((sum - closed).abs() < 1e-10, "rho={rho}: {sum} vs {closed}");
        }
    }

    #[test]
    fn phi_infinity_examples() {
        assert!((phi_infinity(3.0, 1.0 / 3.0).unwrap() - 0.816_497).abs() < 1e-6);
        assert!((phi_infinity(3.0, 1.0 / 3.0).unwrap() - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((phi_infinity(2.0, 0.5).unwrap() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-6);
        // 1 - (1 - sqrt(7/12)) / (2.5 * 5/12)
        assert!((phi_infinity(2.5, 5.0 / 12.0).unwrap() - 0.773_212).abs() < 1e-6);
        assert!(phi_infinity(0.0, 0.5).is_err());
        assert!(phi_infinity(2.0, 1.0).is_err());
    }

    #[test]
    fn regular_plateau_is_sqrt_of_d_minus_one_over_d() {
        for d in 2..8 {
            let d = d as f64;
            let v = phi_infinity(d, 1.0 / d).unwrap();
            assert!((v - ((d - 1.0) / d).sqrt()).abs() < 1e-14);
        }
    }

    #[test]
    fn phi_examples() {
        assert!((phi(0.0, 2.5, 5.0 / 12.0, DEFAULT_TOL).unwrap() - 1.0).abs() < 1e-15);
        let v = phi(50.0, 2.5, 0.416_667, DEFAULT_TOL).unwrap();
        let inf = phi_infinity(2.5, 0.416_667).unwrap();
        assert!((v - inf).abs() < 1e-6);
        let v = phi(1000.0, 3.0, 1.0 / 3.0, DEFAULT_TOL).unwrap();
        assert!((v - 0.816_497).abs() < 1e-6);
        assert!(phi(-1.0, 3.0, 0.3, DEFAULT_TOL).is_err());
        assert!(phi(1.0, 3.0, 0.3, 0.0).is_err());
    }

    #[test]
    fn phi_matches_direct_oracle() {
        for &(delta, rho) in &[(2.0, 0.5), (3.0, 1.0 / 3.0), (2.5, 5.0 / 12.0), (4.0, 0.2), (2.0, 0.9)] {
            for &t in &[0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 30.0] {
                let fast = phi(t, delta, rho, DEFAULT_TOL).unwrap();
                let slow = phi_oracle(t, delta, rho);
                assert!((fast - slow).abs() < 1e-10, "t={t} delta={delta} rho={rho}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn phi_bounded_and_converging() {
        for i in 1..=9 {
            let rho = 0.1 * i as f64;
            for delta in 2..=6 {
                let delta = delta as f64;
                let inf = phi_infinity(delta, rho).unwrap();
                for &t in &[0.0, 0.3, 1.0, 4.0, 20.0, 60.0, 200.0] {
                    let v = phi(t, delta, rho, DEFAULT_TOL).unwrap();
                    assert!((0.0..=1.0).contains(&v));
                    assert!(v >= inf - 1e-12);
                }
                // the series converges at the pace of the Catalan tail: at
                // rho <= 0.8 the gap is below 1e-8 from t = 60 on, rho = 0.9
                // needs t ~ 120
                let t_conv = if rho < 0.85 { 60.0 } else { 120.0 };
                for &t in &[t_conv, 2.0 * t_conv, 1e4] {
                    let v = phi(t, delta, rho, DEFAULT_TOL).unwrap();
                    assert!((v - inf).abs() < 1e-8, "rho={rho} delta={delta} t={t}");
                }
            }
        }
    }

    #[test]
    fn phi_gap_at_rho_point_nine_is_real() {
        let gap = phi(60.0, 2.0, 0.9, DEFAULT_TOL).unwrap() - phi_infinity(2.0, 0.9).unwrap();
        let oracle = phi_oracle(60.0, 2.0, 0.9) - phi_infinity(2.0, 0.9).unwrap();
        assert!(gap > 1e-6);
        assert!((gap - oracle).abs() < 1e-10);
    }

    #[test]
    fn phi_is_pure() {
        let a = phi(7.3, 2.7, 0.31, DEFAULT_TOL).unwrap();
        let b = phi(7.3, 2.7, 0.31, DEFAULT_TOL).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn predicted_density_examples() {
        let p = stats(&gen_regular(1000, 3).unwrap()).unwrap();
        assert!((predicted_density(0.0, 1000, 0.5, &p, DEFAULT_TOL).unwrap() - 0.5).abs() < 1e-15);
        // 0.5 * sqrt(2/3) * exp(-0.2 / 1.176235)
        let v = predicted_density(100.0, 1000, 0.5, &p, DEFAULT_TOL).unwrap();
        let expected = 0.5 * (2.0f64 / 3.0).sqrt() * (-0.2 / p.theta.unwrap()).exp();
        assert!((v - expected).abs() < 1e-12);
        assert!((v - 0.344_413).abs() < 1e-6);
        for &t in &[0.0, 1.0, 100.0] {
            assert!(predicted_density(t, 1000, 1e-12, &p, DEFAULT_TOL).unwrap() < 1e-11);
        }
        assert!(predicted_density(1.0, 1000, 0.0, &p, DEFAULT_TOL).is_err());
        let mut undefined = p;
        undefined.theta = None;
        assert!(predicted_density(1.0, 1000, 0.5, &undefined, DEFAULT_TOL).is_err());
    }

    #[test]
    fn regime_ordering() {
        let n = 10_000;
        let p = stats(&gen_regular(n, 3).unwrap()).unwrap();
        let at = |t: f64| predicted_density(t, n, 0.5, &p, DEFAULT_TOL).unwrap();
        let short = at(1.0);
        let long = at(0.5 * n as f64);
        let beyond = at(100.0 * n as f64);
        assert!(short >= long && long >= beyond);
        assert!(beyond < 1e-30);
    }

    #[test]
    fn prediction_curve_shape() {
        let p = stats(&gen_regular(100, 3).unwrap()).unwrap();
        let times = [0.0, 1.0, 10.0, 100.0];
        let c = PredictionCurve::new(&times, 100, 0.3, p, DEFAULT_TOL).unwrap();
        assert_eq!(c.values.len(), times.len());
        assert!(c.values.iter().all(|&v| (0.0..=2.0 * 0.3 * 0.7 + 1e-15).contains(&v)));
    }
}
