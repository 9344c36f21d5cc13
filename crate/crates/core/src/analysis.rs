//! Closed-form performance estimates for recursive decoding of RM(r, m).
//!
//! These are calculators only: the error-probability estimate for hard
//! decisions, the weight thresholds of correctable error patterns in the
//! fixed-order and fixed-rate regimes, Euclidean-weight thresholds for soft
//! decisions, and the comparison against majority and bounded-distance
//! decoding. The threshold formulas are asymptotic in `m`.

use std::f64::consts::{LN_2, PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::rm_code::CodeParams;
use crate::{Error, Result};

/// Default constant in the fixed-order threshold; anything above `ln 2`.
pub const DEFAULT_C: f64 = 0.7;

/// Upper tail of the standard normal distribution.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

fn check_inner_order(m: usize, r: usize) -> Result<CodeParams> {
    let params = CodeParams::new(m, r)?;
    if r == 0 || r >= m {
        return Err(Error::InvalidParams {
            m,
            r,
            reason: "need 1 <= r <= m-1",
        });
    }
    Ok(params)
}

/// `μ = 2^((m-r)/2) h^(2^(r-1)) / sqrt(1 - h^(2^r))` with `h = 1 - 2p`, and
/// the bit-error estimate `Q(μ)`. `p = 0` saturates to `(∞, 0)`.
pub fn theorem1_mu(m: usize, r: usize, p: f64) -> Result<(f64, f64)> {
    check_inner_order(m, r)?;
    if !(0.0..=0.5).contains(&p) {
        return Err(Error::InvalidProbability(p));
    }
    let h = 1.0 - 2.0 * p;
    let tail = 1.0 - h.powi(1 << r);
    if tail <= 0.0 {
        return Ok((f64::INFINITY, 0.0));
    }
    let mu = 2f64.powf((m - r) as f64 / 2.0) * h.powi(1 << (r - 1)) / tail.sqrt();
    Ok((mu, q_function(mu)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `r` fixed as `m` grows.
    FixedOrder,
    /// `k/n` fixed as `m` grows.
    FixedRate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Threshold {
    pub t: f64,
    /// The formula left its domain and `t` was floored at zero.
    pub degenerate: bool,
}

/// Weight of error patterns that recursive hard-decision decoding still
/// corrects with high probability.
pub fn theorem2_threshold(m: usize, r: usize, regime: Regime, c: f64) -> Result<Threshold> {
    let p = check_inner_order(m, r)?;
    let (n, d, mf) = (p.n as f64, p.d as f64, m as f64);
    match regime {
        Regime::FixedOrder => {
            if c <= LN_2 {
                return Err(Error::Config(format!(
                    "constant c must exceed ln 2, got {c}"
                )));
            }
            let ratio = c * mf / d;
            if ratio >= 1.0 {
                return Ok(Threshold {
                    t: 0.0,
                    degenerate: true,
                });
            }
            let h = ratio.powf(1.0 / (1u64 << r) as f64);
            Ok(Threshold {
                t: n * (1.0 - h) / 2.0,
                degenerate: false,
            })
        }
        Regime::FixedRate => {
            let t = d * (d.ln() - (2.0 * mf).ln()) / 2.0;
            if t < 0.0 {
                Ok(Threshold {
                    t: 0.0,
                    degenerate: true,
                })
            } else {
                Ok(Threshold {
                    t,
                    degenerate: false,
                })
            }
        }
    }
}

/// `(ρ_low, ρ_high)`: correctable Euclidean error weight for fixed order,
/// `sqrt(n) (d/2m)^(1/2^r)`, and for fixed rate, `sqrt(n / (m ln 2))`.
pub fn euclidean_thresholds(m: usize, r: usize) -> Result<(f64, f64)> {
    let p = CodeParams::new(m, r)?;
    let (n, d, mf) = (p.n as f64, p.d as f64, m as f64);
    let rho_low = n.sqrt() * (d / (2.0 * mf)).powf(1.0 / (1u64 << r) as f64);
    let rho_high = (n / (mf * LN_2)).sqrt();
    Ok((rho_low, rho_high))
}

/// Decoding capacity of bounded-distance recursive, majority and the new
/// recursive decoders, evaluated for one code.
///
/// The bounded-distance soft-decision cell is kept as `ρ² = √d`, the form in
/// which it is usually quoted, even though it mixes squared and plain
/// Euclidean units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Table1 {
    pub m: usize,
    pub r: usize,
    pub former_t: f64,
    pub former_rho2: f64,
    pub majority_h: f64,
    pub majority_t_fixed_order: f64,
    pub majority_rho2: f64,
    pub majority_t_fixed_rate: f64,
    pub new_h: f64,
    pub new_t_fixed_order: f64,
    pub new_rho2: f64,
    pub new_t_fixed_rate: f64,
}

pub fn table1_entries(m: usize, r: usize) -> Result<Table1> {
    let p = CodeParams::new(m, r)?;
    let (n, d, mf) = (p.n as f64, p.d as f64, m as f64);
    let e_new = 1.0 / (1u64 << r) as f64;
    let e_maj = e_new / 2.0;
    let majority_h = (mf / n).powf(e_maj);
    let new_h = (mf / n).powf(e_new);
    Ok(Table1 {
        m,
        r,
        former_t: d / 2.0,
        former_rho2: d.sqrt(),
        majority_h,
        majority_t_fixed_order: n * (1.0 - majority_h) / 2.0,
        majority_rho2: (n / mf).powf(e_maj) * n.sqrt(),
        majority_t_fixed_rate: d * d.ln() / 4.0,
        new_h,
        new_t_fixed_order: n * (1.0 - new_h) / 2.0,
        new_rho2: (n / mf).powf(e_new) * n.sqrt(),
        new_t_fixed_rate: d * d.ln() / 2.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticGains {
    /// Sustainable noise power, soft over hard, fixed order: π/2.
    pub noise_ratio: f64,
    /// Sustainable transition probability, soft over hard, fixed rate: 4/π.
    pub p_ratio: f64,
    pub gain_db: f64,
}

pub fn asymptotic_gains() -> AsymptoticGains {
    let noise_ratio = PI / 2.0;
    AsymptoticGains {
        noise_ratio,
        p_ratio: 4.0 / PI,
        gain_db: 10.0 * noise_ratio.log10(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThresholdReport {
    pub m: usize,
    pub r: usize,
    pub n: usize,
    pub k: usize,
    pub d: usize,
    pub regime: Regime,
    pub c: f64,
    pub t_hard: f64,
    pub t_degenerate: bool,
    pub h_residual: f64,
    pub rho_euclidean: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound_alpha: Option<f64>,
    pub table1: Table1,
    pub gains: AsymptoticGains,
}

pub fn threshold_report(
    m: usize,
    r: usize,
    regime: Regime,
    c: f64,
    p: Option<f64>,
) -> Result<ThresholdReport> {
    let params = check_inner_order(m, r)?;
    let threshold = theorem2_threshold(m, r, regime, c)?;
    let (rho_low, rho_high) = euclidean_thresholds(m, r)?;
    let h_residual = 1.0 - 2.0 * threshold.t / params.n as f64;
    let rho_euclidean = match regime {
        Regime::FixedOrder => rho_low,
        Regime::FixedRate => rho_high,
    };
    let (mu, bound_alpha) = match p {
        Some(p) => {
            let (mu, bound) = theorem1_mu(m, r, p)?;
            (Some(mu), Some(bound))
        }
        None => (None, None),
    };
    Ok(ThresholdReport {
        m,
        r,
        n: params.n,
        k: params.k,
        d: params.d,
        regime,
        c,
        t_hard: threshold.t,
        t_degenerate: threshold.degenerate,
        h_residual,
        rho_euclidean,
        p,
        mu,
        bound_alpha,
        table1: table1_entries(m, r)?,
        gains: asymptotic_gains(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Composite Simpson integration of the standard normal density.
    fn q_by_quadrature(x: f64) -> f64 {
        let upper = 40.0;
        let steps = 200_000;
        let h = (upper - x) / steps as f64;
        let f = |t: f64| (-t * t / 2.0).exp() / (2.0 * PI).sqrt();
        let mut sum = f(x) + f(upper);
        for i in 1..steps {
            let t = x + i as f64 * h;
            sum += if i % 2 == 1 { 4.0 * f(t) } else { 2.0 * f(t) };
        }
        sum * h / 3.0
    }

    #[test]
    fn q_function_values() {
        assert_eq!(q_function(0.0), 0.5);
        assert_eq!(q_function(f64::INFINITY), 0.0);
        assert!((q_function(1.96) - 0.0250).abs() < 1e-4);
        for x in [0.3, 1.0, 1.96, 3.0, 5.0] {
            assert!((q_function(x) - q_by_quadrature(x)).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn theorem1_examples() {
        let (mu, bound) = theorem1_mu(6, 2, 0.5).unwrap();
        assert_eq!((mu, bound), (0.0, 0.5));
        let (mu, bound) = theorem1_mu(6, 2, 0.0).unwrap();
        assert!(mu.is_infinite() && bound == 0.0);
        let (mu, bound) = theorem1_mu(6, 2, 1e-6).unwrap();
        assert!(bound < 1e-100 && mu > 20.0);
        let (mu, bound) = theorem1_mu(6, 2, 0.1).unwrap();
        let expect = 4.0 * 0.64 / (1.0f64 - 0.4096).sqrt();
        assert!((mu - expect).abs() < 1e-12);
        assert!((mu - 3.332).abs() < 1e-3);
        assert!((bound - q_function(expect)).abs() < 1e-15);
        assert!(theorem1_mu(6, 0, 0.1).is_err());
        assert!(theorem1_mu(6, 2, 0.7).is_err());
    }

    #[test]
    fn theorem2_examples() {
        let t = theorem2_threshold(9, 4, Regime::FixedRate, DEFAULT_C).unwrap();
        assert!((t.t - 16.0 * (32f64.ln() - 18f64.ln())).abs() < 1e-12);
        assert!((t.t - 9.21).abs() < 0.01);
        // d = 2m: m = 8, r = 4 gives d = 16.
        let t = theorem2_threshold(8, 4, Regime::FixedRate, DEFAULT_C).unwrap();
        assert!(t.t.abs() < 1e-12 && !t.degenerate);
        let t = theorem2_threshold(26, 1, Regime::FixedOrder, DEFAULT_C).unwrap();
        let n = (1u64 << 26) as f64;
        assert!(t.t < n / 2.0 && t.t > 0.999 * n / 2.0);
        let t = theorem2_threshold(4, 3, Regime::FixedOrder, DEFAULT_C).unwrap();
        assert!(t.degenerate && t.t == 0.0);
        assert!(theorem2_threshold(9, 2, Regime::FixedOrder, 0.6).is_err());
    }

    #[test]
    fn euclidean_examples() {
        let (low, high) = euclidean_thresholds(9, 4).unwrap();
        assert!((high - (512.0 / (9.0 * LN_2)).sqrt()).abs() < 1e-12);
        assert!((high - 9.06).abs() < 0.01);
        assert!(low > 0.0);
        let (low, _) = euclidean_thresholds(9, 1).unwrap();
        assert!((low - 512f64.sqrt() * (256.0f64 / 18.0).sqrt()).abs() < 1e-9);
        assert!((low - 85.3).abs() < 0.05);
        assert!(low / 256f64.sqrt() > 1.0);
    }

    #[test]
    fn table1_examples() {
        let t = table1_entries(9, 4).unwrap();
        assert!((t.new_t_fixed_rate - 32.0 * 32f64.ln() / 2.0).abs() < 1e-12);
        assert!((t.new_t_fixed_rate - 55.5).abs() < 0.05);
        assert_eq!(t.new_t_fixed_rate / t.majority_t_fixed_rate, 2.0);
        assert!((t.new_h - t.majority_h * t.majority_h).abs() < 1e-12);
        assert_eq!(t.former_t, 16.0);
    }

    #[test]
    fn gains() {
        let g = asymptotic_gains();
        assert!((g.noise_ratio - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
        assert!((g.p_ratio - 1.2732).abs() < 1e-4);
        assert!((g.gain_db - 2.0).abs() < 0.05);
    }

    #[test]
    fn report_is_consistent() {
        let rep = threshold_report(9, 4, Regime::FixedRate, DEFAULT_C, Some(0.05)).unwrap();
        assert_eq!((rep.n, rep.k, rep.d), (512, 256, 32));
        assert!(rep.bound_alpha.unwrap() <= 0.5 && rep.bound_alpha.unwrap() >= 0.0);
        assert!(rep.t_hard >= 0.0 && rep.rho_euclidean >= 0.0 && rep.h_residual >= 0.0);
        let json = serde_json::to_string(&rep).unwrap();
        assert!(json.contains("\"regime\":\"fixed_rate\""));
    }

    proptest! {
        #[test]
        fn q_is_decreasing_and_symmetric(x in -8.0f64..8.0, dx in 1e-3f64..1.0) {
            prop_assert!(q_function(x + dx) < q_function(x));
            prop_assert!((q_function(x) + q_function(-x) - 1.0).abs() < 1e-12);
        }

        #[test]
        fn mu_decreases_in_p(m in 3usize..=14, r_frac in 0.0f64..1.0, p in 0.001f64..0.49, dp in 1e-4f64..0.01) {
            let r = 1 + ((m - 2) as f64 * r_frac) as usize;
            let (mu1, b1) = theorem1_mu(m, r, p).unwrap();
            let (mu2, b2) = theorem1_mu(m, r, (p + dp).min(0.5)).unwrap();
            prop_assert!(mu2 < mu1 || mu1 == 0.0);
            prop_assert!(b2 >= b1);
        }

        #[test]
        fn fixed_order_threshold_in_range(m in 3usize..=26, r_frac in 0.0f64..1.0, c in 0.7f64..3.0) {
            let r = 1 + ((m - 2) as f64 * r_frac) as usize;
            let t = theorem2_threshold(m, r, Regime::FixedOrder, c).unwrap();
            let n = (1u64 << m) as f64;
            prop_assert!(t.t >= 0.0 && t.t < n / 2.0);
        }

        #[test]
        fn new_residual_is_square_of_majority(m in 1usize..=26, r_frac in 0.0f64..=1.0) {
            let r = ((m as f64) * r_frac).round() as usize;
            let t = table1_entries(m, r).unwrap();
            prop_assert!((t.new_h - t.majority_h * t.majority_h).abs() < 1e-12);
        }
    }
}
