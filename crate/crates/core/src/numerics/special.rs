//! Special functions needed by the nearest-neighbor entropy estimators.
//!
//! Evaluated in f64 regardless of the pipeline scalar: the accuracy
//! contracts (1e-10 for digamma) are out of reach in single precision.

use crate::{Error, Result};

/// Euler-Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Lanczos approximation (g = 7, n = 9) for ln Γ(x), x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 8] = [
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    const G: f64 = 7.0;
    if x < 0.5 {
        // Reflection formula.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = 0.99999999999980993;
    for (i, &c) in COEFFS.iter().enumerate() {
        acc += c / (x + (i + 1) as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Digamma Ψ(x) for x > 0: recurrence up to x >= 6, then the asymptotic
/// series with Bernoulli terms.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut x = x;
    let mut acc = 0.0;
    while x < 6.0 {
        acc -= 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Ψ(x) ~ ln x - 1/(2x) - Σ B_{2n}/(2n x^{2n})
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2 * (1.0 / 252.0 - inv2 * (1.0 / 240.0 - inv2 * (1.0 / 132.0)))));
    Ok(acc + x.ln() - 0.5 * inv - series)
}

/// Volume of the unit ball in R^n: pi^{n/2} / Γ(n/2 + 1).
pub fn unit_ball_volume(n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::Domain("unit_ball_volume requires n >= 1".into()));
    }
    let half = n as f64 / 2.0;
    Ok((half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)).exp())
}

/// ln c1(n), the log unit-ball volume; the form used inside estimators.
pub fn ln_unit_ball_volume(n: usize) -> f64 {
    let half = n as f64 / 2.0;
    half * std::f64::consts::PI.ln() - ln_gamma(half + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_integers() {
        // Γ(n) = (n-1)!
        let facts = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0];
        for (i, f) in facts.iter().enumerate() {
            assert!((ln_gamma((i + 1) as f64) - (f as &f64).ln()).abs() < 1e-12);
        }
    }

    #[test]
    fn ln_gamma_half() {
        // Γ(1/2) = sqrt(pi)
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
    }

    #[test]
    fn digamma_known_values() {
        assert!((digamma(1.0).unwrap() + EULER_GAMMA).abs() < 1e-10);
        assert!((digamma(2.0).unwrap() - (1.0 - EULER_GAMMA)).abs() < 1e-10);
        // Ψ(10) from the recurrence Ψ(1) + Σ_{k=1}^{9} 1/k
        let harmonic9: f64 = (1..=9).map(|k| 1.0 / k as f64).sum();
        assert!((digamma(10.0).unwrap() - (harmonic9 - EULER_GAMMA)).abs() < 1e-10);
        assert!((digamma(10.0).unwrap() - 2.251752589066721).abs() < 1e-9);
    }

    #[test]
    fn digamma_recurrence_property() {
        // Ψ(x+1) − Ψ(x) = 1/x on x ∈ {0.5, 1, …, 20}
        let mut x = 0.5;
        while x <= 20.0 {
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap();
            assert!((lhs - 1.0 / x).abs() < 1e-10, "x={x}");
            x += 0.5;
        }
    }

    #[test]
    fn digamma_domain() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.0).is_err());
    }

    #[test]
    fn ball_volumes() {
        let pi = std::f64::consts::PI;
        assert!((unit_ball_volume(1).unwrap() - 2.0).abs() < 1e-12);
        assert!((unit_ball_volume(2).unwrap() - pi).abs() < 1e-12);
        assert!((unit_ball_volume(3).unwrap() - 4.0 * pi / 3.0).abs() < 1e-12);
        assert!((unit_ball_volume(5).unwrap() - 8.0 * pi * pi / 15.0).abs() < 1e-10);
        assert!(unit_ball_volume(0).is_err());
    }
}
