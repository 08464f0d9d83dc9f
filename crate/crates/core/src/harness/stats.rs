//! Binomial confidence intervals.

use crate::error::{Error, Result};

/// Inverse standard normal CDF by Acklam's rational approximation
/// (relative error below 1.2e-9 over (0, 1)).
pub fn normal_quantile(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969683028665376e1,
        2.209460984245205e2,
        -2.759285104469687e2,
        1.383_577_518_672_69e2,
        -3.066479806614716e1,
        2.506628277459239,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e1,
        1.615858368580409e2,
        -1.556989798598866e2,
        6.680131188771972e1,
        -1.328068155288572e1,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-3,
        -3.223964580411365e-1,
        -2.400758277161838,
        -2.549732539343734,
        4.374664141464968,
        2.938163982698783,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-3,
        3.224671290700398e-1,
        2.445134137142996,
        3.754408661907416,
    ];
    const LOW: f64 = 0.02425;
    let tail = |q: f64| {
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    };
    if p <= 0.0 {
        f64::NEG_INFINITY
    } else if p >= 1.0 {
        f64::INFINITY
    } else if p < LOW {
        tail((-2.0 * p.ln()).sqrt())
    } else if p > 1.0 - LOW {
        -tail((-2.0 * (1.0 - p).ln()).sqrt())
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}

/// Two-sided Agresti-Coull interval for `failures` successes out of
/// `shots` trials, clamped to [0, 1].
pub fn agresti_coull_ci(failures: usize, shots: usize, confidence: f64) -> Result<(f64, f64)> {
    if failures > shots {
        return Err(Error::InvalidConfig(format!("{failures} failures out of {shots} shots")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::InvalidProbability(confidence));
    }
    let z = normal_quantile(0.5 + confidence / 2.0);
    let z2 = z * z;
    let n = shots as f64 + z2;
    let p = (failures as f64 + z2 / 2.0) / n;
    let half = z * (p * (1.0 - p) / n).sqrt();
    Ok(((p - half).max(0.0), (p + half).min(1.0)))
}
