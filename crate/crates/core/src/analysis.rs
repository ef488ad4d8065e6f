//! Statistics and curve fitting: detection frequencies, Wilson confidence
//! intervals, Bell fidelity from basis counts, exponential decay fits,
//! Ramsey contrast estimation and retry histograms.
//!
//! All estimators are deterministic given their inputs (bootstrap resampling
//! is seeded), so analysis outputs are reproducible byte for byte.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::decoder::DetectorRecord;
use crate::engine::record::ShotRecord;
use crate::qec::meta::MeasBasis;
use crate::rng::ShotRng;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("empty input")]
    EmptyInput,
    #[error("zero trials")]
    ZeroTrials,
    #[error("successes {successes} exceed trials {trials}")]
    BadCounts { successes: u64, trials: u64 },
    #[error("missing basis {0:?}")]
    MissingBasis(MeasBasis),
    #[error("degenerate data: {0}")]
    Degenerate(String),
}

// ---------------------------------------------------------------------------
// Numeric kernels
// ---------------------------------------------------------------------------

/// Inverse of the standard normal CDF (Acklam's rational approximation,
/// relative error below 1.2e-9).
pub fn inverse_normal_cdf(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile needs p in (0,1)");
    const A: [f64; 6] = [
        -3.969683028665376e+01,
        2.209460984245205e+02,
        -2.759285104469687e+02,
        1.383_577_518_672_69e2,
        -3.066479806614716e+01,
        2.506628277459239e+00,
    ];
    const B: [f64; 5] = [
        -5.447609879822406e+01,
        1.615858368580409e+02,
        -1.556989798598866e+02,
        6.680131188771972e+01,
        -1.328068155288572e+01,
    ];
    const C: [f64; 6] = [
        -7.784894002430293e-03,
        -3.223964580411365e-01,
        -2.400758277161838e+00,
        -2.549732539343734e+00,
        4.374664141464968e+00,
        2.938163982698783e+00,
    ];
    const D: [f64; 4] = [
        7.784695709041462e-03,
        3.224671290700398e-01,
        2.445134137142996e+00,
        3.754408661907416e+00,
    ];
    let p_low = 0.02425;
    if p < p_low {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - p_low {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Regularized lower incomplete gamma P(a, x) (series + continued fraction).
pub fn gamma_p(a: f64, x: f64) -> f64 {
    assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    if x < a + 1.0 {
        let mut ap = a;
        let mut sum = 1.0 / a;
        let mut del = sum;
        for _ in 0..500 {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        sum * (-x + a * x.ln() - ln_gamma(a)).exp()
    } else {
        1.0 - gamma_q_cf(a, x)
    }
}

/// Regularized upper incomplete gamma Q(a, x) = 1 − P(a, x).
pub fn gamma_q(a: f64, x: f64) -> f64 {
    if x < a + 1.0 {
        1.0 - gamma_p(a, x)
    } else {
        gamma_q_cf(a, x)
    }
}

fn gamma_q_cf(a: f64, x: f64) -> f64 {
    // Lentz continued fraction.
    let tiny = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / tiny;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < tiny {
            d = tiny;
        }
        c = b + an / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-15 {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma(a)).exp() * h
}

/// Lanczos log-gamma.
pub fn ln_gamma(x: f64) -> f64 {
    const COF: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut y = x;
    let tmp = x + 5.5;
    let tmp = tmp - (x + 0.5) * tmp.ln();
    let mut ser = 1.000000000190015;
    for c in COF {
        y += 1.0;
        ser += c / y;
    }
    -tmp + (2.5066282746310005 * ser / x).ln()
}

/// Survival function of the chi-squared distribution with `dof` degrees of
/// freedom: P(X ≥ x).
pub fn chi2_sf(x: f64, dof: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    gamma_q(dof / 2.0, x / 2.0)
}

// ---------------------------------------------------------------------------
// Wilson interval
// ---------------------------------------------------------------------------

/// Wilson score interval for a binomial proportion.
pub fn wilson_interval(
    successes: u64,
    trials: u64,
    confidence: f64,
) -> Result<(f64, f64), AnalysisError> {
    if trials == 0 {
        return Err(AnalysisError::ZeroTrials);
    }
    if successes > trials {
        return Err(AnalysisError::BadCounts { successes, trials });
    }
    let z = inverse_normal_cdf(0.5 + confidence / 2.0);
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    Ok(((center - half).max(0.0), (center + half).min(1.0)))
}

// ---------------------------------------------------------------------------
// Detection frequency
// ---------------------------------------------------------------------------

/// Per-cycle average detector frequency with a bootstrap standard deviation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CycleFrequency {
    pub cycle: u32,
    pub mean: f64,
    pub std: f64,
    pub detectors_per_shot: u32,
}

/// Bootstrap resamples used for the standard deviation.
pub const BOOTSTRAP_RESAMPLES: usize = 1000;

/// Mean parity-1 frequency per cycle index across shots, with a
/// shot-resampled (bootstrap) standard deviation. Order independent.
pub fn detection_frequency(
    shots: &[Vec<DetectorRecord>],
    seed: u64,
) -> Result<Vec<CycleFrequency>, AnalysisError> {
    if shots.is_empty() || shots[0].is_empty() {
        return Err(AnalysisError::EmptyInput);
    }

    // Per-shot, per-cycle fraction of flagged detectors.
    let mut per_shot: BTreeMap<u32, Vec<f64>> = BTreeMap::new();
    let mut per_cycle_count: BTreeMap<u32, u32> = BTreeMap::new();
    for shot in shots {
        let mut flagged: BTreeMap<u32, (u32, u32)> = BTreeMap::new();
        for det in shot {
            let e = flagged.entry(det.cycle).or_insert((0, 0));
            e.0 += det.parity as u32;
            e.1 += 1;
        }
        for (cycle, (ones, total)) in flagged {
            per_shot.entry(cycle).or_default().push(ones as f64 / total as f64);
            per_cycle_count.insert(cycle, total);
        }
    }

    let mut rng = ShotRng::from_seed(seed);
    let n = shots.len();
    let mut out = Vec::new();
    for (&cycle, values) in &per_shot {
        let mean = values.iter().sum::<f64>() / n as f64;
        let mut means = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
        for _ in 0..BOOTSTRAP_RESAMPLES {
            let mut acc = 0.0;
            for _ in 0..n {
                acc += values[rng.below(n)];
            }
            means.push(acc / n as f64);
        }
        let bmean = means.iter().sum::<f64>() / means.len() as f64;
        let var =
            means.iter().map(|m| (m - bmean).powi(2)).sum::<f64>() / (means.len() - 1) as f64;
        out.push(CycleFrequency {
            cycle,
            mean,
            std: var.sqrt(),
            detectors_per_shot: per_cycle_count[&cycle],
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Bell fidelity
// ---------------------------------------------------------------------------

/// Failure/trial counts for one measurement basis. A failure is a measured
/// parity inconsistent with the target Bell state's eigenvalue in that
/// basis.
#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisCounts {
    pub failures: u64,
    pub trials: u64,
}

/// Per-basis counts for a Bell-fidelity estimate.
pub type CountTable = BTreeMap<MeasBasis, BasisCounts>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BellFidelity {
    pub fidelity: f64,
    pub sigma: f64,
    pub per_basis_failure: BTreeMap<String, f64>,
}

/// Bell fidelity from per-basis failure counts:
/// F = 1 − (f_XX + f_YY + f_ZZ)/2, with binomial error propagation. The
/// sign conventions of the target state are folded into the failure
/// definition upstream, so the estimate depends only on counts.
pub fn bell_fidelity(counts: &CountTable) -> Result<BellFidelity, AnalysisError> {
    let mut fsum = 0.0;
    let mut var = 0.0;
    let mut per_basis = BTreeMap::new();
    for basis in [MeasBasis::Xx, MeasBasis::Yy, MeasBasis::Zz] {
        let c = counts.get(&basis).ok_or(AnalysisError::MissingBasis(basis))?;
        if c.trials == 0 {
            return Err(AnalysisError::ZeroTrials);
        }
        if c.failures > c.trials {
            return Err(AnalysisError::BadCounts { successes: c.failures, trials: c.trials });
        }
        let f = c.failures as f64 / c.trials as f64;
        per_basis.insert(basis.as_str().to_string(), f);
        fsum += f;
        var += f * (1.0 - f) / c.trials as f64;
    }
    Ok(BellFidelity {
        fidelity: 1.0 - fsum / 2.0,
        sigma: 0.5 * var.sqrt(),
        per_basis_failure: per_basis,
    })
}

// ---------------------------------------------------------------------------
// Exponential decay fit
// ---------------------------------------------------------------------------

/// Result of a least-squares fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Parameter estimates (model specific).
    pub params: Vec<f64>,
    /// Standard errors from the fit covariance.
    pub errors: Vec<f64>,
    /// Covariance matrix, row major.
    pub covariance: Vec<f64>,
    pub residual_norm: f64,
}

/// Least-squares fit of `y = A·(1−ε)^x`. Returns params `[A, ε]`.
/// Deterministic given the data (initial guess from log-linearization).
pub fn fit_exponential_decay(x: &[f64], y: &[f64]) -> Result<FitResult, AnalysisError> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(AnalysisError::Degenerate("need at least 3 points".into()));
    }
    // Log-linear initial guess over strictly positive points.
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut m = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        if yi > 0.0 {
            let ly = yi.ln();
            sx += xi;
            sy += ly;
            sxx += xi * xi;
            sxy += xi * ly;
            m += 1.0;
        }
    }
    if m < 2.0 {
        return Err(AnalysisError::Degenerate("not enough positive points".into()));
    }
    let det = m * sxx - sx * sx;
    if det.abs() < 1e-12 {
        return Err(AnalysisError::Degenerate("singular design (constant x)".into()));
    }
    let slope = (m * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / m;
    let mut a = intercept.exp();
    let mut eps = 1.0 - slope.exp();

    // Gauss-Newton refinement of the nonlinear model.
    for _ in 0..100 {
        let base = 1.0 - eps;
        if base <= 0.0 {
            return Err(AnalysisError::Degenerate("decay rate reached 1".into()));
        }
        let mut jtj = [0.0f64; 4];
        let mut jtr = [0.0f64; 2];
        for (&xi, &yi) in x.iter().zip(y) {
            let f = a * base.powf(xi);
            let r = yi - f;
            let da = base.powf(xi);
            let de = if xi == 0.0 { 0.0 } else { -a * xi * base.powf(xi - 1.0) };
            jtj[0] += da * da;
            jtj[1] += da * de;
            jtj[2] += da * de;
            jtj[3] += de * de;
            jtr[0] += da * r;
            jtr[1] += de * r;
        }
        let det = jtj[0] * jtj[3] - jtj[1] * jtj[2];
        if det.abs() < 1e-300 {
            break;
        }
        let step_a = (jtj[3] * jtr[0] - jtj[1] * jtr[1]) / det;
        let step_e = (-jtj[2] * jtr[0] + jtj[0] * jtr[1]) / det;
        a += step_a;
        eps += step_e;
        if step_a.abs() < 1e-14 * a.abs().max(1.0) && step_e.abs() < 1e-14 {
            break;
        }
    }

    // Covariance = (JᵀJ)⁻¹ σ² with σ² from residuals.
    let base = 1.0 - eps;
    let mut jtj = [0.0f64; 4];
    let mut ss = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        let f = a * base.powf(xi);
        let r = yi - f;
        ss += r * r;
        let da = base.powf(xi);
        let de = if xi == 0.0 { 0.0 } else { -a * xi * base.powf(xi - 1.0) };
        jtj[0] += da * da;
        jtj[1] += da * de;
        jtj[2] += da * de;
        jtj[3] += de * de;
    }
    let dof = (x.len() as f64 - 2.0).max(1.0);
    let sigma2 = ss / dof;
    let det = jtj[0] * jtj[3] - jtj[1] * jtj[2];
    let cov = if det.abs() > 1e-300 {
        vec![
            jtj[3] / det * sigma2,
            -jtj[1] / det * sigma2,
            -jtj[2] / det * sigma2,
            jtj[0] / det * sigma2,
        ]
    } else {
        vec![f64::NAN; 4]
    };
    Ok(FitResult {
        params: vec![a, eps],
        errors: vec![cov[0].max(0.0).sqrt(), cov[3].max(0.0).sqrt()],
        covariance: cov,
        residual_norm: ss.sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Ramsey contrast
// ---------------------------------------------------------------------------

/// Quadrature contrast estimate from P(1 | φ) sampled at quarter-turn
/// phases: C = 2·|⟨(2P−1)·e^{iφ}⟩|.
pub fn contrast_quadrature(points: &[(i32, f64)]) -> Result<f64, AnalysisError> {
    if points.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let n = points.len() as f64;
    let mut re = 0.0;
    let mut im = 0.0;
    for &(quarter_turns, p1) in points {
        let phi = quarter_turns as f64 * std::f64::consts::FRAC_PI_2;
        let s = 2.0 * p1 - 1.0;
        re += s * phi.cos();
        im += s * phi.sin();
    }
    Ok(2.0 * ((re / n).powi(2) + (im / n).powi(2)).sqrt())
}

// ---------------------------------------------------------------------------
// Retry histogram
// ---------------------------------------------------------------------------

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RetryHistogram {
    /// `counts[r]` = number of shots needing r retries.
    pub counts: Vec<u64>,
    pub mean_retries: f64,
    pub mean_attempts: f64,
    /// 95% CI on the mean retries (normal approximation).
    pub ci95: (f64, f64),
    pub shots: u64,
    pub exhausted: u64,
}

/// Histogram over retries (attempts − 1) for heralded shots.
pub fn retry_histogram(records: &[ShotRecord]) -> Result<RetryHistogram, AnalysisError> {
    if records.is_empty() {
        return Err(AnalysisError::EmptyInput);
    }
    let mut counts: Vec<u64> = Vec::new();
    let mut sum = 0.0;
    let mut exhausted = 0;
    for rec in records {
        let r = rec.retries() as usize;
        if counts.len() <= r {
            counts.resize(r + 1, 0);
        }
        counts[r] += 1;
        sum += r as f64;
        exhausted += rec.herald_exhausted as u64;
    }
    let n = records.len() as f64;
    let mean = sum / n;
    let var = records
        .iter()
        .map(|r| (r.retries() as f64 - mean).powi(2))
        .sum::<f64>()
        / (n - 1.0).max(1.0);
    let half = 1.959964 * (var / n).sqrt();
    Ok(RetryHistogram {
        counts,
        mean_retries: mean,
        mean_attempts: mean + 1.0,
        ci95: (mean - half, mean + half),
        shots: records.len() as u64,
        exhausted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_normal_known_values() {
        assert!((inverse_normal_cdf(0.975) - 1.959964).abs() < 1e-5);
        assert!(inverse_normal_cdf(0.5).abs() < 1e-9);
        assert!((inverse_normal_cdf(0.025) + 1.959964).abs() < 1e-5);
    }

    #[test]
    fn chi2_sf_known_values() {
        // P(X ≥ 3.841) ≈ 0.05 for 1 dof; P(X ≥ 9.488) ≈ 0.05 for 4 dof.
        assert!((chi2_sf(3.841, 1.0) - 0.05).abs() < 1e-3);
        assert!((chi2_sf(9.488, 4.0) - 0.05).abs() < 1e-3);
        assert!((chi2_sf(0.0, 3.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn wilson_zero_successes() {
        let (lo, hi) = wilson_interval(0, 100, 0.95).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.0370).abs() < 5e-4, "hi = {hi}");
    }

    #[test]
    fn wilson_symmetric_at_half() {
        let (lo, hi) = wilson_interval(50, 100, 0.95).unwrap();
        assert!(((lo + hi) / 2.0 - 0.5).abs() < 1e-12);
        assert!(lo < 0.5 && hi > 0.5);
    }

    #[test]
    fn wilson_rejects_zero_trials() {
        assert_eq!(wilson_interval(0, 0, 0.95), Err(AnalysisError::ZeroTrials));
    }

    #[test]
    fn wilson_contains_point_estimate() {
        for (s, n) in [(1u64, 10u64), (25, 17820), (30, 11700), (9999, 10000)] {
            let (lo, hi) = wilson_interval(s, n, 0.95).unwrap();
            let p = s as f64 / n as f64;
            assert!(lo <= p && p <= hi);
            assert!((0.0..=1.0).contains(&lo) && (0.0..=1.0).contains(&hi));
        }
    }

    #[test]
    fn bell_fidelity_reproduces_published_benchmarks() {
        // Unencoded distillation counts: failures 7/2450, 61/2188, 79/4907.
        let mut counts = CountTable::new();
        counts.insert(MeasBasis::Xx, BasisCounts { failures: 7, trials: 2450 });
        counts.insert(MeasBasis::Yy, BasisCounts { failures: 61, trials: 2188 });
        counts.insert(MeasBasis::Zz, BasisCounts { failures: 79, trials: 4907 });
        let f = bell_fidelity(&counts).unwrap();
        assert!((f.fidelity - 0.977).abs() < 1e-3, "unencoded {}", f.fidelity);

        // Encoded: 3/1443, 3/1369, 4/1456.
        let mut counts = CountTable::new();
        counts.insert(MeasBasis::Xx, BasisCounts { failures: 3, trials: 1443 });
        counts.insert(MeasBasis::Yy, BasisCounts { failures: 3, trials: 1369 });
        counts.insert(MeasBasis::Zz, BasisCounts { failures: 4, trials: 1456 });
        let f = bell_fidelity(&counts).unwrap();
        assert!((f.fidelity - 0.996).abs() < 1e-3, "encoded {}", f.fidelity);
    }

    #[test]
    fn bell_fidelity_perfect_counts() {
        let mut counts = CountTable::new();
        for b in [MeasBasis::Xx, MeasBasis::Yy, MeasBasis::Zz] {
            counts.insert(b, BasisCounts { failures: 0, trials: 100 });
        }
        let f = bell_fidelity(&counts).unwrap();
        assert_eq!(f.fidelity, 1.0);
    }

    #[test]
    fn bell_fidelity_missing_basis_errors() {
        let mut counts = CountTable::new();
        counts.insert(MeasBasis::Xx, BasisCounts { failures: 0, trials: 10 });
        assert!(matches!(bell_fidelity(&counts), Err(AnalysisError::MissingBasis(_))));
    }

    #[test]
    fn exponential_fit_recovers_exact_decay() {
        let x: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&xi| 0.99f64.powf(xi)).collect();
        let fit = fit_exponential_decay(&x, &y).unwrap();
        assert!((fit.params[0] - 1.0).abs() < 1e-9);
        assert!((fit.params[1] - 0.01).abs() < 1e-9, "eps = {}", fit.params[1]);
    }

    #[test]
    fn exponential_fit_recovers_from_binomial_sampling() {
        // Synthetic survival data: 600 draws per point around (1−ε)^x.
        let mut rng = ShotRng::from_seed(404);
        let eps: f64 = 0.0106;
        let trials = 600;
        let x: Vec<f64> = (0..=40).step_by(4).map(|v| v as f64).collect();
        let y: Vec<f64> = x
            .iter()
            .map(|&xi| {
                let p = (1.0 - eps).powf(xi);
                let mut ones = 0;
                for _ in 0..trials {
                    ones += rng.bernoulli(p) as u32;
                }
                ones as f64 / trials as f64
            })
            .collect();
        let fit = fit_exponential_decay(&x, &y).unwrap();
        let se = fit.errors[1].max(1e-6);
        assert!(
            (fit.params[1] - eps).abs() < 2.0 * se,
            "recovered {} ± {se} vs {eps}",
            fit.params[1]
        );
    }

    #[test]
    fn exponential_fit_rejects_degenerate() {
        assert!(fit_exponential_decay(&[0.0, 1.0], &[1.0, 0.9]).is_err());
    }

    #[test]
    fn contrast_of_pure_cosine_is_one() {
        let pts: Vec<(i32, f64)> = (0..4)
            .map(|k| {
                let phi = k as f64 * std::f64::consts::FRAC_PI_2;
                (k, (1.0 + phi.cos()) / 2.0)
            })
            .collect();
        let c = contrast_quadrature(&pts).unwrap();
        assert!((c - 1.0).abs() < 1e-12);
    }

    #[test]
    fn contrast_of_flat_response_is_zero() {
        let pts: Vec<(i32, f64)> = (0..4).map(|k| (k, 0.5)).collect();
        assert!(contrast_quadrature(&pts).unwrap() < 1e-12);
    }

    #[test]
    fn retry_histogram_all_first_try() {
        use crate::engine::record::AttemptRecord;
        let mk = |retries: u32| {
            let attempts = (0..=retries)
                .map(|i| AttemptRecord { index: i + 1, herald_pass: i == retries })
                .collect();
            ShotRecord {
                seed: 0,
                outcomes: vec![],
                final_measurements: vec![],
                fills_performed: vec![],
                attempts,
                herald_exhausted: false,
            }
        };
        let recs: Vec<ShotRecord> = (0..10).map(|_| mk(0)).collect();
        let h = retry_histogram(&recs).unwrap();
        assert_eq!(h.counts, vec![10]);
        assert_eq!(h.mean_retries, 0.0);
        assert_eq!(h.mean_attempts, 1.0);
    }

    #[test]
    fn detection_frequency_order_independent() {
        let mk_shot = |parities: &[bool]| -> Vec<DetectorRecord> {
            parities
                .iter()
                .enumerate()
                .map(|(i, &p)| DetectorRecord {
                    id: i as u32,
                    check: i as u32,
                    cycle: (i / 2) as u32,
                    parity: p,
                    loss_touched: false,
                    randomized: false,
                })
                .collect()
        };
        let shots = vec![
            mk_shot(&[true, false, false, false]),
            mk_shot(&[false, false, true, true]),
            mk_shot(&[false, true, false, false]),
        ];
        let mut shuffled = shots.clone();
        shuffled.reverse();
        let a = detection_frequency(&shots, 5).unwrap();
        let b = detection_frequency(&shuffled, 5).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.cycle, y.cycle);
            assert!((x.mean - y.mean).abs() < 1e-12);
        }
    }
}
