//! Floating-point oracles for the analytic statements.
//!
//! Two independent evaluations meet here: nested-sum multiple zeta values
//! with an integral tail estimate, and the Eulerian-polynomial form of the
//! q-series evaluated at real `0 < q < 1`. [`limit_check`] samples
//! `(1-q)^w g` along the geometric ladder `q_j = 1 - 2^{-j}`, Richardson
//! extrapolates (order 2), and compares against the zeta oracle. These checks
//! are numeric by nature; everything else in the crate stays exact.

use serde_json::{json, Value};

use crate::brackets::BiIndex;
use crate::error::Error;
use crate::exact::eulerian_poly;
use crate::Result;

/// Relative size at which further summands are dropped.
const TERM_EPS: f64 = 1e-16;

/// Nested-sum multiple zeta value `ζ(k1,...,kr)` with outer cutoff `M` and
/// an integral tail estimate for the outer variable.
///
/// The tail replaces `Σ_{m>M} m^{-k1} S(m)` by `S(M) M^{1-k1}/(k1-1)`, so the
/// residual error is `O(M^{1-k1})` (up to logarithms from inner entries
/// equal to 1).
pub fn mzv_oracle(ks: &[u32], cutoff: usize) -> Result<f64> {
    if ks.is_empty() {
        return Err(Error::EmptyIndex);
    }
    if ks[0] < 2 {
        return Err(Error::DivergentIndex);
    }
    let m = cutoff.max(2);
    // prefix sums from the innermost entry outwards:
    // inner[j] = sum over m_level < j of the nested tail
    let r = ks.len();
    let mut inner = vec![1.0f64; m + 1]; // depth r+1: empty product
    for level in (1..r).rev() {
        let k = f64::from(ks[level]);
        let mut acc = 0.0f64;
        let mut prefix = vec![0.0f64; m + 1];
        for j in 1..=m {
            acc += (j as f64).powf(-k) * inner[j - 1];
            prefix[j] = acc;
        }
        inner = prefix;
    }
    let k1 = f64::from(ks[0]);
    let mut total = 0.0f64;
    for j in 1..=m {
        let term = (j as f64).powf(-k1) * inner[j - 1];
        total += term;
        if term < TERM_EPS * total && j > 10 {
            // fully converged; no tail needed
            return Ok(total);
        }
    }
    let tail = inner[m - 1] * (m as f64).powf(1.0 - k1) / (k1 - 1.0);
    Ok(total + tail)
}

/// Evaluates `g(k1,...,kr)` (all lower indices zero) at a real `0 < q < 1`
/// through the Eulerian-polynomial form
/// `Σ_{m1>...>mr} Π P_{k_j}(q^{m_j})/(1-q^{m_j})^{k_j}`,
/// with part cutoff `M` and a geometric tail estimate on the outer sum.
pub fn g_float(idx: &BiIndex, q: f64, cutoff: usize) -> Result<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidQ(q));
    }
    if idx.d().iter().any(|&d| d != 0) {
        return Err(Error::InvalidIndex(
            "analytic limits are only defined for indices with all d = 0".into(),
        ));
    }
    let m = cutoff.max(2);
    let r = idx.depth();
    // float coefficients of the Eulerian polynomials, once per level
    let polys: Vec<Vec<f64>> = idx
        .k()
        .iter()
        .map(|&k| {
            eulerian_poly(k as usize)
                .coeffs()
                .iter()
                .map(rat_to_f64)
                .collect()
        })
        .collect();
    let factor = |level: usize, qm: f64| -> f64 {
        let p: f64 = polys[level].iter().rev().fold(0.0, |acc, c| acc * qm + c);
        p / (1.0 - qm).powi(idx.k()[level] as i32)
    };

    let mut inner = vec![1.0f64; m + 1];
    for level in (1..r).rev() {
        let mut acc = 0.0f64;
        let mut prefix = vec![0.0f64; m + 1];
        let mut qm = 1.0f64;
        for j in 1..=m {
            qm *= q;
            acc += factor(level, qm) * inner[j - 1];
            prefix[j] = acc;
        }
        inner = prefix;
    }
    let mut total = 0.0f64;
    let mut qm = 1.0f64;
    let mut stop = m;
    for j in 1..=m {
        qm *= q;
        let term = factor(0, qm) * inner[j - 1];
        total += term;
        if term.abs() < TERM_EPS * total.abs() && j > 10 {
            stop = j;
            break;
        }
    }
    if stop == m {
        // geometric tail: the outer factor behaves like q^m/(k1-1)! out here
        let kf: f64 = (1..idx.k()[0] as u64).map(|i| i as f64).product();
        let tail = qm * q / (1.0 - q) / kf.max(1.0) * inner[m - 1];
        total += tail;
    }
    Ok(total)
}

fn rat_to_f64(c: &crate::rational::Rat) -> f64 {
    use num::ToPrimitive;
    c.to_f64().expect("small rational")
}

/// Report of one `q -> 1` limit check.
#[derive(Debug, Clone)]
pub struct LimitReport {
    pub index: BiIndex,
    /// Strictly decreasing sample values of `1 - q`.
    pub epsilons: Vec<f64>,
    /// `(1-q)^w g` at the corresponding `q`.
    pub samples: Vec<f64>,
    pub extrapolated: f64,
    pub reference: f64,
    pub abs_error: f64,
    pub tolerance: f64,
}

impl LimitReport {
    pub fn pass(&self) -> bool {
        self.abs_error <= self.tolerance
    }

    pub fn to_json(&self) -> Value {
        json!({
            "index": {"k": self.index.k(), "d": self.index.d()},
            "epsilons": self.epsilons,
            "samples": self.samples,
            "extrapolated": self.extrapolated,
            "reference": self.reference,
            "abs_error": self.abs_error,
            "tolerance": self.tolerance,
            "pass": self.pass(),
        })
    }
}

/// Second-order Richardson extrapolation on samples taken at `h_j = 2^{-j}`:
/// one halving step cancels the linear error term, a second the quadratic.
fn richardson2(samples: &[f64]) -> f64 {
    assert!(samples.len() >= 3, "need at least three ladder points");
    let first: Vec<f64> = samples.windows(2).map(|w| 2.0 * w[1] - w[0]).collect();
    let second: Vec<f64> = first.windows(2).map(|w| (4.0 * w[1] - w[0]) / 3.0).collect();
    *second.last().unwrap()
}

/// Ladder parameters per depth: deeper sums use a shallower ladder with the
/// outer cutoff capped at 5000.
fn ladder_for(depth: usize) -> (u32, u32, usize) {
    if depth == 1 {
        (3, 10, usize::MAX)
    } else {
        (3, 7, 5000)
    }
}

/// Samples `(1-q)^w g(idx)` along `q_j = 1 - 2^{-j}` for `j = j_min..=j_max`
/// and extrapolates.
pub fn limit_samples(idx: &BiIndex, j_min: u32, j_max: u32, cap: usize) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let w = i32::try_from(idx.weight()).expect("small weight");
    let mut epsilons = Vec::new();
    let mut samples = Vec::new();
    for j in j_min..=j_max {
        let eps = 0.5f64.powi(j as i32);
        let q = 1.0 - eps;
        let cutoff = ((40.0 / eps) as usize).min(cap);
        let g = g_float(idx, q, cutoff)?;
        epsilons.push(eps);
        samples.push(eps.powi(w) * g);
    }
    let extrapolated = richardson2(&samples);
    Ok((epsilons, samples, extrapolated))
}

/// Checks `lim_{q->1} (1-q)^w g(idx) = ζ(idx)` to the given tolerance.
///
/// Requires a convergent reference, i.e. leading entry at least 2 and all
/// lower indices zero.
pub fn limit_check(idx: &BiIndex, tolerance: f64) -> Result<LimitReport> {
    let (j_min, j_max, cap) = ladder_for(idx.depth());
    let reference = mzv_oracle(idx.k(), if idx.depth() == 1 { 200_000 } else { 5000 })?;
    let (epsilons, samples, extrapolated) = limit_samples(idx, j_min, j_max, cap)?;
    debug_assert!(samples.iter().all(|s| s.is_finite()));
    Ok(LimitReport {
        index: idx.clone(),
        abs_error: (extrapolated - reference).abs(),
        epsilons,
        samples,
        extrapolated,
        reference,
        tolerance,
    })
}
