//! Truncated formal power series in `q` with exact rational coefficients.
//!
//! A [`QSeries`] is known modulo `q^{N+1}` where `N` is its *order*; all
//! arithmetic results carry the minimum order of the operands and never
//! fabricate coefficients beyond it. Equality is therefore meaningful only up
//! to a common order: use [`QSeries::agreement`], which states that order.

use num::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::exact::{bernoulli, factorial_rat};
use crate::rational::{format_rat, Int, Rat};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QSeries {
    /// Known modulo `q^{order+1}`.
    order: usize,
    /// Dense coefficients, index = q-degree, length `order + 1`.
    coeffs: Vec<Rat>,
}

/// Result of comparing two series up to their common order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Agreement {
    /// The order up to which the comparison is meaningful.
    pub order: usize,
    /// First q-power where the series differ, with both coefficients.
    pub first_discrepancy: Option<(usize, Rat, Rat)>,
}

impl Agreement {
    pub fn ok(&self) -> bool {
        self.first_discrepancy.is_none()
    }
}

impl QSeries {
    /// The zero series of the given order.
    pub fn zero(order: usize) -> Self {
        QSeries { order, coeffs: vec![Rat::zero(); order + 1] }
    }

    /// The constant series `c` of the given order.
    pub fn constant(c: Rat, order: usize) -> Self {
        let mut s = QSeries::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// Builds a series from dense coefficients; the order is `len - 1`.
    pub fn from_coeffs(coeffs: Vec<Rat>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least the constant term");
        QSeries { order: coeffs.len() - 1, coeffs }
    }

    /// Series with integer coefficients, for tests and examples.
    pub fn from_ints(coeffs: &[i64]) -> Self {
        QSeries::from_coeffs(coeffs.iter().map(|&c| Rat::from(Int::from(c))).collect())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of `q^n`. Panics beyond the order: that coefficient is
    /// not known, and returning zero would silently fabricate it.
    pub fn coeff(&self, n: usize) -> &Rat {
        assert!(n <= self.order, "coefficient q^{} beyond series order {}", n, self.order);
        &self.coeffs[n]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    /// Restricts to a smaller order.
    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order);
        QSeries { order, coeffs: self.coeffs[..=order].to_vec() }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let coeffs = (0..=order).map(|i| &self.coeffs[i] + &other.coeffs[i]).collect();
        QSeries { order, coeffs }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let coeffs = (0..=order).map(|i| &self.coeffs[i] - &other.coeffs[i]).collect();
        QSeries { order, coeffs }
    }

    pub fn neg(&self) -> Self {
        QSeries { order: self.order, coeffs: self.coeffs.iter().map(|c| -c).collect() }
    }

    /// Truncated product at the common order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut coeffs = vec![Rat::zero(); order + 1];
        for (i, a) in self.coeffs.iter().take(order + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (b, c) in other.coeffs.iter().zip(coeffs[i..].iter_mut()) {
                if !b.is_zero() {
                    *c += a * b;
                }
            }
        }
        QSeries { order, coeffs }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        QSeries { order: self.order, coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// The operator `q d/dq`: multiplies the coefficient of `q^n` by `n`.
    pub fn q_derivative(&self) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(n, c)| c * Rat::from(Int::from(n)))
            .collect();
        QSeries { order: self.order, coeffs }
    }

    /// Iterated `q d/dq`.
    pub fn q_derivative_n(&self, times: usize) -> Self {
        let mut s = self.clone();
        for _ in 0..times {
            s = s.q_derivative();
        }
        s
    }

    /// Compares up to the common order and reports the first discrepancy.
    pub fn agreement(&self, other: &Self) -> Agreement {
        let order = self.order.min(other.order);
        for n in 0..=order {
            if self.coeffs[n] != other.coeffs[n] {
                return Agreement {
                    order,
                    first_discrepancy: Some((n, self.coeffs[n].clone(), other.coeffs[n].clone())),
                };
            }
        }
        Agreement { order, first_discrepancy: None }
    }

    /// `{"order": N, "coeffs": ["c0", "c1", ...]}` with rationals as strings.
    pub fn to_json(&self) -> Value {
        json!({
            "order": self.order,
            "coeffs": self.coeffs.iter().map(format_rat).collect::<Vec<_>>(),
        })
    }
}

impl std::fmt::Display for QSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (n, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let lead = first;
            first = false;
            if !lead {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            let a = if lead || !c.is_negative() { c.clone() } else { -c.clone() };
            match n {
                0 => write!(f, "{}", a)?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{}*", a)?;
                    }
                    if n == 1 {
                        write!(f, "q")?;
                    } else {
                        write!(f, "q^{}", n)?;
                    }
                }
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.order + 1)
    }
}

/// Divisor power sum `sigma_e(n) = sum_{d | n} d^e` for `n >= 1`.
pub fn sigma(e: u32, n: u64) -> Int {
    debug_assert!(n >= 1);
    let mut acc = Int::zero();
    let mut d = 1u64;
    while d * d <= n {
        if n.is_multiple_of(d) {
            acc += Int::from(d).pow(e);
            let other = n / d;
            if other != d {
                acc += Int::from(other).pow(e);
            }
        }
        d += 1;
    }
    acc
}

/// The normalized Eisenstein series `G̃_k` as a truncated q-series:
/// constant term `-B_k/(2 k!)` and `q^n`-coefficient `sigma_{k-1}(n)/(k-1)!`
/// for `k >= 2`; for `k = 1` the constant term is dropped (`G̃_1 := g(1)`).
pub fn eisenstein_gtilde(k: usize, order: usize) -> QSeries {
    assert!(k >= 1, "eisenstein series needs k >= 1");
    let mut coeffs = Vec::with_capacity(order + 1);
    if k == 1 {
        coeffs.push(Rat::zero());
    } else {
        coeffs.push(-bernoulli(k) / (factorial_rat(k as u32) * Rat::from(Int::from(2))));
    }
    let kf = factorial_rat(k as u32 - 1);
    for n in 1..=order as u64 {
        coeffs.push(Rat::from(sigma(k as u32 - 1, n)) / kf.clone());
    }
    QSeries::from_coeffs(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    /// Divisor-count oracle for g(1) = sum_n d(n) q^n.
    fn divisor_count_series(order: usize) -> QSeries {
        let mut coeffs = vec![Rat::zero(); order + 1];
        for m in 1..=order {
            for n in (m..=order).step_by(m) {
                coeffs[n] += Rat::one();
            }
        }
        QSeries::from_coeffs(coeffs)
    }

    #[test]
    fn add_and_truncation() {
        let a = QSeries::from_ints(&[0, 1, 3]); // q + 3q^2
        let b = QSeries::from_ints(&[0, 1]); // q, order 1
        let sum = a.add(&b);
        assert_eq!(sum.order(), 1);
        assert_eq!(sum.coeffs(), &[rat_int(0), rat_int(2)]);

        // mul at order 1 discards q^2
        let q = QSeries::from_ints(&[0, 1]);
        let sq = q.mul(&q);
        assert_eq!(sq.order(), 1);
        assert!(sq.is_zero());
    }

    #[test]
    fn product_of_divisor_series() {
        // coefficient of q^5 in g(1)^2, against a hand convolution of the
        // divisor-count oracle: 1*3 + 2*2 + 2*2 + 3*1 = 14
        let g1 = divisor_count_series(6);
        let prod = g1.mul(&g1);
        assert_eq!(prod.coeff(5), &rat_int(14));
    }

    #[test]
    fn q_derivative_examples() {
        let a = QSeries::from_ints(&[0, 1, 3]);
        assert_eq!(a.q_derivative().coeffs(), &[rat_int(0), rat_int(1), rat_int(6)]);
        let c = QSeries::constant(rat(5, 7), 3);
        assert!(c.q_derivative().is_zero());
    }

    #[test]
    fn q_derivative_is_a_derivation() {
        let a = QSeries::from_ints(&[2, -1, 4, 0, 3]);
        let b = QSeries::from_ints(&[0, 5, 1, -2, 7]);
        let lhs = a.mul(&b).q_derivative();
        let rhs = a.q_derivative().mul(&b).add(&a.mul(&b.q_derivative()));
        assert!(lhs.agreement(&rhs).ok());
    }

    #[test]
    fn gtilde_two() {
        let g2 = eisenstein_gtilde(2, 4);
        assert_eq!(
            g2.coeffs(),
            &[rat(-1, 24), rat_int(1), rat_int(3), rat_int(4), rat_int(7)]
        );
    }

    #[test]
    fn gtilde_four() {
        let g4 = eisenstein_gtilde(4, 2);
        assert_eq!(g4.coeffs(), &[rat(1, 1440), rat(1, 6), rat(3, 2)]);
    }

    #[test]
    fn gtilde_one_is_divisor_count() {
        let g1 = eisenstein_gtilde(1, 3);
        assert_eq!(g1.coeffs(), &[rat_int(0), rat_int(1), rat_int(2), rat_int(2)]);
        assert!(g1.agreement(&divisor_count_series(3)).ok());
    }

    #[test]
    fn sigma_values() {
        assert_eq!(sigma(1, 6), Int::from(12));
        assert_eq!(sigma(3, 2), Int::from(9));
        assert_eq!(sigma(0, 12), Int::from(6));
    }

    #[test]
    fn agreement_reports_first_mismatch() {
        let a = QSeries::from_ints(&[0, 1, 2, 3]);
        let b = QSeries::from_ints(&[0, 1, 5]);
        let ag = a.agreement(&b);
        assert_eq!(ag.order, 2);
        assert_eq!(ag.first_discrepancy, Some((2, rat_int(2), rat_int(5))));
    }

    #[test]
    #[should_panic(expected = "beyond series order")]
    fn coeff_beyond_order_panics() {
        let a = QSeries::from_ints(&[0, 1]);
        let _ = a.coeff(2);
    }

    #[test]
    fn json_shape() {
        let a = QSeries::from_coeffs(vec![rat(-1, 24), rat_int(1)]);
        assert_eq!(
            a.to_json().to_string(),
            r#"{"coeffs":["-1/24","1"],"order":1}"#
        );
    }
}
