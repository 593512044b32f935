//! Bernoulli numbers, Eulerian polynomials, binomials and factorials.
//!
//! Bernoulli numbers follow the `x/(e^x - 1)` generating-function convention,
//! so `B_1 = -1/2`. This choice is load-bearing: the lambda coefficients of
//! the stuffle product are built from these values and silently break under
//! the `x/(1 - e^{-x})` convention.

use std::sync::Mutex;

use num::{One, Signed, Zero};

use crate::rational::{Int, Rat};

static BERNOULLI: Mutex<Vec<Rat>> = Mutex::new(Vec::new());
static EULERIAN: Mutex<Vec<Vec<Int>>> = Mutex::new(Vec::new());

/// `n!` as a big integer.
pub fn factorial(n: u32) -> Int {
    (1..=u64::from(n)).map(Int::from).product()
}

/// `n!` as a rational, for use in coefficient formulas.
pub fn factorial_rat(n: u32) -> Rat {
    Rat::from(factorial(n))
}

/// Binomial coefficient with the out-of-range convention:
/// `C(n,k) = 0` whenever `k < 0`, `k > n` or `n < 0`.
pub fn binomial(n: i64, k: i64) -> Int {
    if k < 0 || n < 0 || k > n {
        return Int::zero();
    }
    let k = k.min(n - k);
    let mut acc = Int::one();
    for i in 0..k {
        acc = acc * Int::from(n - i) / Int::from(i + 1);
    }
    acc
}

/// Binomial coefficient as a rational.
pub fn binomial_rat(n: i64, k: i64) -> Rat {
    Rat::from(binomial(n, k))
}

/// The Bernoulli number `B_n` under the `x/(e^x - 1)` convention.
///
/// Computed by inverting the power series `(e^x - 1)/x` and memoized; the
/// cache is shared across threads.
pub fn bernoulli(n: usize) -> Rat {
    let mut cache = BERNOULLI.lock().unwrap();
    if cache.is_empty() {
        cache.push(Rat::one());
    }
    while cache.len() <= n {
        let m = cache.len();
        // b_m = -sum_{i=1..m} b_{m-i} / (i+1)!  with  B_j = j! b_j
        let mut acc = Rat::zero();
        for i in 1..=m {
            let b_prev = &cache[m - i]; // = B_{m-i}
            acc += b_prev / factorial_rat((m - i) as u32) / factorial_rat(i as u32 + 1);
        }
        let b_m = -acc * factorial_rat(m as u32);
        cache.push(b_m);
    }
    cache[n].clone()
}

/// Dense polynomial with rational coefficients, index = degree.
///
/// Trailing zero coefficients are trimmed, so `degree = coeffs.len() - 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Rat>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Rat>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn coeffs(&self) -> &[Rat] {
        &self.coeffs
    }

    /// Coefficient of `X^i` (zero beyond the stored degree).
    pub fn coeff(&self, i: usize) -> Rat {
        self.coeffs.get(i).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &Rat) -> Rat {
        let mut acc = Rat::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let lead = first;
            first = false;
            if !lead {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            let a = if lead || !c.is_negative() { c.clone() } else { -c.clone() };
            match i {
                0 => write!(f, "{}", a)?,
                _ => {
                    if !a.is_one() {
                        write!(f, "{}*", a)?;
                    }
                    if i == 1 {
                        write!(f, "X")?;
                    } else {
                        write!(f, "X^{}", i)?;
                    }
                }
            }
        }
        Ok(())
    }
}

fn eulerian_row(n: usize) -> Vec<Int> {
    let mut cache = EULERIAN.lock().unwrap();
    if cache.is_empty() {
        cache.push(vec![Int::one()]);
    }
    while cache.len() <= n {
        let m = cache.len();
        let prev = cache[m - 1].clone();
        let at = |j: i64| -> Int {
            if j < 0 || j as usize >= prev.len() {
                Int::zero()
            } else {
                prev[j as usize].clone()
            }
        };
        // A(m, j) = (j+1) A(m-1, j) + (m-j) A(m-1, j-1)
        let row: Vec<Int> = (0..=m.saturating_sub(1) as i64)
            .map(|j| Int::from(j + 1) * at(j) + Int::from(m as i64 - j) * at(j - 1))
            .collect();
        cache.push(row);
    }
    cache[n].clone()
}

/// The normalized Eulerian polynomial `P_k`, defined by
/// `P_k(X)/(1-X)^k = sum_{n>0} n^{k-1}/(k-1)! X^n`.
///
/// Satisfies `P_k(1) = 1`; the degree is `k-1` for `k >= 2` and 1 for `k = 1`.
pub fn eulerian_poly(k: usize) -> Poly {
    assert!(k >= 1, "eulerian_poly requires k >= 1");
    let row = eulerian_row(k - 1);
    let kf = factorial_rat(k as u32 - 1);
    let mut coeffs = vec![Rat::zero()];
    coeffs.extend(row.into_iter().map(|a| Rat::from(a) / kf.clone()));
    Poly::new(coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{rat, rat_int};

    /// Independent oracle: the recurrence sum_{j=0}^{n} C(n+1,j) B_j = 0.
    fn bernoulli_by_recurrence(n: usize) -> Vec<Rat> {
        let mut b = vec![Rat::one()];
        for m in 1..=n {
            let mut acc = Rat::zero();
            for (j, bj) in b.iter().enumerate() {
                acc += Rat::from(binomial(m as i64 + 1, j as i64)) * bj;
            }
            b.push(-acc / rat_int(m as i64 + 1));
        }
        b
    }

    #[test]
    fn bernoulli_small_values() {
        assert_eq!(bernoulli(0), rat_int(1));
        assert_eq!(bernoulli(1), rat(-1, 2));
        assert_eq!(bernoulli(2), rat(1, 6));
        assert_eq!(bernoulli(12), rat(-691, 2730));
    }

    #[test]
    fn bernoulli_matches_recurrence_oracle() {
        let oracle = bernoulli_by_recurrence(30);
        for (n, expected) in oracle.iter().enumerate() {
            assert_eq!(&bernoulli(n), expected, "B_{}", n);
        }
    }

    #[test]
    fn bernoulli_odd_vanish() {
        for n in 1..=20 {
            assert!(bernoulli(2 * n + 1).is_zero(), "B_{} should vanish", 2 * n + 1);
        }
    }

    #[test]
    fn eulerian_small_polys() {
        assert_eq!(eulerian_poly(1).coeffs(), &[rat_int(0), rat_int(1)]);
        assert_eq!(eulerian_poly(3).coeffs(), &[rat_int(0), rat(1, 2), rat(1, 2)]);
        assert_eq!(
            eulerian_poly(4).coeffs(),
            &[rat_int(0), rat(1, 6), rat(4, 6), rat(1, 6)]
        );
    }

    #[test]
    fn eulerian_at_one() {
        for k in 1..=12 {
            assert!(eulerian_poly(k).eval(&Rat::one()).is_one(), "P_{}(1)", k);
        }
    }

    /// Oracle: multiply P_k by (1-X)^{-k} as a truncated series and compare
    /// with sum_{n<=N} n^{k-1}/(k-1)! X^n, exactly, to order N = 50.
    #[test]
    fn eulerian_generating_function_oracle() {
        const N: usize = 50;
        for k in 1..=10usize {
            // coefficients of (1-X)^{-k}: C(n+k-1, k-1)
            let inv: Vec<Rat> = (0..=N)
                .map(|n| Rat::from(binomial((n + k - 1) as i64, k as i64 - 1)))
                .collect();
            let p = eulerian_poly(k);
            let kf = factorial_rat(k as u32 - 1);
            for n in 0..=N {
                let mut conv = Rat::zero();
                for i in 0..=n.min(p.degree()) {
                    conv += p.coeff(i) * &inv[n - i];
                }
                let direct = if n == 0 {
                    Rat::zero()
                } else {
                    Rat::from(Int::from(n).pow(k as u32 - 1)) / kf.clone()
                };
                assert_eq!(conv, direct, "k={} n={}", k, n);
            }
        }
    }

    #[test]
    fn binomial_conventions() {
        assert_eq!(binomial(3, 1), Int::from(3));
        assert_eq!(binomial(1, -1), Int::zero());
        assert_eq!(binomial(0, 0), Int::one());
        assert_eq!(binomial(-2, 0), Int::zero());
        assert_eq!(binomial(4, 7), Int::zero());
        assert_eq!(binomial(10, 5), Int::from(252));
    }

    #[test]
    fn factorial_values() {
        assert_eq!(factorial(0), Int::one());
        assert_eq!(factorial(5), Int::from(120));
    }
}
