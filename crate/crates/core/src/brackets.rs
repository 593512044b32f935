//! The bi-indexed q-series `g(k₁,…,k_r; d₁,…,d_r)` and their algebra.
//!
//! The coefficient of `q^N` in `g(k; d)` is a sum over partitions of `N`
//! with `r = depth` distinct part sizes `m₁ > … > m_r > 0` and
//! multiplicities `n₁, …, n_r > 0`, the summand being
//! `∏ m_i^{d_i} n_i^{k_i-1} / (k_i-1)!`. The product of two such series
//! expands in two ways (stuffle and shuffle), and conjugation of the
//! underlying Young diagrams yields a third family of linear relations (the
//! partition relation). Everything here is exact; identities are *checked*
//! coefficientwise, with the first discrepancy reported on failure.

use std::collections::{BTreeMap, HashMap};

use num::{One, Signed, Zero};
use serde_json::{json, Value};

use crate::error::Error;
use crate::exact::{bernoulli, binomial_rat, factorial_rat};
use crate::qseries::{Agreement, QSeries};
use crate::rational::{format_rat, Int, Rat};
use crate::Result;

/// Index of a bi-indexed q-series: an upper tuple `k` (entries ≥ 1) and a
/// lower tuple `d` (entries ≥ 0) of equal positive length.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BiIndex {
    k: Vec<u32>,
    d: Vec<u32>,
}

impl BiIndex {
    pub fn new(k: Vec<u32>, d: Vec<u32>) -> Result<Self> {
        if k.is_empty() {
            return Err(Error::EmptyIndex);
        }
        if k.len() != d.len() {
            return Err(Error::InvalidIndex(format!(
                "k-part has length {}, d-part has length {}",
                k.len(),
                d.len()
            )));
        }
        if let Some(pos) = k.iter().position(|&ki| ki == 0) {
            return Err(Error::InvalidIndex(format!("k_{} must be >= 1", pos + 1)));
        }
        Ok(BiIndex { k, d })
    }

    /// Depth-one index `g(k; d)`.
    pub fn single(k: u32, d: u32) -> Self {
        assert!(k >= 1);
        BiIndex { k: vec![k], d: vec![d] }
    }

    /// Depth-two index `g(k1,k2; d1,d2)`.
    pub fn pair(k1: u32, k2: u32, d1: u32, d2: u32) -> Self {
        assert!(k1 >= 1 && k2 >= 1);
        BiIndex { k: vec![k1, k2], d: vec![d1, d2] }
    }

    pub fn k(&self) -> &[u32] {
        &self.k
    }

    pub fn d(&self) -> &[u32] {
        &self.d
    }

    pub fn depth(&self) -> usize {
        self.k.len()
    }

    pub fn weight(&self) -> u32 {
        self.k.iter().sum::<u32>() + self.d.iter().sum::<u32>()
    }
}

impl std::fmt::Display for BiIndex {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "g(")?;
        fmt_list(f, &self.k)?;
        write!(f, ";")?;
        fmt_list(f, &self.d)?;
        write!(f, ")")
    }
}

fn fmt_list<T: std::fmt::Display>(f: &mut std::fmt::Formatter<'_>, xs: &[T]) -> std::fmt::Result {
    for (i, x) in xs.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{}", x)?;
    }
    Ok(())
}

/// Young diagram with `r` distinct part sizes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    /// Strictly decreasing part sizes `m₁ > … > m_r > 0`.
    parts: Vec<u64>,
    /// Multiplicities `n₁, …, n_r > 0`.
    mults: Vec<u64>,
}

impl Partition {
    pub fn new(parts: Vec<u64>, mults: Vec<u64>) -> Result<Self> {
        if parts.is_empty() || parts.len() != mults.len() {
            return Err(Error::InvalidPartition(
                "parts and multiplicities must be nonempty and of equal length".into(),
            ));
        }
        if !parts.windows(2).all(|w| w[0] > w[1]) || parts.last() == Some(&0) {
            return Err(Error::InvalidPartition(format!(
                "part sizes must be strictly decreasing and positive: {:?}",
                parts
            )));
        }
        if mults.contains(&0) {
            return Err(Error::InvalidPartition("multiplicities must be positive".into()));
        }
        Ok(Partition { parts, mults })
    }

    pub fn parts(&self) -> &[u64] {
        &self.parts
    }

    pub fn mults(&self) -> &[u64] {
        &self.mults
    }

    pub fn depth(&self) -> usize {
        self.parts.len()
    }

    /// The partitioned number `N = Σ m_i n_i`.
    pub fn number(&self) -> u64 {
        self.parts.iter().zip(&self.mults).map(|(m, n)| m * n).sum()
    }

    /// Conjugation (reflection of the Young diagram along the diagonal):
    /// part sizes become `n₁+⋯+n_r, …, n₁` and multiplicities
    /// `m_r, m_{r-1}-m_r, …, m₁-m₂`. An involution preserving `N` and depth.
    pub fn conjugate(&self) -> Partition {
        let r = self.parts.len();
        let mut parts = Vec::with_capacity(r);
        let mut acc = 0u64;
        for &n in &self.mults {
            acc += n;
            parts.push(acc);
        }
        parts.reverse();
        let mut mults = Vec::with_capacity(r);
        for i in (0..r).rev() {
            let next = if i + 1 < r { self.parts[i + 1] } else { 0 };
            mults.push(self.parts[i] - next);
        }
        // strict decrease of `parts` and positivity of `mults` hold by
        // construction; the asserts guard against future edits
        debug_assert!(parts.windows(2).all(|w| w[0] > w[1]));
        debug_assert!(mults.iter().all(|&n| n > 0));
        Partition { parts, mults }
    }
}

impl std::fmt::Display for Partition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "(m=")?;
        fmt_list(f, &self.parts)?;
        write!(f, ", n=")?;
        fmt_list(f, &self.mults)?;
        write!(f, ")")
    }
}

/// All partitions of `n` with exactly `r` distinct part sizes.
pub fn partitions_with_depth(n: u64, r: usize) -> Vec<Partition> {
    fn rec(
        n: u64,
        pos: usize,
        m_min: u64,
        parts: &mut [u64],
        mults: &mut [u64],
        out: &mut Vec<Partition>,
    ) {
        let levels_left = pos as u64;
        let mut m = m_min;
        loop {
            // positions below `pos` need strictly larger parts, one box each
            let min_extra = levels_left * m + levels_left * (levels_left + 1) / 2;
            if m + min_extra > n {
                break;
            }
            let mut cost = m;
            let mut mult = 1u64;
            while cost + min_extra <= n {
                parts[pos] = m;
                mults[pos] = mult;
                if pos == 0 {
                    // position 0 holds the largest part, so `parts` is
                    // already strictly decreasing
                    if cost == n {
                        out.push(Partition { parts: parts.to_vec(), mults: mults.to_vec() });
                    }
                } else {
                    rec(n - cost, pos - 1, m + 1, parts, mults, out);
                }
                cost += m;
                mult += 1;
            }
            m += 1;
        }
    }

    let mut out = Vec::new();
    if r == 0 || n == 0 {
        return out;
    }
    let mut parts = vec![0u64; r];
    let mut mults = vec![0u64; r];
    rec(n, r - 1, 1, &mut parts, &mut mults, &mut out);
    out
}

/// The partition summand `f(λ) = ∏ m_i^{d_i} n_i^{k_i-1} / (k_i-1)!`.
pub fn bracket_summand(idx: &BiIndex, p: &Partition) -> Result<Rat> {
    if idx.depth() != p.depth() {
        return Err(Error::InvalidIndex(format!(
            "index depth {} does not match partition depth {}",
            idx.depth(),
            p.depth()
        )));
    }
    let mut num = Int::one();
    let mut den = Rat::one();
    for i in 0..idx.depth() {
        num *= Int::from(p.parts[i]).pow(idx.d[i]);
        num *= Int::from(p.mults[i]).pow(idx.k[i] - 1);
        den *= factorial_rat(idx.k[i] - 1);
    }
    Ok(Rat::from(num) / den)
}

struct PowTable {
    max_exp: usize,
    table: Vec<Int>,
}

impl PowTable {
    fn new(max_base: usize, max_exp: usize) -> Self {
        let mut table = Vec::with_capacity((max_base + 1) * (max_exp + 1));
        for b in 0..=max_base {
            let mut p = Int::one();
            table.push(p.clone());
            for _ in 1..=max_exp {
                p *= Int::from(b as u64);
                table.push(p.clone());
            }
        }
        PowTable { max_exp, table }
    }

    #[inline]
    fn get(&self, base: u64, exp: u32) -> &Int {
        &self.table[base as usize * (self.max_exp + 1) + exp as usize]
    }
}

/// Evaluates `g(k; d)` as a truncated q-series of the given order.
///
/// Integer numerators are accumulated over the partition enumeration (the
/// smallest part first, pruning when the minimal completion already exceeds
/// the order) and the factorial denominator is divided out once at the end.
pub fn eval_bracket(idx: &BiIndex, order: usize) -> QSeries {
    #[allow(clippy::too_many_arguments)]
    fn rec(
        idx: &BiIndex,
        pows: &PowTable,
        nums: &mut [Int],
        pos: usize,
        m_min: u64,
        used: u64,
        acc: &Int,
        order: u64,
    ) {
        let levels_left = pos as u64;
        let mut m = m_min;
        loop {
            let min_extra = levels_left * m + levels_left * (levels_left + 1) / 2;
            if used + m + min_extra > order {
                break;
            }
            let m_pow = pows.get(m, idx.d[pos]);
            let mut cost = used + m;
            let mut n = 1u64;
            while cost + min_extra <= order {
                let term = acc * m_pow * pows.get(n, idx.k[pos] - 1);
                if pos == 0 {
                    nums[cost as usize] += term;
                } else {
                    rec(idx, pows, nums, pos - 1, m + 1, cost, &term, order);
                }
                cost += m;
                n += 1;
            }
            m += 1;
        }
    }

    let r = idx.depth();
    let mut nums = vec![Int::zero(); order + 1];
    if order >= 1 {
        let max_exp = idx
            .k
            .iter()
            .map(|&k| k - 1)
            .chain(idx.d.iter().copied())
            .max()
            .unwrap() as usize;
        let pows = PowTable::new(order, max_exp);
        rec(idx, &pows, &mut nums, r - 1, 1, 0, &Int::one(), order as u64);
    }
    let denom: Rat = idx.k.iter().map(|&k| factorial_rat(k - 1)).product();
    QSeries::from_coeffs(nums.into_iter().map(|n| Rat::from(n) / denom.clone()).collect())
}

/// Evaluates `g(k; d)` by summing the summand over *conjugated* diagrams.
///
/// Conjugation is a bijection of each partition set onto itself, so this must
/// reproduce [`eval_bracket`] exactly; it serves as the brute-force oracle
/// for the partition relation in any depth.
pub fn bracket_via_conjugation(idx: &BiIndex, order: usize) -> QSeries {
    let r = idx.depth();
    let mut coeffs = vec![Rat::zero(); order + 1];
    for n in 1..=order as u64 {
        let mut acc = Rat::zero();
        for p in partitions_with_depth(n, r) {
            acc += bracket_summand(idx, &p.conjugate()).expect("depths match");
        }
        coeffs[n as usize] = acc;
    }
    QSeries::from_coeffs(coeffs)
}

/// The rational coefficients `λ^j_{k1,k2}` of the lower-weight stuffle terms:
///
/// `λ^j = ((-1)^{k1-1} C(k1+k2-1-j, k2-j) + (-1)^{k2-1} C(k1+k2-1-j, k1-j))
///        · B_{k1+k2-j}/(k1+k2-j)!`
///
/// with binomials vanishing on negative lower index.
pub fn lambda_coeff(k1: u32, k2: u32, j: u32) -> Result<Rat> {
    let kk = k1 + k2;
    if j < 1 || j > kk - 1 {
        return Err(Error::LambdaOutOfRange { k1, k2, j, max: kk - 1 });
    }
    let sign = |k: u32| if (k - 1).is_multiple_of(2) { Rat::one() } else { -Rat::one() };
    let top = i64::from(kk - 1 - j);
    let binoms = sign(k1) * binomial_rat(top, i64::from(k2) - i64::from(j))
        + sign(k2) * binomial_rat(top, i64::from(k1) - i64::from(j));
    Ok(binoms * bernoulli((kk - j) as usize) / factorial_rat(kk - j))
}

/// Finite rational linear combination of bi-indexed q-series, keyed by the
/// canonical index order; zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BracketCombo {
    terms: BTreeMap<BiIndex, Rat>,
}

impl BracketCombo {
    pub fn new() -> Self {
        BracketCombo::default()
    }

    pub fn add_term(&mut self, idx: BiIndex, coeff: Rat) -> &mut Self {
        use std::collections::btree_map::Entry;
        if !coeff.is_zero() {
            match self.terms.entry(idx) {
                Entry::Occupied(mut e) => {
                    let new = e.get() + coeff;
                    if new.is_zero() {
                        e.remove();
                    } else {
                        *e.get_mut() = new;
                    }
                }
                Entry::Vacant(e) => {
                    e.insert(coeff);
                }
            }
        }
        self
    }

    pub fn from_terms(terms: impl IntoIterator<Item = (BiIndex, Rat)>) -> Self {
        let mut combo = BracketCombo::new();
        for (idx, c) in terms {
            combo.add_term(idx, c);
        }
        combo
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.add_term(idx.clone(), c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return BracketCombo::new();
        }
        BracketCombo {
            terms: self.terms.iter().map(|(i, a)| (i.clone(), a * c)).collect(),
        }
    }

    pub fn coeff(&self, idx: &BiIndex) -> Rat {
        self.terms.get(idx).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&BiIndex, &Rat)> {
        self.terms.iter()
    }

    /// Evaluates the combination as a truncated q-series.
    pub fn eval(&self, order: usize) -> QSeries {
        let mut acc = QSeries::zero(order);
        for (idx, c) in &self.terms {
            acc = acc.add(&eval_bracket(idx, order).scale(c));
        }
        acc
    }

    /// As [`BracketCombo::eval`], reusing previously evaluated indices.
    pub fn eval_cached(&self, cache: &mut EvalCache) -> QSeries {
        let mut acc = QSeries::zero(cache.order);
        for (idx, c) in &self.terms {
            acc = acc.add(&cache.eval(idx).scale(c));
        }
        acc
    }

    /// `{"terms": [{"k": [...], "d": [...], "coeff": "p/q"}, ...]}`
    pub fn to_json(&self) -> Value {
        json!({
            "terms": self
                .terms
                .iter()
                .map(|(idx, c)| json!({"k": idx.k(), "d": idx.d(), "coeff": format_rat(c)}))
                .collect::<Vec<_>>(),
        })
    }
}

impl std::fmt::Display for BracketCombo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (idx, c) in &self.terms {
            let lead = first;
            first = false;
            if !lead {
                f.write_str(if c.is_negative() { " - " } else { " + " })?;
            }
            let a = if lead || !c.is_negative() { c.clone() } else { -c.clone() };
            if !a.is_one() {
                write!(f, "{}*", a)?;
            }
            write!(f, "{}", idx)?;
        }
        Ok(())
    }
}

/// Memoizing evaluator for bracket series at a fixed order.
pub struct EvalCache {
    order: usize,
    map: HashMap<BiIndex, QSeries>,
}

impl EvalCache {
    pub fn new(order: usize) -> Self {
        EvalCache { order, map: HashMap::new() }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn eval(&mut self, idx: &BiIndex) -> QSeries {
        if let Some(s) = self.map.get(idx) {
            return s.clone();
        }
        let s = eval_bracket(idx, self.order);
        self.map.insert(idx.clone(), s.clone());
        s
    }
}

/// Stuffle expansion of `g(k1;d1) g(k2;d2)`:
/// `g(k1,k2;d1,d2) + g(k2,k1;d2,d1) + g(k1+k2;d1+d2) + Σ_j λ^j_{k1,k2} g(j;d1+d2)`.
pub fn expand_stuffle(k1: u32, d1: u32, k2: u32, d2: u32) -> BracketCombo {
    assert!(k1 >= 1 && k2 >= 1);
    let mut combo = BracketCombo::new();
    combo.add_term(BiIndex::pair(k1, k2, d1, d2), Rat::one());
    combo.add_term(BiIndex::pair(k2, k1, d2, d1), Rat::one());
    combo.add_term(BiIndex::single(k1 + k2, d1 + d2), Rat::one());
    for j in 1..=(k1 + k2 - 1) {
        let lambda = lambda_coeff(k1, k2, j).expect("j in range");
        combo.add_term(BiIndex::single(j, d1 + d2), lambda);
    }
    combo
}

/// Closed-form partition relation for depth one and two.
///
/// Depth one: `g(k;d) = d!/(k-1)! g(d+1;k-1)`. Depth two is the double sum
/// over `0 <= a <= d1`, `0 <= b <= k2-1` with coefficient
/// `(-1)^b/(a! b!) · d1!/(k1-1)! · (d2+a)!/(k2-1-b)!` on
/// `g(d2+1+a, d1+1-a; k2-1-b, k1-1+b)`. Applying the relation twice gives
/// back the original index. Higher depths are served by the brute-force
/// conjugation oracle instead.
pub fn expand_partition_relation(idx: &BiIndex) -> Result<BracketCombo> {
    let mut combo = BracketCombo::new();
    match idx.depth() {
        1 => {
            let (k, d) = (idx.k()[0], idx.d()[0]);
            combo.add_term(
                BiIndex::single(d + 1, k - 1),
                factorial_rat(d) / factorial_rat(k - 1),
            );
        }
        2 => {
            let (k1, k2) = (idx.k()[0], idx.k()[1]);
            let (d1, d2) = (idx.d()[0], idx.d()[1]);
            for a in 0..=d1 {
                for b in 0..=(k2 - 1) {
                    let sign = if b % 2 == 0 { Rat::one() } else { -Rat::one() };
                    let coeff = sign / (factorial_rat(a) * factorial_rat(b))
                        * (factorial_rat(d1) / factorial_rat(k1 - 1))
                        * (factorial_rat(d2 + a) / factorial_rat(k2 - 1 - b));
                    combo.add_term(
                        BiIndex::pair(d2 + 1 + a, d1 + 1 - a, k2 - 1 - b, k1 - 1 + b),
                        coeff,
                    );
                }
            }
        }
        r => return Err(Error::DepthUnsupported(r)),
    }
    Ok(combo)
}

/// Applies the closed-form partition relation to every term of a combination.
pub fn expand_partition_relation_combo(combo: &BracketCombo) -> Result<BracketCombo> {
    let mut out = BracketCombo::new();
    for (idx, c) in combo.iter() {
        out = out.add(&expand_partition_relation(idx)?.scale(c));
    }
    Ok(out)
}

/// Shuffle expansion of `g(k1;d1) g(k2;d2)`: the `(l1,l2,e1,e2)` double sum
/// with binomial/sign coefficients, the derivative-index term
/// `d1! d2!/(d1+d2+1)! C(k1+k2-2,k1-1) g(k1+k2-1;d1+d2+1)`, and the
/// lower-weight tail driven by `λ^j_{d1+1,d2+1}`.
pub fn expand_shuffle(k1: u32, d1: u32, k2: u32, d2: u32) -> BracketCombo {
    assert!(k1 >= 1 && k2 >= 1);
    let mut combo = BracketCombo::new();
    let ksum = k1 + k2;
    let dsum = d1 + d2;
    let sign = |e: i64| if e % 2 == 0 { Rat::one() } else { -Rat::one() };
    for l1 in 1..=(ksum - 1) {
        let l2 = ksum - l1;
        for e1 in 0..=dsum {
            let e2 = dsum - e1;
            let c = binomial_rat(i64::from(l1) - 1, i64::from(k1) - 1)
                * binomial_rat(i64::from(d1), i64::from(e1))
                * sign(i64::from(d1) - i64::from(e1))
                + binomial_rat(i64::from(l1) - 1, i64::from(k2) - 1)
                    * binomial_rat(i64::from(d2), i64::from(e1))
                    * sign(i64::from(d2) - i64::from(e1));
            combo.add_term(BiIndex::pair(l1, l2, e1, e2), c);
        }
    }
    let front = binomial_rat(i64::from(ksum) - 2, i64::from(k1) - 1);
    combo.add_term(
        BiIndex::single(ksum - 1, dsum + 1),
        factorial_rat(d1) * factorial_rat(d2) / factorial_rat(dsum + 1) * front.clone(),
    );
    let tail_front = factorial_rat(d1) * factorial_rat(d2) * front;
    for j in 1..=(dsum + 1) {
        let lambda = lambda_coeff(d1 + 1, d2 + 1, j).expect("j in range");
        combo.add_term(
            BiIndex::single(ksum - 1, j - 1),
            tail_front.clone() * lambda / factorial_rat(j - 1),
        );
    }
    combo
}

/// Derivative formula: `q d/dq g(k;d) = Σ_j k_j g(…,k_j+1,…; …,d_j+1,…)`.
pub fn qderiv_bracket(idx: &BiIndex) -> BracketCombo {
    let mut combo = BracketCombo::new();
    for j in 0..idx.depth() {
        let mut k = idx.k().to_vec();
        let mut d = idx.d().to_vec();
        let kj = k[j];
        k[j] += 1;
        d[j] += 1;
        combo.add_term(
            BiIndex::new(k, d).expect("still valid"),
            Rat::from(Int::from(kj)),
        );
    }
    combo
}

/// Left-hand side of a bracket identity: either a product of two evaluations
/// or a linear combination.
#[derive(Debug, Clone)]
pub enum BracketSide {
    Product(BiIndex, BiIndex),
    Combo(BracketCombo),
}

impl BracketSide {
    pub fn eval(&self, cache: &mut EvalCache) -> QSeries {
        match self {
            BracketSide::Product(a, b) => cache.eval(a).mul(&cache.eval(b)),
            BracketSide::Combo(c) => c.eval_cached(cache),
        }
    }
}

/// Evaluates both sides to the given order and reports equality or the first
/// discrepant coefficient. Falsification is a report, not an error.
pub fn verify_bracket_identity(lhs: &BracketSide, rhs: &BracketCombo, order: usize) -> Agreement {
    let mut cache = EvalCache::new(order);
    let l = lhs.eval(&mut cache);
    let r = rhs.eval_cached(&mut cache);
    l.agreement(&r)
}
