//! Total-degree-truncated power series in `X₁, X₂, Y₁, Y₂`.
//!
//! An [`MSeries`] is a sparse map from exponent 4-tuples to coefficients in a
//! pluggable ring `C` (exact rationals, truncated q-series, or formal
//! vectors), known modulo total degree `> bound`. Linear substitution and the
//! divided differences `(f(X₁) - f(X₂))/(X₁ - X₂)` (and its `Y` twin) are the
//! two operators the generating-series identities are built from.
//!
//! Two-variable series are stored as 4-variable series supported on the
//! relevant coordinates; one representation serves everything.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use num::{One, Zero};

use crate::error::Error;
use crate::exact::factorial_rat;
use crate::qseries::QSeries;
use crate::rational::Rat;
use crate::Result;

/// Coefficient ring: the module operations needed by every series.
pub trait Coeff: Clone + std::fmt::Display {
    fn add_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    fn scale_rat(&self, c: &Rat) -> Self;
    fn is_zero_coeff(&self) -> bool;
}

/// Coefficient rings with multiplication (needed for series products).
pub trait CoeffMul: Coeff {
    fn mul_ref(&self, other: &Self) -> Self;
}

impl Coeff for Rat {
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn scale_rat(&self, c: &Rat) -> Self {
        self * c
    }
    fn is_zero_coeff(&self) -> bool {
        self.is_zero()
    }
}

impl CoeffMul for Rat {
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
}

impl Coeff for QSeries {
    fn add_ref(&self, other: &Self) -> Self {
        self.add(other)
    }
    fn neg_ref(&self) -> Self {
        self.neg()
    }
    fn scale_rat(&self, c: &Rat) -> Self {
        self.scale(c)
    }
    fn is_zero_coeff(&self) -> bool {
        self.is_zero()
    }
}

impl CoeffMul for QSeries {
    fn mul_ref(&self, other: &Self) -> Self {
        self.mul(other)
    }
}

/// Exponent 4-tuple `(X₁^a₁ X₂^a₂ Y₁^b₁ Y₂^b₂)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expo(pub [u16; 4]);

impl Expo {
    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }
}

impl std::fmt::Display for Expo {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        const NAMES: [&str; 4] = ["X1", "X2", "Y1", "Y2"];
        let mut printed = false;
        for (name, &e) in NAMES.iter().zip(&self.0) {
            if e > 0 {
                if printed {
                    write!(f, "*")?;
                }
                printed = true;
                if e == 1 {
                    write!(f, "{}", name)?;
                } else {
                    write!(f, "{}^{}", name, e)?;
                }
            }
        }
        if !printed {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Variable pair for divided differences.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarPair {
    X1X2,
    Y1Y2,
}

impl VarPair {
    fn indices(self) -> (usize, usize) {
        match self {
            VarPair::X1X2 => (0, 1),
            VarPair::Y1Y2 => (2, 3),
        }
    }

    fn label(self) -> &'static str {
        match self {
            VarPair::X1X2 => "X1 = X2",
            VarPair::Y1Y2 => "Y1 = Y2",
        }
    }
}

/// Homogeneous linear form in `X₁, X₂, Y₁, Y₂` with integer coefficients.
///
/// Substitutions are built from these, so they are degree-preserving by
/// construction; a non-homogeneous substitution cannot be expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LinearForm(pub [i64; 4]);

/// The variable `X₁` as a linear form.
pub fn x1() -> LinearForm {
    LinearForm([1, 0, 0, 0])
}

/// The variable `X₂` as a linear form.
pub fn x2() -> LinearForm {
    LinearForm([0, 1, 0, 0])
}

/// The variable `Y₁` as a linear form.
pub fn y1() -> LinearForm {
    LinearForm([0, 0, 1, 0])
}

/// The variable `Y₂` as a linear form.
pub fn y2() -> LinearForm {
    LinearForm([0, 0, 0, 1])
}

impl Add for LinearForm {
    type Output = LinearForm;
    fn add(self, rhs: LinearForm) -> LinearForm {
        LinearForm([
            self.0[0] + rhs.0[0],
            self.0[1] + rhs.0[1],
            self.0[2] + rhs.0[2],
            self.0[3] + rhs.0[3],
        ])
    }
}

impl Sub for LinearForm {
    type Output = LinearForm;
    fn sub(self, rhs: LinearForm) -> LinearForm {
        self + (-rhs)
    }
}

impl Neg for LinearForm {
    type Output = LinearForm;
    fn neg(self) -> LinearForm {
        LinearForm([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

/// A substitution: the images of `X₁, X₂, Y₁, Y₂` in that order.
pub type Subst = [LinearForm; 4];

/// The identity substitution.
pub fn identity_subst() -> Subst {
    [x1(), x2(), y1(), y2()]
}

/// Sparse truncated power series over `C`, known modulo total degree `> bound`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MSeries<C> {
    bound: usize,
    terms: BTreeMap<Expo, C>,
}

impl<C: Coeff> MSeries<C> {
    pub fn new(bound: usize) -> Self {
        MSeries { bound, terms: BTreeMap::new() }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Expo, &C)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn get(&self, e: &Expo) -> Option<&C> {
        self.terms.get(e)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.values().all(Coeff::is_zero_coeff)
    }

    /// Adds `c · monomial`, dropping the term if it exceeds the bound or
    /// cancels to zero.
    pub fn add_term(&mut self, e: Expo, c: C) -> &mut Self {
        if e.degree() > self.bound || c.is_zero_coeff() {
            return self;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Occupied(mut entry) => {
                let new = entry.get().add_ref(&c);
                if new.is_zero_coeff() {
                    entry.remove();
                } else {
                    *entry.get_mut() = new;
                }
            }
            Entry::Vacant(entry) => {
                entry.insert(c);
            }
        }
        self
    }

    /// Restricts to a smaller degree bound.
    pub fn truncate(&self, bound: usize) -> Self {
        let bound = bound.min(self.bound);
        MSeries {
            bound,
            terms: self
                .terms
                .iter()
                .filter(|(e, _)| e.degree() <= bound)
                .map(|(e, c)| (*e, c.clone()))
                .collect(),
        }
    }

    /// Sum at the minimum of the two bounds.
    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.truncate(other.bound);
        for (e, c) in &other.terms {
            out.add_term(*e, c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        MSeries {
            bound: self.bound,
            terms: self.terms.iter().map(|(e, c)| (*e, c.neg_ref())).collect(),
        }
    }

    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return MSeries::new(self.bound);
        }
        MSeries {
            bound: self.bound,
            terms: self.terms.iter().map(|(e, a)| (*e, a.scale_rat(c))).collect(),
        }
    }

    /// Applies a linear substitution, exactly, at the same bound.
    pub fn substitute(&self, map: &Subst) -> Self {
        // powers of each image form, computed once up to the needed exponent
        let mut max_exp = [0usize; 4];
        for e in self.terms.keys() {
            for (m, &x) in max_exp.iter_mut().zip(&e.0) {
                *m = (*m).max(x as usize);
            }
        }
        let pow_tables: Vec<Vec<MSeries<Rat>>> = (0..4)
            .map(|v| {
                let base = expand_form(&map[v], self.bound);
                let mut pows = Vec::with_capacity(max_exp[v] + 1);
                pows.push(ms_one(self.bound));
                for e in 1..=max_exp[v] {
                    let next = pows[e - 1].mul(&base);
                    pows.push(next);
                }
                pows
            })
            .collect();

        let mut out = MSeries::new(self.bound);
        for (e, c) in &self.terms {
            let mut poly = pow_tables[0][e.0[0] as usize].clone();
            for v in 1..4 {
                if e.0[v] > 0 {
                    poly = poly.mul(&pow_tables[v][e.0[v] as usize]);
                }
            }
            for (m, r) in &poly.terms {
                out.add_term(*m, c.scale_rat(r));
            }
        }
        out
    }

    /// Exact quotient by `X₁ - X₂` (or `Y₁ - Y₂`).
    ///
    /// Requires the input to vanish under the diagonal substitution
    /// `X₂ ↦ X₁`; anything else signals a malformed identity and is
    /// rejected. The result carries bound `bound - 1`.
    pub fn divided_difference(&self, pair: VarPair) -> Result<Self> {
        let (v1, v2) = pair.indices();
        let mut diag = identity_subst();
        diag[v2] = diag[v1];
        if !self.substitute(&diag).is_zero() {
            return Err(Error::NotAntisymmetric(pair.label()));
        }
        let mut out = MSeries::new(self.bound.saturating_sub(1));
        for (e, c) in &self.terms {
            let a = e.0[v1];
            // monomials with no v1-power are cancelled by the diagonal
            // condition and contribute nothing to the quotient
            for i in 0..a {
                let mut m = e.0;
                m[v1] = i;
                m[v2] = e.0[v2] + a - 1 - i;
                out.add_term(Expo(m), c.clone());
            }
        }
        Ok(out)
    }

    /// Raw coefficient of `X₁^{k₁-1} X₂^{k₂-1} Y₁^{d₁} Y₂^{d₂}`.
    pub fn coeff_raw(&self, k1: u32, k2: u32, d1: u32, d2: u32) -> Result<Option<&C>> {
        assert!(k1 >= 1 && k2 >= 1);
        let e = Expo([(k1 - 1) as u16, (k2 - 1) as u16, d1 as u16, d2 as u16]);
        if e.degree() > self.bound {
            return Err(Error::CoefficientOutOfBounds { k1, k2, d1, d2, bound: self.bound });
        }
        Ok(self.terms.get(&e))
    }

    /// Object-level coefficient at a depth-two index: the raw coefficient
    /// times `d₁! d₂!` (restoring the factorials of the generating-series
    /// convention). `None` means the coefficient is zero.
    pub fn coeff_bi(&self, k1: u32, k2: u32, d1: u32, d2: u32) -> Result<Option<C>> {
        let scale = factorial_rat(d1) * factorial_rat(d2);
        Ok(self.coeff_raw(k1, k2, d1, d2)?.map(|c| c.scale_rat(&scale)))
    }

    /// Object-level coefficient at a depth-one index `(k; d)` for series
    /// supported on `(X₁, Y₁)`: the raw coefficient times `d!`.
    pub fn coeff_single(&self, k: u32, d: u32) -> Result<Option<C>> {
        assert!(k >= 1);
        let e = Expo([(k - 1) as u16, 0, d as u16, 0]);
        if e.degree() > self.bound {
            return Err(Error::CoefficientOutOfBounds { k1: k, k2: 1, d1: d, d2: 0, bound: self.bound });
        }
        let scale = factorial_rat(d);
        Ok(self.terms.get(&e).map(|c| c.scale_rat(&scale)))
    }

    /// Debug dump: monomial → rendered coefficient.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "bound": self.bound,
            "terms": self
                .terms
                .iter()
                .map(|(e, c)| serde_json::json!([e.to_string(), c.to_string()]))
                .collect::<Vec<_>>(),
        })
    }

    /// Compares up to the common bound, reporting the first differing
    /// monomial.
    pub fn difference_report(&self, other: &Self) -> MsCheck {
        let bound = self.bound.min(other.bound);
        let keys: std::collections::BTreeSet<Expo> = self
            .terms
            .keys()
            .chain(other.terms.keys())
            .filter(|e| e.degree() <= bound)
            .copied()
            .collect();
        for e in keys {
            let zero_ok = |c: Option<&C>| c.is_none_or(Coeff::is_zero_coeff);
            let (a, b) = (self.terms.get(&e), other.terms.get(&e));
            let equal = match (a, b) {
                (None, c) | (c, None) => zero_ok(c),
                (Some(a), Some(b)) => a.add_ref(&b.neg_ref()).is_zero_coeff(),
            };
            if !equal {
                let show = |c: Option<&C>| c.map_or_else(|| "0".to_string(), |c| c.to_string());
                return MsCheck {
                    bound,
                    first_mismatch: Some(MonomialDiff {
                        monomial: e,
                        lhs: show(a),
                        rhs: show(b),
                    }),
                };
            }
        }
        MsCheck { bound, first_mismatch: None }
    }
}

impl<C: CoeffMul> MSeries<C> {
    /// Truncated product at the minimum of the two bounds.
    pub fn mul(&self, other: &Self) -> Self {
        let bound = self.bound.min(other.bound);
        let mut out = MSeries::new(bound);
        for (ea, ca) in &self.terms {
            let da = ea.degree();
            if da > bound {
                continue;
            }
            for (eb, cb) in &other.terms {
                if da + eb.degree() > bound {
                    continue;
                }
                let e = Expo([
                    ea.0[0] + eb.0[0],
                    ea.0[1] + eb.0[1],
                    ea.0[2] + eb.0[2],
                    ea.0[3] + eb.0[3],
                ]);
                out.add_term(e, ca.mul_ref(cb));
            }
        }
        out
    }
}

/// Mismatch report for a multiseries comparison.
#[derive(Debug, Clone)]
pub struct MsCheck {
    pub bound: usize,
    pub first_mismatch: Option<MonomialDiff>,
}

#[derive(Debug, Clone)]
pub struct MonomialDiff {
    pub monomial: Expo,
    pub lhs: String,
    pub rhs: String,
}

impl MsCheck {
    pub fn ok(&self) -> bool {
        self.first_mismatch.is_none()
    }
}

/// A linear form as a degree-one rational series.
fn expand_form(form: &LinearForm, bound: usize) -> MSeries<Rat> {
    let mut s = MSeries::new(bound);
    for (v, &c) in form.0.iter().enumerate() {
        if c != 0 && bound >= 1 {
            let mut e = [0u16; 4];
            e[v] = 1;
            s.add_term(Expo(e), Rat::from(crate::rational::Int::from(c)));
        }
    }
    s
}

/// The constant series 1 over ℚ.
pub fn ms_one(bound: usize) -> MSeries<Rat> {
    let mut s = MSeries::new(bound);
    s.add_term(Expo([0; 4]), Rat::one());
    s
}

/// Embeds a rational series into a q-series-coefficient series; rational
/// constants become constant q-series of the given order.
pub fn promote(ms: &MSeries<Rat>, order: usize) -> MSeries<QSeries> {
    let mut out = MSeries::new(ms.bound());
    for (e, c) in ms.terms() {
        out.add_term(*e, QSeries::constant(c.clone(), order));
    }
    out
}
