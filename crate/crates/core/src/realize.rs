//! Realizations of the formal double Eisenstein space.
//!
//! Two families of power series satisfy the defining double-shuffle
//! equations:
//!
//! - the *Bernoulli realization* `𝔟₁, 𝔟₂` over ℚ, built from the
//!   pole-cancelled coth expansion `-1/2 Σ B_{2n}/(2n)! (X^{2n-1} + Y^{2n-1})`;
//! - the *Eisenstein realization* `𝔈₁ = 𝔟₁ + 𝔤₁` and `𝔈₂` over truncated
//!   q-series, whose coefficients are the combinatorial multiple Eisenstein
//!   series. It sends `G(k;0)` to `G̃_k` and `P(k₁,k₂;0,0)` to the literal
//!   product `G̃_{k₁} G̃_{k₂}`, which is what turns span certificates into
//!   identities among quasi-modular forms.
//!
//! The verifier functions re-derive every defining equation coefficientwise
//! and report the first mismatch, if any.

use num::{One, Zero};
use serde_json::{json, Value};

use crate::brackets::{eval_bracket, BiIndex};
use crate::error::Error;
use crate::exact::{bernoulli, factorial_rat};
use crate::formal::{FormalSymbol, FormalVec};
use crate::mseries::{promote, x1, x2, y1, y2, MSeries, MsCheck, VarPair};
use crate::qseries::{eisenstein_gtilde, Agreement, QSeries};
use crate::rational::{rat, Rat};
use crate::Result;

/// `𝔟₁(X;Y) = -1/2 Σ_{n≥1} B_{2n}/(2n)! (X^{2n-1} + Y^{2n-1})`, stored on
/// the `(X₁, Y₁)` coordinates. Symmetric under `X ↔ Y`.
pub fn b1_series(bound: usize) -> MSeries<Rat> {
    let mut s = MSeries::new(bound);
    let mut n = 1usize;
    while 2 * n - 1 <= bound {
        let c = -bernoulli(2 * n) / factorial_rat(2 * n as u32) / rat(2, 1);
        s.add_term(crate::mseries::Expo([(2 * n - 1) as u16, 0, 0, 0]), c.clone());
        s.add_term(crate::mseries::Expo([0, 0, (2 * n - 1) as u16, 0]), c);
        n += 1;
    }
    s
}

/// `R*_𝔟`: divided difference of `𝔟₁` in the first variable,
/// `(𝔟₁(X₁;Y₁+Y₂) - 𝔟₁(X₂;Y₁+Y₂)) / (X₁-X₂)`.
fn rstar_base(b1: &MSeries<Rat>) -> MSeries<Rat> {
    let at_x1 = b1.substitute(&[x1(), x2(), y1() + y2(), y2()]);
    let at_x2 = b1.substitute(&[x2(), x2(), y1() + y2(), y2()]);
    at_x1.sub(&at_x2).divided_difference(VarPair::X1X2).expect("vanishes on the diagonal")
}

/// `R⧢_𝔟`: divided difference of `𝔟₁` in the second variable,
/// `(𝔟₁(X₁+X₂;Y₁) - 𝔟₁(X₁+X₂;Y₂)) / (Y₁-Y₂)`.
fn rsh_base(b1: &MSeries<Rat>) -> MSeries<Rat> {
    let at_y1 = b1.substitute(&[x1() + x2(), x2(), y1(), y2()]);
    let at_y2 = b1.substitute(&[x1() + x2(), x2(), y2(), y2()]);
    at_y1.sub(&at_y2).divided_difference(VarPair::Y1Y2).expect("vanishes on the diagonal")
}

/// The depth-two series `𝔟₂` of the Bernoulli realization: the fixed
/// eight-term combination of `𝔓_𝔟 = 𝔟₁𝔟₁`, `R*_𝔟` and `R⧢_𝔟` under
/// argument substitutions.
pub fn b2_series(bound: usize) -> MSeries<Rat> {
    let b1 = b1_series(bound + 1);
    let p_b = b1.mul(&b1.substitute(&[x2(), x2(), y2(), y2()]));
    let rstar = rstar_base(&b1);
    let rsh = rsh_base(&b1);

    let mut out = p_b.scale(&rat(1, 3)).truncate(bound);
    out = out.add(
        &p_b.substitute(&[x1() - x2(), x2(), y1(), y1() + y2()])
            .scale(&rat(1, 3))
            .truncate(bound),
    );
    out = out.add(&rsh.substitute(&[x1() - x2(), x2(), y1(), y1() + y2()]).scale(&rat(-5, 12)));
    out = out.add(&rsh.substitute(&[-x2(), x1(), -y2(), y1()]).scale(&rat(-1, 12)));
    out = out.add(&rsh.substitute(&[x2() - x1(), x1(), y2(), y1() + y2()]).scale(&rat(1, 4)));
    out = out.add(&rstar.scale(&rat(-5, 12)));
    out = out.add(&rstar.substitute(&[x2() - x1(), x2(), -y1(), y1() + y2()]).scale(&rat(-1, 12)));
    out = out.add(&rstar.substitute(&[x1() - x2(), x1(), -y2(), y1() + y2()]).scale(&rat(1, 4)));
    out
}

/// Generating series `𝔤₁` of the depth-one q-series: the coefficient of
/// `X^{k-1} Y^d/d!` is `g(k;d)` evaluated to the given q-order.
pub fn g1_series(bound: usize, order: usize) -> MSeries<QSeries> {
    let mut s = MSeries::new(bound);
    for k in 1..=(bound as u32 + 1) {
        for d in 0..=(bound as u32 + 1 - k) {
            let coeff = eval_bracket(&BiIndex::single(k, d), order)
                .scale(&(Rat::one() / factorial_rat(d)));
            s.add_term(crate::mseries::Expo([(k - 1) as u16, 0, d as u16, 0]), coeff);
        }
    }
    s
}

/// Generating series `𝔤₂` of the depth-two q-series.
pub fn g2_series(bound: usize, order: usize) -> MSeries<QSeries> {
    let mut s = MSeries::new(bound);
    for total in 0..=bound as u32 {
        for a1 in 0..=total {
            for a2 in 0..=(total - a1) {
                for b1 in 0..=(total - a1 - a2) {
                    let b2 = total - a1 - a2 - b1;
                    let idx = BiIndex::pair(a1 + 1, a2 + 1, b1, b2);
                    let coeff = eval_bracket(&idx, order)
                        .scale(&(Rat::one() / (factorial_rat(b1) * factorial_rat(b2))));
                    s.add_term(
                        crate::mseries::Expo([a1 as u16, a2 as u16, b1 as u16, b2 as u16]),
                        coeff,
                    );
                }
            }
        }
    }
    s
}

/// `𝔈₁ = 𝔟₁ + 𝔤₁`.
pub fn e1_series(bound: usize, order: usize) -> MSeries<QSeries> {
    promote(&b1_series(bound), order).add(&g1_series(bound, order))
}

/// The Bernoulli and Eisenstein realization tables at a fixed generating
/// degree bound and q-order.
pub struct RealizationTable {
    bound: usize,
    order: usize,
    pub b1: MSeries<Rat>,
    pub b2: MSeries<Rat>,
    pub e1: MSeries<QSeries>,
    pub e2: MSeries<QSeries>,
}

impl RealizationTable {
    /// Builds `𝔟₁, 𝔟₂, 𝔈₁, 𝔈₂`, with
    /// `𝔈₂ = 𝔟₂ - 𝔟₁(X₁-X₂;Y₂)𝔤₁(X₁;Y₁+Y₂) - ½𝔤₁(X₁;Y₁+Y₂)
    ///        + 𝔟₁(X₂;Y₂)𝔤₁(X₁;Y₁) + 𝔟₁(X₁-X₂;Y₁)𝔤₁(X₂;Y₁+Y₂) + 𝔤₂`.
    pub fn build(bound: usize, order: usize) -> Self {
        let b1 = b1_series(bound);
        let b2 = b2_series(bound);
        let g1 = g1_series(bound, order);
        let g2 = g2_series(bound, order);
        let e1 = promote(&b1, order).add(&g1);

        let g1_x1_ysum = g1.substitute(&[x1(), x2(), y1() + y2(), y2()]);
        let g1_x2_ysum = g1.substitute(&[x2(), x2(), y1() + y2(), y2()]);
        let b1_diff_y2 = promote(&b1.substitute(&[x1() - x2(), x2(), y2(), y2()]), order);
        let b1_x2_y2 = promote(&b1.substitute(&[x2(), x2(), y2(), y2()]), order);
        let b1_diff_y1 = promote(&b1.substitute(&[x1() - x2(), x2(), y1(), y2()]), order);

        let e2 = promote(&b2, order)
            .sub(&b1_diff_y2.mul(&g1_x1_ysum))
            .sub(&g1_x1_ysum.scale(&rat(1, 2)))
            .add(&b1_x2_y2.mul(&g1))
            .add(&b1_diff_y1.mul(&g1_x2_ysum))
            .add(&g2);

        RealizationTable { bound, order, b1, b2, e1, e2 }
    }

    pub fn bound(&self) -> usize {
        self.bound
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn e1_coeff(&self, k: u32, d: u32) -> Result<QSeries> {
        Ok(self
            .e1
            .coeff_single(k, d)?
            .unwrap_or_else(|| QSeries::zero(self.order)))
    }

    /// Image of a formal vector under the Eisenstein realization: `G(k;d)`
    /// reads off `𝔈₁`, `G(k₁,k₂;d₁,d₂)` reads off `𝔈₂`, and
    /// `P(k₁,k₂;d₁,d₂)` is the product of the two `𝔈₁` coefficients
    /// (the realization of the product symbol is the literal product).
    pub fn realize(&self, v: &FormalVec) -> Result<QSeries> {
        let mut acc = QSeries::zero(self.order);
        for (s, c) in v.iter() {
            let image = match *s {
                FormalSymbol::G1 { k, d } => self.e1_coeff(k, d)?,
                FormalSymbol::G2 { k1, k2, d1, d2 } => self
                    .e2
                    .coeff_bi(k1, k2, d1, d2)?
                    .unwrap_or_else(|| QSeries::zero(self.order)),
                FormalSymbol::P { k1, k2, d1, d2 } => {
                    self.e1_coeff(k1, d1)?.mul(&self.e1_coeff(k2, d2)?)
                }
                other => return Err(Error::UnsupportedSymbol(other.to_string())),
            };
            acc = acc.add(&image.scale(c));
        }
        Ok(acc)
    }
}

/// Realizes a vector of depth-one `G` and product `P` symbols through a
/// standalone `𝔈₁` table. Depth-two `G` symbols are rejected: those need the
/// full `𝔈₂` table of [`RealizationTable`].
pub fn realize_depth_one(v: &FormalVec, e1: &MSeries<QSeries>, order: usize) -> Result<QSeries> {
    let coeff = |k: u32, d: u32| -> Result<QSeries> {
        Ok(e1.coeff_single(k, d)?.unwrap_or_else(|| QSeries::zero(order)))
    };
    let mut acc = QSeries::zero(order);
    for (s, c) in v.iter() {
        let image = match *s {
            FormalSymbol::G1 { k, d } => coeff(k, d)?,
            FormalSymbol::P { k1, k2, d1, d2 } => coeff(k1, d1)?.mul(&coeff(k2, d2)?),
            other => return Err(Error::UnsupportedSymbol(other.to_string())),
        };
        acc = acc.add(&image.scale(c));
    }
    Ok(acc)
}

/// Image of a formal vector under the Bernoulli realization (coefficients of
/// `𝔟₁, 𝔟₂` and products thereof). The tables are small, so they are built
/// on the fly at the bound the vector needs.
pub fn realize_bernoulli(v: &FormalVec) -> Result<Rat> {
    let weight = match v.weight() {
        None => return Ok(Rat::zero()),
        Some(w) => w,
    };
    let bound = weight as usize;
    let b1 = b1_series(bound);
    let b2 = b2_series(bound);
    let coeff1 = |k: u32, d: u32| -> Result<Rat> {
        Ok(b1.coeff_single(k, d)?.unwrap_or_else(Rat::zero))
    };
    let mut acc = Rat::zero();
    for (s, c) in v.iter() {
        let image = match *s {
            FormalSymbol::G1 { k, d } => coeff1(k, d)?,
            FormalSymbol::G2 { k1, k2, d1, d2 } => {
                b2.coeff_bi(k1, k2, d1, d2)?.unwrap_or_else(Rat::zero)
            }
            FormalSymbol::P { k1, k2, d1, d2 } => coeff1(k1, d1)? * coeff1(k2, d2)?,
            other => return Err(Error::UnsupportedSymbol(other.to_string())),
        };
        acc += image * c;
    }
    Ok(acc)
}

/// Report of the two double-shuffle lines for a realization.
#[derive(Debug, Clone)]
pub struct DoubleShuffleReport {
    pub line_stuffle: MsCheck,
    pub line_shuffle: MsCheck,
}

impl DoubleShuffleReport {
    pub fn ok(&self) -> bool {
        self.line_stuffle.ok() && self.line_shuffle.ok()
    }

    pub fn to_json(&self) -> Value {
        let line = |c: &MsCheck| match &c.first_mismatch {
            None => json!({"ok": true, "degree": c.bound}),
            Some(d) => json!({
                "ok": false,
                "degree": c.bound,
                "monomial": d.monomial.to_string(),
                "lhs": d.lhs,
                "rhs": d.rhs,
            }),
        };
        json!({
            "ok": self.ok(),
            "stuffle_line": line(&self.line_stuffle),
            "shuffle_line": line(&self.line_shuffle),
        })
    }
}

/// Checks both lines of the defining equations for the Bernoulli realization
/// as exact polynomial identities to the given total degree.
pub fn verify_betadsh(degree: usize) -> DoubleShuffleReport {
    let b1 = b1_series(degree + 1);
    let p_b = b1.mul(&b1.substitute(&[x2(), x2(), y2(), y2()])).truncate(degree);
    let b2 = b2_series(degree);
    let rstar = rstar_base(&b1);
    let rsh = rsh_base(&b1);

    let line_a = b2
        .add(&b2.substitute(&[x2(), x1(), y2(), y1()]))
        .add(&rstar);
    let line_b = b2
        .substitute(&[x1() + x2(), x2(), y1(), y2() - y1()])
        .add(&b2.substitute(&[x1() + x2(), x1(), y2(), y1() - y2()]))
        .add(&rsh);

    DoubleShuffleReport {
        line_stuffle: p_b.difference_report(&line_a),
        line_shuffle: p_b.difference_report(&line_b),
    }
}

/// Checks both lines of the double-shuffle equations for the Eisenstein
/// realization, exactly, to the given generating degree and q-order.
pub fn verify_eisenstein(degree: usize, order: usize) -> DoubleShuffleReport {
    let t = RealizationTable::build(degree + 1, order);
    let p_e = t.e1.mul(&t.e1.substitute(&[x2(), x2(), y2(), y2()]));

    let e1_x1_ysum = t.e1.substitute(&[x1(), x2(), y1() + y2(), y2()]);
    let e1_x2_ysum = t.e1.substitute(&[x2(), x2(), y1() + y2(), y2()]);
    let dd_x = e1_x1_ysum
        .sub(&e1_x2_ysum)
        .divided_difference(VarPair::X1X2)
        .expect("vanishes on the diagonal");
    let line_a = t
        .e2
        .add(&t.e2.substitute(&[x2(), x1(), y2(), y1()]))
        .add(&dd_x);

    let e1_sum_y1 = t.e1.substitute(&[x1() + x2(), x2(), y1(), y2()]);
    let e1_sum_y2 = t.e1.substitute(&[x1() + x2(), x2(), y2(), y2()]);
    let dd_y = e1_sum_y1
        .sub(&e1_sum_y2)
        .divided_difference(VarPair::Y1Y2)
        .expect("vanishes on the diagonal");
    let line_b = t
        .e2
        .substitute(&[x1() + x2(), x2(), y1(), y2() - y1()])
        .add(&t.e2.substitute(&[x1() + x2(), x1(), y2(), y1() - y2()]))
        .add(&dd_y);

    DoubleShuffleReport {
        line_stuffle: p_e.truncate(degree).difference_report(&line_a),
        line_shuffle: p_e.truncate(degree).difference_report(&line_b),
    }
}

/// Report of the three generating-series relations of `𝔤₁, 𝔤₂`.
#[derive(Debug, Clone)]
pub struct LemmaReport {
    pub stuffle: MsCheck,
    pub partition_depth1: MsCheck,
    pub partition_depth2: MsCheck,
    pub shuffle: MsCheck,
}

impl LemmaReport {
    pub fn ok(&self) -> bool {
        self.stuffle.ok()
            && self.partition_depth1.ok()
            && self.partition_depth2.ok()
            && self.shuffle.ok()
    }

    pub fn to_json(&self) -> Value {
        let line = |c: &MsCheck| match &c.first_mismatch {
            None => json!({"ok": true, "degree": c.bound}),
            Some(d) => json!({
                "ok": false,
                "degree": c.bound,
                "monomial": d.monomial.to_string(),
                "lhs": d.lhs,
                "rhs": d.rhs,
            }),
        };
        json!({
            "ok": self.ok(),
            "stuffle": line(&self.stuffle),
            "partition_depth1": line(&self.partition_depth1),
            "partition_depth2": line(&self.partition_depth2),
            "shuffle": line(&self.shuffle),
        })
    }
}

/// Checks the stuffle, partition and shuffle relations of the generating
/// series `𝔤₁, 𝔤₂` (with their `𝔟₁` correction terms) coefficientwise.
pub fn verify_lemma(degree: usize, order: usize) -> LemmaReport {
    let ib = degree + 1;
    let b1 = b1_series(ib);
    let g1 = g1_series(ib, order);
    let g2 = g2_series(ib, order);

    let lhs = g1.mul(&g1.substitute(&[x2(), x2(), y2(), y2()]));

    // stuffle: g2(X1,X2;Y1,Y2) + g2(X2,X1;Y2,Y1) + DD_X
    //   + (b1(X2-X1;Y1+Y2) - b1(X1-X2;Y1+Y2)) (g1(X1;Y1+Y2) - g1(X2;Y1+Y2))
    //   - 1/2 (g1(X1;Y1+Y2) + g1(X2;Y1+Y2))
    let g1_x1 = g1.substitute(&[x1(), x2(), y1() + y2(), y2()]);
    let g1_x2 = g1.substitute(&[x2(), x2(), y1() + y2(), y2()]);
    let g1_diff = g1_x1.sub(&g1_x2);
    let dd_x = g1_diff.divided_difference(VarPair::X1X2).expect("diagonal");
    let b1_corr = promote(
        &b1.substitute(&[x2() - x1(), x2(), y1() + y2(), y2()])
            .sub(&b1.substitute(&[x1() - x2(), x2(), y1() + y2(), y2()])),
        order,
    );
    let stuffle_rhs = g2
        .add(&g2.substitute(&[x2(), x1(), y2(), y1()]))
        .add(&dd_x)
        .add(&b1_corr.mul(&g1_diff))
        .sub(&g1_x1.add(&g1_x2).scale(&rat(1, 2)));
    let stuffle = lhs.truncate(degree).difference_report(&stuffle_rhs);

    // partition: g1(X1;Y1) = g1(Y1;X1), g2(X1,X2;Y1,Y2) = g2(Y1+Y2,Y1;X2,X1-X2)
    let partition_depth1 = g1.difference_report(&g1.substitute(&[y1(), x2(), x1(), y2()]));
    let partition_depth2 =
        g2.difference_report(&g2.substitute(&[y1() + y2(), y1(), x2(), x1() - x2()]));

    // shuffle: g2(X1+X2,X1;Y2,Y1-Y2) + g2(X1+X2,X2;Y1,Y2-Y1) + DD_Y
    //   + (b1(Y2-Y1;X1+X2) - b1(Y1-Y2;X1+X2)) (g1(X1+X2;Y1) - g1(X1+X2;Y2))
    //   - 1/2 (g1(X1+X2;Y1) + g1(X1+X2;Y2))
    let g1_y1 = g1.substitute(&[x1() + x2(), x2(), y1(), y2()]);
    let g1_y2 = g1.substitute(&[x1() + x2(), x2(), y2(), y2()]);
    let g1_ydiff = g1_y1.sub(&g1_y2);
    let dd_y = g1_ydiff.divided_difference(VarPair::Y1Y2).expect("diagonal");
    let b1_ycorr = promote(
        &b1.substitute(&[y2() - y1(), x2(), x1() + x2(), y2()])
            .sub(&b1.substitute(&[y1() - y2(), x2(), x1() + x2(), y2()])),
        order,
    );
    let shuffle_rhs = g2
        .substitute(&[x1() + x2(), x1(), y2(), y1() - y2()])
        .add(&g2.substitute(&[x1() + x2(), x2(), y1(), y2() - y1()]))
        .add(&dd_y)
        .add(&b1_ycorr.mul(&g1_ydiff))
        .sub(&g1_y1.add(&g1_y2).scale(&rat(1, 2)));
    let shuffle = lhs.truncate(degree).difference_report(&shuffle_rhs);

    LemmaReport { stuffle, partition_depth1, partition_depth2, shuffle }
}

/// One realization-image case: the `𝔈₁` coefficient at `(k;d)` against
/// `(k-d-1)!/(k-1)! (q d/dq)^d G̃_{k-d}`.
#[derive(Debug, Clone)]
pub struct ImageCase {
    pub k: u32,
    pub d: u32,
    pub agreement: Agreement,
}

/// Report for [`verify_realization_images`].
#[derive(Debug, Clone)]
pub struct ImagesReport {
    pub order: usize,
    pub cases: Vec<ImageCase>,
}

impl ImagesReport {
    pub fn ok(&self) -> bool {
        self.cases.iter().all(|c| c.agreement.ok())
    }

    pub fn to_json(&self) -> Value {
        json!({
            "ok": self.ok(),
            "order": self.order,
            "cases": self.cases.iter().map(|c| json!({
                "k": c.k,
                "d": c.d,
                "ok": c.agreement.ok(),
                "first_discrepancy": c.agreement.first_discrepancy.as_ref().map(|(n, _, _)| n),
            })).collect::<Vec<_>>(),
        })
    }
}

/// Verifies `𝔈₁`-coefficient(k,d) `= (k-d-1)!/(k-1)! (q d/dq)^d G̃_{k-d}`
/// for all `k <= kmax`, `d <= dmax`, `d < k`, exactly to the given q-order.
pub fn verify_realization_images(kmax: u32, dmax: u32, order: usize) -> ImagesReport {
    let dcap = dmax.min(kmax.saturating_sub(1));
    let bound = (kmax - 1 + dcap) as usize;
    let e1 = e1_series(bound, order);
    let mut cases = Vec::new();
    for k in 1..=kmax {
        for d in 0..=dmax.min(k - 1) {
            let lhs = e1
                .coeff_single(k, d)
                .expect("within bound")
                .unwrap_or_else(|| QSeries::zero(order));
            let scale = factorial_rat(k - d - 1) / factorial_rat(k - 1);
            let rhs = eisenstein_gtilde((k - d) as usize, order)
                .q_derivative_n(d as usize)
                .scale(&scale);
            cases.push(ImageCase { k, d, agreement: lhs.agreement(&rhs) });
        }
    }
    ImagesReport { order, cases }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formal::{NamedIdentity, ProductKind, RelationSet};
    use crate::mseries::Expo;
    use crate::rational::rat_int;

    #[test]
    fn b1_known_coefficients() {
        let b1 = b1_series(8);
        assert_eq!(b1.coeff_single(2, 0).unwrap(), Some(rat(-1, 24)));
        assert_eq!(b1.coeff_single(1, 0).unwrap(), None);
        assert_eq!(b1.coeff_single(4, 0).unwrap(), Some(rat(1, 1440)));
        assert_eq!(b1.coeff_single(6, 0).unwrap(), Some(rat(-1, 60480)));
        assert_eq!(b1.coeff_single(3, 0).unwrap(), None);
    }

    #[test]
    fn b1_is_symmetric() {
        let b1 = b1_series(9);
        let swapped = b1.substitute(&[y1(), x2(), x1(), y2()]);
        assert!(b1.difference_report(&swapped).ok());
    }

    /// Independent oracle: expand -1/4 (coth(X/2) + coth(Y/2)) + 1/2 (1/X + 1/Y)
    /// from scratch, dividing truncated univariate series, and compare.
    #[test]
    fn b1_matches_coth_expansion_oracle() {
        const N: usize = 13;
        // c(x) := coth(x/2) - 2/x as a power series: (cosh(x/2) - (2/x) sinh(x/2)) / sinh(x/2)
        // computed via the even/odd series s(x) = sinh(x/2)/(x/2), c(x) = cosh(x/2).
        let term = |i: u32, half_pow: u32| {
            // x^i coefficient of (x/2)^i / i!
            Rat::one() / factorial_rat(i) / Rat::from(crate::rational::Int::from(2).pow(half_pow))
        };
        let mut sinh_over = vec![Rat::zero(); N + 1]; // sinh(x/2)/(x/2)
        let mut cosh = vec![Rat::zero(); N + 1];
        for i in 0..=N as u32 {
            if i % 2 == 0 {
                // (x/2)^{i+1}/(i+1)! divided by (x/2) -> x^i / (2^i (i+1)!)
                sinh_over[i as usize] = term(i, i) / factorial_rat(i + 1) * factorial_rat(i);
                cosh[i as usize] = term(i, i);
            }
        }
        // invert sinh_over (constant term 1)
        let mut inv = vec![Rat::zero(); N + 1];
        inv[0] = Rat::one();
        for n in 1..=N {
            let mut acc = Rat::zero();
            for i in 1..=n {
                acc += &sinh_over[i] * &inv[n - i];
            }
            inv[n] = -acc;
        }
        // coth(x/2) = cosh(x/2) / sinh(x/2) = (2/x) * cosh / sinh_over
        // so coth(x/2) - 2/x = (2/x)(cosh/sinh_over - 1); expand cosh*inv - 1
        let mut ratio = vec![Rat::zero(); N + 1];
        for n in 0..=N {
            let mut acc = Rat::zero();
            for i in 0..=n {
                acc += &cosh[i] * &inv[n - i];
            }
            ratio[n] = acc;
        }
        ratio[0] -= Rat::one();
        // c_j := coefficient of x^j in coth(x/2) - 2/x  = 2 * ratio[j+1]
        let b1 = b1_series(N - 1);
        for j in 1..N {
            let expect = -rat(1, 4) * rat_int(2) * &ratio[j + 1];
            let got = b1
                .get(&Expo([j as u16, 0, 0, 0]))
                .cloned()
                .unwrap_or_else(Rat::zero);
            assert_eq!(got, expect, "X^{}", j);
        }
    }

    #[test]
    fn p_b_square_coefficient() {
        let b1 = b1_series(4);
        let p_b = b1.mul(&b1.substitute(&[x2(), x2(), y2(), y2()]));
        // product of two -1/24 coefficients at X1 X2
        assert_eq!(p_b.get(&Expo([1, 1, 0, 0])), Some(&rat(1, 576)));
        assert_eq!(p_b.coeff_bi(2, 2, 0, 0).unwrap(), Some(rat(1, 576)));
    }

    #[test]
    fn betadsh_low_degree() {
        let report = verify_betadsh(10);
        assert!(report.ok(), "{:?}", report);
    }

    #[test]
    fn g_series_coefficients() {
        let g1 = g1_series(3, 4);
        let c = g1.coeff_single(2, 0).unwrap().unwrap();
        assert_eq!(c.coeffs()[1..], [1, 3, 4, 7].map(rat_int));

        let g2 = g2_series(2, 5);
        let c = g2.coeff_bi(1, 1, 0, 0).unwrap().unwrap();
        assert_eq!(
            c.coeffs(),
            &[rat_int(0), rat_int(0), rat_int(0), rat_int(1), rat_int(2), rat_int(5)]
        );
    }

    #[test]
    fn g1_is_symmetric() {
        let g1 = g1_series(5, 15);
        let swapped = g1.substitute(&[y1(), x2(), x1(), y2()]);
        assert!(g1.difference_report(&swapped).ok());
    }

    #[test]
    fn lemma_low_degree() {
        let report = verify_lemma(4, 12);
        assert!(report.ok(), "{:?}", report);
    }

    #[test]
    fn lemma_degree_six() {
        let report = verify_lemma(6, 30);
        assert!(report.ok(), "{:?}", report);
    }

    #[test]
    fn e1_is_symmetric() {
        let e1 = e1_series(6, 12);
        let swapped = e1.substitute(&[y1(), x2(), x1(), y2()]);
        assert!(e1.difference_report(&swapped).ok());
    }

    /// Sign-exactness of substituted divided differences: the occurrence
    /// R⧢(-X2, X1; -Y2, Y1) inside `𝔟₂` must satisfy
    /// (C - E) * R⧢(A,B;C,E) = 𝔟₁(A+B;C) - 𝔟₁(A+B;E) with
    /// (A,B,C,E) = (-X2, X1, -Y2, Y1), checked multiplicatively.
    #[test]
    fn substituted_divided_difference_is_sign_exact() {
        let bound = 5;
        let b1 = b1_series(bound + 1);
        let rsh = rsh_base(&b1).substitute(&[-x2(), x1(), -y2(), y1()]);
        // C - E = -Y2 - Y1
        let mut c_minus_e = MSeries::new(bound);
        c_minus_e.add_term(Expo([0, 0, 0, 1]), rat_int(-1));
        c_minus_e.add_term(Expo([0, 0, 1, 0]), rat_int(-1));
        let lhs = c_minus_e.mul(&rsh);
        // A + B = X1 - X2
        let direct = b1
            .substitute(&[x1() - x2(), x2(), -y2(), y2()])
            .sub(&b1.substitute(&[x1() - x2(), x2(), y1(), y2()]));
        assert!(lhs.difference_report(&direct.truncate(bound - 1)).ok());
    }

    #[test]
    fn eisenstein_theorem_low_degree() {
        let report = verify_eisenstein(4, 12);
        assert!(report.ok(), "{:?}", report);
    }

    #[test]
    fn e1_realizes_eisenstein_series() {
        let t = RealizationTable::build(4, 10);
        let g1 = FormalVec::from_terms([(FormalSymbol::G1 { k: 2, d: 0 }, Rat::one())]);
        let image = t.realize(&g1).unwrap();
        assert!(image.agreement(&eisenstein_gtilde(2, 10)).ok());

        let g4 = FormalVec::from_terms([(FormalSymbol::G1 { k: 4, d: 0 }, Rat::one())]);
        let image = t.realize(&g4).unwrap();
        assert!(image.agreement(&eisenstein_gtilde(4, 10)).ok());
    }

    #[test]
    fn p_realizes_as_product() {
        let t = RealizationTable::build(7, 10);
        let p44 = FormalVec::from_terms([(
            FormalSymbol::P { k1: 4, k2: 4, d1: 0, d2: 0 },
            Rat::one(),
        )]);
        let image = t.realize(&p44).unwrap();
        assert_eq!(image.coeff(0), &rat(1, 2073600));
        let direct = eisenstein_gtilde(4, 10);
        assert!(image.agreement(&direct.mul(&direct)).ok());
    }

    #[test]
    fn ramanujan_weight_four_realizes_to_zero() {
        let t = RealizationTable::build(3, 30);
        let v = NamedIdentity::Ramanujan2.vector();
        assert!(t.realize(&v).unwrap().is_zero());
    }

    #[test]
    fn realize_rejects_dz_symbols() {
        let t = RealizationTable::build(2, 4);
        let v = FormalVec::from_terms([(FormalSymbol::Z { k: 2 }, Rat::one())]);
        assert!(matches!(t.realize(&v), Err(Error::UnsupportedSymbol(_))));
    }

    #[test]
    fn realize_out_of_bounds() {
        let t = RealizationTable::build(2, 4);
        let v = FormalVec::from_terms([(FormalSymbol::G1 { k: 9, d: 0 }, Rat::one())]);
        assert!(matches!(t.realize(&v), Err(Error::CoefficientOutOfBounds { .. })));
    }

    #[test]
    fn bernoulli_realization_kills_relations() {
        for weight in 2..=6u32 {
            let set = RelationSet::build(weight);
            for g in set.generators() {
                let image = realize_bernoulli(&g.vector).unwrap();
                assert!(
                    image.is_zero(),
                    "weight {} {} ({},{};{},{}) -> {}",
                    weight,
                    g.kind.name(),
                    g.k1,
                    g.k2,
                    g.d1,
                    g.d2,
                    image
                );
            }
        }
    }

    #[test]
    fn eisenstein_realization_kills_relations_small() {
        let t = RealizationTable::build(4, 15);
        for weight in 2..=5u32 {
            let set = RelationSet::build(weight);
            for g in set.generators() {
                let image = t.realize(&g.vector).unwrap();
                assert!(image.is_zero(), "weight {} {:?}", weight, g.kind);
            }
        }
        // a single stuffle relation spelled out, as a sanity anchor
        let rel = crate::formal::de_relation(ProductKind::Stuffle, 2, 1, 0, 0);
        assert!(t.realize(&rel).unwrap().is_zero());
    }

    #[test]
    fn images_small() {
        let report = verify_realization_images(5, 4, 20);
        assert!(report.ok(), "{:?}", report);
        // k cases for each k = 1..5
        assert_eq!(report.cases.len(), 15);
    }
}
