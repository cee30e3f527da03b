//! Multivariate polynomials with exact rational coefficients.

use super::vars::tables_compatible;
use super::{Mono, Rat, VarTable};
use num::{BigInt, Signed, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// A polynomial over a shared [`VarTable`], stored as a sorted term map with
/// no zero coefficients. If the table adjoins branch symbols, polynomials are
/// kept reduced: every power of a branch symbol at or above its relation
/// degree is rewritten through the relation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    table: Arc<VarTable>,
    terms: BTreeMap<Mono, Rat>,
}

fn insert_term(terms: &mut BTreeMap<Mono, Rat>, mono: Mono, coeff: Rat) {
    if coeff.is_zero() {
        return;
    }
    use std::collections::btree_map::Entry;
    match terms.entry(mono) {
        Entry::Vacant(e) => {
            e.insert(coeff);
        }
        Entry::Occupied(mut e) => {
            let sum = e.get() + &coeff;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

/// Rewrite powers of branch symbols through their relations until every
/// exponent is below the relation degree.
fn reduce_branches(terms: &mut BTreeMap<Mono, Rat>, table: &VarTable) {
    if !table.has_branches() {
        return;
    }
    loop {
        let mut hit: Option<(Mono, usize)> = None;
        'scan: for m in terms.keys() {
            for b in table.branches() {
                if m.get(b.var) >= b.degree {
                    hit = Some((m.clone(), b.var));
                    break 'scan;
                }
            }
        }
        let Some((m, var)) = hit else { break };
        let c = terms.remove(&m).expect("term vanished during reduction");
        let rel = table.branch_for(var).expect("relation vanished");
        // s^e = s^(e-degree) * Σ_i lower[i] s^i
        let base = m.with_exp(var, m.get(var) - rel.degree);
        for (i, coeff_terms) in rel.lower.iter().enumerate() {
            let power = Mono::var_pow(m.len(), var, i as u16);
            for (lm, lc) in coeff_terms {
                insert_term(terms, base.mul(lm).mul(&power), &c * lc);
            }
        }
    }
}

impl Poly {
    // ---- constructors ----

    /// The zero polynomial.
    pub fn zero(table: &Arc<VarTable>) -> Self {
        Poly {
            table: table.clone(),
            terms: BTreeMap::new(),
        }
    }

    /// The constant polynomial `1`.
    pub fn one(table: &Arc<VarTable>) -> Self {
        Self::constant(table, Rat::from_integer(1.into()))
    }

    /// A constant polynomial.
    pub fn constant(table: &Arc<VarTable>, c: Rat) -> Self {
        let mut terms = BTreeMap::new();
        insert_term(&mut terms, Mono::one(table.len()), c);
        Poly {
            table: table.clone(),
            terms,
        }
    }

    /// An integer constant polynomial.
    pub fn int(table: &Arc<VarTable>, n: i64) -> Self {
        Self::constant(table, Rat::from_integer(n.into()))
    }

    /// The generator `x_i`.
    pub fn var(table: &Arc<VarTable>, i: usize) -> Self {
        assert!(i < table.len(), "generator index out of range");
        let mut terms = BTreeMap::new();
        insert_term(
            &mut terms,
            Mono::var(table.len(), i),
            Rat::from_integer(1.into()),
        );
        Poly {
            table: table.clone(),
            terms,
        }
    }

    /// Build from explicit terms (duplicates are summed, zeros dropped,
    /// branch powers reduced).
    pub fn from_terms(table: &Arc<VarTable>, it: impl IntoIterator<Item = (Mono, Rat)>) -> Self {
        let mut terms = BTreeMap::new();
        for (m, c) in it {
            assert_eq!(m.len(), table.len(), "monomial length mismatch");
            insert_term(&mut terms, m, c);
        }
        reduce_branches(&mut terms, table);
        Poly {
            table: table.clone(),
            terms,
        }
    }

    // ---- inspection ----

    /// The table this polynomial lives on.
    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    /// True if `self` lives on a table compatible with `t`.
    pub fn table_matches(&self, t: &Arc<VarTable>) -> bool {
        tables_compatible(&self.table, t)
    }

    /// Sorted term iterator (ascending graded-lex).
    pub fn terms(&self) -> impl Iterator<Item = (&Mono, &Rat)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// True if this is the zero polynomial.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True if this is the constant `1`.
    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .iter()
                .next()
                .map(|(m, c)| m.is_one() && c == &Rat::from_integer(1.into()))
                .unwrap_or(false)
    }

    /// The constant value if the polynomial is constant (zero counts as 0).
    pub fn as_constant(&self) -> Option<Rat> {
        match self.terms.len() {
            0 => Some(Rat::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// Coefficient of a monomial (zero if absent).
    pub fn coeff(&self, m: &Mono) -> Rat {
        self.terms.get(m).cloned().unwrap_or_else(Rat::zero)
    }

    /// The graded-lex leading term.
    pub fn leading(&self) -> Option<(&Mono, &Rat)> {
        self.terms.iter().next_back()
    }

    /// Largest exponent of generator `v` appearing in any term.
    pub fn degree_in(&self, v: usize) -> u16 {
        self.terms.keys().map(|m| m.get(v)).max().unwrap_or(0)
    }

    /// True if generator `v` appears in some term.
    pub fn mentions(&self, v: usize) -> bool {
        self.terms.keys().any(|m| m.get(v) > 0)
    }

    /// True if any branch symbol of the table appears.
    pub fn mentions_branch(&self) -> bool {
        self.table
            .branches()
            .iter()
            .any(|b| self.mentions(b.var))
    }

    /// Total degree (max over terms), or `None` for the zero polynomial.
    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.total()).max()
    }

    /// Weighted degree under the table's grading if the polynomial is
    /// homogeneous; `Some(0)` for zero; `None` if terms have mixed weights.
    pub fn homogeneous_weight(&self) -> Option<i64> {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Some(0);
        };
        let w = first.weighted(self.table.weights());
        for m in it {
            if m.weighted(self.table.weights()) != w {
                return None;
            }
        }
        Some(w)
    }

    // ---- arithmetic ----

    fn assert_compat(&self, other: &Poly) {
        assert!(
            tables_compatible(&self.table, &other.table),
            "polynomial tables are incompatible"
        );
    }

    /// Sum.
    pub fn add(&self, other: &Poly) -> Poly {
        self.assert_compat(other);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            insert_term(&mut terms, m.clone(), c.clone());
        }
        Poly {
            table: self.table.clone(),
            terms,
        }
    }

    /// Difference.
    pub fn sub(&self, other: &Poly) -> Poly {
        self.assert_compat(other);
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            insert_term(&mut terms, m.clone(), -c.clone());
        }
        Poly {
            table: self.table.clone(),
            terms,
        }
    }

    /// Negation.
    pub fn neg(&self) -> Poly {
        Poly {
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    /// Product (reduces branch powers).
    pub fn mul(&self, other: &Poly) -> Poly {
        self.assert_compat(other);
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                insert_term(&mut terms, m1.mul(m2), c1 * c2);
            }
        }
        reduce_branches(&mut terms, &self.table);
        Poly {
            table: self.table.clone(),
            terms,
        }
    }

    /// Scale by a rational constant.
    pub fn scale(&self, c: &Rat) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.table);
        }
        Poly {
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    /// Multiply by a single monomial (reduces branch powers).
    pub fn mul_mono(&self, m: &Mono, c: &Rat) -> Poly {
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            insert_term(&mut terms, m1.mul(m), c1 * c);
        }
        reduce_branches(&mut terms, &self.table);
        Poly {
            table: self.table.clone(),
            terms,
        }
    }

    /// Power by repeated squaring.
    pub fn pow(&self, e: u32) -> Poly {
        let mut result = Poly::one(&self.table);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    /// Partial derivative with respect to generator `v`.
    pub fn derivative(&self, v: usize) -> Poly {
        let mut terms = BTreeMap::new();
        for (m, c) in &self.terms {
            let e = m.get(v);
            if e > 0 {
                insert_term(
                    &mut terms,
                    m.with_exp(v, e - 1),
                    c * Rat::from_integer(BigInt::from(e)),
                );
            }
        }
        Poly {
            table: self.table.clone(),
            terms,
        }
    }

    /// Substitute a polynomial (on the same table) for generator `v`.
    pub fn substitute_var(&self, v: usize, value: &Poly) -> Poly {
        self.assert_compat(value);
        let mut out = Poly::zero(&self.table);
        for (m, c) in &self.terms {
            let e = m.get(v);
            let rest = m.with_exp(v, 0);
            let mut t = value.pow(e as u32);
            t = t.mul_mono(&rest, c);
            out = out.add(&t);
        }
        out
    }

    /// Exact division. Returns `None` when `d` does not divide `self`.
    /// Requires a branch-free divisor on a branch-free dividend.
    pub fn exact_div(&self, d: &Poly) -> Option<Poly> {
        self.assert_compat(d);
        assert!(
            !d.mentions_branch() && !self.mentions_branch(),
            "exact division is only defined for branch-free polynomials"
        );
        if d.is_zero() {
            return None;
        }
        if self.is_zero() {
            return Some(Poly::zero(&self.table));
        }
        let (dm, dc) = d.leading().unwrap();
        let mut rem = self.clone();
        let mut quo = BTreeMap::new();
        while let Some((rm, rc)) = rem.leading() {
            let qm = rm.try_div(dm)?;
            let qc = rc / dc;
            insert_term(&mut quo, qm.clone(), qc.clone());
            rem = rem.sub(&d.mul_mono(&qm, &qc));
        }
        Some(Poly {
            table: self.table.clone(),
            terms: quo,
        })
    }

    /// Rational content: the positive rational `c` such that `self / c` has
    /// coprime integer coefficients; carries the sign of the leading term.
    /// Zero polynomial has content 0.
    pub fn content(&self) -> Rat {
        if self.is_zero() {
            return Rat::zero();
        }
        let mut num_gcd = BigInt::zero();
        let mut den_lcm = BigInt::from(1);
        for c in self.terms.values() {
            num_gcd = num::integer::gcd(num_gcd, c.numer().abs());
            den_lcm = num::integer::lcm(den_lcm, c.denom().clone());
        }
        let mut content = Rat::new(num_gcd, den_lcm);
        if self.leading().map(|(_, c)| c.is_negative()).unwrap_or(false) {
            content = -content;
        }
        content
    }

    /// `self / content()`: integer coefficients, gcd 1, positive leading
    /// coefficient. Zero stays zero.
    pub fn primitive_part(&self) -> Poly {
        let c = self.content();
        if c.is_zero() {
            return self.clone();
        }
        self.scale(&c.recip())
    }

    /// Largest monomial dividing every term (trivial for zero).
    pub fn monomial_content(&self) -> Mono {
        let mut it = self.terms.keys();
        let Some(first) = it.next() else {
            return Mono::one(self.table.len());
        };
        let mut g = first.clone();
        for m in it {
            g = g.gcd(m);
            if g.is_one() {
                break;
            }
        }
        g
    }

    /// Divide out a monomial known to divide every term.
    pub fn div_mono(&self, m: &Mono) -> Poly {
        Poly {
            table: self.table.clone(),
            terms: self
                .terms
                .iter()
                .map(|(t, c)| {
                    (
                        t.try_div(m).expect("monomial does not divide every term"),
                        c.clone(),
                    )
                })
                .collect(),
        }
    }

    /// Collect coefficients by the power of generator `v`, as branch-free
    /// polynomials not mentioning `v`. Index `i` holds the coefficient of
    /// `v^i`; the vector has length `degree_in(v) + 1` (empty for zero).
    pub fn coeffs_in(&self, v: usize) -> Vec<Poly> {
        if self.is_zero() {
            return Vec::new();
        }
        let deg = self.degree_in(v) as usize;
        let mut out = vec![Poly::zero(&self.table); deg + 1];
        for (m, c) in &self.terms {
            let e = m.get(v) as usize;
            insert_term(&mut out[e].terms, m.with_exp(v, 0), c.clone());
        }
        out
    }

    /// Reassemble from coefficients-by-power of generator `v`.
    pub fn from_coeffs_in(table: &Arc<VarTable>, v: usize, coeffs: &[Poly]) -> Poly {
        let mut out = Poly::zero(table);
        for (e, c) in coeffs.iter().enumerate() {
            let m = Mono::var_pow(table.len(), v, e as u16);
            out = out.add(&c.mul_mono(&m, &Rat::from_integer(1.into())));
        }
        out
    }

    /// Evaluate at rational values for all generators.
    pub fn eval_rat(&self, values: &[Rat]) -> Rat {
        assert_eq!(values.len(), self.table.len());
        let mut acc = Rat::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (i, &e) in m.0.iter().enumerate() {
                for _ in 0..e {
                    t *= &values[i];
                }
            }
            acc += t;
        }
        acc
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let one = Rat::from_integer(1.into());
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative();
            if k == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let abs = if neg { -c.clone() } else { c.clone() };
            let show_coeff = abs != one || m.is_one();
            if show_coeff {
                write!(f, "{abs}")?;
            }
            let mut first_factor = !show_coeff;
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                if !first_factor || show_coeff {
                    write!(f, "*")?;
                }
                first_factor = false;
                write!(f, "{}", self.table.name(i))?;
                if e > 1 {
                    write!(f, "^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rat, rat_int};
    use super::*;

    fn table2() -> Arc<VarTable> {
        VarTable::new(&[("l1", 1), ("l2", 1)])
    }

    #[test]
    fn arithmetic_basics() {
        let t = table2();
        let l1 = Poly::var(&t, 0);
        let l2 = Poly::var(&t, 1);
        // (l1 + l2)(l1 - l2) = l1^2 - l2^2
        let p = l1.add(&l2).mul(&l1.sub(&l2));
        let q = l1.mul(&l1).sub(&l2.mul(&l2));
        assert_eq!(p, q);
        assert_eq!(p.to_string(), "l1^2 - l2^2");
    }

    #[test]
    fn exact_division_and_failure() {
        let t = table2();
        let l1 = Poly::var(&t, 0);
        let l2 = Poly::var(&t, 1);
        let diff = l1.sub(&l2);
        let prod = l1.pow(2).sub(&l2.pow(2));
        assert_eq!(prod.exact_div(&diff), Some(l1.add(&l2)));
        assert_eq!(prod.exact_div(&l1), None);
    }

    #[test]
    fn derivative_and_substitute() {
        let t = table2();
        let l1 = Poly::var(&t, 0);
        let l2 = Poly::var(&t, 1);
        // d/dl1 (l1^3 l2) = 3 l1^2 l2
        let p = l1.pow(3).mul(&l2);
        assert_eq!(p.derivative(0), l1.pow(2).mul(&l2).scale(&rat_int(3)));
        // substitute l1 := l2 + 1 into l1^2: l2^2 + 2 l2 + 1
        let shifted = l1.pow(2).substitute_var(0, &l2.add(&Poly::one(&t)));
        let expect = l2.pow(2).add(&l2.scale(&rat_int(2))).add(&Poly::one(&t));
        assert_eq!(shifted, expect);
    }

    #[test]
    fn content_and_primitive() {
        let t = table2();
        let l1 = Poly::var(&t, 0);
        let l2 = Poly::var(&t, 1);
        // 2/3 l1 - 2 l2: graded-lex leading term is the l1 term, so the
        // content carries its (positive) sign: content 2/3.
        let p = l1.scale(&rat(2, 3)).sub(&l2.scale(&rat_int(2)));
        assert_eq!(p.content(), rat(2, 3));
        assert_eq!(p.primitive_part(), l1.sub(&l2.scale(&rat_int(3))));
    }

    #[test]
    fn branch_reduction_quadratic() {
        // Table (l1, l2, qv, s) with s^2 = (l1+l2) s - l1 l2 + qv:
        // the two roots of (x - l1)(x - l2) = qv.
        let base = VarTable::new(&[("l1", 1), ("l2", 1), ("qv", 2), ("s", 1)]);
        let l1 = Poly::var(&base, 0);
        let l2 = Poly::var(&base, 1);
        let qv = Poly::var(&base, 2);
        let c0 = qv.sub(&l1.mul(&l2)); // -l1 l2 + qv
        let c1 = l1.add(&l2); // l1 + l2
        let t = VarTable::with_branch(&base, 3, 2, &[c0, c1]).unwrap();
        let s = Poly::var(&t, 3);
        let expect = Poly::var(&t, 0)
            .add(&Poly::var(&t, 1))
            .mul(&s)
            .add(&Poly::var(&t, 2))
            .sub(&Poly::var(&t, 0).mul(&Poly::var(&t, 1)));
        assert_eq!(s.mul(&s), expect);
        // s^3 reduces too, and (s - l1)(s - l2) = qv exactly.
        let check = s.sub(&Poly::var(&t, 0)).mul(&s.sub(&Poly::var(&t, 1)));
        assert_eq!(check, Poly::var(&t, 2));
    }
}
