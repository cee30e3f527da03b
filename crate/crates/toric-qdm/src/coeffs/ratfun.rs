//! The fraction field of the scalar polynomial ring, in canonical form.

use super::{poly_gcd, Mono, Poly, Rat, VarTable};
use crate::error::{Error, Result};
use num::{One, Zero};
use std::fmt;
use std::sync::Arc;

/// A rational function `num / den` over a shared [`VarTable`], kept in a
/// unique canonical form:
///
/// - the denominator is nonzero, branch-free, primitive (coprime integer
///   coefficients) and has positive graded-lex leading coefficient;
/// - numerator and denominator share no polynomial factor (for numerators
///   mentioning a branch symbol, no factor common to all branch strata);
/// - zero is `0 / 1`.
///
/// Denominators that mention an adjoined branch symbol are rationalized away
/// on construction (multiplying through by a suitable cofactor computed with
/// the extended Euclidean algorithm modulo the branch relation), so division
/// by any invertible element of a branch extension works transparently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFun {
    num: Poly,
    den: Poly,
}

impl RatFun {
    // ---- constructors ----

    /// Build `num / den` in canonical form. Fails with `DivisionByZero` when
    /// `den` is zero or a zero divisor of a branch extension.
    pub fn new(num: Poly, den: Poly) -> Result<Self> {
        let mut num = num;
        let mut den = den;
        // Rationalize branch symbols out of the denominator, one at a time.
        while den.mentions_branch() {
            let var = den
                .table()
                .branches()
                .iter()
                .map(|b| b.var)
                .filter(|&v| den.mentions(v))
                .max()
                .expect("branch mention vanished");
            let (cofactor, cleared) = invert_carrier(&den, var)?;
            num = num.mul(&cofactor);
            den = cleared;
        }
        if den.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(Self::normalize(num, den))
    }

    /// Canonicalize with a denominator already known nonzero and branch-free.
    fn normalize(num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero() && !den.mentions_branch());
        if num.is_zero() {
            return RatFun {
                num,
                den: Poly::one(den.table()),
            };
        }
        // Cancel the common polynomial factor. For a numerator mentioning
        // branch symbols, cancel the gcd of all its branch strata with den.
        let g = gcd_mixed(&num, &den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (
                exact_div_branch(&num, &g),
                den.exact_div(&g).expect("gcd must divide denominator"),
            )
        };
        Self::normalize_coprime(num, den)
    }

    /// Canonicalize a fraction already in lowest terms: only rescale so the
    /// denominator is primitive with positive graded-lex leading coefficient,
    /// pushing the scale into the numerator.
    fn normalize_coprime(num: Poly, den: Poly) -> Self {
        debug_assert!(!den.is_zero() && !den.mentions_branch());
        if num.is_zero() {
            return RatFun {
                num,
                den: Poly::one(den.table()),
            };
        }
        let c = den.content();
        if c.is_one() {
            return RatFun { num, den };
        }
        let inv = c.recip();
        RatFun {
            num: num.scale(&inv),
            den: den.scale(&inv),
        }
    }

    /// The zero function.
    pub fn zero(table: &Arc<VarTable>) -> Self {
        RatFun {
            num: Poly::zero(table),
            den: Poly::one(table),
        }
    }

    /// The constant `1`.
    pub fn one(table: &Arc<VarTable>) -> Self {
        Self::from_poly(Poly::one(table))
    }

    /// A rational constant.
    pub fn constant(table: &Arc<VarTable>, c: Rat) -> Self {
        Self::from_poly(Poly::constant(table, c))
    }

    /// An integer constant.
    pub fn int(table: &Arc<VarTable>, n: i64) -> Self {
        Self::from_poly(Poly::int(table, n))
    }

    /// The generator `x_i`.
    pub fn var(table: &Arc<VarTable>, i: usize) -> Self {
        Self::from_poly(Poly::var(table, i))
    }

    /// A polynomial as a rational function.
    pub fn from_poly(p: Poly) -> Self {
        let one = Poly::one(p.table());
        RatFun { num: p, den: one }
    }

    // ---- inspection ----

    /// Numerator (canonical form).
    pub fn num(&self) -> &Poly {
        &self.num
    }

    /// Denominator (canonical form).
    pub fn den(&self) -> &Poly {
        &self.den
    }

    /// The table this function lives on.
    pub fn table(&self) -> &Arc<VarTable> {
        self.num.table()
    }

    /// True if zero.
    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// True if the constant `1`.
    pub fn is_one(&self) -> bool {
        self.num.is_one() && self.den.is_one()
    }

    /// True if the denominator is `1`.
    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    /// The constant value, if this is a constant.
    pub fn as_constant(&self) -> Option<Rat> {
        if !self.den.is_one() {
            return None;
        }
        self.num.as_constant()
    }

    /// The numerator as a polynomial if the denominator is `1`.
    pub fn as_poly(&self) -> Option<&Poly> {
        self.den.is_one().then_some(&self.num)
    }

    /// Weighted degree (numerator weight minus denominator weight) if both
    /// parts are homogeneous; `Some(0)` for zero; `None` otherwise.
    pub fn homogeneous_weight(&self) -> Option<i64> {
        if self.is_zero() {
            return Some(0);
        }
        Some(self.num.homogeneous_weight()? - self.den.homogeneous_weight()?)
    }

    // ---- arithmetic ----

    /// Sum.
    ///
    /// Cancels against `gcd(den, den)` before cross-multiplying (Henrici's
    /// fraction addition, as in GMP): both fractions being canonical, the
    /// only reduction ever needed is against that denominator gcd, so the
    /// expensive gcd of full cross-multiplied products never occurs.
    pub fn add(&self, other: &Self) -> Self {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let g1 = poly_gcd(&self.den, &other.den);
        if g1.is_one() {
            let num = self.num.mul(&other.den).add(&other.num.mul(&self.den));
            let den = self.den.mul(&other.den);
            return Self::normalize_coprime(num, den);
        }
        let sd = self.den.exact_div(&g1).expect("gcd divides denominator");
        let od = other.den.exact_div(&g1).expect("gcd divides denominator");
        let t = self.num.mul(&od).add(&other.num.mul(&sd));
        if t.is_zero() {
            return Self::zero(self.table());
        }
        let g2 = gcd_mixed(&t, &g1);
        let (num, den) = if g2.is_one() {
            (t, self.den.mul(&od))
        } else {
            (
                exact_div_branch(&t, &g2),
                self.den
                    .exact_div(&g2)
                    .expect("g2 divides g1 divides denominator")
                    .mul(&od),
            )
        };
        Self::normalize_coprime(num, den)
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        RatFun {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    /// Product.
    ///
    /// Cross-cancels numerators against the opposite denominators first (as
    /// in GMP): for branch-free numerators the result is then already in
    /// lowest terms. Products of branch symbols can rewrite through the
    /// branch relation and create fresh common factors, so those still get a
    /// final reduction — on much smaller operands.
    pub fn mul(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.table());
        }
        let g1 = gcd_mixed(&self.num, &other.den);
        let g2 = gcd_mixed(&other.num, &self.den);
        let (sn, od) = if g1.is_one() {
            (self.num.clone(), other.den.clone())
        } else {
            (
                exact_div_branch(&self.num, &g1),
                other.den.exact_div(&g1).expect("gcd divides denominator"),
            )
        };
        let (on, sd) = if g2.is_one() {
            (other.num.clone(), self.den.clone())
        } else {
            (
                exact_div_branch(&other.num, &g2),
                self.den.exact_div(&g2).expect("gcd divides denominator"),
            )
        };
        let branchy = sn.mentions_branch() && on.mentions_branch();
        let num = sn.mul(&on);
        let den = sd.mul(&od);
        if branchy {
            Self::normalize(num, den)
        } else {
            Self::normalize_coprime(num, den)
        }
    }

    /// Scale by a rational constant.
    pub fn scale(&self, c: &Rat) -> Self {
        if c.is_zero() {
            return Self::zero(self.table());
        }
        RatFun {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    /// Multiplicative inverse. Fails with `DivisionByZero` on zero.
    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if self.num.mentions_branch() {
            // The new denominator needs its branch symbols rationalized away.
            return Self::new(self.den.clone(), self.num.clone());
        }
        // Already coprime: just swap and rescale.
        Ok(Self::normalize_coprime(
            self.den.clone(),
            self.num.clone(),
        ))
    }

    /// Quotient. Fails with `DivisionByZero` when `other` is zero.
    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self.mul(&other.inverse()?))
    }

    /// Integer power (negative powers require an invertible base).
    pub fn pow(&self, e: i64) -> Result<Self> {
        if e < 0 {
            return self.inverse()?.pow(-e);
        }
        let mut result = Self::one(self.table());
        let mut base = self.clone();
        let mut e = e as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(result)
    }

    /// Partial derivative with respect to generator `v` (quotient rule,
    /// treating all generators — including branch symbols — as independent).
    pub fn derivative(&self, v: usize) -> Self {
        let dn = self.num.derivative(v);
        let dd = self.den.derivative(v);
        if dd.is_zero() {
            return Self::normalize(dn, self.den.clone());
        }
        let g = poly_gcd(&self.den, &dd);
        if g.is_one() {
            // (n'd − nd')/d² is already in lowest terms: a prime dividing d
            // divides neither n (canonical form) nor d' (gcd(d, d') = 1).
            let t = dn.mul(&self.den).sub(&self.num.mul(&dd));
            return Self::normalize_coprime(t, self.den.mul(&self.den));
        }
        let dbar = self.den.exact_div(&g).expect("gcd divides denominator");
        let ddg = dd.exact_div(&g).expect("gcd divides derivative");
        let t = dn.mul(&dbar).sub(&self.num.mul(&ddg));
        Self::normalize(t, dbar.mul(&self.den))
    }

    /// Substitute rational functions for selected generators (all at once;
    /// unlisted generators stay themselves). Fails with `PoleAtSubstitution`
    /// if the denominator evaluates to zero.
    pub fn substitute(&self, assignments: &[(usize, RatFun)]) -> Result<Self> {
        let num = eval_poly(&self.num, assignments)?;
        let den = eval_poly(&self.den, assignments)?;
        if den.is_zero() {
            return Err(Error::PoleAtSubstitution(format!(
                "denominator {} vanishes under substitution",
                self.den
            )));
        }
        den.inverse()
            .map_err(|_| {
                Error::PoleAtSubstitution(format!(
                    "denominator {} vanishes under substitution",
                    self.den
                ))
            })
            .map(|d| num.mul(&d))
    }

    /// True if the denominator divides a product of powers of the given
    /// atoms, i.e. the function is regular away from their zero loci.
    pub fn denominator_within(&self, atoms: &[Poly]) -> bool {
        let mut d = self.den.clone();
        loop {
            if d.as_constant().is_some() {
                return true;
            }
            let mut progressed = false;
            for a in atoms {
                if a.as_constant().is_some() {
                    continue;
                }
                while let Some(q) = d.exact_div(a) {
                    d = q;
                    progressed = true;
                    if d.as_constant().is_some() {
                        return true;
                    }
                }
            }
            if !progressed {
                return false;
            }
        }
    }

    /// Evaluate at rational values for all generators. Fails with
    /// `PoleAtSubstitution` on a vanishing denominator.
    pub fn eval_rat(&self, values: &[Rat]) -> Result<Rat> {
        let d = self.den.eval_rat(values);
        if d.is_zero() {
            return Err(Error::PoleAtSubstitution(format!(
                "denominator {} vanishes at evaluation point",
                self.den
            )));
        }
        Ok(self.num.eval_rat(values) / d)
    }
}

/// Evaluate a polynomial with rational-function values substituted for some
/// generators (others remain as generators).
fn eval_poly(p: &Poly, assignments: &[(usize, RatFun)]) -> Result<RatFun> {
    let table = p.table();
    if assignments.is_empty() {
        return Ok(RatFun::from_poly(p.clone()));
    }
    let mut acc = RatFun::zero(table);
    for (m, c) in p.terms() {
        let mut factor = RatFun::constant(table, c.clone());
        let mut residual = Mono::one(table.len());
        for i in 0..table.len() {
            let e = m.get(i);
            if e == 0 {
                continue;
            }
            if let Some((_, val)) = assignments.iter().find(|(v, _)| *v == i) {
                factor = factor.mul(&val.pow(e as i64)?);
            } else {
                residual = residual.mul(&Mono::var_pow(table.len(), i, e));
            }
        }
        if !residual.is_one() {
            factor = factor.mul(&RatFun::from_poly(Poly::from_terms(
                table,
                [(residual, Rat::one())],
            )));
        }
        acc = acc.add(&factor);
    }
    Ok(acc)
}

/// GCD of a possibly branch-mentioning polynomial with a branch-free one:
/// the common factor of all branch strata of `num` with `den`.
fn gcd_mixed(num: &Poly, den: &Poly) -> Poly {
    if !num.mentions_branch() {
        return poly_gcd(num, den);
    }
    let mut g = den.primitive_part();
    for stratum in branch_strata(num) {
        g = poly_gcd(&g, &stratum);
        if g.is_one() {
            break;
        }
    }
    g
}

/// Split a polynomial mentioning branch symbols into its branch-monomial
/// strata (branch-free coefficient polynomials).
fn branch_strata(p: &Poly) -> Vec<Poly> {
    let table = p.table().clone();
    let mut strata = vec![p.clone()];
    for b in table.branches() {
        let mut next = Vec::new();
        for s in &strata {
            if s.mentions(b.var) {
                next.extend(s.coeffs_in(b.var).into_iter().filter(|c| !c.is_zero()));
            } else {
                next.push(s.clone());
            }
        }
        strata = next;
    }
    strata
}

/// Exact division of a (possibly branch-mentioning) polynomial by a
/// branch-free divisor known to divide every branch stratum.
fn exact_div_branch(p: &Poly, d: &Poly) -> Poly {
    if !p.mentions_branch() {
        return p.exact_div(d).expect("gcd must divide numerator");
    }
    let table = p.table().clone();
    // Divide stratum by stratum along the first branch symbol present.
    let var = table
        .branches()
        .iter()
        .map(|b| b.var)
        .find(|&v| p.mentions(v))
        .expect("branch mention vanished");
    let coeffs = p.coeffs_in(var);
    let divided: Vec<Poly> = coeffs.iter().map(|c| exact_div_branch(c, d)).collect();
    Poly::from_coeffs_in(&table, var, &divided)
}

/// Invert the branch symbol `var` out of `den`: returns `(cofactor, cleared)`
/// with `den · cofactor = cleared` modulo the branch relation, where
/// `cleared` no longer mentions `var`. Fails with `DivisionByZero` when `den`
/// is zero or a zero divisor.
fn invert_carrier(den: &Poly, var: usize) -> Result<(Poly, Poly)> {
    let table = den.table().clone();
    let rel = table
        .branch_for(var)
        .expect("invert_carrier called without a relation");
    let deg = rel.degree as usize;

    // Minimal polynomial M(s) = s^deg - Σ lower[i] s^i with branch-free
    // coefficients, and den(s), both as coefficient vectors over the
    // fraction field of the var-free part.
    let mut m_coeffs: Vec<RatFun> = (0..deg)
        .map(|i| {
            let p = Poly::from_terms(&table, rel.lower[i].iter().cloned());
            RatFun::from_poly(p.neg())
        })
        .collect();
    m_coeffs.push(RatFun::one(&table));
    let d_coeffs: Vec<RatFun> = den
        .coeffs_in(var)
        .into_iter()
        .map(RatFun::from_poly)
        .collect();

    // Extended Euclid in K[s] tracking the den-cofactor:
    //   r0 = M, r1 = den;  u0 = 0, u1 = 1  with  u_i · den ≡ r_i (mod M).
    let mut r0 = m_coeffs;
    let mut r1 = d_coeffs;
    let mut u0: Vec<RatFun> = vec![];
    let mut u1: Vec<RatFun> = vec![RatFun::one(&table)];
    loop {
        trim(&mut r1);
        if r1.is_empty() {
            return Err(Error::DivisionByZero);
        }
        if r1.len() == 1 {
            break;
        }
        let (q, r) = poly_divmod(&r0, &r1, &table)?;
        let new_u = poly_sub(&u0, &poly_mul(&q, &u1, &table), &table);
        r0 = r1;
        r1 = r;
        u0 = u1;
        u1 = new_u;
    }
    // r1 = [g], a nonzero constant of K: den^{-1} ≡ u1 / g.
    let g_inv = r1[0].inverse()?;
    let u: Vec<RatFun> = u1.iter().map(|c| c.mul(&g_inv)).collect();

    // Clear denominators: common multiple D of the u_i denominators.
    let mut common = Poly::one(&table);
    for c in &u {
        let g = poly_gcd(&common, c.den());
        common = common
            .mul(c.den())
            .exact_div(&g)
            .expect("gcd divides product");
    }
    let mut cofactor = Poly::zero(&table);
    for (i, c) in u.iter().enumerate() {
        let scale = common.exact_div(c.den()).expect("lcm divisible");
        let term = c.num().mul(&scale);
        let s_pow = Mono::var_pow(table.len(), var, i as u16);
        cofactor = cofactor.add(&term.mul_mono(&s_pow, &Rat::one()));
    }
    // den · cofactor ≡ D (mod relation); verify in debug builds.
    let cleared = common;
    debug_assert_eq!(den.mul(&cofactor), cleared);
    Ok((cofactor, cleared))
}

fn trim(v: &mut Vec<RatFun>) {
    while v.last().map(|c| c.is_zero()).unwrap_or(false) {
        v.pop();
    }
}

fn poly_sub(a: &[RatFun], b: &[RatFun], table: &Arc<VarTable>) -> Vec<RatFun> {
    let n = a.len().max(b.len());
    let zero = RatFun::zero(table);
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let x = a.get(i).unwrap_or(&zero);
        let y = b.get(i).unwrap_or(&zero);
        out.push(x.sub(y));
    }
    let mut out = out;
    trim(&mut out);
    out
}

fn poly_mul(a: &[RatFun], b: &[RatFun], table: &Arc<VarTable>) -> Vec<RatFun> {
    if a.is_empty() || b.is_empty() {
        return vec![];
    }
    let mut out = vec![RatFun::zero(table); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] = out[i + j].add(&x.mul(y));
        }
    }
    trim(&mut out);
    out
}

/// Division with remainder in K[s] (K = rational functions): returns (q, r)
/// with a = q·b + r, deg r < deg b.
fn poly_divmod(
    a: &[RatFun],
    b: &[RatFun],
    table: &Arc<VarTable>,
) -> Result<(Vec<RatFun>, Vec<RatFun>)> {
    let mut r: Vec<RatFun> = a.to_vec();
    trim(&mut r);
    let mut b = b.to_vec();
    trim(&mut b);
    if b.is_empty() {
        return Err(Error::DivisionByZero);
    }
    let db = b.len() - 1;
    let lb_inv = b[db].inverse()?;
    let mut q = vec![RatFun::zero(table); r.len().saturating_sub(db)];
    while r.len() > db {
        let dr = r.len() - 1;
        let coef = r[dr].mul(&lb_inv);
        q[dr - db] = coef.clone();
        for i in 0..=db {
            let t = b[i].mul(&coef);
            r[dr - db + i] = r[dr - db + i].sub(&t);
        }
        trim(&mut r);
        if r.is_empty() {
            break;
        }
    }
    trim(&mut q);
    Ok((q, r))
}

impl fmt::Display for RatFun {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "{}", self.num)
        } else if self.num.num_terms() <= 1 {
            write!(f, "{}/({})", self.num, self.den)
        } else {
            write!(f, "({})/({})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::{rat, rat_int};
    use super::*;

    fn table2() -> Arc<VarTable> {
        VarTable::new(&[("l1", 1), ("l2", 1)])
    }

    fn l(t: &Arc<VarTable>, i: usize) -> RatFun {
        RatFun::var(t, i)
    }

    #[test]
    fn long_division_cancellation() {
        // (l1^2 - l2^2)/(l1 - l2) normalizes to l1 + l2
        // (oracle: polynomial long division gives quotient l1 + l2 exactly).
        let t = table2();
        let num = Poly::var(&t, 0).pow(2).sub(&Poly::var(&t, 1).pow(2));
        let den = Poly::var(&t, 0).sub(&Poly::var(&t, 1));
        let f = RatFun::new(num, den).unwrap();
        assert!(f.is_polynomial());
        assert_eq!(f.to_string(), "l1 + l2");
    }

    #[test]
    fn telescoping_localization_sum() {
        // l1/(l1-l2) + l2/(l2-l1) = 1: the basic two-fixed-point identity.
        let t = table2();
        let l1 = l(&t, 0);
        let l2 = l(&t, 1);
        let d12 = l1.sub(&l2);
        let a = l1.div(&d12).unwrap();
        let b = l2.div(&d12.neg()).unwrap();
        assert!(a.add(&b).is_one());
    }

    #[test]
    fn canonical_denominator_scaling() {
        // (l1) / (2 l1 - 4 l2): canonical den has integer coprime
        // coefficients and positive lead: (1/2 l1)/(l1 - 2 l2).
        let t = table2();
        let num = Poly::var(&t, 0);
        let den = Poly::var(&t, 0)
            .scale(&rat_int(2))
            .sub(&Poly::var(&t, 1).scale(&rat_int(4)));
        let f = RatFun::new(num, den).unwrap();
        assert_eq!(f.den().to_string(), "l1 - 2*l2");
        assert_eq!(f.num().to_string(), "1/2*l1");
        // And the sign flips into the numerator when the lead is negative.
        let g = RatFun::new(
            Poly::var(&t, 0),
            Poly::var(&t, 1).sub(&Poly::var(&t, 0)),
        )
        .unwrap();
        assert_eq!(g.den().to_string(), "l1 - l2");
        assert_eq!(g.num().to_string(), "-l1");
    }

    #[test]
    fn derivative_quotient_rule() {
        // d/dl1 [ l1 / (l1 - l2) ] = -l2 / (l1-l2)^2
        let t = table2();
        let f = l(&t, 0).div(&l(&t, 0).sub(&l(&t, 1))).unwrap();
        let d = f.derivative(0);
        let expect = l(&t, 1)
            .neg()
            .div(&l(&t, 0).sub(&l(&t, 1)).pow(2).unwrap())
            .unwrap();
        assert_eq!(d, expect);
    }

    #[test]
    fn substitution_and_poles() {
        let t = table2();
        let f = l(&t, 0).div(&l(&t, 0).sub(&l(&t, 1))).unwrap();
        // l1 := 2 l2 gives 2 l2 / l2 = 2.
        let g = f.substitute(&[(0, l(&t, 1).scale(&rat_int(2)))]).unwrap();
        assert_eq!(g.as_constant(), Some(rat_int(2)));
        // l1 := l2 hits the pole.
        let err = f.substitute(&[(0, l(&t, 1))]).unwrap_err();
        assert!(matches!(err, Error::PoleAtSubstitution(_)));
    }

    #[test]
    fn denominator_within_atoms() {
        let t = table2();
        let d12 = Poly::var(&t, 0).sub(&Poly::var(&t, 1));
        let f = RatFun::new(Poly::one(&t), d12.pow(3)).unwrap();
        assert!(f.denominator_within(&[d12.clone()]));
        let g = RatFun::new(Poly::one(&t), Poly::var(&t, 0)).unwrap();
        assert!(!g.denominator_within(&[d12]));
    }

    #[test]
    fn homogeneous_weight() {
        let t = table2();
        // (l1 l2) / (l1 - l2): weight 2 - 1 = 1.
        let f = l(&t, 0).mul(&l(&t, 1)).div(&l(&t, 0).sub(&l(&t, 1))).unwrap();
        assert_eq!(f.homogeneous_weight(), Some(1));
        // l1 + 1 is not homogeneous.
        let g = l(&t, 0).add(&RatFun::one(&t));
        assert_eq!(g.homogeneous_weight(), None);
    }

    #[test]
    fn branch_rationalization_quadratic() {
        // Table (l1, l2, qv, s), s^2 = (l1+l2)s - l1 l2 + qv (roots of
        // (x-l1)(x-l2) = qv). Hand oracle: 1/(s - l2) = (s - l1)/qv, since
        // (s-l1)(s-l2) = qv.
        let base = VarTable::new(&[("l1", 1), ("l2", 1), ("qv", 2), ("s", 1)]);
        let l1 = Poly::var(&base, 0);
        let l2 = Poly::var(&base, 1);
        let qv = Poly::var(&base, 2);
        let c0 = qv.sub(&l1.mul(&l2));
        let c1 = l1.add(&l2);
        let t = VarTable::with_branch(&base, 3, 2, &[c0, c1]).unwrap();
        let s = Poly::var(&t, 3);
        let inv = RatFun::new(Poly::one(&t), s.sub(&Poly::var(&t, 1))).unwrap();
        let expect = RatFun::new(s.sub(&Poly::var(&t, 0)), Poly::var(&t, 2)).unwrap();
        assert_eq!(inv, expect);
        // Multiplying back gives exactly 1.
        let back = inv.mul(&RatFun::from_poly(s.sub(&Poly::var(&t, 1))));
        assert!(back.is_one());
    }

    #[test]
    fn rational_constants() {
        let t = table2();
        let half = RatFun::constant(&t, rat(1, 2));
        assert_eq!(half.add(&half).as_constant(), Some(rat_int(1)));
        assert!(RatFun::zero(&t).inverse().is_err());
    }
}
