//! Finite-rank graded algebras over the scalar fraction field.
//!
//! A [`GradedAlgebra`] is an even-graded, unital, associative, commutative
//! algebra of finite rank over the rational functions in the torus
//! parameters, together with a perfect pairing. Cohomology rings of bases
//! (`H^*(B)`, with the point and projective spaces built in) and
//! torus-equivariant cohomology rings of total spaces (`H^*_T(E)`, built by
//! the toric layer through fixed-point localization) are both stored this
//! way: a basis, structure constants, pairing values, and degrees.
//!
//! Elements carry their coordinates in the fixed basis. Inversion is
//! supported for elements whose non-unit part is genuinely nilpotent (true in
//! non-equivariant base rings, where classes of positive degree are
//! nilpotent; equivariant rings contain non-nilpotent classes and must be
//! inverted through localization instead).

use crate::coeffs::{Rat, RatFun, VarTable};
use crate::error::{Error, Result};
use std::fmt;
use std::sync::Arc;

/// A finite-rank graded algebra with unit basis element at index 0.
#[derive(Debug, PartialEq)]
pub struct GradedAlgebra {
    table: Arc<VarTable>,
    names: Vec<String>,
    degrees: Vec<u32>,
    /// `mult[i][j]` = coordinates of `e_i · e_j`.
    mult: Vec<Vec<Vec<RatFun>>>,
    /// Pairing values `⟨e_i, e_j⟩`.
    pairing: Vec<Vec<RatFun>>,
}

impl GradedAlgebra {
    /// Assemble an algebra from explicit tables. Checks shapes, that the
    /// basis element 0 is a unit of degree 0 (and the only degree-0 basis
    /// element), commutativity of the tables, and symmetry of the pairing.
    /// Associativity is not verified here (callers constructing algebras from
    /// geometry verify it where it is a meaningful cross-check).
    pub fn new(
        table: &Arc<VarTable>,
        names: Vec<String>,
        degrees: Vec<u32>,
        mult: Vec<Vec<Vec<RatFun>>>,
        pairing: Vec<Vec<RatFun>>,
    ) -> Result<Arc<Self>> {
        let r = names.len();
        if degrees.len() != r || mult.len() != r || pairing.len() != r {
            return Err(Error::RankMismatch(format!(
                "algebra tables disagree on rank {r}"
            )));
        }
        for row in &mult {
            if row.len() != r || row.iter().any(|c| c.len() != r) {
                return Err(Error::RankMismatch(
                    "structure constant table is not rank^3".into(),
                ));
            }
        }
        if pairing.iter().any(|row| row.len() != r) {
            return Err(Error::RankMismatch("pairing table is not rank^2".into()));
        }
        if degrees.is_empty() || degrees[0] != 0 {
            return Err(Error::AssumptionViolation(
                "basis element 0 must be the unit (degree 0)".into(),
            ));
        }
        if degrees.iter().skip(1).any(|&d| d == 0) {
            return Err(Error::AssumptionViolation(
                "only the unit may have degree 0 (connected algebra)".into(),
            ));
        }
        if degrees.iter().any(|&d| d % 2 != 0) {
            return Err(Error::AssumptionViolation(
                "basis degrees must be even".into(),
            ));
        }
        // Unit row/column and commutativity.
        for j in 0..r {
            for k in 0..r {
                let expect = if k == j { RatFun::one(table) } else { RatFun::zero(table) };
                if mult[0][j][k] != expect {
                    return Err(Error::AssumptionViolation(format!(
                        "basis element 0 is not a unit at ({j},{k})"
                    )));
                }
            }
        }
        for i in 0..r {
            for j in 0..i {
                if mult[i][j] != mult[j][i] {
                    return Err(Error::AssumptionViolation(format!(
                        "structure constants not commutative at ({i},{j})"
                    )));
                }
                if pairing[i][j] != pairing[j][i] {
                    return Err(Error::AssumptionViolation(format!(
                        "pairing not symmetric at ({i},{j})"
                    )));
                }
            }
        }
        Ok(Arc::new(GradedAlgebra {
            table: table.clone(),
            names,
            degrees,
            mult,
            pairing,
        }))
    }

    /// Rank-1 algebra of a point: basis `{1}`, `⟨1,1⟩ = 1`.
    pub fn point(table: &Arc<VarTable>) -> Arc<Self> {
        GradedAlgebra::new(
            table,
            vec!["1".into()],
            vec![0],
            vec![vec![vec![RatFun::one(table)]]],
            vec![vec![RatFun::one(table)]],
        )
        .expect("point algebra is well-formed")
    }

    /// `H^*(P^n)`: basis `1, h, …, h^n` with `h^{n+1} = 0` and
    /// `⟨h^i, h^j⟩ = δ_{i+j,n}`. The torus acts trivially on the base, so
    /// this is the non-equivariant ring with scalars extended.
    pub fn projective_space(table: &Arc<VarTable>, n: usize, gen_name: &str) -> Arc<Self> {
        let r = n + 1;
        let names = (0..r)
            .map(|i| match i {
                0 => "1".to_string(),
                1 => gen_name.to_string(),
                _ => format!("{gen_name}^{i}"),
            })
            .collect();
        let degrees = (0..r).map(|i| 2 * i as u32).collect();
        let mut mult = vec![vec![vec![RatFun::zero(table); r]; r]; r];
        let mut pairing = vec![vec![RatFun::zero(table); r]; r];
        for i in 0..r {
            for j in 0..r {
                if i + j < r {
                    mult[i][j][i + j] = RatFun::one(table);
                }
                if i + j == n {
                    pairing[i][j] = RatFun::one(table);
                }
            }
        }
        GradedAlgebra::new(table, names, degrees, mult, pairing)
            .expect("projective space algebra is well-formed")
    }

    /// Scalar table.
    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    /// Rank of the algebra.
    pub fn rank(&self) -> usize {
        self.names.len()
    }

    /// Basis element names.
    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Cohomological degrees of the basis elements.
    pub fn degrees(&self) -> &[u32] {
        &self.degrees
    }

    /// Top degree among basis elements.
    pub fn top_degree(&self) -> u32 {
        *self.degrees.iter().max().unwrap()
    }

    /// Pairing value `⟨e_i, e_j⟩`.
    pub fn pairing_entry(&self, i: usize, j: usize) -> &RatFun {
        &self.pairing[i][j]
    }

    /// Structure constants of `e_i · e_j`.
    pub fn mult_entry(&self, i: usize, j: usize) -> &[RatFun] {
        &self.mult[i][j]
    }
}

/// Build an element of `algebra` from coordinates.
pub fn element(algebra: &Arc<GradedAlgebra>, coords: Vec<RatFun>) -> AlgebraElement {
    assert_eq!(coords.len(), algebra.rank(), "coordinate vector length");
    AlgebraElement {
        algebra: algebra.clone(),
        coords,
    }
}

/// An element of a [`GradedAlgebra`], as coordinates in the fixed basis.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraElement {
    algebra: Arc<GradedAlgebra>,
    coords: Vec<RatFun>,
}

impl AlgebraElement {
    /// The zero element.
    pub fn zero(algebra: &Arc<GradedAlgebra>) -> Self {
        element(algebra, vec![RatFun::zero(algebra.table()); algebra.rank()])
    }

    /// The unit element.
    pub fn one(algebra: &Arc<GradedAlgebra>) -> Self {
        Self::basis(algebra, 0)
    }

    /// The `i`-th basis element.
    pub fn basis(algebra: &Arc<GradedAlgebra>, i: usize) -> Self {
        let mut coords = vec![RatFun::zero(algebra.table()); algebra.rank()];
        coords[i] = RatFun::one(algebra.table());
        element(algebra, coords)
    }

    /// A scalar multiple of the unit.
    pub fn scalar(algebra: &Arc<GradedAlgebra>, c: RatFun) -> Self {
        let mut coords = vec![RatFun::zero(algebra.table()); algebra.rank()];
        coords[0] = c;
        element(algebra, coords)
    }

    /// The algebra this element belongs to.
    pub fn algebra(&self) -> &Arc<GradedAlgebra> {
        &self.algebra
    }

    /// Coordinates in the fixed basis.
    pub fn coords(&self) -> &[RatFun] {
        &self.coords
    }

    /// Coordinate `i`.
    pub fn coord(&self, i: usize) -> &RatFun {
        &self.coords[i]
    }

    /// True if all coordinates vanish.
    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// The coefficient of the unit basis element.
    pub fn unit_part(&self) -> &RatFun {
        &self.coords[0]
    }

    fn assert_same(&self, other: &Self) {
        assert!(
            Arc::ptr_eq(&self.algebra, &other.algebra) || self.algebra == other.algebra,
            "elements of different algebras"
        );
    }

    /// Sum.
    pub fn add(&self, other: &Self) -> Self {
        self.assert_same(other);
        element(
            &self.algebra,
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.add(b))
                .collect(),
        )
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.assert_same(other);
        element(
            &self.algebra,
            self.coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a.sub(b))
                .collect(),
        )
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        element(&self.algebra, self.coords.iter().map(|c| c.neg()).collect())
    }

    /// Scale by a rational function.
    pub fn scale(&self, c: &RatFun) -> Self {
        element(
            &self.algebra,
            self.coords.iter().map(|x| x.mul(c)).collect(),
        )
    }

    /// Scale by a rational constant.
    pub fn scale_rat(&self, c: &Rat) -> Self {
        element(
            &self.algebra,
            self.coords.iter().map(|x| x.scale(c)).collect(),
        )
    }

    /// Product through the structure constants.
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_same(other);
        let r = self.algebra.rank();
        let mut out = vec![RatFun::zero(self.algebra.table()); r];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                let ab = a.mul(b);
                for (k, c) in self.algebra.mult[i][j].iter().enumerate() {
                    if !c.is_zero() {
                        out[k] = out[k].add(&ab.mul(c));
                    }
                }
            }
        }
        element(&self.algebra, out)
    }

    /// Power by repeated multiplication.
    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(&self.algebra);
        for _ in 0..e {
            out = out.mul(self);
        }
        out
    }

    /// Pairing `⟨self, other⟩`.
    pub fn pair(&self, other: &Self) -> RatFun {
        self.assert_same(other);
        let mut acc = RatFun::zero(self.algebra.table());
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coords.iter().enumerate() {
                if b.is_zero() {
                    continue;
                }
                acc = acc.add(&a.mul(b).mul(&self.algebra.pairing[i][j]));
            }
        }
        acc
    }

    /// Pairing against the unit (`∫` for cohomology of a compact space).
    pub fn integrate(&self) -> RatFun {
        self.pair(&Self::one(&self.algebra))
    }

    /// Inverse of `c·1 + n` with invertible scalar part `c` and nilpotent
    /// `n`, by a terminating geometric series. Fails with
    /// `NonInvertibleLeadingTerm` if the unit coefficient is zero, and with
    /// `AssumptionViolation` if the positive-degree part fails to be
    /// nilpotent within the rank bound (as happens in equivariant rings).
    pub fn inverse(&self) -> Result<Self> {
        let c = self.unit_part();
        if c.is_zero() {
            return Err(Error::NonInvertibleLeadingTerm(
                "element has no unit component".into(),
            ));
        }
        let c_inv = c.inverse()?;
        // self = c(1 + m) with m = self/c - 1; inverse = c^{-1} Σ (-m)^k.
        let m = self.scale(&c_inv).sub(&Self::one(&self.algebra));
        let mut acc = Self::one(&self.algebra);
        let mut pow = Self::one(&self.algebra);
        let bound = self.algebra.rank() + 1;
        for _ in 0..bound {
            pow = pow.mul(&m).neg();
            if pow.is_zero() {
                return Ok(acc.scale(&c_inv));
            }
            acc = acc.add(&pow);
        }
        Err(Error::AssumptionViolation(
            "element is not unit + nilpotent; cannot invert by geometric series".into(),
        ))
    }

    /// The matrix of left multiplication by `self` (columns indexed by the
    /// basis element being multiplied).
    pub fn mult_matrix(&self) -> Vec<Vec<RatFun>> {
        let r = self.algebra.rank();
        let mut m = vec![vec![RatFun::zero(self.algebra.table()); r]; r];
        for j in 0..r {
            let col = self.mul(&Self::basis(&self.algebra, j));
            for i in 0..r {
                m[i][j] = col.coords[i].clone();
            }
        }
        m
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut wrote = false;
        for (i, c) in self.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            if wrote {
                write!(f, " + ")?;
            }
            wrote = true;
            if i == 0 {
                write!(f, "{c}")?;
            } else {
                write!(f, "({c})·{}", self.algebra.names[i])?;
            }
        }
        if !wrote {
            write!(f, "0")?;
        }
        Ok(())
    }
}

/// Evaluate the monomial `Π gens[a]^{exps[a]}` in the algebra of the first
/// generator (or return the unit when all exponents vanish).
pub fn monomial_eval(
    algebra: &Arc<GradedAlgebra>,
    gens: &[AlgebraElement],
    exps: &[u16],
) -> AlgebraElement {
    assert_eq!(gens.len(), exps.len());
    let mut out = AlgebraElement::one(algebra);
    for (g, &e) in gens.iter().zip(exps) {
        for _ in 0..e {
            out = out.mul(g);
        }
    }
    out
}

/// A polynomial expression in distinguished generators and scalars, used to
/// state ring presentations whose relations the workbench verifies.
#[derive(Clone, Debug)]
pub enum Expr {
    /// The `i`-th distinguished generator.
    Gen(usize),
    /// A scalar (rational function of the torus parameters).
    Scalar(RatFun),
    /// Sum.
    Add(Box<Expr>, Box<Expr>),
    /// Difference.
    Sub(Box<Expr>, Box<Expr>),
    /// Product.
    Mul(Box<Expr>, Box<Expr>),
    /// Power.
    Pow(Box<Expr>, u32),
}

impl Expr {
    /// Convenience constructor: generator.
    pub fn gen(i: usize) -> Self {
        Expr::Gen(i)
    }

    /// Convenience constructor: scalar.
    pub fn scalar(c: RatFun) -> Self {
        Expr::Scalar(c)
    }

    /// Sum of two expressions.
    pub fn add(self, other: Expr) -> Self {
        Expr::Add(Box::new(self), Box::new(other))
    }

    /// Difference of two expressions.
    pub fn sub(self, other: Expr) -> Self {
        Expr::Sub(Box::new(self), Box::new(other))
    }

    /// Product of two expressions.
    pub fn mul(self, other: Expr) -> Self {
        Expr::Mul(Box::new(self), Box::new(other))
    }

    /// Power of an expression.
    pub fn pow(self, e: u32) -> Self {
        Expr::Pow(Box::new(self), e)
    }

    /// Evaluate with algebra elements substituted for the generators.
    pub fn eval(&self, gens: &[AlgebraElement]) -> Result<AlgebraElement> {
        let algebra = gens
            .first()
            .map(|g| g.algebra().clone())
            .ok_or_else(|| Error::ConfigError("expression needs at least one generator".into()))?;
        Ok(match self {
            Expr::Gen(i) => gens
                .get(*i)
                .ok_or_else(|| Error::ConfigError(format!("generator {i} out of range")))?
                .clone(),
            Expr::Scalar(c) => AlgebraElement::scalar(&algebra, c.clone()),
            Expr::Add(a, b) => a.eval(gens)?.add(&b.eval(gens)?),
            Expr::Sub(a, b) => a.eval(gens)?.sub(&b.eval(gens)?),
            Expr::Mul(a, b) => a.eval(gens)?.mul(&b.eval(gens)?),
            Expr::Pow(a, e) => a.eval(gens)?.pow(*e),
        })
    }
}

/// Check that each relation evaluates to zero on the given generators.
/// Returns the list of nonzero residuals (empty = presentation holds).
pub fn check_presentation(
    gens: &[AlgebraElement],
    relations: &[Expr],
) -> Result<Vec<(usize, AlgebraElement)>> {
    let mut failures = Vec::new();
    for (k, rel) in relations.iter().enumerate() {
        let v = rel.eval(gens)?;
        if !v.is_zero() {
            failures.push((k, v));
        }
    }
    Ok(failures)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::rat_int;

    fn lambda_table() -> Arc<VarTable> {
        VarTable::new(&[("l1", 1), ("l2", 1)])
    }

    /// Hand-built `H^*_T(P^1)`: basis `{1, p}` with `p^2 = (λ1+λ2)p − λ1λ2`
    /// and localization pairing `⟨x,y⟩ = Σ_α x|_α y|_α / e_α`.
    fn equivariant_p1() -> Arc<GradedAlgebra> {
        let t = lambda_table();
        let l1 = RatFun::var(&t, 0);
        let l2 = RatFun::var(&t, 1);
        let zero = RatFun::zero(&t);
        let one = RatFun::one(&t);
        // p·p = -λ1λ2·1 + (λ1+λ2)·p
        let pp = vec![l1.mul(&l2).neg(), l1.add(&l2)];
        let mult = vec![
            vec![vec![one.clone(), zero.clone()], vec![zero.clone(), one.clone()]],
            vec![vec![zero.clone(), one.clone()], pp],
        ];
        // ⟨1,1⟩ = 0, ⟨1,p⟩ = 1, ⟨p,p⟩ = λ1+λ2 (localization sums).
        let pairing = vec![
            vec![zero.clone(), one.clone()],
            vec![one.clone(), l1.add(&l2)],
        ];
        GradedAlgebra::new(&t, vec!["1".into(), "p".into()], vec![0, 2], mult, pairing).unwrap()
    }

    #[test]
    fn point_algebra() {
        let t = lambda_table();
        let pt = GradedAlgebra::point(&t);
        let y = AlgebraElement::one(&pt).scale_rat(&rat_int(3));
        assert_eq!(y.integrate(), RatFun::constant(&t, rat_int(3)));
    }

    #[test]
    fn projective_space_ring() {
        let t = lambda_table();
        let p2 = GradedAlgebra::projective_space(&t, 2, "h");
        let h = AlgebraElement::basis(&p2, 1);
        assert_eq!(h.pow(2), AlgebraElement::basis(&p2, 2));
        assert!(h.pow(3).is_zero());
        assert!(h.pow(2).integrate().is_one());
        // (1 + h)^{-1} = 1 - h + h^2.
        let inv = AlgebraElement::one(&p2).add(&h).inverse().unwrap();
        let expect = AlgebraElement::one(&p2).sub(&h).add(&h.pow(2));
        assert_eq!(inv, expect);
    }

    #[test]
    fn equivariant_p1_relation_and_pairing() {
        let t = lambda_table();
        let a = equivariant_p1();
        let p = AlgebraElement::basis(&a, 1);
        let l1 = RatFun::var(&t, 0);
        let l2 = RatFun::var(&t, 1);
        // (p − λ1)(p − λ2) = 0: the classical presentation.
        let rel = Expr::gen(0)
            .sub(Expr::scalar(l1.clone()))
            .mul(Expr::gen(0).sub(Expr::scalar(l2.clone())));
        assert!(check_presentation(&[p.clone()], &[rel]).unwrap().is_empty());
        // ⟨p, p⟩ = λ1 + λ2 (sum of the two fixed point contributions
        // λ_i^2/e_i with e_1 = λ1−λ2, e_2 = λ2−λ1).
        assert_eq!(p.pair(&p), l1.add(&l2));
        // p is not unit-plus-nilpotent: inversion must refuse.
        let shifted = p.sub(&AlgebraElement::scalar(&a, l1));
        assert!(shifted.inverse().is_err());
    }

    #[test]
    fn rejects_bad_tables() {
        let t = lambda_table();
        let bad = GradedAlgebra::new(
            &t,
            vec!["1".into(), "x".into()],
            vec![0, 1], // odd degree
            vec![
                vec![
                    vec![RatFun::one(&t), RatFun::zero(&t)],
                    vec![RatFun::zero(&t), RatFun::one(&t)],
                ],
                vec![
                    vec![RatFun::zero(&t), RatFun::one(&t)],
                    vec![RatFun::zero(&t), RatFun::zero(&t)],
                ],
            ],
            vec![
                vec![RatFun::zero(&t), RatFun::one(&t)],
                vec![RatFun::one(&t), RatFun::zero(&t)],
            ],
        );
        assert!(bad.is_err());
    }
}
