//! Genus-zero data of the base geometry: its cohomology with the Poincaré
//! pairing, tracked curve classes, small quantum products along divisor
//! directions, and the fundamental solution of the small quantum connection
//! in conjugated storage (divisor exponential stripped, so each Novikov
//! variable already carries its `e^τ` factor).

use crate::algebra::{AlgebraElement, GradedAlgebra};
use crate::coeffs::{RatFun, VarTable};
use crate::error::{Error, Result};
use crate::series::{SeriesMat, TruncSeries, VariableScheme};
use std::sync::Arc;

/// Multiplication by one divisor class under the small quantum product,
/// organized by Novikov multidegree over the tracked curve classes: each
/// entry pairs a multidegree with the `rank × rank` coordinate matrix it
/// multiplies. The zero multidegree is the classical part.
#[derive(Clone, Debug)]
pub struct DivisorProduct {
    /// `(multidegree, matrix)` pairs; column convention `M e_j = x·basis_j`.
    pub by_degree: Vec<(Vec<u16>, Vec<Vec<RatFun>>)>,
}

/// A smooth projective base with the data the bundle pipeline consumes: the
/// cohomology algebra, a preferred basis of divisor classes dual to the
/// tracked curve classes, first-Chern pairings, and the small quantum
/// product along each divisor direction.
pub struct BaseSpace {
    algebra: Arc<GradedAlgebra>,
    divisors: Vec<usize>,
    c1: Vec<i64>,
    div_pair: Vec<Vec<i64>>,
    qmult: Vec<DivisorProduct>,
}

impl BaseSpace {
    /// Assemble and validate base data.
    ///
    /// * `divisors` — indices of the degree-two basis classes spanning the
    ///   deformation directions, one per tracked curve class.
    /// * `c1` — pairings of the first Chern class of the tangent bundle with
    ///   each curve class.
    /// * `div_pair` — `div_pair[v][u]` is the pairing of divisor `v` with
    ///   curve class `u`.
    /// * `qmult` — small quantum product by each divisor class; its zero
    ///   multidegree must agree with the classical product.
    pub fn new(
        algebra: Arc<GradedAlgebra>,
        divisors: Vec<usize>,
        c1: Vec<i64>,
        div_pair: Vec<Vec<i64>>,
        qmult: Vec<DivisorProduct>,
    ) -> Result<Self> {
        let s = divisors.len();
        let rank = algebra.rank();
        for (v, &d) in divisors.iter().enumerate() {
            if d >= rank {
                return Err(Error::RankMismatch(format!(
                    "divisor index {d} out of range for rank {rank}"
                )));
            }
            if algebra.degrees()[d] != 2 {
                return Err(Error::AssumptionViolation(format!(
                    "divisor {v} must have cohomological degree 2, found {}",
                    algebra.degrees()[d]
                )));
            }
            if divisors[..v].contains(&d) {
                return Err(Error::AssumptionViolation(format!(
                    "divisor index {d} listed twice"
                )));
            }
        }
        if c1.len() != s || div_pair.len() != s || qmult.len() != s {
            return Err(Error::RankMismatch(format!(
                "expected {s} curve classes: got c1 len {}, pairing rows {}, products {}",
                c1.len(),
                div_pair.len(),
                qmult.len()
            )));
        }
        for row in &div_pair {
            if row.len() != s {
                return Err(Error::RankMismatch(
                    "divisor/curve pairing matrix must be square".into(),
                ));
            }
        }
        for (u, prod) in qmult.iter().enumerate() {
            let classical = AlgebraElement::basis(&algebra, divisors[u]).mult_matrix();
            let mut saw_classical = false;
            for (deg, mat) in &prod.by_degree {
                if deg.len() != s {
                    return Err(Error::RankMismatch(format!(
                        "quantum product {u}: multidegree length {} ≠ {s}",
                        deg.len()
                    )));
                }
                if mat.len() != rank || mat.iter().any(|r| r.len() != rank) {
                    return Err(Error::RankMismatch(format!(
                        "quantum product {u}: matrix is not {rank}×{rank}"
                    )));
                }
                if deg.iter().all(|&e| e == 0) {
                    saw_classical = true;
                    if *mat != classical {
                        return Err(Error::AssumptionViolation(format!(
                            "quantum product {u}: zero multidegree disagrees with the classical product"
                        )));
                    }
                }
            }
            if !saw_classical {
                return Err(Error::AssumptionViolation(format!(
                    "quantum product {u} is missing its classical part"
                )));
            }
        }
        Ok(BaseSpace {
            algebra,
            divisors,
            c1,
            div_pair,
            qmult,
        })
    }

    /// The point: trivial cohomology, no deformation directions.
    pub fn point(table: &Arc<VarTable>) -> Self {
        BaseSpace {
            algebra: GradedAlgebra::point(table),
            divisors: Vec::new(),
            c1: Vec::new(),
            div_pair: Vec::new(),
            qmult: Vec::new(),
        }
    }

    /// Projective space `P^n` with hyperplane class named `gen_name`: one
    /// curve class (the line), `⟨c₁, line⟩ = n+1`, and small quantum product
    /// `h ⋆ h^n = Q·1`.
    pub fn projective(table: &Arc<VarTable>, n: usize, gen_name: &str) -> Self {
        let algebra = GradedAlgebra::projective_space(table, n, gen_name);
        let classical = AlgebraElement::basis(&algebra, 1).mult_matrix();
        let mut corner = vec![vec![RatFun::zero(table); n + 1]; n + 1];
        corner[0][n] = RatFun::one(table);
        let qmult = vec![DivisorProduct {
            by_degree: vec![(vec![0], classical), (vec![1], corner)],
        }];
        BaseSpace {
            algebra,
            divisors: vec![1],
            c1: vec![n as i64 + 1],
            div_pair: vec![vec![1]],
            qmult,
        }
    }

    /// The cohomology algebra.
    pub fn algebra(&self) -> &Arc<GradedAlgebra> {
        &self.algebra
    }

    /// Rank of the cohomology.
    pub fn rank(&self) -> usize {
        self.algebra.rank()
    }

    /// Number of divisor deformation directions (= tracked curve classes).
    pub fn divisor_count(&self) -> usize {
        self.divisors.len()
    }

    /// Basis index of divisor direction `v`.
    pub fn divisor_index(&self, v: usize) -> usize {
        self.divisors[v]
    }

    /// Divisor direction `v` as an algebra element.
    pub fn divisor_class(&self, v: usize) -> AlgebraElement {
        AlgebraElement::basis(&self.algebra, self.divisors[v])
    }

    /// `⟨c₁(TB), D_u⟩` for curve class `u`.
    pub fn c1_pairing(&self, u: usize) -> i64 {
        self.c1[u]
    }

    /// Grading weight of the Novikov variable of curve class `u` for the
    /// base's own theory.
    pub fn novikov_weight(&self, u: usize) -> i64 {
        self.c1[u]
    }

    /// Small quantum product data along divisor direction `u`.
    pub fn quantum_product(&self, u: usize) -> &DivisorProduct {
        &self.qmult[u]
    }

    /// Pair a degree-two class, given in the divisor basis, with curve class
    /// `u`. Errors when the class has coordinates outside the divisor span.
    pub fn curve_pairing(&self, class: &AlgebraElement, u: usize) -> Result<RatFun> {
        let table = self.algebra.table();
        let mut acc = RatFun::zero(table);
        for (i, c) in class.coords().iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            match self.divisors.iter().position(|&d| d == i) {
                Some(v) => {
                    acc = acc.add(&c.scale(&crate::coeffs::Rat::from_integer(
                        self.div_pair[v][u].into(),
                    )));
                }
                None => {
                    return Err(Error::AssumptionViolation(format!(
                        "class has a component outside the divisor span at basis index {i}"
                    )));
                }
            }
        }
        Ok(acc)
    }

    /// The small quantum multiplication matrix along divisor direction `u`
    /// as a series matrix, with Novikov multidegrees mapped onto the given
    /// scheme variables.
    pub fn quantum_mult_matrix(
        &self,
        scheme: &Arc<VariableScheme>,
        table: &Arc<VarTable>,
        novikov_vars: &[usize],
        u: usize,
    ) -> SeriesMat {
        let r = self.rank();
        let mut m = SeriesMat::zero(scheme, table, r, r);
        for (deg, mat) in &self.qmult[u].by_degree {
            let mut key = scheme.key_one();
            for (v, &e) in deg.iter().enumerate() {
                if e > 0 {
                    key = key.with_exp(novikov_vars[v], e);
                }
            }
            if !scheme.fits(&key) {
                continue;
            }
            let piece = SeriesMat::from_fn(r, r, |i, j| {
                TruncSeries::monomial(scheme, table, key.clone(), 0, mat[i][j].clone())
            });
            m = m.add(&piece);
        }
        m
    }

    /// Fundamental solution `L` of the small quantum connection in
    /// conjugated storage: `L = Id + O(Q)` with
    /// `θ_{Q_u} L = z⁻¹ (L A_u − Φ_u L)` for every divisor direction, where
    /// `A_u` is the quantum and `Φ_u` the classical multiplication matrix.
    /// Column 0 is the (conjugated) small J-function. Entries are exact
    /// Laurent polynomials in `z⁻¹` within the scheme's Novikov caps.
    ///
    /// `novikov_vars` locates this base's Novikov variables inside `scheme`
    /// (one per curve class); the solution is supported on those variables
    /// only.
    pub fn fundamental_solution(
        &self,
        scheme: &Arc<VariableScheme>,
        table: &Arc<VarTable>,
        novikov_vars: &[usize],
    ) -> Result<SeriesMat> {
        let s = self.divisor_count();
        if novikov_vars.len() != s {
            return Err(Error::RankMismatch(format!(
                "expected {s} Novikov variables, got {}",
                novikov_vars.len()
            )));
        }
        let r = self.rank();
        let mut sol = SeriesMat::identity(scheme, table, r);
        if s == 0 {
            return Ok(sol);
        }
        let quantum: Vec<SeriesMat> = (0..s)
            .map(|u| self.quantum_mult_matrix(scheme, table, novikov_vars, u))
            .collect();
        let classical: Vec<SeriesMat> = (0..s)
            .map(|u| {
                let mat = self.divisor_class(u).mult_matrix();
                SeriesMat::from_fn(r, r, |i, j| {
                    TruncSeries::constant(scheme, table, mat[i][j].clone())
                })
            })
            .collect();
        // Solve key by key in ascending total order. At a fixed key the
        // right-hand side still involves the unknown coefficient through the
        // commutator with the (nilpotent) classical part, so iterate; the
        // commutator gains a power of z⁻¹ each pass and dies after ~2·rank.
        let keys = scheme.keys_supported_on(novikov_vars);
        for key in keys.iter().filter(|k| k.total() > 0) {
            let u = (0..s)
                .find(|&u| key.get(novikov_vars[u]) > 0)
                .expect("nonzero key has a nonzero exponent");
            let inv_du = RatFun::int(table, i64::from(key.get(novikov_vars[u])))
                .inverse()
                .expect("nonzero integer");
            let key_mono = TruncSeries::monomial(scheme, table, key.clone(), 0, RatFun::one(table));
            let mut settled = false;
            for _ in 0..(2 * r + 4) {
                let rhs = sol.mul(&quantum[u]).sub(&classical[u].mul(&sol)).mul_z(-1);
                let piece = rhs.map(|e| e.slice_key(key)).scale(&inv_du);
                let keyed = piece.map(|e| e.mul(&key_mono));
                let stripped = sol.map(|e| {
                    let old = e.slice_key(key).mul(&key_mono);
                    e.sub(&old)
                });
                let next = stripped.add(&keyed);
                if next == sol {
                    settled = true;
                    break;
                }
                sol = next;
            }
            if !settled {
                return Err(Error::AssumptionViolation(format!(
                    "quantum connection solve did not settle at Novikov key {key:?}"
                )));
            }
        }
        // Insurance: the assembled solution must satisfy the connection
        // exactly within the truncation.
        for u in 0..s {
            let lhs = sol.map(|e| e.theta(novikov_vars[u]));
            let rhs = sol.mul(&quantum[u]).sub(&classical[u].mul(&sol)).mul_z(-1);
            let defect = lhs.sub(&rhs);
            for i in 0..r {
                for j in 0..r {
                    if !defect.get(i, j).is_provably_zero() {
                        return Err(Error::AssumptionViolation(format!(
                            "quantum connection defect at direction {u}, entry ({i},{j})"
                        )));
                    }
                }
            }
        }
        Ok(sol)
    }

    /// Check the solution is unitary with respect to the Poincaré pairing:
    /// `L(−z)ᵀ G L(z) = G` with `G` the pairing Gram matrix.
    pub fn check_unitary(&self, sol: &SeriesMat) -> Result<()> {
        let scheme = sol.scheme().clone();
        let table = sol.table().clone();
        let r = self.rank();
        let gram = SeriesMat::from_fn(r, r, |i, j| {
            TruncSeries::constant(&scheme, &table, self.algebra.pairing_entry(i, j).clone())
        });
        let lhs = sol.flip_z().transpose().mul(&gram).mul(sol);
        let defect = lhs.sub(&gram);
        for i in 0..r {
            for j in 0..r {
                if !defect.get(i, j).is_provably_zero() {
                    return Err(Error::AssumptionViolation(format!(
                        "fundamental solution is not unitary at entry ({i},{j})"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coeffs::Rat;

    fn table() -> Arc<VarTable> {
        VarTable::new(&[("l1", 1), ("l2", 1)])
    }

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(n.into(), d.into())
    }

    #[test]
    fn point_solution_is_identity() {
        let table = table();
        let base = BaseSpace::point(&table);
        let scheme = VariableScheme::new(&[], &[], 0, 0);
        let sol = base
            .fundamental_solution(&scheme, &table, &[])
            .expect("point solve");
        assert_eq!(sol.rows(), 1);
        let one = TruncSeries::one(&scheme, &table);
        assert!(sol.get(0, 0).sub(&one).is_provably_zero());
    }

    #[test]
    fn projective_line_solution_matches_hypergeometric_series() {
        let table = table();
        let base = BaseSpace::projective(&table, 1, "h");
        let scheme = VariableScheme::new(&[("Q", 2, 3)], &[], 3, 0);
        let sol = base
            .fundamental_solution(&scheme, &table, &[0])
            .expect("solve");
        // Column 0 is the conjugated J-function: the degree-d coefficient is
        // 1/((h+z)²·(h+2z)²···(h+dz)²) expanded in the basis {1, h}.
        let key1 = scheme.key_one().with_exp(0, 1);
        let key2 = scheme.key_one().with_exp(0, 2);
        let checks = [
            // (row, key, z-power, value)
            (0usize, &key1, -2i32, rat(1, 1)),
            (1usize, &key1, -3i32, rat(-2, 1)),
            (0usize, &key2, -4i32, rat(1, 4)),
            (1usize, &key2, -5i32, rat(-3, 4)),
        ];
        for (row, key, zp, want) in checks {
            let got = sol.get(row, 0).coeff(key, zp).expect("coefficient");
            assert_eq!(got, RatFun::constant(&table, want), "row {row} z^{zp}");
        }
        // Nothing below the checked depth at degree 1.
        assert!(sol.get(0, 0).coeff(&key1, -3).expect("coeff").is_zero());
        base.check_unitary(&sol).expect("unitary");
    }

    #[test]
    fn projective_plane_solution_satisfies_connection_and_unitarity() {
        let table = table();
        let base = BaseSpace::projective(&table, 2, "h");
        let scheme = VariableScheme::new(&[("Q", 3, 3)], &[], 3, 0);
        let sol = base
            .fundamental_solution(&scheme, &table, &[0])
            .expect("solve");
        base.check_unitary(&sol).expect("unitary");
        // Degree-1 column-0 coefficient is 1/((h+z)³) in the basis {1,h,h²}:
        // z⁻³·(1 − 3h/z + 6h²/z²).
        let key1 = scheme.key_one().with_exp(0, 1);
        assert_eq!(
            sol.get(0, 0).coeff(&key1, -3).expect("coeff"),
            RatFun::one(&table)
        );
        assert_eq!(
            sol.get(1, 0).coeff(&key1, -4).expect("coeff"),
            RatFun::int(&table, -3)
        );
        assert_eq!(
            sol.get(2, 0).coeff(&key1, -5).expect("coeff"),
            RatFun::int(&table, 6)
        );
    }

    #[test]
    fn curve_pairing_rejects_non_divisor_classes() {
        let table = table();
        let base = BaseSpace::projective(&table, 2, "h");
        let h2 = AlgebraElement::basis(base.algebra(), 2);
        assert!(base.curve_pairing(&h2, 0).is_err());
        let h = AlgebraElement::basis(base.algebra(), 1);
        assert_eq!(
            base.curve_pairing(&h, 0).expect("pairing"),
            RatFun::one(&table)
        );
    }

    #[test]
    fn new_rejects_quantum_data_without_classical_part() {
        let table = table();
        let algebra = GradedAlgebra::projective_space(&table, 1, "h");
        let err = BaseSpace::new(
            algebra,
            vec![1],
            vec![2],
            vec![vec![1]],
            vec![DivisorProduct {
                by_degree: vec![(vec![1], vec![vec![RatFun::zero(&table); 2]; 2])],
            }],
        );
        assert!(err.is_err());
    }
}
