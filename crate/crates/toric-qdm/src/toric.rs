//! Torus-fixed-point data of a toric fiber bundle and the equivariant
//! cohomology of its total space.
//!
//! The fiber is a smooth projective toric variety presented by GIT data: an
//! integer matrix `c` whose column `j` records the weights of the `j`-th
//! toric divisor under the quotient torus `(ℂ*)^k`, together with the list
//! of torus-fixed points, each given as the set `α` of `k` divisors meeting
//! it. The bundle structure over a base `B` twists divisor `j` by a class
//! `Λ_j ∈ H²(B)`, and the fiberwise torus action contributes one equivariant
//! parameter `λ_j` per divisor.
//!
//! Everything downstream is phrased in terms of the restrictions to the
//! fixed loci: the restricted divisor classes `P_i^α`, the tangent weights
//! `U_j^α`, the Euler classes of the fixed loci, and the localization
//! isomorphism used both to build the equivariant cohomology of the total
//! space and to pair classes by summing residues over fixed points.

use crate::algebra::{element, AlgebraElement, GradedAlgebra, monomial_eval};
use crate::base::BaseSpace;
use crate::coeffs::{rat_int, Rat, RatFun, VarTable};
use crate::error::{Error, Result};
use crate::series::VariableScheme;
use num_traits::{One, Signed, Zero};
use std::sync::Arc;

/// Localization data attached to one torus-fixed locus `α` of the fiber.
pub struct FixedPointChart {
    /// The `k` divisor indices meeting this fixed point, strictly increasing.
    pub alpha: Vec<usize>,
    /// Inverse of the `k×k` weight submatrix: row `n` (position within `α`),
    /// column `i`, with `Σ_i c_inv[n][i]·c[i][m] = δ_{nm}` for `m ∈ α`.
    pub c_inv: Vec<Vec<Rat>>,
    /// Chart exponents `(c_α⁻¹ c)[n][j]` for all divisors `j`; column `j=α[m]`
    /// is the `m`-th unit vector.
    pub exponents: Vec<Vec<Rat>>,
    /// Restrictions `P_i^α = Σ_n c_inv[n][i]·(Λ_{α[n]} + λ_{α[n]})` of the
    /// divisor coordinate classes, as elements of the base cohomology
    /// (index `i = 0..k`).
    pub p_restrict: Vec<AlgebraElement>,
    /// Tangent weights `U_j^α = Σ_i c_{ij} P_i^α − Λ_j − λ_j` (zero for
    /// `j ∈ α`), index `j = 0..N`.
    pub u_restrict: Vec<AlgebraElement>,
    /// Euler class of the fixed locus, `Π_{j∉α} U_j^α`.
    pub euler: AlgebraElement,
    /// Its inverse in the localized base cohomology.
    pub euler_inv: AlgebraElement,
}

/// A toric fiber bundle `E → B` given by GIT data, with the localization
/// package of its total space: per-fixed-point restriction data, the
/// equivariant cohomology ring of `E` assembled through the fixed points,
/// and the grading weights of all deformation variables.
pub struct ToricBundle {
    table: Arc<VarTable>,
    base: Arc<BaseSpace>,
    k: usize,
    n_div: usize,
    c: Vec<Vec<i64>>,
    lambda_vars: Vec<usize>,
    twists: Vec<AlgebraElement>,
    twist_pair: Vec<Vec<i64>>,
    fiber_basis: Vec<Vec<u16>>,
    charts: Vec<FixedPointChart>,
    algebra: Arc<GradedAlgebra>,
    xi: Vec<Vec<RatFun>>,
    xi_inv: Vec<Vec<RatFun>>,
    sigma_dirs: Vec<(usize, usize)>,
}

impl ToricBundle {
    /// Assemble and validate a bundle.
    ///
    /// * `c` — `k×N` integer weight matrix of the fiber's toric divisors.
    /// * `lambda_vars` — scalar-table indices of the equivariant parameters
    ///   `λ_1..λ_N` (weight 1, one per divisor).
    /// * `twists` — twisting classes `Λ_j ∈ H²(B)` in the divisor span of
    ///   the base, with integer curve pairings.
    /// * `fiber_basis` — exponent vectors of the fiber classes `T_1..T_l`
    ///   as monomials in `p_1..p_k`; the first `k` must be `p_1..p_k`
    ///   themselves, and the unit `T_0 = 1` is implicit.
    /// * `fixed` — the fixed-point sets `α` (each `k` divisor indices);
    ///   there must be `l+1` of them.
    pub fn new(
        table: Arc<VarTable>,
        base: Arc<BaseSpace>,
        c: Vec<Vec<i64>>,
        lambda_vars: Vec<usize>,
        twists: Vec<AlgebraElement>,
        fiber_basis: Vec<Vec<u16>>,
        fixed: Vec<Vec<usize>>,
    ) -> Result<Arc<Self>> {
        let k = c.len();
        if k == 0 {
            return Err(Error::RankMismatch("fiber torus rank must be positive".into()));
        }
        let n_div = c[0].len();
        if c.iter().any(|row| row.len() != n_div) {
            return Err(Error::RankMismatch("weight matrix rows differ in length".into()));
        }
        if n_div <= k {
            return Err(Error::RankMismatch(format!(
                "need more divisors than torus rank, got {n_div} ≤ {k}"
            )));
        }
        if lambda_vars.len() != n_div {
            return Err(Error::RankMismatch(format!(
                "expected {n_div} equivariant parameters, got {}",
                lambda_vars.len()
            )));
        }
        for (j, &v) in lambda_vars.iter().enumerate() {
            if v >= table.len() {
                return Err(Error::ConfigError(format!(
                    "equivariant parameter {j} refers to unknown scalar variable {v}"
                )));
            }
            if table.weight(v) != 1 {
                return Err(Error::AssumptionViolation(format!(
                    "equivariant parameter {} must have grading weight 1",
                    table.name(v)
                )));
            }
            if lambda_vars[..j].contains(&v) {
                return Err(Error::AssumptionViolation(format!(
                    "equivariant parameter {} assigned to two divisors",
                    table.name(v)
                )));
            }
        }
        if twists.len() != n_div {
            return Err(Error::RankMismatch(format!(
                "expected {n_div} twisting classes, got {}",
                twists.len()
            )));
        }
        let s = base.divisor_count();
        let mut twist_pair = Vec::with_capacity(n_div);
        for (j, t) in twists.iter().enumerate() {
            if !Arc::ptr_eq(t.algebra(), base.algebra()) {
                return Err(Error::SchemeMismatch(format!(
                    "twisting class {j} lives in a different algebra"
                )));
            }
            let mut row = Vec::with_capacity(s);
            for u in 0..s {
                let p = base.curve_pairing(t, u)?;
                let val = p.as_constant().ok_or_else(|| {
                    Error::AssumptionViolation(format!(
                        "twisting class {j} has a non-constant curve pairing"
                    ))
                })?;
                if !val.denom().is_one() {
                    return Err(Error::NonIntegralExponent(format!(
                        "twisting class {j} pairs non-integrally with curve class {u}"
                    )));
                }
                row.push(rat_to_i64(&val)?);
            }
            twist_pair.push(row);
        }
        let l = fiber_basis.len();
        for (i, m) in fiber_basis.iter().enumerate() {
            if m.len() != k {
                return Err(Error::RankMismatch(format!(
                    "fiber class {i} has {} exponents, expected {k}",
                    m.len()
                )));
            }
            if m.iter().all(|&e| e == 0) {
                return Err(Error::AssumptionViolation(
                    "fiber basis must not contain the unit".into(),
                ));
            }
            if i < k {
                let unit = m.iter().enumerate().all(|(p, &e)| e == u16::from(p == i));
                if !unit {
                    return Err(Error::AssumptionViolation(format!(
                        "fiber class {} must be the divisor class p_{}",
                        i,
                        i + 1
                    )));
                }
            }
            if fiber_basis[..i].contains(m) {
                return Err(Error::AssumptionViolation(format!(
                    "fiber class {i} repeats an earlier monomial"
                )));
            }
        }
        if l < k {
            return Err(Error::RankMismatch(format!(
                "fiber basis must include the {k} divisor classes"
            )));
        }
        if fixed.len() != l + 1 {
            return Err(Error::RankMismatch(format!(
                "fixed-point count {} must equal fiber rank {}",
                fixed.len(),
                l + 1
            )));
        }

        // Per-fixed-point localization data.
        let mut charts = Vec::with_capacity(fixed.len());
        for raw in &fixed {
            let mut alpha = raw.clone();
            alpha.sort_unstable();
            alpha.dedup();
            if alpha.len() != k || alpha.iter().any(|&j| j >= n_div) {
                return Err(Error::UnknownFixedPoint(format!(
                    "fixed point {raw:?} is not a set of {k} divisor indices"
                )));
            }
            if charts
                .iter()
                .any(|ch: &FixedPointChart| ch.alpha == alpha)
            {
                return Err(Error::AssumptionViolation(format!(
                    "fixed point {alpha:?} listed twice"
                )));
            }
            // c_α as a k×k rational matrix M[i][n] = c[i][α[n]], inverted so
            // that Σ_i c_inv[n][i]·c[i][m] = δ_{nm}.
            let m: Vec<Vec<Rat>> = (0..k)
                .map(|i| alpha.iter().map(|&j| rat_int(c[i][j])).collect())
                .collect();
            let c_inv = rat_mat_inverse(&m).ok_or_else(|| {
                Error::NotInvertible(format!("weight submatrix of fixed point {alpha:?}"))
            })?;
            for row in &c_inv {
                for e in row {
                    if e.is_negative() {
                        return Err(Error::NefnessViolation(format!(
                            "fixed point {alpha:?} has a negative inverse-weight entry"
                        )));
                    }
                }
            }
            let exponents: Vec<Vec<Rat>> = (0..k)
                .map(|n| {
                    (0..n_div)
                        .map(|j| {
                            (0..k)
                                .map(|i| &c_inv[n][i] * rat_int(c[i][j]))
                                .fold(Rat::zero(), |a, b| a + b)
                        })
                        .collect()
                })
                .collect();
            let p_restrict: Vec<AlgebraElement> = (0..k)
                .map(|i| {
                    let mut acc = AlgebraElement::zero(base.algebra());
                    for (n, &j) in alpha.iter().enumerate() {
                        let w = twists[j]
                            .add(&AlgebraElement::scalar(
                                base.algebra(),
                                RatFun::var(&table, lambda_vars[j]),
                            ))
                            .scale_rat(&c_inv[n][i]);
                        acc = acc.add(&w);
                    }
                    acc
                })
                .collect();
            let u_restrict: Vec<AlgebraElement> = (0..n_div)
                .map(|j| {
                    let mut acc = AlgebraElement::zero(base.algebra());
                    for i in 0..k {
                        acc = acc.add(&p_restrict[i].scale_rat(&rat_int(c[i][j])));
                    }
                    acc.sub(&twists[j]).sub(&AlgebraElement::scalar(
                        base.algebra(),
                        RatFun::var(&table, lambda_vars[j]),
                    ))
                })
                .collect();
            for (n, &j) in alpha.iter().enumerate() {
                if !u_restrict[j].is_zero() {
                    return Err(Error::AssumptionViolation(format!(
                        "tangent weight {j} does not vanish on its own fixed point \
                         (position {n} of {alpha:?})"
                    )));
                }
            }
            let mut euler = AlgebraElement::one(base.algebra());
            for (j, u) in u_restrict.iter().enumerate() {
                if !alpha.contains(&j) {
                    euler = euler.mul(u);
                }
            }
            let euler_inv = euler.inverse().map_err(|_| {
                Error::NonInvertibleEuler(format!(
                    "Euler class of fixed point {alpha:?} is not invertible; \
                     the equivariant parameters are degenerate"
                ))
            })?;
            charts.push(FixedPointChart {
                alpha,
                c_inv,
                exponents,
                p_restrict,
                u_restrict,
                euler,
                euler_inv,
            });
        }

        // Localization matrix Ξ: row (α, v), column (i, u) holds the
        // φ_v-coordinate of T_i(P^α)·φ_u.
        let m_rank = base.rank();
        let rank = (l + 1) * m_rank;
        let mut xi = vec![vec![RatFun::zero(&table); rank]; rank];
        for (a, chart) in charts.iter().enumerate() {
            let gens = &chart.p_restrict;
            for i in 0..=l {
                let t_of_p = if i == 0 {
                    AlgebraElement::one(base.algebra())
                } else {
                    monomial_eval(base.algebra(), gens, &fiber_basis[i - 1])
                };
                for u in 0..m_rank {
                    let val = t_of_p.mul(&AlgebraElement::basis(base.algebra(), u));
                    let col = i * m_rank + u;
                    for v in 0..m_rank {
                        xi[a * m_rank + v][col] = val.coords()[v].clone();
                    }
                }
            }
        }
        let xi_inv = crate::series::ratfun_mat_inverse(&xi, &table).map_err(|_| {
            Error::NotInvertible(
                "localization matrix is singular; fixed-point restrictions do not \
                 separate the chosen basis"
                    .into(),
            )
        })?;

        // Basis bookkeeping for the total-space algebra.
        let fiber_halfdeg = |i: usize| -> u32 {
            if i == 0 {
                0
            } else {
                fiber_basis[i - 1].iter().map(|&e| u32::from(e)).sum()
            }
        };
        let fiber_name = |i: usize| -> String {
            if i == 0 {
                return "1".into();
            }
            let mut parts = Vec::new();
            for (pos, &e) in fiber_basis[i - 1].iter().enumerate() {
                let var = if k == 1 {
                    "P".to_string()
                } else {
                    format!("P{}", pos + 1)
                };
                match e {
                    0 => {}
                    1 => parts.push(var),
                    _ => parts.push(format!("{var}^{e}")),
                }
            }
            parts.join("·")
        };
        let base_names = base.algebra().names();
        let base_degrees = base.algebra().degrees();
        let mut names = Vec::with_capacity(rank);
        let mut degrees = Vec::with_capacity(rank);
        for i in 0..=l {
            for u in 0..m_rank {
                let name = match (i, u) {
                    (0, 0) => "1".to_string(),
                    (0, _) => base_names[u].clone(),
                    (_, 0) => fiber_name(i),
                    _ => format!("{}·{}", fiber_name(i), base_names[u]),
                };
                names.push(name);
                degrees.push(2 * fiber_halfdeg(i) + base_degrees[u]);
            }
        }

        // Structure constants and pairing through localization: restrict,
        // multiply per fixed point, delocalize; pair by summing
        // `∫_B α*(x)·α*(y)/e_α` over fixed points.
        let restrict_basis = |col: usize| -> Vec<AlgebraElement> {
            charts
                .iter()
                .enumerate()
                .map(|(a, _)| {
                    element(
                        base.algebra(),
                        (0..m_rank)
                            .map(|v| xi[a * m_rank + v][col].clone())
                            .collect(),
                    )
                })
                .collect()
        };
        let restricted: Vec<Vec<AlgebraElement>> = (0..rank).map(restrict_basis).collect();
        let dim_half = {
            let top = degrees.iter().max().copied().unwrap_or(0);
            (top / 2) as i64
        };
        let mut mult = vec![vec![vec![RatFun::zero(&table); rank]; rank]; rank];
        let mut pairing = vec![vec![RatFun::zero(&table); rank]; rank];
        for e1 in 0..rank {
            for e2 in e1..rank {
                // Product.
                let mut loc = Vec::with_capacity(rank);
                for a in 0..charts.len() {
                    loc.push(restricted[e1][a].mul(&restricted[e2][a]));
                }
                let mut coords = vec![RatFun::zero(&table); rank];
                for (e, coord) in coords.iter_mut().enumerate() {
                    let mut acc = RatFun::zero(&table);
                    for (a, piece) in loc.iter().enumerate() {
                        for v in 0..m_rank {
                            acc = acc.add(&xi_inv[e][a * m_rank + v].mul(&piece.coords()[v]));
                        }
                    }
                    *coord = acc;
                }
                let expect =
                    |e: usize| (degrees[e1] + degrees[e2]) as i64 / 2 - degrees[e] as i64 / 2;
                for (e, coord) in coords.iter().enumerate() {
                    if coord.is_zero() {
                        continue;
                    }
                    if !coord.is_polynomial() {
                        return Err(Error::AssumptionViolation(format!(
                            "structure constant ({},{})→{} is not polynomial: {}",
                            names[e1], names[e2], names[e], coord
                        )));
                    }
                    if coord.homogeneous_weight() != Some(expect(e)) {
                        return Err(Error::AssumptionViolation(format!(
                            "structure constant ({},{})→{} is not homogeneous of weight {}",
                            names[e1],
                            names[e2],
                            names[e],
                            expect(e)
                        )));
                    }
                }
                mult[e1][e2] = coords.clone();
                mult[e2][e1] = coords;
                // Pairing.
                let mut val = RatFun::zero(&table);
                for (a, chart) in charts.iter().enumerate() {
                    let term = restricted[e1][a]
                        .mul(&restricted[e2][a])
                        .mul(&chart.euler_inv);
                    val = val.add(&term.integrate());
                }
                if !val.is_zero() {
                    if !val.is_polynomial() {
                        return Err(Error::AssumptionViolation(format!(
                            "pairing ⟨{},{}⟩ is not polynomial: {}",
                            names[e1], names[e2], val
                        )));
                    }
                    let expect = (degrees[e1] + degrees[e2]) as i64 / 2 - dim_half;
                    if val.homogeneous_weight() != Some(expect) {
                        return Err(Error::AssumptionViolation(format!(
                            "pairing ⟨{},{}⟩ is not homogeneous of weight {expect}",
                            names[e1], names[e2]
                        )));
                    }
                }
                pairing[e1][e2] = val.clone();
                pairing[e2][e1] = val;
            }
        }
        let algebra = GradedAlgebra::new(&table, names, degrees, mult, pairing)?;

        // Big deformation directions: fiber classes beyond the divisors
        // against the unit, then every fiber class against each base divisor.
        let mut sigma_dirs = Vec::new();
        for i in (k + 1)..=l {
            sigma_dirs.push((i, 0));
        }
        for j in 1..=s {
            for i in 1..=l {
                sigma_dirs.push((i, j));
            }
        }

        Ok(Arc::new(ToricBundle {
            table,
            base,
            k,
            n_div,
            c,
            lambda_vars,
            twists,
            twist_pair,
            fiber_basis,
            charts,
            algebra,
            xi,
            xi_inv,
            sigma_dirs,
        }))
    }

    /// Scalar table.
    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    /// The base geometry.
    pub fn base(&self) -> &Arc<BaseSpace> {
        &self.base
    }

    /// Fiber torus rank `k`.
    pub fn torus_rank(&self) -> usize {
        self.k
    }

    /// Number of fiber toric divisors `N`.
    pub fn divisor_count(&self) -> usize {
        self.n_div
    }

    /// Number of fiber classes beyond the unit (`l`).
    pub fn fiber_rank(&self) -> usize {
        self.fiber_basis.len()
    }

    /// Weight-matrix entry `c_{ij}`.
    pub fn weight_entry(&self, i: usize, j: usize) -> i64 {
        self.c[i][j]
    }

    /// Scalar-table index of the equivariant parameter `λ_j`.
    pub fn lambda_var(&self, j: usize) -> usize {
        self.lambda_vars[j]
    }

    /// Twisting class `Λ_j`.
    pub fn twist(&self, j: usize) -> &AlgebraElement {
        &self.twists[j]
    }

    /// `⟨Λ_j, D_u⟩` for base curve class `u`.
    pub fn twist_pairing(&self, j: usize, u: usize) -> i64 {
        self.twist_pair[j][u]
    }

    /// Exponent vector of fiber class `T_i` (`1 ≤ i ≤ l`).
    pub fn fiber_class(&self, i: usize) -> &[u16] {
        &self.fiber_basis[i - 1]
    }

    /// Half-degree (grading weight) of fiber class `T_i` (`T_0 = 1`).
    pub fn fiber_weight(&self, i: usize) -> i64 {
        if i == 0 {
            0
        } else {
            self.fiber_basis[i - 1].iter().map(|&e| i64::from(e)).sum()
        }
    }

    /// All fixed-point charts.
    pub fn charts(&self) -> &[FixedPointChart] {
        &self.charts
    }

    /// Chart of fixed point `a`.
    pub fn chart(&self, a: usize) -> Result<&FixedPointChart> {
        self.charts
            .get(a)
            .ok_or_else(|| Error::UnknownFixedPoint(format!("fixed-point index {a}")))
    }

    /// Equivariant cohomology of the total space, basis `T_i·φ_u` ordered
    /// with the base index fastest.
    pub fn total_algebra(&self) -> &Arc<GradedAlgebra> {
        &self.algebra
    }

    /// Basis index of `T_i·φ_u` in the total-space algebra.
    pub fn basis_index(&self, i: usize, u: usize) -> usize {
        i * self.base.rank() + u
    }

    /// Restriction `α*(x)` of a total-space class to fixed point `a`, as an
    /// element of the base cohomology.
    pub fn restrict(&self, a: usize, x: &AlgebraElement) -> Result<AlgebraElement> {
        if !Arc::ptr_eq(x.algebra(), &self.algebra) {
            return Err(Error::SchemeMismatch(
                "restriction expects a total-space class".into(),
            ));
        }
        self.chart(a)?;
        let m_rank = self.base.rank();
        let coords = (0..m_rank)
            .map(|v| {
                let mut acc = RatFun::zero(&self.table);
                for (col, c) in x.coords().iter().enumerate() {
                    if !c.is_zero() {
                        acc = acc.add(&self.xi[a * m_rank + v][col].mul(c));
                    }
                }
                acc
            })
            .collect();
        Ok(element(self.base.algebra(), coords))
    }

    /// Reassemble a total-space class from its fixed-point restrictions.
    pub fn delocalize(&self, pieces: &[AlgebraElement]) -> Result<AlgebraElement> {
        if pieces.len() != self.charts.len() {
            return Err(Error::RankMismatch(format!(
                "expected {} restrictions, got {}",
                self.charts.len(),
                pieces.len()
            )));
        }
        let m_rank = self.base.rank();
        let rank = self.algebra.rank();
        let coords = (0..rank)
            .map(|e| {
                let mut acc = RatFun::zero(&self.table);
                for (a, piece) in pieces.iter().enumerate() {
                    for v in 0..m_rank {
                        acc = acc.add(&self.xi_inv[e][a * m_rank + v].mul(&piece.coords()[v]));
                    }
                }
                acc
            })
            .collect();
        Ok(element(&self.algebra, coords))
    }

    /// Grading weight of the fiber Novikov variable `q_i`: the row sum
    /// `Σ_j c_{ij}`.
    pub fn fiber_novikov_weight(&self, i: usize) -> i64 {
        self.c[i].iter().sum()
    }

    /// Grading weight of the base Novikov variable `Q_u` in the total-space
    /// theory: `⟨c₁(TB), D_u⟩ − Σ_j ⟨Λ_j, D_u⟩`.
    pub fn base_novikov_weight(&self, u: usize) -> i64 {
        self.base.c1_pairing(u) - self.twist_pair.iter().map(|row| row[u]).sum::<i64>()
    }

    /// Novikov coupling of tangent direction `j` at multidegree
    /// `(d, D)`: `Σ_i c_{ij} d_i − ⟨Λ_j, D⟩`.
    pub fn tangent_coupling(&self, j: usize, fiber_deg: &[u16], base_deg: &[u16]) -> i64 {
        let from_fiber: i64 = (0..self.k)
            .map(|i| self.c[i][j] * i64::from(fiber_deg[i]))
            .sum();
        let from_base: i64 = (0..self.base.divisor_count())
            .map(|u| self.twist_pair[j][u] * i64::from(base_deg[u]))
            .sum();
        from_fiber - from_base
    }

    /// Curve pairing `P_i^α(D_u) = Σ_n c_inv[n][i]·⟨Λ_{α[n]}, D_u⟩` used to
    /// reindex base Novikov variables at fixed point `a`; rational in
    /// general (the caller decides whether a non-integer is an error).
    pub fn restricted_divisor_pairing(&self, a: usize, i: usize, u: usize) -> Result<Rat> {
        let chart = self.chart(a)?;
        let mut acc = Rat::zero();
        for (n, &j) in chart.alpha.iter().enumerate() {
            acc += &chart.c_inv[n][i] * rat_int(self.twist_pair[j][u]);
        }
        Ok(acc)
    }

    /// The big deformation directions `(i, j)`: fiber classes beyond the
    /// divisor span against the unit, then every fiber class against each
    /// base divisor (`j ≥ 1` refers to the `j`-th base divisor direction).
    pub fn sigma_directions(&self) -> &[(usize, usize)] {
        &self.sigma_dirs
    }

    /// Grading weight of the deformation parameter in direction `(i, j)`:
    /// `1 − wt(T_i) − wt(φ_j)` in half-degree units.
    pub fn sigma_weight(&self, i: usize, j: usize) -> i64 {
        let base_half = if j == 0 {
            0
        } else {
            i64::from(self.base.algebra().degrees()[self.base.divisor_index(j - 1)]) / 2
        };
        1 - self.fiber_weight(i) - base_half
    }

    /// Basis index in the total-space algebra of the class inserted by
    /// deformation direction `(i, j)`.
    pub fn sigma_class_index(&self, i: usize, j: usize) -> usize {
        let u = if j == 0 {
            0
        } else {
            self.base.divisor_index(j - 1)
        };
        self.basis_index(i, u)
    }

    /// Build the deformation-variable scheme of the total-space theory:
    /// fiber Novikov variables `q_i`, base Novikov variables `Q_u`, then one
    /// parameter per big direction, with the stated caps.
    pub fn variable_scheme(&self, nov_cap: u32, par_cap: u32) -> Arc<VariableScheme> {
        let nov_names: Vec<String> = (0..self.k)
            .map(|i| {
                if self.k == 1 {
                    "q".to_string()
                } else {
                    format!("q{}", i + 1)
                }
            })
            .chain((0..self.base.divisor_count()).map(|u| {
                if self.base.divisor_count() == 1 {
                    "Q".to_string()
                } else {
                    format!("Q{}", u + 1)
                }
            }))
            .collect();
        let nov_weights: Vec<i64> = (0..self.k)
            .map(|i| self.fiber_novikov_weight(i))
            .chain((0..self.base.divisor_count()).map(|u| self.base_novikov_weight(u)))
            .collect();
        let par_names: Vec<String> = self
            .sigma_dirs
            .iter()
            .map(|&(i, j)| format!("s{i}_{j}"))
            .collect();
        let nov_cap16 = nov_cap.min(u32::from(u16::MAX)) as u16;
        let par_cap16 = par_cap.min(u32::from(u16::MAX)) as u16;
        let novikov: Vec<(&str, i64, u16)> = nov_names
            .iter()
            .zip(&nov_weights)
            .map(|(n, &w)| (n.as_str(), w, nov_cap16))
            .collect();
        let params: Vec<(&str, i64, u16)> = par_names
            .iter()
            .zip(self.sigma_dirs.iter())
            .map(|(n, &(i, j))| (n.as_str(), self.sigma_weight(i, j), par_cap16))
            .collect();
        VariableScheme::new(&novikov, &params, nov_cap, par_cap)
    }
}

/// Exact inverse of a square rational matrix (Gauss–Jordan); `None` when
/// singular.
fn rat_mat_inverse(m: &[Vec<Rat>]) -> Option<Vec<Vec<Rat>>> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut inv: Vec<Vec<Rat>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }).collect())
        .collect();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        inv.swap(col, piv);
        let p = a[col][col].clone();
        for j in 0..n {
            a[col][j] = &a[col][j] / &p;
            inv[col][j] = &inv[col][j] / &p;
        }
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = a[r][col].clone();
            for j in 0..n {
                let av = &a[col][j] * &f;
                a[r][j] = &a[r][j] - &av;
                let iv = &inv[col][j] * &f;
                inv[r][j] = &inv[r][j] - &iv;
            }
        }
    }
    Some(inv)
}

fn rat_to_i64(r: &Rat) -> Result<i64> {
    use num_traits::ToPrimitive;
    r.to_integer()
        .to_i64()
        .ok_or_else(|| Error::ConfigError("integer out of range".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{check_presentation, Expr};

    fn projective_over_point(n_div: usize) -> (Arc<VarTable>, Arc<ToricBundle>) {
        let entries: Vec<(String, i64)> = (1..=n_div).map(|j| (format!("l{j}"), 1)).collect();
        let refs: Vec<(&str, i64)> = entries.iter().map(|(n, w)| (n.as_str(), *w)).collect();
        let table = VarTable::new(&refs);
        let base = Arc::new(BaseSpace::point(&table));
        let zero = AlgebraElement::zero(base.algebra());
        let basis: Vec<Vec<u16>> = (1..n_div).map(|e| vec![e as u16]).collect();
        let bundle = ToricBundle::new(
            table.clone(),
            base,
            vec![vec![1; n_div]],
            (0..n_div).collect(),
            vec![zero; n_div],
            basis,
            (0..n_div).map(|j| vec![j]).collect(),
        )
        .expect("projective space data");
        (table, bundle)
    }

    fn hirzebruch() -> (Arc<VarTable>, Arc<ToricBundle>) {
        let table = VarTable::new(&[("l1", 1), ("l2", 1)]);
        let base = Arc::new(BaseSpace::projective(&table, 1, "f"));
        let zero = AlgebraElement::zero(base.algebra());
        let phi = AlgebraElement::basis(base.algebra(), 1);
        let bundle = ToricBundle::new(
            table.clone(),
            base,
            vec![vec![1, 1]],
            vec![0, 1],
            vec![zero, phi],
            vec![vec![1]],
            vec![vec![0], vec![1]],
        )
        .expect("twisted projective-line bundle data");
        (table, bundle)
    }

    #[test]
    fn projective_space_localization_data() {
        let (table, bundle) = projective_over_point(3);
        // P^{α_n} = λ_n and e_α = Π_{j≠n} (λ_n − λ_j).
        for (a, chart) in bundle.charts().iter().enumerate() {
            let lam = RatFun::var(&table, a);
            assert_eq!(chart.p_restrict[0].unit_part(), &lam);
            let mut expect = RatFun::one(&table);
            for j in 0..3 {
                if j != a {
                    expect = expect.mul(&lam.sub(&RatFun::var(&table, j)));
                }
            }
            assert_eq!(chart.euler.unit_part(), &expect);
        }
        // Classical presentation: Π_j (P − λ_j) = 0.
        let p = AlgebraElement::basis(bundle.total_algebra(), 1);
        let rel = (0..3).fold(Expr::scalar(RatFun::one(&table)), |acc, j| {
            acc.mul(Expr::gen(0).sub(Expr::scalar(RatFun::var(&table, j))))
        });
        let failures = check_presentation(&[p], &[rel]).expect("evaluation");
        assert!(failures.is_empty(), "classical relation fails: {failures:?}");
        // One big direction: T_2 = P² against the unit, weight −1.
        assert_eq!(bundle.sigma_directions(), &[(2, 0)]);
        assert_eq!(bundle.sigma_weight(2, 0), -1);
        assert_eq!(bundle.fiber_novikov_weight(0), 3);
    }

    #[test]
    fn twisted_bundle_restrictions_and_relations() {
        let (table, bundle) = hirzebruch();
        let l1 = RatFun::var(&table, 0);
        let l2 = RatFun::var(&table, 1);
        // α = {0}: P = λ₁·1; U₂ = λ₁ − λ₂ − φ.
        let chart0 = bundle.chart(0).expect("chart");
        assert_eq!(chart0.p_restrict[0].unit_part(), &l1);
        assert!(chart0.p_restrict[0].coords()[1].is_zero());
        assert_eq!(chart0.u_restrict[1].unit_part(), &l1.sub(&l2));
        assert_eq!(chart0.u_restrict[1].coords()[1], RatFun::int(&table, -1));
        // α = {1}: P = λ₂ + φ.
        let chart1 = bundle.chart(1).expect("chart");
        assert_eq!(chart1.p_restrict[0].unit_part(), &l2);
        assert_eq!(chart1.p_restrict[0].coords()[1], RatFun::one(&table));
        // Classical presentation: φ² = 0 and (P − λ₁)(P − φ − λ₂) = 0.
        let phi = AlgebraElement::basis(bundle.total_algebra(), 1);
        let p = AlgebraElement::basis(bundle.total_algebra(), 2);
        let rel_phi = Expr::gen(0).pow(2);
        let rel_p = Expr::gen(1)
            .sub(Expr::scalar(l1.clone()))
            .mul(Expr::gen(1).sub(Expr::gen(0)).sub(Expr::scalar(l2.clone())));
        let failures = check_presentation(&[phi, p], &[rel_phi, rel_p]).expect("evaluation");
        assert!(failures.is_empty(), "classical relations fail: {failures:?}");
        // Poincaré pairings: ⟨P,P⟩ = 1, ⟨P,φ⟩ = 1, ⟨φ,φ⟩ = 0, ⟨1,P·φ⟩ = 1.
        let alg = bundle.total_algebra();
        assert_eq!(alg.pairing_entry(2, 2), &RatFun::one(&table));
        assert_eq!(alg.pairing_entry(2, 1), &RatFun::one(&table));
        assert!(alg.pairing_entry(1, 1).is_zero());
        assert_eq!(alg.pairing_entry(0, 3), &RatFun::one(&table));
        // Product P·P = (λ₁+λ₂)P + P·φ − λ₁φ − λ₁λ₂.
        let pp = alg.mult_entry(2, 2);
        assert_eq!(pp[0], l1.mul(&l2).neg());
        assert_eq!(pp[1], l1.neg());
        assert_eq!(pp[2], l1.add(&l2));
        assert_eq!(pp[3], RatFun::one(&table));
        // Grading weights: deg q = 2, deg Q = 2 − 1 = 1, σ-direction (1,1)
        // with weight −1.
        assert_eq!(bundle.fiber_novikov_weight(0), 2);
        assert_eq!(bundle.base_novikov_weight(0), 1);
        assert_eq!(bundle.sigma_directions(), &[(1, 1)]);
        assert_eq!(bundle.sigma_weight(1, 1), -1);
        // Tangent couplings at multidegree (d, D): U₁ ↦ d, U₂ ↦ d − D.
        assert_eq!(bundle.tangent_coupling(0, &[3], &[2]), 3);
        assert_eq!(bundle.tangent_coupling(1, &[3], &[2]), 1);
        // Restricted-divisor curve pairings: 0 at α₀, 1 at α₁.
        assert_eq!(
            bundle.restricted_divisor_pairing(0, 0, 0).expect("pairing"),
            Rat::zero()
        );
        assert_eq!(
            bundle.restricted_divisor_pairing(1, 0, 0).expect("pairing"),
            Rat::one()
        );
    }

    #[test]
    fn restriction_and_delocalization_roundtrip() {
        let (_, bundle) = hirzebruch();
        let alg = bundle.total_algebra();
        let x = AlgebraElement::basis(alg, 2)
            .mul(&AlgebraElement::basis(alg, 1))
            .add(&AlgebraElement::basis(alg, 3).scale_rat(&rat_int(5)));
        let pieces: Vec<AlgebraElement> = (0..2)
            .map(|a| bundle.restrict(a, &x).expect("restriction"))
            .collect();
        let back = bundle.delocalize(&pieces).expect("delocalization");
        assert!(back.sub(&x).is_zero());
    }

    #[test]
    fn product_of_lines_over_point() {
        let table = VarTable::new(&[("l1", 1), ("l2", 1), ("l3", 1), ("l4", 1)]);
        let base = Arc::new(BaseSpace::point(&table));
        let zero = AlgebraElement::zero(base.algebra());
        let bundle = ToricBundle::new(
            table.clone(),
            base,
            vec![vec![1, 1, 0, 0], vec![0, 0, 1, 1]],
            vec![0, 1, 2, 3],
            vec![zero; 4],
            vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            vec![vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3]],
        )
        .expect("product of lines");
        assert_eq!(bundle.total_algebra().rank(), 4);
        let p1 = AlgebraElement::basis(bundle.total_algebra(), 1);
        let p2 = AlgebraElement::basis(bundle.total_algebra(), 2);
        let rel1 = Expr::gen(0)
            .sub(Expr::scalar(RatFun::var(&table, 0)))
            .mul(Expr::gen(0).sub(Expr::scalar(RatFun::var(&table, 1))));
        let rel2 = Expr::gen(1)
            .sub(Expr::scalar(RatFun::var(&table, 2)))
            .mul(Expr::gen(1).sub(Expr::scalar(RatFun::var(&table, 3))));
        let failures = check_presentation(&[p1, p2], &[rel1, rel2]).expect("evaluation");
        assert!(failures.is_empty(), "{failures:?}");
        assert_eq!(bundle.sigma_directions(), &[(3, 0)]);
    }

    #[test]
    fn validation_rejects_bad_data() {
        let table = VarTable::new(&[("l1", 1), ("l2", 1)]);
        let base = Arc::new(BaseSpace::point(&table));
        let zero = AlgebraElement::zero(base.algebra());
        // Negative inverse weight: chart {0} of c = [−1, 1].
        let err = ToricBundle::new(
            table.clone(),
            base.clone(),
            vec![vec![-1, 1]],
            vec![0, 1],
            vec![zero.clone(), zero.clone()],
            vec![vec![1]],
            vec![vec![0], vec![1]],
        );
        assert!(matches!(err, Err(Error::NefnessViolation(_))));
        // Singular weight submatrix.
        let table4 = VarTable::new(&[("l1", 1), ("l2", 1), ("l3", 1), ("l4", 1)]);
        let base4 = Arc::new(BaseSpace::point(&table4));
        let zero4 = AlgebraElement::zero(base4.algebra());
        let err = ToricBundle::new(
            table4.clone(),
            base4,
            vec![vec![1, 1, 0, 0], vec![1, 1, 1, 1]],
            vec![0, 1, 2, 3],
            vec![zero4; 4],
            vec![vec![1, 0], vec![0, 1], vec![1, 1]],
            vec![vec![0, 1], vec![0, 3], vec![1, 2], vec![2, 3]],
        );
        assert!(matches!(err, Err(Error::NotInvertible(_))));
        // Fixed-point count must match the fiber rank.
        let err = ToricBundle::new(
            table.clone(),
            base.clone(),
            vec![vec![1, 1]],
            vec![0, 1],
            vec![zero.clone(), zero.clone()],
            vec![vec![1]],
            vec![vec![0]],
        );
        assert!(matches!(err, Err(Error::RankMismatch(_))));
        // Degenerate equivariant parameters: λ repeated makes the Euler
        // class vanish.
        let err = ToricBundle::new(
            table.clone(),
            base,
            vec![vec![1, 1]],
            vec![0, 0],
            vec![zero.clone(), zero],
            vec![vec![1]],
            vec![vec![0], vec![1]],
        );
        assert!(err.is_err());
    }
}
