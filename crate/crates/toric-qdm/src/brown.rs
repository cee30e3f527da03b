//! Hypergeometric deformation series of the total space and its
//! fixed-point restrictions.
//!
//! The cohomology-valued series of the bundle modifies the base solution
//! by one factor per toric divisor: at multidegree `(d, D)` the tangent
//! direction `j` with coupling `a = Σ_i c_{ij} d_i − ⟨Λ_j, D⟩` contributes
//!
//! ```text
//! Π_{m=-∞}^{0} (U_j + m z)  /  Π_{m=-∞}^{a} (U_j + m z),
//! ```
//!
//! a polynomial factor when `a < 0` and an inverted one when `a > 0`.
//! This module assembles that series (expanded at `z = ∞`), applies the
//! big deformation in the directions beyond the divisor classes, and
//! produces the column matrix of its parameter derivatives, which is the
//! input of the Birkhoff factorization.
//!
//! It also assembles the restriction of the series to one fixed point
//! (expanded at `z = 0`, where the restricted tangent weights are
//! invertible) and verifies the identity tying it to the stationary-phase
//! data of the mirror: after clearing the common transcendental prefactor,
//!
//! ```text
//! Σ_D q^{P^α(D)} Q^D · Red^α(λ + z·⟨Λ,D⟩ + Λ) · Π_{j∉α} H_{j,D} · Ĵ_D
//!   = α*(Î) · Π_{j∉α} g(−z / α*U_j),
//! ```
//!
//! where `Red^α = e^{F^α/z} Σ_n A_n^α z^n` is the stationary-phase series,
//! `Ĵ_D` the base-solution coefficient, `g` the Bernoulli tail, and
//! `H_{j,D}` the exact ratio of phase prefactors under the `z`-shift of
//! the restricted weight forced by the equivariant parameters.

use crate::algebra::AlgebraElement;
use crate::coeffs::{rat_int, Mono, Rat, RatFun, VarTable};
use crate::error::{Error, Result};
use crate::mirror::{critical_branch, gamma_tail, stationary_phase};
use crate::series::{SeriesMat, TruncSeries, VariableScheme};
use crate::toric::ToricBundle;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::sync::Arc;

/// Positions of the bundle's deformation variables inside a scheme:
/// fiber Novikov directions, base Novikov directions, and one parameter
/// per big deformation direction.
pub struct SchemeLayout {
    /// Fiber Novikov variables `q_i`.
    pub q: Vec<usize>,
    /// Base Novikov variables `Q_u`.
    pub qq: Vec<usize>,
    /// Big deformation parameters, in `sigma_directions` order.
    pub sigma: Vec<usize>,
}

/// Locate the bundle's variables in `scheme` by their conventional names
/// (`q`/`q1..`, `Q`/`Q1..`, `s{i}_{j}`).
pub fn scheme_layout(bundle: &ToricBundle, scheme: &Arc<VariableScheme>) -> Result<SchemeLayout> {
    let k = bundle.torus_rank();
    let s = bundle.base().divisor_count();
    let find = |name: &str| {
        scheme.index_of(name).ok_or_else(|| {
            Error::SchemeMismatch(format!("scheme has no variable named {name}"))
        })
    };
    let mut q = Vec::with_capacity(k);
    for i in 0..k {
        let name = if k == 1 { "q".to_string() } else { format!("q{}", i + 1) };
        q.push(find(&name)?);
    }
    let mut qq = Vec::with_capacity(s);
    for u in 0..s {
        let name = if s == 1 { "Q".to_string() } else { format!("Q{}", u + 1) };
        qq.push(find(&name)?);
    }
    let mut sigma = Vec::new();
    for &(i, j) in bundle.sigma_directions() {
        sigma.push(find(&format!("s{i}_{j}"))?);
    }
    Ok(SchemeLayout { q, qq, sigma })
}

/// Lift a rational matrix into a constant series matrix.
pub(crate) fn lift_mat(
    scheme: &Arc<VariableScheme>,
    table: &Arc<VarTable>,
    m: &[Vec<RatFun>],
) -> SeriesMat {
    SeriesMat::from_fn(m.len(), m[0].len(), |i, j| {
        TruncSeries::constant(scheme, table, m[i][j].clone())
    })
}

/// The total-space class `U_j = Σ_i c_{ij} P_i − Λ_j − λ_j`.
fn tangent_class(bundle: &ToricBundle, j: usize) -> AlgebraElement {
    let algebra = bundle.total_algebra();
    let table = bundle.table();
    let mut acc = AlgebraElement::zero(algebra);
    for i in 0..bundle.torus_rank() {
        let c = bundle.weight_entry(i, j);
        if c != 0 {
            acc = acc.add(
                &AlgebraElement::basis(algebra, bundle.basis_index(i + 1, 0))
                    .scale_rat(&Rat::from_integer(c.into())),
            );
        }
    }
    for (u, c) in bundle.twist(j).coords().iter().enumerate() {
        if !c.is_zero() {
            acc = acc.sub(&AlgebraElement::basis(algebra, bundle.basis_index(0, u)).scale(c));
        }
    }
    acc.sub(&AlgebraElement::scalar(
        algebra,
        RatFun::var(table, bundle.lambda_var(j)),
    ))
}

/// Base-solution coefficients `Ĵ_D`, keyed by the base Novikov part of the
/// scheme (column 0 of the base fundamental solution, sliced per key).
fn base_coefficients(
    bundle: &ToricBundle,
    scheme: &Arc<VariableScheme>,
    layout: &SchemeLayout,
) -> Result<Vec<(Mono, Vec<TruncSeries>)>> {
    let table = bundle.table();
    let sol = bundle
        .base()
        .fundamental_solution(scheme, table, &layout.qq)?;
    let col = sol.column(0);
    let keys = scheme.keys_supported_on(&layout.qq);
    let mut out = Vec::new();
    for key in keys {
        let slice: Vec<TruncSeries> = col.iter().map(|e| e.slice_key(&key)).collect();
        if slice.iter().all(|e| e.is_provably_zero()) {
            continue;
        }
        out.push((key, slice));
    }
    Ok(out)
}

/// Largest exact `z`-power present in a column (0 when empty).
fn column_top(v: &SeriesMat) -> i32 {
    let mut top = 0;
    for i in 0..v.rows() {
        if let Some((_, hi)) = v.get(i, 0).z_support() {
            top = top.max(hi);
        }
    }
    top
}

/// Smallest exact `z`-power present in a column (0 when empty).
fn column_bottom(v: &SeriesMat) -> i32 {
    let mut bot = 0;
    for i in 0..v.rows() {
        if let Some((lo, _)) = v.get(i, 0).z_support() {
            bot = bot.min(lo);
        }
    }
    bot
}

/// Apply `(M + mz)^{-1}` to a column, expanded at `z = ∞`:
/// `Σ_{r≥0} (−1)^r m^{−r−1} z^{−r−1} M^r`, truncated below at `z_lo`.
fn apply_inverse_at_infinity(
    v: &SeriesMat,
    m_mat: &SeriesMat,
    m: i64,
    z_lo: i32,
) -> SeriesMat {
    let steps = (column_top(v) - z_lo + 1).max(0);
    let minv = Rat::new(1.into(), m.into());
    let mut w = v.scale(&RatFun::constant(v.table(), minv.clone())).mul_z(-1);
    let mut acc = w.clone();
    for _ in 0..steps {
        w = m_mat
            .mul(&w)
            .scale(&RatFun::constant(v.table(), -minv.clone()))
            .mul_z(-1);
        acc = acc.add(&w);
    }
    acc.truncate_window(z_lo, i32::MAX)
}

/// Apply `(M + mz)` (with `m` possibly zero) to a column.
fn apply_linear_factor(v: &SeriesMat, m_mat: &SeriesMat, m: i64) -> SeriesMat {
    let shifted = v
        .mul_z(1)
        .scale(&RatFun::constant(v.table(), Rat::from_integer(m.into())));
    m_mat.mul(v).add(&shifted)
}

/// The conjugated cohomology-valued series of the bundle as a column over
/// the total-space basis, expanded at `z = ∞` and exact on `[z_lo, ∞)`:
/// every multidegree within the scheme caps contributes the image of the
/// base-solution coefficient, modified by one tangent-weight factor per
/// divisor. The leading term is the unit.
pub fn i_function(
    bundle: &ToricBundle,
    scheme: &Arc<VariableScheme>,
    z_lo: i32,
) -> Result<SeriesMat> {
    let table = bundle.table();
    let layout = scheme_layout(bundle, scheme)?;
    let rank = bundle.total_algebra().rank();
    let n_div = bundle.divisor_count();
    let u_mats: Vec<SeriesMat> = (0..n_div)
        .map(|j| lift_mat(scheme, table, &tangent_class(bundle, j).mult_matrix()))
        .collect();
    let base_coeffs = base_coefficients(bundle, scheme, &layout)?;
    let keys = scheme.keys_supported_on(
        &layout
            .q
            .iter()
            .chain(layout.qq.iter())
            .copied()
            .collect::<Vec<_>>(),
    );
    let mut acc = SeriesMat::zero(scheme, table, rank, 1);
    for key in keys {
        let d: Vec<u16> = layout.q.iter().map(|&v| key.get(v)).collect();
        let dd: Vec<u16> = layout.qq.iter().map(|&v| key.get(v)).collect();
        let base_key = {
            let mut k = scheme.key_one();
            for (&v, &e) in layout.qq.iter().zip(&dd) {
                if e > 0 {
                    k = k.with_exp(v, e);
                }
            }
            k
        };
        let Some((_, jd)) = base_coeffs.iter().find(|(k, _)| *k == base_key) else {
            continue;
        };
        // Image of the base coefficient in the total space (base block of
        // the basis).
        let mut v = SeriesMat::zero(scheme, table, rank, 1);
        for (u, e) in jd.iter().enumerate() {
            v.set(bundle.basis_index(0, u), 0, e.clone());
        }
        let couplings: Vec<i64> = (0..n_div)
            .map(|j| bundle.tangent_coupling(j, &d, &dd))
            .collect();
        // Polynomial factors first (they raise the z-top), inverses after.
        for j in 0..n_div {
            let a = couplings[j];
            for m in 0..(-a).max(0) {
                v = apply_linear_factor(&v, &u_mats[j], -m);
            }
        }
        for j in 0..n_div {
            let a = couplings[j];
            for m in 1..=a.max(0) {
                v = apply_inverse_at_infinity(&v, &u_mats[j], m, z_lo);
            }
        }
        let mono = TruncSeries::monomial(scheme, table, key.clone(), 0, RatFun::one(table));
        acc = acc.add(&v.scale_series(&mono));
    }
    Ok(acc)
}

/// Apply the conjugated divisor-direction operator `M + z·θ_v` to a column.
pub(crate) fn divisor_operator(v: &SeriesMat, m_mat: &SeriesMat, var: usize) -> SeriesMat {
    m_mat.mul(v).add(&v.map(|e| e.theta(var)).mul_z(1))
}

/// Apply one big-direction operator `∂_{τ_j} T_i(z∂_t)` in conjugated form.
fn big_direction_operator(
    bundle: &ToricBundle,
    layout: &SchemeLayout,
    p_mats: &[SeriesMat],
    phi_mats: &[SeriesMat],
    i: usize,
    j: usize,
    v: &SeriesMat,
) -> SeriesMat {
    let mut out = v.clone();
    for (a, &e) in bundle.fiber_class(i).iter().enumerate() {
        for _ in 0..e {
            out = divisor_operator(&out, &p_mats[a], layout.q[a]);
        }
    }
    if j == 0 {
        out.mul_z(-1)
    } else {
        phi_mats[j - 1]
            .mul(&out)
            .mul_z(-1)
            .add(&out.map(|e| e.theta(layout.qq[j - 1])))
    }
}

/// The series of [`i_function`] deformed in the big directions: each
/// direction `(i, j)` applies `exp(σ_{i,j} ∂_{τ_j} T_i(z∂_t))` in
/// conjugated form, truncated by the parameter caps of the scheme.
pub fn big_i(
    bundle: &ToricBundle,
    scheme: &Arc<VariableScheme>,
    z_lo: i32,
) -> Result<SeriesMat> {
    let table = bundle.table();
    let layout = scheme_layout(bundle, scheme)?;
    let algebra = bundle.total_algebra();
    let k = bundle.torus_rank();
    let p_mats: Vec<SeriesMat> = (0..k)
        .map(|a| {
            lift_mat(
                scheme,
                table,
                &AlgebraElement::basis(algebra, bundle.basis_index(a + 1, 0)).mult_matrix(),
            )
        })
        .collect();
    let phi_mats: Vec<SeriesMat> = (0..bundle.base().divisor_count())
        .map(|u| {
            lift_mat(
                scheme,
                table,
                &AlgebraElement::basis(
                    algebra,
                    bundle.basis_index(0, bundle.base().divisor_index(u)),
                )
                .mult_matrix(),
            )
        })
        .collect();
    let mut acc = i_function(bundle, scheme, z_lo)?;
    for (pos, &(i, j)) in bundle.sigma_directions().iter().enumerate() {
        let var = layout.sigma[pos];
        let cap = scheme.cap(var);
        if cap == 0 {
            continue;
        }
        let mut power = acc.clone();
        let mut factorial = Rat::one();
        let mut deformed = acc.clone();
        for n in 1..=cap {
            power = big_direction_operator(bundle, &layout, &p_mats, &phi_mats, i, j, &power);
            factorial *= Rat::from_integer(i64::from(n).into());
            let mono = TruncSeries::monomial(
                scheme,
                table,
                scheme.key_one().with_exp(var, n),
                0,
                RatFun::constant(table, factorial.recip()),
            );
            deformed = deformed.add(&power.scale_series(&mono));
        }
        acc = deformed;
    }
    Ok(acc)
}

/// Columns of parameter derivatives of the deformed series: for each basis
/// class `T_i φ_u`, the conjugated `z∂` of [`big_i`] in the matching
/// direction (divisor directions act through `M + zθ`, big directions
/// through the explicit parameter). At the origin this matrix is the
/// identity; it is the input of the Birkhoff factorization.
pub fn i_solution_columns(
    bundle: &ToricBundle,
    scheme: &Arc<VariableScheme>,
    big: &SeriesMat,
) -> Result<SeriesMat> {
    let table = bundle.table();
    let layout = scheme_layout(bundle, scheme)?;
    let algebra = bundle.total_algebra();
    let rank = algebra.rank();
    let m_rank = bundle.base().rank();
    if m_rank != 1 + bundle.base().divisor_count() {
        return Err(Error::AssumptionViolation(
            "column assembly needs every non-unit base class to be a divisor".into(),
        ));
    }
    let mut columns: Vec<Option<Vec<TruncSeries>>> = vec![None; rank];
    columns[bundle.basis_index(0, 0)] = Some(big.column(0));
    for a in 0..bundle.torus_rank() {
        let m_mat = lift_mat(
            scheme,
            table,
            &AlgebraElement::basis(algebra, bundle.basis_index(a + 1, 0)).mult_matrix(),
        );
        let col = divisor_operator(big, &m_mat, layout.q[a]);
        columns[bundle.basis_index(a + 1, 0)] = Some(col.column(0));
    }
    for u in 0..bundle.base().divisor_count() {
        let m_mat = lift_mat(
            scheme,
            table,
            &AlgebraElement::basis(
                algebra,
                bundle.basis_index(0, bundle.base().divisor_index(u)),
            )
            .mult_matrix(),
        );
        let col = divisor_operator(big, &m_mat, layout.qq[u]);
        columns[bundle.basis_index(0, bundle.base().divisor_index(u))] = Some(col.column(0));
    }
    for (pos, &(i, j)) in bundle.sigma_directions().iter().enumerate() {
        let col = big.map(|e| e.derivative_var(layout.sigma[pos])).mul_z(1);
        columns[bundle.sigma_class_index(i, j)] = Some(col.column(0));
    }
    let cols: Result<Vec<Vec<TruncSeries>>> = columns
        .into_iter()
        .enumerate()
        .map(|(b, c)| {
            c.ok_or_else(|| {
                Error::AssumptionViolation(format!(
                    "no deformation direction covers basis class {b}"
                ))
            })
        })
        .collect();
    Ok(SeriesMat::from_columns(&cols?))
}

/// The restriction of the bundle's series to fixed point `chart_idx`, as a
/// column over the base cohomology, expanded at `z = 0` (tangent weights
/// outside `α` are invertible there; directions inside `α` restrict to
/// exact `z`-monomial factors). Exact below, truncated above `z_hi`.
pub fn restricted_i_function(
    bundle: &ToricBundle,
    chart_idx: usize,
    scheme: &Arc<VariableScheme>,
    z_hi: i32,
) -> Result<SeriesMat> {
    let table = bundle.table();
    let layout = scheme_layout(bundle, scheme)?;
    let chart = bundle.chart(chart_idx)?;
    let m_rank = bundle.base().rank();
    let n_div = bundle.divisor_count();
    let base_coeffs = base_coefficients(bundle, scheme, &layout)?;
    let outside: Vec<usize> = (0..n_div).filter(|j| !chart.alpha.contains(j)).collect();
    let xinv_mats: Vec<(usize, SeriesMat)> = outside
        .iter()
        .map(|&j| {
            Ok((
                j,
                lift_mat(scheme, table, &chart.u_restrict[j].inverse()?.mult_matrix()),
            ))
        })
        .collect::<Result<_>>()?;
    let x_mats: Vec<(usize, SeriesMat)> = outside
        .iter()
        .map(|&j| (j, lift_mat(scheme, table, &chart.u_restrict[j].mult_matrix())))
        .collect();
    let all_vars: Vec<usize> = layout.q.iter().chain(layout.qq.iter()).copied().collect();
    let mut acc = SeriesMat::zero(scheme, table, m_rank, 1);
    'keys: for key in scheme.keys_supported_on(&all_vars) {
        let d: Vec<u16> = layout.q.iter().map(|&v| key.get(v)).collect();
        let dd: Vec<u16> = layout.qq.iter().map(|&v| key.get(v)).collect();
        let base_key = {
            let mut k = scheme.key_one();
            for (&v, &e) in layout.qq.iter().zip(&dd) {
                if e > 0 {
                    k = k.with_exp(v, e);
                }
            }
            k
        };
        let Some((_, jd)) = base_coeffs.iter().find(|(k, _)| *k == base_key) else {
            continue;
        };
        let mut v = SeriesMat::from_columns(&[jd.clone()]);
        // Directions inside α restrict to weight zero: exact scalar factors.
        for &j in &chart.alpha {
            let a = bundle.tangent_coupling(j, &d, &dd);
            if a > 0 {
                let mut fact = Rat::one();
                for m in 1..=a {
                    fact *= Rat::from_integer(m.into());
                }
                v = v
                    .scale(&RatFun::constant(table, fact.recip()))
                    .mul_z(-(a as i32));
            } else if a < 0 {
                // The numerator contains the vanishing weight itself.
                continue 'keys;
            }
        }
        for &j in &outside {
            let a = bundle.tangent_coupling(j, &d, &dd);
            let x = &x_mats.iter().find(|(jj, _)| *jj == j).unwrap().1;
            let xinv = &xinv_mats.iter().find(|(jj, _)| *jj == j).unwrap().1;
            if a < 0 {
                for m in 0..(-a) {
                    v = apply_linear_factor(&v, x, -m);
                }
            } else {
                for m in 1..=a {
                    v = apply_inverse_at_zero(&v, xinv, m, z_hi);
                }
            }
        }
        let mono = TruncSeries::monomial(scheme, table, key.clone(), 0, RatFun::one(table));
        acc = acc.add(&v.scale_series(&mono));
    }
    Ok(acc)
}

/// Apply `(X + mz)^{-1}` to a column, expanded at `z = 0`:
/// `Σ_{r≥0} (−m)^r z^r X^{−r−1}`, truncated above at `z_hi`.
fn apply_inverse_at_zero(v: &SeriesMat, xinv: &SeriesMat, m: i64, z_hi: i32) -> SeriesMat {
    let steps = (z_hi - column_bottom(v) + 1).max(0);
    let mut w = xinv.mul(v);
    let mut acc = w.clone();
    for _ in 0..steps {
        w = xinv
            .mul(&w)
            .scale(&RatFun::constant(v.table(), Rat::from_integer((-m).into())))
            .mul_z(1);
        acc = acc.add(&w);
    }
    acc.truncate_window(i32::MIN, z_hi)
}

/// Exact ratio of phase prefactors under a `z`-shift of the weight: with
/// `G(ν) = ν^{−1/2} e^{(ν − ν log ν)/z}` and an invertible `X`,
///
/// ```text
/// G(X + mz) G(X)^{-1}
///   = X^{−m} (1 + mzX^{−1})^{−m−1/2}
///     · exp[ −Σ_{k≥2} (−1)^{k+1} m^k z^{k−1} X^{1−k} / k ],
/// ```
///
/// an atom-free series exact on `[0, z_hi]` (identity when `m = 0`).
pub(crate) fn shift_ratio(
    x: &[Vec<RatFun>],
    xinv: &[Vec<RatFun>],
    m: i64,
    scheme: &Arc<VariableScheme>,
    table: &Arc<VarTable>,
    z_hi: i32,
) -> SeriesMat {
    let n = x.len();
    if m == 0 {
        return SeriesMat::identity(scheme, table, n);
    }
    let deep = (z_hi + 1).max(1) as usize;
    // Powers of X^{-1} at the rational level.
    let mut xinv_pows: Vec<Vec<Vec<RatFun>>> = Vec::with_capacity(deep + 1);
    let id: Vec<Vec<RatFun>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == j { RatFun::one(table) } else { RatFun::zero(table) })
                .collect()
        })
        .collect();
    xinv_pows.push(id.clone());
    for r in 1..=deep {
        xinv_pows.push(crate::series::ratfun_mat_mul(
            &xinv_pows[r - 1],
            xinv,
            table,
        ));
    }
    // X^{-m}: positive powers of X^{-1} or of X.
    let x_pow_neg_m = if m > 0 {
        let mut acc = id.clone();
        for _ in 0..m {
            acc = crate::series::ratfun_mat_mul(&acc, xinv, table);
        }
        acc
    } else {
        let mut acc = id.clone();
        for _ in 0..(-m) {
            acc = crate::series::ratfun_mat_mul(&acc, x, table);
        }
        acc
    };
    // (1 + mzX^{-1})^{e} with e = −m − 1/2, term by term in z.
    let e = -rat_int(m) - Rat::new(1.into(), 2.into());
    let mut binom = SeriesMat::identity(scheme, table, n);
    let mut coeff = Rat::one();
    let mut m_pow = Rat::one();
    for r in 1..=deep {
        let rr = rat_int(r as i64);
        coeff = coeff.clone() * (e.clone() - rr.clone() + Rat::one()) / rr;
        m_pow *= rat_int(m);
        let scalar = coeff.clone() * m_pow.clone();
        let term = SeriesMat::from_fn(n, n, |i, j| {
            TruncSeries::monomial(
                scheme,
                table,
                scheme.key_one(),
                r as i32,
                xinv_pows[r][i][j].scale(&scalar),
            )
        });
        binom = binom.add(&term);
    }
    // exp of −Σ_{k≥2} (−1)^{k+1} m^k z^{k−1} X^{1−k} / k.
    let mut arg = SeriesMat::zero(scheme, table, n, n);
    let mut m_pow = rat_int(m);
    for k in 2..=(deep + 1) {
        let sign = if k % 2 == 0 { Rat::one() } else { -Rat::one() };
        m_pow *= rat_int(m);
        let scalar = sign * m_pow.clone() / rat_int(k as i64);
        let term = SeriesMat::from_fn(n, n, |i, j| {
            TruncSeries::monomial(
                scheme,
                table,
                scheme.key_one(),
                (k - 1) as i32,
                xinv_pows[k - 1][i][j].scale(&scalar),
            )
        });
        arg = arg.add(&term);
    }
    let mut expo = SeriesMat::identity(scheme, table, n);
    let mut power = SeriesMat::identity(scheme, table, n);
    let mut factorial = Rat::one();
    for p in 1..=deep {
        power = power.mul(&arg).truncate_window(0, deep as i32);
        factorial *= Rat::from_integer((p as i64).into());
        expo = expo.add(&power.scale(&RatFun::constant(table, factorial.recip())));
    }
    lift_mat(scheme, table, &x_pow_neg_m)
        .mul(&binom)
        .mul(&expo)
        .truncate_window(0, z_hi)
}

/// The restricted solution column at fixed point `chart_idx` after
/// clearing the transcendental prefactor:
///
/// ```text
/// Σ_D q^{P^α(D)} Q^D · RedTaylor_D · Π_{j∉α} H_{j,D} · Ĵ_D,
/// ```
///
/// with the stationary-phase series `Red` built through `z` order
/// `w_phase` and the prefactor shift ratios through `w_mat`. With `kappa`,
/// the term at base degree `D` is additionally rescaled by the invertible
/// scalar parts of the restricted weights, `Π_{j∉α} u_j^{m_{j,D}}`, with
/// the same integers `m_{j,D}` as the shift ratios.
#[allow(clippy::too_many_arguments)]
fn restricted_phase_column(
    bundle: &ToricBundle,
    chart_idx: usize,
    scheme: &Arc<VariableScheme>,
    layout: &SchemeLayout,
    base_coeffs: &[(Mono, Vec<TruncSeries>)],
    w_mat: i32,
    w_phase: i32,
    kappa: bool,
) -> Result<SeriesMat> {
    let table = bundle.table();
    let chart = bundle.chart(chart_idx)?;
    let m_rank = bundle.base().rank();
    let n_div = bundle.divisor_count();
    let outside: Vec<usize> = (0..n_div).filter(|j| !chart.alpha.contains(j)).collect();

    // Stationary-phase series Red = e^{F/z} Σ A_n z^n.
    let branch = critical_branch(bundle, chart_idx, scheme, &layout.q)?;
    let phase = stationary_phase(bundle, &branch, w_phase.max(1) as u32)?;
    let red = phase.f_value.mul_z(-1).exp()?.mul(&phase.a_series);

    // Restricted weight matrices and their inverses.
    let x_mats: Vec<Vec<Vec<RatFun>>> = outside
        .iter()
        .map(|&j| chart.u_restrict[j].mult_matrix())
        .collect();
    let xinv_mats: Vec<Vec<Vec<RatFun>>> = outside
        .iter()
        .map(|&j| Ok(chart.u_restrict[j].inverse()?.mult_matrix()))
        .collect::<Result<_>>()?;
    let u_scalars: Vec<RatFun> = outside
        .iter()
        .map(|&j| chart.u_restrict[j].unit_part().clone())
        .collect();

    let twist_mats: Vec<Vec<Vec<RatFun>>> = (0..n_div)
        .map(|j| bundle.twist(j).mult_matrix())
        .collect();
    // Nonzero powers of each twist matrix (index 0 = identity).
    let twist_powers: Vec<Vec<Vec<Vec<RatFun>>>> = (0..n_div)
        .map(|j| {
            let id: Vec<Vec<RatFun>> = (0..m_rank)
                .map(|i| {
                    (0..m_rank)
                        .map(|jj| if i == jj { RatFun::one(table) } else { RatFun::zero(table) })
                        .collect()
                })
                .collect();
            let mut pows = vec![id];
            loop {
                let next =
                    crate::series::ratfun_mat_mul(pows.last().unwrap(), &twist_mats[j], table);
                if next
                    .iter()
                    .all(|row| row.iter().all(|c| c.is_zero()))
                {
                    break;
                }
                pows.push(next);
            }
            pows
        })
        .collect();
    let mut lhs = SeriesMat::zero(scheme, table, m_rank, 1);
    for (dkey, jd) in base_coeffs {
        let dd: Vec<u16> = layout.qq.iter().map(|&v| dkey.get(v)).collect();
        // Reindexing exponents q^{P^α(D)}.
        let mut pexp: Vec<u16> = Vec::with_capacity(bundle.torus_rank());
        for i in 0..bundle.torus_rank() {
            let mut acc = Rat::zero();
            for (u, &e) in dd.iter().enumerate() {
                if e > 0 {
                    acc += bundle.restricted_divisor_pairing(chart_idx, i, u)?
                        * Rat::from_integer(i64::from(e).into());
                }
            }
            if !acc.denom().is_one() || acc.is_negative() {
                return Err(Error::NonIntegralExponent(format!(
                    "reindexed Novikov exponent {acc} at fixed point {chart_idx}"
                )));
            }
            pexp.push(acc.numer().to_u16().ok_or_else(|| {
                Error::ConfigError("reindexed Novikov exponent out of range".into())
            })?);
        }
        let mut full_key = dkey.clone();
        for (i, &e) in pexp.iter().enumerate() {
            if e > 0 {
                full_key = full_key.with_exp(layout.q[i], full_key.get(layout.q[i]) + e);
            }
        }
        if !scheme.fits(&full_key) {
            continue;
        }
        let mut v = SeriesMat::from_columns(&[jd.to_vec()]);
        // Prefactor shift ratios for the outside directions, and the
        // optional scalar rescale by the same shift integers.
        let mut kappa_fac = RatFun::one(table);
        for (pos, &j) in outside.iter().enumerate() {
            let m = bundle.tangent_coupling(j, &pexp, &dd);
            if m != 0 {
                let h = shift_ratio(&x_mats[pos], &xinv_mats[pos], m, scheme, table, w_mat);
                v = h.mul(&v);
                if kappa {
                    kappa_fac = kappa_fac.mul(&u_scalars[pos].pow(m)?);
                }
            }
        }
        // Taylor expansion of Red at λ_j + z⟨Λ_j, D⟩ + Λ_j.
        let rates: Vec<i64> = (0..n_div)
            .map(|j| {
                dd.iter()
                    .enumerate()
                    .map(|(u, &e)| bundle.twist_pairing(j, u) * i64::from(e))
                    .sum()
            })
            .collect();
        let mut term_sum = SeriesMat::zero(scheme, table, m_rank, 1);
        let mut kvec = vec![0usize; n_div];
        loop {
            // Π M_{Λ_j}^{K_j} (skip when any factor is already zero).
            let mut mat: Option<Vec<Vec<RatFun>>> = None;
            let mut valid = true;
            for j in 0..n_div {
                if kvec[j] >= twist_powers[j].len() {
                    valid = false;
                    break;
                }
                if kvec[j] > 0 {
                    let p = &twist_powers[j][kvec[j]];
                    mat = Some(match mat {
                        None => p.clone(),
                        Some(m0) => crate::series::ratfun_mat_mul(&m0, p, table),
                    });
                }
            }
            if valid {
                let mut red_k = red.clone();
                let mut kfact = Rat::one();
                for j in 0..n_div {
                    for s in 0..kvec[j] {
                        red_k = red_k.derivative_lambda(bundle.lambda_var(j));
                        kfact *= Rat::from_integer(((s + 1) as i64).into());
                    }
                }
                for j in 0..n_div {
                    if rates[j] != 0 {
                        let r = rat_int(rates[j]);
                        red_k =
                            red_k.lambda_shift_z(bundle.lambda_var(j), |_| r.clone(), w_phase)?;
                    }
                }
                let applied = match &mat {
                    None => v.clone(),
                    Some(m0) => lift_mat(scheme, table, m0).mul(&v),
                };
                term_sum = term_sum.add(
                    &applied
                        .scale_series(&red_k)
                        .scale(&RatFun::constant(table, kfact.recip())),
                );
            }
            // Advance the multi-index over directions with nonzero twists.
            let mut pos = 0;
            loop {
                if pos == n_div {
                    break;
                }
                kvec[pos] += 1;
                if kvec[pos] < twist_powers[pos].len() {
                    break;
                }
                kvec[pos] = 0;
                pos += 1;
            }
            if pos == n_div {
                break;
            }
        }
        let mono = TruncSeries::monomial(scheme, table, full_key, 0, RatFun::one(table));
        lhs = lhs.add(&term_sum.scale_series(&mono).scale(&kappa_fac));
    }
    Ok(lhs)
}

/// `(1 + x)^e` for a nilpotent class `x` and rational exponent `e`, as the
/// finite binomial series.
pub(crate) fn nilpotent_binom(x: &AlgebraElement, e: &Rat) -> Result<AlgebraElement> {
    if !x.unit_part().is_zero() {
        return Err(Error::AssumptionViolation(
            "binomial series needs a nilpotent argument".into(),
        ));
    }
    let mut acc = AlgebraElement::one(x.algebra());
    let mut pow = AlgebraElement::one(x.algebra());
    let mut coeff = Rat::one();
    for k in 1..=(x.algebra().rank() as i64 + 1) {
        coeff = coeff * (e.clone() - rat_int(k - 1)) / rat_int(k);
        pow = pow.mul(x);
        if pow.is_zero() {
            break;
        }
        acc = acc.add(&pow.scale_rat(&coeff));
    }
    Ok(acc)
}

/// `log(1 + x)` for a nilpotent class `x`, as the finite series.
pub(crate) fn nilpotent_log1p(x: &AlgebraElement) -> Result<AlgebraElement> {
    if !x.unit_part().is_zero() {
        return Err(Error::AssumptionViolation(
            "logarithm series needs a nilpotent argument".into(),
        ));
    }
    let mut acc = AlgebraElement::zero(x.algebra());
    let mut pow = AlgebraElement::one(x.algebra());
    for k in 1..=(x.algebra().rank() as i64 + 1) {
        pow = pow.mul(x);
        if pow.is_zero() {
            break;
        }
        let sign = if k % 2 == 1 { Rat::one() } else { -Rat::one() };
        acc = acc.add(&pow.scale_rat(&(sign / rat_int(k))));
    }
    Ok(acc)
}

/// `e^{x/z}` for a nilpotent class `x`, as a constant-key series matrix
/// `Σ_k (x^k/k!) z^{-k}` acting by multiplication (a finite sum).
pub(crate) fn exp_class_over_z(
    scheme: &Arc<VariableScheme>,
    table: &Arc<VarTable>,
    x: &AlgebraElement,
) -> Result<SeriesMat> {
    if !x.unit_part().is_zero() {
        return Err(Error::AssumptionViolation(
            "exponential over z needs a nilpotent argument".into(),
        ));
    }
    let n = x.algebra().rank();
    let mut acc = SeriesMat::identity(scheme, table, n);
    let mut pow = AlgebraElement::one(x.algebra());
    let mut factorial = Rat::one();
    for k in 1..=(n as i64 + 1) {
        pow = pow.mul(x);
        if pow.is_zero() {
            break;
        }
        factorial *= rat_int(k);
        let m = pow.scale_rat(&factorial.recip()).mult_matrix();
        let term = SeriesMat::from_fn(n, n, |i, j| {
            TruncSeries::monomial(scheme, table, scheme.key_one(), -(k as i32), m[i][j].clone())
        });
        acc = acc.add(&term);
    }
    Ok(acc)
}

/// Exceptional data of the restricted family at one fixed point: the
/// restricted tangent weights outside the fixed-point set, split into
/// invertible scalar parts `u_j` and full classes `ν_j = u_j + N_j`, with
/// the two derived normalization classes used by the modified family.
pub struct ChartExceptional {
    /// Divisor directions not in the fixed-point set.
    pub outside: Vec<usize>,
    /// Scalar parts `u_j` (nonzero by the Euler-class check), `j ∈ outside`.
    pub u_scalars: Vec<RatFun>,
    /// Full restricted weights `ν_j`, `j ∈ outside`.
    pub nu_classes: Vec<AlgebraElement>,
    /// `Π_{j∉α} (1 + N_j/u_j)^{-1/2}`.
    pub sqrt_binom: AlgebraElement,
    /// `ξ = Σ_{j∉α} [N_j − ν_j log(1 + N_j/u_j)]`; it starts in cohomology
    /// degree 4, so it vanishes whenever the base has none.
    pub xi: AlgebraElement,
}

/// Compute the exceptional data of fixed point `chart_idx`.
pub fn chart_exceptional(bundle: &ToricBundle, chart_idx: usize) -> Result<ChartExceptional> {
    let chart = bundle.chart(chart_idx)?;
    let algebra = bundle.base().algebra();
    let n_div = bundle.divisor_count();
    let outside: Vec<usize> = (0..n_div).filter(|j| !chart.alpha.contains(j)).collect();
    let mut u_scalars = Vec::with_capacity(outside.len());
    let mut nu_classes = Vec::with_capacity(outside.len());
    let mut sqrt_binom = AlgebraElement::one(algebra);
    let mut xi = AlgebraElement::zero(algebra);
    let minus_half = Rat::new((-1).into(), 2.into());
    for &j in &outside {
        let nu = chart.u_restrict[j].clone();
        let u = nu.unit_part().clone();
        if u.is_zero() {
            return Err(Error::NonInvertibleEuler(format!(
                "restricted weight {j} has no invertible scalar part"
            )));
        }
        let n_part = nu.sub(&AlgebraElement::scalar(algebra, u.clone()));
        let n_over_u = n_part.scale(&u.pow(-1)?);
        sqrt_binom = sqrt_binom.mul(&nilpotent_binom(&n_over_u, &minus_half)?);
        xi = xi.add(&n_part.sub(&nu.mul(&nilpotent_log1p(&n_over_u)?)));
        u_scalars.push(u);
        nu_classes.push(nu);
    }
    Ok(ChartExceptional {
        outside,
        u_scalars,
        nu_classes,
        sqrt_binom,
        xi,
    })
}

/// One fixed-point block of the localized solution matrix: the cleared
/// restricted column of [`restricted_phase_column`], deformed in the big
/// directions and differentiated in every parameter direction, one column
/// per total-space basis class (the same column grid as
/// [`i_solution_columns`], restricted to the fixed point). Entries are
/// series over the base cohomology, expanded at `z = 0` and reliable at
/// least through `z_hi`.
///
/// With `modified` the block is normalized so that it factors as a product
/// of a base solution at a shifted parameter (unit `z`-constant term plus
/// strictly negative powers) and a `z`-nonnegative right factor: each base
/// degree `D` is rescaled by `Π_{j∉α} u_j^{m_{j,D}}`, and the whole block
/// is multiplied on the left by `Π_{j∉α} (1 + N_j/u_j)^{-1/2} e^{−ξ/z}`.
/// Both modifications are rational, and they absorb exactly the branch and
/// exponential atoms of the cleared transcendental prefactor.
pub fn restricted_family(
    bundle: &ToricBundle,
    chart_idx: usize,
    scheme: &Arc<VariableScheme>,
    z_hi: i32,
    modified: bool,
) -> Result<SeriesMat> {
    let table = bundle.table();
    let layout = scheme_layout(bundle, scheme)?;
    let chart = bundle.chart(chart_idx)?;
    let m_rank = bundle.base().rank();
    if m_rank != 1 + bundle.base().divisor_count() {
        return Err(Error::AssumptionViolation(
            "column assembly needs every non-unit base class to be a divisor".into(),
        ));
    }
    let base_coeffs = base_coefficients(bundle, scheme, &layout)?;
    let exc = chart_exceptional(bundle, chart_idx)?;
    let theta = if modified {
        let mat = lift_mat(scheme, table, &exc.sqrt_binom.mult_matrix())
            .mul(&exp_class_over_z(scheme, table, &exc.xi.neg())?);
        Some(mat)
    } else {
        None
    };
    // Slack: the big-direction operators can lower the reliable top by one
    // per parameter order, and the left normalization by its z-depth.
    let theta_depth = theta
        .as_ref()
        .map(|m| {
            let mut d = 0;
            for i in 0..m.rows() {
                for j in 0..m.cols() {
                    if let Some((lo, _)) = m.get(i, j).z_support() {
                        d = d.max(-lo);
                    }
                }
            }
            d
        })
        .unwrap_or(0);
    let v_lo_min: i32 = base_coeffs
        .iter()
        .flat_map(|(_, slice)| slice.iter().filter_map(|e| e.z_support().map(|(a, _)| a)))
        .min()
        .unwrap_or(0)
        .min(0);
    let inner_hi = z_hi + scheme.par_total_cap() as i32 + theta_depth + 1;
    let w = inner_hi - v_lo_min + scheme.nov_total_cap() as i32;
    let mut col =
        restricted_phase_column(bundle, chart_idx, scheme, &layout, &base_coeffs, w, w, modified)?;

    // Big-direction deformation with restricted multiplication matrices.
    let p_mats: Vec<SeriesMat> = (0..bundle.torus_rank())
        .map(|a| lift_mat(scheme, table, &chart.p_restrict[a].mult_matrix()))
        .collect();
    let phi_mats: Vec<SeriesMat> = (0..bundle.base().divisor_count())
        .map(|u| lift_mat(scheme, table, &bundle.base().divisor_class(u).mult_matrix()))
        .collect();
    for (pos, &(i, j)) in bundle.sigma_directions().iter().enumerate() {
        let var = layout.sigma[pos];
        let cap = scheme.cap(var);
        if cap == 0 {
            continue;
        }
        let mut power = col.clone();
        let mut factorial = Rat::one();
        let mut deformed = col.clone();
        for n in 1..=cap {
            power = big_direction_operator(bundle, &layout, &p_mats, &phi_mats, i, j, &power);
            factorial *= Rat::from_integer(i64::from(n).into());
            let mono = TruncSeries::monomial(
                scheme,
                table,
                scheme.key_one().with_exp(var, n),
                0,
                RatFun::constant(table, factorial.recip()),
            );
            deformed = deformed.add(&power.scale_series(&mono));
        }
        col = deformed;
    }

    // Parameter-direction columns on the total-space grid.
    let rank = bundle.total_algebra().rank();
    let mut columns: Vec<Option<Vec<TruncSeries>>> = vec![None; rank];
    columns[bundle.basis_index(0, 0)] = Some(col.column(0));
    for a in 0..bundle.torus_rank() {
        let c = divisor_operator(&col, &p_mats[a], layout.q[a]);
        columns[bundle.basis_index(a + 1, 0)] = Some(c.column(0));
    }
    for u in 0..bundle.base().divisor_count() {
        let c = divisor_operator(&col, &phi_mats[u], layout.qq[u]);
        columns[bundle.basis_index(0, bundle.base().divisor_index(u))] = Some(c.column(0));
    }
    for (pos, &(i, j)) in bundle.sigma_directions().iter().enumerate() {
        let c = col.map(|e| e.derivative_var(layout.sigma[pos])).mul_z(1);
        columns[bundle.sigma_class_index(i, j)] = Some(c.column(0));
    }
    let cols: Result<Vec<Vec<TruncSeries>>> = columns
        .into_iter()
        .enumerate()
        .map(|(b, c)| {
            c.ok_or_else(|| {
                Error::AssumptionViolation(format!(
                    "no deformation direction covers basis class {b}"
                ))
            })
        })
        .collect();
    let mut fam = SeriesMat::from_columns(&cols?);
    if let Some(theta) = theta {
        fam = theta.mul(&fam);
    }
    Ok(fam.truncate_window(i32::MIN, z_hi))
}

/// Verify the fixed-point identity between the stationary-phase series of
/// the mirror and the restricted hypergeometric series, coefficient by
/// coefficient on the scheme's Novikov box and the `z`-window `[·, z_hi]`.
/// Both sides are exact below and truncated above; any nonzero residual is
/// an error carrying the offending entry.
pub fn check_brown_identity(
    bundle: &ToricBundle,
    chart_idx: usize,
    scheme: &Arc<VariableScheme>,
    z_hi: i32,
) -> Result<()> {
    if z_hi < 0 {
        return Err(Error::ConfigError("comparison window top must be ≥ 0".into()));
    }
    let table = bundle.table();
    let layout = scheme_layout(bundle, scheme)?;
    let chart = bundle.chart(chart_idx)?;
    let m_rank = bundle.base().rank();
    let n_div = bundle.divisor_count();
    let outside: Vec<usize> = (0..n_div).filter(|j| !chart.alpha.contains(j)).collect();
    let all_vars: Vec<usize> = layout.q.iter().chain(layout.qq.iter()).copied().collect();
    let base_coeffs = base_coefficients(bundle, scheme, &layout)?;

    // Working z-tops: multiplying a series that is only exact up to some
    // order by one with negative powers degrades the exact window, so every
    // truncated ingredient is built with enough slack that the product is
    // still exact on [·, z_hi].
    let v_lo_min: i32 = base_coeffs
        .iter()
        .flat_map(|(_, slice)| slice.iter().filter_map(|e| e.z_support().map(|(a, _)| a)))
        .min()
        .unwrap_or(0)
        .min(0);
    let mut a_in: i64 = 0;
    for key in scheme.keys_supported_on(&all_vars) {
        let d: Vec<u16> = layout.q.iter().map(|&v| key.get(v)).collect();
        let dd: Vec<u16> = layout.qq.iter().map(|&v| key.get(v)).collect();
        for &j in &chart.alpha {
            a_in = a_in.max(bundle.tangent_coupling(j, &d, &dd));
        }
    }
    // The phase series is multiplied by e^{F/z} (support down to z^{-nov}),
    // and the shift ratios meet the base coefficients' negative powers, so
    // both need the full slack; the Bernoulli tails only meet the inside
    // z-shifts.
    let w_phase = z_hi - v_lo_min + scheme.nov_total_cap() as i32;
    let w_mat = w_phase;
    let w_g = z_hi - v_lo_min + a_in as i32;

    let xinv_mats: Vec<Vec<Vec<RatFun>>> = outside
        .iter()
        .map(|&j| Ok(chart.u_restrict[j].inverse()?.mult_matrix()))
        .collect::<Result<_>>()?;

    // Right side: restricted series times the Bernoulli tails.
    let g = gamma_tail((w_g + 1) as usize);
    let mut rhs = restricted_i_function(bundle, chart_idx, scheme, w_mat)?;
    for (pos, _) in outside.iter().enumerate() {
        let mut gmat = SeriesMat::zero(scheme, table, m_rank, m_rank);
        let mut pow: Vec<Vec<RatFun>> = (0..m_rank)
            .map(|i| {
                (0..m_rank)
                    .map(|jj| if i == jj { RatFun::one(table) } else { RatFun::zero(table) })
                    .collect()
            })
            .collect();
        for (r, gr) in g.iter().enumerate() {
            let sign = if r % 2 == 0 { Rat::one() } else { -Rat::one() };
            let scalar = gr.clone() * sign;
            let term = SeriesMat::from_fn(m_rank, m_rank, |i, jj| {
                TruncSeries::monomial(
                    scheme,
                    table,
                    scheme.key_one(),
                    r as i32,
                    pow[i][jj].scale(&scalar),
                )
            });
            gmat = gmat.add(&term);
            pow = crate::series::ratfun_mat_mul(&pow, &xinv_mats[pos], table);
        }
        rhs = gmat.truncate_window(0, w_g).mul(&rhs);
    }

    // Left side: the cleared restricted column.
    let lhs = restricted_phase_column(
        bundle,
        chart_idx,
        scheme,
        &layout,
        &base_coeffs,
        w_mat,
        w_phase,
        false,
    )?;

    // Compare: exact below, and reliable at least up to z_hi above (the
    // slack in the working tops guarantees this; anything less means the
    // slack was computed wrong).
    let diff = lhs.sub(&rhs);
    for i in 0..m_rank {
        let e = diff.get(i, 0);
        if e.tail_below() {
            return Err(Error::WindowOverflow(format!(
                "identity residual row {i} lost exactness below z^{}",
                e.z_lo()
            )));
        }
        if e.z_hi() < z_hi {
            return Err(Error::WindowOverflow(format!(
                "identity residual row {i} only reliable up to z^{}, need z^{z_hi}",
                e.z_hi()
            )));
        }
        let lo = e.z_support().map(|(a, _)| a.min(0)).unwrap_or(0);
        if !e.is_zero_within(lo, z_hi)? {
            return Err(Error::AssumptionViolation(format!(
                "fixed-point identity residual in row {i}: {e}"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::BaseSpace;
    use crate::coeffs::rat;

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
        let phi = base.divisor_class(0);
        let bundle = ToricBundle::new(
            table.clone(),
            base,
            vec![vec![1, 1]],
            vec![0, 1],
            vec![zero, phi],
            vec![vec![1]],
            vec![vec![0], vec![1]],
        )
        .expect("projectivized bundle data");
        (table, bundle)
    }

    #[test]
    fn series_on_projective_line_matches_hand_expansion() {
        let (table, bundle) = projective_over_point(2);
        let scheme = bundle.variable_scheme(2, 0);
        let i = i_function(&bundle, &scheme, -5).expect("series");
        // Basis (1, p). At q^1 the factor is ((U₁+z)(U₂+z))^{-1} with
        // U₁+U₂ = 2p − λ₁ − λ₂, U₁U₂ = (p−λ₁)(p−λ₂) = classical zero + λλ…
        // Expanded at z = ∞: z^{-2}·1 − z^{-3}(U₁+U₂) + …
        let q1 = scheme.key_one().with_exp(0, 1);
        assert!(i.get(0, 0).coeff(&q1, -2).expect("coeff").is_one());
        assert!(i.get(1, 0).coeff(&q1, -2).expect("coeff").is_zero());
        let l1 = RatFun::var(&table, 0);
        let l2 = RatFun::var(&table, 1);
        assert_eq!(i.get(0, 0).coeff(&q1, -3).expect("coeff"), l1.add(&l2));
        assert_eq!(
            i.get(1, 0).coeff(&q1, -3).expect("coeff"),
            RatFun::int(&table, -2)
        );
        // Leading term is the unit.
        assert!(i.get(0, 0).coeff(&scheme.key_one(), 0).expect("coeff").is_one());
        assert!(i.get(1, 0).coeff(&scheme.key_one(), 0).expect("coeff").is_zero());
    }

    #[test]
    fn restricted_series_on_projective_line_low_orders() {
        let (table, bundle) = projective_over_point(2);
        let scheme = bundle.variable_scheme(2, 0);
        let r = restricted_i_function(&bundle, 0, &scheme, 3).expect("series");
        // Chart {0}: the inside direction gives z^{-1}/1!, the outside one
        // (δ + z)^{-1} = δ^{-1} − zδ^{-2} + …, with δ = λ₁ − λ₂.
        let delta = RatFun::var(&table, 0).sub(&RatFun::var(&table, 1));
        let q1 = scheme.key_one().with_exp(0, 1);
        assert_eq!(
            r.get(0, 0).coeff(&q1, -1).expect("coeff"),
            delta.pow(-1).unwrap()
        );
        assert_eq!(
            r.get(0, 0).coeff(&q1, 0).expect("coeff"),
            delta.pow(-2).unwrap().neg()
        );
        assert_eq!(
            r.get(0, 0).coeff(&q1, 1).expect("coeff"),
            delta.pow(-3).unwrap()
        );
        assert!(r.get(0, 0).coeff(&scheme.key_one(), 0).expect("coeff").is_one());
    }

    #[test]
    fn restricted_series_on_projectivized_bundle_low_orders() {
        let (table, bundle) = hirzebruch();
        let scheme = bundle.variable_scheme(2, 0);
        let r = restricted_i_function(&bundle, 0, &scheme, 2).expect("series");
        let delta = RatFun::var(&table, 0).sub(&RatFun::var(&table, 1));
        // Chart {0}: ν = δ − φ. At (q, Q⁰): z^{-1}·(δ−φ+z)^{-1} =
        // z^{-1}[δ^{-1} − zδ^{-2} + …] + φ-row z^{-1}[δ^{-2} − 2zδ^{-3} + …].
        let kq = scheme.key_one().with_exp(0, 1);
        assert_eq!(
            r.get(0, 0).coeff(&kq, -1).expect("coeff"),
            delta.pow(-1).unwrap()
        );
        assert_eq!(
            r.get(0, 0).coeff(&kq, 0).expect("coeff"),
            delta.pow(-2).unwrap().neg()
        );
        assert_eq!(
            r.get(1, 0).coeff(&kq, -1).expect("coeff"),
            delta.pow(-2).unwrap()
        );
        assert_eq!(
            r.get(1, 0).coeff(&kq, 0).expect("coeff"),
            delta.pow(-3).unwrap().scale(&rat(-2, 1))
        );
        // At (q⁰, Q): the coupling of the outside direction is −1, so the
        // factor is the weight itself: (δ−φ)(z^{-2} − 2φz^{-3}).
        let kqq = scheme.key_one().with_exp(1, 1);
        assert_eq!(r.get(0, 0).coeff(&kqq, -2).expect("coeff"), delta);
        assert!(r.get(0, 0).coeff(&kqq, -3).expect("coeff").is_zero());
        assert_eq!(
            r.get(1, 0).coeff(&kqq, -2).expect("coeff"),
            RatFun::int(&table, -1)
        );
        assert_eq!(
            r.get(1, 0).coeff(&kqq, -3).expect("coeff"),
            delta.scale(&rat(-2, 1))
        );
    }

    #[test]
    fn shift_ratio_matches_numeric_prefactor_ratio() {
        // Scalar case against floating-point evaluation of
        // G(x + mz)/G(x) with G(ν) = ν^{-1/2} e^{(ν − ν log ν)/z}.
        let table = VarTable::new(&[("s", 1)]);
        let scheme = VariableScheme::new(&[], &[], 0, 0);
        let x = vec![vec![RatFun::var(&table, 0)]];
        let xinv = vec![vec![RatFun::var(&table, 0).pow(-1).unwrap()]];
        for &m in &[1i64, -2] {
            let h = shift_ratio(&x, &xinv, m, &scheme, &table, 8);
            let sval = 2.0f64;
            let z = 0.05f64;
            let mut series = 0.0f64;
            for r in 0..=8 {
                let c = h
                    .get(0, 0)
                    .coeff(&scheme.key_one(), r)
                    .expect("coeff")
                    .eval_rat(&[rat(2, 1)])
                    .expect("eval");
                let cf = c.numer().to_f64().unwrap() / c.denom().to_f64().unwrap();
                series += cf * z.powi(r);
            }
            let g = |v: f64| v.powf(-0.5) * ((v - v * v.ln()) / z).exp();
            let exact = g(sval + m as f64 * z) / g(sval);
            assert!(
                (series - exact).abs() < 1e-10,
                "m = {m}: series {series} vs exact {exact}"
            );
        }
    }

    #[test]
    fn identity_holds_on_projective_line_both_charts() {
        let (_, bundle) = projective_over_point(2);
        let scheme = bundle.variable_scheme(2, 0);
        for chart in 0..2 {
            check_brown_identity(&bundle, chart, &scheme, 3).expect("identity");
        }
    }

    #[test]
    fn identity_holds_on_projectivized_bundle_both_charts() {
        let (_, bundle) = hirzebruch();
        let scheme = VariableScheme::new(&[("q", 2, 2), ("Q", 1, 1)], &[("s1_1", -1, 0)], 3, 0);
        for chart in 0..2 {
            check_brown_identity(&bundle, chart, &scheme, 3).expect("identity");
        }
    }

    #[test]
    fn restricted_family_at_origin_matches_bernoulli_tail() {
        let (table, bundle) = projective_over_point(2);
        let scheme = bundle.variable_scheme(1, 0);
        let fam = restricted_family(&bundle, 0, &scheme, 3, true).expect("family");
        // Base is a point; the restricted weight is the scalar δ = λ₁ − λ₂,
        // so the normalization is trivial and the degree-zero block is
        // g(−z/δ)·[α*(1), α*(p)] = g(−z/δ)·[1, λ₁].
        let delta = RatFun::var(&table, 0).sub(&RatFun::var(&table, 1));
        let l1 = RatFun::var(&table, 0);
        let k0 = scheme.key_one();
        assert!(fam.get(0, 0).coeff(&k0, 0).expect("c").is_one());
        assert_eq!(
            fam.get(0, 0).coeff(&k0, 1).expect("c"),
            delta.pow(-1).unwrap().scale(&rat(-1, 12))
        );
        assert_eq!(
            fam.get(0, 0).coeff(&k0, 2).expect("c"),
            delta.pow(-2).unwrap().scale(&rat(1, 288))
        );
        assert_eq!(fam.get(0, 1).coeff(&k0, 0).expect("c"), l1);
        assert_eq!(
            fam.get(0, 1).coeff(&k0, 1).expect("c"),
            l1.mul(&delta.pow(-1).unwrap()).scale(&rat(-1, 12))
        );
    }

    #[test]
    fn normalized_family_origin_block_carries_nilpotent_factor() {
        let (table, bundle) = hirzebruch();
        let scheme = VariableScheme::new(&[("q", 1, 1), ("Q", 1, 1)], &[("s1_1", -1, 1)], 2, 1);
        let fam = restricted_family(&bundle, 0, &scheme, 2, true).expect("family");
        // Chart {0}: ν = δ − φ with δ = λ₁ − λ₂, so the normalization class
        // is (1 − φ/δ)^{-1/2} = 1 + φ/(2δ), and the degree-zero block is
        // that class times g(−z/ν) times the restriction columns
        // [1, φ, λ₁, λ₁φ] of the basis (1, φ, P, Pφ).
        let delta = RatFun::var(&table, 0).sub(&RatFun::var(&table, 1));
        let l1 = RatFun::var(&table, 0);
        let k0 = scheme.key_one();
        let half = delta.pow(-1).unwrap().scale(&rat(1, 2));
        // z⁰ layer: the normalization times the restrictions.
        assert!(fam.get(0, 0).coeff(&k0, 0).expect("c").is_one());
        assert_eq!(fam.get(1, 0).coeff(&k0, 0).expect("c"), half);
        assert!(fam.get(0, 1).coeff(&k0, 0).expect("c").is_zero());
        assert!(fam.get(1, 1).coeff(&k0, 0).expect("c").is_one());
        assert_eq!(fam.get(0, 2).coeff(&k0, 0).expect("c"), l1);
        assert_eq!(fam.get(1, 2).coeff(&k0, 0).expect("c"), l1.mul(&half));
        assert!(fam.get(0, 3).coeff(&k0, 0).expect("c").is_zero());
        assert_eq!(fam.get(1, 3).coeff(&k0, 0).expect("c"), l1);
        // z¹ layer of the unit column: (1 + φ/(2δ))·(−1/12)(δ^{-1} + φδ^{-2})
        // = −δ^{-1}/12 − φδ^{-2}/8.
        assert_eq!(
            fam.get(0, 0).coeff(&k0, 1).expect("c"),
            delta.pow(-1).unwrap().scale(&rat(-1, 12))
        );
        assert_eq!(
            fam.get(1, 0).coeff(&k0, 1).expect("c"),
            delta.pow(-2).unwrap().scale(&rat(-1, 8))
        );
    }

    #[test]
    fn deformed_series_and_columns_reduce_to_identity_at_origin() {
        let (_, bundle) = projective_over_point(3);
        let scheme = bundle.variable_scheme(2, 2);
        let big = big_i(&bundle, &scheme, -6).expect("deformed series");
        // σ-linear part at q = 0: z^{-1} times the inserted class T₂ = p².
        let layout = scheme_layout(&bundle, &scheme).expect("layout");
        let skey = scheme.key_one().with_exp(layout.sigma[0], 1);
        let t2 = bundle.basis_index(2, 0);
        assert!(big.get(t2, 0).coeff(&skey, -1).expect("coeff").is_one());
        assert!(big.get(0, 0).coeff(&skey, -1).expect("coeff").is_zero());
        let cols = i_solution_columns(&bundle, &scheme, &big).expect("columns");
        let rank = bundle.total_algebra().rank();
        for i in 0..rank {
            for j in 0..rank {
                let c = cols.get(i, j).coeff(&scheme.key_one(), 0).expect("coeff");
                if i == j {
                    assert!(c.is_one(), "diagonal ({i},{j})");
                } else {
                    assert!(c.is_zero(), "off-diagonal ({i},{j})");
                }
            }
        }
    }
}
