//! Landau–Ginzburg mirror of the toric fiber: critical branches of the
//! phase function in each fixed-point chart, their stationary-phase
//! asymptotics (critical value, log-coordinate Hessian, normalized
//! `z`-series), the Bernoulli tail of the one-variable oscillating
//! integral, and a floating-point count of critical points.
//!
//! In the chart of a fixed point `α`, the phase function is
//!
//! ```text
//! W^α(q, λ, ξ) = Σ_{j∉α} (ξ_j − u_j^α · log ξ_j) + Σ_{n∈α} ξ_n,
//! ```
//!
//! where `u_j^α` is the scalar restriction of the tangent direction `j` and
//! the coordinates `ξ_n = Π_i q_i^{(c_α⁻¹)_{ni}} · Π_{j∉α} ξ_j^{−(c_α⁻¹c)_{nj}}`
//! are eliminated through the toric relations. The critical point with
//! `ξ_j → u_j^α` as `q → 0` is a power series in `q`; expanding `W^α` at it
//! in the logarithmic coordinates `ξ_j = ρ_j e^{y_j}` and integrating out
//! the Gaussian part yields the asymptotic data consumed by the fixed-point
//! decomposition.

use crate::coeffs::{Mono, Rat, RatFun};
use crate::error::{Error, Result};
use crate::series::{SeriesMat, TruncSeries, VariableScheme};
use crate::toric::ToricBundle;
use num::complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::sync::Arc;

/// The critical branch of one fixed-point chart: the coordinates of the
/// critical point as exact power series in the fiber Novikov variables,
/// with constant terms `u_j^α`.
pub struct CriticalBranch {
    /// Index of the chart this branch belongs to.
    pub chart: usize,
    /// Scheme variables carrying the fiber Novikov directions.
    pub q_vars: Vec<usize>,
    /// Divisors outside `α`, increasing.
    pub outside: Vec<usize>,
    /// `ρ_j` for each divisor in `outside` (z-free series).
    pub rho: Vec<TruncSeries>,
    /// `ρ_n` for each `n ∈ α`, in chart order (vanish at `q = 0`).
    pub rho_alpha: Vec<TruncSeries>,
}

/// Stationary-phase data of one chart at its critical branch.
pub struct StationaryPhase {
    /// Index of the chart.
    pub chart: usize,
    /// Critical-value deviation `F^α(q, λ)`: the critical value of `W^α`
    /// minus `Σ_{j∉α} (u_j^α − u_j^α log u_j^α)`; vanishes at `q = 0`.
    pub f_value: TruncSeries,
    /// Normalized asymptotic series `Σ_n A_n z^n` with `A_0(0) = 1`,
    /// exact on the `z`-window `[0, z_order]`.
    pub a_series: TruncSeries,
    /// Determinant of the Hessian of `W^α` in logarithmic coordinates at
    /// the critical point (equals `Π_{j∉α} u_j^α` at `q = 0`).
    pub hessian_det: TruncSeries,
    /// The product `Π_{j∉α} u_j^α`.
    pub u_product: RatFun,
}

/// Compute the critical branch of chart `chart_idx` over the given scheme;
/// `q_vars` locates the fiber Novikov variables (one per torus factor).
pub fn critical_branch(
    bundle: &ToricBundle,
    chart_idx: usize,
    scheme: &Arc<VariableScheme>,
    q_vars: &[usize],
) -> Result<CriticalBranch> {
    let chart = bundle.chart(chart_idx)?;
    let table = bundle.table();
    let k = bundle.torus_rank();
    if q_vars.len() != k {
        return Err(Error::RankMismatch(format!(
            "expected {k} fiber Novikov variables, got {}",
            q_vars.len()
        )));
    }
    let outside: Vec<usize> = (0..bundle.divisor_count())
        .filter(|j| !chart.alpha.contains(j))
        .collect();
    let limits: Vec<RatFun> = outside
        .iter()
        .map(|&j| chart.u_restrict[j].unit_part().clone())
        .collect();
    for (pos, u) in limits.iter().enumerate() {
        if u.is_zero() {
            return Err(Error::DegenerateParameters(format!(
                "tangent direction {} restricts to zero on chart {chart_idx}",
                outside[pos]
            )));
        }
    }
    let mut rho: Vec<TruncSeries> = limits
        .iter()
        .map(|u| TruncSeries::constant(scheme, table, u.clone()))
        .collect();
    // Each pass through the chart coordinates gains at least one order in
    // the Novikov filtration, since every `ξ_n` carries a positive power of
    // some `q_i`.
    let mut settled = false;
    for _ in 0..=(scheme.nov_total_cap() + 1) {
        let xi_alpha = alpha_coordinates(bundle, chart_idx, &outside, &rho, q_vars)?;
        let next: Vec<TruncSeries> = outside
            .iter()
            .enumerate()
            .map(|(pos, &j)| {
                let mut acc = TruncSeries::constant(scheme, table, limits[pos].clone());
                for (n, xi) in xi_alpha.iter().enumerate() {
                    acc = acc.add(&xi.scale_rat(&chart.exponents[n][j]));
                }
                acc
            })
            .collect();
        if next == rho {
            settled = true;
            break;
        }
        rho = next;
    }
    if !settled {
        return Err(Error::AssumptionViolation(format!(
            "critical branch of chart {chart_idx} did not settle"
        )));
    }
    let rho_alpha = alpha_coordinates(bundle, chart_idx, &outside, &rho, q_vars)?;
    let branch = CriticalBranch {
        chart: chart_idx,
        q_vars: q_vars.to_vec(),
        outside,
        rho,
        rho_alpha,
    };
    for r in critical_residuals(bundle, &branch)? {
        if !r.is_provably_zero() {
            return Err(Error::AssumptionViolation(format!(
                "critical branch of chart {chart_idx} leaves a residual"
            )));
        }
    }
    Ok(branch)
}

/// The residuals `ξ_j ∂W^α/∂ξ_j = ρ_j − u_j^α − Σ_{n∈α} (c_α⁻¹c)_{nj} ρ_n`
/// of the critical equations at the branch (all provably zero for a valid
/// branch).
pub fn critical_residuals(bundle: &ToricBundle, branch: &CriticalBranch) -> Result<Vec<TruncSeries>> {
    let chart = bundle.chart(branch.chart)?;
    let table = bundle.table();
    let scheme = branch.rho[0].scheme().clone();
    let xi_alpha =
        alpha_coordinates(bundle, branch.chart, &branch.outside, &branch.rho, &branch.q_vars)?;
    branch
        .outside
        .iter()
        .enumerate()
        .map(|(pos, &j)| {
            let u = TruncSeries::constant(
                &scheme,
                table,
                chart.u_restrict[j].unit_part().clone(),
            );
            let mut acc = branch.rho[pos].sub(&u);
            for (n, xi) in xi_alpha.iter().enumerate() {
                acc = acc.sub(&xi.scale_rat(&chart.exponents[n][j]));
            }
            Ok(acc)
        })
        .collect()
}

/// Chart coordinates `ξ_n` for `n ∈ α` evaluated on the given outside
/// coordinates: `ξ_n = Π_i q_i^{(c_α⁻¹)_{ni}} · Π_{j∉α} ξ_j^{−(c_α⁻¹c)_{nj}}`.
fn alpha_coordinates(
    bundle: &ToricBundle,
    chart_idx: usize,
    outside: &[usize],
    xi_out: &[TruncSeries],
    q_vars: &[usize],
) -> Result<Vec<TruncSeries>> {
    let chart = bundle.chart(chart_idx)?;
    let table = bundle.table();
    let scheme = xi_out[0].scheme().clone();
    let k = bundle.torus_rank();
    (0..k)
        .map(|n| {
            let mut key = scheme.key_one();
            for (i, &qv) in q_vars.iter().enumerate() {
                let e = rat_to_u16(&chart.c_inv[n][i]).ok_or_else(|| {
                    Error::NonIntegralExponent(format!(
                        "chart {chart_idx} needs q_{}^({}) which is not a non-negative integer",
                        i + 1,
                        chart.c_inv[n][i]
                    ))
                })?;
                if e > 0 {
                    key = key.with_exp(qv, key.get(qv) + e);
                }
            }
            let mut acc = TruncSeries::monomial(&scheme, table, key, 0, RatFun::one(table));
            for (pos, &j) in outside.iter().enumerate() {
                let e = &chart.exponents[n][j];
                if e.is_zero() {
                    continue;
                }
                if !e.denom().is_one() {
                    return Err(Error::NonIntegralExponent(format!(
                        "chart {chart_idx} coordinate exponent {e} for divisor {j}"
                    )));
                }
                let e = e.numer().to_i64().ok_or_else(|| {
                    Error::ConfigError("chart exponent out of range".into())
                })?;
                acc = acc.mul(&int_pow(&xi_out[pos], -e)?);
            }
            Ok(acc)
        })
        .collect()
}

/// Integer power of a series with invertible constant term.
fn int_pow(s: &TruncSeries, e: i64) -> Result<TruncSeries> {
    let base = if e < 0 { s.invert_unit()? } else { s.clone() };
    let mut acc = TruncSeries::one(s.scheme(), s.table());
    for _ in 0..e.unsigned_abs() {
        acc = acc.mul(&base);
    }
    Ok(acc)
}

fn rat_to_u16(r: &Rat) -> Option<u16> {
    if !r.denom().is_one() {
        return None;
    }
    r.numer().to_u16()
}

/// Compute the stationary-phase data of a critical branch: expand `W^α` at
/// the branch in logarithmic coordinates, integrate out the Gaussian part,
/// and normalize so that the series starts at `1` when `q = 0`.
pub fn stationary_phase(
    bundle: &ToricBundle,
    branch: &CriticalBranch,
    z_order: u32,
) -> Result<StationaryPhase> {
    let chart = bundle.chart(branch.chart)?;
    let table = bundle.table().clone();
    let scheme = branch.rho[0].scheme().clone();
    let m = branch.outside.len();
    let limits: Vec<RatFun> = branch
        .outside
        .iter()
        .map(|&j| chart.u_restrict[j].unit_part().clone())
        .collect();

    // Critical-value deviation: the symbolic logs cancel against the
    // normalization, leaving F = Σ_j [ρ_j − u_j − u_j·log(ρ_j/u_j)] + Σ_n ρ_n.
    let mut f_value = TruncSeries::zero(&scheme, &table);
    for (pos, rho) in branch.rho.iter().enumerate() {
        let u = &limits[pos];
        let u_const = TruncSeries::constant(&scheme, &table, u.clone());
        let dev = rho.sub(&u_const).scale(&u.inverse()?);
        f_value = f_value
            .add(&rho.sub(&u_const))
            .sub(&dev.log1p()?.scale(u));
    }
    for xi in &branch.rho_alpha {
        f_value = f_value.add(xi);
    }

    // Jet of W^α at the branch in coordinates ξ_j = ρ_j e^{y_j}, up to the
    // degree a single vertex can contribute at this z-order.
    let max_deg = (2 * z_order + 2).max(2);
    let mut jet: BTreeMap<Mono, TruncSeries> = BTreeMap::new();
    let mut add_term = |key: Mono, val: TruncSeries| {
        if val.is_provably_zero() {
            return;
        }
        match jet.get_mut(&key) {
            Some(t) => *t = t.add(&val),
            None => {
                jet.insert(key, val);
            }
        }
    };
    // ρ_j e^{y_j} − u_j y_j (constants dropped; they are accounted in F).
    for pos in 0..m {
        let mut factorial = Rat::one();
        for d in 1..=max_deg {
            factorial *= Rat::from_integer(i64::from(d).into());
            let coeff = branch.rho[pos].scale_rat(&factorial.recip());
            add_term(Mono::one(m).with_exp(pos, d as u16), coeff);
        }
        add_term(
            Mono::var(m, pos),
            TruncSeries::constant(&scheme, &table, limits[pos].clone()).neg(),
        );
    }
    // ρ_n e^{−Σ_a e_{n,j_a} y_a}: expand the exponential of the linear form
    // as a product of univariate exponentials.
    for (n, xi) in branch.rho_alpha.iter().enumerate() {
        let mut terms: Vec<(Mono, Rat)> = vec![(Mono::one(m), Rat::one())];
        for (pos, &j) in branch.outside.iter().enumerate() {
            let e = chart.exponents[n][j].clone();
            if e.is_zero() {
                continue;
            }
            let mut next = Vec::new();
            for (key, c) in &terms {
                let mut factor = Rat::one();
                let mut factorial = Rat::one();
                let room = max_deg - key.total();
                for d in 0..=room {
                    if d > 0 {
                        factor *= -e.clone();
                        factorial *= Rat::from_integer(i64::from(d).into());
                    }
                    next.push((
                        key.with_exp(pos, d as u16),
                        c * &factor / factorial.clone(),
                    ));
                }
            }
            terms = next;
        }
        for (key, c) in terms {
            if key.total() == 0 {
                continue;
            }
            add_term(key, xi.scale_rat(&c));
        }
    }

    // Degree 1 must vanish (criticality), degree 2 is the Hessian, and
    // degrees ≥ 3 are the interaction vertices.
    let mut hessian = SeriesMat::zero(&scheme, &table, m, m);
    let mut vertices: Vec<(Mono, TruncSeries)> = Vec::new();
    for (key, val) in &jet {
        match key.total() {
            0 => unreachable!("constants are not stored in the jet"),
            1 => {
                if !val.is_provably_zero() {
                    return Err(Error::AssumptionViolation(format!(
                        "chart {} jet has a linear term; branch is not critical",
                        branch.chart
                    )));
                }
            }
            2 => {
                let support: Vec<usize> =
                    (0..m).filter(|&a| key.get(a) > 0).collect();
                match support.as_slice() {
                    [a] => hessian.set(*a, *a, val.scale_rat(&Rat::from_integer(2.into()))),
                    [a, b] => {
                        hessian.set(*a, *b, val.clone());
                        hessian.set(*b, *a, val.clone());
                    }
                    _ => unreachable!("degree-2 keys touch at most two variables"),
                }
            }
            _ => vertices.push((key.clone(), val.clone())),
        }
    }

    let hessian_det = det(&hessian);
    // Covariance of the Gaussian: −z·H⁻¹.
    let cov = hessian.invert_leading_scalar()?.mul_z(1).neg();

    // ⟨exp(V/z)⟩ via Wick's rule with memoized moments.
    let mut memo: BTreeMap<Mono, TruncSeries> = BTreeMap::new();
    memo.insert(Mono::one(m), TruncSeries::one(&scheme, &table));
    let power_deg = 2 * (3 * z_order).max(1);
    let mut a_series = TruncSeries::one(&scheme, &table);
    let mut v_power: Vec<(Mono, TruncSeries)> = vec![(Mono::one(m), TruncSeries::one(&scheme, &table))];
    let mut factorial = Rat::one();
    for mm in 1..=(2 * z_order) {
        factorial *= Rat::from_integer(i64::from(mm).into());
        v_power = jet_mul(&v_power, &vertices, power_deg);
        let mut expect = TruncSeries::zero(&scheme, &table);
        for (key, val) in &v_power {
            let mom = moment(key, &cov, &mut memo);
            if mom.is_provably_zero() {
                continue;
            }
            expect = expect.add(&val.mul(&mom));
        }
        let contribution = expect.mul_z(-(mm as i32)).scale_rat(&factorial.recip());
        a_series = a_series.add(&contribution.truncate_window(0, z_order as i32));
    }
    let a_series = a_series.truncate_window(0, z_order as i32);

    // Normalize: A = (det H / Π u_j)^{−1/2} · ⟨exp(V/z)⟩.
    let mut u_product = RatFun::one(&table);
    for u in &limits {
        u_product = u_product.mul(u);
    }
    let ratio = hessian_det.scale(&u_product.inverse()?);
    let ratio_dev = ratio.sub(&TruncSeries::one(&scheme, &table));
    let norm = ratio_dev.binom_pow(&Rat::new((-1).into(), 2.into()))?;
    let a_series = a_series.mul(&norm).truncate_window(0, z_order as i32);

    Ok(StationaryPhase {
        chart: branch.chart,
        f_value,
        a_series,
        hessian_det,
        u_product,
    })
}

/// Wick moment `⟨y^K⟩` of the Gaussian with the given covariance matrix.
fn moment(
    key: &Mono,
    cov: &SeriesMat,
    memo: &mut BTreeMap<Mono, TruncSeries>,
) -> TruncSeries {
    if let Some(v) = memo.get(key) {
        return v.clone();
    }
    let scheme = cov.scheme().clone();
    let table = cov.table().clone();
    let m = cov.rows();
    let total = key.total();
    let out = if total % 2 == 1 {
        TruncSeries::zero(&scheme, &table)
    } else {
        let i = (0..m).find(|&a| key.get(a) > 0).expect("nonzero key");
        let rest = key.with_exp(i, key.get(i) - 1);
        let mut acc = TruncSeries::zero(&scheme, &table);
        for j in 0..m {
            let e = rest.get(j);
            if e == 0 {
                continue;
            }
            let sub = moment(&rest.with_exp(j, e - 1), cov, memo);
            acc = acc.add(
                &cov.get(i, j)
                    .mul(&sub)
                    .scale_rat(&Rat::from_integer(i64::from(e).into())),
            );
        }
        acc
    };
    memo.insert(key.clone(), out.clone());
    out
}

/// Truncating product of two exponent-keyed jets.
fn jet_mul(
    a: &[(Mono, TruncSeries)],
    b: &[(Mono, TruncSeries)],
    max_deg: u32,
) -> Vec<(Mono, TruncSeries)> {
    let mut acc: BTreeMap<Mono, TruncSeries> = BTreeMap::new();
    for (ka, va) in a {
        for (kb, vb) in b {
            if ka.total() + kb.total() > max_deg {
                continue;
            }
            let key = ka.mul(kb);
            let val = va.mul(vb);
            match acc.get_mut(&key) {
                Some(t) => *t = t.add(&val),
                None => {
                    acc.insert(key, val);
                }
            }
        }
    }
    acc.into_iter().collect()
}

/// Determinant of a small series matrix by Laplace expansion.
fn det(m: &SeriesMat) -> TruncSeries {
    let n = m.rows();
    let scheme = m.scheme().clone();
    let table = m.table().clone();
    if n == 0 {
        return TruncSeries::one(&scheme, &table);
    }
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut acc = TruncSeries::zero(&scheme, &table);
    for i in 0..n {
        if m.get(i, 0).is_provably_zero() {
            continue;
        }
        let minor = SeriesMat::from_fn(n - 1, n - 1, |r, c| {
            let rr = if r < i { r } else { r + 1 };
            m.get(rr, c + 1).clone()
        });
        let term = m.get(i, 0).mul(&det(&minor));
        acc = if i % 2 == 0 {
            acc.add(&term)
        } else {
            acc.sub(&term)
        };
    }
    acc
}

/// Bernoulli numbers `B_0..B_n` (with `B_1 = −1/2`), by the defining
/// recurrence `Σ_{j≤n} C(n+1, j) B_j = 0`.
pub fn bernoulli(n: usize) -> Vec<Rat> {
    let mut b: Vec<Rat> = Vec::with_capacity(n + 1);
    for m in 0..=n {
        if m == 0 {
            b.push(Rat::one());
            continue;
        }
        let mut acc = Rat::zero();
        let mut binom = Rat::one(); // C(m+1, 0)
        for (j, bj) in b.iter().enumerate() {
            acc += &binom * bj;
            // C(m+1, j+1) = C(m+1, j)·(m+1−j)/(j+1)
            binom *= Rat::new((m as i64 + 1 - j as i64).into(), (j as i64 + 1).into());
        }
        b.push(-acc / binom);
    }
    b
}

/// Coefficients `g_0..g_order` (in `x = z/ν`) of the tail
/// `exp[ Σ_{m≥1} B_{2m}/(2m(2m−1)) · x^{2m−1} ]` of the one-variable
/// oscillating integral with phase `−ξ + ν log ξ`.
pub fn gamma_tail(order: usize) -> Vec<Rat> {
    let b = bernoulli(2 * order + 2);
    let mut t = vec![Rat::zero(); order + 1];
    let mut m = 1usize;
    while 2 * m - 1 <= order {
        let denom = Rat::from_integer(((2 * m) as i64 * (2 * m as i64 - 1)).into());
        t[2 * m - 1] = &b[2 * m] / denom;
        m += 1;
    }
    // exp of a series with zero constant term, truncated at `order`.
    let mut out = vec![Rat::zero(); order + 1];
    out[0] = Rat::one();
    let mut power = out.clone();
    let mut factorial = Rat::one();
    for k in 1..=order {
        // power ← power · t (truncated convolution)
        let mut next = vec![Rat::zero(); order + 1];
        for (i, pi) in power.iter().enumerate() {
            if pi.is_zero() {
                continue;
            }
            for (j, tj) in t.iter().enumerate() {
                if i + j > order || tj.is_zero() {
                    continue;
                }
                next[i + j] += pi * tj;
            }
        }
        power = next;
        factorial *= Rat::from_integer((k as i64).into());
        for (o, p) in out.iter_mut().zip(&power) {
            *o += p / &factorial;
        }
    }
    out
}

/// Count the critical points of the phase function at random parameter
/// values, for fibers with a one-dimensional quotient torus: eliminating
/// the fiber coordinates by the multiplier rule leaves the polynomial
/// `Π_j (c_j μ − λ_j)^{c_j} = q` of degree `Σ_j c_j`, whose roots are found
/// simultaneously and verified against a residual bound. Returns the root
/// count per sample.
pub fn critical_count_numeric(
    bundle: &ToricBundle,
    seed: u64,
    samples: usize,
) -> Result<Vec<usize>> {
    if bundle.torus_rank() != 1 {
        return Err(Error::AssumptionViolation(
            "numeric critical count requires a rank-one quotient torus".into(),
        ));
    }
    let n = bundle.divisor_count();
    let c: Vec<i64> = (0..n).map(|j| bundle.weight_entry(0, j)).collect();
    if c.iter().any(|&cj| cj < 1) {
        return Err(Error::AssumptionViolation(
            "numeric critical count requires positive divisor weights".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |lo: f64, hi: f64| -> f64 { rng.gen_range(lo..hi) };
    let mut counts = Vec::with_capacity(samples);
    for _ in 0..samples {
        let lambda: Vec<Complex64> = (0..n)
            .map(|_| Complex64::new(draw(-2.0, 2.0), draw(-2.0, 2.0)))
            .collect();
        let angle = draw(0.0, std::f64::consts::TAU);
        let q = Complex64::from_polar(draw(0.5, 1.5), angle);
        // Expand Π_j (c_j μ − λ_j)^{c_j} − q.
        let mut poly = vec![Complex64::new(1.0, 0.0)];
        for (j, &cj) in c.iter().enumerate() {
            for _ in 0..cj {
                let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
                for (d, a) in poly.iter().enumerate() {
                    next[d] -= a * lambda[j];
                    next[d + 1] += a * Complex64::new(cj as f64, 0.0);
                }
                poly = next;
            }
        }
        poly[0] -= q;
        let roots = durand_kerner(&poly).ok_or_else(|| {
            Error::DegenerateParameters("root finding did not converge".into())
        })?;
        // Verify residuals and separation.
        for w in &roots {
            let scale = 1.0 + w.norm().powi(poly.len() as i32 - 1);
            if horner(&poly, *w).norm() > 1e-9 * scale {
                return Err(Error::DegenerateParameters(format!(
                    "root residual too large at {w}"
                )));
            }
        }
        for (i, wi) in roots.iter().enumerate() {
            for wj in roots.iter().skip(i + 1) {
                if (wi - wj).norm() < 1e-6 {
                    return Err(Error::DegenerateParameters(
                        "critical points collide at the sampled parameters".into(),
                    ));
                }
            }
        }
        counts.push(roots.len());
    }
    Ok(counts)
}

fn horner(poly: &[Complex64], x: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for a in poly.iter().rev() {
        acc = acc * x + a;
    }
    acc
}

/// Simultaneous root iteration for a complex polynomial given by
/// coefficients in ascending degree; returns `None` if it fails to settle.
fn durand_kerner(poly: &[Complex64]) -> Option<Vec<Complex64>> {
    let deg = poly.len() - 1;
    let lead = poly[deg];
    let monic: Vec<Complex64> = poly.iter().map(|a| a / lead).collect();
    let seed = Complex64::new(0.4, 0.9);
    let mut w: Vec<Complex64> = (0..deg).map(|i| seed.powu(i as u32 + 1)).collect();
    for _ in 0..1000 {
        let mut shift = 0.0f64;
        for i in 0..deg {
            let mut denom = Complex64::new(1.0, 0.0);
            for j in 0..deg {
                if j != i {
                    denom *= w[i] - w[j];
                }
            }
            if denom.norm() < 1e-300 {
                return None;
            }
            let delta = horner(&monic, w[i]) / denom;
            w[i] -= delta;
            shift = shift.max(delta.norm());
        }
        if shift < 1e-13 {
            return Some(w);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::AlgebraElement;
    use crate::base::BaseSpace;
    use crate::coeffs::{rat, VarTable};

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

    #[test]
    fn bernoulli_numbers_match_the_table() {
        let b = bernoulli(8);
        assert_eq!(b[0], rat(1, 1));
        assert_eq!(b[1], rat(-1, 2));
        assert_eq!(b[2], rat(1, 6));
        assert_eq!(b[4], rat(-1, 30));
        assert_eq!(b[6], rat(1, 42));
        assert_eq!(b[8], rat(-1, 30));
        assert!(b[3].is_zero() && b[5].is_zero() && b[7].is_zero());
    }

    #[test]
    fn gamma_tail_leading_coefficients() {
        let g = gamma_tail(3);
        assert_eq!(g[0], rat(1, 1));
        assert_eq!(g[1], rat(1, 12));
        assert_eq!(g[2], rat(1, 288));
        assert_eq!(g[3], rat(-139, 51840));
    }

    #[test]
    fn gamma_tail_is_unitary() {
        // Only odd powers appear in the exponent, so g(x)·g(−x) = 1.
        let g = gamma_tail(6);
        for d in 1..=6usize {
            let mut acc = Rat::zero();
            for i in 0..=d {
                let sign = if (d - i) % 2 == 0 { 1 } else { -1 };
                acc += &g[i] * &g[d - i] * Rat::from_integer(sign.into());
            }
            assert!(acc.is_zero(), "g(x)g(-x) fails at degree {d}");
        }
    }

    #[test]
    fn projective_line_branch_has_catalan_coefficients() {
        let (table, bundle) = projective_over_point(2);
        let scheme = VariableScheme::new(&[("q", 2, 5)], &[], 5, 0);
        let branch = critical_branch(&bundle, 0, &scheme, &[0]).expect("branch");
        // ρ = δ + q/δ − q²/δ³ + 2q³/δ⁵ − 5q⁴/δ⁷ + … with δ = λ₁ − λ₂,
        // from ρ² − δρ − q = 0.
        let delta = RatFun::var(&table, 0).sub(&RatFun::var(&table, 1));
        let expected = [
            delta.clone(),
            delta.pow(-1).unwrap(),
            delta.pow(-3).unwrap().neg(),
            delta.pow(-5).unwrap().scale(&rat(2, 1)),
            delta.pow(-7).unwrap().scale(&rat(-5, 1)),
            delta.pow(-9).unwrap().scale(&rat(14, 1)),
        ];
        for (d, want) in expected.iter().enumerate() {
            let key = scheme.key_one().with_exp(0, d as u16);
            let got = branch.rho[0].coeff(&key, 0).expect("coefficient");
            assert_eq!(&got, want, "q^{d}");
        }
        // The branch is homogeneous of weight 1.
        assert!(branch.rho[0].weight_violations(1).is_empty());
        // ρ_n on the fixed point itself: ξ₀ = q/ρ, vanishing at q = 0.
        let key0 = scheme.key_one();
        assert!(branch.rho_alpha[0].coeff(&key0, 0).expect("coeff").is_zero());
    }

    #[test]
    fn projective_line_phase_data_low_orders() {
        let (table, bundle) = projective_over_point(2);
        let scheme = VariableScheme::new(&[("q", 2, 3)], &[], 3, 0);
        let branch = critical_branch(&bundle, 0, &scheme, &[0]).expect("branch");
        let phase = stationary_phase(&bundle, &branch, 2).expect("phase");
        let delta = RatFun::var(&table, 0).sub(&RatFun::var(&table, 1));
        // F = q/δ − q²/(2δ³) + O(q³), computed from the expansion of the
        // critical value.
        let k1 = scheme.key_one().with_exp(0, 1);
        let k2 = scheme.key_one().with_exp(0, 2);
        assert_eq!(
            phase.f_value.coeff(&k1, 0).expect("coeff"),
            delta.pow(-1).unwrap()
        );
        assert_eq!(
            phase.f_value.coeff(&k2, 0).expect("coeff"),
            delta.pow(-3).unwrap().scale(&rat(-1, 2))
        );
        assert!(phase.f_value.coeff(&scheme.key_one(), 0).expect("coeff").is_zero());
        assert!(phase.f_value.weight_violations(1).is_empty());
        // A-series: at q = 0 it is the Bernoulli tail at −z/δ; A_0(0) = 1.
        let g = gamma_tail(2);
        let a0 = phase.a_series.coeff(&scheme.key_one(), 0).expect("coeff");
        assert!(a0.is_one());
        let a1 = phase.a_series.coeff(&scheme.key_one(), 1).expect("coeff");
        assert_eq!(a1, delta.pow(-1).unwrap().scale(&g[1]).neg());
        let a2 = phase.a_series.coeff(&scheme.key_one(), 2).expect("coeff");
        assert_eq!(a2, delta.pow(-2).unwrap().scale(&g[2]));
        // Whole A-series is homogeneous of weight 0; the Hessian
        // determinant is δ at q = 0 and homogeneous of weight 1.
        assert!(phase.a_series.weight_violations(0).is_empty());
        assert_eq!(
            phase.hessian_det.coeff(&scheme.key_one(), 0).expect("coeff"),
            delta
        );
        assert!(phase.hessian_det.weight_violations(1).is_empty());
        assert_eq!(phase.u_product, delta);
    }

    #[test]
    fn projective_plane_tail_factorizes_at_zero() {
        let (table, bundle) = projective_over_point(3);
        // Novikov cap 0: isolate the q = 0 tail, which must factor as the
        // product of one-variable tails at −z/u_j over both directions.
        let scheme = VariableScheme::new(&[("q", 3, 0)], &[], 0, 0);
        let branch = critical_branch(&bundle, 0, &scheme, &[0]).expect("branch");
        let phase = stationary_phase(&bundle, &branch, 3).expect("phase");
        let u1 = RatFun::var(&table, 0).sub(&RatFun::var(&table, 1));
        let u2 = RatFun::var(&table, 0).sub(&RatFun::var(&table, 2));
        let g = gamma_tail(3);
        // Convolve g(−z/u₁)·g(−z/u₂) through z³.
        let key = scheme.key_one();
        for d in 0..=3usize {
            let mut want = RatFun::zero(&table);
            for i in 0..=d {
                let sign = if d % 2 == 0 { 1 } else { -1 };
                let term = u1
                    .pow(-(i as i64))
                    .unwrap()
                    .scale(&g[i])
                    .mul(&u2.pow(-((d - i) as i64)).unwrap().scale(&g[d - i]))
                    .scale(&Rat::from_integer(sign.into()));
                want = want.add(&term);
            }
            let got = phase.a_series.coeff(&key, d as i32).expect("coeff");
            assert_eq!(got, want, "z^{d}");
        }
    }

    #[test]
    fn projective_plane_branch_residuals_vanish() {
        let (_, bundle) = projective_over_point(3);
        let scheme = VariableScheme::new(&[("q", 3, 5)], &[], 5, 0);
        for chart in 0..3 {
            let branch = critical_branch(&bundle, chart, &scheme, &[0]).expect("branch");
            for r in critical_residuals(&bundle, &branch).expect("residuals") {
                assert!(r.is_provably_zero(), "chart {chart}");
            }
        }
    }

    #[test]
    fn numeric_count_matches_fiber_dimension() {
        let (_, p1) = projective_over_point(2);
        let counts = critical_count_numeric(&p1, 7, 5).expect("count");
        assert_eq!(counts, vec![2; 5]);
        let (_, p2) = projective_over_point(3);
        let counts = critical_count_numeric(&p2, 11, 5).expect("count");
        assert_eq!(counts, vec![3; 5]);
    }
}
