//! Exact multivariate polynomial GCD.
//!
//! Subresultant pseudo-remainder sequences with recursive content
//! extraction: pick a main variable, split each input into content ×
//! primitive part with respect to it, run the subresultant PRS on the
//! primitive parts (dividing every pseudo-remainder by the predicted
//! subresultant factor, which keeps coefficient growth polynomial without
//! recomputing contents at each step), and recurse on the contents.
//! Monomial content and rational content are stripped up front.
//!
//! The result is canonical: integer coprime coefficients and a positive
//! graded-lex leading coefficient. GCDs are only defined for branch-free
//! polynomials (branch tables are not unique factorization domains).

use super::{Mono, Poly};

/// Canonical greatest common divisor of two branch-free polynomials.
///
/// `poly_gcd(0, b) = ±b` normalized, and the GCD of two constants is `1`
/// (rational constants are units).
pub fn poly_gcd(a: &Poly, b: &Poly) -> Poly {
    assert!(
        !a.mentions_branch() && !b.mentions_branch(),
        "gcd is only defined for branch-free polynomials"
    );
    if a.is_zero() {
        return b.primitive_part();
    }
    if b.is_zero() {
        return a.primitive_part();
    }
    // Strip monomial content first: gcd(m1·p1, m2·p2) = gcd(m1,m2)·gcd(p1,p2)
    // once p1, p2 have no common monomial factor.
    let m1 = a.monomial_content();
    let m2 = b.monomial_content();
    let mg = m1.gcd(&m2);
    let pa = a.div_mono(&m1).primitive_part();
    let pb = b.div_mono(&m2).primitive_part();
    let core = gcd_primitive(&pa, &pb);
    core.mul_mono(&mg, &num::BigRational::from_integer(1.into()))
}

/// GCD of two nonzero primitive (monomial-content-free) polynomials.
fn gcd_primitive(a: &Poly, b: &Poly) -> Poly {
    if a.is_one() || b.is_one() || a.as_constant().is_some() || b.as_constant().is_some() {
        return Poly::one(a.table());
    }
    if a == b {
        return a.clone();
    }
    // Divisibility fast paths: if one input divides the other, it is the GCD.
    if a.exact_div(b).is_some() {
        return b.primitive_part();
    }
    if b.exact_div(a).is_some() {
        return a.primitive_part();
    }
    // Main variable: among the generators occurring in both inputs, pick the
    // one with the smallest degree (fewest pseudo-remainder steps). If none
    // is shared, the only common divisors are constants.
    let n = a.table().len();
    let mut best: Option<(u16, u16, usize)> = None;
    for i in 0..n {
        if a.mentions(i) && b.mentions(i) {
            let da = a.degree_in(i);
            let db = b.degree_in(i);
            let key = (da.min(db), da.max(db), i);
            if best.is_none_or(|cur| key < cur) {
                best = Some(key);
            }
        }
    }
    let Some((_, _, v)) = best else {
        return Poly::one(a.table());
    };

    // Split into content and primitive part with respect to v.
    let (ca, pa) = content_wrt(a, v);
    let (cb, pb) = content_wrt(b, v);
    let cont = poly_gcd(&ca, &cb);

    let (f, g) = if pa.degree_in(v) >= pb.degree_in(v) {
        (pa, pb)
    } else {
        (pb, pa)
    };
    let last = subresultant_prs(f.primitive_part(), g.primitive_part(), v);
    if last.is_one() {
        return cont;
    }
    // The last nonzero subresultant remainder equals the gcd up to content.
    let (_, gp) = content_wrt(&last, v);
    cont.mul(&gp.primitive_part())
}

/// Last nonzero remainder of the subresultant PRS of `f`, `g` with respect
/// to `v` (requires `deg_v f ≥ deg_v g ≥ 1` and both primitive with respect
/// to `v`), or `1` when the sequence terminates in a `v`-free remainder.
///
/// Every pseudo-remainder is divided exactly by the subresultant factor β,
/// which keeps coefficient bit-length growing linearly along the sequence;
/// a plain pseudo-remainder sequence doubles it per step and stalls on
/// BigInt arithmetic even for small inputs.
fn subresultant_prs(mut f: Poly, mut g: Poly, v: usize) -> Poly {
    let table = f.table().clone();
    let mut delta = f.degree_in(v) - g.degree_in(v);
    // β₁ = (−1)^{δ+1}, ψ₁ = −1.
    let mut beta = if delta % 2 == 0 {
        Poly::int(&table, -1)
    } else {
        Poly::one(&table)
    };
    let mut psi = Poly::int(&table, -1);
    loop {
        let r = pseudo_rem(&f, &g, v, delta);
        if r.is_zero() {
            return g;
        }
        let r = r
            .exact_div(&beta)
            .expect("subresultant factor must divide the pseudo-remainder");
        if r.degree_in(v) == 0 {
            // Nonzero v-free remainder: the primitive parts are coprime in v.
            return Poly::one(&table);
        }
        // ψ' = (−lc(g))^δ / ψ^{δ−1},  β' = −lc(g)·ψ'^{δ'}.
        let neg_lg = coeff_of_power(&g, v, g.degree_in(v)).neg();
        psi = match delta {
            0 => psi,
            1 => neg_lg.clone(),
            d => neg_lg
                .pow(d as u32)
                .exact_div(&psi.pow(d as u32 - 1))
                .expect("subresultant ψ update must divide"),
        };
        let delta_new = g.degree_in(v) - r.degree_in(v);
        beta = neg_lg.mul(&psi.pow(delta_new as u32));
        f = g;
        g = r;
        delta = delta_new;
    }
}

/// Content (gcd of the coefficients w.r.t. `v`) and primitive part.
fn content_wrt(p: &Poly, v: usize) -> (Poly, Poly) {
    let coeffs = p.coeffs_in(v);
    // A constant coefficient forces content 1.
    if coeffs
        .iter()
        .any(|c| !c.is_zero() && c.as_constant().is_some())
    {
        return (Poly::one(p.table()), p.clone());
    }
    let mut content = Poly::zero(p.table());
    for c in &coeffs {
        if c.is_zero() {
            continue;
        }
        content = poly_gcd(&content, c);
        if content.is_one() {
            return (content, p.clone());
        }
    }
    let primitive = p
        .exact_div(&content)
        .expect("content must divide the polynomial");
    (content, primitive)
}

/// Pseudo-remainder of `f` by `g` with respect to `v`: exactly
/// `lc_v(g)^{δ+1}·f mod g` where `δ = deg_v(f) − deg_v(g)` is passed in by
/// the caller. Cancels the top `v`-power of the running remainder against
/// `g`, scaling by `g`'s leading coefficient instead of dividing, and pads
/// with the remaining power of `lc_v(g)` when intermediate degrees drop by
/// more than one (the subresultant recurrences need the exact power).
fn pseudo_rem(f: &Poly, g: &Poly, v: usize, delta: u16) -> Poly {
    let dg = g.degree_in(v);
    debug_assert!(dg >= 1);
    let lg = coeff_of_power(g, v, dg);
    let mut r = f.clone();
    let mut applied = 0u16;
    while !r.is_zero() {
        let dr = r.degree_in(v);
        if dr < dg {
            break;
        }
        let lr = coeff_of_power(&r, v, dr);
        // r <- lg*r - lr * v^(dr-dg) * g
        let shift = Mono::var_pow(f.table().len(), v, dr - dg);
        let sub = g
            .mul_mono(&shift, &num::BigRational::from_integer(1.into()))
            .mul(&lr);
        r = r.mul(&lg).sub(&sub);
        applied += 1;
    }
    if applied < delta + 1 && !r.is_zero() {
        r = r.mul(&lg.pow(u32::from(delta + 1 - applied)));
    }
    r
}

/// Coefficient of `v^d` in `p` (a polynomial in the remaining generators).
fn coeff_of_power(p: &Poly, v: usize, d: u16) -> Poly {
    Poly::from_terms(
        p.table(),
        p.terms()
            .filter(|(m, _)| m.get(v) == d)
            .map(|(m, c)| (m.with_exp(v, 0), c.clone())),
    )
}

#[cfg(test)]
mod tests {
    use super::super::rat_int;
    use super::*;
    use crate::coeffs::VarTable;

    #[test]
    fn difference_of_squares() {
        // gcd(l1^2 - l2^2, l1^2 - 2 l1 l2 + l2^2) = l1 - l2
        // (long-division oracle: both factor through l1 - l2).
        let t = VarTable::new(&[("l1", 1), ("l2", 1)]);
        let l1 = Poly::var(&t, 0);
        let l2 = Poly::var(&t, 1);
        let a = l1.pow(2).sub(&l2.pow(2));
        let b = l1.sub(&l2).pow(2);
        assert_eq!(poly_gcd(&a, &b), l1.sub(&l2));
    }

    #[test]
    fn coprime_inputs() {
        let t = VarTable::new(&[("l1", 1), ("l2", 1)]);
        let l1 = Poly::var(&t, 0);
        let l2 = Poly::var(&t, 1);
        let a = l1.add(&l2);
        let b = l1.sub(&l2);
        assert!(poly_gcd(&a, &b).is_one());
        // Disjoint variables are coprime.
        assert!(poly_gcd(&l1.add(&Poly::one(&t)), &l2.add(&Poly::one(&t))).is_one());
    }

    #[test]
    fn content_and_monomials() {
        let t = VarTable::new(&[("l1", 1), ("l2", 1)]);
        let l1 = Poly::var(&t, 0);
        let l2 = Poly::var(&t, 1);
        // gcd(6 l1^2 l2, 4 l1 l2^2) = l1 l2 (rational constants are units,
        // so the numeric gcd 2 is dropped).
        let a = l1.pow(2).mul(&l2).scale(&rat_int(6));
        let b = l1.mul(&l2.pow(2)).scale(&rat_int(4));
        assert_eq!(poly_gcd(&a, &b), l1.mul(&l2));
    }

    #[test]
    fn three_variable_cascade() {
        // gcd((x+y)(y+z), (x+y)(x+z)) = x+y.
        let t = VarTable::new(&[("x", 1), ("y", 1), ("z", 1)]);
        let x = Poly::var(&t, 0);
        let y = Poly::var(&t, 1);
        let z = Poly::var(&t, 2);
        let a = x.add(&y).mul(&y.add(&z));
        let b = x.add(&y).mul(&x.add(&z));
        assert_eq!(poly_gcd(&a, &b), x.add(&y));
    }

    #[test]
    fn sign_normalization() {
        let t = VarTable::new(&[("x", 1), ("y", 1)]);
        let x = Poly::var(&t, 0);
        let y = Poly::var(&t, 1);
        let a = y.sub(&x); // leading term (graded-lex) is -x
        let g = poly_gcd(&a, &a);
        // canonical form flips the sign so the leading coefficient is +1
        assert_eq!(g, x.sub(&y));
    }
}
