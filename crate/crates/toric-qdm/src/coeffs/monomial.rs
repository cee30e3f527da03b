//! Exponent vectors with graded-lexicographic order.

use std::cmp::Ordering;

/// A monomial in the generators of a variable table, stored as one exponent
/// per generator. All monomials of a polynomial share the same length.
///
/// The order is graded lexicographic: first by total degree, then
/// lexicographically with the first generator strongest. This makes the
/// maximal term of a polynomial a stable choice of leading term.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Mono(pub Vec<u16>);

impl Mono {
    /// The monomial `1` in `n` generators.
    pub fn one(n: usize) -> Self {
        Mono(vec![0; n])
    }

    /// The generator `i` (as a monomial) in a table of `n` generators.
    pub fn var(n: usize, i: usize) -> Self {
        Self::var_pow(n, i, 1)
    }

    /// The power `x_i^e` in a table of `n` generators.
    pub fn var_pow(n: usize, i: usize, e: u16) -> Self {
        let mut v = vec![0; n];
        v[i] = e;
        Mono(v)
    }

    /// Number of generator slots.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// True if this is the monomial `1`.
    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// Exponent of generator `i`.
    pub fn get(&self, i: usize) -> u16 {
        self.0[i]
    }

    /// Copy with the exponent of generator `i` replaced.
    pub fn with_exp(&self, i: usize, e: u16) -> Self {
        let mut v = self.0.clone();
        v[i] = e;
        Mono(v)
    }

    /// Total degree (sum of exponents).
    pub fn total(&self) -> u32 {
        self.0.iter().map(|&e| e as u32).sum()
    }

    /// Weighted degree under per-generator weights.
    pub fn weighted(&self, weights: &[i64]) -> i64 {
        self.0
            .iter()
            .zip(weights)
            .map(|(&e, &w)| e as i64 * w)
            .sum()
    }

    /// Product of monomials (adds exponents).
    pub fn mul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.checked_add(b).expect("monomial exponent overflow"))
                .collect(),
        )
    }

    /// Exact quotient, or `None` if `other` does not divide `self`.
    pub fn try_div(&self, other: &Self) -> Option<Self> {
        debug_assert_eq!(self.len(), other.len());
        let mut v = Vec::with_capacity(self.len());
        for (&a, &b) in self.0.iter().zip(&other.0) {
            if a < b {
                return None;
            }
            v.push(a - b);
        }
        Some(Mono(v))
    }

    /// Entrywise minimum (the GCD of the two monomials).
    pub fn gcd(&self, other: &Self) -> Self {
        debug_assert_eq!(self.len(), other.len());
        Mono(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(&a, &b)| a.min(b))
                .collect(),
        )
    }

    /// `self` raised to the `e`-th power.
    pub fn pow(&self, e: u16) -> Self {
        Mono(
            self.0
                .iter()
                .map(|&a| a.checked_mul(e).expect("monomial exponent overflow"))
                .collect(),
        )
    }
}

impl Ord for Mono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Mono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        // Total degree decides first: x0^2 > x0*x1 is false at equal degree;
        // ties break lexicographically with the first generator strongest.
        let x0x0 = Mono(vec![2, 0]);
        let x0x1 = Mono(vec![1, 1]);
        let x1x1 = Mono(vec![0, 2]);
        let x0 = Mono(vec![1, 0]);
        assert!(x0x0 > x0x1 && x0x1 > x1x1);
        assert!(x1x1 > x0, "degree dominates lex");
    }

    #[test]
    fn div_and_gcd() {
        let a = Mono(vec![3, 1]);
        let b = Mono(vec![1, 2]);
        assert_eq!(a.try_div(&b), None);
        assert_eq!(a.gcd(&b), Mono(vec![1, 1]));
        assert_eq!(a.try_div(&Mono(vec![2, 0])), Some(Mono(vec![1, 1])));
    }
}
