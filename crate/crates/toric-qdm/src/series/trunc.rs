//! Truncated series with exact coefficients and a `z`-exactness window.

use super::scheme::{schemes_compatible, VariableScheme};
use crate::coeffs::{Mono, Rat, RatFun, VarTable};
use crate::error::{Error, Result};
use num::{One, Zero};
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

/// Sentinel for "no lower bound": when a series has no unknown tail below,
/// its window extends to `Z_MIN` (every coefficient below the stored support
/// is exactly zero).
pub const Z_MIN: i32 = -1_000_000;
/// Sentinel for "no upper bound".
pub const Z_MAX: i32 = 1_000_000;

/// A series in the deformation variables of a [`VariableScheme`], Laurent in
/// `z` within an exactness window, with coefficients in the scalar fraction
/// field.
///
/// `terms[key][zp]` is the exact coefficient of `key · z^zp`. The window
/// `[z_lo, z_hi]` brackets the exact region: if `tail_below` is set, the
/// coefficients below `z_lo` are unknown (the object was expanded at
/// `z = ∞`); if `tail_above` is set, those above `z_hi` are unknown
/// (expanded at `z = 0`). A side without a tail is exact all the way out
/// (everything beyond the stored support is genuinely zero), and the bound
/// is kept at the sentinel.
#[derive(Clone, Debug, PartialEq)]
pub struct TruncSeries {
    scheme: Arc<VariableScheme>,
    table: Arc<VarTable>,
    z_lo: i32,
    z_hi: i32,
    tail_below: bool,
    tail_above: bool,
    terms: BTreeMap<Mono, BTreeMap<i32, RatFun>>,
}

impl TruncSeries {
    // ---- constructors ----

    /// The zero series (exact everywhere).
    pub fn zero(scheme: &Arc<VariableScheme>, table: &Arc<VarTable>) -> Self {
        TruncSeries {
            scheme: scheme.clone(),
            table: table.clone(),
            z_lo: Z_MIN,
            z_hi: Z_MAX,
            tail_below: false,
            tail_above: false,
            terms: BTreeMap::new(),
        }
    }

    /// A scalar constant (exact everywhere).
    pub fn constant(scheme: &Arc<VariableScheme>, table: &Arc<VarTable>, c: RatFun) -> Self {
        let mut s = Self::zero(scheme, table);
        s.insert(scheme.key_one(), 0, c);
        s
    }

    /// The constant `1`.
    pub fn one(scheme: &Arc<VariableScheme>, table: &Arc<VarTable>) -> Self {
        Self::constant(scheme, table, RatFun::one(table))
    }

    /// The deformation variable `i`.
    pub fn var(scheme: &Arc<VariableScheme>, table: &Arc<VarTable>, i: usize) -> Self {
        let mut s = Self::zero(scheme, table);
        let key = Mono::var(scheme.len(), i);
        if scheme.fits(&key) {
            s.insert(key, 0, RatFun::one(table));
        }
        s
    }

    /// A single term `coeff · key · z^zp` (exact everywhere).
    pub fn monomial(
        scheme: &Arc<VariableScheme>,
        table: &Arc<VarTable>,
        key: Mono,
        zp: i32,
        coeff: RatFun,
    ) -> Self {
        let mut s = Self::zero(scheme, table);
        if scheme.fits(&key) {
            s.insert(key, zp, coeff);
        }
        s
    }

    /// Build from explicit terms (exact everywhere; keys beyond the caps are
    /// dropped, consistent with quotient-ring semantics).
    pub fn from_entries(
        scheme: &Arc<VariableScheme>,
        table: &Arc<VarTable>,
        entries: impl IntoIterator<Item = (Mono, i32, RatFun)>,
    ) -> Self {
        let mut s = Self::zero(scheme, table);
        for (k, zp, c) in entries {
            if scheme.fits(&k) {
                s.insert(k, zp, c);
            }
        }
        s
    }

    fn insert(&mut self, key: Mono, zp: i32, coeff: RatFun) {
        if coeff.is_zero() {
            return;
        }
        let row = self.terms.entry(key).or_default();
        use std::collections::btree_map::Entry;
        match row.entry(zp) {
            Entry::Vacant(e) => {
                e.insert(coeff);
            }
            Entry::Occupied(mut e) => {
                let sum = e.get().add(&coeff);
                if sum.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = sum;
                }
            }
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, row| !row.is_empty());
    }

    // ---- inspection ----

    /// The variable scheme.
    pub fn scheme(&self) -> &Arc<VariableScheme> {
        &self.scheme
    }

    /// The scalar table.
    pub fn table(&self) -> &Arc<VarTable> {
        &self.table
    }

    /// Lower edge of the exactness window (`Z_MIN` when no tail below).
    pub fn z_lo(&self) -> i32 {
        self.z_lo
    }

    /// Upper edge of the exactness window (`Z_MAX` when no tail above).
    pub fn z_hi(&self) -> i32 {
        self.z_hi
    }

    /// True if coefficients below the window are unknown.
    pub fn tail_below(&self) -> bool {
        self.tail_below
    }

    /// True if coefficients above the window are unknown.
    pub fn tail_above(&self) -> bool {
        self.tail_above
    }

    /// True if the series is provably zero (no stored terms, no tails).
    pub fn is_provably_zero(&self) -> bool {
        self.terms.is_empty() && !self.tail_below && !self.tail_above
    }

    /// True if every stored coefficient vanishes and there are no unknown
    /// regions inside the given window.
    pub fn is_zero_within(&self, lo: i32, hi: i32) -> Result<bool> {
        self.require_window(lo, hi)?;
        Ok(self
            .terms
            .values()
            .all(|row| row.range(lo..=hi).all(|(_, c)| c.is_zero())))
    }

    /// Stored `z`-support bounds, if any term is stored.
    pub fn z_support(&self) -> Option<(i32, i32)> {
        let mut lo = None;
        let mut hi = None;
        for row in self.terms.values() {
            if let Some((&a, _)) = row.iter().next() {
                lo = Some(lo.map_or(a, |x: i32| x.min(a)));
            }
            if let Some((&b, _)) = row.iter().next_back() {
                hi = Some(hi.map_or(b, |x: i32| x.max(b)));
            }
        }
        match (lo, hi) {
            (Some(a), Some(b)) => Some((a, b)),
            _ => None,
        }
    }

    /// Lowest possibly-nonzero `z`-power (`None` when provably zero).
    fn poss_lo(&self) -> Option<i64> {
        let mut lo: Option<i64> = None;
        if self.tail_below {
            lo = Some(i64::MIN / 4);
        }
        if let Some((a, _)) = self.z_support() {
            lo = Some(lo.map_or(a as i64, |x| x.min(a as i64)));
        }
        if self.tail_above {
            // unknown region starts just above z_hi
            let cand = self.z_hi as i64 + 1;
            lo = Some(lo.map_or(cand, |x| x.min(cand)));
        }
        lo
    }

    /// Highest possibly-nonzero `z`-power (`None` when provably zero).
    fn poss_hi(&self) -> Option<i64> {
        let mut hi: Option<i64> = None;
        if self.tail_above {
            hi = Some(i64::MAX / 4);
        }
        if let Some((_, b)) = self.z_support() {
            hi = Some(hi.map_or(b as i64, |x| x.max(b as i64)));
        }
        if self.tail_below {
            let cand = self.z_lo as i64 - 1;
            hi = Some(hi.map_or(cand, |x| x.max(cand)));
        }
        hi
    }

    /// Check that every coefficient with `z`-power in `[lo, hi]` is exact.
    pub fn require_window(&self, lo: i32, hi: i32) -> Result<()> {
        if self.tail_below && lo < self.z_lo {
            return Err(Error::WindowOverflow(format!(
                "need z^{lo} but exact window starts at z^{}",
                self.z_lo
            )));
        }
        if self.tail_above && hi > self.z_hi {
            return Err(Error::WindowOverflow(format!(
                "need z^{hi} but exact window ends at z^{}",
                self.z_hi
            )));
        }
        Ok(())
    }

    /// Exact coefficient of `key · z^zp`. Out-of-window powers are an error;
    /// keys beyond the caps are an error; absent in-window entries are zero.
    pub fn coeff(&self, key: &Mono, zp: i32) -> Result<RatFun> {
        if !self.scheme.fits(key) {
            return Err(Error::TruncationTooLow(format!(
                "key beyond truncation caps: {key:?}"
            )));
        }
        self.require_window(zp, zp)?;
        Ok(self
            .terms
            .get(key)
            .and_then(|row| row.get(&zp))
            .cloned()
            .unwrap_or_else(|| RatFun::zero(&self.table)))
    }

    /// Iterate stored terms as `(key, z-power, coefficient)`.
    pub fn iter(&self) -> impl Iterator<Item = (&Mono, i32, &RatFun)> {
        self.terms
            .iter()
            .flat_map(|(k, row)| row.iter().map(move |(&zp, c)| (k, zp, c)))
    }

    /// Number of stored terms.
    pub fn num_terms(&self) -> usize {
        self.terms.values().map(|r| r.len()).sum()
    }

    fn assert_compat(&self, other: &Self) {
        assert!(
            schemes_compatible(&self.scheme, &other.scheme),
            "series schemes are incompatible"
        );
        assert!(
            self.table == other.table || Arc::ptr_eq(&self.table, &other.table),
            "series scalar tables are incompatible"
        );
    }

    // ---- window management ----

    fn set_window(&mut self, lo: i64, hi: i64, tail_below: bool, tail_above: bool) {
        self.tail_below = tail_below;
        self.tail_above = tail_above;
        self.z_lo = if tail_below {
            lo.clamp(Z_MIN as i64, Z_MAX as i64) as i32
        } else {
            Z_MIN
        };
        self.z_hi = if tail_above {
            hi.clamp(Z_MIN as i64, Z_MAX as i64) as i32
        } else {
            Z_MAX
        };
        let (zl, zh) = (self.z_lo, self.z_hi);
        for row in self.terms.values_mut() {
            row.retain(|&zp, _| zp >= zl && zp <= zh);
        }
        self.prune();
    }

    /// Restrict the exactness window to `[lo, hi]`; coefficients outside are
    /// forgotten (the flags record that they are now unknown, unless they
    /// were provably zero).
    pub fn truncate_window(&self, lo: i32, hi: i32) -> Self {
        let mut out = self.clone();
        let supp = self.z_support();
        let cut_below = self.tail_below || supp.map(|(a, _)| a < lo).unwrap_or(false);
        let cut_above = self.tail_above || supp.map(|(_, b)| b > hi).unwrap_or(false);
        let new_lo = if cut_below {
            (self.z_lo.max(lo)) as i64
        } else {
            Z_MIN as i64
        };
        let new_hi = if cut_above {
            (self.z_hi.min(hi)) as i64
        } else {
            Z_MAX as i64
        };
        out.set_window(new_lo, new_hi, cut_below, cut_above);
        out
    }

    /// Restrict to keys whose Novikov block total is at most `nov` and whose
    /// parameter block total is at most `par`. This tightens the working
    /// truncation to a smaller target window (for example after a coordinate
    /// change, which is exact only on a window smaller than the working
    /// caps); the dropped keys are declared out of scope, so no tail flags
    /// are raised.
    pub fn truncate_key_totals(&self, nov: u32, par: u32) -> Self {
        let mut out = self.clone();
        let scheme = self.scheme.clone();
        out.terms
            .retain(|key, _| scheme.nov_total(key) <= nov && scheme.par_total(key) <= par);
        out.prune();
        out
    }

    // ---- ring operations ----

    /// Sum. The window is the intersection of the operands' windows.
    pub fn add(&self, other: &Self) -> Self {
        self.assert_compat(other);
        if self.is_provably_zero() {
            return other.clone();
        }
        if other.is_provably_zero() {
            return self.clone();
        }
        let mut out = TruncSeries {
            scheme: self.scheme.clone(),
            table: self.table.clone(),
            z_lo: Z_MIN,
            z_hi: Z_MAX,
            tail_below: false,
            tail_above: false,
            terms: self.terms.clone(),
        };
        for (k, row) in &other.terms {
            for (&zp, c) in row {
                out.insert(k.clone(), zp, c.clone());
            }
        }
        out.set_window(
            self.z_lo.max(other.z_lo) as i64,
            self.z_hi.min(other.z_hi) as i64,
            self.tail_below || other.tail_below,
            self.tail_above || other.tail_above,
        );
        out
    }

    /// Difference.
    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Negation.
    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for row in out.terms.values_mut() {
            for c in row.values_mut() {
                *c = c.neg();
            }
        }
        out
    }

    /// Scale by a rational function (window preserved; zero scale gives the
    /// exact zero).
    pub fn scale(&self, c: &RatFun) -> Self {
        if c.is_zero() {
            return Self::zero(&self.scheme, &self.table);
        }
        let mut out = self.clone();
        for row in out.terms.values_mut() {
            let keys: Vec<i32> = row.keys().cloned().collect();
            for zp in keys {
                let v = row.get_mut(&zp).unwrap();
                let nv = v.mul(c);
                if nv.is_zero() {
                    row.remove(&zp);
                } else {
                    *v = nv;
                }
            }
        }
        out.prune();
        out
    }

    /// Scale by a rational constant.
    pub fn scale_rat(&self, c: &Rat) -> Self {
        self.scale(&RatFun::constant(&self.table, c.clone()))
    }

    /// Product. Keys beyond the caps are dropped; the window is computed so
    /// that every retained coefficient is exact.
    pub fn mul(&self, other: &Self) -> Self {
        self.assert_compat(other);
        if self.is_provably_zero() || other.is_provably_zero() {
            return Self::zero(&self.scheme, &self.table);
        }
        let tail_below = self.tail_below || other.tail_below;
        let tail_above = self.tail_above || other.tail_above;
        let mut lo: i64 = Z_MIN as i64;
        let mut hi: i64 = Z_MAX as i64;
        if tail_below {
            let mut cands: Vec<i64> = Vec::new();
            if self.tail_below {
                match other.poss_hi() {
                    Some(ph) => cands.push(self.z_lo as i64 + ph),
                    None => {}
                }
            }
            if other.tail_below {
                match self.poss_hi() {
                    Some(ph) => cands.push(other.z_lo as i64 + ph),
                    None => {}
                }
            }
            lo = cands.into_iter().max().unwrap_or(Z_MIN as i64);
        }
        if tail_above {
            let mut cands: Vec<i64> = Vec::new();
            if self.tail_above {
                match other.poss_lo() {
                    Some(pl) => cands.push(self.z_hi as i64 + pl),
                    None => {}
                }
            }
            if other.tail_above {
                match self.poss_lo() {
                    Some(pl) => cands.push(other.z_hi as i64 + pl),
                    None => {}
                }
            }
            hi = cands.into_iter().min().unwrap_or(Z_MAX as i64);
        }
        let mut out = Self::zero(&self.scheme, &self.table);
        let lo_clamp = lo.clamp(Z_MIN as i64, Z_MAX as i64) as i32;
        let hi_clamp = hi.clamp(Z_MIN as i64, Z_MAX as i64) as i32;
        if lo <= hi {
            for (k1, row1) in &self.terms {
                for (k2, row2) in &other.terms {
                    let key = k1.mul(k2);
                    if !self.scheme.fits(&key) {
                        continue;
                    }
                    for (&z1, c1) in row1 {
                        for (&z2, c2) in row2 {
                            let zp = z1 + z2;
                            if zp < lo_clamp || zp > hi_clamp {
                                continue;
                            }
                            out.insert(key.clone(), zp, c1.mul(c2));
                        }
                    }
                }
            }
        }
        out.set_window(lo, hi, tail_below, tail_above);
        out
    }

    /// Multiply by `z^n` (shifts the window).
    pub fn mul_z(&self, n: i32) -> Self {
        let mut out = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            for (&zp, c) in row {
                out.insert(k.clone(), zp + n, c.clone());
            }
        }
        out.set_window(
            self.z_lo as i64 + n as i64,
            self.z_hi as i64 + n as i64,
            self.tail_below,
            self.tail_above,
        );
        out
    }

    /// Substitute `z → -z`: the coefficient at `z^m` picks up `(-1)^m`.
    pub fn flip_z(&self) -> Self {
        let mut out = self.clone();
        for row in out.terms.values_mut() {
            for (&zp, c) in row.iter_mut() {
                if zp.rem_euclid(2) == 1 {
                    *c = c.neg();
                }
            }
        }
        out
    }

    /// Multiply by deformation variable `i` (dropping terms past the caps).
    pub fn mul_var(&self, i: usize) -> Self {
        let shift = Mono::var(self.scheme.len(), i);
        let mut out = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            let key = k.mul(&shift);
            if !self.scheme.fits(&key) {
                continue;
            }
            for (&zp, c) in row {
                out.insert(key.clone(), zp, c.clone());
            }
        }
        out.set_window(
            self.z_lo as i64,
            self.z_hi as i64,
            self.tail_below,
            self.tail_above,
        );
        out
    }

    /// Logarithmic derivative `x_i ∂/∂x_i` (scales each term by its exponent).
    pub fn theta(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            let e = k.get(i);
            if e == 0 {
                continue;
            }
            let factor = Rat::from_integer(e.into());
            for (&zp, c) in row {
                out.insert(k.clone(), zp, c.scale(&factor));
            }
        }
        out.set_window(
            self.z_lo as i64,
            self.z_hi as i64,
            self.tail_below,
            self.tail_above,
        );
        out
    }

    /// Plain derivative `∂/∂x_i` (lowers the exponent).
    pub fn derivative_var(&self, i: usize) -> Self {
        let mut out = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            let e = k.get(i);
            if e == 0 {
                continue;
            }
            let key = k.with_exp(i, e - 1);
            let factor = Rat::from_integer(e.into());
            for (&zp, c) in row {
                out.insert(key.clone(), zp, c.scale(&factor));
            }
        }
        out.set_window(
            self.z_lo as i64,
            self.z_hi as i64,
            self.tail_below,
            self.tail_above,
        );
        out
    }

    /// Derivative of scalar coefficients with respect to table generator `v`.
    pub fn derivative_lambda(&self, v: usize) -> Self {
        let mut out = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            for (&zp, c) in row {
                out.insert(k.clone(), zp, c.derivative(v));
            }
        }
        out.set_window(
            self.z_lo as i64,
            self.z_hi as i64,
            self.tail_below,
            self.tail_above,
        );
        out
    }

    /// The sub-series with exponent exactly `e` in variable `i`, with that
    /// exponent removed from the keys.
    pub fn slice_var(&self, i: usize, e: u16) -> Self {
        let mut out = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            if k.get(i) != e {
                continue;
            }
            let key = k.with_exp(i, 0);
            for (&zp, c) in row {
                out.insert(key.clone(), zp, c.clone());
            }
        }
        out.set_window(
            self.z_lo as i64,
            self.z_hi as i64,
            self.tail_below,
            self.tail_above,
        );
        out
    }

    /// The coefficient row of exactly `key`, moved to the trivial key
    /// (`z`-structure and exactness window preserved).
    pub fn slice_key(&self, key: &Mono) -> Self {
        let mut out = Self::zero(&self.scheme, &self.table);
        if let Some(row) = self.terms.get(key) {
            let one = self.scheme.key_one();
            for (&zp, c) in row {
                out.insert(one.clone(), zp, c.clone());
            }
        }
        out.set_window(
            self.z_lo as i64,
            self.z_hi as i64,
            self.tail_below,
            self.tail_above,
        );
        out
    }

    /// The coefficient of `z^n` as a `z`-free series. Errors when `n` is
    /// outside the exactness window.
    pub fn z_coefficient(&self, n: i32) -> Result<Self> {
        self.require_window(n, n)?;
        let mut out = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            if let Some(c) = row.get(&n) {
                out.insert(k.clone(), 0, c.clone());
            }
        }
        Ok(out)
    }

    /// Split into (strictly negative powers, nonnegative powers of `z`).
    /// Errors if a tail makes either part incompletely known.
    pub fn z_split(&self) -> Result<(Self, Self)> {
        if self.tail_below && self.z_lo > 0 {
            return Err(Error::WindowOverflow(format!(
                "cannot split at z^0: window starts at z^{}",
                self.z_lo
            )));
        }
        if self.tail_above && self.z_hi < -1 {
            return Err(Error::WindowOverflow(format!(
                "cannot split at z^0: window ends at z^{}",
                self.z_hi
            )));
        }
        let mut neg = Self::zero(&self.scheme, &self.table);
        let mut pos = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            for (&zp, c) in row {
                if zp < 0 {
                    neg.insert(k.clone(), zp, c.clone());
                } else {
                    pos.insert(k.clone(), zp, c.clone());
                }
            }
        }
        neg.set_window(self.z_lo as i64, -1, self.tail_below, false);
        pos.set_window(0, self.z_hi as i64, false, self.tail_above);
        Ok((neg, pos))
    }

    /// The part of the series with no deformation variables (the "origin"
    /// value in the parameters, keeping `z`-structure).
    pub fn constant_key_part(&self) -> Self {
        let mut out = Self::zero(&self.scheme, &self.table);
        if let Some(row) = self.terms.get(&self.scheme.key_one()) {
            for (&zp, c) in row {
                out.insert(self.scheme.key_one(), zp, c.clone());
            }
        }
        out.set_window(
            self.z_lo as i64,
            self.z_hi as i64,
            self.tail_below,
            self.tail_above,
        );
        out
    }

    /// True if the series has any term at the trivial key.
    pub fn has_constant_key(&self) -> bool {
        self.terms.contains_key(&self.scheme.key_one())
    }

    // ---- analytic operations (positive-order arguments) ----

    fn require_no_constant_key(&self, what: &str) -> Result<()> {
        if self.has_constant_key() {
            return Err(Error::AssumptionViolation(format!(
                "{what} requires a series with no constant term"
            )));
        }
        Ok(())
    }

    fn order_bound(&self) -> u32 {
        self.scheme.nov_total_cap() + self.scheme.par_total_cap() + 1
    }

    /// `exp` of a series with no constant term (finite by truncation).
    pub fn exp(&self) -> Result<Self> {
        self.require_no_constant_key("exp")?;
        let mut acc = Self::one(&self.scheme, &self.table);
        let mut pow = Self::one(&self.scheme, &self.table);
        let mut factorial = Rat::one();
        for k in 1..=self.order_bound() {
            pow = pow.mul(self);
            if pow.is_provably_zero() {
                break;
            }
            factorial *= Rat::from_integer(k.into());
            acc = acc.add(&pow.scale_rat(&factorial.recip()));
        }
        // exp inherits the (possibly shrunk) window of the powers through
        // `add`; nothing extra to do.
        Ok(acc)
    }

    /// `log(1 + x)` for a series `x` with no constant term.
    pub fn log1p(&self) -> Result<Self> {
        self.require_no_constant_key("log1p")?;
        let mut acc = Self::zero(&self.scheme, &self.table);
        let mut pow = Self::one(&self.scheme, &self.table);
        for k in 1..=self.order_bound() {
            pow = pow.mul(self);
            if pow.is_provably_zero() {
                break;
            }
            let sign = if k % 2 == 1 { 1 } else { -1 };
            acc = acc.add(&pow.scale_rat(&Rat::new((sign).into(), k.into())));
        }
        Ok(acc)
    }

    /// `(1 + x)^e` by the binomial series, for `x` with no constant term and
    /// any rational exponent `e` (used radical-free for square roots).
    pub fn binom_pow(&self, e: &Rat) -> Result<Self> {
        self.require_no_constant_key("binom_pow")?;
        let mut acc = Self::one(&self.scheme, &self.table);
        let mut pow = Self::one(&self.scheme, &self.table);
        let mut coeff = Rat::one();
        for k in 1..=self.order_bound() {
            pow = pow.mul(self);
            if pow.is_provably_zero() {
                break;
            }
            // C(e, k) = C(e, k-1) · (e - k + 1)/k
            let kk = Rat::from_integer(k.into());
            coeff = coeff * (e.clone() - kk.clone() + Rat::one()) / kk;
            if coeff.is_zero() {
                break;
            }
            acc = acc.add(&pow.scale_rat(&coeff));
        }
        Ok(acc)
    }

    /// Invert a series of the form `c + (higher order)` where `c` is a
    /// nonzero scalar at `z^0` and the rest has no constant key.
    pub fn invert_unit(&self) -> Result<Self> {
        let c0 = self.constant_key_part();
        let c = c0.coeff(&self.scheme.key_one(), 0)?;
        if c.is_zero() {
            return Err(Error::NonInvertibleLeadingTerm(
                "series has no invertible constant term".into(),
            ));
        }
        if c0.num_terms() != 1 {
            return Err(Error::NonInvertibleLeadingTerm(
                "series constant term has z-dependence; cannot invert as a unit".into(),
            ));
        }
        let c_inv = c.inverse()?;
        let m = self.scale(&c_inv).sub(&Self::one(&self.scheme, &self.table));
        // (c(1+m))^{-1} = c^{-1} Σ (-m)^k
        let mut acc = Self::one(&self.scheme, &self.table);
        let mut pow = Self::one(&self.scheme, &self.table);
        for _ in 1..=self.order_bound() {
            pow = pow.mul(&m).neg();
            if pow.is_provably_zero() {
                break;
            }
            acc = acc.add(&pow);
        }
        Ok(acc.scale(&c_inv))
    }

    /// Power with a nonnegative integer exponent.
    pub fn pow(&self, e: u32) -> Self {
        let mut out = Self::one(&self.scheme, &self.table);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        out
    }

    /// Taylor-shift the scalar generator `v` by `rate(key) · z` in every
    /// coefficient, truncating the expansion at `z^hi_request` (the result is
    /// marked unknown above its window: it is an "expansion at z=0" object).
    pub fn lambda_shift_z(
        &self,
        v: usize,
        rate: impl Fn(&Mono) -> Rat,
        hi_request: i32,
    ) -> Result<Self> {
        let hi = if self.tail_above {
            self.z_hi.min(hi_request)
        } else {
            hi_request
        };
        let mut out = Self::zero(&self.scheme, &self.table);
        for (k, row) in &self.terms {
            let r = rate(k);
            if r.is_zero() {
                for (&zp, c) in row {
                    if zp <= hi {
                        out.insert(k.clone(), zp, c.clone());
                    }
                }
                continue;
            }
            for (&zp, c) in row {
                // c(λ_v + r z) = Σ_j c^{(j)}(λ_v) r^j z^j / j!
                let mut deriv = c.clone();
                let mut rj = Rat::one();
                let mut fact = Rat::one();
                let mut j = 0i32;
                while zp + j <= hi {
                    if j > 0 {
                        deriv = deriv.derivative(v);
                        if deriv.is_zero() {
                            break;
                        }
                        rj *= &r;
                        fact *= Rat::from_integer(j.into());
                    }
                    let term = deriv.scale(&(rj.clone() / fact.clone()));
                    out.insert(k.clone(), zp + j, term);
                    j += 1;
                }
            }
        }
        out.set_window(self.z_lo as i64, hi as i64, self.tail_below, true);
        Ok(out)
    }

    /// Check graded homogeneity: every stored term must satisfy
    /// `key-weight + z-power + scalar-weight = expected`. Returns the list of
    /// violations as human-readable strings (empty = homogeneous).
    pub fn weight_violations(&self, expected: i64) -> Vec<String> {
        let mut out = Vec::new();
        for (k, zp, c) in self.iter() {
            match c.homogeneous_weight() {
                None => out.push(format!(
                    "coefficient of {} z^{zp} is not λ-homogeneous: {c}",
                    self.key_display(k)
                )),
                Some(w) => {
                    let total = self.scheme.key_weight(k) + zp as i64 + w;
                    if total != expected {
                        out.push(format!(
                            "term {} z^{zp} has weight {total}, expected {expected}",
                            self.key_display(k)
                        ));
                    }
                }
            }
        }
        out
    }

    /// Human-readable key like `q1^2 Q1`.
    pub fn key_display(&self, key: &Mono) -> String {
        let mut s = String::new();
        for i in 0..self.scheme.len() {
            let e = key.get(i);
            if e == 0 {
                continue;
            }
            if !s.is_empty() {
                s.push(' ');
            }
            s.push_str(self.scheme.name(i));
            if e > 1 {
                s.push_str(&format!("^{e}"));
            }
        }
        if s.is_empty() {
            s.push('1');
        }
        s
    }
}

impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            write!(f, "0")?;
        } else {
            let mut first = true;
            for (k, zp, c) in self.iter() {
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({c})·{}", self.key_display(k))?;
                if zp != 0 {
                    write!(f, "·z^{zp}")?;
                }
            }
        }
        if self.tail_below {
            write!(f, " [+unknown below z^{}]", self.z_lo)?;
        }
        if self.tail_above {
            write!(f, " [+unknown above z^{}]", self.z_hi)?;
        }
        Ok(())
    }
}
