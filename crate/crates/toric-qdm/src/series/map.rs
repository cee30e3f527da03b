//! Coordinate changes on the deformation variables.
//!
//! Mirror maps act on the deformation point by shifting divisor-paired
//! variables multiplicatively (`q ↦ q·e^{g(y)}`, the exponentiated-divisor
//! form) and the remaining parameter directions additively
//! (`σ ↦ σ + h(y)`). A [`SeriesMap`] stores one image per variable and can
//! be applied to series and matrices, composed, and inverted by fixed-point
//! iteration when the corrections have positive order.

use super::scheme::VariableScheme;
use super::trunc::TruncSeries;
use crate::coeffs::{rat_int, Rat, VarTable};
use crate::error::{Error, Result};
use std::collections::HashMap;
use std::sync::Arc;

/// The image of one deformation variable under a [`SeriesMap`].
#[derive(Clone, Debug, PartialEq)]
pub enum VarImage {
    /// `v ↦ v`.
    Identity,
    /// `v ↦ v · exp(g)`: multiplicative shift, used for Novikov variables
    /// paired with divisor directions.
    MulExp(TruncSeries),
    /// `v ↦ v + h`: additive shift, used for parameter directions.
    AddShift(TruncSeries),
}

/// A substitution sending each deformation variable to its image.
#[derive(Clone, Debug)]
pub struct SeriesMap {
    scheme: Arc<VariableScheme>,
    table: Arc<VarTable>,
    images: Vec<VarImage>,
}

impl SeriesMap {
    /// The identity substitution.
    pub fn identity(scheme: &Arc<VariableScheme>, table: &Arc<VarTable>) -> Self {
        SeriesMap {
            scheme: scheme.clone(),
            table: table.clone(),
            images: vec![VarImage::Identity; scheme.len()],
        }
    }

    /// Build from explicit images (one per variable).
    pub fn new(
        scheme: &Arc<VariableScheme>,
        table: &Arc<VarTable>,
        images: Vec<VarImage>,
    ) -> Result<Self> {
        if images.len() != scheme.len() {
            return Err(Error::SchemeMismatch(format!(
                "map needs {} images, got {}",
                scheme.len(),
                images.len()
            )));
        }
        Ok(SeriesMap {
            scheme: scheme.clone(),
            table: table.clone(),
            images,
        })
    }

    /// The image description of variable `v`.
    pub fn image(&self, v: usize) -> &VarImage {
        &self.images[v]
    }

    /// Replace the image of variable `v`.
    pub fn set_image(&mut self, v: usize, img: VarImage) {
        self.images[v] = img;
    }

    /// True if every image is the identity.
    pub fn is_identity(&self) -> bool {
        self.images.iter().all(|i| matches!(i, VarImage::Identity))
    }

    /// Apply the substitution to a series.
    pub fn apply(&self, f: &TruncSeries) -> TruncSeries {
        if self.is_identity() {
            return f.clone();
        }
        let scheme = &self.scheme;
        let table = &self.table;
        // Memoized exp(g) per MulExp variable and powers of h per AddShift.
        let mut exp_cache: HashMap<usize, TruncSeries> = HashMap::new();
        let mut out = TruncSeries::zero(scheme, table);
        for (key, zp, coeff) in f.iter() {
            let mut term =
                TruncSeries::monomial(scheme, table, scheme.key_one(), zp, coeff.clone());
            for v in 0..scheme.len() {
                let e = key.get(v);
                if e == 0 {
                    continue;
                }
                match &self.images[v] {
                    VarImage::Identity => {
                        for _ in 0..e {
                            term = term.mul_var(v);
                        }
                    }
                    VarImage::MulExp(g) => {
                        // (v e^g)^e = v^e · exp(e·g)
                        for _ in 0..e {
                            term = term.mul_var(v);
                        }
                        let exp_g = exp_cache
                            .entry(v)
                            .or_insert_with(|| g.exp().expect("MulExp correction must have positive order"));
                        term = term.mul(&exp_g.pow(e as u32));
                    }
                    VarImage::AddShift(h) => {
                        // (v + h)^e = Σ_i C(e,i) v^i h^(e-i)
                        let mut sum = TruncSeries::zero(scheme, table);
                        let mut binom = Rat::from_integer(1.into());
                        for i in 0..=e {
                            // binom = C(e, i)
                            if i > 0 {
                                binom = binom * rat_int((e - i + 1) as i64)
                                    / rat_int(i as i64);
                            }
                            let mut part = h.pow((e - i) as u32).scale_rat(&binom);
                            for _ in 0..i {
                                part = part.mul_var(v);
                            }
                            sum = sum.add(&part);
                        }
                        term = term.mul(&sum);
                    }
                }
            }
            out = out.add(&term);
        }
        out
    }

    /// Apply to every entry of a matrix.
    pub fn apply_mat(&self, m: &super::matrix::SeriesMat) -> super::matrix::SeriesMat {
        m.map(|e| self.apply(e))
    }

    /// Compose with another map: `(self ∘ other)(v) = other-image evaluated,
    /// then self applied`, i.e. `apply(self.compose(other), f) =
    /// self.apply(other.apply(f))` — corrections of `other` substituted
    /// through `self`.
    pub fn compose(&self, other: &SeriesMap) -> Result<SeriesMap> {
        // For variable v: other sends v to v·e^{g_o} (or v + h_o); then self
        // sends that expression through its own images.
        let mut images = Vec::with_capacity(self.images.len());
        for v in 0..self.scheme.len() {
            let img = match (&other.images[v], &self.images[v]) {
                (VarImage::Identity, i) => i.clone(),
                (o, VarImage::Identity) => match o {
                    VarImage::MulExp(g) => VarImage::MulExp(self.apply(g)),
                    VarImage::AddShift(h) => VarImage::AddShift(self.apply(h)),
                    VarImage::Identity => VarImage::Identity,
                },
                (VarImage::MulExp(g_o), VarImage::MulExp(g_s)) => {
                    // v ↦ v e^{g_o} ↦ v e^{g_s} e^{g_o ∘ self}
                    VarImage::MulExp(g_s.add(&self.apply(g_o)))
                }
                (VarImage::AddShift(h_o), VarImage::AddShift(h_s)) => {
                    VarImage::AddShift(h_s.add(&self.apply(h_o)))
                }
                _ => {
                    return Err(Error::SchemeMismatch(
                        "cannot compose multiplicative with additive image".into(),
                    ))
                }
            };
            images.push(img);
        }
        SeriesMap::new(&self.scheme, &self.table, images)
    }

    /// Invert by fixed-point iteration. Requires every correction to have
    /// positive order in the deformation variables (no constant term).
    pub fn invert(&self) -> Result<SeriesMap> {
        for img in &self.images {
            let corr = match img {
                VarImage::Identity => continue,
                VarImage::MulExp(g) => g,
                VarImage::AddShift(h) => h,
            };
            if corr.has_constant_key() {
                return Err(Error::ReversionFailure(
                    "map correction has a constant term; cannot invert adically".into(),
                ));
            }
        }
        // One fixed-point sweep is only guaranteed to gain an order every
        // *two* iterations: a multiplicative correction that is linear in an
        // additively-shifted variable (or vice versa) bounces the defect
        // between the two image kinds before it picks up a Novikov power.
        let bound = 2 * (self.scheme.nov_total_cap() + self.scheme.par_total_cap()) as usize + 4;
        let mut inverse = SeriesMap {
            scheme: self.scheme.clone(),
            table: self.table.clone(),
            images: self
                .images
                .iter()
                .map(|img| match img {
                    VarImage::Identity => VarImage::Identity,
                    VarImage::MulExp(g) => VarImage::MulExp(g.neg()),
                    VarImage::AddShift(h) => VarImage::AddShift(h.neg()),
                })
                .collect(),
        };
        for _ in 0..bound {
            // inverse-image corrections must equal -(correction ∘ inverse).
            let mut next_images = Vec::with_capacity(self.images.len());
            for img in &self.images {
                next_images.push(match img {
                    VarImage::Identity => VarImage::Identity,
                    VarImage::MulExp(g) => VarImage::MulExp(inverse.apply(g).neg()),
                    VarImage::AddShift(h) => VarImage::AddShift(inverse.apply(h).neg()),
                });
            }
            if next_images == inverse.images {
                return Ok(inverse);
            }
            inverse.images = next_images;
        }
        Err(Error::ReversionFailure(
            "fixed-point inversion did not stabilize within the truncation order".into(),
        ))
    }
}
