//! Shared description of the deformation variables of a truncated series.

use crate::coeffs::Mono;
use std::sync::Arc;

/// The deformation variables a family of series is expanded in: Novikov
/// variables first (grading weights from the geometry), then parameter
/// directions (weights `1 − deg` of the inserted class), with per-variable
/// exponent caps and separate total-order caps for the Novikov and parameter
/// blocks.
#[derive(Debug, PartialEq, Eq)]
pub struct VariableScheme {
    names: Vec<String>,
    num_novikov: usize,
    weights: Vec<i64>,
    caps: Vec<u16>,
    nov_total_cap: u32,
    par_total_cap: u32,
}

impl VariableScheme {
    /// Build a scheme from `(name, grading weight, cap)` triples for the
    /// Novikov block and the parameter block, plus total-order caps.
    pub fn new(
        novikov: &[(&str, i64, u16)],
        params: &[(&str, i64, u16)],
        nov_total_cap: u32,
        par_total_cap: u32,
    ) -> Arc<Self> {
        let mut names = Vec::new();
        let mut weights = Vec::new();
        let mut caps = Vec::new();
        for (n, w, c) in novikov.iter().chain(params) {
            names.push(n.to_string());
            weights.push(*w);
            caps.push(*c);
        }
        Arc::new(VariableScheme {
            names,
            num_novikov: novikov.len(),
            weights,
            caps,
            nov_total_cap,
            par_total_cap,
        })
    }

    /// Total number of deformation variables.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// True if there are no deformation variables.
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Number of Novikov variables (they occupy the leading indices).
    pub fn num_novikov(&self) -> usize {
        self.num_novikov
    }

    /// True if variable `i` belongs to the Novikov block.
    pub fn is_novikov(&self, i: usize) -> bool {
        i < self.num_novikov
    }

    /// Name of variable `i`.
    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Grading weight of variable `i`.
    pub fn weight(&self, i: usize) -> i64 {
        self.weights[i]
    }

    /// Exponent cap of variable `i` (inclusive).
    pub fn cap(&self, i: usize) -> u16 {
        self.caps[i]
    }

    /// Total-order cap of the Novikov block (inclusive).
    pub fn nov_total_cap(&self) -> u32 {
        self.nov_total_cap
    }

    /// Total-order cap of the parameter block (inclusive).
    pub fn par_total_cap(&self) -> u32 {
        self.par_total_cap
    }

    /// Index of a variable by name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Novikov-block total order of a key.
    pub fn nov_total(&self, key: &Mono) -> u32 {
        (0..self.num_novikov).map(|i| key.get(i) as u32).sum()
    }

    /// Parameter-block total order of a key.
    pub fn par_total(&self, key: &Mono) -> u32 {
        (self.num_novikov..self.len())
            .map(|i| key.get(i) as u32)
            .sum()
    }

    /// True if a key respects every cap (i.e. is retained by truncation).
    pub fn fits(&self, key: &Mono) -> bool {
        debug_assert_eq!(key.len(), self.len());
        key.0.iter().zip(&self.caps).all(|(&e, &c)| e <= c)
            && self.nov_total(key) <= self.nov_total_cap
            && self.par_total(key) <= self.par_total_cap
    }

    /// Grading weight contributed by a key.
    pub fn key_weight(&self, key: &Mono) -> i64 {
        key.weighted(&self.weights)
    }

    /// The trivial key.
    pub fn key_one(&self) -> Mono {
        Mono::one(self.len())
    }

    /// All keys supported on the given variables that respect the caps,
    /// sorted by ascending total order (ties broken lexicographically).
    /// Includes the trivial key.
    pub fn keys_supported_on(&self, vars: &[usize]) -> Vec<Mono> {
        let mut out = vec![self.key_one()];
        for &v in vars {
            debug_assert!(v < self.len());
            let mut extended = Vec::new();
            for key in &out {
                for e in 1..=self.caps[v] {
                    let next = key.with_exp(v, e);
                    if self.fits(&next) {
                        extended.push(next);
                    }
                }
            }
            out.extend(extended);
        }
        out.sort_by_key(|k| (k.total(), k.clone()));
        out
    }
}

/// Schemes are compatible when pointer-equal or structurally equal.
pub(crate) fn schemes_compatible(a: &Arc<VariableScheme>, b: &Arc<VariableScheme>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}
