//! Shared generator tables for the scalar ring.

use super::{Mono, Poly, Rat};
use crate::error::{Error, Result};
use std::sync::Arc;

/// A monic defining relation for an adjoined branch symbol `s`:
///
/// ```text
/// s^degree = lower[degree-1] * s^(degree-1) + … + lower[0]
/// ```
///
/// The coefficients `lower[i]` are stored as raw term lists over the same
/// table and must not mention any branch symbol. Polynomial arithmetic
/// rewrites every occurrence of `s^e` with `e ≥ degree` using this relation,
/// so polynomials are kept in reduced form (degree `< degree` in `s`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchRel {
    /// Index of the adjoined generator this relation eliminates powers of.
    pub var: usize,
    /// The exponent at which rewriting starts.
    pub degree: u16,
    /// Term lists of the lower-order coefficients, indexed by power of `var`.
    pub lower: Vec<Vec<(Mono, Rat)>>,
}

/// The shared table of scalar generators: names, grading weights, and any
/// adjoined branch relations.
///
/// All polynomials and rational functions hold an `Arc` to their table;
/// binary operations require compatible (pointer-equal or structurally equal)
/// tables.
#[derive(Debug, PartialEq, Eq)]
pub struct VarTable {
    names: Vec<String>,
    weights: Vec<i64>,
    branches: Vec<BranchRel>,
}

impl VarTable {
    /// A table of named generators with grading weights (the torus parameters
    /// `λ_j` conventionally carry weight 1).
    pub fn new(gens: &[(&str, i64)]) -> Arc<Self> {
        Arc::new(VarTable {
            names: gens.iter().map(|(n, _)| n.to_string()).collect(),
            weights: gens.iter().map(|&(_, w)| w).collect(),
            branches: Vec::new(),
        })
    }

    /// A copy of `base` with a monic relation adjoined for generator `var`:
    /// `var^degree = Σ lower[i]·var^i`. The `lower` polynomials must live on
    /// `base` and must not mention `var` or any other branch symbol.
    pub fn with_branch(
        base: &Arc<Self>,
        var: usize,
        degree: u16,
        lower: &[Poly],
    ) -> Result<Arc<Self>> {
        if var >= base.len() {
            return Err(Error::ConfigError(format!(
                "branch variable index {var} out of range"
            )));
        }
        if degree == 0 {
            return Err(Error::ConfigError(
                "branch relation must have positive degree".into(),
            ));
        }
        if lower.len() != degree as usize {
            return Err(Error::ConfigError(format!(
                "branch relation of degree {degree} needs exactly {degree} lower coefficients, got {}",
                lower.len()
            )));
        }
        if base.branches.iter().any(|b| b.var == var) {
            return Err(Error::ConfigError(format!(
                "generator {} already has a branch relation",
                base.name(var)
            )));
        }
        let mut terms_by_power = Vec::with_capacity(lower.len());
        for p in lower {
            if !p.table_matches(base) {
                return Err(Error::SchemeMismatch(
                    "branch coefficients must live on the base table".into(),
                ));
            }
            let mut terms = Vec::new();
            for (m, c) in p.terms() {
                let mentions_branch =
                    m.get(var) > 0 || base.branches.iter().any(|b| m.get(b.var) > 0);
                if mentions_branch {
                    return Err(Error::ConfigError(
                        "branch coefficients must not mention branch symbols".into(),
                    ));
                }
                terms.push((m.clone(), c.clone()));
            }
            terms_by_power.push(terms);
        }
        let mut branches = base.branches.clone();
        branches.push(BranchRel {
            var,
            degree,
            lower: terms_by_power,
        });
        branches.sort_by_key(|b| b.var);
        Ok(Arc::new(VarTable {
            names: base.names.clone(),
            weights: base.weights.clone(),
            branches,
        }))
    }

    /// Number of generators.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    /// True if the table has no generators.
    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Name of generator `i`.
    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    /// Grading weight of generator `i`.
    pub fn weight(&self, i: usize) -> i64 {
        self.weights[i]
    }

    /// All grading weights, indexed by generator.
    pub fn weights(&self) -> &[i64] {
        &self.weights
    }

    /// Index of the generator with the given name.
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// True if any generator has a branch relation.
    pub fn has_branches(&self) -> bool {
        !self.branches.is_empty()
    }

    /// All branch relations, sorted by generator index.
    pub fn branches(&self) -> &[BranchRel] {
        &self.branches
    }

    /// The branch relation for generator `var`, if any.
    pub fn branch_for(&self, var: usize) -> Option<&BranchRel> {
        self.branches.iter().find(|b| b.var == var)
    }

    /// True if generator `var` is an adjoined branch symbol.
    pub fn is_branch_var(&self, var: usize) -> bool {
        self.branch_for(var).is_some()
    }
}

/// Tables are compatible when pointer-equal (fast path) or structurally equal.
pub(crate) fn tables_compatible(a: &Arc<VarTable>, b: &Arc<VarTable>) -> bool {
    Arc::ptr_eq(a, b) || a == b
}
