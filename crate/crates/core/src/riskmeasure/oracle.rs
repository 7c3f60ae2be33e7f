use crate::acceptance::{is_acceptable, AcceptanceSpec};
use crate::aggregation::ValueModel;
use crate::error::Result;

/// Deterministic membership test `k ∈ R(Y)`; must describe an upper set.
pub trait Oracle: Sync {
    fn dim(&self) -> usize;
    fn accepts(&self, k: &[f64]) -> Result<bool>;
}

/// `Y_k ∈ A` for a value model and an acceptance criterion.
pub fn membership<M: ValueModel + ?Sized>(model: &M, spec: &AcceptanceSpec, k: &[f64]) -> Result<bool> {
    is_acceptable(&model.evaluate(k)?, spec)
}

/// Membership oracle backed by a value model.
pub struct ModelOracle<'a, M: ValueModel + ?Sized> {
    pub model: &'a M,
    pub spec: &'a AcceptanceSpec,
}

impl<'a, M: ValueModel + ?Sized> ModelOracle<'a, M> {
    pub fn new(model: &'a M, spec: &'a AcceptanceSpec) -> Self {
        Self { model, spec }
    }
}

impl<M: ValueModel + ?Sized> Oracle for ModelOracle<'_, M> {
    fn dim(&self) -> usize {
        self.model.capital_dim()
    }

    fn accepts(&self, k: &[f64]) -> Result<bool> {
        membership(self.model, self.spec, k)
    }
}

/// Oracle from a plain predicate, mostly for analytic sets.
pub struct FnOracle<F> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> bool + Sync> FnOracle<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> bool + Sync> Oracle for FnOracle<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn accepts(&self, k: &[f64]) -> Result<bool> {
        Ok((self.f)(k))
    }
}

impl<O: Oracle + ?Sized> Oracle for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn accepts(&self, k: &[f64]) -> Result<bool> {
        (**self).accepts(k)
    }
}
