//! Named residuals.

use crate::tol::Tolerances;

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: String,
    pub residual: f64,
}

impl Check {
    pub fn new(id: impl Into<String>, residual: f64) -> Self {
        Self {
            id: id.into(),
            residual,
        }
    }
}

/// Ordered list of named residuals.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Checks(pub Vec<Check>);

impl Checks {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, id: impl Into<String>, residual: f64) {
        self.0.push(Check::new(id, residual));
    }

    pub fn extend(&mut self, other: Checks) {
        self.0.extend(other.0);
    }

    /// Panics on an unknown id; ids are fixed strings chosen by this crate.
    pub fn get(&self, id: &str) -> f64 {
        self.0
            .iter()
            .find(|c| c.id == id)
            .unwrap_or_else(|| panic!("no check named {id}"))
            .residual
    }

    pub fn find(&self, id: &str) -> Option<f64> {
        self.0.iter().find(|c| c.id == id).map(|c| c.residual)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().map(|c| c.residual).fold(0.0, f64::max)
    }

    pub fn all_pass(&self, tol: &Tolerances) -> bool {
        self.0.iter().all(|c| tol.passes(c.residual))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Check> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}
