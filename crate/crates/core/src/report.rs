use serde::{Deserialize, Serialize};

/// Outcome of one numeric check: the observed worst value against its bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub observed: f64,
    /// Bound the observed value was compared against.
    pub tolerance: f64,
    /// Where the expected value comes from (closed form, oracle, invariant).
    pub oracle: String,
}

impl Check {
    /// Passes when `observed <= tolerance`.
    pub fn at_most(
        name: impl Into<String>,
        observed: f64,
        tolerance: f64,
        oracle: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed: observed <= tolerance,
            observed,
            tolerance,
            oracle: oracle.into(),
        }
    }

    /// Passes when `observed >= bound`.
    pub fn at_least(
        name: impl Into<String>,
        observed: f64,
        bound: f64,
        oracle: impl Into<String>,
    ) -> Self {
        Self {
            name: name.into(),
            passed: observed >= bound,
            observed,
            tolerance: bound,
            oracle: oracle.into(),
        }
    }

    pub fn flag(name: impl Into<String>, passed: bool, oracle: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            observed: if passed { 1.0 } else { 0.0 },
            tolerance: 1.0,
            oracle: oracle.into(),
        }
    }
}

/// A list of checks that passes iff all of its members pass.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckList(pub Vec<Check>);

impl CheckList {
    pub fn push(&mut self, check: Check) {
        self.0.push(check);
    }

    pub fn extend(&mut self, other: CheckList) {
        self.0.extend(other.0);
    }

    pub fn all_passed(&self) -> bool {
        self.0.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.0.iter().filter(|c| !c.passed)
    }

    pub fn iter(&self) -> impl Iterator<Item = &Check> {
        self.0.iter()
    }
}

impl From<Check> for CheckList {
    fn from(check: Check) -> Self {
        Self(vec![check])
    }
}
