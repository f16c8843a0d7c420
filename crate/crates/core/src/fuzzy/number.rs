use std::fmt;

use super::{FuzzyError, LevelGrid, OrderRelation, TOL_EQ, TOL_MONO};

/// Which of the discretized level-family conditions a candidate violates.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LevelCondition {
    /// Some endpoint is NaN or infinite.
    Finite,
    /// The lower endpoint family must be non-decreasing in r.
    LowerNondecreasing,
    /// The upper endpoint family must be non-increasing in r.
    UpperNonincreasing,
    /// At r = 1 the lower endpoint may not exceed the upper one.
    CoreOrdered,
}

impl fmt::Display for LevelCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            LevelCondition::Finite => "endpoints finite",
            LevelCondition::LowerNondecreasing => "(i) lower endpoint non-decreasing",
            LevelCondition::UpperNonincreasing => "(ii) upper endpoint non-increasing",
            LevelCondition::CoreOrdered => "(iii) lower <= upper at r = 1",
        };
        f.write_str(s)
    }
}

/// First violated condition and the level index where it was detected.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Violation {
    pub condition: LevelCondition,
    pub index: usize,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} violated at level index {}",
            self.condition, self.index
        )
    }
}

/// Checks a candidate pair of endpoint families against the grid.
///
/// Returns `Ok(None)` for a valid family, `Ok(Some(v))` with the first
/// violation otherwise. Monotonicity is checked with `TOL_MONO` slack.
pub fn validate(
    lower: &[f64],
    upper: &[f64],
    grid: &LevelGrid,
) -> Result<Option<Violation>, FuzzyError> {
    validate_with_tol(lower, upper, grid, TOL_MONO)
}

pub fn validate_with_tol(
    lower: &[f64],
    upper: &[f64],
    grid: &LevelGrid,
    tol: f64,
) -> Result<Option<Violation>, FuzzyError> {
    if lower.len() != grid.len() || upper.len() != grid.len() {
        return Err(FuzzyError::SizeMismatch {
            expected: grid.len(),
            lower: lower.len(),
            upper: upper.len(),
        });
    }
    Ok(first_violation(lower, upper, tol))
}

fn first_violation(lower: &[f64], upper: &[f64], tol: f64) -> Option<Violation> {
    let fail = |condition, index| Some(Violation { condition, index });
    if let Some(i) = lower
        .iter()
        .zip(upper)
        .position(|(l, u)| !l.is_finite() || !u.is_finite())
    {
        return fail(LevelCondition::Finite, i);
    }
    if let Some(i) = lower.windows(2).position(|w| w[1] < w[0] - tol) {
        return fail(LevelCondition::LowerNondecreasing, i + 1);
    }
    if let Some(i) = upper.windows(2).position(|w| w[1] > w[0] + tol) {
        return fail(LevelCondition::UpperNonincreasing, i + 1);
    }
    let top = lower.len() - 1;
    if lower[top] > upper[top] + tol {
        return fail(LevelCondition::CoreOrdered, top);
    }
    None
}

/// A fuzzy number stored as its level-cut endpoints on a [`LevelGrid`].
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyNumber {
    grid: LevelGrid,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

/// Candidate levels of a gH-difference that does not exist as a fuzzy number.
#[derive(Clone, Debug, PartialEq)]
pub struct NonexistenceReport {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub violation: Violation,
}

/// Outcome of [`FuzzyNumber::gh_difference`].
#[derive(Clone, Debug, PartialEq)]
pub enum GhDifference {
    Exists(FuzzyNumber),
    Nonexistent(NonexistenceReport),
}

impl GhDifference {
    pub fn exists(&self) -> bool {
        matches!(self, GhDifference::Exists(_))
    }

    pub fn into_option(self) -> Option<FuzzyNumber> {
        match self {
            GhDifference::Exists(c) => Some(c),
            GhDifference::Nonexistent(_) => None,
        }
    }
}

impl FuzzyNumber {
    /// Builds a fuzzy number from endpoint families, rejecting invalid ones.
    pub fn from_levels(
        grid: LevelGrid,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, FuzzyError> {
        if let Some(v) = validate(&lower, &upper, &grid)? {
            return Err(FuzzyError::Invalid(v));
        }
        Ok(Self { grid, lower, upper })
    }

    pub(crate) fn from_levels_unchecked(grid: LevelGrid, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        Self { grid, lower, upper }
    }

    /// Triangular number (x, y, z): levels `[y r + x (1 - r), y r + z (1 - r)]`.
    pub fn triangular(x: f64, y: f64, z: f64, grid: &LevelGrid) -> Result<Self, FuzzyError> {
        if !(x <= y && y <= z) {
            return Err(FuzzyError::TriangularOrder { x, y, z });
        }
        let lower = grid.iter().map(|r| y * r + x * (1.0 - r)).collect();
        let upper = grid.iter().map(|r| y * r + z * (1.0 - r)).collect();
        Self::from_levels(grid.clone(), lower, upper)
    }

    pub fn crisp(k: f64, grid: &LevelGrid) -> Self {
        Self {
            grid: grid.clone(),
            lower: vec![k; grid.len()],
            upper: vec![k; grid.len()],
        }
    }

    pub fn zero(grid: &LevelGrid) -> Self {
        Self::crisp(0.0, grid)
    }

    pub fn grid(&self) -> &LevelGrid {
        &self.grid
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    /// The closed interval at level index `i`.
    pub fn cut(&self, i: usize) -> (f64, f64) {
        (self.lower[i], self.upper[i])
    }

    pub fn is_crisp(&self) -> bool {
        let k = self.lower[0];
        self.lower
            .iter()
            .chain(&self.upper)
            .all(|v| (v - k).abs() <= TOL_EQ)
    }

    /// Membership value `sup { r : lower(r) <= t <= upper(r) }`, 0 outside the support.
    pub fn membership(&self, t: f64) -> f64 {
        self.grid
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .filter(|(_, (l, u))| **l <= t && t <= **u)
            .map(|(r, _)| r)
            .fold(0.0, f64::max)
    }

    pub fn add(&self, other: &FuzzyNumber) -> Result<FuzzyNumber, FuzzyError> {
        self.grid.ensure_same(&other.grid)?;
        Ok(Self {
            grid: self.grid.clone(),
            lower: zip_map(&self.lower, &other.lower, |a, b| a + b),
            upper: zip_map(&self.upper, &other.upper, |a, b| a + b),
        })
    }

    /// `lambda * a`; a negative factor swaps the endpoint families.
    pub fn scale(&self, lambda: f64) -> FuzzyNumber {
        let l: Vec<f64> = self.lower.iter().map(|v| lambda * v).collect();
        let u: Vec<f64> = self.upper.iter().map(|v| lambda * v).collect();
        let (lower, upper) = if lambda < 0.0 { (u, l) } else { (l, u) };
        Self {
            grid: self.grid.clone(),
            lower,
            upper,
        }
    }

    /// Level-wise interval product: min/max over the four endpoint products.
    pub fn multiply(&self, other: &FuzzyNumber) -> Result<FuzzyNumber, FuzzyError> {
        self.grid.ensure_same(&other.grid)?;
        let n = self.grid.len();
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for i in 0..n {
            let (al, au) = self.cut(i);
            let (bl, bu) = other.cut(i);
            let p = [al * bl, al * bu, au * bl, au * bu];
            lower.push(p.iter().copied().fold(f64::INFINITY, f64::min));
            upper.push(p.iter().copied().fold(f64::NEG_INFINITY, f64::max));
        }
        Ok(Self {
            grid: self.grid.clone(),
            lower,
            upper,
        })
    }

    /// Generalized Hukuhara difference `self ⊖gH other`.
    ///
    /// Nonexistence is an ordinary outcome, not an error; only a grid
    /// mismatch fails.
    pub fn gh_difference(&self, other: &FuzzyNumber) -> Result<GhDifference, FuzzyError> {
        self.grid.ensure_same(&other.grid)?;
        let n = self.grid.len();
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        for i in 0..n {
            let dl = self.lower[i] - other.lower[i];
            let du = self.upper[i] - other.upper[i];
            lower.push(dl.min(du));
            upper.push(dl.max(du));
        }
        Ok(match first_violation(&lower, &upper, TOL_MONO) {
            None => GhDifference::Exists(Self {
                grid: self.grid.clone(),
                lower,
                upper,
            }),
            Some(violation) => GhDifference::Nonexistent(NonexistenceReport {
                lower,
                upper,
                violation,
            }),
        })
    }

    /// Hausdorff distance: maximum endpoint gap over the grid levels.
    pub fn hausdorff(&self, other: &FuzzyNumber) -> Result<f64, FuzzyError> {
        self.grid.ensure_same(&other.grid)?;
        Ok((0..self.grid.len())
            .map(|i| {
                (self.lower[i] - other.lower[i])
                    .abs()
                    .max((self.upper[i] - other.upper[i]).abs())
            })
            .fold(0.0, f64::max))
    }

    pub fn compare(&self, other: &FuzzyNumber) -> Result<OrderRelation, FuzzyError> {
        self.grid.ensure_same(&other.grid)?;
        Ok(OrderRelation::classify(
            &self.lower,
            &self.upper,
            &other.lower,
            &other.upper,
        ))
    }
}

fn zip_map(a: &[f64], b: &[f64], f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| f(*x, *y)).collect()
}

impl fmt::Display for FuzzyNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, r) in self.grid.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{r}: [{}, {}]", self.lower[i], self.upper[i])?;
        }
        write!(f, "}}")
    }
}
