use serde::Serialize;

use super::{CalculusError, DiffStencil};
use crate::calculus::stencil::trapezoid;
use crate::fuzzy::{validate, validate_with_tol, FuzzyNumber, LevelGrid, TOL_MONO};

/// A fuzzy-valued function of one real variable, sampled on strictly
/// increasing points.
#[derive(Clone, Debug, PartialEq)]
pub struct FuzzyTrajectory {
    xs: Vec<f64>,
    values: Vec<FuzzyNumber>,
}

/// How the gH-derivative exists at a sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum GhKind {
    /// Levels `[lower', upper']` form a fuzzy number.
    Kind1,
    /// Levels `[upper', lower']` form a fuzzy number.
    Kind2,
    /// Both orderings are valid: the endpoint derivatives coincide.
    Both,
    /// Neither ordering gives a fuzzy number.
    None,
}

impl FuzzyTrajectory {
    pub fn new(xs: Vec<f64>, values: Vec<FuzzyNumber>) -> Result<Self, CalculusError> {
        if xs.len() != values.len() {
            return Err(CalculusError::LengthMismatch {
                xs: xs.len(),
                values: values.len(),
            });
        }
        if xs.len() < 3 {
            return Err(CalculusError::TooFewSamples(xs.len()));
        }
        if let Some(i) = xs.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(CalculusError::NotIncreasing(i + 1));
        }
        let grid = values[0].grid();
        if values.iter().any(|v| v.grid() != grid) {
            return Err(CalculusError::MixedGrids);
        }
        Ok(Self { xs, values })
    }

    /// Samples `f` at every point of `xs`.
    pub fn sample<F>(xs: Vec<f64>, mut f: F) -> Result<Self, CalculusError>
    where
        F: FnMut(f64) -> Result<FuzzyNumber, crate::fuzzy::FuzzyError>,
    {
        let values = xs.iter().map(|&x| f(x)).collect::<Result<Vec<_>, _>>()?;
        Self::new(xs, values)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[FuzzyNumber] {
        &self.values
    }

    pub fn grid(&self) -> &LevelGrid {
        self.values[0].grid()
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// Endpoint family at level index `level` across all samples.
    pub fn level_series(&self, level: usize) -> (Vec<f64>, Vec<f64>) {
        self.values
            .iter()
            .map(|v| (v.lower()[level], v.upper()[level]))
            .unzip()
    }

    /// gH-derivative through the endpoint derivatives, with the kind of
    /// differentiability at every sample.
    ///
    /// Samples of kind `None` hold the monotone envelope of the level-wise
    /// min/max candidate so the returned trajectory stays well formed.
    pub fn gh_derivative(&self) -> Result<(FuzzyTrajectory, Vec<GhKind>), CalculusError> {
        let grid = self.grid().clone();
        let stencil = DiffStencil::new(&self.xs);
        let n = self.xs.len();
        let m = grid.len();
        let mut dl = vec![vec![0.0; m]; n];
        let mut du = vec![vec![0.0; m]; n];
        for level in 0..m {
            let (lo, up) = self.level_series(level);
            let dlo = stencil.apply(&lo);
            let dup = stencil.apply(&up);
            for i in 0..n {
                dl[i][level] = dlo[i];
                du[i][level] = dup[i];
            }
        }
        let mut kinds = Vec::with_capacity(n);
        let mut values = Vec::with_capacity(n);
        for (l, u) in dl.into_iter().zip(du) {
            let k1 = validate(&l, &u, &grid)?.is_none();
            let k2 = validate(&u, &l, &grid)?.is_none();
            let scale = l.iter().chain(&u).fold(1.0_f64, |s, v| s.max(v.abs()));
            let coincide = l
                .iter()
                .zip(&u)
                .all(|(a, b)| (a - b).abs() <= TOL_MONO * scale);
            let (kind, lower, upper) = match (k1, k2) {
                (true, true) if coincide => (GhKind::Both, l, u),
                (true, _) => (GhKind::Kind1, l, u),
                (false, true) => (GhKind::Kind2, u, l),
                (false, false) => {
                    let lower = l.iter().zip(&u).map(|(a, b)| a.min(*b)).collect();
                    let upper = l.iter().zip(&u).map(|(a, b)| a.max(*b)).collect();
                    (GhKind::None, lower, upper)
                }
            };
            kinds.push(kind);
            values.push(match kind {
                GhKind::None => monotone_envelope(&grid, &lower, &upper),
                _ => FuzzyNumber::from_levels(grid.clone(), lower, upper)?,
            });
        }
        Ok((Self::new(self.xs.clone(), values)?, kinds))
    }

    /// Endpoint-wise definite integral over the whole sample range.
    pub fn integral(&self) -> Result<FuzzyNumber, CalculusError> {
        let grid = self.grid().clone();
        let m = grid.len();
        let mut lower = Vec::with_capacity(m);
        let mut upper = Vec::with_capacity(m);
        for level in 0..m {
            let (lo, up) = self.level_series(level);
            lower.push(trapezoid(&self.xs, &lo));
            upper.push(trapezoid(&self.xs, &up));
        }
        // trapezoid weights are positive, so monotone inputs give monotone
        // outputs up to rounding; the slack scales with the magnitude.
        let scale = lower
            .iter()
            .chain(&upper)
            .fold(1.0_f64, |s, v| s.max(v.abs()));
        if let Some(v) = validate_with_tol(&lower, &upper, &grid, TOL_MONO * scale)? {
            return Err(CalculusError::InvalidIntegral(v));
        }
        Ok(FuzzyNumber::from_levels_unchecked(grid, lower, upper))
    }
}

/// Smallest adjustment of a candidate family that satisfies the level conditions.
fn monotone_envelope(grid: &LevelGrid, lower: &[f64], upper: &[f64]) -> FuzzyNumber {
    let mut lo = lower.to_vec();
    let mut up = upper.to_vec();
    for i in 1..lo.len() {
        lo[i] = lo[i].max(lo[i - 1]);
        up[i] = up[i].min(up[i - 1]);
    }
    let top = lo.len() - 1;
    if lo[top] > up[top] {
        let mid = 0.5 * (lo[top] + up[top]);
        lo[top] = mid;
        up[top] = mid;
        for i in 0..top {
            lo[i] = lo[i].min(mid);
            up[i] = up[i].max(mid);
        }
    }
    FuzzyNumber::from_levels(grid.clone(), lo, up).expect("clamped family is monotone")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect()
    }

    #[test]
    fn rejects_bad_sampling() {
        let g = LevelGrid::default();
        let v = FuzzyNumber::crisp(0.0, &g);
        assert!(matches!(
            FuzzyTrajectory::new(vec![0.0, 1.0], vec![v.clone(), v.clone()]),
            Err(CalculusError::TooFewSamples(2))
        ));
        assert!(matches!(
            FuzzyTrajectory::new(vec![0.0, 1.0, 1.0], vec![v.clone(), v.clone(), v.clone()]),
            Err(CalculusError::NotIncreasing(2))
        ));
        let other = FuzzyNumber::crisp(0.0, &LevelGrid::uniform(3).unwrap());
        assert!(matches!(
            FuzzyTrajectory::new(vec![0.0, 1.0, 2.0], vec![v.clone(), v, other]),
            Err(CalculusError::MixedGrids)
        ));
    }

    #[test]
    fn crisp_square_derivative() {
        let g = LevelGrid::default();
        let t = FuzzyTrajectory::sample(linspace(0.0, 1.0, 21), |x| {
            Ok(FuzzyNumber::crisp(x * x, &g))
        })
        .unwrap();
        let (d, kinds) = t.gh_derivative().unwrap();
        assert!(kinds.iter().all(|k| *k == GhKind::Both));
        for (x, v) in d.xs().iter().zip(d.values()) {
            assert!(v.hausdorff(&FuzzyNumber::crisp(2.0 * x, &g)).unwrap() < 1e-12);
        }
    }

    #[test]
    fn shifted_triangle_has_crisp_unit_derivative() {
        let g = LevelGrid::default();
        let t = FuzzyTrajectory::sample(linspace(0.0, 2.0, 41), |x| {
            FuzzyNumber::triangular(x - 1.0, x, x + 1.0, &g)
        })
        .unwrap();
        let (d, kinds) = t.gh_derivative().unwrap();
        assert!(kinds.iter().all(|k| *k == GhKind::Both), "{kinds:?}");
        for v in d.values() {
            assert!(v.hausdorff(&FuzzyNumber::crisp(1.0, &g)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn growing_triangle_is_kind1() {
        let g = LevelGrid::default();
        let t = FuzzyTrajectory::sample(linspace(0.1, 1.0, 46), |x| {
            Ok(FuzzyNumber::triangular(0.0, 1.0, 2.0, &g)?.scale(x))
        })
        .unwrap();
        let (d, kinds) = t.gh_derivative().unwrap();
        assert!(kinds.iter().all(|k| *k == GhKind::Kind1));
        let expected = FuzzyNumber::triangular(0.0, 1.0, 2.0, &g).unwrap();
        for v in d.values() {
            assert!(v.hausdorff(&expected).unwrap() < 1e-12);
        }
    }

    #[test]
    fn shrinking_triangle_is_kind2() {
        let g = LevelGrid::default();
        let t = FuzzyTrajectory::sample(linspace(0.1, 1.0, 46), |x| {
            Ok(FuzzyNumber::triangular(0.0, 1.0, 2.0, &g)?.scale(2.0 - x))
        })
        .unwrap();
        let (d, kinds) = t.gh_derivative().unwrap();
        assert!(kinds.iter().all(|k| *k == GhKind::Kind2));
        // derivative levels: [-(2 - r), -r]
        let expected = FuzzyNumber::triangular(-2.0, -1.0, 0.0, &g).unwrap();
        for v in d.values() {
            assert!(v.hausdorff(&expected).unwrap() < 1e-12);
        }
    }

    #[test]
    fn switching_width_is_not_differentiable() {
        // lower' = r, upper' = -r: [r, -r] breaks the core order and
        // [-r, r] breaks monotonicity
        let g = LevelGrid::uniform(3).unwrap();
        let t = FuzzyTrajectory::sample(linspace(0.0, 1.0, 11), |x| {
            let lower = g.iter().map(|r| r * x).collect();
            let upper = g.iter().map(|r| 10.0 - r * x).collect();
            FuzzyNumber::from_levels(g.clone(), lower, upper)
        })
        .unwrap();
        let (_, kinds) = t.gh_derivative().unwrap();
        assert!(kinds.iter().all(|k| *k == GhKind::None), "{kinds:?}");
    }

    #[test]
    fn integral_examples() {
        let g = LevelGrid::default();
        let one =
            FuzzyTrajectory::sample(linspace(0.0, 1.0, 5), |_| Ok(FuzzyNumber::crisp(1.0, &g)))
                .unwrap();
        assert!(
            one.integral()
                .unwrap()
                .hausdorff(&FuzzyNumber::crisp(1.0, &g))
                .unwrap()
                < 1e-15
        );

        let tri = FuzzyNumber::triangular(0.0, 1.0, 2.0, &g).unwrap();
        let t = FuzzyTrajectory::sample(linspace(0.0, 2.0, 9), |_| Ok(tri.clone())).unwrap();
        let expected = FuzzyNumber::triangular(0.0, 2.0, 4.0, &g).unwrap();
        assert!(t.integral().unwrap().hausdorff(&expected).unwrap() < 1e-14);

        let lin =
            FuzzyTrajectory::sample(linspace(0.0, 1.0, 1001), |x| Ok(FuzzyNumber::crisp(x, &g)))
                .unwrap();
        assert!((lin.integral().unwrap().lower()[0] - 0.5).abs() < 1e-6);
    }
}
