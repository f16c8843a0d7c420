use std::fmt;
use std::sync::Arc;

use super::FuzzyError;

/// Number of levels used when nothing else is requested: r = 0, 0.1, ..., 1.
pub const DEFAULT_LEVELS: usize = 11;

/// A strictly increasing set of membership levels `0 = r_0 < ... < r_M = 1`.
///
/// All fuzzy numbers taking part in one computation share a grid. Cloning
/// is cheap; the level values live behind an `Arc`.
#[derive(Clone)]
pub struct LevelGrid {
    levels: Arc<[f64]>,
}

impl LevelGrid {
    pub fn new(levels: Vec<f64>) -> Result<Self, FuzzyError> {
        if levels.len() < 2 {
            return Err(FuzzyError::InvalidGrid(format!(
                "need at least 2 levels, got {}",
                levels.len()
            )));
        }
        if levels[0] != 0.0 || levels[levels.len() - 1] != 1.0 {
            return Err(FuzzyError::InvalidGrid(
                "first level must be 0 and last level must be 1".into(),
            ));
        }
        if let Some(i) = levels.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(FuzzyError::InvalidGrid(format!(
                "levels not strictly increasing at index {}",
                i + 1
            )));
        }
        Ok(Self {
            levels: levels.into(),
        })
    }

    /// `count` equally spaced levels on [0, 1].
    pub fn uniform(count: usize) -> Result<Self, FuzzyError> {
        if count < 2 {
            return Err(FuzzyError::InvalidGrid(format!(
                "need at least 2 levels, got {count}"
            )));
        }
        let m = (count - 1) as f64;
        let mut levels: Vec<f64> = (0..count).map(|i| i as f64 / m).collect();
        levels[count - 1] = 1.0;
        Self::new(levels)
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        self.levels.iter().copied()
    }

    pub(crate) fn ensure_same(&self, other: &LevelGrid) -> Result<(), FuzzyError> {
        if self == other {
            Ok(())
        } else {
            Err(FuzzyError::GridMismatch)
        }
    }
}

impl Default for LevelGrid {
    fn default() -> Self {
        Self::uniform(DEFAULT_LEVELS).expect("default grid is valid")
    }
}

impl PartialEq for LevelGrid {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.levels, &other.levels) || self.levels[..] == other.levels[..]
    }
}

impl fmt::Debug for LevelGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("LevelGrid").field(&&self.levels[..]).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid_endpoints() {
        let g = LevelGrid::uniform(11).unwrap();
        assert_eq!(g.len(), 11);
        assert_eq!(g.levels()[0], 0.0);
        assert_eq!(g.levels()[10], 1.0);
        assert!((g.levels()[5] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(LevelGrid::new(vec![0.0]).is_err());
        assert!(LevelGrid::new(vec![0.1, 1.0]).is_err());
        assert!(LevelGrid::new(vec![0.0, 0.9]).is_err());
        assert!(LevelGrid::new(vec![0.0, 0.5, 0.5, 1.0]).is_err());
        assert!(LevelGrid::uniform(1).is_err());
    }

    #[test]
    fn equality_is_by_value() {
        let a = LevelGrid::uniform(3).unwrap();
        let b = LevelGrid::new(vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, LevelGrid::uniform(4).unwrap());
    }
}
