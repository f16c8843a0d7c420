use crate::calculus::DiffStencil;
use crate::expr::{Env, Var};
use crate::fuzzy::{validate, Bound, LevelGrid, Violation};

use super::{EngineError, VariationalProblem};

/// Endpoint states and velocities of one level along the nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelPath {
    pub ql: Vec<f64>,
    pub qu: Vec<f64>,
    pub vl: Vec<f64>,
    pub vu: Vec<f64>,
    /// Delayed velocities, present once history has been attached.
    pub wl: Option<Vec<f64>>,
    pub wu: Option<Vec<f64>>,
}

impl LevelPath {
    /// Velocities from the three-point stencil.
    pub fn from_states(stencil: &DiffStencil, ql: Vec<f64>, qu: Vec<f64>) -> Self {
        let vl = stencil.apply(&ql);
        let vu = stencil.apply(&qu);
        Self {
            ql,
            qu,
            vl,
            vu,
            wl: None,
            wu: None,
        }
    }

    pub fn q(&self, bound: Bound) -> &[f64] {
        match bound {
            Bound::Lower => &self.ql,
            Bound::Upper => &self.qu,
        }
    }

    pub fn v(&self, bound: Bound) -> &[f64] {
        match bound {
            Bound::Lower => &self.vl,
            Bound::Upper => &self.vu,
        }
    }

    pub fn len(&self) -> usize {
        self.ql.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ql.is_empty()
    }

    /// Argument tuple at node `i`; missing delayed velocities read as zero.
    pub fn env(&self, x: f64, i: usize) -> Env {
        let w = |w: &Option<Vec<f64>>| w.as_ref().map_or(0.0, |w| w[i]);
        Env::full([
            x,
            self.ql[i],
            self.qu[i],
            self.vl[i],
            self.vu[i],
            w(&self.wl),
            w(&self.wu),
        ])
    }
}

/// A fuzzy trajectory stored per level on the collocation nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Extremal {
    xs: Vec<f64>,
    grid: LevelGrid,
    levels: Vec<LevelPath>,
}

/// A node where the level families fail to form a fuzzy number.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct NodeViolation {
    pub node: usize,
    pub level: usize,
    #[serde(serialize_with = "violation_name")]
    pub violation: Violation,
}

fn violation_name<S: serde::Serializer>(v: &Violation, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&v.condition.to_string())
}

impl Extremal {
    /// Builds from node states (one vector per level); velocities are differenced.
    pub fn from_nodes(
        xs: Vec<f64>,
        grid: LevelGrid,
        ql: Vec<Vec<f64>>,
        qu: Vec<Vec<f64>>,
    ) -> Result<Self, EngineError> {
        check_shape(&xs, &grid, ql.len(), qu.len())?;
        let stencil = DiffStencil::new(&xs);
        let levels = ql
            .into_iter()
            .zip(qu)
            .map(|(l, u)| {
                if l.len() != xs.len() || u.len() != xs.len() {
                    return Err(EngineError::Shape(format!(
                        "{} nodes but level arrays of length {} and {}",
                        xs.len(),
                        l.len(),
                        u.len()
                    )));
                }
                Ok(LevelPath::from_states(&stencil, l, u))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { xs, grid, levels })
    }

    /// Samples `f(r, x) -> (ql, qu)` and differences the velocities.
    pub fn sample<F>(xs: Vec<f64>, grid: LevelGrid, f: F) -> Result<Self, EngineError>
    where
        F: Fn(f64, f64) -> (f64, f64),
    {
        let (ql, qu) = grid
            .iter()
            .map(|r| xs.iter().map(|&x| f(r, x)).unzip())
            .unzip();
        Self::from_nodes(xs, grid, ql, qu)
    }

    /// Samples `f(r, x) -> [ql, qu, vl, vu]` with exact velocities.
    pub fn from_analytic<F>(xs: Vec<f64>, grid: LevelGrid, f: F) -> Result<Self, EngineError>
    where
        F: Fn(f64, f64) -> [f64; 4],
    {
        check_shape(&xs, &grid, grid.len(), grid.len())?;
        let levels = grid
            .iter()
            .map(|r| {
                let vals: Vec<[f64; 4]> = xs.iter().map(|&x| f(r, x)).collect();
                let col = |k: usize| vals.iter().map(|v| v[k]).collect::<Vec<_>>();
                LevelPath {
                    ql: col(0),
                    qu: col(1),
                    vl: col(2),
                    vu: col(3),
                    wl: None,
                    wu: None,
                }
            })
            .collect();
        Ok(Self { xs, grid, levels })
    }

    pub(crate) fn from_levels(xs: Vec<f64>, grid: LevelGrid, levels: Vec<LevelPath>) -> Self {
        Self { xs, grid, levels }
    }

    /// Fills the delayed velocities `w(x) = v(x - tau_d)` from the history
    /// derivative before `a` and from the trajectory's own velocities after.
    pub fn attach_history(mut self, problem: &VariationalProblem) -> Result<Self, EngineError> {
        let Some(delay) = problem.delay() else {
            return Err(EngineError::NotDelayed);
        };
        self.check_against(problem)?;
        let k = problem.delay_shift();
        let dpsi = [
            delay.psi_lower.derivative(Var::X),
            delay.psi_upper.derivative(Var::X),
        ];
        // history velocities are shared by all levels
        let mut hist = [vec![0.0; k], vec![0.0; k]];
        for bound in Bound::BOTH {
            for (i, slot) in hist[bound.index()].iter_mut().enumerate() {
                let x = self.xs[i] - delay.tau_d;
                *slot = dpsi[bound.index()]
                    .eval_at_x(x)
                    .map_err(|source| EngineError::History { bound, x, source })?;
            }
        }
        for path in &mut self.levels {
            let n = path.len();
            let delayed = |bound: Bound| -> Vec<f64> {
                (0..n)
                    .map(|i| {
                        if i < k {
                            hist[bound.index()][i]
                        } else {
                            path.v(bound)[i - k]
                        }
                    })
                    .collect()
            };
            let (wl, wu) = (delayed(Bound::Lower), delayed(Bound::Upper));
            path.wl = Some(wl);
            path.wu = Some(wu);
        }
        Ok(self)
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn grid(&self) -> &LevelGrid {
        &self.grid
    }

    pub fn levels(&self) -> &[LevelPath] {
        &self.levels
    }

    pub fn level(&self, i: usize) -> &LevelPath {
        &self.levels[i]
    }

    pub fn has_history(&self) -> bool {
        self.levels.iter().all(|p| p.wl.is_some() && p.wu.is_some())
    }

    /// First node where the level families are not a valid fuzzy number.
    pub fn fuzzy_violation(&self) -> Option<NodeViolation> {
        (0..self.xs.len()).find_map(|node| {
            let lower: Vec<f64> = self.levels.iter().map(|p| p.ql[node]).collect();
            let upper: Vec<f64> = self.levels.iter().map(|p| p.qu[node]).collect();
            validate(&lower, &upper, &self.grid)
                .ok()
                .flatten()
                .map(|violation| NodeViolation {
                    node,
                    level: violation.index,
                    violation,
                })
        })
    }

    /// Errors unless the extremal lives on the problem's nodes and levels.
    pub fn check_against(&self, problem: &VariationalProblem) -> Result<(), EngineError> {
        problem.grid().ensure_same(&self.grid)?;
        if self.xs.len() != problem.xs().len()
            || self
                .xs
                .iter()
                .zip(problem.xs())
                .any(|(a, b)| (a - b).abs() > 1e-12 * (1.0 + b.abs()))
        {
            return Err(EngineError::Shape(
                "extremal nodes differ from the problem nodes".into(),
            ));
        }
        Ok(())
    }
}

fn check_shape(xs: &[f64], grid: &LevelGrid, nl: usize, nu: usize) -> Result<(), EngineError> {
    if xs.len() < 3 {
        return Err(EngineError::TooFewNodes(xs.len()));
    }
    if let Some(i) = xs.windows(2).position(|w| !(w[1] > w[0])) {
        return Err(EngineError::NodesNotIncreasing(i + 1));
    }
    if nl != grid.len() || nu != grid.len() {
        return Err(EngineError::Shape(format!(
            "{} levels on the grid but {nl} lower and {nu} upper arrays",
            grid.len()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::fuzzy::{FuzzyNumber, LevelCondition};
    use crate::variational::{Delay, LagrangianSpec};

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    #[test]
    fn sampled_velocities_are_differenced() {
        let grid = LevelGrid::uniform(3).unwrap();
        let e =
            Extremal::sample(linspace(0.0, 1.0, 10), grid, |r, x| (r * x, (2.0 - r) * x)).unwrap();
        let p = e.level(2);
        assert!(p.vl.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(p.vu.iter().all(|v| (v - 1.0).abs() < 1e-12));
        assert!(e.fuzzy_violation().is_none());
    }

    #[test]
    fn crossing_families_are_reported() {
        let grid = LevelGrid::uniform(3).unwrap();
        // at x = 1 lower exceeds upper for every level
        let e = Extremal::sample(linspace(0.0, 1.0, 4), grid, |_, x| (x, 1.0 - x)).unwrap();
        let v = e.fuzzy_violation().unwrap();
        assert_eq!(v.node, 3);
        assert_eq!(v.violation.condition, LevelCondition::CoreOrdered);
    }

    #[test]
    fn history_velocities() {
        let grid = LevelGrid::uniform(3).unwrap();
        let xs = linspace(0.0, 2.0, 8);
        let l = LagrangianSpec::parse("vl^2", "vu^2").unwrap();
        let zero = FuzzyNumber::crisp(0.0, &grid);
        let one = FuzzyNumber::crisp(1.0, &grid);
        let delay = Delay::new(1.0, parse("x^2").unwrap(), parse("0*x").unwrap());
        let p = VariationalProblem::delayed(xs.clone(), l, zero, one, delay).unwrap();
        let e = Extremal::sample(xs, grid, |_, x| (x * x, x)).unwrap();
        let e = e.attach_history(&p).unwrap();
        let path = e.level(0);
        let wl = path.wl.as_ref().unwrap();
        // node 1: x - 1 = -0.75 lies in the history, d/dx x^2 = -1.5
        assert!((wl[1] + 1.5).abs() < 1e-12);
        // node 6: w = v at node 2
        assert_eq!(wl[6], path.vl[2]);
        assert_eq!(path.wu.as_ref().unwrap()[0], 0.0);
    }
}
