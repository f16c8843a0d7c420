use std::ops::Range;

use crate::calculus::DiffStencil;
use crate::fuzzy::Bound;

use super::{EngineError, Extremal, LagrangianSpec, LevelPath, VariationalProblem};

/// The four Euler-Lagrange residual families on the interior nodes.
///
/// Equation 0 pairs slots (2, 4) of the lower Lagrangian, equation 1 slots
/// (3, 5) of the lower one, equations 2 and 3 the same for the upper one.
#[derive(Clone, Debug, PartialEq)]
pub struct Residuals {
    nodes: Range<usize>,
    split: Option<usize>,
    levels: Vec<[Vec<f64>; 4]>,
}

impl Residuals {
    /// Node indices covered, `1..N`.
    pub fn nodes(&self) -> Range<usize> {
        self.nodes.clone()
    }

    /// Last node of the advanced regime for delayed residuals.
    pub fn split(&self) -> Option<usize> {
        self.split
    }

    pub fn level_count(&self) -> usize {
        self.levels.len()
    }

    /// Residual `eq` (0..4) of level `level` over [`Residuals::nodes`].
    pub fn equation(&self, level: usize, eq: usize) -> &[f64] {
        &self.levels[level][eq]
    }

    pub fn get(&self, level: usize, eq: usize, node: usize) -> f64 {
        self.levels[level][eq][node - self.nodes.start]
    }

    /// Largest magnitude over all levels, equations and nodes in `nodes`.
    pub fn max_abs_on(&self, nodes: Range<usize>) -> f64 {
        let lo = nodes.start.max(self.nodes.start) - self.nodes.start;
        let hi = nodes
            .end
            .min(self.nodes.end)
            .saturating_sub(self.nodes.start);
        if lo >= hi {
            return 0.0;
        }
        self.levels
            .iter()
            .flat_map(|eqs| eqs.iter())
            .flat_map(|r| r[lo..hi].iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.max_abs_on(self.nodes())
    }

    /// Max magnitude per equation over every level.
    pub fn max_abs_per_equation(&self) -> [f64; 4] {
        std::array::from_fn(|eq| {
            self.levels
                .iter()
                .flat_map(|eqs| eqs[eq].iter())
                .fold(0.0_f64, |m, v| m.max(v.abs()))
        })
    }
}

/// Values of the partial for `slot` at every node of one level.
pub(crate) fn nodal_partial(
    lagrangian: &LagrangianSpec,
    bound: Bound,
    slot: usize,
    xs: &[f64],
    path: &LevelPath,
    level: usize,
) -> Result<Vec<f64>, EngineError> {
    let e = lagrangian.partial(bound, slot);
    if let Some(c) = e.as_const() {
        return Ok(vec![c; xs.len()]);
    }
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            e.eval(&path.env(x, i)).map_err(|source| EngineError::Eval {
                level,
                node: i,
                x,
                bound,
                source,
            })
        })
        .collect()
}

/// Four residual arrays of one level. With `advanced = Some((k, split))`
/// the delayed slots 6 and 7 enter the derivative term, shifted by `k`
/// nodes, up to node `split`.
pub(crate) fn level_residual(
    lagrangian: &LagrangianSpec,
    xs: &[f64],
    stencil: &DiffStencil,
    path: &LevelPath,
    level: usize,
    advanced: Option<(usize, usize)>,
) -> Result<[Vec<f64>; 4], EngineError> {
    let n = xs.len() - 1;
    let mut out: [Vec<f64>; 4] = Default::default();
    for bound in Bound::BOTH {
        for (pair, (state_slot, vel_slot)) in [(2, 4), (3, 5)].into_iter().enumerate() {
            let p = nodal_partial(lagrangian, bound, state_slot, xs, path, level)?;
            let dv = stencil.apply(&nodal_partial(
                lagrangian, bound, vel_slot, xs, path, level,
            )?);
            let adv = match advanced {
                Some((k, split)) => {
                    let pw = nodal_partial(lagrangian, bound, vel_slot + 2, xs, path, level)?;
                    Some((k, split, stencil.apply(&pw)))
                }
                None => None,
            };
            out[2 * bound.index() + pair] = (1..n)
                .map(|i| match &adv {
                    Some((k, split, dw)) if i <= *split => p[i] - (dv[i] + dw[i + k]),
                    _ => p[i] - dv[i],
                })
                .collect();
        }
    }
    Ok(out)
}

/// Residuals of the four fuzzy Euler-Lagrange equations at the interior
/// nodes, with `d/dx` taken by the three-point stencil.
pub fn el_residual(
    problem: &VariationalProblem,
    extremal: &Extremal,
) -> Result<Residuals, EngineError> {
    if problem.is_delayed() {
        return Err(EngineError::Delayed);
    }
    extremal.check_against(problem)?;
    let xs = problem.xs();
    let stencil = DiffStencil::new(xs);
    let levels = extremal
        .levels()
        .iter()
        .enumerate()
        .map(|(level, path)| level_residual(problem.lagrangian(), xs, &stencil, path, level, None))
        .collect::<Result<_, _>>()?;
    Ok(Residuals {
        nodes: 1..xs.len() - 1,
        split: None,
        levels,
    })
}

/// Residuals with delay. On `[a, b - tau_d]` the partials in slots 6 and 7,
/// evaluated at `x + tau_d` with that node's own state, join the derivative
/// term; beyond `b - tau_d` the plain residuals apply.
pub fn delayed_el_residual(
    problem: &VariationalProblem,
    extremal: &Extremal,
) -> Result<Residuals, EngineError> {
    let Some(split) = problem.regime_split() else {
        return Err(EngineError::NotDelayed);
    };
    extremal.check_against(problem)?;
    if !extremal.has_history() {
        return Err(EngineError::MissingHistory);
    }
    let k = problem.delay_shift();
    let xs = problem.xs();
    let stencil = DiffStencil::new(xs);
    let levels = extremal
        .levels()
        .iter()
        .enumerate()
        .map(|(level, path)| {
            level_residual(
                problem.lagrangian(),
                xs,
                &stencil,
                path,
                level,
                Some((k, split)),
            )
        })
        .collect::<Result<_, _>>()?;
    Ok(Residuals {
        nodes: 1..xs.len() - 1,
        split: Some(split),
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use crate::fuzzy::{FuzzyNumber, LevelGrid};
    use crate::variational::Delay;

    fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
    }

    fn weighted(n: usize) -> VariationalProblem {
        let grid = LevelGrid::uniform(3).unwrap();
        VariationalProblem::uniform(
            1.0,
            std::f64::consts::E,
            n,
            LagrangianSpec::parse("x*vl^2", "x*vu^2").unwrap(),
            FuzzyNumber::crisp(0.0, &grid),
            FuzzyNumber::crisp(1.0, &grid),
        )
        .unwrap()
    }

    #[test]
    fn log_extremal_has_small_residual() {
        let p = weighted(2000);
        let e = Extremal::from_analytic(p.xs().to_vec(), p.grid().clone(), |_, x| {
            [x.ln(), x.ln(), 1.0 / x, 1.0 / x]
        })
        .unwrap();
        let r = el_residual(&p, &e).unwrap();
        assert!(r.max_abs() < 1e-6, "{}", r.max_abs());
        assert!(r.equation(0, 1).iter().all(|v| *v == 0.0));
        assert!(r.equation(1, 2).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn linear_path_is_not_extremal() {
        let p = weighted(100);
        let e = Extremal::sample(p.xs().to_vec(), p.grid().clone(), |_, x| (x, x)).unwrap();
        let r = el_residual(&p, &e).unwrap();
        for v in r.equation(0, 0) {
            assert!((v + 2.0).abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn delay_free_lagrangian_matches_plain_residual() {
        let grid = LevelGrid::uniform(3).unwrap();
        let xs = linspace(0.0, 2.0, 40);
        let l = LagrangianSpec::parse("x*vl^2+ql", "x*vu^2").unwrap();
        let bc_a = FuzzyNumber::crisp(0.0, &grid);
        let bc_b = FuzzyNumber::crisp(1.0, &grid);
        let plain =
            VariationalProblem::with_nodes(xs.clone(), l.clone(), bc_a.clone(), bc_b.clone())
                .unwrap();
        let delay = Delay::new(0.5, parse("0").unwrap(), parse("0").unwrap());
        let delayed = VariationalProblem::delayed(xs.clone(), l, bc_a, bc_b, delay).unwrap();
        let e = Extremal::sample(xs, grid, |r, x| (r * x.sin(), x * x)).unwrap();
        let a = el_residual(&plain, &e).unwrap();
        let b =
            delayed_el_residual(&delayed, &e.clone().attach_history(&delayed).unwrap()).unwrap();
        for level in 0..3 {
            for eq in 0..4 {
                assert_eq!(a.equation(level, eq), b.equation(level, eq));
            }
        }
        assert_eq!(b.split(), Some(30));
    }

    #[test]
    fn constant_advanced_partial_drops_out() {
        let grid = LevelGrid::uniform(3).unwrap();
        let xs = linspace(0.0, 2.0, 40);
        let zero = FuzzyNumber::crisp(0.0, &grid);
        let one = FuzzyNumber::crisp(1.0, &grid);
        let delay = || Delay::new(1.0, parse("0").unwrap(), parse("0").unwrap());
        let with_w = VariationalProblem::delayed(
            xs.clone(),
            LagrangianSpec::parse("x*vl^2+wl", "x*vu^2").unwrap(),
            zero.clone(),
            one.clone(),
            delay(),
        )
        .unwrap();
        let without = VariationalProblem::delayed(
            xs.clone(),
            LagrangianSpec::parse("x*vl^2", "x*vu^2").unwrap(),
            zero,
            one,
            delay(),
        )
        .unwrap();
        let e = Extremal::sample(xs, grid, |_, x| (x * x, x)).unwrap();
        let r1 = delayed_el_residual(&with_w, &e.clone().attach_history(&with_w).unwrap()).unwrap();
        let r0 = delayed_el_residual(&without, &e.attach_history(&without).unwrap()).unwrap();
        assert!((r1.max_abs_on(1..21) - r0.max_abs_on(1..21)).abs() < 1e-12);
    }

    #[test]
    fn plain_residual_rejects_delayed_problem() {
        let grid = LevelGrid::uniform(3).unwrap();
        let xs = linspace(0.0, 2.0, 4);
        let zero = FuzzyNumber::crisp(0.0, &grid);
        let p = VariationalProblem::delayed(
            xs.clone(),
            LagrangianSpec::parse("vl^2", "vu^2").unwrap(),
            zero.clone(),
            zero,
            Delay::new(1.0, parse("0").unwrap(), parse("0").unwrap()),
        )
        .unwrap();
        let e = Extremal::sample(xs, grid, |_, _| (0.0, 0.0)).unwrap();
        assert!(matches!(el_residual(&p, &e), Err(EngineError::Delayed)));
        assert!(matches!(
            delayed_el_residual(&p, &e),
            Err(EngineError::MissingHistory)
        ));
    }
}
