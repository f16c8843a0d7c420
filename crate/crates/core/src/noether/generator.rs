use crate::expr::{parse, Env, Expr, Var};
use crate::fuzzy::Bound;
use crate::variational::{LevelPath, VariationalProblem};

use super::NoetherError;

/// First-order generator of `x -> x + eps*tau`, `q -> q + eps*zeta`.
///
/// All components are expressions in `x`, `ql` and `qu` only.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryGenerator {
    tau: Option<Expr>,
    zeta: [Expr; 2],
}

impl SymmetryGenerator {
    pub fn new(
        tau: Option<Expr>,
        zeta_lower: Expr,
        zeta_upper: Expr,
    ) -> Result<Self, NoetherError> {
        for e in tau.iter().chain([&zeta_lower, &zeta_upper]) {
            if let Some(v) = e
                .variables()
                .into_iter()
                .find(|v| !matches!(v, Var::X | Var::Ql | Var::Qu))
            {
                return Err(NoetherError::GeneratorVariable(v));
            }
        }
        Ok(Self {
            tau,
            zeta: [zeta_lower, zeta_upper],
        })
    }

    pub fn parse(
        tau: Option<&str>,
        zeta_lower: &str,
        zeta_upper: &str,
    ) -> Result<Self, NoetherError> {
        let p = |s: &str| parse(s).map_err(NoetherError::Parse);
        Self::new(tau.map(p).transpose()?, p(zeta_lower)?, p(zeta_upper)?)
    }

    /// The identity transformation.
    pub fn zero() -> Self {
        Self {
            tau: None,
            zeta: [Expr::Const(0.0), Expr::Const(0.0)],
        }
    }

    pub fn tau(&self) -> Option<&Expr> {
        self.tau.as_ref()
    }

    pub fn zeta(&self, bound: Bound) -> &Expr {
        &self.zeta[bound.index()]
    }

    /// Every component multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        let s = |e: &Expr| Expr::mul(Expr::Const(k), e.clone());
        Self {
            tau: self.tau.as_ref().map(s),
            zeta: [s(&self.zeta[0]), s(&self.zeta[1])],
        }
    }

    /// Largest |zeta| (and |tau|) over samples of the history window
    /// `[a - tau_d, a]`, where the state is the history itself.
    ///
    /// Delayed problems expect the generator to vanish there.
    pub fn history_magnitude(&self, problem: &VariationalProblem) -> Result<f64, NoetherError> {
        const SAMPLES: usize = 64;
        let Some(delay) = problem.delay() else {
            return Ok(0.0);
        };
        let a = problem.a();
        let mut worst: f64 = 0.0;
        for s in 0..=SAMPLES {
            let x = a - delay.tau_d * (1.0 - s as f64 / SAMPLES as f64);
            let hist = |bound: Bound| {
                delay
                    .history(bound)
                    .eval_at_x(x)
                    .map_err(|source| NoetherError::Eval {
                        what: "history",
                        level: 0,
                        node: s,
                        x,
                        source,
                    })
            };
            let env = Env::new()
                .with(Var::X, x)
                .with(Var::Ql, hist(Bound::Lower)?)
                .with(Var::Qu, hist(Bound::Upper)?);
            for e in self.tau.iter().chain(&self.zeta) {
                let v = e.eval(&env).map_err(|source| NoetherError::Eval {
                    what: "generator",
                    level: 0,
                    node: s,
                    x,
                    source,
                })?;
                worst = worst.max(v.abs());
            }
        }
        Ok(worst)
    }

    /// Nodal generator values and total derivatives along one level.
    pub(crate) fn along(
        &self,
        xs: &[f64],
        path: &LevelPath,
        level: usize,
    ) -> Result<GeneratorValues, NoetherError> {
        let component = |e: &Expr| -> Result<(Vec<f64>, Vec<f64>), NoetherError> {
            let dx = e.derivative(Var::X);
            let dl = e.derivative(Var::Ql);
            let du = e.derivative(Var::Qu);
            let mut val = Vec::with_capacity(xs.len());
            let mut dot = Vec::with_capacity(xs.len());
            for (i, &x) in xs.iter().enumerate() {
                let env = Env::new()
                    .with(Var::X, x)
                    .with(Var::Ql, path.ql[i])
                    .with(Var::Qu, path.qu[i]);
                let ev = |f: &Expr| {
                    f.eval(&env).map_err(|source| NoetherError::Eval {
                        what: "generator",
                        level,
                        node: i,
                        x,
                        source,
                    })
                };
                val.push(ev(e)?);
                dot.push(ev(&dx)? + ev(&dl)? * path.vl[i] + ev(&du)? * path.vu[i]);
            }
            Ok((val, dot))
        };
        let (zl, zl_dot) = component(&self.zeta[0])?;
        let (zu, zu_dot) = component(&self.zeta[1])?;
        let tau = self.tau.as_ref().map(component).transpose()?;
        Ok(GeneratorValues {
            zeta: [zl, zu],
            zeta_dot: [zl_dot, zu_dot],
            tau,
        })
    }
}

/// Generator components evaluated along a trajectory.
pub(crate) struct GeneratorValues {
    pub zeta: [Vec<f64>; 2],
    pub zeta_dot: [Vec<f64>; 2],
    /// `(tau, d tau / dx)` when a time generator is present.
    pub tau: Option<(Vec<f64>, Vec<f64>)>,
}
