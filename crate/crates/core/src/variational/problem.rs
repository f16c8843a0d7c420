use crate::expr::Expr;
use crate::fuzzy::{Bound, FuzzyNumber, LevelGrid, TOL_EQ};

use super::{EngineError, LagrangianSpec};

/// Relative slack when checking grid uniformity and delay alignment.
const ALIGN_TOL: f64 = 1e-9;

/// Constant delay with its history on `[a - tau_d, a]`.
///
/// The history is shared by all levels: each bound is an expression in `x`.
#[derive(Clone, Debug)]
pub struct Delay {
    pub tau_d: f64,
    pub psi_lower: Expr,
    pub psi_upper: Expr,
}

impl Delay {
    pub fn new(tau_d: f64, psi_lower: Expr, psi_upper: Expr) -> Self {
        Self {
            tau_d,
            psi_lower,
            psi_upper,
        }
    }

    pub fn history(&self, bound: Bound) -> &Expr {
        match bound {
            Bound::Lower => &self.psi_lower,
            Bound::Upper => &self.psi_upper,
        }
    }
}

/// A fuzzy variational problem with fixed endpoints.
#[derive(Clone, Debug)]
pub struct VariationalProblem {
    a: f64,
    b: f64,
    grid: LevelGrid,
    xs: Vec<f64>,
    lagrangian: LagrangianSpec,
    bc_a: FuzzyNumber,
    bc_b: FuzzyNumber,
    delay: Option<Delay>,
    // advanced offset in nodes, set together with delay
    shift: usize,
}

impl VariationalProblem {
    /// Problem on `nodes` uniform subintervals of `[a, b]`.
    pub fn uniform(
        a: f64,
        b: f64,
        nodes: usize,
        lagrangian: LagrangianSpec,
        bc_a: FuzzyNumber,
        bc_b: FuzzyNumber,
    ) -> Result<Self, EngineError> {
        if nodes < 2 {
            return Err(EngineError::TooFewNodes(nodes + 1));
        }
        let h = (b - a) / nodes as f64;
        let mut xs: Vec<f64> = (0..=nodes).map(|i| a + h * i as f64).collect();
        xs[nodes] = b;
        Self::with_nodes(xs, lagrangian, bc_a, bc_b)
    }

    /// Problem on explicit collocation nodes; `xs[0]` and `xs[N]` are the endpoints.
    pub fn with_nodes(
        xs: Vec<f64>,
        lagrangian: LagrangianSpec,
        bc_a: FuzzyNumber,
        bc_b: FuzzyNumber,
    ) -> Result<Self, EngineError> {
        if lagrangian.delayed() {
            return Err(EngineError::MissingDelay);
        }
        Self::build(xs, lagrangian, bc_a, bc_b)
    }

    fn build(
        xs: Vec<f64>,
        lagrangian: LagrangianSpec,
        bc_a: FuzzyNumber,
        bc_b: FuzzyNumber,
    ) -> Result<Self, EngineError> {
        if xs.len() < 3 {
            return Err(EngineError::TooFewNodes(xs.len()));
        }
        if let Some(i) = xs.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(EngineError::NodesNotIncreasing(i + 1));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(EngineError::InvalidInterval {
                a: xs[0],
                b: xs[xs.len() - 1],
            });
        }
        bc_a.grid().ensure_same(bc_b.grid())?;
        Ok(Self {
            a: xs[0],
            b: xs[xs.len() - 1],
            grid: bc_a.grid().clone(),
            xs,
            lagrangian,
            bc_a,
            bc_b,
            delay: None,
            shift: 0,
        })
    }

    /// Builds a delayed problem. The nodes must be uniform with `tau_d / h`
    /// an integer, and the history must meet `bc_a` at `x = a` levelwise.
    pub fn delayed(
        xs: Vec<f64>,
        lagrangian: LagrangianSpec,
        bc_a: FuzzyNumber,
        bc_b: FuzzyNumber,
        delay: Delay,
    ) -> Result<Self, EngineError> {
        let mut p = Self::build(xs, lagrangian, bc_a, bc_b)?;
        let span = p.b - p.a;
        if !(delay.tau_d > 0.0 && delay.tau_d < span) {
            return Err(EngineError::DelayOutOfRange {
                tau_d: delay.tau_d,
                span,
            });
        }
        let n = p.xs.len() - 1;
        let h = span / n as f64;
        if p.xs
            .windows(2)
            .any(|w| ((w[1] - w[0]) - h).abs() > ALIGN_TOL * span)
        {
            return Err(EngineError::NonUniformNodes);
        }
        let k = (delay.tau_d / h).round();
        if k < 1.0 || (k * h - delay.tau_d).abs() > ALIGN_TOL * span {
            return Err(EngineError::DelayMisaligned {
                tau_d: delay.tau_d,
                h,
            });
        }
        for bound in Bound::BOTH {
            let psi =
                delay
                    .history(bound)
                    .eval_at_x(p.a)
                    .map_err(|source| EngineError::History {
                        bound,
                        x: p.a,
                        source,
                    })?;
            let bc = match bound {
                Bound::Lower => p.bc_a.lower(),
                Bound::Upper => p.bc_a.upper(),
            };
            if let Some(level) = bc.iter().position(|v| (v - psi).abs() > TOL_EQ) {
                return Err(EngineError::HistoryMismatch {
                    bound,
                    level,
                    history: psi,
                    boundary: bc[level],
                });
            }
        }
        p.shift = k as usize;
        p.delay = Some(delay);
        Ok(p)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    /// Number of subintervals N; nodes are `0..=N`.
    pub fn subintervals(&self) -> usize {
        self.xs.len() - 1
    }

    pub fn grid(&self) -> &LevelGrid {
        &self.grid
    }

    pub fn lagrangian(&self) -> &LagrangianSpec {
        &self.lagrangian
    }

    pub fn bc_a(&self) -> &FuzzyNumber {
        &self.bc_a
    }

    pub fn bc_b(&self) -> &FuzzyNumber {
        &self.bc_b
    }

    pub fn delay(&self) -> Option<&Delay> {
        self.delay.as_ref()
    }

    pub fn is_delayed(&self) -> bool {
        self.delay.is_some()
    }

    /// `tau_d / h` for delayed problems, zero otherwise.
    pub fn delay_shift(&self) -> usize {
        self.shift
    }

    /// Last node of the advanced regime `[a, b - tau_d]`.
    pub fn regime_split(&self) -> Option<usize> {
        self.delay
            .as_ref()
            .map(|_| self.subintervals() - self.shift)
    }

    /// The same problem with the Lagrangian replaced.
    pub fn with_lagrangian(&self, lagrangian: LagrangianSpec) -> Result<Self, EngineError> {
        if lagrangian.delayed() && self.delay.is_none() {
            return Err(EngineError::MissingDelay);
        }
        Ok(Self {
            lagrangian,
            ..self.clone()
        })
    }
}
