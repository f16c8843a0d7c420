use crate::expr::{parse, Env, EvalError, Expr, ParseError, Var};
use crate::fuzzy::Bound;

/// The pair of endpoint Lagrangians together with their symbolic partials.
///
/// Argument slots follow the alphabet order: 1 = x, 2 = ql, 3 = qu, 4 = vl,
/// 5 = vu, 6 = wl, 7 = wu. Partials for slots 2..=7 and the second partials
/// among slots 2..=5 are generated once at construction.
#[derive(Clone, Debug)]
pub struct LagrangianSpec {
    bounds: [BoundLagrangian; 2],
    delayed: bool,
}

#[derive(Clone, Debug)]
struct BoundLagrangian {
    l: Expr,
    partials: [Expr; 6],
    // second[i][j] = d/d(slot j+2) of partial slot i+2
    second: [[Expr; 4]; 4],
}

impl BoundLagrangian {
    fn new(l: Expr) -> Self {
        let partials: [Expr; 6] = std::array::from_fn(|k| l.partial_slot(k + 2));
        let second =
            std::array::from_fn(|i| std::array::from_fn(|j| partials[i].partial_slot(j + 2)));
        Self {
            l,
            partials,
            second,
        }
    }
}

impl LagrangianSpec {
    pub fn new(lower: Expr, upper: Expr) -> Self {
        let delayed = [Var::Wl, Var::Wu]
            .iter()
            .any(|v| lower.mentions(*v) || upper.mentions(*v));
        Self {
            bounds: [BoundLagrangian::new(lower), BoundLagrangian::new(upper)],
            delayed,
        }
    }

    pub fn parse(lower: &str, upper: &str) -> Result<Self, ParseError> {
        Ok(Self::new(parse(lower)?, parse(upper)?))
    }

    /// Whether either bound mentions a delayed velocity.
    pub fn delayed(&self) -> bool {
        self.delayed
    }

    pub fn lagrangian(&self, bound: Bound) -> &Expr {
        &self.bounds[bound.index()].l
    }

    /// Symbolic partial for argument slot 2..=7.
    pub fn partial(&self, bound: Bound, slot: usize) -> &Expr {
        assert!(
            (2..=7).contains(&slot),
            "partial slot {slot} out of range 2..=7"
        );
        &self.bounds[bound.index()].partials[slot - 2]
    }

    /// Second partial d/d(slot j) of partial slot i, both in 2..=5.
    pub fn second_partial(&self, bound: Bound, i: usize, j: usize) -> &Expr {
        assert!((2..=5).contains(&i) && (2..=5).contains(&j));
        &self.bounds[bound.index()].second[i - 2][j - 2]
    }

    pub fn eval(&self, bound: Bound, env: &Env) -> Result<f64, EvalError> {
        self.lagrangian(bound).eval(env)
    }
}
