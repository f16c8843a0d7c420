use std::fmt;

use thiserror::Error;

use super::{BinaryOp, Expr, UnaryOp, Var};

/// Values bound to the seven variables; unbound slots are `None`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Env {
    values: [Option<f64>; 7],
}

impl Env {
    pub fn new() -> Self {
        Self::default()
    }

    /// Binds x, ql, qu, vl, vu, wl, wu in that order.
    pub fn full(values: [f64; 7]) -> Self {
        Self {
            values: values.map(Some),
        }
    }

    pub fn with(mut self, var: Var, value: f64) -> Self {
        self.values[var.index()] = Some(value);
        self
    }

    pub fn set(&mut self, var: Var, value: f64) {
        self.values[var.index()] = Some(value);
    }

    pub fn get(&self, var: Var) -> Option<f64> {
        self.values[var.index()]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    LogOfNonPositive,
    SqrtOfNegative,
    DivisionByZero,
    /// A power whose result is not a real number.
    Power,
    /// Any other non-finite result (overflow).
    NonFinite,
}

impl fmt::Display for DomainKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainKind::LogOfNonPositive => "logarithm of a non-positive number",
            DomainKind::SqrtOfNegative => "square root of a negative number",
            DomainKind::DivisionByZero => "division by zero",
            DomainKind::Power => "power is not a real number",
            DomainKind::NonFinite => "non-finite result",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum EvalError {
    #[error("variable `{0}` is not bound")]
    Unbound(Var),
    #[error("{kind} in `{node}` (argument {argument})")]
    Domain {
        kind: DomainKind,
        node: String,
        argument: f64,
    },
}

pub(crate) fn apply_unary(op: UnaryOp, a: f64) -> Result<f64, DomainKind> {
    match op {
        UnaryOp::Neg => Ok(-a),
        UnaryOp::Ln if a <= 0.0 => Err(DomainKind::LogOfNonPositive),
        UnaryOp::Ln => Ok(a.ln()),
        UnaryOp::Exp => finite(a.exp()),
        UnaryOp::Sin => Ok(a.sin()),
        UnaryOp::Cos => Ok(a.cos()),
        UnaryOp::Sqrt if a < 0.0 => Err(DomainKind::SqrtOfNegative),
        UnaryOp::Sqrt => Ok(a.sqrt()),
    }
}

fn apply_binary(op: BinaryOp, a: f64, b: f64) -> Result<f64, (DomainKind, f64)> {
    match op {
        BinaryOp::Add => finite(a + b).map_err(|k| (k, a)),
        BinaryOp::Sub => finite(a - b).map_err(|k| (k, a)),
        BinaryOp::Mul => finite(a * b).map_err(|k| (k, a)),
        BinaryOp::Div if b == 0.0 => Err((DomainKind::DivisionByZero, b)),
        BinaryOp::Div => finite(a / b).map_err(|k| (k, b)),
        BinaryOp::Pow => {
            let v = a.powf(b);
            if v.is_nan() || (a == 0.0 && b < 0.0) {
                Err((DomainKind::Power, a))
            } else {
                finite(v).map_err(|k| (k, a))
            }
        }
    }
}

fn finite(v: f64) -> Result<f64, DomainKind> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(DomainKind::NonFinite)
    }
}

impl Expr {
    /// Evaluates the tree; domain violations name the offending subexpression.
    pub fn eval(&self, env: &Env) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(v) => env.get(*v).ok_or(EvalError::Unbound(*v)),
            Expr::Unary(op, e) => {
                let a = e.eval(env)?;
                apply_unary(*op, a).map_err(|kind| EvalError::Domain {
                    kind,
                    node: self.to_string(),
                    argument: a,
                })
            }
            Expr::Binary(op, l, r) => {
                let a = l.eval(env)?;
                let b = r.eval(env)?;
                apply_binary(*op, a, b).map_err(|(kind, argument)| EvalError::Domain {
                    kind,
                    node: self.to_string(),
                    argument,
                })
            }
        }
    }

    /// Convenience for expressions of `x` alone.
    pub fn eval_at_x(&self, x: f64) -> Result<f64, EvalError> {
        self.eval(&Env::new().with(Var::X, x))
    }
}
