use super::{BinaryOp, Expr, UnaryOp, Var};

impl Expr {
    /// Exact partial derivative with respect to `var`, built through the
    /// folding constructors.
    pub fn derivative(&self, var: Var) -> Expr {
        if !self.mentions(var) {
            return Expr::Const(0.0);
        }
        match self {
            Expr::Const(_) => Expr::Const(0.0),
            Expr::Var(v) => Expr::Const(if *v == var { 1.0 } else { 0.0 }),
            Expr::Unary(op, u) => {
                let du = u.derivative(var);
                let u = (**u).clone();
                match op {
                    UnaryOp::Neg => Expr::neg(du),
                    UnaryOp::Ln => Expr::div(du, u),
                    UnaryOp::Exp => Expr::mul(Expr::unary(UnaryOp::Exp, u), du),
                    UnaryOp::Sin => Expr::mul(Expr::unary(UnaryOp::Cos, u), du),
                    UnaryOp::Cos => Expr::neg(Expr::mul(Expr::unary(UnaryOp::Sin, u), du)),
                    UnaryOp::Sqrt => Expr::div(
                        du,
                        Expr::mul(Expr::Const(2.0), Expr::unary(UnaryOp::Sqrt, u)),
                    ),
                }
            }
            Expr::Binary(op, a, b) => {
                let da = a.derivative(var);
                let db = b.derivative(var);
                let (a, b) = ((**a).clone(), (**b).clone());
                match op {
                    BinaryOp::Add => Expr::add(da, db),
                    BinaryOp::Sub => Expr::sub(da, db),
                    BinaryOp::Mul => Expr::add(Expr::mul(da, b), Expr::mul(a, db)),
                    BinaryOp::Div => {
                        // a'/b - a b'/b^2
                        let first = Expr::div(da, b.clone());
                        let second = Expr::div(Expr::mul(a, db), Expr::pow(b, 2.0));
                        Expr::sub(first, second)
                    }
                    BinaryOp::Pow => {
                        let n = b.as_const().expect("exponent is constant");
                        Expr::mul(Expr::mul(Expr::Const(n), Expr::pow(a, n - 1.0)), da)
                    }
                }
            }
        }
    }

    /// Derivative with respect to one-based argument slot 1..=7.
    pub fn partial_slot(&self, slot: usize) -> Expr {
        assert!((1..=7).contains(&slot), "argument slot {slot} out of range");
        self.derivative(Var::ALL[slot - 1])
    }
}
