use std::fmt;

/// The fixed argument alphabet of Lagrangians and generators.
///
/// In argument-slot terms: `x` is slot 1, `ql`/`qu` the lower and upper
/// state (slots 2, 3), `vl`/`vu` their velocities (4, 5) and `wl`/`wu` the
/// delayed velocities (6, 7).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Ql,
    Qu,
    Vl,
    Vu,
    Wl,
    Wu,
}

impl Var {
    pub const ALL: [Var; 7] = [Var::X, Var::Ql, Var::Qu, Var::Vl, Var::Vu, Var::Wl, Var::Wu];

    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Ql => "ql",
            Var::Qu => "qu",
            Var::Vl => "vl",
            Var::Vu => "vu",
            Var::Wl => "wl",
            Var::Wu => "wu",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        Var::ALL.into_iter().find(|v| v.name() == name)
    }

    /// Zero-based position in [`Var::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// One-based argument slot, so `partial_slot(4)` is the `vl` derivative.
    pub fn slot(self) -> usize {
        self.index() + 1
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Ln,
    Exp,
    Sin,
    Cos,
    Sqrt,
}

impl UnaryOp {
    pub fn function_name(self) -> Option<&'static str> {
        match self {
            UnaryOp::Neg => None,
            UnaryOp::Ln => Some("ln"),
            UnaryOp::Exp => Some("exp"),
            UnaryOp::Sin => Some("sin"),
            UnaryOp::Cos => Some("cos"),
            UnaryOp::Sqrt => Some("sqrt"),
        }
    }

    pub fn from_function_name(name: &str) -> Option<UnaryOp> {
        [
            UnaryOp::Ln,
            UnaryOp::Exp,
            UnaryOp::Sin,
            UnaryOp::Cos,
            UnaryOp::Sqrt,
        ]
        .into_iter()
        .find(|op| op.function_name() == Some(name))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    pub fn symbol(self) -> char {
        match self {
            BinaryOp::Add => '+',
            BinaryOp::Sub => '-',
            BinaryOp::Mul => '*',
            BinaryOp::Div => '/',
            BinaryOp::Pow => '^',
        }
    }

    pub(crate) fn precedence(self) -> u8 {
        match self {
            BinaryOp::Add | BinaryOp::Sub => PREC_ADD,
            BinaryOp::Mul | BinaryOp::Div => PREC_MUL,
            BinaryOp::Pow => PREC_POW,
        }
    }
}

pub(crate) const PREC_ADD: u8 = 10;
pub(crate) const PREC_MUL: u8 = 20;
pub(crate) const PREC_NEG: u8 = 30;
pub(crate) const PREC_POW: u8 = 40;
const PREC_ATOM: u8 = 50;

/// Expression tree over the seven-variable alphabet.
///
/// The exponent of `Pow` is always a `Const`; the parser and
/// [`Expr::pow`] enforce this.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
}

// Folding constructors. They only simplify constants and the identities
// 0 + e, e - 0, 0 * e, 1 * e, e / 1, 0 / e, e ^ 1, e ^ 0.
impl Expr {
    pub fn constant(c: f64) -> Expr {
        Expr::Const(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn as_const(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_const() == Some(0.0)
    }

    pub fn is_one(&self) -> bool {
        self.as_const() == Some(1.0)
    }

    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Const(c) => Expr::Const(-c),
            Expr::Unary(UnaryOp::Neg, inner) => *inner,
            e => Expr::Unary(UnaryOp::Neg, Box::new(e)),
        }
    }

    pub fn unary(op: UnaryOp, e: Expr) -> Expr {
        if op == UnaryOp::Neg {
            return Expr::neg(e);
        }
        if let Some(c) = e.as_const() {
            if let Ok(v) = super::eval::apply_unary(op, c) {
                return Expr::Const(v);
            }
        }
        Expr::Unary(op, Box::new(e))
    }

    pub fn add(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x + y),
            (Some(z), _) if z == 0.0 => b,
            (_, Some(z)) if z == 0.0 => a,
            _ => Expr::Binary(BinaryOp::Add, Box::new(a), Box::new(b)),
        }
    }

    pub fn sub(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x - y),
            (_, Some(z)) if z == 0.0 => a,
            (Some(z), _) if z == 0.0 => Expr::neg(b),
            _ => Expr::Binary(BinaryOp::Sub, Box::new(a), Box::new(b)),
        }
    }

    pub fn mul(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) => Expr::Const(x * y),
            (Some(z), _) | (_, Some(z)) if z == 0.0 => Expr::Const(0.0),
            (Some(o), _) if o == 1.0 => b,
            (_, Some(o)) if o == 1.0 => a,
            _ => Expr::Binary(BinaryOp::Mul, Box::new(a), Box::new(b)),
        }
    }

    pub fn div(a: Expr, b: Expr) -> Expr {
        match (a.as_const(), b.as_const()) {
            (Some(x), Some(y)) if y != 0.0 => Expr::Const(x / y),
            (_, Some(o)) if o == 1.0 => a,
            (Some(z), _) if z == 0.0 => Expr::Const(0.0),
            _ => Expr::Binary(BinaryOp::Div, Box::new(a), Box::new(b)),
        }
    }

    /// `base ^ exponent` with a constant exponent.
    pub fn pow(base: Expr, exponent: f64) -> Expr {
        if exponent == 1.0 {
            return base;
        }
        if exponent == 0.0 {
            return Expr::Const(1.0);
        }
        if let Some(c) = base.as_const() {
            let v = c.powf(exponent);
            if v.is_finite() {
                return Expr::Const(v);
            }
        }
        Expr::Binary(
            BinaryOp::Pow,
            Box::new(base),
            Box::new(Expr::Const(exponent)),
        )
    }

    pub fn binary(op: BinaryOp, a: Expr, b: Expr) -> Expr {
        match op {
            BinaryOp::Add => Expr::add(a, b),
            BinaryOp::Sub => Expr::sub(a, b),
            BinaryOp::Mul => Expr::mul(a, b),
            BinaryOp::Div => Expr::div(a, b),
            BinaryOp::Pow => match b.as_const() {
                Some(c) => Expr::pow(a, c),
                None => Expr::Binary(BinaryOp::Pow, Box::new(a), Box::new(b)),
            },
        }
    }

    /// Rebuilds the tree bottom-up through the folding constructors.
    pub fn fold(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) => self.clone(),
            Expr::Unary(op, e) => Expr::unary(*op, e.fold()),
            Expr::Binary(op, a, b) => Expr::binary(*op, a.fold(), b.fold()),
        }
    }

    /// Whether `v` occurs anywhere in the tree.
    pub fn mentions(&self, v: Var) -> bool {
        match self {
            Expr::Const(_) => false,
            Expr::Var(w) => *w == v,
            Expr::Unary(_, e) => e.mentions(v),
            Expr::Binary(_, a, b) => a.mentions(v) || b.mentions(v),
        }
    }

    /// Variables occurring in the tree, in alphabet order.
    pub fn variables(&self) -> Vec<Var> {
        Var::ALL.into_iter().filter(|v| self.mentions(*v)).collect()
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) => 1,
            Expr::Unary(_, e) => 1 + e.node_count(),
            Expr::Binary(_, a, b) => 1 + a.node_count() + b.node_count(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Const(_) | Expr::Var(_) => PREC_ATOM,
            Expr::Unary(UnaryOp::Neg, _) => PREC_NEG,
            Expr::Unary(_, _) => PREC_ATOM,
            Expr::Binary(op, _, _) => op.precedence(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    write!(f, "(-{})", -c)
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Unary(UnaryOp::Neg, e) => {
                f.write_str("-")?;
                write_operand(f, e, e.precedence() < PREC_NEG)
            }
            Expr::Unary(op, e) => write!(f, "{}({e})", op.function_name().unwrap_or("?")),
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                let (left_parens, right_parens) = match op {
                    // right associative
                    BinaryOp::Pow => (a.precedence() <= p, b.precedence() < p),
                    BinaryOp::Sub | BinaryOp::Div => (a.precedence() < p, b.precedence() <= p),
                    BinaryOp::Add | BinaryOp::Mul => (a.precedence() < p, b.precedence() < p),
                };
                write_operand(f, a, left_parens)?;
                write!(f, "{}", op.symbol())?;
                write_operand(f, b, right_parens)
            }
        }
    }
}

fn write_operand(f: &mut fmt::Formatter<'_>, e: &Expr, parens: bool) -> fmt::Result {
    if parens {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}
