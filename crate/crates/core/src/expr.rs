//! Structural-equation expressions.
//!
//! [`Expr`] is the surface AST produced by the model parser. Identifier
//! references are unresolved; validation compiles each expression into a
//! [`Program`] whose references are slot indices, which is what the samplers
//! evaluate.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => PREC_ADD,
            BinOp::Mul | BinOp::Div => PREC_MUL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "=",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }

    fn apply(self, a: f64, b: f64) -> bool {
        match self {
            CmpOp::Eq => a == b,
            CmpOp::Ne => a != b,
            CmpOp::Lt => a < b,
            CmpOp::Le => a <= b,
            CmpOp::Gt => a > b,
            CmpOp::Ge => a >= b,
        }
    }
}

/// Expression AST of a structural equation (or of a declared inverse).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Reference to an endogenous variable or a noise symbol.
    Ref(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Comparison, evaluating to 1.0 or 0.0.
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn var(name: impl Into<String>) -> Self {
        Expr::Ref(name.into())
    }

    pub fn neg(e: Expr) -> Self {
        Expr::Neg(Box::new(e))
    }

    pub fn binary(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::Binary(op, Box::new(a), Box::new(b))
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Self::binary(BinOp::Add, a, b)
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Self::binary(BinOp::Sub, a, b)
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Self::binary(BinOp::Mul, a, b)
    }

    pub fn compare(op: CmpOp, a: Expr, b: Expr) -> Self {
        Expr::Compare(op, Box::new(a), Box::new(b))
    }

    pub fn if_then_else(c: Expr, a: Expr, b: Expr) -> Self {
        Expr::If(Box::new(c), Box::new(a), Box::new(b))
    }

    /// Every identifier referenced, in first-occurrence order, deduplicated.
    pub fn references(&self) -> Vec<&str> {
        let mut out: Vec<&str> = Vec::new();
        self.visit_refs(&mut |name| {
            if !out.contains(&name) {
                out.push(name);
            }
        });
        out
    }

    /// Number of occurrences of `name` in the tree.
    pub fn count_refs(&self, name: &str) -> usize {
        let mut n = 0;
        self.visit_refs(&mut |r| {
            if r == name {
                n += 1;
            }
        });
        n
    }

    fn visit_refs<'a>(&'a self, f: &mut impl FnMut(&'a str)) {
        match self {
            Expr::Num(_) => {}
            Expr::Ref(name) => f(name),
            Expr::Neg(e) => e.visit_refs(f),
            Expr::Binary(_, a, b) | Expr::Compare(_, a, b) => {
                a.visit_refs(f);
                b.visit_refs(f);
            }
            Expr::If(c, a, b) => {
                c.visit_refs(f);
                a.visit_refs(f);
                b.visit_refs(f);
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::If(..) => PREC_IF,
            Expr::Compare(..) => PREC_CMP,
            Expr::Binary(op, ..) => op.precedence(),
            Expr::Neg(_) => PREC_UNARY,
            Expr::Num(_) | Expr::Ref(_) => PREC_ATOM,
        }
    }

    fn write_prec(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            f.write_str("(")?;
            self.write_prec(f, PREC_IF)?;
            return f.write_str(")");
        }
        match self {
            Expr::Num(v) => f.write_str(&format_number(*v)),
            Expr::Ref(name) => f.write_str(name),
            Expr::Neg(e) => {
                f.write_str("-")?;
                // `-<literal>` would re-parse as a negative literal.
                match **e {
                    Expr::Num(v) if !v.is_sign_negative() => write!(f, "({})", format_number(v)),
                    _ => e.write_prec(f, PREC_UNARY),
                }
            }
            Expr::Binary(op, a, b) => {
                let p = op.precedence();
                a.write_prec(f, p)?;
                write!(f, " {} ", op.symbol())?;
                b.write_prec(f, p + 1)
            }
            Expr::Compare(op, a, b) => {
                a.write_prec(f, PREC_CMP)?;
                write!(f, " {} ", op.symbol())?;
                b.write_prec(f, PREC_CMP + 1)
            }
            Expr::If(c, a, b) => {
                f.write_str("if ")?;
                c.write_prec(f, PREC_CMP)?;
                f.write_str(" then ")?;
                a.write_prec(f, PREC_CMP)?;
                f.write_str(" else ")?;
                b.write_prec(f, PREC_IF)
            }
        }
    }
}

const PREC_IF: u8 = 0;
const PREC_CMP: u8 = 1;
const PREC_ADD: u8 = 2;
const PREC_MUL: u8 = 3;
const PREC_UNARY: u8 = 4;
const PREC_ATOM: u8 = 5;

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_prec(f, PREC_IF)
    }
}

/// Shortest decimal text that parses back to exactly `v`.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Failure while evaluating a compiled expression.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalCause {
    #[error("division by zero")]
    DivisionByZero,
    #[error("non-finite result")]
    NonFinite,
}

/// Compiled expression: references are resolved to slots.
///
/// `Var(i)` reads endogenous slot `i`; `Noise` reads the single noise value
/// bound for this equation.
#[derive(Debug, Clone, PartialEq)]
pub enum Program {
    Const(f64),
    Var(usize),
    Noise,
    Neg(Box<Program>),
    Binary(BinOp, Box<Program>, Box<Program>),
    Compare(CmpOp, Box<Program>, Box<Program>),
    If(Box<Program>, Box<Program>, Box<Program>),
}

impl Program {
    /// Compile `expr`, resolving each identifier with `resolve`.
    ///
    /// `resolve` returns `None` for names that are not allowed in this
    /// position; the first such name is returned as the error.
    pub fn compile<'a>(expr: &'a Expr, resolve: &impl Fn(&str) -> Option<Program>) -> Result<Program, &'a str> {
        Ok(match expr {
            Expr::Num(v) => Program::Const(*v),
            Expr::Ref(name) => resolve(name).ok_or(name.as_str())?,
            Expr::Neg(e) => Program::Neg(Box::new(Self::compile(e, resolve)?)),
            Expr::Binary(op, a, b) => Program::Binary(
                *op,
                Box::new(Self::compile(a, resolve)?),
                Box::new(Self::compile(b, resolve)?),
            ),
            Expr::Compare(op, a, b) => Program::Compare(
                *op,
                Box::new(Self::compile(a, resolve)?),
                Box::new(Self::compile(b, resolve)?),
            ),
            Expr::If(c, a, b) => Program::If(
                Box::new(Self::compile(c, resolve)?),
                Box::new(Self::compile(a, resolve)?),
                Box::new(Self::compile(b, resolve)?),
            ),
        })
    }

    /// Evaluate against endogenous slot values and this equation's noise.
    pub fn eval(&self, vars: &[f64], noise: f64) -> Result<f64, EvalCause> {
        let v = match self {
            Program::Const(c) => *c,
            Program::Var(i) => vars[*i],
            Program::Noise => noise,
            Program::Neg(e) => -e.eval(vars, noise)?,
            Program::Binary(op, a, b) => {
                let x = a.eval(vars, noise)?;
                let y = b.eval(vars, noise)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y == 0.0 {
                            return Err(EvalCause::DivisionByZero);
                        }
                        x / y
                    }
                }
            }
            Program::Compare(op, a, b) => {
                let x = a.eval(vars, noise)?;
                let y = b.eval(vars, noise)?;
                if op.apply(x, y) {
                    1.0
                } else {
                    0.0
                }
            }
            Program::If(c, a, b) => {
                if c.eval(vars, noise)? != 0.0 {
                    a.eval(vars, noise)?
                } else {
                    b.eval(vars, noise)?
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(EvalCause::NonFinite)
        }
    }
}

/// Signed top-level additive terms of `expr`: `a - (b + c)` flattens to
/// `[+a, -b, -c]`.
fn additive_terms(expr: &Expr, positive: bool, out: &mut Vec<(bool, Expr)>) {
    match expr {
        Expr::Binary(BinOp::Add, a, b) => {
            additive_terms(a, positive, out);
            additive_terms(b, positive, out);
        }
        Expr::Binary(BinOp::Sub, a, b) => {
            additive_terms(a, positive, out);
            additive_terms(b, !positive, out);
        }
        Expr::Neg(e) => additive_terms(e, !positive, out),
        other => out.push((positive, other.clone())),
    }
}

/// Synthesize `noise = f⁻¹(var, parents)` for the additive-noise form
/// `var = g(parents) ± noise`.
///
/// Returns `None` unless `noise` occurs exactly once in `expr`, as a
/// top-level additive term.
pub fn additive_inverse(expr: &Expr, var: &str, noise: &str) -> Option<Expr> {
    if expr.count_refs(noise) != 1 {
        return None;
    }
    let mut terms = Vec::new();
    additive_terms(expr, true, &mut terms);
    let pos = terms
        .iter()
        .position(|(_, t)| matches!(t, Expr::Ref(n) if n == noise))?;
    let (noise_sign, _) = terms.remove(pos);

    // rest = Σ ±t over the remaining terms
    let mut rest: Option<Expr> = None;
    for (sign, term) in terms {
        rest = Some(match (rest, sign) {
            (None, true) => term,
            (None, false) => Expr::neg(term),
            (Some(acc), true) => Expr::add(acc, term),
            (Some(acc), false) => Expr::sub(acc, term),
        });
    }
    let v = Expr::var(var);
    Some(match (noise_sign, rest) {
        (true, None) => v,
        (false, None) => Expr::neg(v),
        (true, Some(r)) => Expr::sub(v, r),
        (false, Some(r)) => Expr::sub(r, v),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eval_with(expr: &Expr, bindings: &[(&str, f64)], noise: (&str, f64)) -> Result<f64, EvalCause> {
        let names: Vec<&str> = bindings.iter().map(|(n, _)| *n).collect();
        let values: Vec<f64> = bindings.iter().map(|(_, v)| *v).collect();
        let prog = Program::compile(expr, &|n| {
            if n == noise.0 {
                Some(Program::Noise)
            } else {
                names.iter().position(|m| *m == n).map(Program::Var)
            }
        })
        .unwrap();
        prog.eval(&values, noise.1)
    }

    #[test]
    fn arithmetic_and_conditionals() {
        // Y = X + Z + U_Y
        let e = Expr::add(Expr::add(Expr::var("X"), Expr::var("Z")), Expr::var("U_Y"));
        assert_eq!(eval_with(&e, &[("X", 1.0), ("Z", 2.0)], ("U_Y", 7.0)), Ok(10.0));

        let c = Expr::if_then_else(
            Expr::compare(CmpOp::Ge, Expr::var("A"), Expr::num(0.5)),
            Expr::num(3.0),
            Expr::neg(Expr::var("A")),
        );
        assert_eq!(eval_with(&c, &[("A", 0.7)], ("U", 0.0)), Ok(3.0));
        assert_eq!(eval_with(&c, &[("A", 0.2)], ("U", 0.0)), Ok(-0.2));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = Expr::binary(BinOp::Div, Expr::num(1.0), Expr::var("U"));
        assert_eq!(eval_with(&e, &[], ("U", 0.0)), Err(EvalCause::DivisionByZero));
        assert_eq!(eval_with(&e, &[], ("U", 4.0)), Ok(0.25));
    }

    #[test]
    fn display_keeps_structure() {
        let e = Expr::sub(Expr::var("a"), Expr::sub(Expr::var("b"), Expr::var("c")));
        assert_eq!(e.to_string(), "a - (b - c)");
        let e = Expr::mul(Expr::add(Expr::var("a"), Expr::num(1.0)), Expr::num(-2.0));
        assert_eq!(e.to_string(), "(a + 1) * -2");
        assert_eq!(Expr::neg(Expr::num(1.0)).to_string(), "-(1)");
        let e = Expr::add(
            Expr::num(1.0),
            Expr::if_then_else(Expr::var("c"), Expr::num(1.0), Expr::num(0.0)),
        );
        assert_eq!(e.to_string(), "1 + (if c then 1 else 0)");
    }

    #[test]
    fn numbers_round_trip() {
        for v in [
            0.0,
            1.0,
            -2.5,
            0.1,
            1e-7,
            6.02e23,
            123456789.125,
            f64::MIN_POSITIVE,
            f64::MAX,
        ] {
            let s = format_number(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "{s}");
        }
    }

    #[test]
    fn additive_inverse_forms() {
        // Y = X + Z + U_Y  ->  U_Y = Y - (X + Z)
        let e = Expr::add(Expr::add(Expr::var("X"), Expr::var("Z")), Expr::var("U_Y"));
        let inv = additive_inverse(&e, "Y", "U_Y").unwrap();
        assert_eq!(inv.to_string(), "Y - (X + Z)");

        // Z = U_Z  ->  U_Z = Z
        let inv = additive_inverse(&Expr::var("U_Z"), "Z", "U_Z").unwrap();
        assert_eq!(inv, Expr::var("Z"));

        // X = 3 - U  ->  U = 3 - X
        let e = Expr::sub(Expr::num(3.0), Expr::var("U"));
        let inv = additive_inverse(&e, "X", "U").unwrap();
        assert_eq!(inv.to_string(), "3 - X");

        // multiplicative noise is not additive
        let e = Expr::mul(Expr::var("A"), Expr::var("U"));
        assert!(additive_inverse(&e, "X", "U").is_none());
        // noise used twice
        let e = Expr::add(Expr::var("U"), Expr::mul(Expr::var("U"), Expr::var("A")));
        assert!(additive_inverse(&e, "X", "U").is_none());
    }
}
