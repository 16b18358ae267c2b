//! A small arithmetic language for functions `f(t)` and kernels `K(x, t)`.
//!
//! ```text
//! expr  := cmp
//! cmp   := add (("<" | "<=" | ">" | ">=" | "==" | "!=") add)?
//! add   := mul (("+" | "-") mul)*
//! mul   := unary (("*" | "/") unary)*
//! unary := "-" unary | pow
//! pow   := atom ("^" unary)?
//! atom  := NUMBER | IDENT | IDENT "(" expr ("," expr)* ")" | "(" expr ")"
//! ```
//!
//! Variables are `t` and `x`. Comparisons evaluate to `1` or `0` and may only
//! appear as the condition of `if(cond, then, else)`. Evaluation is pure and
//! deterministic; only the selected branch of an `if` is evaluated.

mod lexer;
mod parser;

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::function::ScaleFunction;
use crate::kernel::Kernel;
use crate::scale::TimeScale;

/// Bytes of source shown on each side of an error offset.
const EXCERPT_RADIUS: usize = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    X,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Abs,
    Sgn,
    Sqrt,
    Min,
    Max,
    Floor,
}

impl Func {
    const ALL: [Func; 10] = [
        Func::Sin,
        Func::Cos,
        Func::Exp,
        Func::Log,
        Func::Abs,
        Func::Sgn,
        Func::Sqrt,
        Func::Min,
        Func::Max,
        Func::Floor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Abs => "abs",
            Func::Sgn => "sgn",
            Func::Sqrt => "sqrt",
            Func::Min => "min",
            Func::Max => "max",
            Func::Floor => "floor",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    pub fn arity(self) -> usize {
        match self {
            Func::Min | Func::Max => 2,
            _ => 1,
        }
    }
}

/// Syntax tree of a parsed expression.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(Var),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at offset {offset}: expected {expected}\n  {excerpt}")]
pub struct ParseError {
    /// Byte offset into the source, at most its length.
    pub offset: usize,
    pub expected: String,
    pub excerpt: String,
}

impl ParseError {
    pub(crate) fn new(src: &str, offset: usize, expected: &str) -> Self {
        let offset = offset.min(src.len());
        let mut lo = offset.saturating_sub(EXCERPT_RADIUS);
        while !src.is_char_boundary(lo) {
            lo -= 1;
        }
        let mut hi = (offset + EXCERPT_RADIUS).min(src.len());
        while !src.is_char_boundary(hi) {
            hi += 1;
        }
        let caret = " ".repeat(src[lo..offset].chars().count());
        Self {
            offset,
            expected: expected.to_string(),
            excerpt: format!("{}\n  {caret}^", &src[lo..hi]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("variable {0} is not bound")]
    UnboundVariable(Var),
    #[error("{func}({arg}) is outside the domain of {func}")]
    Domain { func: &'static str, arg: f64 },
    #[error("division by zero")]
    DivisionByZero,
}

/// Values for the variables `t` and `x`.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Bindings {
    pub t: Option<f64>,
    pub x: Option<f64>,
}

impl Bindings {
    pub fn t(t: f64) -> Self {
        Self { t: Some(t), x: None }
    }

    pub fn xt(x: f64, t: f64) -> Self {
        Self {
            t: Some(t),
            x: Some(x),
        }
    }

    fn get(&self, v: Var) -> Option<f64> {
        match v {
            Var::T => self.t,
            Var::X => self.x,
        }
    }
}

/// Parses `src` into a syntax tree.
pub fn parse(src: &str) -> std::result::Result<Expr, ParseError> {
    parser::parse(src)
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> std::result::Result<Self, ParseError> {
        parse(s)
    }
}

impl Expr {
    pub fn eval(&self, b: &Bindings) -> std::result::Result<f64, EvalError> {
        Ok(match self {
            Expr::Number(v) => *v,
            Expr::Var(v) => b.get(*v).ok_or(EvalError::UnboundVariable(*v))?,
            Expr::Neg(e) => -e.eval(b)?,
            Expr::Binary(op, l, r) => {
                let (l, r) = (l.eval(b)?, r.eval(b)?);
                match op {
                    BinOp::Add => l + r,
                    BinOp::Sub => l - r,
                    BinOp::Mul => l * r,
                    BinOp::Div if r == 0.0 => return Err(EvalError::DivisionByZero),
                    BinOp::Div => l / r,
                    BinOp::Pow => l.powf(r),
                }
            }
            Expr::Compare(op, l, r) => {
                let (l, r) = (l.eval(b)?, r.eval(b)?);
                let holds = match op {
                    CmpOp::Lt => l < r,
                    CmpOp::Le => l <= r,
                    CmpOp::Gt => l > r,
                    CmpOp::Ge => l >= r,
                    CmpOp::Eq => l == r,
                    CmpOp::Ne => l != r,
                };
                if holds {
                    1.0
                } else {
                    0.0
                }
            }
            Expr::Call(f, args) => {
                let a = args[0].eval(b)?;
                match f {
                    Func::Sin => a.sin(),
                    Func::Cos => a.cos(),
                    Func::Exp => a.exp(),
                    Func::Log if !(a > 0.0) => return Err(EvalError::Domain { func: "log", arg: a }),
                    Func::Log => a.ln(),
                    Func::Abs => a.abs(),
                    Func::Sgn if a == 0.0 => 0.0,
                    Func::Sgn => a.signum(),
                    Func::Sqrt if a < 0.0 => return Err(EvalError::Domain { func: "sqrt", arg: a }),
                    Func::Sqrt => a.sqrt(),
                    Func::Min => a.min(args[1].eval(b)?),
                    Func::Max => a.max(args[1].eval(b)?),
                    Func::Floor => a.floor(),
                }
            }
            Expr::If(c, then, other) => {
                if c.eval(b)? != 0.0 {
                    then.eval(b)?
                } else {
                    other.eval(b)?
                }
            }
        })
    }

    /// The variables that occur in the tree.
    pub fn free_vars(&self) -> BTreeSet<Var> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<Var>) {
        match self {
            Expr::Number(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Neg(e) => e.collect_vars(out),
            Expr::Binary(_, l, r) | Expr::Compare(_, l, r) => {
                l.collect_vars(out);
                r.collect_vars(out);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
            Expr::If(c, a, b) => {
                c.collect_vars(out);
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    fn require_vars(&self, allowed: &[Var], role: &str) -> Result<()> {
        match self.free_vars().into_iter().find(|v| !allowed.contains(v)) {
            Some(v) => Err(Error::UnexpectedVariable {
                name: v.name().to_string(),
                role: role.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// `f(t)` on `[start, inf) ∩ scale`; evaluation errors become NaN.
    ///
    /// Rejects expressions that mention `x`.
    pub fn to_function(&self, scale: TimeScale, start: f64) -> Result<ScaleFunction> {
        self.require_vars(&[Var::T], "a function of t")?;
        let e = self.clone();
        ScaleFunction::new(scale, start, move |t| e.eval(&Bindings::t(t)).unwrap_or(f64::NAN))
    }

    /// `K(x, t)` on `[α, inf) × [β, inf)`; evaluation errors become NaN.
    ///
    /// A kernel of the form `if(t <= E(x), ..., 0)` gets the row support `E`.
    pub fn to_kernel(&self, x_scale: TimeScale, alpha: f64, t_scale: TimeScale, beta: f64) -> Result<Kernel> {
        self.require_vars(&[Var::T, Var::X], "a kernel in x and t")?;
        let e = self.clone();
        let k = Kernel::new(x_scale, alpha, t_scale, beta, move |x, t| {
            e.eval(&Bindings::xt(x, t)).unwrap_or(f64::NAN)
        })?;
        Ok(match self.row_support() {
            Some(end) => k.with_row_support(move |x| end.eval(&Bindings::xt(x, f64::NAN)).unwrap_or(f64::INFINITY)),
            None => k,
        })
    }

    /// `E` when the tree is `if(t <= E, _, 0)` (or `<`, or mirrored) with `E` free of `t`.
    pub fn row_support(&self) -> Option<Expr> {
        let Expr::If(cond, _, other) = self else {
            return None;
        };
        if **other != Expr::Number(0.0) {
            return None;
        }
        let Expr::Compare(op, l, r) = &**cond else {
            return None;
        };
        let bound = match (op, &**l, &**r) {
            (CmpOp::Le | CmpOp::Lt, Expr::Var(Var::T), e) => e,
            (CmpOp::Ge | CmpOp::Gt, e, Expr::Var(Var::T)) => e,
            _ => return None,
        };
        (!bound.free_vars().contains(&Var::T)).then(|| bound.clone())
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Compare(..) => 0,
            Expr::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Binary(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }
}

/// Canonical rendering with the fewest parentheses that reparse to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            // plain digits in the usual range, exponent form outside it; both round-trip
            Expr::Number(v) if *v == 0.0 || (1e-4..1e15).contains(&v.abs()) => write!(f, "{v}"),
            Expr::Number(v) => write!(f, "{v:?}"),
            Expr::Var(v) => write!(f, "{v}"),
            Expr::Neg(e) => {
                f.write_str("-")?;
                e.write_at(f, 3)
            }
            Expr::Binary(op, l, r) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => (" * ", 2, 3),
                    BinOp::Div => (" / ", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                l.write_at(f, lmin)?;
                f.write_str(sym)?;
                r.write_at(f, rmin)
            }
            Expr::Compare(op, l, r) => {
                let sym = match op {
                    CmpOp::Lt => " < ",
                    CmpOp::Le => " <= ",
                    CmpOp::Gt => " > ",
                    CmpOp::Ge => " >= ",
                    CmpOp::Eq => " == ",
                    CmpOp::Ne => " != ",
                };
                l.write_at(f, 1)?;
                f.write_str(sym)?;
                r.write_at(f, 1)
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    a.write_at(f, 1)?;
                }
                f.write_str(")")
            }
            Expr::If(c, a, b) => write!(f, "if({c}, {a}, {b})"),
        }
    }
}

impl Serialize for Expr {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}
