//! Recursive descent over the token stream, one function per grammar rule.

use super::lexer::{tokenize, Spanned, Tok};
use super::{BinOp, CmpOp, Expr, Func, ParseError, Var};

pub(crate) fn parse(src: &str) -> Result<Expr, ParseError> {
    let toks = tokenize(src)?;
    let mut p = Parser { src, toks, pos: 0 };
    let e = p.expr(false)?;
    match p.peek() {
        Tok::End => Ok(e),
        _ => Err(p.error("an operator or end of input")),
    }
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser<'_> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &str) -> ParseError {
        ParseError::new(
            self.src,
            self.offset(),
            &format!("{expected}, found {}", self.peek().describe()),
        )
    }

    fn expect(&mut self, tok: Tok) -> Result<(), ParseError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.error(&tok.describe()))
        }
    }

    /// `expr := cmp`; comparisons are accepted only where `condition` is set.
    fn expr(&mut self, condition: bool) -> Result<Expr, ParseError> {
        let lhs = self.add()?;
        let op = match self.peek() {
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            _ => return Ok(lhs),
        };
        if !condition {
            return Err(self.error("an arithmetic operator (comparisons belong in an if condition)"));
        }
        self.bump();
        let rhs = self.add()?;
        Ok(Expr::Compare(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.mul()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.mul()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn mul(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.pow()
    }

    /// `pow := atom ("^" unary)?`, which makes `^` right-associative.
    fn pow(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Caret {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Number(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(false)?;
                self.expect(Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    self.call(&name, at)
                } else {
                    match name.as_str() {
                        "t" => Ok(Expr::Var(Var::T)),
                        "x" => Ok(Expr::Var(Var::X)),
                        _ => Err(ParseError::new(self.src, at, "variable t or x")),
                    }
                }
            }
            _ => Err(self.error("a number, variable, function call or '('")),
        }
    }

    fn call(&mut self, name: &str, at: usize) -> Result<Expr, ParseError> {
        let func = if name == "if" {
            None
        } else {
            Some(Func::from_name(name).ok_or_else(|| {
                ParseError::new(self.src, at, "a known function (sin, cos, exp, log, abs, sgn, sqrt, min, max, floor, if)")
            })?)
        };
        self.expect(Tok::LParen)?;
        let mut args = vec![self.expr(func.is_none())?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.expr(false)?);
        }
        if *self.peek() != Tok::RParen {
            return Err(self.error("',' or ')'"));
        }
        let arity = func.map_or(3, Func::arity);
        if args.len() != arity {
            return Err(ParseError::new(
                self.src,
                self.offset(),
                &format!("{arity} argument(s) for {name}, found {}", args.len()),
            ));
        }
        self.bump();
        Ok(match func {
            Some(f) => Expr::Call(f, args),
            None => {
                let mut it = args.into_iter().map(Box::new);
                let (c, a, b) = (it.next().unwrap(), it.next().unwrap(), it.next().unwrap());
                Expr::If(c, a, b)
            }
        })
    }
}
