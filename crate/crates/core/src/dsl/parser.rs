use super::lexer::{lex_line, Tok, Token};
use super::{SourceSpan, Statement, StatementKind};
use crate::expr::{BinOp, CmpOp, Expr};
use crate::model::{is_identifier, Diagnostic, ModelError};
use crate::noise::Distribution;

/// Deepest expression nesting accepted before reporting an error.
const MAX_DEPTH: usize = 256;

type PResult<T> = Result<T, Diagnostic>;

pub(crate) fn parse_line(line: &str, line_no: usize) -> Option<PResult<Statement>> {
    let toks = match lex_line(line, line_no) {
        Ok(t) => t,
        Err(e) => {
            return Some(Err(Diagnostic::new(
                ModelError::SyntaxError {
                    expected: e.expected.into(),
                    found: format!("`{}`", e.found),
                },
                Some(e.span),
            )))
        }
    };
    if toks.len() == 1 {
        // blank or comment-only line
        return None;
    }
    let mut p = LineParser { toks, pos: 0, depth: 0 };
    Some(p.statement())
}

struct LineParser {
    toks: Vec<Token>,
    pos: usize,
    depth: usize,
}

impl LineParser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: &str) -> PResult<T> {
        Err(Diagnostic::new(
            ModelError::SyntaxError {
                expected: expected.into(),
                found: self.peek().describe(),
            },
            Some(self.span()),
        ))
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> PResult<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.error(expected)
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> PResult<String> {
        match self.peek() {
            Tok::Ident(s) if is_identifier(s) => {
                let s = s.clone();
                self.bump();
                Ok(s)
            }
            _ => self.error(what),
        }
    }

    fn statement(&mut self) -> PResult<Statement> {
        let start = self.span();
        let kind = match self.peek() {
            Tok::Ident(k) if k == "noise" => {
                self.bump();
                self.noise()?
            }
            Tok::Ident(k) if k == "var" => {
                self.bump();
                let name = self.ident("variable name")?;
                self.expect(Tok::Eq, "`=`")?;
                StatementKind::Var {
                    name,
                    expr: self.expr()?,
                }
            }
            Tok::Ident(k) if k == "inverse" => {
                self.bump();
                let noise = self.ident("noise name")?;
                self.expect(Tok::Eq, "`=`")?;
                StatementKind::Inverse {
                    noise,
                    expr: self.expr()?,
                }
            }
            _ => return self.error("`noise`, `var`, `inverse` or a comment"),
        };
        if *self.peek() != Tok::Eol {
            return self.error("end of line");
        }
        let end = self.toks[self.pos.saturating_sub(1)].span;
        let length = end.column + end.length - start.column;
        Ok(Statement {
            kind,
            span: SourceSpan { length, ..start },
        })
    }

    fn noise(&mut self) -> PResult<StatementKind> {
        let name = self.ident("noise name")?;
        self.expect(Tok::Tilde, "`~`")?;
        let fam_span = self.span();
        let family = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.error("distribution name"),
        };
        self.bump();
        self.expect(Tok::LParen, "`(`")?;
        let mut args = vec![self.signed_number()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            args.push(self.signed_number()?);
        }
        self.expect(Tok::RParen, "`,` or `)`")?;
        match Distribution::from_params(&family, &args) {
            Ok(Some(dist)) => Ok(StatementKind::Noise { name, dist }),
            Ok(None) => Err(Diagnostic::new(ModelError::UnknownDistribution(family), Some(fam_span))),
            Err(expected) => Err(Diagnostic::new(
                ModelError::SyntaxError {
                    expected,
                    found: format!("{} arguments", args.len()),
                },
                Some(fam_span),
            )),
        }
    }

    fn signed_number(&mut self) -> PResult<f64> {
        let sign = match self.peek() {
            Tok::Minus => {
                self.bump();
                -1.0
            }
            Tok::Plus => {
                self.bump();
                1.0
            }
            _ => 1.0,
        };
        match *self.peek() {
            Tok::Number(v) => {
                self.bump();
                Ok(sign * v)
            }
            _ => self.error("number"),
        }
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("shallower expression nesting");
        }
        let e = if self.is_keyword("if") {
            self.bump();
            let c = self.expr()?;
            if !self.is_keyword("then") {
                return self.error("`then`");
            }
            self.bump();
            let a = self.expr()?;
            if !self.is_keyword("else") {
                return self.error("`else`");
            }
            self.bump();
            let b = self.expr()?;
            Expr::if_then_else(c, a, b)
        } else {
            self.comparison()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Tok::Eq => CmpOp::Eq,
                Tok::Ne => CmpOp::Ne,
                Tok::Lt => CmpOp::Lt,
                Tok::Le => CmpOp::Le,
                Tok::Gt => CmpOp::Gt,
                Tok::Ge => CmpOp::Ge,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::compare(op, lhs, self.additive()?);
        }
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.multiplicative()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.multiplicative()?);
        }
    }

    fn multiplicative(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            lhs = Expr::binary(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        if *self.peek() == Tok::Minus {
            // `-` directly before a literal is part of the literal
            if let Tok::Number(v) = *self.peek_at(1) {
                self.bump();
                self.bump();
                return Ok(Expr::Num(-v));
            }
            self.bump();
            self.depth += 1;
            if self.depth > MAX_DEPTH {
                return self.error("shallower expression nesting");
            }
            let e = self.unary()?;
            self.depth -= 1;
            return Ok(Expr::neg(e));
        }
        self.primary()
    }

    fn primary(&mut self) -> PResult<Expr> {
        match self.peek().clone() {
            Tok::Number(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Ident(s) if is_identifier(&s) => {
                self.bump();
                Ok(Expr::Ref(s))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.error("expression"),
        }
    }
}
