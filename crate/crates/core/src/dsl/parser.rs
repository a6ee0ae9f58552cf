//! Recursive-descent parser. Precedence from loosest to tightest:
//! `+ -`, `* /`, unary `-`, `^`.

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use super::lexer::{tokenize, Token};
use super::{DslError, Pos};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ExprKind {
    Int(BigInt),
    Name(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
    Call(String, Vec<Expr>),
    Tuple(Vec<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Expr {
    pub kind: ExprKind,
    pub pos: Pos,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DefKind {
    Poly,
    Form,
    Family,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Statement {
    Vars(Vec<(String, Pos)>),
    Degree(u32, Pos),
    TOrder(u32, Pos),
    Weights(Vec<u32>, Pos),
    Def {
        kind: DefKind,
        name: String,
        expr: Expr,
        pos: Pos,
    },
    Curve {
        name: String,
        param: String,
        coords: Vec<Expr>,
        pos: Pos,
    },
    Task {
        name: String,
        args: Vec<Expr>,
        pos: Pos,
    },
}

pub fn parse_statements(text: &str) -> Result<Vec<Statement>, DslError> {
    let tokens = tokenize(text)?;
    let end = tokens
        .last()
        .map(|(_, p)| Pos {
            line: p.line,
            col: p.col + 1,
        })
        .unwrap_or(Pos { line: 1, col: 1 });
    let mut parser = Parser {
        tokens,
        index: 0,
        end,
    };
    let mut statements = Vec::new();
    while !parser.at_end() {
        statements.push(parser.statement()?);
    }
    Ok(statements)
}

pub fn parse_expression(text: &str) -> Result<Expr, DslError> {
    let tokens = tokenize(text)?;
    let mut parser = Parser {
        tokens,
        index: 0,
        end: Pos { line: 1, col: text.len() + 1 },
    };
    let e = parser.expr()?;
    if let Some((t, p)) = parser.peek_with_pos() {
        return Err(DslError::at(p, format!("unexpected {t} after expression")));
    }
    Ok(e)
}

struct Parser {
    tokens: Vec<(Token, Pos)>,
    index: usize,
    end: Pos,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.index >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.index).map(|(t, _)| t)
    }

    fn peek_with_pos(&self) -> Option<(Token, Pos)> {
        self.tokens.get(self.index).cloned()
    }

    fn pos(&self) -> Pos {
        self.tokens.get(self.index).map_or(self.end, |(_, p)| *p)
    }

    fn next(&mut self, what: &str) -> Result<(Token, Pos), DslError> {
        match self.tokens.get(self.index).cloned() {
            Some(tp) => {
                self.index += 1;
                Ok(tp)
            }
            None => Err(DslError::at(self.end, format!("unexpected end of input, expected {what}"))),
        }
    }

    fn expect(&mut self, token: Token) -> Result<Pos, DslError> {
        let what = token.to_string();
        let (t, p) = self.next(&what)?;
        if t == token {
            Ok(p)
        } else {
            Err(DslError::at(p, format!("expected {what}, found {t}")))
        }
    }

    fn eat(&mut self, token: &Token) -> bool {
        if self.peek() == Some(token) {
            self.index += 1;
            true
        } else {
            false
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), DslError> {
        match self.next(what)? {
            (Token::Ident(s), p) => Ok((s, p)),
            (t, p) => Err(DslError::at(p, format!("expected {what}, found {t}"))),
        }
    }

    fn small_int(&mut self, what: &str) -> Result<(u32, Pos), DslError> {
        match self.next(what)? {
            (Token::Int(n), p) => n
                .to_u32()
                .map(|v| (v, p))
                .ok_or_else(|| DslError::at(p, format!("{what} `{n}` is too large"))),
            (Token::Minus, p) => Err(DslError::at(p, format!("{what} must be a non-negative integer literal"))),
            (t, p) => Err(DslError::at(p, format!("expected {what}, found {t}"))),
        }
    }

    fn statement(&mut self) -> Result<Statement, DslError> {
        let (keyword, pos) = self.ident("a declaration")?;
        let stmt = match keyword.as_str() {
            "vars" => {
                let mut names = Vec::new();
                while let Some(Token::Ident(_)) = self.peek() {
                    names.push(self.ident("a variable name")?);
                }
                if names.is_empty() {
                    return Err(DslError::at(self.pos(), "`vars` needs at least one name"));
                }
                Statement::Vars(names)
            }
            "degree" | "torder" => {
                if let Some(Token::Ident(_)) = self.peek() {
                    self.ident("a name")?;
                    self.expect(Token::Eq)?;
                }
                let (value, vpos) = self.small_int("truncation order")?;
                if value == 0 {
                    return Err(DslError::at(vpos, format!("`{keyword}` must be positive")));
                }
                if keyword == "degree" {
                    Statement::Degree(value, pos)
                } else {
                    Statement::TOrder(value, pos)
                }
            }
            "weights" => {
                let mut weights = Vec::new();
                while let Some(Token::Int(_)) = self.peek() {
                    let (w, wpos) = self.small_int("weight")?;
                    if w == 0 {
                        return Err(DslError::at(wpos, "weights must be positive"));
                    }
                    weights.push(w);
                }
                if weights.is_empty() {
                    return Err(DslError::at(self.pos(), "`weights` needs at least one value"));
                }
                Statement::Weights(weights, pos)
            }
            "poly" | "form" | "family" => {
                let kind = match keyword.as_str() {
                    "poly" => DefKind::Poly,
                    "form" => DefKind::Form,
                    _ => DefKind::Family,
                };
                let (name, _) = self.ident("a name")?;
                self.expect(Token::Eq)?;
                let expr = self.expr()?;
                Statement::Def { kind, name, expr, pos }
            }
            "curve" => {
                let (name, _) = self.ident("a curve name")?;
                self.expect(Token::LParen)?;
                let (param, _) = self.ident("a parameter name")?;
                self.expect(Token::RParen)?;
                self.expect(Token::Eq)?;
                let tuple = self.primary()?;
                let coords = match tuple.kind {
                    ExprKind::Tuple(items) => items,
                    _ => vec![tuple],
                };
                Statement::Curve {
                    name,
                    param,
                    coords,
                    pos,
                }
            }
            "task" => {
                let (name, _) = self.ident("a task name")?;
                self.expect(Token::LParen)?;
                let args = self.arguments()?;
                Statement::Task { name, args, pos }
            }
            other => return Err(DslError::at(pos, format!("unknown declaration `{other}`"))),
        };
        self.expect(Token::Semi)?;
        Ok(stmt)
    }

    /// Comma-separated expressions after an opening parenthesis, through `)`.
    fn arguments(&mut self) -> Result<Vec<Expr>, DslError> {
        let mut args = Vec::new();
        if self.eat(&Token::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(&Token::Comma) {
                continue;
            }
            self.expect(Token::RParen)?;
            return Ok(args);
        }
    }

    fn expr(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.term()?;
        loop {
            let pos = self.pos();
            let kind = if self.eat(&Token::Plus) {
                ExprKind::Add as fn(Box<Expr>, Box<Expr>) -> ExprKind
            } else if self.eat(&Token::Minus) {
                ExprKind::Sub
            } else {
                return Ok(lhs);
            };
            let rhs = self.term()?;
            lhs = Expr {
                kind: kind(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    fn term(&mut self) -> Result<Expr, DslError> {
        let mut lhs = self.unary()?;
        loop {
            let pos = self.pos();
            let kind = if self.eat(&Token::Star) {
                ExprKind::Mul as fn(Box<Expr>, Box<Expr>) -> ExprKind
            } else if self.eat(&Token::Slash) {
                ExprKind::Div
            } else {
                return Ok(lhs);
            };
            let rhs = self.unary()?;
            lhs = Expr {
                kind: kind(Box::new(lhs), Box::new(rhs)),
                pos,
            };
        }
    }

    fn unary(&mut self) -> Result<Expr, DslError> {
        let pos = self.pos();
        if self.eat(&Token::Minus) {
            let inner = self.unary()?;
            return Ok(Expr {
                kind: ExprKind::Neg(Box::new(inner)),
                pos,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, DslError> {
        let base = self.primary()?;
        let pos = self.pos();
        if !self.eat(&Token::Caret) {
            return Ok(base);
        }
        let (exponent, _) = self.small_int("exponent").map_err(|e| {
            if e.message.contains("too large") {
                DslError::at(pos, "exponent overflow")
            } else {
                DslError::at(e.pos.unwrap_or(pos), "exponent must be a non-negative integer literal")
            }
        })?;
        Ok(Expr {
            kind: ExprKind::Pow(Box::new(base), exponent),
            pos,
        })
    }

    fn primary(&mut self) -> Result<Expr, DslError> {
        let (token, pos) = self.next("an expression")?;
        let kind = match token {
            Token::Int(n) => ExprKind::Int(n),
            Token::Ident(name) => {
                if self.eat(&Token::LParen) {
                    ExprKind::Call(name, self.arguments()?)
                } else {
                    ExprKind::Name(name)
                }
            }
            Token::LParen => {
                let mut items = self.arguments()?;
                match items.len() {
                    0 => return Err(DslError::at(pos, "empty parentheses")),
                    1 => return Ok(items.pop().expect("one item")),
                    _ => ExprKind::Tuple(items),
                }
            }
            other => return Err(DslError::at(pos, format!("expected an expression, found {other}"))),
        };
        Ok(Expr { kind, pos })
    }
}

/// Source text for an expression with only the parentheses precedence needs.
pub fn render(expr: &Expr) -> String {
    fn prec(e: &Expr) -> u8 {
        match e.kind {
            ExprKind::Add(..) | ExprKind::Sub(..) => 1,
            ExprKind::Mul(..) | ExprKind::Div(..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Pow(..) => 4,
            _ => 5,
        }
    }
    fn wrap(e: &Expr, min: u8) -> String {
        let s = render(e);
        if prec(e) < min {
            format!("({s})")
        } else {
            s
        }
    }
    let list = |items: &[Expr]| items.iter().map(render).collect::<Vec<_>>().join(", ");
    match &expr.kind {
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Name(s) => s.clone(),
        ExprKind::Neg(a) => format!("-{}", wrap(a, 3)),
        ExprKind::Add(a, b) => format!("{} + {}", wrap(a, 1), wrap(b, 2)),
        ExprKind::Sub(a, b) => format!("{} - {}", wrap(a, 1), wrap(b, 2)),
        ExprKind::Mul(a, b) => format!("{}*{}", wrap(a, 2), wrap(b, 3)),
        ExprKind::Div(a, b) => format!("{}/{}", wrap(a, 2), wrap(b, 3)),
        ExprKind::Pow(a, k) => format!("{}^{k}", wrap(a, 5)),
        ExprKind::Call(f, args) => format!("{f}({})", list(args)),
        ExprKind::Tuple(items) => format!("({})", list(items)),
    }
}
