//! Scalar expressions in `t` and `x`, used for `f(t, x)`, `q(t)`, the weight
//! functions and the comparison functions read from config files.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := atom ('^' unary)?          (right associative)
//! atom    := number | 'pi' | 'e' | 't' | 'x' | name '(' sum ')' | '(' sum ')'
//! ```
//!
//! so `-2^2 = -4` and `2^3^2 = 512`.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },

    #[error("unknown identifier '{name}' at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("domain error: {0}")]
    Domain(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    T,
    X,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Sin,
    Cos,
    Exp,
    Ln,
    Abs,
    Sqrt,
}

impl UnaryOp {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "exp" => Self::Exp,
            "ln" => Self::Ln,
            "abs" => Self::Abs,
            "sqrt" => Self::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Self::Neg => "-",
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Exp => "exp",
            Self::Ln => "ln",
            Self::Abs => "abs",
            Self::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinaryOp {
    fn symbol(self) -> char {
        match self {
            Self::Add => '+',
            Self::Sub => '-',
            Self::Mul => '*',
            Self::Div => '/',
            Self::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprAst {
    Const(f64),
    Var(Var),
    Unary(UnaryOp, Box<ExprAst>),
    Binary(BinaryOp, Box<ExprAst>, Box<ExprAst>),
}

impl ExprAst {
    pub fn eval(&self, t: f64, x: f64) -> Result<f64, ExprError> {
        let v = match self {
            Self::Const(c) => *c,
            Self::Var(Var::T) => t,
            Self::Var(Var::X) => x,
            Self::Unary(op, arg) => {
                let a = arg.eval(t, x)?;
                match op {
                    UnaryOp::Neg => -a,
                    UnaryOp::Sin => a.sin(),
                    UnaryOp::Cos => a.cos(),
                    UnaryOp::Exp => a.exp(),
                    UnaryOp::Ln => {
                        if a <= 0.0 {
                            return Err(ExprError::Domain(format!("ln({a})")));
                        }
                        a.ln()
                    }
                    UnaryOp::Abs => a.abs(),
                    UnaryOp::Sqrt => {
                        if a < 0.0 {
                            return Err(ExprError::Domain(format!("sqrt({a})")));
                        }
                        a.sqrt()
                    }
                }
            }
            Self::Binary(op, lhs, rhs) => {
                let l = lhs.eval(t, x)?;
                let r = rhs.eval(t, x)?;
                match op {
                    BinaryOp::Add => l + r,
                    BinaryOp::Sub => l - r,
                    BinaryOp::Mul => l * r,
                    BinaryOp::Div => {
                        if r == 0.0 {
                            return Err(ExprError::Domain(format!("division by zero ({l}/0)")));
                        }
                        l / r
                    }
                    BinaryOp::Pow => pow(l, r)?,
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(ExprError::Domain(format!("non-finite result {v} at t={t}, x={x}")))
        }
    }

    pub fn depends_on(&self, var: Var) -> bool {
        match self {
            Self::Const(_) => false,
            Self::Var(v) => *v == var,
            Self::Unary(_, a) => a.depends_on(var),
            Self::Binary(_, l, r) => l.depends_on(var) || r.depends_on(var),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Self::Binary(BinaryOp::Add | BinaryOp::Sub, ..) => 1,
            Self::Binary(BinaryOp::Mul | BinaryOp::Div, ..) => 2,
            Self::Unary(UnaryOp::Neg, _) => 3,
            Self::Binary(BinaryOp::Pow, ..) => 4,
            _ => 5,
        }
    }
}

fn pow(base: f64, exp: f64) -> Result<f64, ExprError> {
    if base == 0.0 && exp < 0.0 {
        return Err(ExprError::Domain(format!("0^{exp}")));
    }
    if base < 0.0 && exp.fract() != 0.0 {
        return Err(ExprError::Domain(format!("({base})^{exp} is not real")));
    }
    if exp.fract() == 0.0 && exp.abs() <= i32::MAX as f64 {
        return Ok(base.powi(exp as i32));
    }
    Ok(base.powf(exp))
}

/// Fully explicit printer: the output reparses to an identical tree.
impl fmt::Display for ExprAst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Const(c) => {
                if *c < 0.0 {
                    write!(f, "({c:?})")
                } else {
                    write!(f, "{c:?}")
                }
            }
            Self::Var(Var::T) => f.write_str("t"),
            Self::Var(Var::X) => f.write_str("x"),
            Self::Unary(UnaryOp::Neg, a) => {
                if a.precedence() >= 3 {
                    write!(f, "-{a}")
                } else {
                    write!(f, "-({a})")
                }
            }
            Self::Unary(op, a) => write!(f, "{}({a})", op.name()),
            Self::Binary(op, l, r) => {
                let p = self.precedence();
                // pow is right associative, everything else left associative
                let (l_paren, r_paren) = if *op == BinaryOp::Pow {
                    (l.precedence() <= p, r.precedence() < 3)
                } else {
                    (l.precedence() < p, r.precedence() <= p)
                };
                write_side(f, l, l_paren)?;
                write!(f, " {} ", op.symbol())?;
                write_side(f, r, r_paren)
            }
        }
    }
}

fn write_side(f: &mut fmt::Formatter<'_>, e: &ExprAst, paren: bool) -> fmt::Result {
    if paren {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

/// A parsed expression together with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    source: String,
    ast: ExprAst,
}

impl Expr {
    pub fn parse(source: &str) -> Result<Self, ExprError> {
        Ok(Self { source: source.to_string(), ast: parse(source)? })
    }

    pub fn constant(c: f64) -> Self {
        Self { source: format!("{c:?}"), ast: ExprAst::Const(c) }
    }

    pub fn eval(&self, t: f64, x: f64) -> Result<f64, ExprError> {
        self.ast.eval(t, x)
    }

    pub fn ast(&self) -> &ExprAst {
        &self.ast
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn depends_on_x(&self) -> bool {
        self.ast.depends_on(Var::X)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for Expr {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn describe(tok: &Tok) -> String {
    match tok {
        Tok::Num(v) => format!("number {v}"),
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Op(c) => format!("'{c}'"),
        Tok::LParen => "'('".into(),
        Tok::RParen => "')'".into(),
        Tok::End => "end of input".into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || (c == b'.' && bytes.get(i + 1).is_some_and(u8::is_ascii_digit)) {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent only when digits follow, so `2*e` still names Euler's number
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let v = text
                .parse::<f64>()
                .map_err(|_| ExprError::Syntax { offset: start, expected: format!("a number, found '{text}'") })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(src[start..i].to_string()), start));
        } else {
            let tok = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    return Err(ExprError::Syntax {
                        offset: start,
                        expected: format!("an operator, operand or parenthesis, found '{}'", c as char),
                    })
                }
            };
            out.push((tok, start));
            i += 1;
        }
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
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

    fn error(&self, expected: &str) -> ExprError {
        ExprError::Syntax { offset: self.offset(), expected: format!("{expected}, found {}", describe(self.peek())) }
    }

    fn sum(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Op('+') => BinaryOp::Add,
                Tok::Op('-') => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn product(&mut self) -> Result<ExprAst, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Op('*') => BinaryOp::Mul,
                Tok::Op('/') => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = ExprAst::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary(&mut self) -> Result<ExprAst, ExprError> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            let arg = self.unary()?;
            return Ok(ExprAst::Unary(UnaryOp::Neg, Box::new(arg)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<ExprAst, ExprError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(ExprAst::Binary(BinaryOp::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprAst, ExprError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(ExprAst::Const(v))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                match name.as_str() {
                    "t" => Ok(ExprAst::Var(Var::T)),
                    "x" => Ok(ExprAst::Var(Var::X)),
                    "pi" => Ok(ExprAst::Const(std::f64::consts::PI)),
                    "e" => Ok(ExprAst::Const(std::f64::consts::E)),
                    _ => {
                        let Some(op) = UnaryOp::from_name(&name) else {
                            return Err(ExprError::UnknownIdentifier { name, offset });
                        };
                        if *self.peek() != Tok::LParen {
                            return Err(self.error(&format!("'(' after function '{name}'")));
                        }
                        self.bump();
                        let arg = self.sum()?;
                        self.expect_rparen()?;
                        Ok(ExprAst::Unary(op, Box::new(arg)))
                    }
                }
            }
            _ => Err(self.error("a number, variable, function or '('")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        if *self.peek() != Tok::RParen {
            return Err(self.error("')'"));
        }
        self.bump();
        Ok(())
    }
}

pub fn parse(source: &str) -> Result<ExprAst, ExprError> {
    if source.trim().is_empty() {
        return Err(ExprError::Syntax { offset: 0, expected: "an expression, found empty input".into() });
    }
    let mut p = Parser { toks: lex(source)?, pos: 0 };
    let ast = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.error("an operator or end of input"));
    }
    Ok(ast)
}
