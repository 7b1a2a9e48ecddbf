//! Expression DSL: parsing, evaluation, exact first derivatives via
//! forward-mode automatic differentiation, and a central finite-difference
//! oracle.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term { ("+"|"-") term }
//! term   := factor { ("*"|"/") factor }
//! factor := ["-"] power
//! power  := atom [ "^" signed_int ]
//! atom   := number | ident | func "(" expr ")" | "(" expr ")"
//! func   := "sqrt" | "exp" | "log" | "sin" | "cos"
//! ```
//!
//! `^` binds tightest (integer exponents only), then unary minus, then `*`/`/`,
//! then `+`/`-`, all left associative. Identifiers resolve first as phase
//! variables (`x1..xN`, `y1..yN`), then as declared parameters.
//!
//! All values are immutable; evaluation and differentiation are pure.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::math;

/// Phase space R^{2N} with the fixed coordinate order (x1..xN, y1..yN).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PhaseSpace {
    n: usize,
}

impl PhaseSpace {
    /// `n` is the number of degrees of freedom N; must be at least 1.
    pub fn new(n: usize) -> Option<PhaseSpace> {
        if n >= 1 {
            Some(PhaseSpace { n })
        } else {
            None
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Phase-space dimension 2N.
    pub fn dim(&self) -> usize {
        2 * self.n
    }

    /// Resolve a variable name: `x_k` maps to `k-1`, `y_k` to `N+k-1`.
    /// Names are strict: no leading zeros, 1-based, within range.
    pub fn var_index(&self, name: &str) -> Option<usize> {
        if !name.is_ascii() || name.len() < 2 {
            return None;
        }
        let (head, digits) = name.split_at(1);
        if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let k: usize = digits.parse().ok()?;
        if k < 1 || k > self.n {
            return None;
        }
        match head {
            "x" => Some(k - 1),
            "y" => Some(self.n + k - 1),
            _ => None,
        }
    }

    /// Inverse of `var_index`.
    pub fn var_name(&self, index: usize) -> Option<String> {
        if index < self.n {
            Some(format!("x{}", index + 1))
        } else if index < 2 * self.n {
            Some(format!("y{}", index + 1 - self.n))
        } else {
            None
        }
    }
}

/// Parameter bindings for evaluation.
pub type Bindings = BTreeMap<String, f64>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unary {
    Sqrt,
    Exp,
    Log,
    Sin,
    Cos,
}

impl Unary {
    fn name(self) -> &'static str {
        match self {
            Unary::Sqrt => "sqrt",
            Unary::Exp => "exp",
            Unary::Log => "log",
            Unary::Sin => "sin",
            Unary::Cos => "cos",
        }
    }
}

/// Immutable expression tree.
///
/// Constants are finite reals; variable indices refer to the fixed coordinate
/// order of the owning phase space. Structural equality (`PartialEq`) is what
/// the round-trip guarantee speaks about.
#[derive(Debug, Clone, PartialEq)]
pub enum Expression {
    Const(f64),
    Var(usize),
    Param(String),
    Sum(Box<Expression>, Box<Expression>),
    Diff(Box<Expression>, Box<Expression>),
    Prod(Box<Expression>, Box<Expression>),
    Quot(Box<Expression>, Box<Expression>),
    Neg(Box<Expression>),
    /// Integer power with a signed literal exponent.
    IntPow(Box<Expression>, i32),
    Func(Unary, Box<Expression>),
}

// ---------------------------------------------------------------------------
// errors
// ---------------------------------------------------------------------------

/// Parse failure with a byte position into the source text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    /// Malformed syntax; `expected` describes what the parser wanted to see.
    Syntax { pos: usize, expected: String },
    /// Identifier that is neither a phase variable nor a declared parameter.
    UnknownVariable { pos: usize, name: String },
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParseError::Syntax { pos, expected } => {
                write!(f, "syntax error at byte {pos}: expected {expected}")
            }
            ParseError::UnknownVariable { pos, name } => {
                write!(f, "unknown variable `{name}` at byte {pos}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

/// Evaluation failure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvalError {
    /// Division by zero, log of a non-positive value, sqrt of a negative
    /// value, or overflow: the point lies outside the function's domain.
    NonFinite,
    /// Parameter present in the tree but absent from the bindings.
    UnboundParameter(String),
    /// Variable index at or beyond the point's length.
    VarOutOfRange { index: usize, dim: usize },
}

impl core::fmt::Display for EvalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            EvalError::NonFinite => write!(f, "evaluation left the function's domain (non-finite value)"),
            EvalError::UnboundParameter(name) => write!(f, "unbound parameter `{name}`"),
            EvalError::VarOutOfRange { index, dim } => {
                write!(f, "variable index {index} out of range for dimension {dim}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for EvalError {}

// ---------------------------------------------------------------------------
// parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Num(_) => "number".to_string(),
            Token::Ident(s) => format!("identifier `{s}`"),
            Token::Plus => "`+`".to_string(),
            Token::Minus => "`-`".to_string(),
            Token::Star => "`*`".to_string(),
            Token::Slash => "`/`".to_string(),
            Token::Caret => "`^`".to_string(),
            Token::LParen => "`(`".to_string(),
            Token::RParen => "`)`".to_string(),
            Token::Eof => "end of input".to_string(),
        }
    }
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Lexer<'a> {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    /// Next token plus its starting byte position.
    fn next(&mut self) -> Result<(Token, usize), ParseError> {
        self.skip_ws();
        let start = self.pos;
        if self.pos >= self.src.len() {
            return Ok((Token::Eof, start));
        }
        let b = self.src[self.pos];
        let simple = match b {
            b'+' => Some(Token::Plus),
            b'-' => Some(Token::Minus),
            b'*' => Some(Token::Star),
            b'/' => Some(Token::Slash),
            b'^' => Some(Token::Caret),
            b'(' => Some(Token::LParen),
            b')' => Some(Token::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            self.pos += 1;
            return Ok((tok, start));
        }
        if b.is_ascii_digit() {
            return self.lex_number(start);
        }
        if b.is_ascii_alphabetic() || b == b'_' {
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let name = core::str::from_utf8(&self.src[start..self.pos])
                .expect("identifier bytes are ASCII")
                .to_string();
            return Ok((Token::Ident(name), start));
        }
        Err(ParseError::Syntax { pos: start, expected: "a token".to_string() })
    }

    /// Decimal literal with optional fraction and exponent part. Must start
    /// with a digit (no leading dot).
    fn lex_number(&mut self, start: usize) -> Result<(Token, usize), ParseError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            if self.pos >= self.src.len() || !self.src[self.pos].is_ascii_digit() {
                return Err(ParseError::Syntax {
                    pos: self.pos,
                    expected: "digits after decimal point".to_string(),
                });
            }
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if self.pos < self.src.len() && (self.src[self.pos] == b'e' || self.src[self.pos] == b'E') {
            // only consume as an exponent when a well-formed tail follows;
            // otherwise leave the `e` for the identifier lexer (e.g. `2e` is
            // a syntax error, but `2 e` never arises since `e` would glue)
            let mut probe = self.pos + 1;
            if probe < self.src.len() && (self.src[probe] == b'+' || self.src[probe] == b'-') {
                probe += 1;
            }
            if probe < self.src.len() && self.src[probe].is_ascii_digit() {
                self.pos = probe;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            }
        }
        let text = core::str::from_utf8(&self.src[start..self.pos]).expect("number bytes are ASCII");
        let value: f64 = text.parse().map_err(|_| ParseError::Syntax {
            pos: start,
            expected: "a valid number".to_string(),
        })?;
        if !value.is_finite() {
            return Err(ParseError::Syntax { pos: start, expected: "a finite number".to_string() });
        }
        Ok((Token::Num(value), start))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    look: (Token, usize),
    space: PhaseSpace,
    params: &'a [&'a str],
}

const FUNC_NAMES: [(&str, Unary); 5] = [
    ("sqrt", Unary::Sqrt),
    ("exp", Unary::Exp),
    ("log", Unary::Log),
    ("sin", Unary::Sin),
    ("cos", Unary::Cos),
];

impl<'a> Parser<'a> {
    fn new(src: &'a str, space: PhaseSpace, params: &'a [&'a str]) -> Result<Parser<'a>, ParseError> {
        let mut lexer = Lexer::new(src);
        let look = lexer.next()?;
        Ok(Parser { lexer, look, space, params })
    }

    fn advance(&mut self) -> Result<(Token, usize), ParseError> {
        let mut next = self.lexer.next()?;
        core::mem::swap(&mut self.look, &mut next);
        Ok(next)
    }

    fn expect(&mut self, want: Token) -> Result<(), ParseError> {
        if self.look.0 == want {
            self.advance()?;
            Ok(())
        } else {
            Err(ParseError::Syntax { pos: self.look.1, expected: want.describe() })
        }
    }

    fn expr(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.term()?;
        loop {
            match self.look.0 {
                Token::Plus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    lhs = Expression::Sum(Box::new(lhs), Box::new(rhs));
                }
                Token::Minus => {
                    self.advance()?;
                    let rhs = self.term()?;
                    lhs = Expression::Diff(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expression, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            match self.look.0 {
                Token::Star => {
                    self.advance()?;
                    let rhs = self.factor()?;
                    lhs = Expression::Prod(Box::new(lhs), Box::new(rhs));
                }
                Token::Slash => {
                    self.advance()?;
                    let rhs = self.factor()?;
                    lhs = Expression::Quot(Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn factor(&mut self) -> Result<Expression, ParseError> {
        if self.look.0 == Token::Minus {
            self.advance()?;
            let inner = self.power()?;
            Ok(Expression::Neg(Box::new(inner)))
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expression, ParseError> {
        let base = self.atom()?;
        if self.look.0 != Token::Caret {
            return Ok(base);
        }
        self.advance()?;
        let negative = if self.look.0 == Token::Minus {
            self.advance()?;
            true
        } else {
            false
        };
        let (tok, pos) = self.advance()?;
        let magnitude = match tok {
            Token::Num(v) if crate::math::is_integer(v) && v.abs() <= i32::MAX as f64 => v as i32,
            _ => {
                return Err(ParseError::Syntax {
                    pos,
                    expected: "an integer exponent".to_string(),
                })
            }
        };
        let exponent = if negative { -magnitude } else { magnitude };
        Ok(Expression::IntPow(Box::new(base), exponent))
    }

    fn atom(&mut self) -> Result<Expression, ParseError> {
        let (tok, pos) = self.advance()?;
        match tok {
            Token::Num(v) => Ok(Expression::Const(v)),
            Token::LParen => {
                let inner = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if self.look.0 == Token::LParen {
                    let func = FUNC_NAMES
                        .iter()
                        .find(|(n, _)| *n == name)
                        .map(|(_, u)| *u)
                        .ok_or_else(|| ParseError::Syntax {
                            pos,
                            expected: "one of sqrt, exp, log, sin, cos before `(`".to_string(),
                        })?;
                    self.advance()?; // consume `(`
                    let arg = self.expr()?;
                    self.expect(Token::RParen)?;
                    Ok(Expression::Func(func, Box::new(arg)))
                } else if let Some(index) = self.space.var_index(&name) {
                    Ok(Expression::Var(index))
                } else if self.params.contains(&name.as_str()) {
                    Ok(Expression::Param(name))
                } else {
                    Err(ParseError::UnknownVariable { pos, name })
                }
            }
            other => Err(ParseError::Syntax {
                pos,
                expected: format!("a value, found {}", other.describe()),
            }),
        }
    }
}

/// Parse `text` over `space` with the given declared parameter names.
pub fn parse(text: &str, space: PhaseSpace, params: &[&str]) -> Result<Expression, ParseError> {
    let mut parser = Parser::new(text, space, params)?;
    let tree = parser.expr()?;
    if parser.look.0 != Token::Eof {
        return Err(ParseError::Syntax {
            pos: parser.look.1,
            expected: format!("end of input, found {}", parser.look.0.describe()),
        });
    }
    Ok(tree)
}

// ---------------------------------------------------------------------------
// evaluation and differentiation
// ---------------------------------------------------------------------------

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

/// Dual number (value, derivative) for forward-mode differentiation.
#[derive(Clone, Copy)]
struct Dual {
    v: f64,
    d: f64,
}

fn finite_dual(v: f64, d: f64) -> Result<Dual, EvalError> {
    if v.is_finite() && d.is_finite() {
        Ok(Dual { v, d })
    } else {
        Err(EvalError::NonFinite)
    }
}

impl Expression {
    /// IEEE double evaluation. Any non-finite intermediate (division by zero,
    /// log of a non-positive value, sqrt of a negative value, overflow) is a
    /// `NonFinite` error rather than a propagated NaN.
    pub fn evaluate(&self, p: &[f64], bindings: &Bindings) -> Result<f64, EvalError> {
        match self {
            Expression::Const(c) => Ok(*c),
            Expression::Var(i) => p
                .get(*i)
                .copied()
                .ok_or(EvalError::VarOutOfRange { index: *i, dim: p.len() }),
            Expression::Param(name) => bindings
                .get(name)
                .copied()
                .ok_or_else(|| EvalError::UnboundParameter(name.clone())),
            Expression::Sum(a, b) => finite(a.evaluate(p, bindings)? + b.evaluate(p, bindings)?),
            Expression::Diff(a, b) => finite(a.evaluate(p, bindings)? - b.evaluate(p, bindings)?),
            Expression::Prod(a, b) => finite(a.evaluate(p, bindings)? * b.evaluate(p, bindings)?),
            Expression::Quot(a, b) => finite(a.evaluate(p, bindings)? / b.evaluate(p, bindings)?),
            Expression::Neg(a) => Ok(-a.evaluate(p, bindings)?),
            Expression::IntPow(a, k) => finite(math::int_pow(a.evaluate(p, bindings)?, *k)),
            Expression::Func(func, a) => {
                let v = a.evaluate(p, bindings)?;
                finite(match func {
                    Unary::Sqrt => math::sqrt(v),
                    Unary::Exp => math::exp(v),
                    Unary::Log => math::ln(v),
                    Unary::Sin => math::sin(v),
                    Unary::Cos => math::cos(v),
                })
            }
        }
    }

    /// One forward-mode pass: value and ∂/∂(coordinate `seed`) together.
    fn eval_dual(&self, p: &[f64], seed: usize, bindings: &Bindings) -> Result<Dual, EvalError> {
        match self {
            Expression::Const(c) => Ok(Dual { v: *c, d: 0.0 }),
            Expression::Var(i) => {
                let v = p
                    .get(*i)
                    .copied()
                    .ok_or(EvalError::VarOutOfRange { index: *i, dim: p.len() })?;
                Ok(Dual { v, d: if *i == seed { 1.0 } else { 0.0 } })
            }
            Expression::Param(name) => {
                let v = bindings
                    .get(name)
                    .copied()
                    .ok_or_else(|| EvalError::UnboundParameter(name.clone()))?;
                Ok(Dual { v, d: 0.0 })
            }
            Expression::Sum(a, b) => {
                let (a, b) = (a.eval_dual(p, seed, bindings)?, b.eval_dual(p, seed, bindings)?);
                finite_dual(a.v + b.v, a.d + b.d)
            }
            Expression::Diff(a, b) => {
                let (a, b) = (a.eval_dual(p, seed, bindings)?, b.eval_dual(p, seed, bindings)?);
                finite_dual(a.v - b.v, a.d - b.d)
            }
            Expression::Prod(a, b) => {
                let (a, b) = (a.eval_dual(p, seed, bindings)?, b.eval_dual(p, seed, bindings)?);
                finite_dual(a.v * b.v, a.d * b.v + a.v * b.d)
            }
            Expression::Quot(a, b) => {
                let (a, b) = (a.eval_dual(p, seed, bindings)?, b.eval_dual(p, seed, bindings)?);
                finite_dual(a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v))
            }
            Expression::Neg(a) => {
                let a = a.eval_dual(p, seed, bindings)?;
                Ok(Dual { v: -a.v, d: -a.d })
            }
            Expression::IntPow(a, k) => {
                let a = a.eval_dual(p, seed, bindings)?;
                let v = math::int_pow(a.v, *k);
                let d = if *k == 0 {
                    0.0
                } else {
                    f64::from(*k) * math::int_pow(a.v, *k - 1) * a.d
                };
                finite_dual(v, d)
            }
            Expression::Func(func, a) => {
                let a = a.eval_dual(p, seed, bindings)?;
                let (v, dv) = match func {
                    Unary::Sqrt => {
                        let s = math::sqrt(a.v);
                        (s, 0.5 / s)
                    }
                    Unary::Exp => {
                        let e = math::exp(a.v);
                        (e, e)
                    }
                    Unary::Log => (math::ln(a.v), 1.0 / a.v),
                    Unary::Sin => (math::sin(a.v), math::cos(a.v)),
                    Unary::Cos => (math::cos(a.v), -math::sin(a.v)),
                };
                finite_dual(v, dv * a.d)
            }
        }
    }

    /// Exact forward-mode gradient: one dual pass per coordinate.
    pub fn gradient(&self, p: &[f64], bindings: &Bindings) -> Result<Vec<f64>, EvalError> {
        let mut out = Vec::with_capacity(p.len());
        for seed in 0..p.len() {
            out.push(self.eval_dual(p, seed, bindings)?.d);
        }
        Ok(out)
    }

    /// Central finite differences with coordinate-scaled step
    /// `h * max(1, |p_i|)`, default `h = 1e-6`. The oracle against which the
    /// automatic mode is tested.
    pub fn gradient_fd(&self, p: &[f64], bindings: &Bindings, h: f64) -> Result<Vec<f64>, EvalError> {
        let mut out = Vec::with_capacity(p.len());
        let mut shifted = p.to_vec();
        for i in 0..p.len() {
            let step = h * p[i].abs().max(1.0);
            shifted[i] = p[i] + step;
            let plus = self.evaluate(&shifted, bindings)?;
            shifted[i] = p[i] - step;
            let minus = self.evaluate(&shifted, bindings)?;
            shifted[i] = p[i];
            out.push(finite((plus - minus) / (2.0 * step))?);
        }
        Ok(out)
    }

    /// Default finite-difference step for `gradient_fd`.
    pub const FD_STEP: f64 = 1e-6;

    /// Replace every `Param` node by its bound constant. Errors on a missing
    /// binding. Pre-binding keeps hot evaluation loops free of map lookups.
    pub fn bind_params(&self, bindings: &Bindings) -> Result<Expression, EvalError> {
        Ok(match self {
            Expression::Const(c) => Expression::Const(*c),
            Expression::Var(i) => Expression::Var(*i),
            Expression::Param(name) => Expression::Const(
                bindings
                    .get(name)
                    .copied()
                    .ok_or_else(|| EvalError::UnboundParameter(name.clone()))?,
            ),
            Expression::Sum(a, b) => Expression::Sum(
                Box::new(a.bind_params(bindings)?),
                Box::new(b.bind_params(bindings)?),
            ),
            Expression::Diff(a, b) => Expression::Diff(
                Box::new(a.bind_params(bindings)?),
                Box::new(b.bind_params(bindings)?),
            ),
            Expression::Prod(a, b) => Expression::Prod(
                Box::new(a.bind_params(bindings)?),
                Box::new(b.bind_params(bindings)?),
            ),
            Expression::Quot(a, b) => Expression::Quot(
                Box::new(a.bind_params(bindings)?),
                Box::new(b.bind_params(bindings)?),
            ),
            Expression::Neg(a) => Expression::Neg(Box::new(a.bind_params(bindings)?)),
            Expression::IntPow(a, k) => Expression::IntPow(Box::new(a.bind_params(bindings)?), *k),
            Expression::Func(f, a) => Expression::Func(*f, Box::new(a.bind_params(bindings)?)),
        })
    }

    /// Fully parenthesized canonical infix rendering over the phase space's
    /// variable names. `parse(to_text(e))` is structurally identical to `e`
    /// for every tree in the grammar's image.
    pub fn to_text(&self, space: PhaseSpace) -> String {
        let mut out = String::new();
        self.render(space, &mut out);
        out
    }

    fn render(&self, space: PhaseSpace, out: &mut String) {
        match self {
            Expression::Const(c) => {
                // f64 Display is the shortest round-trip decimal without
                // exponent notation, which the number grammar accepts
                out.push_str(&format!("{c}"));
            }
            Expression::Var(i) => {
                out.push_str(&space.var_name(*i).unwrap_or_else(|| format!("v{i}")));
            }
            Expression::Param(name) => out.push_str(name),
            Expression::Sum(a, b) => {
                out.push('(');
                a.render(space, out);
                out.push_str(" + ");
                b.render(space, out);
                out.push(')');
            }
            Expression::Diff(a, b) => {
                out.push('(');
                a.render(space, out);
                out.push_str(" - ");
                b.render(space, out);
                out.push(')');
            }
            Expression::Prod(a, b) => {
                out.push('(');
                a.render(space, out);
                out.push_str(" * ");
                b.render(space, out);
                out.push(')');
            }
            Expression::Quot(a, b) => {
                out.push('(');
                a.render(space, out);
                out.push_str(" / ");
                b.render(space, out);
                out.push(')');
            }
            Expression::Neg(a) => {
                out.push_str("(-");
                a.render(space, out);
                out.push(')');
            }
            Expression::IntPow(a, k) => {
                out.push('(');
                a.render(space, out);
                out.push('^');
                out.push_str(&format!("{k}"));
                out.push(')');
            }
            Expression::Func(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.render(space, out);
                out.push(')');
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn space(n: usize) -> PhaseSpace {
        PhaseSpace::new(n).unwrap()
    }

    fn no_params() -> Bindings {
        Bindings::new()
    }

    #[test]
    fn parses_per_grammar_precedence() {
        let s = space(1);
        let e = parse("x1^2 + y1^2", s, &[]).unwrap();
        assert_eq!(
            e,
            Expression::Sum(
                Box::new(Expression::IntPow(Box::new(Expression::Var(0)), 2)),
                Box::new(Expression::IntPow(Box::new(Expression::Var(1)), 2)),
            )
        );
        // unary minus binds looser than ^
        let e = parse("-x1^2", s, &[]).unwrap();
        assert_eq!(
            e,
            Expression::Neg(Box::new(Expression::IntPow(Box::new(Expression::Var(0)), 2)))
        );
        // left associativity
        let e = parse("1 - 2 - 3", s, &[]).unwrap();
        assert_eq!(
            e,
            Expression::Diff(
                Box::new(Expression::Diff(
                    Box::new(Expression::Const(1.0)),
                    Box::new(Expression::Const(2.0)),
                )),
                Box::new(Expression::Const(3.0)),
            )
        );
    }

    #[test]
    fn parses_parameters_and_rejects_unknowns() {
        let s = space(3);
        assert!(parse("a/(x1 - x2)^2", s, &["a"]).is_ok());
        match parse("x3 + 1", space(2), &[]) {
            Err(ParseError::UnknownVariable { name, .. }) => assert_eq!(name, "x3"),
            other => panic!("expected UnknownVariable, got {other:?}"),
        }
        // leading zeros and out-of-range indices do not name variables
        assert!(parse("x01", s, &[]).is_err());
        assert!(parse("x0", s, &[]).is_err());
    }

    #[test]
    fn rejects_malformed_syntax() {
        let s = space(1);
        assert!(matches!(parse("x1 +", s, &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1^2^3", s, &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1^2.5", s, &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("x1^y1", s, &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("foo(x1)", s, &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("(x1", s, &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("", s, &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse("--x1", s, &[]), Err(ParseError::Syntax { .. })));
        assert!(matches!(parse(".5", s, &[]), Err(ParseError::Syntax { .. })));
    }

    #[test]
    fn number_forms() {
        let s = space(1);
        let b = no_params();
        for (text, want) in [
            ("2", 2.0),
            ("2.5", 2.5),
            ("1e3", 1000.0),
            ("1.5E-2", 0.015),
            ("3e+2", 300.0),
        ] {
            let e = parse(text, s, &[]).unwrap();
            assert_eq!(e.evaluate(&[0.0, 0.0], &b).unwrap(), want, "{text}");
        }
        assert!(parse("2e", s, &[]).is_err());
    }

    #[test]
    fn evaluates_and_signals_domain_errors() {
        let s = space(1);
        let b = no_params();
        let e = parse("x1*y1", s, &[]).unwrap();
        assert_eq!(e.evaluate(&[2.0, 3.0], &b).unwrap(), 6.0);

        let pole = parse("1/(x1-y1)", s, &[]).unwrap();
        assert_eq!(pole.evaluate(&[1.0, 1.0], &b), Err(EvalError::NonFinite));
        assert_eq!(
            parse("log(x1)", s, &[]).unwrap().evaluate(&[-1.0, 0.0], &b),
            Err(EvalError::NonFinite)
        );
        assert_eq!(
            parse("sqrt(x1)", s, &[]).unwrap().evaluate(&[-1.0, 0.0], &b),
            Err(EvalError::NonFinite)
        );
        assert_eq!(
            parse("x1^-1", s, &[]).unwrap().evaluate(&[0.0, 0.0], &b),
            Err(EvalError::NonFinite)
        );

        let mut with_a = Bindings::new();
        with_a.insert("a".to_string(), 2.0);
        let e = parse("a*x1", s, &["a"]).unwrap();
        assert_eq!(e.evaluate(&[3.0, 0.0], &with_a).unwrap(), 6.0);
        assert_eq!(
            e.evaluate(&[3.0, 0.0], &b),
            Err(EvalError::UnboundParameter("a".to_string()))
        );
    }

    #[test]
    fn gradient_hand_cases() {
        let b = no_params();
        let e = parse("x1^2 + y1^2", space(1), &[]).unwrap();
        assert_eq!(e.gradient(&[2.0, 3.0], &b).unwrap(), vec![4.0, 6.0]);

        // f = x1*y2 - x2*y1 at x=(1,2), y=(5,7): gradient (7, -5, -2, 1)
        let e = parse("x1*y2 - x2*y1", space(2), &[]).unwrap();
        assert_eq!(
            e.gradient(&[1.0, 2.0, 5.0, 7.0], &b).unwrap(),
            vec![7.0, -5.0, -2.0, 1.0]
        );
    }

    #[test]
    fn gradient_rules_cover_all_nodes() {
        let s = space(1);
        let b = no_params();
        let p = [0.7, -0.4];
        let e = parse("sin(x1)*cos(y1) + exp(x1)/sqrt(1 + y1^2) - log(2 + x1)", s, &[]).unwrap();
        let ad = e.gradient(&p, &b).unwrap();
        let fd = e.gradient_fd(&p, &b, Expression::FD_STEP).unwrap();
        for (a, f) in ad.iter().zip(&fd) {
            assert!((a - f).abs() <= 1e-8 * (1.0 + a.abs()), "ad {a} vs fd {f}");
        }
        // negative integer powers
        let e = parse("x1^-3", s, &[]).unwrap();
        let g = e.gradient(&[2.0, 0.0], &b).unwrap();
        assert!((g[0] - (-3.0 / 16.0)).abs() < 1e-15);
    }

    #[test]
    fn derivative_at_domain_edge_is_nonfinite() {
        let s = space(1);
        let b = no_params();
        // value finite, derivative infinite: sqrt at 0
        let e = parse("sqrt(x1)", s, &[]).unwrap();
        assert_eq!(e.gradient(&[0.0, 0.0], &b), Err(EvalError::NonFinite));
    }

    #[test]
    fn to_text_canonical_form_and_round_trip() {
        let s = space(1);
        let e = Expression::Sum(
            Box::new(Expression::Var(0)),
            Box::new(Expression::Prod(
                Box::new(Expression::Const(2.0)),
                Box::new(Expression::Var(1)),
            )),
        );
        assert_eq!(e.to_text(s), "(x1 + (2 * y1))");
        let back = parse(&e.to_text(s), s, &[]).unwrap();
        assert_eq!(back, e);

        let e = parse("-(x1 - 0.125)^-2 / sqrt(y1 + 3)", s, &[]).unwrap();
        let text = e.to_text(s);
        assert_eq!(parse(&text, s, &[]).unwrap(), e);
    }

    #[test]
    fn bind_params_substitutes_constants() {
        let s = space(1);
        let mut b = Bindings::new();
        b.insert("mu".to_string(), 1.5);
        let e = parse("mu*x1 + y1", s, &["mu"]).unwrap();
        let bound = e.bind_params(&b).unwrap();
        assert_eq!(bound.evaluate(&[2.0, 1.0], &Bindings::new()).unwrap(), 4.0);
        let missing = parse("nu*x1", s, &["nu"]).unwrap();
        assert!(matches!(
            missing.bind_params(&Bindings::new()),
            Err(EvalError::UnboundParameter(_))
        ));
    }

    #[test]
    fn evaluation_is_pure_and_repeatable() {
        let s = space(2);
        let b = no_params();
        let e = parse("sin(x1*y2) - cos(x2)/(1 + y1^2)", s, &[]).unwrap();
        let p = [0.3, -1.2, 0.8, 2.0];
        let v1 = e.evaluate(&p, &b).unwrap();
        let v2 = e.evaluate(&p, &b).unwrap();
        assert_eq!(v1.to_bits(), v2.to_bits());
        let g1 = e.gradient(&p, &b).unwrap();
        let g2 = e.gradient(&p, &b).unwrap();
        assert_eq!(g1, g2);
    }
}
