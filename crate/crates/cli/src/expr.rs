//! Scalar field expressions over `u, v`.
//!
//! Grammar, loosest binding first:
//!
//! ```text
//! sum     = product (("+" | "-") product)*
//! product = unary (("*" | "/") unary)*
//! unary   = "-" unary | power
//! power   = atom ("^" unary)?
//! atom    = number | "u" | "v" | "pi" | name "(" sum ")" | "(" sum ")"
//! ```
//!
//! so `^` is right-associative and binds tighter than unary minus
//! (`-u^2 = -(u^2)`, `2^-1 = 0.5`).

use std::fmt;
use std::str::FromStr;

use sasaki_core::field::ScalarJetField;
use sasaki_core::jet::Jet;

#[derive(Clone, Debug, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            ParseError::Syntax { offset, .. } | ParseError::UnknownIdentifier { offset, .. } => *offset,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Var {
    U,
    V,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
    Tan,
    Atan,
    Sinh,
    Cosh,
    Tanh,
    Atanh,
    Abs,
}

impl Func {
    pub const ALL: [Func; 12] = [
        Func::Sqrt,
        Func::Exp,
        Func::Ln,
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Atan,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Atanh,
        Func::Abs,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sqrt => "sqrt",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Atan => "atan",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Atanh => "atanh",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Num(f64),
    Var(Var),
    Pi,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Expression node with the byte offset it was parsed from.
/// Equality ignores offsets.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: Kind,
    pub offset: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl Expr {
    pub fn new(kind: Kind) -> Self {
        Expr { kind, offset: 0 }
    }

    pub fn num(x: f64) -> Self {
        Expr::new(Kind::Num(x))
    }

    pub fn var(v: Var) -> Self {
        Expr::new(Kind::Var(v))
    }

    pub fn negate(x: Expr) -> Self {
        Expr::new(Kind::Neg(Box::new(x)))
    }

    pub fn bin(op: BinOp, a: Expr, b: Expr) -> Self {
        Expr::new(Kind::Bin(op, Box::new(a), Box::new(b)))
    }

    pub fn call(f: Func, x: Expr) -> Self {
        Expr::new(Kind::Call(f, Box::new(x)))
    }

    pub fn depends_on_position(&self) -> bool {
        match &self.kind {
            Kind::Num(_) | Kind::Pi => false,
            Kind::Var(_) => true,
            Kind::Neg(x) | Kind::Call(_, x) => x.depends_on_position(),
            Kind::Bin(_, a, b) => a.depends_on_position() || b.depends_on_position(),
        }
    }

    /// Value of an expression free of `u, v`.
    pub fn constant_value(&self) -> Option<Result<f64, EvalError>> {
        if self.depends_on_position() {
            return None;
        }
        Some(self.eval(0.0, 0.0, 0).map(|j| j.value()))
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            Kind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Kind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Kind::Neg(_) => 3,
            Kind::Bin(BinOp::Pow, ..) => 4,
            _ => 5,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        if self.precedence() < min {
            write!(f, "(")?;
            self.write_at(f, 0)?;
            return write!(f, ")");
        }
        match &self.kind {
            Kind::Num(x) => write!(f, "{x}"),
            Kind::Var(Var::U) => write!(f, "u"),
            Kind::Var(Var::V) => write!(f, "v"),
            Kind::Pi => write!(f, "pi"),
            Kind::Neg(x) => {
                write!(f, "-")?;
                x.write_at(f, 3)
            }
            Kind::Call(func, x) => {
                write!(f, "{}(", func.name())?;
                x.write_at(f, 0)?;
                write!(f, ")")
            }
            Kind::Bin(op, a, b) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                a.write_at(f, lmin)?;
                write!(f, "{sym}")?;
                b.write_at(f, rmin)
            }
        }
    }
}

/// Canonical form: minimal parentheses, spaces around `+` and `-` only.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}

impl FromStr for Expr {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, ParseError> {
        parse_field_expression(s)
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

fn lex(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        if c.is_ascii_digit() || c == b'.' {
            while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    while j < b.len() && b[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let lit = &text[start..i];
            let x: f64 = lit.parse().map_err(|_| ParseError::Syntax {
                offset: start,
                message: format!("malformed number `{lit}`"),
            })?;
            out.push((Tok::Num(x), start));
        } else if c.is_ascii_alphabetic() || c == b'_' {
            while i < b.len() && (b[i].is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(text[start..i].to_string()), start));
        } else {
            let tok = match c {
                b'+' | b'-' | b'*' | b'/' | b'^' => Tok::Op(c as char),
                b'(' => Tok::LParen,
                b')' => Tok::RParen,
                _ => {
                    let ch = text[start..].chars().next().unwrap_or('?');
                    return Err(ParseError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{ch}`"),
                    });
                }
            };
            out.push((tok, start));
            i += 1;
        }
    }
    out.push((Tok::End, text.len()));
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

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, wanted: &str) -> ParseError {
        let found = match self.peek() {
            Tok::Num(x) => format!("number {x}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Op(c) => format!("`{c}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        };
        ParseError::Syntax {
            offset: self.offset(),
            message: format!("expected {wanted}, found {found}"),
        }
    }

    fn sum(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.product()?;
        while let Tok::Op(c @ ('+' | '-')) = *self.peek() {
            let (_, at) = self.bump();
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            let rhs = self.product()?;
            lhs = Expr { kind: Kind::Bin(op, Box::new(lhs), Box::new(rhs)), offset: at };
        }
        Ok(lhs)
    }

    fn product(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Tok::Op(c @ ('*' | '/')) = *self.peek() {
            let (_, at) = self.bump();
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            let rhs = self.unary()?;
            lhs = Expr { kind: Kind::Bin(op, Box::new(lhs), Box::new(rhs)), offset: at };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if *self.peek() == Tok::Op('-') {
            let (_, at) = self.bump();
            let x = self.unary()?;
            return Ok(Expr { kind: Kind::Neg(Box::new(x)), offset: at });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            let (_, at) = self.bump();
            let exp = self.unary()?;
            return Ok(Expr { kind: Kind::Bin(BinOp::Pow, Box::new(base), Box::new(exp)), offset: at });
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let at = self.offset();
        match self.peek().clone() {
            Tok::Num(x) => {
                self.bump();
                Ok(Expr { kind: Kind::Num(x), offset: at })
            }
            Tok::LParen => {
                self.bump();
                let inner = self.sum()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                let kind = match name.as_str() {
                    "u" => Kind::Var(Var::U),
                    "v" => Kind::Var(Var::V),
                    "pi" => Kind::Pi,
                    _ => {
                        let Some(func) = Func::from_name(&name) else {
                            return Err(ParseError::UnknownIdentifier { offset: at, name });
                        };
                        if *self.peek() != Tok::LParen {
                            return Err(self.unexpected(&format!("`(` after `{name}`")));
                        }
                        self.bump();
                        let arg = self.sum()?;
                        self.expect_rparen()?;
                        Kind::Call(func, Box::new(arg))
                    }
                };
                Ok(Expr { kind, offset: at })
            }
            _ => Err(self.unexpected("a number, variable, function or `(`")),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() != Tok::RParen {
            return Err(self.unexpected("`)`"));
        }
        self.bump();
        Ok(())
    }
}

pub fn parse_field_expression(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser { toks: lex(text)?, pos: 0 };
    let e = p.sum()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("an operator or end of input"));
    }
    Ok(e)
}

/// Domain violation during evaluation, located at the offending node.
#[derive(Clone, Debug, PartialEq, thiserror::Error)]
#[error("{message} at offset {offset}")]
pub struct EvalError {
    pub message: String,
    pub offset: usize,
}

impl From<EvalError> for sasaki_core::Error {
    fn from(e: EvalError) -> Self {
        sasaki_core::Error::Evaluation {
            message: e.message,
            offset: Some(e.offset),
        }
    }
}

impl Expr {
    fn fail(&self, message: String) -> EvalError {
        EvalError { message, offset: self.offset }
    }

    /// Jet of the expression at `(u, v)` in the variables `(r, u, v)`.
    pub fn eval(&self, u: f64, v: f64, order: u8) -> Result<Jet, EvalError> {
        let [_, uj, vj] = Jet::coordinates([0.0, u, v], order);
        self.eval_jet(&uj, &vj)
    }

    pub fn eval_jet(&self, u: &Jet, v: &Jet) -> Result<Jet, EvalError> {
        let order = u.order();
        let out = match &self.kind {
            Kind::Num(x) => Jet::constant(*x, order),
            Kind::Pi => Jet::constant(std::f64::consts::PI, order),
            Kind::Var(Var::U) => *u,
            Kind::Var(Var::V) => *v,
            Kind::Neg(x) => -x.eval_jet(u, v)?,
            Kind::Bin(op, a, b) => {
                let x = a.eval_jet(u, v)?;
                let y = b.eval_jet(u, v)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => {
                        if y.value() == 0.0 {
                            return Err(self.fail("division by zero".into()));
                        }
                        x / y
                    }
                    BinOp::Pow => self.pow(&x, &y, b)?,
                }
            }
            Kind::Call(func, a) => {
                let x = a.eval_jet(u, v)?;
                let t = x.value();
                let bad = |what: &str| Err(self.fail(format!("{}({t}): {what}", func.name())));
                match func {
                    Func::Sqrt if t < 0.0 => return bad("negative argument"),
                    Func::Sqrt if t == 0.0 && order > 0 => return bad("derivatives unbounded at 0"),
                    Func::Ln if t <= 0.0 => return bad("argument not positive"),
                    Func::Atanh if t.abs() >= 1.0 => return bad("argument outside (-1, 1)"),
                    Func::Tan if t.cos() == 0.0 => return bad("pole"),
                    Func::Abs if t == 0.0 && order > 0 => return bad("not differentiable at 0"),
                    _ => {}
                }
                match func {
                    Func::Sqrt => x.sqrt(),
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Tan => x.tan(),
                    Func::Atan => x.atan(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Tanh => x.tanh(),
                    Func::Atanh => x.atanh(),
                    Func::Abs => x.abs(),
                }
            }
        };
        if !out.is_finite() {
            return Err(self.fail("non-finite result".into()));
        }
        Ok(out)
    }

    fn pow(&self, x: &Jet, y: &Jet, exponent: &Expr) -> Result<Jet, EvalError> {
        let base = x.value();
        if !exponent.depends_on_position() {
            let p = y.value();
            if p.fract() == 0.0 && p.abs() <= i32::MAX as f64 {
                if base == 0.0 && p < 0.0 {
                    return Err(self.fail("zero raised to a negative power".into()));
                }
                return Ok(x.powi(p as i32));
            }
            if base < 0.0 {
                return Err(self.fail(format!("negative base {base} with fractional exponent {p}")));
            }
            if base == 0.0 && x.order() > 0 {
                return Err(self.fail("derivatives of a fractional power unbounded at 0".into()));
            }
            return Ok(x.powf(p));
        }
        if base <= 0.0 {
            return Err(self.fail(format!("base {base} must be positive for a variable exponent")));
        }
        Ok((x.ln() * *y).exp())
    }
}

/// An expression viewed as a field on the `(u, v)` plane.
#[derive(Clone, Debug)]
pub struct ExprField {
    pub expr: Expr,
    pub text: String,
}

impl ExprField {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        Ok(ExprField {
            expr: parse_field_expression(text)?,
            text: text.to_string(),
        })
    }
}

impl ScalarJetField for ExprField {
    fn jet(&self, u: f64, v: f64, order: u8) -> sasaki_core::Result<Jet> {
        Ok(self.expr.eval(u, v, order)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn p(s: &str) -> Expr {
        parse_field_expression(s).unwrap()
    }

    #[test]
    fn constant_expression() {
        let e = p("1/sqrt(2)");
        assert!(!e.depends_on_position());
        let x = e.constant_value().unwrap().unwrap();
        assert!((x - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn round_factor_expression() {
        let e = p("0.5*sqrt(2)*(1+u^2+v^2)");
        let j = e.eval(0.3, -0.4, 2).unwrap();
        let want = 0.5 * 2f64.sqrt() * 1.25;
        assert!((j.value() - want).abs() < 1e-15);
        assert!((j.derivative([0, 2, 0]) - 2f64.sqrt()).abs() < 1e-14);
        assert_eq!(e.to_string(), "0.5*sqrt(2)*(1 + u^2 + v^2)");
    }

    #[test]
    fn syntax_error_offset() {
        let e = parse_field_expression("1+*u").unwrap_err();
        assert_eq!(e.offset(), 2);
        assert!(matches!(e, ParseError::Syntax { .. }));
        assert_eq!(parse_field_expression("(u").unwrap_err().offset(), 2);
        assert_eq!(parse_field_expression("u v").unwrap_err().offset(), 2);
        assert_eq!(parse_field_expression("").unwrap_err().offset(), 0);
        assert_eq!(parse_field_expression("2 # 3").unwrap_err().offset(), 2);
    }

    #[test]
    fn unknown_identifier() {
        let e = parse_field_expression("sin(u) + w").unwrap_err();
        assert_eq!(e, ParseError::UnknownIdentifier { offset: 9, name: "w".into() });
        assert!(parse_field_expression("sin u").is_err());
    }

    #[test]
    fn precedence_and_associativity() {
        let val = |s: &str| p(s).constant_value().unwrap().unwrap();
        assert_eq!(val("-2^2"), -4.0);
        assert_eq!(val("2^3^2"), 512.0);
        assert_eq!(val("2^-1"), 0.5);
        assert_eq!(val("8/4/2"), 1.0);
        assert_eq!(val("1 - 2 - 3"), -4.0);
        assert_eq!(val("2*3 + 4^0.5"), 8.0);
        assert_eq!(val("(-2)^2"), 4.0);
        assert_eq!(val(" 1.5e1 +\t2E-1 "), 15.2);
        assert_eq!(p("-u^2"), Expr::negate(Expr::bin(BinOp::Pow, Expr::var(Var::U), Expr::num(2.0))));
    }

    #[test]
    fn domain_violations_located() {
        let e = p("1 + ln(u - 1)");
        let err = e.eval(0.5, 0.0, 1).unwrap_err();
        assert_eq!(err.offset, 4);
        let err = p("u/(v - v)").eval(1.0, 2.0, 0).unwrap_err();
        assert_eq!(err.offset, 1);
        assert!(p("atanh(u)").eval(1.0, 0.0, 0).is_err());
        assert!(p("sqrt(u)").eval(-1.0, 0.0, 0).is_err());
        assert!(p("u^0.5").eval(-1.0, 0.0, 0).is_err());
        let f = ExprField::parse("ln(u)").unwrap();
        assert!(matches!(
            f.jet(-1.0, 0.0, 1),
            Err(sasaki_core::Error::Evaluation { offset: Some(0), .. })
        ));
    }

    #[test]
    fn jets_match_closed_forms() {
        let e = p("exp(u)*sin(v) + atan(u*v) - cosh(v)/2 + tanh(u)^2");
        let (u, v) = (0.3, -0.7);
        let j = e.eval(u, v, 3).unwrap();
        let f = |u: f64, v: f64| (u.exp() * v.sin()) + (u * v).atan() - v.cosh() / 2.0 + u.tanh().powi(2);
        assert!((j.value() - f(u, v)).abs() < 1e-14);
        let h = 1e-4;
        let fd = (f(u + h, v) - f(u - h, v)) / (2.0 * h);
        assert!((j.derivative([0, 1, 0]) - fd).abs() < 1e-7);
        let fvv = (f(u, v + h) - 2.0 * f(u, v) + f(u, v - h)) / (h * h);
        assert!((j.derivative([0, 0, 2]) - fvv).abs() < 1e-5);
        // variable exponent
        let j = p("u^v").eval(2.0, 3.0, 1).unwrap();
        assert!((j.value() - 8.0).abs() < 1e-13);
        assert!((j.derivative([0, 0, 1]) - 8.0 * 2f64.ln()).abs() < 1e-12);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![
            (0u32..1000, 0u32..4).prop_map(|(m, k)| Expr::num(m as f64 / 10f64.powi(k as i32))),
            Just(Expr::var(Var::U)),
            Just(Expr::var(Var::V)),
            Just(Expr::new(Kind::Pi)),
        ];
        leaf.prop_recursive(5, 48, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Expr::negate),
                (0usize..12, inner.clone()).prop_map(|(k, x)| Expr::call(Func::ALL[k], x)),
                (0usize..5, inner.clone(), inner).prop_map(|(k, a, b)| {
                    let op = [BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow][k];
                    Expr::bin(op, a, b)
                }),
            ]
        })
    }

    proptest! {
        #[test]
        fn parse_inverts_print(e in arb_expr()) {
            let text = e.to_string();
            let back = parse_field_expression(&text).unwrap();
            prop_assert_eq!(&back, &e, "{}", text);
            prop_assert_eq!(back.to_string(), text);
        }

        #[test]
        fn whitespace_insensitive(e in arb_expr()) {
            let text = e.to_string();
            let squeezed: String = text.chars().filter(|c| !c.is_whitespace()).collect();
            prop_assert_eq!(parse_field_expression(&squeezed).unwrap(), e);
        }

        #[test]
        fn evaluation_is_deterministic(e in arb_expr(), u in -2.0f64..2.0, v in -2.0f64..2.0) {
            let a = e.eval(u, v, 2);
            let b = e.eval(u, v, 2);
            match (a, b) {
                (Ok(x), Ok(y)) => prop_assert_eq!(x, y),
                (Err(x), Err(y)) => prop_assert_eq!(x, y),
                _ => prop_assert!(false),
            }
        }
    }
}
