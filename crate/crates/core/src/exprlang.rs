//! A small expression language for coefficient functions.
//!
//! ```text
//! expr    = term , { ("+" | "-") , term } ;
//! term    = unary , { ("*" | "/") , unary } ;
//! unary   = "-" , unary | power ;
//! power   = atom , [ "^" , unary ] ;          (* right-associative *)
//! atom    = number | ident | call | "(" , expr , ")" ;
//! call    = ident , "(" , args , ")" ;
//! args    = expr , { "," , expr }
//!         | expr , ";" , expr , ";" , expr ;  (* piecewise only *)
//! number  = digit , { digit } , [ "." , { digit } ] , [ ("e" | "E") , [ "+" | "-" ] , digit , { digit } ] ;
//! ```
//!
//! `x` is the independent variable, `pi` the constant, and every other bare identifier a
//! parameter that must be bound at compile time. `-x^2` parses as `-(x^2)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::jets::{check_point, is_breakpoint, EvalError, Interval, Jet, JetError, SmoothMap};
use crate::specials;

pub type ParamMap = BTreeMap<String, f64>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: {message} (expected {})", .expected.join(", "))]
    Syntax {
        offset: usize,
        message: String,
        expected: Vec<String>,
    },
    #[error("unknown function `{name}` at byte {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("`{name}` at byte {offset} takes {expected} argument(s), got {found}")]
    Arity {
        name: String,
        offset: usize,
        expected: usize,
        found: usize,
    },
    #[error("invalid argument to `{func}`: {message}")]
    InvalidArgument { func: String, message: String },
    #[error("parameter `{name}` is not bound")]
    Unbound { name: String },
    #[error("expression is not defined on the domain: {source}")]
    DomainIncompatible { source: EvalError },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Pow => "^",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Cot,
    Sec,
    Csc,
    Sinh,
    Cosh,
    Tanh,
    Coth,
    Exp,
    Ln,
    Sqrt,
    Pow,
    LnP,
    BesselJ,
    BesselY,
    Dist,
    Piecewise,
}

const FUNCS: [(&str, Func, usize); 19] = [
    ("sin", Func::Sin, 1),
    ("cos", Func::Cos, 1),
    ("tan", Func::Tan, 1),
    ("cot", Func::Cot, 1),
    ("sec", Func::Sec, 1),
    ("csc", Func::Csc, 1),
    ("sinh", Func::Sinh, 1),
    ("cosh", Func::Cosh, 1),
    ("tanh", Func::Tanh, 1),
    ("coth", Func::Coth, 1),
    ("exp", Func::Exp, 1),
    ("ln", Func::Ln, 1),
    ("sqrt", Func::Sqrt, 1),
    ("pow", Func::Pow, 2),
    ("ln_p", Func::LnP, 2),
    ("bessel_j", Func::BesselJ, 2),
    ("bessel_y", Func::BesselY, 2),
    ("dist", Func::Dist, 3),
    ("piecewise", Func::Piecewise, 3),
];

impl Func {
    pub fn name(self) -> &'static str {
        FUNCS.iter().find(|f| f.1 == self).map(|f| f.0).unwrap_or("?")
    }

    fn lookup(name: &str) -> Option<(Func, usize)> {
        FUNCS.iter().find(|f| f.0 == name).map(|f| (f.1, f.2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Pi,
    Param(String),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl fmt::Display for Expr {
    /// Fully parenthesized; reparses to the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "(-{:?})", -v),
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Var => write!(f, "x"),
            Expr::Pi => write!(f, "pi"),
            Expr::Param(p) => write!(f, "{p}"),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, l, r) => write!(f, "({l} {} {r})", op.symbol()),
            Expr::Call(func, args) => {
                let sep = if *func == Func::Piecewise { "; " } else { ", " };
                write!(f, "{}(", func.name())?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl Expr {
    /// Parameter names in first-appearance order, without duplicates.
    pub fn free_params(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Param(p) = e {
                if seen.insert(p.clone()) {
                    out.push(p.clone());
                }
            }
        });
        out
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Neg(e) => e.visit(f),
            Expr::Binary(_, l, r) => {
                l.visit(f);
                r.visit(f);
            }
            Expr::Call(_, args) => args.iter().for_each(|a| a.visit(f)),
            _ => {}
        }
    }

    fn depends_on_x(&self) -> bool {
        let mut dep = false;
        self.visit(&mut |e| dep |= matches!(e, Expr::Var));
        dep
    }
}

// ---------------------------------------------------------------------------------------
// Lexer and parser

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src: src.as_bytes(), pos: 0 };
        let mut out = Vec::new();
        loop {
            while lx.pos < lx.src.len() && lx.src[lx.pos].is_ascii_whitespace() {
                lx.pos += 1;
            }
            let start = lx.pos;
            let Some(&c) = lx.src.get(lx.pos) else {
                out.push((Tok::End, start));
                return Ok(out);
            };
            if c.is_ascii_digit() || (c == b'.' && lx.peek_digit(1)) {
                out.push((lx.number()?, start));
            } else if c.is_ascii_alphabetic() || c == b'_' {
                while lx.pos < lx.src.len()
                    && (lx.src[lx.pos].is_ascii_alphanumeric() || lx.src[lx.pos] == b'_')
                {
                    lx.pos += 1;
                }
                let name = std::str::from_utf8(&lx.src[start..lx.pos]).unwrap_or_default();
                out.push((Tok::Ident(name.to_string()), start));
            } else if b"+-*/^(),;".contains(&c) {
                lx.pos += 1;
                out.push((Tok::Sym(c as char), start));
            } else {
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character {:?}", char::from(c)),
                    expected: expected_operand(),
                });
            }
        }
    }

    fn peek_digit(&self, ahead: usize) -> bool {
        self.src.get(self.pos + ahead).is_some_and(u8::is_ascii_digit)
    }

    fn number(&mut self) -> Result<Tok, ExprError> {
        let start = self.pos;
        while self.peek_digit(0) {
            self.pos += 1;
        }
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            while self.peek_digit(0) {
                self.pos += 1;
            }
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let signed = matches!(self.src.get(self.pos + 1), Some(b'+' | b'-'));
            let digit_at = if signed { 2 } else { 1 };
            if self.peek_digit(digit_at) {
                self.pos += digit_at;
                while self.peek_digit(0) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or_default();
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Tok::Num(v)),
            _ => Err(ExprError::Syntax {
                offset: start,
                message: format!("invalid number literal {text:?}"),
                expected: vec!["finite decimal number".into()],
            }),
        }
    }
}

fn expected_operand() -> Vec<String> {
    ["number", "identifier", "'('", "'-'"].map(String::from).to_vec()
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    i: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.i].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.i].0.clone();
        if self.i + 1 < self.toks.len() {
            self.i += 1;
        }
        t
    }

    fn error(&self, expected: Vec<String>) -> ExprError {
        let message = match self.peek() {
            Tok::End => "unexpected end of input".to_string(),
            Tok::Num(v) => format!("unexpected number {v}"),
            Tok::Ident(s) => format!("unexpected identifier `{s}`"),
            Tok::Sym(c) => format!("unexpected '{c}'"),
        };
        ExprError::Syntax { offset: self.offset(), message, expected }
    }

    fn expect(&mut self, c: char, also: &[&str]) -> Result<(), ExprError> {
        if *self.peek() == Tok::Sym(c) {
            self.bump();
            Ok(())
        } else {
            let mut exp = vec![format!("'{c}'")];
            exp.extend(also.iter().map(|s| s.to_string()));
            Err(self.error(exp))
        }
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr, ExprError> {
        let mut lhs = self.prefix()?;
        loop {
            let (op, lbp, rbp) = match self.peek() {
                Tok::Sym('+') => (BinOp::Add, 1, 2),
                Tok::Sym('-') => (BinOp::Sub, 1, 2),
                Tok::Sym('*') => (BinOp::Mul, 3, 4),
                Tok::Sym('/') => (BinOp::Div, 3, 4),
                Tok::Sym('^') => (BinOp::Pow, 7, 6),
                Tok::Sym(')' | ',' | ';') | Tok::End => break,
                _ => {
                    return Err(self.error(
                        ["operator", "')'", "end of input"].map(String::from).to_vec(),
                    ))
                }
            };
            if lbp < min_bp {
                break;
            }
            self.bump();
            let rhs = self.expr(rbp)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::Sym('-') => {
                self.bump();
                Ok(Expr::Neg(Box::new(self.expr(5)?)))
            }
            Tok::Sym('(') => {
                self.bump();
                let e = self.expr(0)?;
                self.expect(')', &["operator"])?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                if *self.peek() == Tok::Sym('(') {
                    self.bump();
                    self.call(name, offset)
                } else {
                    Ok(match name.as_str() {
                        "x" => Expr::Var,
                        "pi" => Expr::Pi,
                        _ => Expr::Param(name),
                    })
                }
            }
            _ => Err(self.error(expected_operand())),
        }
    }

    fn call(&mut self, name: String, offset: usize) -> Result<Expr, ExprError> {
        let Some((func, arity)) = Func::lookup(&name) else {
            return Err(ExprError::UnknownFunction { name, offset });
        };
        let sep = if func == Func::Piecewise { ';' } else { ',' };
        let mut args = vec![self.expr(0)?];
        while *self.peek() == Tok::Sym(sep) {
            self.bump();
            args.push(self.expr(0)?);
        }
        self.expect(')', &[&format!("'{sep}'"), "operator"])?;
        if args.len() != arity {
            return Err(ExprError::Arity { name, offset, expected: arity, found: args.len() });
        }
        check_call(func, &args)?;
        Ok(Expr::Call(func, args))
    }
}

fn check_call(func: Func, args: &[Expr]) -> Result<(), ExprError> {
    let bad = |message: &str| {
        Err(ExprError::InvalidArgument { func: func.name().into(), message: message.into() })
    };
    match func {
        Func::LnP => match args[0] {
            Expr::Num(p) if p >= 1.0 && p == p.floor() && p <= 16.0 => Ok(()),
            _ => bad("first argument must be an integer literal between 1 and 16"),
        },
        Func::BesselJ | Func::BesselY if args[0].depends_on_x() => {
            bad("the order must not depend on x")
        }
        Func::Dist if args[0].depends_on_x() || args[1].depends_on_x() => {
            bad("the interval ends must not depend on x")
        }
        Func::Dist if args[2] != Expr::Var => bad("the third argument must be x"),
        Func::Piecewise if args[0].depends_on_x() => bad("the breakpoint must not depend on x"),
        _ => Ok(()),
    }
}

/// Parse an expression.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser { toks: Lexer::tokens(src)?, i: 0 };
    let e = p.expr(0)?;
    if *p.peek() != Tok::End {
        return Err(p.error(["operator", "end of input"].map(String::from).to_vec()));
    }
    Ok(e)
}

// ---------------------------------------------------------------------------------------
// Direct scalar interpretation

fn lookup(params: &ParamMap, name: &str) -> Result<f64, ExprError> {
    params
        .get(name)
        .copied()
        .ok_or_else(|| ExprError::Unbound { name: name.to_string() })
}

fn scalar_err(x: f64, what: &str) -> EvalError {
    EvalError::Other { x, message: format!("{what} is undefined here") }
}

/// Evaluate `e` at the point `x` in plain floating point. Independent of the jet
/// machinery, so it doubles as a cross-check for compiled maps.
pub fn eval_scalar(e: &Expr, params: &ParamMap, x: f64) -> Result<f64, EvalError> {
    let rec = |e: &Expr| eval_scalar(e, params, x);
    let unbound = |name: &str| EvalError::Other { x, message: format!("parameter `{name}` is not bound") };
    let v = match e {
        Expr::Num(v) => *v,
        Expr::Var => x,
        Expr::Pi => std::f64::consts::PI,
        Expr::Param(p) => lookup(params, p).map_err(|_| unbound(p))?,
        Expr::Neg(a) => -rec(a)?,
        Expr::Binary(op, l, r) => {
            let (a, b) = (rec(l)?, rec(r)?);
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div if b == 0.0 => return Err(scalar_err(x, "division")),
                BinOp::Div => a / b,
                BinOp::Pow => scalar_pow(a, b).ok_or_else(|| scalar_err(x, "power"))?,
            }
        }
        Expr::Call(func, args) => {
            let a = |i: usize| eval_scalar(&args[i], params, x);
            match func {
                Func::Sin => a(0)?.sin(),
                Func::Cos => a(0)?.cos(),
                Func::Tan => a(0)?.tan(),
                Func::Cot => 1.0 / a(0)?.tan(),
                Func::Sec => 1.0 / a(0)?.cos(),
                Func::Csc => 1.0 / a(0)?.sin(),
                Func::Sinh => a(0)?.sinh(),
                Func::Cosh => a(0)?.cosh(),
                Func::Tanh => a(0)?.tanh(),
                Func::Coth => 1.0 / a(0)?.tanh(),
                Func::Exp => a(0)?.exp(),
                Func::Ln => {
                    let v = a(0)?;
                    if v <= 0.0 {
                        return Err(scalar_err(x, "ln"));
                    }
                    v.ln()
                }
                Func::Sqrt => {
                    let v = a(0)?;
                    if v < 0.0 {
                        return Err(scalar_err(x, "sqrt"));
                    }
                    v.sqrt()
                }
                Func::Pow => scalar_pow(a(0)?, a(1)?).ok_or_else(|| scalar_err(x, "pow"))?,
                Func::LnP => {
                    let p = a(0)? as u32;
                    specials::iter_log(p, a(1)?).map_err(|_| scalar_err(x, "ln_p"))?
                }
                Func::BesselJ => specials::bessel_j(a(0)?, a(1)?).map_err(|_| scalar_err(x, "bessel_j"))?,
                Func::BesselY => specials::bessel_y(a(0)?, a(1)?).map_err(|_| scalar_err(x, "bessel_y"))?,
                Func::Dist => {
                    let (lo, hi) = (a(0)?, a(1)?);
                    (x - lo).min(hi - x)
                }
                Func::Piecewise => {
                    if x < a(0)? {
                        a(1)?
                    } else {
                        a(2)?
                    }
                }
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(scalar_err(x, "expression"))
    }
}

fn scalar_pow(a: f64, b: f64) -> Option<f64> {
    if b == b.floor() && b.abs() <= 64.0 {
        if a == 0.0 && b < 0.0 {
            return None;
        }
        Some(a.powi(b as i32))
    } else if a > 0.0 {
        Some(a.powf(b))
    } else {
        None
    }
}

// ---------------------------------------------------------------------------------------
// Compilation to jet evaluators

#[derive(Debug, Clone)]
enum Node {
    Const(f64),
    X,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    PowInt(Box<Node>, i32),
    PowConst(Box<Node>, f64),
    PowGeneral(Box<Node>, Box<Node>),
    Unary(Func, Box<Node>),
    LnP(u32, Box<Node>),
    BesselJ(f64, Box<Node>),
    BesselY(f64, Box<Node>),
    Dist(f64, f64),
    Piecewise(f64, Box<Node>, Box<Node>),
}

fn const_value(e: &Expr, params: &ParamMap) -> Result<f64, ExprError> {
    // Constant subtrees never touch x, so any point will do.
    eval_scalar(e, params, 0.0).map_err(|source| match source {
        EvalError::Other { .. } => ExprError::InvalidArgument {
            func: "constant".into(),
            message: format!("`{e}` does not evaluate to a finite number"),
        },
        other => ExprError::DomainIncompatible { source: other },
    })
}

fn lower(e: &Expr, params: &ParamMap, breakpoints: &mut Vec<f64>) -> Result<Node, ExprError> {
    if !e.depends_on_x() {
        // Check unbound names first so the error is specific.
        if let Some(p) = e.free_params().into_iter().find(|p| !params.contains_key(p)) {
            return Err(ExprError::Unbound { name: p });
        }
        if !matches!(e, Expr::Call(Func::Piecewise, _)) {
            return Ok(Node::Const(const_value(e, params)?));
        }
    }
    macro_rules! rec {
        ($e:expr) => {
            lower($e, params, breakpoints).map(Box::new)
        };
    }
    Ok(match e {
        Expr::Var => Node::X,
        Expr::Num(_) | Expr::Pi | Expr::Param(_) => unreachable!("constant handled above"),
        Expr::Neg(a) => Node::Neg(rec!(a)?),
        Expr::Binary(op, l, r) => match op {
            BinOp::Add => Node::Add(rec!(l)?, rec!(r)?),
            BinOp::Sub => Node::Sub(rec!(l)?, rec!(r)?),
            BinOp::Mul => Node::Mul(rec!(l)?, rec!(r)?),
            BinOp::Div => Node::Div(rec!(l)?, rec!(r)?),
            BinOp::Pow => lower_pow(l, r, params, breakpoints)?,
        },
        Expr::Call(func, args) => match func {
            Func::Pow => lower_pow(&args[0], &args[1], params, breakpoints)?,
            Func::LnP => Node::LnP(const_value(&args[0], params)? as u32, rec!(&args[1])?),
            Func::BesselJ | Func::BesselY => {
                let nu = const_value(&args[0], params)?;
                if !(0.0..=specials::MAX_NU).contains(&nu) {
                    return Err(ExprError::InvalidArgument {
                        func: func.name().into(),
                        message: format!("order {nu} outside [0, {}]", specials::MAX_NU),
                    });
                }
                if *func == Func::BesselJ {
                    Node::BesselJ(nu, rec!(&args[1])?)
                } else {
                    Node::BesselY(nu, rec!(&args[1])?)
                }
            }
            Func::Dist => {
                let (lo, hi) = (const_value(&args[0], params)?, const_value(&args[1], params)?);
                if lo >= hi {
                    return Err(ExprError::InvalidArgument {
                        func: "dist".into(),
                        message: format!("need a < b, got a = {lo}, b = {hi}"),
                    });
                }
                breakpoints.push(0.5 * (lo + hi));
                Node::Dist(lo, hi)
            }
            Func::Piecewise => {
                let bp = const_value(&args[0], params)?;
                breakpoints.push(bp);
                Node::Piecewise(bp, rec!(&args[1])?, rec!(&args[2])?)
            }
            unary => Node::Unary(*unary, rec!(&args[0])?),
        },
    })
}

fn lower_pow(base: &Expr, exp: &Expr, params: &ParamMap, bps: &mut Vec<f64>) -> Result<Node, ExprError> {
    let b = Box::new(lower(base, params, bps)?);
    if exp.depends_on_x() {
        return Ok(Node::PowGeneral(b, Box::new(lower(exp, params, bps)?)));
    }
    let p = const_value(exp, params)?;
    if p == p.floor() && p.abs() <= 64.0 {
        Ok(Node::PowInt(b, p as i32))
    } else {
        Ok(Node::PowConst(b, p))
    }
}

fn eval_node(n: &Node, x: &Jet) -> Result<Jet, JetError> {
    let order = x.order();
    Ok(match n {
        Node::Const(c) => Jet::constant(*c, order),
        Node::X => *x,
        Node::Neg(a) => -eval_node(a, x)?,
        Node::Add(a, b) => eval_node(a, x)? + eval_node(b, x)?,
        Node::Sub(a, b) => eval_node(a, x)? - eval_node(b, x)?,
        Node::Mul(a, b) => eval_node(a, x)? * eval_node(b, x)?,
        Node::Div(a, b) => eval_node(a, x)?.div(&eval_node(b, x)?)?,
        Node::PowInt(a, p) => eval_node(a, x)?.powi(*p)?,
        Node::PowConst(a, p) => eval_node(a, x)?.powf(*p)?,
        Node::PowGeneral(a, b) => (eval_node(b, x)? * eval_node(a, x)?.ln()?).exp()?,
        Node::Unary(f, a) => {
            let v = eval_node(a, x)?;
            match f {
                Func::Sin => v.sin()?,
                Func::Cos => v.cos()?,
                Func::Tan => v.tan()?,
                Func::Cot => v.cot()?,
                Func::Sec => v.sec()?,
                Func::Csc => v.csc()?,
                Func::Sinh => v.sinh()?,
                Func::Cosh => v.cosh()?,
                Func::Tanh => v.tanh()?,
                Func::Coth => v.coth()?,
                Func::Exp => v.exp()?,
                Func::Ln => v.ln()?,
                Func::Sqrt => v.sqrt()?,
                _ => unreachable!("non-unary function lowered separately"),
            }
        }
        Node::LnP(p, a) => specials::iter_log_jet(*p, &eval_node(a, x)?)?,
        Node::BesselJ(nu, a) => specials::bessel_j_jet(*nu, &eval_node(a, x)?)?,
        Node::BesselY(nu, a) => specials::bessel_y_jet(*nu, &eval_node(a, x)?)?,
        Node::Dist(lo, hi) => {
            if x.value() < 0.5 * (lo + hi) {
                x.add_const(-lo)
            } else {
                (-*x).add_const(*hi)
            }
        }
        Node::Piecewise(bp, l, r) => {
            if x.value() < *bp {
                eval_node(l, x)?
            } else {
                eval_node(r, x)?
            }
        }
    })
}

/// An expression compiled against a parameter map and a domain.
#[derive(Debug, Clone)]
pub struct CompiledExpr {
    expr: Expr,
    node: Node,
    domain: Interval,
    breakpoints: Vec<f64>,
}

impl CompiledExpr {
    pub fn expr(&self) -> &Expr {
        &self.expr
    }
}

impl SmoothMap for CompiledExpr {
    fn domain(&self) -> Interval {
        self.domain
    }

    fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    fn eval(&self, x: f64, order: usize) -> Result<Jet, EvalError> {
        check_point(x, order, self.domain, &self.breakpoints)?;
        eval_node(&self.node, &Jet::variable(x, order))
            .and_then(|j| j.finite("expression"))
            .map_err(|e| EvalError::at(x, e))
    }
}

/// Number of interior points probed for domain compatibility at compile time.
const DOMAIN_PROBES: usize = 64;

/// Bind parameters, collect breakpoints (those from `dist`/`piecewise` plus `extra`), and
/// check that the expression evaluates at a spread of interior points.
pub fn compile(
    expr: &Expr,
    params: &ParamMap,
    domain: Interval,
    extra: &[f64],
) -> Result<CompiledExpr, ExprError> {
    if let Some(p) = expr.free_params().into_iter().find(|p| !params.contains_key(p)) {
        return Err(ExprError::Unbound { name: p });
    }
    let mut breakpoints = extra.to_vec();
    let node = lower(expr, params, &mut breakpoints)?;
    breakpoints.retain(|&b| domain.contains(b));
    breakpoints.sort_by(f64::total_cmp);
    breakpoints.dedup();
    let compiled = CompiledExpr { expr: expr.clone(), node, domain, breakpoints };
    let (lo, hi) = domain.scan_window(1e-3);
    for i in 0..DOMAIN_PROBES {
        let t = (i as f64 + 0.5) / DOMAIN_PROBES as f64;
        let x = lo + t * (hi - lo);
        if is_breakpoint(x, &compiled.breakpoints) {
            continue;
        }
        compiled
            .eval(x, 0)
            .map_err(|source| ExprError::DomainIncompatible { source })?;
    }
    Ok(compiled)
}

/// [`parse`] followed by [`compile`].
pub fn compile_str(
    src: &str,
    params: &ParamMap,
    domain: Interval,
    extra: &[f64],
) -> Result<CompiledExpr, ExprError> {
    compile(&parse(src)?, params, domain, extra)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn params(pairs: &[(&str, f64)]) -> ParamMap {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn power_with_parameter() {
        let e = parse("x^(g/2)").unwrap();
        assert!(matches!(e, Expr::Binary(BinOp::Pow, _, _)));
        assert_eq!(e.free_params(), vec!["g".to_string()]);
    }

    #[test]
    fn trig_hardy_choice() {
        let e = parse("-(1/2)*cot(x)").unwrap();
        let expected = Expr::Binary(
            BinOp::Mul,
            Box::new(Expr::Neg(Box::new(Expr::Binary(
                BinOp::Div,
                Box::new(Expr::Num(1.0)),
                Box::new(Expr::Num(2.0)),
            )))),
            Box::new(Expr::Call(Func::Cot, vec![Expr::Var])),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn dangling_power_is_error_at_offset_two() {
        match parse("x^") {
            Err(ExprError::Syntax { offset, expected, .. }) => {
                assert_eq!(offset, 2);
                assert!(expected.contains(&"number".to_string()));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn precedence() {
        assert_eq!(parse("-x^2").unwrap().to_string(), "(-(x ^ 2.0))");
        assert_eq!(parse("2^3^2").unwrap().to_string(), "(2.0 ^ (3.0 ^ 2.0))");
        assert_eq!(parse("1-2-3").unwrap().to_string(), "((1.0 - 2.0) - 3.0)");
        assert_eq!(parse("-x*y").unwrap().to_string(), "((-x) * y)");
        assert_eq!(parse("x^-2").unwrap().to_string(), "(x ^ (-2.0))");
    }

    #[test]
    fn syntax_errors() {
        assert!(matches!(parse("foo(x)"), Err(ExprError::UnknownFunction { offset: 0, .. })));
        assert!(matches!(parse("sin(x, x)"), Err(ExprError::Arity { .. })));
        assert!(matches!(parse("2 x"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("(x"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("x $ 1"), Err(ExprError::Syntax { offset: 2, .. })));
        assert!(matches!(parse("ln_p(x, x)"), Err(ExprError::InvalidArgument { .. })));
        assert!(matches!(parse("dist(0, 1, 2*x)"), Err(ExprError::InvalidArgument { .. })));
        assert!(matches!(parse("1e999"), Err(ExprError::Syntax { .. })));
    }

    #[test]
    fn gamma_zero_power_is_constant_one() {
        let m = compile_str("x^(gamma/2)", &params(&[("gamma", 0.0)]), Interval::new(0.0, f64::INFINITY), &[])
            .unwrap();
        for x in [0.1, 1.0, 17.0] {
            let j = m.eval(x, 3).unwrap();
            assert_eq!(j.derivs(), vec![1.0, 0.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn cot_at_half_pi() {
        let m = compile_str("cot(x)", &ParamMap::new(), Interval::new(0.0, PI), &[]).unwrap();
        let j = m.eval(PI / 2.0, 1).unwrap();
        assert!(j.value().abs() < 1e-15);
        assert!((j.deriv(1) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn dist_squared_is_piecewise() {
        let m = compile_str("dist(0,1,x)^2", &ParamMap::new(), Interval::new(0.0, 1.0), &[]).unwrap();
        assert_eq!(m.breakpoints(), &[0.5]);
        let l = m.eval(0.2, 2).unwrap();
        assert!((l.value() - 0.04).abs() < 1e-16 && (l.deriv(1) - 0.4).abs() < 1e-15);
        let r = m.eval(0.7, 2).unwrap();
        assert!((r.value() - 0.09).abs() < 1e-16 && (r.deriv(1) + 0.6).abs() < 1e-15);
        assert_eq!(r.deriv(2), 2.0);
        assert!(matches!(m.eval(0.5, 0), Err(EvalError::AtBreakpoint { .. })));
    }

    #[test]
    fn compile_errors() {
        let d = Interval::new(0.0, 1.0);
        assert_eq!(
            compile_str("x^a", &ParamMap::new(), d, &[]).unwrap_err(),
            ExprError::Unbound { name: "a".into() }
        );
        assert!(matches!(
            compile_str("ln(x - 2)", &ParamMap::new(), d, &[]),
            Err(ExprError::DomainIncompatible { .. })
        ));
        assert!(matches!(
            compile_str("sqrt(-1 - x)", &ParamMap::new(), d, &[]),
            Err(ExprError::DomainIncompatible { .. })
        ));
    }

    #[test]
    fn piecewise_and_ln_p() {
        let m = compile_str("piecewise(1; x; 2 - x)", &ParamMap::new(), Interval::new(0.0, 2.0), &[]).unwrap();
        assert_eq!(m.breakpoints(), &[1.0]);
        assert_eq!(m.value(0.5).unwrap(), 0.5);
        assert_eq!(m.value(1.5).unwrap(), 0.5);
        let p = params(&[("eta", 40.0)]);
        let m = compile_str("ln_p(2, eta/x)", &p, Interval::new(0.0, 1.0), &[]).unwrap();
        let v = m.value(0.5).unwrap();
        assert!((v - 80f64.ln().ln()).abs() < 1e-15);
    }
}
