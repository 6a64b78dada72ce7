//! User-supplied nonlinearities and weights.
//!
//! Problems are posed with a nonlinearity `h(t, u, v)` (where `v` stands for
//! the reflected state `u(-t)`) and an optional weight `g(s)` on the
//! integration variable. Both arrive as text in the configuration file and
//! are parsed here into immutable expression trees.
//!
//! The grammar is ordinary infix arithmetic:
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?              -- right-associative
//! atom  := number | name | name '(' expr (',' expr)? ')' | '(' expr ')'
//! ```
//!
//! Variables are `t`, `u`, `v` (nonlinearities) and `s` (weights); `pi` and
//! `e` are numeric constants; the functions are `sin`, `cos`, `tan`, `exp`,
//! `log`, `sqrt`, `abs` (one argument) and `min`, `max` (two arguments).
//! Implicit multiplication is not accepted. Syntax errors carry the byte
//! offset of the offending token.
//!
//! Evaluation is total on the declared domain: division by zero, `log` of a
//! non-positive value, `sqrt` of a negative value, and any non-finite
//! intermediate result are reported as evaluation errors instead of letting
//! infinities or NaNs leak into certificates.
//!
//! Box extrema ([`NonlinearityExpr::box_sup`] / [`NonlinearityExpr::box_inf`])
//! are computed by a dense grid scan followed by coordinate-descent
//! refinement. They are careful, deterministic estimates — not rigorous
//! global bounds — and every consumer marks them as such.

use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};

/// Grid resolution per axis for the box-extremum scan (endpoints included).
const GRID_POINTS: usize = 41;
/// Number of best grid points kept as refinement starts.
const REFINE_STARTS: usize = 5;
/// Coordinate-descent terminates once every axis step is below this.
const REFINE_STEP_LIMIT: f64 = 1e-9;
/// Hard cap on refinement evaluations per start (defensive; the descent
/// normally terminates long before this).
const REFINE_EVAL_CAP: usize = 200_000;
/// Maximum parser recursion depth (parentheses, unary chains, call nesting).
const MAX_PARSE_DEPTH: usize = 512;

/// A variable slot an expression may reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    /// `t` — the time argument of a nonlinearity.
    Time,
    /// `u` — the state at `t`.
    StateU,
    /// `v` — the reflected state at `-t`.
    StateV,
    /// `s` — the integration variable of a weight.
    Weight,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::Time => "t",
            Var::StateU => "u",
            Var::StateV => "v",
            Var::Weight => "s",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func1 {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Abs,
}

impl Func1 {
    fn name(self) -> &'static str {
        match self {
            Func1::Sin => "sin",
            Func1::Cos => "cos",
            Func1::Tan => "tan",
            Func1::Exp => "exp",
            Func1::Log => "log",
            Func1::Sqrt => "sqrt",
            Func1::Abs => "abs",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Func2 {
    Min,
    Max,
}

impl Func2 {
    fn name(self) -> &'static str {
        match self {
            Func2::Min => "min",
            Func2::Max => "max",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Ast {
    Number(f64),
    Var(Var),
    Neg(Box<Ast>),
    Binary(BinOp, Box<Ast>, Box<Ast>),
    Call1(Func1, Box<Ast>),
    Call2(Func2, Box<Ast>, Box<Ast>),
}

/// A numeric constant node; negative values are represented as negated
/// positive literals so that the printed form reparses to an identical tree.
fn num(x: f64) -> Ast {
    if x == 0.0 {
        Ast::Number(0.0)
    } else if x < 0.0 {
        Ast::Neg(Box::new(Ast::Number(-x)))
    } else {
        Ast::Number(x)
    }
}

/// A parsed, immutable expression over `t`, `u`, `v` (or `s` for weights).
///
/// Equality is structural; `Display` prints a fully parenthesized form that
/// reparses to a structurally identical tree.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearityExpr {
    ast: Ast,
}

/// Parse an expression from source text.
///
/// On failure the returned [`Error::Syntax`] carries the byte offset of the
/// offending token and a message naming the expected tokens.
pub fn parse(source: &str) -> Result<NonlinearityExpr> {
    let mut parser = Parser::new(source)?;
    let ast = parser.parse_expr()?;
    if !matches!(parser.tok, Tok::Eof) {
        return Err(Error::Syntax {
            offset: parser.tok_pos,
            message: "expected an operator ('+', '-', '*', '/', '^') or end of input".into(),
        });
    }
    Ok(NonlinearityExpr { ast })
}

impl std::str::FromStr for NonlinearityExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}

impl NonlinearityExpr {
    /// Evaluate as a nonlinearity `h(t, u, v)`.
    ///
    /// Errors if the expression references the weight variable `s` or if
    /// evaluation leaves the real domain (division by zero, `log` of a
    /// non-positive value, `sqrt` of a negative value, overflow to a
    /// non-finite value).
    pub fn eval(&self, t: f64, u: f64, v: f64) -> Result<f64> {
        let bindings = Bindings {
            t: Some(t),
            u: Some(u),
            v: Some(v),
            s: None,
        };
        eval_node(&self.ast, &bindings)
    }

    /// Evaluate as a weight `g(s)`.
    ///
    /// Errors if the expression references `t`, `u`, or `v`.
    pub fn eval_weight(&self, s: f64) -> Result<f64> {
        let bindings = Bindings {
            t: None,
            u: None,
            v: None,
            s: Some(s),
        };
        eval_node(&self.ast, &bindings)
    }

    /// Whether the expression is the literal constant `1` (the default
    /// weight, for which closed-form thresholds are available).
    pub fn is_literal_one(&self) -> bool {
        matches!(self.ast, Ast::Number(x) if x == 1.0)
    }

    /// Whether the expression references the weight variable `s`.
    pub fn uses_weight_var(&self) -> bool {
        uses(&self.ast, Var::Weight)
    }

    /// Whether the expression references any of `t`, `u`, `v`.
    pub fn uses_state_vars(&self) -> bool {
        uses(&self.ast, Var::Time) || uses(&self.ast, Var::StateU) || uses(&self.ast, Var::StateV)
    }

    /// The shifted nonlinearity `f(t, u, v) = h(t, u, v) + ω·v`.
    ///
    /// The fixed-point formulation absorbs the reflection term of the
    /// differential equation into the nonlinearity; this produces the
    /// shifted expression as a new tree.
    pub fn shift_to_f(&self, omega: f64) -> NonlinearityExpr {
        let shift = Ast::Binary(
            BinOp::Mul,
            Box::new(num(omega)),
            Box::new(Ast::Var(Var::StateV)),
        );
        NonlinearityExpr {
            ast: Ast::Binary(BinOp::Add, Box::new(self.ast.clone()), Box::new(shift)),
        }
    }

    /// Extend the expression outside a state box by clamping: returns
    /// `f(t, clamp(u), clamp(v))`.
    ///
    /// This is the two-stage constant extension (first in `u`, then in `v`)
    /// that makes a nonlinearity defined on a box total on the whole plane;
    /// inside the box it agrees with `f`, and it is pointwise idempotent.
    pub fn clamp_extend(
        &self,
        u_range: (f64, f64),
        v_range: (f64, f64),
    ) -> Result<NonlinearityExpr> {
        for (name, (lo, hi)) in [("u", u_range), ("v", v_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Domain(format!(
                    "clamp range for {name} must be a finite closed interval, got [{lo}, {hi}]"
                )));
            }
        }
        let clamp = |var: Var, (lo, hi): (f64, f64)| {
            Ast::Call2(
                Func2::Min,
                Box::new(Ast::Call2(
                    Func2::Max,
                    Box::new(Ast::Var(var)),
                    Box::new(num(lo)),
                )),
                Box::new(num(hi)),
            )
        };
        let stage_u = substitute(&self.ast, Var::StateU, &clamp(Var::StateU, u_range));
        let stage_uv = substitute(&stage_u, Var::StateV, &clamp(Var::StateV, v_range));
        Ok(NonlinearityExpr { ast: stage_uv })
    }

    /// Estimated supremum of the expression over a box.
    ///
    /// Dense-grid scan (41 points per non-degenerate axis, endpoints
    /// included) keeps the best [`REFINE_STARTS`] points, each polished by
    /// coordinate descent with step halving down to `1e-9`. The result is
    /// deterministic but **not rigorous**; downstream certificates flag it
    /// accordingly. Evaluation errors anywhere in the box propagate.
    pub fn box_sup(&self, bounds: &Box3) -> Result<BoxExtremum> {
        self.box_extremum(bounds, true)
    }

    /// Estimated infimum of the expression over a box; see [`Self::box_sup`].
    pub fn box_inf(&self, bounds: &Box3) -> Result<BoxExtremum> {
        self.box_extremum(bounds, false)
    }

    fn box_extremum(&self, bounds: &Box3, maximize: bool) -> Result<BoxExtremum> {
        // Internally always maximize `sign * f`.
        let sign = if maximize { 1.0 } else { -1.0 };
        let axes = [bounds.t_range(), bounds.u_range(), bounds.v_range()];
        let counts = axes.map(|(lo, hi)| if hi > lo { GRID_POINTS } else { 1 });
        let node = |axis: usize, i: usize| {
            let (lo, hi) = axes[axis];
            if counts[axis] == 1 {
                lo
            } else if i + 1 == counts[axis] {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (counts[axis] - 1) as f64
            }
        };

        // Grid scan, keeping the best few distinct starting points.
        let mut starts: Vec<([f64; 3], f64)> = Vec::with_capacity(REFINE_STARTS + 1);
        for it in 0..counts[0] {
            let t = node(0, it);
            for iu in 0..counts[1] {
                let u = node(1, iu);
                for iv in 0..counts[2] {
                    let v = node(2, iv);
                    let score = sign * self.eval(t, u, v)?;
                    let pos = starts.partition_point(|&(_, s)| s >= score);
                    if pos < REFINE_STARTS {
                        starts.insert(pos, ([t, u, v], score));
                        starts.truncate(REFINE_STARTS);
                    }
                }
            }
        }

        // Coordinate-descent polish from each start.
        let mut best: Option<([f64; 3], f64)> = None;
        for &(start, start_score) in &starts {
            let (point, score) = self.polish(&axes, start, start_score, sign)?;
            if best.map_or(true, |(_, b)| score > b) {
                best = Some((point, score));
            }
        }
        let (at, score) =
            best.ok_or_else(|| Error::Domain("box extremum over an empty grid".into()))?;
        Ok(BoxExtremum {
            value: sign * score,
            at,
        })
    }

    fn polish(
        &self,
        axes: &[(f64, f64); 3],
        mut point: [f64; 3],
        mut score: f64,
        sign: f64,
    ) -> Result<([f64; 3], f64)> {
        let mut steps =
            axes.map(|(lo, hi)| (hi - lo) / (GRID_POINTS as f64 - 1.0));
        let mut evals = 0usize;
        loop {
            let mut improved = false;
            for axis in 0..3 {
                if steps[axis] <= 0.0 {
                    continue;
                }
                loop {
                    let mut moved = false;
                    for dir in [1.0, -1.0] {
                        let (lo, hi) = axes[axis];
                        let candidate = (point[axis] + dir * steps[axis]).clamp(lo, hi);
                        if candidate == point[axis] {
                            continue;
                        }
                        let mut trial = point;
                        trial[axis] = candidate;
                        let trial_score = sign * self.eval(trial[0], trial[1], trial[2])?;
                        evals += 1;
                        if trial_score > score {
                            point = trial;
                            score = trial_score;
                            moved = true;
                            improved = true;
                        }
                    }
                    if !moved || evals > REFINE_EVAL_CAP {
                        break;
                    }
                }
            }
            if evals > REFINE_EVAL_CAP {
                break;
            }
            if !improved {
                for step in steps.iter_mut() {
                    *step *= 0.5;
                }
                if steps.iter().all(|&s| s < REFINE_STEP_LIMIT) {
                    break;
                }
            }
        }
        Ok((point, score))
    }
}

impl fmt::Display for NonlinearityExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_ast(&self.ast, f)
    }
}

fn write_ast(ast: &Ast, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match ast {
        Ast::Number(x) => {
            // Guard against programmatically built negative or negative-zero
            // literals: print them in a form that reparses structurally.
            if *x < 0.0 || (*x == 0.0 && x.is_sign_negative()) {
                write!(f, "(-{})", -*x)
            } else {
                write!(f, "{x}")
            }
        }
        Ast::Var(v) => f.write_str(v.name()),
        Ast::Neg(a) => {
            f.write_str("(-")?;
            write_ast(a, f)?;
            f.write_str(")")
        }
        Ast::Binary(op, a, b) => {
            f.write_str("(")?;
            write_ast(a, f)?;
            write!(f, " {} ", op.symbol())?;
            write_ast(b, f)?;
            f.write_str(")")
        }
        Ast::Call1(func, a) => {
            write!(f, "{}(", func.name())?;
            write_ast(a, f)?;
            f.write_str(")")
        }
        Ast::Call2(func, a, b) => {
            write!(f, "{}(", func.name())?;
            write_ast(a, f)?;
            f.write_str(", ")?;
            write_ast(b, f)?;
            f.write_str(")")
        }
    }
}

fn uses(ast: &Ast, var: Var) -> bool {
    match ast {
        Ast::Number(_) => false,
        Ast::Var(v) => *v == var,
        Ast::Neg(a) | Ast::Call1(_, a) => uses(a, var),
        Ast::Binary(_, a, b) | Ast::Call2(_, a, b) => uses(a, var) || uses(b, var),
    }
}

fn substitute(ast: &Ast, var: Var, replacement: &Ast) -> Ast {
    match ast {
        Ast::Number(x) => Ast::Number(*x),
        Ast::Var(v) => {
            if *v == var {
                replacement.clone()
            } else {
                Ast::Var(*v)
            }
        }
        Ast::Neg(a) => Ast::Neg(Box::new(substitute(a, var, replacement))),
        Ast::Binary(op, a, b) => Ast::Binary(
            *op,
            Box::new(substitute(a, var, replacement)),
            Box::new(substitute(b, var, replacement)),
        ),
        Ast::Call1(func, a) => Ast::Call1(*func, Box::new(substitute(a, var, replacement))),
        Ast::Call2(func, a, b) => Ast::Call2(
            *func,
            Box::new(substitute(a, var, replacement)),
            Box::new(substitute(b, var, replacement)),
        ),
    }
}

// ---------------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------------

struct Bindings {
    t: Option<f64>,
    u: Option<f64>,
    v: Option<f64>,
    s: Option<f64>,
}

impl Bindings {
    fn lookup(&self, var: Var) -> Result<f64> {
        let slot = match var {
            Var::Time => self.t,
            Var::StateU => self.u,
            Var::StateV => self.v,
            Var::Weight => self.s,
        };
        slot.ok_or_else(|| {
            let context = if self.s.is_some() {
                "a weight g(s)"
            } else {
                "a nonlinearity h(t, u, v)"
            };
            Error::Eval(format!(
                "variable '{}' cannot appear in {context}",
                var.name()
            ))
        })
    }
}

fn eval_node(ast: &Ast, bindings: &Bindings) -> Result<f64> {
    let value = match ast {
        Ast::Number(x) => *x,
        Ast::Var(v) => bindings.lookup(*v)?,
        Ast::Neg(a) => -eval_node(a, bindings)?,
        Ast::Binary(op, a, b) => {
            let x = eval_node(a, bindings)?;
            let y = eval_node(b, bindings)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y == 0.0 {
                        return Err(Error::Eval("division by zero".into()));
                    }
                    x / y
                }
                BinOp::Pow => x.powf(y),
            }
        }
        Ast::Call1(func, a) => {
            let x = eval_node(a, bindings)?;
            match func {
                Func1::Sin => x.sin(),
                Func1::Cos => x.cos(),
                Func1::Tan => x.tan(),
                Func1::Exp => x.exp(),
                Func1::Log => {
                    if x <= 0.0 {
                        return Err(Error::Eval(format!("log of non-positive value {x}")));
                    }
                    x.ln()
                }
                Func1::Sqrt => {
                    if x < 0.0 {
                        return Err(Error::Eval(format!("sqrt of negative value {x}")));
                    }
                    x.sqrt()
                }
                Func1::Abs => x.abs(),
            }
        }
        Ast::Call2(func, a, b) => {
            let x = eval_node(a, bindings)?;
            let y = eval_node(b, bindings)?;
            match func {
                Func2::Min => x.min(y),
                Func2::Max => x.max(y),
            }
        }
    };
    if !value.is_finite() {
        let what = match ast {
            Ast::Binary(op, _, _) => format!("operator '{}'", op.symbol()),
            Ast::Call1(func, _) => format!("function '{}'", func.name()),
            Ast::Call2(func, _, _) => format!("function '{}'", func.name()),
            _ => "expression".into(),
        };
        return Err(Error::Eval(format!(
            "non-finite value produced by {what}"
        )));
    }
    Ok(value)
}

// ---------------------------------------------------------------------------
// Boxes
// ---------------------------------------------------------------------------

/// A closed axis-aligned box in `(t, u, v)` space.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Box3 {
    t_range: (f64, f64),
    u_range: (f64, f64),
    v_range: (f64, f64),
}

impl Box3 {
    /// Build a box from closed per-axis intervals; each must be finite with
    /// lower bound ≤ upper bound (degenerate intervals are allowed).
    pub fn new(t_range: (f64, f64), u_range: (f64, f64), v_range: (f64, f64)) -> Result<Box3> {
        for (name, (lo, hi)) in [("t", t_range), ("u", u_range), ("v", v_range)] {
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Domain(format!(
                    "{name}-range must be a finite closed interval, got [{lo}, {hi}]"
                )));
            }
        }
        Ok(Box3 {
            t_range,
            u_range,
            v_range,
        })
    }

    pub fn t_range(&self) -> (f64, f64) {
        self.t_range
    }

    pub fn u_range(&self) -> (f64, f64) {
        self.u_range
    }

    pub fn v_range(&self) -> (f64, f64) {
        self.v_range
    }
}

/// A box extremum estimate: the value and a point attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoxExtremum {
    /// The estimated extremal value.
    pub value: f64,
    /// The point `(t, u, v)` at which the scan attained it.
    pub at: [f64; 3],
}

// ---------------------------------------------------------------------------
// Lexer and parser
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok<'a> {
    Num(f64),
    Ident(&'a str),
    Sym(u8),
    Eof,
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
    tok: Tok<'a>,
    tok_pos: usize,
    depth: usize,
}

impl<'a> Parser<'a> {
    fn new(src: &'a str) -> Result<Parser<'a>> {
        let mut parser = Parser {
            src,
            pos: 0,
            tok: Tok::Eof,
            tok_pos: 0,
            depth: 0,
        };
        parser.bump()?;
        Ok(parser)
    }

    /// Advance to the next token.
    fn bump(&mut self) -> Result<()> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_pos = self.pos;
        if self.pos >= bytes.len() {
            self.tok = Tok::Eof;
            return Ok(());
        }
        let b = bytes[self.pos];
        match b {
            b'+' | b'-' | b'*' | b'/' | b'^' | b'(' | b')' | b',' => {
                self.pos += 1;
                self.tok = Tok::Sym(b);
            }
            b'0'..=b'9' => self.lex_number()?,
            b'.' if self.pos + 1 < bytes.len() && bytes[self.pos + 1].is_ascii_digit() => {
                self.lex_number()?
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = self.pos;
                while self.pos < bytes.len()
                    && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                self.tok = Tok::Ident(&self.src[start..self.pos]);
            }
            _ => {
                let ch = self.src[self.pos..].chars().next().unwrap_or('?');
                return Err(Error::Syntax {
                    offset: self.pos,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        }
        Ok(())
    }

    fn lex_number(&mut self) -> Result<()> {
        let bytes = self.src.as_bytes();
        let start = self.pos;
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < bytes.len() && bytes[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        // Exponent, with backtracking: "2e3" is one number, but in "2e" the
        // trailing 'e' is left for the identifier lexer (and the parser will
        // then reject the implicit product).
        if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < bytes.len() && (bytes[self.pos] == b'+' || bytes[self.pos] == b'-') {
                self.pos += 1;
            }
            if self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = mark;
            }
        }
        let text = &self.src[start..self.pos];
        let value: f64 = text.parse().map_err(|_| Error::Syntax {
            offset: start,
            message: format!("malformed numeric literal '{text}'"),
        })?;
        if !value.is_finite() {
            return Err(Error::Syntax {
                offset: start,
                message: format!("numeric literal '{text}' overflows a double"),
            });
        }
        self.tok = Tok::Num(value);
        Ok(())
    }

    fn expect_sym(&mut self, sym: u8, message: &str) -> Result<()> {
        if self.tok == Tok::Sym(sym) {
            self.bump()
        } else {
            Err(Error::Syntax {
                offset: self.tok_pos,
                message: message.into(),
            })
        }
    }

    fn enter(&mut self) -> Result<()> {
        self.depth += 1;
        if self.depth > MAX_PARSE_DEPTH {
            return Err(Error::Syntax {
                offset: self.tok_pos,
                message: "expression is too deeply nested".into(),
            });
        }
        Ok(())
    }

    fn parse_expr(&mut self) -> Result<Ast> {
        self.enter()?;
        let mut lhs = self.parse_term()?;
        loop {
            let op = match self.tok {
                Tok::Sym(b'+') => BinOp::Add,
                Tok::Sym(b'-') => BinOp::Sub,
                _ => break,
            };
            self.bump()?;
            let rhs = self.parse_term()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn parse_term(&mut self) -> Result<Ast> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.tok {
                Tok::Sym(b'*') => BinOp::Mul,
                Tok::Sym(b'/') => BinOp::Div,
                _ => break,
            };
            self.bump()?;
            let rhs = self.parse_unary()?;
            lhs = Ast::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Ast> {
        self.enter()?;
        let ast = if self.tok == Tok::Sym(b'-') {
            self.bump()?;
            Ast::Neg(Box::new(self.parse_unary()?))
        } else {
            self.parse_power()?
        };
        self.depth -= 1;
        Ok(ast)
    }

    fn parse_power(&mut self) -> Result<Ast> {
        let base = self.parse_atom()?;
        if self.tok == Tok::Sym(b'^') {
            self.bump()?;
            // Right-associative; the exponent may itself carry a unary minus.
            let exponent = self.parse_unary()?;
            Ok(Ast::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)))
        } else {
            Ok(base)
        }
    }

    fn parse_atom(&mut self) -> Result<Ast> {
        match self.tok {
            Tok::Num(x) => {
                self.bump()?;
                Ok(Ast::Number(x))
            }
            Tok::Ident(name) => {
                let offset = self.tok_pos;
                self.bump()?;
                match name {
                    "t" => Ok(Ast::Var(Var::Time)),
                    "u" => Ok(Ast::Var(Var::StateU)),
                    "v" => Ok(Ast::Var(Var::StateV)),
                    "s" => Ok(Ast::Var(Var::Weight)),
                    "pi" => Ok(Ast::Number(std::f64::consts::PI)),
                    "e" => Ok(Ast::Number(std::f64::consts::E)),
                    "sin" => self.parse_call1(Func1::Sin),
                    "cos" => self.parse_call1(Func1::Cos),
                    "tan" => self.parse_call1(Func1::Tan),
                    "exp" => self.parse_call1(Func1::Exp),
                    "log" => self.parse_call1(Func1::Log),
                    "sqrt" => self.parse_call1(Func1::Sqrt),
                    "abs" => self.parse_call1(Func1::Abs),
                    "min" => self.parse_call2(Func2::Min),
                    "max" => self.parse_call2(Func2::Max),
                    _ => Err(Error::Syntax {
                        offset,
                        message: format!(
                            "unknown identifier '{name}' (variables are t, u, v, s; \
                             constants pi, e; functions sin, cos, tan, exp, log, sqrt, \
                             abs, min, max)"
                        ),
                    }),
                }
            }
            Tok::Sym(b'(') => {
                self.bump()?;
                let inner = self.parse_expr()?;
                self.expect_sym(b')', "expected ')'")?;
                Ok(inner)
            }
            _ => Err(Error::Syntax {
                offset: self.tok_pos,
                message: "expected a number, a variable, a function call, '-', or '('".into(),
            }),
        }
    }

    fn parse_call1(&mut self, func: Func1) -> Result<Ast> {
        self.expect_sym(b'(', &format!("expected '(' after function '{}'", func.name()))?;
        let arg = self.parse_expr()?;
        if self.tok == Tok::Sym(b',') {
            return Err(Error::Syntax {
                offset: self.tok_pos,
                message: format!("function '{}' takes exactly one argument", func.name()),
            });
        }
        self.expect_sym(b')', &format!("expected ')' to close '{}(...'", func.name()))?;
        Ok(Ast::Call1(func, Box::new(arg)))
    }

    fn parse_call2(&mut self, func: Func2) -> Result<Ast> {
        self.expect_sym(b'(', &format!("expected '(' after function '{}'", func.name()))?;
        let first = self.parse_expr()?;
        self.expect_sym(
            b',',
            &format!("expected ',' — function '{}' takes two arguments", func.name()),
        )?;
        let second = self.parse_expr()?;
        self.expect_sym(b')', &format!("expected ')' to close '{}(...'", func.name()))?;
        Ok(Ast::Call2(func, Box::new(first), Box::new(second)))
    }
}
