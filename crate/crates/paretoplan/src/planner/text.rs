//! The planning-model text format: a guarded-command language with
//! formula definitions, one module of bounded integer variables, commands
//! `[action] guard -> (v'=e) & ...;`, and a rewards block. The parser is
//! a hand-written recursive descent over a small token stream and reports
//! line/column positions; `parse(serialize(m))` is structurally `m`.

use std::fmt;

use super::PlanError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BinOp {
    Or,
    And,
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Or => "|",
            BinOp::And => "&",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Le => "<=",
            BinOp::Lt => "<",
            BinOp::Ge => ">=",
            BinOp::Gt => ">",
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Or => 1,
            BinOp::And => 2,
            BinOp::Eq | BinOp::Ne | BinOp::Le | BinOp::Lt | BinOp::Ge | BinOp::Gt => 3,
            BinOp::Add | BinOp::Sub => 4,
            BinOp::Mul | BinOp::Div => 5,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Func {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Real(f64),
    Bool(bool),
    Ident(String),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// cond ? then : else (right-associative chains)
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

impl Expr {
    pub fn ident(name: &str) -> Expr {
        Expr::Ident(name.to_string())
    }

    pub fn and(a: Expr, b: Expr) -> Expr {
        Expr::Bin(BinOp::And, Box::new(a), Box::new(b))
    }

    pub fn or(a: Expr, b: Expr) -> Expr {
        Expr::Bin(BinOp::Or, Box::new(a), Box::new(b))
    }

    pub fn eq(a: Expr, b: Expr) -> Expr {
        Expr::Bin(BinOp::Eq, Box::new(a), Box::new(b))
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Ite(..) => 0,
            Expr::Bin(op, ..) => op.precedence(),
            Expr::Not(_) | Expr::Neg(_) => 6,
            _ => 7,
        }
    }

    fn fmt_prec(&self, f: &mut fmt::Formatter<'_>, min_prec: u8) -> fmt::Result {
        let prec = self.precedence();
        if prec < min_prec {
            write!(f, "(")?;
        }
        match self {
            Expr::Int(v) => write!(f, "{v}")?,
            Expr::Real(v) => write!(f, "{v:?}")?,
            Expr::Bool(v) => write!(f, "{v}")?,
            Expr::Ident(name) => write!(f, "{name}")?,
            Expr::Not(e) => {
                write!(f, "!")?;
                e.fmt_prec(f, 6)?;
            }
            Expr::Neg(e) => {
                write!(f, "-")?;
                e.fmt_prec(f, 6)?;
            }
            Expr::Bin(op, a, b) => {
                let p = op.precedence();
                a.fmt_prec(f, p)?;
                write!(f, "{}", op.symbol())?;
                // left-associative: right child needs one level more
                b.fmt_prec(f, p + 1)?;
            }
            Expr::Ite(c, t, e) => {
                c.fmt_prec(f, 1)?;
                write!(f, " ? ")?;
                // a ternary in the then-branch is parenthesized for clarity
                t.fmt_prec(f, 1)?;
                write!(f, " : ")?;
                e.fmt_prec(f, 0)?;
            }
            Expr::Call(func, args) => {
                write!(f, "{}(", if *func == Func::Max { "max" } else { "min" })?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    a.fmt_prec(f, 0)?;
                }
                write!(f, ")")?;
            }
        }
        if prec < min_prec {
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.fmt_prec(f, 0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Formula {
    pub name: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VarDecl {
    pub name: String,
    pub min: i64,
    pub max: i64,
    pub init: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assignment {
    pub var: String,
    pub expr: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub action: String,
    pub guard: Expr,
    pub updates: Vec<Assignment>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RewardItem {
    pub action: String,
    pub guard: Expr,
    pub expr: Expr,
}

/// The product planning model in its syntactic form: the state space is
/// the product of the variable ranges; goal and stop predicates are the
/// formulas of those names.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanningModel {
    pub formulas: Vec<Formula>,
    pub module_name: String,
    pub variables: Vec<VarDecl>,
    pub commands: Vec<Command>,
    pub rewards_name: String,
    pub rewards: Vec<RewardItem>,
}

impl PlanningModel {
    pub fn state_space_size(&self) -> u128 {
        self.variables
            .iter()
            .map(|v| (v.max - v.min + 1) as u128)
            .product()
    }

    pub fn formula(&self, name: &str) -> Option<&Expr> {
        self.formulas.iter().find(|f| f.name == name).map(|f| &f.expr)
    }

    pub fn goal(&self) -> Option<&Expr> {
        self.formula("goal")
    }

    pub fn stop(&self) -> Option<&Expr> {
        self.formula("stop")
    }
}

/// Renders a model in the text format. The output is deterministic and
/// parses back to a structurally equal model.
pub fn serialize_model(model: &PlanningModel) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for f in &model.formulas {
        writeln!(out, "formula {} = {};", f.name, f.expr).unwrap();
    }
    writeln!(out, "module {}", model.module_name).unwrap();
    for v in &model.variables {
        writeln!(out, "  {}:[{}..{}] init {};", v.name, v.min, v.max, v.init).unwrap();
    }
    for c in &model.commands {
        write!(out, "  [{}] {} -> ", c.action, c.guard).unwrap();
        for (i, u) in c.updates.iter().enumerate() {
            if i > 0 {
                write!(out, " & ").unwrap();
            }
            write!(out, "({}'={})", u.var, u.expr).unwrap();
        }
        writeln!(out, ";").unwrap();
    }
    writeln!(out, "endmodule").unwrap();
    writeln!(out, "rewards \"{}\"", model.rewards_name).unwrap();
    for r in &model.rewards {
        writeln!(out, "  [{}] {} : {};", r.action, r.guard, r.expr).unwrap();
    }
    writeln!(out, "endrewards").unwrap();
    out
}

// ---------------------------------------------------------------------
// Lexer
// ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Int(i64),
    Real(f64),
    Str(String),
    LBracket,
    RBracket,
    LParen,
    RParen,
    Semi,
    Colon,
    DotDot,
    Question,
    Bang,
    Amp,
    Pipe,
    Eq,
    Ne,
    Le,
    Lt,
    Ge,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
    Comma,
    Arrow,
    Prime,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Int(v) => write!(f, "'{v}'"),
            Tok::Real(v) => write!(f, "'{v}'"),
            Tok::Str(s) => write!(f, "\"{s}\""),
            Tok::Eof => write!(f, "end of input"),
            other => {
                let s = match other {
                    Tok::LBracket => "[",
                    Tok::RBracket => "]",
                    Tok::LParen => "(",
                    Tok::RParen => ")",
                    Tok::Semi => ";",
                    Tok::Colon => ":",
                    Tok::DotDot => "..",
                    Tok::Question => "?",
                    Tok::Bang => "!",
                    Tok::Amp => "&",
                    Tok::Pipe => "|",
                    Tok::Eq => "=",
                    Tok::Ne => "!=",
                    Tok::Le => "<=",
                    Tok::Lt => "<",
                    Tok::Ge => ">=",
                    Tok::Gt => ">",
                    Tok::Plus => "+",
                    Tok::Minus => "-",
                    Tok::Star => "*",
                    Tok::Slash => "/",
                    Tok::Comma => ",",
                    Tok::Arrow => "->",
                    Tok::Prime => "'",
                    _ => unreachable!(),
                };
                write!(f, "'{s}'")
            }
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, PlanError> {
    let mut out = Vec::new();
    let mut line = 1usize;
    let mut col = 1usize;
    let mut chars = text.chars().peekable();

    macro_rules! push {
        ($tok:expr, $l:expr, $c:expr) => {
            out.push(Spanned { tok: $tok, line: $l, col: $c })
        };
    }

    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars<'_>>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump(&mut chars);
            }
            '/' => {
                bump(&mut chars);
                if chars.peek() == Some(&'/') {
                    while let Some(&n) = chars.peek() {
                        if n == '\n' {
                            break;
                        }
                        bump(&mut chars);
                    }
                } else {
                    push!(Tok::Slash, tl, tc);
                }
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_digit() {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                // a '.' begins a fraction only when not the '..' operator
                let mut is_real = false;
                if chars.peek() == Some(&'.') {
                    let mut ahead = chars.clone();
                    ahead.next();
                    if ahead.peek().is_some_and(|n| n.is_ascii_digit()) {
                        is_real = true;
                        s.push(bump(&mut chars));
                        while let Some(&n) = chars.peek() {
                            if n.is_ascii_digit() {
                                s.push(bump(&mut chars));
                            } else {
                                break;
                            }
                        }
                    }
                }
                if chars.peek() == Some(&'e') || chars.peek() == Some(&'E') {
                    let mut ahead = chars.clone();
                    ahead.next();
                    let signed = matches!(ahead.peek(), Some('+') | Some('-'));
                    if signed {
                        ahead.next();
                    }
                    if ahead.peek().is_some_and(|n| n.is_ascii_digit()) {
                        is_real = true;
                        s.push(bump(&mut chars));
                        if signed {
                            s.push(bump(&mut chars));
                        }
                        while let Some(&n) = chars.peek() {
                            if n.is_ascii_digit() {
                                s.push(bump(&mut chars));
                            } else {
                                break;
                            }
                        }
                    }
                }
                if is_real {
                    let v: f64 = s.parse().map_err(|e| PlanError::Parse {
                        line: tl,
                        col: tc,
                        message: format!("bad real literal {s:?}: {e}"),
                    })?;
                    push!(Tok::Real(v), tl, tc);
                } else {
                    let v: i64 = s.parse().map_err(|e| PlanError::Parse {
                        line: tl,
                        col: tc,
                        message: format!("bad integer literal {s:?}: {e}"),
                    })?;
                    push!(Tok::Int(v), tl, tc);
                }
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut s = String::new();
                while let Some(&n) = chars.peek() {
                    if n.is_ascii_alphanumeric() || n == '_' {
                        s.push(bump(&mut chars));
                    } else {
                        break;
                    }
                }
                push!(Tok::Ident(s), tl, tc);
            }
            '"' => {
                bump(&mut chars);
                let mut s = String::new();
                loop {
                    match chars.peek() {
                        Some(&'"') => {
                            bump(&mut chars);
                            break;
                        }
                        Some(_) => s.push(bump(&mut chars)),
                        None => {
                            return Err(PlanError::Parse {
                                line: tl,
                                col: tc,
                                message: "unterminated string literal".into(),
                            })
                        }
                    }
                }
                push!(Tok::Str(s), tl, tc);
            }
            _ => {
                let c = bump(&mut chars);
                let tok = match c {
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    ';' => Tok::Semi,
                    '?' => Tok::Question,
                    '&' => Tok::Amp,
                    '|' => Tok::Pipe,
                    '+' => Tok::Plus,
                    '*' => Tok::Star,
                    ',' => Tok::Comma,
                    '\'' => Tok::Prime,
                    '=' => Tok::Eq,
                    ':' => Tok::Colon,
                    '.' => {
                        if chars.peek() == Some(&'.') {
                            bump(&mut chars);
                            Tok::DotDot
                        } else {
                            return Err(PlanError::Parse {
                                line: tl,
                                col: tc,
                                message: "unexpected character '.'".into(),
                            });
                        }
                    }
                    '!' => {
                        if chars.peek() == Some(&'=') {
                            bump(&mut chars);
                            Tok::Ne
                        } else {
                            Tok::Bang
                        }
                    }
                    '<' => {
                        if chars.peek() == Some(&'=') {
                            bump(&mut chars);
                            Tok::Le
                        } else {
                            Tok::Lt
                        }
                    }
                    '>' => {
                        if chars.peek() == Some(&'=') {
                            bump(&mut chars);
                            Tok::Ge
                        } else {
                            Tok::Gt
                        }
                    }
                    '-' => {
                        if chars.peek() == Some(&'>') {
                            bump(&mut chars);
                            Tok::Arrow
                        } else {
                            Tok::Minus
                        }
                    }
                    other => {
                        return Err(PlanError::Parse {
                            line: tl,
                            col: tc,
                            message: format!("unexpected character {other:?}"),
                        })
                    }
                };
                push!(tok, tl, tc);
            }
        }
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

// ---------------------------------------------------------------------
// Parser
// ---------------------------------------------------------------------

struct Parser {
    toks: Vec<Spanned>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn next(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        (self.toks[self.pos].line, self.toks[self.pos].col)
    }

    fn error(&self, expected: &str) -> PlanError {
        let (line, col) = self.here();
        PlanError::Parse {
            line,
            col,
            message: format!("expected {expected}, found {}", self.peek()),
        }
    }

    fn expect(&mut self, tok: Tok, expected: &str) -> Result<(), PlanError> {
        if *self.peek() == tok {
            self.next();
            Ok(())
        } else {
            Err(self.error(expected))
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), PlanError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => Err(self.error(&format!("'{kw}'"))),
        }
    }

    fn at_keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn ident(&mut self, what: &str) -> Result<String, PlanError> {
        match self.peek() {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            _ => Err(self.error(what)),
        }
    }

    fn int_literal(&mut self) -> Result<i64, PlanError> {
        let negative = if *self.peek() == Tok::Minus {
            self.next();
            true
        } else {
            false
        };
        match self.peek() {
            Tok::Int(v) => {
                let v = *v;
                self.next();
                Ok(if negative { -v } else { v })
            }
            _ => Err(self.error("an integer literal")),
        }
    }

    fn model(&mut self) -> Result<PlanningModel, PlanError> {
        let mut formulas = Vec::new();
        while self.at_keyword("formula") {
            self.next();
            let name = self.ident("a formula name")?;
            self.expect(Tok::Eq, "'='")?;
            let expr = self.expr()?;
            self.expect(Tok::Semi, "';'")?;
            formulas.push(Formula { name, expr });
        }
        self.expect_keyword("module")?;
        let module_name = self.ident("a module name")?;
        let mut variables = Vec::new();
        let mut commands = Vec::new();
        loop {
            if self.at_keyword("endmodule") {
                self.next();
                break;
            }
            match self.peek() {
                Tok::LBracket => {
                    self.next();
                    let action = self.ident("an action name")?;
                    self.expect(Tok::RBracket, "']'")?;
                    let guard = self.expr()?;
                    self.expect(Tok::Arrow, "'->'")?;
                    let mut updates = vec![self.assignment()?];
                    while *self.peek() == Tok::Amp {
                        self.next();
                        updates.push(self.assignment()?);
                    }
                    self.expect(Tok::Semi, "';'")?;
                    commands.push(Command { action, guard, updates });
                }
                Tok::Ident(_) => {
                    let name = self.ident("a variable name")?;
                    self.expect(Tok::Colon, "':'")?;
                    self.expect(Tok::LBracket, "'['")?;
                    let min = self.int_literal()?;
                    self.expect(Tok::DotDot, "'..'")?;
                    let max = self.int_literal()?;
                    self.expect(Tok::RBracket, "']'")?;
                    self.expect_keyword("init")?;
                    let init = self.int_literal()?;
                    self.expect(Tok::Semi, "';'")?;
                    variables.push(VarDecl { name, min, max, init });
                }
                _ => return Err(self.error("'endmodule', a variable declaration, or a command")),
            }
        }
        self.expect_keyword("rewards")?;
        let rewards_name = match self.peek() {
            Tok::Str(s) => {
                let s = s.clone();
                self.next();
                s
            }
            _ => return Err(self.error("a rewards name string")),
        };
        let mut rewards = Vec::new();
        loop {
            if self.at_keyword("endrewards") {
                self.next();
                break;
            }
            self.expect(Tok::LBracket, "'[' or 'endrewards'")?;
            let action = self.ident("an action name")?;
            self.expect(Tok::RBracket, "']'")?;
            let guard = self.expr()?;
            self.expect(Tok::Colon, "':'")?;
            let expr = self.expr()?;
            self.expect(Tok::Semi, "';'")?;
            rewards.push(RewardItem { action, guard, expr });
        }
        self.expect(Tok::Eof, "end of input")?;
        Ok(PlanningModel { formulas, module_name, variables, commands, rewards_name, rewards })
    }

    fn assignment(&mut self) -> Result<Assignment, PlanError> {
        self.expect(Tok::LParen, "'('")?;
        let var = self.ident("a variable name")?;
        self.expect(Tok::Prime, "'''")?;
        self.expect(Tok::Eq, "'='")?;
        let expr = self.expr()?;
        self.expect(Tok::RParen, "')'")?;
        Ok(Assignment { var, expr })
    }

    fn expr(&mut self) -> Result<Expr, PlanError> {
        let cond = self.or_expr()?;
        if *self.peek() == Tok::Question {
            self.next();
            let then = self.expr()?;
            self.expect(Tok::Colon, "':'")?;
            let else_ = self.expr()?;
            Ok(Expr::Ite(Box::new(cond), Box::new(then), Box::new(else_)))
        } else {
            Ok(cond)
        }
    }

    fn or_expr(&mut self) -> Result<Expr, PlanError> {
        let mut lhs = self.and_expr()?;
        while *self.peek() == Tok::Pipe {
            self.next();
            let rhs = self.and_expr()?;
            lhs = Expr::Bin(BinOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> Result<Expr, PlanError> {
        let mut lhs = self.cmp_expr()?;
        while *self.peek() == Tok::Amp {
            self.next();
            let rhs = self.cmp_expr()?;
            lhs = Expr::Bin(BinOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> Result<Expr, PlanError> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::Eq => BinOp::Eq,
            Tok::Ne => BinOp::Ne,
            Tok::Le => BinOp::Le,
            Tok::Lt => BinOp::Lt,
            Tok::Ge => BinOp::Ge,
            Tok::Gt => BinOp::Gt,
            _ => return Ok(lhs),
        };
        self.next();
        let rhs = self.add_expr()?;
        Ok(Expr::Bin(op, Box::new(lhs), Box::new(rhs)))
    }

    fn add_expr(&mut self) -> Result<Expr, PlanError> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.mul_expr()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn mul_expr(&mut self) -> Result<Expr, PlanError> {
        let mut lhs = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.next();
            let rhs = self.unary_expr()?;
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn unary_expr(&mut self) -> Result<Expr, PlanError> {
        match self.peek() {
            Tok::Bang => {
                self.next();
                Ok(Expr::Not(Box::new(self.unary_expr()?)))
            }
            Tok::Minus => {
                self.next();
                Ok(Expr::Neg(Box::new(self.unary_expr()?)))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Expr, PlanError> {
        match self.peek().clone() {
            Tok::Int(v) => {
                self.next();
                Ok(Expr::Int(v))
            }
            Tok::Real(v) => {
                self.next();
                Ok(Expr::Real(v))
            }
            Tok::LParen => {
                self.next();
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.next();
                match name.as_str() {
                    "true" => Ok(Expr::Bool(true)),
                    "false" => Ok(Expr::Bool(false)),
                    "max" | "min" => {
                        let func = if name == "max" { Func::Max } else { Func::Min };
                        self.expect(Tok::LParen, "'('")?;
                        let mut args = vec![self.expr()?];
                        while *self.peek() == Tok::Comma {
                            self.next();
                            args.push(self.expr()?);
                        }
                        self.expect(Tok::RParen, "')'")?;
                        Ok(Expr::Call(func, args))
                    }
                    _ => Ok(Expr::Ident(name)),
                }
            }
            _ => Err(self.error("an expression")),
        }
    }
}

/// Parses the text format and checks it semantically.
pub fn parse_model(text: &str) -> Result<PlanningModel, PlanError> {
    let toks = lex(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let model = parser.model()?;
    check_model(&model)?;
    Ok(model)
}

/// Collects every identifier referenced by an expression.
fn collect_idents<'a>(expr: &'a Expr, out: &mut Vec<&'a str>) {
    match expr {
        Expr::Ident(name) => out.push(name),
        Expr::Not(e) | Expr::Neg(e) => collect_idents(e, out),
        Expr::Bin(_, a, b) => {
            collect_idents(a, out);
            collect_idents(b, out);
        }
        Expr::Ite(c, t, e) => {
            collect_idents(c, out);
            collect_idents(t, out);
            collect_idents(e, out);
        }
        Expr::Call(_, args) => args.iter().for_each(|a| collect_idents(a, out)),
        _ => {}
    }
}

/// Semantic validation: declared identifiers only, sane variable bounds,
/// rewards only for declared actions.
pub fn check_model(model: &PlanningModel) -> Result<(), PlanError> {
    use std::collections::HashSet;
    let mut declared: HashSet<&str> = HashSet::new();
    for v in &model.variables {
        if !declared.insert(v.name.as_str()) {
            return Err(PlanError::Semantic(format!("duplicate variable {:?}", v.name)));
        }
        if !(v.min <= v.init && v.init <= v.max) {
            return Err(PlanError::Semantic(format!(
                "variable {:?}: init {} outside [{}..{}]",
                v.name, v.init, v.min, v.max
            )));
        }
    }
    for f in &model.formulas {
        if !declared.insert(f.name.as_str()) {
            return Err(PlanError::Semantic(format!("duplicate definition of {:?}", f.name)));
        }
    }

    let check_expr = |expr: &Expr, context: &str| -> Result<(), PlanError> {
        let mut idents = Vec::new();
        collect_idents(expr, &mut idents);
        for name in idents {
            if !declared.contains(name) {
                return Err(PlanError::Semantic(format!(
                    "{context} references undeclared identifier '{name}'"
                )));
            }
        }
        Ok(())
    };

    for f in &model.formulas {
        check_expr(&f.expr, &format!("formula '{}'", f.name))?;
    }
    let vars: HashSet<&str> = model.variables.iter().map(|v| v.name.as_str()).collect();
    let mut actions: HashSet<&str> = HashSet::new();
    for c in &model.commands {
        actions.insert(c.action.as_str());
        check_expr(&c.guard, &format!("guard of command '{}'", c.action))?;
        for u in &c.updates {
            if !vars.contains(u.var.as_str()) {
                return Err(PlanError::Semantic(format!(
                    "command '{}' updates undeclared variable '{}'",
                    c.action, u.var
                )));
            }
            check_expr(&u.expr, &format!("update of command '{}'", c.action))?;
        }
    }
    for r in &model.rewards {
        if !actions.contains(r.action.as_str()) {
            return Err(PlanError::Semantic(format!(
                "reward for undeclared action '{}'",
                r.action
            )));
        }
        check_expr(&r.guard, &format!("reward guard of '{}'", r.action))?;
        check_expr(&r.expr, &format!("reward of '{}'", r.action))?;
    }
    Ok(())
}
