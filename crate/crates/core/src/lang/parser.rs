//! Recursive-descent parser for programs, expressions and gain expressions.
//!
//! Expression precedence, loosest first: `if-then-else`, `or`, `and`,
//! `not`, comparisons and membership (non-associative), infix `max`/`min`,
//! `+ -`, `* / div mod &`, unary minus, then primaries with postfix
//! indexing. Gain operators bind loosest to tightest as `MAX`, `PLUS`,
//! `AND` (right-associative); a quantifier body extends as far right as
//! possible.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lang::ast::*;
use crate::lang::lexer::{tokenize, Tok, Token};
use crate::space::Domain;

struct Parser {
    toks: Vec<Token>,
    at: usize,
    consts: HashMap<String, i64>,
    /// Declared variables, for inferring omitted quantifier ranges.
    decls: HashMap<String, Domain>,
    bound: Vec<String>,
}

type Res<T> = Result<T>;

impl Parser {
    fn new(src: &str) -> Res<Parser> {
        Ok(Parser {
            toks: tokenize(src)?,
            at: 0,
            consts: HashMap::new(),
            decls: HashMap::new(),
            bound: Vec::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.at].tok
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].pos
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].tok.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Res<T> {
        let p = self.pos();
        Err(Error::parse(p.line, p.col, msg))
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Int(n) => format!("`{n}`"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Kw(k) | Tok::Sym(k) => format!("`{k}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn is_kw(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Kw(x) if *x == s)
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, s: &str) -> bool {
        if self.is_kw(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> Res<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", Self::describe(self.peek())))
        }
    }

    fn expect_kw(&mut self, s: &str) -> Res<()> {
        if self.eat_kw(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`, found {}", Self::describe(self.peek())))
        }
    }

    fn ident(&mut self) -> Res<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            t => self.err(format!("expected identifier, found {}", Self::describe(&t))),
        }
    }

    fn const_int(&mut self) -> Res<i64> {
        let p = self.pos();
        let e = self.expr()?;
        match crate::lang::transform::const_int(&e) {
            Some(n) => Ok(n),
            None => Err(Error::parse(p.line, p.col, "expected a constant integer expression")),
        }
    }

    // ---- programs ----

    fn program(&mut self) -> Res<Program> {
        let mut decls = Vec::new();
        loop {
            if self.is_kw("hidden") || self.is_kw("visible") {
                decls.extend(self.decl()?);
            } else if self.is_kw("const") {
                self.const_decl()?;
            } else {
                break;
            }
        }
        for d in &decls {
            self.decls.insert(d.name.clone(), d.domain.clone());
        }
        let body_pos = self.pos();
        let body = if self.is_sym("@post") || matches!(self.peek(), Tok::Eof) {
            Stmt::at(StmtKind::Skip, body_pos)
        } else {
            self.stmts()?
        };
        let post = if self.eat_sym("@post") {
            self.expect_sym("{")?;
            let g = self.gain()?;
            self.expect_sym("}")?;
            Some(g)
        } else {
            None
        };
        if !matches!(self.peek(), Tok::Eof) {
            return self.err(format!("unexpected {}", Self::describe(self.peek())));
        }
        Ok(Program { decls, body, post })
    }

    fn decl(&mut self) -> Res<Vec<Decl>> {
        let visibility = if self.eat_kw("visible") {
            Visibility::Visible
        } else {
            self.expect_kw("hidden")?;
            Visibility::Hidden
        };
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        self.expect_sym(":")?;
        let domain = self.domain()?;
        self.expect_sym(";")?;
        Ok(names
            .into_iter()
            .map(|name| Decl { visibility, name, domain: domain.clone() })
            .collect())
    }

    fn const_decl(&mut self) -> Res<()> {
        self.expect_kw("const")?;
        let name = self.ident()?;
        self.expect_sym("=")?;
        let v = self.const_int()?;
        self.expect_sym(";")?;
        self.consts.insert(name, v);
        Ok(())
    }

    fn domain(&mut self) -> Res<Domain> {
        let p = self.pos();
        let wrap = |r: Result<Domain>| r.map_err(|e| Error::parse(p.line, p.col, e.to_string()));
        let mut d = if self.eat_kw("bool") {
            Domain::Bool
        } else if self.eat_kw("int") {
            self.expect_sym("[")?;
            let lo = self.const_int()?;
            self.expect_sym("..")?;
            let hi = self.const_int()?;
            self.expect_sym("]")?;
            wrap(Domain::int(lo, hi))?
        } else {
            return self.err(format!("expected a type, found {}", Self::describe(self.peek())));
        };
        if self.eat_sym("[") {
            let len = self.const_int()?;
            self.expect_sym("]")?;
            if len < 1 {
                return Err(Error::parse(p.line, p.col, "array length must be at least 1"));
            }
            d = wrap(Domain::array(d, len as usize))?;
        }
        Ok(d)
    }

    fn stmts(&mut self) -> Res<Stmt> {
        let pos = self.pos();
        let mut v = vec![self.stmt()?];
        while self.eat_sym(";") {
            if self.at_block_end() {
                break;
            }
            v.push(self.stmt()?);
        }
        Ok(if v.len() == 1 { v.pop().unwrap() } else { Stmt::at(StmtKind::Seq(v), pos) })
    }

    fn at_block_end(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
            || self.is_kw("fi")
            || self.is_kw("od")
            || self.is_kw("else")
            || self.is_sym("@post")
    }

    fn stmt(&mut self) -> Res<Stmt> {
        let pos = self.pos();
        if self.eat_kw("skip") {
            return Ok(Stmt::at(StmtKind::Skip, pos));
        }
        if self.eat_kw("print") {
            let e = self.expr()?;
            return Ok(Stmt::at(StmtKind::Print(e), pos));
        }
        if self.eat_kw("if") {
            let g = self.expr()?;
            self.expect_kw("then")?;
            let t = self.stmts()?;
            let e = if self.eat_kw("else") { self.stmts()? } else { Stmt::at(StmtKind::Skip, self.pos()) };
            self.expect_kw("fi")?;
            return Ok(Stmt::at(StmtKind::If(g, Box::new(t), Box::new(e)), pos));
        }
        if self.eat_kw("while") {
            let guard = self.expr()?;
            let invariant = if self.eat_kw("invariant") {
                self.expect_sym("{")?;
                let g = self.gain()?;
                self.expect_sym("}")?;
                Some(g)
            } else {
                None
            };
            self.expect_kw("do")?;
            let body = self.stmts()?;
            self.expect_kw("od")?;
            return Ok(Stmt::at(StmtKind::While { guard, body: Box::new(body), invariant }, pos));
        }
        if let Tok::Ident(_) = self.peek() {
            let mut lhs = vec![self.lvalue()?];
            while self.eat_sym(",") {
                lhs.push(self.lvalue()?);
            }
            self.expect_sym(":=")?;
            let mut rhs = vec![self.expr()?];
            while self.eat_sym(",") {
                rhs.push(self.expr()?);
            }
            if lhs.len() != rhs.len() {
                return Err(Error::parse(
                    pos.line,
                    pos.col,
                    format!("{} targets but {} expressions", lhs.len(), rhs.len()),
                ));
            }
            return Ok(Stmt::at(StmtKind::Assign(lhs.into_iter().zip(rhs).collect()), pos));
        }
        self.err(format!("expected a statement, found {}", Self::describe(self.peek())))
    }

    fn lvalue(&mut self) -> Res<LValue> {
        let name = self.ident()?;
        if self.consts.contains_key(&name) {
            return self.err(format!("cannot assign to constant `{name}`"));
        }
        if self.eat_sym("[") {
            let i = self.expr()?;
            self.expect_sym("]")?;
            Ok(LValue::Elem(name, i))
        } else {
            Ok(LValue::Var(name))
        }
    }

    // ---- expressions ----

    fn expr(&mut self) -> Res<Expr> {
        if self.eat_kw("if") {
            let c = self.expr()?;
            self.expect_kw("then")?;
            let a = self.expr()?;
            self.expect_kw("else")?;
            let b = self.expr()?;
            return Ok(Expr::Ite(Box::new(c), Box::new(a), Box::new(b)));
        }
        self.or_expr()
    }

    fn or_expr(&mut self) -> Res<Expr> {
        let mut l = self.and_expr()?;
        while self.eat_kw("or") {
            let r = self.and_expr()?;
            l = Expr::bin(BinOp::Or, l, r);
        }
        Ok(l)
    }

    fn and_expr(&mut self) -> Res<Expr> {
        let mut l = self.not_expr()?;
        while self.eat_kw("and") {
            let r = self.not_expr()?;
            l = Expr::bin(BinOp::And, l, r);
        }
        Ok(l)
    }

    fn not_expr(&mut self) -> Res<Expr> {
        if self.eat_kw("not") {
            let e = self.not_expr()?;
            return Ok(Expr::not(e));
        }
        self.cmp_expr()
    }

    fn cmp_op(&self) -> Option<BinOp> {
        Some(match self.peek() {
            Tok::Sym("=") => BinOp::Eq,
            Tok::Sym("!=") => BinOp::Ne,
            Tok::Sym("<") => BinOp::Lt,
            Tok::Sym("<=") => BinOp::Le,
            Tok::Sym(">") => BinOp::Gt,
            Tok::Sym(">=") => BinOp::Ge,
            Tok::Kw("in") => BinOp::In,
            Tok::Kw("notin") => BinOp::NotIn,
            _ => return None,
        })
    }

    fn cmp_expr(&mut self) -> Res<Expr> {
        let l = self.minmax_expr()?;
        if let Some(op) = self.cmp_op() {
            self.bump();
            let r = self.minmax_expr()?;
            if self.cmp_op().is_some() {
                return self.err("comparisons do not chain; use parentheses");
            }
            return Ok(Expr::bin(op, l, r));
        }
        Ok(l)
    }

    fn minmax_expr(&mut self) -> Res<Expr> {
        let mut l = self.add_expr()?;
        loop {
            let op = if self.is_kw("max") {
                BinOp::Max
            } else if self.is_kw("min") {
                BinOp::Min
            } else {
                break;
            };
            self.bump();
            let r = self.add_expr()?;
            l = Expr::bin(op, l, r);
        }
        Ok(l)
    }

    fn add_expr(&mut self) -> Res<Expr> {
        let mut l = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinOp::Add,
                Tok::Sym("-") => BinOp::Sub,
                _ => break,
            };
            self.bump();
            let r = self.mul_expr()?;
            l = Expr::bin(op, l, r);
        }
        Ok(l)
    }

    fn mul_expr(&mut self) -> Res<Expr> {
        let mut l = self.unary_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinOp::Mul,
                Tok::Sym("/") => BinOp::Div,
                Tok::Sym("&") => BinOp::BitAnd,
                Tok::Kw("div") => BinOp::IntDiv,
                Tok::Kw("mod") => BinOp::Mod,
                _ => break,
            };
            self.bump();
            let r = self.unary_expr()?;
            l = match (op, &l, &r) {
                // `p/q` between literals is a rational literal.
                (BinOp::Div, Expr::Int(p), Expr::Int(q)) if *q != 0 && p % q != 0 => {
                    Expr::Rat(crate::rational::Rational::new(*p, *q))
                }
                _ => Expr::bin(op, l, r),
            };
        }
        Ok(l)
    }

    fn unary_expr(&mut self) -> Res<Expr> {
        if self.eat_sym("-") {
            if let Tok::Int(n) = *self.peek() {
                self.bump();
                return Ok(Expr::Int(-n));
            }
            let e = self.unary_expr()?;
            return Ok(Expr::Unary(UnOp::Neg, Box::new(e)));
        }
        self.primary()
    }

    fn primary(&mut self) -> Res<Expr> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Expr::Int(n))
            }
            Tok::Kw("true") => {
                self.bump();
                Ok(Expr::Bool(true))
            }
            Tok::Kw("false") => {
                self.bump();
                Ok(Expr::Bool(false))
            }
            Tok::Sym("(") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym(")")?;
                Ok(e)
            }
            Tok::Sym("[") => {
                self.bump();
                let e = self.expr()?;
                self.expect_sym("]")?;
                Ok(Expr::iverson(e))
            }
            Tok::Kw(k @ ("max" | "min")) => {
                self.bump();
                let f = if k == "max" { Func::Max } else { Func::Min };
                self.expect_sym("(")?;
                let mut args = vec![self.expr()?];
                while self.eat_sym(",") {
                    args.push(self.expr()?);
                }
                self.expect_sym(")")?;
                if args.len() == 1 {
                    Ok(Expr::Reduce(f, Box::new(args.pop().unwrap())))
                } else {
                    Ok(Expr::Call(f, args))
                }
            }
            Tok::Kw("if") => self.expr(),
            Tok::Ident(name) => {
                self.bump();
                if let Some(&v) = self.consts.get(&name) {
                    if !self.bound.contains(&name) {
                        return Ok(Expr::Int(v));
                    }
                }
                let mut e = Expr::Var(name);
                while self.is_sym("[") {
                    e = self.postfix(e)?;
                }
                Ok(e)
            }
            t => self.err(format!("expected an expression, found {}", Self::describe(&t))),
        }
    }

    fn postfix(&mut self, base: Expr) -> Res<Expr> {
        self.expect_sym("[")?;
        if self.eat_sym(":") {
            let hi = if self.is_sym("]") { None } else { Some(Box::new(self.expr()?)) };
            self.expect_sym("]")?;
            return Ok(Expr::Slice(Box::new(base), None, hi));
        }
        let i = self.expr()?;
        if self.eat_sym(":=") {
            let v = self.expr()?;
            self.expect_sym("]")?;
            return Ok(Expr::Store(Box::new(base), Box::new(i), Box::new(v)));
        }
        if self.eat_sym(":") {
            let hi = if self.is_sym("]") { None } else { Some(Box::new(self.expr()?)) };
            self.expect_sym("]")?;
            return Ok(Expr::Slice(Box::new(base), Some(Box::new(i)), hi));
        }
        self.expect_sym("]")?;
        Ok(Expr::Index(Box::new(base), Box::new(i)))
    }

    // ---- gains ----

    fn gain(&mut self) -> Res<Gain> {
        let mut v = vec![self.plus_gain()?];
        while self.eat_kw("MAX") {
            v.push(self.plus_gain()?);
        }
        Ok(if v.len() == 1 { v.pop().unwrap() } else { Gain::Max(v) })
    }

    fn plus_gain(&mut self) -> Res<Gain> {
        let mut v = vec![self.and_gain()?];
        while self.eat_kw("PLUS") {
            v.push(self.and_gain()?);
        }
        Ok(if v.len() == 1 { v.pop().unwrap() } else { Gain::Plus(v) })
    }

    fn and_gain(&mut self) -> Res<Gain> {
        let l = self.gain_primary()?;
        if self.eat_kw("AND") {
            let r = self.and_gain()?;
            return match l {
                Gain::Atom(e) => Ok(Gain::And(e, Box::new(r))),
                other => Err(Error::NonStandardAndContext(crate::lang::printer::gain_to_string(&other))),
            };
        }
        Ok(l)
    }

    fn gain_follows(&self) -> bool {
        matches!(self.peek(), Tok::Eof | Tok::Kw("MAX") | Tok::Kw("PLUS") | Tok::Kw("AND"))
            || self.is_sym(")")
            || self.is_sym("}")
    }

    fn gain_primary(&mut self) -> Res<Gain> {
        if self.is_kw("MAX") {
            return self.quantifier();
        }
        if self.is_sym("(") {
            let save = self.at;
            if let Ok(e) = self.expr() {
                if self.gain_follows() {
                    return Ok(Gain::Atom(e));
                }
            }
            self.at = save;
            self.expect_sym("(")?;
            let g = self.gain()?;
            self.expect_sym(")")?;
            return Ok(g);
        }
        Ok(Gain::Atom(self.expr()?))
    }

    fn quantifier(&mut self) -> Res<Gain> {
        let pos = self.pos();
        self.expect_kw("MAX")?;
        let var = self.ident()?;
        if self.decls.contains_key(&var) || self.bound.contains(&var) {
            return Err(Error::parse(pos.line, pos.col, format!("bound variable `{var}` shadows another variable")));
        }
        let explicit = if self.eat_kw("in") { Some(self.index_set()?) } else { None };
        self.expect_sym(":")?;
        self.bound.push(var.clone());
        let body = self.gain();
        self.bound.pop();
        let body = body?;
        let set = match explicit {
            Some(s) => s,
            None => match infer_range(&var, &body, &self.decls) {
                Some(s) => s,
                None => {
                    return Err(Error::parse(
                        pos.line,
                        pos.col,
                        format!("cannot infer the range of `{var}`; write `MAX {var} in lo..hi:`"),
                    ))
                }
            },
        };
        if set.is_empty() {
            return Err(Error::RangeEmpty(format!("MAX {var}")));
        }
        Ok(Gain::QuantMax { var, set, body: Box::new(body) })
    }

    fn index_set(&mut self) -> Res<IndexSet> {
        if self.eat_sym("{") {
            let mut v = vec![self.const_int()?];
            while self.eat_sym(",") {
                v.push(self.const_int()?);
            }
            self.expect_sym("}")?;
            let mut sorted = v.clone();
            sorted.sort_unstable();
            sorted.dedup();
            return Ok(IndexSet::Set(sorted));
        }
        let lo = self.const_int()?;
        self.expect_sym("..")?;
        let hi = self.const_int()?;
        Ok(IndexSet::Range(lo, hi))
    }
}

/// Range `0..len-1` of the first array indexed directly by `var` in `g`.
fn infer_range(var: &str, g: &Gain, decls: &HashMap<String, Domain>) -> Option<IndexSet> {
    fn in_expr(var: &str, e: &Expr, decls: &HashMap<String, Domain>) -> Option<IndexSet> {
        if let Expr::Index(a, i) = e {
            if let (Expr::Var(name), Expr::Var(iv)) = (a.as_ref(), i.as_ref()) {
                if iv == var {
                    if let Some(Domain::Array { len, .. }) = decls.get(name) {
                        return Some(IndexSet::Range(0, *len as i64 - 1));
                    }
                }
            }
        }
        let mut found = None;
        crate::lang::transform::for_each_child(e, |c| {
            if found.is_none() {
                found = in_expr(var, c, decls);
            }
        });
        found
    }
    match g {
        Gain::Atom(e) => in_expr(var, e, decls),
        Gain::Max(v) | Gain::Plus(v) => v.iter().find_map(|x| infer_range(var, x, decls)),
        Gain::And(e, b) => in_expr(var, e, decls).or_else(|| infer_range(var, b, decls)),
        Gain::QuantMax { body, .. } => infer_range(var, body, decls),
    }
}

/// Parses a program; declarations are not yet desugared or type checked.
pub fn parse_program(src: &str) -> Result<Program> {
    let mut p = Parser::new(src)?;
    p.program()
}

fn decl_map(decls: &[Decl]) -> HashMap<String, Domain> {
    decls.iter().map(|d| (d.name.clone(), d.domain.clone())).collect()
}

/// Parses a gain expression against a set of declarations.
pub fn parse_gain(src: &str, decls: &[Decl]) -> Result<Gain> {
    let mut p = Parser::new(src)?;
    p.decls = decl_map(decls);
    let g = p.gain()?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.err(format!("unexpected {}", Parser::describe(p.peek())));
    }
    Ok(g)
}

/// Parses a standalone expression.
pub fn parse_expr(src: &str) -> Result<Expr> {
    let mut p = Parser::new(src)?;
    let e = p.expr()?;
    if !matches!(p.peek(), Tok::Eof) {
        return p.err(format!("unexpected {}", Parser::describe(p.peek())));
    }
    Ok(e)
}

/// Parses a declarations-only source, as used for `eval` decls files.
pub fn parse_decls(src: &str) -> Result<Vec<Decl>> {
    let p = parse_program(src)?;
    Ok(p.decls)
}
