use std::fmt;

use crate::rational::Rational;
use crate::space::Domain;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum UnOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    /// Exact rational division.
    Div,
    /// Integer (Euclidean) division.
    IntDiv,
    Mod,
    BitAnd,
    Max,
    Min,
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    And,
    Or,
    /// Membership of a scalar in an array.
    In,
    NotIn,
}

impl BinOp {
    pub fn is_comparison(self) -> bool {
        matches!(self, BinOp::Eq | BinOp::Ne | BinOp::Lt | BinOp::Le | BinOp::Gt | BinOp::Ge)
    }

    pub fn is_membership(self) -> bool {
        matches!(self, BinOp::In | BinOp::NotIn)
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::IntDiv => "div",
            BinOp::Mod => "mod",
            BinOp::BitAnd => "&",
            BinOp::Max => "max",
            BinOp::Min => "min",
            BinOp::Eq => "=",
            BinOp::Ne => "!=",
            BinOp::Lt => "<",
            BinOp::Le => "<=",
            BinOp::Gt => ">",
            BinOp::Ge => ">=",
            BinOp::And => "and",
            BinOp::Or => "or",
            BinOp::In => "in",
            BinOp::NotIn => "notin",
        }
    }

    /// The comparison whose truth value is the negation of this one.
    pub fn negated(self) -> Option<BinOp> {
        Some(match self {
            BinOp::Eq => BinOp::Ne,
            BinOp::Ne => BinOp::Eq,
            BinOp::Lt => BinOp::Ge,
            BinOp::Le => BinOp::Gt,
            BinOp::Gt => BinOp::Le,
            BinOp::Ge => BinOp::Lt,
            BinOp::In => BinOp::NotIn,
            BinOp::NotIn => BinOp::In,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Func {
    Max,
    Min,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Int(i64),
    Bool(bool),
    /// Non-integer rational literal, produced only by constant folding.
    Rat(Rational),
    Var(String),
    Index(Box<Expr>, Box<Expr>),
    /// `A[lo:hi]`, either bound optional.
    Slice(Box<Expr>, Option<Box<Expr>>, Option<Box<Expr>>),
    /// `A[i := e]`: the array `A` with element `i` replaced by `e`.
    Store(Box<Expr>, Box<Expr>, Box<Expr>),
    Unary(UnOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// `max(a, b, ...)` / `min(a, b, ...)` over scalars.
    Call(Func, Vec<Expr>),
    /// `max(A)` / `min(A)` over the elements of an array.
    Reduce(Func, Box<Expr>),
    Iverson(Box<Expr>),
    Ite(Box<Expr>, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(name: &str) -> Expr {
        Expr::Var(name.to_string())
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary(op, Box::new(l), Box::new(r))
    }

    pub fn not(e: Expr) -> Expr {
        Expr::Unary(UnOp::Not, Box::new(e))
    }

    pub fn iverson(e: Expr) -> Expr {
        Expr::Iverson(Box::new(e))
    }

    pub fn index(a: Expr, i: Expr) -> Expr {
        Expr::Index(Box::new(a), Box::new(i))
    }

    pub fn is_literal(&self) -> bool {
        matches!(self, Expr::Int(_) | Expr::Bool(_) | Expr::Rat(_))
    }

    /// The value of a numeric literal.
    pub fn as_rational(&self) -> Option<Rational> {
        match self {
            Expr::Int(n) => Some(Rational::from_int(*n)),
            Expr::Rat(r) => Some(r.clone()),
            _ => None,
        }
    }

    pub fn from_rational(r: Rational) -> Expr {
        match r.to_i64() {
            Some(n) => Expr::Int(n),
            None => Expr::Rat(r),
        }
    }
}

/// Index set of a quantified MAX.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum IndexSet {
    /// Inclusive range `lo..hi`.
    Range(i64, i64),
    Set(Vec<i64>),
}

impl IndexSet {
    pub fn values(&self) -> Vec<i64> {
        match self {
            IndexSet::Range(lo, hi) => (*lo..=*hi).collect(),
            IndexSet::Set(v) => v.clone(),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            IndexSet::Range(lo, hi) => lo > hi,
            IndexSet::Set(v) => v.is_empty(),
        }
    }

    /// Canonical form: sorted, deduplicated, contiguous sets as ranges.
    pub fn from_values(mut v: Vec<i64>) -> IndexSet {
        v.sort_unstable();
        v.dedup();
        if v.len() >= 2 && v.windows(2).all(|w| w[1] == w[0] + 1) {
            IndexSet::Range(v[0], v[v.len() - 1])
        } else {
            IndexSet::Set(v)
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gain {
    /// A single non-negative expectation.
    Atom(Expr),
    Max(Vec<Gain>),
    Plus(Vec<Gain>),
    /// Standard scalar on the left, multiplied into every action on the right.
    And(Expr, Box<Gain>),
    QuantMax { var: String, set: IndexSet, body: Box<Gain> },
}

impl Gain {
    pub fn atom(e: Expr) -> Gain {
        Gain::Atom(e)
    }

    pub fn zero() -> Gain {
        Gain::Atom(Expr::Int(0))
    }

    pub fn is_standard(&self) -> bool {
        matches!(self, Gain::Atom(_))
    }

    pub fn and(c: Expr, g: Gain) -> Gain {
        Gain::And(c, Box::new(g))
    }

    pub fn plus(a: Gain, b: Gain) -> Gain {
        Gain::Plus(vec![a, b])
    }

    pub fn max(a: Gain, b: Gain) -> Gain {
        Gain::Max(vec![a, b])
    }

    /// Number of nodes, a rough size measure.
    pub fn size(&self) -> usize {
        match self {
            Gain::Atom(_) => 1,
            Gain::Max(v) | Gain::Plus(v) => 1 + v.iter().map(Gain::size).sum::<usize>(),
            Gain::And(_, g) => 1 + g.size(),
            Gain::QuantMax { body, .. } => 1 + body.size(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Visibility {
    Hidden,
    Visible,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decl {
    pub visibility: Visibility,
    pub name: String,
    pub domain: Domain,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum LValue {
    Var(String),
    Elem(String, Expr),
}

impl LValue {
    pub fn name(&self) -> &str {
        match self {
            LValue::Var(n) | LValue::Elem(n, _) => n,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub pos: Pos,
}

impl PartialEq for Stmt {
    fn eq(&self, other: &Stmt) -> bool {
        self.kind == other.kind
    }
}

impl Eq for Stmt {}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Skip,
    /// Simultaneous assignment.
    Assign(Vec<(LValue, Expr)>),
    Seq(Vec<Stmt>),
    If(Expr, Box<Stmt>, Box<Stmt>),
    While { guard: Expr, body: Box<Stmt>, invariant: Option<Gain> },
    Print(Expr),
}

impl Stmt {
    pub fn new(kind: StmtKind) -> Stmt {
        Stmt { kind, pos: Pos::default() }
    }

    pub fn at(kind: StmtKind, pos: Pos) -> Stmt {
        Stmt { kind, pos }
    }

    pub fn skip() -> Stmt {
        Stmt::new(StmtKind::Skip)
    }

    pub fn assign(name: &str, e: Expr) -> Stmt {
        Stmt::new(StmtKind::Assign(vec![(LValue::Var(name.to_string()), e)]))
    }

    pub fn print(e: Expr) -> Stmt {
        Stmt::new(StmtKind::Print(e))
    }

    pub fn seq(v: Vec<Stmt>) -> Stmt {
        Stmt::new(StmtKind::Seq(v))
    }

    pub fn if_(g: Expr, t: Stmt, e: Stmt) -> Stmt {
        Stmt::new(StmtKind::If(g, Box::new(t), Box::new(e)))
    }

    pub fn while_(g: Expr, body: Stmt) -> Stmt {
        Stmt::new(StmtKind::While { guard: g, body: Box::new(body), invariant: None })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub decls: Vec<Decl>,
    pub body: Stmt,
    pub post: Option<Gain>,
}
