//! Pretty-printer producing source text that parses back to the same tree.

use std::fmt::Write;

use crate::lang::ast::*;

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Ite(..) => 0,
        Expr::Binary(op, ..) => match op {
            BinOp::Or => 1,
            BinOp::And => 2,
            op if op.is_comparison() || op.is_membership() => 4,
            BinOp::Max | BinOp::Min => 5,
            BinOp::Add | BinOp::Sub => 6,
            _ => 7,
        },
        Expr::Unary(UnOp::Not, _) => 3,
        Expr::Unary(UnOp::Neg, _) => 8,
        Expr::Rat(_) => 7,
        Expr::Int(n) if *n < 0 => 8,
        _ => 9,
    }
}

fn write_expr(out: &mut String, e: &Expr, min: u8) {
    let p = prec(e);
    let paren = p < min;
    if paren {
        out.push('(');
    }
    match e {
        Expr::Int(n) => write!(out, "{n}").unwrap(),
        Expr::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Expr::Rat(r) => write!(out, "{}/{}", r.numer(), r.denom()).unwrap(),
        Expr::Var(v) => out.push_str(v),
        Expr::Index(a, i) => {
            write_expr(out, a, 9);
            out.push('[');
            write_expr(out, i, 0);
            out.push(']');
        }
        Expr::Slice(a, lo, hi) => {
            write_expr(out, a, 9);
            out.push('[');
            if let Some(lo) = lo {
                write_expr(out, lo, 0);
            }
            out.push(':');
            if let Some(hi) = hi {
                write_expr(out, hi, 0);
            }
            out.push(']');
        }
        Expr::Store(a, i, v) => {
            write_expr(out, a, 9);
            out.push('[');
            write_expr(out, i, 0);
            out.push_str(" := ");
            write_expr(out, v, 0);
            out.push(']');
        }
        Expr::Unary(UnOp::Not, x) => {
            out.push_str("not ");
            write_expr(out, x, 3);
        }
        Expr::Unary(UnOp::Neg, x) => {
            out.push('-');
            if matches!(**x, Expr::Int(n) if n >= 0) {
                out.push('(');
                write_expr(out, x, 0);
                out.push(')');
            } else {
                write_expr(out, x, 8);
            }
        }
        Expr::Binary(op, l, r) => {
            let (lm, rm) = if op.is_comparison() || op.is_membership() { (p + 1, p + 1) } else { (p, p + 1) };
            write_expr(out, l, lm);
            write!(out, " {} ", op.symbol()).unwrap();
            write_expr(out, r, rm);
        }
        Expr::Call(f, args) => {
            out.push_str(func_name(*f));
            out.push('(');
            for (k, a) in args.iter().enumerate() {
                if k > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
        Expr::Reduce(f, a) => {
            out.push_str(func_name(*f));
            out.push('(');
            write_expr(out, a, 0);
            out.push(')');
        }
        Expr::Iverson(b) => {
            out.push('[');
            write_expr(out, b, 0);
            out.push(']');
        }
        Expr::Ite(c, a, b) => {
            out.push_str("if ");
            write_expr(out, c, 0);
            out.push_str(" then ");
            write_expr(out, a, 0);
            out.push_str(" else ");
            write_expr(out, b, 0);
        }
    }
    if paren {
        out.push(')');
    }
}

fn func_name(f: Func) -> &'static str {
    match f {
        Func::Max => "max",
        Func::Min => "min",
    }
}

pub fn expr_to_string(e: &Expr) -> String {
    let mut s = String::new();
    write_expr(&mut s, e, 0);
    s
}

pub fn index_set_to_string(s: &IndexSet) -> String {
    match s {
        IndexSet::Range(lo, hi) => format!("{lo}..{hi}"),
        IndexSet::Set(v) => {
            let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
            format!("{{{}}}", items.join(", "))
        }
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Ctx {
    Root,
    MaxArg,
    PlusArg,
    AndRight,
}

fn write_gain(out: &mut String, g: &Gain, ctx: Ctx) {
    let paren = match g {
        Gain::Atom(_) => false,
        Gain::And(..) => false,
        Gain::Max(_) => ctx != Ctx::Root,
        Gain::Plus(_) => matches!(ctx, Ctx::PlusArg | Ctx::AndRight),
        Gain::QuantMax { .. } => ctx != Ctx::Root,
    };
    if paren {
        out.push('(');
    }
    match g {
        Gain::Atom(e) => write_expr(out, e, 0),
        Gain::Max(v) => {
            for (k, x) in v.iter().enumerate() {
                if k > 0 {
                    out.push_str(" MAX ");
                }
                write_gain(out, x, Ctx::MaxArg);
            }
        }
        Gain::Plus(v) => {
            for (k, x) in v.iter().enumerate() {
                if k > 0 {
                    out.push_str(" PLUS ");
                }
                write_gain(out, x, Ctx::PlusArg);
            }
        }
        Gain::And(e, x) => {
            write_expr(out, e, 0);
            out.push_str(" AND ");
            write_gain(out, x, Ctx::AndRight);
        }
        Gain::QuantMax { var, set, body } => {
            write!(out, "MAX {var} in {}: ", index_set_to_string(set)).unwrap();
            write_gain(out, body, Ctx::Root);
        }
    }
    if paren {
        out.push(')');
    }
}

pub fn gain_to_string(g: &Gain) -> String {
    let mut s = String::new();
    write_gain(&mut s, g, Ctx::Root);
    s
}

fn write_stmt(out: &mut String, s: &Stmt, indent: usize) {
    let pad = "  ".repeat(indent);
    match &s.kind {
        StmtKind::Skip => write!(out, "{pad}skip").unwrap(),
        StmtKind::Assign(pairs) => {
            let lhs: Vec<String> = pairs
                .iter()
                .map(|(l, _)| match l {
                    LValue::Var(n) => n.clone(),
                    LValue::Elem(n, i) => format!("{n}[{}]", expr_to_string(i)),
                })
                .collect();
            let rhs: Vec<String> = pairs.iter().map(|(_, e)| expr_to_string(e)).collect();
            write!(out, "{pad}{} := {}", lhs.join(", "), rhs.join(", ")).unwrap();
        }
        StmtKind::Seq(v) => {
            for (k, x) in v.iter().enumerate() {
                if k > 0 {
                    out.push_str(";\n");
                }
                write_stmt(out, x, indent);
            }
        }
        StmtKind::If(g, t, e) => {
            writeln!(out, "{pad}if {} then", expr_to_string(g)).unwrap();
            write_stmt(out, t, indent + 1);
            out.push('\n');
            if e.kind != StmtKind::Skip {
                writeln!(out, "{pad}else").unwrap();
                write_stmt(out, e, indent + 1);
                out.push('\n');
            }
            write!(out, "{pad}fi").unwrap();
        }
        StmtKind::While { guard, body, invariant } => {
            write!(out, "{pad}while {}", expr_to_string(guard)).unwrap();
            if let Some(inv) = invariant {
                write!(out, " invariant {{{}}}", gain_to_string(inv)).unwrap();
            }
            out.push_str(" do\n");
            write_stmt(out, body, indent + 1);
            write!(out, "\n{pad}od").unwrap();
        }
        StmtKind::Print(e) => write!(out, "{pad}print {}", expr_to_string(e)).unwrap(),
    }
}

pub fn stmt_to_string(s: &Stmt) -> String {
    let mut out = String::new();
    write_stmt(&mut out, s, 0);
    out
}

/// One-line summary of a statement, for traces.
pub fn stmt_head(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::If(g, ..) => format!("if {} then ...", expr_to_string(g)),
        StmtKind::While { guard, .. } => format!("while {} do ...", expr_to_string(guard)),
        StmtKind::Seq(_) => "...".to_string(),
        _ => stmt_to_string(s),
    }
}

pub fn program_to_string(p: &Program) -> String {
    let mut out = String::new();
    for d in &p.decls {
        let vis = match d.visibility {
            Visibility::Hidden => "hidden",
            Visibility::Visible => "visible",
        };
        writeln!(out, "{vis} {}: {};", d.name, d.domain).unwrap();
    }
    write_stmt(&mut out, &p.body, 0);
    out.push('\n');
    if let Some(g) = &p.post {
        writeln!(out, "@post {{ {} }}", gain_to_string(g)).unwrap();
    }
    out
}
