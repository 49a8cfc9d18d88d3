use std::fmt::Write;

use super::ast::*;

/// Renders a program back to source. Every executable statement carries
/// an explicit `#n:` label so re-parsing reproduces the same numbering.
pub fn pretty(program: &Program) -> String {
    let mut out = String::new();
    for class in &program.classes {
        let _ = writeln!(out, "class {} {{", class.name);
        if !class.members.is_empty() {
            let _ = writeln!(out, "    int {};", class.members.join(", "));
        }
        out.push_str("public:\n");
        for m in &class.methods {
            let formals: Vec<String> = m
                .formals
                .iter()
                .map(|f| format!("{}{} {}", f.ty, if f.by_ref { " &" } else { "" }, f.name))
                .collect();
            let _ = writeln!(out, "    {} {}({}) {{", m.ret, m.name, formals.join(", "));
            body(&mut out, &m.body, 2);
            out.push_str("    }\n");
        }
        out.push_str("};\n\n");
    }
    out.push_str("void main() {\n");
    body(&mut out, &program.main, 1);
    out.push_str("}\n");
    out
}

fn indent(out: &mut String, depth: usize) {
    for _ in 0..depth {
        out.push_str("    ");
    }
}

fn body(out: &mut String, stmts: &[Stmt], depth: usize) {
    for s in stmts {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    indent(out, depth);
    if let Some(id) = s.id {
        let _ = write!(out, "#{id}: ");
    }
    match &s.kind {
        StmtKind::Assign { target, value } => {
            let _ = writeln!(out, "{target} = {};", expr(value));
        }
        StmtKind::Input { target } => {
            let _ = writeln!(out, "cin >> {target};");
        }
        StmtKind::Output { value } => {
            let _ = writeln!(out, "cout << {};", expr(value));
        }
        StmtKind::If {
            cond,
            then_body,
            else_body,
        } => {
            let _ = writeln!(out, "if ({}) {{", expr(cond));
            body(out, then_body, depth + 1);
            indent(out, depth);
            if else_body.is_empty() {
                out.push_str("}\n");
            } else {
                out.push_str("} else {\n");
                body(out, else_body, depth + 1);
                indent(out, depth);
                out.push_str("}\n");
            }
        }
        StmtKind::While { cond, body: inner } => {
            let _ = writeln!(out, "while ({}) {{", expr(cond));
            body(out, inner, depth + 1);
            indent(out, depth);
            out.push_str("}\n");
        }
        StmtKind::Call {
            target,
            receiver,
            method,
            args,
            ..
        } => {
            if let Some(t) = target {
                let _ = write!(out, "{t} = ");
            }
            let args: Vec<String> = args.iter().map(expr).collect();
            let _ = writeln!(out, "{receiver}.{method}({});", args.join(", "));
        }
        StmtKind::Return { value } => match value {
            Some(v) => {
                let _ = writeln!(out, "return {};", expr(v));
            }
            None => out.push_str("return;\n"),
        },
        StmtKind::VarDecl { ty, names } => {
            let _ = writeln!(out, "{ty} {};", names.join(", "));
        }
    }
}

pub(crate) fn expr(e: &Expr) -> String {
    match e {
        Expr::Int(n) => n.to_string(),
        Expr::Str(s) => format!("\"{s}\""),
        Expr::Var(lv) => lv.to_string(),
        Expr::Neg(inner) => match inner.as_ref() {
            Expr::Int(_) | Expr::Var(_) | Expr::Neg(_) => format!("-{}", expr(inner)),
            _ => format!("-({})", expr(inner)),
        },
        Expr::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            // left-associative: a right operand of equal precedence needs parens
            let l = operand(lhs, prec, false);
            let r = operand(rhs, prec, true);
            format!("{l} {} {r}", op.symbol())
        }
    }
}

fn operand(e: &Expr, parent: u8, right: bool) -> String {
    match e {
        Expr::Binary(op, ..)
            if op.precedence() < parent || (right && op.precedence() == parent) =>
        {
            format!("({})", expr(e))
        }
        _ => expr(e),
    }
}

/// One-line rendering of a statement's own text, without nested bodies.
pub fn stmt_head(s: &Stmt) -> String {
    match &s.kind {
        StmtKind::If { cond, .. } => format!("if ({})", expr(cond)),
        StmtKind::While { cond, .. } => format!("while ({})", expr(cond)),
        _ => {
            let mut out = String::new();
            stmt(&mut out, s, 0);
            let text = out.trim_end();
            match s.id {
                Some(id) => text.trim_start_matches(&format!("#{id}: ")).to_string(),
                None => text.to_string(),
            }
        }
    }
}
