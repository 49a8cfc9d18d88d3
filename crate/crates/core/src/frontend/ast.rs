use std::fmt;

/// Statement number. Executable statements are numbered `1..=stmt_count`.
pub type StmtId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// Static type tag of a variable, formal or actual argument.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Type {
    Int,
    Class(String),
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("int"),
            Type::Class(name) => f.write_str(name),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReturnType {
    Void,
    Int,
    /// Class-typed results are accepted syntactically but carry no value;
    /// such methods behave like `void` methods that mutate their receiver.
    Class(String),
}

impl fmt::Display for ReturnType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ReturnType::Void => f.write_str("void"),
            ReturnType::Int => f.write_str("int"),
            ReturnType::Class(name) => f.write_str(name),
        }
    }
}

/// Dispatch key of a method: name plus exact ordered parameter types.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature {
    pub name: String,
    pub params: Vec<Type>,
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}(", self.name)?;
        for (i, ty) in self.params.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{ty}")?;
        }
        f.write_str(")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Formal {
    pub name: String,
    pub ty: Type,
    pub by_ref: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MethodDef {
    pub name: String,
    pub signature: Signature,
    pub formals: Vec<Formal>,
    pub ret: ReturnType,
    pub body: Vec<Stmt>,
    pub pos: Pos,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassDef {
    pub name: String,
    /// Data members in declaration order; all members are `int`.
    pub members: Vec<String>,
    pub methods: Vec<MethodDef>,
    pub pos: Pos,
}

impl ClassDef {
    pub fn has_member(&self, name: &str) -> bool {
        self.members.iter().any(|m| m == name)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LValue {
    pub base: String,
    pub member: Option<String>,
}

impl LValue {
    pub fn var(base: impl Into<String>) -> Self {
        LValue {
            base: base.into(),
            member: None,
        }
    }

    pub fn member(base: impl Into<String>, member: impl Into<String>) -> Self {
        LValue {
            base: base.into(),
            member: Some(member.into()),
        }
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.member {
            Some(m) => write!(f, "{}.{}", self.base, m),
            None => f.write_str(&self.base),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
        }
    }

    /// Binding strength; larger binds tighter.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Eq | BinOp::Ne => 1,
            BinOp::Lt | BinOp::Gt | BinOp::Le | BinOp::Ge => 2,
            BinOp::Add | BinOp::Sub => 3,
            BinOp::Mul | BinOp::Div => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int(i64),
    /// String literal; only meaningful as a `cout` operand.
    Str(String),
    Var(LValue),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Every lvalue read by the expression, in evaluation order.
    pub fn lvalues(&self) -> Vec<&LValue> {
        let mut out = Vec::new();
        self.collect_lvalues(&mut out);
        out
    }

    fn collect_lvalues<'a>(&'a self, out: &mut Vec<&'a LValue>) {
        match self {
            Expr::Int(_) | Expr::Str(_) => {}
            Expr::Var(lv) => out.push(lv),
            Expr::Neg(inner) => inner.collect_lvalues(out),
            Expr::Binary(_, lhs, rhs) => {
                lhs.collect_lvalues(out);
                rhs.collect_lvalues(out);
            }
        }
    }

    pub fn as_lvalue(&self) -> Option<&LValue> {
        match self {
            Expr::Var(lv) => Some(lv),
            _ => None,
        }
    }
}

/// Resolution of a call site, filled in by the checker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallInfo {
    /// Class of the receiver object.
    pub class: String,
    /// Static type tags of the actual arguments.
    pub arg_types: Vec<Type>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StmtKind {
    Assign {
        target: LValue,
        value: Expr,
    },
    Input {
        target: LValue,
    },
    Output {
        value: Expr,
    },
    If {
        cond: Expr,
        then_body: Vec<Stmt>,
        else_body: Vec<Stmt>,
    },
    While {
        cond: Expr,
        body: Vec<Stmt>,
    },
    /// `recv.method(args);` or, with a target, `x = recv.method(args);`.
    Call {
        target: Option<LValue>,
        receiver: String,
        method: String,
        args: Vec<Expr>,
        info: Option<CallInfo>,
    },
    Return {
        value: Option<Expr>,
    },
    VarDecl {
        ty: Type,
        names: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stmt {
    /// `None` only for declarations, which are not executable.
    pub id: Option<StmtId>,
    pub pos: Pos,
    pub kind: StmtKind,
}

impl Stmt {
    pub fn is_executable(&self) -> bool {
        !matches!(self.kind, StmtKind::VarDecl { .. })
    }

    /// The statement's own id. Panics on declarations.
    pub fn sid(&self) -> StmtId {
        self.id.expect("declarations carry no statement id")
    }
}

/// A procedure: `main` or one method of one class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ProcId {
    Main,
    Method { class: usize, method: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Program {
    pub classes: Vec<ClassDef>,
    pub main: Vec<Stmt>,
    pub main_pos: Pos,
    pub stmt_count: u32,
}

impl Program {
    pub fn class(&self, name: &str) -> Option<&ClassDef> {
        self.classes.iter().find(|c| c.name == name)
    }

    pub fn class_index(&self, name: &str) -> Option<usize> {
        self.classes.iter().position(|c| c.name == name)
    }

    pub fn method(&self, class: usize, method: usize) -> &MethodDef {
        &self.classes[class].methods[method]
    }

    /// All procedures: `main` first, then methods in declaration order.
    pub fn procs(&self) -> Vec<ProcId> {
        let mut out = vec![ProcId::Main];
        for (ci, class) in self.classes.iter().enumerate() {
            for mi in 0..class.methods.len() {
                out.push(ProcId::Method {
                    class: ci,
                    method: mi,
                });
            }
        }
        out
    }

    pub fn body(&self, proc: ProcId) -> &[Stmt] {
        match proc {
            ProcId::Main => &self.main,
            ProcId::Method { class, method } => &self.classes[class].methods[method].body,
        }
    }

    pub fn proc_name(&self, proc: ProcId) -> String {
        match proc {
            ProcId::Main => "main".to_string(),
            ProcId::Method { class, method } => {
                let c = &self.classes[class];
                format!("{}::{}", c.name, c.methods[method].signature)
            }
        }
    }

    /// Finds the procedure a method signature belongs to.
    pub fn proc_of(&self, class: &str, sig: &Signature) -> Option<ProcId> {
        let ci = self.class_index(class)?;
        let mi = self.classes[ci]
            .methods
            .iter()
            .position(|m| &m.signature == sig)?;
        Some(ProcId::Method {
            class: ci,
            method: mi,
        })
    }

    /// Copy of the program with every source position zeroed, for
    /// structural comparison.
    pub fn without_positions(&self) -> Program {
        fn strip(body: &[Stmt]) -> Vec<Stmt> {
            body.iter()
                .map(|s| {
                    let kind = match &s.kind {
                        StmtKind::If {
                            cond,
                            then_body,
                            else_body,
                        } => StmtKind::If {
                            cond: cond.clone(),
                            then_body: strip(then_body),
                            else_body: strip(else_body),
                        },
                        StmtKind::While { cond, body } => StmtKind::While {
                            cond: cond.clone(),
                            body: strip(body),
                        },
                        other => other.clone(),
                    };
                    Stmt {
                        id: s.id,
                        pos: Pos::default(),
                        kind,
                    }
                })
                .collect()
        }
        Program {
            classes: self
                .classes
                .iter()
                .map(|c| ClassDef {
                    name: c.name.clone(),
                    members: c.members.clone(),
                    methods: c
                        .methods
                        .iter()
                        .map(|m| MethodDef {
                            body: strip(&m.body),
                            pos: Pos::default(),
                            ..m.clone()
                        })
                        .collect(),
                    pos: Pos::default(),
                })
                .collect(),
            main: strip(&self.main),
            main_pos: Pos::default(),
            stmt_count: self.stmt_count,
        }
    }

    /// Visits every statement of every procedure, depth first.
    pub fn walk(&self, mut f: impl FnMut(ProcId, &Stmt)) {
        for proc in self.procs() {
            walk_body(self.body(proc), &mut |s| f(proc, s));
        }
    }

    /// Looks up an executable statement by id.
    pub fn stmt(&self, id: StmtId) -> Option<(ProcId, &Stmt)> {
        for proc in self.procs() {
            if let Some(s) = find_in(self.body(proc), id) {
                return Some((proc, s));
            }
        }
        None
    }
}

pub fn walk_body<'a>(body: &'a [Stmt], f: &mut dyn FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        match &s.kind {
            StmtKind::If {
                then_body,
                else_body,
                ..
            } => {
                walk_body(then_body, f);
                walk_body(else_body, f);
            }
            StmtKind::While { body, .. } => walk_body(body, f),
            _ => {}
        }
    }
}

fn find_in(body: &[Stmt], id: StmtId) -> Option<&Stmt> {
    let mut found = None;
    walk_body(body, &mut |s| {
        if found.is_none() && s.id == Some(id) {
            found = Some(s);
        }
    });
    found
}
