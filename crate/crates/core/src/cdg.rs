//! Control dependence graph and static def/use sets.
//!
//! The language is structured, so inside one procedure the graph is a
//! tree: every statement hangs off its nearest enclosing `if`/`while`
//! test, or off the procedure's synthetic entry node.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::{self, Write};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::frontend::{
    stmt_head, Expr, LValue, ProcId, Program, Resolved, Scope, Stmt, StmtId, StmtKind,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Entry(ProcId),
    Stmt(StmtId),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NodeKind {
    Assign,
    Input,
    Output,
    /// `if` condition.
    Test,
    /// `while` condition.
    TestLoop,
    Call,
    Return,
    Entry,
}

impl NodeKind {
    pub fn is_test(self) -> bool {
        matches!(self, NodeKind::Test | NodeKind::TestLoop)
    }

    pub fn name(self) -> &'static str {
        match self {
            NodeKind::Assign => "Assign",
            NodeKind::Input => "Input",
            NodeKind::Output => "Output",
            NodeKind::Test => "Test",
            NodeKind::TestLoop => "TestLoop",
            NodeKind::Call => "Call",
            NodeKind::Return => "Return",
            NodeKind::Entry => "Entry",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum VarScope {
    /// Scalar local or formal of the enclosing procedure.
    Local,
    /// Member of a frame-local object, written `obj.m`.
    ObjectMember,
    /// Bare member name inside a method; bound to the receiver at run time.
    ReceiverMember,
}

/// A statically named storage location.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarRef {
    pub base: String,
    pub member: Option<String>,
    pub scope: VarScope,
}

impl VarRef {
    fn local(name: &str) -> Self {
        VarRef {
            base: name.to_string(),
            member: None,
            scope: VarScope::Local,
        }
    }

    fn object_member(obj: &str, member: &str) -> Self {
        VarRef {
            base: obj.to_string(),
            member: Some(member.to_string()),
            scope: VarScope::ObjectMember,
        }
    }

    fn receiver_member(member: &str) -> Self {
        VarRef {
            base: "this".to_string(),
            member: Some(member.to_string()),
            scope: VarScope::ReceiverMember,
        }
    }
}

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.member {
            Some(m) => write!(f, "{}.{}", self.base, m),
            None => f.write_str(&self.base),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub id: NodeId,
    pub kind: NodeKind,
    pub proc: ProcId,
    /// Control parent; `None` only for entry nodes.
    pub parent: Option<NodeId>,
    pub def_set: BTreeSet<VarRef>,
    pub use_set: BTreeSet<VarRef>,
    /// Statement text, for exports.
    pub text: String,
}

#[derive(Debug, Clone)]
pub struct Cdg {
    entries: Vec<NodeInfo>,
    /// Indexed by `StmtId - 1`.
    stmts: Vec<NodeInfo>,
    proc_names: BTreeMap<ProcId, String>,
    /// Objects declared in `main` and their members.
    main_objects: BTreeMap<String, Vec<String>>,
}

pub fn build_cdg(program: &Program) -> Cdg {
    let mut entries = Vec::new();
    let mut stmts: Vec<Option<NodeInfo>> = vec![None; program.stmt_count as usize];
    let mut proc_names = BTreeMap::new();
    for proc in program.procs() {
        let scope = Scope::of(program, proc);
        entries.push(NodeInfo {
            id: NodeId::Entry(proc),
            kind: NodeKind::Entry,
            proc,
            parent: None,
            def_set: BTreeSet::new(),
            use_set: BTreeSet::new(),
            text: program.proc_name(proc),
        });
        proc_names.insert(proc, program.proc_name(proc));
        let mut cx = Builder {
            program,
            scope: &scope,
            proc,
            out: &mut stmts,
        };
        cx.body(program.body(proc), NodeId::Entry(proc));
    }

    let main_scope = Scope::of(program, ProcId::Main);
    let main_objects = main_scope
        .locals
        .keys()
        .filter_map(|name| {
            let class = main_scope.object_class(name)?;
            Some((name.clone(), program.class(class)?.members.clone()))
        })
        .collect();

    Cdg {
        entries,
        stmts: stmts
            .into_iter()
            .map(|n| n.expect("statement ids are a bijection onto 1..=stmt_count"))
            .collect(),
        proc_names,
        main_objects,
    }
}

struct Builder<'a, 'p> {
    program: &'p Program,
    scope: &'a Scope<'p>,
    proc: ProcId,
    out: &'a mut Vec<Option<NodeInfo>>,
}

impl Builder<'_, '_> {
    fn body(&mut self, body: &[Stmt], parent: NodeId) {
        for s in body {
            let Some(id) = s.id else { continue };
            let (def_set, use_set) = def_use_in(self.program, self.scope, s);
            let kind = match &s.kind {
                StmtKind::Assign { .. } => NodeKind::Assign,
                StmtKind::Input { .. } => NodeKind::Input,
                StmtKind::Output { .. } => NodeKind::Output,
                StmtKind::If { .. } => NodeKind::Test,
                StmtKind::While { .. } => NodeKind::TestLoop,
                StmtKind::Call { .. } => NodeKind::Call,
                StmtKind::Return { .. } => NodeKind::Return,
                StmtKind::VarDecl { .. } => unreachable!("declarations have no id"),
            };
            self.out[id as usize - 1] = Some(NodeInfo {
                id: NodeId::Stmt(id),
                kind,
                proc: self.proc,
                parent: Some(parent),
                def_set,
                use_set,
                text: stmt_head(s),
            });
            match &s.kind {
                StmtKind::If {
                    then_body,
                    else_body,
                    ..
                } => {
                    self.body(then_body, NodeId::Stmt(id));
                    self.body(else_body, NodeId::Stmt(id));
                }
                StmtKind::While { body, .. } => self.body(body, NodeId::Stmt(id)),
                _ => {}
            }
        }
    }
}

/// Static def and use sets of one statement of `proc`.
///
/// Object actuals at call sites count as uses of all their members; the
/// receiver of a call is not used at the call node.
pub fn def_use(
    program: &Program,
    proc: ProcId,
    stmt: &Stmt,
) -> (BTreeSet<VarRef>, BTreeSet<VarRef>) {
    def_use_in(program, &Scope::of(program, proc), stmt)
}

fn def_use_in(
    program: &Program,
    scope: &Scope<'_>,
    stmt: &Stmt,
) -> (BTreeSet<VarRef>, BTreeSet<VarRef>) {
    let mut defs = BTreeSet::new();
    let mut uses = BTreeSet::new();
    let var = |lv: &LValue| -> Option<VarRef> {
        match scope.resolve(lv)? {
            Resolved::LocalScalar(n) => Some(VarRef::local(&n)),
            Resolved::ObjectMember(o, m) => Some(VarRef::object_member(&o, &m)),
            Resolved::ReceiverMember(m) => Some(VarRef::receiver_member(&m)),
            Resolved::LocalObject(..) => None,
        }
    };
    let expr_uses = |e: &Expr, uses: &mut BTreeSet<VarRef>| {
        uses.extend(e.lvalues().into_iter().filter_map(var));
    };
    match &stmt.kind {
        StmtKind::Assign { target, value } => {
            defs.extend(var(target));
            expr_uses(value, &mut uses);
        }
        StmtKind::Input { target } => {
            defs.extend(var(target));
        }
        StmtKind::Output { value } => expr_uses(value, &mut uses),
        StmtKind::If { cond, .. } | StmtKind::While { cond, .. } => expr_uses(cond, &mut uses),
        StmtKind::Return { value } => {
            if let Some(v) = value {
                expr_uses(v, &mut uses);
            }
        }
        StmtKind::Call { target, args, .. } => {
            if let Some(t) = target {
                defs.extend(var(t));
            }
            for a in args {
                match a.as_lvalue().and_then(|lv| scope.resolve(lv)) {
                    Some(Resolved::LocalObject(obj, class)) => {
                        if let Some(c) = program.class(&class) {
                            uses.extend(c.members.iter().map(|m| VarRef::object_member(&obj, m)));
                        }
                    }
                    _ => expr_uses(a, &mut uses),
                }
            }
        }
        StmtKind::VarDecl { .. } => {}
    }
    (defs, uses)
}

impl Cdg {
    pub fn stmt_count(&self) -> u32 {
        self.stmts.len() as u32
    }

    pub fn node(&self, id: StmtId) -> Option<&NodeInfo> {
        self.stmts.get((id as usize).checked_sub(1)?)
    }

    pub fn entry(&self, proc: ProcId) -> Option<&NodeInfo> {
        self.entries.iter().find(|e| e.proc == proc)
    }

    pub fn entries(&self) -> &[NodeInfo] {
        &self.entries
    }

    pub fn stmts(&self) -> &[NodeInfo] {
        &self.stmts
    }

    pub fn kind(&self, id: StmtId) -> Option<NodeKind> {
        self.node(id).map(|n| n.kind)
    }

    pub fn parent(&self, id: StmtId) -> Option<NodeId> {
        self.node(id)?.parent
    }

    /// The test node `id` is control dependent on, or `None` when its
    /// parent is an entry node.
    pub fn control_test(&self, id: StmtId) -> Option<StmtId> {
        match self.parent(id)? {
            NodeId::Stmt(t) => Some(t),
            NodeId::Entry(_) => None,
        }
    }

    pub fn main_objects(&self) -> &BTreeMap<String, Vec<String>> {
        &self.main_objects
    }

    /// Stable display name: the statement id, or `entry:<procedure>`.
    pub fn node_key(&self, id: NodeId) -> String {
        match id {
            NodeId::Stmt(s) => s.to_string(),
            NodeId::Entry(p) => format!("entry:{}", self.proc_names[&p]),
        }
    }

    fn node_json(&self, id: NodeId) -> Value {
        match id {
            NodeId::Stmt(s) => json!(s),
            NodeId::Entry(_) => json!(self.node_key(id)),
        }
    }

    /// Graphviz rendering. Edges run from a node to its control parent.
    pub fn export_dot(&self) -> String {
        let mut out = String::from("digraph cdg {\n    node [shape=box];\n");
        for e in &self.entries {
            let _ = writeln!(
                out,
                "    \"{}\" [label=\"entry {}\", shape=ellipse];",
                self.node_key(e.id),
                escape(&self.proc_names[&e.proc])
            );
        }
        for n in &self.stmts {
            let _ = writeln!(
                out,
                "    \"{}\" [label=\"{}: {}\"];",
                self.node_key(n.id),
                self.node_key(n.id),
                escape(&n.text)
            );
        }
        for n in &self.stmts {
            if let Some(p) = n.parent {
                let _ = writeln!(
                    out,
                    "    \"{}\" -> \"{}\";",
                    self.node_key(n.id),
                    self.node_key(p)
                );
            }
        }
        out.push_str("}\n");
        out
    }

    /// JSON array of `{id, kind, parent, defs, uses}`, entries first.
    pub fn export_json(&self) -> Value {
        let nodes: Vec<Value> = self
            .entries
            .iter()
            .chain(&self.stmts)
            .map(|n| {
                json!({
                    "id": self.node_json(n.id),
                    "kind": n.kind.name(),
                    "parent": n.parent.map(|p| self.node_json(p)),
                    "defs": n.def_set.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "uses": n.use_set.iter().map(ToString::to_string).collect::<Vec<_>>(),
                })
            })
            .collect();
        Value::Array(nodes)
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}
