//! Name resolution, typing and overload resolution.

use std::collections::{BTreeMap, HashSet};

use super::ast::*;
use super::{FrontendError, ResolveError};

/// Variables visible inside one procedure.
///
/// Declarations are procedure-wide: a `int t;` anywhere in a body declares
/// `t` for the whole body. Locals shadow receiver members.
#[derive(Debug, Clone)]
pub struct Scope<'p> {
    pub locals: BTreeMap<String, Type>,
    pub receiver: Option<&'p ClassDef>,
}

/// How a (possibly dotted) name resolves inside a procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Resolved {
    /// Frame-local `int` (declared or formal).
    LocalScalar(String),
    /// Frame-local object (declared or formal) and its class.
    LocalObject(String, String),
    /// `obj.member` where `obj` is a frame-local object.
    ObjectMember(String, String),
    /// Bare member name inside a method body, bound to the receiver.
    ReceiverMember(String),
}

impl<'p> Scope<'p> {
    pub fn of(program: &'p Program, proc: ProcId) -> Scope<'p> {
        let mut locals = BTreeMap::new();
        let receiver = match proc {
            ProcId::Main => None,
            ProcId::Method { class, method } => {
                let m = program.method(class, method);
                for f in &m.formals {
                    locals.insert(f.name.clone(), f.ty.clone());
                }
                Some(&program.classes[class])
            }
        };
        walk_body(program.body(proc), &mut |s| {
            if let StmtKind::VarDecl { ty, names } = &s.kind {
                for n in names {
                    locals.entry(n.clone()).or_insert_with(|| ty.clone());
                }
            }
        });
        Scope { locals, receiver }
    }

    pub fn resolve(&self, lv: &LValue) -> Option<Resolved> {
        match &lv.member {
            None => match self.locals.get(&lv.base) {
                Some(Type::Int) => Some(Resolved::LocalScalar(lv.base.clone())),
                Some(Type::Class(c)) => Some(Resolved::LocalObject(lv.base.clone(), c.clone())),
                None => self
                    .receiver
                    .filter(|c| c.has_member(&lv.base))
                    .map(|_| Resolved::ReceiverMember(lv.base.clone())),
            },
            Some(member) => match self.locals.get(&lv.base) {
                Some(Type::Class(_)) => {
                    Some(Resolved::ObjectMember(lv.base.clone(), member.clone()))
                }
                _ => None,
            },
        }
    }

    pub fn object_class(&self, name: &str) -> Option<&str> {
        match self.locals.get(name) {
            Some(Type::Class(c)) => Some(c),
            _ => None,
        }
    }

    /// Static type of an actual argument: a bare object name has its class
    /// type; every other expression is `int`.
    pub fn actual_type(&self, arg: &Expr) -> Type {
        if let Expr::Var(LValue { base, member: None }) = arg {
            if let Some(c) = self.object_class(base) {
                return Type::Class(c.to_string());
            }
        }
        Type::Int
    }
}

/// Picks the method of `class` whose signature matches the call exactly:
/// same name, same number of arguments, same ordered type tags. There are
/// no implicit conversions.
pub fn resolve_overload<'c>(
    class: &'c ClassDef,
    name: &str,
    actual_types: &[Type],
) -> Result<&'c MethodDef, ResolveError> {
    class
        .methods
        .iter()
        .find(|m| {
            m.signature.name == name
                && m.signature.params.len() == actual_types.len()
                && m.signature
                    .params
                    .iter()
                    .zip(actual_types)
                    .all(|(p, a)| p == a)
        })
        .ok_or_else(|| ResolveError::NoMatch {
            class: class.name.clone(),
            call: Signature {
                name: name.to_string(),
                params: actual_types.to_vec(),
            },
        })
}

pub fn check(program: &mut Program) -> Result<(), FrontendError> {
    check_declarations(program)?;
    let snapshot = program.clone();
    for proc in snapshot.procs() {
        let scope = Scope::of(&snapshot, proc);
        let ret = match proc {
            ProcId::Main => None,
            ProcId::Method { class, method } => Some(snapshot.method(class, method).ret.clone()),
        };
        let cx = Checker {
            program: &snapshot,
            scope,
            ret,
        };
        let body = match proc {
            ProcId::Main => &mut program.main,
            ProcId::Method { class, method } => &mut program.classes[class].methods[method].body,
        };
        cx.body(body)?;
    }
    Ok(())
}

fn check_declarations(program: &Program) -> Result<(), FrontendError> {
    let mut class_names = HashSet::new();
    for class in &program.classes {
        if !class_names.insert(class.name.as_str()) {
            return Err(FrontendError::Duplicate {
                pos: class.pos,
                what: format!("class `{}`", class.name),
            });
        }
    }
    let known_type = |ty: &Type| match ty {
        Type::Int => true,
        Type::Class(c) => program.class(c).is_some(),
    };

    for class in &program.classes {
        let mut sigs = HashSet::new();
        for m in &class.methods {
            if !sigs.insert(&m.signature) {
                return Err(FrontendError::Duplicate {
                    pos: m.pos,
                    what: format!(
                        "method signature `{}` in class `{}`",
                        m.signature, class.name
                    ),
                });
            }
            if let ReturnType::Class(c) = &m.ret {
                if program.class(c).is_none() {
                    return Err(unknown_class(m.pos, c));
                }
            }
            let mut formals = HashSet::new();
            for f in &m.formals {
                if !known_type(&f.ty) {
                    return Err(unknown_class(m.pos, &f.ty.to_string()));
                }
                if !formals.insert(f.name.as_str()) {
                    return Err(FrontendError::Duplicate {
                        pos: m.pos,
                        what: format!("formal parameter `{}` of `{}`", f.name, m.signature),
                    });
                }
            }
            check_local_decls(program, &m.body, formals)?;
        }
    }
    check_local_decls(program, &program.main, HashSet::new())
}

fn check_local_decls<'a>(
    program: &Program,
    body: &'a [Stmt],
    mut names: HashSet<&'a str>,
) -> Result<(), FrontendError> {
    let mut result = Ok(());
    walk_body(body, &mut |s| {
        if result.is_err() {
            return;
        }
        if let StmtKind::VarDecl { ty, names: decl } = &s.kind {
            if let Type::Class(c) = ty {
                if program.class(c).is_none() {
                    result = Err(unknown_class(s.pos, c));
                    return;
                }
            }
            for n in decl {
                if !names.insert(n.as_str()) {
                    result = Err(FrontendError::Duplicate {
                        pos: s.pos,
                        what: format!("variable `{n}`"),
                    });
                    return;
                }
            }
        }
    });
    result
}

fn unknown_class(pos: Pos, name: &str) -> FrontendError {
    FrontendError::Semantic {
        pos,
        msg: format!("unknown class `{name}`"),
    }
}

struct Checker<'p> {
    program: &'p Program,
    scope: Scope<'p>,
    /// `None` for `main`.
    ret: Option<ReturnType>,
}

impl Checker<'_> {
    fn err<T>(&self, pos: Pos, msg: String) -> Result<T, FrontendError> {
        Err(FrontendError::Semantic { pos, msg })
    }

    fn body(&self, body: &mut [Stmt]) -> Result<(), FrontendError> {
        for s in body {
            self.stmt(s)?;
        }
        Ok(())
    }

    fn scalar(&self, pos: Pos, lv: &LValue) -> Result<(), FrontendError> {
        match self.scope.resolve(lv) {
            Some(Resolved::LocalScalar(_))
            | Some(Resolved::ObjectMember(..))
            | Some(Resolved::ReceiverMember(_)) => {
                if let Some(m) = &lv.member {
                    let class = self.scope.object_class(&lv.base).unwrap_or_default();
                    let known = self.program.class(class).is_some_and(|c| c.has_member(m));
                    if !known {
                        return self.err(pos, format!("class `{class}` has no member `{m}`"));
                    }
                }
                Ok(())
            }
            Some(Resolved::LocalObject(..)) => self.err(
                pos,
                format!("object `{lv}` used where an integer is expected"),
            ),
            None => self.err(pos, format!("unknown variable `{lv}`")),
        }
    }

    fn scalar_expr(&self, pos: Pos, e: &Expr) -> Result<(), FrontendError> {
        if let Expr::Str(_) = e {
            return self.err(pos, "string literal in integer context".to_string());
        }
        for lv in e.lvalues() {
            self.scalar(pos, lv)?;
        }
        Ok(())
    }

    fn stmt(&self, s: &mut Stmt) -> Result<(), FrontendError> {
        let pos = s.pos;
        match &mut s.kind {
            StmtKind::Assign { target, value } => {
                self.scalar(pos, target)?;
                self.scalar_expr(pos, value)
            }
            StmtKind::Input { target } => self.scalar(pos, target),
            StmtKind::Output { value } => match value {
                Expr::Str(_) => Ok(()),
                other => self.scalar_expr(pos, other),
            },
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                self.scalar_expr(pos, cond)?;
                self.body(then_body)?;
                self.body(else_body)
            }
            StmtKind::While { cond, body } => {
                self.scalar_expr(pos, cond)?;
                self.body(body)
            }
            StmtKind::Return { value } => match (&self.ret, value) {
                (None, _) => self.err(pos, "`return` is not allowed in `main`".to_string()),
                (Some(ReturnType::Int), Some(v)) => self.scalar_expr(pos, v),
                (Some(ReturnType::Int), None) => {
                    self.err(pos, "`return` in an `int` method needs a value".to_string())
                }
                (Some(_), Some(_)) => {
                    self.err(pos, "only `int` methods can return a value".to_string())
                }
                (Some(_), None) => Ok(()),
            },
            StmtKind::VarDecl { .. } => Ok(()),
            StmtKind::Call {
                target,
                receiver,
                method,
                args,
                info,
            } => {
                let Some(class_name) = self.scope.object_class(receiver) else {
                    return self.err(pos, format!("`{receiver}` is not an object"));
                };
                let class = self
                    .program
                    .class(class_name)
                    .expect("declared classes were checked");
                let mut arg_types = Vec::with_capacity(args.len());
                for a in args.iter() {
                    let ty = self.scope.actual_type(a);
                    if ty == Type::Int {
                        self.scalar_expr(pos, a)?;
                    }
                    arg_types.push(ty);
                }
                let callee = resolve_overload(class, method, &arg_types)
                    .map_err(|source| FrontendError::NoMatch { pos, source })?;
                for (f, a) in callee.formals.iter().zip(args.iter()) {
                    if f.by_ref && a.as_lvalue().is_none() {
                        return self.err(
                            pos,
                            format!(
                                "argument for reference parameter `{}` must be a variable",
                                f.name
                            ),
                        );
                    }
                }
                if let Some(t) = target {
                    if callee.ret != ReturnType::Int {
                        return self.err(
                            pos,
                            format!("`{}` does not return an integer", callee.signature),
                        );
                    }
                    self.scalar(pos, t)?;
                }
                *info = Some(CallInfo {
                    class: class_name.to_string(),
                    arg_types,
                });
                Ok(())
            }
        }
    }
}
