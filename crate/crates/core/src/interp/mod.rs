//! Tree-walking interpreter that reports every step as an [`ExecEvent`].
//!
//! Reference parameters use copy-in/copy-out: the formal is a slot of the
//! callee frame, written back to the actual when the call returns. Without
//! aliasing between reference actuals this matches reference semantics.

mod event;

use std::collections::{BTreeMap, BTreeSet, HashMap};

use thiserror::Error;

pub use event::*;

use crate::cdg::NodeKind;
use crate::frontend::{
    resolve_overload, BinOp, Expr, LValue, ProcId, Program, ResolveError, Resolved, Scope, Stmt,
    StmtId, StmtKind, Type,
};

pub const DEFAULT_BUDGET: u64 = 100_000;

/// Nesting limit for method activations.
pub const MAX_CALL_DEPTH: usize = 128;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuntimeError {
    #[error("statement {node}: input exhausted")]
    InputExhausted { node: StmtId },
    #[error("statement {node}: division by zero")]
    DivisionByZero { node: StmtId },
    #[error("step budget of {budget} statements exceeded")]
    BudgetExceeded { budget: u64 },
    #[error("statement {node}: call depth limit of {limit} exceeded")]
    CallDepthExceeded { node: StmtId, limit: usize },
    #[error("statement {node}: {source}")]
    Dispatch { node: StmtId, source: ResolveError },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExitStatus {
    Completed,
    Failed(RuntimeError),
}

/// Consumer of the event stream.
pub trait EventSink {
    fn event(&mut self, event: ExecEvent);
}

impl<F: FnMut(ExecEvent)> EventSink for F {
    fn event(&mut self, event: ExecEvent) {
        self(event)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    /// Statements executed, loop tests included.
    pub steps: u64,
}

/// Runs `program` and collects the whole event stream. The stream is
/// returned even when the run fails; it covers everything up to the error.
pub fn run(program: &Program, inputs: &[i64], budget: u64) -> (Vec<ExecEvent>, ExitStatus) {
    let mut events = Vec::new();
    let status = match run_with(program, inputs, budget, &mut |e| events.push(e)) {
        Ok(_) => ExitStatus::Completed,
        Err(e) => ExitStatus::Failed(e),
    };
    (events, status)
}

/// Runs `program`, handing each event to `sink` as it happens.
pub fn run_with(
    program: &Program,
    inputs: &[i64],
    budget: u64,
    sink: &mut dyn EventSink,
) -> Result<RunSummary, RuntimeError> {
    let scopes = program
        .procs()
        .into_iter()
        .map(|p| (p, Scope::of(program, p)))
        .collect();
    let mut interp = Interp {
        program,
        scopes,
        inputs: inputs.iter(),
        budget,
        steps: 0,
        next_serial: MAIN_FRAME,
        frames: Vec::new(),
        sink,
    };
    let main = interp.new_frame(ProcId::Main, None);
    interp.frames.push(main);
    interp.body(&program.main)?;
    Ok(RunSummary {
        steps: interp.steps,
    })
}

#[derive(Debug)]
struct Frame {
    serial: u32,
    proc: ProcId,
    receiver: Option<ObjectRef>,
    scalars: BTreeMap<String, Option<i64>>,
    /// Object name → member values.
    objects: BTreeMap<String, BTreeMap<String, Option<i64>>>,
    /// Enclosing tests, innermost last.
    control: Vec<StmtId>,
}

enum Flow {
    Normal,
    Return(Option<i64>),
}

struct Interp<'p, 's> {
    program: &'p Program,
    scopes: HashMap<ProcId, Scope<'p>>,
    inputs: std::slice::Iter<'p, i64>,
    budget: u64,
    steps: u64,
    next_serial: u32,
    frames: Vec<Frame>,
    sink: &'s mut dyn EventSink,
}

type Exec<T> = Result<T, RuntimeError>;

impl<'p> Interp<'p, '_> {
    fn new_frame(&mut self, proc: ProcId, receiver: Option<ObjectRef>) -> Frame {
        let serial = self.next_serial;
        self.next_serial += 1;
        let mut scalars = BTreeMap::new();
        let mut objects = BTreeMap::new();
        for (name, ty) in &self.scopes[&proc].locals {
            match ty {
                Type::Int => {
                    scalars.insert(name.clone(), None);
                }
                Type::Class(c) => {
                    let members = self
                        .program
                        .class(c)
                        .map(|c| c.members.iter().map(|m| (m.clone(), None)).collect())
                        .unwrap_or_default();
                    objects.insert(name.clone(), members);
                }
            }
        }
        Frame {
            serial,
            proc,
            receiver,
            scalars,
            objects,
            control: Vec::new(),
        }
    }

    fn frame(&self) -> &Frame {
        self.frames.last().expect("main frame is always present")
    }

    fn frame_mut(&mut self) -> &mut Frame {
        self.frames
            .last_mut()
            .expect("main frame is always present")
    }

    fn emit(&mut self, e: ExecEvent) {
        self.sink.event(e);
    }

    fn step(&mut self) -> Exec<()> {
        if self.steps >= self.budget {
            return Err(RuntimeError::BudgetExceeded {
                budget: self.budget,
            });
        }
        self.steps += 1;
        Ok(())
    }

    /// Resolves a scalar lvalue in the current frame.
    fn var(&self, lv: &LValue) -> RuntimeVar {
        let frame = self.frame();
        match self.scopes[&frame.proc].resolve(lv) {
            Some(Resolved::LocalScalar(n)) => RuntimeVar::local(frame.serial, n),
            Some(Resolved::ObjectMember(o, m)) => RuntimeVar::member(frame.serial, o, m),
            Some(Resolved::ReceiverMember(m)) => {
                let recv = frame
                    .receiver
                    .as_ref()
                    .expect("methods run with a receiver");
                RuntimeVar::member(recv.frame, recv.name.clone(), m)
            }
            other => unreachable!("checked program has no scalar use of {lv}: {other:?}"),
        }
    }

    fn owner(&self, serial: u32) -> &Frame {
        self.frames
            .iter()
            .rev()
            .find(|f| f.serial == serial)
            .expect("variables are owned by live frames")
    }

    fn owner_mut(&mut self, serial: u32) -> &mut Frame {
        self.frames
            .iter_mut()
            .rev()
            .find(|f| f.serial == serial)
            .expect("variables are owned by live frames")
    }

    fn load(&self, v: &RuntimeVar) -> Option<i64> {
        let f = self.owner(v.frame);
        match &v.member {
            None => f.scalars[&v.name],
            Some(m) => f.objects[&v.name][m],
        }
    }

    fn store(&mut self, v: &RuntimeVar, value: Option<i64>) {
        let f = self.owner_mut(v.frame);
        let slot = match &v.member {
            None => f.scalars.get_mut(&v.name),
            Some(m) => f.objects.get_mut(&v.name).and_then(|o| o.get_mut(m)),
        };
        *slot.expect("stores target declared variables") = value;
    }

    fn uses_of(&self, e: &Expr) -> Vec<RuntimeVar> {
        let set: BTreeSet<RuntimeVar> = e.lvalues().into_iter().map(|lv| self.var(lv)).collect();
        set.into_iter().collect()
    }

    fn eval(&mut self, e: &Expr, node: StmtId) -> Exec<i64> {
        Ok(match e {
            Expr::Int(n) => *n,
            Expr::Str(_) => 0,
            Expr::Var(lv) => {
                let v = self.var(lv);
                match self.load(&v) {
                    Some(n) => n,
                    None => {
                        self.emit(ExecEvent::UninitializedRead { node, var: v });
                        0
                    }
                }
            }
            Expr::Neg(inner) => self.eval(inner, node)?.wrapping_neg(),
            Expr::Binary(op, lhs, rhs) => {
                let a = self.eval(lhs, node)?;
                let b = self.eval(rhs, node)?;
                match op {
                    BinOp::Add => a.wrapping_add(b),
                    BinOp::Sub => a.wrapping_sub(b),
                    BinOp::Mul => a.wrapping_mul(b),
                    BinOp::Div => {
                        if b == 0 {
                            return Err(RuntimeError::DivisionByZero { node });
                        }
                        a.wrapping_div(b)
                    }
                    BinOp::Lt => (a < b) as i64,
                    BinOp::Gt => (a > b) as i64,
                    BinOp::Le => (a <= b) as i64,
                    BinOp::Ge => (a >= b) as i64,
                    BinOp::Eq => (a == b) as i64,
                    BinOp::Ne => (a != b) as i64,
                }
            }
        })
    }

    fn executed(
        &mut self,
        id: StmtId,
        kind: NodeKind,
        defs: Vec<RuntimeVar>,
        uses: Vec<RuntimeVar>,
    ) {
        let frame = self.frame();
        let e = ExecEvent::StmtExecuted {
            id,
            frame: frame.serial,
            kind,
            control: frame.control.last().copied(),
            defs,
            uses,
            receiver_members: Vec::new(),
        };
        self.emit(e);
    }

    fn body(&mut self, body: &[Stmt]) -> Exec<Flow> {
        for s in body {
            if let Flow::Return(v) = self.stmt(s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt) -> Exec<Flow> {
        let Some(id) = s.id else {
            return Ok(Flow::Normal);
        };
        self.step()?;
        match &s.kind {
            StmtKind::Assign { target, value } => {
                let n = self.eval(value, id)?;
                let t = self.var(target);
                self.store(&t, Some(n));
                let uses = self.uses_of(value);
                self.executed(id, NodeKind::Assign, vec![t], uses);
            }
            StmtKind::Input { target } => {
                let n = *self
                    .inputs
                    .next()
                    .ok_or(RuntimeError::InputExhausted { node: id })?;
                let t = self.var(target);
                self.store(&t, Some(n));
                self.emit(ExecEvent::InputConsumed { node: id, value: n });
                self.executed(id, NodeKind::Input, vec![t], Vec::new());
            }
            StmtKind::Output { value } => {
                let out = match value {
                    Expr::Str(text) => OutputValue::Text(text.clone()),
                    e => OutputValue::Int(self.eval(e, id)?),
                };
                let uses = self.uses_of(value);
                self.emit(ExecEvent::OutputProduced {
                    node: id,
                    value: out,
                });
                self.executed(id, NodeKind::Output, Vec::new(), uses);
            }
            StmtKind::If {
                cond,
                then_body,
                else_body,
            } => {
                let c = self.eval(cond, id)?;
                let uses = self.uses_of(cond);
                self.executed(id, NodeKind::Test, Vec::new(), uses);
                let branch = if c != 0 { then_body } else { else_body };
                self.frame_mut().control.push(id);
                let flow = self.body(branch);
                self.frame_mut().control.pop();
                return flow;
            }
            StmtKind::While { cond, body } => loop {
                let c = self.eval(cond, id)?;
                let uses = self.uses_of(cond);
                self.executed(id, NodeKind::TestLoop, Vec::new(), uses);
                if c == 0 {
                    let frame = self.frame().serial;
                    self.emit(ExecEvent::LoopExited { node: id, frame });
                    break;
                }
                self.frame_mut().control.push(id);
                let flow = self.body(body);
                self.frame_mut().control.pop();
                if let Flow::Return(v) = flow? {
                    return Ok(Flow::Return(v));
                }
                self.step()?;
            },
            StmtKind::Return { value } => {
                let (n, uses) = match value {
                    Some(e) => (Some(self.eval(e, id)?), self.uses_of(e)),
                    None => (None, Vec::new()),
                };
                self.executed(id, NodeKind::Return, Vec::new(), uses.clone());
                let frame = self.frame();
                let e = ExecEvent::AboutToReturn {
                    node: Some(id),
                    frame: frame.serial,
                    control: frame.control.last().copied(),
                    uses,
                };
                self.emit(e);
                return Ok(Flow::Return(n));
            }
            StmtKind::Call {
                target,
                receiver,
                method,
                args,
                info,
            } => {
                let info = info
                    .as_ref()
                    .expect("call sites are resolved by the checker");
                self.call(
                    id,
                    target.as_ref(),
                    receiver,
                    method,
                    args,
                    &info.class,
                    &info.arg_types,
                )?;
            }
            StmtKind::VarDecl { .. } => {}
        }
        Ok(Flow::Normal)
    }

    #[allow(clippy::too_many_arguments)]
    fn call(
        &mut self,
        site: StmtId,
        target: Option<&LValue>,
        receiver: &str,
        method: &str,
        args: &[Expr],
        class_name: &str,
        arg_types: &[Type],
    ) -> Exec<()> {
        if self.frames.len() >= MAX_CALL_DEPTH {
            return Err(RuntimeError::CallDepthExceeded {
                node: site,
                limit: MAX_CALL_DEPTH,
            });
        }
        let program = self.program;
        let class = program
            .class(class_name)
            .expect("receiver classes are declared");
        let callee = resolve_overload(class, method, arg_types)
            .map_err(|source| RuntimeError::Dispatch { node: site, source })?;
        let proc = program
            .proc_of(class_name, &callee.signature)
            .expect("resolved methods belong to their class");

        let caller = self.frame().serial;
        let control = self.frame().control.last().copied();
        let recv = ObjectRef {
            frame: caller,
            name: receiver.to_string(),
        };

        // evaluate actuals in the caller before the callee frame exists
        struct Pending {
            formal: RuntimeVar,
            value: Option<i64>,
            actuals: Vec<RuntimeVar>,
            by_ref: bool,
        }
        let mut pending = Vec::new();
        let mut uses = BTreeSet::new();
        let callee_serial = self.next_serial;
        for (formal, arg) in callee.formals.iter().zip(args) {
            match &formal.ty {
                Type::Int if formal.by_ref => {
                    let lv = arg
                        .as_lvalue()
                        .expect("checked: reference actuals are lvalues");
                    let actual = self.var(lv);
                    uses.insert(actual.clone());
                    pending.push(Pending {
                        formal: RuntimeVar::local(callee_serial, &formal.name),
                        value: self.load(&actual),
                        actuals: vec![actual],
                        by_ref: true,
                    });
                }
                Type::Int => {
                    let value = self.eval(arg, site)?;
                    let actuals = self.uses_of(arg);
                    uses.extend(actuals.iter().cloned());
                    pending.push(Pending {
                        formal: RuntimeVar::local(callee_serial, &formal.name),
                        value: Some(value),
                        actuals,
                        by_ref: false,
                    });
                }
                Type::Class(c) => {
                    let obj = &arg.as_lvalue().expect("object actuals are names").base;
                    for m in &program.class(c).expect("declared class").members {
                        let actual = RuntimeVar::member(caller, obj.clone(), m.clone());
                        uses.insert(actual.clone());
                        pending.push(Pending {
                            formal: RuntimeVar::member(callee_serial, &formal.name, m),
                            value: self.load(&actual),
                            actuals: vec![actual],
                            by_ref: formal.by_ref,
                        });
                    }
                }
            }
        }

        let frame = self.new_frame(proc, Some(recv.clone()));
        debug_assert_eq!(frame.serial, callee_serial);
        self.frames.push(frame);
        for p in &pending {
            self.store(&p.formal, p.value);
        }
        self.emit(ExecEvent::CallEntered {
            site,
            frame: caller,
            control,
            callee: format!("{}::{}", class.name, callee.signature),
            callee_frame: callee_serial,
            receiver: recv.clone(),
            bindings: pending
                .iter()
                .map(|p| Binding {
                    formal: p.formal.clone(),
                    actuals: p.actuals.clone(),
                    by_ref: p.by_ref,
                })
                .collect(),
        });

        let result = match self.body(&callee.body) {
            Ok(Flow::Return(v)) => v,
            Ok(Flow::Normal) => {
                self.emit(ExecEvent::AboutToReturn {
                    node: None,
                    frame: callee_serial,
                    control: None,
                    uses: Vec::new(),
                });
                None
            }
            Err(e) => return Err(e),
        };

        let copy_back: Vec<CopyBack> = pending
            .iter()
            .filter(|p| p.by_ref)
            .map(|p| CopyBack {
                formal: p.formal.clone(),
                actual: p.actuals[0].clone(),
            })
            .collect();
        let written: Vec<(RuntimeVar, Option<i64>)> = copy_back
            .iter()
            .map(|cb| (cb.actual.clone(), self.load(&cb.formal)))
            .collect();
        let done = self.frames.pop().expect("callee frame");
        let mut reset: Vec<RuntimeVar> = done
            .scalars
            .keys()
            .map(|n| RuntimeVar::local(callee_serial, n.clone()))
            .collect();
        for (obj, members) in &done.objects {
            reset.extend(
                members
                    .keys()
                    .map(|m| RuntimeVar::member(callee_serial, obj.clone(), m.clone())),
            );
        }
        for (v, value) in written {
            self.store(&v, value);
        }
        let target = target.map(|t| self.var(t));
        if let Some(t) = &target {
            self.store(t, result);
        }
        self.emit(ExecEvent::Returned {
            site,
            frame: caller,
            callee_frame: callee_serial,
            copy_back,
            reset,
            target: target.clone(),
        });

        let receiver_members = class
            .members
            .iter()
            .map(|m| RuntimeVar::member(recv.frame, recv.name.clone(), m.clone()))
            .collect();
        self.emit(ExecEvent::StmtExecuted {
            id: site,
            frame: caller,
            kind: NodeKind::Call,
            control,
            defs: target.into_iter().collect(),
            uses: uses.into_iter().collect(),
            receiver_members,
        });
        Ok(())
    }
}
