//! Reference slicer over the full dynamic dependence graph.
//!
//! Every executed statement becomes an occurrence node with edges to the
//! occurrences it depends on: the last definition of each variable it
//! reads, the occurrence of its governing test, and the call-site
//! occurrence of the activation it runs in. A slice is the set of labels
//! reachable backwards from the criterion. The graph grows with the
//! trace; it exists to check [`crate::slicer`] and is not meant for long
//! runs.
//!
//! Parameter passing and call-assignment add unlabeled transfer nodes, so
//! both engines define the same slice relation. The oracle reads control
//! nesting and statement kinds from the trace itself and never consults
//! the control dependence graph.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::cdg::{Cdg, NodeKind};
use crate::frontend::StmtId;
use crate::interp::{EventSink, ExecEvent, RuntimeVar, VarKey, MAIN_FRAME};
use crate::slicer::{SliceError, Slicer, StmtSet};

type NodeIdx = usize;

#[derive(Debug, Clone)]
struct DdgNode {
    label: Option<StmtId>,
    preds: Vec<NodeIdx>,
}

/// What the slice of `(statement, variable)` is reachable from, at the
/// statement's last execution.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Criterion {
    data: Option<NodeIdx>,
    control: Option<NodeIdx>,
}

#[derive(Debug, Clone, Default)]
pub struct Ddg {
    nodes: Vec<DdgNode>,
    occurrences: usize,
    criteria: BTreeMap<(StmtId, VarKey), Criterion>,
    /// Last definition of every live variable at the end of the trace.
    live: HashMap<RuntimeVar, NodeIdx>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum OracleError {
    #[error("malformed trace at event {index}: {msg}")]
    Malformed { index: usize, msg: String },
    #[error("no recorded occurrence of statement {node} touching `{var}`")]
    CriterionAbsent { node: StmtId, var: String },
}

/// Incremental construction of a [`Ddg`], one event at a time.
#[derive(Default)]
pub struct DdgBuilder {
    ddg: Ddg,
    events: usize,
    fault: Option<OracleError>,
    last_def: HashMap<RuntimeVar, NodeIdx>,
    last_test: HashMap<(u32, StmtId), NodeIdx>,
    calls: Vec<Option<NodeIdx>>,
    current_call: Option<NodeIdx>,
    return_node: Option<NodeIdx>,
}

impl DdgBuilder {
    pub fn new() -> Self {
        DdgBuilder::default()
    }

    pub fn push(&mut self, e: &ExecEvent) -> Result<(), OracleError> {
        let index = self.events;
        self.events += 1;
        self.apply(index, e)
    }

    /// Graph nodes so far, transfer nodes included.
    pub fn node_count(&self) -> usize {
        self.ddg.nodes.len()
    }

    pub fn finish(self) -> Result<Ddg, OracleError> {
        if let Some(e) = self.fault {
            return Err(e);
        }
        let mut ddg = self.ddg;
        ddg.live = self.last_def;
        Ok(ddg)
    }
    fn add(
        &mut self,
        label: Option<StmtId>,
        preds: impl IntoIterator<Item = Option<NodeIdx>>,
    ) -> NodeIdx {
        let preds: Vec<NodeIdx> = preds.into_iter().flatten().collect();
        self.ddg.nodes.push(DdgNode { label, preds });
        self.ddg.nodes.len() - 1
    }

    fn governing(&self, frame: u32, control: Option<StmtId>) -> Option<NodeIdx> {
        control.and_then(|t| self.last_test.get(&(frame, t)).copied())
    }

    fn defs_of<'a>(&self, vars: impl IntoIterator<Item = &'a RuntimeVar>) -> Vec<Option<NodeIdx>> {
        vars.into_iter()
            .map(|v| self.last_def.get(v).copied())
            .collect()
    }

    fn apply(&mut self, index: usize, e: &ExecEvent) -> Result<(), OracleError> {
        match e {
            ExecEvent::StmtExecuted {
                id,
                frame,
                kind,
                control,
                defs,
                uses,
                receiver_members,
            } => {
                let ctrl = self.governing(*frame, *control);
                self.ddg.occurrences += 1;
                if *kind != NodeKind::Call {
                    let mut preds = self.defs_of(uses);
                    preds.push(ctrl);
                    preds.push(self.current_call);
                    let n = self.add(Some(*id), preds);
                    for d in defs {
                        self.last_def.insert(d.clone(), n);
                    }
                    if matches!(kind, NodeKind::Test | NodeKind::TestLoop) {
                        self.last_test.insert((*frame, *id), n);
                    }
                }
                for v in defs.iter().chain(uses).chain(receiver_members) {
                    self.ddg.criteria.insert(
                        (*id, v.key()),
                        Criterion {
                            data: self.last_def.get(v).copied(),
                            control: ctrl,
                        },
                    );
                }
            }
            ExecEvent::CallEntered {
                site,
                frame,
                control,
                bindings,
                ..
            } => {
                let ctrl = self.governing(*frame, *control);
                let call = self.add(Some(*site), [ctrl, self.current_call]);
                self.calls.push(self.current_call);
                self.current_call = Some(call);
                for b in bindings {
                    let mut preds = self.defs_of(&b.actuals);
                    preds.push(Some(call));
                    let n = self.add(None, preds);
                    self.last_def.insert(b.formal.clone(), n);
                }
            }
            ExecEvent::AboutToReturn {
                node,
                frame,
                control,
                uses,
            } => {
                if let Some(r) = node {
                    let mut preds = self.defs_of(uses);
                    preds.push(self.governing(*frame, *control));
                    preds.push(self.current_call);
                    self.return_node = Some(self.add(Some(*r), preds));
                }
            }
            ExecEvent::Returned {
                callee_frame,
                copy_back,
                reset,
                target,
                ..
            } => {
                let Some(outer) = self.calls.pop() else {
                    return Err(OracleError::Malformed {
                        index,
                        msg: "return without a matching call".to_string(),
                    });
                };
                for cb in copy_back {
                    match self.last_def.get(&cb.formal).copied() {
                        Some(n) => self.last_def.insert(cb.actual.clone(), n),
                        None => self.last_def.remove(&cb.actual),
                    };
                }
                if let Some(t) = target {
                    match self.return_node.take() {
                        Some(n) => self.last_def.insert(t.clone(), n),
                        None => self.last_def.remove(t),
                    };
                }
                for v in reset {
                    self.last_def.remove(v);
                }
                self.last_test.retain(|(frame, _), _| frame != callee_frame);
                self.current_call = outer;
                self.return_node = None;
            }
            ExecEvent::LoopExited { node, frame } => {
                self.last_test.remove(&(*frame, *node));
            }
            ExecEvent::InputConsumed { .. }
            | ExecEvent::OutputProduced { .. }
            | ExecEvent::UninitializedRead { .. } => {}
        }
        Ok(())
    }
}

impl EventSink for DdgBuilder {
    fn event(&mut self, event: ExecEvent) {
        if self.fault.is_none() {
            if let Err(e) = self.push(&event) {
                self.fault = Some(e);
            }
        }
    }
}

pub fn build_ddg(trace: &[ExecEvent]) -> Result<Ddg, OracleError> {
    let mut b = DdgBuilder::new();
    for e in trace {
        b.push(e)?;
    }
    b.finish()
}

impl Ddg {
    /// Number of graph nodes, transfer nodes included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Number of statement executions in the trace.
    pub fn occurrences(&self) -> usize {
        self.occurrences
    }

    fn reach(&self, starts: impl IntoIterator<Item = NodeIdx>) -> StmtSet {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack: Vec<NodeIdx> = starts.into_iter().collect();
        let mut out = StmtSet::new();
        while let Some(n) = stack.pop() {
            if std::mem::replace(&mut seen[n], true) {
                continue;
            }
            let node = &self.nodes[n];
            if let Some(l) = node.label {
                out.insert(l);
            }
            stack.extend(node.preds.iter().copied().filter(|&p| !seen[p]));
        }
        out
    }

    fn slice_for(&self, c: Criterion) -> StmtSet {
        self.reach(c.data.into_iter().chain(c.control))
    }

    /// Backward slice for `var` at the last occurrence of `node`. `var`
    /// uses the same naming as [`crate::slicer::Slicer::slice_of`].
    pub fn backward_slice(&self, node: StmtId, var: &str) -> Result<StmtSet, OracleError> {
        [true, false]
            .into_iter()
            .find_map(|in_main| self.criteria.get(&(node, VarKey::parse(var, in_main))))
            .map(|c| self.slice_for(*c))
            .ok_or_else(|| OracleError::CriterionAbsent {
                node,
                var: var.to_string(),
            })
    }

    /// Slice of the current value of `var` at the end of the trace.
    pub fn slice_of_var(&self, var: &RuntimeVar) -> StmtSet {
        self.reach(self.live.get(var).copied())
    }

    /// Union of the slices of every member of the `main` object `name`.
    pub fn slice_of_object(&self, name: &str) -> StmtSet {
        self.reach(
            self.live
                .iter()
                .filter(|(v, _)| v.frame == MAIN_FRAME && v.name == name && v.member.is_some())
                .map(|(_, &n)| n),
        )
    }

    /// Every recorded criterion with its slice.
    pub fn all_slices(&self) -> BTreeMap<(StmtId, VarKey), StmtSet> {
        self.criteria
            .iter()
            .map(|(k, c)| (k.clone(), self.slice_for(*c)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrossCheckError {
    #[error("streaming slicer rejected the trace: {0}")]
    Slicer(#[from] SliceError),
    #[error("reference slicer rejected the trace: {0}")]
    Oracle(#[from] OracleError),
    #[error("slice of `{var}` at {node}: streaming {streaming}, reference {reference}")]
    Mismatch {
        node: StmtId,
        var: String,
        streaming: StmtSet,
        reference: StmtSet,
    },
    #[error("streaming slicer records `{var}` at {node}, which the trace never touches there")]
    Spurious { node: StmtId, var: String },
}

/// Runs both slicers over `trace` and compares them on every
/// (statement, variable) criterion. Returns the number of criteria that
/// agreed.
pub fn cross_check(cdg: &Cdg, trace: &[ExecEvent]) -> Result<usize, CrossCheckError> {
    let mut slicer = Slicer::new(cdg);
    for e in trace {
        slicer.apply(e)?;
    }
    let reference = build_ddg(trace)?.all_slices();
    for (node, var) in slicer.criteria().map(|(k, _)| k) {
        if !reference.contains_key(&(*node, var.clone())) {
            return Err(CrossCheckError::Spurious {
                node: *node,
                var: var.to_string(),
            });
        }
    }
    let empty = StmtSet::new();
    let streaming: BTreeMap<_, _> = slicer.criteria().collect();
    for ((node, var), expected) in &reference {
        let got = streaming
            .get(&(*node, var.clone()))
            .copied()
            .unwrap_or(&empty);
        if got != expected {
            return Err(CrossCheckError::Mismatch {
                node: *node,
                var: var.to_string(),
                streaming: got.clone(),
                reference: expected.clone(),
            });
        }
    }
    Ok(reference.len())
}
