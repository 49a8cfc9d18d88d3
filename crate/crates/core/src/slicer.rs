//! Streaming dynamic slicer.
//!
//! The slicer consumes the interpreter's events one at a time and keeps
//! only the slices that are live: one per variable (why it has its current
//! value), one per test node (why control is inside its region), the slice
//! of the current call chain, and the per-statement answers. Nothing about
//! past events is stored, so memory depends on the program, not on the
//! length of the run.
//!
//! Update rules, for a statement `u` executed in frame `f`:
//!
//! * `ctrl(u)` is the active control slice of `u`'s control parent in `f`
//!   when that parent is a test, and empty when it is an entry node.
//! * A non-call `u` defining `v` sets
//!   `data(v) = {u} ∪ data(uses(u)) ∪ ctrl(u) ∪ call`.
//! * A test `u` sets `control(f, u) = {u} ∪ data(uses(u)) ∪ ctrl(u) ∪ call`;
//!   a loop exit clears it.
//! * For each variable `v` defined, used, or (at call sites) belonging to
//!   the receiver: `table(u, v) = data(v) ∪ ctrl(u)`. Later executions of
//!   `u` overwrite earlier ones.
//! * Entering a call at site `s` pushes `call` and sets
//!   `call = {s} ∪ call ∪ ctrl(s)`; each formal gets the slices of its
//!   actuals joined with the new `call`.
//! * Returning copies reference formals back to their actuals, moves the
//!   return slice into a call-assignment target, clears the callee's
//!   locals and pops `call`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::cdg::{Cdg, NodeKind};
use crate::frontend::StmtId;
use crate::interp::{Binding, CopyBack, EventSink, ExecEvent, RuntimeVar, VarKey, MAIN_FRAME};

/// A set of statement ids, kept sorted.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize)]
pub struct StmtSet(BTreeSet<StmtId>);

impl StmtSet {
    pub fn new() -> Self {
        StmtSet::default()
    }

    pub fn singleton(id: StmtId) -> Self {
        StmtSet(BTreeSet::from([id]))
    }

    pub fn insert(&mut self, id: StmtId) {
        self.0.insert(id);
    }

    pub fn union_with(&mut self, other: &StmtSet) {
        self.0.extend(other.0.iter().copied());
    }

    pub fn contains(&self, id: StmtId) -> bool {
        self.0.contains(&id)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = StmtId> + '_ {
        self.0.iter().copied()
    }

    pub fn to_vec(&self) -> Vec<StmtId> {
        self.iter().collect()
    }
}

impl FromIterator<StmtId> for StmtSet {
    fn from_iter<I: IntoIterator<Item = StmtId>>(iter: I) -> Self {
        StmtSet(iter.into_iter().collect())
    }
}

impl<const N: usize> From<[StmtId; N]> for StmtSet {
    fn from(ids: [StmtId; N]) -> Self {
        ids.into_iter().collect()
    }
}

impl fmt::Display for StmtSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, id) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("}")
    }
}

/// Live state of the slicer. Empty slices are not stored.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SliceState {
    pub active_data: BTreeMap<RuntimeVar, StmtSet>,
    /// Keyed by (frame, test node) so a recursive activation cannot see
    /// another activation's control context.
    pub active_control: BTreeMap<(u32, StmtId), StmtSet>,
    pub call_stack: Vec<StmtSet>,
    pub active_call: StmtSet,
    pub active_return: StmtSet,
    pub dyn_table: BTreeMap<(StmtId, VarKey), StmtSet>,
}

impl SliceState {
    /// Number of tracked keys plus the total size of every stored set.
    pub fn cardinality(&self) -> usize {
        let maps = self
            .active_data
            .values()
            .map(|s| 1 + s.len())
            .sum::<usize>()
            + self
                .active_control
                .values()
                .map(|s| 1 + s.len())
                .sum::<usize>()
            + self.dyn_table.values().map(|s| 1 + s.len()).sum::<usize>();
        let stack = self.call_stack.iter().map(|s| 1 + s.len()).sum::<usize>();
        maps + stack + self.active_call.len() + self.active_return.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("event refers to statement {0}, which is not in the program")]
    UnknownNode(StmtId),
    #[error("return from call site {0} without a matching call")]
    UnbalancedReturn(StmtId),
    #[error("statement {0} was never executed")]
    NotExecuted(StmtId),
    #[error("statement {node} neither defines nor uses `{var}`")]
    VarNotAtNode { node: StmtId, var: String },
    #[error("no object `{0}` is declared in main")]
    UnknownObject(String),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SliceStats {
    /// Events consumed.
    pub events: u64,
    /// Slice assignments performed.
    pub updates: u64,
}

pub struct Slicer<'g> {
    cdg: &'g Cdg,
    state: SliceState,
    executed: BTreeSet<StmtId>,
    stats: SliceStats,
    fault: Option<SliceError>,
}

impl<'g> Slicer<'g> {
    /// Fresh slicer: every slice empty, empty call stack.
    pub fn new(cdg: &'g Cdg) -> Self {
        Slicer {
            cdg,
            state: SliceState::default(),
            executed: BTreeSet::new(),
            stats: SliceStats::default(),
            fault: None,
        }
    }

    /// Returns to the initial state, ready for another run.
    pub fn reset(&mut self) {
        *self = Slicer::new(self.cdg);
    }

    pub fn state(&self) -> &SliceState {
        &self.state
    }

    pub fn stats(&self) -> SliceStats {
        self.stats
    }

    pub fn executed(&self) -> &BTreeSet<StmtId> {
        &self.executed
    }

    /// First error met while consuming events through [`EventSink`].
    pub fn fault(&self) -> Option<&SliceError> {
        self.fault.as_ref()
    }

    pub fn active_data(&self, var: &RuntimeVar) -> StmtSet {
        self.state.active_data.get(var).cloned().unwrap_or_default()
    }

    pub fn active_control(&self, frame: u32, test: StmtId) -> StmtSet {
        self.state
            .active_control
            .get(&(frame, test))
            .cloned()
            .unwrap_or_default()
    }

    pub fn active_call(&self) -> &StmtSet {
        &self.state.active_call
    }

    pub fn apply(&mut self, event: &ExecEvent) -> Result<(), SliceError> {
        self.stats.events += 1;
        match event {
            ExecEvent::StmtExecuted {
                id,
                frame,
                defs,
                uses,
                receiver_members,
                ..
            } => self.on_stmt(*id, *frame, defs, uses, receiver_members),
            ExecEvent::CallEntered {
                site,
                frame,
                bindings,
                ..
            } => self.on_call(*site, *frame, bindings),
            ExecEvent::AboutToReturn {
                node, frame, uses, ..
            } => self.on_about_to_return(*node, *frame, uses),
            ExecEvent::Returned {
                site,
                callee_frame,
                copy_back,
                reset,
                target,
                ..
            } => self.on_returned(*site, *callee_frame, copy_back, reset, target.as_ref()),
            ExecEvent::LoopExited { node, frame } => self.on_loop_exit(*node, *frame),
            ExecEvent::InputConsumed { .. }
            | ExecEvent::OutputProduced { .. }
            | ExecEvent::UninitializedRead { .. } => Ok(()),
        }
    }

    fn union_data<'a>(&self, out: &mut StmtSet, vars: impl IntoIterator<Item = &'a RuntimeVar>) {
        for v in vars {
            if let Some(s) = self.state.active_data.get(v) {
                out.union_with(s);
            }
        }
    }

    fn set_data(&mut self, var: RuntimeVar, slice: StmtSet) {
        self.stats.updates += 1;
        if slice.is_empty() {
            self.state.active_data.remove(&var);
        } else {
            self.state.active_data.insert(var, slice);
        }
    }

    fn kind(&self, id: StmtId) -> Result<NodeKind, SliceError> {
        self.cdg.kind(id).ok_or(SliceError::UnknownNode(id))
    }

    /// Active control slice of the test `id` depends on, in `frame`.
    fn control_term(&self, frame: u32, id: StmtId) -> StmtSet {
        match self.cdg.control_test(id) {
            Some(t) => self.active_control(frame, t),
            None => StmtSet::new(),
        }
    }

    pub fn on_stmt(
        &mut self,
        id: StmtId,
        frame: u32,
        defs: &[RuntimeVar],
        uses: &[RuntimeVar],
        receiver_members: &[RuntimeVar],
    ) -> Result<(), SliceError> {
        let kind = self.kind(id)?;
        let ctrl = self.control_term(frame, id);

        // {u} ∪ data(uses) ∪ ctrl ∪ call, shared by defs and tests
        let mut fresh = StmtSet::singleton(id);
        self.union_data(&mut fresh, uses);
        fresh.union_with(&ctrl);
        fresh.union_with(&self.state.active_call);

        if kind != NodeKind::Call {
            for d in defs {
                self.set_data(d.clone(), fresh.clone());
            }
        }

        for v in defs.iter().chain(uses).chain(receiver_members) {
            let mut answer = self.active_data(v);
            answer.union_with(&ctrl);
            self.state.dyn_table.insert((id, v.key()), answer);
            self.stats.updates += 1;
        }

        if kind.is_test() {
            self.state.active_control.insert((frame, id), fresh);
            self.stats.updates += 1;
        }
        self.executed.insert(id);
        Ok(())
    }

    pub fn on_call(
        &mut self,
        site: StmtId,
        frame: u32,
        bindings: &[Binding],
    ) -> Result<(), SliceError> {
        self.kind(site)?;
        let ctrl = self.control_term(frame, site);
        let outer = self.state.active_call.clone();
        let mut call = StmtSet::singleton(site);
        call.union_with(&outer);
        call.union_with(&ctrl);
        self.state.call_stack.push(outer);
        self.state.active_call = call;
        self.stats.updates += 1;

        for b in bindings {
            let mut slice = self.state.active_call.clone();
            self.union_data(&mut slice, &b.actuals);
            self.set_data(b.formal.clone(), slice);
        }
        Ok(())
    }

    pub fn on_about_to_return(
        &mut self,
        node: Option<StmtId>,
        frame: u32,
        uses: &[RuntimeVar],
    ) -> Result<(), SliceError> {
        if let Some(r) = node {
            self.kind(r)?;
            let mut slice = StmtSet::singleton(r);
            self.union_data(&mut slice, uses);
            slice.union_with(&self.control_term(frame, r));
            slice.union_with(&self.state.active_call);
            self.state.active_return = slice;
            self.stats.updates += 1;
        }
        Ok(())
    }

    pub fn on_returned(
        &mut self,
        site: StmtId,
        callee_frame: u32,
        copy_back: &[CopyBack],
        reset: &[RuntimeVar],
        target: Option<&RuntimeVar>,
    ) -> Result<(), SliceError> {
        let Some(outer) = self.state.call_stack.pop() else {
            return Err(SliceError::UnbalancedReturn(site));
        };
        for cb in copy_back {
            let slice = self.active_data(&cb.formal);
            self.set_data(cb.actual.clone(), slice);
        }
        if let Some(t) = target {
            let slice = std::mem::take(&mut self.state.active_return);
            self.set_data(t.clone(), slice);
        }
        for v in reset {
            self.state.active_data.remove(v);
        }
        self.state
            .active_control
            .retain(|(frame, _), _| *frame != callee_frame);
        self.state.active_call = outer;
        self.state.active_return = StmtSet::new();
        self.stats.updates += 1;
        Ok(())
    }

    pub fn on_loop_exit(&mut self, node: StmtId, frame: u32) -> Result<(), SliceError> {
        self.kind(node)?;
        self.state.active_control.remove(&(frame, node));
        self.stats.updates += 1;
        Ok(())
    }

    /// Slice of `var` at the last execution of `node`. `var` is written as
    /// in the source: `p`, `T1.a`, or a method local such as `x`.
    pub fn slice_of(&self, node: StmtId, var: &str) -> Result<StmtSet, SliceError> {
        if !self.executed.contains(&node) {
            return Err(SliceError::NotExecuted(node));
        }
        [true, false]
            .into_iter()
            .find_map(|in_main| {
                self.state
                    .dyn_table
                    .get(&(node, VarKey::parse(var, in_main)))
            })
            .cloned()
            .ok_or_else(|| SliceError::VarNotAtNode {
                node,
                var: var.to_string(),
            })
    }

    /// Every (statement, variable) pair with a recorded slice.
    pub fn criteria(&self) -> impl Iterator<Item = (&(StmtId, VarKey), &StmtSet)> {
        self.state.dyn_table.iter()
    }

    /// Union of the current slices of every member of a `main` object.
    pub fn slice_of_object(&self, name: &str) -> Result<StmtSet, SliceError> {
        let members = self
            .cdg
            .main_objects()
            .get(name)
            .ok_or_else(|| SliceError::UnknownObject(name.to_string()))?;
        let mut out = StmtSet::new();
        for m in members {
            out.union_with(&self.active_data(&RuntimeVar::member(MAIN_FRAME, name, m)));
        }
        Ok(out)
    }
}

impl EventSink for Slicer<'_> {
    fn event(&mut self, event: ExecEvent) {
        if self.fault.is_none() {
            if let Err(e) = self.apply(&event) {
                self.fault = Some(e);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cdg::build_cdg;
    use crate::frontend::parse;
    use crate::interp::{run, DEFAULT_BUDGET};

    const SAMPLE: &str = include_str!("../tests/data/sample.oo");

    fn set(ids: &[StmtId]) -> StmtSet {
        ids.iter().copied().collect()
    }

    #[test]
    fn fresh_state_is_empty_and_reset_restores_it() {
        let p = parse(SAMPLE).unwrap();
        let g = build_cdg(&p);
        let mut s = Slicer::new(&g);
        assert_eq!(*s.state(), SliceState::default());
        assert_eq!(s.state().cardinality(), 0);
        for id in 1..=24 {
            assert_eq!(s.slice_of(id, "p"), Err(SliceError::NotExecuted(id)));
        }
        let (events, _) = run(&p, &[1, 2, 3, 4], DEFAULT_BUDGET);
        for e in &events {
            s.apply(e).unwrap();
        }
        assert_ne!(*s.state(), SliceState::default());
        s.reset();
        assert_eq!(*s.state(), SliceState::default());
        assert!(s.executed().is_empty());
    }

    #[test]
    fn step_by_step_on_sample() {
        let p = parse(SAMPLE).unwrap();
        let g = build_cdg(&p);
        let (events, _) = run(&p, &[1, 2, 3, 4], DEFAULT_BUDGET);
        let mut s = Slicer::new(&g);
        let mut saw_get_entry = false;
        for e in &events {
            s.apply(e).unwrap();
            match e {
                ExecEvent::StmtExecuted { id: 2, .. } => {
                    assert_eq!(s.active_data(&RuntimeVar::main("p")), set(&[2]));
                    assert_eq!(s.slice_of(2, "p").unwrap(), set(&[2]));
                }
                ExecEvent::CallEntered {
                    site: 5,
                    callee_frame,
                    ..
                } => {
                    saw_get_entry = true;
                    assert_eq!(*s.active_call(), set(&[5]));
                    let x = RuntimeVar::local(*callee_frame, "x");
                    let y = RuntimeVar::local(*callee_frame, "y");
                    assert_eq!(s.active_data(&x), set(&[2, 5]));
                    assert_eq!(s.active_data(&y), set(&[4, 5]));
                }
                ExecEvent::StmtExecuted {
                    id: 17, frame: 2, ..
                } => {
                    assert_eq!(s.active_data(&RuntimeVar::main("T1.a")), set(&[2, 5, 17]));
                }
                ExecEvent::Returned {
                    site: 5,
                    callee_frame,
                    ..
                } => {
                    assert!(s
                        .active_data(&RuntimeVar::local(*callee_frame, "x"))
                        .is_empty());
                    assert!(s
                        .active_data(&RuntimeVar::local(*callee_frame, "y"))
                        .is_empty());
                    assert!(s.active_call().is_empty());
                }
                _ => {}
            }
        }
        assert!(saw_get_entry);
        assert!(s.state().call_stack.is_empty());
        assert!(s.state().active_return.is_empty());
    }

    #[test]
    fn unknown_nodes_and_unbalanced_returns_are_errors() {
        let p = parse(SAMPLE).unwrap();
        let g = build_cdg(&p);
        let mut s = Slicer::new(&g);
        assert_eq!(
            s.on_stmt(99, 1, &[], &[], &[]),
            Err(SliceError::UnknownNode(99))
        );
        assert_eq!(
            s.on_returned(5, 2, &[], &[], None),
            Err(SliceError::UnbalancedReturn(5))
        );
    }

    #[test]
    fn queries_distinguish_missing_variables_and_objects() {
        let p = parse(SAMPLE).unwrap();
        let g = build_cdg(&p);
        let (events, _) = run(&p, &[1, 2, 3, 4], DEFAULT_BUDGET);
        let mut s = Slicer::new(&g);
        for e in &events {
            s.apply(e).unwrap();
        }
        assert!(matches!(
            s.slice_of(2, "q"),
            Err(SliceError::VarNotAtNode { node: 2, .. })
        ));
        assert_eq!(
            s.slice_of_object("T9"),
            Err(SliceError::UnknownObject("T9".into()))
        );
        // method locals are addressed by their bare names
        assert_eq!(s.slice_of(17, "x").unwrap(), set(&[8, 11]));
        // an empty slice is a valid answer, distinct from "not executed"
        let g2 = build_cdg(&parse("void main() { int a; #1: cout << a; }").unwrap());
        let p2 = parse("void main() { int a; #1: cout << a; }").unwrap();
        let mut s2 = Slicer::new(&g2);
        for e in &run(&p2, &[], 10).0 {
            s2.apply(e).unwrap();
        }
        assert_eq!(s2.slice_of(1, "a").unwrap(), StmtSet::new());
    }

    #[test]
    fn stmt_set_display() {
        assert_eq!(set(&[5, 2, 17]).to_string(), "{2,5,17}");
        assert_eq!(StmtSet::new().to_string(), "{}");
    }
}
