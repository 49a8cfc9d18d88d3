use std::fmt;
use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cdg::NodeKind;
use crate::frontend::StmtId;

/// Invocation serial of `main`'s frame.
pub const MAIN_FRAME: u32 = 1;

/// A concrete storage location of one run.
///
/// Locals are owned by a frame; object members are owned by the frame that
/// declared the object, named `name.member`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RuntimeVar {
    pub frame: u32,
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub member: Option<String>,
}

impl RuntimeVar {
    pub fn local(frame: u32, name: impl Into<String>) -> Self {
        RuntimeVar {
            frame,
            name: name.into(),
            member: None,
        }
    }

    pub fn member(frame: u32, object: impl Into<String>, member: impl Into<String>) -> Self {
        RuntimeVar {
            frame,
            name: object.into(),
            member: Some(member.into()),
        }
    }

    /// Variable of `main` named by its display form, e.g. `p` or `T1.a`.
    pub fn main(display: &str) -> Self {
        match display.split_once('.') {
            Some((obj, m)) => RuntimeVar::member(MAIN_FRAME, obj, m),
            None => RuntimeVar::local(MAIN_FRAME, display),
        }
    }

    pub fn key(&self) -> VarKey {
        VarKey {
            in_main: self.frame == MAIN_FRAME,
            name: self.name.clone(),
            member: self.member.clone(),
        }
    }
}

impl fmt::Display for RuntimeVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(m) = &self.member {
            write!(f, ".{m}")?;
        }
        if self.frame != MAIN_FRAME {
            write!(f, "@{}", self.frame)?;
        }
        Ok(())
    }
}

/// Frame-independent name of a variable, used to key per-statement slices.
///
/// Variables of `main` keep their identity; variables of method
/// activations collapse across activations, so the table of a statement
/// inside a method holds the slice of its most recent execution.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarKey {
    pub in_main: bool,
    pub name: String,
    pub member: Option<String>,
}

impl VarKey {
    /// `display` as written by a user (`p`, `T1.a`, `x`), scoped to main or
    /// to a method activation.
    pub fn parse(display: &str, in_main: bool) -> Self {
        match display.split_once('.') {
            Some((n, m)) => VarKey {
                in_main,
                name: n.to_string(),
                member: Some(m.to_string()),
            },
            None => VarKey {
                in_main,
                name: display.to_string(),
                member: None,
            },
        }
    }
}

impl fmt::Display for VarKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if let Some(m) = &self.member {
            write!(f, ".{m}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ObjectRef {
    pub frame: u32,
    pub name: String,
}

/// Transfer of one actual into one formal slot at call entry. Object
/// arguments produce one binding per member.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Binding {
    pub formal: RuntimeVar,
    /// Variables read by the actual argument; empty for literals.
    pub actuals: Vec<RuntimeVar>,
    pub by_ref: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CopyBack {
    pub formal: RuntimeVar,
    pub actual: RuntimeVar,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutputValue {
    Int(i64),
    Text(String),
}

impl fmt::Display for OutputValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputValue::Int(n) => write!(f, "{n}"),
            OutputValue::Text(s) => f.write_str(s),
        }
    }
}

/// One step of an instrumented run.
///
/// A call statement produces `CallEntered`, the callee's events,
/// `AboutToReturn`, `Returned` and finally a `StmtExecuted` for the call
/// site itself.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "event")]
pub enum ExecEvent {
    StmtExecuted {
        id: StmtId,
        frame: u32,
        kind: NodeKind,
        /// Innermost enclosing test in the same activation.
        control: Option<StmtId>,
        defs: Vec<RuntimeVar>,
        uses: Vec<RuntimeVar>,
        /// Members of the receiver object, for call sites only.
        #[serde(default, skip_serializing_if = "Vec::is_empty")]
        receiver_members: Vec<RuntimeVar>,
    },
    CallEntered {
        site: StmtId,
        frame: u32,
        control: Option<StmtId>,
        callee: String,
        callee_frame: u32,
        receiver: ObjectRef,
        bindings: Vec<Binding>,
    },
    AboutToReturn {
        node: Option<StmtId>,
        frame: u32,
        control: Option<StmtId>,
        uses: Vec<RuntimeVar>,
    },
    Returned {
        site: StmtId,
        frame: u32,
        callee_frame: u32,
        copy_back: Vec<CopyBack>,
        reset: Vec<RuntimeVar>,
        target: Option<RuntimeVar>,
    },
    LoopExited {
        node: StmtId,
        frame: u32,
    },
    InputConsumed {
        node: StmtId,
        value: i64,
    },
    OutputProduced {
        node: StmtId,
        value: OutputValue,
    },
    UninitializedRead {
        node: StmtId,
        var: RuntimeVar,
    },
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace line {line}: {source}")]
    Malformed {
        line: usize,
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Writes one JSON object per line.
pub fn write_trace<'a>(
    events: impl IntoIterator<Item = &'a ExecEvent>,
    mut out: impl Write,
) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_trace(input: impl BufRead) -> Result<Vec<ExecEvent>, TraceError> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let e = serde_json::from_str(&line).map_err(|source| TraceError::Malformed {
            line: i + 1,
            source,
        })?;
        events.push(e);
    }
    Ok(events)
}

pub fn parse_trace(text: &str) -> Result<Vec<ExecEvent>, TraceError> {
    read_trace(text.as_bytes())
}
