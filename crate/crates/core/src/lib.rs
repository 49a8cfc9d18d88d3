//! Dynamic slicing for a miniature object-oriented language.
//!
//! The pipeline is: [`frontend::parse`] a program, build its control
//! dependence graph with [`cdg::build_cdg`], execute it with
//! [`interp::run`] (or stream events with [`interp::run_with`]) and feed
//! the events to a [`slicer::Slicer`]. The slicer keeps only live slice
//! state, never the execution history. [`oracle`] is an independent
//! reference built from the full dynamic dependence graph and is meant
//! for testing.

pub mod cdg;
pub mod frontend;
pub mod gen;
pub mod interp;
pub mod oracle;
pub mod slicer;

pub use cdg::{build_cdg, Cdg};
pub use frontend::{parse, Program, StmtId};
pub use interp::{run, run_with, ExecEvent, RuntimeVar};
pub use slicer::{Slicer, StmtSet};
