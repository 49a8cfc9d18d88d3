//! Malformed input must produce errors, never panics.

use proptest::prelude::*;

use dynslice::interp::{parse_trace, run, ExecEvent, DEFAULT_BUDGET};
use dynslice::oracle::{build_ddg, cross_check};
use dynslice::{build_cdg, parse, Slicer};

const SAMPLE: &str = include_str!("data/sample.oo");

#[derive(Debug, Clone)]
enum Edit {
    Drop(usize),
    Dup(usize),
    Swap(usize, usize),
    Renumber(usize, u32),
    Reframe(usize, u32),
}

fn edit() -> impl Strategy<Value = Edit> {
    prop_oneof![
        any::<usize>().prop_map(Edit::Drop),
        any::<usize>().prop_map(Edit::Dup),
        (any::<usize>(), any::<usize>()).prop_map(|(a, b)| Edit::Swap(a, b)),
        (any::<usize>(), 0u32..30).prop_map(|(i, n)| Edit::Renumber(i, n)),
        (any::<usize>(), 0u32..6).prop_map(|(i, f)| Edit::Reframe(i, f)),
    ]
}

fn apply(events: &mut Vec<ExecEvent>, e: &Edit) {
    let n = events.len();
    match *e {
        Edit::Drop(i) => {
            events.remove(i % n);
        }
        Edit::Dup(i) => {
            let x = events[i % n].clone();
            events.insert(i % n, x);
        }
        Edit::Swap(a, b) => events.swap(a % n, b % n),
        Edit::Renumber(i, id) => match &mut events[i % n] {
            ExecEvent::StmtExecuted { id: x, .. }
            | ExecEvent::LoopExited { node: x, .. }
            | ExecEvent::CallEntered { site: x, .. }
            | ExecEvent::Returned { site: x, .. } => *x = id,
            ExecEvent::AboutToReturn { node, .. } => *node = Some(id),
            _ => {}
        },
        Edit::Reframe(i, f) => match &mut events[i % n] {
            ExecEvent::StmtExecuted { frame, .. }
            | ExecEvent::LoopExited { frame, .. }
            | ExecEvent::CallEntered { frame, .. }
            | ExecEvent::AboutToReturn { frame, .. } => *frame = f,
            ExecEvent::Returned { callee_frame, .. } => *callee_frame = f,
            _ => {}
        },
    }
}

proptest! {
    #[test]
    fn mutated_traces_do_not_panic(edits in proptest::collection::vec(edit(), 1..8)) {
        let p = parse(SAMPLE).unwrap();
        let cdg = build_cdg(&p);
        let (mut events, _) = run(&p, &[1, 2, 3, 4], DEFAULT_BUDGET);
        for e in &edits {
            if events.is_empty() {
                break;
            }
            apply(&mut events, e);
        }
        let mut s = Slicer::new(&cdg);
        for e in &events {
            if s.apply(e).is_err() {
                break;
            }
        }
        for n in 0..30 {
            let _ = s.slice_of(n, "T1.a");
        }
        let _ = build_ddg(&events);
        let _ = cross_check(&cdg, &events);
    }

    #[test]
    fn arbitrary_text_does_not_panic(text in "\\PC{0,200}") {
        let _ = parse(&text);
        let _ = parse_trace(&text);
    }

    #[test]
    fn token_soup_does_not_panic(
        toks in proptest::collection::vec(
            prop::sample::select(vec![
                "class", "c", "{", "}", "int", "a", ";", "public", ":", "void", "main", "(", ")",
                "cin", ">>", "cout", "<<", "if", "else", "while", "return", "=", "+", "/", "0",
                "o", ".", ",", "&", "#3:", "#0:", "#99:", "\"s\"", "f",
            ]),
            0..60,
        )
    ) {
        let src = toks.join(" ");
        if let Ok(p) = parse(&src) {
            let _ = run(&p, &[1, 2, 3], 500);
        }
    }
}
