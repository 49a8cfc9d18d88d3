//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::time::{Duration, Instant};

use dynslice::frontend::{FrontendError, ResolveError};
use dynslice::gen::generate;
use dynslice::interp::{
    run, run_with, ExecEvent, ExitStatus, RuntimeVar, DEFAULT_BUDGET, MAIN_FRAME,
};
use dynslice::oracle::{build_ddg, cross_check, DdgBuilder};
use dynslice::{build_cdg, parse, Slicer, StmtId, StmtSet};

const SAMPLE: &str = include_str!("data/sample.oo");
const LOOP: &str = include_str!("data/loop.oo");
const SAMPLE_INPUTS: [i64; 4] = [1, 2, 3, 4];

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn set(ids: &[StmtId]) -> StmtSet {
    ids.iter().copied().collect()
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let t = start.elapsed();
    if t < limit {
        Ok(t)
    } else {
        Err(format!("took {t:.2?}, limit {limit:.0?}"))
    }
}

// ---------------------------------------------------------------------------
// Walkthrough of the worked example

#[derive(Clone, Copy)]
enum Moment {
    /// Right after the main-frame statement with this id.
    After(StmtId),
    /// Right after parameters are bound at this call site.
    Entered(StmtId),
}

#[derive(Clone, Copy)]
enum Query {
    /// Active data slice of a variable of `main`.
    Var(&'static str),
    /// Active data slice of a formal of the callee just entered.
    Formal(&'static str),
    /// Recorded slice of (statement, variable).
    At(StmtId, &'static str),
    /// Union over an object's members.
    Object(&'static str),
}

struct Expect {
    when: Moment,
    what: Query,
    want: &'static [StmtId],
}

const fn after(n: StmtId, what: Query, want: &'static [StmtId]) -> Expect {
    Expect {
        when: Moment::After(n),
        what,
        want,
    }
}

const fn entered(n: StmtId, what: Query, want: &'static [StmtId]) -> Expect {
    Expect {
        when: Moment::Entered(n),
        what,
        want,
    }
}

use Query::*;

const WALKTHROUGH: &[Expect] = &[
    after(2, Var("p"), &[2]),
    after(2, At(2, "p"), &[2]),
    after(4, Var("q"), &[4]),
    after(4, At(4, "q"), &[4]),
    entered(5, Formal("x"), &[2, 5]),
    entered(5, Formal("y"), &[4, 5]),
    after(5, Var("T1.a"), &[2, 5, 17]),
    after(5, At(17, "T1.a"), &[2, 5, 17]),
    after(5, Var("T1.b"), &[4, 5, 18]),
    after(5, At(18, "T1.b"), &[4, 5, 18]),
    after(6, At(19, "T1.a"), &[2, 5, 17]),
    after(6, At(20, "T1.b"), &[4, 5, 18]),
    after(6, Object("T1"), &[2, 4, 5, 17, 18]),
    after(8, Var("p"), &[8]),
    after(8, At(8, "p"), &[8]),
    after(10, Var("q"), &[10]),
    after(10, At(10, "q"), &[10]),
    entered(11, Formal("x"), &[8, 11]),
    entered(11, Formal("y"), &[10, 11]),
    after(11, Var("T2.a"), &[8, 11, 17]),
    after(11, At(17, "T2.a"), &[8, 11, 17]),
    after(11, Var("T2.b"), &[10, 11, 18]),
    after(12, At(19, "T2.a"), &[8, 11, 17]),
    after(12, At(20, "T2.b"), &[10, 11, 18]),
    after(12, Object("T2"), &[8, 10, 11, 17, 18]),
    entered(13, Formal("tp1.a"), &[2, 5, 13, 17]),
    entered(13, Formal("tp1.b"), &[4, 5, 13, 18]),
    entered(13, Formal("tp2.a"), &[8, 11, 13, 17]),
    entered(13, Formal("tp2.b"), &[10, 11, 13, 18]),
    after(13, Var("T3.a"), &[2, 5, 8, 11, 13, 17, 21]),
    after(13, Var("T3.b"), &[4, 5, 10, 11, 13, 18, 22]),
    after(13, At(13, "T3.a"), &[2, 5, 8, 11, 13, 17, 21]),
    after(13, At(13, "T3.b"), &[4, 5, 10, 11, 13, 18, 22]),
    after(14, At(19, "T3.a"), &[2, 5, 8, 11, 13, 17, 21]),
    after(14, At(20, "T3.b"), &[4, 5, 10, 11, 13, 18, 22]),
    after(14, Object("T3"), &[2, 4, 5, 8, 10, 11, 13, 17, 18, 21, 22]),
    entered(15, Formal("tp3.a"), &[2, 5, 8, 11, 13, 15, 17, 21]),
    entered(15, Formal("tp3.b"), &[4, 5, 10, 11, 13, 15, 18, 22]),
    after(15, Var("T4.a"), &[2, 5, 8, 11, 13, 15, 17, 21, 23]),
    after(15, Var("T4.b"), &[4, 5, 10, 11, 13, 15, 18, 22, 24]),
    after(16, At(16, "T4.a"), &[2, 5, 8, 11, 13, 15, 17, 21, 23]),
    after(16, At(16, "T4.b"), &[4, 5, 10, 11, 13, 15, 18, 22, 24]),
    after(
        16,
        Object("T4"),
        &[2, 4, 5, 8, 10, 11, 13, 15, 17, 18, 21, 22, 23, 24],
    ),
];

fn moment_of(e: &ExecEvent) -> Option<(Moment, u32)> {
    match e {
        ExecEvent::StmtExecuted { id, frame, .. } if *frame == MAIN_FRAME => {
            Some((Moment::After(*id), *frame))
        }
        ExecEvent::CallEntered {
            site, callee_frame, ..
        } => Some((Moment::Entered(*site), *callee_frame)),
        _ => None,
    }
}

fn same(a: Moment, b: Moment) -> bool {
    match (a, b) {
        (Moment::After(x), Moment::After(y)) | (Moment::Entered(x), Moment::Entered(y)) => x == y,
        _ => false,
    }
}

fn describe(e: &Expect) -> String {
    let when = match e.when {
        Moment::After(n) => format!("after {n}"),
        Moment::Entered(n) => format!("entering call {n}"),
    };
    let what = match e.what {
        Var(v) | Formal(v) => format!("ADS({v})"),
        At(n, v) => format!("DyanSlice({n},{v})"),
        Object(o) => format!("DyanSlice({o})"),
    };
    format!("{what} {when}")
}

fn formal(frame: u32, name: &str) -> RuntimeVar {
    match name.split_once('.') {
        Some((o, m)) => RuntimeVar::member(frame, o, m),
        None => RuntimeVar::local(frame, name),
    }
}

/// Walks the sample trace and evaluates every walkthrough entry at its
/// moment with `eval(query, frame, prefix_end)`. Returns the number of
/// entries checked.
fn walk(
    events: &[ExecEvent],
    mut on_event: impl FnMut(&ExecEvent) -> Result<(), String>,
    mut eval: impl FnMut(Query, u32, usize) -> Result<StmtSet, String>,
) -> Result<usize, String> {
    let mut checked = 0;
    for (i, e) in events.iter().enumerate() {
        on_event(e)?;
        let Some((now, frame)) = moment_of(e) else {
            continue;
        };
        for x in WALKTHROUGH.iter().filter(|x| same(x.when, now)) {
            let got = eval(x.what, frame, i + 1)?;
            if got != set(x.want) {
                return Err(format!("{}: got {got}, want {}", describe(x), set(x.want)));
            }
            checked += 1;
        }
    }
    if checked != WALKTHROUGH.len() {
        return Err(format!(
            "only {checked} of {} moments reached",
            WALKTHROUGH.len()
        ));
    }
    Ok(checked)
}

fn sample_trace() -> Result<(dynslice::Program, Vec<ExecEvent>), String> {
    let p = parse(SAMPLE).map_err(|e| e.to_string())?;
    let (events, status) = run(&p, &SAMPLE_INPUTS, DEFAULT_BUDGET);
    if status != ExitStatus::Completed {
        return Err(format!("sample did not complete: {status:?}"));
    }
    Ok((p, events))
}

fn walk_streaming(events: &[ExecEvent], cdg: &dynslice::Cdg) -> Result<usize, String> {
    let slicer = std::cell::RefCell::new(Slicer::new(cdg));
    walk(
        events,
        |e| slicer.borrow_mut().apply(e).map_err(|e| e.to_string()),
        |q, frame, _| {
            let s = slicer.borrow();
            match q {
                Var(v) => Ok(s.active_data(&RuntimeVar::main(v))),
                Formal(v) => Ok(s.active_data(&formal(frame, v))),
                At(n, v) => s.slice_of(n, v).map_err(|e| e.to_string()),
                Object(o) => s.slice_of_object(o).map_err(|e| e.to_string()),
            }
        },
    )
}

fn walk_reference(events: &[ExecEvent]) -> Result<usize, String> {
    walk(
        events,
        |_| Ok(()),
        |q, frame, end| {
            let ddg = build_ddg(&events[..end]).map_err(|e| e.to_string())?;
            match q {
                Var(v) => Ok(ddg.slice_of_var(&RuntimeVar::main(v))),
                Formal(v) => Ok(ddg.slice_of_var(&formal(frame, v))),
                At(n, v) => ddg.backward_slice(n, v).map_err(|e| e.to_string()),
                Object(o) => Ok(ddg.slice_of_object(o)),
            }
        },
    )
}

// ---------------------------------------------------------------------------
// Criteria

fn golden_trace() -> Outcome {
    let start = Instant::now();
    let (p, events) = sample_trace()?;
    let cdg = build_cdg(&p);
    let n = walk_streaming(&events, &cdg)?;
    let t = within(Duration::from_secs(1), start)?;
    Ok(format!("{n} walkthrough values, {t:.2?}"))
}

fn overload_dispatch() -> Outcome {
    let start = Instant::now();
    let (_, events) = sample_trace()?;
    let callee = |site: StmtId| {
        events.iter().find_map(|e| match e {
            ExecEvent::CallEntered {
                site: s, callee, ..
            } if *s == site => Some(callee.clone()),
            _ => None,
        })
    };
    for (site, want) in [(13, "test::add(test,test)"), (15, "test::add(test,int)")] {
        let got = callee(site);
        if got.as_deref() != Some(want) {
            return Err(format!("node {site} dispatched to {got:?}, want {want}"));
        }
    }
    let bad = SAMPLE.replace(
        "#16: T4.display();",
        "#16: T4.display();\n    T4.add(p, T1);",
    );
    match parse(&bad) {
        Err(FrontendError::NoMatch {
            source: ResolveError::NoMatch { call, .. },
            ..
        }) if call.to_string() == "add(int,test)" => {}
        other => {
            return Err(format!(
                "third call shape: expected no-match, got {other:?}"
            ))
        }
    }
    let t = within(Duration::from_secs(1), start)?;
    Ok(format!(
        "13 -> add(test,test), 15 -> add(test,int), add(int,test) rejected, {t:.2?}"
    ))
}

fn differential() -> Outcome {
    const PROGRAMS: u64 = 250;
    let start = Instant::now();
    let mut criteria = 0;
    for seed in 0..PROGRAMS {
        let g = generate(seed);
        let cdg = build_cdg(&g.program);
        let (events, _) = run(&g.program, &g.inputs, DEFAULT_BUDGET);
        criteria += cross_check(&cdg, &events).map_err(|e| format!("seed {seed}: {e}"))?;
    }
    let t = within(Duration::from_secs(60), start)?;
    Ok(format!(
        "{PROGRAMS} programs, {criteria} criteria, 0 mismatches, {t:.2?}"
    ))
}

fn loop_semantics() -> Outcome {
    let p = parse(LOOP).map_err(|e| e.to_string())?;
    let cdg = build_cdg(&p);
    let (events, _) = run(&p, &[3], DEFAULT_BUDGET);
    let mut s = Slicer::new(&cdg);
    let mut exits = 0;
    for e in &events {
        s.apply(e).map_err(|e| e.to_string())?;
        if let ExecEvent::LoopExited { node: 4, frame } = e {
            exits += 1;
            if !s.active_control(*frame, 4).is_empty() {
                return Err("loop test slice survives the loop exit".into());
            }
        }
    }
    if exits != 1 {
        return Err(format!("{exits} loop exits"));
    }
    let ddg = build_ddg(&events).map_err(|e| e.to_string())?;
    let q = |n, v| -> Result<(StmtSet, StmtSet), String> {
        Ok((
            s.slice_of(n, v).map_err(|e| e.to_string())?,
            ddg.backward_slice(n, v).map_err(|e| e.to_string())?,
        ))
    };
    let (y, y_ref) = q(8, "y")?;
    if y != set(&[7]) || y_ref != y {
        return Err(format!(
            "slice(8,y): streaming {y}, reference {y_ref}, want {{7}}"
        ));
    }
    let (x, x_ref) = q(9, "x")?;
    // x reaches the loop only because 5 writes it inside the body
    if x != set(&[1, 2, 3, 4, 5, 6]) || x_ref != x {
        return Err(format!("slice(9,x): streaming {x}, reference {x_ref}"));
    }
    let n = cross_check(&cdg, &events).map_err(|e| e.to_string())?;
    Ok(format!(
        "slice(8,y)={y}, slice(9,x)={x}, {n} criteria agree"
    ))
}

const SPACE_PROGRAM: &str = "void main() {
    int n, i, s, t;
    #1: cin >> n;
    #2: i = 0;
    #3: s = 0;
    #4: t = 1;
    #5: while (i < n) {
        #6: s = s + i;
        #7: if (s > t) {
            #8: t = t + 3;
        }
        #9: i = i + 1;
    }
    #10: cout << s + t;
}";

/// Peak slicer cardinality and final reference node count for `n`
/// iterations of the space program.
fn space_run(p: &dynslice::Program, cdg: &dynslice::Cdg, n: i64) -> Result<(usize, usize), String> {
    let mut slicer = Slicer::new(cdg);
    let mut ddg = DdgBuilder::new();
    let mut peak = 0;
    let mut sink = |e: ExecEvent| {
        slicer.apply(&e).expect("slicer accepts its own trace");
        peak = peak.max(slicer.state().cardinality());
        dynslice::interp::EventSink::event(&mut ddg, e);
    };
    run_with(p, &[n], 10_000_000, &mut sink).map_err(|e| e.to_string())?;
    Ok((peak, ddg.finish().map_err(|e| e.to_string())?.node_count()))
}

fn streaming_space() -> Outcome {
    let p = parse(SPACE_PROGRAM).map_err(|e| e.to_string())?;
    if p.stmt_count != 10 {
        return Err(format!("space program has {} statements", p.stmt_count));
    }
    let cdg = build_cdg(&p);
    let (peak_small, n1k) = space_run(&p, &cdg, 1_000)?;
    let (_, n2k) = space_run(&p, &cdg, 2_000)?;
    let (_, n10k) = space_run(&p, &cdg, 10_000)?;
    let (peak_large, n100k) = space_run(&p, &cdg, 100_000)?;
    if peak_small != peak_large {
        return Err(format!(
            "peak cardinality {peak_small} at 10^3, {peak_large} at 10^5"
        ));
    }
    let step = n2k - n1k;
    if n10k - n1k != 9 * step || n100k - n10k != 90 * step {
        return Err(format!(
            "reference nodes not linear: {n1k}, {n2k}, {n10k}, {n100k}"
        ));
    }
    Ok(format!(
        "peak cardinality {peak_small} at both 10^3 and 10^5; reference nodes {n1k} -> {n100k} (+{} per iteration)",
        step as f64 / 1000.0
    ))
}

fn walkthrough_both_engines() -> Outcome {
    let (p, events) = sample_trace()?;
    let cdg = build_cdg(&p);
    let a = walk_streaming(&events, &cdg)?;
    let b = walk_reference(&events)?;
    let n = cross_check(&cdg, &events).map_err(|e| e.to_string())?;
    Ok(format!(
        "{a} values on streaming, {b} on reference, {n} final criteria agree"
    ))
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("golden trace reproduction", golden_trace),
        ("overload dispatch", overload_dispatch),
        ("differential testing", differential),
        ("loop semantics", loop_semantics),
        ("streaming space", streaming_space),
        (
            "walkthrough reproduced by both engines",
            walkthrough_both_engines,
        ),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
