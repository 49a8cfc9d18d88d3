use dynslice::build_cdg;
use dynslice::gen::{generate, generate_with, GenConfig};
use dynslice::interp::{run, ExitStatus, DEFAULT_BUDGET};
use dynslice::oracle::cross_check;

#[test]
fn streaming_matches_reference_on_generated_programs() {
    let mut completed = 0;
    let mut criteria = 0;
    for seed in 0..300 {
        let g = generate(seed);
        let cdg = build_cdg(&g.program);
        let (events, status) = run(&g.program, &g.inputs, DEFAULT_BUDGET);
        if status == ExitStatus::Completed {
            completed += 1;
        }
        match cross_check(&cdg, &events) {
            Ok(n) => criteria += n,
            Err(e) => panic!("seed {seed}: {e}\n{}", g.source),
        }
    }
    // most runs finish; the rest exhaust input inside a loop
    assert!(completed >= 250, "{completed}");
    assert!(criteria > 300 * 10, "{criteria}");
}

#[test]
fn seed_42_at_thirty_statements() {
    let g = generate_with(
        42,
        &GenConfig {
            max_stmts: 30,
            ..GenConfig::default()
        },
    );
    let cdg = build_cdg(&g.program);
    let (events, _) = run(&g.program, &g.inputs, DEFAULT_BUDGET);
    cross_check(&cdg, &events).unwrap();
}
