#![no_main]

use dynslice::frontend::pretty;
use dynslice::interp::run;
use dynslice::{build_cdg, parse};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(src) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(program) = parse(src) else {
        return;
    };
    let again = parse(&pretty(&program)).expect("pretty output parses");
    assert_eq!(again.without_positions(), program.without_positions());
    let cdg = build_cdg(&program);
    let _ = cdg.export_dot();
    let _ = run(&program, &[1, 2, 3, 4], 2_000);
});
