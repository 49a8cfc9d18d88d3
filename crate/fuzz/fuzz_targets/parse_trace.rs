#![no_main]

use dynslice::interp::parse_trace;
use dynslice::oracle::cross_check;
use dynslice::{build_cdg, parse};
use libfuzzer_sys::fuzz_target;

const SAMPLE: &str = include_str!("../../crates/core/tests/data/sample.oo");

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(events) = parse_trace(text) else {
        return;
    };
    let program = parse(SAMPLE).unwrap();
    let cdg = build_cdg(&program);
    // any verdict is fine; only panics are failures
    let _ = cross_check(&cdg, &events);
});
