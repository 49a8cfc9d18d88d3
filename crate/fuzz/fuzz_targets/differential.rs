#![no_main]

use dynslice::build_cdg;
use dynslice::gen::{generate_with, GenConfig};
use dynslice::interp::{run, DEFAULT_BUDGET};
use dynslice::oracle::cross_check;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: [u8; 9]| {
    let seed = u64::from_le_bytes(data[..8].try_into().unwrap());
    let size = 4 + usize::from(data[8]) % 37;
    let g = generate_with(
        seed,
        &GenConfig {
            max_stmts: size,
            inputs: 200,
        },
    );
    let cdg = build_cdg(&g.program);
    let (events, _) = run(&g.program, &g.inputs, DEFAULT_BUDGET);
    if let Err(e) = cross_check(&cdg, &events) {
        panic!("{e}\n{}", g.source);
    }
});
