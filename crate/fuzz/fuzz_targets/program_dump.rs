#![no_main]

use fdgroup_conic::{parse_program, write_program};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(prog) = parse_program(text) else { return };
    let _ = prog.validate();
    let text = write_program(&prog);
    let again = parse_program(&text).expect("dump of a parsed program must parse");
    assert_eq!(write_program(&again), text);
});
