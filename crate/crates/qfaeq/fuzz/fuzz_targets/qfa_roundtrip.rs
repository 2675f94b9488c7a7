//! Any document the parser accepts must serialize canonically: the
//! serialized form re-parses, and serializing again is a fixed point.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qfaeq::io::{parse_qfa, serialize_qfa};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let Ok(qfa) = parse_qfa(text) else { return };
    let canonical = serialize_qfa(&qfa);
    let reparsed = parse_qfa(&canonical).expect("canonical form must re-parse");
    assert_eq!(
        serialize_qfa(&reparsed),
        canonical,
        "canonical serialization must be a fixed point"
    );
});
