//! Word parsing and simulation on the bundled fixture: parsing must never
//! panic, and any accepted word must yield a probability in range with a
//! unit-norm final state.

#![no_main]

use libfuzzer_sys::fuzz_target;
use qfaeq::model::Word;
use qfaeq::MultiLetterQFA;
use std::sync::OnceLock;

fn fixture() -> &'static MultiLetterQFA {
    static FIXTURE: OnceLock<MultiLetterQFA> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        qfaeq::io::parse_qfa(include_str!("../../fixtures/regex-ab-star-b.qfa"))
            .expect("bundled fixture parses")
    })
}

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    if text.len() > 4096 {
        return;
    }
    let qfa = fixture();
    let Ok(word) = Word::parse(text, &qfa.alphabet) else { return };
    let p = qfa.acceptance_probability(&word).expect("valid word simulates");
    assert!((-1e-9..=1.0 + 1e-9).contains(&p), "probability {p} out of range");
    let state = qfa.final_state(&word).unwrap();
    assert!((state.norm() - 1.0).abs() <= 1e-9, "norm drifted to {}", state.norm());
});
