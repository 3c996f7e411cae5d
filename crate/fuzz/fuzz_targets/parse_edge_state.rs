#![no_main]

use libfuzzer_sys::fuzz_target;
use qwalk::{fixtures, EdgeSpec};

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(spec) = text.parse::<EdgeSpec>() else {
        return;
    };
    let again: EdgeSpec = spec.to_string().parse().expect("display output parses");
    assert_eq!(again, spec);

    if let Ok(state) = fixtures::diamond().resolve(&spec) {
        assert_eq!(state.reversed().reversed(), state);
    }
});
