#![no_main]

use libfuzzer_sys::fuzz_target;
use randsel::trunc_set::TruncationSet;

// Any accepted text must yield a canonical set whose printed form parses
// back to the same set.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(set) = text.parse::<TruncationSet>() else {
        return;
    };
    let iv = set.intervals();
    assert!(!iv.is_empty());
    for w in iv.windows(2) {
        assert!(w[0].1 < w[1].0);
    }
    for &(a, b) in iv {
        assert!(a < b);
    }
    let again: TruncationSet = set.to_string().parse().expect("printed form parses");
    assert_eq!(again, set);
});
