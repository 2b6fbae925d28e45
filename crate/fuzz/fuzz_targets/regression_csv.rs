#![no_main]

use libfuzzer_sys::fuzz_target;
use randsel::lasso_select::read_regression_csv;

// Accepted input must give a response and design of matching, nonzero size
// holding only finite values.
fuzz_target!(|data: &[u8]| {
    if let Ok((design, y)) = read_regression_csv(data) {
        assert_eq!(design.nrows(), y.len());
        assert!(!y.is_empty() && design.ncols() >= 1);
        assert!(design.iter().chain(y.iter()).all(|v| v.is_finite()));
    }
});
