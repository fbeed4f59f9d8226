#![no_main]

use libfuzzer_sys::fuzz_target;
use sparsefar::expr::Expression;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(e) = Expression::parse(text) {
            let _ = e.eval(0.25, -0.5);
            // the stored source parses to the same thing
            let again = Expression::parse(e.source()).expect("source re-parses");
            let (a, b) = (e.eval(0.3, 0.7), again.eval(0.3, 0.7));
            assert!(a == b || (a.is_nan() && b.is_nan()));
        }
    }
});
