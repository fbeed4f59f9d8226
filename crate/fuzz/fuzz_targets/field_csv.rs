#![no_main]

use libfuzzer_sys::fuzz_target;
use sparsefar::indicators::{IndicatorKind, SamplingGrid};
use sparsefar::io::read_field_csv;

fuzz_target!(|data: &[u8]| {
    let grid = SamplingGrid {
        x_lo: -1.0,
        x_hi: 1.0,
        y_lo: -1.0,
        y_hi: 1.0,
        p: 3,
        q: 3,
    };
    if let Ok(f) = read_field_csv(data, grid, IndicatorKind::Iminus) {
        assert_eq!(f.values.len(), 9);
    }
});
