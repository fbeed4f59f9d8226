#![no_main]

use libfuzzer_sys::fuzz_target;
use sparsefar::forward::{MeasurementSet, ObservationSet};

fuzz_target!(|data: &[u8]| {
    let obs = ObservationSet::new(2, 2.0).expect("valid observation set");
    if let Ok(ms) = MeasurementSet::read_csv(data, obs) {
        let mut out = Vec::new();
        ms.write_csv(&mut out).expect("in-memory write");
        let back = MeasurementSet::read_csv(out.as_slice(), ms.obs.clone()).expect("own output reads");
        assert_eq!(back.values(), ms.values());
    }
});
