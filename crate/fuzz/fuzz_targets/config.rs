#![no_main]

use libfuzzer_sys::fuzz_target;

// Arbitrary documents must either load or fail with a config error.
fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok(cfg) = sparsefar::config::load_config(text) {
            let _ = cfg.resolve();
        }
    }
});
