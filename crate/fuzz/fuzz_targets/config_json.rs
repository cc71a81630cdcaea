#![no_main]

use fdgroup_core::system::config::{parse_config, ConfigFormat};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    if let Ok(text) = std::str::from_utf8(data) {
        if let Ok((cfg, _)) = parse_config(text, ConfigFormat::Json) {
            // Anything that parses must also pass validation or report an error, never panic.
            let _ = cfg.validate();
        }
    }
});
