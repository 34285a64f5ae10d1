#![no_main]

use libfuzzer_sys::fuzz_target;
use ppmx::container::Container;

fuzz_target!(|data: &[u8]| {
    if let Ok(c) = Container::read(data) {
        assert_eq!(c.write(), data);
        assert_eq!(c.encoded_len(), data.len());
    }
});
