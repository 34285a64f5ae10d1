#![no_main]

use libfuzzer_sys::fuzz_target;
use ppmx::container::Container;
use ppmx::ppm_codec::decode;

fuzz_target!(|data: &[u8]| {
    let Ok(c) = Container::read(data) else {
        return;
    };
    // Decoding time grows with the claimed length, not the input size.
    if c.original_length > 1 << 20 {
        return;
    }
    if let Ok(out) = decode(&c) {
        assert_eq!(out.len() as u64, c.original_length);
    }
});
