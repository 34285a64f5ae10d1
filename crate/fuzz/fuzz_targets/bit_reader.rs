#![no_main]

use libfuzzer_sys::fuzz_target;
use ppmx::entropy::{BitSink, BitSource};

// First byte chooses the read widths; reading the rest back through a sink
// must reproduce it.
fuzz_target!(|data: &[u8]| {
    let Some((&seed, rest)) = data.split_first() else {
        return;
    };
    let mut src = BitSource::new(rest);
    let mut sink = BitSink::new();
    let mut width = u32::from(seed % 64) + 1;
    loop {
        let remaining = src.bits_remaining();
        match src.read_bits(width) {
            Ok(v) => sink.write_bits(v, width),
            Err(_) => {
                assert!(remaining < u64::from(width));
                for _ in 0..remaining {
                    sink.write_bit(src.read_bit().unwrap());
                }
                break;
            }
        }
        width = width % 64 + 1;
    }
    assert_eq!(src.bits_read(), rest.len() as u64 * 8);
    assert_eq!(sink.finish(), rest);
});
