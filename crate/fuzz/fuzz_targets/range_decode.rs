#![no_main]

use libfuzzer_sys::fuzz_target;
use ppmx::entropy::{CodingDistribution, RangeDecoder};

// Leading bytes pick the slot frequencies; the rest is the coded stream.
fuzz_target!(|data: &[u8]| {
    let Some((&n, rest)) = data.split_first() else {
        return;
    };
    let slots = usize::from(n % 16) + 1;
    if rest.len() < slots {
        return;
    }
    let (freqs, stream) = rest.split_at(slots);
    let freqs: Vec<u32> = freqs.iter().map(|&f| u32::from(f) * 97 + 1).collect();
    let dist = CodingDistribution::new(freqs).unwrap();
    let Ok(mut dec) = RangeDecoder::new(stream) else {
        return;
    };
    for _ in 0..10_000 {
        match dec.decode(&dist) {
            Ok(slot) => assert!(slot < slots),
            Err(_) => break,
        }
    }
    assert!(dec.bytes_consumed() <= stream.len());
});
