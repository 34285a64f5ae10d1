#![no_main]

use libfuzzer_sys::fuzz_target;
use ppmx::huffman::HuffmanCodebook;

fuzz_target!(|data: &[u8]| {
    let Ok(cb) = HuffmanCodebook::deserialize_lengths(data) else {
        return;
    };
    assert_eq!(cb.serialize_lengths(), data);
    let mut codes: Vec<(u64, u8)> = (0..=255u8)
        .filter(|&s| cb.contains(s))
        .map(|s| {
            let cw = cb.codeword(s).unwrap();
            assert_eq!(cw.len, cb.length(s));
            (cw.bits, cw.len)
        })
        .collect();
    codes.sort_by_key(|&(bits, len)| (len, bits));
    for (i, &(a, la)) in codes.iter().enumerate() {
        for &(b, lb) in &codes[i + 1..] {
            assert!(b >> (lb - la) != a, "prefix violation");
        }
    }
});
