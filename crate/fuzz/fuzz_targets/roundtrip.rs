#![no_main]

use libfuzzer_sys::fuzz_target;
use ppmx::ppm_codec::{compress, decompress, ModelConfig, Pitch};

// First byte: mode and order; second: pitch (0 = auto).
fuzz_target!(|data: &[u8]| {
    if data.len() < 2 {
        return;
    }
    let (cfg_byte, pitch_byte, input) = (data[0], data[1], &data[2..]);
    let cfg = if cfg_byte & 0x80 == 0 {
        ModelConfig::classic(cfg_byte % 8 + 1)
    } else {
        let order = cfg_byte % 32 + 1;
        let pitch = match pitch_byte % (order + 1) {
            0 => Pitch::Auto,
            p => Pitch::Fixed(p),
        };
        ModelConfig::ccm(order, pitch)
    };
    let packed = compress(input, &cfg).unwrap();
    assert_eq!(decompress(&packed).unwrap(), input);
});
