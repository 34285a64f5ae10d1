#![no_main]

use libfuzzer_sys::fuzz_target;
use ppmx_cli::bench::parse_order_list;

fuzz_target!(|data: &[u8]| {
    let Ok(s) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(orders) = parse_order_list(s) {
        assert!(orders.windows(2).all(|w| w[0] < w[1]));
        assert!(orders.first().map_or(true, |&o| o > 0));
    }
});
