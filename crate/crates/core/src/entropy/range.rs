//! 32-bit range coder with carry propagation (LZMA-style byte output).

use super::CoderError;

/// Distributions are rescaled until their total drops below this bound.
pub const MAX_TOTAL: u32 = 1 << 24;

const TOP: u32 = 1 << 24;

/// Integer frequencies for one coding step. Every slot has frequency ≥ 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodingDistribution {
    // cum[i] = sum of freq[..i]; cum.len() = slot_count + 1
    cum: Vec<u32>,
}

impl Default for CodingDistribution {
    fn default() -> Self {
        Self { cum: vec![0, 1] }
    }
}

impl CodingDistribution {
    /// Builds a distribution, halving (rounding up) while the total is at
    /// least [`MAX_TOTAL`].
    pub fn new(freqs: Vec<u32>) -> Result<Self, CoderError> {
        let mut d = Self {
            cum: Vec::with_capacity(freqs.len() + 1),
        };
        d.fill(freqs)?;
        Ok(d)
    }

    /// `slots` equiprobable slots.
    pub fn uniform(slots: usize) -> Result<Self, CoderError> {
        Self::new(vec![1; slots])
    }

    /// Replaces the contents in place, reusing the allocation.
    pub fn fill<I: IntoIterator<Item = u32>>(&mut self, freqs: I) -> Result<(), CoderError> {
        self.cum.clear();
        self.cum.push(0);
        let mut acc = 0u64;
        for f in freqs {
            if f == 0 {
                return Err(CoderError::ZeroFrequency(self.cum.len() - 1));
            }
            acc += u64::from(f);
            // Wraps only for oversized totals, which are rescaled below.
            self.cum.push(acc as u32);
        }
        if self.cum.len() == 1 {
            return Err(CoderError::EmptyDistribution);
        }
        if acc >= u64::from(MAX_TOTAL) {
            self.rescale_from_scratch(acc);
        }
        Ok(())
    }

    #[cold]
    fn rescale_from_scratch(&mut self, total: u64) {
        let mut freqs: Vec<u64> = self
            .cum
            .windows(2)
            .map(|w| u64::from(w[1].wrapping_sub(w[0])))
            .collect();
        let mut total = total;
        while total >= u64::from(MAX_TOTAL) {
            for f in freqs.iter_mut() {
                *f = f.div_ceil(2);
            }
            total = freqs.iter().sum();
        }
        self.cum.clear();
        self.cum.push(0);
        let mut acc = 0u32;
        for f in freqs {
            acc += f as u32;
            self.cum.push(acc);
        }
    }

    pub fn slot_count(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn freq(&self, slot: usize) -> u32 {
        self.cum[slot + 1] - self.cum[slot]
    }

    pub fn freqs(&self) -> Vec<u32> {
        self.cum.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn total(&self) -> u32 {
        self.cum[self.cum.len() - 1]
    }

    fn start(&self, slot: usize) -> u32 {
        self.cum[slot]
    }

    /// Slot whose cumulative interval contains `target` (< total).
    fn find(&self, target: u32) -> usize {
        // first index with cum > target, minus one
        self.cum.partition_point(|&c| c <= target) - 1
    }
}

/// Encoder half of the range coder.
#[derive(Debug, Clone)]
pub struct RangeEncoder {
    low: u64,
    range: u32,
    cache: u8,
    cache_size: u64,
    // The first byte leaving the carry buffer is always zero and is dropped.
    skip_first: bool,
    out: Vec<u8>,
}

impl Default for RangeEncoder {
    fn default() -> Self {
        Self::new()
    }
}

impl RangeEncoder {
    pub fn new() -> Self {
        Self {
            low: 0,
            range: u32::MAX,
            cache: 0,
            cache_size: 1,
            skip_first: true,
            out: Vec::new(),
        }
    }

    pub fn encode(&mut self, dist: &CodingDistribution, slot: usize) -> Result<(), CoderError> {
        if slot >= dist.slot_count() {
            return Err(CoderError::SlotOutOfRange {
                slot,
                slots: dist.slot_count(),
            });
        }
        self.encode_interval(dist.start(slot), dist.freq(slot), dist.total());
        Ok(())
    }

    /// Codes the interval `[start, start + freq)` out of `total`. Callers
    /// guarantee `freq ≥ 1`, `start + freq ≤ total < MAX_TOTAL`.
    pub fn encode_interval(&mut self, start: u32, freq: u32, total: u32) {
        debug_assert!(freq >= 1 && start + freq <= total && total < MAX_TOTAL);
        let r = self.range / total;
        self.low += u64::from(r) * u64::from(start);
        self.range = r * freq;
        while self.range < TOP {
            self.range <<= 8;
            self.shift_low();
        }
    }

    fn shift_low(&mut self) {
        if (self.low as u32) < 0xFF00_0000 || (self.low >> 32) != 0 {
            let carry = (self.low >> 32) as u8;
            let mut byte = self.cache;
            loop {
                self.emit(byte.wrapping_add(carry));
                byte = 0xFF;
                self.cache_size -= 1;
                if self.cache_size == 0 {
                    break;
                }
            }
            self.cache = (self.low >> 24) as u8;
        }
        self.cache_size += 1;
        self.low = (self.low & 0x00FF_FFFF) << 8;
    }

    fn emit(&mut self, byte: u8) {
        if self.skip_first {
            debug_assert_eq!(byte, 0);
            self.skip_first = false;
        } else {
            self.out.push(byte);
        }
    }

    /// Bytes committed so far (excludes the up to five bytes still held in
    /// the carry buffer).
    pub fn bytes_committed(&self) -> usize {
        self.out.len()
    }

    /// Flushes the coder state. The result decodes every symbol encoded so
    /// far; the decoder must be told how many symbols to expect.
    pub fn finish(mut self) -> Vec<u8> {
        for _ in 0..5 {
            self.shift_low();
        }
        self.out
    }
}

/// Decoder half of the range coder.
#[derive(Debug, Clone)]
pub struct RangeDecoder<'a> {
    input: &'a [u8],
    pos: usize,
    code: u32,
    range: u32,
}

impl<'a> RangeDecoder<'a> {
    pub fn new(input: &'a [u8]) -> Result<Self, CoderError> {
        let mut dec = Self {
            input,
            pos: 0,
            code: 0,
            range: u32::MAX,
        };
        for _ in 0..4 {
            dec.code = (dec.code << 8) | u32::from(dec.next_byte()?);
        }
        Ok(dec)
    }

    fn next_byte(&mut self) -> Result<u8, CoderError> {
        let byte = *self.input.get(self.pos).ok_or(CoderError::Truncated)?;
        self.pos += 1;
        Ok(byte)
    }

    pub fn decode(&mut self, dist: &CodingDistribution) -> Result<usize, CoderError> {
        let total = dist.total();
        let target = self.target(total)?;
        let slot = dist.find(target);
        self.consume(dist.start(slot), dist.freq(slot), total)?;
        Ok(slot)
    }

    /// First half of a split decode: the cumulative value, in `[0, total)`,
    /// that the next interval must contain.
    pub fn target(&self, total: u32) -> Result<u32, CoderError> {
        let target = self.code / (self.range / total);
        if target >= total {
            return Err(CoderError::Corrupt);
        }
        Ok(target)
    }

    /// Second half of a split decode: removes the interval that contained
    /// [`target`](Self::target).
    pub fn consume(&mut self, start: u32, freq: u32, total: u32) -> Result<(), CoderError> {
        let r = self.range / total;
        self.code -= r * start;
        self.range = r * freq;
        while self.range < TOP {
            self.code = (self.code << 8) | u32::from(self.next_byte()?);
            self.range <<= 8;
        }
        Ok(())
    }

    /// True once every input byte has been consumed. A well-formed stream is
    /// exhausted exactly after its last symbol.
    pub fn is_exhausted(&self) -> bool {
        self.pos == self.input.len()
    }

    pub fn bytes_consumed(&self) -> usize {
        self.pos
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn roundtrip(dists: &[CodingDistribution], slots: &[usize]) -> Vec<u8> {
        let mut enc = RangeEncoder::new();
        for (d, &s) in dists.iter().zip(slots) {
            enc.encode(d, s).unwrap();
        }
        let bytes = enc.finish();
        let mut dec = RangeDecoder::new(&bytes).unwrap();
        for (d, &s) in dists.iter().zip(slots) {
            assert_eq!(dec.decode(d).unwrap(), s);
        }
        assert!(dec.is_exhausted());
        bytes
    }

    #[test]
    fn zero_frequency_rejected() {
        assert_eq!(
            CodingDistribution::new(vec![3, 0, 1]),
            Err(CoderError::ZeroFrequency(1))
        );
        assert_eq!(
            CodingDistribution::new(vec![]),
            Err(CoderError::EmptyDistribution)
        );
    }

    #[test]
    fn slot_out_of_range_rejected() {
        let d = CodingDistribution::new(vec![1, 1]).unwrap();
        let mut enc = RangeEncoder::new();
        assert!(matches!(
            enc.encode(&d, 2),
            Err(CoderError::SlotOutOfRange { .. })
        ));
    }

    #[test]
    fn rescale_keeps_slots_positive() {
        let d = CodingDistribution::new(vec![1, MAX_TOTAL, 7]).unwrap();
        assert!(d.total() < MAX_TOTAL);
        assert_eq!(d.freqs(), vec![1, MAX_TOTAL / 2, 4]);
        let d = CodingDistribution::new(vec![u32::MAX, u32::MAX, 3]).unwrap();
        assert!(d.total() < MAX_TOTAL);
        assert_eq!(d.freq(0), d.freq(1));
        assert!(d.freq(2) >= 1);
    }

    #[test]
    fn certain_event_costs_nothing() {
        let d = CodingDistribution::new(vec![1]).unwrap();
        let empty = RangeEncoder::new().finish();
        let mut enc = RangeEncoder::new();
        for _ in 0..10_000 {
            enc.encode(&d, 0).unwrap();
        }
        let bytes = enc.finish();
        assert_eq!(bytes.len(), empty.len());
        let mut dec = RangeDecoder::new(&bytes).unwrap();
        for _ in 0..10_000 {
            assert_eq!(dec.decode(&d).unwrap(), 0);
        }
        assert!(dec.is_exhausted());
    }

    #[test]
    fn empty_stream_is_small() {
        let bytes = RangeEncoder::new().finish();
        assert!(bytes.len() <= 8, "{} flush bytes", bytes.len());
    }

    #[test]
    fn two_equiprobable_slots() {
        let d = CodingDistribution::new(vec![1, 1]).unwrap();
        let dists = vec![d; 3];
        roundtrip(&dists, &[0, 1, 0]);
    }

    #[test]
    fn random_distributions_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut dists = Vec::new();
        let mut slots = Vec::new();
        for _ in 0..10_000 {
            let n = rng.gen_range(1..300);
            let freqs: Vec<u32> = (0..n)
                .map(|_| {
                    if rng.gen_bool(0.1) {
                        rng.gen_range(1..MAX_TOTAL)
                    } else {
                        rng.gen_range(1..1000)
                    }
                })
                .collect();
            slots.push(rng.gen_range(0..n));
            dists.push(CodingDistribution::new(freqs).unwrap());
        }
        roundtrip(&dists, &slots);
    }

    #[test]
    fn carry_heavy_stream_roundtrips() {
        // Long runs of the top slot with a tiny freq push `low` towards the
        // carry boundary repeatedly.
        let d = CodingDistribution::new(vec![MAX_TOTAL / 2, 1]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let slots: Vec<usize> = (0..5_000).map(|_| usize::from(rng.gen_bool(0.3))).collect();
        roundtrip(&vec![d; slots.len()], &slots);
    }

    #[test]
    fn truncated_stream_errors() {
        let d = CodingDistribution::new(vec![1, 1, 1, 1, 1]).unwrap();
        let mut enc = RangeEncoder::new();
        for i in 0..1_000 {
            enc.encode(&d, i % 5).unwrap();
        }
        let bytes = enc.finish();
        let cut = &bytes[..bytes.len() / 2];
        let mut dec = RangeDecoder::new(cut).unwrap();
        let mut failed = false;
        for _ in 0..1_000 {
            if let Err(e) = dec.decode(&d) {
                assert_eq!(e, CoderError::Truncated);
                failed = true;
                break;
            }
        }
        assert!(failed);
        assert!(matches!(
            RangeDecoder::new(&bytes[..2]),
            Err(CoderError::Truncated)
        ));
    }

    #[test]
    fn deterministic_output() {
        let d = CodingDistribution::new(vec![5, 2, 9]).unwrap();
        let run = || {
            let mut enc = RangeEncoder::new();
            for i in 0..500 {
                enc.encode(&d, (i * 7) % 3).unwrap();
            }
            enc.finish()
        };
        assert_eq!(run(), run());
    }
}
