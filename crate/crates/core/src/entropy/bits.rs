//! MSB-first bit stream writer and reader.

use super::CoderError;

/// Accumulates bits most-significant first into a byte buffer.
#[derive(Debug, Default, Clone)]
pub struct BitSink {
    bytes: Vec<u8>,
    // Pending bits, right-aligned; fewer than 8 of them are live at rest.
    acc: u64,
    pending: u32,
    total: u64,
}

impl BitSink {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn write_bits(&mut self, value: u64, width: u32) {
        assert!(width <= 64, "bit width {width} exceeds 64");
        if width == 0 {
            return;
        }
        // Split wide writes so the accumulator never holds more than 63 bits.
        if width > 32 {
            self.write_bits(value >> 32, width - 32);
            self.write_bits(value & 0xFFFF_FFFF, 32);
            return;
        }
        let value = value & ((1u64 << width) - 1);
        self.acc = (self.acc << width) | value;
        self.pending += width;
        self.total += u64::from(width);
        while self.pending >= 8 {
            self.pending -= 8;
            self.bytes.push((self.acc >> self.pending) as u8);
        }
        self.acc &= (1u64 << self.pending) - 1;
    }

    pub fn write_bit(&mut self, bit: bool) {
        self.write_bits(u64::from(bit), 1);
    }

    pub fn bits_written(&self) -> u64 {
        self.total
    }

    /// Pads the final partial byte with zeros and returns the buffer.
    pub fn finish(mut self) -> Vec<u8> {
        if self.pending > 0 {
            self.bytes.push((self.acc << (8 - self.pending)) as u8);
        }
        self.bytes
    }
}

/// Reads bits most-significant first from a byte slice.
#[derive(Debug, Clone)]
pub struct BitSource<'a> {
    bytes: &'a [u8],
    pos: usize,
    // Bit cursor within `bytes[pos]`, 0 = most significant.
    cursor: u32,
    total: u64,
}

impl<'a> BitSource<'a> {
    pub fn new(bytes: &'a [u8]) -> Self {
        Self {
            bytes,
            pos: 0,
            cursor: 0,
            total: 0,
        }
    }

    pub fn read_bit(&mut self) -> Result<bool, CoderError> {
        let byte = *self.bytes.get(self.pos).ok_or(CoderError::Truncated)?;
        let bit = (byte >> (7 - self.cursor)) & 1 == 1;
        self.cursor += 1;
        if self.cursor == 8 {
            self.cursor = 0;
            self.pos += 1;
        }
        self.total += 1;
        Ok(bit)
    }

    /// Reads `width` bits (at most 64) and returns them right-aligned.
    pub fn read_bits(&mut self, width: u32) -> Result<u64, CoderError> {
        assert!(width <= 64, "bit width {width} exceeds 64");
        if self.bits_remaining() < u64::from(width) {
            return Err(CoderError::Truncated);
        }
        let mut value = 0u64;
        for _ in 0..width {
            value = (value << 1) | u64::from(self.read_bit()?);
        }
        Ok(value)
    }

    pub fn bits_read(&self) -> u64 {
        self.total
    }

    pub fn bits_remaining(&self) -> u64 {
        (self.bytes.len() as u64 * 8).saturating_sub(self.total)
    }
}
