//! On-disk format.
//!
//! ```text
//! offset  size  field
//!      0     4  magic "PPMX"
//!      4     1  version (1)
//!      5     1  mode (0 classic, 1 compressed-context)
//!      6     1  order (symbols for classic, bits for compressed-context)
//!      7     1  pitch (0 for classic)
//!      8     8  original length, little-endian
//!     16   256  code-length table (compressed-context mode only)
//!  16|272     *  range-coded payload
//! ```

use thiserror::Error;

use crate::huffman::{HuffmanCodebook, HuffmanError, TABLE_LEN};

pub const MAGIC: [u8; 4] = *b"PPMX";
pub const VERSION: u8 = 1;
pub const FIXED_HEADER_LEN: usize = 16;

pub const MAX_CLASSIC_ORDER: u8 = 16;
pub const MAX_CCM_ORDER: u8 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ContextMode {
    Classic,
    Ccm,
}

impl ContextMode {
    pub fn as_byte(self) -> u8 {
        match self {
            ContextMode::Classic => 0,
            ContextMode::Ccm => 1,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(ContextMode::Classic),
            1 => Some(ContextMode::Ccm),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ContextMode::Classic => "classic",
            ContextMode::Ccm => "ccm",
        }
    }
}

impl std::fmt::Display for ContextMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("file too short for a ppmx header")]
    ShortFile,
    #[error("not a ppmx file (bad magic)")]
    BadMagic,
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown context mode {0}")]
    BadMode(u8),
    #[error("invalid model parameters: order {order}, pitch {pitch}")]
    BadParameters { order: u8, pitch: u8 },
    #[error("invalid code-length table: {0}")]
    CodeTable(#[from] HuffmanError),
}

impl FormatError {
    /// Stable numeric code per error kind.
    pub fn code(&self) -> u8 {
        match self {
            FormatError::ShortFile => 1,
            FormatError::BadMagic => 2,
            FormatError::UnsupportedVersion(_) => 3,
            FormatError::BadMode(_) => 4,
            FormatError::BadParameters { .. } => 5,
            FormatError::CodeTable(HuffmanError::Kraft) => 6,
            FormatError::CodeTable(_) => 7,
        }
    }
}

/// Checks order/pitch bounds for a mode.
pub fn valid_parameters(mode: ContextMode, order: u8, pitch: u8) -> bool {
    match mode {
        ContextMode::Classic => (1..=MAX_CLASSIC_ORDER).contains(&order) && pitch == 0,
        ContextMode::Ccm => (1..=MAX_CCM_ORDER).contains(&order) && (1..=order).contains(&pitch),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Container {
    pub mode: ContextMode,
    pub order: u8,
    pub pitch: u8,
    pub original_length: u64,
    /// Present iff `mode` is [`ContextMode::Ccm`]. All zeros only for empty
    /// inputs.
    pub huffman_lengths: Option<[u8; 256]>,
    pub payload: Vec<u8>,
}

impl Container {
    pub fn header_len(&self) -> usize {
        FIXED_HEADER_LEN
            + if self.huffman_lengths.is_some() {
                TABLE_LEN
            } else {
                0
            }
    }

    pub fn encoded_len(&self) -> usize {
        self.header_len() + self.payload.len()
    }

    pub fn write(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.encoded_len());
        out.extend_from_slice(&MAGIC);
        out.push(VERSION);
        out.push(self.mode.as_byte());
        out.push(self.order);
        out.push(self.pitch);
        out.extend_from_slice(&self.original_length.to_le_bytes());
        if let Some(table) = &self.huffman_lengths {
            out.extend_from_slice(table);
        }
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn read(bytes: &[u8]) -> Result<Self, FormatError> {
        if bytes.len() >= 4 && bytes[..4] != MAGIC {
            return Err(FormatError::BadMagic);
        }
        if bytes.len() < FIXED_HEADER_LEN {
            return Err(FormatError::ShortFile);
        }
        if bytes[4] != VERSION {
            return Err(FormatError::UnsupportedVersion(bytes[4]));
        }
        let mode = ContextMode::from_byte(bytes[5]).ok_or(FormatError::BadMode(bytes[5]))?;
        let (order, pitch) = (bytes[6], bytes[7]);
        if !valid_parameters(mode, order, pitch) {
            return Err(FormatError::BadParameters { order, pitch });
        }
        let original_length = u64::from_le_bytes(bytes[8..16].try_into().expect("8 bytes"));
        let mut rest = &bytes[FIXED_HEADER_LEN..];
        let huffman_lengths = match mode {
            ContextMode::Classic => None,
            ContextMode::Ccm => {
                if rest.len() < TABLE_LEN {
                    return Err(FormatError::ShortFile);
                }
                let table: [u8; 256] = rest[..TABLE_LEN].try_into().expect("256 bytes");
                rest = &rest[TABLE_LEN..];
                // An all-zero table is how an empty input is recorded.
                if !(original_length == 0 && table == [0; 256]) {
                    HuffmanCodebook::from_lengths(table)?;
                }
                Some(table)
            }
        };
        Ok(Self {
            mode,
            order,
            pitch,
            original_length,
            huffman_lengths,
            payload: rest.to_vec(),
        })
    }
}
