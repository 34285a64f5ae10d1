//! Static order-0 Huffman coding. The codebook maps each byte to the bit
//! string that compressed contexts are built from.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use thiserror::Error;

/// Longest codeword accepted. Compressed contexts never look further than 64
/// bits, and byte inputs small enough to exist never produce deeper trees.
pub const MAX_CODE_LEN: u8 = 64;

/// Size of the serialized code-length table.
pub const TABLE_LEN: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HuffmanError {
    #[error("alphabet is empty")]
    EmptyAlphabet,
    #[error("symbol {0:#04x} has no codeword")]
    UnknownSymbol(u8),
    #[error("code length {0} exceeds the {MAX_CODE_LEN}-bit limit")]
    CodeTooLong(u32),
    #[error("code-length table must be {TABLE_LEN} bytes, got {0}")]
    BadTableLength(usize),
    #[error("code lengths violate the Kraft equality")]
    Kraft,
}

/// Per-byte occurrence counts of an input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolFrequencies {
    counts: [u64; 256],
}

impl Default for SymbolFrequencies {
    fn default() -> Self {
        Self { counts: [0; 256] }
    }
}

impl SymbolFrequencies {
    pub fn count(input: &[u8]) -> Self {
        let mut counts = [0u64; 256];
        for &b in input {
            counts[usize::from(b)] += 1;
        }
        Self { counts }
    }

    pub fn from_counts(counts: [u64; 256]) -> Self {
        Self { counts }
    }

    pub fn get(&self, symbol: u8) -> u64 {
        self.counts[usize::from(symbol)]
    }

    pub fn counts(&self) -> &[u64; 256] {
        &self.counts
    }

    /// Number of byte values that occur at least once.
    pub fn alphabet_size(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Empirical order-0 entropy in bits per symbol.
    pub fn entropy(&self) -> f64 {
        let n = self.total() as f64;
        self.counts
            .iter()
            .filter(|&&c| c > 0)
            .map(|&c| {
                let p = c as f64 / n;
                -p * p.log2()
            })
            .sum()
    }
}

/// Shorthand for [`SymbolFrequencies::count`].
pub fn count_frequencies(input: &[u8]) -> SymbolFrequencies {
    SymbolFrequencies::count(input)
}

/// A single codeword, right-aligned in `bits`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Codeword {
    pub bits: u64,
    pub len: u8,
}

/// Canonical prefix code over bytes.
///
/// Equality compares the code tables only; the average length is known only
/// when the codebook was built from frequencies.
#[derive(Debug, Clone)]
pub struct HuffmanCodebook {
    lengths: [u8; 256],
    codes: [u64; 256],
    // (Σ count·length, Σ count) when built from frequencies
    weighted: Option<(u64, u64)>,
}

impl PartialEq for HuffmanCodebook {
    fn eq(&self, other: &Self) -> bool {
        self.lengths == other.lengths && self.codes == other.codes
    }
}

impl Eq for HuffmanCodebook {}

impl HuffmanCodebook {
    /// Builds optimal code lengths for `freqs` and assigns canonical codes.
    ///
    /// Tree construction repeatedly merges the two lightest subtrees; equal
    /// weights are ordered by the smallest symbol each subtree contains. A
    /// lone symbol gets the one-bit code `0`.
    pub fn build(freqs: &SymbolFrequencies) -> Result<Self, HuffmanError> {
        let present: Vec<u8> = (0..=255u8).filter(|&s| freqs.get(s) > 0).collect();
        let mut lengths = [0u8; 256];
        match present.len() {
            0 => return Err(HuffmanError::EmptyAlphabet),
            1 => lengths[usize::from(present[0])] = 1,
            _ => {
                // parent[i] for every tree node; leaves come first.
                let mut parent: Vec<usize> = vec![usize::MAX; present.len()];
                let mut heap: BinaryHeap<Reverse<(u64, u8, usize)>> = present
                    .iter()
                    .enumerate()
                    .map(|(i, &s)| Reverse((freqs.get(s), s, i)))
                    .collect();
                while heap.len() > 1 {
                    let Reverse((w1, m1, a)) = heap.pop().expect("heap has two entries");
                    let Reverse((w2, m2, b)) = heap.pop().expect("heap has two entries");
                    let id = parent.len();
                    parent.push(usize::MAX);
                    parent[a] = id;
                    parent[b] = id;
                    heap.push(Reverse((w1 + w2, m1.min(m2), id)));
                }
                // Internal nodes are created after their children, so depths
                // can be filled in reverse creation order.
                let mut depth = vec![0u32; parent.len()];
                for id in (0..parent.len()).rev() {
                    if parent[id] != usize::MAX {
                        depth[id] = depth[parent[id]] + 1;
                    }
                }
                for (i, &s) in present.iter().enumerate() {
                    if depth[i] > u32::from(MAX_CODE_LEN) {
                        return Err(HuffmanError::CodeTooLong(depth[i]));
                    }
                    lengths[usize::from(s)] = depth[i] as u8;
                }
            }
        }
        let mut cb = Self::from_valid_lengths(lengths);
        let weighted = present
            .iter()
            .map(|&s| freqs.get(s) * u64::from(lengths[usize::from(s)]))
            .sum();
        cb.weighted = Some((weighted, freqs.total()));
        Ok(cb)
    }

    fn from_valid_lengths(lengths: [u8; 256]) -> Self {
        let mut order: Vec<u8> = (0..=255u8)
            .filter(|&s| lengths[usize::from(s)] > 0)
            .collect();
        order.sort_by_key(|&s| (lengths[usize::from(s)], s));
        let mut codes = [0u64; 256];
        let mut next = 0u64;
        let mut prev_len = 0u8;
        for (i, &s) in order.iter().enumerate() {
            let len = lengths[usize::from(s)];
            if i > 0 {
                next = (next + 1) << (len - prev_len);
            }
            codes[usize::from(s)] = next;
            prev_len = len;
        }
        Self {
            lengths,
            codes,
            weighted: None,
        }
    }

    /// Rebuilds the canonical codebook from a code-length table.
    pub fn from_lengths(lengths: [u8; 256]) -> Result<Self, HuffmanError> {
        let present: Vec<u8> = lengths.iter().copied().filter(|&l| l > 0).collect();
        if present.is_empty() {
            return Err(HuffmanError::EmptyAlphabet);
        }
        if let Some(&l) = present.iter().find(|&&l| l > MAX_CODE_LEN) {
            return Err(HuffmanError::CodeTooLong(u32::from(l)));
        }
        if present.len() == 1 {
            if present[0] != 1 {
                return Err(HuffmanError::Kraft);
            }
        } else {
            let kraft: u128 = present.iter().map(|&l| 1u128 << (64 - l)).sum();
            if kraft != 1u128 << 64 {
                return Err(HuffmanError::Kraft);
            }
        }
        Ok(Self::from_valid_lengths(lengths))
    }

    pub fn length(&self, symbol: u8) -> u8 {
        self.lengths[usize::from(symbol)]
    }

    pub fn lengths(&self) -> &[u8; 256] {
        &self.lengths
    }

    pub fn contains(&self, symbol: u8) -> bool {
        self.length(symbol) > 0
    }

    pub fn alphabet_size(&self) -> usize {
        self.lengths.iter().filter(|&&l| l > 0).count()
    }

    /// Codeword for `symbol`, emitted most significant bit first.
    pub fn codeword(&self, symbol: u8) -> Result<Codeword, HuffmanError> {
        let len = self.length(symbol);
        if len == 0 {
            return Err(HuffmanError::UnknownSymbol(symbol));
        }
        Ok(Codeword {
            bits: self.codes[usize::from(symbol)],
            len,
        })
    }

    /// Average code length in bits per symbol of the input this codebook was
    /// built from. `None` for codebooks rebuilt from a length table.
    pub fn average_code_length(&self) -> Option<f64> {
        self.weighted
            .map(|(w, n)| if n == 0 { 0.0 } else { w as f64 / n as f64 })
    }

    /// Default pitch: the average code length rounded half up, at least 1.
    pub fn default_pitch(&self) -> Option<u8> {
        let (w, n) = self.weighted?;
        if n == 0 {
            return Some(1);
        }
        // floor(w/n + 1/2) in exact integer arithmetic
        let rounded = (2 * u128::from(w) + u128::from(n)) / (2 * u128::from(n));
        Some(rounded.clamp(1, u128::from(MAX_CODE_LEN)) as u8)
    }

    /// The code-length table: one byte per symbol value, 0 for absent symbols.
    pub fn serialize_lengths(&self) -> Vec<u8> {
        self.lengths.to_vec()
    }

    pub fn deserialize_lengths(bytes: &[u8]) -> Result<Self, HuffmanError> {
        let lengths: [u8; 256] = bytes
            .try_into()
            .map_err(|_| HuffmanError::BadTableLength(bytes.len()))?;
        Self::from_lengths(lengths)
    }
}

/// Builds the canonical codebook for `freqs`.
pub fn build_codebook(freqs: &SymbolFrequencies) -> Result<HuffmanCodebook, HuffmanError> {
    HuffmanCodebook::build(freqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::{BitSink, BitSource};
    use proptest::prelude::*;
    use std::collections::HashMap;

    fn freqs_of(pairs: &[(u8, u64)]) -> SymbolFrequencies {
        let mut counts = [0u64; 256];
        for &(s, c) in pairs {
            counts[usize::from(s)] = c;
        }
        SymbolFrequencies::from_counts(counts)
    }

    #[test]
    fn counting() {
        let f = count_frequencies(b"");
        assert_eq!(f.alphabet_size(), 0);
        assert_eq!(f.total(), 0);
        let f = count_frequencies(b"aab");
        assert_eq!(f.get(b'a'), 2);
        assert_eq!(f.get(b'b'), 1);
        assert_eq!(f.alphabet_size(), 2);
        assert_eq!(f.total(), 3);
    }

    #[test]
    fn empty_alphabet_rejected() {
        assert_eq!(
            build_codebook(&SymbolFrequencies::default()),
            Err(HuffmanError::EmptyAlphabet)
        );
    }

    #[test]
    fn single_symbol_gets_one_bit() {
        let cb = build_codebook(&count_frequencies(b"zzzz")).unwrap();
        assert_eq!(cb.codeword(b'z').unwrap(), Codeword { bits: 0, len: 1 });
        assert_eq!(cb.average_code_length(), Some(1.0));
        assert_eq!(cb.default_pitch(), Some(1));
        assert_eq!(cb.codeword(b'a'), Err(HuffmanError::UnknownSymbol(b'a')));
    }

    #[test]
    fn two_symbols() {
        let cb = build_codebook(&count_frequencies(b"abbb")).unwrap();
        let mut codes = [cb.codeword(b'a').unwrap(), cb.codeword(b'b').unwrap()];
        codes.sort_by_key(|c| c.bits);
        assert_eq!(
            codes,
            [Codeword { bits: 0, len: 1 }, Codeword { bits: 1, len: 1 }]
        );
    }

    #[test]
    fn four_equiprobable() {
        let cb = build_codebook(&count_frequencies(b"abcdabcd")).unwrap();
        let words: Vec<_> = b"abcd".iter().map(|&s| cb.codeword(s).unwrap()).collect();
        assert!(words.iter().all(|w| w.len == 2));
        let mut bits: Vec<u64> = words.iter().map(|w| w.bits).collect();
        bits.sort();
        assert_eq!(bits, vec![0, 1, 2, 3]);
        assert_eq!(cb.average_code_length(), Some(2.0));
        assert_eq!(cb.default_pitch(), Some(2));
    }

    #[test]
    fn canonical_assignment_by_length_then_symbol() {
        // lengths a:1 b:2 c:3 d:3
        let cb = build_codebook(&freqs_of(&[(b'a', 8), (b'b', 4), (b'c', 2), (b'd', 2)])).unwrap();
        assert_eq!(cb.codeword(b'a').unwrap(), Codeword { bits: 0b0, len: 1 });
        assert_eq!(cb.codeword(b'b').unwrap(), Codeword { bits: 0b10, len: 2 });
        assert_eq!(
            cb.codeword(b'c').unwrap(),
            Codeword {
                bits: 0b110,
                len: 3
            }
        );
        assert_eq!(
            cb.codeword(b'd').unwrap(),
            Codeword {
                bits: 0b111,
                len: 3
            }
        );
    }

    #[test]
    fn tie_breaking_is_by_subtree_minimum_symbol() {
        // Weights 1,1,1,1,2: merging order decides whether 'e' ends up at
        // depth 2 or 3. Ties go to the lower symbols first: (a,b)=2, (c,d)=2,
        // then e(2,'e') vs ab(2,'a') vs cd(2,'c') -> merge ab with cd,
        // leaving e at depth 1.
        let cb = build_codebook(&freqs_of(&[
            (b'a', 1),
            (b'b', 1),
            (b'c', 1),
            (b'd', 1),
            (b'e', 2),
        ]))
        .unwrap();
        assert_eq!(cb.length(b'e'), 1);
        assert_eq!(cb.length(b'a'), 3);
    }

    #[test]
    fn pitch_rounds_half_up() {
        // a:1 b:2 c:2 over counts 1,1,2 -> w = 1*2 + 1*2 + 2*1 = 6, n = 4: 1.5 -> 2
        let cb = build_codebook(&freqs_of(&[(b'a', 1), (b'b', 1), (b'c', 2)])).unwrap();
        assert_eq!(cb.average_code_length(), Some(1.5));
        assert_eq!(cb.default_pitch(), Some(2));
    }

    #[test]
    fn table_roundtrip_and_rejections() {
        let cb = build_codebook(&count_frequencies(b"the quick brown fox")).unwrap();
        let table = cb.serialize_lengths();
        assert_eq!(table.len(), TABLE_LEN);
        let back = HuffmanCodebook::deserialize_lengths(&table).unwrap();
        assert_eq!(back, cb);
        assert_eq!(back.average_code_length(), None);

        assert_eq!(
            HuffmanCodebook::deserialize_lengths(&[0u8; 256]),
            Err(HuffmanError::EmptyAlphabet)
        );
        assert_eq!(
            HuffmanCodebook::deserialize_lengths(&[0u8; 10]),
            Err(HuffmanError::BadTableLength(10))
        );
        let mut bad = table.clone();
        let s = bad.iter().position(|&l| l > 0).unwrap();
        bad[s] += 1;
        assert_eq!(
            HuffmanCodebook::deserialize_lengths(&bad),
            Err(HuffmanError::Kraft)
        );
        let mut long = [0u8; 256];
        long[0] = 65;
        long[1] = 1;
        assert_eq!(
            HuffmanCodebook::from_lengths(long),
            Err(HuffmanError::CodeTooLong(65))
        );
    }

    #[test]
    fn uniform_256_table() {
        let cb = build_codebook(&SymbolFrequencies::from_counts([5; 256])).unwrap();
        assert!(cb.serialize_lengths().iter().all(|&l| l == 8));
    }

    /// Minimum Σ count·length over every length assignment with Kraft sum ≤ 1
    /// (the lengths of some prefix code) for up to four symbols.
    fn exhaustive_optimum(counts: &[u64]) -> u64 {
        let n = counts.len();
        if n == 1 {
            return counts[0];
        }
        let mut best = u64::MAX;
        let mut lens = vec![1u32; n];
        loop {
            let kraft: u32 = lens.iter().map(|&l| 1u32 << (n as u32 - l)).sum();
            if kraft <= 1 << n as u32 {
                let cost = counts
                    .iter()
                    .zip(&lens)
                    .map(|(&c, &l)| c * u64::from(l))
                    .sum();
                best = best.min(cost);
            }
            // odometer over lengths 1..n-1
            let mut i = 0;
            loop {
                if i == n {
                    return best;
                }
                lens[i] += 1;
                if lens[i] < n as u32 {
                    break;
                }
                lens[i] = 1;
                i += 1;
            }
        }
    }

    #[test]
    fn optimal_against_exhaustive_search_small_alphabets() {
        for n in 1..=4usize {
            let mut counts = vec![1u64; n];
            // every count vector in 1..=6 per symbol
            loop {
                let pairs: Vec<(u8, u64)> = counts
                    .iter()
                    .enumerate()
                    .map(|(i, &c)| (i as u8 * 3 + 1, c))
                    .collect();
                let cb = build_codebook(&freqs_of(&pairs)).unwrap();
                let cost: u64 = pairs
                    .iter()
                    .map(|&(s, c)| c * u64::from(cb.length(s)))
                    .sum();
                assert_eq!(cost, exhaustive_optimum(&counts), "counts {counts:?}");
                let mut i = 0;
                loop {
                    if i == n {
                        break;
                    }
                    counts[i] += 1;
                    if counts[i] <= 6 {
                        break;
                    }
                    counts[i] = 1;
                    i += 1;
                }
                if i == n {
                    break;
                }
            }
        }
    }

    fn arb_freqs() -> impl Strategy<Value = SymbolFrequencies> {
        prop::collection::vec((any::<u8>(), 1u64..10_000), 1..64).prop_map(|pairs| {
            let mut counts = [0u64; 256];
            for (s, c) in pairs {
                counts[usize::from(s)] = c;
            }
            SymbolFrequencies::from_counts(counts)
        })
    }

    proptest! {
        #[test]
        fn kraft_equality_and_entropy_sandwich(freqs in arb_freqs()) {
            let cb = build_codebook(&freqs).unwrap();
            if freqs.alphabet_size() >= 2 {
                let kraft: f64 = (0..=255u8)
                    .filter(|&s| cb.contains(s))
                    .map(|s| 2f64.powi(-i32::from(cb.length(s))))
                    .sum();
                prop_assert!((kraft - 1.0).abs() < 1e-12);
                let avg = cb.average_code_length().unwrap();
                let h = freqs.entropy();
                prop_assert!(h <= avg + 1e-9 && avg < h + 1.0);
            }
            let again = build_codebook(&freqs).unwrap();
            prop_assert_eq!(again.lengths(), cb.lengths());
            let table = cb.serialize_lengths();
            prop_assert_eq!(HuffmanCodebook::deserialize_lengths(&table).unwrap(), cb);
        }

        #[test]
        fn concatenated_codewords_decode_uniquely(
            freqs in arb_freqs(),
            picks in prop::collection::vec(any::<prop::sample::Index>(), 0..200),
        ) {
            let cb = build_codebook(&freqs).unwrap();
            let alphabet: Vec<u8> = (0..=255u8).filter(|&s| cb.contains(s)).collect();
            let message: Vec<u8> = picks.iter().map(|i| alphabet[i.index(alphabet.len())]).collect();
            let mut sink = BitSink::new();
            for &s in &message {
                let w = cb.codeword(s).unwrap();
                sink.write_bits(w.bits, u32::from(w.len));
            }
            let total = sink.bits_written();
            let bytes = sink.finish();
            // Decode oracle: grow a bit prefix until it names a codeword.
            let table: HashMap<(u8, u64), u8> =
                alphabet.iter().map(|&s| { let w = cb.codeword(s).unwrap(); ((w.len, w.bits), s) }).collect();
            let mut src = BitSource::new(&bytes);
            let mut decoded = Vec::new();
            let (mut len, mut acc) = (0u8, 0u64);
            while src.bits_read() < total {
                acc = (acc << 1) | u64::from(src.read_bit().unwrap());
                len += 1;
                if let Some(&s) = table.get(&(len, acc)) {
                    decoded.push(s);
                    len = 0;
                    acc = 0;
                }
            }
            prop_assert_eq!(len, 0);
            prop_assert_eq!(decoded, message);
        }
    }
}
