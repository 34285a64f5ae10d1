//! PPM encoder and decoder with two interchangeable context models.
//!
//! Classic mode predicts from the last `k` symbols. Compressed-context mode
//! predicts from the first `k` bits of the order-0 Huffman encoding of the
//! history, most recent symbol first, and shortens that bit context by a
//! fixed pitch on every escape.
//!
//! At each position the coder starts from the deepest context available.
//! While the current context cannot code the symbol it emits an escape,
//! excludes the symbols that context offered, and shortens. A symbol that is
//! novel even in the empty context is sent as a raw byte, uniform over the
//! bytes not yet excluded.

use thiserror::Error;

use crate::container::{
    valid_parameters, Container, ContextMode, FormatError, MAX_CCM_ORDER, MAX_CLASSIC_ORDER,
};
use crate::context_model::{
    interval_at, offered_total, symbol_interval, Arity, ContextTrie, DepthSet, NodeDistribution,
    NodeId, SymbolSet,
};
use crate::entropy::{CoderError, RangeDecoder, RangeEncoder, MAX_TOTAL};
use crate::huffman::{Codeword, HuffmanCodebook, SymbolFrequencies};
use crate::stats::RunStats;

/// Set to `1` to re-decode every encode in-process and compare trie state
/// after each symbol.
pub const STATE_HASH_ENV: &str = "PPMX_DEBUG_STATEHASH";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pitch {
    /// Rounded average Huffman code length, capped at the order.
    Auto,
    Fixed(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModelConfig {
    pub mode: ContextMode,
    /// Symbols (classic) or bits (compressed-context).
    pub order: u8,
    /// Ignored in classic mode.
    pub pitch: Pitch,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ConfigError {
    #[error("{mode} order must be in 1..={max}, got {order}")]
    Order {
        mode: ContextMode,
        order: u8,
        max: u8,
    },
    #[error("pitch must be in 1..={order}, got {pitch}")]
    Pitch { pitch: u8, order: u8 },
}

impl ModelConfig {
    pub fn classic(order: u8) -> Self {
        Self {
            mode: ContextMode::Classic,
            order,
            pitch: Pitch::Auto,
        }
    }

    pub fn ccm(order: u8, pitch: Pitch) -> Self {
        Self {
            mode: ContextMode::Ccm,
            order,
            pitch,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let max = match self.mode {
            ContextMode::Classic => MAX_CLASSIC_ORDER,
            ContextMode::Ccm => MAX_CCM_ORDER,
        };
        if !(1..=max).contains(&self.order) {
            return Err(ConfigError::Order {
                mode: self.mode,
                order: self.order,
                max,
            });
        }
        if let (ContextMode::Ccm, Pitch::Fixed(p)) = (self.mode, self.pitch) {
            if !(1..=self.order).contains(&p) {
                return Err(ConfigError::Pitch {
                    pitch: p,
                    order: self.order,
                });
            }
        }
        Ok(())
    }

    /// Pitch actually used for an input with this codebook (0 for classic).
    pub fn resolve_pitch(&self, codebook: Option<&HuffmanCodebook>) -> u8 {
        match (self.mode, self.pitch) {
            (ContextMode::Classic, _) => 0,
            (ContextMode::Ccm, Pitch::Fixed(p)) => p,
            (ContextMode::Ccm, Pitch::Auto) => codebook
                .and_then(HuffmanCodebook::default_pitch)
                .unwrap_or(1)
                .min(self.order),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodecError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("corrupt payload: {0}")]
    Coder(#[from] CoderError),
    #[error("corrupt payload: {0}")]
    Corrupt(&'static str),
    #[error("encoder and decoder state diverged at symbol {0}")]
    StateMismatch(u64),
}

/// The last `order` symbols, most recent first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassicContext {
    recent: Vec<u8>,
    order: usize,
}

impl ClassicContext {
    pub fn new(order: usize) -> Self {
        Self {
            recent: Vec::with_capacity(order + 1),
            order,
        }
    }

    pub fn push(&mut self, symbol: u8) {
        self.recent.insert(0, symbol);
        self.recent.truncate(self.order);
    }

    /// Drops the most distant symbol.
    pub fn shorten(&self) -> Self {
        let mut recent = self.recent.clone();
        recent.pop();
        Self {
            recent,
            order: self.order,
        }
    }

    pub fn symbols(&self) -> &[u8] {
        &self.recent
    }

    pub fn len(&self) -> usize {
        self.recent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.recent.is_empty()
    }
}

/// The first `order` bits of C(t[i-1]) ‖ C(t[i-2]) ‖ …
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CompressedContext {
    // Right-aligned; the first context bit is bit `len - 1`.
    bits: u64,
    len: u8,
    order: u8,
}

impl CompressedContext {
    pub fn new(order: u8) -> Self {
        assert!(
            (1..=64).contains(&order),
            "compressed context order {order}"
        );
        Self {
            bits: 0,
            len: 0,
            order,
        }
    }

    /// Context bits from a string of '0'/'1' characters.
    pub fn from_bit_str(order: u8, bits: &str) -> Self {
        let mut ctx = Self::new(order);
        for c in bits.chars() {
            assert!(c == '0' || c == '1', "not a bit: {c}");
            ctx.bits = (ctx.bits << 1) | u64::from(c == '1');
            ctx.len += 1;
        }
        assert!(ctx.len <= order);
        ctx
    }

    /// Prepends the codeword of the newest symbol and keeps the first
    /// `order` bits.
    pub fn advance(&mut self, codeword: Codeword) {
        debug_assert!(codeword.len > 0);
        let mut combined = (u128::from(codeword.bits) << self.len) | u128::from(self.bits);
        let mut len = u32::from(codeword.len) + u32::from(self.len);
        let order = u32::from(self.order);
        if len > order {
            combined >>= len - order;
            len = order;
        }
        self.bits = combined as u64;
        self.len = len as u8;
    }

    /// Keeps the first `len - pitch` bits (none if `pitch >= len`).
    pub fn shorten(&self, pitch: u8) -> Self {
        let len = self.len.saturating_sub(pitch);
        Self {
            bits: if len == 0 {
                0
            } else {
                self.bits >> (self.len - len)
            },
            len,
            order: self.order,
        }
    }

    pub fn len(&self) -> usize {
        usize::from(self.len)
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn order(&self) -> u8 {
        self.order
    }

    /// Bit `i` counted from the start of the context.
    pub fn bit(&self, i: usize) -> u8 {
        assert!(i < self.len());
        ((self.bits >> (self.len() - 1 - i)) & 1) as u8
    }

    pub fn to_bit_string(&self) -> String {
        (0..self.len())
            .map(|i| if self.bit(i) == 1 { '1' } else { '0' })
            .collect()
    }

    fn labels_into(&self, out: &mut Vec<u8>) {
        out.clear();
        out.extend((0..self.len()).map(|i| self.bit(i)));
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Context {
    Classic(ClassicContext),
    Ccm(CompressedContext),
}

/// Shared adaptive state: identical on both sides after every symbol.
#[derive(Debug, Clone)]
struct Model {
    trie: ContextTrie,
    context: Context,
    codebook: Option<HuffmanCodebook>,
    pitch: usize,
    escapes: u64,
    // scratch
    path: Vec<u8>,
    nodes: Vec<NodeId>,
    dist: NodeDistribution,
}

/// One side of the coder. Both sides see the same node counts and
/// exclusions at every step.
trait StepCoder {
    /// Codes the symbol or an escape against a node's counts. Returns the
    /// symbol if this node resolved it.
    fn node(
        &mut self,
        counts: &[(u8, u32)],
        excluded: &SymbolSet,
        scratch: &mut NodeDistribution,
    ) -> Result<Option<u8>, CodecError>;

    /// Codes a raw byte, uniform over the bytes not excluded.
    fn raw(&mut self, excluded: &SymbolSet) -> Result<u8, CodecError>;
}

struct EncodeStep<'a> {
    coder: &'a mut RangeEncoder,
    symbol: u8,
}

impl StepCoder for EncodeStep<'_> {
    fn node(
        &mut self,
        counts: &[(u8, u32)],
        excluded: &SymbolSet,
        scratch: &mut NodeDistribution,
    ) -> Result<Option<u8>, CodecError> {
        let (iv, hit) = symbol_interval(counts, excluded, self.symbol);
        if iv.total < MAX_TOTAL {
            self.coder.encode_interval(iv.start, iv.freq, iv.total);
        } else {
            scratch.rebuild_from_counts(counts, excluded);
            let slot = scratch
                .slot_of(self.symbol)
                .unwrap_or(scratch.escape_slot());
            self.coder.encode(&scratch.dist, slot)?;
        }
        Ok(hit.then_some(self.symbol))
    }

    fn raw(&mut self, excluded: &SymbolSet) -> Result<u8, CodecError> {
        debug_assert!(!excluded.contains(self.symbol));
        let total = (256 - excluded.len()) as u32;
        let start = u32::from(self.symbol) - excluded.count_below(self.symbol) as u32;
        self.coder.encode_interval(start, 1, total);
        Ok(self.symbol)
    }
}

struct DecodeStep<'a, 'b> {
    coder: &'a mut RangeDecoder<'b>,
}

impl StepCoder for DecodeStep<'_, '_> {
    fn node(
        &mut self,
        counts: &[(u8, u32)],
        excluded: &SymbolSet,
        scratch: &mut NodeDistribution,
    ) -> Result<Option<u8>, CodecError> {
        let total = offered_total(counts, excluded);
        if total < MAX_TOTAL {
            let target = self.coder.target(total)?;
            let (symbol, iv) = interval_at(counts, excluded, target, total);
            self.coder.consume(iv.start, iv.freq, total)?;
            Ok(symbol)
        } else {
            scratch.rebuild_from_counts(counts, excluded);
            let slot = self.coder.decode(&scratch.dist)?;
            Ok(scratch.symbol_at(slot))
        }
    }

    fn raw(&mut self, excluded: &SymbolSet) -> Result<u8, CodecError> {
        let total = (256 - excluded.len()) as u32;
        if total == 0 {
            return Err(CodecError::Corrupt("escape with every byte excluded"));
        }
        let target = self.coder.target(total)?;
        let symbol = excluded
            .nth_absent(target as usize)
            .expect("target below the number of absent bytes");
        self.coder.consume(target, 1, total)?;
        Ok(symbol)
    }
}

impl Model {
    fn new(mode: ContextMode, order: u8, pitch: u8, codebook: Option<HuffmanCodebook>) -> Self {
        let (arity, context) = match mode {
            ContextMode::Classic => (
                Arity::Symbol,
                Context::Classic(ClassicContext::new(usize::from(order))),
            ),
            ContextMode::Ccm => (Arity::Binary, Context::Ccm(CompressedContext::new(order))),
        };
        Self {
            trie: ContextTrie::new(arity, usize::from(order)),
            context,
            codebook,
            pitch: usize::from(pitch),
            escapes: 0,
            path: Vec::with_capacity(64),
            nodes: Vec::with_capacity(65),
            dist: NodeDistribution::default(),
        }
    }

    fn shorten(&self, depth: usize) -> usize {
        match self.context {
            Context::Classic(_) => depth - 1,
            Context::Ccm(_) => depth.saturating_sub(self.pitch),
        }
    }

    fn code<S: StepCoder>(&mut self, coder: &mut S) -> Result<u8, CodecError> {
        match &self.context {
            Context::Classic(c) => {
                self.path.clear();
                self.path.extend_from_slice(c.symbols());
            }
            Context::Ccm(c) => c.labels_into(&mut self.path),
        }
        self.trie.walk(&self.path, &mut self.nodes);

        let mut excluded = SymbolSet::new();
        let mut visited = DepthSet::new();
        let mut depth = self.path.len();
        let symbol = loop {
            let counts = self
                .nodes
                .get(depth)
                .map_or(&[][..], |&id| self.trie.node(id).counts());
            visited.insert(depth);
            if let Some(symbol) = coder.node(counts, &excluded, &mut self.dist)? {
                break symbol;
            }
            self.escapes += 1;
            for &(s, _) in counts {
                excluded.insert(s);
            }
            if depth == 0 {
                break coder.raw(&excluded)?;
            }
            depth = self.shorten(depth);
        };

        self.trie
            .update_walked(&self.path, &self.nodes, symbol, visited);
        match &mut self.context {
            Context::Classic(c) => c.push(symbol),
            Context::Ccm(c) => {
                let cb = self
                    .codebook
                    .as_ref()
                    .expect("compressed-context model has a codebook");
                let word = cb
                    .codeword(symbol)
                    .map_err(|_| CodecError::Corrupt("symbol outside the code table"))?;
                c.advance(word);
            }
        }
        Ok(symbol)
    }
}

/// Streaming encoder over a fixed model configuration.
#[derive(Debug, Clone)]
pub struct Encoder {
    model: Model,
    coder: RangeEncoder,
    symbols: u64,
}

impl Encoder {
    /// `codebook` is required for compressed-context mode and ignored
    /// otherwise. `pitch` must already be resolved.
    pub fn new(
        mode: ContextMode,
        order: u8,
        pitch: u8,
        codebook: Option<HuffmanCodebook>,
    ) -> Result<Self, CodecError> {
        if !valid_parameters(mode, order, pitch) {
            return Err(FormatError::BadParameters { order, pitch }.into());
        }
        let codebook = match mode {
            ContextMode::Classic => None,
            ContextMode::Ccm => Some(codebook.ok_or(CodecError::Corrupt("missing code table"))?),
        };
        Ok(Self {
            model: Model::new(mode, order, pitch, codebook),
            coder: RangeEncoder::new(),
            symbols: 0,
        })
    }

    pub fn push(&mut self, symbol: u8) -> Result<(), CodecError> {
        let mut step = EncodeStep {
            coder: &mut self.coder,
            symbol,
        };
        self.model.code(&mut step)?;
        self.symbols += 1;
        Ok(())
    }

    /// Context that will predict the next symbol.
    pub fn context(&self) -> &Context {
        &self.model.context
    }

    pub fn trie(&self) -> &ContextTrie {
        &self.model.trie
    }

    pub fn escapes(&self) -> u64 {
        self.model.escapes
    }

    /// Flushes the coder. An encoder that saw no symbols yields no bytes.
    pub fn finish(self) -> Vec<u8> {
        if self.symbols == 0 {
            Vec::new()
        } else {
            self.coder.finish()
        }
    }
}

/// Streaming decoder; mirror image of [`Encoder`].
#[derive(Debug, Clone)]
pub struct Decoder<'a> {
    model: Model,
    coder: Option<RangeDecoder<'a>>,
    payload: &'a [u8],
}

impl<'a> Decoder<'a> {
    pub fn new(
        mode: ContextMode,
        order: u8,
        pitch: u8,
        codebook: Option<HuffmanCodebook>,
        payload: &'a [u8],
    ) -> Result<Self, CodecError> {
        if !valid_parameters(mode, order, pitch) {
            return Err(FormatError::BadParameters { order, pitch }.into());
        }
        if mode == ContextMode::Ccm && codebook.is_none() {
            return Err(CodecError::Corrupt("missing code table"));
        }
        Ok(Self {
            model: Model::new(mode, order, pitch, codebook),
            coder: None,
            payload,
        })
    }

    pub fn next_symbol(&mut self) -> Result<u8, CodecError> {
        if self.coder.is_none() {
            self.coder = Some(RangeDecoder::new(self.payload)?);
        }
        let coder = self.coder.as_mut().expect("initialized above");
        self.model.code(&mut DecodeStep { coder })
    }

    pub fn trie(&self) -> &ContextTrie {
        &self.model.trie
    }

    /// True when the payload has been consumed exactly.
    pub fn at_end(&self) -> bool {
        match &self.coder {
            Some(c) => c.is_exhausted(),
            None => self.payload.is_empty(),
        }
    }
}

/// Output of [`encode`].
#[derive(Debug, Clone)]
pub struct Encoded {
    pub container: Container,
    pub stats: RunStats,
}

fn state_hash_enabled() -> bool {
    std::env::var(STATE_HASH_ENV).is_ok_and(|v| v == "1")
}

/// Compresses `input`. Compressed-context mode makes a frequency pass first
/// to build the Huffman code.
pub fn encode(input: &[u8], cfg: &ModelConfig) -> Result<Encoded, CodecError> {
    encode_with(input, cfg, state_hash_enabled())
}

/// [`encode`], optionally decoding the result in-process and checking that
/// both tries evolve identically.
pub fn encode_with(
    input: &[u8],
    cfg: &ModelConfig,
    verify_state: bool,
) -> Result<Encoded, CodecError> {
    cfg.validate()?;
    let freqs = SymbolFrequencies::count(input);
    let codebook = match cfg.mode {
        ContextMode::Classic => None,
        ContextMode::Ccm if input.is_empty() => None,
        ContextMode::Ccm => Some(HuffmanCodebook::build(&freqs).map_err(FormatError::from)?),
    };
    let pitch = cfg.resolve_pitch(codebook.as_ref());
    let huffman_lengths = match cfg.mode {
        ContextMode::Classic => None,
        ContextMode::Ccm => Some(codebook.as_ref().map_or([0; 256], |cb| *cb.lengths())),
    };

    let mut hashes = Vec::new();
    let (payload, escapes, nodes) = if input.is_empty() {
        (Vec::new(), 0, 1)
    } else {
        let mut enc = Encoder::new(cfg.mode, cfg.order, pitch, codebook)?;
        for &b in input {
            enc.push(b)?;
            if verify_state {
                hashes.push(enc.trie().state_hash());
            }
        }
        let (escapes, nodes) = (enc.escapes(), enc.trie().node_count() as u64);
        (enc.finish(), escapes, nodes)
    };

    let container = Container {
        mode: cfg.mode,
        order: cfg.order,
        pitch,
        original_length: input.len() as u64,
        huffman_lengths,
        payload,
    };
    if verify_state {
        let decoded = decode_inner(&container, Some(&hashes))?;
        if decoded != input {
            return Err(CodecError::StateMismatch(input.len() as u64));
        }
    }
    let stats = RunStats {
        mode: cfg.mode,
        order: cfg.order,
        pitch,
        input_bytes: input.len() as u64,
        output_bits: container.encoded_len() as u64 * 8,
        payload_bits: container.payload.len() as u64 * 8,
        escape_count: escapes,
        node_count: nodes,
        alphabet_size: freqs.alphabet_size(),
    };
    Ok(Encoded { container, stats })
}

pub fn decode(container: &Container) -> Result<Vec<u8>, CodecError> {
    decode_inner(container, None)
}

fn decode_inner(
    container: &Container,
    expected_hashes: Option<&[u64]>,
) -> Result<Vec<u8>, CodecError> {
    let Container {
        mode,
        order,
        pitch,
        original_length,
        ..
    } = *container;
    if !valid_parameters(mode, order, pitch) {
        return Err(FormatError::BadParameters { order, pitch }.into());
    }
    if original_length == 0 {
        if !container.payload.is_empty() {
            return Err(CodecError::Corrupt("payload present for empty input"));
        }
        return Ok(Vec::new());
    }
    let codebook = match (mode, &container.huffman_lengths) {
        (ContextMode::Classic, _) => None,
        (ContextMode::Ccm, Some(table)) => {
            Some(HuffmanCodebook::from_lengths(*table).map_err(FormatError::from)?)
        }
        (ContextMode::Ccm, None) => return Err(CodecError::Corrupt("missing code table")),
    };

    let mut dec = Decoder::new(mode, order, pitch, codebook, &container.payload)?;
    // The header length is untrusted; grow as symbols actually decode.
    let mut out = Vec::with_capacity(original_length.min(1 << 20) as usize);
    for i in 0..original_length {
        out.push(dec.next_symbol()?);
        if let Some(hashes) = expected_hashes {
            if hashes.get(i as usize) != Some(&dec.trie().state_hash()) {
                return Err(CodecError::StateMismatch(i));
            }
        }
    }
    if !dec.at_end() {
        return Err(CodecError::Corrupt("trailing bytes after payload"));
    }
    Ok(out)
}

/// Encodes straight to container bytes.
pub fn compress(input: &[u8], cfg: &ModelConfig) -> Result<Vec<u8>, CodecError> {
    Ok(encode(input, cfg)?.container.write())
}

/// Parses and decodes container bytes.
pub fn decompress(bytes: &[u8]) -> Result<Vec<u8>, CodecError> {
    decode(&Container::read(bytes)?)
}
