//! Statistics tries for both context styles.
//!
//! A classic trie branches on whole symbols, so a node at depth `d` is an
//! order-`d` context. A compressed-context trie branches on single bits of
//! the Huffman-coded history and is therefore binary regardless of the
//! alphabet. Both store per-node symbol counts in sparse form.

use crate::entropy::CodingDistribution;

pub type NodeId = u32;

/// Counts are halved (rounding up) once any of them reaches this value.
pub const COUNT_LIMIT: u32 = 1 << 16;

const ROOT: NodeId = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arity {
    /// One branch per byte value.
    Symbol,
    /// One branch per bit.
    Binary,
}

/// Set of byte values.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SymbolSet([u64; 4]);

impl SymbolSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, s: u8) {
        self.0[usize::from(s >> 6)] |= 1 << (s & 63);
    }

    pub fn contains(&self, s: u8) -> bool {
        self.0[usize::from(s >> 6)] & (1 << (s & 63)) != 0
    }

    pub fn len(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0 == [0; 4]
    }

    pub fn clear(&mut self) {
        self.0 = [0; 4];
    }

    /// Members strictly below `s`.
    pub fn count_below(&self, s: u8) -> usize {
        let word = usize::from(s >> 6);
        let below: u32 = self.0[..word].iter().map(|w| w.count_ones()).sum();
        let partial = self.0[word] & ((1u64 << (s & 63)) - 1);
        (below + partial.count_ones()) as usize
    }

    /// The `n`-th byte value (from 0) that is not a member.
    pub fn nth_absent(&self, n: usize) -> Option<u8> {
        (0..=255u8).filter(|&s| !self.contains(s)).nth(n)
    }
}

impl FromIterator<u8> for SymbolSet {
    fn from_iter<I: IntoIterator<Item = u8>>(iter: I) -> Self {
        let mut set = Self::new();
        for s in iter {
            set.insert(s);
        }
        set
    }
}

/// Set of trie depths, 0..=127.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct DepthSet(u128);

impl DepthSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, depth: usize) {
        self.0 |= 1 << depth;
    }

    pub fn contains(&self, depth: usize) -> bool {
        depth < 128 && self.0 & (1 << depth) != 0
    }
}

impl FromIterator<usize> for DepthSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let mut set = Self::new();
        for d in iter {
            set.insert(d);
        }
        set
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrieNode {
    children: Vec<(u8, NodeId)>,
    // sorted by symbol
    counts: Vec<(u8, u32)>,
}

impl TrieNode {
    pub fn child(&self, label: u8) -> Option<NodeId> {
        self.children
            .binary_search_by_key(&label, |&(l, _)| l)
            .ok()
            .map(|i| self.children[i].1)
    }

    pub fn children(&self) -> impl Iterator<Item = (u8, NodeId)> + '_ {
        self.children.iter().copied()
    }

    pub fn count(&self, symbol: u8) -> u32 {
        self.counts
            .binary_search_by_key(&symbol, |&(s, _)| s)
            .map_or(0, |i| self.counts[i].1)
    }

    /// (symbol, count) pairs in ascending symbol order.
    pub fn counts(&self) -> &[(u8, u32)] {
        &self.counts
    }

    /// Number of symbols with a positive count.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    fn increment(&mut self, symbol: u8) -> bool {
        let c = match self.counts.binary_search_by_key(&symbol, |&(s, _)| s) {
            Ok(i) => {
                self.counts[i].1 += 1;
                self.counts[i].1
            }
            Err(i) => {
                self.counts.insert(i, (symbol, 1));
                1
            }
        };
        if c >= COUNT_LIMIT {
            for (_, c) in self.counts.iter_mut() {
                *c = c.div_ceil(2);
            }
            return true;
        }
        false
    }
}

/// A coding distribution over a node's symbols plus a trailing escape slot.
#[derive(Debug, Clone, Default)]
pub struct NodeDistribution {
    pub dist: CodingDistribution,
    /// Symbol for each non-escape slot, ascending.
    pub symbols: Vec<u8>,
}

impl NodeDistribution {
    pub fn escape_slot(&self) -> usize {
        self.symbols.len()
    }

    pub fn slot_of(&self, symbol: u8) -> Option<usize> {
        self.symbols.binary_search(&symbol).ok()
    }

    /// Symbol coded by `slot`, `None` for the escape slot.
    pub fn symbol_at(&self, slot: usize) -> Option<u8> {
        self.symbols.get(slot).copied()
    }

    /// In-place form of [`build_distribution`].
    pub fn rebuild(&mut self, node: Option<&TrieNode>, exclusions: &SymbolSet) {
        self.rebuild_from_counts(node.map_or(&[][..], |n| n.counts()), exclusions);
    }

    pub fn rebuild_from_counts(&mut self, counts: &[(u8, u32)], exclusions: &SymbolSet) {
        self.symbols.clear();
        self.symbols.extend(
            counts
                .iter()
                .map(|&(s, _)| s)
                .filter(|&s| !exclusions.contains(s)),
        );
        let offered = counts
            .iter()
            .filter(|&&(s, _)| !exclusions.contains(s))
            .map(|&(_, c)| 2 * c - 1);
        let escape = self.symbols.len().max(1) as u32;
        self.dist
            .fill(offered.chain(std::iter::once(escape)))
            .expect("all frequencies are positive");
    }

    /// Uniform distribution over every byte not in `exclusions`, with no
    /// escape slot. Used once a symbol is novel even in the empty context.
    /// Returns false if every byte is excluded.
    pub fn rebuild_raw(&mut self, exclusions: &SymbolSet) -> bool {
        self.symbols.clear();
        self.symbols
            .extend((0..=255u8).filter(|&s| !exclusions.contains(s)));
        self.dist.fill(self.symbols.iter().map(|_| 1)).is_ok()
    }
}

/// Escape/symbol estimate for a node, skipping excluded symbols.
///
/// A symbol with count `c` gets frequency `2c - 1` and the escape gets the
/// number `d` of symbols offered. A node with nothing to offer (absent,
/// empty, or fully excluded) yields the escape alone with frequency 1.
pub fn build_distribution(node: Option<&TrieNode>, exclusions: &SymbolSet) -> NodeDistribution {
    let mut nd = NodeDistribution::default();
    nd.rebuild(node, exclusions);
    nd
}

/// A slot's share of a distribution: `[start, start + freq)` of `total`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub start: u32,
    pub freq: u32,
    pub total: u32,
}

/// Total of the distribution [`build_distribution`] would produce, before
/// any rescaling.
pub fn offered_total(counts: &[(u8, u32)], exclusions: &SymbolSet) -> u32 {
    let (sum, d) = counts
        .iter()
        .filter(|&&(s, _)| !exclusions.contains(s))
        .fold((0u32, 0u32), |(sum, d), &(_, c)| (sum + 2 * c - 1, d + 1));
    sum + d.max(1)
}

/// Interval of `symbol` in the unrescaled distribution for a node, or of
/// the escape if the node does not offer `symbol`. The flag says which.
pub fn symbol_interval(
    counts: &[(u8, u32)],
    exclusions: &SymbolSet,
    symbol: u8,
) -> (Interval, bool) {
    let (mut sum, mut d) = (0u32, 0u32);
    let mut hit = None;
    for &(s, c) in counts {
        if exclusions.contains(s) {
            continue;
        }
        if s == symbol {
            hit = Some((sum, 2 * c - 1));
        }
        sum += 2 * c - 1;
        d += 1;
    }
    let total = sum + d.max(1);
    match hit {
        Some((start, freq)) => (Interval { start, freq, total }, true),
        None => (
            Interval {
                start: sum,
                freq: d.max(1),
                total,
            },
            false,
        ),
    }
}

/// Slot of the unrescaled node distribution containing `target`, which must
/// be below [`offered_total`]. Returns the symbol (`None` for escape).
pub fn interval_at(
    counts: &[(u8, u32)],
    exclusions: &SymbolSet,
    target: u32,
    total: u32,
) -> (Option<u8>, Interval) {
    let mut sum = 0u32;
    for &(s, c) in counts {
        if exclusions.contains(s) {
            continue;
        }
        let f = 2 * c - 1;
        if target < sum + f {
            return (
                Some(s),
                Interval {
                    start: sum,
                    freq: f,
                    total,
                },
            );
        }
        sum += f;
    }
    (
        None,
        Interval {
            start: sum,
            freq: total - sum,
            total,
        },
    )
}

/// Arena-backed statistics trie. Node 0 is the root (the empty context).
#[derive(Debug, Clone)]
pub struct ContextTrie {
    nodes: Vec<TrieNode>,
    arity: Arity,
    max_depth: usize,
    // Folded over every mutation; equal histories give equal hashes.
    mutation_hash: u64,
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

fn fnv(mut h: u64, bytes: &[u8]) -> u64 {
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(FNV_PRIME);
    }
    h
}

impl ContextTrie {
    pub fn new(arity: Arity, max_depth: usize) -> Self {
        Self {
            nodes: vec![TrieNode::default()],
            arity,
            max_depth,
            mutation_hash: FNV_OFFSET,
        }
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn max_depth(&self) -> usize {
        self.max_depth
    }

    pub fn root(&self) -> NodeId {
        ROOT
    }

    pub fn node(&self, id: NodeId) -> &TrieNode {
        &self.nodes[id as usize]
    }

    /// Total allocated nodes, root included.
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Follows `path` from the root.
    pub fn descend(&self, path: &[u8]) -> Option<NodeId> {
        debug_assert!(path.len() <= self.max_depth);
        path.iter()
            .try_fold(ROOT, |id, &label| self.node(id).child(label))
    }

    /// Node ids along `path`: entry `d` is the node at depth `d`. Stops at
    /// the first missing node, so the result has `1 + matched` entries.
    pub fn walk(&self, path: &[u8], out: &mut Vec<NodeId>) {
        out.clear();
        let mut id = ROOT;
        out.push(id);
        for &label in path {
            match self.node(id).child(label) {
                Some(next) => {
                    id = next;
                    out.push(id);
                }
                None => break,
            }
        }
    }

    /// Creates any missing nodes along `path` and counts `symbol` once at
    /// every depth in `increments`.
    pub fn update_path(&mut self, path: &[u8], symbol: u8, increments: DepthSet) {
        assert!(path.len() <= self.max_depth, "path deeper than trie order");
        let mut id = ROOT;
        if increments.contains(0) {
            self.count(id, symbol);
        }
        for (i, &label) in path.iter().enumerate() {
            id = match self.node(id).child(label) {
                Some(next) => next,
                None => self.add_child(id, label),
            };
            if increments.contains(i + 1) {
                self.count(id, symbol);
            }
        }
    }

    /// [`update_path`](Self::update_path) for a path already passed to
    /// [`walk`](Self::walk), reusing the ids it found.
    pub fn update_walked(
        &mut self,
        path: &[u8],
        walked: &[NodeId],
        symbol: u8,
        increments: DepthSet,
    ) {
        assert!(path.len() <= self.max_depth, "path deeper than trie order");
        debug_assert!(!walked.is_empty() && walked.len() <= path.len() + 1);
        for (depth, &id) in walked.iter().enumerate() {
            if increments.contains(depth) {
                self.count(id, symbol);
            }
        }
        let mut id = walked[walked.len() - 1];
        for depth in walked.len()..=path.len() {
            id = self.add_child(id, path[depth - 1]);
            if increments.contains(depth) {
                self.count(id, symbol);
            }
        }
    }

    fn add_child(&mut self, parent: NodeId, label: u8) -> NodeId {
        if self.arity == Arity::Binary {
            assert!(label <= 1, "binary trie label {label}");
        }
        let id = NodeId::try_from(self.nodes.len()).expect("trie exceeds u32 node ids");
        self.nodes.push(TrieNode::default());
        let p = &mut self.nodes[parent as usize];
        let at = p.children.partition_point(|&(l, _)| l < label);
        p.children.insert(at, (label, id));
        debug_assert!(self.arity == Arity::Symbol || p.children.len() <= 2);
        self.mutation_hash = fnv(self.mutation_hash, b"n");
        self.mutation_hash = fnv(self.mutation_hash, &parent.to_le_bytes());
        self.mutation_hash = fnv(self.mutation_hash, &[label]);
        id
    }

    fn count(&mut self, id: NodeId, symbol: u8) {
        let halved = self.nodes[id as usize].increment(symbol);
        self.mutation_hash = fnv(self.mutation_hash, &[b'c', symbol, u8::from(halved)]);
        self.mutation_hash = fnv(self.mutation_hash, &id.to_le_bytes());
    }

    /// Cheap running hash over every mutation applied so far.
    pub fn state_hash(&self) -> u64 {
        self.mutation_hash
    }

    /// Hash of the full trie contents, computed by traversal.
    pub fn structural_hash(&self) -> u64 {
        let mut h = FNV_OFFSET;
        let mut stack = vec![ROOT];
        while let Some(id) = stack.pop() {
            let node = self.node(id);
            h = fnv(h, b"{");
            for &(s, c) in &node.counts {
                h = fnv(h, &[s]);
                h = fnv(h, &c.to_le_bytes());
            }
            for &(label, child) in node.children.iter().rev() {
                h = fnv(h, &[label]);
                stack.push(child);
            }
        }
        h
    }

    /// Node count by traversal from the root (for cross-checking).
    pub fn count_reachable(&self) -> usize {
        let mut n = 0;
        let mut stack = vec![ROOT];
        while let Some(id) = stack.pop() {
            n += 1;
            stack.extend(self.node(id).children.iter().map(|&(_, c)| c));
        }
        n
    }

    /// Deepest node depth (for cross-checking).
    pub fn depth(&self) -> usize {
        let mut deepest = 0;
        let mut stack = vec![(ROOT, 0usize)];
        while let Some((id, d)) = stack.pop() {
            deepest = deepest.max(d);
            stack.extend(self.node(id).children.iter().map(|&(_, c)| (c, d + 1)));
        }
        deepest
    }
}

/// Node count scaled to the size of |Σ|-ary nodes:
/// `x · (|Σ| + 2) / (2 · |Σ|)`.
pub fn normalized_node_count(nodes: usize, alphabet_size: usize) -> f64 {
    assert!(alphabet_size >= 1, "alphabet must be nonempty");
    nodes as f64 * (alphabet_size as f64 + 2.0) / (2.0 * alphabet_size as f64)
}
