//! Evaluation quantities: bits per symbol, escapes per symbol, trie sizes
//! and the memory/compression gain percentages between the two models.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::container::ContextMode;
use crate::context_model::normalized_node_count;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("classic trie size is zero")]
    ZeroNodes,
    #[error("classic bits per symbol is zero")]
    ZeroBitsPerSymbol,
    #[error("no compressed-context order is smaller than classic order {0}")]
    NoTradeoff(u8),
    #[error("no classic run at order {0}")]
    MissingOrder(u8),
}

/// Measurements from a single encode.
#[derive(Debug, Clone, PartialEq)]
pub struct RunStats {
    pub mode: ContextMode,
    pub order: u8,
    /// 0 for classic runs.
    pub pitch: u8,
    pub input_bytes: u64,
    /// Whole container, header and code table included.
    pub output_bits: u64,
    pub payload_bits: u64,
    pub escape_count: u64,
    pub node_count: u64,
    pub alphabet_size: usize,
}

impl RunStats {
    pub fn header_bits(&self) -> u64 {
        self.output_bits - self.payload_bits
    }

    pub fn bits_per_symbol(&self) -> f64 {
        ratio(self.output_bits, self.input_bytes)
    }

    pub fn bps_excl_header(&self) -> f64 {
        ratio(self.payload_bits, self.input_bytes)
    }

    pub fn escapes_per_symbol(&self) -> f64 {
        ratio(self.escape_count, self.input_bytes)
    }

    /// Trie size in units of |Σ|-ary nodes: Y for compressed-context runs,
    /// the raw node count for classic runs.
    pub fn normalized_nodes(&self) -> f64 {
        match self.mode {
            ContextMode::Classic => self.node_count as f64,
            ContextMode::Ccm => {
                normalized_node_count(self.node_count as usize, self.alphabet_size.max(1))
            }
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

/// Rounds half up to two decimals.
pub fn round2(x: f64) -> f64 {
    (x * 100.0 + 0.5).floor() / 100.0
}

/// Unrounded gain percentages `(memory, compression)` of a compressed-context
/// run (`ccm_nodes`, `ccm_bps`) over a classic one.
pub fn gain_percentages(
    classic_nodes: f64,
    classic_bps: f64,
    ccm_nodes: f64,
    ccm_bps: f64,
) -> Result<(f64, f64), StatsError> {
    if classic_nodes == 0.0 {
        return Err(StatsError::ZeroNodes);
    }
    if classic_bps == 0.0 {
        return Err(StatsError::ZeroBitsPerSymbol);
    }
    Ok((
        100.0 * (classic_nodes - ccm_nodes) / classic_nodes,
        100.0 * (classic_bps - ccm_bps) / classic_bps,
    ))
}

/// One classic order paired with the compressed-context order chosen for it.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeoffRow {
    pub file: String,
    pub classic_order: u8,
    pub ccm_order: u8,
    pub classic_nodes: f64,
    pub classic_bps: f64,
    pub ccm_nodes: f64,
    pub ccm_bps: f64,
    /// Rounded to two decimals.
    pub memory_gain_pct: f64,
    /// Rounded to two decimals.
    pub compression_gain_pct: f64,
}

/// Gains of `ccm` over `classic`, measured on the same file. Bits per symbol
/// include the container header on both sides.
pub fn gains(file: &str, classic: &RunStats, ccm: &RunStats) -> Result<TradeoffRow, StatsError> {
    let (classic_nodes, ccm_nodes) = (classic.normalized_nodes(), ccm.normalized_nodes());
    let (classic_bps, ccm_bps) = (classic.bits_per_symbol(), ccm.bits_per_symbol());
    let (m, c) = gain_percentages(classic_nodes, classic_bps, ccm_nodes, ccm_bps)?;
    Ok(TradeoffRow {
        file: file.to_owned(),
        classic_order: classic.order,
        ccm_order: ccm.order,
        classic_nodes,
        classic_bps,
        ccm_nodes,
        ccm_bps,
        memory_gain_pct: round2(m),
        compression_gain_pct: round2(c),
    })
}

/// Largest compressed-context order whose normalized trie is strictly
/// smaller than the classic trie at `order`.
pub fn pick_ccm_order(
    classic_sizes: &BTreeMap<u8, f64>,
    ccm_sizes: &BTreeMap<u8, f64>,
    order: u8,
) -> Result<u8, StatsError> {
    let limit = *classic_sizes
        .get(&order)
        .ok_or(StatsError::MissingOrder(order))?;
    ccm_sizes
        .iter()
        .rev()
        .find(|&(_, &y)| y < limit)
        .map(|(&bits, _)| bits)
        .ok_or(StatsError::NoTradeoff(order))
}

/// AVG / MAX / MIN over a column of already-rounded percentages, each
/// rounded again to two decimals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub avg: f64,
    pub max: f64,
    pub min: f64,
}

pub fn summarize(values: &[f64]) -> Option<Summary> {
    if values.is_empty() {
        return None;
    }
    let sum: f64 = values.iter().sum();
    Some(Summary {
        avg: round2(sum / values.len() as f64),
        max: round2(values.iter().copied().fold(f64::NEG_INFINITY, f64::max)),
        min: round2(values.iter().copied().fold(f64::INFINITY, f64::min)),
    })
}
