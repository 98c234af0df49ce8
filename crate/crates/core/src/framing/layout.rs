use std::ops::Range;

use super::FrameConfig;
use crate::error::Result;

/// Symbol index ranges of each field within one frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameLayout {
    pub training_span: Range<usize>,
    pub preamble_span: Range<usize>,
    pub pilot_spans: Vec<Range<usize>>,
    pub data_spans: Vec<Range<usize>>,
    pub total_symbols: usize,
}

impl FrameLayout {
    /// Index of the first payload-section symbol.
    pub fn payload_start(&self) -> usize {
        self.preamble_span.end
    }

    /// All spans in frame order.
    pub fn spans_in_order(&self) -> Vec<Range<usize>> {
        let mut v = vec![self.training_span.clone(), self.preamble_span.clone()];
        for (p, d) in self.pilot_spans.iter().zip(&self.data_spans) {
            v.push(p.clone());
            v.push(d.clone());
        }
        v
    }

    /// Centre of pilot block `i`, in symbols from frame start.
    pub fn pilot_centre(&self, i: usize) -> f64 {
        let s = &self.pilot_spans[i];
        (s.start + s.end - 1) as f64 / 2.0
    }

    /// Centre of the Golay preamble, in symbols from frame start.
    pub fn preamble_centre(&self) -> f64 {
        (self.preamble_span.start + self.preamble_span.end - 1) as f64 / 2.0
    }

    /// True when `idx` is inside a pilot block.
    pub fn is_pilot(&self, idx: usize) -> bool {
        self.pilot_spans.iter().any(|s| s.contains(&idx))
    }
}

/// Data segment lengths: equal split, remainder to the earliest segments.
pub fn data_segment_lengths(data_symbols: usize, segments: usize) -> Vec<usize> {
    let base = data_symbols / segments;
    let extra = data_symbols % segments;
    (0..segments).map(|i| base + usize::from(i < extra)).collect()
}

/// `[training] ‖ [preamble a‖b] ‖ λ_p × ([pilot] ‖ [data segment])`.
pub fn compute_layout(cfg: &FrameConfig) -> Result<FrameLayout> {
    cfg.validate()?;
    let training_span = 0..cfg.training_symbols();
    let preamble_span = training_span.end..training_span.end + cfg.preamble_symbols();
    let mut pos = preamble_span.end;
    let mut pilot_spans = Vec::with_capacity(cfg.lambda_p);
    let mut data_spans = Vec::with_capacity(cfg.lambda_p);
    for len in data_segment_lengths(cfg.data_symbols(), cfg.lambda_p) {
        pilot_spans.push(pos..pos + cfg.pilot_block_len);
        pos += cfg.pilot_block_len;
        data_spans.push(pos..pos + len);
        pos += len;
    }
    Ok(FrameLayout {
        training_span,
        preamble_span,
        pilot_spans,
        data_spans,
        total_symbols: pos,
    })
}
