use num_complex::Complex64;

use crate::error::{Error, Result};

/// Normalized rectangular QAM constellation with a Gray bit labeling.
///
/// Points are stored in raster order: index `q * i_levels + i`, where `i`
/// counts in-phase levels from most negative to most positive and `q` does
/// the same for quadrature. The first `log2(i_levels)` bits of a label select
/// the in-phase level (Gray coded), the remaining bits the quadrature level.
///
/// 4, 16 and 64QAM are square grids. 8QAM is a 4×2 grid (four in-phase
/// levels, two quadrature levels), which keeps every decision region
/// rectangular and the Gray property intact.
#[derive(Debug, Clone, PartialEq)]
pub struct Constellation {
    order: u32,
    bits_per_symbol: usize,
    points: Vec<Complex64>,
    /// `labels[point_index]` is the bit group carried by that point.
    labels: Vec<u32>,
    /// `point_of_label[label]` is the point index carrying that bit group.
    point_of_label: Vec<usize>,
    i_levels: usize,
    q_levels: usize,
    scale: f64,
}

fn gray(n: u32) -> u32 {
    n ^ (n >> 1)
}

impl Constellation {
    pub fn new(order: u32) -> Result<Self> {
        let (i_levels, q_levels) = match order {
            4 => (2usize, 2usize),
            8 => (4, 2),
            16 => (4, 4),
            64 => (8, 8),
            _ => return Err(Error::UnsupportedOrder(order)),
        };
        let i_bits = i_levels.trailing_zeros();
        let q_bits = q_levels.trailing_zeros();
        let bits_per_symbol = (i_bits + q_bits) as usize;

        // E|x|² of an odd-integer grid {±1, ±3, ...} per axis is (L² − 1)/3.
        let energy = ((i_levels * i_levels - 1) + (q_levels * q_levels - 1)) as f64 / 3.0;
        let scale = 1.0 / energy.sqrt();

        let mut points = Vec::with_capacity(order as usize);
        let mut labels = Vec::with_capacity(order as usize);
        for q in 0..q_levels {
            for i in 0..i_levels {
                let re = (2 * i) as f64 - (i_levels - 1) as f64;
                let im = (2 * q) as f64 - (q_levels - 1) as f64;
                points.push(Complex64::new(re * scale, im * scale));
                labels.push((gray(i as u32) << q_bits) | gray(q as u32));
            }
        }
        let mut point_of_label = vec![0usize; order as usize];
        for (idx, &label) in labels.iter().enumerate() {
            point_of_label[label as usize] = idx;
        }

        Ok(Self {
            order,
            bits_per_symbol,
            points,
            labels,
            point_of_label,
            i_levels,
            q_levels,
            scale,
        })
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn label(&self, point_index: usize) -> u32 {
        self.labels[point_index]
    }

    pub fn point_for_label(&self, label: u32) -> Complex64 {
        self.points[self.point_of_label[label as usize]]
    }

    /// Minimum distance between two points.
    pub fn min_distance(&self) -> f64 {
        2.0 * self.scale
    }

    /// Index of the nearest point. Exact midpoints go to the lower index.
    ///
    /// The grid is separable, so each axis is sliced on its own.
    pub fn nearest_index(&self, s: Complex64) -> usize {
        let i = slice_axis(s.re / self.scale, self.i_levels);
        let q = slice_axis(s.im / self.scale, self.q_levels);
        q * self.i_levels + i
    }

    pub fn decide(&self, s: Complex64) -> Complex64 {
        self.points[self.nearest_index(s)]
    }

    pub fn name(&self) -> String {
        format!("{}QAM", self.order)
    }
}

fn slice_axis(x: f64, levels: usize) -> usize {
    // Level k sits at 2k − (L − 1); boundaries between levels are at even
    // integers. ceil(t − 0.5) rounds half down, matching the lowest-index
    // tie break of an exhaustive search.
    let t = (x + (levels - 1) as f64) / 2.0;
    let k = (t - 0.5).ceil();
    if k.is_nan() || k <= 0.0 {
        0
    } else {
        (k as usize).min(levels - 1)
    }
}

/// Maps bits (MSB of each group first) to constellation points.
pub fn map_bits(bits: &[bool], c: &Constellation) -> Result<Vec<Complex64>> {
    let k = c.bits_per_symbol();
    if !bits.len().is_multiple_of(k) {
        return Err(Error::BitLength {
            len: bits.len(),
            bits_per_symbol: k,
        });
    }
    Ok(bits
        .chunks_exact(k)
        .map(|group| {
            let label = group.iter().fold(0u32, |acc, &b| (acc << 1) | b as u32);
            c.point_for_label(label)
        })
        .collect())
}

/// Hard-decision demapping to the label of the nearest point.
pub fn demap_symbols(symbols: &[Complex64], c: &Constellation) -> Vec<bool> {
    let k = c.bits_per_symbol();
    let mut out = Vec::with_capacity(symbols.len() * k);
    for &s in symbols {
        let label = c.label(c.nearest_index(s));
        out.extend((0..k).rev().map(|b| (label >> b) & 1 == 1));
    }
    out
}

pub fn bytes_to_bits(bytes: &[u8]) -> Vec<bool> {
    bytes
        .iter()
        .flat_map(|&byte| (0..8).rev().map(move |b| (byte >> b) & 1 == 1))
        .collect()
}

/// Packs bits MSB first; a trailing partial byte is dropped.
pub fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks_exact(8)
        .map(|chunk| chunk.iter().fold(0u8, |acc, &b| (acc << 1) | b as u8))
        .collect()
}
