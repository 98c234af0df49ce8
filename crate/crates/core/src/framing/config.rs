use crate::error::{Error, Result};
use crate::kv::KvFile;
use crate::waveform::Constellation;

/// Pilot repetition counts supported by the frame builder.
pub const LAMBDA_CHOICES: [usize; 5] = [1, 2, 4, 6, 8];
pub const MODULATION_CHOICES: [u32; 4] = [4, 8, 16, 64];

const KEYS: [&str; 8] = [
    "lambda_p",
    "payload_symbols",
    "pilot_block_len",
    "training_rep_len",
    "training_reps",
    "golay_len",
    "modulation",
    "crc_bits",
];

/// Frame-structure parameters.
///
/// The payload section is `payload_symbols` long and holds `lambda_p`
/// (pilot block, data segment) pairs. Training and preamble come before it
/// and are not counted in `payload_symbols`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FrameConfig {
    pub lambda_p: usize,
    pub payload_symbols: usize,
    pub pilot_block_len: usize,
    pub training_rep_len: usize,
    pub training_reps: usize,
    pub golay_len: usize,
    pub modulation: u32,
    pub crc_bits: usize,
}

impl Default for FrameConfig {
    fn default() -> Self {
        Self {
            lambda_p: 1,
            payload_symbols: 256,
            pilot_block_len: 16,
            training_rep_len: 32,
            training_reps: 2,
            golay_len: 64,
            modulation: 4,
            crc_bits: 32,
        }
    }
}

/// Accepts `16`, `16qam` or `16QAM`.
pub fn parse_modulation(s: &str) -> Result<u32> {
    let t = s.trim().to_ascii_lowercase();
    let digits = t.strip_suffix("qam").unwrap_or(&t);
    let order: u32 = digits
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("bad modulation `{s}`")))?;
    if !MODULATION_CHOICES.contains(&order) {
        return Err(Error::UnsupportedOrder(order));
    }
    Ok(order)
}

impl FrameConfig {
    pub fn new(lambda_p: usize, modulation: u32) -> Result<Self> {
        let cfg = Self {
            lambda_p,
            modulation,
            ..Default::default()
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if !LAMBDA_CHOICES.contains(&self.lambda_p) {
            return bad(format!(
                "lambda_p must be one of {LAMBDA_CHOICES:?}, got {}",
                self.lambda_p
            ));
        }
        if !MODULATION_CHOICES.contains(&self.modulation) {
            return Err(Error::UnsupportedOrder(self.modulation));
        }
        if self.crc_bits != 32 {
            return bad(format!("only a 32-bit CRC is supported, got {}", self.crc_bits));
        }
        if self.pilot_block_len == 0 {
            return bad("pilot_block_len must be positive".into());
        }
        if self.pilot_block_len * self.lambda_p >= self.payload_symbols {
            return bad(format!(
                "{} pilot symbols leave no room for data in a {}-symbol payload",
                self.pilot_block_len * self.lambda_p,
                self.payload_symbols
            ));
        }
        if self.training_rep_len == 0 || self.training_reps < 2 {
            return bad("training needs at least two repetitions of a nonempty sequence".into());
        }
        if !(2..=4096).contains(&self.golay_len) || !self.golay_len.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(self.golay_len));
        }
        if self.data_bit_budget() / 8 <= self.crc_bytes() {
            return bad(format!(
                "data budget of {} bits cannot carry a CRC and at least one byte",
                self.data_bit_budget()
            ));
        }
        Ok(())
    }

    pub fn constellation(&self) -> Result<Constellation> {
        Constellation::new(self.modulation)
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.modulation.trailing_zeros() as usize
    }

    pub fn pilot_symbols(&self) -> usize {
        self.pilot_block_len * self.lambda_p
    }

    pub fn data_symbols(&self) -> usize {
        self.payload_symbols - self.pilot_symbols()
    }

    pub fn data_bit_budget(&self) -> usize {
        self.data_symbols() * self.bits_per_symbol()
    }

    pub fn crc_bytes(&self) -> usize {
        self.crc_bits / 8
    }

    /// Bytes carried in the data symbols, CRC included.
    pub fn frame_bytes(&self) -> usize {
        self.data_bit_budget() / 8
    }

    /// User bytes per frame, CRC excluded.
    pub fn data_bytes(&self) -> usize {
        self.frame_bytes() - self.crc_bytes()
    }

    pub fn training_symbols(&self) -> usize {
        self.training_rep_len * self.training_reps
    }

    pub fn preamble_symbols(&self) -> usize {
        2 * self.golay_len
    }

    pub fn total_symbols(&self) -> usize {
        self.training_symbols() + self.preamble_symbols() + self.payload_symbols
    }

    pub fn to_kv_string(&self) -> String {
        format!(
            "lambda_p = {}\npayload_symbols = {}\npilot_block_len = {}\ntraining_rep_len = {}\n\
             training_reps = {}\ngolay_len = {}\nmodulation = {}\ncrc_bits = {}\n",
            self.lambda_p,
            self.payload_symbols,
            self.pilot_block_len,
            self.training_rep_len,
            self.training_reps,
            self.golay_len,
            self.modulation,
            self.crc_bits
        )
    }

    /// Reads the frame keys from `kv`, defaulting absent ones. Unknown keys
    /// are rejected.
    pub fn from_kv(kv: &KvFile) -> Result<Self> {
        kv.reject_unknown(&KEYS)?;
        let d = Self::default();
        let modulation = match kv.get("modulation") {
            None => d.modulation,
            Some(e) => parse_modulation(&e.value).map_err(|err| kv.error_at("modulation", err.to_string()))?,
        };
        let cfg = Self {
            lambda_p: kv.parse_opt("lambda_p")?.unwrap_or(d.lambda_p),
            payload_symbols: kv.parse_opt("payload_symbols")?.unwrap_or(d.payload_symbols),
            pilot_block_len: kv.parse_opt("pilot_block_len")?.unwrap_or(d.pilot_block_len),
            training_rep_len: kv.parse_opt("training_rep_len")?.unwrap_or(d.training_rep_len),
            training_reps: kv.parse_opt("training_reps")?.unwrap_or(d.training_reps),
            golay_len: kv.parse_opt("golay_len")?.unwrap_or(d.golay_len),
            modulation,
            crc_bits: kv.parse_opt("crc_bits")?.unwrap_or(d.crc_bits),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_kv_str(text: &str) -> Result<Self> {
        Self::from_kv(&KvFile::parse(text, "<frame config>")?)
    }
}
