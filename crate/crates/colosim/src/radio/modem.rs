//! Minimal BPSK packet modem: one sample per symbol, preamble-correlated
//! acquisition, CRC-filtered output. No equalizer; multipath links are
//! measured with probes, not the modem.

use num_complex::Complex64;

use super::probe::PnProbe;
use super::RadioError;

/// Fixed acquisition preamble: 64 PN chips known to every endpoint.
pub const MODEM_PREAMBLE_LEN: usize = 64;
const MODEM_PREAMBLE_SEED: u64 = 0x5EED_F4A3;

/// Payload cap per frame.
pub const MAX_PAYLOAD_BYTES: usize = 2048;

/// Normalized correlation power needed to declare a preamble.
pub const ACQUISITION_THRESHOLD: f64 = 0.2;

const LENGTH_BITS: usize = 16;
const CRC_BITS: usize = 32;

fn preamble() -> &'static [Complex64] {
    use std::sync::OnceLock;
    static PREAMBLE: OnceLock<Vec<Complex64>> = OnceLock::new();
    PREAMBLE.get_or_init(|| {
        PnProbe::new(MODEM_PREAMBLE_SEED, MODEM_PREAMBLE_LEN)
            .chips()
            .to_vec()
    })
}

/// CRC-32 (reflected, polynomial 0xEDB88320) over a byte slice.
pub fn crc32(bytes: &[u8]) -> u32 {
    let mut crc = 0xFFFF_FFFFu32;
    for &b in bytes {
        crc ^= b as u32;
        for _ in 0..8 {
            let mask = (crc & 1).wrapping_neg();
            crc = (crc >> 1) ^ (0xEDB8_8320 & mask);
        }
    }
    !crc
}

/// A payload-bearing frame. On the air it is preamble + 16-bit length +
/// payload bits + CRC-32, BPSK at one sample per symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct ModemFrame {
    pub payload: Vec<u8>,
}

impl ModemFrame {
    pub fn new(payload: Vec<u8>) -> Self {
        ModemFrame { payload }
    }

    /// Samples occupied by a frame with `payload_len` bytes.
    pub fn air_len(payload_len: usize) -> usize {
        MODEM_PREAMBLE_LEN + LENGTH_BITS + payload_len * 8 + CRC_BITS
    }
}

fn bit_symbol(bit: bool) -> Complex64 {
    Complex64::new(if bit { -1.0 } else { 1.0 }, 0.0)
}

fn push_bits_msb(out: &mut Vec<Complex64>, value: u64, bits: usize) {
    for i in (0..bits).rev() {
        out.push(bit_symbol((value >> i) & 1 == 1));
    }
}

/// Modulate one frame.
pub fn modem_tx(frame: &ModemFrame) -> Result<Vec<Complex64>, RadioError> {
    if frame.payload.len() > MAX_PAYLOAD_BYTES {
        return Err(RadioError::PayloadTooLarge {
            size: frame.payload.len(),
        });
    }
    let mut out = Vec::with_capacity(ModemFrame::air_len(frame.payload.len()));
    out.extend_from_slice(preamble());
    push_bits_msb(&mut out, frame.payload.len() as u64, LENGTH_BITS);
    for &byte in &frame.payload {
        push_bits_msb(&mut out, byte as u64, 8);
    }
    push_bits_msb(&mut out, crc32(&frame.payload) as u64, CRC_BITS);
    Ok(out)
}

/// Scan for the preamble from `from`. Returns the preamble start offset and
/// the least-squares channel gain estimated over it.
pub fn acquire(stream: &[Complex64], from: usize) -> Option<(usize, Complex64)> {
    let pre = preamble();
    if stream.len() < MODEM_PREAMBLE_LEN {
        return None;
    }
    for offset in from..=stream.len() - MODEM_PREAMBLE_LEN {
        let window = &stream[offset..offset + MODEM_PREAMBLE_LEN];
        let mut corr = Complex64::new(0.0, 0.0);
        let mut energy = 0.0;
        for (r, p) in window.iter().zip(pre) {
            corr += r * p.conj();
            energy += r.norm_sqr();
        }
        if energy == 0.0 {
            continue;
        }
        let metric = corr.norm_sqr() / (MODEM_PREAMBLE_LEN as f64 * energy);
        if metric >= ACQUISITION_THRESHOLD {
            return Some((offset, corr / MODEM_PREAMBLE_LEN as f64));
        }
    }
    None
}

/// Hard-decision bits starting at `offset`, derotated by the gain estimate.
pub fn demod_bits(
    stream: &[Complex64],
    offset: usize,
    gain: Complex64,
    n_bits: usize,
) -> Vec<bool> {
    (0..n_bits)
        .map(|i| (gain.conj() * stream[offset + i]).re < 0.0)
        .collect()
}

fn bits_to_u64(bits: &[bool]) -> u64 {
    bits.iter().fold(0, |acc, &b| (acc << 1) | b as u64)
}

fn bits_to_bytes(bits: &[bool]) -> Vec<u8> {
    bits.chunks(8).map(|c| bits_to_u64(c) as u8).collect()
}

enum FrameAttempt {
    /// CRC-valid frame ending (exclusive) at the given stream offset.
    Decoded(ModemFrame, usize),
    /// Not decodable; rescan after the preamble.
    Bad,
    /// The buffer ends before the frame does.
    Incomplete,
}

fn try_decode(stream: &[Complex64], preamble_at: usize, gain: Complex64) -> FrameAttempt {
    let data_start = preamble_at + MODEM_PREAMBLE_LEN;
    if stream.len() < data_start + LENGTH_BITS {
        return FrameAttempt::Incomplete;
    }
    let len_bits = demod_bits(stream, data_start, gain, LENGTH_BITS);
    let payload_len = bits_to_u64(&len_bits) as usize;
    if payload_len > MAX_PAYLOAD_BYTES {
        return FrameAttempt::Bad;
    }
    let body_bits = payload_len * 8 + CRC_BITS;
    if stream.len() < data_start + LENGTH_BITS + body_bits {
        return FrameAttempt::Incomplete;
    }
    let bits = demod_bits(stream, data_start + LENGTH_BITS, gain, body_bits);
    let payload = bits_to_bytes(&bits[..payload_len * 8]);
    let crc_rx = bits_to_u64(&bits[payload_len * 8..]) as u32;
    if crc32(&payload) != crc_rx {
        return FrameAttempt::Bad;
    }
    FrameAttempt::Decoded(
        ModemFrame::new(payload),
        data_start + LENGTH_BITS + body_bits,
    )
}

/// One-shot receiver over a complete capture: every CRC-valid frame plus the
/// count of undecodable acquisitions (silently dropped).
pub fn modem_rx(stream: &[Complex64]) -> (Vec<ModemFrame>, usize) {
    let mut frames = Vec::new();
    let mut dropped = 0;
    let mut pos = 0;
    while let Some((at, gain)) = acquire(stream, pos) {
        match try_decode(stream, at, gain) {
            FrameAttempt::Decoded(frame, end) => {
                frames.push(frame);
                pos = end;
            }
            FrameAttempt::Bad => {
                dropped += 1;
                pos = at + MODEM_PREAMBLE_LEN;
            }
            FrameAttempt::Incomplete => {
                dropped += 1;
                break;
            }
        }
    }
    (frames, dropped)
}

/// A frame recovered from a running stream, stamped with the absolute sample
/// index of its final symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct DecodedFrame {
    pub frame: ModemFrame,
    pub end_sample: u64,
}

/// Incremental receiver for block-at-a-time operation. Keeps enough tail to
/// handle frames straddling block boundaries.
pub struct ModemReceiver {
    buf: Vec<Complex64>,
    /// Absolute sample index of `buf[0]`.
    buf_start: u64,
    scan_from: usize,
    dropped: usize,
}

impl Default for ModemReceiver {
    fn default() -> Self {
        Self::new()
    }
}

impl ModemReceiver {
    pub fn new() -> Self {
        ModemReceiver {
            buf: Vec::new(),
            buf_start: 0,
            scan_from: 0,
            dropped: 0,
        }
    }

    pub fn dropped(&self) -> usize {
        self.dropped
    }

    /// Feed the next contiguous samples; returns every frame completed so far.
    pub fn push(&mut self, samples: &[Complex64]) -> Vec<DecodedFrame> {
        self.buf.extend_from_slice(samples);
        let mut out = Vec::new();
        loop {
            match acquire(&self.buf, self.scan_from) {
                Some((at, gain)) => match try_decode(&self.buf, at, gain) {
                    FrameAttempt::Decoded(frame, end) => {
                        out.push(DecodedFrame {
                            frame,
                            end_sample: self.buf_start + end as u64 - 1,
                        });
                        self.scan_from = end;
                    }
                    FrameAttempt::Bad => {
                        self.dropped += 1;
                        self.scan_from = at + MODEM_PREAMBLE_LEN;
                    }
                    FrameAttempt::Incomplete => {
                        self.compact(at);
                        return out;
                    }
                },
                None => {
                    // Keep one preamble-length tail; an acquisition may start
                    // in it and finish with the next block.
                    let keep_from = self
                        .buf
                        .len()
                        .saturating_sub(MODEM_PREAMBLE_LEN - 1)
                        .max(self.scan_from);
                    self.compact(keep_from);
                    return out;
                }
            }
        }
    }

    fn compact(&mut self, keep_from: usize) {
        if keep_from > 0 {
            self.buf.drain(..keep_from);
            self.buf_start += keep_from as u64;
            self.scan_from = self.scan_from.saturating_sub(keep_from);
        }
    }
}
