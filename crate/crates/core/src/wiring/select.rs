//! Switch select words and their serial stream format.

use std::fmt;
use std::io::{self, Read, Write};

use super::WiringError;

/// One select bit per zone, zone 0 in the least significant bit of byte 0.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SelectWord {
    len: usize,
    bytes: Vec<u8>,
}

impl SelectWord {
    pub fn zeros(len: usize) -> Self {
        SelectWord {
            len,
            bytes: vec![0; len.div_ceil(8)],
        }
    }

    pub fn from_bits(bits: &[bool]) -> Self {
        let mut w = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            w.set(i, b);
        }
        w
    }

    /// Packed little-endian bytes; bits past `len` must be clear.
    pub fn from_bytes(len: usize, bytes: &[u8]) -> Result<Self, WiringError> {
        if bytes.len() != len.div_ceil(8) {
            return Err(WiringError::BadWordLength {
                bits: len,
                bytes: bytes.len(),
            });
        }
        if !len.is_multiple_of(8) {
            let last = bytes[bytes.len() - 1];
            if last >> (len % 8) != 0 {
                return Err(WiringError::PaddingBitsSet);
            }
        }
        Ok(SelectWord {
            len,
            bytes: bytes.to_vec(),
        })
    }

    pub fn from_hex(len: usize, s: &str) -> Result<Self, WiringError> {
        let bytes = hex::decode(s).map_err(|e| WiringError::BadHex(e.to_string()))?;
        Self::from_bytes(len, &bytes)
    }

    pub fn to_hex(&self) -> String {
        hex::encode(&self.bytes)
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(
            i < self.len,
            "bit {i} out of range for word of {} bits",
            self.len
        );
        self.bytes[i / 8] >> (i % 8) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        assert!(
            i < self.len,
            "bit {i} out of range for word of {} bits",
            self.len
        );
        if value {
            self.bytes[i / 8] |= 1 << (i % 8);
        } else {
            self.bytes[i / 8] &= !(1 << (i % 8));
        }
    }

    pub fn bits(&self) -> Vec<bool> {
        (0..self.len).map(|i| self.get(i)).collect()
    }

    pub fn count_ones(&self) -> usize {
        self.bytes.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

impl fmt::Debug for SelectWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("SelectWord(")?;
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        f.write_str(")")
    }
}

/// Seconds needed to clock `bits` select bits over a serial link.
pub fn streaming_time(word: &SelectWord, link_rate_bps: f64) -> f64 {
    word.len() as f64 / link_rate_bps
}

/// Link rate at which loading the next word never stalls a swap step.
pub fn required_rate(zones: usize, step_time: f64) -> f64 {
    zones as f64 / step_time
}

pub const STREAM_MAGIC: [u8; 4] = *b"WSEL";
pub const STREAM_HEADER_LEN: usize = 16;

/// A sequence of select words as written to disk.
///
/// Layout: magic `WSEL`, word length in bits (u32 LE), word count (u32 LE),
/// 32-bit config tag (u32 LE), then each word as `ceil(bits / 8)` packed
/// bytes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectStream {
    pub bits: usize,
    pub tag: u32,
    pub words: Vec<SelectWord>,
}

impl SelectStream {
    pub fn new(bits: usize, tag: u32, words: Vec<SelectWord>) -> Result<Self, WiringError> {
        if let Some(w) = words.iter().find(|w| w.len() != bits) {
            return Err(WiringError::BadWordLength {
                bits,
                bytes: w.as_bytes().len(),
            });
        }
        Ok(SelectStream { bits, tag, words })
    }

    pub fn write_to<W: Write>(&self, mut out: W) -> io::Result<()> {
        out.write_all(&STREAM_MAGIC)?;
        out.write_all(&(self.bits as u32).to_le_bytes())?;
        out.write_all(&(self.words.len() as u32).to_le_bytes())?;
        out.write_all(&self.tag.to_le_bytes())?;
        for w in &self.words {
            out.write_all(w.as_bytes())?;
        }
        Ok(())
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut buf =
            Vec::with_capacity(STREAM_HEADER_LEN + self.words.len() * self.bits.div_ceil(8));
        self.write_to(&mut buf)
            .expect("writing to a Vec cannot fail");
        buf
    }

    pub fn read_from<R: Read>(mut input: R) -> Result<Self, WiringError> {
        let mut header = [0u8; STREAM_HEADER_LEN];
        input
            .read_exact(&mut header)
            .map_err(|_| WiringError::TruncatedStream)?;
        if header[0..4] != STREAM_MAGIC {
            return Err(WiringError::BadMagic);
        }
        let word = |o: usize| u32::from_le_bytes(header[o..o + 4].try_into().unwrap());
        let bits = word(4) as usize;
        let count = word(8) as usize;
        let tag = word(12);
        let mut words = Vec::with_capacity(count);
        let mut buf = vec![0u8; bits.div_ceil(8)];
        for _ in 0..count {
            input
                .read_exact(&mut buf)
                .map_err(|_| WiringError::TruncatedStream)?;
            words.push(SelectWord::from_bytes(bits, &buf)?);
        }
        let mut rest = [0u8; 1];
        if input
            .read(&mut rest)
            .map_err(|_| WiringError::TruncatedStream)?
            != 0
        {
            return Err(WiringError::TrailingBytes);
        }
        Ok(SelectStream { bits, tag, words })
    }

    /// Total time to stream every word at `link_rate_bps`.
    pub fn streaming_time(&self, link_rate_bps: f64) -> f64 {
        (self.bits * self.words.len()) as f64 / link_rate_bps
    }
}
