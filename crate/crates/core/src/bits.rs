use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

/// A fixed-width bit string; bit 0 is the least significant.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitString {
    width: usize,
    words: Vec<u64>,
}

impl BitString {
    pub fn zeros(width: usize) -> Self {
        BitString {
            width,
            words: alloc::vec![0; width.div_ceil(64)],
        }
    }

    /// Low `width` bits of `value`.
    pub fn from_u64(width: usize, value: u64) -> Self {
        let mut b = BitString::zeros(width);
        if let Some(w) = b.words.first_mut() {
            *w = value;
        }
        b.mask_top();
        b
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn to_u64(&self) -> Option<u64> {
        if self.words.iter().skip(1).any(|&w| w != 0) {
            return None;
        }
        Some(self.words.first().copied().unwrap_or(0))
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn bit(&self, i: usize) -> bool {
        i < self.width && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn set_bit(&mut self, i: usize, on: bool) {
        assert!(i < self.width, "bit {i} outside width {}", self.width);
        if on {
            self.words[i / 64] |= 1 << (i % 64);
        } else {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    /// `len <= 64` bits starting at `offset`.
    pub fn field(&self, offset: usize, len: usize) -> u64 {
        (0..len).fold(0u64, |acc, k| acc | (self.bit(offset + k) as u64) << k)
    }

    pub fn set_field(&mut self, offset: usize, len: usize, value: u64) {
        for k in 0..len {
            self.set_bit(offset + k, value >> k & 1 == 1);
        }
    }

    pub fn xor(&self, other: &BitString) -> BitString {
        assert_eq!(self.width, other.width);
        BitString {
            width: self.width,
            words: self.words.iter().zip(&other.words).map(|(a, b)| a ^ b).collect(),
        }
    }

    /// Big-endian hex with `ceil(width / 4)` digits.
    pub fn to_hex(&self) -> String {
        let digits = self.width.div_ceil(4).max(1);
        (0..digits)
            .rev()
            .map(|d| {
                let nibble = self.field(d * 4, 4.min(self.width.saturating_sub(d * 4)));
                char::from_digit(nibble as u32, 16).unwrap()
            })
            .collect()
    }

    pub fn from_hex(width: usize, text: &str) -> Option<BitString> {
        let text = text.strip_prefix("0x").unwrap_or(text);
        let mut b = BitString::zeros(width);
        for (d, c) in text.chars().rev().enumerate() {
            let nibble = c.to_digit(16)? as u64;
            for k in 0..4 {
                if nibble >> k & 1 == 1 {
                    if d * 4 + k >= width {
                        return None;
                    }
                    b.set_bit(d * 4 + k, true);
                }
            }
        }
        Some(b)
    }

    /// `0b` followed by exactly `width` binary digits, most significant first.
    pub fn to_binary(&self) -> String {
        let mut s = String::from("0b");
        for i in (0..self.width).rev() {
            s.push(if self.bit(i) { '1' } else { '0' });
        }
        s
    }

    pub fn from_binary(width: usize, text: &str) -> Option<BitString> {
        let text = text.strip_prefix("0b").unwrap_or(text);
        if text.len() > width {
            return None;
        }
        let mut b = BitString::zeros(width);
        for (i, c) in text.chars().rev().enumerate() {
            match c {
                '0' => {}
                '1' => b.set_bit(i, true),
                _ => return None,
            }
        }
        Some(b)
    }

    fn mask_top(&mut self) {
        let rem = self.width % 64;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

impl Ord for BitString {
    fn cmp(&self, other: &Self) -> Ordering {
        self.width.cmp(&other.width).then_with(|| {
            self.words
                .iter()
                .rev()
                .cmp(other.words.iter().rev())
        })
    }
}

impl PartialOrd for BitString {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "0x{}", self.to_hex())
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}
