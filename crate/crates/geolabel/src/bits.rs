//! Bit-exact label plumbing: MSB-first bit strings, fixed-width fields,
//! Elias-gamma counts, and the `len:hex` dump format.

use crate::error::{Error, Result};

/// An MSB-first bit string of arbitrary length.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct Bits {
    bytes: Vec<u8>,
    len: usize,
}

impl Bits {
    pub fn new() -> Self {
        Bits::default()
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn push(&mut self, bit: bool) {
        let byte = self.len / 8;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.len % 8);
        }
        self.len += 1;
    }

    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len);
        self.bytes[i / 8] & (0x80 >> (i % 8)) != 0
    }

    pub fn flip(&mut self, i: usize) {
        assert!(i < self.len);
        self.bytes[i / 8] ^= 0x80 >> (i % 8);
    }

    /// Appends `width` bits of `value`, most significant first.
    pub fn push_uint(&mut self, value: u64, width: usize) {
        assert!(width <= 64);
        assert!(width == 64 || value < (1u64 << width), "value out of field");
        for k in (0..width).rev() {
            self.push((value >> k) & 1 == 1);
        }
    }

    /// Elias-gamma code for `value >= 1`.
    pub fn push_gamma(&mut self, value: u64) {
        assert!(value >= 1);
        let n = 63 - value.leading_zeros() as usize;
        for _ in 0..n {
            self.push(false);
        }
        self.push_uint(value, n + 1);
    }

    pub fn extend(&mut self, other: &Bits) {
        for i in 0..other.len {
            self.push(other.get(i));
        }
    }

    /// `len:hex` with MSB-first hex digits, trailing bits zero-padded.
    pub fn dump(&self) -> String {
        let mut hex = String::new();
        for b in &self.bytes {
            hex.push_str(&format!("{:02x}", b));
        }
        format!("{}:{}", self.len, hex)
    }

    pub fn parse_dump(s: &str) -> Result<Bits> {
        let (len_s, hex) = s
            .split_once(':')
            .ok_or_else(|| Error::Decode("missing ':' in label line".into()))?;
        let len: usize = len_s
            .parse()
            .map_err(|_| Error::Decode("bad bit length".into()))?;
        if hex.len() != (len + 7) / 8 * 2 {
            return Err(Error::Decode("hex length does not match bit length".into()));
        }
        let mut bytes = Vec::with_capacity(hex.len() / 2);
        for i in (0..hex.len()).step_by(2) {
            let b = u8::from_str_radix(&hex[i..i + 2], 16)
                .map_err(|_| Error::Decode("bad hex digit".into()))?;
            bytes.push(b);
        }
        // padding bits past `len` must be zero
        if len % 8 != 0 {
            if let Some(last) = bytes.last() {
                let mask = 0xffu8 >> (len % 8);
                if last & mask != 0 {
                    return Err(Error::Decode("nonzero padding bits".into()));
                }
            }
        }
        Ok(Bits { bytes, len })
    }
}

/// Sequential reader over a `Bits`, tracking consumption for the
/// self-delimiting check.
pub struct BitReader<'a> {
    bits: &'a Bits,
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a Bits) -> Self {
        BitReader { bits, pos: 0 }
    }

    pub fn pos(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.bits.len() - self.pos
    }

    pub fn read_bit(&mut self) -> Result<bool> {
        if self.pos >= self.bits.len() {
            return Err(Error::Decode("label exhausted".into()));
        }
        let b = self.bits.get(self.pos);
        self.pos += 1;
        Ok(b)
    }

    pub fn read_uint(&mut self, width: usize) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    pub fn read_gamma(&mut self) -> Result<u64> {
        let mut n = 0usize;
        while !self.read_bit()? {
            n += 1;
            if n > 63 {
                return Err(Error::Decode("gamma code overflow".into()));
            }
        }
        let mut v = 1u64;
        for _ in 0..n {
            v = (v << 1) | self.read_bit()? as u64;
        }
        Ok(v)
    }

    /// Fails unless every bit of the label was consumed.
    pub fn finish(self) -> Result<()> {
        if self.pos != self.bits.len() {
            return Err(Error::Decode(format!(
                "trailing garbage: {} of {} bits consumed",
                self.pos,
                self.bits.len()
            )));
        }
        Ok(())
    }
}

/// Bits needed to address `n` distinct values (0 for n <= 1).
pub fn width_for(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

/// ceil(log2 n) as used in the label-length accounting.
pub fn ceil_log2(n: usize) -> usize {
    width_for(n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uint_roundtrip() {
        let mut b = Bits::new();
        b.push_uint(5, 3);
        b.push_uint(0, 4);
        b.push_uint(129, 8);
        let mut r = BitReader::new(&b);
        assert_eq!(r.read_uint(3).unwrap(), 5);
        assert_eq!(r.read_uint(4).unwrap(), 0);
        assert_eq!(r.read_uint(8).unwrap(), 129);
        r.finish().unwrap();
    }

    #[test]
    fn gamma_roundtrip() {
        let mut b = Bits::new();
        for v in 1..=40u64 {
            b.push_gamma(v);
        }
        let mut r = BitReader::new(&b);
        for v in 1..=40u64 {
            assert_eq!(r.read_gamma().unwrap(), v);
        }
        r.finish().unwrap();
    }

    #[test]
    fn dump_roundtrip() {
        let mut b = Bits::new();
        b.push_uint(0b1011001, 7);
        let d = b.dump();
        assert_eq!(d, "7:b2");
        assert_eq!(Bits::parse_dump(&d).unwrap(), b);
        assert!(Bits::parse_dump("7:b3").is_err()); // nonzero padding
    }

    #[test]
    fn widths() {
        assert_eq!(width_for(1), 0);
        assert_eq!(width_for(2), 1);
        assert_eq!(width_for(3), 2);
        assert_eq!(width_for(256), 8);
        assert_eq!(width_for(257), 9);
    }
}
