//! MSB-first bit packing.

#[derive(Debug, Default)]
pub(crate) struct BitWriter {
    buf: Vec<u8>,
    len: usize,
}

impl BitWriter {
    pub fn with_capacity_bits(bits: usize) -> Self {
        Self {
            buf: Vec::with_capacity(bits.div_ceil(8)),
            len: 0,
        }
    }

    /// Appends the low `width` bits of `value`, most significant first.
    pub fn put(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        for i in (0..width).rev() {
            let bit = (value >> i) & 1;
            if self.len.is_multiple_of(8) {
                self.buf.push(0);
            }
            if bit == 1 {
                let last = self.buf.len() - 1;
                self.buf[last] |= 0x80 >> (self.len % 8);
            }
            self.len += 1;
        }
    }

    /// Two's complement in `width` bits.
    pub fn put_signed(&mut self, value: i64, width: u32) {
        let mask = if width == 64 {
            u64::MAX
        } else {
            (1u64 << width) - 1
        };
        self.put(value as u64 & mask, width);
    }

    pub fn bit_len(&self) -> usize {
        self.len
    }

    /// Pads with zero bits to a byte boundary.
    pub fn finish(self) -> Vec<u8> {
        self.buf
    }
}

#[derive(Debug)]
pub(crate) struct BitReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> BitReader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Self { buf, pos: 0 }
    }

    pub fn position(&self) -> usize {
        self.pos
    }

    pub fn remaining(&self) -> usize {
        self.buf.len() * 8 - self.pos
    }

    /// Caller guarantees `width <= remaining()`.
    pub fn get(&mut self, width: u32) -> u64 {
        let mut v = 0u64;
        for _ in 0..width {
            let byte = self.buf[self.pos / 8];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            v = (v << 1) | u64::from(bit);
            self.pos += 1;
        }
        v
    }

    pub fn get_signed(&mut self, width: u32) -> i64 {
        let raw = self.get(width);
        if width < 64 && raw & (1 << (width - 1)) != 0 {
            (raw | !((1u64 << width) - 1)) as i64
        } else {
            raw as i64
        }
    }
}
