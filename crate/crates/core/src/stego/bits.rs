//! Single-bit access to the two lowest bit planes of a byte.

/// Bit plane of a carrier byte. `Lsb` is bit 0; `Second` is bit 1, the
/// "7th bit" when bits are numbered 1..8 from the most significant end.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Plane {
    Lsb = 0,
    Second = 1,
}

impl Plane {
    pub const fn index(self) -> u32 {
        self as u32
    }

    pub const fn mask(self) -> u8 {
        1 << self.index()
    }
}

#[inline]
pub fn read_bit(byte: u8, plane: Plane) -> u8 {
    (byte >> plane.index()) & 1
}

/// Sets the selected plane of `byte` to `bit` (only the low bit of `bit` is
/// used). Writing the value already present is a no-op.
#[inline]
pub fn write_bit(byte: u8, plane: Plane, bit: u8) -> u8 {
    (byte & !plane.mask()) | ((bit & 1) << plane.index())
}

/// Bits of `value`'s low `width` bits, most significant first.
pub(crate) fn msb_first(value: u64, width: usize) -> impl Iterator<Item = u8> {
    (0..width).rev().map(move |k| ((value >> k) & 1) as u8)
}

/// Bits of a byte slice, byte by byte, most significant bit first.
pub(crate) fn byte_bits(bytes: &[u8]) -> impl Iterator<Item = u8> + '_ {
    bytes.iter().flat_map(|&b| msb_first(u64::from(b), 8))
}

/// Packs MSB-first bits into bytes. `bits.len()` must be a multiple of 8.
pub(crate) fn pack_bytes(bits: impl IntoIterator<Item = u8>) -> Vec<u8> {
    let mut out = Vec::new();
    let mut acc = 0u8;
    let mut n = 0;
    for bit in bits {
        acc = (acc << 1) | (bit & 1);
        n += 1;
        if n == 8 {
            out.push(acc);
            acc = 0;
            n = 0;
        }
    }
    debug_assert_eq!(n, 0, "bit count not a multiple of 8");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn read_examples() {
        assert_eq!(read_bit(0b0110_0110, Plane::Lsb), 0);
        assert_eq!(read_bit(0b0110_0110, Plane::Second), 1);
        assert_eq!(read_bit(0xFF, Plane::Second), 1);
    }

    #[test]
    fn write_examples() {
        assert_eq!(write_bit(0b0110_0110, Plane::Lsb, 1), 0b0110_0111);
        assert_eq!(write_bit(0xFF, Plane::Second, 0), 0xFD);
    }

    #[test]
    fn write_is_confined_and_readable() {
        for b in 0..=255u8 {
            for plane in [Plane::Lsb, Plane::Second] {
                assert_eq!(write_bit(b, plane, read_bit(b, plane)), b);
                for v in 0..=1 {
                    let w = write_bit(b, plane, v);
                    assert_eq!(read_bit(w, plane), v);
                    assert_eq!((w ^ b) & !plane.mask(), 0);
                }
            }
        }
    }

    #[test]
    fn pack_inverts_unpack() {
        let bytes = [0xA5, 0x00, 0xFF, 0x3C];
        assert_eq!(pack_bytes(byte_bits(&bytes)), bytes.to_vec());
        assert_eq!(msb_first(0b1011, 4).collect::<Vec<_>>(), vec![1, 0, 1, 1]);
    }
}
