//! Carrier layouts for the two hiding modes.
//!
//! Every layout starts at the header boundary `H`:
//!
//! ```text
//! Regular   | flag | type: 8 bytes, LSB | size: 32 bytes, LSB       | payload, 1 bit/byte ...
//! Excessive | flag | type: 4 bytes, 2 planes | size: 16 bytes, 2 planes | payload, 2 bits/byte ...
//! ```
//!
//! The ciphertext is split into `m1` (first `ceil(m/2)` bytes) and `m2` (the
//! rest). Regular mode interleaves them on alternate bytes; Excessive mode
//! stacks them on the two low planes of the same bytes.

use std::ops::Range;

use super::bits::Plane;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StegoMode {
    Regular,
    Excessive,
}

impl StegoMode {
    pub const ALL: [StegoMode; 2] = [StegoMode::Regular, StegoMode::Excessive];

    /// Value stored in the LSB of the flag byte.
    pub const fn flag_bit(self) -> u8 {
        match self {
            StegoMode::Regular => 1,
            StegoMode::Excessive => 0,
        }
    }

    pub const fn from_flag_bit(bit: u8) -> Self {
        if bit & 1 == 1 {
            StegoMode::Regular
        } else {
            StegoMode::Excessive
        }
    }

    pub const fn bits_per_byte(self) -> usize {
        match self {
            StegoMode::Regular => 1,
            StegoMode::Excessive => 2,
        }
    }

    /// Carrier bytes holding the one-byte file-type code.
    pub const fn type_field_len(self) -> usize {
        8 / self.bits_per_byte()
    }

    /// Carrier bytes holding the 32-bit message size.
    pub const fn size_field_len(self) -> usize {
        32 / self.bits_per_byte()
    }

    /// Flag byte plus type and size fields: 41 for Regular, 21 for Excessive.
    pub const fn reserved_bytes(self) -> usize {
        1 + self.type_field_len() + self.size_field_len()
    }

    /// Carrier bytes spanned by an `m`-byte payload.
    ///
    /// Regular mode with odd `m` ends on an `m1` bit with no `m2` partner; the
    /// span is rounded up to the full stride pair, so the last byte is left
    /// unused.
    pub const fn payload_span(self, m: usize) -> usize {
        match self {
            StegoMode::Regular => {
                if m.is_multiple_of(2) {
                    8 * m
                } else {
                    8 * m + 8
                }
            }
            StegoMode::Excessive => 8 * m.div_ceil(2),
        }
    }

    /// Minimum carrier size for an `m`-byte payload behind an `H`-byte header.
    pub const fn required_size(self, header_len: usize, m: usize) -> usize {
        header_len + self.reserved_bytes() + self.payload_span(m)
    }

    /// Largest payload that fits a carrier of `carrier_len` bytes.
    pub fn capacity(self, header_len: usize, carrier_len: usize) -> usize {
        let Some(room) = carrier_len.checked_sub(header_len + self.reserved_bytes()) else {
            return 0;
        };
        let pairs = room / 8;
        let m = match self {
            // Odd sizes take as much room as the next even size.
            StegoMode::Regular => pairs & !1,
            StegoMode::Excessive => 2 * pairs,
        };
        m.min(u32::MAX as usize)
    }

    /// The historical check `(M - (H + reserved)) / 8 > m` (or `/ 4` for
    /// Excessive). It ignores the stride padding of odd Regular payloads and
    /// is kept for reference only; `required_size` is authoritative.
    pub fn approximate_fit(self, header_len: usize, carrier_len: usize, m: usize) -> bool {
        let Some(room) = carrier_len.checked_sub(header_len + self.reserved_bytes()) else {
            return false;
        };
        // Real-valued division: room / d > m  <=>  room > d * m.
        let divisor = 8 / self.bits_per_byte();
        room > divisor * m
    }
}

impl std::fmt::Display for StegoMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            StegoMode::Regular => "regular",
            StegoMode::Excessive => "excessive",
        })
    }
}

impl std::str::FromStr for StegoMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "regular" => Ok(StegoMode::Regular),
            "excessive" => Ok(StegoMode::Excessive),
            other => Err(format!(
                "unknown mode {other:?} (expected regular or excessive)"
            )),
        }
    }
}

/// A carrier position: byte offset and bit plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Slot {
    pub offset: usize,
    pub plane: Plane,
}

/// Resolved offsets for one payload in one mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmbedPlan {
    pub mode: StegoMode,
    pub header_len: usize,
    pub flag_offset: usize,
    pub type_field: Range<usize>,
    pub size_field: Range<usize>,
    pub payload_base: usize,
    /// Ciphertext length in bytes.
    pub message_len: usize,
    pub m1_len: usize,
    pub m2_len: usize,
    pub required_size: usize,
}

impl EmbedPlan {
    pub fn new(mode: StegoMode, header_len: usize, message_len: usize) -> Self {
        let flag_offset = header_len;
        let type_start = flag_offset + 1;
        let size_start = type_start + mode.type_field_len();
        let payload_base = size_start + mode.size_field_len();
        debug_assert_eq!(payload_base, header_len + mode.reserved_bytes());
        Self {
            mode,
            header_len,
            flag_offset,
            type_field: type_start..size_start,
            size_field: size_start..payload_base,
            payload_base,
            message_len,
            m1_len: message_len.div_ceil(2),
            m2_len: message_len / 2,
            required_size: mode.required_size(header_len, message_len),
        }
    }

    pub fn flag_slot(&self) -> Slot {
        Slot {
            offset: self.flag_offset,
            plane: Plane::Lsb,
        }
    }

    /// Carrier bytes spanned by the payload, `payload_base..payload_base + span`.
    pub fn payload_range(&self) -> Range<usize> {
        self.payload_base..self.payload_base + self.mode.payload_span(self.message_len)
    }

    /// Slot of bit `k` (MSB-first) of a metadata field starting at `start`.
    fn field_slot(&self, start: usize, field_bytes: usize, k: usize) -> Slot {
        match self.mode {
            StegoMode::Regular => Slot {
                offset: start + k,
                plane: Plane::Lsb,
            },
            StegoMode::Excessive if k < field_bytes => Slot {
                offset: start + k,
                plane: Plane::Lsb,
            },
            StegoMode::Excessive => Slot {
                offset: start + k - field_bytes,
                plane: Plane::Second,
            },
        }
    }

    /// Slots of the 8 type-code bits, MSB first.
    pub fn type_slots(&self) -> impl Iterator<Item = Slot> + '_ {
        let len = self.type_field.len();
        (0..8).map(move |k| self.field_slot(self.type_field.start, len, k))
    }

    /// Slots of the 32 size bits, MSB first.
    pub fn size_slots(&self) -> impl Iterator<Item = Slot> + '_ {
        let len = self.size_field.len();
        (0..32).map(move |k| self.field_slot(self.size_field.start, len, k))
    }

    /// Slot of bit `i` of the `m1` stream.
    pub fn m1_slot(&self, i: usize) -> Slot {
        match self.mode {
            StegoMode::Regular => Slot {
                offset: self.payload_base + 2 * i,
                plane: Plane::Lsb,
            },
            StegoMode::Excessive => Slot {
                offset: self.payload_base + i,
                plane: Plane::Lsb,
            },
        }
    }

    /// Slot of bit `j` of the `m2` stream.
    pub fn m2_slot(&self, j: usize) -> Slot {
        match self.mode {
            StegoMode::Regular => Slot {
                offset: self.payload_base + 2 * j + 1,
                plane: Plane::Lsb,
            },
            StegoMode::Excessive => Slot {
                offset: self.payload_base + j,
                plane: Plane::Second,
            },
        }
    }

    /// Every payload slot, `m1` bits first, then `m2` bits.
    pub fn payload_slots(&self) -> impl Iterator<Item = Slot> + '_ {
        (0..8 * self.m1_len)
            .map(|i| self.m1_slot(i))
            .chain((0..8 * self.m2_len).map(|j| self.m2_slot(j)))
    }

    /// Every slot the plan writes, in write order.
    pub fn all_slots(&self) -> impl Iterator<Item = Slot> + '_ {
        std::iter::once(self.flag_slot())
            .chain(self.type_slots())
            .chain(self.size_slots())
            .chain(self.payload_slots())
    }
}

/// Splits ciphertext into `m1` (first `ceil(m/2)` bytes) and `m2`.
pub fn split_halves(ciphertext: &[u8]) -> (&[u8], &[u8]) {
    ciphertext.split_at(ciphertext.len().div_ceil(2))
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use proptest::prelude::*;

    use super::*;

    fn brute_capacity(mode: StegoMode, h: usize, total: usize) -> usize {
        (0..=total)
            .rev()
            .find(|&m| mode.required_size(h, m) <= total)
            .unwrap_or(0)
    }

    #[test]
    fn reserved_constants() {
        assert_eq!(StegoMode::Regular.reserved_bytes(), 41);
        assert_eq!(StegoMode::Excessive.reserved_bytes(), 21);
        assert_eq!(StegoMode::Regular.type_field_len(), 8);
        assert_eq!(StegoMode::Regular.size_field_len(), 32);
        assert_eq!(StegoMode::Excessive.type_field_len(), 4);
        assert_eq!(StegoMode::Excessive.size_field_len(), 16);
    }

    #[test]
    fn required_sizes() {
        assert_eq!(StegoMode::Regular.required_size(44, 2), 44 + 41 + 16);
        assert_eq!(StegoMode::Regular.required_size(44, 3), 44 + 24 + 49);
        assert_eq!(StegoMode::Excessive.required_size(44, 3), 44 + 21 + 16);
    }

    #[test]
    fn capacity_matches_brute_force_scan() {
        // Values produced by `brute_capacity` on M = 100000, H = 44.
        assert_eq!(brute_capacity(StegoMode::Regular, 44, 100_000), 12_488);
        assert_eq!(brute_capacity(StegoMode::Excessive, 44, 100_000), 24_982);
        assert_eq!(StegoMode::Regular.capacity(44, 100_000), 12_488);
        assert_eq!(StegoMode::Excessive.capacity(44, 100_000), 24_982);
        assert_eq!(StegoMode::Regular.capacity(44, 44 + 41), 0);
        assert_eq!(StegoMode::Excessive.capacity(10, 5), 0);
    }

    #[test]
    fn approximate_check_undercounts_odd_regular() {
        // m = 5 needs 48 payload bytes; the inequality accepts 41.
        assert!(StegoMode::Regular.approximate_fit(0, 41 + 41, 5));
        assert!(StegoMode::Regular.required_size(0, 5) > 41 + 41);
        assert!(!StegoMode::Regular.approximate_fit(0, 41 + 40, 5));
    }

    #[test]
    fn mode_parsing() {
        assert_eq!("Regular".parse::<StegoMode>(), Ok(StegoMode::Regular));
        assert_eq!("excessive".parse::<StegoMode>(), Ok(StegoMode::Excessive));
        assert!("loud".parse::<StegoMode>().is_err());
    }

    proptest! {
        #[test]
        fn capacity_is_maximal(h in 0usize..64, extra in 0usize..600, regular in any::<bool>()) {
            let mode = if regular { StegoMode::Regular } else { StegoMode::Excessive };
            let total = h + extra;
            prop_assert_eq!(mode.capacity(h, total), brute_capacity(mode, h, total));
        }

        #[test]
        fn split_law(ct in proptest::collection::vec(any::<u8>(), 0..64)) {
            let (m1, m2) = split_halves(&ct);
            prop_assert_eq!(m1.len(), ct.len().div_ceil(2));
            prop_assert_eq!(m2.len(), ct.len() / 2);
            prop_assert!(m1.len() - m2.len() <= 1);
            prop_assert_eq!([m1, m2].concat(), ct);
        }

        #[test]
        fn slots_are_disjoint_and_in_range(h in 0usize..100, m in 0usize..40, regular in any::<bool>()) {
            let mode = if regular { StegoMode::Regular } else { StegoMode::Excessive };
            let plan = EmbedPlan::new(mode, h, m);
            let slots: Vec<Slot> = plan.all_slots().collect();
            let unique: HashSet<Slot> = slots.iter().copied().collect();
            prop_assert_eq!(unique.len(), slots.len());
            prop_assert_eq!(slots.len(), 1 + 8 + 32 + 8 * m);
            for s in &slots {
                prop_assert!(s.offset >= h && s.offset < plan.required_size);
            }
            let bytes: HashSet<usize> = slots.iter().map(|s| s.offset).collect();
            let bound = match mode {
                StegoMode::Regular => 41 + 8 * m,
                StegoMode::Excessive => 21 + 8 * m.div_ceil(2),
            };
            prop_assert!(bytes.len() <= bound);
            for s in plan.payload_slots() {
                prop_assert!(plan.payload_range().contains(&s.offset));
            }
        }
    }
}
