//! Embedding, inspection, extraction and deletion of sealed payloads.
//!
//! All operations address bytes `[H, M)` of a carrier, where `H` is the
//! header boundary and `M` the end of the body. The header is never written.
//! Nothing marks a carrier as holding a message: `inspect` on a clean file
//! decodes whatever bits happen to be there, and implausible sizes are the
//! only signal that no message is present.

mod bits;
mod plan;
mod registry;

use thiserror::Error;

pub use bits::{read_bit, write_bit, Plane};
pub use plan::{split_halves, EmbedPlan, Slot, StegoMode};
pub use registry::{
    FileTypeCode, FileTypeRegistry, RegistryError, UNKNOWN_CODE, UNKNOWN_EXTENSION,
};

use crate::cipher::{self, CipherError, SealedPayload};
use crate::container::AudioCarrier;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum StegoError {
    #[error(
        "carrier size is not enough: {mode} mode needs {required} bytes, carrier has {available}"
    )]
    CapacityExceeded {
        mode: StegoMode,
        required: usize,
        available: usize,
    },
    #[error("carrier too small to hold {mode} metadata: need {required} bytes, have {available}")]
    CarrierTooSmall {
        mode: StegoMode,
        required: usize,
        available: usize,
    },
    #[error("declared message size {declared} exceeds the {mode} capacity of {capacity} bytes")]
    SizeImplausible {
        mode: StegoMode,
        declared: u32,
        capacity: usize,
    },
    #[error(transparent)]
    Cipher(#[from] CipherError),
}

/// Metadata decoded from a carrier.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Inspection {
    pub mode: StegoMode,
    pub file_type_code: u8,
    pub declared_size: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Extracted {
    pub plaintext: Vec<u8>,
    pub file_type_code: u8,
    pub extension: String,
}

fn get(buf: &[u8], slot: Slot) -> u8 {
    read_bit(buf[slot.offset], slot.plane)
}

fn put(buf: &mut [u8], slot: Slot, bit: u8) {
    buf[slot.offset] = write_bit(buf[slot.offset], slot.plane, bit);
}

fn read_field(buf: &[u8], slots: impl Iterator<Item = Slot>) -> u64 {
    slots.fold(0u64, |acc, s| (acc << 1) | u64::from(get(buf, s)))
}

/// Largest ciphertext (in bytes) the carrier can hold in `mode`.
pub fn capacity(carrier: &AudioCarrier, mode: StegoMode) -> usize {
    mode.capacity(carrier.header_len(), carrier.body_end())
}

/// Mode the embedder should pick when the user did not choose one: Regular
/// when it fits, else Excessive, else `None`.
pub fn suggest_mode(carrier: &AudioCarrier, message_len: usize) -> Option<StegoMode> {
    StegoMode::ALL
        .into_iter()
        .find(|&mode| message_len <= capacity(carrier, mode))
}

/// Writes `payload` into a copy of `carrier`.
pub fn embed(
    carrier: &AudioCarrier,
    payload: &SealedPayload,
    mode: StegoMode,
) -> Result<AudioCarrier, StegoError> {
    let mut out = carrier.clone();
    embed_in_place(&mut out, payload, mode)?;
    Ok(out)
}

pub fn embed_in_place(
    carrier: &mut AudioCarrier,
    payload: &SealedPayload,
    mode: StegoMode,
) -> Result<(), StegoError> {
    let ciphertext = payload.ciphertext();
    let plan = EmbedPlan::new(mode, carrier.header_len(), ciphertext.len());
    let available = carrier.body_end();
    if plan.required_size > available {
        return Err(StegoError::CapacityExceeded {
            mode,
            required: plan.required_size,
            available,
        });
    }

    let buf = carrier.addressable_mut();
    put(buf, plan.flag_slot(), mode.flag_bit());
    for (slot, bit) in plan
        .type_slots()
        .zip(bits::msb_first(payload.file_type_code().into(), 8))
    {
        put(buf, slot, bit);
    }
    for (slot, bit) in plan
        .size_slots()
        .zip(bits::msb_first(payload.declared_size().into(), 32))
    {
        put(buf, slot, bit);
    }
    let (m1, m2) = split_halves(ciphertext);
    for (i, bit) in bits::byte_bits(m1).enumerate() {
        put(buf, plan.m1_slot(i), bit);
    }
    for (j, bit) in bits::byte_bits(m2).enumerate() {
        put(buf, plan.m2_slot(j), bit);
    }
    Ok(())
}

/// Decodes the mode flag, file-type code and declared size.
pub fn inspect(carrier: &AudioCarrier) -> Result<Inspection, StegoError> {
    let header = carrier.header_len();
    let available = carrier.body_end();
    let buf = carrier.addressable();
    if available <= header {
        return Err(StegoError::CarrierTooSmall {
            mode: StegoMode::Excessive,
            required: header + StegoMode::Excessive.reserved_bytes(),
            available,
        });
    }
    let mode = StegoMode::from_flag_bit(read_bit(buf[header], Plane::Lsb));
    let required = header + mode.reserved_bytes();
    if available < required {
        return Err(StegoError::CarrierTooSmall {
            mode,
            required,
            available,
        });
    }
    let plan = EmbedPlan::new(mode, header, 0);
    Ok(Inspection {
        mode,
        file_type_code: read_field(buf, plan.type_slots()) as u8,
        declared_size: read_field(buf, plan.size_slots()) as u32,
    })
}

/// Resolves the plan for the message a carrier claims to hold.
fn plausible_plan(
    carrier: &AudioCarrier,
    allow_empty: bool,
) -> Result<(Inspection, EmbedPlan), StegoError> {
    let info = inspect(carrier)?;
    let m = info.declared_size as usize;
    let plan = EmbedPlan::new(info.mode, carrier.header_len(), m);
    if (m == 0 && !allow_empty) || plan.required_size > carrier.body_end() {
        return Err(StegoError::SizeImplausible {
            mode: info.mode,
            declared: info.declared_size,
            capacity: capacity(carrier, info.mode),
        });
    }
    Ok((info, plan))
}

/// Reads the embedded ciphertext without decrypting it.
pub fn extract_sealed(carrier: &AudioCarrier) -> Result<SealedPayload, StegoError> {
    let (info, plan) = plausible_plan(carrier, false)?;
    let buf = carrier.addressable();
    let m1 = bits::pack_bytes((0..8 * plan.m1_len).map(|i| get(buf, plan.m1_slot(i))));
    let m2 = bits::pack_bytes((0..8 * plan.m2_len).map(|j| get(buf, plan.m2_slot(j))));
    let mut ciphertext = m1;
    ciphertext.extend_from_slice(&m2);
    Ok(SealedPayload::from_parts(ciphertext, info.file_type_code)?)
}

pub fn extract(carrier: &AudioCarrier, passphrase: &str) -> Result<Extracted, StegoError> {
    extract_with_registry(carrier, passphrase, &FileTypeRegistry::default())
}

pub fn extract_with_registry(
    carrier: &AudioCarrier,
    passphrase: &str,
    registry: &FileTypeRegistry,
) -> Result<Extracted, StegoError> {
    let sealed = extract_sealed(carrier)?;
    let plaintext = cipher::unseal(&sealed, passphrase)?;
    Ok(Extracted {
        plaintext,
        file_type_code: sealed.file_type_code(),
        extension: registry
            .extension_for_code(sealed.file_type_code())
            .to_owned(),
    })
}

/// Removes a message from a copy of `carrier`.
///
/// Clears the LSB plane of the size field and of the payload span, then sets
/// the flag to 0. Second-plane bits and the file-type field are left as they
/// are. The passphrase is accepted for interface parity only: counter mode
/// cannot verify it.
pub fn delete(carrier: &AudioCarrier, _passphrase: &str) -> Result<AudioCarrier, StegoError> {
    let mut out = carrier.clone();
    delete_in_place(&mut out)?;
    Ok(out)
}

pub fn delete_in_place(carrier: &mut AudioCarrier) -> Result<(), StegoError> {
    let (_, plan) = plausible_plan(carrier, true)?;
    let end = carrier.body_end();
    let buf = carrier.addressable_mut();
    let clear = |buf: &mut [u8], range: std::ops::Range<usize>| {
        for b in &mut buf[range.start.min(end)..range.end.min(end)] {
            *b = write_bit(*b, Plane::Lsb, 0);
        }
    };
    clear(buf, plan.size_field.clone());
    clear(buf, plan.payload_range());
    put(buf, plan.flag_slot(), 0);
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cipher::seal;
    use crate::container::parse_carrier;

    fn raw(len: usize, fill: u8) -> AudioCarrier {
        parse_carrier(vec![fill; len], Some(0)).unwrap()
    }

    fn ct(bytes: &[u8], code: u8) -> SealedPayload {
        SealedPayload::from_parts(bytes.to_vec(), code).unwrap()
    }

    fn lsb(c: &AudioCarrier, off: usize) -> u8 {
        read_bit(c.bytes()[off], Plane::Lsb)
    }

    fn second(c: &AudioCarrier, off: usize) -> u8 {
        read_bit(c.bytes()[off], Plane::Second)
    }

    #[test]
    fn regular_single_byte_layout() {
        let carrier = raw(64, 0x00);
        let out = embed(&carrier, &ct(&[0xA5], 0x00), StegoMode::Regular).unwrap();
        assert_eq!(lsb(&out, 0), 1);
        for off in 9..40 {
            assert_eq!(lsb(&out, off), 0, "size bit at {off}");
        }
        assert_eq!(lsb(&out, 40), 1);
        let payload: Vec<u8> = (0..8).map(|i| lsb(&out, 41 + 2 * i)).collect();
        assert_eq!(payload, vec![1, 0, 1, 0, 0, 1, 0, 1]);
        // Odd offsets in the payload and everything past 56 stay clean.
        for off in (42..64).step_by(2) {
            assert_eq!(out.bytes()[off], 0);
        }
    }

    #[test]
    fn excessive_single_byte_layout() {
        let carrier = raw(40, 0xFF);
        let out = embed(&carrier, &ct(&[0xA5], 0x00), StegoMode::Excessive).unwrap();
        assert_eq!(lsb(&out, 0), 0);
        for off in 5..=20 {
            assert_eq!(lsb(&out, off), 0);
            assert_eq!(second(&out, off), u8::from(off == 20));
        }
        let payload: Vec<u8> = (21..29).map(|o| lsb(&out, o)).collect();
        assert_eq!(payload, vec![1, 0, 1, 0, 0, 1, 0, 1]);
        // m2 is empty: plane 1 of the payload bytes is untouched.
        for off in 21..29 {
            assert_eq!(second(&out, off), 1);
        }
    }

    #[test]
    fn type_code_layout() {
        let carrier = raw(80, 0x00);
        let out = embed(&carrier, &ct(&[1, 2], 0b1100_0101), StegoMode::Excessive).unwrap();
        let lsbs: Vec<u8> = (1..5).map(|o| lsb(&out, o)).collect();
        let seconds: Vec<u8> = (1..5).map(|o| second(&out, o)).collect();
        assert_eq!(lsbs, vec![1, 1, 0, 0]);
        assert_eq!(seconds, vec![0, 1, 0, 1]);

        let out = embed(&carrier, &ct(&[1, 2], 0b1100_0101), StegoMode::Regular).unwrap();
        let lsbs: Vec<u8> = (1..9).map(|o| lsb(&out, o)).collect();
        assert_eq!(lsbs, vec![1, 1, 0, 0, 0, 1, 0, 1]);
    }

    #[test]
    fn inspect_inverts_embed() {
        let out = embed(&raw(64, 0x00), &ct(&[0xA5], 0x04), StegoMode::Regular).unwrap();
        assert_eq!(
            inspect(&out).unwrap(),
            Inspection {
                mode: StegoMode::Regular,
                file_type_code: 0x04,
                declared_size: 1
            }
        );
        let out = embed(&raw(40, 0xFF), &ct(&[0xA5], 0x07), StegoMode::Excessive).unwrap();
        assert_eq!(
            inspect(&out).unwrap(),
            Inspection {
                mode: StegoMode::Excessive,
                file_type_code: 0x07,
                declared_size: 1
            }
        );
    }

    #[test]
    fn inspect_size_guards() {
        // Flag 0 with exactly the Excessive metadata block is fine.
        assert!(inspect(&raw(21, 0x00)).is_ok());
        // Flag 1 needs the larger Regular block.
        assert!(matches!(
            inspect(&raw(21, 0x01)),
            Err(StegoError::CarrierTooSmall {
                mode: StegoMode::Regular,
                required: 41,
                ..
            })
        ));
        assert!(matches!(
            inspect(&raw(20, 0x00)),
            Err(StegoError::CarrierTooSmall { .. })
        ));
    }

    #[test]
    fn capacity_exceeded_reports_both_sizes() {
        let carrier = raw(56, 0);
        assert_eq!(
            embed(&carrier, &ct(&[1], 0), StegoMode::Regular),
            Err(StegoError::CapacityExceeded {
                mode: StegoMode::Regular,
                required: 57,
                available: 56
            })
        );
        assert!(embed(&raw(57, 0), &ct(&[1], 0), StegoMode::Regular).is_ok());
    }

    #[test]
    fn round_trip_both_modes() {
        for mode in StegoMode::ALL {
            for len in [1usize, 2, 3, 10, 11] {
                let msg: Vec<u8> = (0..len as u8).map(|b| b.wrapping_mul(37)).collect();
                let carrier = raw(mode.required_size(0, len) + 5, 0x5A);
                let out = embed(&carrier, &seal(&msg, 0x01, "pw").unwrap(), mode).unwrap();
                let got = extract(&out, "pw").unwrap();
                assert_eq!(got.plaintext, msg);
                assert_eq!(got.extension, "txt");
            }
        }
    }

    #[test]
    fn implausible_size_is_rejected() {
        // All-ones carrier: flag 1, size 0xFFFFFFFF.
        assert!(matches!(
            extract(&raw(100, 0xFF), "pw"),
            Err(StegoError::SizeImplausible {
                declared: u32::MAX,
                ..
            })
        ));
        // Size 0 is not a message.
        assert!(matches!(
            extract(&raw(100, 0x00), "pw"),
            Err(StegoError::SizeImplausible { declared: 0, .. })
        ));
    }

    #[test]
    fn delete_regular_clears_lsbs() {
        let carrier = raw(120, 0xFF);
        let stego = embed(&carrier, &ct(&[0x12, 0x34], 0x03), StegoMode::Regular).unwrap();
        let cleaned = delete(&stego, "ignored").unwrap();
        assert_eq!(lsb(&cleaned, 0), 0);
        for off in (9..41).chain(41..57) {
            assert_eq!(lsb(&cleaned, off), 0, "offset {off}");
        }
        for off in 0..120 {
            assert_eq!(second(&cleaned, off), second(&stego, off));
        }
        // Type field and bytes beyond the span keep their post-embed state.
        assert_eq!(&cleaned.bytes()[1..9], &stego.bytes()[1..9]);
        assert_eq!(&cleaned.bytes()[57..], &stego.bytes()[57..]);
    }

    #[test]
    fn delete_excessive_clears_only_lsbs() {
        let carrier = raw(40, 0xFF);
        let stego = embed(&carrier, &ct(&[0xA5], 0x00), StegoMode::Excessive).unwrap();
        let cleaned = delete(&stego, "k").unwrap();
        for off in (5..=20).chain(21..29) {
            assert_eq!(lsb(&cleaned, off), 0);
        }
        for off in 0..40 {
            assert_eq!(second(&cleaned, off), second(&stego, off));
        }
        assert_eq!(lsb(&cleaned, 0), 0);
    }

    #[test]
    fn delete_twice_is_idempotent_on_zero_size() {
        let carrier = raw(60, 0x00);
        let stego = embed(&carrier, &ct(&[0xA5], 0x00), StegoMode::Regular).unwrap();
        let once = delete(&stego, "k").unwrap();
        // The second pass reads the Excessive layout from the cleared block.
        let seen = inspect(&once).unwrap();
        assert_eq!((seen.mode, seen.declared_size), (StegoMode::Excessive, 0));
        let twice = delete(&once, "k").unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn excessive_delete_leaves_plane1_size_bits() {
        let stego = embed(&raw(60, 0x00), &ct(&[0xA5], 0x00), StegoMode::Excessive).unwrap();
        let once = delete(&stego, "k").unwrap();
        assert_eq!(inspect(&once).unwrap().declared_size, 1);
        assert_eq!(delete(&once, "k").unwrap(), once);
    }

    #[test]
    fn header_is_never_written() {
        let mut bytes = vec![0xFFu8; 200];
        bytes[..10].copy_from_slice(&[0xAB; 10]);
        let carrier = parse_carrier(bytes, Some(10)).unwrap();
        let stego = embed(&carrier, &ct(&[0; 7], 0), StegoMode::Regular).unwrap();
        let cleaned = delete(&stego, "k").unwrap();
        assert_eq!(&stego.bytes()[..10], &[0xAB; 10]);
        assert_eq!(&cleaned.bytes()[..10], &[0xAB; 10]);
        assert_eq!(stego.bytes()[10] & 1, 1);
    }

    #[test]
    fn suggestion_prefers_regular() {
        let carrier = raw(41 + 16, 0);
        assert_eq!(suggest_mode(&carrier, 2), Some(StegoMode::Regular));
        assert_eq!(suggest_mode(&carrier, 3), Some(StegoMode::Excessive));
        assert_eq!(suggest_mode(&carrier, 100), None);
    }
}
