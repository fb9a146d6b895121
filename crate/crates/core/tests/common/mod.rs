//! Test-only reference layout and fixtures, written independently of the
//! crate's plan generator.

#![allow(dead_code)]

use rand::{Rng, RngCore};
use stegostream_core::{container, parse_carrier, AudioCarrier, StegoMode};

/// One explicit write: (byte offset, plane 0/1, bit value).
pub type Write = (usize, u32, u8);

fn bits_msb(bytes: &[u8]) -> Vec<u8> {
    bytes
        .iter()
        .flat_map(|&b| (0..8).rev().map(move |k| (b >> k) & 1))
        .collect()
}

/// Every bit the embedder is expected to place, spelled out per mode.
pub fn reference_writes(mode: StegoMode, h: usize, type_code: u8, ciphertext: &[u8]) -> Vec<Write> {
    let m = ciphertext.len();
    let size = (m as u32).to_be_bytes();
    let type_bits = bits_msb(&[type_code]);
    let size_bits = bits_msb(&size);
    let half = m.div_ceil(2);
    let m1_bits = bits_msb(&ciphertext[..half]);
    let m2_bits = bits_msb(&ciphertext[half..]);
    let mut w = Vec::new();
    match mode {
        StegoMode::Regular => {
            w.push((h, 0, 1));
            for (k, &b) in type_bits.iter().enumerate() {
                w.push((h + 1 + k, 0, b));
            }
            for (k, &b) in size_bits.iter().enumerate() {
                w.push((h + 9 + k, 0, b));
            }
            for (i, &b) in m1_bits.iter().enumerate() {
                w.push((h + 41 + 2 * i, 0, b));
            }
            for (j, &b) in m2_bits.iter().enumerate() {
                w.push((h + 42 + 2 * j, 0, b));
            }
        }
        StegoMode::Excessive => {
            w.push((h, 0, 0));
            for k in 0..4 {
                w.push((h + 1 + k, 0, type_bits[k]));
                w.push((h + 1 + k, 1, type_bits[k + 4]));
            }
            for k in 0..16 {
                w.push((h + 5 + k, 0, size_bits[k]));
                w.push((h + 5 + k, 1, size_bits[k + 16]));
            }
            for (i, &b) in m1_bits.iter().enumerate() {
                w.push((h + 21 + i, 0, b));
            }
            for (j, &b) in m2_bits.iter().enumerate() {
                w.push((h + 21 + j, 1, b));
            }
        }
    }
    w
}

pub fn apply_writes(bytes: &mut [u8], writes: &[Write]) {
    for &(off, plane, bit) in writes {
        let mask = 1u8 << plane;
        bytes[off] = if bit == 1 {
            bytes[off] | mask
        } else {
            bytes[off] & !mask
        };
    }
}

/// Carrier size needed by the reference layout, derived from its writes:
/// last written offset + 1, with odd Regular payloads padded to the pair.
pub fn reference_required(mode: StegoMode, h: usize, m: usize) -> usize {
    match mode {
        StegoMode::Regular if m % 2 == 1 => h + 8 * m + 49,
        StegoMode::Regular => h + 41 + 8 * m,
        StegoMode::Excessive => h + 21 + 8 * m.div_ceil(2),
    }
}

pub fn random_bytes(rng: &mut impl RngCore, len: usize) -> Vec<u8> {
    let mut v = vec![0u8; len];
    rng.fill_bytes(&mut v);
    v
}

pub fn raw_carrier(bytes: Vec<u8>, h: usize) -> AudioCarrier {
    parse_carrier(bytes, Some(h)).expect("raw carrier")
}

/// A 16-bit mono WAV carrying a sum of two tones plus a little noise.
pub fn tone_wav(rng: &mut impl Rng, samples: usize, sample_rate: u32) -> Vec<u8> {
    let pcm: Vec<i16> = (0..samples)
        .map(|i| {
            let t = i as f64 / f64::from(sample_rate);
            let v = 9000.0 * (2.0 * std::f64::consts::PI * 440.0 * t).sin()
                + 3000.0 * (2.0 * std::f64::consts::PI * 1320.0 * t).sin()
                + rng.random_range(-200.0..200.0);
            v as i16
        })
        .collect();
    container::build_wav_16(sample_rate, 1, &pcm)
}

pub fn tone_carrier(rng: &mut impl Rng, samples: usize) -> AudioCarrier {
    parse_carrier(tone_wav(rng, samples, 44_100), None).expect("wav carrier")
}
