//! Audio steganography with two hiding tiers.
//!
//! A message is sealed with AES-256 in counter mode (so its length is kept),
//! then written into the low bit planes of an audio carrier's body:
//!
//! * **Regular** mode writes one bit per carrier byte in the LSB plane and
//!   interleaves the two halves of the ciphertext on alternate bytes.
//! * **Excessive** mode writes two bits per carrier byte, one in the LSB plane
//!   and one in the second plane, doubling capacity at the cost of more
//!   distortion.
//!
//! ```
//! use stegostream_core::{cipher, container, stego, StegoMode};
//!
//! let samples: Vec<i16> = (0..4000).map(|i| ((i * 37) % 2000 - 1000) as i16).collect();
//! let wav = container::build_wav_16(8000, 1, &samples);
//! let carrier = container::parse_carrier(wav, None)?;
//!
//! let sealed = cipher::seal(b"meet at noon", 0x01, "hunter2")?;
//! let stego_file = stego::embed(&carrier, &sealed, StegoMode::Regular)?;
//! let found = stego::extract(&stego_file, "hunter2")?;
//! assert_eq!(found.plaintext, b"meet at noon");
//! assert_eq!(found.extension, "txt");
//! # Ok::<(), Box<dyn std::error::Error>>(())
//! ```

pub mod cipher;
pub mod container;
pub mod quality;
pub mod stego;
pub mod transfer;

pub use cipher::{seal, unseal, CipherError, SealedPayload};
pub use container::{parse_carrier, AudioCarrier, ContainerError, ContainerKind, FormatInfo};
pub use quality::{QualityError, QualityReport};
pub use stego::{EmbedPlan, FileTypeRegistry, Inspection, Plane, StegoError, StegoMode};
pub use transfer::{Receiver, ReceiverHandle, TransferError, TransferFrame, TransferSummary};
