//! Size-preserving AES-256 sealing of the secret message.
//!
//! The key and counter-mode nonce are both derived from the passphrase, since
//! the carrier layout has no room to store a nonce. As a consequence two
//! messages sealed under the same passphrase share a keystream; anyone holding
//! both ciphertexts can XOR them. Counter mode is also unauthenticated: a wrong
//! passphrase decrypts to garbage rather than failing.

use aes::cipher::{BlockEncrypt, KeyInit};
use aes::Aes256;
use ctr::cipher::{KeyIvInit, StreamCipher};
use sha2::{Digest, Sha256};
use thiserror::Error;

type Aes256Ctr = ctr::Ctr64BE<Aes256>;

const KEY_DOMAIN: &[u8] = b"stegostream-key:";
const NONCE_DOMAIN: &[u8] = b"stegostream-nonce:";

/// Largest message that fits the 32-bit size field.
pub const MAX_MESSAGE_LEN: usize = u32::MAX as usize;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CipherError {
    #[error("passphrase is empty")]
    EmptyPassphrase,
    #[error("message is empty")]
    EmptyMessage,
    #[error("message of {0} bytes does not fit a 32-bit size field")]
    MessageTooLarge(usize),
}

#[derive(Clone, PartialEq, Eq)]
pub struct KeyMaterial {
    pub key: [u8; 32],
    pub nonce: [u8; 16],
}

impl std::fmt::Debug for KeyMaterial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("KeyMaterial").finish_non_exhaustive()
    }
}

/// Ciphertext ready for embedding, with its one-byte file-type code.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SealedPayload {
    ciphertext: Vec<u8>,
    file_type_code: u8,
}

impl SealedPayload {
    /// Wraps ciphertext recovered from a carrier.
    pub fn from_parts(ciphertext: Vec<u8>, file_type_code: u8) -> Result<Self, CipherError> {
        check_len(ciphertext.len())?;
        Ok(Self {
            ciphertext,
            file_type_code,
        })
    }

    pub fn ciphertext(&self) -> &[u8] {
        &self.ciphertext
    }

    pub fn file_type_code(&self) -> u8 {
        self.file_type_code
    }

    pub fn declared_size(&self) -> u32 {
        self.ciphertext.len() as u32
    }
}

pub fn derive_key_material(passphrase: &str) -> Result<KeyMaterial, CipherError> {
    if passphrase.is_empty() {
        return Err(CipherError::EmptyPassphrase);
    }
    let key: [u8; 32] = Sha256::new()
        .chain_update(KEY_DOMAIN)
        .chain_update(passphrase.as_bytes())
        .finalize()
        .into();
    let nonce_digest = Sha256::new()
        .chain_update(NONCE_DOMAIN)
        .chain_update(passphrase.as_bytes())
        .finalize();
    let mut nonce = [0u8; 16];
    nonce.copy_from_slice(&nonce_digest[..16]);
    Ok(KeyMaterial { key, nonce })
}

pub(crate) fn check_len(len: usize) -> Result<(), CipherError> {
    match len {
        0 => Err(CipherError::EmptyMessage),
        n if n > MAX_MESSAGE_LEN => Err(CipherError::MessageTooLarge(n)),
        _ => Ok(()),
    }
}

/// The raw AES-256 block transform underlying the keystream.
pub fn encrypt_block(key: &[u8; 32], block: &[u8; 16]) -> [u8; 16] {
    let cipher = Aes256::new(key.into());
    let mut b = aes::Block::from(*block);
    cipher.encrypt_block(&mut b);
    b.into()
}

fn apply_keystream(material: &KeyMaterial, buf: &mut [u8]) {
    let mut cipher = Aes256Ctr::new(&material.key.into(), &material.nonce.into());
    cipher.apply_keystream(buf);
}

pub fn seal(
    plaintext: &[u8],
    file_type_code: u8,
    passphrase: &str,
) -> Result<SealedPayload, CipherError> {
    check_len(plaintext.len())?;
    let material = derive_key_material(passphrase)?;
    let mut ciphertext = plaintext.to_vec();
    apply_keystream(&material, &mut ciphertext);
    Ok(SealedPayload {
        ciphertext,
        file_type_code,
    })
}

/// Decrypts a payload. A wrong passphrase yields unrelated bytes, not an error.
pub fn unseal(payload: &SealedPayload, passphrase: &str) -> Result<Vec<u8>, CipherError> {
    let material = derive_key_material(passphrase)?;
    let mut plaintext = payload.ciphertext.clone();
    apply_keystream(&material, &mut plaintext);
    Ok(plaintext)
}
