//! One-byte file-type codes stored alongside the payload.

use std::collections::BTreeMap;

use thiserror::Error;

/// Extension used for unregistered codes.
pub const UNKNOWN_EXTENSION: &str = "bin";
pub const UNKNOWN_CODE: u8 = 0x00;

const DEFAULT_TYPES: [(u8, &str); 8] = [
    (0x00, "bin"),
    (0x01, "txt"),
    (0x02, "wav"),
    (0x03, "mp3"),
    (0x04, "png"),
    (0x05, "jpg"),
    (0x06, "pdf"),
    (0x07, "zip"),
];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("file-type code {0:#04x} is already registered")]
    DuplicateCode(u8),
    #[error("extension {0:?} is already registered")]
    DuplicateExtension(String),
    #[error("invalid extension {0:?}")]
    InvalidExtension(String),
    #[error("line {line}: {reason}")]
    Config { line: usize, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileTypeCode {
    pub code: u8,
    pub extension: String,
}

/// Bijective mapping between codes and lower-case extensions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileTypeRegistry {
    by_code: BTreeMap<u8, String>,
    by_ext: BTreeMap<String, u8>,
}

impl Default for FileTypeRegistry {
    fn default() -> Self {
        let mut reg = Self::empty();
        for (code, ext) in DEFAULT_TYPES {
            reg.register(code, ext)
                .expect("default table is a bijection");
        }
        reg
    }
}

impl FileTypeRegistry {
    pub fn empty() -> Self {
        Self {
            by_code: BTreeMap::new(),
            by_ext: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, code: u8, extension: &str) -> Result<(), RegistryError> {
        let ext = normalize(extension)?;
        if self.by_code.contains_key(&code) {
            return Err(RegistryError::DuplicateCode(code));
        }
        if self.by_ext.contains_key(&ext) {
            return Err(RegistryError::DuplicateExtension(ext));
        }
        self.by_code.insert(code, ext.clone());
        self.by_ext.insert(ext, code);
        Ok(())
    }

    /// Adds entries from `code extension` lines on top of the current table.
    /// Codes may be decimal or `0x`-prefixed hex; `#` starts a comment.
    pub fn extend_from_config(&mut self, text: &str) -> Result<(), RegistryError> {
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let config_err = |reason: String| RegistryError::Config {
                line: idx + 1,
                reason,
            };
            let mut parts = line
                .split(|c: char| c.is_whitespace() || c == '=')
                .filter(|s| !s.is_empty());
            let (Some(code), Some(ext), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(config_err(format!(
                    "expected `code extension`, got {line:?}"
                )));
            };
            let code = parse_code(code).ok_or_else(|| config_err(format!("bad code {code:?}")))?;
            self.register(code, ext)
                .map_err(|e| config_err(e.to_string()))?;
        }
        Ok(())
    }

    pub fn code_for_extension(&self, extension: &str) -> u8 {
        self.by_ext
            .get(&extension.to_ascii_lowercase())
            .copied()
            .unwrap_or(UNKNOWN_CODE)
    }

    pub fn extension_for_code(&self, code: u8) -> &str {
        self.by_code
            .get(&code)
            .map(String::as_str)
            .unwrap_or(UNKNOWN_EXTENSION)
    }

    pub fn lookup(&self, code: u8) -> FileTypeCode {
        FileTypeCode {
            code,
            extension: self.extension_for_code(code).to_owned(),
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (u8, &str)> {
        self.by_code.iter().map(|(c, e)| (*c, e.as_str()))
    }
}

fn normalize(extension: &str) -> Result<String, RegistryError> {
    let ext = extension.trim_start_matches('.').to_ascii_lowercase();
    if ext.is_empty() || !ext.chars().all(|c| c.is_ascii_alphanumeric()) {
        return Err(RegistryError::InvalidExtension(extension.to_owned()));
    }
    Ok(ext)
}

fn parse_code(s: &str) -> Option<u8> {
    match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
        Some(hex) => u8::from_str_radix(hex, 16).ok(),
        None => s.parse().ok(),
    }
}
