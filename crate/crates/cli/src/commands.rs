use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use stegostream_core::quality::{self, frame_len_for};
use stegostream_core::stego::{self, capacity, suggest_mode};
use stegostream_core::{
    cipher, parse_carrier, transfer, AudioCarrier, CipherError, ContainerError, ContainerKind,
    FileTypeRegistry, QualityError, Receiver, StegoError, StegoMode, TransferError,
};

use crate::args::{
    CarrierOpts, Command, CompareArgs, DeleteArgs, EmbedArgs, ExtractArgs, InspectArgs, KeyOpts,
    RecvArgs, SendArgs, SnrArgs, TypeOpts,
};
use crate::report::Report;

/// An error paired with the process exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub error: anyhow::Error,
}

impl Failure {
    pub const USAGE: u8 = 1;
    pub const CAPACITY: u8 = 2;
    pub const FORMAT: u8 = 3;
    pub const NETWORK: u8 = 4;
    pub const NO_MESSAGE: u8 = 5;

    fn new(code: u8, error: impl Into<anyhow::Error>) -> Self {
        Self {
            code,
            error: error.into(),
        }
    }

    fn usage(error: impl Into<anyhow::Error>) -> Self {
        Self::new(Self::USAGE, error)
    }
}

impl From<ContainerError> for Failure {
    fn from(e: ContainerError) -> Self {
        Self::new(Self::FORMAT, e)
    }
}

impl From<CipherError> for Failure {
    fn from(e: CipherError) -> Self {
        let code = match e {
            CipherError::MessageTooLarge(_) => Self::CAPACITY,
            CipherError::EmptyPassphrase | CipherError::EmptyMessage => Self::USAGE,
        };
        Self::new(code, e)
    }
}

impl From<StegoError> for Failure {
    fn from(e: StegoError) -> Self {
        match e {
            StegoError::CapacityExceeded { .. } => Self::new(Self::CAPACITY, e),
            StegoError::SizeImplausible { .. } | StegoError::CarrierTooSmall { .. } => {
                Self::new(Self::NO_MESSAGE, anyhow!("no valid message found ({e})"))
            }
            StegoError::Cipher(c) => c.into(),
        }
    }
}

impl From<TransferError> for Failure {
    fn from(e: TransferError) -> Self {
        Self::new(Self::NETWORK, e)
    }
}

impl From<QualityError> for Failure {
    fn from(e: QualityError) -> Self {
        Self::new(Self::FORMAT, e)
    }
}

type CmdResult = Result<(), Failure>;

pub fn run(command: Command) -> CmdResult {
    match command {
        Command::Embed(a) => embed(a),
        Command::Extract(a) => extract(a),
        Command::Delete(a) => delete(a),
        Command::Inspect(a) => inspect(a),
        Command::Capacity(a) => capacity_cmd(a),
        Command::Snr(a) => snr(a),
        Command::Compare(a) => compare(a),
        Command::Send(a) => send(a),
        Command::Recv(a) => recv(a),
    }
}

fn read_file(path: &Path) -> Result<Vec<u8>, Failure> {
    fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::usage)
}

fn write_file(path: &Path, bytes: &[u8]) -> CmdResult {
    fs::write(path, bytes)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::usage)
}

fn load_carrier(path: &Path, opts: &CarrierOpts) -> Result<AudioCarrier, Failure> {
    let bytes = read_file(path)?;
    parse_carrier(bytes, opts.header_size)
        .with_context(|| format!("parsing carrier {}", path.display()))
        .map_err(|e| Failure::new(Failure::FORMAT, e))
}

fn passphrase(opts: &KeyOpts) -> Result<String, Failure> {
    let key = match &opts.key_env {
        Some(var) => std::env::var(var)
            .with_context(|| format!("environment variable {var} is not set"))
            .map_err(Failure::usage)?,
        None => rpassword::prompt_password("passphrase: ")
            .context("reading passphrase")
            .map_err(Failure::usage)?,
    };
    if key.is_empty() {
        return Err(CipherError::EmptyPassphrase.into());
    }
    Ok(key)
}

fn registry(opts: &TypeOpts) -> Result<FileTypeRegistry, Failure> {
    let mut reg = FileTypeRegistry::default();
    if let Some(path) = &opts.type_map {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))
            .map_err(Failure::usage)?;
        reg.extend_from_config(&text)
            .with_context(|| format!("in {}", path.display()))
            .map_err(Failure::usage)?;
    }
    Ok(reg)
}

fn capacity_report(carrier: &AudioCarrier) -> Report {
    let mut r = Report::new();
    r.field("header_len", carrier.header_len())
        .field("carrier_len", carrier.body_end())
        .field("regular_capacity", capacity(carrier, StegoMode::Regular))
        .field(
            "excessive_capacity",
            capacity(carrier, StegoMode::Excessive),
        );
    r
}

fn embed(a: EmbedArgs) -> CmdResult {
    let carrier = load_carrier(&a.carrier, &a.carrier_opts)?;
    let message = read_file(&a.message)?;
    let reg = registry(&a.types)?;
    let ext = a.message.extension().and_then(|e| e.to_str()).unwrap_or("");
    let type_code = reg.code_for_extension(ext);

    let mode = match a.mode.or_else(|| suggest_mode(&carrier, message.len())) {
        Some(mode) => mode,
        None => {
            return Err(Failure::new(
                Failure::CAPACITY,
                anyhow!(
                    "carrier size is not enough for a {}-byte message (regular capacity {}, excessive capacity {})",
                    message.len(),
                    capacity(&carrier, StegoMode::Regular),
                    capacity(&carrier, StegoMode::Excessive),
                ),
            ))
        }
    };

    let key = passphrase(&a.key)?;
    let sealed = cipher::seal(&message, type_code, &key)?;
    let out = stego::embed(&carrier, &sealed, mode).map_err(|e| match e {
        StegoError::CapacityExceeded { .. } => Failure::new(
            Failure::CAPACITY,
            anyhow!(
                "{e} (regular capacity {}, excessive capacity {})",
                capacity(&carrier, StegoMode::Regular),
                capacity(&carrier, StegoMode::Excessive)
            ),
        ),
        other => other.into(),
    })?;
    write_file(&a.out, &out.serialize())?;

    let mut r = Report::new();
    r.field("mode", mode)
        .field("message_bytes", message.len())
        .field("file_type_code", format!("{type_code:#04x}"))
        .field("capacity", capacity(&carrier, mode))
        .field("output", a.out.display());
    r.print(false);
    Ok(())
}

fn extract(a: ExtractArgs) -> CmdResult {
    let carrier = load_carrier(&a.carrier, &a.carrier_opts)?;
    let reg = registry(&a.types)?;
    // Fail on an absent message before asking for a key.
    stego::extract_sealed(&carrier)?;
    let key = passphrase(&a.key)?;
    let found = stego::extract_with_registry(&carrier, &key, &reg)?;

    let stem = match a.stem {
        Some(s) => s,
        None => a
            .carrier
            .file_stem()
            .and_then(|s| s.to_str())
            .unwrap_or("extracted")
            .to_owned(),
    };
    if stem.is_empty() || stem.contains(['/', '\\']) {
        return Err(Failure::usage(anyhow!("invalid output stem {stem:?}")));
    }
    fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))
        .map_err(Failure::usage)?;
    let path: PathBuf = a.out_dir.join(format!("{stem}.{}", found.extension));
    write_file(&path, &found.plaintext)?;

    let mut r = Report::new();
    r.field("message_bytes", found.plaintext.len())
        .field("file_type_code", format!("{:#04x}", found.file_type_code))
        .field("output", path.display());
    r.print(false);
    Ok(())
}

fn delete(a: DeleteArgs) -> CmdResult {
    let carrier = load_carrier(&a.carrier, &a.carrier_opts)?;
    let info = stego::inspect(&carrier)?;
    // Accepted for parity with extract; counter mode cannot verify it.
    let key = passphrase(&a.key)?;
    let cleaned = stego::delete(&carrier, &key)?;
    write_file(&a.out, &cleaned.serialize())?;

    let mut r = Report::new();
    r.field("mode", info.mode)
        .field("cleared_bytes", info.declared_size)
        .field("output", a.out.display());
    r.print(false);
    Ok(())
}

fn inspect(a: InspectArgs) -> CmdResult {
    let carrier = load_carrier(&a.carrier, &a.carrier_opts)?;
    let info = stego::inspect(&carrier)?;
    let reg = FileTypeRegistry::default();
    let required = info
        .mode
        .required_size(carrier.header_len(), info.declared_size as usize);
    let mut r = Report::new();
    r.field("format", format_name(carrier.format().kind))
        .field("header_len", carrier.header_len())
        .field("mode", info.mode)
        .field("file_type_code", format!("{:#04x}", info.file_type_code))
        .field("extension", reg.extension_for_code(info.file_type_code))
        .field("declared_size", info.declared_size)
        .field(
            "plausible",
            info.declared_size > 0 && required <= carrier.body_end(),
        );
    r.print(a.kv);
    Ok(())
}

fn capacity_cmd(a: InspectArgs) -> CmdResult {
    let carrier = load_carrier(&a.carrier, &a.carrier_opts)?;
    capacity_report(&carrier).print(a.kv);
    Ok(())
}

fn format_name(kind: ContainerKind) -> &'static str {
    match kind {
        ContainerKind::WavPcm => "wav",
        ContainerKind::Raw => "raw",
    }
}

fn load_pcm16(path: &Path) -> Result<(AudioCarrier, Vec<i16>), Failure> {
    let carrier = load_carrier(path, &CarrierOpts { header_size: None })?;
    let samples = carrier.samples_16()?;
    Ok((carrier, samples))
}

fn snr(a: SnrArgs) -> CmdResult {
    let (original, clean) = load_pcm16(&a.original)?;
    let (_, marked) = load_pcm16(&a.stego)?;
    let frame_len = frame_len_for(original.format().sample_rate, a.frame_ms);
    let snr = quality::segmental_snr(&clean, &marked, frame_len)?;
    let mut r = Report::new();
    r.field("seg_snr_db", format!("{:.6}", snr.db))
        .field("frames_used", snr.frames_used)
        .field("frame_len", frame_len);
    r.print(a.kv);
    Ok(())
}

fn compare(a: CompareArgs) -> CmdResult {
    let left = read_file(&a.a)?;
    let right = read_file(&a.b)?;
    let mut r = Report::new();
    r.field("size_a", left.len())
        .field("size_b", right.len())
        .field("identical", left == right);
    if let Ok(diff) = quality::bitplane_diff(&left, &right) {
        r.field("modified_bytes_plane0", diff.plane0)
            .field("modified_bytes_plane1", diff.plane1)
            .field("modified_bytes_other", diff.other);
    }

    let wavs = (parse_carrier(left, None), parse_carrier(right, None));
    if let (Ok(wa), Ok(wb)) = &wavs {
        if let (Some(da), Some(db)) = (wa.format().duration_secs(), wb.format().duration_secs()) {
            r.field("duration_a_s", format!("{da:.6}"))
                .field("duration_b_s", format!("{db:.6}"));
        }
        if let (Ok(sa), Ok(sb)) = (wa.samples_16(), wb.samples_16()) {
            if let Ok(xc) = quality::waveform_compare(&sa, &sb, a.max_lag) {
                r.field("xcorr_peak", format!("{:.9}", xc.peak))
                    .field("xcorr_lag", xc.lag);
            }
            let frame_len = frame_len_for(wa.format().sample_rate, a.frame_ms);
            if let Ok(snr) = quality::segmental_snr(&sa, &sb, frame_len) {
                r.field("seg_snr_db", format!("{:.6}", snr.db))
                    .field("frames_used", snr.frames_used);
            }
        }
    }
    r.print(a.kv);
    Ok(())
}

fn send(a: SendArgs) -> CmdResult {
    let summary = transfer::send_file(&a.host, a.port, &a.file)?;
    let mut r = Report::new();
    r.field("sent", summary.name)
        .field("bytes", summary.bytes_sent);
    r.print(false);
    Ok(())
}

fn recv(a: RecvArgs) -> CmdResult {
    let receiver = Receiver::bind(a.port, &a.out)?;
    let addr = receiver
        .local_addr()
        .map_err(|e| Failure::new(Failure::NETWORK, e))?;
    log::info!("listening on {addr}, writing to {}", a.out.display());
    receiver.run()?;
    Ok(())
}
