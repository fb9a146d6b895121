use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use stegostream_core::StegoMode;

#[derive(Debug, Parser)]
#[command(
    name = "stegostream",
    version,
    about = "Hide encrypted files inside audio carriers"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Encrypt a message file and hide it in a carrier.
    Embed(EmbedArgs),
    /// Recover a hidden message.
    Extract(ExtractArgs),
    /// Remove a hidden message from a carrier.
    Delete(DeleteArgs),
    /// Print the mode, file type and size a carrier declares.
    Inspect(InspectArgs),
    /// Print the largest message each mode can hold.
    Capacity(InspectArgs),
    /// Segmental SNR between an original and a stego WAV.
    Snr(SnrArgs),
    /// Compare two files: sizes, durations, bit-plane changes, correlation.
    Compare(CompareArgs),
    /// Send a file to a receiver.
    Send(SendArgs),
    /// Receive files until interrupted.
    Recv(RecvArgs),
}

#[derive(Debug, Args)]
pub struct CarrierOpts {
    /// Treat a non-WAV carrier as raw bytes with this many header bytes.
    #[arg(long = "header-size", value_name = "N")]
    pub header_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct KeyOpts {
    /// Read the passphrase from this environment variable instead of
    /// prompting.
    #[arg(long = "key-env", value_name = "VAR")]
    pub key_env: Option<String>,
}

#[derive(Debug, Args)]
pub struct TypeOpts {
    /// Extra file-type codes, one `code extension` pair per line.
    #[arg(long = "type-map", value_name = "FILE")]
    pub type_map: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[arg(long)]
    pub carrier: PathBuf,
    #[arg(long)]
    pub message: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Hiding mode; picked automatically when omitted.
    #[arg(long)]
    pub mode: Option<StegoMode>,
    #[command(flatten)]
    pub carrier_opts: CarrierOpts,
    #[command(flatten)]
    pub key: KeyOpts,
    #[command(flatten)]
    pub types: TypeOpts,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub carrier: PathBuf,
    #[arg(long = "out-dir", default_value = ".")]
    pub out_dir: PathBuf,
    /// File name stem for the recovered file; defaults to the carrier's stem.
    #[arg(long)]
    pub stem: Option<String>,
    #[command(flatten)]
    pub carrier_opts: CarrierOpts,
    #[command(flatten)]
    pub key: KeyOpts,
    #[command(flatten)]
    pub types: TypeOpts,
}

#[derive(Debug, Args)]
pub struct DeleteArgs {
    #[arg(long)]
    pub carrier: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub carrier_opts: CarrierOpts,
    #[command(flatten)]
    pub key: KeyOpts,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    pub carrier: PathBuf,
    #[command(flatten)]
    pub carrier_opts: CarrierOpts,
    /// Machine-readable key=value output.
    #[arg(long)]
    pub kv: bool,
}

#[derive(Debug, Args)]
pub struct SnrArgs {
    pub original: PathBuf,
    pub stego: PathBuf,
    /// Frame length in milliseconds.
    #[arg(long = "frame-ms", default_value_t = stegostream_core::quality::DEFAULT_FRAME_MS)]
    pub frame_ms: f64,
    #[arg(long)]
    pub kv: bool,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    pub a: PathBuf,
    pub b: PathBuf,
    /// Largest sample lag searched by the cross-correlation.
    #[arg(long = "max-lag", default_value_t = 64)]
    pub max_lag: usize,
    #[arg(long = "frame-ms", default_value_t = stegostream_core::quality::DEFAULT_FRAME_MS)]
    pub frame_ms: f64,
    #[arg(long)]
    pub kv: bool,
}

#[derive(Debug, Args)]
pub struct SendArgs {
    #[arg(long)]
    pub host: String,
    #[arg(long)]
    pub port: u16,
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct RecvArgs {
    #[arg(long)]
    pub port: u16,
    #[arg(long)]
    pub out: PathBuf,
}
