//! LAN transfer of stego files, one file per TCP connection.
//!
//! Wire format, all integers big-endian:
//!
//! ```text
//! "STG1" | name_len: u16 | name: UTF-8 | payload_len: u64 | payload | crc32(payload): u32
//! ```
//!
//! The receiver answers with one byte, [`ACK_OK`] or [`ACK_REJECTED`]. A frame
//! with the wrong magic is dropped without an answer.

use std::collections::HashSet;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::net::{Shutdown, SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::{Arc, Mutex};
use std::thread::{self, JoinHandle};
use std::time::Duration;

use thiserror::Error;

pub const MAGIC: [u8; 4] = *b"STG1";
pub const ACK_OK: u8 = 0x00;
pub const ACK_REJECTED: u8 = 0x01;
pub const MAX_NAME_LEN: usize = 255;

const IO_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Error)]
pub enum TransferError {
    #[error("could not connect to {addr}: {source}")]
    ConnectFailed { addr: String, source: io::Error },
    #[error("could not bind port {port}: {source}")]
    BindFailed { port: u16, source: io::Error },
    #[error("receiver rejected the transfer")]
    RemoteRejected,
    #[error("invalid file name {0:?}")]
    InvalidName(String),
    #[error("bad frame magic {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("checksum mismatch: frame says {expected:#010x}, payload hashes to {actual:#010x}")]
    ChecksumMismatch { expected: u32, actual: u32 },
    #[error("unexpected acknowledgment byte {0:#04x}")]
    BadAck(u8),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Checks a transfer file name: non-empty, at most 255 bytes, no path
/// separators, not `.` or `..`.
pub fn validate_name(name: &str) -> Result<(), TransferError> {
    let bad = name.is_empty()
        || name.len() > MAX_NAME_LEN
        || name == "."
        || name == ".."
        || name.contains(['/', '\\', '\0']);
    if bad {
        return Err(TransferError::InvalidName(name.to_owned()));
    }
    Ok(())
}

/// An in-memory frame.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferFrame {
    pub name: String,
    pub payload: Vec<u8>,
}

impl TransferFrame {
    pub fn new(name: impl Into<String>, payload: Vec<u8>) -> Result<Self, TransferError> {
        let name = name.into();
        validate_name(&name)?;
        Ok(Self { name, payload })
    }

    pub fn checksum(&self) -> u32 {
        crc32fast::hash(&self.payload)
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(4 + 2 + self.name.len() + 8 + self.payload.len() + 4);
        write_header(&mut out, &self.name, self.payload.len() as u64).expect("vec write");
        out.extend_from_slice(&self.payload);
        out.extend_from_slice(&self.checksum().to_be_bytes());
        out
    }

    /// Reads one frame, verifying magic, name and checksum.
    pub fn decode<R: Read>(reader: &mut R) -> Result<Self, TransferError> {
        let header = read_header(reader)?;
        validate_name(&header.name)?;
        let mut payload = Vec::new();
        let actual = copy_payload(reader, header.payload_len, &mut payload)?;
        let expected = read_u32(reader)?;
        if expected != actual {
            return Err(TransferError::ChecksumMismatch { expected, actual });
        }
        Ok(Self {
            name: header.name,
            payload,
        })
    }
}

struct FrameHeader {
    name: String,
    payload_len: u64,
}

fn write_header<W: Write>(w: &mut W, name: &str, payload_len: u64) -> io::Result<()> {
    w.write_all(&MAGIC)?;
    w.write_all(&(name.len() as u16).to_be_bytes())?;
    w.write_all(name.as_bytes())?;
    w.write_all(&payload_len.to_be_bytes())
}

fn read_u32<R: Read>(r: &mut R) -> io::Result<u32> {
    let mut buf = [0u8; 4];
    r.read_exact(&mut buf)?;
    Ok(u32::from_be_bytes(buf))
}

/// Reads magic, name and payload length. The name is returned unvalidated
/// (lossily decoded if it is not UTF-8) so the caller can still drain the
/// payload before rejecting.
fn read_header<R: Read>(r: &mut R) -> Result<FrameHeader, TransferError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if magic != MAGIC {
        return Err(TransferError::BadMagic(magic));
    }
    let mut len = [0u8; 2];
    r.read_exact(&mut len)?;
    let mut name = vec![0u8; u16::from_be_bytes(len) as usize];
    r.read_exact(&mut name)?;
    let mut payload_len = [0u8; 8];
    r.read_exact(&mut payload_len)?;
    let name = match String::from_utf8(name) {
        Ok(s) => s,
        // Replacement characters are fine: the name is rejected either way.
        Err(e) => format!("\0{}", String::from_utf8_lossy(e.as_bytes())),
    };
    Ok(FrameHeader {
        name,
        payload_len: u64::from_be_bytes(payload_len),
    })
}

/// Copies exactly `len` bytes into `sink`, returning their CRC-32.
fn copy_payload<R: Read, W: Write>(r: &mut R, len: u64, sink: &mut W) -> io::Result<u32> {
    let mut hasher = crc32fast::Hasher::new();
    let mut remaining = len;
    let mut buf = vec![0u8; 64 * 1024];
    while remaining > 0 {
        let want = remaining.min(buf.len() as u64) as usize;
        let n = r.read(&mut buf[..want])?;
        if n == 0 {
            return Err(io::ErrorKind::UnexpectedEof.into());
        }
        hasher.update(&buf[..n]);
        sink.write_all(&buf[..n])?;
        remaining -= n as u64;
    }
    Ok(hasher.finalize())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransferSummary {
    pub name: String,
    pub bytes_sent: u64,
}

fn connect(host: &str, port: u16) -> Result<TcpStream, TransferError> {
    let addr = format!("{host}:{port}");
    let stream = TcpStream::connect(&addr).map_err(|source| TransferError::ConnectFailed {
        addr: addr.clone(),
        source,
    })?;
    stream.set_read_timeout(Some(IO_TIMEOUT))?;
    stream.set_write_timeout(Some(IO_TIMEOUT))?;
    Ok(stream)
}

fn await_ack(stream: &mut TcpStream) -> Result<(), TransferError> {
    let mut ack = [0u8; 1];
    stream.read_exact(&mut ack)?;
    match ack[0] {
        ACK_OK => Ok(()),
        ACK_REJECTED => Err(TransferError::RemoteRejected),
        other => Err(TransferError::BadAck(other)),
    }
}

/// Streams one file to a receiver and waits for its acknowledgment. The
/// connection uses an ephemeral local port.
pub fn send_file(host: &str, port: u16, path: &Path) -> Result<TransferSummary, TransferError> {
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| TransferError::InvalidName(path.display().to_string()))?
        .to_owned();
    validate_name(&name)?;

    let file = File::open(path)?;
    let len = file.metadata()?.len();
    let mut stream = connect(host, port)?;
    {
        let mut w = BufWriter::new(&mut stream);
        write_header(&mut w, &name, len)?;
        let crc = copy_payload(&mut BufReader::new(file), len, &mut w)?;
        w.write_all(&crc.to_be_bytes())?;
        w.flush()?;
    }
    await_ack(&mut stream)?;
    Ok(TransferSummary {
        name,
        bytes_sent: len,
    })
}

/// Sends pre-encoded frame bytes verbatim and waits for the acknowledgment.
pub fn send_raw(host: &str, port: u16, frame: &[u8]) -> Result<(), TransferError> {
    let mut stream = connect(host, port)?;
    stream.write_all(frame)?;
    stream.flush()?;
    await_ack(&mut stream)
}

/// Output directory plus the set of names being written right now.
struct Store {
    dir: PathBuf,
    pending: Mutex<HashSet<String>>,
    next_tmp: AtomicU64,
}

impl Store {
    /// Picks `name`, or `stem-1.ext`, `stem-2.ext`, ... if taken on disk or
    /// by an in-flight transfer.
    fn reserve(&self, name: &str) -> String {
        let (stem, ext) = match name.rsplit_once('.') {
            Some((s, e)) if !s.is_empty() => (s, Some(e)),
            _ => (name, None),
        };
        let mut pending = self.pending.lock().unwrap_or_else(|e| e.into_inner());
        let mut n = 0u32;
        loop {
            let candidate = match (n, ext) {
                (0, _) => name.to_owned(),
                (n, Some(e)) => format!("{stem}-{n}.{e}"),
                (n, None) => format!("{stem}-{n}"),
            };
            if !pending.contains(&candidate) && !self.dir.join(&candidate).exists() {
                pending.insert(candidate.clone());
                return candidate;
            }
            n += 1;
        }
    }

    fn release(&self, name: &str) {
        self.pending
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .remove(name);
    }

    fn temp_path(&self) -> PathBuf {
        let id = self.next_tmp.fetch_add(1, Ordering::Relaxed);
        self.dir
            .join(format!(".stg-incoming-{}-{id}.part", std::process::id()))
    }
}

/// Outcome of one received connection.
#[derive(Debug)]
enum Received {
    Stored(PathBuf),
    Rejected(TransferError),
}

fn handle_connection(stream: TcpStream, store: &Store) -> Result<Received, TransferError> {
    stream.set_read_timeout(Some(IO_TIMEOUT))?;
    stream.set_write_timeout(Some(IO_TIMEOUT))?;
    let mut reader = BufReader::new(&stream);
    // Bad magic propagates as an error: the connection is dropped unanswered.
    let header = read_header(&mut reader)?;

    let outcome = match validate_name(&header.name) {
        Err(e) => {
            copy_payload(&mut reader, header.payload_len, &mut io::sink())?;
            read_u32(&mut reader)?;
            Received::Rejected(e)
        }
        Ok(()) => receive_into_store(&mut reader, &header, store)?,
    };
    let ack = match outcome {
        Received::Stored(_) => ACK_OK,
        Received::Rejected(_) => ACK_REJECTED,
    };
    (&stream).write_all(&[ack])?;
    let _ = stream.shutdown(Shutdown::Write);
    Ok(outcome)
}

fn receive_into_store<R: Read>(
    reader: &mut R,
    header: &FrameHeader,
    store: &Store,
) -> Result<Received, TransferError> {
    let tmp = store.temp_path();
    let result = (|| -> Result<Received, TransferError> {
        let mut out = BufWriter::new(File::create(&tmp)?);
        let actual = copy_payload(reader, header.payload_len, &mut out)?;
        out.flush()?;
        drop(out);
        let expected = read_u32(reader)?;
        if expected != actual {
            return Ok(Received::Rejected(TransferError::ChecksumMismatch {
                expected,
                actual,
            }));
        }
        let name = store.reserve(&header.name);
        let dest = store.dir.join(&name);
        let renamed = fs::rename(&tmp, &dest);
        store.release(&name);
        renamed?;
        Ok(Received::Stored(dest))
    })();
    if !matches!(result, Ok(Received::Stored(_))) {
        let _ = fs::remove_file(&tmp);
    }
    result
}

/// A bound receiver. [`Receiver::run`] blocks; [`Receiver::spawn`] runs it on
/// a background thread.
pub struct Receiver {
    listener: TcpListener,
    store: Arc<Store>,
    stop: Arc<AtomicBool>,
}

impl Receiver {
    /// Binds `0.0.0.0:port` (port 0 picks a free port).
    pub fn bind(port: u16, out_dir: impl Into<PathBuf>) -> Result<Self, TransferError> {
        Self::bind_addr(("0.0.0.0", port), out_dir)
    }

    pub fn bind_addr(
        addr: impl ToSocketAddrs,
        out_dir: impl Into<PathBuf>,
    ) -> Result<Self, TransferError> {
        let dir = out_dir.into();
        fs::create_dir_all(&dir)?;
        let addrs: Vec<SocketAddr> = addr.to_socket_addrs()?.collect();
        let port = addrs.first().map_or(0, SocketAddr::port);
        let listener = TcpListener::bind(&addrs[..])
            .map_err(|source| TransferError::BindFailed { port, source })?;
        Ok(Self {
            listener,
            store: Arc::new(Store {
                dir,
                pending: Mutex::new(HashSet::new()),
                next_tmp: AtomicU64::new(0),
            }),
            stop: Arc::new(AtomicBool::new(false)),
        })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections until stopped, one thread per connection.
    pub fn run(&self) -> Result<(), TransferError> {
        for conn in self.listener.incoming() {
            if self.stop.load(Ordering::SeqCst) {
                break;
            }
            let stream = match conn {
                Ok(s) => s,
                Err(e) => {
                    log::warn!("accept failed: {e}");
                    continue;
                }
            };
            let store = Arc::clone(&self.store);
            thread::spawn(move || {
                let peer = stream
                    .peer_addr()
                    .map(|a| a.to_string())
                    .unwrap_or_default();
                match handle_connection(stream, &store) {
                    Ok(Received::Stored(path)) => log::info!("{peer}: stored {}", path.display()),
                    Ok(Received::Rejected(e)) => log::warn!("{peer}: rejected: {e}"),
                    Err(e) => log::warn!("{peer}: dropped: {e}"),
                }
            });
        }
        Ok(())
    }

    pub fn spawn(self) -> io::Result<ReceiverHandle> {
        let addr = self.local_addr()?;
        let stop = Arc::clone(&self.stop);
        let thread = thread::spawn(move || self.run());
        Ok(ReceiverHandle {
            addr,
            stop,
            thread: Some(thread),
        })
    }
}

pub struct ReceiverHandle {
    addr: SocketAddr,
    stop: Arc<AtomicBool>,
    thread: Option<JoinHandle<Result<(), TransferError>>>,
}

impl ReceiverHandle {
    pub fn local_addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn port(&self) -> u16 {
        self.addr.port()
    }

    /// Stops accepting and waits for the accept loop to exit. Connections
    /// already being handled finish on their own threads.
    pub fn stop(mut self) -> Result<(), TransferError> {
        self.shutdown()
    }

    fn shutdown(&mut self) -> Result<(), TransferError> {
        let Some(thread) = self.thread.take() else {
            return Ok(());
        };
        self.stop.store(true, Ordering::SeqCst);
        // Wake the blocking accept.
        let wake: SocketAddr = if self.addr.ip().is_unspecified() {
            ([127, 0, 0, 1], self.addr.port()).into()
        } else {
            self.addr
        };
        let _ = TcpStream::connect_timeout(&wake, Duration::from_secs(1));
        thread.join().unwrap_or(Ok(()))
    }
}

impl Drop for ReceiverHandle {
    fn drop(&mut self) {
        let _ = self.shutdown();
    }
}
