//! `POEM1` library container.
//!
//! All integers are little-endian. A string is a `u32` byte length followed
//! by UTF-8 bytes.
//!
//! ```text
//! magic        5 bytes  "POEM1"
//! header_len   u64      byte length of the header block
//! header:
//!   name str, version u32, notes str
//!   task u8             0 = classification, 1 = regression
//!   np u32, np x label str   (sorted label space; np = 0 for regression)
//!   n u32, n x scheme:
//!     id str, kind u8 (0 morgan, 1 atom_pair, 2 path, 3 external),
//!     length u32, radius u32, chirality u8, features u8, max_path_len u32
//!   m u64
//! m x record:
//!   key str
//!   has_graph_key u8, graph_key u64 (zero when absent)
//!   label: u32 class index, or f64 bits as u64 for regression
//!   n x fingerprint: ceil(length / 64) u64 words; bit i is bit (i % 64) of word i / 64
//! ```
//!
//! Writing the same library twice yields identical bytes.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::library::{
    FingerprintColumn, LibraryMeta, MoleculeRecord, ReferenceLibrary, Targets, TaskKind,
};
use crate::error::{Error, Result};
use crate::fingerprint::{words_for, FingerprintScheme, SchemeKind, SchemeSet};

pub const MAGIC: &[u8; 5] = b"POEM1";
pub const FORMAT_VERSION: &str = "POEM1";

/// Header fields, readable without touching the fingerprint records.
#[derive(Debug, Clone, PartialEq)]
pub struct LibraryInfo {
    pub format: String,
    pub meta: LibraryMeta,
    pub task: TaskKind,
    pub label_space: Vec<String>,
    pub schemes: SchemeSet,
    pub molecules: u64,
}

pub fn save_library(library: &ReferenceLibrary, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_library(library, &mut out).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

pub fn load_library(path: impl AsRef<Path>) -> Result<ReferenceLibrary> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_library(&mut BufReader::new(file))
}

pub fn read_info(path: impl AsRef<Path>) -> Result<LibraryInfo> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_header(&mut BufReader::new(file))
}

pub fn to_bytes(library: &ReferenceLibrary) -> Vec<u8> {
    let mut buf = Vec::new();
    write_library(library, &mut buf).expect("writing to memory cannot fail");
    buf
}

pub fn from_bytes(bytes: &[u8]) -> Result<ReferenceLibrary> {
    read_library(&mut &bytes[..])
}

pub fn write_library<W: Write>(library: &ReferenceLibrary, out: &mut W) -> std::io::Result<()> {
    let mut header = Vec::new();
    let meta = library.meta();
    put_str(&mut header, &meta.name);
    header.extend_from_slice(&meta.version.to_le_bytes());
    put_str(&mut header, &meta.notes);
    header.push(match library.task() {
        TaskKind::Classification => 0,
        TaskKind::Regression => 1,
    });
    let space = library.label_space();
    header.extend_from_slice(&(space.len() as u32).to_le_bytes());
    for label in space {
        put_str(&mut header, label);
    }
    let schemes = library.schemes();
    header.extend_from_slice(&(schemes.len() as u32).to_le_bytes());
    for s in schemes {
        put_scheme(&mut header, s);
    }
    header.extend_from_slice(&(library.len() as u64).to_le_bytes());

    out.write_all(MAGIC)?;
    out.write_all(&(header.len() as u64).to_le_bytes())?;
    out.write_all(&header)?;

    let mut rec = Vec::new();
    for (i, record) in library.records().iter().enumerate() {
        rec.clear();
        put_str(&mut rec, &record.key);
        rec.push(u8::from(record.graph_key.is_some()));
        rec.extend_from_slice(&record.graph_key.unwrap_or(0).to_le_bytes());
        match library.targets() {
            Targets::Classes { index, .. } => rec.extend_from_slice(&index[i].to_le_bytes()),
            Targets::Values(v) => rec.extend_from_slice(&v[i].to_bits().to_le_bytes()),
        }
        for col in library.columns() {
            for w in col.row(i) {
                rec.extend_from_slice(&w.to_le_bytes());
            }
        }
        out.write_all(&rec)?;
    }
    Ok(())
}

fn put_str(buf: &mut Vec<u8>, s: &str) {
    buf.extend_from_slice(&(s.len() as u32).to_le_bytes());
    buf.extend_from_slice(s.as_bytes());
}

fn put_scheme(buf: &mut Vec<u8>, s: &FingerprintScheme) {
    put_str(buf, &s.id);
    let (kind, radius, chirality, features, max_path) = match s.kind {
        SchemeKind::Morgan {
            radius,
            use_chirality,
            use_features,
        } => (0u8, radius, use_chirality, use_features, 0),
        SchemeKind::AtomPair => (1, 0, false, false, 0),
        SchemeKind::Path { max_path_len } => (2, 0, false, false, max_path_len),
        SchemeKind::External => (3, 0, false, false, 0),
    };
    buf.push(kind);
    buf.extend_from_slice(&(s.length as u32).to_le_bytes());
    buf.extend_from_slice(&radius.to_le_bytes());
    buf.push(u8::from(chirality));
    buf.push(u8::from(features));
    buf.extend_from_slice(&max_path.to_le_bytes());
}

struct Reader<'a, R: Read> {
    inner: &'a mut R,
}

impl<R: Read> Reader<'_, R> {
    fn bytes<const K: usize>(&mut self) -> Result<[u8; K]> {
        let mut b = [0u8; K];
        self.inner
            .read_exact(&mut b)
            .map_err(|e| Error::Format(format!("truncated library file: {e}")))?;
        Ok(b)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }

    fn bool(&mut self) -> Result<bool> {
        match self.u8()? {
            0 => Ok(false),
            1 => Ok(true),
            b => Err(Error::Format(format!("invalid flag byte {b}"))),
        }
    }

    fn str(&mut self) -> Result<String> {
        let len = self.u32()? as usize;
        if len > 1 << 24 {
            return Err(Error::Format(format!("string length {len} is implausible")));
        }
        let mut buf = vec![0u8; len];
        self.inner
            .read_exact(&mut buf)
            .map_err(|e| Error::Format(format!("truncated library file: {e}")))?;
        String::from_utf8(buf).map_err(|_| Error::Format("string is not UTF-8".into()))
    }
}

fn read_header<R: Read>(input: &mut R) -> Result<LibraryInfo> {
    let mut r = Reader { inner: input };
    let magic: [u8; 5] = r.bytes()?;
    if &magic != MAGIC {
        return Err(Error::Format("not a POEM1 library (bad magic)".into()));
    }
    let header_len = r.u64()?;
    let mut header = Vec::new();
    r.inner
        .take(header_len)
        .read_to_end(&mut header)
        .map_err(|e| Error::Format(format!("unreadable header: {e}")))?;
    if header.len() as u64 != header_len {
        return Err(Error::Format("truncated header".into()));
    }
    let mut cursor = &header[..];
    let mut h = Reader { inner: &mut cursor };
    let name = h.str()?;
    let version = h.u32()?;
    let notes = h.str()?;
    let task = match h.u8()? {
        0 => TaskKind::Classification,
        1 => TaskKind::Regression,
        t => return Err(Error::Format(format!("unknown task tag {t}"))),
    };
    let np = h.u32()?;
    let label_space = (0..np).map(|_| h.str()).collect::<Result<Vec<_>>>()?;
    let n = h.u32()?;
    let mut schemes = Vec::with_capacity(n as usize);
    for _ in 0..n {
        let id = h.str()?;
        let kind_tag = h.u8()?;
        let length = h.u32()? as usize;
        let radius = h.u32()?;
        let use_chirality = h.bool()?;
        let use_features = h.bool()?;
        let max_path_len = h.u32()?;
        let kind = match kind_tag {
            0 => SchemeKind::Morgan {
                radius,
                use_chirality,
                use_features,
            },
            1 => SchemeKind::AtomPair,
            2 => SchemeKind::Path { max_path_len },
            3 => SchemeKind::External,
            t => return Err(Error::Format(format!("unknown scheme kind {t}"))),
        };
        schemes.push(FingerprintScheme { id, kind, length });
    }
    let molecules = h.u64()?;
    if !cursor.is_empty() {
        return Err(Error::Format("trailing bytes in header".into()));
    }
    let schemes = SchemeSet::new(schemes).map_err(|e| Error::Format(e.to_string()))?;
    if task == TaskKind::Regression && !label_space.is_empty() {
        return Err(Error::Format(
            "regression library with a label space".into(),
        ));
    }
    Ok(LibraryInfo {
        format: FORMAT_VERSION.into(),
        meta: LibraryMeta {
            name,
            version,
            notes,
        },
        task,
        label_space,
        schemes,
        molecules,
    })
}

pub fn read_library<R: Read>(input: &mut R) -> Result<ReferenceLibrary> {
    let info = read_header(input)?;
    let mut r = Reader { inner: input };
    let m = usize::try_from(info.molecules)
        .map_err(|_| Error::Format("molecule count overflow".into()))?;
    let mut records = Vec::with_capacity(m.min(1 << 20));
    let mut class_index = Vec::new();
    let mut values = Vec::new();
    let mut columns: Vec<Vec<u64>> = info.schemes.iter().map(|_| Vec::new()).collect();
    for _ in 0..m {
        let key = r.str()?;
        let has_key = r.bool()?;
        let graph_key = r.u64()?;
        records.push(MoleculeRecord {
            key,
            graph_key: has_key.then_some(graph_key),
        });
        match info.task {
            TaskKind::Classification => class_index.push(r.u32()?),
            TaskKind::Regression => values.push(f64::from_bits(r.u64()?)),
        }
        for (scheme, col) in info.schemes.iter().zip(&mut columns) {
            for _ in 0..words_for(scheme.length) {
                col.push(r.u64()?);
            }
        }
    }
    let mut probe = [0u8; 1];
    if r.inner
        .read(&mut probe)
        .map_err(|e| Error::Format(e.to_string()))?
        != 0
    {
        return Err(Error::Format("trailing bytes after records".into()));
    }
    for (scheme, col) in info.schemes.iter().zip(&columns) {
        let stride = words_for(scheme.length);
        if scheme.length % 64 != 0 {
            let mask = !0u64 << (scheme.length % 64);
            if col.chunks(stride).any(|fp| fp[stride - 1] & mask != 0) {
                return Err(Error::Format(format!(
                    "bits beyond length in scheme {}",
                    scheme.id
                )));
            }
        }
    }
    let targets = match info.task {
        TaskKind::Classification => Targets::Classes {
            space: info.label_space,
            index: class_index,
        },
        TaskKind::Regression => Targets::Values(values),
    };
    let columns = info
        .schemes
        .iter()
        .zip(columns)
        .map(|(s, words)| FingerprintColumn::from_words(s.length, words))
        .collect();
    ReferenceLibrary::from_raw_parts(info.meta, info.schemes, records, targets, columns)
        .map_err(|e| Error::Format(format!("inconsistent library: {e}")))
}
