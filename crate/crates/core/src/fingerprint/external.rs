//! Text format for fingerprints computed outside this crate.
//!
//! ```text
//! pharm2d,16
//! mol1,F0F0
//! mol2,0x0001
//! ```
//!
//! Line 1 is `scheme_id,length`. Each following line is `key,hex` with
//! exactly `ceil(length / 4)` hex digits (an optional `0x` prefix is
//! accepted). The most significant bit of the first digit is bit 0; padding
//! bits past `length` in the last digit must be zero.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use super::{Fingerprint, FingerprintScheme};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct ExternalFingerprints {
    pub scheme: FingerprintScheme,
    rows: Vec<(String, Fingerprint)>,
    index: HashMap<String, usize>,
}

impl ExternalFingerprints {
    pub fn new(scheme: FingerprintScheme, rows: Vec<(String, Fingerprint)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(rows.len());
        for (i, (key, fp)) in rows.iter().enumerate() {
            if fp.len() != scheme.length {
                return Err(Error::Format(format!(
                    "fingerprint for {key} has {} bits, scheme {} declares {}",
                    fp.len(),
                    scheme.id,
                    scheme.length
                )));
            }
            if index.insert(key.clone(), i).is_some() {
                return Err(Error::Format(format!("duplicate key {key}")));
            }
        }
        Ok(ExternalFingerprints {
            scheme,
            rows,
            index,
        })
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn rows(&self) -> &[(String, Fingerprint)] {
        &self.rows
    }

    pub fn get(&self, key: &str) -> Option<&Fingerprint> {
        self.index.get(key).map(|&i| &self.rows[i].1)
    }

    /// Fingerprints in the order of `keys`; every key must be present.
    pub fn aligned<S: AsRef<str>>(&self, keys: &[S]) -> Result<Vec<Fingerprint>> {
        let missing: Vec<&str> = keys
            .iter()
            .map(AsRef::as_ref)
            .filter(|k| !self.index.contains_key(*k))
            .collect();
        if !missing.is_empty() {
            let shown: Vec<&str> = missing.iter().take(5).copied().collect();
            return Err(Error::KeyMismatch(format!(
                "{} of {} keys absent from scheme {} (e.g. {})",
                missing.len(),
                keys.len(),
                self.scheme.id,
                shown.join(", ")
            )));
        }
        Ok(keys
            .iter()
            .map(|k| self.rows[self.index[k.as_ref()]].1.clone())
            .collect())
    }
}

pub fn load_external_fingerprints(path: impl AsRef<Path>) -> Result<ExternalFingerprints> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_external_fingerprints(file).map_err(|e| match e {
        Error::Format(msg) => Error::Format(format!("{}: {msg}", path.display())),
        other => other,
    })
}

pub fn read_external_fingerprints(reader: impl Read) -> Result<ExternalFingerprints> {
    let mut lines = BufReader::new(reader).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::Format(e.to_string()))?,
        None => return Err(Error::Format("missing header line".into())),
    };
    let header = header.trim_end_matches('\r');
    let Some((id, length)) = header.split_once(',') else {
        return Err(Error::Format(format!(
            "bad header {header:?}, expected scheme_id,length"
        )));
    };
    let length: usize = length
        .trim()
        .parse()
        .map_err(|_| Error::Format(format!("bad length in header {header:?}")))?;
    let scheme = FingerprintScheme::external(id.trim(), length);
    scheme
        .validate()
        .map_err(|e| Error::Format(format!("bad header {header:?}: {e}")))?;

    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::Format(e.to_string()))?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let Some((key, hex)) = line.split_once(',') else {
            return Err(Error::Format(format!(
                "line {}: expected key,hex",
                lineno + 2
            )));
        };
        let fp = decode_hex(&scheme, hex.trim())
            .map_err(|msg| Error::Format(format!("line {}: {msg}", lineno + 2)))?;
        rows.push((key.trim().to_string(), fp));
    }
    ExternalFingerprints::new(scheme, rows)
}

fn decode_hex(scheme: &FingerprintScheme, hex: &str) -> std::result::Result<Fingerprint, String> {
    let digits = hex
        .strip_prefix("0x")
        .or_else(|| hex.strip_prefix("0X"))
        .unwrap_or(hex);
    let expected = scheme.length.div_ceil(4);
    if digits.len() != expected {
        return Err(format!(
            "{} hex digits, expected {expected} for {} bits",
            digits.len(),
            scheme.length
        ));
    }
    let mut fp = Fingerprint::zeros(scheme.id.as_str(), scheme.length);
    for (d, ch) in digits.chars().enumerate() {
        let nibble = ch
            .to_digit(16)
            .ok_or_else(|| format!("invalid hex digit {ch:?}"))?;
        for j in 0..4 {
            if nibble & (8 >> j) != 0 {
                let bit = d * 4 + j;
                if bit >= scheme.length {
                    return Err(format!(
                        "bit {bit} set beyond declared length {}",
                        scheme.length
                    ));
                }
                fp.set(bit);
            }
        }
    }
    Ok(fp)
}

pub(crate) fn encode_hex(fp: &Fingerprint) -> String {
    let digits = fp.len().div_ceil(4);
    let mut out = String::with_capacity(digits);
    for d in 0..digits {
        let mut nibble = 0u32;
        for j in 0..4 {
            if fp.get(d * 4 + j) {
                nibble |= 8 >> j;
            }
        }
        out.push(char::from_digit(nibble, 16).unwrap().to_ascii_uppercase());
    }
    out
}

/// Write fingerprints in the external format.
pub fn write_external_fingerprints<'a, W: Write>(
    mut out: W,
    scheme: &FingerprintScheme,
    rows: impl IntoIterator<Item = (&'a str, &'a Fingerprint)>,
) -> Result<()> {
    let io = |e| Error::io("<output>", e);
    writeln!(out, "{},{}", scheme.id, scheme.length).map_err(io)?;
    for (key, fp) in rows {
        if fp.len() != scheme.length {
            return Err(Error::SchemeMismatch(format!(
                "{key}: {} bits, scheme {} has {}",
                fp.len(),
                scheme.id,
                scheme.length
            )));
        }
        if key.contains([',', '\n', '\r']) {
            return Err(Error::Format(format!("key {key:?} cannot be written")));
        }
        writeln!(out, "{key},{}", encode_hex(fp)).map_err(io)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn decodes_example() {
        let ext = read_external_fingerprints("ext,16\nmol1,0xF0F0\n".as_bytes()).unwrap();
        let fp = ext.get("mol1").unwrap();
        assert_eq!(fp.len(), 16);
        assert_eq!(fp.count_ones(), 8);
        assert!(fp.get(0) && fp.get(3) && !fp.get(4) && fp.get(8));
        assert_eq!(fp.scheme_id(), "ext");
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            read_external_fingerprints("ext,16\nmol1,0xF0F0F\n".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_external_fingerprints("ext\nm,0\n".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_external_fingerprints("".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_external_fingerprints("ext,4\nm,G\n".as_bytes()),
            Err(Error::Format(_))
        ));
        // 6 bits: two digits, last two bits of the second digit are padding
        assert!(read_external_fingerprints("ext,6\nm,FC\n".as_bytes()).is_ok());
        assert!(matches!(
            read_external_fingerprints("ext,6\nm,FD\n".as_bytes()),
            Err(Error::Format(_))
        ));
        assert!(matches!(
            read_external_fingerprints("ext,4\nm,F\nm,0\n".as_bytes()),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn empty_body_is_valid() {
        let ext = read_external_fingerprints("ext,16\n".as_bytes()).unwrap();
        assert!(ext.is_empty());
        assert_eq!(ext.scheme.length, 16);
    }

    #[test]
    fn crlf_accepted() {
        let ext = read_external_fingerprints("ext,8\r\na,FF\r\nb,01\r\n".as_bytes()).unwrap();
        assert_eq!(ext.len(), 2);
        assert!(ext.get("b").unwrap().get(7));
    }

    #[test]
    fn alignment() {
        let ext = read_external_fingerprints("ext,4\na,F\nb,1\n".as_bytes()).unwrap();
        let fps = ext.aligned(&["b", "a"]).unwrap();
        assert_eq!(fps[0].count_ones(), 1);
        assert!(matches!(
            ext.aligned(&["a", "zz"]),
            Err(Error::KeyMismatch(_))
        ));
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(len in 1usize..300, seed in any::<u64>()) {
            let scheme = FingerprintScheme::external("e", len);
            let mut fp = Fingerprint::zeros("e", len);
            let mut x = seed | 1;
            for bit in 0..len {
                x ^= x << 13; x ^= x >> 7; x ^= x << 17;
                if x & 1 == 1 { fp.set(bit); }
            }
            let mut buf = Vec::new();
            write_external_fingerprints(&mut buf, &scheme, [("k", &fp)]).unwrap();
            let text = String::from_utf8(buf.clone()).unwrap();
            let hex = text.lines().nth(1).unwrap().split(',').nth(1).unwrap();
            prop_assert_eq!(hex.len(), len.div_ceil(4));
            let back = read_external_fingerprints(buf.as_slice()).unwrap();
            prop_assert_eq!(back.get("k").unwrap(), &fp);
        }
    }
}
