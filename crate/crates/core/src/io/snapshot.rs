//! Line-delimited JSON spectrum records. Floats are stored as the hex digits
//! of their IEEE-754 bit pattern, so save/load is lossless.

use std::io::{BufRead, Write};
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::geometry::BubbleState;
use crate::spectral::SpectralFunction;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotRecord {
    pub t: String,
    pub c: [String; 2],
    /// `(k, re, im)` for `k = 0..=n_max`.
    pub coeffs: Vec<(usize, String, String)>,
    pub checksum: String,
}

pub fn encode_f64(x: f64) -> String {
    format!("{:016x}", x.to_bits())
}

pub fn decode_f64(s: &str) -> Result<f64> {
    if s.len() != 16 {
        return Err(Error::Snapshot(format!("malformed float '{s}'")));
    }
    u64::from_str_radix(s, 16)
        .map(f64::from_bits)
        .map_err(|_| Error::Snapshot(format!("malformed float '{s}'")))
}

fn digest(t: f64, c: [f64; 2], coeffs: &[Complex64]) -> String {
    let mut h = Sha256::new();
    h.update(t.to_bits().to_le_bytes());
    h.update(c[0].to_bits().to_le_bytes());
    h.update(c[1].to_bits().to_le_bytes());
    for (k, z) in coeffs.iter().enumerate() {
        h.update((k as u64).to_le_bytes());
        h.update(z.re.to_bits().to_le_bytes());
        h.update(z.im.to_bits().to_le_bytes());
    }
    hex::encode(h.finalize())
}

impl SnapshotRecord {
    pub fn from_state(state: &BubbleState) -> Self {
        let coeffs = state.f.coeffs();
        Self {
            t: encode_f64(state.t),
            c: [encode_f64(state.c[0]), encode_f64(state.c[1])],
            coeffs: coeffs
                .iter()
                .enumerate()
                .map(|(k, z)| (k, encode_f64(z.re), encode_f64(z.im)))
                .collect(),
            checksum: digest(state.t, state.c, coeffs),
        }
    }

    /// Decodes and verifies the checksum.
    pub fn to_state(&self) -> Result<BubbleState> {
        let t = decode_f64(&self.t)?;
        let c = [decode_f64(&self.c[0])?, decode_f64(&self.c[1])?];
        let mut coeffs = Vec::with_capacity(self.coeffs.len());
        for (i, (k, re, im)) in self.coeffs.iter().enumerate() {
            if *k != i {
                return Err(Error::Snapshot(format!("coefficient {i} labelled k = {k}")));
            }
            coeffs.push(Complex64::new(decode_f64(re)?, decode_f64(im)?));
        }
        if digest(t, c, &coeffs) != self.checksum {
            return Err(Error::Snapshot("checksum mismatch".into()));
        }
        let f = SpectralFunction::from_coeffs(coeffs).map_err(|e| Error::Snapshot(e.to_string()))?;
        Ok(BubbleState { f, c, t })
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("record serializes")
    }

    pub fn parse_line(line: &str) -> Result<Self> {
        serde_json::from_str(line).map_err(|e| Error::Snapshot(e.to_string()))
    }
}

pub fn write_record(out: &mut impl Write, state: &BubbleState) -> Result<()> {
    writeln!(out, "{}", SnapshotRecord::from_state(state).to_line())?;
    Ok(())
}

/// All records of a snapshot file, in order.
pub fn read_snapshots(path: &Path) -> Result<Vec<BubbleState>> {
    let file = std::io::BufReader::new(std::fs::File::open(path)?);
    let mut out = Vec::new();
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = SnapshotRecord::parse_line(&line).map_err(|e| Error::Snapshot(format!("line {}: {e}", i + 1)))?;
        out.push(
            rec.to_state()
                .map_err(|e| Error::Snapshot(format!("line {}: {e}", i + 1)))?,
        );
    }
    Ok(out)
}

/// The last record of a snapshot file.
pub fn read_last_snapshot(path: &Path) -> Result<BubbleState> {
    read_snapshots(path)?
        .pop()
        .ok_or_else(|| Error::Snapshot(format!("{} holds no records", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn state() -> BubbleState {
        let f = SpectralFunction::cosine(6, 2, 0.01, 0.3).add(&SpectralFunction::sine(6, 5, 1e-9));
        BubbleState::from_projection(&f, [0.1, -2.5], 1.0 / 3.0).unwrap()
    }

    #[test]
    fn roundtrip_and_tamper() {
        let s = state();
        let line = SnapshotRecord::from_state(&s).to_line();
        assert_eq!(SnapshotRecord::parse_line(&line).unwrap().to_state().unwrap(), s);
        let mut rec = SnapshotRecord::from_state(&s);
        rec.coeffs[2].1 = encode_f64(0.0051);
        assert!(matches!(rec.to_state(), Err(Error::Snapshot(_))));
        assert!(decode_f64("xyz").is_err());
    }

    #[test]
    fn file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let mut file = std::fs::File::create(&path).unwrap();
        let a = state();
        let b = BubbleState { t: 2.0, ..state() };
        write_record(&mut file, &a).unwrap();
        write_record(&mut file, &b).unwrap();
        drop(file);
        assert_eq!(read_snapshots(&path).unwrap(), vec![a, b.clone()]);
        assert_eq!(read_last_snapshot(&path).unwrap(), b);
    }

    proptest! {
        #[test]
        fn lossless(re in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 1..12),
                    t in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
            let coeffs: Vec<Complex64> = re.iter().enumerate()
                .map(|(k, &x)| Complex64::new(x, if k == 0 { 0.0 } else { -x / 3.0 }))
                .collect();
            let f = SpectralFunction::from_coeffs(coeffs).unwrap();
            let s = BubbleState { f, c: [t, -t], t };
            let back = SnapshotRecord::parse_line(&SnapshotRecord::from_state(&s).to_line()).unwrap().to_state().unwrap();
            prop_assert_eq!(back, s);
        }
    }
}
