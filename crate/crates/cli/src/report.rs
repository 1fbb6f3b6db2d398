//! Report envelope and canonical JSON output.
//!
//! Reports are deterministic for fixed inputs and seed: keys are sorted
//! (via `serde_json::Value`'s ordered maps) and every float is printed in
//! scientific notation with 17 significant digits, which round-trips `f64`
//! exactly.

use std::io::Write;

use serde::Serialize;
use serde_json::ser::Formatter;

/// Envelope around every command's payload.
#[derive(Serialize)]
pub struct ReportFile<P: Serialize> {
    pub schema: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub tolerances: Tolerances,
    pub payload: P,
}

#[derive(Clone, Copy, Serialize)]
pub struct Tolerances {
    pub zero_tol: f64,
    pub p4_min: f64,
    pub cluster_tol: f64,
}

pub const SCHEMA: &str = "thardy.report/1";

impl<P: Serialize> ReportFile<P> {
    pub fn new(command: String, seed: Option<u64>, tolerances: Tolerances, payload: P) -> Self {
        Self {
            schema: SCHEMA,
            version: env!("CARGO_PKG_VERSION"),
            command,
            seed,
            tolerances,
            payload,
        }
    }
}

/// Serializes any value to canonical JSON: sorted keys, two-space indent,
/// floats at full precision.
pub fn to_canonical_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    // Going through Value sorts object keys (BTreeMap-backed).
    let value = serde_json::to_value(value)?;
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, CanonicalFormatter::new());
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(out)?)
}

/// Pretty two-space indentation with full-precision floats.
struct CanonicalFormatter {
    depth: usize,
}

impl CanonicalFormatter {
    fn new() -> Self {
        Self { depth: 0 }
    }

    fn newline<W: ?Sized + Write>(&self, writer: &mut W) -> std::io::Result<()> {
        writer.write_all(b"\n")?;
        for _ in 0..self.depth {
            writer.write_all(b"  ")?;
        }
        Ok(())
    }
}

impl Formatter for CanonicalFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()> {
        debug_assert!(value.is_finite(), "reports never contain NaN/Inf");
        write!(writer, "{value:.16e}")
    }

    fn begin_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.depth += 1;
        writer.write_all(b"[")
    }

    fn end_array<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.depth -= 1;
        self.newline(writer)?;
        writer.write_all(b"]")
    }

    fn begin_array_value<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.depth += 1;
        writer.write_all(b"{")
    }

    fn end_object<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        self.depth -= 1;
        self.newline(writer)?;
        writer.write_all(b"}")
    }

    fn begin_object_key<W: ?Sized + Write>(
        &mut self,
        writer: &mut W,
        first: bool,
    ) -> std::io::Result<()> {
        if !first {
            writer.write_all(b",")?;
        }
        self.newline(writer)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, writer: &mut W) -> std::io::Result<()> {
        writer.write_all(b": ")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_exactly() {
        let values = [
            0.25,
            1.0 / 3.0,
            -7.217e-31,
            6.02214076e23,
            f64::MIN_POSITIVE,
            0.0,
        ];
        for v in values {
            let json = to_canonical_json(&v).unwrap();
            let back: f64 = serde_json::from_str(&json).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{json}");
        }
    }

    #[test]
    fn object_keys_come_out_sorted() {
        #[derive(Serialize)]
        struct Scrambled {
            zebra: u32,
            apple: u32,
            mango: u32,
        }
        let json = to_canonical_json(&Scrambled {
            zebra: 1,
            apple: 2,
            mango: 3,
        })
        .unwrap();
        let apple = json.find("apple").unwrap();
        let mango = json.find("mango").unwrap();
        let zebra = json.find("zebra").unwrap();
        assert!(apple < mango && mango < zebra);
    }

    #[test]
    fn output_is_stable_across_serializations() {
        let payload = vec![0.1, 0.2, 0.25];
        let a = to_canonical_json(&payload).unwrap();
        let b = to_canonical_json(&payload).unwrap();
        assert_eq!(a, b);
    }
}
