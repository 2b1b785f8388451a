//! JSON output with a schema-version envelope and fixed-precision floats.
//!
//! Every float is written with 17 significant digits in exponent form, which
//! round-trips exactly and does not depend on shortest-representation
//! heuristics. Non-finite values become `null`.

use std::io;

use serde::Serialize;
use serde_json::ser::Formatter;

pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: &'static str,
    pub kind: &'static str,
    #[serde(flatten)]
    pub body: &'a T,
}

pub fn envelope<'a, T: Serialize>(kind: &'static str, body: &'a T) -> Envelope<'a, T> {
    Envelope { schema_version: SCHEMA_VERSION, kind, body }
}

struct Sig17;

impl Formatter for Sig17 {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_writer<W: io::Write, T: Serialize + ?Sized>(writer: W, value: &T) -> serde_json::Result<()> {
    let mut ser = serde_json::Serializer::with_formatter(writer, Sig17);
    value.serialize(&mut ser)
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    to_writer(&mut buf, value).expect("serializing to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}
