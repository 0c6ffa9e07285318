//! Deterministic JSON output: every float is written with 17 significant
//! digits in scientific notation, non-finite floats become `null`, and
//! field order follows the struct definitions.

use std::io;

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

pub const SCHEMA: &str = "prabhakar-kit/1";

fn write_float<W: ?Sized + io::Write>(w: &mut W, v: f64) -> io::Result<()> {
    if v.is_finite() {
        write!(w, "{v:.16e}")
    } else {
        w.write_all(b"null")
    }
}

struct Compact;

impl Formatter for Compact {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_float(w, v)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_float(w, v as f64)
    }
}

struct Pretty(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*)),* $(,)?) => {
        $(fn $name<W: ?Sized + io::Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for Pretty {
    delegate!(
        begin_array(),
        end_array(),
        begin_array_value(first: bool),
        end_array_value(),
        begin_object(),
        end_object(),
        begin_object_key(first: bool),
        begin_object_value(),
        end_object_value(),
    );

    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_float(w, v)
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_float(w, v as f64)
    }
}

/// Single-line JSON.
pub fn to_compact<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Compact);
    value.serialize(&mut ser).expect("serialising to memory cannot fail");
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

/// Indented JSON with a trailing newline.
pub fn to_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Pretty(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serialising to memory cannot fail");
    buf.push(b'\n');
    String::from_utf8(buf).expect("serde_json emits UTF-8")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Serialize)]
    struct Sample {
        b: f64,
        a: Vec<f64>,
        n: u32,
    }

    #[test]
    fn floats_use_seventeen_digits() {
        let s = Sample {
            b: 0.1,
            a: vec![1.0, f64::NAN, -2.5e-300],
            n: 7,
        };
        assert_eq!(
            to_compact(&s),
            r#"{"b":1.0000000000000001e-1,"a":[1.0000000000000000e0,null,-2.5000000000000000e-300],"n":7}"#
        );
        let parsed: serde_json::Value = serde_json::from_str(&to_pretty(&s)).unwrap();
        assert_eq!(parsed["b"].as_f64(), Some(0.1));
        assert!(parsed["a"][1].is_null());
    }

    #[test]
    fn round_trip_is_exact() {
        for &v in &[std::f64::consts::PI, 1e-310, 123456789.12345679, -0.0] {
            let back: f64 = serde_json::from_str(&to_compact(&v)).unwrap();
            assert_eq!(back.to_bits(), v.to_bits());
        }
    }
}
