//! Escaped-string encoding for raw byte sequences stored in TOML.
//!
//! Recognised escapes: `\n` `\r` `\t` `\0` `\\` `\"` `\'` and `\xHH`.
//! Everything else is taken as the UTF-8 bytes of the character.

use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscapeError {
    pub offset: usize,
    pub message: String,
}

impl fmt::Display for EscapeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "invalid escape at offset {}: {}",
            self.offset, self.message
        )
    }
}

impl std::error::Error for EscapeError {}

pub fn decode(text: &str) -> Result<Vec<u8>, EscapeError> {
    let bytes = text.as_bytes();
    let mut out = Vec::with_capacity(bytes.len());
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] != b'\\' {
            out.push(bytes[i]);
            i += 1;
            continue;
        }
        let err = |message: &str| EscapeError {
            offset: i,
            message: message.to_string(),
        };
        let Some(&kind) = bytes.get(i + 1) else {
            return Err(err("trailing backslash"));
        };
        let (byte, width) = match kind {
            b'n' => (b'\n', 2),
            b'r' => (b'\r', 2),
            b't' => (b'\t', 2),
            b'0' => (0, 2),
            b'\\' => (b'\\', 2),
            b'"' => (b'"', 2),
            b'\'' => (b'\'', 2),
            b'x' => {
                let hex = bytes
                    .get(i + 2..i + 4)
                    .and_then(|h| std::str::from_utf8(h).ok())
                    .ok_or_else(|| err("\\x needs two hex digits"))?;
                let value =
                    u8::from_str_radix(hex, 16).map_err(|_| err("\\x needs two hex digits"))?;
                (value, 4)
            }
            other => {
                return Err(err(&format!("unknown escape \\{}", char::from(other))));
            }
        };
        out.push(byte);
        i += width;
    }
    Ok(out)
}

pub fn encode(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len());
    for &b in bytes {
        match b {
            b'\n' => out.push_str("\\n"),
            b'\r' => out.push_str("\\r"),
            b'\t' => out.push_str("\\t"),
            b'\\' => out.push_str("\\\\"),
            0x20..=0x7E => out.push(char::from(b)),
            _ => out.push_str(&format!("\\x{b:02X}")),
        }
    }
    out
}

/// Raw bytes a runtime candidate must write to stdout.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExpectedOutput(pub Vec<u8>);

impl ExpectedOutput {
    pub fn bytes(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl From<&[u8]> for ExpectedOutput {
    fn from(bytes: &[u8]) -> Self {
        ExpectedOutput(bytes.to_vec())
    }
}

impl Serialize for ExpectedOutput {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&encode(&self.0))
    }
}

impl<'de> Deserialize<'de> for ExpectedOutput {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct EscapedVisitor;

        impl Visitor<'_> for EscapedVisitor {
            type Value = ExpectedOutput;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("an escaped byte string")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Self::Value, E> {
                decode(v).map(ExpectedOutput).map_err(E::custom)
            }
        }

        deserializer.deserialize_str(EscapedVisitor)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn newline_escape_is_one_byte() {
        let bytes = decode(r"Hello, world!\n").unwrap();
        assert_eq!(bytes.len(), 14);
        assert_eq!(
            bytes,
            [0x48, 0x65, 0x6C, 0x6C, 0x6F, 0x2C, 0x20, 0x77, 0x6F, 0x72, 0x6C, 0x64, 0x21, 0x0A]
        );
    }

    #[test]
    fn hex_and_literal_newline() {
        assert_eq!(decode(r"\xEF\xbb\xBFH").unwrap(), [0xEF, 0xBB, 0xBF, b'H']);
        assert_eq!(decode("a\nb").unwrap(), b"a\nb");
    }

    #[test]
    fn rejects_bad_escapes() {
        assert!(decode("abc\\").is_err());
        assert!(decode(r"\q").is_err());
        assert!(decode(r"\x4").is_err());
        assert!(decode(r"\xZZ").is_err());
    }

    proptest! {
        #[test]
        fn encode_decode_round_trip(bytes in proptest::collection::vec(any::<u8>(), 0..64)) {
            prop_assert_eq!(decode(&encode(&bytes)).unwrap(), bytes);
        }
    }
}
