//! Byte-level runtime contract checks.

use crate::outcome::Outcome;

use super::exec::ExecutionRecord;

const ESC: u8 = 0x1B;
const UTF8_BOM: [u8; 3] = [0xEF, 0xBB, 0xBF];

fn show_byte(b: u8) -> String {
    format!("0x{b:02X}")
}

/// Exact stdout bytes, zero stderr bytes, exit 0. The reason names the
/// first violated clause: `timeout`, `stdout-mismatch`, `stderr-nonempty`,
/// `exit-code`.
pub fn check_c01(record: &ExecutionRecord, expected: &[u8]) -> Outcome {
    if record.timed_out {
        return Outcome::fail("timeout: candidate exceeded the execution time limit");
    }
    let actual = match record.stdout_bytes() {
        Ok(bytes) => bytes,
        Err(e) => return Outcome::fail_with("stdout-mismatch", format!("capture unreadable: {e}")),
    };
    if actual != expected {
        let first_diff = actual
            .iter()
            .zip(expected)
            .position(|(a, e)| a != e)
            .unwrap_or(actual.len().min(expected.len()));
        return Outcome::fail_with(
            "stdout-mismatch",
            format!(
                "expected {} bytes, got {}; first difference at byte {first_diff}",
                expected.len(),
                actual.len()
            ),
        );
    }
    if record.stderr_byte_count != 0 {
        let preview = record
            .stderr_bytes()
            .map(|b| crate::bundle::escape::encode(&b[..b.len().min(120)]))
            .unwrap_or_default();
        return Outcome::fail_with(
            "stderr-nonempty",
            format!("{} byte(s): {preview}", record.stderr_byte_count),
        );
    }
    if record.exit_code != 0 {
        return Outcome::fail_with("exit-code", format!("expected 0, got {}", record.exit_code));
    }
    Outcome::Pass
}

/// Printable ASCII plus newline only, which is also valid UTF-8.
pub fn check_encoding(stdout: &[u8]) -> Outcome {
    match stdout
        .iter()
        .position(|&b| b != b'\n' && !(0x20..=0x7E).contains(&b))
    {
        None => Outcome::Pass,
        Some(i) => Outcome::fail_with(
            "non-ascii",
            format!("byte {} at offset {i}", show_byte(stdout[i])),
        ),
    }
}

/// No ESC byte and exactly the expected length.
pub fn check_no_markup(stdout: &[u8], expected_len: usize) -> Outcome {
    if let Some(i) = memchr::memchr(ESC, stdout) {
        return Outcome::fail_with("ansi-escape", format!("byte 0x1B at offset {i}"));
    }
    match stdout.len().cmp(&expected_len) {
        std::cmp::Ordering::Equal => Outcome::Pass,
        std::cmp::Ordering::Greater => Outcome::fail_with(
            "extra-bytes",
            format!("expected {expected_len} bytes, got {}", stdout.len()),
        ),
        std::cmp::Ordering::Less => Outcome::fail_with(
            "missing-bytes",
            format!("expected {expected_len} bytes, got {}", stdout.len()),
        ),
    }
}

/// The first byte must be `expected_first` (0x48 for the greeting).
pub fn check_no_bom(stdout: &[u8], expected_first: u8) -> Outcome {
    match stdout.first() {
        None => Outcome::fail("empty: no output"),
        Some(&b) if b == expected_first => Outcome::Pass,
        Some(_) if stdout.starts_with(&UTF8_BOM) => {
            Outcome::fail("bom: output starts with a UTF-8 byte-order mark")
        }
        Some(&b) => Outcome::fail_with(
            "first-byte",
            format!(
                "expected {}, got {}",
                show_byte(expected_first),
                show_byte(b)
            ),
        ),
    }
}
