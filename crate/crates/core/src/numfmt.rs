//! Deterministic decimal formatting for emitted files.

/// Formats `value` with at most `decimals` fractional digits, trimming trailing
/// zeros. Negative zero prints as `0`. Non-finite values print as `0`; callers
/// validate finiteness before emitting.
pub fn fixed(value: f64, decimals: usize) -> String {
    if !value.is_finite() {
        return "0".to_string();
    }
    let mut s = format!("{:.*}", decimals, value);
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}
