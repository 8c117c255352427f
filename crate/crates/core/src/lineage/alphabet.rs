/// The standard amino-acid alphabet, in the column order used everywhere.
pub const AMINO: &[u8; 20] = b"ACDEFGHIKLMNPQRSTVWY";

/// Residue code of an alignment gap.
pub const GAP: u8 = 254;
/// Residue code of an unknown or non-standard residue.
pub const UNKNOWN: u8 = 255;

/// Largest supported alphabet size.
pub const MAX_K: usize = AMINO.len();

/// True for the two missing-data codes.
#[inline]
pub fn is_missing(code: u8) -> bool {
    code == GAP || code == UNKNOWN
}

/// Letter for a residue code under an alphabet of size `k`.
///
/// Alphabets with `k < 20` use the first `k` amino letters.
pub fn letter(code: u8) -> char {
    match code {
        GAP => '-',
        UNKNOWN => 'X',
        c => AMINO[c as usize] as char,
    }
}

/// Residue code for an input byte: letters are uppercased, `.` and `-` map
/// to [`GAP`], and anything outside the first `k` amino letters maps to
/// [`UNKNOWN`].
pub fn code_of(byte: u8, k: usize) -> u8 {
    match byte {
        b'-' | b'.' => GAP,
        _ => {
            let upper = byte.to_ascii_uppercase();
            match AMINO[..k].iter().position(|&a| a == upper) {
                Some(i) => i as u8,
                None => UNKNOWN,
            }
        }
    }
}

/// Render a row of residue codes.
pub fn render(codes: &[u8]) -> String {
    codes.iter().map(|&c| letter(c)).collect()
}

/// Parse an ungapped sequence under alphabet size `k`. Letters outside the
/// alphabet become [`UNKNOWN`].
pub fn encode(seq: &str, k: usize) -> Vec<u8> {
    seq.bytes().map(|b| code_of(b, k)).collect()
}
