//! Small shared helpers: seed derivation and stable real formatting.

/// splitmix64 finalizer; used to derive independent RNG seeds from a master
/// seed plus a stream tag so parallel work never shares a stream.
pub fn mix_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Formats a real with 9 significant digits so serialized files are
/// bit-stable across runs and platforms.
pub fn fmt_real(v: f64) -> String {
    if v == 0.0 {
        return "0.0".to_string();
    }
    let exp = v.abs().log10().floor() as i32;
    let prec = (8 - exp).max(0) as usize;
    format!("{v:.prec$}")
}

/// Rounds `v` to the 9-significant-digit grid used by [`fmt_real`], so that
/// values survive a serialize/parse round trip exactly.
pub fn quantize_real(v: f64) -> f64 {
    fmt_real(v).parse().expect("fmt_real emits valid floats")
}
