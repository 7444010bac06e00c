use crate::error::{Error, Result};
use crate::signal::{Signal, MIN_SIGNAL_LEN};

/// Default segment length (0.1 s at 64 kHz).
pub const DEFAULT_SEGMENT_LEN: usize = 6400;

/// Number of complete segments in a recording of `samples` samples.
pub fn segment_count(samples: usize, segment_len: usize) -> usize {
    samples.checked_div(segment_len).unwrap_or(0)
}

/// Cuts a recording into consecutive non-overlapping segments, dropping the
/// trailing remainder. A recording shorter than one segment yields no segments.
pub fn segment(recording: &Signal, segment_len: usize) -> Result<Vec<Signal>> {
    if segment_len < MIN_SIGNAL_LEN {
        return Err(Error::Config(format!(
            "segment length must be at least {MIN_SIGNAL_LEN}, got {segment_len}"
        )));
    }
    recording
        .samples()
        .chunks_exact(segment_len)
        .map(|chunk| Signal::new(chunk.to_vec(), recording.fs()))
        .collect()
}
