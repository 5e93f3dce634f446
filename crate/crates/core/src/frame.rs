//! Frame identity: a sequential index paired with a capture timestamp.
//!
//! Both are carried together because the pipeline mixes index arithmetic
//! (previous stored frame) with time arithmetic (islands, the temporal
//! exclusion window).

/// Identifier of one stereo frame in a sequence. Indices and timestamps are
/// strictly increasing along a sequence; consumers that store frames enforce
/// this on insert.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FrameId {
    pub index: u64,
    /// Seconds from sequence start.
    pub timestamp: f64,
}

impl FrameId {
    pub fn new(index: u64, timestamp: f64) -> Self {
        Self { index, timestamp }
    }
}

impl std::fmt::Display for FrameId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "frame {} @ {:.3}s", self.index, self.timestamp)
    }
}
