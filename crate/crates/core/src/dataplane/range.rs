use serde::{Deserialize, Serialize};

/// Window `[index, index + size)` into an unbounded sample stream.
///
/// A size of 0 marks samples that were skipped rather than processed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SampleRange {
    pub index: u64,
    pub size: u64,
}

impl SampleRange {
    pub const fn new(index: u64, size: u64) -> Self {
        SampleRange { index, size }
    }

    pub const fn skip(index: u64) -> Self {
        SampleRange { index, size: 0 }
    }

    pub const fn is_skip(&self) -> bool {
        self.size == 0
    }

    pub const fn end(&self) -> u64 {
        self.index + self.size
    }

    /// Whether two live ranges share at least one sample.
    pub fn overlaps(&self, other: &SampleRange) -> bool {
        self.size > 0 && other.size > 0 && self.index < other.end() && other.index < self.end()
    }

    /// The adjacent range of the same size.
    pub const fn next(&self) -> SampleRange {
        SampleRange::new(self.end(), self.size)
    }

    /// Parses `"<index> <size>"` (the form used on the command line and in
    /// host inputs); a colon is accepted as separator too.
    pub fn parse(s: &str) -> Option<SampleRange> {
        let mut it = s
            .split(|c: char| c == ':' || c.is_whitespace())
            .filter(|p| !p.is_empty());
        let index: u64 = it.next()?.parse().ok()?;
        let size = it.next()?.parse().ok()?;
        if it.next().is_some() {
            return None;
        }
        index.checked_add(size)?;
        Some(SampleRange::new(index, size))
    }
}

impl std::fmt::Display for SampleRange {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.index, self.size)
    }
}

/// Finds two overlapping live ranges in `ranges`, if any.
pub fn find_overlap(ranges: &[SampleRange]) -> Option<(SampleRange, SampleRange)> {
    let mut live: Vec<SampleRange> = ranges.iter().copied().filter(|r| !r.is_skip()).collect();
    live.sort();
    live.windows(2).find(|w| w[0].overlaps(&w[1])).map(|w| (w[0], w[1]))
}
