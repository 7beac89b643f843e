use super::{DataplaneError, SampleRange};

/// Byte-addressed ring buffer between one producing and one consuming stage.
///
/// Cursors are absolute sample ordinals; `write - read` samples are buffered.
#[derive(Clone, Debug)]
pub struct Connector {
    pub rate: u64,
    pub width: usize,
    pub capacity: u64,
    read: u64,
    write: u64,
    buf: Vec<u8>,
}

impl Connector {
    /// Connector holding two frames of `rate` samples.
    pub fn new(rate: u64, width: usize) -> Self {
        Self::with_capacity(rate, width, 2 * rate)
    }

    pub fn with_capacity(rate: u64, width: usize, capacity: u64) -> Self {
        assert!(capacity >= rate && width > 0);
        Connector {
            rate,
            width,
            capacity,
            read: 0,
            write: 0,
            buf: vec![0; capacity as usize * width],
        }
    }

    /// Starts both cursors at `ordinal`, for edges created mid-stream.
    pub fn starting_at(mut self, ordinal: u64) -> Self {
        self.read = ordinal;
        self.write = ordinal;
        self
    }

    pub fn read_cursor(&self) -> u64 {
        self.read
    }

    pub fn write_cursor(&self) -> u64 {
        self.write
    }

    pub fn buffered(&self) -> u64 {
        self.write - self.read
    }

    pub fn free(&self) -> u64 {
        self.capacity - self.buffered()
    }

    /// The buffered window, as a range.
    pub fn window(&self) -> SampleRange {
        SampleRange::new(self.read, self.buffered())
    }

    fn copy_in(&mut self, at: u64, bytes: &[u8]) {
        let cap = self.buf.len();
        let mut off = (at % self.capacity) as usize * self.width;
        for chunk in bytes.chunks(cap) {
            let first = (cap - off).min(chunk.len());
            self.buf[off..off + first].copy_from_slice(&chunk[..first]);
            self.buf[..chunk.len() - first].copy_from_slice(&chunk[first..]);
            off = (off + chunk.len()) % cap;
        }
    }

    /// Appends `range` (which must start at the write cursor) with its bytes.
    pub fn push(&mut self, range: SampleRange, bytes: &[u8]) -> Result<(), DataplaneError> {
        if range.index != self.write {
            return Err(DataplaneError::StaleRange {
                stage: String::new(),
                range,
            });
        }
        if range.size > self.free() {
            return Err(DataplaneError::BufferOverrun {
                need: range.size,
                free: self.free(),
            });
        }
        if bytes.len() as u64 != range.size * self.width as u64 {
            return Err(DataplaneError::OutputLength {
                stage: String::new(),
                expected: range.size as usize * self.width,
                got: bytes.len(),
            });
        }
        self.copy_in(range.index, bytes);
        self.write = range.end();
        Ok(())
    }

    /// Copies the bytes of a buffered range without consuming them.
    pub fn peek(&self, range: SampleRange) -> Result<Vec<u8>, DataplaneError> {
        if range.index < self.read || range.end() > self.write {
            return Err(DataplaneError::InsufficientData {
                stage: String::new(),
                need: range.size,
                have: self.write.saturating_sub(range.index.max(self.read)),
            });
        }
        let cap = self.buf.len();
        let n = range.size as usize * self.width;
        let start = (range.index % self.capacity) as usize * self.width;
        let mut out = Vec::with_capacity(n);
        let first = (cap - start).min(n);
        out.extend_from_slice(&self.buf[start..start + first]);
        out.extend_from_slice(&self.buf[..n - first]);
        Ok(out)
    }

    /// Consumes `range`, which must start at the read cursor.
    pub fn pop(&mut self, range: SampleRange) -> Result<Vec<u8>, DataplaneError> {
        if range.index != self.read {
            return Err(DataplaneError::StaleRange {
                stage: String::new(),
                range,
            });
        }
        let bytes = self.peek(range)?;
        self.read = range.end();
        Ok(bytes)
    }

    /// Drops everything buffered; returns the dropped window.
    pub fn drain(&mut self) -> SampleRange {
        let w = self.window();
        self.read = self.write;
        w
    }
}
