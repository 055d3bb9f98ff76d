/// Fixed-capacity window of the most recent values, oldest first.
///
/// Values are written twice into a buffer of twice the capacity so the last
/// `m` values are always one contiguous slice.
#[derive(Debug, Clone)]
pub struct History {
    buf: Vec<f32>,
    head: usize,
    cap: usize,
}

impl History {
    /// A window of `cap` zeros.
    pub fn new(cap: usize) -> Self {
        assert!(cap > 0, "history capacity must be positive");
        Self {
            buf: vec![0.0; 2 * cap],
            head: 0,
            cap,
        }
    }

    pub fn push(&mut self, x: f32) {
        self.buf[self.head] = x;
        self.buf[self.head + self.cap] = x;
        self.head += 1;
        if self.head == self.cap {
            self.head = 0;
        }
    }

    /// The newest value, `0.0` before anything was pushed.
    pub fn last(&self) -> f32 {
        self.buf[self.head + self.cap - 1]
    }

    /// The newest `m` values, oldest first.
    pub fn latest(&self, m: usize) -> &[f32] {
        debug_assert!(m <= self.cap);
        let end = self.head + self.cap;
        &self.buf[end - m..end]
    }

    pub fn capacity(&self) -> usize {
        self.cap
    }
}
