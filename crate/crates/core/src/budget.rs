/// Policy-call accounting against a hard limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    limit: usize,
    used: usize,
}

impl Budget {
    pub fn new(limit: usize) -> Self {
        Self { limit, used: 0 }
    }

    pub fn limit(&self) -> usize {
        self.limit
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn remaining(&self) -> usize {
        self.limit - self.used
    }

    pub fn is_exhausted(&self) -> bool {
        self.used >= self.limit
    }

    /// Takes one call if any remain.
    pub fn try_consume(&mut self) -> bool {
        if self.is_exhausted() {
            false
        } else {
            self.used += 1;
            true
        }
    }

    pub(crate) fn charge(&mut self, calls: usize) {
        assert!(calls <= self.remaining(), "charged {calls} calls with {} remaining", self.remaining());
        self.used += calls;
    }
}
