//! Sparse-table range-minimum index over a fixed array of reals.
//!
//! Level k stores the minimum over every window of length 2^k, so a query
//! on [i, j] is the smaller of two overlapping power-of-two windows. Build
//! is O(m log m), queries are O(1), and results are exact minima, not
//! approximations, because entries are copied, never recombined through
//! arithmetic.

#[derive(Debug, Clone)]
pub struct RmqTable {
    len: usize,
    /// levels[k][i] = min of values[i..i + 2^k], row k covering all valid i.
    levels: Vec<Vec<f64>>,
}

impl RmqTable {
    pub fn build(values: &[f64]) -> RmqTable {
        let len = values.len();
        let mut levels = vec![values.to_vec()];
        let mut width = 1usize;
        while 2 * width <= len {
            let prev = levels.last().unwrap();
            let next: Vec<f64> = (0..=len - 2 * width)
                .map(|i| prev[i].min(prev[i + width]))
                .collect();
            levels.push(next);
            width *= 2;
        }
        RmqTable { len, levels }
    }

    /// Minimum of values[i..=j]; i <= j < len.
    pub fn min(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i <= j && j < self.len);
        let span = j - i + 1;
        let k = usize::BITS as usize - 1 - span.leading_zeros() as usize;
        let w = 1usize << k;
        self.levels[k][i].min(self.levels[k][j + 1 - w])
    }
}
