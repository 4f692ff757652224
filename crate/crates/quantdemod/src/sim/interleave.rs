//! Block interleaver: bits are written into a rows-by-cols array row by
//! row and read out column by column, so adjacent coded bits land in
//! different symbols.

use crate::error::{QuantError, Result};

#[derive(Clone, Copy, Debug)]
pub struct BlockInterleaver {
    rows: usize,
    cols: usize,
}

impl BlockInterleaver {
    pub fn new(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(QuantError::InvalidConfig(format!(
                "interleaver dimensions {rows}x{cols} must be positive"
            )));
        }
        Ok(Self { rows, cols })
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Output position i reads row (i mod rows), column (i div rows) of
    /// the row-major input.
    pub fn permute<T: Copy>(&self, input: &[T]) -> Result<Vec<T>> {
        if input.len() != self.len() {
            return Err(QuantError::InvalidConfig(format!(
                "block length {} does not fill a {}x{} interleaver",
                input.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..input.len()).map(|i| input[(i % self.rows) * self.cols + i / self.rows]).collect())
    }

    /// Inverse permutation: scatter instead of gather.
    pub fn unpermute<T: Copy + Default>(&self, input: &[T]) -> Result<Vec<T>> {
        if input.len() != self.len() {
            return Err(QuantError::InvalidConfig(format!(
                "block length {} does not fill a {}x{} interleaver",
                input.len(),
                self.rows,
                self.cols
            )));
        }
        let mut out = vec![T::default(); input.len()];
        for (i, &v) in input.iter().enumerate() {
            out[(i % self.rows) * self.cols + i / self.rows] = v;
        }
        Ok(out)
    }
}
