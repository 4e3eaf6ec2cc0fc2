//! Bit-packed GF(2) rows and rank computation.

/// One GF(2) row packed into 64-bit blocks, least significant bit first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitRow {
    blocks: Vec<u64>,
    len: usize,
}

impl BitRow {
    /// All-zero row of `len` columns.
    pub fn zeros(len: usize) -> Self {
        BitRow { blocks: vec![0; len.div_ceil(64)], len }
    }

    /// Number of columns.
    pub fn len(&self) -> usize {
        self.len
    }

    /// True when no column is set.
    pub fn is_empty(&self) -> bool {
        self.blocks.iter().all(|&b| b == 0)
    }

    /// Sets column `i` to 1.
    pub fn set(&mut self, i: usize) {
        assert!(i < self.len, "column {i} out of range for width {}", self.len);
        self.blocks[i / 64] |= 1u64 << (i % 64);
    }

    /// Reads column `i`.
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "column {i} out of range for width {}", self.len);
        (self.blocks[i / 64] >> (i % 64)) & 1 == 1
    }

    /// Adds `other` into `self` (XOR).
    pub fn add_assign(&mut self, other: &BitRow) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a ^= b;
        }
    }

    /// Index of the lowest set column, if any.
    pub fn first_set(&self) -> Option<usize> {
        for (w, &block) in self.blocks.iter().enumerate() {
            if block != 0 {
                return Some(w * 64 + block.trailing_zeros() as usize);
            }
        }
        None
    }

    /// Parity of the inner product with a dense 0/1 vector.
    pub fn dot_parity(&self, bits: &[u8]) -> bool {
        debug_assert_eq!(bits.len(), self.len);
        let mut acc = 0u64;
        for (w, &block) in self.blocks.iter().enumerate() {
            let mut b = block;
            while b != 0 {
                let i = w * 64 + b.trailing_zeros() as usize;
                acc ^= bits[i] as u64;
                b &= b - 1;
            }
        }
        acc & 1 == 1
    }

    /// Number of set columns.
    pub fn weight(&self) -> usize {
        self.blocks.iter().map(|b| b.count_ones() as usize).sum()
    }
}

/// GF(2) rank of the given rows. The input is copied; elimination works on
/// the copy by clearing the lowest set column of each new pivot row.
pub fn rank(rows: &[BitRow]) -> usize {
    let mut pivots: Vec<BitRow> = Vec::new();
    let mut pivot_cols: Vec<usize> = Vec::new();
    for row in rows {
        let mut r = row.clone();
        loop {
            match r.first_set() {
                None => break,
                Some(col) => match pivot_cols.iter().position(|&c| c == col) {
                    Some(i) => {
                        let p = pivots[i].clone();
                        r.add_assign(&p);
                    }
                    None => {
                        pivot_cols.push(col);
                        pivots.push(r);
                        break;
                    }
                },
            }
        }
    }
    pivots.len()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(len: usize, ones: &[usize]) -> BitRow {
        let mut r = BitRow::zeros(len);
        for &i in ones {
            r.set(i);
        }
        r
    }

    // 1. Identity-like rows have full rank.
    #[test]
    fn rank_of_independent_rows() {
        let rows = vec![row(4, &[0]), row(4, &[1]), row(4, &[2, 3])];
        assert_eq!(rank(&rows), 3);
    }

    // 2. A row equal to the sum of two others does not raise the rank.
    #[test]
    fn rank_detects_dependency() {
        let rows = vec![row(5, &[0, 1]), row(5, &[1, 2]), row(5, &[0, 2])];
        assert_eq!(rank(&rows), 2);
    }

    // 3. Duplicate and zero rows contribute nothing.
    #[test]
    fn rank_ignores_duplicates_and_zeros() {
        let rows = vec![row(3, &[0, 2]), row(3, &[0, 2]), row(3, &[])];
        assert_eq!(rank(&rows), 1);
    }

    // 4. Rank is invariant under row order.
    #[test]
    fn rank_is_order_invariant() {
        let a = vec![row(6, &[0, 1, 5]), row(6, &[1, 2]), row(6, &[0, 2, 5]), row(6, &[3])];
        let mut b = a.clone();
        b.reverse();
        assert_eq!(rank(&a), rank(&b));
    }

    // 5. Columns past 64 land in the second block.
    #[test]
    fn wide_rows_cross_block_boundary() {
        let mut r = BitRow::zeros(130);
        r.set(0);
        r.set(64);
        r.set(129);
        assert_eq!(r.weight(), 3);
        assert!(r.get(64) && r.get(129) && !r.get(128));
        assert_eq!(r.first_set(), Some(0));
        assert_eq!(rank(&[r.clone(), r]), 1);
    }

    // 6. dot_parity matches a dense recomputation.
    #[test]
    fn dot_parity_matches_dense() {
        let r = row(70, &[0, 3, 65, 69]);
        let mut bits = vec![0u8; 70];
        bits[0] = 1;
        bits[65] = 1;
        assert!(!r.dot_parity(&bits)); // two overlaps, even parity
        bits[3] = 1;
        assert!(r.dot_parity(&bits)); // three overlaps, odd parity
    }
}
