//! Dense bit-packed matrices over GF(2).

/// Row-major GF(2) matrix with each row packed into `u64` words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        Self { rows, cols, words, data: vec![0; rows * words] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, row: usize, col: usize) -> bool {
        (self.data[row * self.words + col / 64] >> (col % 64)) & 1 == 1
    }

    /// Adds 1 (mod 2) at `(row, col)`.
    pub fn toggle(&mut self, row: usize, col: usize) {
        self.data[row * self.words + col / 64] ^= 1 << (col % 64);
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        if self.get(row, col) != value {
            self.toggle(row, col);
        }
    }

    /// Rank by forward elimination on a scratch copy.
    pub fn rank(&self) -> usize {
        let mut m = self.data.clone();
        let w = self.words;
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (word, bit) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..self.rows).find(|&r| m[r * w + word] & bit != 0) else {
                continue;
            };
            if pivot != rank {
                for k in 0..w {
                    m.swap(pivot * w + k, rank * w + k);
                }
            }
            for r in rank + 1..self.rows {
                if m[r * w + word] & bit != 0 {
                    for k in word..w {
                        let v = m[rank * w + k];
                        m[r * w + k] ^= v;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}
