//! Ground-truth adjacency container.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Symmetric n x n bit grid with a zero diagonal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdjacencyMatrix {
    pub n: usize,
    words: Vec<u64>,
}

impl AdjacencyMatrix {
    pub fn new(n: usize) -> Self {
        let row_words = (n + 63) / 64;
        AdjacencyMatrix {
            n,
            words: vec![0; n * row_words],
        }
    }

    fn row_words(&self) -> usize {
        (self.n + 63) / 64
    }

    pub fn get(&self, u: usize, v: usize) -> bool {
        self.words[u * self.row_words() + v / 64] & (1u64 << (v % 64)) != 0
    }

    /// Sets both (u, v) and (v, u); ignores the diagonal.
    pub fn set(&mut self, u: usize, v: usize, bit: bool) {
        if u == v {
            return;
        }
        let rw = self.row_words();
        for (a, b) in [(u, v), (v, u)] {
            let w = &mut self.words[a * rw + b / 64];
            if bit {
                *w |= 1u64 << (b % 64);
            } else {
                *w &= !(1u64 << (b % 64));
            }
        }
    }

    pub fn edge_count(&self) -> usize {
        let mut c = 0;
        for u in 0..self.n {
            for v in u + 1..self.n {
                if self.get(u, v) {
                    c += 1;
                }
            }
        }
        c
    }

    pub fn degree(&self, u: usize) -> usize {
        (0..self.n).filter(|&v| self.get(u, v)).count()
    }

    pub fn validate(&self) -> Result<()> {
        for u in 0..self.n {
            if self.get(u, u) {
                return Err(Error::arg("nonzero diagonal"));
            }
            for v in 0..u {
                if self.get(u, v) != self.get(v, u) {
                    return Err(Error::arg("asymmetric matrix"));
                }
            }
        }
        Ok(())
    }

    /// Row of `u` as a bit vector (diagonal bit is 0).
    pub fn row(&self, u: usize) -> Vec<bool> {
        (0..self.n).map(|v| self.get(u, v)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn set_get_symmetric() {
        let mut m = AdjacencyMatrix::new(70);
        m.set(3, 65, true);
        assert!(m.get(3, 65));
        assert!(m.get(65, 3));
        m.set(5, 5, true);
        assert!(!m.get(5, 5));
        assert_eq!(m.edge_count(), 1);
        m.validate().unwrap();
    }
}
