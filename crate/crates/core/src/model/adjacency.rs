use crate::error::{Result, SbmError};

/// Node counts at or below this use a dense bitset; above it, compressed rows.
pub const DENSE_LIMIT: usize = 10_000;

/// Storage choice for an [`AdjacencyMatrix`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Layout {
    #[default]
    Auto,
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Storage {
    Dense { words_per_row: usize, bits: Vec<u64> },
    Sparse { offsets: Vec<usize>, columns: Vec<u32> },
}

/// Symmetric binary adjacency matrix with an empty diagonal.
#[derive(Debug, Clone)]
pub struct AdjacencyMatrix {
    n: usize,
    edge_count: usize,
    storage: Storage,
}

impl PartialEq for AdjacencyMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.edge_count == other.edge_count
            && (0..self.n).all(|i| self.neighbors(i).eq(other.neighbors(i)))
    }
}

impl Eq for AdjacencyMatrix {}

impl AdjacencyMatrix {
    pub fn empty(n: usize) -> Self {
        Self::from_edges(n, std::iter::empty()).expect("empty graph is valid")
    }

    /// Build from undirected edges. Each unordered pair may appear once, in
    /// either orientation; self-loops and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        Self::from_edges_with_layout(n, edges, Layout::Auto)
    }

    pub fn from_edges_with_layout<I>(n: usize, edges: I, layout: Layout) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        if n > u32::MAX as usize {
            return Err(SbmError::Input(format!("node count {n} exceeds u32 range")));
        }
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut edge_count = 0;
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(SbmError::Input(format!("edge ({i}, {j}) out of range for n = {n}")));
            }
            if i == j {
                return Err(SbmError::Input(format!("self-loop at node {i}")));
            }
            lists[i].push(j as u32);
            lists[j].push(i as u32);
            edge_count += 1;
        }
        for (i, list) in lists.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(SbmError::Input(format!("duplicate edge ({i}, {})", w[0])));
            }
        }
        let dense = match layout {
            Layout::Auto => n <= DENSE_LIMIT,
            Layout::Dense => true,
            Layout::Sparse => false,
        };
        let storage = if dense {
            let words_per_row = n.div_ceil(64);
            let mut bits = vec![0u64; words_per_row * n];
            for (i, list) in lists.iter().enumerate() {
                let row = &mut bits[i * words_per_row..(i + 1) * words_per_row];
                for &j in list {
                    row[j as usize / 64] |= 1u64 << (j % 64);
                }
            }
            Storage::Dense { words_per_row, bits }
        } else {
            let mut offsets = Vec::with_capacity(n + 1);
            offsets.push(0);
            let mut columns = Vec::with_capacity(2 * edge_count);
            for list in &lists {
                columns.extend_from_slice(list);
                offsets.push(columns.len());
            }
            Storage::Sparse { offsets, columns }
        };
        Ok(AdjacencyMatrix { n, edge_count, storage })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of undirected edges, i.e. ‖A‖₁ / 2.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.storage, Storage::Dense { .. })
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        if i >= self.n || j >= self.n {
            return false;
        }
        match &self.storage {
            Storage::Dense { words_per_row, bits } => {
                bits[i * words_per_row + j / 64] >> (j % 64) & 1 == 1
            }
            Storage::Sparse { offsets, columns } => {
                columns[offsets[i]..offsets[i + 1]].binary_search(&(j as u32)).is_ok()
            }
        }
    }

    pub fn degree(&self, i: usize) -> usize {
        match &self.storage {
            Storage::Dense { words_per_row, bits } => bits
                [i * words_per_row..(i + 1) * words_per_row]
                .iter()
                .map(|w| w.count_ones() as usize)
                .sum(),
            Storage::Sparse { offsets, .. } => offsets[i + 1] - offsets[i],
        }
    }

    /// Neighbours of `i` in increasing order.
    pub fn neighbors(&self, i: usize) -> Neighbors<'_> {
        match &self.storage {
            Storage::Dense { words_per_row, bits } => {
                let row = &bits[i * words_per_row..(i + 1) * words_per_row];
                Neighbors::Dense {
                    row,
                    word_index: 0,
                    current: row.first().copied().unwrap_or(0),
                }
            }
            Storage::Sparse { offsets, columns } => {
                Neighbors::Sparse(columns[offsets[i]..offsets[i + 1]].iter())
            }
        }
    }

    /// Upper-triangular edges `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |i| self.neighbors(i).filter(move |&j| j > i).map(move |j| (i, j)))
    }

    /// y = A x for a dense vector x.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.neighbors(i).map(|j| x[j]).sum();
        }
    }
}

pub enum Neighbors<'a> {
    Dense { row: &'a [u64], word_index: usize, current: u64 },
    Sparse(std::slice::Iter<'a, u32>),
}

impl Iterator for Neighbors<'_> {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        match self {
            Neighbors::Dense { row, word_index, current } => loop {
                if *current != 0 {
                    let bit = current.trailing_zeros() as usize;
                    *current &= *current - 1;
                    return Some(*word_index * 64 + bit);
                }
                *word_index += 1;
                *current = *row.get(*word_index)?;
            },
            Neighbors::Sparse(iter) => iter.next().map(|&j| j as usize),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(layout: Layout) -> AdjacencyMatrix {
        AdjacencyMatrix::from_edges_with_layout(130, (0..129).map(|i| (i + 1, i)), layout).unwrap()
    }

    #[test]
    fn layouts_agree() {
        let dense = path(Layout::Dense);
        let sparse = path(Layout::Sparse);
        assert!(dense.is_dense());
        assert!(!sparse.is_dense());
        assert_eq!(dense, sparse);
        for i in 0..130 {
            for j in 0..130 {
                assert_eq!(dense.has_edge(i, j), sparse.has_edge(i, j));
                assert_eq!(dense.has_edge(i, j), dense.has_edge(j, i));
            }
            assert_eq!(dense.degree(i), sparse.degree(i));
        }
        assert_eq!(dense.neighbors(64).collect::<Vec<_>>(), vec![63, 65]);
        assert_eq!(dense.edges().count(), 129);
        assert!(dense.edges().all(|(i, j)| i < j));
    }

    #[test]
    fn rejects_invalid_edges() {
        assert!(AdjacencyMatrix::from_edges(3, [(1, 1)]).is_err());
        assert!(AdjacencyMatrix::from_edges(3, [(0, 3)]).is_err());
        assert!(AdjacencyMatrix::from_edges(3, [(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn mul_vec_counts_neighbors() {
        let a = AdjacencyMatrix::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let mut y = [0.0; 3];
        a.mul_vec(&[1.0, 10.0, 100.0], &mut y);
        assert_eq!(y, [10.0, 101.0, 10.0]);
    }
}
