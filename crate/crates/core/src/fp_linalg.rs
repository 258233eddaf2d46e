//! Dense linear algebra over the prime field `F_p`.

/// Row vectors over `F_p`, residues in `0..p`.
pub type FpMat = Vec<Vec<u64>>;

fn inv(a: u64, p: u64) -> u64 {
    let mut r = 1;
    let mut b = a % p;
    let mut e = p - 2;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Reduced row echelon form; returns the nonzero rows and pivot columns.
pub fn rref(rows: &FpMat, p: u64) -> (FpMat, Vec<usize>) {
    let mut m: FpMat = rows.iter().map(|r| r.iter().map(|x| x % p).collect()).collect();
    let ncols = m.first().map_or(0, Vec::len);
    let mut pivots = Vec::new();
    let mut row = 0;
    for col in 0..ncols {
        let Some(piv) = (row..m.len()).find(|&i| m[i][col] != 0) else {
            continue;
        };
        m.swap(row, piv);
        let s = inv(m[row][col], p);
        for x in m[row].iter_mut() {
            *x = *x * s % p;
        }
        for i in 0..m.len() {
            if i != row && m[i][col] != 0 {
                let f = m[i][col];
                for j in 0..ncols {
                    m[i][j] = (m[i][j] + (p - f) * m[row][j]) % p;
                }
            }
        }
        pivots.push(col);
        row += 1;
        if row == m.len() {
            break;
        }
    }
    m.truncate(row);
    (m, pivots)
}

pub fn rank(rows: &FpMat, p: u64) -> usize {
    rref(rows, p).0.len()
}

/// Basis of `{x : M·x = 0}` for `M` with `ncols` columns.
pub fn kernel(rows: &FpMat, ncols: usize, p: u64) -> FpMat {
    let (r, pivots) = rref(rows, p);
    let free: Vec<usize> = (0..ncols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![0u64; ncols];
            v[f] = 1;
            for (row, &pc) in r.iter().zip(&pivots) {
                v[pc] = (p - row[f]) % p;
            }
            v
        })
        .collect()
}

/// Subspace of `F_p^n` in canonical (reduced echelon) form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subspace {
    pub n: usize,
    pub p: u64,
    pub basis: FpMat,
}

impl Subspace {
    pub fn span(n: usize, p: u64, vectors: &[Vec<u64>]) -> Subspace {
        let (basis, _) = rref(&vectors.to_vec(), p);
        Subspace { n, p, basis }
    }

    pub fn zero(n: usize, p: u64) -> Subspace {
        Subspace { n, p, basis: Vec::new() }
    }

    pub fn full(n: usize, p: u64) -> Subspace {
        let id: FpMat = (0..n).map(|i| (0..n).map(|j| u64::from(i == j)).collect()).collect();
        Subspace { n, p, basis: id }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut rows = self.basis.clone();
        rows.push(v.to_vec());
        rank(&rows, self.p) == self.dim()
    }

    /// `{x : x·G·w = 0 for all w in self}` where `self` lives on the
    /// right-hand side of the bilinear form `G`.
    pub fn left_orthogonal(&self, gram: &FpMat) -> Subspace {
        let p = self.p;
        let n = gram.len();
        // constraint rows: (G·w)^t
        let rows: FpMat = self
            .basis
            .iter()
            .map(|w| (0..n).map(|i| (0..w.len()).fold(0, |acc, j| (acc + gram[i][j] * w[j]) % p)).collect())
            .collect();
        Subspace::span(n, p, &kernel(&rows, n, p))
    }

    /// `{y : x·G·y = 0 for all x in self}`.
    pub fn right_orthogonal(&self, gram: &FpMat) -> Subspace {
        let p = self.p;
        let m = gram.first().map_or(0, Vec::len);
        let rows: FpMat = self
            .basis
            .iter()
            .map(|x| (0..m).map(|j| (0..x.len()).fold(0, |acc, i| (acc + x[i] * gram[i][j]) % p)).collect())
            .collect();
        Subspace::span(m, p, &kernel(&rows, m, p))
    }
}

/// All vectors of `F_p^n` in lexicographic order of coefficient tuples.
pub fn all_vectors(n: usize, p: u64) -> impl Iterator<Item = Vec<u64>> {
    let total = p.pow(n as u32);
    (0..total).map(move |mut idx| {
        let mut v = vec![0u64; n];
        for slot in v.iter_mut().rev() {
            *slot = idx % p;
            idx /= p;
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_and_rank() {
        let m = vec![vec![1, 2, 0], vec![2, 1, 0]];
        assert_eq!(rank(&m, 3), 1);
        let k = kernel(&m, 3, 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!((v[0] + 2 * v[1]) % 3, 0);
        }
    }

    #[test]
    fn orthogonal_twice_recovers() {
        let g = vec![vec![1, 0, 2], vec![0, 1, 1], vec![1, 1, 1]];
        let w = Subspace::span(3, 5, &[vec![1, 2, 3]]);
        let perp = w.left_orthogonal(&g);
        assert_eq!(perp.dim(), 2);
        assert_eq!(perp.right_orthogonal(&g), w);
    }

    #[test]
    fn vectors_enumerate_in_order() {
        let v: Vec<_> = all_vectors(2, 3).collect();
        assert_eq!(v.len(), 9);
        assert_eq!(v[1], vec![0, 1]);
        assert_eq!(v[3], vec![1, 0]);
    }
}
