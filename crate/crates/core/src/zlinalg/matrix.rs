use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::Zero;

use super::LinalgError;

#[derive(Clone, Debug)]
enum Storage {
    Dense(Vec<BigInt>),
    /// Rows of `(column, value)` pairs, sorted by column, no explicit zeros.
    Sparse(Vec<Vec<(usize, BigInt)>>),
}

/// An integer matrix, stored densely or as sparse rows.
///
/// Equality is element-wise and ignores the storage choice.
#[derive(Clone, Debug)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    storage: Storage,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, storage: Storage::Dense(vec![BigInt::zero(); rows * cols]) }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::from(1));
        }
        m
    }

    /// Dense matrix from rows of anything convertible to `BigInt`.
    ///
    /// Panics if the rows have different lengths.
    pub fn from_rows<T: Into<BigInt> + Clone>(cols: usize, rows: &[Vec<T>]) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged matrix rows");
            data.extend(r.iter().cloned().map(Into::into));
        }
        IntMatrix { rows: rows.len(), cols, storage: Storage::Dense(data) }
    }

    /// Sparse matrix from `(column, value)` rows. Entries may be unsorted and
    /// repeated; repeated columns are summed and zeros dropped.
    pub fn from_sparse_rows(cols: usize, rows: Vec<Vec<(usize, BigInt)>>) -> Self {
        let rows_n = rows.len();
        let normalized = rows
            .into_iter()
            .map(|mut r| {
                r.sort_by_key(|e| e.0);
                let mut out: Vec<(usize, BigInt)> = Vec::with_capacity(r.len());
                for (c, v) in r {
                    assert!(c < cols, "column {c} out of bounds ({cols})");
                    match out.last_mut() {
                        Some((lc, lv)) if *lc == c => *lv += v,
                        _ => out.push((c, v)),
                    }
                }
                out.retain(|(_, v)| !v.is_zero());
                out
            })
            .collect();
        IntMatrix { rows: rows_n, cols, storage: Storage::Sparse(normalized) }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_sparse(&self) -> bool {
        matches!(self.storage, Storage::Sparse(_))
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        match &self.storage {
            Storage::Dense(d) => d[r * self.cols + c].clone(),
            Storage::Sparse(s) => match s[r].binary_search_by_key(&c, |e| e.0) {
                Ok(i) => s[r][i].1.clone(),
                Err(_) => BigInt::zero(),
            },
        }
    }

    /// Sets an entry; converts sparse storage to dense first.
    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        if let Storage::Sparse(_) = self.storage {
            *self = self.to_dense();
        }
        if let Storage::Dense(d) = &mut self.storage {
            d[r * self.cols + c] = v;
        }
    }

    pub fn row(&self, r: usize) -> Vec<BigInt> {
        match &self.storage {
            Storage::Dense(d) => d[r * self.cols..(r + 1) * self.cols].to_vec(),
            Storage::Sparse(s) => {
                let mut out = vec![BigInt::zero(); self.cols];
                for (c, v) in &s[r] {
                    out[*c] = v.clone();
                }
                out
            }
        }
    }

    pub fn sparse_row(&self, r: usize) -> Vec<(usize, BigInt)> {
        match &self.storage {
            Storage::Sparse(s) => s[r].clone(),
            Storage::Dense(d) => d[r * self.cols..(r + 1) * self.cols]
                .iter()
                .enumerate()
                .filter(|(_, v)| !v.is_zero())
                .map(|(c, v)| (c, v.clone()))
                .collect(),
        }
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|r| self.row(r)).collect()
    }

    pub fn to_sparse_rows(&self) -> Vec<Vec<(usize, BigInt)>> {
        (0..self.rows).map(|r| self.sparse_row(r)).collect()
    }

    pub fn to_dense(&self) -> Self {
        let data = (0..self.rows).flat_map(|r| self.row(r)).collect();
        IntMatrix { rows: self.rows, cols: self.cols, storage: Storage::Dense(data) }
    }

    pub fn to_sparse(&self) -> Self {
        IntMatrix { rows: self.rows, cols: self.cols, storage: Storage::Sparse(self.to_sparse_rows()) }
    }

    pub fn nnz(&self) -> usize {
        match &self.storage {
            Storage::Sparse(s) => s.iter().map(Vec::len).sum(),
            Storage::Dense(d) => d.iter().filter(|v| !v.is_zero()).count(),
        }
    }

    pub fn transpose(&self) -> Self {
        let mut cols: Vec<Vec<(usize, BigInt)>> = vec![Vec::new(); self.cols];
        for r in 0..self.rows {
            for (c, v) in self.sparse_row(r) {
                cols[c].push((r, v));
            }
        }
        let t = IntMatrix::from_sparse_rows(self.rows, cols);
        if self.is_sparse() { t } else { t.to_dense() }
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.rows {
            return Err(LinalgError::DimensionMismatch {
                expected: self.cols,
                found: other.rows,
            });
        }
        let rhs = other.to_sparse_rows();
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        if let Storage::Dense(d) = &mut out.storage {
            for r in 0..self.rows {
                for (k, a) in self.sparse_row(r) {
                    for (c, b) in &rhs[k] {
                        d[r * other.cols + c] += &a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix.
    pub fn vec_mul(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![BigInt::zero(); self.cols];
        for (r, x) in v.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (c, a) in self.sparse_row(r) {
                out[c] += x * a;
            }
        }
        out
    }

    /// Matrix times column vector.
    pub fn mul_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|r| self.sparse_row(r).iter().map(|(c, a)| a * &v[*c]).sum())
            .collect()
    }

    /// Submatrix made of the given columns, in the given order.
    pub fn select_cols(&self, cols: &[usize]) -> IntMatrix {
        let mut pos = vec![usize::MAX; self.cols];
        for (i, &c) in cols.iter().enumerate() {
            pos[c] = i;
        }
        let rows = (0..self.rows)
            .map(|r| {
                self.sparse_row(r)
                    .into_iter()
                    .filter(|(c, _)| pos[*c] != usize::MAX)
                    .map(|(c, v)| (pos[c], v))
                    .collect()
            })
            .collect();
        IntMatrix::from_sparse_rows(cols.len(), rows)
    }

    pub fn stack(&self, other: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != other.cols {
            return Err(LinalgError::DimensionMismatch { expected: self.cols, found: other.cols });
        }
        let mut rows = self.to_sparse_rows();
        rows.extend(other.to_sparse_rows());
        Ok(IntMatrix::from_sparse_rows(self.cols, rows))
    }

    /// Serializes to the line format: `rows cols`, then one line per row.
    pub fn to_text(&self) -> String {
        let mut s = format!("{} {}\n", self.rows, self.cols);
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| v.to_string()).collect();
            s.push_str(&line.join(" "));
            s.push('\n');
        }
        s
    }

    pub fn from_text(text: &str) -> Result<Self, LinalgError> {
        let mut lines = text.split('\n');
        let header = lines.next().ok_or_else(|| LinalgError::Parse("empty input".into()))?;
        let dims: Vec<&str> = header.split(' ').collect();
        if dims.len() != 2 {
            return Err(LinalgError::Parse(format!("bad header {header:?}")));
        }
        let parse_dim = |s: &str| {
            s.parse::<usize>().map_err(|e| LinalgError::Parse(format!("bad dimension {s:?}: {e}")))
        };
        let (rows, cols) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            let line = lines
                .next()
                .ok_or_else(|| LinalgError::Parse(format!("missing row {r}")))?;
            if cols == 0 {
                if !line.is_empty() {
                    return Err(LinalgError::Parse(format!("row {r} should be empty")));
                }
                continue;
            }
            let before = data.len();
            for tok in line.split(' ') {
                let v = BigInt::from_str(tok)
                    .map_err(|e| LinalgError::Parse(format!("row {r}: bad entry {tok:?}: {e}")))?;
                data.push(v);
            }
            if data.len() - before != cols {
                return Err(LinalgError::Parse(format!(
                    "row {r} has {} entries, expected {cols}",
                    data.len() - before
                )));
            }
        }
        match lines.next() {
            Some("") if lines.next().is_none() => {}
            None if rows == 0 && header.is_empty() => {}
            _ => return Err(LinalgError::Parse("trailing data after last row".into())),
        }
        Ok(IntMatrix { rows, cols, storage: Storage::Dense(data) })
    }
}

impl PartialEq for IntMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows
            && self.cols == other.cols
            && (0..self.rows).all(|r| self.sparse_row(r) == other.sparse_row(r))
    }
}

impl Eq for IntMatrix {}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntMatrix {
        IntMatrix::from_rows(rows.first().map_or(0, Vec::len), rows)
    }

    #[test]
    fn sparse_and_dense_agree() {
        let d = m(&[vec![0, 3, 0], vec![-2, 0, 7]]);
        let s = d.to_sparse();
        assert!(s.is_sparse());
        for r in 0..2 {
            for c in 0..3 {
                assert_eq!(d.get(r, c), s.get(r, c));
            }
        }
        assert_eq!(d, s);
        assert_eq!(s.nnz(), 3);
    }

    #[test]
    #[should_panic]
    fn out_of_bounds_access_panics() {
        m(&[vec![1]]).get(0, 1);
    }

    #[test]
    fn text_format_exact() {
        let a = m(&[vec![1, -20], vec![7, 0]]);
        let t = a.to_text();
        assert!(t.starts_with("2 2\n1 -20\n"));
        assert_eq!(IntMatrix::from_text(&t).unwrap().to_text(), t);
        let big = "1 2\n123456789012345678901234567890 -5\n";
        assert_eq!(IntMatrix::from_text(big).unwrap().to_text(), big);
    }

    #[test]
    fn text_format_rejects_garbage() {
        assert!(IntMatrix::from_text("2 2\n1 2\n").is_err());
        assert!(IntMatrix::from_text("1 2\n1  2\n").is_err());
        assert!(IntMatrix::from_text("1 2\n1 2\n3\n").is_err());
        assert!(IntMatrix::from_text("x 2\n").is_err());
    }

    #[test]
    fn empty_shapes_round_trip() {
        for t in ["0 0\n", "0 3\n", "2 0\n\n\n"] {
            assert_eq!(IntMatrix::from_text(t).unwrap().to_text(), t);
        }
    }

    #[test]
    fn product_and_transpose() {
        let a = m(&[vec![1, 2], vec![3, 4]]);
        let b = a.mul(&a.transpose()).unwrap();
        assert_eq!(b, m(&[vec![5, 11], vec![11, 25]]));
    }
}
