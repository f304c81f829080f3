//! Constraint matrix kept simultaneously in row-major and column-major form.

use crate::numerics::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct Entry<R> {
    pub index: usize,
    pub value: R,
}

impl<R> Entry<R> {
    pub fn new(index: usize, value: R) -> Self {
        Entry { index, value }
    }
}

/// Both views hold the same `(row, col, value)` triples. Rows are sorted by
/// column index and columns by row index; no stored value is zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseMatrix<R> {
    rows: Vec<Vec<Entry<R>>>,
    cols: Vec<Vec<Entry<R>>>,
    nnz: usize,
}

fn find<R>(list: &[Entry<R>], index: usize) -> Result<usize, usize> {
    list.binary_search_by_key(&index, |e| e.index)
}

impl<R: Real> SparseMatrix<R> {
    pub fn new(nrows: usize, ncols: usize) -> Self {
        SparseMatrix {
            rows: vec![Vec::new(); nrows],
            cols: vec![Vec::new(); ncols],
            nnz: 0,
        }
    }

    /// Builds from triplets. Duplicate positions are summed, zeros dropped.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: Vec<(usize, usize, R)>) -> Self {
        let mut sorted = triplets;
        sorted.sort_by_key(|a| (a.0, a.1));
        let mut m = SparseMatrix::new(nrows, ncols);
        let mut merged: Vec<(usize, usize, R)> = Vec::with_capacity(sorted.len());
        for (r, c, v) in sorted {
            assert!(r < nrows && c < ncols, "triplet ({r}, {c}) out of range");
            match merged.last_mut() {
                Some(last) if last.0 == r && last.1 == c => last.2 = last.2.clone() + v,
                _ => merged.push((r, c, v)),
            }
        }
        for (r, c, v) in merged {
            if v.is_zero() {
                continue;
            }
            m.rows[r].push(Entry::new(c, v.clone()));
            m.cols[c].push(Entry::new(r, v));
            m.nnz += 1;
        }
        for col in &mut m.cols {
            col.sort_by_key(|e| e.index);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn nnz(&self) -> usize {
        self.nnz
    }

    pub fn row(&self, row: usize) -> &[Entry<R>] {
        &self.rows[row]
    }

    pub fn col(&self, col: usize) -> &[Entry<R>] {
        &self.cols[col]
    }

    pub fn get(&self, row: usize, col: usize) -> Option<&R> {
        let list = &self.rows[row];
        find(list, col).ok().map(|p| &list[p].value)
    }

    /// Sets an entry; a zero value removes it. Returns the previous value.
    pub fn set(&mut self, row: usize, col: usize, value: R) -> Option<R> {
        if value.is_zero() {
            return self.remove(row, col);
        }
        let old = match find(&self.rows[row], col) {
            Ok(p) => Some(std::mem::replace(&mut self.rows[row][p].value, value.clone())),
            Err(p) => {
                self.rows[row].insert(p, Entry::new(col, value.clone()));
                None
            }
        };
        match find(&self.cols[col], row) {
            Ok(p) => self.cols[col][p].value = value,
            Err(p) => self.cols[col].insert(p, Entry::new(row, value)),
        }
        if old.is_none() {
            self.nnz += 1;
        }
        old
    }

    pub fn remove(&mut self, row: usize, col: usize) -> Option<R> {
        let p = find(&self.rows[row], col).ok()?;
        let old = self.rows[row].remove(p).value;
        if let Ok(q) = find(&self.cols[col], row) {
            self.cols[col].remove(q);
        }
        self.nnz -= 1;
        Some(old)
    }

    /// Removes every entry of a row from both views; returns the removed entries.
    pub fn clear_row(&mut self, row: usize) -> Vec<Entry<R>> {
        let entries = std::mem::take(&mut self.rows[row]);
        for e in &entries {
            if let Ok(q) = find(&self.cols[e.index], row) {
                self.cols[e.index].remove(q);
            }
        }
        self.nnz -= entries.len();
        entries
    }

    pub fn clear_col(&mut self, col: usize) -> Vec<Entry<R>> {
        let entries = std::mem::take(&mut self.cols[col]);
        for e in &entries {
            if let Ok(q) = find(&self.rows[e.index], col) {
                self.rows[e.index].remove(q);
            }
        }
        self.nnz -= entries.len();
        entries
    }

    /// Consistency audit: both views agree, are sorted, and hold no zeros.
    pub fn check_consistency(&self) -> Result<(), String> {
        let mut from_rows = Vec::with_capacity(self.nnz);
        for (r, row) in self.rows.iter().enumerate() {
            for w in row.windows(2) {
                if w[0].index >= w[1].index {
                    return Err(format!("row {r} not strictly sorted"));
                }
            }
            for e in row {
                if e.value.is_zero() {
                    return Err(format!("explicit zero at ({r}, {})", e.index));
                }
                from_rows.push((r, e.index, e.value.clone()));
            }
        }
        let mut from_cols = Vec::with_capacity(self.nnz);
        for (c, col) in self.cols.iter().enumerate() {
            for w in col.windows(2) {
                if w[0].index >= w[1].index {
                    return Err(format!("column {c} not strictly sorted"));
                }
            }
            for e in col {
                from_cols.push((e.index, c, e.value.clone()));
            }
        }
        from_cols.sort_by_key(|a| (a.0, a.1));
        if from_rows.len() != self.nnz || from_cols.len() != self.nnz {
            return Err(format!(
                "nnz counter {} disagrees with views ({} / {})",
                self.nnz,
                from_rows.len(),
                from_cols.len()
            ));
        }
        if from_rows != from_cols {
            return Err("row and column views differ".to_string());
        }
        Ok(())
    }

    pub fn triplets(&self) -> Vec<(usize, usize, R)> {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(r, row)| row.iter().map(move |e| (r, e.index, e.value.clone())))
            .collect()
    }
}
