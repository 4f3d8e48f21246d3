//! Symmetric matrix storage shared by correlation and sine matrices.

/// Dense row-major storage, or sparse rows holding only entries that differ
/// from `fill` (off the diagonal).
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum SymmetricStorage {
    Dense {
        n: usize,
        values: Vec<f64>,
    },
    Sparse {
        rows: Vec<Vec<(usize, f64)>>,
        diagonal: Vec<f64>,
        fill: f64,
    },
}

impl SymmetricStorage {
    pub(crate) fn get(&self, a: usize, b: usize) -> f64 {
        match self {
            SymmetricStorage::Dense { n, values } => values[a * n + b],
            SymmetricStorage::Sparse {
                rows,
                diagonal,
                fill,
            } => {
                if a == b {
                    return diagonal[a];
                }
                let row = &rows[a];
                match row.binary_search_by_key(&b, |&(c, _)| c) {
                    Ok(i) => row[i].1,
                    Err(_) => *fill,
                }
            }
        }
    }

    pub(crate) fn is_dense(&self) -> bool {
        matches!(self, SymmetricStorage::Dense { .. })
    }

    /// Upper-triangle entries `(a, b, value)` with `a < b`. Sparse storage
    /// yields only explicitly stored entries.
    pub(crate) fn upper_entries(&self) -> Box<dyn Iterator<Item = (usize, usize, f64)> + '_> {
        match self {
            SymmetricStorage::Dense { n, values } => {
                let n = *n;
                Box::new(
                    (0..n).flat_map(move |a| (a + 1..n).map(move |b| (a, b, values[a * n + b]))),
                )
            }
            SymmetricStorage::Sparse { rows, .. } => Box::new(rows.iter().enumerate().flat_map(
                |(a, row)| {
                    row.iter()
                        .filter(move |&&(b, _)| b > a)
                        .map(move |&(b, v)| (a, b, v))
                },
            )),
        }
    }

    /// Applies `f` to every entry, including the implicit fill value.
    pub(crate) fn map(&self, f: impl Fn(f64) -> f64) -> SymmetricStorage {
        match self {
            SymmetricStorage::Dense { n, values } => SymmetricStorage::Dense {
                n: *n,
                values: values.iter().map(|&v| f(v)).collect(),
            },
            SymmetricStorage::Sparse {
                rows,
                diagonal,
                fill,
            } => SymmetricStorage::Sparse {
                rows: rows
                    .iter()
                    .map(|row| row.iter().map(|&(b, v)| (b, f(v))).collect())
                    .collect(),
                diagonal: diagonal.iter().map(|&v| f(v)).collect(),
                fill: f(*fill),
            },
        }
    }
}
