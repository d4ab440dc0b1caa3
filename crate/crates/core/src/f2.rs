//! Small dense linear algebra over GF(2).

use crate::code_model::Bits;

/// Rank of the matrix whose rows are `rows`.
pub(crate) fn rank(rows: &[Bits]) -> usize {
    let mut m: Vec<Bits> = rows.to_vec();
    let Some(width) = m.first().map(|r| r.len()) else {
        return 0;
    };
    let mut r = 0;
    for col in 0..width {
        let Some(p) = (r..m.len()).find(|&i| m[i][col]) else {
            continue;
        };
        m.swap(r, p);
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && row[col] {
                *row ^= &pivot;
            }
        }
        r += 1;
        if r == m.len() {
            break;
        }
    }
    r
}

/// Given full-row-rank `rows` (each of length `n`), returns vectors `e_j` with
/// `rows[i] · e_j = [i == j]`. Returns `None` when the rows are dependent.
pub(crate) fn pure_errors(rows: &[Bits], n: usize) -> Option<Vec<Bits>> {
    let m = rows.len();
    // Augmented rows [H | I].
    let mut aug: Vec<Bits> = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut a = row.clone();
            a.resize(n + m, false);
            a.set(n + i, true);
            a
        })
        .collect();
    let mut pivots = Vec::with_capacity(m);
    let mut r = 0;
    for col in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m).find(|&i| aug[i][col]) else {
            continue;
        };
        aug.swap(r, p);
        let pivot = aug[r].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            if i != r && row[col] {
                *row ^= &pivot;
            }
        }
        pivots.push(col);
        r += 1;
    }
    if r < m {
        return None;
    }
    // Row k now reads [R_k | T_k] with R_k having a leading one at pivots[k]
    // and T H = R, so e_j = sum_k T[k][j] * unit(pivots[k]).
    let mut out = vec![Bits::repeat(false, n); m];
    for (k, row) in aug.iter().enumerate() {
        for (j, e) in out.iter_mut().enumerate() {
            if row[n + j] {
                e.set(pivots[k], true);
            }
        }
    }
    Some(out)
}
