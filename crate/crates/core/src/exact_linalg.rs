//! Dense exact linear algebra over Q, sized for Manin relation systems.

use num_rational::BigRational;
use num_traits::{One, Zero};

pub type Row = Vec<BigRational>;

/// Reduced row echelon form; returns pivot column indices.
pub fn rref(rows: &mut Vec<Row>) -> Vec<usize> {
    let nrows = rows.len();
    if nrows == 0 {
        return vec![];
    }
    let ncols = rows[0].len();
    let mut pivots = Vec::new();
    let mut r = 0usize;
    for c in 0..ncols {
        let mut pivot = None;
        for i in r..nrows {
            if !rows[i][c].is_zero() {
                pivot = Some(i);
                break;
            }
        }
        let Some(pi) = pivot else { continue };
        rows.swap(r, pi);
        let inv = BigRational::one() / rows[r][c].clone();
        for x in rows[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..nrows {
            if i != r && !rows[i][c].is_zero() {
                let f = rows[i][c].clone();
                for j in 0..ncols {
                    let t = &rows[r][j] * &f;
                    rows[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }
    pivots
}

/// Basis of the right kernel of the matrix.
pub fn kernel(mut rows: Vec<Row>, ncols: usize) -> Vec<Row> {
    let pivots = rref(&mut rows);
    let pivot_set: std::collections::HashSet<usize> = pivots.iter().copied().collect();
    let free: Vec<usize> = (0..ncols).filter(|c| !pivot_set.contains(c)).collect();
    let mut basis = Vec::new();
    for &f in &free {
        let mut v = vec![BigRational::zero(); ncols];
        v[f] = BigRational::one();
        for (ri, &pc) in pivots.iter().enumerate() {
            v[pc] = -rows[ri][f].clone();
        }
        basis.push(v);
    }
    basis
}

/// Solve A x = b for one solution, columns of a given as column vectors.
/// Returns None when inconsistent.
pub fn solve_columns(cols: &[Row], b: &Row) -> Option<Row> {
    let nrows = b.len();
    let ncols = cols.len();
    let mut rows: Vec<Row> = (0..nrows)
        .map(|i| {
            let mut r: Row = cols.iter().map(|c| c[i].clone()).collect();
            r.push(b[i].clone());
            r
        })
        .collect();
    let pivots = rref(&mut rows);
    // inconsistent if a pivot lands in the augmented column
    if pivots.contains(&ncols) {
        return None;
    }
    let mut x = vec![BigRational::zero(); ncols];
    for (ri, &pc) in pivots.iter().enumerate() {
        x[pc] = rows[ri][ncols].clone();
    }
    Some(x)
}

/// Basis of the column space, as column vectors.
pub fn column_space(cols: &[Row]) -> Vec<Row> {
    if cols.is_empty() {
        return vec![];
    }
    let nrows = cols[0].len();
    let mut rows: Vec<Row> = cols.to_vec();
    let pivots = rref(&mut rows);
    // rows of the rref of the transpose span the column space
    let rank = pivots.len();
    (0..rank).map(|i| (0..nrows).map(|j| rows[i][j].clone()).collect()).collect()
}

pub fn mat_vec(rows: &[Row], v: &Row) -> Row {
    rows.iter()
        .map(|r| {
            let mut acc = BigRational::zero();
            for (a, b) in r.iter().zip(v) {
                acc += a * b;
            }
            acc
        })
        .collect()
}
