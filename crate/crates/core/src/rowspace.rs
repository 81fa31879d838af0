//! Exact row-space comparison through reduced row echelon form.

use num_traits::Zero;

use crate::rational::Rational;

/// Reduced row echelon form with zero rows dropped.
pub fn rref(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let mut a: Vec<Vec<Rational>> = rows.to_vec();
    let width = a.first().map_or(0, Vec::len);
    let mut lead = 0;
    for col in 0..width {
        let Some(p) = (lead..a.len()).find(|&r| !a[r][col].is_zero()) else {
            continue;
        };
        a.swap(lead, p);
        let inv = a[lead][col].recip();
        for v in a[lead].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = a[lead].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r == lead || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                *v -= &f * p;
            }
        }
        lead += 1;
        if lead == a.len() {
            break;
        }
    }
    a.truncate(lead);
    a
}

pub fn rank(rows: &[Vec<Rational>]) -> usize {
    rref(rows).len()
}

/// True when both matrices span the same row space.
pub fn same_row_space(a: &[Vec<Rational>], b: &[Vec<Rational>]) -> bool {
    rref(a) == rref(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;

    fn m(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
        rows.iter().map(|r| r.iter().map(|&v| int(v)).collect()).collect()
    }

    #[test]
    fn rref_of_dependent_rows() {
        let a = m(&[&[1, 2, 3], &[2, 4, 6], &[0, 1, 1]]);
        assert_eq!(rref(&a), m(&[&[1, 0, 1], &[0, 1, 1]]));
        assert_eq!(rank(&a), 2);
    }

    #[test]
    fn row_operations_preserve_space() {
        let a = m(&[&[1, 2, 3], &[0, 1, 1]]);
        let b = m(&[&[1, 3, 4], &[2, 5, 7]]);
        assert!(same_row_space(&a, &b));
        let c = m(&[&[1, 3, 4], &[2, 5, 8]]);
        assert!(!same_row_space(&a, &c));
    }
}
