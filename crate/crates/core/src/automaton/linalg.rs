use num::{Num, Signed};

/// Solves `a x = b` by Gaussian elimination with partial pivoting. Works for
/// both `f64` and exact rationals. Returns `None` when `a` is singular.
pub(crate) fn solve<T>(mut a: Vec<Vec<T>>, mut b: Vec<T>) -> Option<Vec<T>>
where
    T: Clone + Num + Signed + PartialOrd,
{
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap_or(std::cmp::Ordering::Equal))?;
        if a[pivot][col].is_zero() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        let p = a[col][col].clone();
        for row in col + 1..n {
            if a[row][col].is_zero() {
                continue;
            }
            let f = a[row][col].clone() / p.clone();
            for k in col..n {
                let v = a[col][k].clone() * f.clone();
                a[row][k] = a[row][k].clone() - v;
            }
            let v = b[col].clone() * f;
            b[row] = b[row].clone() - v;
        }
    }
    let mut x = vec![T::zero(); n];
    for row in (0..n).rev() {
        let mut s = b[row].clone();
        for k in row + 1..n {
            s = s - a[row][k].clone() * x[k].clone();
        }
        x[row] = s / a[row][row].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num::rational::BigRational;
    use num::BigInt;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn solves_small_systems() {
        let x = solve(vec![vec![2.0, 1.0], vec![1.0, 3.0]], vec![3.0, 5.0]).unwrap();
        assert!((x[0] - 0.8).abs() < 1e-12 && (x[1] - 1.4).abs() < 1e-12);
        let x = solve(vec![vec![q(0, 1), q(1, 1)], vec![q(1, 2), q(1, 3)]], vec![q(1, 1), q(1, 1)]).unwrap();
        assert_eq!(x, vec![q(4, 3), q(1, 1)]);
        assert!(solve(vec![vec![1.0, 2.0], vec![2.0, 4.0]], vec![1.0, 2.0]).is_none());
    }
}
