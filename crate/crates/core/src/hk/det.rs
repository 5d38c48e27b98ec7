use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use super::HkError;

/// Entries at or above this magnitude go straight to the wide-integer path.
const WIDE_ENTRY: i128 = 1 << 40;
/// Orders from which the wide path is used unconditionally.
const WIDE_ORDER: usize = 8;
pub const MAX_K: usize = 10;

/// Fraction-free Gaussian elimination in i128; `None` on overflow.
fn bareiss_i128(mut a: Vec<Vec<i128>>) -> Option<i128> {
    let n = a.len();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for p in 0..n {
        if a[p][p] == 0 {
            let Some(r) = (p + 1..n).find(|&r| a[r][p] != 0) else {
                return Some(0);
            };
            a.swap(p, r);
            sign = -sign;
        }
        for i in p + 1..n {
            for j in p + 1..n {
                let t = a[i][j].checked_mul(a[p][p])?.checked_sub(a[i][p].checked_mul(a[p][j])?)?;
                a[i][j] = t / prev;
            }
        }
        prev = a[p][p];
    }
    a[n - 1][n - 1].checked_mul(sign)
}

fn bareiss_big(a: &[Vec<i128>]) -> BigInt {
    let n = a.len();
    let mut m: Vec<Vec<BigInt>> = a.iter().map(|r| r.iter().map(|&v| BigInt::from(v)).collect()).collect();
    let mut negate = false;
    let mut prev = BigInt::one();
    for p in 0..n {
        if m[p][p].is_zero() {
            let Some(r) = (p + 1..n).find(|&r| !m[r][p].is_zero()) else {
                return BigInt::zero();
            };
            m.swap(p, r);
            negate = !negate;
        }
        for i in p + 1..n {
            for j in p + 1..n {
                let t = &m[i][j] * &m[p][p] - &m[i][p] * &m[p][j];
                m[i][j] = t / &prev;
            }
        }
        prev = m[p][p].clone();
    }
    let d = m[n - 1][n - 1].clone();
    if negate {
        -d
    } else {
        d
    }
}

/// Exact determinant of a square integer matrix.
pub fn det_exact(a: &[Vec<i128>]) -> BigInt {
    if a.is_empty() {
        return BigInt::one();
    }
    let wide = a.len() >= WIDE_ORDER || a.iter().flatten().any(|v| v.unsigned_abs() >= WIDE_ENTRY as u128);
    if !wide {
        if let Some(d) = bareiss_i128(a.to_vec()) {
            return BigInt::from(d);
        }
    }
    bareiss_big(a)
}

/// The k×k matrix with entry (i, j) = j^i, rows i = 1..k, columns j = 1..k.
pub fn power_matrix(k: usize) -> Vec<Vec<i128>> {
    (1..=k as u32).map(|i| (1..=k as i128).map(|j| j.pow(i)).collect()).collect()
}

/// 1! 2! ⋯ k!.
pub fn superfactorial(k: usize) -> BigInt {
    let mut out = BigInt::one();
    let mut fact = BigInt::one();
    for j in 1..=k {
        fact *= j;
        out *= &fact;
    }
    out
}

fn check_k(k: usize) -> Result<(), HkError> {
    if k == 0 || k > MAX_K {
        return Err(HkError::InvalidInstance(format!("k = {k} outside 1..={MAX_K}")));
    }
    Ok(())
}

/// Δ_0 as a determinant, checked against 1!2!⋯k!.
pub fn delta0(k: usize) -> Result<BigInt, HkError> {
    check_k(k)?;
    let d = det_exact(&power_matrix(k));
    let p = superfactorial(k);
    if d != p {
        return Err(HkError::Identity { k, det: d.to_string(), product: p.to_string() });
    }
    Ok(d)
}

/// Δ_0 as an i128 (fits for k ≤ 10).
pub fn delta0_i128(k: usize) -> Result<i128, HkError> {
    Ok(delta0(k)?.to_i128().expect("1!⋯10! fits in i128"))
}

/// Δ_j: column j of the power matrix replaced by the targets.
pub fn delta_j(k: usize, j: usize, targets: &[i128]) -> Result<BigInt, HkError> {
    check_k(k)?;
    if j == 0 || j > k || targets.len() != k {
        return Err(HkError::InvalidInstance(format!("column {j} with {} targets for k = {k}", targets.len())));
    }
    let mut m = power_matrix(k);
    for (row, &t) in m.iter_mut().zip(targets) {
        row[j - 1] = t;
    }
    Ok(det_exact(&m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cofactor(a: &[Vec<i128>]) -> i128 {
        if a.len() == 1 {
            return a[0][0];
        }
        (0..a.len())
            .map(|c| {
                let minor: Vec<Vec<i128>> = a[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, v)| *v).collect())
                    .collect();
                let s = if c % 2 == 0 { 1 } else { -1 };
                s * a[0][c] * cofactor(&minor)
            })
            .sum()
    }

    #[test]
    fn small_cases() {
        assert_eq!(delta0(1).unwrap(), BigInt::from(1));
        assert_eq!(delta0(3).unwrap(), BigInt::from(12));
        assert_eq!(cofactor(&power_matrix(3)), 12);
        assert_eq!(delta0(5).unwrap(), BigInt::from(34560));
        assert_eq!(delta_j(2, 1, &[5, 13]).unwrap(), BigInt::from(-6));
        assert_eq!(delta_j(2, 2, &[5, 13]).unwrap(), BigInt::from(8));
    }

    #[test]
    fn wide_path_agrees() {
        for k in 1..=7 {
            let m = power_matrix(k);
            assert_eq!(BigInt::from(bareiss_i128(m.clone()).unwrap()), bareiss_big(&m));
        }
        assert!(delta0(10).is_ok());
    }

    #[test]
    fn pivoting_and_singular() {
        assert_eq!(det_exact(&[vec![0, 1], vec![1, 0]]), BigInt::from(-1));
        assert_eq!(det_exact(&[vec![1, 2], vec![2, 4]]), BigInt::from(0));
        let a = vec![vec![0, 2, 1], vec![3, 0, 5], vec![1, 4, 0]];
        assert_eq!(det_exact(&a), BigInt::from(cofactor(&a)));
    }
}
