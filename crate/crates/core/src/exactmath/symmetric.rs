use num_traits::{One, Zero};

use super::rational::{qi, Q};
use crate::error::MathError;

/// Elementary symmetric polynomial `e_m` evaluated at `values`.
pub fn elementary_symmetric(m: usize, values: &[Q]) -> Result<Q, MathError> {
    if m > values.len() {
        return Err(MathError::IndexOutOfRange {
            index: m as i64,
            max: values.len() as i64,
        });
    }
    // e[j] after processing a prefix; Newton-free DP e_j(S+x) = e_j(S) + x e_{j-1}(S).
    let mut e = vec![Q::zero(); m + 1];
    e[0] = Q::one();
    for x in values {
        for j in (1..=m).rev() {
            let add = &e[j - 1] * x;
            e[j] += add;
        }
    }
    Ok(e.swap_remove(m))
}

/// `[x]^k_j = e_{k+1-j}(x, x+1, ..., x+k)`, zero when the index is out of range.
pub fn bracket_ej(x: i64, k: i64, j: i64) -> Q {
    let m = k + 1 - j;
    if k < -1 || m < 0 || m > k + 1 {
        return Q::zero();
    }
    let values: Vec<Q> = (0..=k).map(|n| qi(x + n)).collect();
    elementary_symmetric(m as usize, &values).expect("index checked")
}
