use crate::dioph::Alphabet;
use crate::fixtures::{A_ROWS, X_A_ROWS};
use crate::intlin::IntMatrix;

pub fn example_a() -> IntMatrix {
    IntMatrix::from_rows(&A_ROWS).unwrap()
}

pub fn example_rows() -> Vec<Vec<i64>> {
    X_A_ROWS.iter().map(|r| r.to_vec()).collect()
}

/// Filters all of `S^L` by `A·x = 0` and the nonzero count.
pub fn brute_force_f(a: &IntMatrix, s: &Alphabet, k: usize) -> Vec<Vec<i64>> {
    let a = a.to_i64_rows().unwrap();
    let l = a[0].len();
    let mut out = Vec::new();
    let mut x = vec![0usize; l];
    loop {
        let v: Vec<i64> = x.iter().map(|&i| s.values()[i]).collect();
        let sparse = v.iter().filter(|&&e| e != 0).count() <= k;
        if sparse
            && a.iter()
                .all(|r| r.iter().zip(&v).map(|(p, q)| p * q).sum::<i64>() == 0)
        {
            out.push(v);
        }
        let mut p = l;
        loop {
            if p == 0 {
                out.sort();
                return out;
            }
            p -= 1;
            x[p] += 1;
            if x[p] < s.len() {
                break;
            }
            x[p] = 0;
        }
    }
}
