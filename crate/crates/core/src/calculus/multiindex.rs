//! Strictly increasing multi-indices in lexicographic order.

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// All increasing `k`-tuples drawn from `0..dim`, lexicographically.
pub fn combinations(dim: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::with_capacity(binomial(dim, k));
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, dim: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            if dim - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    rec(0, dim, k, &mut cur, &mut out);
    out
}

/// Position of an increasing tuple in [`combinations`]`(dim, idx.len())`.
pub fn rank(idx: &[usize], dim: usize) -> usize {
    let k = idx.len();
    let mut r = 0;
    let mut prev = 0usize;
    for (pos, &c) in idx.iter().enumerate() {
        for j in prev..c {
            r += binomial(dim - 1 - j, k - 1 - pos);
        }
        prev = c + 1;
    }
    r
}

/// Sorts a tuple, returning the permutation sign and the sorted tuple, or
/// `None` when an index repeats.
pub fn sort_with_sign(idx: &[usize]) -> Option<(f64, Vec<usize>)> {
    let mut v = idx.to_vec();
    let mut sign = 1.0;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((sign, v))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rank_inverts_enumeration() {
        for dim in 0..7 {
            for k in 0..=dim {
                let all = combinations(dim, k);
                assert_eq!(all.len(), binomial(dim, k));
                for (r, c) in all.iter().enumerate() {
                    assert_eq!(rank(c, dim), r);
                }
            }
        }
    }

    #[test]
    fn signs() {
        assert_eq!(sort_with_sign(&[2, 0, 1]), Some((1.0, vec![0, 1, 2])));
        assert_eq!(sort_with_sign(&[1, 0]), Some((-1.0, vec![0, 1])));
        assert_eq!(sort_with_sign(&[1, 1]), None);
    }
}
