//! Brute-force reference implementations, deliberately naive.

/// Matched-character count of recursive longest-common-substring matching,
/// by exhaustive search: every (i, j) start is extended as far as it goes,
/// the longest block wins, earliest in `a` then earliest in `b`.
pub fn gestalt_matches(a: &[char], b: &[char]) -> usize {
    let mut best: Option<(usize, usize, usize)> = None;
    for i in 0..a.len() {
        for j in 0..b.len() {
            let mut k = 0;
            while i + k < a.len() && j + k < b.len() && a[i + k] == b[j + k] {
                k += 1;
            }
            if k > 0 && best.is_none_or(|(_, _, bk)| k > bk) {
                best = Some((i, j, k));
            }
        }
    }
    match best {
        None => 0,
        Some((i, j, k)) => k + gestalt_matches(&a[..i], &b[..j]) + gestalt_matches(&a[i + k..], &b[j + k..]),
    }
}

pub fn gestalt_ratio(a: &str, b: &str) -> f64 {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    2.0 * gestalt_matches(&a, &b) as f64 / (a.len() + b.len()) as f64
}
