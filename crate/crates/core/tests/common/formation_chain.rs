use std::collections::HashMap;

/// Expected steps for the arbitrary-tree protocol to finish, from the
/// Markov chain over (isolated nodes, roots of non-trivial trees).
pub fn expected_formation_steps(n: usize) -> f64 {
    fn go(s: usize, r: usize, n: usize, memo: &mut HashMap<(usize, usize), f64>) -> f64 {
        if s == 0 && r == 1 {
            return 0.0;
        }
        if let Some(&v) = memo.get(&(s, r)) {
            return v;
        }
        let total = (n * (n - 1) / 2) as f64;
        let c2 = |k: usize| (k * k.saturating_sub(1) / 2) as f64;
        let (pss, psx, prr) = (c2(s) / total, (s * (n - s)) as f64 / total, c2(r) / total);
        let mut acc = 1.0;
        if pss > 0.0 {
            acc += pss * go(s - 2, r + 1, n, memo);
        }
        if psx > 0.0 {
            acc += psx * go(s - 1, r, n, memo);
        }
        if prr > 0.0 {
            acc += prr * go(s, r - 1, n, memo);
        }
        let v = acc / (pss + psx + prr);
        memo.insert((s, r), v);
        v
    }
    go(n, 0, n, &mut HashMap::new())
}
