/// Global minimum cut of an undirected weighted graph given as a symmetric
/// adjacency matrix (Stoer–Wagner, O(n³)). Returns 0 for disconnected graphs.
///
/// Panics if the graph has fewer than two vertices.
pub fn stoer_wagner(mut w: Vec<Vec<u64>>) -> u64 {
    let n = w.len();
    assert!(n >= 2, "a cut needs at least two vertices");
    let mut active: Vec<usize> = (0..n).collect();
    let mut best = u64::MAX;
    while active.len() > 1 {
        let mut added = vec![false; n];
        let mut key = vec![0u64; n];
        let mut prev = active[0];
        let mut last = active[0];
        for _ in 0..active.len() {
            let next = active
                .iter()
                .copied()
                .filter(|&v| !added[v])
                .max_by(|&a, &b| key[a].cmp(&key[b]).then(b.cmp(&a)))
                .expect("active vertex remains");
            added[next] = true;
            prev = last;
            last = next;
            for &v in &active {
                if !added[v] {
                    key[v] += w[next][v];
                }
            }
        }
        // cut-of-the-phase separates `last` from everything else
        best = best.min(key[last]);
        for &v in &active {
            let add = w[last][v];
            w[prev][v] += add;
            w[v][prev] = w[prev][v];
        }
        w[prev][prev] = 0;
        active.retain(|&v| v != last);
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_example() {
        // The 8-vertex example from the Stoer–Wagner paper; minimum cut 4.
        let edges = [
            (0, 1, 2),
            (0, 4, 3),
            (1, 2, 3),
            (1, 4, 2),
            (1, 5, 2),
            (2, 3, 4),
            (2, 6, 2),
            (3, 6, 2),
            (3, 7, 2),
            (4, 5, 3),
            (5, 6, 1),
            (6, 7, 3),
        ];
        let mut w = vec![vec![0; 8]; 8];
        for (a, b, s) in edges {
            w[a][b] = s;
            w[b][a] = s;
        }
        assert_eq!(stoer_wagner(w), 4);
    }

    #[test]
    fn disconnected_is_zero() {
        let mut w = vec![vec![0; 4]; 4];
        w[0][1] = 5;
        w[1][0] = 5;
        w[2][3] = 1;
        w[3][2] = 1;
        assert_eq!(stoer_wagner(w), 0);
    }
}
