//! Greedy farthest-first k-center selection.

/// Picks `k` centers out of `n` points, farthest-first.
///
/// The first center is point 0; each following center is the point whose
/// distance to its nearest chosen center is largest. Ties go to the lower
/// index, so callers that order points by frame index get the lowest-frame
/// tie-break. Returns center indices in selection order. `dist(i, j)` must be
/// symmetric.
pub fn greedy_centers<F>(n: usize, k: usize, dist: F) -> Vec<usize>
where
    F: Fn(usize, usize) -> f64,
{
    let k = k.min(n);
    if k == 0 {
        return Vec::new();
    }
    let mut centers = Vec::with_capacity(k);
    let mut chosen = vec![false; n];
    let mut nearest = vec![f64::INFINITY; n];
    let mut next = 0;
    loop {
        centers.push(next);
        chosen[next] = true;
        if centers.len() == k {
            return centers;
        }
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if chosen[i] {
                continue;
            }
            nearest[i] = nearest[i].min(dist(i, next));
            // strict comparison keeps the lowest index on ties
            if best.is_none_or(|(_, d)| nearest[i] > d) {
                best = Some((i, nearest[i]));
            }
        }
        next = best.expect("fewer than k unchosen points").0;
    }
}

/// Largest distance from any point to its nearest center.
pub fn coverage_radius<F>(n: usize, centers: &[usize], dist: F) -> f64
where
    F: Fn(usize, usize) -> f64,
{
    (0..n)
        .map(|i| {
            centers
                .iter()
                .map(|&c| if c == i { 0.0 } else { dist(i, c) })
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}
