use crate::linalg::Vec2;

/// Density-based clustering. Returns a cluster id per point, `None` for
/// noise. Ids are assigned in order of first appearance.
///
/// A point is a core point when at least `min_pts` points (itself included)
/// lie within `eps`. With `min_pts = 1` no point is noise and clusters are
/// the connected components of the `eps`-neighbourhood graph.
pub fn dbscan(points: &[Vec2], eps: f64, min_pts: usize) -> Vec<Option<usize>> {
    let n = points.len();
    let eps_sq = eps * eps;
    let neighbours = |i: usize| -> Vec<usize> {
        (0..n).filter(|&j| (points[i] - points[j]).norm_squared() <= eps_sq).collect()
    };
    let mut labels: Vec<Option<usize>> = vec![None; n];
    let mut visited = vec![false; n];
    let mut next_id = 0;
    for i in 0..n {
        if visited[i] {
            continue;
        }
        visited[i] = true;
        let seeds = neighbours(i);
        if seeds.len() < min_pts {
            continue;
        }
        let id = next_id;
        next_id += 1;
        labels[i] = Some(id);
        let mut queue = seeds;
        while let Some(j) = queue.pop() {
            if labels[j].is_none() {
                labels[j] = Some(id);
            }
            if visited[j] {
                continue;
            }
            visited[j] = true;
            let nb = neighbours(j);
            if nb.len() >= min_pts {
                queue.extend(nb.into_iter().filter(|&k| !visited[k] || labels[k].is_none()));
            }
        }
    }
    labels
}
