use crate::error::{Error, Result};

/// Minimum-cost assignment on a rectangular cost matrix with
/// `rows ≤ cols`. Returns the column assigned to each row.
///
/// Shortest augmenting paths with row and column potentials, `O(rows² ·
/// cols)`.
pub fn hungarian(cost: &[Vec<f64>]) -> Result<Vec<usize>> {
    let n = cost.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let m = cost[0].len();
    if cost.iter().any(|r| r.len() != m) {
        return Err(Error::dim("hungarian", "ragged cost matrix"));
    }
    if n > m {
        return Err(Error::dim("hungarian", format!("{n} rows but only {m} columns")));
    }
    if cost.iter().flatten().any(|c| !c.is_finite()) {
        return Err(Error::Argument("hungarian costs must be finite".into()));
    }
    // 1-based internally; index 0 is the virtual start column.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=m {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=m {
                if used[j] {
                    u[owner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut assignment = vec![0; n];
    for j in 1..=m {
        if owner[j] != 0 {
            assignment[owner[j] - 1] = j - 1;
        }
    }
    Ok(assignment)
}

/// Fraction of nodes whose cluster maps to their class under the
/// one-to-one mapping that maximizes the number of matches.
pub fn matched_accuracy(clusters: &[usize], labels: &[usize]) -> Result<f64> {
    if clusters.len() != labels.len() {
        return Err(Error::dim("matched_accuracy", "cluster and label counts differ"));
    }
    if labels.is_empty() {
        return Err(Error::Argument("no nodes to score".into()));
    }
    let k = clusters.iter().max().map_or(0, |&c| c + 1);
    let c = labels.iter().max().map_or(0, |&c| c + 1);
    let side = k.max(c);
    let mut counts = vec![vec![0.0; side]; side];
    for (&a, &b) in clusters.iter().zip(labels) {
        counts[a][b] += 1.0;
    }
    let cost: Vec<Vec<f64>> = counts.iter().map(|r| r.iter().map(|&x| -x).collect()).collect();
    let assign = hungarian(&cost)?;
    let matched: f64 = assign.iter().enumerate().map(|(i, &j)| counts[i][j]).sum();
    Ok(matched / labels.len() as f64)
}
