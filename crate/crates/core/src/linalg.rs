//! Small dense least squares for the tail fits.

/// Solves `min ||A x - y||` for a tall matrix given column by column, using
/// modified Gram–Schmidt with one re-orthogonalization pass.
///
/// Returns `None` if the columns are numerically dependent.
pub(crate) fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Option<Vec<f64>> {
    let m = y.len();
    let n = columns.len();
    if n == 0 || m < n || columns.iter().any(|c| c.len() != m) {
        return None;
    }
    let mut q: Vec<Vec<f64>> = columns.to_vec();
    let mut r = vec![vec![0.0; n]; n];
    for j in 0..n {
        let norm0 = dot(&q[j], &q[j]).sqrt();
        for _pass in 0..2 {
            for i in 0..j {
                let proj = dot(&q[i], &q[j]);
                r[i][j] += proj;
                let (qi, qj) = split_pair(&mut q, i, j);
                for (a, b) in qj.iter_mut().zip(qi.iter()) {
                    *a -= proj * b;
                }
            }
        }
        let norm = dot(&q[j], &q[j]).sqrt();
        if !(norm > 1e-13 * norm0.max(f64::MIN_POSITIVE)) {
            return None;
        }
        r[j][j] = norm;
        for a in q[j].iter_mut() {
            *a /= norm;
        }
    }
    let qty: Vec<f64> = q.iter().map(|qj| dot(qj, y)).collect();
    let mut x = vec![0.0; n];
    for j in (0..n).rev() {
        let tail: f64 = (j + 1..n).map(|k| r[j][k] * x[k]).sum();
        x[j] = (qty[j] - tail) / r[j][j];
    }
    Some(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn split_pair(q: &mut [Vec<f64>], i: usize, j: usize) -> (&Vec<f64>, &mut Vec<f64>) {
    debug_assert!(i < j);
    let (head, tail) = q.split_at_mut(j);
    (&head[i], &mut tail[0])
}
