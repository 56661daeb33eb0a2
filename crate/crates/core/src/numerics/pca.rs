use crate::error::{Error, Result};

const MAX_ITERATIONS: usize = 1_000;
const CONVERGENCE: f64 = 1e-10;
const START_PERTURBATION: f64 = 1e-4;

/// Top principal component of `rows` (mean-centered internally), found by
/// power iteration on the covariance. The sign is fixed so the entry with
/// the largest magnitude is positive.
pub fn top_principal_component(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    if rows.len() < 2 {
        return Err(Error::invalid("principal component needs at least 2 rows"));
    }
    let dim = rows[0].len();
    if dim == 0 || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::invalid(
            "principal component rows must share a nonzero dimension",
        ));
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for row in rows {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let centered: Vec<Vec<f64>> = rows
        .iter()
        .map(|r| r.iter().zip(&mean).map(|(v, m)| v - m).collect())
        .collect();
    if centered.iter().flatten().all(|&v| v == 0.0) {
        return Err(Error::degenerate("all rows identical, covariance is zero"));
    }

    // Covariance-vector product without forming the d×d matrix.
    let cov_times = |v: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; dim];
        for row in &centered {
            let proj: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
            for (o, r) in out.iter_mut().zip(row) {
                *o += proj * r;
            }
        }
        out
    };
    let normalize = |v: &mut Vec<f64>| -> bool {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 || !norm.is_finite() {
            return false;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        true
    };

    let mut v: Vec<f64> = (0..dim)
        .map(|i| {
            let base = if i == 0 { 1.0 } else { 0.0 };
            base + START_PERTURBATION / (i + 1) as f64
        })
        .collect();
    normalize(&mut v);
    let mut next = cov_times(&v);
    if !normalize(&mut next) {
        // The start vector is orthogonal to the row space; try basis vectors.
        next = (0..dim)
            .map(|j| {
                let mut e = vec![0.0; dim];
                e[j] = 1.0;
                cov_times(&e)
            })
            .find(|c| c.iter().any(|&x| x != 0.0))
            .expect("nonzero covariance has a nonzero column");
        normalize(&mut next);
    }
    v = next;
    for _ in 0..MAX_ITERATIONS {
        let mut next = cov_times(&v);
        normalize(&mut next);
        let delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt();
        v = next;
        if delta < CONVERGENCE {
            break;
        }
    }
    fix_sign(&mut v);
    Ok(v)
}

fn fix_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}
