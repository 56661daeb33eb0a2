use serde::{Deserialize, Serialize};

use super::special::regularized_incomplete_beta;
use crate::error::{Error, Result};

/// p-values below this are reported as exactly zero.
const P_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PearsonResult {
    pub r: f64,
    pub p_two_sided: f64,
    pub n: usize,
}

/// Sample Pearson correlation with a two-sided p-value from the t-transform
/// `t = r sqrt((n-2)/(1-r²))` against Student's t with `n-2` degrees of
/// freedom.
pub fn pearson(xs: &[f64], ys: &[f64]) -> Result<PearsonResult> {
    if xs.len() != ys.len() {
        return Err(Error::invalid(format!(
            "pearson: length mismatch {} vs {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < 3 {
        return Err(Error::invalid(format!(
            "pearson: need at least 3 samples, got {n}"
        )));
    }
    let mean = |v: &[f64]| v.iter().sum::<f64>() / n as f64;
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::degenerate("pearson: constant sequence"));
    }
    let r = (sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0);
    let p = if r.abs() == 1.0 {
        0.0
    } else {
        // df/(df + t²) simplifies to 1 - r².
        let df = (n - 2) as f64;
        let x = (1.0 - r) * (1.0 + r);
        let p = regularized_incomplete_beta(df / 2.0, 0.5, x).clamp(0.0, 1.0);
        if p < P_FLOOR {
            0.0
        } else {
            p
        }
    };
    Ok(PearsonResult {
        r,
        p_two_sided: p,
        n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_lines() {
        let up = pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap();
        assert_eq!((up.r, up.p_two_sided, up.n), (1.0, 0.0, 3));
        let down = pearson(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap();
        assert_eq!((down.r, down.p_two_sided), (-1.0, 0.0));
    }

    #[test]
    fn errors() {
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(pearson(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn n_three_uniform_null() {
        // n = 3 leaves one degree of freedom: a Cauchy tail.
        let r = pearson(&[1.0, 2.0, 3.0], &[1.0, 3.0, 2.0]).unwrap();
        assert!((r.r - 0.5).abs() < 1e-15);
        let t = 0.5 * (1.0f64 / 0.75).sqrt();
        let expect = 1.0 - 2.0 * t.atan() / std::f64::consts::PI;
        assert!((r.p_two_sided - expect).abs() < 1e-14);
    }

    proptest! {
        #[test]
        fn affine_maps(xs in prop::collection::vec(-100.0f64..100.0, 3..40), a in 0.1f64..10.0, b in -50.0f64..50.0) {
            prop_assume!(xs.iter().any(|&x| (x - xs[0]).abs() > 1e-3));
            let up: Vec<f64> = xs.iter().map(|x| a * x + b).collect();
            let down: Vec<f64> = xs.iter().map(|x| -a * x + b).collect();
            prop_assert!((pearson(&xs, &up).unwrap().r - 1.0).abs() <= 1e-12);
            prop_assert!((pearson(&xs, &down).unwrap().r + 1.0).abs() <= 1e-12);
            prop_assert_eq!(pearson(&xs, &xs).unwrap().r, 1.0);
        }

        #[test]
        fn bounds(xs in prop::collection::vec(-1.0f64..1.0, 3..30), seed in any::<u64>()) {
            let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| ((i as u64 ^ seed) % 97) as f64 + x).collect();
            prop_assume!(xs.iter().any(|&x| x != xs[0]));
            let res = pearson(&xs, &ys).unwrap();
            prop_assert!(res.r.abs() <= 1.0);
            prop_assert!((0.0..=1.0).contains(&res.p_two_sided));
        }
    }
}
