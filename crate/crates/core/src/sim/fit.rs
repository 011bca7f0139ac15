//! Least-squares fit of the step-size surface
//! `delta0 = (a0 + b0 / T^{1/p}) (a1 + b1 / Lambda^{(p+1)/p})` with `a1 = 1`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub t: f64,
    pub lambda: f64,
    pub delta0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitParams {
    pub p: usize,
    pub a0: f64,
    pub b0: f64,
    pub a1: f64,
    pub b1: f64,
    pub residuals: Vec<f64>,
    pub rms: f64,
    pub iterations: usize,
}

impl FitParams {
    pub fn extrapolate(&self, t: f64, lambda: f64) -> f64 {
        let (x, y) = features(self.p, t, lambda);
        (self.a0 + self.b0 * x) * (self.a1 + self.b1 * y)
    }
}

fn features(p: usize, t: f64, lambda: f64) -> (f64, f64) {
    let pf = p as f64;
    (t.powf(-1.0 / pf), lambda.powf(-(pf + 1.0) / pf))
}

fn distinct(v: &[f64]) -> usize {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    s.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs().max(1.0));
    s.len()
}

/// Gauss-Newton on `(a0, b0, b1)`, started from the unconstrained bilinear fit.
pub fn fit_extrapolation(points: &[FitPoint], p: usize) -> Result<FitParams> {
    if points.len() < 8 {
        return Err(Error::Precondition(format!("need at least 8 points, got {}", points.len())));
    }
    if points.iter().any(|q| !(q.t > 0.0 && q.lambda > 0.0 && q.delta0.is_finite())) {
        return Err(Error::Precondition("T and Lambda must be positive".into()));
    }
    let xy: Vec<(f64, f64)> = points.iter().map(|q| features(p, q.t, q.lambda)).collect();
    let xs: Vec<f64> = xy.iter().map(|v| v.0).collect();
    let ys: Vec<f64> = xy.iter().map(|v| v.1).collect();
    if distinct(&xs) < 2 || distinct(&ys) < 2 {
        return Err(Error::Numeric("rank-deficient design: need two distinct T and Lambda".into()));
    }
    let n = points.len();
    let z = DVector::from_iterator(n, points.iter().map(|q| q.delta0));

    let lin = DMatrix::from_fn(n, 4, |i, j| match j {
        0 => 1.0,
        1 => xy[i].0,
        2 => xy[i].1,
        _ => xy[i].0 * xy[i].1,
    });
    let c = lin
        .clone()
        .svd(true, true)
        .solve(&z, 1e-14)
        .map_err(|e| Error::Numeric(e.to_string()))?;
    if c[0].abs() < 1e-300 {
        return Err(Error::Numeric("degenerate start: a0 vanished".into()));
    }
    let mut th = DVector::from_vec(vec![c[0], c[1], c[2] / c[0]]);

    let resid = |th: &DVector<f64>| -> DVector<f64> {
        DVector::from_iterator(
            n,
            xy.iter()
                .zip(points)
                .map(|(&(x, y), q)| (th[0] + th[1] * x) * (1.0 + th[2] * y) - q.delta0),
        )
    };
    let mut r = resid(&th);
    let mut iterations = 0;
    for it in 1..=200 {
        iterations = it;
        let jac = DMatrix::from_fn(n, 3, |i, j| {
            let (x, y) = xy[i];
            match j {
                0 => 1.0 + th[2] * y,
                1 => x * (1.0 + th[2] * y),
                _ => (th[0] + th[1] * x) * y,
            }
        });
        let svd = jac.svd(true, true);
        if svd.rank(1e-12 * svd.singular_values.max()) < 3 {
            return Err(Error::Numeric("rank-deficient Jacobian".into()));
        }
        let step = svd.solve(&(-&r), 1e-14).map_err(|e| Error::Numeric(e.to_string()))?;
        // halve until the residual stops growing
        let mut lam = 1.0;
        let mut next = &th + &step;
        let mut rn = resid(&next);
        while rn.norm() > r.norm() && lam > 1e-6 {
            lam *= 0.5;
            next = &th + &step * lam;
            rn = resid(&next);
        }
        let done = step.norm() * lam <= 1e-15 * (1.0 + th.norm());
        th = next;
        r = rn;
        if done {
            break;
        }
    }
    let rms = (r.norm_squared() / n as f64).sqrt();
    Ok(FitParams {
        p,
        a0: th[0],
        b0: th[1],
        a1: 1.0,
        b1: th[2],
        residuals: r.iter().copied().collect(),
        rms,
        iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(p: usize, a0: f64, b0: f64, b1: f64) -> Vec<FitPoint> {
        let mut pts = Vec::new();
        for &t in &[1.0, 2.0, 4.0, 8.0] {
            for &lambda in &[2.0, 5.0, 9.0] {
                let (x, y) = features(p, t, lambda);
                pts.push(FitPoint {
                    t,
                    lambda,
                    delta0: (a0 + b0 * x) * (1.0 + b1 * y),
                });
            }
        }
        pts
    }

    #[test]
    fn recovers_synthetic_parameters() {
        for (p, a0, b0, b1) in [(2, 0.03, 0.05, 1.7), (4, 0.1, 0.02, -0.3), (1, 0.01, 0.2, 4.0)] {
            let f = fit_extrapolation(&synthetic(p, a0, b0, b1), p).unwrap();
            assert!((f.a0 - a0).abs() < 1e-6 && (f.b0 - b0).abs() < 1e-6 && (f.b1 - b1).abs() < 1e-6, "{f:?}");
            assert!(f.rms < 1e-12);
        }
    }

    #[test]
    fn noisy_fit_reports_residuals() {
        let mut pts = synthetic(2, 0.03, 0.05, 1.7);
        for (i, q) in pts.iter_mut().enumerate() {
            q.delta0 *= 1.0 + 1e-3 * ((i * 7 % 5) as f64 - 2.0);
        }
        let f = fit_extrapolation(&pts, 2).unwrap();
        assert!(f.rms > 0.0 && f.rms < 1e-3);
        assert_eq!(f.residuals.len(), pts.len());
    }

    #[test]
    fn monotone_in_time_for_positive_b0() {
        let f = fit_extrapolation(&synthetic(2, 0.03, 0.05, 1.7), 2).unwrap();
        let mut last = f64::INFINITY;
        for t in [0.5, 1.0, 3.0, 10.0, 100.0] {
            let d = f.extrapolate(t, 5.0);
            assert!(d <= last);
            last = d;
        }
    }

    #[test]
    fn rank_deficient_design() {
        let pts: Vec<FitPoint> = (0..8)
            .map(|i| FitPoint { t: 1.0 + i as f64, lambda: 3.0, delta0: 0.1 })
            .collect();
        assert!(matches!(fit_extrapolation(&pts, 2), Err(Error::Numeric(_))));
        assert!(fit_extrapolation(&pts[..5], 2).is_err());
    }
}
