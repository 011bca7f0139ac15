//! The four analytic error-bound families and their inversion for the step size.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{b_p, check_order, factorial, g_p, h_p, quad, stages, taylor_coefficients};
use crate::error::{Error, Result};

/// Upper cap for the step-size search.
pub const DELTA_CAP: f64 = PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundFamily {
    Basic,
    ExplicitSum,
    Commutator,
    TaylorOfTaylor,
}

impl BoundFamily {
    pub const ALL: [BoundFamily; 4] = [
        BoundFamily::Basic,
        BoundFamily::ExplicitSum,
        BoundFamily::Commutator,
        BoundFamily::TaylorOfTaylor,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BoundFamily::Basic => "basic",
            BoundFamily::ExplicitSum => "explicit_sum",
            BoundFamily::Commutator => "commutator",
            BoundFamily::TaylorOfTaylor => "taylor_of_taylor",
        }
    }
}

impl std::str::FromStr for BoundFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        BoundFamily::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown bound family {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundQuery {
    pub p: usize,
    pub m: usize,
    pub lambda: f64,
    pub t: f64,
    pub delta: f64,
    /// Terms per layer `N`.
    pub n_terms: usize,
    /// Maximum number of non-commuting partners of any term.
    pub n_tilde: usize,
    pub q_order: usize,
}

impl BoundQuery {
    pub fn new(p: usize, m: usize, lambda: f64, t: f64, delta: f64, n_terms: usize, n_tilde: usize) -> Self {
        BoundQuery {
            p,
            m,
            lambda,
            t,
            delta,
            n_terms,
            n_tilde,
            q_order: p + 3,
        }
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        BoundQuery { delta, ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        check_order(self.p)?;
        if self.m < 1 || self.lambda < 0.0 || self.t < 0.0 || self.delta < 0.0 || !self.delta.is_finite() {
            return Err(Error::Precondition(format!("invalid bound query {self:?}")));
        }
        if self.q_order < self.p {
            return Err(Error::Precondition(format!("q_order {} < p {}", self.q_order, self.p)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BoundDetails {
    pub c1: Option<f64>,
    pub c2: Option<f64>,
    pub integral: Option<f64>,
    /// Series terms `l = p..=q` of the Taylor-of-Taylor bound, already scaled by `T/delta`.
    pub series: Vec<f64>,
    pub remainder: Option<f64>,
    pub remainder_family: Option<BoundFamily>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundResult {
    pub family: BoundFamily,
    pub epsilon: f64,
    pub details: BoundDetails,
}

impl BoundResult {
    fn plain(family: BoundFamily, epsilon: f64) -> Self {
        BoundResult {
            family,
            epsilon,
            details: BoundDetails::default(),
        }
    }
}

/// `(T/delta) delta^{p+1} M^{p+1} Lambda^{p+1} G_p`.
pub fn bound_basic(q: &BoundQuery) -> Result<BoundResult> {
    q.validate()?;
    if q.delta == 0.0 {
        return Ok(BoundResult::plain(BoundFamily::Basic, 0.0));
    }
    let p = q.p as i32;
    let e = q.t * q.delta.powi(p) * (q.m as f64 * q.lambda).powi(p + 1) * g_p(q.p);
    Ok(BoundResult::plain(BoundFamily::Basic, e))
}

/// `2 T delta^q M^{q+1} Lambda^{q+1} H_p^{q+1} / (q+1)!` for a `p`-th order formula.
pub fn explicit_pq(p: usize, q: usize, m: usize, lambda: f64, t: f64, delta: f64) -> f64 {
    let qi = q as i32;
    2.0 * t * delta.powi(qi) * (m as f64 * lambda * h_p(p)).powi(qi + 1) / factorial(q + 1)
}

pub fn bound_explicit_sum(q: &BoundQuery) -> Result<BoundResult> {
    q.validate()?;
    if q.p == 1 {
        let mut r = bound_basic(q)?;
        r.family = BoundFamily::ExplicitSum;
        r.details.note = Some("p = 1 uses the basic bound".into());
        return Ok(r);
    }
    Ok(BoundResult::plain(
        BoundFamily::ExplicitSum,
        explicit_pq(q.p, q.p, q.m, q.lambda, q.t, q.delta),
    ))
}

/// `int_0^delta int_0^1 q (1-x)^{q-1} x tau^{q+1}/q! e^{a x tau} dx dtau` as a power series in `a delta`.
pub fn commutator_integral(q: usize, delta: f64, a: f64) -> f64 {
    if delta == 0.0 {
        return 0.0;
    }
    let ad = a * delta;
    let mut term = delta.powi(q as i32 + 2) / (factorial(q + 1) * (q as f64 + 2.0));
    let mut sum = term;
    let mut k = 0usize;
    loop {
        let kf = k as f64;
        term *= ad * (kf + 2.0) / ((kf + 1.0) * (q as f64 + kf + 3.0));
        sum += term;
        k += 1;
        if (term <= 1e-18 * sum && kf > ad) || k > 100_000 {
            break;
        }
    }
    sum
}

/// The same integral by nested adaptive quadrature.
pub fn commutator_integral_quadrature(q: usize, delta: f64, a: f64) -> Result<f64> {
    let qf = q as f64;
    let norm = qf / factorial(q);
    let mut inner_err = None;
    let v = quad::integrate(
        |tau| {
            let inner = quad::integrate(
                |x| (1.0 - x).powi(q as i32 - 1) * x * (a * x * tau).exp(),
                0.0,
                1.0,
                1e-13,
                500,
            );
            match inner {
                Ok(v) => norm * tau.powi(q as i32 + 1) * v,
                Err(e) => {
                    inner_err = Some(e);
                    0.0
                }
            }
        },
        0.0,
        delta,
        1e-12,
        500,
    )?;
    if let Some(e) = inner_err {
        return Err(e);
    }
    Ok(v)
}

/// Generalized commutator bound on the `q`-th derivative remainder of a `p`-th order formula.
pub fn commutator_pq(p: usize, q: usize, m: usize, lambda: f64, t: f64, delta: f64, n: usize, n_tilde: usize) -> (f64, BoundDetails) {
    let b = b_p(p);
    let h = h_p(p);
    let sm = (stages(p) * m) as f64;
    let nf = n as f64;
    let nt = n_tilde as f64;
    let mf = m as f64;
    let c1 = if lambda > 0.0 {
        nt * q as f64 * b * b * lambda.powi(q as i32 - 1) * nf * (mf * h - b + b * nf / lambda).powi(q as i32 - 1) * (sm * sm - sm)
    } else {
        0.0
    };
    let c2 = nt * b * b * (mf * h * lambda).powi(q as i32) * nf * (sm * sm - sm);
    let integral = commutator_integral(q, delta, nf * b);
    let eps = if delta == 0.0 || n_tilde == 0 {
        0.0
    } else {
        c1 * t * delta.powi(q as i32) / factorial(q + 1) + c2 * t / delta * integral
    };
    (
        eps,
        BoundDetails {
            c1: Some(c1),
            c2: Some(c2),
            integral: Some(integral),
            ..Default::default()
        },
    )
}

pub fn bound_commutator(q: &BoundQuery) -> Result<BoundResult> {
    q.validate()?;
    let (e, d) = commutator_pq(q.p, q.p, q.m, q.lambda, q.t, q.delta, q.n_terms, q.n_tilde);
    Ok(BoundResult {
        family: BoundFamily::Commutator,
        epsilon: e,
        details: d,
    })
}

/// Series in `f(p, M, l)` for `l = p..=q_order` plus the smaller of the two generalized remainders.
pub fn bound_taylor_of_taylor(q: &BoundQuery) -> Result<BoundResult> {
    q.validate()?;
    if q.delta == 0.0 {
        return Ok(BoundResult::plain(BoundFamily::TaylorOfTaylor, 0.0));
    }
    let mut series = Vec::new();
    for l in q.p..=q.q_order {
        let f = taylor_coefficients(q.p, q.m, l)?;
        let term = q.t / q.delta * (q.delta * q.lambda).powi(l as i32 + 1) / factorial(l + 1) * f;
        series.push(term);
    }
    let r = q.q_order + 1;
    let ex = explicit_pq(q.p, r, q.m, q.lambda, q.t, q.delta);
    let (co, cd) = commutator_pq(q.p, r, q.m, q.lambda, q.t, q.delta, q.n_terms, q.n_tilde);
    let (rem, fam) = if co < ex {
        (co, BoundFamily::Commutator)
    } else {
        (ex, BoundFamily::ExplicitSum)
    };
    let eps = series.iter().sum::<f64>() + rem;
    Ok(BoundResult {
        family: BoundFamily::TaylorOfTaylor,
        epsilon: eps,
        details: BoundDetails {
            series,
            remainder: Some(rem),
            remainder_family: Some(fam),
            c1: cd.c1,
            c2: cd.c2,
            integral: cd.integral,
            note: None,
        },
    })
}

pub fn bound(family: BoundFamily, q: &BoundQuery) -> Result<BoundResult> {
    match family {
        BoundFamily::Basic => bound_basic(q),
        BoundFamily::ExplicitSum => bound_explicit_sum(q),
        BoundFamily::Commutator => bound_commutator(q),
        BoundFamily::TaylorOfTaylor => bound_taylor_of_taylor(q),
    }
}

/// Minimum over all families; ties keep the earlier family.
pub fn tightest_bound(q: &BoundQuery) -> Result<BoundResult> {
    let mut best: Option<BoundResult> = None;
    for f in BoundFamily::ALL {
        let r = bound(f, q)?;
        if best.as_ref().map_or(true, |b| r.epsilon < b.epsilon) {
            best = Some(r);
        }
    }
    Ok(best.unwrap())
}

/// Largest `delta <= DELTA_CAP` whose bound stays at or below `eps_target`.
/// `family = None` inverts the tightest bound.
pub fn invert_for_delta(q: &BoundQuery, family: Option<BoundFamily>, eps_target: f64) -> Result<f64> {
    if !(eps_target > 0.0) {
        return Err(Error::Precondition(format!("target error must be positive, got {eps_target}")));
    }
    q.validate()?;
    let eval = |d: f64| -> Result<f64> {
        let qq = q.with_delta(d);
        Ok(match family {
            Some(f) => bound(f, &qq)?.epsilon,
            None => tightest_bound(&qq)?.epsilon,
        })
    };
    if family == Some(BoundFamily::Basic) {
        let p = q.p as i32;
        let denom = q.t * (q.m as f64 * q.lambda).powi(p + 1) * g_p(q.p);
        if denom == 0.0 {
            return Ok(DELTA_CAP);
        }
        return Ok((eps_target / denom).powf(1.0 / q.p as f64).min(DELTA_CAP));
    }
    if eval(DELTA_CAP)? <= eps_target {
        return Ok(DELTA_CAP);
    }
    let mut lo = 1e-12;
    if eval(lo)? > eps_target {
        return Err(Error::Infeasible(format!(
            "no step size in (0, {DELTA_CAP}] meets target {eps_target}"
        )));
    }
    let mut hi = DELTA_CAP;
    while (hi - lo) > 1e-10 * hi {
        let mid = (lo * hi).sqrt();
        if eval(mid)? <= eps_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: usize, delta: f64) -> BoundQuery {
        BoundQuery::new(p, 5, 5.0, 7.0, delta, 20, 4)
    }

    #[test]
    fn basic_values() {
        let r = bound_basic(&BoundQuery::new(1, 2, 1.0, 0.1, 0.1, 1, 1)).unwrap();
        // (T/delta) delta^2 M^2 Lambda^2 = 1 * 0.01 * 4
        assert!((r.epsilon - 0.04).abs() < 1e-15);
        assert_eq!(bound_basic(&q(4, 0.0)).unwrap().epsilon, 0.0);
    }

    #[test]
    fn explicit_values() {
        let r = bound_explicit_sum(&BoundQuery::new(2, 3, 2.0, 1.5, 0.1, 1, 1)).unwrap();
        let want = 2.0 * 1.5 * 0.01 * 27.0 * 8.0 / 6.0;
        assert!((r.epsilon - want).abs() < 1e-14);
        // independent arithmetic for p = 4
        let r = bound_explicit_sum(&q(4, 0.01)).unwrap();
        let h = (4.0 + 4f64.cbrt()) / (4.0 - 4f64.cbrt());
        let want = 2.0 * 7.0 * 1e-8 * 25f64.powi(5) * h.powi(5) / 120.0;
        assert!((r.epsilon - want).abs() < 1e-12 * want);
        assert_eq!(bound_explicit_sum(&q(4, 0.0)).unwrap().epsilon, 0.0);
        let r = bound_explicit_sum(&q(1, 0.01)).unwrap();
        assert_eq!(r.epsilon, bound_basic(&q(1, 0.01)).unwrap().epsilon);
    }

    #[test]
    fn integral_closed_form_matches_quadrature() {
        for qq in [1usize, 2, 4, 7] {
            for (d, a) in [(0.01, 6.6), (0.1, 1.0), (0.5, 20.0), (1.0, 3.0)] {
                let c = commutator_integral(qq, d, a);
                let n = commutator_integral_quadrature(qq, d, a).unwrap();
                assert!((c - n).abs() <= 1e-9 * c, "q={qq} d={d} a={a}: {c} vs {n}");
            }
        }
    }

    #[test]
    fn commutator_cases() {
        let mut z = q(2, 0.05);
        z.n_tilde = 0;
        assert_eq!(bound_commutator(&z).unwrap().epsilon, 0.0);
        let base = BoundQuery::new(2, 5, 1.0, 0.0, 0.0, 1, 1);
        let mut prev = 0.0;
        for k in 1..=40 {
            let d = 0.01 * k as f64;
            let r = bound_commutator(&BoundQuery { t: d, ..base.with_delta(d) }).unwrap();
            assert!(r.epsilon > 0.0 && r.epsilon >= prev);
            prev = r.epsilon;
        }
    }

    #[test]
    fn taylor_tighter_than_explicit() {
        for k in 1..=10 {
            let d = 0.01 * k as f64;
            let qq = BoundQuery::new(2, 5, 5.0, 7.0, d, 20, 4);
            let t = bound_taylor_of_taylor(&qq).unwrap().epsilon;
            let e = bound_explicit_sum(&qq).unwrap().epsilon;
            assert!(t < e, "delta={d}: {t} vs {e}");
        }
    }

    #[test]
    fn taylor_degenerate_series() {
        let mut qq = q(2, 0.01);
        qq.q_order = 2;
        let r = bound_taylor_of_taylor(&qq).unwrap();
        assert_eq!(r.details.series.len(), 1);
    }

    #[test]
    fn tightest_is_min_with_ordered_ties() {
        for p in [1, 2, 4] {
            for d in [1e-3, 1e-2, 0.05] {
                let qq = q(p, d);
                let t = tightest_bound(&qq).unwrap();
                for f in BoundFamily::ALL {
                    assert!(t.epsilon <= bound(f, &qq).unwrap().epsilon);
                }
            }
        }
        // at p = 1 the explicit-sum bound equals the basic one; basic must win the tie
        let mut qq = q(1, 0.01);
        qq.n_tilde = 1_000_000;
        qq.q_order = 1;
        let t = tightest_bound(&qq).unwrap();
        assert_ne!(t.family, BoundFamily::ExplicitSum);
    }

    #[test]
    fn inversion() {
        // closed form p = 1: eps / (T M^2 Lambda^2)
        let d = invert_for_delta(&q(1, 0.0), Some(BoundFamily::Basic), 0.1).unwrap();
        assert!((d - 0.1 / (7.0 * 625.0)).abs() < 1e-15);
        for fam in BoundFamily::ALL {
            let d = invert_for_delta(&q(2, 0.0), Some(fam), 0.1).unwrap();
            let e = bound(fam, &q(2, d)).unwrap().epsilon;
            assert!(e <= 0.1 && e >= 0.1 * (1.0 - 1e-6), "{fam:?}: {e}");
        }
        let b = invert_for_delta(&q(2, 0.0), Some(BoundFamily::Basic), 0.1).unwrap();
        let mut qq = q(2, 0.0);
        qq.n_tilde = 0;
        let e = invert_for_delta(&qq, Some(BoundFamily::ExplicitSum), 0.1).unwrap();
        // for p = 2, G_2 = 1/3 = 2 H_2^3 / 3!, so both families coincide
        assert!((b - e).abs() < 1e-9 * b);
        assert!(invert_for_delta(&q(2, 0.0), None, 0.0).is_err());
    }

    #[test]
    fn per_step_slope() {
        for p in [1usize, 2, 4] {
            let xs: Vec<f64> = (0..=8).map(|i| (1e-3f64).ln() + i as f64 / 8.0 * (100f64).ln()).collect();
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| {
                    let d = x.exp();
                    let qq = BoundQuery::new(p, 2, 1.0, d, d, 1, 1);
                    bound_taylor_of_taylor(&qq).unwrap().epsilon.ln()
                })
                .collect();
            let n = xs.len() as f64;
            let mx = xs.iter().sum::<f64>() / n;
            let my = ys.iter().sum::<f64>() / n;
            let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
                / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
            assert!((slope - (p as f64 + 1.0)).abs() < 0.05, "p={p} slope {slope}");
        }
    }
}
