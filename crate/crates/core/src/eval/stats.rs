//! Summary statistics and the significance tests used by the reports.

use serde::{Deserialize, Serialize};
use statrs::distribution::{Binomial, ContinuousCDF, DiscreteCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// Count, mean and sample standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SampleStats {
    pub count: usize,
    pub mean: Option<f64>,
    pub std: Option<f64>,
}

impl SampleStats {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return SampleStats::default();
        }
        let mean = xs.iter().sum::<f64>() / count as f64;
        let std = (count > 1).then(|| {
            let ss: f64 = xs.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (count - 1) as f64).sqrt()
        });
        SampleStats {
            count,
            mean: Some(mean),
            std,
        }
    }
}

pub fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let h = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[h] } else { 0.5 * (v[h - 1] + v[h]) })
}

/// Ranks starting at 1, ties sharing their average rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankCorrelation {
    pub n: usize,
    pub rho: f64,
    /// Student t statistic with n - 2 degrees of freedom.
    pub t: f64,
    /// One-sided p-value against ρ ≤ 0.
    pub p_value: f64,
}

fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::DegenerateVariance(
            (if sxx == 0.0 { "first variable is constant" } else { "second variable is constant" }).into(),
        ));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

pub fn spearman(x: &[f64], y: &[f64]) -> Result<RankCorrelation> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Config(format!(
            "rank correlation needs two equally long samples of at least 3, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    let rho = pearson(&ranks(x), &ranks(y))?;
    let df = (x.len() - 2) as f64;
    let t = if rho.abs() < 1.0 {
        rho * (df / (1.0 - rho * rho)).sqrt()
    } else {
        rho.signum() * f64::INFINITY
    };
    let dist = StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom");
    let p_value = if t.is_infinite() {
        if t > 0.0 {
            0.0
        } else {
            1.0
        }
    } else {
        dist.sf(t)
    };
    Ok(RankCorrelation {
        n: x.len(),
        rho,
        t,
        p_value,
    })
}

/// One-sided pooled two-proportion z-test of `p_b > p_a`; returns the
/// p-value.
pub fn proportion_gain_test(hits_a: usize, n_a: usize, hits_b: usize, n_b: usize) -> f64 {
    let (pa, pb) = (hits_a as f64 / n_a as f64, hits_b as f64 / n_b as f64);
    let pooled = (hits_a + hits_b) as f64 / (n_a + n_b) as f64;
    let se = (pooled * (1.0 - pooled) * (1.0 / n_a as f64 + 1.0 / n_b as f64)).sqrt();
    if se == 0.0 {
        return if pb > pa { 0.0 } else { 1.0 };
    }
    let z = (pb - pa) / se;
    Normal::standard().sf(z)
}

/// One-sided sign test that `a` tends to be smaller than `b` on paired
/// observations. Ties are dropped. Returns `(wins, losses, p_value)`.
pub fn sign_test(a: &[f64], b: &[f64]) -> (usize, usize, f64) {
    let wins = a.iter().zip(b).filter(|(x, y)| x < y).count();
    let losses = a.iter().zip(b).filter(|(x, y)| x > y).count();
    let n = wins + losses;
    if n == 0 {
        return (0, 0, 1.0);
    }
    let bin = Binomial::new(0.5, n as u64).expect("valid binomial");
    // P(W >= wins)
    let p = if wins == 0 { 1.0 } else { bin.sf(wins as u64 - 1) };
    (wins, losses, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats_by_hand() {
        let s = SampleStats::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(s.mean, Some(2.5));
        assert!((s.std.unwrap() - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!(SampleStats::of(&[]).mean, None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn tied_ranks() {
        assert_eq!(ranks(&[10.0, 20.0, 10.0, 30.0]), vec![1.5, 3.0, 1.5, 4.0]);
    }

    #[test]
    fn spearman_cases() {
        let x: Vec<f64> = (0..100).map(f64::from).collect();
        let y: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
        let r = spearman(&x, &y).unwrap();
        assert_eq!(r.rho, 1.0);
        assert_eq!(r.p_value, 0.0);
        assert!(matches!(spearman(&x, &vec![0.5; 100]), Err(Error::DegenerateVariance(_))));

        // textbook example: d² sum = 4 over n = 5 → ρ = 1 - 6·4/(5·24) = 0.8
        let r = spearman(&[1.0, 2.0, 3.0, 4.0, 5.0], &[2.0, 1.0, 4.0, 3.0, 5.0]).unwrap();
        assert!((r.rho - 0.8).abs() < 1e-12);
        // t = 0.8·sqrt(3/0.36) with 3 degrees of freedom
        assert!((r.t - 0.8 * (3.0f64 / 0.36).sqrt()).abs() < 1e-12);
        assert!(r.p_value > 0.05 && r.p_value < 0.06);
    }

    #[test]
    fn proportion_test() {
        assert!(proportion_gain_test(50, 100, 80, 100) < 0.001);
        assert!(proportion_gain_test(80, 100, 50, 100) > 0.999);
        assert!((proportion_gain_test(50, 100, 50, 100) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sign_test_small() {
        // 5 of 5 wins: p = 1/32
        let (w, l, p) = sign_test(&[1.0; 5], &[2.0; 5]);
        assert_eq!((w, l), (5, 0));
        assert!((p - 1.0 / 32.0).abs() < 1e-12);
        let (_, _, p) = sign_test(&[1.0, 3.0], &[1.0, 2.0]);
        assert_eq!(p, 1.0);
    }
}
