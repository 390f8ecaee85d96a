//! Density moments, the variance exponent and the reflection asymmetry.

use crate::error::{Error, Result};

/// Fewest usable points accepted by [`fit_beta`].
pub const MIN_FIT_SAMPLES: usize = 5;

/// Coordinates of sites `1..=n` relative to `origin`, taken as the minimal
/// image in `(-n/2, n/2]`.
pub fn coordinates(n: usize, origin: f64) -> Vec<f64> {
    let len = n as f64;
    (1..=n)
        .map(|s| {
            let mut x = (s as f64 - origin).rem_euclid(len);
            if x > len / 2.0 {
                x -= len;
            }
            x
        })
        .collect()
}

/// `σ = Σ x²⟨n⟩/𝒩 − (Σ x⟨n⟩/𝒩)²`.
pub fn variance(density: &[f64], coords: &[f64]) -> Result<f64> {
    assert_eq!(density.len(), coords.len());
    let total: f64 = density.iter().sum();
    if total <= 0.0 || !total.is_finite() {
        return Err(Error::UndefinedVariance);
    }
    let (m1, m2) = density.iter().zip(coords).fold((0.0, 0.0), |(a, b), (n, x)| (a + x * n, b + x * x * n));
    let mean = m1 / total;
    Ok((m2 / total - mean * mean).max(0.0))
}

/// `Δn_j = ⟨n_j⟩ − ⟨n_{−j−1}⟩` for `j = 0, 1, ...`, where site coordinate
/// `x` carries label `⌊x⌋`. Needs bond-centred coordinates.
pub fn asymmetry(density: &[f64], coords: &[f64]) -> Result<Vec<f64>> {
    assert_eq!(density.len(), coords.len());
    let n = coords.len() as i64;
    let twice: Vec<i64> = coords
        .iter()
        .map(|&x| {
            let t = (2.0 * x).round();
            if (2.0 * x - t).abs() > 1e-9 || t as i64 % 2 == 0 {
                Err(Error::ParityMismatch(format!("coordinate {x} is not bond-centred")))
            } else {
                Ok(t as i64)
            }
        })
        .collect::<Result<_>>()?;
    let lookup = |t: i64| twice.iter().position(|&u| (u - t).rem_euclid(2 * n) == 0);
    let mut out: Vec<(i64, f64)> = twice
        .iter()
        .enumerate()
        .filter(|&(_, &t)| t > 0)
        .map(|(s, &t)| {
            let partner = lookup(-t).expect("mirror site exists on the ring");
            ((t - 1) / 2, density[s] - density[partner])
        })
        .collect();
    out.sort_by_key(|&(j, _)| j);
    Ok(out.into_iter().map(|(_, d)| d).collect())
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BetaFit {
    pub beta: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub samples: usize,
}

/// Least-squares slope of `ln δσ` against `ln t` for `t ∈ [lo, hi]`.
pub fn fit_beta(times: &[f64], delta_sigma: &[f64], (lo, hi): (f64, f64)) -> Result<BetaFit> {
    let pts: Vec<(f64, f64)> = times
        .iter()
        .zip(delta_sigma)
        .filter(|&(&t, &d)| t > 0.0 && t >= lo && t <= hi && d > 1e-9)
        .map(|(&t, &d)| (t.ln(), d.ln()))
        .collect();
    if pts.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples { needed: MIN_FIT_SAMPLES, found: pts.len() });
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let beta = sxy / sxx;
    let intercept = my - beta * mx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(BetaFit { beta, prefactor: intercept.exp(), r_squared, samples: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_variances() {
        for r0 in 1..=10usize {
            let n = 21;
            let left = 11 - (r0 - 1) / 2;
            let mut rho = vec![0.0; n];
            (left..left + r0).for_each(|s| rho[s - 1] = 1.0);
            let origin = left as f64 + (r0 as f64 - 1.0) / 2.0;
            let s = variance(&rho, &coordinates(n, origin)).unwrap();
            assert!((s - (r0 * r0 - 1) as f64 / 12.0).abs() < 1e-12, "r0={r0}");
        }
    }

    #[test]
    fn empty_density_is_an_error() {
        assert_eq!(variance(&[0.0; 5], &coordinates(5, 3.0)), Err(Error::UndefinedVariance));
    }

    #[test]
    fn minimal_image() {
        assert_eq!(coordinates(5, 3.0), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(coordinates(5, 1.0), vec![0.0, 1.0, 2.0, -2.0, -1.0]);
        assert_eq!(coordinates(4, 2.5), vec![-1.5, -0.5, 0.5, 1.5]);
    }

    #[test]
    fn asymmetry_by_definition() {
        let rho = [0.0, 0.2, 0.8, 1.0, 1.0, 0.9, 0.3, 0.0];
        let c = coordinates(8, 4.5);
        let d = asymmetry(&rho, &c).unwrap();
        let expect = [1.0 - 1.0, 0.9 - 0.8, 0.3 - 0.2, 0.0 - 0.0];
        assert_eq!(d.len(), 4);
        for (a, b) in d.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
        let sym = [0.1, 0.5, 0.9, 0.9, 0.5, 0.1];
        assert!(asymmetry(&sym, &coordinates(6, 3.5)).unwrap().iter().all(|x| *x == 0.0));
    }

    #[test]
    fn odd_ring_antipode_is_its_own_mirror() {
        let mut rho = vec![0.0; 7];
        rho[0] = 0.7;
        let d = asymmetry(&rho, &coordinates(7, 4.5)).unwrap();
        assert!(d.iter().all(|x| *x == 0.0));
    }

    #[test]
    fn site_centred_asymmetry_is_rejected() {
        assert!(matches!(asymmetry(&[1.0; 5], &coordinates(5, 3.0)), Err(Error::ParityMismatch(_))));
    }

    #[test]
    fn exact_power_laws() {
        let t: Vec<f64> = (1..=40).map(|i| i as f64 * 0.1).collect();
        let sq: Vec<f64> = t.iter().map(|x| x * x).collect();
        let f = fit_beta(&t, &sq, (0.5, 3.0)).unwrap();
        assert!((f.beta - 2.0).abs() < 1e-6 && (f.r_squared - 1.0).abs() < 1e-12);
        let pl: Vec<f64> = t.iter().map(|x| 3.0 * x.powf(1.22)).collect();
        let f = fit_beta(&t, &pl, (0.5, 3.0)).unwrap();
        assert!((f.beta - 1.22).abs() < 1e-9 && (f.prefactor - 3.0).abs() < 1e-9);
    }

    #[test]
    fn too_few_points() {
        let t = [0.0, 1.0, 2.0, 3.0, 4.0];
        let d = [0.0, 1.0, 4.0, 9.0, 16.0];
        assert_eq!(fit_beta(&t, &d, (0.0, 10.0)), Err(Error::InsufficientSamples { needed: 5, found: 4 }));
    }
}
