//! Closed forms for the two-user Gaussian MAC Y = X1 + X2 + N with input
//! correlation ρ̃, and for jointly Gaussian sources sent over it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::region::{RegionReport, RegionRow};

/// Absolute tolerance of the bisection used for ρ thresholds.
pub const RHO_TOL: f64 = 1e-6;

/// Channel parameters: transmit powers, noise variance and input
/// correlation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmacParams {
    pub p1: f64,
    pub p2: f64,
    pub sigma_n2: f64,
    #[serde(default)]
    pub rho: f64,
}

impl GmacParams {
    pub fn new(p1: f64, p2: f64, sigma_n2: f64, rho: f64) -> Result<Self> {
        let p = GmacParams {
            p1,
            p2,
            sigma_n2,
            rho,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("p1", self.p1),
            ("p2", self.p2),
            ("sigma_n2", self.sigma_n2),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.rho.abs() <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "rho must lie in [-1, 1], got {}",
                self.rho
            )));
        }
        Ok(())
    }

    pub fn with_rho(self, rho: f64) -> Self {
        GmacParams { rho, ..self }
    }
}

/// Jointly Gaussian source pair and the quantization rates of its
/// descriptions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianSourceParams {
    pub sigma1_2: f64,
    pub sigma2_2: f64,
    pub rho_source: f64,
    pub r1: f64,
    pub r2: f64,
}

impl GaussianSourceParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("sigma1_2", self.sigma1_2), ("sigma2_2", self.sigma2_2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        if !(self.rho_source.abs() <= 1.0) {
            return Err(Error::InvalidParam(format!(
                "rho_source must lie in [-1, 1], got {}",
                self.rho_source
            )));
        }
        for (name, v) in [("r1", self.r1), ("r2", self.r2)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam(format!(
                    "{name} must be nonnegative, got {v}"
                )));
            }
        }
        Ok(())
    }

    /// Swap the roles of the two sources.
    pub fn swapped(self) -> Self {
        GaussianSourceParams {
            sigma1_2: self.sigma2_2,
            sigma2_2: self.sigma1_2,
            r1: self.r2,
            r2: self.r1,
            ..self
        }
    }
}

/// The three relaxed outer bounds, in bits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OuterBounds {
    pub i1: f64,
    pub i2: f64,
    pub isum: f64,
}

fn half_log2(x: f64) -> f64 {
    0.5 * x.log2()
}

fn individual_bound(p: f64, rho: f64, sigma_n2: f64) -> f64 {
    half_log2(1.0 + p * (1.0 - rho * rho) / sigma_n2)
}

fn sum_bound(p1: f64, p2: f64, rho: f64, sigma_n2: f64) -> f64 {
    half_log2(1.0 + (p1 + p2 + 2.0 * rho * (p1 * p2).sqrt()) / sigma_n2)
}

/// I(X1;Y|X2), I(X2;Y|X1) and I(X1,X2;Y) for jointly Gaussian inputs with
/// correlation ρ̃.
pub fn gmac_outer_bounds(p: &GmacParams) -> Result<OuterBounds> {
    p.validate()?;
    Ok(OuterBounds {
        i1: individual_bound(p.p1, p.rho, p.sigma_n2),
        i2: individual_bound(p.p2, p.rho, p.sigma_n2),
        isum: sum_bound(p.p1, p.p2, p.rho, p.sigma_n2),
    })
}

/// Largest correlation two channel inputs can have when each is a function
/// of one of two sources with mutual information `mi_bits`.
pub fn lemma3_rho_bound(mi_bits: f64) -> f64 {
    if mi_bits <= 0.0 {
        return 0.0;
    }
    (1.0 - (-2.0 * mi_bits).exp2()).sqrt()
}

/// Entropy summary of a discrete source pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceEntropies {
    /// H(U1|U2).
    pub h1: f64,
    /// H(U2|U1).
    pub h2: f64,
    /// H(U1,U2).
    pub hsum: f64,
    /// I(U1;U2).
    pub mi: f64,
}

/// Range of input correlations satisfying all three relaxed bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhoInterval {
    /// Largest ρ̃ with I1(ρ̃) ≥ H(U1|U2) and likewise for user 2; `None`
    /// when the bound fails already at ρ̃ = 0.
    pub caps: [Option<f64>; 2],
    /// Smallest ρ̃ with Isum(ρ̃) ≥ H(U1,U2); `None` when unreachable even at
    /// ρ̃ = 1.
    pub sum_floor: Option<f64>,
    pub lemma3: f64,
    /// `[rho_min, rho_max]`, or `None` when empty.
    pub interval: Option<(f64, f64)>,
}

/// Largest x in [0, 1] with f(x) ≥ 0 for f decreasing, by bisection.
fn last_nonnegative(f: impl Fn(f64) -> f64) -> Option<f64> {
    if f(0.0) < 0.0 {
        return None;
    }
    if f(1.0) >= 0.0 {
        return Some(1.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > RHO_TOL * 1e-3 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(lo)
}

/// Smallest x in [0, 1] with f(x) ≥ 0 for f increasing, by bisection.
fn first_nonnegative(f: impl Fn(f64) -> f64) -> Option<f64> {
    if f(1.0) < 0.0 {
        return None;
    }
    if f(0.0) >= 0.0 {
        return Some(0.0);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while hi - lo > RHO_TOL * 1e-3 {
        let mid = 0.5 * (lo + hi);
        if f(mid) >= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Interval of nonnegative ρ̃ for which the relaxed bounds cover the source
/// entropies and ρ̃ stays below [`lemma3_rho_bound`]. The `rho` field of `p`
/// is ignored.
pub fn rho_feasibility_interval(p: &GmacParams, s: &SourceEntropies) -> Result<RhoInterval> {
    p.with_rho(0.0).validate()?;
    if s.h1 > s.hsum + 1e-12 || s.h2 > s.hsum + 1e-12 {
        return Err(Error::InvalidParam(
            "conditional entropies cannot exceed the joint entropy".into(),
        ));
    }
    let cap1 = last_nonnegative(|r| individual_bound(p.p1, r, p.sigma_n2) - s.h1);
    let cap2 = last_nonnegative(|r| individual_bound(p.p2, r, p.sigma_n2) - s.h2);
    let floor = first_nonnegative(|r| sum_bound(p.p1, p.p2, r, p.sigma_n2) - s.hsum);
    let lemma3 = lemma3_rho_bound(s.mi);
    let interval = match (cap1, cap2, floor) {
        (Some(a), Some(b), Some(lo)) => {
            let hi = a.min(b).min(lemma3);
            (lo <= hi).then_some((lo, hi))
        }
        _ => None,
    };
    Ok(RhoInterval {
        caps: [cap1, cap2],
        sum_floor: floor,
        lemma3,
        interval,
    })
}

/// Rate bounds for descriptions sent as scaled jointly Gaussian inputs with
/// correlation ρ̃.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LtRates {
    pub r1_max: f64,
    pub r2_max: f64,
    pub rsum_max: f64,
}

fn check_nondegenerate(rho: f64) -> Result<()> {
    if rho.abs() >= 1.0 {
        return Err(Error::DegenerateRho(rho));
    }
    Ok(())
}

pub fn lt_rate_region(p: &GmacParams) -> Result<LtRates> {
    p.validate()?;
    check_nondegenerate(p.rho)?;
    let d = 1.0 - p.rho * p.rho;
    Ok(LtRates {
        r1_max: half_log2(p.p1 / p.sigma_n2 + 1.0 / d),
        r2_max: half_log2(p.p2 / p.sigma_n2 + 1.0 / d),
        rsum_max: half_log2(
            (p.sigma_n2 + p.p1 + p.p2 + 2.0 * p.rho * (p.p1 * p.p2).sqrt()) / (d * p.sigma_n2),
        ),
    })
}

/// Distortion lower bounds var(U1|W1,W2) and var(U2|W1,W2).
pub fn lt_distortions(g: &GaussianSourceParams, rho_tilde: f64) -> Result<(f64, f64)> {
    g.validate()?;
    check_nondegenerate(rho_tilde)?;
    let d = 1.0 - rho_tilde * rho_tilde;
    let rho2 = g.rho_source * g.rho_source;
    let (a1, a2) = ((-2.0 * g.r1).exp2(), (-2.0 * g.r2).exp2());
    Ok((
        g.sigma1_2 * a1 * (1.0 - rho2 * (1.0 - a2)) / d,
        g.sigma2_2 * a2 * (1.0 - rho2 * (1.0 - a1)) / d,
    ))
}

/// Left-hand sides I(U1;W1|W2), I(U2;W2|W1), I(U1,U2;W1,W2) for Gaussian
/// descriptions W_i = U_i + Q_i with I(U_i;W_i) = R_i.
pub fn gaussian_description_mi(g: &GaussianSourceParams) -> Result<[f64; 3]> {
    g.validate()?;
    let gamma1 = 1.0 - (-2.0 * g.r1).exp2();
    let gamma2 = 1.0 - (-2.0 * g.r2).exp2();
    let shared = half_log2(1.0 - g.rho_source * g.rho_source * gamma1 * gamma2);
    Ok([g.r1 + shared, g.r2 + shared, g.r1 + g.r2 + shared])
}

/// Relaxed sufficient conditions for sending the Gaussian pair over the
/// GMAC with jointly Gaussian inputs of correlation `p.rho`.
pub fn gaussian_source_conditions(
    g: &GaussianSourceParams,
    p: &GmacParams,
) -> Result<RegionReport> {
    let lhs = gaussian_description_mi(g)?;
    let b = gmac_outer_bounds(p)?;
    let rows = vec![
        RegionRow::new("I(U1;W1|W2) < I(X1;Y|X2)", lhs[0], b.i1),
        RegionRow::new("I(U2;W2|W1) < I(X2;Y|X1)", lhs[1], b.i2),
        RegionRow::new("I(U1,U2;W1,W2) < I(X1,X2;Y)", lhs[2], b.isum),
    ];
    Ok(RegionReport::new(rows, vec![]))
}

/// One row of a ρ̃ sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub rho: f64,
    pub i1: f64,
    pub i2: f64,
    pub isum: f64,
    pub lt_r1: f64,
    pub lt_r2: f64,
    pub lt_rsum: f64,
}

/// Bounds on `points` evenly spaced values of ρ̃ in [`lo`, `hi`].
pub fn rho_sweep(p: &GmacParams, lo: f64, hi: f64, points: usize) -> Result<Vec<SweepRow>> {
    if points < 2 {
        return Err(Error::InvalidParam(
            "a sweep needs at least two points".into(),
        ));
    }
    (0..points)
        .map(|i| {
            let rho = lo + (hi - lo) * i as f64 / (points - 1) as f64;
            let q = p.with_rho(rho);
            let b = gmac_outer_bounds(&q)?;
            let lt = lt_rate_region(&q).unwrap_or(LtRates {
                r1_max: f64::INFINITY,
                r2_max: f64::INFINITY,
                rsum_max: f64::INFINITY,
            });
            Ok(SweepRow {
                rho,
                i1: b.i1,
                i2: b.i2,
                isum: b.isum,
                lt_r1: lt.r1_max,
                lt_r2: lt.r2_max,
                lt_rsum: lt.rsum_max,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::region::{gmac_example_pair, strongly_correlated_pair};

    fn example() -> GmacParams {
        GmacParams::new(3.0, 4.0, 1.0, 0.3).unwrap()
    }

    #[test]
    fn outer_bound_values() {
        let b = gmac_outer_bounds(&example()).unwrap();
        assert!((b.i1 - 0.949).abs() < 1e-3);
        assert!((b.i2 - 1.107).abs() < 1e-3);
        let b0 = gmac_outer_bounds(&example().with_rho(0.0)).unwrap();
        assert!((b0.isum - 1.5).abs() < 1e-12);
        let b1 = gmac_outer_bounds(&example().with_rho(1.0)).unwrap();
        assert_eq!((b1.i1, b1.i2), (0.0, 0.0));
    }

    #[test]
    fn parameter_validation() {
        assert!(GmacParams::new(0.0, 1.0, 1.0, 0.0).is_err());
        assert!(GmacParams::new(1.0, 1.0, -1.0, 0.0).is_err());
        assert!(GmacParams::new(1.0, 1.0, 1.0, 1.5).is_err());
        let g = GaussianSourceParams {
            sigma1_2: 1.0,
            sigma2_2: 1.0,
            rho_source: 0.5,
            r1: -0.1,
            r2: 0.0,
        };
        assert!(g.validate().is_err());
    }

    #[test]
    fn lemma3_values() {
        let mi = |p: crate::probability::JointPmf| p.mutual_info(&["U1"], &["U2"], &[]).unwrap();
        assert!((lemma3_rho_bound(mi(strongly_correlated_pair())) - 0.705_37).abs() < 1e-4);
        let m = mi(gmac_example_pair());
        assert!((m - 0.251_629).abs() < 1e-5);
        assert!((lemma3_rho_bound(m) - 0.542_67).abs() < 1e-4);
        assert_eq!(lemma3_rho_bound(0.0), 0.0);
        assert!(lemma3_rho_bound(40.0) > 1.0 - 1e-12);
    }

    fn example_entropies() -> SourceEntropies {
        let p = gmac_example_pair();
        SourceEntropies {
            h1: p.entropy(&["U1"], &["U2"]).unwrap(),
            h2: p.entropy(&["U2"], &["U1"]).unwrap(),
            hsum: p.entropy(&["U1", "U2"], &[]).unwrap(),
            mi: p.mutual_info(&["U1"], &["U2"], &[]).unwrap(),
        }
    }

    #[test]
    fn feasibility_interval_example() {
        let p = example();
        let s = example_entropies();
        let r = rho_feasibility_interval(&p, &s).unwrap();
        let [c1, c2] = r.caps.map(Option::unwrap);
        assert!((c1 - 0.7024).abs() < 1e-3);
        assert!((c2 - 0.7874).abs() < 1e-3);
        let lo = r.sum_floor.unwrap();
        assert!((lo - 0.144).abs() < 1e-3);
        let (a, b) = r.interval.unwrap();
        assert_eq!(a, lo);
        assert_eq!(b, r.lemma3);
        // endpoints solve their defining equations
        assert!((individual_bound(3.0, c1, 1.0) - s.h1).abs() < 1e-6);
        assert!((individual_bound(4.0, c2, 1.0) - s.h2).abs() < 1e-6);
        assert!((sum_bound(3.0, 4.0, lo, 1.0) - s.hsum).abs() < 1e-6);
    }

    #[test]
    fn unreachable_sum_is_infeasible() {
        let p = GmacParams::new(0.5, 0.5, 1.0, 0.0).unwrap();
        let s = SourceEntropies {
            h1: 0.2,
            h2: 0.2,
            hsum: 1.5,
            mi: 0.5,
        };
        let r = rho_feasibility_interval(&p, &s).unwrap();
        assert_eq!(r.sum_floor, None);
        assert_eq!(r.interval, None);
        let bad = SourceEntropies { h1: 2.0, ..s };
        assert!(rho_feasibility_interval(&p, &bad).is_err());
    }

    #[test]
    fn lt_rates() {
        let p = example().with_rho(0.0);
        let r = lt_rate_region(&p).unwrap();
        assert!((r.r1_max - 0.5 * 4f64.log2()).abs() < 1e-12);
        let sym = GmacParams::new(2.0, 2.0, 1.0, 0.0).unwrap();
        assert!((lt_rate_region(&sym).unwrap().rsum_max - 0.5 * 5f64.log2()).abs() < 1e-12);
        let r = lt_rate_region(&example()).unwrap();
        let direct = 0.5 * ((1.0 + 7.0 + 2.0 * 0.3 * 12f64.sqrt()) / 0.91).log2();
        assert!((r.rsum_max - direct).abs() < 1e-12);
        assert!((r.rsum_max - 1.734_59).abs() < 1e-4);
        assert_eq!(
            lt_rate_region(&example().with_rho(1.0)),
            Err(Error::DegenerateRho(1.0))
        );
    }

    #[test]
    fn lt_distortion_values() {
        let g = GaussianSourceParams {
            sigma1_2: 1.0,
            sigma2_2: 1.0,
            rho_source: 0.5,
            r1: 1.0,
            r2: 1.0,
        };
        let (d1, d2) = lt_distortions(&g, 0.0).unwrap();
        assert!((d1 - 0.203_125).abs() < 1e-12);
        assert_eq!(d1, d2);
        let ind = GaussianSourceParams {
            sigma1_2: 2.0,
            rho_source: 0.0,
            r1: 0.7,
            ..g
        };
        assert!((lt_distortions(&ind, 0.0).unwrap().0 - 2.0 * (-1.4f64).exp2()).abs() < 1e-12);
        let zero = GaussianSourceParams {
            r1: 0.0,
            r2: 0.0,
            ..ind
        };
        assert_eq!(lt_distortions(&zero, 0.0).unwrap().0, 2.0);
        assert!(matches!(
            lt_distortions(&g, -1.0),
            Err(Error::DegenerateRho(_))
        ));
    }

    #[test]
    fn gaussian_conditions_reduce() {
        let p = GmacParams::new(1.0, 1.0, 1.0, 0.0).unwrap();
        let ind = GaussianSourceParams {
            sigma1_2: 1.0,
            sigma2_2: 3.0,
            rho_source: 0.0,
            r1: 0.3,
            r2: 0.4,
        };
        let r = gaussian_source_conditions(&ind, &p).unwrap();
        assert!((r.rows[0].lhs - 0.3).abs() < 1e-12);
        assert!((r.rows[1].lhs - 0.4).abs() < 1e-12);
        assert!((r.rows[2].lhs - 0.7).abs() < 1e-12);
        let zero = GaussianSourceParams {
            rho_source: 0.9,
            r1: 0.0,
            r2: 0.0,
            ..ind
        };
        let r = gaussian_source_conditions(&zero, &p).unwrap();
        assert!(r.rows.iter().all(|row| row.lhs == 0.0));
        assert!(r.feasible);
    }

    #[test]
    fn sweep_shape() {
        let rows = rho_sweep(&example(), 0.0, 1.0, 11).unwrap();
        assert_eq!(rows.len(), 11);
        assert!(rows[10].lt_rsum.is_infinite());
        assert!(rows
            .windows(2)
            .all(|w| w[0].i1 > w[1].i1 && w[0].isum < w[1].isum));
        assert!(rho_sweep(&example(), 0.0, 1.0, 1).is_err());
    }
}
