//! Thresholds `s_j = √(w_j + 1/4)` derived from the Dirichlet set `Σ₀`.

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::CoefficientProfile;
use crate::scalar::Real;
use crate::shooting::find_sigma0;

/// Absolute guard band around each threshold.
pub const RESONANCE_BAND: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictedCodimension {
    /// Interval index `j` (for `s_j < s < s_{j+1}`).
    pub interval: usize,
    pub codimension: usize,
    pub conjectural: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Serialize + DeserializeOwned")]
pub struct SpectrumReport<T> {
    pub sigma0: Vec<T>,
    pub sigma: Vec<T>,
    pub s0: Option<T>,
    /// Singular exponents; real, equal to the thresholds.
    pub gamma: Vec<T>,
    pub zero_membership_flag: bool,
    /// Number of conjugate pairs of nonreal `z` with `z(z+1) ∈ Σ₀`.
    pub nonreal_pairs: usize,
    pub predicted_codimension: Vec<PredictedCodimension>,
    pub warnings: Vec<String>,
    pub fingerprint: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    BelowS0,
    /// `s_j < s < s_{j+1}` (the upper end may lie beyond the scanned range).
    Interval(usize),
    /// Within the guard band of `s_j`.
    Resonant(usize),
}

/// Builds the report from a sorted `Σ₀`.
pub fn compute_sigma<T: Real>(sigma0: &[T]) -> Result<SpectrumReport<T>> {
    if sigma0.is_empty() {
        return Err(Error::EmptySpectrum);
    }
    if sigma0.windows(2).any(|w| w[1] < w[0]) || sigma0.iter().any(|w| !w.is_finite()) {
        return Err(Error::Parameter { name: "sigma0", reason: "must be sorted and finite".into() });
    }
    let quarter = T::lit(0.25);
    let mut warnings = Vec::new();
    let zero_membership_flag = sigma0.iter().any(|&w| w <= -quarter);
    if zero_membership_flag {
        let msg = format!(
            "Σ₀ contains w ≤ -1/4 (min {}): s = 0 would belong to Σ, contradicting 0 ∉ Σ; \
             the profile or the scan is suspect",
            sigma0[0]
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let mut sigma: Vec<T> = sigma0.iter().filter(|&&w| w > -quarter).map(|&w| (w + quarter).sqrt()).collect();
    sigma.dedup();
    let nonreal_pairs = count_nonreal_below(sigma0);
    let predicted_codimension = (0..sigma.len())
        .map(|j| PredictedCodimension { interval: j, codimension: 2 * (j + 1), conjectural: true })
        .collect();
    Ok(SpectrumReport {
        sigma0: sigma0.to_vec(),
        s0: sigma.first().copied(),
        gamma: sigma.clone(),
        sigma,
        zero_membership_flag,
        nonreal_pairs,
        predicted_codimension,
        warnings,
        fingerprint: None,
    })
}

/// Scans `Σ₀` below `w_max` and converts it.
pub fn spectrum_of<T: Real>(profile: &CoefficientProfile<T>, w_max: T, max_count: usize) -> Result<SpectrumReport<T>> {
    let scan = find_sigma0(profile, w_max, max_count)?;
    let mut report = compute_sigma(&scan.values)?;
    report.warnings.extend(scan.warnings);
    report.fingerprint = Some(profile.fingerprint());
    Ok(report)
}

/// First counting rule: elements `w < -1/4`.
pub fn count_nonreal_below<T: Real>(sigma0: &[T]) -> usize {
    sigma0.iter().filter(|&&w| w < T::lit(-0.25)).count()
}

/// Second counting rule: nonreal roots of `z² + z - w = 0`, in conjugate pairs.
pub fn count_nonreal_roots<T: Real>(sigma0: &[T]) -> usize {
    let roots: usize = sigma0.iter().map(|&w| if T::one() + T::lit(4.0) * w < T::zero() { 2 } else { 0 }).sum();
    roots / 2
}

/// Whether `z(z+1)` with `z = s - 1/2 + iτ` lies within `tol` of `Σ₀`; `s`
/// may be negative.
pub fn extended_member<T: Real>(sigma0: &[T], s: T, tau: T, tol: T) -> bool {
    let re = s * s - tau * tau - T::lit(0.25);
    let im = T::lit(2.0) * s * tau;
    sigma0.iter().any(|&w| (re - w).hypot(im) <= tol)
}

impl<T: Real> SpectrumReport<T> {
    pub fn locate_interval(&self, s: T) -> Location {
        let band = T::lit(RESONANCE_BAND);
        if let Some(j) = self.sigma.iter().position(|&sj| (s - sj).abs() < band) {
            return Location::Resonant(j);
        }
        match self.sigma.iter().rposition(|&sj| sj < s) {
            None => Location::BelowS0,
            Some(j) => Location::Interval(j),
        }
    }

    /// Distance from `s` to the nearest threshold.
    pub fn distance_to_sigma(&self, s: T) -> Option<(usize, T)> {
        self.sigma
            .iter()
            .enumerate()
            .map(|(j, &sj)| (j, (s - sj).abs()))
            .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite thresholds"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn thresholds_from_flat_eigenvalues() {
        let r = compute_sigma(&[PI * PI / 4.0, PI * PI]).unwrap();
        // quoted to seven figures; exact values 1.64845415.., 3.18113257..
        assert!((r.sigma[0] - 1.6484543).abs() < 1e-6);
        assert!((r.sigma[1] - 3.1811335).abs() < 1e-6);
        assert!((r.sigma[0] - (PI * PI / 4.0 + 0.25).sqrt()).abs() < 1e-15);
        assert_eq!(r.s0, Some(r.sigma[0]));
        assert!(!r.zero_membership_flag);
        assert_eq!(r.gamma, r.sigma);
        assert_eq!(r.predicted_codimension[1].codimension, 4);
    }

    #[test]
    fn boundary_case_sets_flag() {
        let r = compute_sigma(&[-0.25]).unwrap();
        assert!(r.zero_membership_flag);
        assert!(r.sigma.is_empty());
        assert!(r.warnings[0].contains("0 ∉ Σ"));
    }

    #[test]
    fn zero_maps_to_one_half() {
        let r = compute_sigma(&[0.0f64]).unwrap();
        assert_eq!(r.sigma, vec![0.5]);
    }

    #[test]
    fn empty_is_an_error() {
        assert!(matches!(compute_sigma::<f64>(&[]), Err(Error::EmptySpectrum)));
    }

    #[test]
    fn locate() {
        let r = compute_sigma(&[PI * PI / 4.0, PI * PI]).unwrap();
        assert_eq!(r.locate_interval(1.0), Location::BelowS0);
        assert_eq!(r.locate_interval(2.0), Location::Interval(0));
        assert_eq!(r.locate_interval(1.6484543), Location::Resonant(0));
        assert_eq!(r.locate_interval(5.0), Location::Interval(1));
    }

    #[test]
    fn counting_rules_agree() {
        let s0 = [-3.0, -1.0, -0.25, 0.1, 2.0];
        assert_eq!(count_nonreal_below(&s0), 2);
        assert_eq!(count_nonreal_roots(&s0), 2);
        assert_eq!(compute_sigma(&s0).unwrap().nonreal_pairs, 2);
    }

    #[test]
    fn json_round_trip() {
        let r = compute_sigma(&[PI * PI / 4.0]).unwrap();
        let back: SpectrumReport<f64> = serde_json::from_str(&serde_json::to_string(&r).unwrap()).unwrap();
        assert_eq!(back, r);
    }
}
