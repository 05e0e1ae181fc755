//! Internal-energy / pressure laws `(h, p)` linked by `ρ h'' = p'` and
//! `ρ h' = p + h`, their Bregman-type relative quantities, and sampled
//! certificates for the coercivity bounds those relative quantities obey.
//!
//! Three regimes are supported, selected by the exponent `m`:
//!
//! * `m = 1`: `h = k ρ log ρ`, `p = k ρ`;
//! * `1 < m ≤ 2`: `h = k/(m-1) ρ^m`, `p = k ρ^m`;
//! * `m > 2`: the same power law plus an optional lower-order [`Tail`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Lower-order perturbation added to `h` when `m > 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Tail {
    #[default]
    None,
    /// `coefficient · ρ^exponent` with `1 < exponent < m`, `coefficient ≥ 0`.
    Power { coefficient: f64, exponent: f64 },
}

/// `h = coef · ρ^exponent` with `exponent > 1`, so `p = (exponent - 1) h`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct PowerTerm {
    coef: f64,
    exponent: f64,
}

impl PowerTerm {
    fn h(&self, rho: f64) -> f64 {
        self.coef * rho.powf(self.exponent)
    }

    fn dh(&self, rho: f64) -> f64 {
        self.coef * self.exponent * rho.powf(self.exponent - 1.0)
    }

    fn d2h(&self, rho: f64) -> f64 {
        self.coef * self.exponent * (self.exponent - 1.0) * rho.powf(self.exponent - 2.0)
    }

    fn p(&self, rho: f64) -> f64 {
        (self.exponent - 1.0) * self.h(rho)
    }

    fn dp(&self, rho: f64) -> f64 {
        rho * self.d2h(rho)
    }

    fn d2p(&self, rho: f64) -> f64 {
        (self.exponent - 1.0) * self.d2h(rho)
    }

    /// `h(ρ|ρ̄)` written as `coef ρ̄^γ g_γ((ρ-ρ̄)/ρ̄)` to avoid cancellation.
    fn rel_h(&self, rho: f64, rho_bar: f64) -> f64 {
        if self.exponent == 2.0 {
            let d = rho - rho_bar;
            return self.coef * (d * d);
        }
        self.coef * rho_bar.powf(self.exponent) * bregman_power(self.exponent, rho, rho_bar)
    }

    fn rel_p(&self, rho: f64, rho_bar: f64) -> f64 {
        (self.exponent - 1.0) * self.rel_h(rho, rho_bar)
    }
}

/// `(1+x)^γ - 1 - γx` with `x = (ρ-ρ̄)/ρ̄`.
fn bregman_power(gamma: f64, rho: f64, rho_bar: f64) -> f64 {
    let x = (rho - rho_bar) / rho_bar;
    if x.abs() < 1e-2 {
        // binomial series from the quadratic term on
        let mut coeff = gamma * (gamma - 1.0) / 2.0;
        let mut xp = x * x;
        let mut sum = coeff * xp;
        for j in 3..=10 {
            coeff *= (gamma - (j - 1) as f64) / j as f64;
            xp *= x;
            sum += coeff * xp;
        }
        sum
    } else {
        (rho / rho_bar).powf(gamma) - 1.0 - gamma * x
    }
}

/// `(1+x) ln(1+x) - x` with `x = (ρ-ρ̄)/ρ̄`.
fn bregman_log(rho: f64, rho_bar: f64) -> f64 {
    let x = (rho - rho_bar) / rho_bar;
    if rho == 0.0 {
        return 1.0;
    }
    if x.abs() < 1e-2 {
        let mut sum = 0.0;
        let mut xp = x;
        for j in 2..=12 {
            xp *= x;
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * xp / (j * (j - 1)) as f64;
        }
        sum
    } else {
        (1.0 + x) * x.ln_1p() - x
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct EntropyLawSpec {
    m: f64,
    k: f64,
    #[serde(default)]
    tail: Tail,
}

/// The pair `(h, p)` for one exponent regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EntropyLawSpec", into = "EntropyLawSpec")]
pub struct EntropyLaw {
    m: f64,
    k: f64,
    tail: Tail,
}

impl TryFrom<EntropyLawSpec> for EntropyLaw {
    type Error = Error;

    fn try_from(spec: EntropyLawSpec) -> Result<Self> {
        EntropyLaw::new(spec.m, spec.k)?.with_tail(spec.tail)
    }
}

impl From<EntropyLaw> for EntropyLawSpec {
    fn from(law: EntropyLaw) -> Self {
        EntropyLawSpec {
            m: law.m,
            k: law.k,
            tail: law.tail,
        }
    }
}

fn check_density(rho: f64) -> Result<()> {
    if !rho.is_finite() || rho < 0.0 {
        return Err(Error::Domain(format!(
            "density must be finite and non-negative, got {rho}"
        )));
    }
    Ok(())
}

fn check_reference(rho_bar: f64) -> Result<()> {
    if !rho_bar.is_finite() || rho_bar <= 0.0 {
        return Err(Error::Domain(format!(
            "reference density must be finite and positive, got {rho_bar}"
        )));
    }
    Ok(())
}

impl EntropyLaw {
    pub fn new(m: f64, k: f64) -> Result<Self> {
        if !m.is_finite() || m < 1.0 {
            return Err(Error::Domain(format!("exponent m must be >= 1, got {m}")));
        }
        if !k.is_finite() || k <= 0.0 {
            return Err(Error::Domain(format!("coefficient k must be > 0, got {k}")));
        }
        Ok(Self {
            m,
            k,
            tail: Tail::None,
        })
    }

    /// Attaches a tail. Only allowed for `m > 2`.
    pub fn with_tail(mut self, tail: Tail) -> Result<Self> {
        if let Tail::Power {
            coefficient,
            exponent,
        } = tail
        {
            if self.m <= 2.0 {
                return Err(Error::Domain(format!(
                    "a tail is only defined for m > 2 (m = {})",
                    self.m
                )));
            }
            if !(coefficient.is_finite() && coefficient >= 0.0) {
                return Err(Error::Domain(format!(
                    "tail coefficient must be >= 0, got {coefficient}"
                )));
            }
            if !(exponent > 1.0 && exponent < self.m) {
                return Err(Error::Domain(format!(
                    "tail exponent must lie in (1, m) = (1, {}), got {exponent}",
                    self.m
                )));
            }
        }
        self.tail = tail;
        Ok(self)
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn tail(&self) -> Tail {
        self.tail
    }

    pub fn is_logarithmic(&self) -> bool {
        self.m == 1.0
    }

    /// Constant `A` in `|p''| ≤ A p'/ρ`; only meaningful for `m > 2`.
    ///
    /// Every term of the family has `ρ p''/p' = γ - 1` with `γ ≤ m`, so
    /// `m - 1` bounds the sum.
    pub fn tail_constant(&self) -> Option<f64> {
        (self.m > 2.0).then_some(self.m - 1.0)
    }

    fn main_term(&self) -> Option<PowerTerm> {
        (self.m > 1.0).then(|| PowerTerm {
            coef: self.k / (self.m - 1.0),
            exponent: self.m,
        })
    }

    fn tail_term(&self) -> Option<PowerTerm> {
        match self.tail {
            Tail::None => None,
            Tail::Power {
                coefficient,
                exponent,
            } => Some(PowerTerm {
                coef: coefficient,
                exponent,
            }),
        }
    }

    fn sum_terms(&self, f: impl Fn(&PowerTerm) -> f64) -> f64 {
        self.main_term().map_or(0.0, |t| f(&t)) + self.tail_term().map_or(0.0, |t| f(&t))
    }

    /// `h(ρ)`, extended by continuity to `h(0) = 0`. No argument checks.
    pub fn h(&self, rho: f64) -> f64 {
        if self.is_logarithmic() {
            if rho == 0.0 {
                0.0
            } else {
                self.k * rho * rho.ln()
            }
        } else {
            self.sum_terms(|t| t.h(rho))
        }
    }

    /// `h'(ρ)` for `ρ > 0`.
    pub fn h_prime(&self, rho: f64) -> f64 {
        if self.is_logarithmic() {
            self.k * (rho.ln() + 1.0)
        } else {
            self.sum_terms(|t| t.dh(rho))
        }
    }

    /// `h''(ρ)` for `ρ > 0`.
    pub fn h_second(&self, rho: f64) -> f64 {
        if self.is_logarithmic() {
            self.k / rho
        } else {
            self.sum_terms(|t| t.d2h(rho))
        }
    }

    pub fn p(&self, rho: f64) -> f64 {
        if self.is_logarithmic() {
            self.k * rho
        } else {
            self.sum_terms(|t| t.p(rho))
        }
    }

    pub fn p_prime(&self, rho: f64) -> f64 {
        if self.is_logarithmic() {
            self.k
        } else {
            self.sum_terms(|t| t.dp(rho))
        }
    }

    pub fn p_second(&self, rho: f64) -> f64 {
        if self.is_logarithmic() {
            0.0
        } else {
            self.sum_terms(|t| t.d2p(rho))
        }
    }

    /// `h(ρ|ρ̄)` without argument checks.
    pub fn rel_h(&self, rho: f64, rho_bar: f64) -> f64 {
        if self.is_logarithmic() {
            self.k * rho_bar * bregman_log(rho, rho_bar)
        } else {
            self.sum_terms(|t| t.rel_h(rho, rho_bar))
        }
    }

    /// `p(ρ|ρ̄)` without argument checks.
    pub fn rel_p(&self, rho: f64, rho_bar: f64) -> f64 {
        if self.is_logarithmic() {
            // p is linear in ρ
            0.0
        } else {
            self.sum_terms(|t| t.rel_p(rho, rho_bar))
        }
    }

    pub fn eval_h(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.h(rho))
    }

    pub fn eval_pressure(&self, rho: f64) -> Result<f64> {
        check_density(rho)?;
        Ok(self.p(rho))
    }

    /// `h(ρ|ρ̄) = h(ρ) - h(ρ̄) - h'(ρ̄)(ρ - ρ̄) ≥ 0`.
    pub fn relative_entropy(&self, rho: f64, rho_bar: f64) -> Result<f64> {
        check_density(rho)?;
        check_reference(rho_bar)?;
        Ok(self.rel_h(rho, rho_bar))
    }

    /// `p(ρ|ρ̄) = p(ρ) - p(ρ̄) - p'(ρ̄)(ρ - ρ̄)`.
    pub fn relative_pressure(&self, rho: f64, rho_bar: f64) -> Result<f64> {
        check_density(rho)?;
        check_reference(rho_bar)?;
        Ok(self.rel_p(rho, rho_bar))
    }
}

/// Which lower bound a certificate witnesses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundRegime {
    /// `h(ρ|ρ̄) ≥ (k/2) min(1/ρ, 1/ρ̄) |ρ-ρ̄|²` for `m = 1`.
    Logarithmic,
    /// `h(ρ|ρ̄) ≥ (k m/2) min(ρ^{m-2}, ρ̄^{m-2}) |ρ-ρ̄|²` for `1 < m ≤ 2`.
    SubQuadratic,
    /// `h(ρ|ρ̄) ≥ C1 |ρ-ρ̄|²` below `R0`, `≥ C2 |ρ-ρ̄|^m` above, for `ρ̄`
    /// in a compact interval.
    CompactRange,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundCertificate {
    pub regime: BoundRegime,
    /// Split density; only set for [`BoundRegime::CompactRange`].
    pub r0: Option<f64>,
    pub c1: f64,
    pub c2: Option<f64>,
    pub samples_checked: usize,
    /// Smallest `lhs - rhs` over the samples.
    pub worst_margin: f64,
    /// Samples whose margin is below the rounding allowance.
    pub violations: usize,
    /// Empirical `sup |p(ρ|ρ̄)| / h(ρ|ρ̄)` over samples with `ρ ≠ ρ̄`.
    pub pressure_constant: f64,
    pub failure: Option<String>,
}

impl BoundCertificate {
    pub fn passed(&self) -> bool {
        self.failure.is_none() && self.violations == 0
    }
}

/// Closed interval `[lo, hi]` of densities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::Domain(format!("invalid interval [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    fn at(&self, s: f64) -> f64 {
        self.lo + s * (self.hi - self.lo)
    }
}

/// Radical inverse of `i` in `base`, the Halton sequence coordinate.
fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Deterministic low-discrepancy `(ρ, ρ̄)` pairs covering the two ranges.
pub fn sample_pairs(rho_range: Interval, rho_bar_range: Interval, n: usize) -> Vec<(f64, f64)> {
    (1..=n)
        .map(|i| (rho_range.at(halton(i, 2)), rho_bar_range.at(halton(i, 3))))
        .collect()
}

const SAFETY: f64 = 0.99;
const ROUNDING: f64 = 1e-12;

/// Checks the lower bound that matches the law's exponent over `n_samples`
/// deterministic pairs. `m > 2` uses the compact-range search.
pub fn certify_bounds(
    law: &EntropyLaw,
    rho_range: Interval,
    rho_bar_range: Interval,
    n_samples: usize,
) -> Result<BoundCertificate> {
    if rho_range.lo <= 0.0 || rho_bar_range.lo <= 0.0 {
        return Err(Error::Domain(
            "sample ranges must lie in (0, inf)".to_string(),
        ));
    }
    let pairs = sample_pairs(rho_range, rho_bar_range, n_samples);
    if law.m() > 2.0 {
        Ok(certify_compact_range(law, &pairs))
    } else {
        Ok(certify_pairs(law, &pairs))
    }
}

/// Pointwise lower bound for `m ≤ 2` on explicit sample pairs.
pub fn certify_pairs(law: &EntropyLaw, pairs: &[(f64, f64)]) -> BoundCertificate {
    let m = law.m();
    let (regime, c1) = if law.is_logarithmic() {
        (BoundRegime::Logarithmic, law.k() / 2.0)
    } else {
        (BoundRegime::SubQuadratic, law.k() * m / 2.0)
    };
    let mut cert = BoundCertificate {
        regime,
        r0: None,
        c1,
        c2: None,
        samples_checked: pairs.len(),
        worst_margin: f64::INFINITY,
        violations: 0,
        pressure_constant: 0.0,
        failure: None,
    };
    if m > 2.0 {
        cert.failure = Some(format!(
            "pointwise quadratic bound is not available for m = {m} > 2"
        ));
        return cert;
    }
    for &(rho, rho_bar) in pairs {
        let lhs = law.rel_h(rho, rho_bar);
        let d = rho - rho_bar;
        let weight = if law.is_logarithmic() {
            (1.0 / rho).min(1.0 / rho_bar)
        } else {
            rho.powf(m - 2.0).min(rho_bar.powf(m - 2.0))
        };
        let rhs = c1 * weight * (d * d);
        record_margin(&mut cert, law, rho, rho_bar, lhs, rhs);
    }
    if pairs.is_empty() {
        cert.worst_margin = 0.0;
    }
    cert
}

fn record_margin(
    cert: &mut BoundCertificate,
    law: &EntropyLaw,
    rho: f64,
    rho_bar: f64,
    lhs: f64,
    rhs: f64,
) {
    let margin = lhs - rhs;
    cert.worst_margin = cert.worst_margin.min(margin);
    if margin < -ROUNDING * rhs.abs() {
        cert.violations += 1;
    }
    if lhs > 0.0 {
        let ratio = law.rel_p(rho, rho_bar).abs() / lhs;
        cert.pressure_constant = cert.pressure_constant.max(ratio);
    }
}

/// Searches `(R0, C1, C2)` such that `h(ρ|ρ̄) ≥ C1|ρ-ρ̄|²` for `ρ ≤ R0` and
/// `h(ρ|ρ̄) ≥ C2|ρ-ρ̄|^m` for `ρ > R0` on every sample.
///
/// `R0` is taken from sample quantiles; for each candidate the constants
/// are the infima of the two ratios shrunk by 1%, and the candidate with
/// the largest `min(C1, C2)` wins.
pub fn certify_compact_range(law: &EntropyLaw, pairs: &[(f64, f64)]) -> BoundCertificate {
    let m = law.m();
    let mut cert = BoundCertificate {
        regime: BoundRegime::CompactRange,
        r0: None,
        c1: 0.0,
        c2: None,
        samples_checked: pairs.len(),
        worst_margin: f64::INFINITY,
        violations: 0,
        pressure_constant: 0.0,
        failure: None,
    };
    if m <= 1.0 {
        cert.failure = Some("compact-range bound needs m > 1".to_string());
        return cert;
    }
    let mut sorted: Vec<(f64, f64)> = pairs
        .iter()
        .copied()
        .filter(|(r, rb)| r != rb)
        .collect();
    if sorted.is_empty() {
        cert.failure = Some("no sample with rho != rho_bar".to_string());
        return cert;
    }
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let quad: Vec<f64> = sorted
        .iter()
        .map(|&(r, rb)| law.rel_h(r, rb) / (r - rb).powi(2))
        .collect();
    let pow: Vec<f64> = sorted
        .iter()
        .map(|&(r, rb)| law.rel_h(r, rb) / (r - rb).abs().powf(m))
        .collect();
    let n = sorted.len();
    let mut prefix = vec![f64::INFINITY; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i].min(quad[i]);
    }
    let mut suffix = vec![f64::INFINITY; n + 1];
    for i in (0..n).rev() {
        suffix[i] = suffix[i + 1].min(pow[i]);
    }

    // split after index `cut`: samples [0, cut) are ≤ R0
    let candidates = 32usize;
    let mut best: Option<(usize, f64, f64)> = None;
    for q in 1..candidates {
        let cut = ((q * n) / candidates).clamp(1, n);
        let c1 = prefix[cut];
        let c2 = suffix[cut];
        let score = c1.min(c2);
        if !(score > 0.0) {
            continue;
        }
        if best.is_none_or(|(_, b1, b2)| score > b1.min(b2)) {
            best = Some((cut, c1, c2));
        }
    }
    let Some((cut, c1, c2)) = best else {
        cert.failure = Some("no admissible (C1, C2) at this sample density".to_string());
        return cert;
    };
    let r0 = if cut == 0 {
        sorted[0].0 * 0.5
    } else {
        sorted[cut - 1].0
    };
    cert.r0 = Some(r0);
    // an empty side is vacuous; borrow the other constant so both stay positive
    let (c1, c2) = match (c1.is_finite(), c2.is_finite()) {
        (true, true) => (c1, c2),
        (true, false) => (c1, c1),
        _ => (c2, c2),
    };
    cert.c1 = SAFETY * c1;
    cert.c2 = Some(SAFETY * c2);

    for &(rho, rho_bar) in pairs {
        let lhs = law.rel_h(rho, rho_bar);
        let d = (rho - rho_bar).abs();
        let rhs = if rho <= r0 {
            cert.c1 * d * d
        } else {
            cert.c2.unwrap_or(0.0) * d.powf(m)
        };
        record_margin(&mut cert, law, rho, rho_bar, lhs, rhs);
    }
    cert
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(m: f64) -> EntropyLaw {
        EntropyLaw::new(m, 1.0).unwrap()
    }

    #[test]
    fn h_values() {
        let e = std::f64::consts::E;
        assert!((law(1.0).eval_h(e).unwrap() - e).abs() < 1e-15);
        assert_eq!(law(2.0).eval_h(3.0).unwrap(), 9.0);
        assert_eq!(law(1.0).eval_h(1.0).unwrap(), 0.0);
        assert_eq!(law(1.0).eval_h(0.0).unwrap(), 0.0);
        assert_eq!(law(1.5).eval_h(0.0).unwrap(), 0.0);
    }

    #[test]
    fn h_rejects_bad_density() {
        assert!(law(2.0).eval_h(-1.0).is_err());
        assert!(law(2.0).eval_h(f64::NAN).is_err());
        assert!(law(2.0).eval_pressure(f64::INFINITY).is_err());
    }

    #[test]
    fn pressure_values() {
        // ρh' - h with h = 2ρ^1.5: 3ρ^1.5 - 2ρ^1.5 = ρ^1.5
        let l = law(1.5);
        let rho: f64 = 4.0;
        let oracle = rho * (3.0 * rho.sqrt()) - 2.0 * rho.powf(1.5);
        assert!((l.eval_pressure(rho).unwrap() - oracle).abs() < 1e-12);
        assert!((l.eval_pressure(rho).unwrap() - 8.0).abs() < 1e-12);
        assert_eq!(law(1.0).eval_pressure(5.0).unwrap(), 5.0);
        for m in [1.0, 1.3, 2.0, 3.0] {
            assert_eq!(law(m).eval_pressure(0.0).unwrap(), 0.0);
        }
    }

    #[test]
    fn relative_entropy_values() {
        let e = std::f64::consts::E;
        assert_eq!(law(2.0).relative_entropy(2.0, 1.0).unwrap(), 1.0);
        // e·1 - 0 - 1·(e - 1)
        assert!((law(1.0).relative_entropy(e, 1.0).unwrap() - 1.0).abs() < 1e-14);
        for m in [1.0, 1.5, 2.0, 3.0] {
            assert_eq!(law(m).relative_entropy(0.7, 0.7).unwrap(), 0.0);
        }
        assert!(law(2.0).relative_entropy(1.0, 0.0).is_err());
        assert!(law(2.0).relative_entropy(1.0, -1.0).is_err());
    }

    #[test]
    fn relative_entropy_matches_definition_away_from_diagonal() {
        for m in [1.0, 1.2, 1.7, 2.0, 2.5, 4.0] {
            let l = law(m);
            for &(r, rb) in &[(0.1, 2.0), (3.0, 0.5), (1.3, 1.0), (0.0, 1.5)] {
                let direct = l.h(r) - l.h(rb) - l.h_prime(rb) * (r - rb);
                let stable = l.rel_h(r, rb);
                assert!(
                    (direct - stable).abs() <= 1e-12 * direct.abs().max(1.0),
                    "m={m} r={r} rb={rb}: {direct} vs {stable}"
                );
            }
        }
    }

    #[test]
    fn relative_pressure_values() {
        assert_eq!(law(1.0).relative_pressure(3.0, 1.0).unwrap(), 0.0);
        // (m - 1) h(ρ|ρ̄) = 1 · (2 - 1)²
        assert_eq!(law(2.0).relative_pressure(2.0, 1.0).unwrap(), 1.0);
        assert_eq!(law(1.5).relative_pressure(2.0, 2.0).unwrap(), 0.0);
    }

    #[test]
    fn tail_validation() {
        let tail = Tail::Power {
            coefficient: 0.2,
            exponent: 1.5,
        };
        assert!(law(2.0).with_tail(tail).is_err());
        assert!(law(3.0).with_tail(tail).is_ok());
        let bad = Tail::Power {
            coefficient: 0.2,
            exponent: 3.5,
        };
        assert!(law(3.0).with_tail(bad).is_err());
        assert_eq!(law(3.0).tail_constant(), Some(2.0));
        assert_eq!(law(2.0).tail_constant(), None);
    }

    #[test]
    fn certificate_single_log_sample() {
        let cert = certify_pairs(&law(1.0), &[(2.0, 1.0)]);
        let oracle = 2.0 * 2f64.ln() - 1.0 - 0.25;
        assert!((cert.worst_margin - oracle).abs() < 1e-14);
        assert!(cert.worst_margin > 0.136 && cert.worst_margin < 0.137);
        assert!(cert.passed());
    }

    #[test]
    fn certificate_quadratic_is_tight() {
        let rho = Interval::new(0.01, 10.0).unwrap();
        let cert = certify_bounds(&law(2.0), rho, rho, 500).unwrap();
        assert_eq!(cert.c1, 1.0);
        assert!(cert.worst_margin >= 0.0);
        assert!(cert.worst_margin.abs() < 1e-12);
        assert!(cert.passed());
    }

    #[test]
    fn certificate_diagonal_has_zero_margin() {
        let pairs: Vec<_> = (1..50).map(|i| (0.1 * i as f64, 0.1 * i as f64)).collect();
        for m in [1.0, 1.5, 2.0] {
            let cert = certify_pairs(&law(m), &pairs);
            assert_eq!(cert.worst_margin, 0.0);
        }
    }

    #[test]
    fn compact_range_search_finds_constants() {
        let l = law(3.0)
            .with_tail(Tail::Power {
                coefficient: 0.5,
                exponent: 2.5,
            })
            .unwrap();
        let cert = certify_bounds(
            &l,
            Interval::new(1e-3, 50.0).unwrap(),
            Interval::new(0.5, 2.0).unwrap(),
            4000,
        )
        .unwrap();
        assert_eq!(cert.regime, BoundRegime::CompactRange);
        assert!(cert.passed(), "{cert:?}");
        assert!(cert.c1 > 0.0 && cert.c2.unwrap() > 0.0);
        assert!(cert.worst_margin >= 0.0);
        assert!(cert.pressure_constant.is_finite());
    }

    #[test]
    fn compact_range_reports_failure_instead_of_panicking() {
        let cert = certify_compact_range(&law(2.0), &[(1.0, 1.0)]);
        assert!(!cert.passed());
        assert!(cert.failure.is_some());
    }

    #[test]
    fn law_round_trips_through_toml() {
        let l = law(3.0)
            .with_tail(Tail::Power {
                coefficient: 0.1,
                exponent: 2.0,
            })
            .unwrap();
        let text = toml::to_string(&l).unwrap();
        let back: EntropyLaw = toml::from_str(&text).unwrap();
        assert_eq!(l, back);
        let bad: std::result::Result<EntropyLaw, _> = toml::from_str("m = 0.5\nk = 1.0\n");
        assert!(bad.is_err());
    }
}
