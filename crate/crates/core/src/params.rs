//! Parameter gate for the hardness regime and the closed-form tables
//! (minimum constellation, maximum SNR, computational secrecy capacity).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::wiretap::SystemParams;

/// Exponent `n·log2(log2 n)/log2 n` of the LLL approximation factor.
pub fn lll_exponent(n: usize) -> Result<f64> {
    if n < 4 {
        return Err(Error::Domain(format!("constellation bound undefined for n = {n} < 4")));
    }
    let l = (n as f64).log2();
    Ok(n as f64 * l.log2() / l)
}

/// Minimum `log2 M`: `log2(m_slack) + n·log2(log2 n)/log2 n`.
pub fn required_log2m(n: usize, m_slack: f64) -> Result<f64> {
    if !(m_slack > 0.0) {
        return Err(Error::InvalidParameter(format!("m_slack must be positive, got {m_slack}")));
    }
    Ok(m_slack.log2() + lll_exponent(n)?)
}

/// Minimum noise parameter `√n·k²/m_slack` (the bound itself is excluded).
pub fn min_alpha(n: usize, k: f64, m_slack: f64) -> f64 {
    (n as f64).sqrt() * k * k / m_slack
}

/// Received SNR `10·log10(M·k²/(3α))` in dB.
pub fn snr_db(m: f64, alpha: f64, k: f64) -> f64 {
    10.0 * (m * k * k / (3.0 * alpha)).log10()
}

/// Largest SNR compatible with the hardness constraints:
/// `10·log10(2^L·m_slack²/(3√n))` with `L = n·log2(log2 n)/log2 n`.
pub fn max_snr_db(n: usize, m_slack: f64) -> Result<f64> {
    let l = lll_exponent(n)?;
    if !(m_slack > 0.0) {
        return Err(Error::InvalidParameter(format!("m_slack must be positive, got {m_slack}")));
    }
    Ok(10.0 * (l * 2f64.log10() + (m_slack * m_slack / (3.0 * (n as f64).sqrt())).log10()))
}

/// `2·√(n·log2 M·log2 1.01)` bits per channel use.
pub fn secrecy_capacity(n: usize, log2m: f64) -> Result<f64> {
    if n == 0 || !(log2m > 0.0) {
        return Err(Error::InvalidParameter(format!("capacity needs n >= 1 and log2 M > 0, got n = {n}, log2 M = {log2m}")));
    }
    Ok(2.0 * (n as f64 * log2m * 1.01f64.log2()).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    pub noise_ok: bool,
    /// `m_slack·α/k² − √n`.
    pub noise_margin: f64,
    pub constellation_ok: bool,
    pub log2m_required: f64,
    pub log2m_actual: f64,
    pub snr_db: f64,
    pub capacity_bits: f64,
}

impl ConstraintReport {
    pub fn satisfied(&self) -> bool {
        self.noise_ok && self.constellation_ok
    }

    /// Human-readable list of violated constraints.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !self.noise_ok {
            v.push(format!("noise constraint m*alpha/k^2 > sqrt(n) violated (margin {:.6})", self.noise_margin));
        }
        if !self.constellation_ok {
            v.push(format!(
                "constellation constraint log2 M > {:.6} violated (log2 M = {:.6})",
                self.log2m_required, self.log2m_actual
            ));
        }
        v
    }
}

/// Evaluates both hardness constraints (strict inequalities).
pub fn check_hardness_constraints(p: &SystemParams) -> Result<ConstraintReport> {
    p.validate()?;
    let log2m_required = required_log2m(p.n, p.m_slack)?;
    let log2m_actual = (p.m as f64).log2();
    let noise_margin = p.m_slack * p.alpha / (p.k * p.k) - (p.n as f64).sqrt();
    Ok(ConstraintReport {
        noise_ok: noise_margin > 0.0,
        noise_margin,
        constellation_ok: log2m_actual > log2m_required,
        log2m_required,
        log2m_actual,
        snr_db: snr_db(p.m as f64, p.alpha, p.k),
        capacity_bits: secrecy_capacity(p.n, log2m_actual)?,
    })
}

/// One row of the parameter table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub n: usize,
    pub log2m: f64,
    pub snr_db: f64,
    pub capacity: f64,
}

/// Minimum `log2 M`, maximum SNR and the capacity at that `log2 M`.
pub fn table_row(n: usize, m_slack: f64) -> Result<TableRow> {
    let log2m = required_log2m(n, m_slack)?;
    Ok(TableRow { n, log2m, snr_db: max_snr_db(n, m_slack)?, capacity: secrecy_capacity(n, log2m)? })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n256_requires_96_bits() {
        assert!((required_log2m(256, 1.0).unwrap() - 96.0).abs() < 1e-12);
    }

    #[test]
    fn small_n_is_domain_error() {
        assert!(matches!(required_log2m(3, 1.0), Err(Error::Domain(_))));
        assert!(matches!(max_snr_db(2, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn noise_boundary_is_strict() {
        let n = 16;
        let mut p = SystemParams::new(n, 1 << 20, min_alpha(n, 1.0, 1.0), 1.0).unwrap();
        let r = check_hardness_constraints(&p).unwrap();
        assert!(!r.noise_ok);
        p.alpha *= 1.0 + 1e-9;
        assert!(check_hardness_constraints(&p).unwrap().noise_ok);
    }

    #[test]
    fn capacity_unit_case() {
        let c = secrecy_capacity(1, 1.0).unwrap();
        assert!((c - 2.0 * 1.01f64.log2().sqrt()).abs() < 1e-15);
        assert!(secrecy_capacity(0, 1.0).is_err());
    }
}
