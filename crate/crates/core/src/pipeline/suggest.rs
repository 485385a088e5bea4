use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Private sample size suggested by the compression-to-learning reduction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuggestN {
    pub n: u64,
    /// Leading constant; the reduction only fixes n up to a constant factor.
    pub constant: f64,
    /// Share of β given to selection (the rest goes to compression).
    pub selection_share: f64,
}

/// Inputs of [`suggest_n`]. `bits` (t) and `tau` should already be
/// evaluated at the compression accuracy α/6.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuggestRequest {
    pub alpha: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub tau: usize,
    pub bits: usize,
    /// Public sample size; defaults to `tau` when every sample is forwarded.
    pub m: Option<usize>,
    pub constant: f64,
    pub selection_share: f64,
}

impl SuggestRequest {
    pub fn new(alpha: f64, beta: f64, epsilon: f64, tau: usize, bits: usize) -> Self {
        SuggestRequest {
            alpha,
            beta,
            epsilon,
            tau,
            bits,
            m: None,
            constant: 1.0,
            selection_share: 0.5,
        }
    }
}

/// n = C·(1/α² + 1/(αε))·(t + τ·ln m + ln(1/β_sel)) with β_sel =
/// `selection_share`·β.
pub fn suggest_n(req: &SuggestRequest) -> Result<SuggestN> {
    let SuggestRequest {
        alpha,
        beta,
        epsilon,
        tau,
        bits,
        m,
        constant,
        selection_share,
    } = *req;
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::invalid("alpha", "must be in (0, 1]"));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(Error::invalid("beta", "must be in (0, 1]"));
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::invalid("epsilon", "must be positive and finite"));
    }
    if !(constant > 0.0 && constant.is_finite()) {
        return Err(Error::invalid("constant", "must be positive"));
    }
    if !(selection_share > 0.0 && selection_share < 1.0) {
        return Err(Error::invalid("selection_share", "must be in (0, 1)"));
    }
    let m = m.unwrap_or(tau);
    if m < tau {
        return Err(Error::invalid("m", "must be at least tau"));
    }
    let log_m = if m > 0 { (m as f64).ln() } else { 0.0 };
    let rate = 1.0 / (alpha * alpha) + 1.0 / (alpha * epsilon);
    let size = bits as f64 + tau as f64 * log_m + (1.0 / (selection_share * beta)).ln();
    Ok(SuggestN {
        n: (constant * rate * size).ceil() as u64,
        constant,
        selection_share,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formula_value() {
        let req = SuggestRequest::new(0.1, 0.1, 1.0, 32, 40);
        let s = suggest_n(&req).unwrap();
        let want = 110.0 * (40.0 + 32.0 * 32f64.ln() + 20f64.ln());
        assert_eq!(s.n, want.ceil() as u64);
        let doubled = suggest_n(&SuggestRequest {
            constant: 2.0,
            ..req
        })
        .unwrap();
        assert!(doubled.n >= 2 * s.n - 1);
    }

    #[test]
    fn more_privacy_needs_more_samples() {
        let a = suggest_n(&SuggestRequest::new(0.1, 0.1, 1.0, 8, 10)).unwrap();
        let b = suggest_n(&SuggestRequest::new(0.1, 0.1, 0.1, 8, 10)).unwrap();
        assert!(b.n > a.n);
        let short = SuggestRequest {
            m: Some(4),
            ..SuggestRequest::new(0.1, 0.1, 1.0, 8, 10)
        };
        assert!(suggest_n(&short).is_err());
    }
}
