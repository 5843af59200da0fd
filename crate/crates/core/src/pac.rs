//! PAC-MDP thresholds and sample bounds.
//!
//! Inputs are read as the decimal numbers they print as (`0.1` is one tenth,
//! not the nearest binary fraction). A ceiling is read off a double-precision
//! estimate only when that estimate is far from an integer; otherwise the
//! expression is evaluated again with 50 significant digits, so results do
//! not drift across integer boundaries.

use std::fmt;
use std::str::FromStr;

use dashu_float::DBig;
use dashu_int::ops::Gcd;
use dashu_int::UBig;
use thiserror::Error;

const DIGITS: usize = 50;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PacError {
    #[error("epsilon must lie in (0, r_max / (1 - gamma)); got {0}")]
    Epsilon(f64),
    #[error("delta must lie in (0, 1); got {0}")]
    Delta(f64),
    #[error("gamma must lie in [0, 1); got {0}")]
    Gamma(f64),
    #[error("r_max must be positive and finite; got {0}")]
    RMax(f64),
    #[error("state, action and automaton counts must be positive")]
    EmptySpace,
    #[error("bucket count is required in bucket mode")]
    MissingBuckets,
    #[error("threshold does not fit in 64 bits")]
    Overflow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PacParams {
    pub epsilon: f64,
    pub delta: f64,
    pub gamma: f64,
    pub r_max: f64,
    pub n_states: u64,
    pub n_actions: u64,
    pub n_q: u64,
    pub n_buckets: Option<u64>,
    pub deterministic_rm: bool,
}

impl PacParams {
    pub fn new(epsilon: f64, delta: f64, gamma: f64, r_max: f64) -> Self {
        PacParams {
            epsilon,
            delta,
            gamma,
            r_max,
            n_states: 1,
            n_actions: 1,
            n_q: 1,
            n_buckets: None,
            deterministic_rm: true,
        }
    }

    pub fn sizes(mut self, n_states: u64, n_actions: u64, n_q: u64) -> Self {
        self.n_states = n_states;
        self.n_actions = n_actions;
        self.n_q = n_q;
        self
    }

    pub fn buckets(mut self, n_buckets: u64) -> Self {
        self.n_buckets = Some(n_buckets);
        self
    }

    pub fn stochastic_rm(mut self) -> Self {
        self.deterministic_rm = false;
        self
    }

    fn validate(&self) -> Result<(), PacError> {
        if !(self.gamma >= 0.0 && self.gamma < 1.0) {
            return Err(PacError::Gamma(self.gamma));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(PacError::RMax(self.r_max));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(PacError::Delta(self.delta));
        }
        // Compare in exact decimal arithmetic: epsilon * (1 - gamma) < r_max.
        let upper = dec(self.r_max);
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() || dec(self.epsilon) * one_minus(self.gamma) >= upper {
            return Err(PacError::Epsilon(self.epsilon));
        }
        if self.n_states == 0 || self.n_actions == 0 || self.n_q == 0 {
            return Err(PacError::EmptySpace);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub m_e: u64,
    pub m_q: u64,
    pub t: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BucketThresholds {
    pub t_et: u64,
    pub t_er: u64,
    pub t_qt: u64,
    pub t_qr: u64,
}

/// Non-negative rational in lowest terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ratio {
    pub num: UBig,
    pub den: UBig,
}

impl Ratio {
    fn new(num: UBig, den: UBig) -> Self {
        assert!(den != UBig::ZERO);
        if num == UBig::ZERO {
            return Ratio { num, den: UBig::ONE };
        }
        let g = (&num).gcd(&den);
        Ratio {
            num: num / &g,
            den: den / g,
        }
    }

    pub fn to_f64(&self) -> f64 {
        let n = DBig::from(self.num.clone()).with_precision(DIGITS).value();
        let d = DBig::from(self.den.clone()).with_precision(DIGITS).value();
        (n / d).to_f64().value()
    }

    pub fn is_integer(&self) -> bool {
        self.den == UBig::ONE
    }
}

impl PartialOrd for Ratio {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some((&self.num * &other.den).cmp(&(&other.num * &self.den)))
    }
}

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// `x` as the decimal number its shortest round-trip representation denotes.
fn dec(x: f64) -> DBig {
    DBig::from_str(&format!("{x}"))
        .expect("finite float prints as a decimal")
        .with_precision(DIGITS)
        .value()
}

fn int(n: u64) -> DBig {
    DBig::from(n).with_precision(DIGITS).value()
}

fn one_minus(gamma: f64) -> DBig {
    int(1) - dec(gamma)
}

/// Decimal `x` as an exact fraction `num / 10^scale`.
fn dec_ratio(x: f64) -> (UBig, UBig) {
    let text = format!("{x}");
    let (whole, frac) = text.split_once('.').unwrap_or((&text, ""));
    let digits = format!("{whole}{frac}");
    let num = UBig::from_str(&digits).expect("non-negative decimal");
    (num, UBig::from(10u8).pow(frac.len()))
}

/// Ceiling of a positive expression: from `approx` when no integer lies
/// within its error margin, else from the exact evaluation.
fn ceil_fast(approx: f64, exact: impl FnOnce() -> DBig) -> Result<u64, PacError> {
    let margin = 1e-9 * approx.abs().max(1.0);
    if approx.is_finite() && approx > margin && approx < 1e15 && (approx - approx.round()).abs() > margin {
        return Ok(approx.ceil() as u64);
    }
    ceil_u64(exact())
}

fn ceil_u64(x: DBig) -> Result<u64, PacError> {
    let c = x.ceil().to_int().value();
    if c < dashu_int::IBig::ZERO {
        return Ok(0);
    }
    u64::try_from(c).map_err(|_| PacError::Overflow)
}

/// `ceil(8 R^2 / beta^2 * ln(count / delta))`.
fn hoeffding_count(r_max: f64, beta: &DBig, count: u64, delta: f64) -> Result<u64, PacError> {
    let b = beta.to_f64().value();
    let approx = 8.0 * r_max * r_max / (b * b) * (count as f64 / delta).ln();
    ceil_fast(approx, || {
        let r = dec(r_max);
        let log = (int(count) / dec(delta)).ln();
        int(8) * &r * &r / (beta * beta) * log
    })
}

/// `ceil((1 - gamma)^-1 ln(4 R / (epsilon (1 - gamma))))`.
pub fn vi_horizon(gamma: f64, epsilon: f64, r_max: f64) -> Result<u64, PacError> {
    PacParams::new(epsilon, 0.5, gamma, r_max).validate()?;
    let approx = (4.0 * r_max / (epsilon * (1.0 - gamma))).ln() / (1.0 - gamma);
    ceil_fast(approx, || {
        let g = one_minus(gamma);
        let arg = int(4) * dec(r_max) / (dec(epsilon) * &g);
        arg.ln() / g
    })
}

/// `m_E`, `m_Q` and the value-iteration horizon `T` for the discrete agent,
/// with `beta = epsilon (1 - gamma) / 4`.
pub fn thresholds(p: &PacParams) -> Result<Thresholds, PacError> {
    p.validate()?;
    let beta = dec(p.epsilon) * one_minus(p.gamma) / int(4);
    let m_e = hoeffding_count(p.r_max, &beta, 2 * p.n_states * p.n_actions, p.delta)?;
    let m_q = if p.deterministic_rm {
        1
    } else {
        hoeffding_count(p.r_max, &beta, 2 * p.n_states * p.n_q, p.delta)?
    };
    let t = vi_horizon(p.gamma, p.epsilon, p.r_max)?;
    Ok(Thresholds { m_e, m_q, t })
}

/// `N = 2 / ((1 - gamma) epsilon) (|S||A| m_E + |S||Q| m_Q)`, exactly.
pub fn sample_bound(p: &PacParams, m_e: u64, m_q: u64) -> Result<Ratio, PacError> {
    p.validate()?;
    let visits = UBig::from(p.n_states) * UBig::from(p.n_actions) * UBig::from(m_e)
        + UBig::from(p.n_states) * UBig::from(p.n_q) * UBig::from(m_q);
    Ok(scaled_bound(p, visits))
}

/// The same bound for R-MAX on the flat product: `2 / ((1 - gamma) epsilon) |S||Q||A| m_E`.
pub fn flat_sample_bound(p: &PacParams, m_e: u64) -> Result<Ratio, PacError> {
    p.validate()?;
    let visits = UBig::from(p.n_states) * UBig::from(p.n_q) * UBig::from(p.n_actions) * UBig::from(m_e);
    Ok(scaled_bound(p, visits))
}

fn scaled_bound(p: &PacParams, visits: UBig) -> Ratio {
    let (g_num, g_den) = dec_ratio(p.gamma);
    let (e_num, e_den) = dec_ratio(p.epsilon);
    // 1 - gamma = (g_den - g_num) / g_den
    let num = UBig::from(2u8) * visits * g_den.clone() * e_den;
    let den = (g_den - g_num) * e_num;
    Ratio::new(num, den)
}

/// Per-counter thresholds for the bucket agent with `beta = epsilon (1 - gamma) / 8`;
/// the log terms use `2|B||A| / delta` and `2|B||Q| / delta`.
pub fn bucket_thresholds(p: &PacParams) -> Result<BucketThresholds, PacError> {
    p.validate()?;
    let n_b = p.n_buckets.ok_or(PacError::MissingBuckets)?;
    if n_b == 0 {
        return Err(PacError::EmptySpace);
    }
    let beta = dec(p.epsilon) * one_minus(p.gamma) / int(8);
    let t_e = hoeffding_count(p.r_max, &beta, 2 * n_b * p.n_actions, p.delta)?;
    let t_q = if p.deterministic_rm {
        1
    } else {
        hoeffding_count(p.r_max, &beta, 2 * n_b * p.n_q, p.delta)?
    };
    Ok(BucketThresholds {
        t_et: t_e,
        t_er: t_e,
        t_qt: t_q,
        t_qr: t_q,
    })
}

/// The single threshold `ceil(128 R^2 / (epsilon (1 - gamma))^2 ln(2|B||A| / delta))`
/// suggested as a common setting for all four bucket counters.
pub fn bucket_common_threshold(p: &PacParams) -> Result<u64, PacError> {
    p.validate()?;
    let n_b = p.n_buckets.ok_or(PacError::MissingBuckets)?;
    let s = p.epsilon * (1.0 - p.gamma);
    let approx = 128.0 * p.r_max * p.r_max / (s * s) * ((2 * n_b * p.n_actions) as f64 / p.delta).ln();
    ceil_fast(approx, || {
        let scale = dec(p.epsilon) * one_minus(p.gamma);
        let r = dec(p.r_max);
        let log = (int(2 * n_b * p.n_actions) / dec(p.delta)).ln();
        int(128) * &r * &r / (&scale * &scale) * log
    })
}
