//! Continued fractions, best approximations and growth diagnostics of the denominators.

use serde::{Deserialize, Serialize};

use crate::error::{CalabiError, Result};

/// Partial quotients with their convergents `p_n/q_n`.
///
/// Integer data is exact; when a convergent would overflow `i128` the
/// expansion is marked `truncated`. Synthetic expansions may continue past
/// that point in `log_q` only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub a: Vec<i128>,
    pub p: Vec<i128>,
    pub q: Vec<i128>,
    /// `ln q_n`, possibly longer than `q`.
    pub log_q: Vec<f64>,
    /// Quotients derived from a float that are certain despite rounding.
    pub reliable: Vec<bool>,
    /// The expansion ended because the input is rational at this precision.
    pub terminated: bool,
    /// Convergents stopped early to avoid integer overflow.
    pub truncated: bool,
}

impl ContinuedFraction {
    pub fn depth(&self) -> usize {
        self.a.len()
    }

    /// Index of the first quotient that rounding could have changed.
    pub fn reliable_depth(&self) -> usize {
        self.reliable.iter().take_while(|&&r| r).count()
    }

    /// `[a₀; a₁, …, a_n]` evaluated in floating point.
    pub fn value(&self) -> f64 {
        match (self.p.last(), self.q.last()) {
            (Some(&p), Some(&q)) => p as f64 / q as f64,
            _ => f64::NAN,
        }
    }

    fn empty() -> Self {
        Self {
            a: Vec::new(),
            p: Vec::new(),
            q: Vec::new(),
            log_q: Vec::new(),
            reliable: Vec::new(),
            terminated: false,
            truncated: false,
        }
    }

    /// Appends `a_n` and its convergent. Returns false on overflow.
    fn push(&mut self, a: i128) -> bool {
        let n = self.a.len();
        let (p, q) = match n {
            0 => (Some(a), Some(1)),
            1 => (
                a.checked_mul(self.p[0]).and_then(|x| x.checked_add(1)),
                Some(a),
            ),
            _ => (
                a.checked_mul(self.p[n - 1])
                    .and_then(|x| x.checked_add(self.p[n - 2])),
                a.checked_mul(self.q[n - 1])
                    .and_then(|x| x.checked_add(self.q[n - 2])),
            ),
        };
        match (p, q) {
            (Some(p), Some(q)) => {
                self.a.push(a);
                self.p.push(p);
                self.q.push(q);
                self.log_q.push((q as f64).ln());
                true
            }
            _ => {
                self.truncated = true;
                false
            }
        }
    }
}

/// Remainders below this are treated as an exact rational end.
const TERMINATION_TOL: f64 = 1e-9;

/// Expansion of `alpha` by the floor/reciprocal recursion.
///
/// A running bound on the accumulated rounding error marks each quotient as
/// reliable only while the bound is smaller than the distance to the nearest
/// integer; past that the quotients describe the float, not the intended number.
pub fn continued_fraction(alpha: f64, depth: usize) -> Result<ContinuedFraction> {
    if !alpha.is_finite() {
        return Err(CalabiError::InvalidParameter(format!("alpha = {alpha} is not finite")));
    }
    if depth == 0 {
        return Err(CalabiError::InvalidParameter("depth must be at least 1".into()));
    }
    let mut cf = ContinuedFraction::empty();
    let mut x = alpha;
    let mut err = f64::EPSILON * alpha.abs().max(1.0);
    let mut trusted = true;
    for _ in 0..depth {
        // a remainder just below 1 is an integer that rounding pushed down
        let a = if (x - x.round()).abs() < TERMINATION_TOL {
            x.round()
        } else {
            x.floor()
        };
        if a.abs() >= 1e30 {
            cf.truncated = true;
            break;
        }
        let frac = (x - a).max(0.0);
        let dist = frac.min(1.0 - frac);
        trusted &= err < 0.5 * dist || frac < TERMINATION_TOL;
        if !cf.push(a as i128) {
            break;
        }
        cf.reliable.push(trusted);
        if frac < TERMINATION_TOL {
            cf.terminated = true;
            break;
        }
        x = 1.0 / frac;
        err = err / (frac * frac) + f64::EPSILON * x;
    }
    Ok(cf)
}

/// Exact expansion with the given quotients (`a_i ≥ 1` for `i ≥ 1`).
pub fn from_quotients(a: &[i128]) -> Result<ContinuedFraction> {
    if a.iter().skip(1).any(|&x| x < 1) {
        return Err(CalabiError::InvalidParameter(
            "partial quotients after the first must be positive".into(),
        ));
    }
    let mut cf = ContinuedFraction::empty();
    for &x in a {
        if !cf.push(x) {
            break;
        }
        cf.reliable.push(true);
    }
    Ok(cf)
}

/// `a₀ = 0`, `a_{n+1} = base^{q_n}`.
///
/// Quotients are exact while the convergents fit in `i128`; after that one
/// more `ln q` is produced from `ln q_{n+1} = q_n ln(base) + ln q_n + O(1/a)`.
pub fn power_rule(base: u32, depth: usize) -> Result<ContinuedFraction> {
    if base < 2 {
        return Err(CalabiError::InvalidParameter("base must be at least 2".into()));
    }
    let mut cf = ContinuedFraction::empty();
    cf.push(0);
    cf.reliable.push(true);
    while cf.a.len() < depth {
        let qn = *cf.q.last().expect("nonempty");
        let a = u32::try_from(qn)
            .ok()
            .and_then(|e| (base as i128).checked_pow(e));
        match a {
            Some(a) if cf.push(a) => cf.reliable.push(true),
            _ => {
                cf.truncated = true;
                let lq = qn as f64 * (base as f64).ln() + cf.log_q.last().expect("nonempty");
                cf.log_q.push(lq);
                break;
            }
        }
    }
    Ok(cf)
}

/// One row of the two-sided best-approximation inequality.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxCheck {
    pub n: usize,
    /// `1/(q_n (q_n + q_{n+1}))`.
    pub lower: f64,
    /// `(−1)ⁿ (α − p_n/q_n)`.
    pub signed_error: f64,
    /// `1/(q_n q_{n+1})`.
    pub upper: f64,
    /// `None` at the last convergent, where `q_{n+1}` does not exist.
    pub holds: Option<bool>,
    pub reliable: bool,
}

/// Per-`n` truth of `1/(q_n(q_n+q_{n+1})) ≤ (−1)ⁿ(α − p_n/q_n) ≤ 1/(q_n q_{n+1})`.
pub fn best_approx_check(cf: &ContinuedFraction, alpha: f64) -> Vec<ApproxCheck> {
    (0..cf.q.len())
        .map(|n| {
            let (p, q) = (cf.p[n] as f64, cf.q[n] as f64);
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            let signed_error = sign * alpha.mul_add(q, -p) / q;
            let next = cf.q.get(n + 1).map(|&x| x as f64);
            let reliable = cf.reliable.get(n + 1).copied().unwrap_or(false)
                && cf.reliable[..=n].iter().all(|&r| r);
            match next {
                Some(qn1) => {
                    let lower = 1.0 / (q * (q + qn1));
                    let upper = 1.0 / (q * qn1);
                    ApproxCheck {
                        n,
                        lower,
                        signed_error,
                        upper,
                        holds: Some(lower <= signed_error && signed_error <= upper),
                        reliable,
                    }
                }
                None => ApproxCheck {
                    n,
                    lower: f64::NAN,
                    signed_error,
                    upper: f64::NAN,
                    holds: None,
                    reliable: false,
                },
            }
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthLabel {
    BrunoLike,
    NonBrunoLike,
    SuperLiouvilleLike,
    Inconclusive,
}

impl GrowthLabel {
    pub fn as_str(self) -> &'static str {
        match self {
            GrowthLabel::BrunoLike => "bruno-like",
            GrowthLabel::NonBrunoLike => "non-bruno-like",
            GrowthLabel::SuperLiouvilleLike => "super-liouville-like",
            GrowthLabel::Inconclusive => "inconclusive",
        }
    }
}

/// Finite-data view of the growth of the denominators.
///
/// Series convergence and `limsup` cannot be decided from finitely many
/// terms; the labels describe the trend of the available ones.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Classification {
    /// `ln q_{n+1} / q_n`.
    pub ratios: Vec<f64>,
    pub running_sum: Vec<f64>,
    pub labels: Vec<GrowthLabel>,
    pub caveat: String,
}

pub fn classify(cf: &ContinuedFraction) -> Result<Classification> {
    if cf.log_q.len() < 3 {
        return Err(CalabiError::InvalidParameter(
            "classification needs at least three denominators".into(),
        ));
    }
    let ratios: Vec<f64> = (0..cf.log_q.len() - 1)
        .map(|n| cf.log_q[n + 1] / cf.log_q[n].exp())
        .collect();
    let mut acc = 0.0;
    let running_sum: Vec<f64> = ratios
        .iter()
        .map(|r| {
            acc += r;
            acc
        })
        .collect();
    let k = ratios.len();
    let tail = &ratios[k.saturating_sub(3)..];
    let last = ratios[k - 1];
    let peak = ratios.iter().copied().fold(f64::MIN_POSITIVE, f64::max);
    let mut labels = Vec::new();
    let decaying = tail.windows(2).all(|w| w[1] < w[0]) && last < 1e-2 * peak;
    let sustained = tail.iter().all(|&r| r >= 0.5 * peak.min(1.0)) && tail.len() >= 2;
    if decaying {
        labels.push(GrowthLabel::BrunoLike);
    } else if sustained {
        labels.push(GrowthLabel::NonBrunoLike);
        if tail.windows(2).all(|w| w[1] > 2.0 * w[0]) {
            labels.push(GrowthLabel::SuperLiouvilleLike);
        }
    } else {
        labels.push(GrowthLabel::Inconclusive);
    }
    Ok(Classification {
        ratios,
        running_sum,
        labels,
        caveat: "heuristic: finite data cannot decide series convergence or limsup".into(),
    })
}
