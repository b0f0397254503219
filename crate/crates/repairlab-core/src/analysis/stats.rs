//! Chi-square test of independence for 2×2 contingency tables: the
//! Pearson statistic (no continuity correction) and its upper-tail
//! p-value for one degree of freedom, computed through the regularized
//! incomplete gamma function.

use serde::{Deserialize, Serialize};

use super::AnalysisError;

/// A 2×2 contingency table.
///
/// Reading for the benchmark-overfitting test: `a` = bugs patched on the
/// reference benchmark, `b` = reference bugs not patched, `c` = bugs
/// patched on all other benchmarks combined, `d` = other bugs not patched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable {
    /// Builds the table from "patched k of n" pairs for the reference
    /// benchmark and the rest of the corpus.
    pub fn from_patched_counts(
        patched_reference: u64,
        reference_size: u64,
        patched_elsewhere: u64,
        elsewhere_size: u64,
    ) -> Result<Self, AnalysisError> {
        if patched_reference > reference_size || patched_elsewhere > elsewhere_size {
            return Err(AnalysisError::InvalidInput(format!(
                "patched counts exceed population sizes: {patched_reference}/{reference_size}, \
                 {patched_elsewhere}/{elsewhere_size}"
            )));
        }
        Ok(ContingencyTable {
            a: patched_reference,
            b: reference_size - patched_reference,
            c: patched_elsewhere,
            d: elsewhere_size - patched_elsewhere,
        })
    }

    fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    /// The four marginals (row and column sums).
    fn marginals(&self) -> [u64; 4] {
        [
            self.a + self.b,
            self.c + self.d,
            self.a + self.c,
            self.b + self.d,
        ]
    }
}

/// Pearson chi-square statistic for a 2×2 table, without Yates continuity
/// correction: `N(ad − bc)² / ((a+b)(c+d)(a+c)(b+d))` with `N` the grand
/// total. Zero when the rows are proportional.
pub fn chi_square_statistic(table: &ContingencyTable) -> Result<f64, AnalysisError> {
    if table.total() == 0 || table.marginals().contains(&0) {
        return Err(AnalysisError::DegenerateTable(*table));
    }
    let a = table.a as f64;
    let b = table.b as f64;
    let c = table.c as f64;
    let d = table.d as f64;
    let n = a + b + c + d;
    let det = a * d - b * c;
    let denom = (a + b) * (c + d) * (a + c) * (b + d);
    Ok(n * det * det / denom)
}

/// Upper-tail probability of the chi-square distribution with `df = 1`
/// (the only supported value), i.e. `erfc(sqrt(statistic / 2))`, evaluated
/// as the regularized upper incomplete gamma function `Q(1/2, x/2)`.
/// Absolute accuracy is at least 1e-8 over `[0, 50]`.
pub fn chi_square_p_value(statistic: f64, df: u32) -> Result<f64, AnalysisError> {
    if df != 1 {
        return Err(AnalysisError::UnsupportedDf(df));
    }
    if !(statistic >= 0.0) {
        return Err(AnalysisError::InvalidInput(format!(
            "statistic must be >= 0, got {statistic}"
        )));
    }
    Ok(gamma_q(0.5, statistic / 2.0))
}

/// Natural log of the gamma function (Lanczos approximation, g = 5,
/// accurate to ~1e-15 over the positive reals).
fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 6] = [
        76.18009172947146,
        -86.50532032941677,
        24.01409824083091,
        -1.231739572450155,
        0.1208650973866179e-2,
        -0.5395239384953e-5,
    ];
    let mut series = 1.000000000190015;
    for (i, c) in COEFFS.iter().enumerate() {
        series += c / (x + 1.0 + i as f64);
    }
    let tmp = x + 5.5;
    (x + 0.5) * tmp.ln() - tmp + (2.5066282746310005 * series / x).ln()
}

/// Regularized lower incomplete gamma P(a, x) by its power series;
/// converges fast for x < a + 1.
fn gamma_p_series(a: f64, x: f64) -> f64 {
    let mut term = 1.0 / a;
    let mut sum = term;
    let mut n = a;
    for _ in 0..500 {
        n += 1.0;
        term *= x / n;
        sum += term;
        if term.abs() < sum.abs() * 1e-16 {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x) by Lentz's continued
/// fraction; converges fast for x >= a + 1.
fn gamma_q_continued_fraction(a: f64, x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0 - a;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..500 {
        let an = -(i as f64) * (i as f64 - a);
        b += 2.0;
        d = an * d + b;
        if d.abs() < TINY {
            d = TINY;
        }
        c = b + an / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h * (-x + a * x.ln() - ln_gamma(a)).exp()
}

/// Regularized upper incomplete gamma Q(a, x), choosing the
/// representation that converges in each region.
fn gamma_q(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    if x < a + 1.0 {
        1.0 - gamma_p_series(a, x)
    } else {
        gamma_q_continued_fraction(a, x)
    }
}
