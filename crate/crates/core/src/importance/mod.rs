//! Linear regression of pairwise latent distances on dyadic covariates, with
//! Pratt and LMG relative-importance decompositions of R².

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::{pairs, DyadDesign};
use crate::stats::{mean, std_dev};

/// Ordinary least squares with an intercept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OlsFit {
    pub names: Vec<String>,
    /// Intercept first, then one slope per regressor.
    pub coefficients: Vec<f64>,
    /// Slopes rescaled by `sd(x_k) / sd(y)` (sample standard deviations).
    pub standardized: Vec<f64>,
    /// Correlation of each regressor with the response.
    pub correlations: Vec<f64>,
    pub r_squared: f64,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

/// Product-moment correlation.
pub fn pearson_correlation(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "vectors of length {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Validation("correlation needs at least two values".into()));
    }
    let (mx, my) = (mean(x), mean(y));
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 {
        return Err(Error::ZeroVariance("first vector".into()));
    }
    if syy == 0.0 {
        return Err(Error::ZeroVariance("second vector".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

/// Names of columns lying (numerically) in the span of the intercept and the
/// columns before them.
fn collinear_columns(names: &[String], columns: &[Vec<f64>]) -> Vec<String> {
    let m = columns.first().map_or(0, Vec::len);
    let mut basis: Vec<Vec<f64>> = vec![vec![1.0 / (m as f64).sqrt(); m]];
    let mut bad = Vec::new();
    for (name, col) in names.iter().zip(columns) {
        let norm0 = col.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut r = col.clone();
        for _ in 0..2 {
            for q in &basis {
                let c: f64 = r.iter().zip(q).map(|(a, b)| a * b).sum();
                r.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let norm = r.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm <= 1e-10 * norm0.max(f64::MIN_POSITIVE) || norm0 == 0.0 {
            bad.push(name.clone());
        } else {
            r.iter_mut().for_each(|x| *x /= norm);
            basis.push(r);
        }
    }
    bad
}

/// Least squares of `response` on named columns plus an intercept, solved by
/// QR decomposition.
pub fn ols_fit_columns(response: &[f64], names: &[String], columns: &[Vec<f64>]) -> Result<OlsFit> {
    let m = response.len();
    let p = columns.len();
    if names.len() != p || columns.iter().any(|c| c.len() != m) {
        return Err(Error::Dimension("regressor columns do not match the response".into()));
    }
    if m < p + 2 {
        return Err(Error::Validation(format!(
            "{m} observations for {p} regressors and an intercept"
        )));
    }
    if response.iter().chain(columns.iter().flatten()).any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("regression input".into()));
    }
    let bad = collinear_columns(names, columns);
    if !bad.is_empty() {
        return Err(Error::RankDeficient { columns: bad });
    }
    let x = DMatrix::from_fn(m, p + 1, |r, c| if c == 0 { 1.0 } else { columns[c - 1][r] });
    let y = DVector::from_column_slice(response);
    let qr = x.clone().qr();
    let qty = qr.q().transpose() * &y;
    let coef = qr
        .r()
        .solve_upper_triangular(&qty)
        .ok_or_else(|| Error::RankDeficient {
            columns: names.to_vec(),
        })?;
    let fitted: Vec<f64> = (&x * &coef).iter().copied().collect();
    let residuals: Vec<f64> = response.iter().zip(&fitted).map(|(a, b)| a - b).collect();
    let my = mean(response);
    let sst: f64 = response.iter().map(|v| (v - my) * (v - my)).sum();
    let sse: f64 = residuals.iter().map(|r| r * r).sum();
    let constant = sst <= 1e-300;
    let r_squared = if constant { 0.0 } else { (1.0 - sse / sst).clamp(0.0, 1.0) };
    let sy = std_dev(response);
    let mut coefficients: Vec<f64> = coef.iter().copied().collect();
    if constant {
        coefficients[0] = my;
        coefficients[1..].iter_mut().for_each(|b| *b = 0.0);
    }
    let standardized = if constant {
        vec![0.0; p]
    } else {
        columns
            .iter()
            .zip(&coefficients[1..])
            .map(|(c, b)| b * std_dev(c) / sy)
            .collect()
    };
    let correlations = if constant {
        vec![0.0; p]
    } else {
        columns
            .iter()
            .map(|c| pearson_correlation(c, response))
            .collect::<Result<_>>()?
    };
    Ok(OlsFit {
        names: names.to_vec(),
        coefficients,
        standardized,
        correlations,
        r_squared,
        fitted,
        residuals,
    })
}

/// [`ols_fit_columns`] on every column of a dyadic design; `response` is in
/// pair order.
pub fn ols_fit(response: &[f64], design: &DyadDesign) -> Result<OlsFit> {
    if response.len() != design.n_pairs() {
        return Err(Error::Dimension(format!(
            "response of length {} for {} pairs",
            response.len(),
            design.n_pairs()
        )));
    }
    let columns: Vec<Vec<f64>> = (0..design.n_columns()).map(|k| design.column(k)).collect();
    ols_fit_columns(response, design.names(), &columns)
}

/// `b_k rho_k / R²` per regressor. These sum to one; individual shares may be
/// negative.
pub fn pratt_shares(fit: &OlsFit) -> Result<Vec<f64>> {
    if !(fit.r_squared > 0.0) {
        return Err(Error::Validation("Pratt shares need R² > 0".into()));
    }
    Ok(fit
        .standardized
        .iter()
        .zip(&fit.correlations)
        .map(|(b, r)| b * r / fit.r_squared)
        .collect())
}

/// R² of the regression on the columns in `subset` (a bit mask), from the
/// correlation matrix.
struct SubsetR2 {
    corr: DMatrix<f64>,
    with_response: Vec<f64>,
    names: Vec<String>,
}

impl SubsetR2 {
    fn new(response: &[f64], names: &[String], columns: &[Vec<f64>]) -> Result<Self> {
        let p = columns.len();
        let mut corr = DMatrix::identity(p, p);
        for a in 0..p {
            for b in a + 1..p {
                let r = pearson_correlation(&columns[a], &columns[b])
                    .map_err(|_| Error::ZeroVariance(names[a].clone()))?;
                corr[(a, b)] = r;
                corr[(b, a)] = r;
            }
        }
        let with_response = columns
            .iter()
            .zip(names)
            .map(|(c, n)| {
                pearson_correlation(c, response).map_err(|e| match e {
                    Error::ZeroVariance(w) if w == "first vector" => Error::ZeroVariance(n.clone()),
                    Error::ZeroVariance(_) => Error::ZeroVariance("response".into()),
                    other => other,
                })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            corr,
            with_response,
            names: names.to_vec(),
        })
    }

    fn r2(&self, mask: usize) -> Result<f64> {
        let idx: Vec<usize> = (0..self.with_response.len()).filter(|k| mask >> k & 1 == 1).collect();
        if idx.is_empty() {
            return Ok(0.0);
        }
        let s = idx.len();
        let sub = DMatrix::from_fn(s, s, |a, b| self.corr[(idx[a], idx[b])]);
        let r = DVector::from_iterator(s, idx.iter().map(|&k| self.with_response[k]));
        let chol = sub.cholesky().ok_or_else(|| Error::RankDeficient {
            columns: idx.iter().map(|&k| self.names[k].clone()).collect(),
        })?;
        Ok(r.dot(&chol.solve(&r)))
    }
}

/// LMG values: each regressor's sequential R² gain averaged over all
/// orderings, computed by enumerating the `2^p` subsets with weights
/// `|S|! (p - 1 - |S|)! / p!`. The values sum to the full-model R².
pub fn lmg_values_columns(response: &[f64], names: &[String], columns: &[Vec<f64>]) -> Result<Vec<f64>> {
    let p = columns.len();
    if p == 0 {
        return Ok(Vec::new());
    }
    if p > 20 {
        return Err(Error::Config(format!("LMG enumeration limited to 20 regressors, got {p}")));
    }
    let bad = collinear_columns(names, columns);
    if !bad.is_empty() {
        return Err(Error::RankDeficient { columns: bad });
    }
    let sub = SubsetR2::new(response, names, columns)?;
    let r2: Vec<f64> = (0..1usize << p).map(|m| sub.r2(m)).collect::<Result<_>>()?;
    // weight[s] = s! (p-1-s)! / p!
    let weight: Vec<f64> = (0..p)
        .map(|s| {
            let mut w = 1.0 / p as f64;
            // 1 / C(p-1, s)
            for t in 0..s {
                w *= (t + 1) as f64 / (p - 1 - t) as f64;
            }
            w
        })
        .collect();
    let mut out = vec![0.0; p];
    for mask in 0..1usize << p {
        let s = mask.count_ones() as usize;
        for (k, o) in out.iter_mut().enumerate() {
            if mask >> k & 1 == 0 && s < p {
                *o += weight[s] * (r2[mask | 1 << k] - r2[mask]);
            }
        }
    }
    Ok(out)
}

/// LMG values divided by R², so they sum to one.
pub fn lmg_shares(response: &[f64], design: &DyadDesign) -> Result<Vec<f64>> {
    let columns: Vec<Vec<f64>> = (0..design.n_columns()).map(|k| design.column(k)).collect();
    lmg_shares_columns(response, design.names(), &columns)
}

pub fn lmg_shares_columns(response: &[f64], names: &[String], columns: &[Vec<f64>]) -> Result<Vec<f64>> {
    let v = lmg_values_columns(response, names, columns)?;
    let total: f64 = v.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Validation("LMG shares need R² > 0".into()));
    }
    Ok(v.iter().map(|x| x / total).collect())
}

/// Both decompositions for one regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImportanceShares {
    pub names: Vec<String>,
    pub r_squared: f64,
    pub pratt: Vec<f64>,
    pub lmg: Vec<f64>,
}

impl ImportanceShares {
    pub fn compute(response: &[f64], design: &DyadDesign) -> Result<Self> {
        let fit = ols_fit(response, design)?;
        Ok(Self {
            names: fit.names.clone(),
            r_squared: fit.r_squared,
            pratt: pratt_shares(&fit)?,
            lmg: lmg_shares(response, design)?,
        })
    }

    /// Any Pratt share below zero.
    pub fn has_negative_pratt(&self) -> bool {
        self.pratt.iter().any(|&s| s < 0.0)
    }

    /// `variable,pratt,lmg` rows ordered by Pratt share, largest first.
    pub fn to_csv(&self) -> String {
        let mut order: Vec<usize> = (0..self.names.len()).collect();
        order.sort_by(|&a, &b| {
            self.pratt[b]
                .total_cmp(&self.pratt[a])
                .then_with(|| self.names[a].cmp(&self.names[b]))
        });
        let mut out = String::from("variable,pratt,lmg\n");
        for k in order {
            writeln!(out, "{},{},{}", self.names[k], self.pratt[k], self.lmg[k]).expect("string write");
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtremePair {
    pub i: usize,
    pub j: usize,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualExtremes {
    /// Pairs with residual below `-threshold` (closer than predicted).
    pub low: Vec<ExtremePair>,
    /// Pairs with residual above `threshold`.
    pub high: Vec<ExtremePair>,
    /// Appearances of each node in `low` and in `high`.
    pub low_weights: Vec<usize>,
    pub high_weights: Vec<usize>,
}

/// Pairs whose residual exceeds `threshold` in either direction, with
/// per-node multiplicities. Residuals are in pair order over `n` nodes.
pub fn residual_extremes(fit: &OlsFit, n: usize, threshold: f64) -> Result<ResidualExtremes> {
    if fit.residuals.len() != n * n.saturating_sub(1) / 2 {
        return Err(Error::Dimension(format!(
            "{} residuals for {n} nodes",
            fit.residuals.len()
        )));
    }
    let mut out = ResidualExtremes {
        low: Vec::new(),
        high: Vec::new(),
        low_weights: vec![0; n],
        high_weights: vec![0; n],
    };
    for ((i, j), &r) in pairs(n).zip(&fit.residuals) {
        let e = ExtremePair { i, j, residual: r };
        if r < -threshold {
            out.low_weights[i] += 1;
            out.low_weights[j] += 1;
            out.low.push(e);
        } else if r > threshold {
            out.high_weights[i] += 1;
            out.high_weights[j] += 1;
            out.high.push(e);
        }
    }
    Ok(out)
}
