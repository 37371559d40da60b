//! Rank-correlation targets and their induction by Iman-Conover reordering.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::rng::StreamFactory;
use super::RiskRegister;
use crate::error::{Error, Result};

/// One record of a correlation file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum CorrelationEntry {
    Pair { a: String, b: String, rho: f64 },
    /// Every pair of risks in the group shares `rho`.
    Group { group: String, rho: f64 },
}

/// Target Spearman rank correlations between risks.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CorrelationSpec {
    pub entries: Vec<CorrelationEntry>,
}

impl CorrelationSpec {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn pair(mut self, a: impl Into<String>, b: impl Into<String>, rho: f64) -> Self {
        self.entries.push(CorrelationEntry::Pair { a: a.into(), b: b.into(), rho });
        self
    }

    pub fn group(mut self, group: impl Into<String>, rho: f64) -> Self {
        self.entries.push(CorrelationEntry::Group { group: group.into(), rho });
        self
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            reason: e.to_string(),
        })
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Expands group shorthand and resolves ids against the simulated risks
    /// of `register`. Explicit pairs override group values. Pairs that touch
    /// a catastrophic risk are dropped along with that risk.
    pub fn resolve(&self, register: &RiskRegister) -> Result<ResolvedCorrelation> {
        let simulated: Vec<&super::RiskItem> = register.simulated().collect();
        let index_of = |id: &str| simulated.iter().position(|r| r.id == id);
        let is_catastrophic = |id: &str| register.risks.iter().any(|r| r.id == id && r.catastrophic);

        let check_rho = |a: &str, b: &str, rho: f64| {
            if rho.is_finite() && (-1.0..=1.0).contains(&rho) {
                Ok(())
            } else {
                Err(Error::InfeasibleCorrelation {
                    a: a.to_string(),
                    b: b.to_string(),
                    reason: format!("target {rho} outside [-1, 1]"),
                })
            }
        };

        let mut targets: BTreeMap<(usize, usize), f64> = BTreeMap::new();
        for entry in &self.entries {
            if let CorrelationEntry::Group { group, rho } = entry {
                let members: Vec<usize> = simulated
                    .iter()
                    .enumerate()
                    .filter(|(_, r)| r.group.as_deref() == Some(group.as_str()))
                    .map(|(i, _)| i)
                    .collect();
                let any_member = register.risks.iter().any(|r| r.group.as_deref() == Some(group.as_str()));
                if !any_member {
                    return Err(Error::UnknownCorrelationTarget { what: "group", name: group.clone() });
                }
                check_rho(group, group, *rho)?;
                for (x, &i) in members.iter().enumerate() {
                    for &j in &members[x + 1..] {
                        targets.insert((i, j), *rho);
                    }
                }
            }
        }
        for entry in &self.entries {
            if let CorrelationEntry::Pair { a, b, rho } = entry {
                check_rho(a, b, *rho)?;
                let (ia, ib) = match (index_of(a), index_of(b)) {
                    (Some(ia), Some(ib)) => (ia, ib),
                    _ => {
                        for id in [a, b] {
                            if index_of(id).is_none() && !is_catastrophic(id) {
                                return Err(Error::UnknownCorrelationTarget { what: "risk", name: id.clone() });
                            }
                        }
                        continue;
                    }
                };
                if ia == ib {
                    if *rho != 1.0 {
                        return Err(Error::InfeasibleCorrelation {
                            a: a.clone(),
                            b: b.clone(),
                            reason: "a risk is perfectly correlated with itself".into(),
                        });
                    }
                    continue;
                }
                targets.insert((ia.min(ib), ia.max(ib)), *rho);
            }
        }

        targets.retain(|_, rho| *rho != 0.0);
        let mut members: Vec<usize> = targets.keys().flat_map(|&(i, j)| [i, j]).collect();
        members.sort_unstable();
        members.dedup();
        let ids: Vec<String> = members.iter().map(|&i| simulated[i].id.clone()).collect();
        let m = members.len();
        let mut rank_corr = vec![vec![0.0; m]; m];
        for (x, row) in rank_corr.iter_mut().enumerate() {
            row[x] = 1.0;
        }
        for (&(i, j), &rho) in &targets {
            let x = members.binary_search(&i).unwrap();
            let y = members.binary_search(&j).unwrap();
            rank_corr[x][y] = rho;
            rank_corr[y][x] = rho;
        }

        // Spearman targets become Pearson targets on the normal scores.
        let pearson: Vec<Vec<f64>> = rank_corr
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&rho| 2.0 * (std::f64::consts::PI * rho / 6.0).sin())
                    .collect()
            })
            .collect();
        let target_factor = cholesky(&pearson).map_err(|col| {
            let (row, _) = (0..col)
                .map(|r| (r, pearson[r][col].abs()))
                .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
            Error::InfeasibleCorrelation {
                a: ids[row].clone(),
                b: ids[col].clone(),
                reason: "targets do not form a positive semi-definite correlation matrix".into(),
            }
        })?;

        Ok(ResolvedCorrelation { members, ids, rank_corr, target_factor })
    }
}

/// Correlation targets bound to simulated-risk column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedCorrelation {
    /// Column indices (among simulated risks) that take part in reordering.
    pub members: Vec<usize>,
    pub ids: Vec<String>,
    /// Target Spearman matrix over `members`.
    pub rank_corr: Vec<Vec<f64>>,
    target_factor: Vec<Vec<f64>>,
}

impl ResolvedCorrelation {
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Reorders the draws in `columns` (one vector per simulated risk, one
    /// entry per trial) so that member columns follow the target rank
    /// correlations. Each column keeps exactly its original multiset of values.
    pub fn induce(&self, columns: &mut [Vec<f64>], seed: u64) -> Result<()> {
        let m = self.members.len();
        if m < 2 {
            return Ok(());
        }
        let n = columns[self.members[0]].len();
        if n < 2 {
            return Ok(());
        }

        let normal = Normal::standard();
        let scores: Vec<f64> = (1..=n)
            .map(|i| normal.inverse_cdf(i as f64 / (n + 1) as f64))
            .collect();
        let factory = StreamFactory::reorder(seed);
        let score_cols: Vec<Vec<f64>> = (0..m)
            .map(|c| {
                let mut col = scores.clone();
                factory.stream(c as u64).shuffle(&mut col);
                col
            })
            .collect();

        let sample_corr = correlation_matrix(&score_cols);
        let sample_factor = cholesky(&sample_corr).map_err(|_| Error::InvalidArgument {
            name: "trials".into(),
            reason: format!("{n} trials are too few to induce correlation among {m} risks"),
        })?;
        if sample_factor.iter().enumerate().any(|(i, row)| row[i] <= 0.0) {
            return Err(Error::InvalidArgument {
                name: "trials".into(),
                reason: format!("{n} trials are too few to induce correlation among {m} risks"),
            });
        }
        // transform = target_factor * sample_factor^-1
        let inv = lower_inverse(&sample_factor);
        let transform = mat_mul(&self.target_factor, &inv);

        let mut adjusted = vec![vec![0.0; n]; m];
        {
            let rows: Vec<Vec<f64>> = (0..n)
                .into_par_iter()
                .map(|t| {
                    (0..m)
                        .map(|r| (0..m).map(|c| transform[r][c] * score_cols[c][t]).sum())
                        .collect()
                })
                .collect();
            for (t, row) in rows.into_iter().enumerate() {
                for (c, v) in row.into_iter().enumerate() {
                    adjusted[c][t] = v;
                }
            }
        }

        let reordered: Vec<Vec<f64>> = self
            .members
            .par_iter()
            .zip(adjusted.par_iter())
            .map(|(&col, adj)| {
                let mut sorted_vals = columns[col].clone();
                sorted_vals.sort_by(f64::total_cmp);
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&x, &y| adj[x].total_cmp(&adj[y]).then(x.cmp(&y)));
                let mut out = vec![0.0; n];
                for (rank, &trial) in order.iter().enumerate() {
                    out[trial] = sorted_vals[rank];
                }
                out
            })
            .collect();
        for (&col, values) in self.members.iter().zip(reordered) {
            columns[col] = values;
        }
        Ok(())
    }
}

/// Lower-triangular `L` with `L L^T = a`, tolerating positive semi-definite
/// input. On failure returns the column where the matrix stops being PSD.
fn cholesky(a: &[Vec<f64>]) -> std::result::Result<Vec<Vec<f64>>, usize> {
    const PIVOT_EPS: f64 = 1e-12;
    const RESIDUAL_EPS: f64 = 1e-8;
    let n = a.len();
    let mut l = vec![vec![0.0; n]; n];
    for j in 0..n {
        let d = a[j][j] - (0..j).map(|k| l[j][k] * l[j][k]).sum::<f64>();
        if d < -RESIDUAL_EPS {
            return Err(j);
        }
        if d <= PIVOT_EPS {
            for i in j + 1..n {
                let r = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
                if r.abs() > RESIDUAL_EPS {
                    return Err(i);
                }
            }
            continue;
        }
        let pivot = d.sqrt();
        l[j][j] = pivot;
        for i in j + 1..n {
            let r = a[i][j] - (0..j).map(|k| l[i][k] * l[j][k]).sum::<f64>();
            l[i][j] = r / pivot;
        }
    }
    Ok(l)
}

fn lower_inverse(l: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = l.len();
    let mut inv = vec![vec![0.0; n]; n];
    for col in 0..n {
        for i in col..n {
            let rhs = if i == col { 1.0 } else { 0.0 };
            let s: f64 = (col..i).map(|k| l[i][k] * inv[k][col]).sum();
            inv[i][col] = (rhs - s) / l[i][i];
        }
    }
    inv
}

fn mat_mul(a: &[Vec<f64>], b: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let k = b.len();
    let m = b[0].len();
    (0..n)
        .map(|i| (0..m).map(|j| (0..k).map(|x| a[i][x] * b[x][j]).sum()).collect())
        .collect()
}

fn correlation_matrix(cols: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = cols.len();
    let n = cols[0].len() as f64;
    let centred: Vec<Vec<f64>> = cols
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / n;
            c.iter().map(|x| x - mean).collect()
        })
        .collect();
    let norms: Vec<f64> = centred
        .iter()
        .map(|c| c.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut out = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in 0..m {
            out[i][j] = if i == j {
                1.0
            } else {
                let dot: f64 = centred[i].iter().zip(&centred[j]).map(|(x, y)| x * y).sum();
                dot / (norms[i] * norms[j])
            };
        }
    }
    out
}
