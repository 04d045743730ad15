//! Intersection lattices of curve sets: Gram matrices, exact determinants,
//! definiteness and boundary group orders.

use std::collections::BTreeSet;

use num_bigint::{BigInt, BigUint};
use num_traits::{Signed, Zero};
use serde::Serialize;

use crate::config::{ConfigError, Configuration};
use crate::hjcf::Chain;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LatticeError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("curve `{0}` listed twice")]
    DuplicateId(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GramMatrix {
    pub ids: Vec<String>,
    pub rows: Vec<Vec<i64>>,
}

impl GramMatrix {
    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.size();
        (0..n).all(|i| self.rows[i].len() == n && (0..n).all(|j| self.rows[i][j] == self.rows[j][i]))
    }

    /// Plumbing matrix of a linear chain: `-b_i` on the diagonal, 1 beside it.
    pub fn of_chain(c: &Chain) -> Self {
        let e = c.entries();
        let n = e.len();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| match i.abs_diff(j) {
                        0 => -(e[i] as i64),
                        1 => 1,
                        _ => 0,
                    })
                    .collect()
            })
            .collect();
        GramMatrix {
            ids: (1..=n).map(|i| format!("c{i}")).collect(),
            rows,
        }
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Self {
        GramMatrix {
            ids: (1..=rows.len()).map(|i| format!("v{i}")).collect(),
            rows,
        }
    }
}

pub fn gram(c: &Configuration, ids: &[&str]) -> Result<GramMatrix, LatticeError> {
    let mut seen = BTreeSet::new();
    for id in ids {
        c.curve(id)?;
        if !seen.insert(*id) {
            return Err(LatticeError::DuplicateId(id.to_string()));
        }
    }
    let rows = ids
        .iter()
        .map(|a| {
            ids.iter()
                .map(|b| {
                    if a == b {
                        c.curve(a).unwrap().self_int
                    } else {
                        c.pairing(a, b)
                    }
                })
                .collect()
        })
        .collect();
    Ok(GramMatrix {
        ids: ids.iter().map(|s| s.to_string()).collect(),
        rows,
    })
}

/// Bareiss fraction-free elimination with row pivoting.
pub fn det_bareiss(rows: &[Vec<i64>]) -> BigInt {
    let n = rows.len();
    if n == 0 {
        return BigInt::from(1);
    }
    let mut a: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
        .collect();
    let mut sign = 1i32;
    let mut prev = BigInt::from(1);
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(k, i);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = v / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign < 0 {
        -d
    } else {
        d
    }
}

pub fn det_exact(m: &GramMatrix) -> BigInt {
    det_bareiss(&m.rows)
}

pub fn leading_minors(m: &GramMatrix) -> Vec<BigInt> {
    (1..=m.size())
        .map(|k| {
            let sub: Vec<Vec<i64>> = m.rows[..k].iter().map(|r| r[..k].to_vec()).collect();
            det_bareiss(&sub)
        })
        .collect()
}

/// Sylvester's criterion for `-M`: the k-th leading minor has sign `(-1)^k`.
pub fn is_negative_definite(m: &GramMatrix) -> bool {
    m.is_symmetric()
        && leading_minors(m).iter().enumerate().all(|(i, d)| {
            if i % 2 == 0 {
                d.is_negative()
            } else {
                d.is_positive()
            }
        })
}

/// Order of `H_1` of the lens-space boundary of the plumbing.
pub fn boundary_group_order(c: &Chain) -> BigUint {
    det_exact(&GramMatrix::of_chain(c)).magnitude().clone()
}
