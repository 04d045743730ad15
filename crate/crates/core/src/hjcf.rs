//! Hirzebruch–Jung continued fractions and Wahl chains.
//!
//! A chain `[b1, ..., bl]` stands for a linear plumbing of spheres with
//! self-intersections `-b1, ..., -bl` and for the fraction
//! `n/m = b1 - 1/(b2 - 1/(... - 1/bl))`.
//!
//! `C_{p,q}` denotes the minimal resolution chain of the Wahl singularity
//! `1/p^2 (1, pq - 1)`, i.e. the expansion of `p^2 / (pq - 1)`. This is the
//! usual convention of the rational blow-down literature; the label is not
//! defined anywhere else in this crate.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum HjError {
    #[error("chain must be nonempty")]
    EmptyChain,
    #[error("chain entry {value} at position {index} is below 2")]
    EntryTooSmall { index: usize, value: u64 },
    #[error("malformed fraction {n}/{m}: need 0 < m < n and gcd(n, m) = 1")]
    MalformedFraction { n: String, m: String },
    #[error("invalid Wahl parameters ({p}, {q}): need 0 < q < p and gcd(p, q) = 1")]
    InvalidWahl { p: u64, q: u64 },
    #[error("chain {0} is not a Wahl chain")]
    NotWahl(Chain),
    #[error("continued-fraction entry exceeds 64 bits")]
    EntryOverflow,
    #[error("cannot parse chain `{0}`")]
    Parse(String),
}

/// Sequence of positive entries, each at least 2.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Chain(Vec<u64>);

impl Chain {
    pub fn new(entries: Vec<u64>) -> Result<Self, HjError> {
        if entries.is_empty() {
            return Err(HjError::EmptyChain);
        }
        if let Some((index, &value)) = entries.iter().enumerate().find(|(_, &b)| b < 2) {
            return Err(HjError::EntryTooSmall { index, value });
        }
        Ok(Chain(entries))
    }

    pub fn entries(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for clippy's `len_without_is_empty`.
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn reversed(&self) -> Chain {
        let mut v = self.0.clone();
        v.reverse();
        Chain(v)
    }
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{b}")?;
        }
        write!(f, "]")
    }
}

impl FromStr for Chain {
    type Err = HjError;

    /// Accepts `2,2,9` or `[2, 2, 9]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().trim_start_matches('[').trim_end_matches(']');
        let entries = t
            .split(',')
            .map(|x| x.trim().parse::<u64>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| HjError::Parse(s.to_string()))?;
        Chain::new(entries)
    }
}

/// Reduced fraction `n/m` with `0 < m < n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fraction {
    n: BigUint,
    m: BigUint,
}

impl Fraction {
    pub fn new(n: impl Into<BigUint>, m: impl Into<BigUint>) -> Result<Self, HjError> {
        let (n, m) = (n.into(), m.into());
        if m.is_zero() || m >= n || !n.gcd(&m).is_one() {
            return Err(HjError::MalformedFraction {
                n: n.to_string(),
                m: m.to_string(),
            });
        }
        Ok(Fraction { n, m })
    }

    pub fn numerator(&self) -> &BigUint {
        &self.n
    }

    pub fn denominator(&self) -> &BigUint {
        &self.m
    }
}

impl fmt::Display for Fraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.n, self.m)
    }
}

/// Wahl parameters `(p, q)` of `C_{p,q}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct WahlParams {
    pub p: u64,
    pub q: u64,
}

impl WahlParams {
    pub fn new(p: u64, q: u64) -> Result<Self, HjError> {
        if p < 2 || q == 0 || q >= p || p.gcd(&q) != 1 {
            return Err(HjError::InvalidWahl { p, q });
        }
        Ok(WahlParams { p, q })
    }
}

impl fmt::Display for WahlParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "C({},{})", self.p, self.q)
    }
}

pub fn hj_expand(f: &Fraction) -> Result<Chain, HjError> {
    if let (Some(n), Some(m)) = (f.n.to_u128(), f.m.to_u128()) {
        return expand_small(n, m);
    }
    let (mut n, mut m) = (f.n.clone(), f.m.clone());
    let mut out = Vec::new();
    while !m.is_zero() {
        let b = n.div_ceil(&m);
        let next = &b * &m - &n;
        out.push(b.to_u64().ok_or(HjError::EntryOverflow)?);
        n = m;
        m = next;
    }
    Chain::new(out)
}

fn expand_small(mut n: u128, mut m: u128) -> Result<Chain, HjError> {
    let mut out = Vec::new();
    while m != 0 {
        let b = n.div_ceil(m);
        // b * m - n < m, so this cannot overflow
        let next = b * m - n;
        out.push(u64::try_from(b).map_err(|_| HjError::EntryOverflow)?);
        n = m;
        m = next;
    }
    Chain::new(out)
}

pub fn hj_eval(c: &Chain) -> Fraction {
    if let Some((n, m)) = eval_small(c.entries()) {
        return Fraction { n: n.into(), m: m.into() };
    }
    let e = c.entries();
    let mut n = BigUint::from(e[e.len() - 1]);
    let mut m = BigUint::one();
    for &b in e[..e.len() - 1].iter().rev() {
        let next = BigUint::from(b) * &n - &m;
        m = n;
        n = next;
    }
    debug_assert!(n.gcd(&m).is_one());
    Fraction { n, m }
}

/// `None` once the numerator leaves `u128`.
fn eval_small(e: &[u64]) -> Option<(u128, u128)> {
    let mut n = e[e.len() - 1] as u128;
    let mut m = 1u128;
    for &b in e[..e.len() - 1].iter().rev() {
        let next = (b as u128).checked_mul(n)? - m;
        m = n;
        n = next;
    }
    Some((n, m))
}

pub fn wahl_recognize(c: &Chain) -> Option<WahlParams> {
    let f = hj_eval(c);
    let p = f.n.sqrt();
    if &p * &p != f.n {
        return None;
    }
    let (q, r) = (&f.m + 1u32).div_rem(&p);
    if !r.is_zero() {
        return None;
    }
    // p beyond 64 bits is reported as unrecognized rather than truncated.
    WahlParams::new(p.to_u64()?, q.to_u64()?).ok()
}

pub fn wahl_chain(w: WahlParams) -> Result<Chain, HjError> {
    let w = WahlParams::new(w.p, w.q)?;
    let p = BigUint::from(w.p);
    let f = Fraction::new(&p * &p, &p * w.q - 1u32)?;
    hj_expand(&f)
}

/// Class-T augmentation: both children of a Wahl chain are Wahl chains.
pub fn tchain_children(c: &Chain) -> Result<(Chain, Chain), HjError> {
    if wahl_recognize(c).is_none() {
        return Err(HjError::NotWahl(c.clone()));
    }
    let e = c.entries();
    let mut left = Vec::with_capacity(e.len() + 1);
    left.push(2);
    left.extend_from_slice(e);
    *left.last_mut().unwrap() += 1;
    let mut right = e.to_vec();
    right[0] += 1;
    right.push(2);
    Ok((Chain(left), Chain(right)))
}

pub fn dual_chain(c: &Chain) -> Chain {
    let f = hj_eval(c);
    let m = &f.n - &f.m;
    hj_expand(&Fraction { n: f.n, m }).expect("dual of a valid chain is valid")
}

/// Every Wahl chain of length at most `max_len`, generated from `[4]`
/// by `tchain_children`, in sorted order.
pub fn wahl_closure(max_len: usize) -> Vec<Chain> {
    let mut seen = BTreeSet::new();
    let mut frontier = vec![Chain(vec![4])];
    while let Some(c) = frontier.pop() {
        if c.len() > max_len || !seen.insert(c.clone()) {
            continue;
        }
        if c.len() < max_len {
            let (a, b) = tchain_children(&c).expect("closure stays inside Wahl chains");
            frontier.push(a);
            frontier.push(b);
        }
    }
    seen.into_iter().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ch(v: &[u64]) -> Chain {
        Chain::new(v.to_vec()).unwrap()
    }

    #[test]
    fn expand_small() {
        assert_eq!(hj_expand(&Fraction::new(4u32, 1u32).unwrap()).unwrap(), ch(&[4]));
        assert_eq!(hj_expand(&Fraction::new(3u32, 2u32).unwrap()).unwrap(), ch(&[2, 2]));
    }

    #[test]
    fn malformed_fractions() {
        assert!(Fraction::new(3u32, 3u32).is_err());
        assert!(Fraction::new(3u32, 0u32).is_err());
        assert!(Fraction::new(6u32, 4u32).is_err());
        assert!(Fraction::new(2u32, 5u32).is_err());
    }

    #[test]
    fn chain_rejects_bad_entries() {
        assert_eq!(Chain::new(vec![]), Err(HjError::EmptyChain));
        assert!(Chain::new(vec![2, 1]).is_err());
        assert_eq!("[2, 2,9]".parse::<Chain>().unwrap(), ch(&[2, 2, 9]));
        assert!("2,x".parse::<Chain>().is_err());
    }

    #[test]
    fn eval_small() {
        assert_eq!(hj_eval(&ch(&[4])), Fraction::new(4u32, 1u32).unwrap());
        assert_eq!(hj_eval(&ch(&[2, 2])), Fraction::new(3u32, 2u32).unwrap());
    }

    #[test]
    fn recognize_small() {
        assert_eq!(wahl_recognize(&ch(&[4])), Some(WahlParams { p: 2, q: 1 }));
        assert_eq!(wahl_recognize(&ch(&[2, 2])), None);
        assert_eq!(wahl_recognize(&ch(&[6, 2, 2])), Some(WahlParams { p: 4, q: 1 }));
    }

    #[test]
    fn wahl_params_validation() {
        assert!(WahlParams::new(4, 2).is_err());
        assert!(WahlParams::new(5, 5).is_err());
        assert!(WahlParams::new(1, 0).is_err());
        assert_eq!(wahl_chain(WahlParams::new(2, 1).unwrap()).unwrap(), ch(&[4]));
        assert!(wahl_chain(WahlParams { p: 6, q: 4 }).is_err());
    }

    #[test]
    fn children_and_duals() {
        assert_eq!(tchain_children(&ch(&[4])).unwrap(), (ch(&[2, 5]), ch(&[5, 2])));
        assert_eq!(tchain_children(&ch(&[5, 2])).unwrap(), (ch(&[2, 5, 3]), ch(&[6, 2, 2])));
        assert!(tchain_children(&ch(&[2, 2])).is_err());
        assert_eq!(dual_chain(&ch(&[4])), ch(&[2, 2, 2]));
        assert_eq!(dual_chain(&ch(&[2, 2])), ch(&[3]));
    }

    #[test]
    fn closure_grows() {
        let c = wahl_closure(3);
        assert_eq!(c.len(), 1 + 2 + 4);
        assert!(c.contains(&ch(&[6, 2, 2])));
    }
}
