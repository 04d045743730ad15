//! Rational blow-down bookkeeping.
//!
//! Each disjoint Wahl chain `C_{p,q}` of length `l` is replaced by a rational
//! ball `B_{p,q}`: `e` drops by `l`, `sigma` and `K^2` rise by `l`, `b2+` is
//! unchanged.

use serde::Serialize;

use crate::config::{ChainEmbedding, Configuration, InvariantSet};
use crate::hjcf::{wahl_recognize, Chain, WahlParams};
use crate::lattice::{gram, is_negative_definite};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SurgeryError {
    #[error("chain {0} is not a Wahl chain")]
    NotWahl(Chain),
    #[error("curves of `{0}` do not realize its target chain")]
    Mismatch(String),
    #[error("chains {0} and {1} overlap or meet")]
    Overlap(usize, usize),
    #[error("chain {0} is not negative definite")]
    NotNegativeDefinite(usize),
    #[error("{0}")]
    Lattice(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub wahl: WahlParams,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SurgeryResult {
    pub before: InvariantSet,
    pub after: InvariantSet,
    pub pieces: Vec<Piece>,
    pub removed_curve_ids: Vec<String>,
}

impl SurgeryResult {
    pub fn total_length(&self) -> i64 {
        self.pieces.iter().map(|p| p.length as i64).sum()
    }
}

/// Invariant transform alone, for callers that already know the pieces.
pub fn blowdown_invariants(before: &InvariantSet, total_length: i64) -> InvariantSet {
    let l = total_length;
    let b2 = before.b2 - l;
    InvariantSet {
        e: before.e - l,
        sigma: before.sigma + l,
        k2: before.k2 + l,
        b2,
        b2_plus: before.b2_plus,
        b2_minus: before.b2_minus - l,
        p_g: (before.b2_plus - 1) / 2,
        q: before.q,
    }
}

pub fn rational_blowdown(
    c: &Configuration,
    embeddings: &[ChainEmbedding],
) -> Result<SurgeryResult, SurgeryError> {
    let mut pieces = Vec::new();
    let mut removed = Vec::new();
    for (i, emb) in embeddings.iter().enumerate() {
        let w = wahl_recognize(&emb.target).ok_or_else(|| SurgeryError::NotWahl(emb.target.clone()))?;
        if emb.curves.len() != emb.target.len() {
            return Err(SurgeryError::Mismatch(emb.target.to_string()));
        }
        let ids: Vec<&str> = emb.curves.iter().map(|s| s.as_str()).collect();
        let g = gram(c, &ids).map_err(|e| SurgeryError::Lattice(e.to_string()))?;
        for (k, row) in g.rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                let want = match k.abs_diff(j) {
                    0 => -(emb.target.entries()[k] as i64),
                    1 => 1,
                    _ => 0,
                };
                if x != want {
                    return Err(SurgeryError::Mismatch(emb.target.to_string()));
                }
            }
        }
        if ids.iter().any(|id| !c.curve(id).map(|cv| cv.is_smooth_rational()).unwrap_or(false)) {
            return Err(SurgeryError::Mismatch(emb.target.to_string()));
        }
        if !is_negative_definite(&g) {
            return Err(SurgeryError::NotNegativeDefinite(i));
        }
        for (j, other) in embeddings[..i].iter().enumerate() {
            let touching = emb
                .curves
                .iter()
                .any(|a| other.curves.iter().any(|b| a == b || c.pairing(a, b) != 0));
            if touching {
                return Err(SurgeryError::Overlap(j, i));
            }
        }
        pieces.push(Piece { wahl: w, length: emb.target.len() });
        removed.extend(emb.curves.iter().cloned());
    }
    let total = pieces.iter().map(|p| p.length as i64).sum();
    Ok(SurgeryResult {
        before: c.ambient,
        after: blowdown_invariants(&c.ambient, total),
        pieces,
        removed_curve_ids: removed,
    })
}

/// Whether the contracted surface is smoothed as a complex surface or only
/// treated as a symplectic 4-manifold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SmoothingContext {
    Complex,
    Symplectic,
}

/// A claim the verifier relies on but does not compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Assumption {
    pub key: &'static str,
    pub claim: &'static str,
    pub citation: &'static str,
}

pub const QG_SMOOTHING: Assumption = Assumption {
    key: "qg-smoothing",
    claim: "the contracted surface X admits a global Q-Gorenstein smoothing",
    citation: "Lee-Park; Keum-Lee vanishing of H^2(T_Z(-log A)); Flenner-Zaidenberg; Esnault-Viehweg",
};

pub const MILNOR_FIBER: Assumption = Assumption {
    key: "milnor-fiber",
    claim: "a general fiber of the smoothing is diffeomorphic to the rational blow-down (Milnor fiber theory)",
    citation: "Milnor fiber of a Wahl singularity is the rational ball B_{p,q}; Looijenga-Wahl, Fintushel-Stern",
};

pub const MINIMALITY: Assumption = Assumption {
    key: "minimality",
    claim: "the resulting 4-manifold or general fiber is minimal",
    citation: "Ozsvath-Szabo; Lee-Park",
};

pub const INVARIANT_TRANSFER: Assumption = Assumption {
    key: "invariant-transfer",
    claim: "p_g and K^2 of the general fiber equal those of the singular surface",
    citation: "Q-Gorenstein smoothing theory (Kollar-Shepherd-Barron)",
};

pub const SYMPLECTIC: Assumption = Assumption {
    key: "symplectic-structure",
    claim: "the rational blow-down of the symplectic surface Z carries a symplectic structure",
    citation: "Symington",
};

pub const COMPLEX_OPEN: Assumption = Assumption {
    key: "complex-structure-open",
    claim: "no complex structure is claimed; H^2(T^0_X) is nonzero and the question stays open",
    citation: "open question, not computed",
};

pub const CATALOGUE: [Assumption; 6] = [
    QG_SMOOTHING,
    MILNOR_FIBER,
    MINIMALITY,
    INVARIANT_TRANSFER,
    SYMPLECTIC,
    COMPLEX_OPEN,
];

pub fn smoothing_ledger(r: &SurgeryResult, ctx: SmoothingContext) -> Vec<Assumption> {
    if r.pieces.is_empty() {
        return Vec::new();
    }
    match ctx {
        SmoothingContext::Complex => vec![QG_SMOOTHING, MILNOR_FIBER, MINIMALITY, INVARIANT_TRANSFER],
        SmoothingContext::Symplectic => vec![SYMPLECTIC, MINIMALITY, COMPLEX_OPEN],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Curve, Configuration, InvariantSet};

    fn chain_config(entries: &[&[i64]]) -> (Configuration, Vec<ChainEmbedding>) {
        let mut c = Configuration::empty(InvariantSet::from_basic(30, -26, 0, 0), Some(2));
        let mut embs = Vec::new();
        for (k, ent) in entries.iter().enumerate() {
            let ids: Vec<String> = (0..ent.len()).map(|i| format!("c{k}_{i}")).collect();
            for (i, b) in ent.iter().enumerate() {
                c.add_curve(Curve::new(&ids[i], -b, 0, b - 2, 0)).unwrap();
                if i > 0 {
                    c.set_pairing(&ids[i - 1], &ids[i], 1).unwrap();
                }
            }
            let target = Chain::new(ent.iter().map(|&b| b as u64).collect()).unwrap();
            embs.push(ChainEmbedding { target, curves: ids });
        }
        (c, embs)
    }

    #[test]
    fn empty_surgery_is_identity() {
        let (c, _) = chain_config(&[]);
        let r = rational_blowdown(&c, &[]).unwrap();
        assert_eq!(r.before, r.after);
        assert!(smoothing_ledger(&r, SmoothingContext::Complex).is_empty());
    }

    #[test]
    fn two_pieces() {
        let (c, embs) = chain_config(&[&[4], &[6, 2, 2]]);
        let r = rational_blowdown(&c, &embs).unwrap();
        assert_eq!(r.total_length(), 4);
        assert_eq!(r.after.e, 26);
        assert!(r.after.violations().is_empty());
        assert_eq!(r.removed_curve_ids.len(), 4);
    }

    #[test]
    fn rejects_bad_inputs() {
        let (c, embs) = chain_config(&[&[2, 2]]);
        assert!(matches!(rational_blowdown(&c, &embs), Err(SurgeryError::NotWahl(_))));
        let (mut c, embs) = chain_config(&[&[4], &[4]]);
        c.set_pairing("c0_0", "c1_0", 1).unwrap();
        assert_eq!(rational_blowdown(&c, &embs), Err(SurgeryError::Overlap(0, 1)));
        let (c, mut embs) = chain_config(&[&[4], &[5, 2]]);
        embs[1].target = "4".parse().unwrap();
        embs[1].curves.truncate(1);
        assert!(matches!(rational_blowdown(&c, &embs), Err(SurgeryError::Mismatch(_))));
    }

    #[test]
    fn ledgers() {
        let (c, embs) = chain_config(&[&[4]]);
        let r = rational_blowdown(&c, &embs).unwrap();
        let cx = smoothing_ledger(&r, SmoothingContext::Complex);
        assert_eq!(cx.len(), 4);
        assert!(cx.iter().any(|a| a.claim.contains("Milnor fiber")));
        let sy = smoothing_ledger(&r, SmoothingContext::Symplectic);
        assert!(sy.iter().any(|a| a.citation.contains("Symington")));
    }
}
