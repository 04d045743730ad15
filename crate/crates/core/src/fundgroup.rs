//! Fundamental groups of rational blow-downs by cyclic Van Kampen steps.
//!
//! Write `Z = Z0 ∪ N1 ∪ N2` with `N_i` the plumbings of two Wahl chains and
//! `x`, `y` normal circles of the two chains. Then `π1(Z) = π1(Z0)/<<x, y>>`,
//! where `ord(x) | p1^2` and `ord(y) | p2^2`. If `x` and `y` have the same order
//! and `gcd(p1, p2) = 1` both are trivial, so `π1(Z0) = π1(Z)`. Gluing the
//! rational balls back in is then a pushout along `Z_{p^2} → Z_p`.
//!
//! The conjugating paths from the normal circles to the base point are not
//! modelled; the engine works with normal closures directly.

use std::fmt;

use num_integer::Integer;
use serde::Serialize;

use crate::config::{ChainEmbedding, ConfigError, Configuration};
use crate::hjcf::WahlParams;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FundError {
    #[error("cyclic group order must be positive")]
    ZeroOrder,
    #[error("generator image {image} does not define a map Z_{from} -> Z_{to}")]
    IllDefined { from: u64, to: u64, image: u64 },
    #[error("homomorphisms have different sources Z_{0} and Z_{1}")]
    MismatchedSources(u64, u64),
    #[error("group order overflows 64 bits")]
    Overflow,
    #[error(transparent)]
    Config(#[from] ConfigError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct CyclicGroup {
    pub order: u64,
}

impl CyclicGroup {
    pub fn new(order: u64) -> Result<Self, FundError> {
        if order == 0 {
            return Err(FundError::ZeroOrder);
        }
        Ok(CyclicGroup { order })
    }

    pub fn trivial() -> Self {
        CyclicGroup { order: 1 }
    }

    /// Order of the element `k` (mod `order`).
    pub fn element_order(&self, k: u64) -> u64 {
        self.order / (k % self.order).gcd(&self.order)
    }
}

impl fmt::Display for CyclicGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z_{}", self.order)
    }
}

/// `Z_source -> Z_target`, `1 ↦ gen_image`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CyclicHom {
    pub source: CyclicGroup,
    pub target: CyclicGroup,
    pub gen_image: u64,
}

impl CyclicHom {
    pub fn new(source: CyclicGroup, target: CyclicGroup, gen_image: u64) -> Result<Self, FundError> {
        let image = gen_image % target.order;
        let total = (source.order as u128) * (image as u128);
        if total % (target.order as u128) != 0 {
            return Err(FundError::IllDefined {
                from: source.order,
                to: target.order,
                image,
            });
        }
        Ok(CyclicHom { source, target, gen_image: image })
    }

    pub fn is_surjective(&self) -> bool {
        self.gen_image.gcd(&self.target.order) == 1
    }

    pub fn apply(&self, k: u64) -> u64 {
        (((k % self.source.order) as u128 * self.gen_image as u128) % self.target.order as u128) as u64
    }

    /// Generator of the kernel, as an element of the source.
    pub fn kernel_generator(&self) -> u64 {
        // the kernel of k ↦ k·g (mod t) is generated by t / gcd(g, t)
        (self.target.order / self.gen_image.gcd(&self.target.order)) % self.source.order
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "group", rename_all = "lowercase")]
pub enum Pushout {
    Resolved(CyclicGroup),
    Unresolved,
}

/// Pushout of `B <-f- A -g-> C` when one leg is onto; otherwise refuses.
pub fn pushout_cyclic(
    b: CyclicGroup,
    c: CyclicGroup,
    f: &CyclicHom,
    g: &CyclicHom,
) -> Result<Pushout, FundError> {
    if f.source != g.source {
        return Err(FundError::MismatchedSources(f.source.order, g.source.order));
    }
    if f.target != b || g.target != c {
        return Err(FundError::MismatchedSources(f.target.order, b.order));
    }
    let quotient = |onto: &CyclicHom, other: &CyclicHom, grp: CyclicGroup| {
        let k = onto.kernel_generator();
        let image = other.apply(k);
        CyclicGroup { order: grp.order / grp.element_order(image) }
    };
    if g.is_surjective() {
        Ok(Pushout::Resolved(quotient(g, f, b)))
    } else if f.is_surjective() {
        Ok(Pushout::Resolved(quotient(f, g, c)))
    } else {
        Ok(Pushout::Unresolved)
    }
}

/// One inference rule application together with the data it used.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "rule", rename_all = "kebab-case")]
pub enum Rule {
    /// Scenario fact: the fundamental group of the blown-up surface.
    AmbientGroup { order: u64 },
    /// The plumbing of `C_{p,q}` has boundary a lens space with `H_1 = Z_{p^2}`.
    BoundaryGroup { p: u64 },
    /// Combinatorial (-1)-sphere check: both normal circles lie on one sphere.
    SameOrderWitness { holds: bool },
    Coprime { p1: u64, p2: u64 },
    /// `ord(x) = ord(y)` divides `gcd(p1^2, p2^2)`; trivial when that is 1.
    Kill,
    /// Gluing `B_{p,q}` (group `Z_p`) along `Z_{p^2}`.
    Pushout {
        edge: u64,
        ball: u64,
        to_complement: u64,
        to_ball: u64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "kebab-case")]
pub enum Value {
    Order(u64),
    Gcd(u64),
    Holds(bool),
    Inconclusive,
    Unresolved,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Step {
    pub rule: Rule,
    pub premises: Vec<usize>,
    pub statement: String,
    pub conclusion: Value,
    pub citation: &'static str,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct DerivationTrace {
    pub steps: Vec<Step>,
}

impl DerivationTrace {
    fn push(&mut self, rule: Rule, premises: Vec<usize>, statement: String, conclusion: Value, citation: &'static str) -> usize {
        self.steps.push(Step { rule, premises, statement, conclusion, citation });
        self.steps.len() - 1
    }

    /// Appends `other`, shifting its premise indices.
    fn absorb(&mut self, other: DerivationTrace) -> usize {
        let base = self.steps.len();
        for mut s in other.steps {
            s.premises.iter_mut().for_each(|p| *p += base);
            self.steps.push(s);
        }
        self.steps.len() - 1
    }

    pub fn uses(&self, pred: impl Fn(&Rule) -> bool) -> usize {
        self.steps.iter().filter(|s| pred(&s.rule)).count()
    }
}

impl fmt::Display for DerivationTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, s) in self.steps.iter().enumerate() {
            let prem = if s.premises.is_empty() {
                "fact".to_string()
            } else {
                s.premises.iter().map(|p| format!("#{p}")).collect::<Vec<_>>().join(",")
            };
            writeln!(f, "#{i} [{prem}] {}  ({})", s.statement, s.citation)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "group", rename_all = "lowercase")]
pub enum Pi1Outcome {
    Group(CyclicGroup),
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Derivation {
    pub outcome: Pi1Outcome,
    /// Name of the premise that failed when inconclusive.
    pub failed_premise: Option<String>,
    pub trace: DerivationTrace,
}

const CITE_LENS: &str = "boundary of a linear plumbing is a lens space L(n, m), H_1 = Z_n";
const CITE_VK: &str = "Van Kampen for Z = Z0 ∪ plumbings";
const CITE_WITNESS: &str = "normal circles on a common (-1)-sphere have equal order";
const CITE_PUSHOUT: &str = "Van Kampen for the rational ball gluing, π1(B_{p,q}) = Z_p";

pub fn kill_rule(pi1_z: CyclicGroup, p1: u64, p2: u64, same_order_witness: bool) -> Derivation {
    let mut t = DerivationTrace::default();
    let amb = t.push(
        Rule::AmbientGroup { order: pi1_z.order },
        vec![],
        format!("π1(Z) = {pi1_z}"),
        Value::Order(pi1_z.order),
        "scenario",
    );
    let mut bounds = Vec::new();
    for p in [p1, p2] {
        let order = match p.checked_mul(p) {
            Some(o) => o,
            None => {
                return Derivation {
                    outcome: Pi1Outcome::Inconclusive,
                    failed_premise: Some(format!("p = {p} too large")),
                    trace: t,
                }
            }
        };
        bounds.push(t.push(
            Rule::BoundaryGroup { p },
            vec![],
            format!("normal circle of the C_{{{p},·}} plumbing has order dividing {order}"),
            Value::Order(order),
            CITE_LENS,
        ));
    }
    let wit = t.push(
        Rule::SameOrderWitness { holds: same_order_witness },
        vec![],
        "x and y have the same order in π1(Z0)".to_string(),
        Value::Holds(same_order_witness),
        CITE_WITNESS,
    );
    let g = p1.gcd(&p2);
    let cop = t.push(
        Rule::Coprime { p1, p2 },
        vec![],
        format!("gcd({p1}, {p2}) = {g}"),
        Value::Gcd(g),
        "arithmetic",
    );
    let failed = if p1 < 2 || p2 < 2 {
        Some("p1, p2 >= 2".to_string())
    } else if !same_order_witness {
        Some("same-order witness".to_string())
    } else if g != 1 {
        Some(format!("coprimality (gcd = {g})"))
    } else {
        None
    };
    let (conclusion, outcome, statement) = match &failed {
        None => (
            Value::Order(pi1_z.order),
            Pi1Outcome::Group(pi1_z),
            format!("x = y = 1, so π1(Z0) = π1(Z) = {pi1_z}"),
        ),
        Some(why) => (Value::Inconclusive, Pi1Outcome::Inconclusive, format!("cannot kill x, y: {why} fails")),
    };
    t.push(Rule::Kill, vec![amb, bounds[0], bounds[1], wit, cop], statement, conclusion, CITE_VK);
    Derivation { outcome, failed_premise: failed, trace: t }
}

pub fn pi1_after_blowdown(pi1_z: CyclicGroup, pieces: &[WahlParams], witness: bool) -> Derivation {
    if pieces.len() != 2 {
        return Derivation {
            outcome: Pi1Outcome::Inconclusive,
            failed_premise: Some(format!("exactly two pieces (got {})", pieces.len())),
            trace: DerivationTrace::default(),
        };
    }
    let kill = kill_rule(pi1_z, pieces[0].p, pieces[1].p, witness);
    let Pi1Outcome::Group(mut current) = kill.outcome else {
        return kill;
    };
    let mut t = DerivationTrace::default();
    let mut last = t.absorb(kill.trace);
    for w in pieces {
        let edge = CyclicGroup { order: w.p * w.p };
        let ball = CyclicGroup { order: w.p };
        // the edge generator is trivial in the complement by the kill step
        let f = CyclicHom::new(edge, current, 0).expect("zero map is well defined");
        let g = CyclicHom::new(edge, ball, 1).expect("reduction is well defined");
        let out = pushout_cyclic(current, ball, &f, &g).expect("legs share their source");
        let (value, statement) = match out {
            Pushout::Resolved(r) => (Value::Order(r.order), format!("{current} *_{edge} {ball} = {r}")),
            Pushout::Unresolved => (Value::Unresolved, format!("{current} *_{edge} {ball} unresolved")),
        };
        last = t.push(
            Rule::Pushout { edge: edge.order, ball: ball.order, to_complement: 0, to_ball: 1 },
            vec![last],
            statement,
            value,
            CITE_PUSHOUT,
        );
        match out {
            Pushout::Resolved(r) => current = r,
            Pushout::Unresolved => {
                return Derivation {
                    outcome: Pi1Outcome::Inconclusive,
                    failed_premise: Some("pushout".to_string()),
                    trace: t,
                }
            }
        }
    }
    Derivation { outcome: Pi1Outcome::Group(current), failed_premise: None, trace: t }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("step #{index} does not follow: {reason}")]
pub struct ReplayError {
    pub index: usize,
    pub reason: String,
}

/// Re-derives every conclusion of `t` from its rule and premises.
pub fn replay(t: &DerivationTrace) -> Result<Option<Value>, ReplayError> {
    let fail = |index: usize, reason: &str| ReplayError { index, reason: reason.to_string() };
    for (i, s) in t.steps.iter().enumerate() {
        if s.premises.iter().any(|&p| p >= i) {
            return Err(fail(i, "premise is not a prior step"));
        }
        let prem: Vec<&Step> = s.premises.iter().map(|&p| &t.steps[p]).collect();
        let expected = match &s.rule {
            Rule::AmbientGroup { order } => Value::Order(*order),
            Rule::BoundaryGroup { p } => Value::Order(p * p),
            Rule::SameOrderWitness { holds } => Value::Holds(*holds),
            Rule::Coprime { p1, p2 } => Value::Gcd(p1.gcd(p2)),
            Rule::Kill => {
                let [amb, b1, b2, wit, cop] = prem[..] else {
                    return Err(fail(i, "kill needs five premises"));
                };
                match (&amb.rule, &b1.rule, &b2.rule, wit.conclusion, cop.conclusion) {
                    (
                        Rule::AmbientGroup { order },
                        Rule::BoundaryGroup { p: q1 },
                        Rule::BoundaryGroup { p: q2 },
                        Value::Holds(h),
                        Value::Gcd(g),
                    ) => {
                        if cop.rule != (Rule::Coprime { p1: *q1, p2: *q2 }) {
                            return Err(fail(i, "coprimality premise is about other chains"));
                        }
                        if h && g == 1 && *q1 >= 2 && *q2 >= 2 {
                            Value::Order(*order)
                        } else {
                            Value::Inconclusive
                        }
                    }
                    _ => return Err(fail(i, "kill premises have the wrong shape")),
                }
            }
            Rule::Pushout { edge, ball, to_complement, to_ball } => {
                let [prev] = prem[..] else {
                    return Err(fail(i, "pushout needs one premise"));
                };
                let Value::Order(b) = prev.conclusion else {
                    return Err(fail(i, "pushout over an undetermined group"));
                };
                if *to_complement == 0 && !matches!(prev.rule, Rule::Kill | Rule::Pushout { .. }) {
                    return Err(fail(i, "zero complement map needs the kill step first"));
                }
                let mk = |o| CyclicGroup::new(o).map_err(|e| fail(i, &e.to_string()));
                let (a, bg, cg) = (mk(*edge)?, mk(b)?, mk(*ball)?);
                let f = CyclicHom::new(a, bg, *to_complement).map_err(|e| fail(i, &e.to_string()))?;
                let g = CyclicHom::new(a, cg, *to_ball).map_err(|e| fail(i, &e.to_string()))?;
                match pushout_cyclic(bg, cg, &f, &g).map_err(|e| fail(i, &e.to_string()))? {
                    Pushout::Resolved(r) => Value::Order(r.order),
                    Pushout::Unresolved => Value::Unresolved,
                }
            }
        };
        if expected != s.conclusion {
            return Err(fail(i, "recorded conclusion differs from the rule's"));
        }
    }
    Ok(t.steps.last().map(|s| s.conclusion))
}

/// The (-1)-sphere predicate: `sphere_id` is a smooth rational (-1)-curve
/// off both chains meeting exactly one end curve of each chain once and no
/// other chain curve.
pub fn minus_one_sphere_witness(
    c: &Configuration,
    emb1: &ChainEmbedding,
    emb2: &ChainEmbedding,
    sphere_id: &str,
) -> Result<bool, FundError> {
    let s = c.curve(sphere_id)?;
    for id in emb1.curves.iter().chain(&emb2.curves) {
        c.curve(id)?;
    }
    if !s.is_smooth_rational() || s.self_int != -1 {
        return Ok(false);
    }
    let touches_one_end = |emb: &ChainEmbedding| {
        if emb.curves.iter().any(|x| x == sphere_id) {
            return false;
        }
        let hits: Vec<(usize, i64)> = emb
            .curves
            .iter()
            .enumerate()
            .map(|(i, x)| (i, c.pairing(x, sphere_id)))
            .filter(|&(_, n)| n != 0)
            .collect();
        matches!(hits[..], [(i, 1)] if i == 0 || i + 1 == emb.curves.len())
    };
    Ok(touches_one_end(emb1) && touches_one_end(emb2))
}
