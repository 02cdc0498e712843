//! Word systems, star algebras, and their dual bijection systems on free
//! algebras.

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Op2Stage, Result};
use crate::free::FreeAlgebra;
use crate::terms::{for_each_tuple, Replacement, Signature, Term};
use crate::variety::{Membership, VarietySpec};

/// One word `w_ω` per symbol `ω`, over `x1..x_arity(ω)` when Op1 holds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordSystem {
    signature: Arc<Signature>,
    words: Vec<Term>,
}

impl WordSystem {
    pub fn new(signature: Arc<Signature>, words: Vec<Term>) -> Result<WordSystem> {
        if words.len() != signature.len() {
            return Err(Error::SizeMismatch(format!(
                "{} words for {} symbols",
                words.len(),
                signature.len()
            )));
        }
        for w in &words {
            w.check(&signature)?;
        }
        Ok(WordSystem { signature, words })
    }

    /// `w_ω = ω(x1, .., x_k)`.
    pub fn identity(signature: Arc<Signature>) -> WordSystem {
        let words = (0..signature.len())
            .map(|op| Term::basic(&signature, op))
            .collect();
        WordSystem { signature, words }
    }

    /// Parses `symbol → word` entries. Every symbol needs a word. Variables
    /// are not limited here, so Op1 violations survive parsing and can be
    /// reported by [`WordSystem::check_op1`].
    pub fn parse<'a>(
        signature: Arc<Signature>,
        entries: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<WordSystem> {
        let mut words: Vec<Option<Term>> = vec![None; signature.len()];
        for (name, text) in entries {
            let op = signature
                .index_of(name)
                .ok_or_else(|| Error::UnknownSymbol(name.to_string()))?;
            if words[op].is_some() {
                return Err(Error::DuplicateSymbol(name.to_string()));
            }
            words[op] = Some(Term::parse(text, &signature, usize::MAX)?);
        }
        let words = words
            .into_iter()
            .enumerate()
            .map(|(op, w)| {
                w.ok_or_else(|| Error::Input(format!("no word for `{}`", signature.name(op))))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(WordSystem { signature, words })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn words(&self) -> &[Term] {
        &self.words
    }

    pub fn word(&self, op: usize) -> &Term {
        &self.words[op]
    }

    /// `(symbol, word)` pairs in signature order.
    pub fn to_texts(&self) -> Vec<(String, String)> {
        self.words
            .iter()
            .enumerate()
            .map(|(op, w)| {
                (
                    self.signature.name(op).to_string(),
                    w.to_text(&self.signature),
                )
            })
            .collect()
    }

    pub fn is_syntactic_identity(&self) -> bool {
        self.words
            .iter()
            .enumerate()
            .all(|(op, w)| *w == Term::basic(&self.signature, op))
    }

    /// First symbol whose word uses a variable beyond its arity.
    pub fn op1_violation(&self) -> Option<usize> {
        (0..self.words.len()).find(|&op| self.words[op].rank() > self.signature.arity(op))
    }

    pub fn check_op1(&self) -> bool {
        self.op1_violation().is_none()
    }

    fn require_op1(&self) -> Result<()> {
        match self.op1_violation() {
            Some(op) => Err(Error::Op1Violation(self.signature.name(op).to_string())),
            None => Ok(()),
        }
    }

    fn templates(&self) -> Vec<Replacement> {
        self.words
            .iter()
            .cloned()
            .map(Replacement::Template)
            .collect()
    }

    /// Rewrites a term so that each `ω` is read as `w_ω`: the value of `t`
    /// in `H*` is the value of `expand(t)` in `H`.
    pub fn expand(&self, t: &Term) -> Result<Term> {
        t.replace_symbols(&self.signature, &self.templates())
    }

    /// The system `c` with `star(star(H, self), next) = star(H, c)`.
    pub fn followed_by(&self, next: &WordSystem) -> Result<WordSystem> {
        let words = next
            .words
            .iter()
            .map(|w| self.expand(w))
            .collect::<Result<Vec<_>>>()?;
        WordSystem::new(self.signature.clone(), words)
    }
}

/// `H*`: same carrier, each `ω` interpreted as the verbal operation of `w_ω`.
pub fn star_algebra(h: &FiniteAlgebra, ws: &WordSystem) -> Result<FiniteAlgebra> {
    ws.require_op1()?;
    if **h.signature() != *ws.signature {
        return Err(Error::SignatureMismatch);
    }
    let sig = h.signature().clone();
    let mut tables = Vec::with_capacity(sig.len());
    for (op, w) in ws.words.iter().enumerate() {
        let mut values = Vec::with_capacity(h.size().pow(sig.arity(op) as u32));
        for_each_tuple(h.size(), sig.arity(op), |args| {
            values.push(h.eval_unchecked(w, args))
        });
        tables.push(values);
    }
    FiniteAlgebra::new(format!("{}*", h.name()), sig, h.size(), tables)
}

pub fn invert_permutation(s: &[usize]) -> Result<Vec<usize>> {
    let mut inv = vec![usize::MAX; s.len()];
    for (a, &b) in s.iter().enumerate() {
        if b >= s.len() || inv[b] != usize::MAX {
            return Err(Error::NotBijective);
        }
        inv[b] = a;
    }
    Ok(inv)
}

/// Table of `ω̃(c) = s(ω(s⁻¹(c)))`.
pub fn derived_operation(c: &FiniteAlgebra, s: &[usize], op: usize) -> Result<Vec<usize>> {
    if s.len() != c.size() {
        return Err(Error::SizeMismatch(format!(
            "bijection on {} points for a carrier of size {}",
            s.len(),
            c.size()
        )));
    }
    let inv = invert_permutation(s)?;
    let mut out = Vec::new();
    let mut pre = Vec::new();
    for_each_tuple(c.size(), c.signature().arity(op), |args| {
        pre.clear();
        pre.extend(args.iter().map(|&a| inv[a]));
        out.push(s[c.apply(op, &pre)]);
    });
    Ok(out)
}

/// `C` with every operation replaced by its derived operation.
pub fn derived_algebra(c: &FiniteAlgebra, s: &[usize]) -> Result<FiniteAlgebra> {
    let tables = (0..c.signature().len())
        .map(|op| derived_operation(c, s, op))
        .collect::<Result<Vec<_>>>()?;
    FiniteAlgebra::new(
        format!("{}~", c.name()),
        c.signature().clone(),
        c.size(),
        tables,
    )
}

/// The free algebras `W(k)` for `k` from 0 (only with constants) to `n_max`.
#[derive(Debug)]
pub struct FreeScope {
    variety: VarietySpec,
    n_max: usize,
    cap: usize,
    algebras: BTreeMap<usize, Arc<FreeAlgebra>>,
}

impl FreeScope {
    pub fn new(variety: &VarietySpec, n_max: usize, cap: usize) -> Result<FreeScope> {
        let start = usize::from(!variety.signature().has_constants());
        let mut algebras = BTreeMap::new();
        for k in start..=n_max {
            algebras.insert(k, variety.free(k, cap)?);
        }
        Ok(FreeScope {
            variety: variety.clone(),
            n_max,
            cap,
            algebras,
        })
    }

    pub fn variety(&self) -> &VarietySpec {
        &self.variety
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Free-algebra size cap used for this scope and for membership tests.
    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn ranks(&self) -> impl Iterator<Item = usize> + '_ {
        self.algebras.keys().copied()
    }

    pub fn free(&self, rank: usize) -> Result<&Arc<FreeAlgebra>> {
        self.algebras.get(&rank).ok_or(Error::OutOfScope(rank))
    }
}

/// One generator-fixing bijection `s_B` per free algebra in scope.
#[derive(Debug, Clone)]
pub struct BijectionSystem {
    scope: Arc<FreeScope>,
    maps: BTreeMap<usize, Vec<usize>>,
    inverses: BTreeMap<usize, Vec<usize>>,
}

impl PartialEq for BijectionSystem {
    fn eq(&self, other: &Self) -> bool {
        self.maps == other.maps
    }
}

impl BijectionSystem {
    pub fn new(
        scope: Arc<FreeScope>,
        maps: BTreeMap<usize, Vec<usize>>,
    ) -> Result<BijectionSystem> {
        let mut inverses = BTreeMap::new();
        for k in scope.ranks() {
            let m = maps.get(&k).ok_or(Error::OutOfScope(k))?;
            if m.len() != scope.free(k)?.size() {
                return Err(Error::SizeMismatch(format!("bijection for rank {k}")));
            }
            inverses.insert(k, invert_permutation(m)?);
        }
        if let Some(k) = maps.keys().find(|k| !inverses.contains_key(k)) {
            return Err(Error::OutOfScope(*k));
        }
        Ok(BijectionSystem {
            scope,
            maps,
            inverses,
        })
    }

    pub fn identity(scope: Arc<FreeScope>) -> BijectionSystem {
        let maps: BTreeMap<usize, Vec<usize>> = scope
            .algebras
            .iter()
            .map(|(&k, b)| (k, (0..b.size()).collect()))
            .collect();
        BijectionSystem {
            inverses: maps.clone(),
            maps,
            scope,
        }
    }

    pub fn scope(&self) -> &Arc<FreeScope> {
        &self.scope
    }

    pub fn map(&self, rank: usize) -> Result<&[usize]> {
        self.maps
            .get(&rank)
            .map(Vec::as_slice)
            .ok_or(Error::OutOfScope(rank))
    }

    pub fn inverse(&self, rank: usize) -> Result<&[usize]> {
        self.inverses
            .get(&rank)
            .map(Vec::as_slice)
            .ok_or(Error::OutOfScope(rank))
    }

    pub fn maps(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.maps
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "lowercase")]
pub enum SystemViolation {
    /// `s_B` moves a generator.
    B2 {
        rank: usize,
        generator: usize,
        image: usize,
    },
    /// Conjugating the homomorphism with these generator images fails.
    B1 {
        source: usize,
        target: usize,
        images: Vec<usize>,
        inverse: bool,
    },
}

/// B2 on every free algebra in scope; B1 for homomorphisms between free
/// algebras of rank at most `hom_rank_bound`.
pub fn check_b1_b2(s: &BijectionSystem, hom_rank_bound: usize) -> Result<Option<SystemViolation>> {
    for k in s.scope.ranks() {
        let b = s.scope.free(k)?;
        let m = s.map(k)?;
        for (i, &g) in b.generators().iter().enumerate() {
            if m[g] != g {
                return Ok(Some(SystemViolation::B2 {
                    rank: k,
                    generator: i + 1,
                    image: m[g],
                }));
            }
        }
    }
    let ranks: Vec<usize> = s.scope.ranks().filter(|&k| k <= hom_rank_bound).collect();
    for &a in &ranks {
        let wa = s.scope.free(a)?;
        for &b in &ranks {
            let wb = s.scope.free(b)?;
            let mut bad = None;
            for_each_tuple(wb.size(), a, |images| {
                if bad.is_some() {
                    return;
                }
                let alpha = wa.extend_unchecked(wb.algebra(), images);
                for inverse in [false, true] {
                    let conj = conjugate(s, a, b, &alpha, inverse).expect("ranks in scope");
                    if !wa.is_hom_into_variety(wb.algebra(), &conj) {
                        bad = Some(SystemViolation::B1 {
                            source: a,
                            target: b,
                            images: images.to_vec(),
                            inverse,
                        });
                        return;
                    }
                }
            });
            if bad.is_some() {
                return Ok(bad);
            }
        }
    }
    Ok(None)
}

/// `s_B α s_A⁻¹`, or `s_B⁻¹ α s_A` when `inverse`.
fn conjugate(
    s: &BijectionSystem,
    a: usize,
    b: usize,
    alpha: &[usize],
    inverse: bool,
) -> Result<Vec<usize>> {
    let (outer, inner) = if inverse {
        (s.inverse(b)?, s.map(a)?)
    } else {
        (s.map(b)?, s.inverse(a)?)
    };
    Ok(inner.iter().map(|&x| outer[alpha[x]]).collect())
}

/// A homomorphism `W(source) → W(target)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FreeMorphism {
    pub source: usize,
    pub target: usize,
    pub map: Vec<usize>,
}

impl FreeMorphism {
    /// The morphism sending `x_i` to `images[i]`.
    pub fn from_images(
        scope: &FreeScope,
        source: usize,
        target: usize,
        images: &[usize],
    ) -> Result<FreeMorphism> {
        let wa = scope.free(source)?;
        let wb = scope.free(target)?;
        let map = wa.extend_hom(wb.algebra(), images)?.map;
        Ok(FreeMorphism {
            source,
            target,
            map,
        })
    }

    pub fn identity(scope: &FreeScope, rank: usize) -> Result<FreeMorphism> {
        let n = scope.free(rank)?.size();
        Ok(FreeMorphism {
            source: rank,
            target: rank,
            map: (0..n).collect(),
        })
    }

    /// `next ∘ self`.
    pub fn then(&self, next: &FreeMorphism) -> Result<FreeMorphism> {
        if self.target != next.source {
            return Err(Error::SizeMismatch("morphisms do not compose".into()));
        }
        Ok(FreeMorphism {
            source: self.source,
            target: next.target,
            map: self.map.iter().map(|&x| next.map[x]).collect(),
        })
    }
}

/// `Φ(α) = s_B α s_A⁻¹`.
pub fn strongly_stable_action(s: &BijectionSystem, alpha: &FreeMorphism) -> Result<FreeMorphism> {
    act(s, alpha, false)
}

/// `Φ⁻¹(α) = s_B⁻¹ α s_A`.
pub fn strongly_stable_inverse(s: &BijectionSystem, alpha: &FreeMorphism) -> Result<FreeMorphism> {
    act(s, alpha, true)
}

fn act(s: &BijectionSystem, alpha: &FreeMorphism, inverse: bool) -> Result<FreeMorphism> {
    let wa = s.scope.free(alpha.source)?;
    let wb = s.scope.free(alpha.target)?;
    if alpha.map.len() != wa.size() {
        return Err(Error::SizeMismatch(
            "morphism does not match its source".into(),
        ));
    }
    let map = conjugate(s, alpha.source, alpha.target, &alpha.map, inverse)?;
    if !wa.is_hom_into_variety(wb.algebra(), &map) {
        return Err(Error::Verification(format!(
            "conjugated map W({}) → W({}) is not a homomorphism",
            alpha.source, alpha.target
        )));
    }
    Ok(FreeMorphism {
        source: alpha.source,
        target: alpha.target,
        map,
    })
}

#[derive(Debug, Clone)]
pub enum Op2Outcome {
    Pass(BijectionSystem),
    Fail {
        rank: usize,
        stage: Op2Stage,
        detail: String,
    },
}

impl Op2Outcome {
    pub fn passed(&self) -> bool {
        matches!(self, Op2Outcome::Pass(_))
    }
}

/// For each free algebra in scope, checks that `B*` lies in the variety and
/// that the generator-fixing homomorphism `σ_B: B → B*` is bijective.
pub fn check_op2(ws: &WordSystem, scope: &Arc<FreeScope>) -> Result<Op2Outcome> {
    ws.require_op1()?;
    let variety = scope.variety();
    let mut maps = BTreeMap::new();
    for k in scope.ranks() {
        let b = scope.free(k)?;
        let bstar = star_algebra(b.algebra(), ws)?;
        let fail = |stage, detail| Op2Outcome::Fail {
            rank: k,
            stage,
            detail,
        };
        if let Some(why) = variety.refute_by_identities(&bstar) {
            return Ok(fail(Op2Stage::Membership, why));
        }
        let sigma = b.extend_unchecked(&bstar, b.generators());
        if let Some((op, args)) = b.algebra().hom_violation(&bstar, &sigma)? {
            // A member of the variety would receive a homomorphism here.
            let sig = variety.signature();
            let lhs = Term::App(op, args.iter().map(|&a| b.witness(a).clone()).collect());
            return Ok(fail(
                Op2Stage::Membership,
                format!(
                    "generator-fixing map into B* breaks {} = {}",
                    lhs.display(sig),
                    b.witness(b.algebra().apply(op, &args)).display(sig)
                ),
            ));
        }
        if invert_permutation(&sigma).is_err() {
            if let Membership::Refuted(why) =
                variety.membership_from(&bstar, b.generators(), scope.cap)?
            {
                return Ok(fail(Op2Stage::Membership, why));
            }
            let mut seen = vec![None; sigma.len()];
            for (x, &y) in sigma.iter().enumerate() {
                if let Some(first) = seen[y] {
                    return Ok(fail(
                        Op2Stage::NotInjective,
                        format!(
                            "σ identifies {} and {}",
                            b.witness(first).display(variety.signature()),
                            b.witness(x).display(variety.signature())
                        ),
                    ));
                }
                seen[y] = Some(x);
            }
            return Ok(fail(Op2Stage::NotSurjective, "σ is not onto B*".into()));
        }
        maps.insert(k, sigma);
    }
    Ok(Op2Outcome::Pass(BijectionSystem::new(scope.clone(), maps)?))
}

/// The system `{σ_B}`; fails if Op2 fails.
pub fn bijections_from_words(ws: &WordSystem, scope: &Arc<FreeScope>) -> Result<BijectionSystem> {
    match check_op2(ws, scope)? {
        Op2Outcome::Pass(s) => Ok(s),
        Op2Outcome::Fail {
            rank,
            stage,
            detail,
        } => Err(Error::Op2Failed {
            rank,
            stage,
            detail,
        }),
    }
}

/// `w_ω = s_{A_ω}(ω(x1..x_k))`, read off as the witness term of the image.
pub fn words_from_bijections(s: &BijectionSystem) -> Result<WordSystem> {
    let sig = s.scope.variety().signature().clone();
    let mut words = Vec::with_capacity(sig.len());
    for op in 0..sig.len() {
        let k = sig.arity(op);
        if k > s.scope.n_max {
            return Err(Error::BoundTooSmall {
                needed: k,
                bound: s.scope.n_max,
            });
        }
        let a = s.scope.free(k)?;
        let e = a.algebra().apply(op, a.generators());
        words.push(a.witness(s.map(k)?[e]).clone());
    }
    WordSystem::new(sig, words)
}

/// Compares word systems as elements of the free algebras `A_ω`.
pub fn same_words(
    a: &WordSystem,
    b: &WordSystem,
    variety: &VarietySpec,
    cap: usize,
) -> Result<bool> {
    let sig = variety.signature();
    for op in 0..sig.len() {
        let w = variety.free(sig.arity(op), cap)?;
        if w.term_image(variety, a.word(op))? != w.term_image(variety, b.word(op))? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First `(rank, symbol)` where the verbal table of `ws` on `B` differs from
/// the operation derived through `σ_B`.
pub fn verify_derived_operations(
    ws: &WordSystem,
    s: &BijectionSystem,
) -> Result<Option<(usize, String)>> {
    for k in s.scope.ranks() {
        let b = s.scope.free(k)?;
        let bstar = star_algebra(b.algebra(), ws)?;
        let sigma = s.map(k)?;
        for op in 0..ws.signature.len() {
            if derived_operation(b.algebra(), sigma, op)? != bstar.table(op).values() {
                return Ok(Some((k, ws.signature.name(op).to_string())));
            }
        }
    }
    Ok(None)
}

/// The words `u_ω` undoing a word system.
#[derive(Debug, Clone)]
pub struct InverseWordSystem {
    /// `u_ω` over `Ω`, to be read in `H*`.
    pub words: WordSystem,
    /// `u_ω` with every `ν` replaced by `w_ν`, to be read in `H`.
    pub expanded: WordSystem,
}

impl InverseWordSystem {
    /// `u*_ω` over the starred signature.
    pub fn starred_texts(&self) -> Vec<(String, String)> {
        let starred = self.words.signature.starred();
        self.words
            .words
            .iter()
            .enumerate()
            .map(|(op, w)| (starred.name(op).to_string(), w.to_text(&starred)))
            .collect()
    }
}

/// `u_ω` is the witness of `σ_{A_ω}⁻¹(ω(x1..x_k))`.
pub fn inverse_word_system(ws: &WordSystem, s: &BijectionSystem) -> Result<InverseWordSystem> {
    let sig = ws.signature.clone();
    let mut words = Vec::with_capacity(sig.len());
    for op in 0..sig.len() {
        let k = sig.arity(op);
        let a = s.scope.free(k).map_err(|_| Error::BoundTooSmall {
            needed: k,
            bound: s.scope.n_max,
        })?;
        let e = a.algebra().apply(op, a.generators());
        words.push(a.witness(s.inverse(k)?[e]).clone());
    }
    let words = WordSystem::new(sig, words)?;
    let expanded = ws.followed_by(&words)?;
    Ok(InverseWordSystem { words, expanded })
}
