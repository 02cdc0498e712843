//! Varieties generated by finitely many finite algebras, and membership.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::free::FreeAlgebra;
use crate::terms::{enumerate_terms, Signature, Term};

/// Work bound for the identity refutation pass, in table lookups.
const REFUTE_BUDGET: usize = 4_000_000;
/// Bound on generating-set candidates tried, scaled down by carrier size.
const GENSET_BUDGET: usize = 200_000;

pub struct VarietySpec {
    signature: Arc<Signature>,
    generators: Vec<FiniteAlgebra>,
    identities: Vec<(Term, Term)>,
    fingerprint: String,
    cache: Mutex<BTreeMap<(usize, usize), Arc<FreeAlgebra>>>,
}

impl fmt::Debug for VarietySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.generators.iter().map(FiniteAlgebra::name).collect();
        write!(f, "var({})", names.join(", "))
    }
}

impl Clone for VarietySpec {
    fn clone(&self) -> Self {
        VarietySpec {
            signature: self.signature.clone(),
            generators: self.generators.clone(),
            identities: self.identities.clone(),
            fingerprint: self.fingerprint.clone(),
            cache: Mutex::new(self.cache.lock().expect("cache lock").clone()),
        }
    }
}

/// Outcome of a membership test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Membership {
    Member,
    /// Not in the variety; the string says why (a failing identity or a
    /// failed homomorphism from a free algebra).
    Refuted(String),
}

impl Membership {
    pub fn is_member(&self) -> bool {
        matches!(self, Membership::Member)
    }
}

impl VarietySpec {
    /// Declared identities are only checked against the generators.
    pub fn new(generators: Vec<FiniteAlgebra>, identities: Vec<(Term, Term)>) -> Result<Self> {
        let first = generators.first().ok_or(Error::EmptyProduct)?;
        let signature = first.signature().clone();
        for g in &generators[1..] {
            first.same_signature(g)?;
        }
        for (lhs, rhs) in &identities {
            lhs.check(&signature)?;
            rhs.check(&signature)?;
            for g in &generators {
                if let Some(asg) = g.identity_counterexample(lhs, rhs) {
                    return Err(Error::Input(format!(
                        "generator `{}` violates declared identity {} = {} at {:?}",
                        g.name(),
                        lhs.display(&signature),
                        rhs.display(&signature),
                        asg
                    )));
                }
            }
        }
        let mut hasher = Sha256::new();
        hasher.update(signature.to_string().as_bytes());
        for g in &generators {
            hasher.update(format!(";{}", g.size()).as_bytes());
            for t in g.tables() {
                for v in t.values() {
                    hasher.update(format!(",{v}").as_bytes());
                }
                hasher.update(b"/");
            }
        }
        Ok(VarietySpec {
            signature,
            generators,
            identities,
            fingerprint: hex::encode(hasher.finalize()),
            cache: Mutex::new(BTreeMap::new()),
        })
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn generators(&self) -> &[FiniteAlgebra] {
        &self.generators
    }

    pub fn identities(&self) -> &[(Term, Term)] {
        &self.identities
    }

    /// SHA-256 over the signature and generator tables.
    pub fn fingerprint(&self) -> String {
        self.fingerprint.clone()
    }

    /// `W(rank)`, built once and cached.
    pub fn free(&self, rank: usize, cap: usize) -> Result<Arc<FreeAlgebra>> {
        if let Some(b) = self.cached(rank, cap) {
            return Ok(b);
        }
        let b = Arc::new(FreeAlgebra::build(self, rank, cap)?);
        self.cache
            .lock()
            .expect("cache lock")
            .insert((rank, cap), b.clone());
        Ok(b)
    }

    fn cached(&self, rank: usize, cap: usize) -> Option<Arc<FreeAlgebra>> {
        let cache = self.cache.lock().expect("cache lock");
        if let Some(b) = cache.get(&(rank, cap)) {
            return Some(b.clone());
        }
        // A free algebra that fit under a larger cap is the same algebra.
        cache
            .iter()
            .find(|((r, _), b)| *r == rank && b.size() <= cap)
            .map(|(_, b)| b.clone())
    }

    /// Cheap refutation: an identity in two variables of depth at most two
    /// that holds in every generator but fails in `h`. `None` means no such
    /// identity was found (or the pass was skipped as too expensive).
    pub fn refute_by_identities(&self, h: &FiniteAlgebra) -> Option<String> {
        let terms = enumerate_terms(&self.signature, 2, 2);
        let per_term: usize = self
            .generators
            .iter()
            .map(|g| g.size() * g.size())
            .sum::<usize>()
            + h.size() * h.size();
        if terms.len().saturating_mul(per_term) > REFUTE_BUDGET {
            return None;
        }
        let mut seen: HashMap<Vec<usize>, (usize, Vec<usize>)> = HashMap::new();
        let values = |alg: &FiniteAlgebra, t: &Term, out: &mut Vec<usize>| {
            for a in 0..alg.size() {
                for b in 0..alg.size() {
                    out.push(alg.eval_unchecked(t, &[a, b]));
                }
            }
        };
        for (i, t) in terms.iter().enumerate() {
            let mut key = Vec::with_capacity(per_term);
            for g in &self.generators {
                values(g, t, &mut key);
            }
            let mut hv = Vec::with_capacity(h.size() * h.size());
            values(h, t, &mut hv);
            match seen.get(&key) {
                Some((j, other)) if *other != hv => {
                    let pos = other.iter().zip(&hv).position(|(x, y)| x != y).unwrap_or(0);
                    let (a, b) = (pos / h.size(), pos % h.size());
                    return Some(format!(
                        "identity {} = {} fails at x1={a}, x2={b}",
                        terms[*j].display(&self.signature),
                        t.display(&self.signature)
                    ));
                }
                Some(_) => {}
                None => {
                    seen.insert(key, (i, hv));
                }
            }
        }
        None
    }

    /// Decides `h ∈ var(generators)`: a cheap identity refutation first, then
    /// a surjective homomorphism `W(r) → h` onto a generating set of size `r`.
    pub fn membership(&self, h: &FiniteAlgebra, cap: usize) -> Result<Membership> {
        h.same_signature(&self.generators[0])?;
        if h.size() == 1 || self.generators.iter().any(|g| g.same_tables(h)) {
            return Ok(Membership::Member);
        }
        if let Some(why) = self.refute_by_identities(h) {
            return Ok(Membership::Refuted(why));
        }
        let gens = small_generating_set(h)?;
        self.membership_via(h, &gens, cap)
    }

    /// Like [`VarietySpec::membership`], but the generating set is grown
    /// greedily from `seeds`. Cheaper on large algebras.
    pub fn membership_from(
        &self,
        h: &FiniteAlgebra,
        seeds: &[usize],
        cap: usize,
    ) -> Result<Membership> {
        h.same_signature(&self.generators[0])?;
        if h.size() == 1 || self.generators.iter().any(|g| g.same_tables(h)) {
            return Ok(Membership::Member);
        }
        if let Some(why) = self.refute_by_identities(h) {
            return Ok(Membership::Refuted(why));
        }
        let gens = greedy_generating_set(h, seeds)?;
        self.membership_via(h, &gens, cap)
    }

    /// Membership using a known generating set of `h`.
    pub fn membership_via(
        &self,
        h: &FiniteAlgebra,
        gens: &[usize],
        cap: usize,
    ) -> Result<Membership> {
        let w = self.free(gens.len(), cap)?;
        let map = w.extend_unchecked(h, gens);
        let consistent = w
            .generators()
            .iter()
            .zip(gens)
            .all(|(&g, &img)| map[g] == img);
        if !consistent {
            return Ok(Membership::Refuted(format!(
                "generators {gens:?} are identified in every algebra of the variety but not in `{}`",
                h.name()
            )));
        }
        match w.algebra().hom_violation(h, &map)? {
            None => Ok(Membership::Member),
            Some((op, args)) => {
                let sig = &self.signature;
                let lhs = Term::App(op, args.iter().map(|&a| w.witness(a).clone()).collect());
                let rhs = w.witness(w.algebra().apply(op, &args));
                Ok(Membership::Refuted(format!(
                    "identity {} = {} fails at {gens:?}",
                    lhs.display(sig),
                    rhs.display(sig)
                )))
            }
        }
    }
}

/// A generating set of `h`, as small as a bounded search finds.
pub fn small_generating_set(h: &FiniteAlgebra) -> Result<Vec<usize>> {
    let has_constants = h.signature().has_constants();
    let budget = (GENSET_BUDGET / h.size().max(1)).max(50);
    let generates = |seeds: &[usize]| -> Result<bool> {
        Ok(h.generate_subalgebra(seeds)?.elements.len() == h.size())
    };
    for r in 0..=h.size() {
        if r == 0 && !has_constants {
            continue;
        }
        let mut combo: Vec<usize> = (0..r).collect();
        let mut tried = 0;
        loop {
            if generates(&combo)? {
                return Ok(combo);
            }
            tried += 1;
            if tried >= budget || !next_combination(&mut combo, h.size()) {
                break;
            }
        }
        if tried >= budget {
            break;
        }
    }
    greedy_generating_set(h, &[])
}

/// `seeds` extended by the least element not yet generated, until the whole
/// carrier is generated.
pub fn greedy_generating_set(h: &FiniteAlgebra, seeds: &[usize]) -> Result<Vec<usize>> {
    let has_constants = h.signature().has_constants();
    let mut seeds = seeds.to_vec();
    seeds.dedup();
    loop {
        let covered = if seeds.is_empty() && !has_constants {
            Vec::new()
        } else {
            h.generate_subalgebra(&seeds)?.sorted_elements()
        };
        if covered.len() == h.size() {
            return Ok(seeds);
        }
        let next = (0..h.size())
            .find(|a| !covered.contains(a))
            .expect("missing element");
        seeds.push(next);
    }
}

fn next_combination(c: &mut [usize], n: usize) -> bool {
    let r = c.len();
    for i in (0..r).rev() {
        if c[i] < n - r + i {
            c[i] += 1;
            for j in i + 1..r {
                c[j] = c[j - 1] + 1;
            }
            return true;
        }
    }
    false
}
