//! Geometric and automorphic equivalence at bounded rank.

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex};

use serde::Serialize;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::free::{FreeAlgebra, DEFAULT_CAP};
use crate::geometry::{ClosedLattice, PointSpace, DEFAULT_POINT_CAP};
use crate::partition::Partition;
use crate::terms::{enumerate_terms, for_each_tuple, Term};
use crate::variety::{Membership, VarietySpec};
use crate::verbal::{
    bijections_from_words, check_op2, inverse_word_system, star_algebra, strongly_stable_inverse,
    BijectionSystem, FreeMorphism, FreeScope, Op2Outcome, WordSystem,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Caps {
    /// Elements of a free algebra.
    pub free: usize,
    /// Points `|H|^k` of one point space.
    pub points: usize,
    /// Word systems tried by one search.
    pub candidates: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Caps {
            free: DEFAULT_CAP,
            points: DEFAULT_POINT_CAP,
            candidates: 100_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Geometric,
    Automorphic,
    RefutedAtBounds,
    Exhausted,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub n_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op2_rank: Option<usize>,
}

/// Lattices of one rank, as sorted canonical partition encodings.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankEvidence {
    pub rank: usize,
    pub sizes: [usize; 2],
    pub equal: bool,
    pub h1: Vec<String>,
    pub h2: Vec<String>,
}

/// A congruence closed for one algebra and not for the other.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GeomWitness {
    pub rank: usize,
    pub partition: String,
    pub blocks: Vec<Vec<String>>,
    pub closed_for: String,
    pub not_closed_for: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub candidates: usize,
    pub op2_passed: usize,
    pub op2_inconclusive: usize,
    pub candidates_exhausted: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub found_by: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceCertificate {
    pub verdict: Verdict,
    pub h1: String,
    pub h2: String,
    pub variety: String,
    pub bounds: Bounds,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word_system: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub op2_verified_up_to: Option<usize>,
    pub evidence: Vec<RankEvidence>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<GeomWitness>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchStats>,
    #[serde(skip)]
    pub system: Option<WordSystem>,
}

impl EquivalenceCertificate {
    /// 0 equivalent or found, 1 refuted, 2 exhausted.
    pub fn exit_code(&self) -> i32 {
        match self.verdict {
            Verdict::Geometric | Verdict::Automorphic => 0,
            Verdict::RefutedAtBounds => 1,
            Verdict::Exhausted => 2,
        }
    }
}

fn first_rank(v: &VarietySpec) -> usize {
    usize::from(!v.signature().has_constants())
}

pub fn require_member(v: &VarietySpec, h: &FiniteAlgebra, cap: usize) -> Result<()> {
    match v.membership(h, cap)? {
        Membership::Member => Ok(()),
        Membership::Refuted(_) => Err(Error::OutsideVariety(h.name().to_string())),
    }
}

pub fn lattice(free: &Arc<FreeAlgebra>, h: &FiniteAlgebra, caps: &Caps) -> Result<ClosedLattice> {
    Ok(PointSpace::new(free.clone(), h, caps.points)?.closed_lattice())
}

/// Blocks of a partition of `B`, written as witness terms.
pub fn witness_blocks(b: &FreeAlgebra, p: &Partition) -> Vec<Vec<String>> {
    let sig = b.algebra().signature();
    p.blocks()
        .iter()
        .map(|blk| blk.iter().map(|&e| b.witness(e).to_text(sig)).collect())
        .collect()
}

fn compare(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    v: &VarietySpec,
    n_max: usize,
    caps: &Caps,
) -> Result<(Vec<RankEvidence>, Option<GeomWitness>)> {
    let mut evidence = Vec::new();
    let mut witness = None;
    for k in first_rank(v)..=n_max {
        let b = v.free(k, caps.free)?;
        let l1 = lattice(&b, h1, caps)?;
        let l2 = lattice(&b, h2, caps)?;
        let (f1, f2) = (l1.fingerprint(), l2.fingerprint());
        let equal = f1 == f2;
        if !equal && witness.is_none() {
            // Finest first, then canonical labels: the lattices' own order.
            let only1 = l1
                .partitions()
                .filter(|p| !l2.contains(p))
                .map(|p| (p, true));
            let only2 = l2
                .partitions()
                .filter(|p| !l1.contains(p))
                .map(|p| (p, false));
            let (p, in1) = only1
                .chain(only2)
                .min_by(|(a, _), (b, _)| b.num_blocks().cmp(&a.num_blocks()).then_with(|| a.cmp(b)))
                .expect("lattices differ");
            let (yes, no) = if in1 { (h1, h2) } else { (h2, h1) };
            witness = Some(GeomWitness {
                rank: k,
                partition: p.encode(),
                blocks: witness_blocks(&b, p),
                closed_for: yes.name().to_string(),
                not_closed_for: no.name().to_string(),
            });
        }
        evidence.push(RankEvidence {
            rank: k,
            sizes: [l1.len(), l2.len()],
            equal,
            h1: f1,
            h2: f2,
        });
    }
    Ok((evidence, witness))
}

/// Compares `Cl_{H1}(W(k))` and `Cl_{H2}(W(k))` for every rank up to `n_max`.
pub fn geom_equivalent(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    v: &VarietySpec,
    n_max: usize,
    caps: &Caps,
) -> Result<EquivalenceCertificate> {
    require_member(v, h1, caps.free)?;
    require_member(v, h2, caps.free)?;
    let (evidence, witness) = compare(h1, h2, v, n_max, caps)?;
    Ok(EquivalenceCertificate {
        verdict: if witness.is_none() {
            Verdict::Geometric
        } else {
            Verdict::RefutedAtBounds
        },
        h1: h1.name().to_string(),
        h2: h2.name().to_string(),
        variety: v.fingerprint(),
        bounds: Bounds {
            n_max,
            depth_max: None,
            op2_rank: None,
        },
        word_system: None,
        op2_verified_up_to: None,
        evidence,
        witness,
        search: None,
        system: None,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// `T ↦ σ⁻¹T`, from `H`-closed to `H*`-closed.
    Forward,
    /// `T ↦ σT`, from `H*`-closed to `H`-closed.
    Backward,
}

/// Moves a closed congruence across `σ_B` and checks that the result is
/// closed for the other algebra (`target`).
pub fn transport_closed(
    sigma: &[usize],
    t: &Partition,
    direction: Direction,
    target: &PointSpace,
) -> Result<Partition> {
    let moved = match direction {
        Direction::Forward => t.pull_back(sigma),
        Direction::Backward => t.pull_back(&crate::verbal::invert_permutation(sigma)?),
    };
    if !target.is_closed_partition(&moved) {
        return Err(Error::Verification(format!(
            "transported congruence {} is not {}-closed",
            moved,
            target.target().name()
        )));
    }
    Ok(moved)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankTransport {
    pub rank: usize,
    pub sizes: [usize; 2],
    /// `mapping[i]` is the index in `Cl_{H*}` of the image of element `i` of `Cl_H`.
    pub mapping: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct HHStarReport {
    pub algebra: String,
    pub passed: bool,
    pub op2_verified_up_to: usize,
    pub ranks: Vec<RankTransport>,
    pub coordination_checks: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Checks that `T ↦ σ_B⁻¹T` is an order isomorphism `Cl_H(B) → Cl_{H*}(B)` on
/// every free algebra in scope, then the coordination condition: whenever
/// `τμ₁ = τμ₂` for `τ: B₂ → B₂/T`, also `τ̃Φ⁻¹(μ₁) = τ̃Φ⁻¹(μ₂)` for the
/// transported `T̃`.
pub fn verify_h_hstar(
    h: &FiniteAlgebra,
    ws: &WordSystem,
    scope: &Arc<FreeScope>,
    caps: &Caps,
) -> Result<HHStarReport> {
    let s = bijections_from_words(ws, scope)?;
    let hstar = star_algebra(h, ws)?;
    let mut report = HHStarReport {
        algebra: h.name().to_string(),
        passed: true,
        op2_verified_up_to: scope.n_max(),
        ranks: Vec::new(),
        coordination_checks: 0,
        failure: None,
    };
    let mut lattices = BTreeMap::new();
    for k in scope.ranks() {
        let b = scope.free(k)?;
        let p = PointSpace::new(b.clone(), h, caps.points)?;
        let pstar = PointSpace::new(b.clone(), &hstar, caps.points)?;
        let (l, lstar) = (p.closed_lattice(), pstar.closed_lattice());
        let sigma = s.map(k)?;
        let mut mapping = Vec::with_capacity(l.len());
        for c in l.elements() {
            let moved = match transport_closed(sigma, &c.partition, Direction::Forward, &pstar) {
                Ok(m) => m,
                Err(e) => return Ok(fail(report, format!("rank {k}: {e}"))),
            };
            let back = transport_closed(sigma, &moved, Direction::Backward, &p)?;
            if back != c.partition {
                return Ok(fail(
                    report,
                    format!("rank {k}: double transport moves {}", c.partition),
                ));
            }
            match lstar.index_of(&moved) {
                Some(i) => mapping.push(i),
                None => {
                    return Ok(fail(
                        report,
                        format!("rank {k}: {moved} missing from Cl_H*"),
                    ))
                }
            }
        }
        let mut sorted = mapping.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != mapping.len() || mapping.len() != lstar.len() {
            return Ok(fail(
                report,
                format!("rank {k}: transport is not a bijection"),
            ));
        }
        for i in 0..l.len() {
            for j in 0..l.len() {
                if l.leq(i, j) != lstar.leq(mapping[i], mapping[j]) {
                    return Ok(fail(
                        report,
                        format!("rank {k}: order not preserved at ({i}, {j})"),
                    ));
                }
            }
        }
        report.ranks.push(RankTransport {
            rank: k,
            sizes: [l.len(), lstar.len()],
            mapping,
        });
        lattices.insert(k, l);
    }

    let ranks: Vec<usize> = scope.ranks().collect();
    for &a in &ranks {
        for &b in &ranks {
            let wb = scope.free(b)?;
            let mut homs = Vec::new();
            for_each_tuple(wb.size(), a, |im| homs.push(im.to_vec()));
            let homs: Vec<FreeMorphism> = homs
                .iter()
                .map(|im| FreeMorphism::from_images(scope, a, b, im))
                .collect::<Result<_>>()?;
            let pulled: Vec<FreeMorphism> = homs
                .iter()
                .map(|m| strongly_stable_inverse(&s, m))
                .collect::<Result<_>>()?;
            for c in lattices[&b].elements() {
                let t = &c.partition;
                let tt = t.pull_back(s.map(b)?);
                let mut groups: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
                for (i, m) in homs.iter().enumerate() {
                    groups
                        .entry(m.map.iter().map(|&x| t.label(x)).collect())
                        .or_default()
                        .push(i);
                }
                for members in groups.values() {
                    let first = &pulled[members[0]];
                    for &other in &members[1..] {
                        report.coordination_checks += 1;
                        let ok = first
                            .map
                            .iter()
                            .zip(&pulled[other].map)
                            .all(|(&x, &y)| tt.related(x, y));
                        if !ok {
                            return Ok(fail(
                                report,
                                format!("coordination fails for W({a}) → W({b}) at {t}"),
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(report)
}

fn fail<R: Failable>(mut report: R, why: String) -> R {
    report.set_failure(why);
    report
}

trait Failable {
    fn set_failure(&mut self, why: String);
}

impl Failable for HHStarReport {
    fn set_failure(&mut self, why: String) {
        self.passed = false;
        self.failure = Some(why);
    }
}

impl Failable for CoordinateReport {
    fn set_failure(&mut self, why: String) {
        self.passed = false;
        self.failure = Some(why);
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoordinateRank {
    pub rank: usize,
    pub closed: usize,
    pub squares: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct CoordinateReport {
    pub h1: String,
    pub h2: String,
    pub passed: bool,
    pub ranks: Vec<CoordinateRank>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

/// Conditions on the correspondence `W(X)/T ↦ W(X)/σ⁻¹T` between coordinate
/// algebras of `H1` and `H2`: (A) `Id(H1)` goes to `Id(H2)`; (B) closed goes
/// to closed; (C) `[b] ↦ τ(σ(b))` is an isomorphism `W/σ⁻¹T → (W/T)*` and the
/// square with the natural epimorphisms commutes.
pub fn verify_coordinate_correspondence(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    ws: &WordSystem,
    scope: &Arc<FreeScope>,
    caps: &Caps,
) -> Result<CoordinateReport> {
    let s = bijections_from_words(ws, scope)?;
    let mut report = CoordinateReport {
        h1: h1.name().to_string(),
        h2: h2.name().to_string(),
        passed: true,
        ranks: Vec::new(),
        failure: None,
    };
    for k in scope.ranks() {
        let b = scope.free(k)?;
        let sigma = s.map(k)?;
        let p1 = PointSpace::new(b.clone(), h1, caps.points)?;
        let p2 = PointSpace::new(b.clone(), h2, caps.points)?;
        let id1 = p1.id_congruence().partition;
        if id1.pull_back(sigma) != p2.id_congruence().partition {
            return Ok(fail(
                report,
                format!("rank {k}: (A) Id is not carried to Id"),
            ));
        }
        let l1 = p1.closed_lattice();
        let mut squares = 0;
        for c in l1.elements() {
            let t = &c.partition;
            let tt = t.pull_back(sigma);
            if !p2.is_closed_partition(&tt) {
                return Ok(fail(
                    report,
                    format!("rank {k}: (B) image of {t} is not closed"),
                ));
            }
            let (q1, tau) = b.algebra().quotient(t)?;
            let (q2, tau2) = b.algebra().quotient(&tt)?;
            let q1star = star_algebra(&q1, ws)?;
            let mut psi = vec![usize::MAX; q2.size()];
            for e in 0..b.size() {
                let want = tau.apply(sigma[e]);
                let slot = &mut psi[tau2.apply(e)];
                if *slot == usize::MAX {
                    *slot = want;
                } else if *slot != want {
                    return Ok(fail(
                        report,
                        format!(
                            "rank {k}: (C) square fails at {}",
                            b.witness(e).display(b.algebra().signature())
                        ),
                    ));
                }
                squares += 1;
            }
            if crate::verbal::invert_permutation(&psi).is_err()
                || !q2.is_homomorphism(&q1star, &psi)?
            {
                return Ok(fail(
                    report,
                    format!("rank {k}: (C) induced map on {t} is not an isomorphism"),
                ));
            }
        }
        report.ranks.push(CoordinateRank {
            rank: k,
            closed: l1.len(),
            squares,
        });
    }
    Ok(report)
}

#[derive(Debug, Clone)]
enum Op2Cached {
    Pass(BijectionSystem),
    Fail,
    Inconclusive,
}

/// Shared state for word-system searches over one variety: the candidate
/// words per symbol and the Op2 verdicts already computed.
pub struct SearchContext {
    variety: VarietySpec,
    scope: Arc<FreeScope>,
    depth_max: usize,
    n_max: usize,
    caps: Caps,
    candidates: Vec<Vec<Term>>,
    op2: Mutex<HashMap<Vec<Term>, Op2Cached>>,
}

impl SearchContext {
    /// Op2 is checked up to `max(n_max, max arity)` so that every word's own
    /// free algebra is covered.
    pub fn new(
        v: &VarietySpec,
        depth_max: usize,
        n_max: usize,
        caps: Caps,
    ) -> Result<SearchContext> {
        let sig = v.signature().clone();
        let op2_rank = n_max.max(sig.max_arity());
        let scope = Arc::new(FreeScope::new(v, op2_rank, caps.free)?);
        let mut candidates = Vec::with_capacity(sig.len());
        for op in 0..sig.len() {
            let k = sig.arity(op);
            let w = scope.free(k)?;
            let basic = Term::basic(&sig, op);
            let mut seen = vec![false; w.size()];
            seen[w.term_image(v, &basic)?] = true;
            let mut list = vec![basic];
            for t in enumerate_terms(&sig, k, depth_max) {
                let e = w.term_image(v, &t)?;
                if !seen[e] {
                    seen[e] = true;
                    list.push(t);
                }
            }
            candidates.push(list);
        }
        Ok(SearchContext {
            variety: v.clone(),
            scope,
            depth_max,
            n_max,
            caps,
            candidates,
            op2: Mutex::new(HashMap::new()),
        })
    }

    pub fn variety(&self) -> &VarietySpec {
        &self.variety
    }

    pub fn scope(&self) -> &Arc<FreeScope> {
        &self.scope
    }

    pub fn caps(&self) -> &Caps {
        &self.caps
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    /// Candidate words for each symbol: the basic word first, then
    /// enumeration order without semantic repeats.
    pub fn candidates(&self) -> &[Vec<Term>] {
        &self.candidates
    }

    /// Calls `f` on candidate word systems in odometer order (first symbol
    /// most significant) until it returns `false` or the candidate cap is
    /// reached. Returns whether every candidate was visited.
    pub fn for_each_system(&self, mut f: impl FnMut(WordSystem) -> Result<bool>) -> Result<bool> {
        let sig = self.variety.signature();
        let mut idx = vec![0usize; self.candidates.len()];
        let mut visited = 0;
        loop {
            if visited >= self.caps.candidates {
                return Ok(false);
            }
            visited += 1;
            let words = idx
                .iter()
                .enumerate()
                .map(|(op, &i)| self.candidates[op][i].clone())
                .collect();
            if !f(WordSystem::new(sig.clone(), words)?)? {
                return Ok(false);
            }
            let mut pos = idx.len();
            loop {
                if pos == 0 {
                    return Ok(true);
                }
                pos -= 1;
                idx[pos] += 1;
                if idx[pos] < self.candidates[pos].len() {
                    break;
                }
                idx[pos] = 0;
            }
        }
    }

    fn op2(&self, ws: &WordSystem) -> Result<Op2Cached> {
        if let Some(c) = self.op2.lock().expect("op2 cache").get(ws.words()) {
            return Ok(c.clone());
        }
        let outcome = match check_op2(ws, &self.scope) {
            Ok(Op2Outcome::Pass(s)) => Op2Cached::Pass(s),
            Ok(Op2Outcome::Fail { .. }) => Op2Cached::Fail,
            Err(Error::CapExceeded { .. }) => Op2Cached::Inconclusive,
            Err(e) => return Err(e),
        };
        self.op2
            .lock()
            .expect("op2 cache")
            .insert(ws.words().to_vec(), outcome.clone());
        Ok(outcome)
    }

    /// The bijection system of a word system, if it passes Op2 in scope.
    pub fn bijections(&self, ws: &WordSystem) -> Result<Option<BijectionSystem>> {
        Ok(match self.op2(ws)? {
            Op2Cached::Pass(s) => Some(s),
            _ => None,
        })
    }

    fn bounds(&self) -> Bounds {
        Bounds {
            n_max: self.n_max,
            depth_max: Some(self.depth_max),
            op2_rank: Some(self.scope.n_max()),
        }
    }

    /// Looks for a word system `W` with `H1` geometrically equivalent to
    /// `H2*`. Systems whose `H2*` has the same tables as `H1` win over
    /// systems found only by lattice comparison; within each tier the
    /// enumeration-order first one is returned.
    pub fn search(&self, h1: &FiniteAlgebra, h2: &FiniteAlgebra) -> Result<EquivalenceCertificate> {
        let v = &self.variety;
        require_member(v, h1, self.caps.free)?;
        require_member(v, h2, self.caps.free)?;
        let mut stats = SearchStats {
            candidates: 0,
            op2_passed: 0,
            op2_inconclusive: 0,
            candidates_exhausted: true,
            found_by: None,
        };
        let mut passing = Vec::new();
        let mut found = None;
        let complete = self.for_each_system(|ws| {
            stats.candidates += 1;
            match self.op2(&ws)? {
                Op2Cached::Pass(_) => {
                    stats.op2_passed += 1;
                    if star_algebra(h2, &ws)?.same_tables(h1) {
                        found = Some((ws, "table-equal"));
                        return Ok(false);
                    }
                    passing.push(ws);
                }
                Op2Cached::Fail => {}
                Op2Cached::Inconclusive => stats.op2_inconclusive += 1,
            }
            Ok(true)
        })?;
        stats.candidates_exhausted = complete;
        if found.is_none() {
            for ws in passing {
                let h2s = star_algebra(h2, &ws)?;
                if !v.membership(&h2s, self.caps.free)?.is_member() {
                    continue;
                }
                let (_, witness) = compare(h1, &h2s, v, self.n_max, &self.caps)?;
                if witness.is_none() {
                    found = Some((ws, "geometric"));
                    break;
                }
            }
        }
        let mut cert = EquivalenceCertificate {
            verdict: Verdict::Exhausted,
            h1: h1.name().to_string(),
            h2: h2.name().to_string(),
            variety: v.fingerprint(),
            bounds: self.bounds(),
            word_system: None,
            op2_verified_up_to: None,
            evidence: Vec::new(),
            witness: None,
            search: None,
            system: None,
        };
        match found {
            Some((ws, tier)) => {
                let h2s = star_algebra(h2, &ws)?;
                let (evidence, _) = compare(h1, &h2s, v, self.n_max, &self.caps)?;
                stats.found_by = Some(tier);
                cert.verdict = Verdict::Automorphic;
                cert.word_system = Some(ws.to_texts().into_iter().collect());
                cert.op2_verified_up_to = Some(self.scope.n_max());
                cert.evidence = evidence;
                cert.system = Some(ws);
            }
            None => {
                // Transport preserves lattice sizes, so a size difference
                // rules out every word system, not only the enumerated ones.
                let (evidence, witness) = compare(h1, h2, v, self.n_max, &self.caps)?;
                if evidence.iter().any(|e| e.sizes[0] != e.sizes[1]) {
                    cert.verdict = Verdict::RefutedAtBounds;
                    cert.witness = witness;
                }
                cert.evidence = evidence;
            }
        }
        cert.search = Some(stats);
        Ok(cert)
    }
}

pub fn auto_equivalent_search(
    h1: &FiniteAlgebra,
    h2: &FiniteAlgebra,
    v: &VarietySpec,
    depth_max: usize,
    n_max: usize,
    caps: Caps,
) -> Result<EquivalenceCertificate> {
    SearchContext::new(v, depth_max, n_max, caps)?.search(h1, h2)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FactResult {
    pub fact: u8,
    pub algebras: Vec<String>,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct FactsReport {
    pub passed: bool,
    pub certificates: Vec<PairSummary>,
    pub checks: Vec<FactResult>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PairSummary {
    pub h1: String,
    pub h2: String,
    pub geometric: bool,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub word_system: Option<BTreeMap<String, String>>,
}

/// Runs the search on every ordered pair of the corpus, then re-checks:
/// 1. geometric equivalence yields an identity-system certificate;
/// 2. a certificate for `(H1, H2)` inverts to one for `(H2, H1)`;
/// 3. certificates for `(H1, H2)` and `(H2, H3)` compose to one for `(H1, H3)`.
pub fn verify_equivalence_facts(
    ctx: &SearchContext,
    corpus: &[FiniteAlgebra],
) -> Result<FactsReport> {
    let v = ctx.variety();
    let caps = *ctx.caps();
    let n = corpus.len();
    let mut geometric = vec![vec![false; n]; n];
    let mut certs: Vec<Vec<Option<WordSystem>>> = vec![vec![None; n]; n];
    let mut summaries = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let g = geom_equivalent(&corpus[i], &corpus[j], v, ctx.n_max(), &caps)?;
            geometric[i][j] = g.verdict == Verdict::Geometric;
            let c = ctx.search(&corpus[i], &corpus[j])?;
            summaries.push(PairSummary {
                h1: c.h1.clone(),
                h2: c.h2.clone(),
                geometric: geometric[i][j],
                verdict: c.verdict,
                word_system: c.word_system.clone(),
            });
            certs[i][j] = c.system;
        }
    }
    let names = |ix: &[usize]| {
        ix.iter()
            .map(|&i| corpus[i].name().to_string())
            .collect::<Vec<_>>()
    };
    let recheck =
        |h1: &FiniteAlgebra, h2: &FiniteAlgebra, ws: &WordSystem| -> Result<Option<String>> {
            if ctx.bijections(ws)?.is_none() {
                return Ok(Some("word system fails Op2".into()));
            }
            let h2s = star_algebra(h2, ws)?;
            let (_, witness) = compare(h1, &h2s, v, ctx.n_max(), &caps)?;
            Ok(witness.map(|w| format!("lattices differ at rank {}", w.rank)))
        };
    let mut checks = Vec::new();
    let identity = WordSystem::identity(v.signature().clone());
    for i in 0..n {
        for j in 0..n {
            if geometric[i][j] {
                let detail = recheck(&corpus[i], &corpus[j], &identity)?;
                checks.push(FactResult {
                    fact: 1,
                    algebras: names(&[i, j]),
                    passed: detail.is_none(),
                    detail,
                });
            }
        }
    }
    for i in 0..n {
        for j in 0..n {
            let Some(ws) = &certs[i][j] else { continue };
            let s = ctx.bijections(ws)?.expect("certified systems pass Op2");
            let inv = inverse_word_system(ws, &s)?;
            let mut detail = recheck(&corpus[j], &corpus[i], &inv.words)?;
            let back = star_algebra(&star_algebra(&corpus[j], ws)?, &inv.words)?;
            if detail.is_none() && !back.same_tables(&corpus[j]) {
                detail = Some("double star does not restore the tables".into());
            }
            checks.push(FactResult {
                fact: 2,
                algebras: names(&[i, j]),
                passed: detail.is_none(),
                detail,
            });
        }
    }
    for (i, row) in certs.iter().enumerate() {
        for (j, a) in row.iter().enumerate() {
            let Some(a) = a else { continue };
            for (l, b) in certs[j].iter().enumerate() {
                let Some(b) = b else { continue };
                let c = b.followed_by(a)?;
                let detail = recheck(&corpus[i], &corpus[l], &c)?;
                checks.push(FactResult {
                    fact: 3,
                    algebras: names(&[i, j, l]),
                    passed: detail.is_none(),
                    detail,
                });
            }
        }
    }
    Ok(FactsReport {
        passed: checks.iter().all(|c| c.passed),
        certificates: summaries,
        checks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;

    fn var(algs: Vec<FiniteAlgebra>) -> VarietySpec {
        VarietySpec::new(algs, Vec::new()).unwrap()
    }

    fn opposite() -> WordSystem {
        WordSystem::parse(
            corpus::group_signature(),
            [("mul", "mul(x2,x1)"), ("inv", "inv(x1)"), ("e", "e")],
        )
        .unwrap()
    }

    #[test]
    fn geom_examples() {
        let v = var(vec![corpus::s2()]);
        let caps = Caps::default();
        let s2 = corpus::s2();
        let c = geom_equivalent(&s2, &s2, &v, 2, &caps).unwrap();
        assert_eq!(c.verdict, Verdict::Geometric);
        let c = geom_equivalent(&s2, &corpus::s2_squared(), &v, 2, &caps).unwrap();
        assert_eq!(c.verdict, Verdict::Geometric);
        assert_eq!(c.evidence.last().unwrap().sizes, [4, 4]);
        let t = FiniteAlgebra::trivial(v.signature().clone());
        let c = geom_equivalent(&s2, &t, &v, 2, &caps).unwrap();
        assert_eq!(c.verdict, Verdict::RefutedAtBounds);
        let w = c.witness.unwrap();
        assert_eq!((w.rank, w.partition.as_str()), (2, "0.1.2"));
        assert_eq!(
            (w.closed_for.as_str(), w.not_closed_for.as_str()),
            ("S2", "trivial")
        );
        assert!(matches!(
            geom_equivalent(&s2, &corpus::left_zero(), &v, 2, &caps),
            Err(Error::OutsideVariety(_))
        ));
    }

    #[test]
    fn transport_examples() {
        let v = var(vec![corpus::s3()]);
        let scope = Arc::new(FreeScope::new(&v, 2, DEFAULT_CAP).unwrap());
        let s = bijections_from_words(&opposite(), &scope).unwrap();
        let b = scope.free(1).unwrap();
        let sigma = s.map(1).unwrap();
        let h = corpus::s3();
        let hs = star_algebra(&h, &opposite()).unwrap();
        let p = PointSpace::new(b.clone(), &h, 64).unwrap();
        let ps = PointSpace::new(b.clone(), &hs, 64).unwrap();
        let ls = ps.closed_lattice();
        for c in p.closed_lattice().elements() {
            let m = transport_closed(sigma, &c.partition, Direction::Forward, &ps).unwrap();
            assert!(ls.contains(&m));
            let back = transport_closed(sigma, &m, Direction::Backward, &p).unwrap();
            assert_eq!(back, c.partition);
        }
        let full = Partition::full(b.size());
        assert_eq!(
            transport_closed(sigma, &full, Direction::Forward, &ps).unwrap(),
            full
        );
    }

    #[test]
    fn h_hstar_identity_and_opposite() {
        let caps = Caps::default();
        let v = var(vec![corpus::s2()]);
        let scope = Arc::new(FreeScope::new(&v, 2, DEFAULT_CAP).unwrap());
        let id = WordSystem::identity(v.signature().clone());
        let r = verify_h_hstar(&corpus::s2(), &id, &scope, &caps).unwrap();
        assert!(r.passed, "{:?}", r.failure);
        for rt in &r.ranks {
            assert_eq!(rt.mapping, (0..rt.sizes[0]).collect::<Vec<_>>());
        }

        let v = var(vec![corpus::s3()]);
        let scope = Arc::new(FreeScope::new(&v, 1, DEFAULT_CAP).unwrap());
        let r = verify_h_hstar(&corpus::s3(), &opposite(), &scope, &caps).unwrap();
        assert!(r.passed, "{:?}", r.failure);
        assert!(r.coordination_checks > 0);
        for rt in &r.ranks {
            assert_eq!(rt.sizes[0], rt.sizes[1]);
        }

        let v = var(vec![corpus::s2()]);
        let scope = Arc::new(FreeScope::new(&v, 2, DEFAULT_CAP).unwrap());
        let proj = WordSystem::parse(v.signature().clone(), [("meet", "x1")]).unwrap();
        assert!(matches!(
            verify_h_hstar(&corpus::s2(), &proj, &scope, &caps),
            Err(Error::Op2Failed { rank: 2, .. })
        ));
    }

    #[test]
    fn coordinate_correspondence() {
        let caps = Caps::default();
        let v = var(vec![corpus::s2()]);
        let scope = Arc::new(FreeScope::new(&v, 2, DEFAULT_CAP).unwrap());
        let id = WordSystem::identity(v.signature().clone());
        let r = verify_coordinate_correspondence(&corpus::s2(), &corpus::s2(), &id, &scope, &caps)
            .unwrap();
        assert!(r.passed, "{:?}", r.failure);
        assert_eq!(r.ranks.last().unwrap().closed, 4);

        let v = var(vec![corpus::s3()]);
        let scope = Arc::new(FreeScope::new(&v, 1, DEFAULT_CAP).unwrap());
        let r = verify_coordinate_correspondence(
            &corpus::s3(),
            &corpus::s3_transposed(),
            &opposite(),
            &scope,
            &caps,
        )
        .unwrap();
        assert!(r.passed, "{:?}", r.failure);
        // A wrong partner is caught.
        let r = verify_coordinate_correspondence(
            &corpus::s3(),
            &corpus::z2(),
            &opposite(),
            &scope,
            &caps,
        )
        .unwrap();
        assert!(!r.passed);
    }

    #[test]
    fn search_examples() {
        let caps = Caps::default();
        let v = var(vec![corpus::s3()]);
        let ctx = SearchContext::new(&v, 1, 1, caps).unwrap();
        let c = ctx.search(&corpus::s3_transposed(), &corpus::s3()).unwrap();
        assert_eq!(c.verdict, Verdict::Automorphic);
        let ws = c.system.unwrap();
        assert!(crate::verbal::same_words(&ws, &opposite(), &v, DEFAULT_CAP).unwrap());
        for h in [corpus::s3(), corpus::z2(), corpus::z3()] {
            let c = ctx.search(&h, &h).unwrap();
            assert_eq!(c.verdict, Verdict::Automorphic);
            assert!(c.system.unwrap().is_syntactic_identity());
        }

        let v = var(vec![corpus::s2()]);
        let c = auto_equivalent_search(
            &corpus::s2(),
            &FiniteAlgebra::trivial(v.signature().clone()),
            &v,
            2,
            2,
            caps,
        )
        .unwrap();
        assert_eq!(c.verdict, Verdict::RefutedAtBounds);
        assert!(c.search.as_ref().unwrap().candidates_exhausted);
        assert_eq!(c.exit_code(), 1);
    }

    #[test]
    fn lattice_size_is_preserved_by_star() {
        let caps = Caps::default();
        for (v, n_max) in [(var(vec![corpus::s2()]), 2), (var(vec![corpus::z2()]), 2)] {
            let ctx = SearchContext::new(&v, 2, n_max, caps).unwrap();
            ctx.for_each_system(|ws| {
                if ctx.bijections(&ws)?.is_some() {
                    for h in v.generators() {
                        let hs = star_algebra(h, &ws)?;
                        for k in first_rank(&v)..=n_max {
                            let b = v.free(k, DEFAULT_CAP)?;
                            assert_eq!(
                                lattice(&b, h, &caps)?.len(),
                                lattice(&b, &hs, &caps)?.len()
                            );
                        }
                    }
                }
                Ok(true)
            })
            .unwrap();
        }
    }

    #[test]
    fn facts_on_small_corpus() {
        let v = var(vec![corpus::s3()]);
        let ctx = SearchContext::new(&v, 1, 1, Caps::default()).unwrap();
        let corpus = vec![corpus::s3(), corpus::s3_transposed(), corpus::z2()];
        let r = verify_equivalence_facts(&ctx, &corpus).unwrap();
        assert!(
            r.passed,
            "{:?}",
            r.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>()
        );
        assert!(r
            .checks
            .iter()
            .any(|c| c.fact == 2 && c.algebras == ["S3", "S3t"]));
        assert!(r.checks.iter().any(|c| c.fact == 3));
    }
}
