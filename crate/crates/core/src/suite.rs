//! The verification suite: every bounded check the crate offers, run over a
//! corpus and collected into one deterministic report.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::algebra::{product_algebra, FiniteAlgebra};
use crate::corpus;
use crate::equivalence::{
    verify_coordinate_correspondence, verify_equivalence_facts, verify_h_hstar, Bounds, Caps,
    PairSummary, SearchContext,
};
use crate::error::{Error, Result};
use crate::free::{free_rank_sizes, RankSizes};
use crate::geometry::PointSpace;
use crate::variety::{Membership, VarietySpec};
use crate::verbal::{
    bijections_from_words, check_b1_b2, inverse_word_system, same_words, star_algebra,
    verify_derived_operations, words_from_bijections, FreeScope, WordSystem,
};

/// One variety with its corpus and bounds.
#[derive(Debug, Clone)]
pub struct SuiteGroup {
    pub name: String,
    pub variety: VarietySpec,
    pub corpus: Vec<FiniteAlgebra>,
    /// Largest rank whose lattices are compared.
    pub n_max: usize,
    pub depth_max: usize,
    /// Largest rank of the homomorphisms checked against B1.
    pub hom_rank: usize,
    pub caps: Caps,
}

/// Semilattices, elementary abelian 2-groups, and the groups of `var(S3)`.
pub fn builtin_groups() -> Result<Vec<SuiteGroup>> {
    let s2 = VarietySpec::new(vec![corpus::s2()], Vec::new())?;
    let z2 = VarietySpec::new(vec![corpus::z2()], Vec::new())?;
    let s3 = VarietySpec::new(vec![corpus::s3()], Vec::new())?;
    let caps = Caps::default();
    Ok(vec![
        SuiteGroup {
            name: "semilattice".into(),
            corpus: vec![
                corpus::s2(),
                corpus::s2_squared(),
                FiniteAlgebra::trivial(s2.signature().clone()),
            ],
            variety: s2,
            n_max: 2,
            depth_max: 2,
            hom_rank: 2,
            caps,
        },
        SuiteGroup {
            name: "z2".into(),
            corpus: vec![
                corpus::z2(),
                corpus::z2_squared(),
                FiniteAlgebra::trivial(z2.signature().clone()),
            ],
            variety: z2,
            n_max: 2,
            depth_max: 2,
            hom_rank: 2,
            caps,
        },
        SuiteGroup {
            name: "s3".into(),
            corpus: vec![
                corpus::s3(),
                corpus::s3_transposed(),
                corpus::z2(),
                corpus::z3(),
                FiniteAlgebra::trivial(s3.signature().clone()),
            ],
            variety: s3,
            n_max: 1,
            depth_max: 1,
            hom_rank: 1,
            caps,
        },
    ])
}

/// Product of two corpus algebras, named `AxB`.
pub fn named_product(a: &FiniteAlgebra, b: &FiniteAlgebra) -> Result<FiniteAlgebra> {
    Ok(product_algebra(&[a, b])?.with_name(format!("{}x{}", a.name(), b.name())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Check {
    pub check: &'static str,
    pub subject: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupReport {
    pub name: String,
    pub variety: String,
    pub generators: Vec<String>,
    pub corpus: Vec<String>,
    pub bounds: Bounds,
    pub free_sizes: RankSizes,
    pub word_systems: Vec<BTreeMap<String, String>>,
    pub word_systems_complete: bool,
    pub certificates: Vec<PairSummary>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteReport {
    pub passed: bool,
    pub checks: usize,
    pub failed: usize,
    pub groups: Vec<GroupReport>,
}

impl SuiteReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for g in &self.groups {
            let _ = writeln!(
                s,
                "[{}] n_max={} free sizes {:?}",
                g.name, g.bounds.n_max, g.free_sizes.sizes
            );
            for c in &g.checks {
                let status = if c.passed { "PASS" } else { "FAIL" };
                let _ = write!(s, "{status} {} {}", c.check, c.subject);
                if let Some(d) = &c.detail {
                    let _ = write!(s, ": {d}");
                }
                s.push('\n');
            }
            for p in &g.certificates {
                let words = p
                    .word_system
                    .as_ref()
                    .map(|w| format!(" {}", label_map(w)))
                    .unwrap_or_default();
                let _ = writeln!(s, "  {} ~ {}: {:?}{words}", p.h1, p.h2, p.verdict);
            }
        }
        let _ = writeln!(s, "{} checks, {} failed", self.checks, self.failed);
        s
    }
}

fn label_map(words: &BTreeMap<String, String>) -> String {
    let parts: Vec<String> = words.iter().map(|(k, v)| format!("{k}:={v}")).collect();
    parts.join(", ")
}

fn label(ws: &WordSystem) -> String {
    let parts: Vec<String> = ws
        .to_texts()
        .into_iter()
        .map(|(k, v)| format!("{k}:={v}"))
        .collect();
    parts.join(", ")
}

/// Resource errors abort the run; anything else is a failed check.
fn record(
    checks: &mut Vec<Check>,
    check: &'static str,
    subject: String,
    outcome: Result<Option<String>>,
) -> Result<()> {
    let (passed, detail) = match outcome {
        Ok(None) => (true, None),
        Ok(Some(why)) => (false, Some(why)),
        Err(e @ Error::CapExceeded { .. }) => return Err(e),
        Err(e) => (false, Some(e.to_string())),
    };
    checks.push(Check {
        check,
        subject,
        passed,
        detail,
    });
    Ok(())
}

pub fn run_group(g: &SuiteGroup) -> Result<GroupReport> {
    if g.corpus.is_empty() {
        return Err(Error::Input(format!(
            "group `{}` has an empty corpus",
            g.name
        )));
    }
    let v = &g.variety;
    let caps = g.caps;
    let mut checks = Vec::new();

    let mut members = Vec::new();
    for h in &g.corpus {
        let outcome = v.membership(h, caps.free).map(|m| match m {
            Membership::Member => None,
            Membership::Refuted(why) => Some(why),
        });
        let ok = matches!(outcome, Ok(None));
        record(&mut checks, "membership", h.name().to_string(), outcome)?;
        if ok {
            members.push(h.clone());
        }
    }

    let first = usize::from(!v.signature().has_constants());
    for k in first..=g.n_max {
        let b = v.free(k, caps.free)?;
        for h in &members {
            let outcome = PointSpace::new(b.clone(), h, caps.points).map(|p| {
                let l = p.closed_lattice();
                if l.elements()[l.bottom()].partition != p.id_congruence().partition {
                    return Some("least element is not Id".to_string());
                }
                let bad = l.partitions().find(|t| !b.algebra().is_congruence(t));
                bad.map(|t| format!("{t} is not a congruence"))
            });
            record(
                &mut checks,
                "closed-sets-are-congruences",
                format!("{} W({k})", h.name()),
                outcome,
            )?;
        }
    }

    let ctx = SearchContext::new(v, g.depth_max, g.n_max, caps)?;
    let mut systems = Vec::new();
    let complete = ctx.for_each_system(|ws| {
        if ctx.bijections(&ws)?.is_some() {
            systems.push(ws);
        }
        Ok(true)
    })?;
    let lattice_scope = Arc::new(FreeScope::new(v, g.n_max, caps.free)?);
    for ws in &systems {
        let name = label(ws);
        let s = ctx.bijections(ws)?.expect("passing system");
        record(
            &mut checks,
            "words-round-trip",
            name.clone(),
            (|| {
                let back = words_from_bijections(&s)?;
                Ok((!same_words(&back, ws, v, caps.free)?)
                    .then(|| format!("recovered {}", label(&back))))
            })(),
        )?;
        record(
            &mut checks,
            "bijections-round-trip",
            name.clone(),
            (|| {
                let back = words_from_bijections(&s)?;
                let again = bijections_from_words(&back, ctx.scope())?;
                Ok((again != s).then(|| "bijection systems differ".to_string()))
            })(),
        )?;
        record(
            &mut checks,
            "derived-equals-verbal",
            name.clone(),
            verify_derived_operations(ws, &s)
                .map(|r| r.map(|(k, op)| format!("`{op}` differs on W({k})"))),
        )?;
        record(
            &mut checks,
            "b1-b2",
            name.clone(),
            check_b1_b2(&s, g.hom_rank)
                .map(|r| r.map(|viol| serde_json::to_string(&viol).unwrap_or_default())),
        )?;
        let inverse = inverse_word_system(ws, &s)?;
        for h in &members {
            let subject = format!("{} / {name}", h.name());
            record(
                &mut checks,
                "h-hstar",
                subject.clone(),
                verify_h_hstar(h, ws, &lattice_scope, &caps).map(|r| r.failure),
            )?;
            record(
                &mut checks,
                "coordinates",
                subject.clone(),
                (|| {
                    let hs = star_algebra(h, ws)?;
                    Ok(
                        verify_coordinate_correspondence(h, &hs, ws, &lattice_scope, &caps)?
                            .failure,
                    )
                })(),
            )?;
            record(
                &mut checks,
                "double-star",
                subject,
                (|| {
                    let back = star_algebra(&star_algebra(h, ws)?, &inverse.words)?;
                    Ok((!back.same_tables(h)).then(|| "tables differ".to_string()))
                })(),
            )?;
        }
    }

    let facts = verify_equivalence_facts(&ctx, &members)?;
    for f in &facts.checks {
        let check = match f.fact {
            1 => "fact-1-geometric-is-automorphic",
            2 => "fact-2-inverse",
            _ => "fact-3-composition",
        };
        checks.push(Check {
            check,
            subject: f.algebras.join(" ~ "),
            passed: f.passed,
            detail: f.detail.clone(),
        });
    }

    Ok(GroupReport {
        name: g.name.clone(),
        variety: v.fingerprint(),
        generators: v
            .generators()
            .iter()
            .map(|a| a.name().to_string())
            .collect(),
        corpus: g.corpus.iter().map(|a| a.name().to_string()).collect(),
        bounds: Bounds {
            n_max: g.n_max,
            depth_max: Some(g.depth_max),
            op2_rank: Some(ctx.scope().n_max()),
        },
        free_sizes: free_rank_sizes(v, ctx.scope().n_max(), caps.free)?,
        word_systems: systems
            .iter()
            .map(|ws| ws.to_texts().into_iter().collect())
            .collect(),
        word_systems_complete: complete,
        certificates: facts.certificates,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

pub fn run_suite(groups: &[SuiteGroup]) -> Result<SuiteReport> {
    if groups.is_empty() {
        return Err(Error::Input("empty corpus".into()));
    }
    let groups = groups.iter().map(run_group).collect::<Result<Vec<_>>>()?;
    let checks = groups.iter().map(|g| g.checks.len()).sum();
    let failed = groups
        .iter()
        .flat_map(|g| &g.checks)
        .filter(|c| !c.passed)
        .count();
    Ok(SuiteReport {
        passed: failed == 0,
        checks,
        failed,
        groups,
    })
}
