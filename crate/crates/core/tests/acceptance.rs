//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines come out in order; exits non-zero if any criterion fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use uag_core::corpus;
use uag_core::equivalence::{
    auto_equivalent_search, geom_equivalent, verify_h_hstar, Caps, SearchContext, Verdict,
};
use uag_core::free::{free_rank_sizes, DEFAULT_CAP};
use uag_core::geometry::{EquationSet, PointSpace};
use uag_core::io::to_json;
use uag_core::suite::{builtin_groups, run_suite};
use uag_core::verbal::{
    bijections_from_words, inverse_word_system, same_words, star_algebra,
    verify_derived_operations, words_from_bijections, FreeScope, WordSystem,
};
use uag_core::{FiniteAlgebra, Partition, VarietySpec};

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn var(algs: Vec<FiniteAlgebra>) -> VarietySpec {
    VarietySpec::new(algs, Vec::new()).unwrap()
}

fn ensure(cond: bool, why: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(why.into())
    }
}

/// All subsets of `B × B` for `B = W(x1, x2)` in `var(S2)`.
fn s2_instance() -> (PointSpace, Vec<EquationSet>) {
    let v = var(vec![corpus::s2()]);
    let b = v.free(2, DEFAULT_CAP).unwrap();
    let n = b.size();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|a| (0..n).map(move |c| (a, c))).collect();
    let sets = (0u32..1 << pairs.len())
        .map(|mask| {
            EquationSet::new(
                pairs
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask >> i & 1 == 1)
                    .map(|(_, &p)| p),
            )
        })
        .collect();
    (PointSpace::new(b, &corpus::s2(), 64).unwrap(), sets)
}

fn closure_laws() -> Outcome {
    let (p, sets) = s2_instance();
    ensure(sets.len() == 512, "expected 2^9 equation sets")?;
    let closures: Vec<Partition> = sets.iter().map(|t| p.closure(t).partition).collect();
    for (t, c) in sets.iter().zip(&closures) {
        ensure(t.within(c), format!("not extensive at {t:?}"))?;
        ensure(
            p.closure_of(c).partition == *c,
            format!("not idempotent at {t:?}"),
        )?;
    }
    for (t1, c1) in sets.iter().zip(&closures) {
        for (t2, c2) in sets.iter().zip(&closures) {
            if t1.is_subset(t2) {
                ensure(c1.refines(c2), format!("not monotone at {t1:?} ⊆ {t2:?}"))?;
            }
        }
    }
    Ok("extensive, monotone, idempotent on 512 equation sets".into())
}

fn galois_connection() -> Outcome {
    let (p, sets) = s2_instance();
    let m = p.len();
    let mut pairs = 0;
    for t in &sets {
        let sol: BTreeSet<usize> = p.solutions(t).into_iter().collect();
        for mask in 0u32..1 << m {
            let r: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
            let left = r.iter().all(|x| sol.contains(x));
            let right = t.within(&p.point_congruence(&r));
            ensure(left == right, format!("R={r:?}, T={t:?}"))?;
            pairs += 1;
        }
        let c = p.closure(t).partition;
        ensure(
            p.free().algebra().is_congruence(&c),
            format!("closure of {t:?} is not a congruence"),
        )?;
    }
    Ok(format!(
        "{pairs} (R, T) pairs; every closed set is a congruence"
    ))
}

fn free_sizes() -> Outcome {
    let s2 =
        free_rank_sizes(&var(vec![corpus::s2()]), 3, DEFAULT_CAP).map_err(|e| e.to_string())?;
    let z2 =
        free_rank_sizes(&var(vec![corpus::z2()]), 2, DEFAULT_CAP).map_err(|e| e.to_string())?;
    let semilattice: Vec<usize> = (1..=3).map(|k| (1 << k) - 1).collect();
    let abelian: Vec<usize> = (1..=2).map(|k| 1 << k).collect();
    ensure(s2.sizes == semilattice, format!("var(S2): {:?}", s2.sizes))?;
    ensure(z2.sizes == abelian, format!("var(Z2): {:?}", z2.sizes))?;
    Ok(format!("var(S2) {:?}, var(Z2) {:?}", s2.sizes, z2.sizes))
}

fn s2_lattice() -> Outcome {
    let v = var(vec![corpus::s2()]);
    let b = v.free(2, DEFAULT_CAP).unwrap();
    let sig = b.algebra().signature().clone();
    let pos = |w: &str| {
        (0..b.size())
            .find(|&e| b.witness(e).to_text(&sig) == w)
            .unwrap()
    };
    let (x1, x2, m) = (pos("x1"), pos("x2"), pos("meet(x1,x2)"));
    // Kernels of the four points, and every intersection of a subfamily.
    let mut kernels = Vec::new();
    for a in 0..2usize {
        for c in 0..2usize {
            let mut value = vec![0; 3];
            value[x1] = a;
            value[x2] = c;
            value[m] = a.min(c);
            kernels.push(value);
        }
    }
    let mut oracle = BTreeSet::new();
    for mask in 0u32..16 {
        // Element e's values at the chosen points, packed into bits.
        let labels: Vec<usize> = (0..3)
            .map(|e| {
                (0..4)
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| kernels[i][e] << i)
                    .sum()
            })
            .collect();
        oracle.insert(Partition::from_labels(&labels).encode());
    }
    let l = PointSpace::new(b.clone(), &corpus::s2(), 64)
        .unwrap()
        .closed_lattice();
    let got: BTreeSet<String> = l.partitions().map(Partition::encode).collect();
    ensure(l.len() == 4, format!("{} elements", l.len()))?;
    ensure(got == oracle, format!("{got:?} vs oracle {oracle:?}"))?;
    let shown: Vec<String> = l.partitions().map(|p| p.to_string()).collect();
    Ok(format!("4 closed congruences {}", shown.join(" ")))
}

/// Op2-passing systems at depth 2 in var(S2) and var(Z2). Both have only the
/// identity up to semantic equality, so var(S3) at depth 1 is added.
fn small_systems() -> Vec<(SearchContext, Vec<WordSystem>)> {
    [
        (corpus::s2(), 2, 2),
        (corpus::z2(), 2, 2),
        (corpus::s3(), 1, 1),
    ]
    .into_iter()
    .map(|(g, depth, n_max)| {
        let ctx = SearchContext::new(&var(vec![g]), depth, n_max, Caps::default()).unwrap();
        let mut found = Vec::new();
        ctx.for_each_system(|ws| {
            if ctx.bijections(&ws)?.is_some() {
                found.push(ws);
            }
            Ok(true)
        })
        .unwrap();
        (ctx, found)
    })
    .collect()
}

fn round_trips() -> Outcome {
    let mut n = 0;
    for (ctx, systems) in small_systems() {
        for ws in systems {
            let s = ctx.bijections(&ws).unwrap().unwrap();
            let back = words_from_bijections(&s).map_err(|e| e.to_string())?;
            ensure(
                same_words(&back, &ws, ctx.variety(), DEFAULT_CAP).unwrap(),
                format!("W(S(W)) differs for {:?}", ws.to_texts()),
            )?;
            let again = bijections_from_words(&back, ctx.scope()).map_err(|e| e.to_string())?;
            ensure(
                again == s,
                format!("S(W(S)) differs for {:?}", ws.to_texts()),
            )?;
            n += 1;
        }
    }
    Ok(format!("{n} word systems"))
}

fn derived_equals_verbal() -> Outcome {
    let mut n = 0;
    for (ctx, systems) in small_systems() {
        for ws in systems {
            let s = ctx.bijections(&ws).unwrap().unwrap();
            if let Some((k, op)) = verify_derived_operations(&ws, &s).map_err(|e| e.to_string())? {
                return Err(format!("`{op}` differs on W({k}) for {:?}", ws.to_texts()));
            }
            n += 1;
        }
    }
    Ok(format!("{n} word systems, ranks up to 2"))
}

fn h_hstar() -> Outcome {
    let caps = Caps::default();
    let s2 = var(vec![corpus::s2()]);
    let scope = Arc::new(FreeScope::new(&s2, 2, DEFAULT_CAP).unwrap());
    let id = WordSystem::identity(s2.signature().clone());
    let r1 = verify_h_hstar(&corpus::s2(), &id, &scope, &caps).map_err(|e| e.to_string())?;
    ensure(r1.passed, format!("S2 identity: {:?}", r1.failure))?;

    let s3 = var(vec![corpus::s3()]);
    let scope = Arc::new(FreeScope::new(&s3, 1, DEFAULT_CAP).unwrap());
    let opp = WordSystem::parse(
        s3.signature().clone(),
        [("mul", "mul(x2,x1)"), ("inv", "inv(x1)"), ("e", "e")],
    )
    .unwrap();
    let r2 = verify_h_hstar(&corpus::s3(), &opp, &scope, &caps).map_err(|e| e.to_string())?;
    ensure(r2.passed, format!("S3 opposite: {:?}", r2.failure))?;
    Ok(format!(
        "transport is an order isomorphism; {} coordination checks",
        r1.coordination_checks + r2.coordination_checks
    ))
}

fn double_star() -> Outcome {
    let mut n = 0;
    for g in builtin_groups().unwrap() {
        let ctx = SearchContext::new(&g.variety, g.depth_max, g.n_max, g.caps).unwrap();
        let mut systems = Vec::new();
        ctx.for_each_system(|ws| {
            if ctx.bijections(&ws)?.is_some() {
                systems.push(ws);
            }
            Ok(true)
        })
        .unwrap();
        for ws in &systems {
            let s = ctx.bijections(ws).unwrap().unwrap();
            let inv = inverse_word_system(ws, &s).map_err(|e| e.to_string())?;
            for h in &g.corpus {
                let back = star_algebra(&star_algebra(h, ws).unwrap(), &inv.words).unwrap();
                ensure(
                    back.same_tables(h),
                    format!("{} under {:?}", h.name(), ws.to_texts()),
                )?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} (algebra, word system) pairs"))
}

fn equivalence_search() -> Outcome {
    let caps = Caps::default();
    let s3 = var(vec![corpus::s3()]);
    let c = auto_equivalent_search(&corpus::s3_transposed(), &corpus::s3(), &s3, 1, 1, caps)
        .map_err(|e| e.to_string())?;
    ensure(
        c.verdict == Verdict::Automorphic,
        format!("S3t vs S3: {:?}", c.verdict),
    )?;
    let opp = WordSystem::parse(
        s3.signature().clone(),
        [("mul", "mul(x2,x1)"), ("inv", "inv(x1)"), ("e", "e")],
    )
    .unwrap();
    ensure(
        same_words(c.system.as_ref().unwrap(), &opp, &s3, DEFAULT_CAP).unwrap(),
        format!("S3t vs S3 found {:?}", c.word_system),
    )?;

    for g in builtin_groups().unwrap() {
        let ctx = SearchContext::new(&g.variety, g.depth_max, g.n_max, g.caps).unwrap();
        for h in &g.corpus {
            let c = ctx.search(h, h).map_err(|e| e.to_string())?;
            ensure(
                c.verdict == Verdict::Automorphic
                    && c.system.as_ref().unwrap().is_syntactic_identity(),
                format!("{} vs itself: {:?}", h.name(), c.word_system),
            )?;
        }
    }

    let s2 = var(vec![corpus::s2()]);
    let t = FiniteAlgebra::trivial(s2.signature().clone());
    let c = geom_equivalent(&corpus::s2(), &t, &s2, 2, &caps).map_err(|e| e.to_string())?;
    let w = c.witness.ok_or("no witness")?;
    ensure(
        c.verdict == Verdict::RefutedAtBounds,
        "S2 vs trivial not refuted",
    )?;
    ensure(
        w.partition == Partition::diagonal(3).encode(),
        format!("witness {}", w.partition),
    )?;
    Ok("opposite system for (S3t, S3); identity for every (H, H); diagonal witness for (S2, trivial)".into())
}

fn determinism() -> Outcome {
    let groups = builtin_groups().unwrap();
    let a = to_json(&run_suite(&groups).map_err(|e| e.to_string())?).unwrap();
    let b = to_json(&run_suite(&builtin_groups().unwrap()).map_err(|e| e.to_string())?).unwrap();
    ensure(a == b, "suite reports differ")?;
    ensure(a.contains("\"passed\": true"), "suite failed")?;
    Ok(format!("two runs, {} identical bytes", a.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        (
            "closure-operator laws",
            Duration::from_secs(1),
            closure_laws,
        ),
        (
            "Galois connection",
            Duration::from_secs(1),
            galois_connection,
        ),
        ("free-algebra sizes", Duration::from_secs(5), free_sizes),
        ("S2 lattice on W(2)", Duration::from_secs(1), s2_lattice),
        (
            "word/bijection round trips",
            Duration::from_secs(120),
            round_trips,
        ),
        (
            "derived equals verbal",
            Duration::from_secs(120),
            derived_equals_verbal,
        ),
        ("H and H* lattices", Duration::from_secs(300), h_hstar),
        ("double star", Duration::from_secs(60), double_star),
        (
            "equivalence search",
            Duration::from_secs(600),
            equivalence_search,
        ),
        (
            "deterministic verify",
            Duration::from_secs(600),
            determinism,
        ),
    ];
    let mut failed = 0;
    for (i, (name, limit, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let took = start.elapsed();
        let outcome = match outcome {
            Ok(msg) if took > *limit => Err(format!("{msg}; took {took:.2?}, limit {limit:?}")),
            o => o,
        };
        match outcome {
            Ok(msg) => println!("PASS criterion {:>2} {name}: {msg} ({took:.2?})", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL criterion {:>2} {name}: {msg} ({took:.2?})", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
