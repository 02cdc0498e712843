//! Small named algebras used by the built-in verification suite and tests.

use std::sync::Arc;

use crate::algebra::{product_algebra, FiniteAlgebra};
use crate::terms::Signature;

pub fn meet_signature() -> Arc<Signature> {
    Arc::new(Signature::parse("meet/2").expect("static signature"))
}

pub fn group_signature() -> Arc<Signature> {
    Arc::new(Signature::parse("mul/2, inv/1, e/0").expect("static signature"))
}

/// Two-element meet semilattice `({0,1}, min)`.
pub fn s2() -> FiniteAlgebra {
    FiniteAlgebra::from_fn("S2", meet_signature(), 2, |_, a| a[0].min(a[1])).expect("S2")
}

/// Left-zero groupoid `f(a,b) = a`, written over the meet signature.
pub fn left_zero() -> FiniteAlgebra {
    FiniteAlgebra::from_fn("LZ2", meet_signature(), 2, |_, a| a[0]).expect("LZ2")
}

pub fn nand() -> FiniteAlgebra {
    let sig = Arc::new(Signature::parse("nand/2").expect("static signature"));
    FiniteAlgebra::from_fn("NAND", sig, 2, |_, a| {
        usize::from(!(a[0] == 1 && a[1] == 1))
    })
    .expect("NAND")
}

/// Cyclic group of order `n` over `mul/2, inv/1, e/0`.
pub fn cyclic(n: usize) -> FiniteAlgebra {
    FiniteAlgebra::from_fn(format!("Z{n}"), group_signature(), n, |op, a| match op {
        0 => (a[0] + a[1]) % n,
        1 => (n - a[0]) % n,
        _ => 0,
    })
    .expect("cyclic group")
}

pub fn z2() -> FiniteAlgebra {
    cyclic(2)
}

pub fn z3() -> FiniteAlgebra {
    cyclic(3)
}

/// Permutations of `{0,1,2}` in lexicographic order: index 0 is the identity.
pub fn s3_permutations() -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                if a != b && b != c && a != c {
                    out.push([a, b, c]);
                }
            }
        }
    }
    out
}

/// Symmetric group on three points; `mul(p, q)` is `p ∘ q` (apply `q` first).
pub fn s3() -> FiniteAlgebra {
    let perms = s3_permutations();
    let index = |p: [usize; 3]| perms.iter().position(|q| *q == p).expect("permutation");
    FiniteAlgebra::from_fn("S3", group_signature(), 6, |op, a| match op {
        0 => {
            let (p, q) = (perms[a[0]], perms[a[1]]);
            index([p[q[0]], p[q[1]], p[q[2]]])
        }
        1 => {
            let p = perms[a[0]];
            let mut inv = [0; 3];
            for (i, &pi) in p.iter().enumerate() {
                inv[pi] = i;
            }
            index(inv)
        }
        _ => 0,
    })
    .expect("S3")
}

/// `S3` with its multiplication table transposed.
pub fn s3_transposed() -> FiniteAlgebra {
    let s3 = s3();
    FiniteAlgebra::from_fn("S3t", group_signature(), 6, |op, a| match op {
        0 => s3.apply(0, &[a[1], a[0]]),
        _ => s3.apply(op, a),
    })
    .expect("S3t")
}

pub fn s2_squared() -> FiniteAlgebra {
    let s2 = s2();
    product_algebra(&[&s2, &s2]).expect("S2xS2")
}

pub fn z2_squared() -> FiniteAlgebra {
    let z2 = z2();
    product_algebra(&[&z2, &z2]).expect("Z2xZ2")
}
