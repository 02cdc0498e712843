//! Finite algebras given by operation tables, and the usual operations on
//! them: term evaluation, homomorphisms, products, subalgebras, quotients.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::partition::Partition;
use crate::terms::{for_each_tuple, Signature, Term};

/// A total table for one operation, row-major: the entry for `(a1, .., ak)`
/// sits at `a1*n^(k-1) + .. + ak`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OpTable {
    arity: usize,
    values: Vec<usize>,
}

impl OpTable {
    pub fn new(arity: usize, size: usize, values: Vec<usize>) -> Result<OpTable> {
        let expected = size.checked_pow(arity as u32).ok_or_else(|| {
            Error::InvalidTable(format!("{size}^{arity} entries do not fit in memory"))
        })?;
        if values.len() != expected {
            return Err(Error::InvalidTable(format!(
                "expected {expected} entries, found {}",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|&&v| v >= size) {
            return Err(Error::InvalidTable(format!(
                "entry {v} outside carrier of size {size}"
            )));
        }
        Ok(OpTable { arity, values })
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }
}

#[inline]
fn table_index(size: usize, args: &[usize]) -> usize {
    args.iter().fold(0, |acc, &a| acc * size + a)
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FiniteAlgebra {
    name: String,
    size: usize,
    signature: Arc<Signature>,
    tables: Vec<OpTable>,
}

impl FiniteAlgebra {
    pub fn new(
        name: impl Into<String>,
        signature: Arc<Signature>,
        size: usize,
        tables: Vec<Vec<usize>>,
    ) -> Result<FiniteAlgebra> {
        let name = name.into();
        if size == 0 {
            return Err(Error::InvalidTable(format!(
                "`{name}` has an empty carrier"
            )));
        }
        if tables.len() != signature.len() {
            return Err(Error::InvalidTable(format!(
                "`{name}` has {} tables for {} symbols",
                tables.len(),
                signature.len()
            )));
        }
        let tables = tables
            .into_iter()
            .enumerate()
            .map(|(op, values)| {
                OpTable::new(signature.arity(op), size, values).map_err(|e| match e {
                    Error::InvalidTable(m) => {
                        Error::InvalidTable(format!("`{name}`, `{}`: {m}", signature.name(op)))
                    }
                    e => e,
                })
            })
            .collect::<Result<_>>()?;
        Ok(FiniteAlgebra {
            name,
            size,
            signature,
            tables,
        })
    }

    /// Builds the tables by evaluating `f(op, args)` on every tuple.
    pub fn from_fn(
        name: impl Into<String>,
        signature: Arc<Signature>,
        size: usize,
        mut f: impl FnMut(usize, &[usize]) -> usize,
    ) -> Result<FiniteAlgebra> {
        let tables = (0..signature.len())
            .map(|op| {
                let mut values = Vec::with_capacity(size.pow(signature.arity(op) as u32));
                for_each_tuple(size, signature.arity(op), |t| values.push(f(op, t)));
                values
            })
            .collect();
        FiniteAlgebra::new(name, signature, size, tables)
    }

    /// The one-element algebra.
    pub fn trivial(signature: Arc<Signature>) -> FiniteAlgebra {
        FiniteAlgebra::from_fn("trivial", signature, 1, |_, _| 0).expect("trivial algebra")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: impl Into<String>) -> FiniteAlgebra {
        self.name = name.into();
        self
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn signature(&self) -> &Arc<Signature> {
        &self.signature
    }

    pub fn table(&self, op: usize) -> &OpTable {
        &self.tables[op]
    }

    pub fn tables(&self) -> &[OpTable] {
        &self.tables
    }

    #[inline]
    pub fn apply(&self, op: usize, args: &[usize]) -> usize {
        self.tables[op].values[table_index(self.size, args)]
    }

    /// Same carrier and same tables; names are ignored.
    pub fn same_tables(&self, other: &FiniteAlgebra) -> bool {
        self.size == other.size && self.signature == other.signature && self.tables == other.tables
    }

    pub fn same_signature(&self, other: &FiniteAlgebra) -> Result<()> {
        if self.signature == other.signature {
            Ok(())
        } else {
            Err(Error::SignatureMismatch)
        }
    }

    /// Value of the verbal operation `t` at `assignment` (`assignment[i]` is
    /// the value of `x_{i+1}`).
    pub fn eval(&self, t: &Term, assignment: &[usize]) -> Result<usize> {
        match t {
            Term::Var(i) => assignment
                .get(*i)
                .copied()
                .ok_or(Error::UnmappedVariable(i + 1)),
            Term::App(op, args) => {
                let vals = args
                    .iter()
                    .map(|a| self.eval(a, assignment))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.apply(*op, &vals))
            }
        }
    }

    /// Like [`eval`](Self::eval) for callers that already checked the
    /// variables; panics on an unmapped variable.
    pub(crate) fn eval_unchecked(&self, t: &Term, assignment: &[usize]) -> usize {
        match t {
            Term::Var(i) => assignment[*i],
            Term::App(op, args) => match args.len() {
                0 => self.apply(*op, &[]),
                1 => self.apply(*op, &[self.eval_unchecked(&args[0], assignment)]),
                2 => self.apply(
                    *op,
                    &[
                        self.eval_unchecked(&args[0], assignment),
                        self.eval_unchecked(&args[1], assignment),
                    ],
                ),
                _ => {
                    let vals: Vec<usize> = args
                        .iter()
                        .map(|a| self.eval_unchecked(a, assignment))
                        .collect();
                    self.apply(*op, &vals)
                }
            },
        }
    }

    /// True iff `lhs = rhs` holds under all `|A|^k` assignments, where `k`
    /// covers the variables of both sides.
    pub fn satisfies_identity(&self, lhs: &Term, rhs: &Term) -> bool {
        self.identity_counterexample(lhs, rhs).is_none()
    }

    pub fn identity_counterexample(&self, lhs: &Term, rhs: &Term) -> Option<Vec<usize>> {
        let k = lhs.rank().max(rhs.rank());
        let mut witness = None;
        for_each_tuple(self.size, k, |asg| {
            if witness.is_none() && self.eval_unchecked(lhs, asg) != self.eval_unchecked(rhs, asg) {
                witness = Some(asg.to_vec());
            }
        });
        witness
    }

    /// First tuple where `map` fails to commute with an operation.
    pub fn hom_violation(
        &self,
        target: &FiniteAlgebra,
        map: &[usize],
    ) -> Result<Option<(usize, Vec<usize>)>> {
        self.same_signature(target)?;
        if map.len() != self.size {
            return Err(Error::SizeMismatch(format!(
                "map has {} entries for a carrier of size {}",
                map.len(),
                self.size
            )));
        }
        if let Some(v) = map.iter().find(|&&v| v >= target.size) {
            return Err(Error::SizeMismatch(format!(
                "image {v} outside target of size {}",
                target.size
            )));
        }
        let mut mapped = Vec::new();
        for op in 0..self.signature.len() {
            let arity = self.signature.arity(op);
            let mut bad = None;
            for_each_tuple(self.size, arity, |args| {
                if bad.is_some() {
                    return;
                }
                mapped.clear();
                mapped.extend(args.iter().map(|&a| map[a]));
                if map[self.apply(op, args)] != target.apply(op, &mapped) {
                    bad = Some(args.to_vec());
                }
            });
            if let Some(args) = bad {
                return Ok(Some((op, args)));
            }
        }
        Ok(None)
    }

    pub fn is_homomorphism(&self, target: &FiniteAlgebra, map: &[usize]) -> Result<bool> {
        Ok(self.hom_violation(target, map)?.is_none())
    }

    /// All homomorphisms into `target`, in lexicographic order of their maps.
    pub fn hom_set(&self, target: &FiniteAlgebra) -> Result<Vec<Homomorphism>> {
        self.same_signature(target)?;
        // constraints[i]: table entries whose arguments and result are all <= i,
        // with i among them; checked as soon as element i is assigned.
        let mut constraints: Vec<Vec<(usize, Vec<usize>, usize)>> = vec![Vec::new(); self.size];
        for op in 0..self.signature.len() {
            for_each_tuple(self.size, self.signature.arity(op), |args| {
                let res = self.apply(op, args);
                let last = args.iter().copied().chain([res]).max().unwrap_or(res);
                constraints[last].push((op, args.to_vec(), res));
            });
        }
        let mut out = Vec::new();
        let mut map = vec![0usize; self.size];
        let mut scratch = Vec::new();
        self.extend_partial(target, &constraints, 0, &mut map, &mut scratch, &mut out);
        Ok(out)
    }

    fn extend_partial(
        &self,
        target: &FiniteAlgebra,
        constraints: &[Vec<(usize, Vec<usize>, usize)>],
        i: usize,
        map: &mut Vec<usize>,
        scratch: &mut Vec<usize>,
        out: &mut Vec<Homomorphism>,
    ) {
        if i == self.size {
            out.push(Homomorphism { map: map.clone() });
            return;
        }
        for v in 0..target.size {
            map[i] = v;
            let ok = constraints[i].iter().all(|(op, args, res)| {
                scratch.clear();
                scratch.extend(args.iter().map(|&a| map[a]));
                target.apply(*op, scratch) == map[*res]
            });
            if ok {
                self.extend_partial(target, constraints, i + 1, map, scratch, out);
            }
        }
    }

    /// Least subuniverse containing `seeds`, with a minimal-depth witness
    /// term over the seed variables for each element. Seed `i` is `x_{i+1}`.
    pub fn generate_subalgebra(&self, seeds: &[usize]) -> Result<Subalgebra> {
        if seeds.is_empty() && !self.signature.has_constants() {
            return Err(Error::EmptySeeds);
        }
        let mut index: HashMap<usize, usize> = HashMap::new();
        let mut elements = Vec::new();
        let mut witnesses = Vec::new();
        for (i, &s) in seeds.iter().enumerate() {
            if s >= self.size {
                return Err(Error::SizeMismatch(format!("seed {s} outside carrier")));
            }
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(s) {
                e.insert(elements.len());
                elements.push(s);
                witnesses.push(Term::Var(i));
            }
        }
        let mut frontier_start = 0;
        let mut depth = 1;
        loop {
            let below = elements.len();
            for op in 0..self.signature.len() {
                let arity = self.signature.arity(op);
                if arity == 0 && depth > 1 {
                    continue;
                }
                let mut args = vec![0usize; arity];
                for_each_tuple(below, arity, |pos| {
                    if arity > 0 && pos.iter().all(|&p| p < frontier_start) {
                        return;
                    }
                    for (slot, &p) in args.iter_mut().zip(pos) {
                        *slot = elements[p];
                    }
                    let v = self.apply(op, &args);
                    if let std::collections::hash_map::Entry::Vacant(e) = index.entry(v) {
                        e.insert(elements.len());
                        elements.push(v);
                        witnesses.push(Term::App(
                            op,
                            pos.iter().map(|&p| witnesses[p].clone()).collect(),
                        ));
                    }
                });
            }
            if elements.len() == below {
                break;
            }
            frontier_start = below;
            depth += 1;
        }
        Ok(Subalgebra {
            elements,
            witnesses,
        })
    }

    pub fn is_congruence(&self, p: &Partition) -> bool {
        self.congruence_violation(p).is_none()
    }

    /// An operation and two related argument tuples with unrelated results.
    pub fn congruence_violation(&self, p: &Partition) -> Option<(usize, Vec<usize>, Vec<usize>)> {
        if p.len() != self.size {
            return Some((usize::MAX, Vec::new(), Vec::new()));
        }
        // Changing one argument at a time within its block suffices.
        let reps = p.representatives();
        for op in 0..self.signature.len() {
            let arity = self.signature.arity(op);
            let mut bad = None;
            for_each_tuple(self.size, arity, |args| {
                if bad.is_some() {
                    return;
                }
                let here = p.label(self.apply(op, args));
                for pos in 0..arity {
                    let rep = reps[p.label(args[pos])];
                    if rep == args[pos] {
                        continue;
                    }
                    let mut other = args.to_vec();
                    other[pos] = rep;
                    if p.label(self.apply(op, &other)) != here {
                        bad = Some((op, args.to_vec(), other));
                        return;
                    }
                }
            });
            if bad.is_some() {
                return bad;
            }
        }
        None
    }

    /// Quotient by a congruence; the carrier is the blocks in canonical order.
    pub fn quotient(&self, p: &Partition) -> Result<(FiniteAlgebra, Homomorphism)> {
        if p.len() != self.size || !self.is_congruence(p) {
            return Err(Error::NotACongruence(self.name.clone()));
        }
        let reps = p.representatives();
        let quotient = FiniteAlgebra::from_fn(
            format!("{}/~", self.name),
            self.signature.clone(),
            p.num_blocks(),
            |op, blocks| {
                let args: Vec<usize> = blocks.iter().map(|&b| reps[b]).collect();
                p.label(self.apply(op, &args))
            },
        )?;
        Ok((
            quotient,
            Homomorphism {
                map: p.labels().to_vec(),
            },
        ))
    }
}

/// Elements of a generated subalgebra in discovery order, with witnesses.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subalgebra {
    pub elements: Vec<usize>,
    pub witnesses: Vec<Term>,
}

impl Subalgebra {
    pub fn sorted_elements(&self) -> Vec<usize> {
        let mut e = self.elements.clone();
        e.sort_unstable();
        e
    }
}

/// A map between carriers. Whether it respects operations is checked
/// against concrete algebras with [`FiniteAlgebra::is_homomorphism`].
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Homomorphism {
    pub map: Vec<usize>,
}

impl Homomorphism {
    pub fn identity(n: usize) -> Homomorphism {
        Homomorphism {
            map: (0..n).collect(),
        }
    }

    pub fn apply(&self, a: usize) -> usize {
        self.map[a]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Homomorphism) -> Homomorphism {
        Homomorphism {
            map: self.map.iter().map(|&a| other.map[a]).collect(),
        }
    }

    pub fn kernel(&self) -> Partition {
        Partition::from_labels(&self.map)
    }

    pub fn is_injective(&self) -> bool {
        self.kernel().is_diagonal()
    }
}

/// Componentwise product. Element `(a_1, .., a_m)` has index
/// `a_1*n_2*..*n_m + .. + a_m` (first factor most significant).
pub fn product_algebra(factors: &[&FiniteAlgebra]) -> Result<FiniteAlgebra> {
    let first = factors.first().ok_or(Error::EmptyProduct)?;
    for f in factors {
        first.same_signature(f)?;
    }
    let sizes: Vec<usize> = factors.iter().map(|f| f.size).collect();
    let size = sizes
        .iter()
        .try_fold(1usize, |acc, &s| acc.checked_mul(s))
        .ok_or({
            Error::CapExceeded {
                what: "product size",
                reached: usize::MAX,
                cap: usize::MAX,
            }
        })?;
    let name = factors
        .iter()
        .map(|f| f.name.as_str())
        .collect::<Vec<_>>()
        .join("x");
    let mut coords = Vec::new();
    FiniteAlgebra::from_fn(name, first.signature.clone(), size, |op, args| {
        let decoded: Vec<Vec<usize>> = args.iter().map(|&a| product_coords(&sizes, a)).collect();
        coords.clear();
        for (i, f) in factors.iter().enumerate() {
            let comp: Vec<usize> = decoded.iter().map(|d| d[i]).collect();
            coords.push(f.apply(op, &comp));
        }
        product_index(&sizes, &coords)
    })
}

pub fn product_index(sizes: &[usize], coords: &[usize]) -> usize {
    sizes
        .iter()
        .zip(coords)
        .fold(0, |acc, (&n, &c)| acc * n + c)
}

pub fn product_coords(sizes: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; sizes.len()];
    for (slot, &n) in out.iter_mut().zip(sizes).rev() {
        *slot = index % n;
        index /= n;
    }
    out
}
