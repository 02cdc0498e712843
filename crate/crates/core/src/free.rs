//! Finitely generated free algebras of `var(A_1, .., A_m)`.
//!
//! `W(k)` is realized as the subalgebra of `∏_i A_i^(A_i^k)` generated by the
//! coordinate projections. An element is its value vector: one value per
//! pair (generator algebra, assignment of `x1..xk`). Coordinates are ordered
//! by generator, then by assignment in lexicographic order with `x1` most
//! significant.

use std::collections::HashMap;

use crate::algebra::{FiniteAlgebra, Homomorphism};
use crate::error::{Error, Result};
use crate::terms::{for_each_tuple, Term};
use crate::variety::VarietySpec;

/// Default bound on the number of elements of a free algebra.
pub const DEFAULT_CAP: usize = 20_000;

const MAX_COORDINATES: usize = 1 << 20;

/// How an element was first reached during the closure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Recipe {
    Generator(usize),
    Apply(usize, Vec<usize>),
}

#[derive(Debug, Clone)]
pub struct FreeAlgebra {
    rank: usize,
    algebra: FiniteAlgebra,
    width: usize,
    vectors: Vec<u32>,
    witnesses: Vec<Term>,
    recipes: Vec<Recipe>,
    depths: Vec<usize>,
    generators: Vec<usize>,
    variety_fingerprint: String,
}

struct Coordinates<'a> {
    algebras: &'a [FiniteAlgebra],
    /// `ranges[i]` is the slice of coordinates belonging to generator `i`.
    ranges: Vec<std::ops::Range<usize>>,
    width: usize,
}

impl Coordinates<'_> {
    fn apply(&self, op: usize, args: &[&[u32]], out: &mut Vec<u32>) {
        out.clear();
        out.resize(self.width, 0);
        for (alg, range) in self.algebras.iter().zip(&self.ranges) {
            let n = alg.size();
            let table = alg.table(op).values();
            for c in range.clone() {
                let idx = args.iter().fold(0usize, |acc, a| acc * n + a[c] as usize);
                out[c] = table[idx] as u32;
            }
        }
    }
}

impl FreeAlgebra {
    /// Builds `W(rank)` by breadth-first closure of the generator vectors.
    /// Elements are numbered in discovery order, so each witness has minimal
    /// depth and ties follow term-enumeration order.
    pub fn build(variety: &VarietySpec, rank: usize, cap: usize) -> Result<FreeAlgebra> {
        let sig = variety.signature().clone();
        if rank == 0 && !sig.has_constants() {
            return Err(Error::EmptyFreeAlgebra);
        }
        let algebras = variety.generators();
        let mut ranges = Vec::with_capacity(algebras.len());
        let mut width = 0usize;
        for a in algebras {
            let count = a
                .size()
                .checked_pow(rank as u32)
                .filter(|&c| c <= MAX_COORDINATES)
                .ok_or(Error::CapExceeded {
                    what: "free algebra coordinates",
                    reached: MAX_COORDINATES,
                    cap: MAX_COORDINATES,
                })?;
            ranges.push(width..width + count);
            width += count;
        }
        if width > MAX_COORDINATES {
            return Err(Error::CapExceeded {
                what: "free algebra coordinates",
                reached: width,
                cap: MAX_COORDINATES,
            });
        }
        let coords = Coordinates {
            algebras,
            ranges,
            width,
        };

        let mut vectors: Vec<u32> = Vec::new();
        let mut index: HashMap<Box<[u32]>, usize> = HashMap::new();
        let mut witnesses = Vec::new();
        let mut recipes = Vec::new();
        let mut depths = Vec::new();
        let mut generators = Vec::with_capacity(rank);

        for g in 0..rank {
            let mut v = Vec::with_capacity(width);
            for a in algebras {
                for_each_tuple(a.size(), rank, |asg| v.push(asg[g] as u32));
            }
            match index.get(v.as_slice()) {
                Some(&existing) => generators.push(existing),
                None => {
                    let id = witnesses.len();
                    index.insert(v.clone().into_boxed_slice(), id);
                    vectors.extend_from_slice(&v);
                    witnesses.push(Term::Var(g));
                    recipes.push(Recipe::Generator(g));
                    depths.push(0);
                    generators.push(id);
                }
            }
        }

        let mut scratch = Vec::with_capacity(width);
        let mut frontier_start = 0;
        let mut depth = 1;
        loop {
            let below = witnesses.len();
            let mut overflow = false;
            for op in 0..sig.len() {
                let arity = sig.arity(op);
                if arity == 0 && depth > 1 {
                    continue;
                }
                for_each_tuple(below, arity, |pos| {
                    if overflow || (arity > 0 && pos.iter().all(|&p| p < frontier_start)) {
                        return;
                    }
                    let args: Vec<&[u32]> = pos
                        .iter()
                        .map(|&p| &vectors[p * width..(p + 1) * width])
                        .collect();
                    coords.apply(op, &args, &mut scratch);
                    if index.contains_key(scratch.as_slice()) {
                        return;
                    }
                    let id = witnesses.len();
                    if id >= cap {
                        overflow = true;
                        return;
                    }
                    index.insert(scratch.clone().into_boxed_slice(), id);
                    vectors.extend_from_slice(&scratch);
                    witnesses.push(Term::App(
                        op,
                        pos.iter().map(|&p| witnesses[p].clone()).collect(),
                    ));
                    recipes.push(Recipe::Apply(op, pos.to_vec()));
                    depths.push(depth);
                });
                if overflow {
                    return Err(Error::CapExceeded {
                        what: "free algebra size",
                        reached: witnesses.len(),
                        cap,
                    });
                }
            }
            if witnesses.len() == below {
                break;
            }
            frontier_start = below;
            depth += 1;
        }

        let n = witnesses.len();
        let mut tables = Vec::with_capacity(sig.len());
        for op in 0..sig.len() {
            let arity = sig.arity(op);
            let mut values = Vec::with_capacity(n.pow(arity as u32));
            let mut missing = false;
            for_each_tuple(n, arity, |pos| {
                let args: Vec<&[u32]> = pos
                    .iter()
                    .map(|&p| &vectors[p * width..(p + 1) * width])
                    .collect();
                coords.apply(op, &args, &mut scratch);
                match index.get(scratch.as_slice()) {
                    Some(&id) => values.push(id),
                    None => missing = true,
                }
            });
            if missing {
                return Err(Error::Verification(
                    "free algebra closure is not closed".into(),
                ));
            }
            tables.push(values);
        }
        let algebra = FiniteAlgebra::new(format!("W({rank})"), sig, n, tables)?;
        Ok(FreeAlgebra {
            rank,
            algebra,
            width,
            vectors,
            witnesses,
            recipes,
            depths,
            generators,
            variety_fingerprint: variety.fingerprint(),
        })
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn size(&self) -> usize {
        self.witnesses.len()
    }

    pub fn algebra(&self) -> &FiniteAlgebra {
        &self.algebra
    }

    /// Element representing `x_{i+1}`.
    pub fn generator(&self, i: usize) -> usize {
        self.generators[i]
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn witness(&self, element: usize) -> &Term {
        &self.witnesses[element]
    }

    pub fn witnesses(&self) -> &[Term] {
        &self.witnesses
    }

    pub fn depth(&self, element: usize) -> usize {
        self.depths[element]
    }

    pub fn recipe(&self, element: usize) -> &Recipe {
        &self.recipes[element]
    }

    pub fn vector(&self, element: usize) -> &[u32] {
        &self.vectors[element * self.width..(element + 1) * self.width]
    }

    pub fn variety_fingerprint(&self) -> &str {
        &self.variety_fingerprint
    }

    /// The element a term denotes, computed on value vectors rather than on
    /// the operation tables.
    pub fn term_image(&self, variety: &VarietySpec, t: &Term) -> Result<usize> {
        if t.rank() > self.rank {
            return Err(Error::VariableOutOfRange {
                index: t.rank(),
                rank: self.rank,
            });
        }
        let v = self.term_vector(variety, t);
        (0..self.size())
            .find(|&e| self.vector(e) == v.as_slice())
            .ok_or_else(|| Error::Verification("term image outside the free algebra".into()))
    }

    fn term_vector(&self, variety: &VarietySpec, t: &Term) -> Vec<u32> {
        match t {
            Term::Var(i) => self.vector(self.generators[*i]).to_vec(),
            Term::App(op, args) => {
                let children: Vec<Vec<u32>> =
                    args.iter().map(|a| self.term_vector(variety, a)).collect();
                let mut out = Vec::with_capacity(self.width);
                for a in variety.generators() {
                    for_each_tuple(a.size(), self.rank, |_| {
                        let c = out.len();
                        let vals: Vec<usize> = children.iter().map(|ch| ch[c] as usize).collect();
                        out.push(a.apply(*op, &vals) as u32);
                    });
                }
                out
            }
        }
    }

    /// Image of every element under the homomorphism fixed by the generator
    /// images, computed along the construction recipes. Only meaningful when
    /// `target` lies in the variety.
    pub(crate) fn extend_unchecked(&self, target: &FiniteAlgebra, images: &[usize]) -> Vec<usize> {
        let mut map = Vec::with_capacity(self.size());
        let mut args = Vec::new();
        for r in &self.recipes {
            let v = match r {
                Recipe::Generator(g) => images[*g],
                Recipe::Apply(op, pos) => {
                    args.clear();
                    args.extend(pos.iter().map(|&p| map[p]));
                    target.apply(*op, &args)
                }
            };
            map.push(v);
        }
        map
    }

    /// The unique homomorphism sending `x_{i+1}` to `images[i]`; verified,
    /// so a target outside the variety is reported instead of returned.
    pub fn extend_hom(&self, target: &FiniteAlgebra, images: &[usize]) -> Result<Homomorphism> {
        self.algebra.same_signature(target)?;
        if images.len() != self.rank {
            return Err(Error::SizeMismatch(format!(
                "{} images for rank {}",
                images.len(),
                self.rank
            )));
        }
        if images.iter().any(|&i| i >= target.size()) {
            return Err(Error::SizeMismatch("image outside target carrier".into()));
        }
        let map = self.extend_unchecked(target, images);
        let consistent = self
            .generators
            .iter()
            .zip(images)
            .all(|(&g, &img)| map[g] == img);
        if !consistent || !self.algebra.is_homomorphism(target, &map)? {
            return Err(Error::OutsideVariety(target.name().to_string()));
        }
        Ok(Homomorphism { map })
    }

    /// For a target inside the variety: `map` is a homomorphism iff it agrees
    /// with the extension of its own generator images.
    pub(crate) fn is_hom_into_variety(&self, target: &FiniteAlgebra, map: &[usize]) -> bool {
        let images: Vec<usize> = self.generators.iter().map(|&g| map[g]).collect();
        self.extend_unchecked(target, &images) == map
    }
}

/// `|W(1)|, .., |W(up_to)|`, with the ranks whose size equals the previous
/// one (free algebras of different rank that cannot be told apart by size).
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct RankSizes {
    pub sizes: Vec<usize>,
    pub unwitnessed: Vec<usize>,
}

pub fn free_rank_sizes(variety: &VarietySpec, up_to: usize, cap: usize) -> Result<RankSizes> {
    let mut sizes = Vec::with_capacity(up_to);
    let mut unwitnessed = Vec::new();
    for k in 1..=up_to {
        let n = variety.free(k, cap)?.size();
        if sizes.last() == Some(&n) {
            unwitnessed.push(k);
        }
        sizes.push(n);
    }
    Ok(RankSizes { sizes, unwitnessed })
}
