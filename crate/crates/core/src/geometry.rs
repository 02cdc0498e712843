//! Points, solution sets, closures and lattices of `H`-closed congruences on
//! a free algebra `B`.
//!
//! A point is a tuple in `H^k`, identified with the homomorphism `B → H`
//! extending it. Point indices follow lexicographic tuple order.

use std::collections::{BTreeSet, HashSet};
use std::sync::Arc;

use crate::algebra::FiniteAlgebra;
use crate::error::{Error, Result};
use crate::free::FreeAlgebra;
use crate::partition::Partition;
use crate::terms::for_each_tuple;

/// Default bound on `|H|^k`.
pub const DEFAULT_POINT_CAP: usize = 4096;

/// A finite set of equations over `B`, each pair stored least element first.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EquationSet(BTreeSet<(usize, usize)>);

impl EquationSet {
    pub fn new(pairs: impl IntoIterator<Item = (usize, usize)>) -> EquationSet {
        EquationSet(
            pairs
                .into_iter()
                .map(|(a, b)| (a.min(b), a.max(b)))
                .collect(),
        )
    }

    /// Every related pair of the partition, the diagonal included.
    pub fn from_partition(p: &Partition) -> EquationSet {
        let mut out = BTreeSet::new();
        for block in p.blocks() {
            for (i, &a) in block.iter().enumerate() {
                for &b in &block[i..] {
                    out.insert((a, b));
                }
            }
        }
        EquationSet(out)
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.0.iter().copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        self.0.contains(&(a.min(b), a.max(b)))
    }

    pub fn is_subset(&self, other: &EquationSet) -> bool {
        self.0.is_subset(&other.0)
    }

    /// Every pair is related by `p`.
    pub fn within(&self, p: &Partition) -> bool {
        self.pairs().all(|(a, b)| p.related(a, b))
    }
}

/// An `H`-closed congruence: its closed point set and the induced partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClosedCongruence {
    pub points: Vec<usize>,
    pub partition: Partition,
}

/// `Hom(B, H)` as explicit maps, with their kernels.
#[derive(Debug, Clone)]
pub struct PointSpace {
    free: Arc<FreeAlgebra>,
    target: FiniteAlgebra,
    tuples: Vec<Vec<usize>>,
    maps: Vec<Vec<usize>>,
    kernels: Vec<Partition>,
}

impl PointSpace {
    /// Every extension is checked, so a target outside the variety is
    /// reported rather than silently producing non-homomorphisms.
    pub fn new(free: Arc<FreeAlgebra>, target: &FiniteAlgebra, cap: usize) -> Result<PointSpace> {
        let k = free.rank();
        let count = target
            .size()
            .checked_pow(k as u32)
            .filter(|&c| c <= cap)
            .ok_or(Error::CapExceeded {
                what: "point count",
                reached: target.size().saturating_pow(k as u32),
                cap,
            })?;
        let mut tuples = Vec::with_capacity(count);
        for_each_tuple(target.size(), k, |t| tuples.push(t.to_vec()));
        let mut maps = Vec::with_capacity(count);
        let mut kernels = Vec::with_capacity(count);
        for t in &tuples {
            let h = free.extend_hom(target, t)?;
            kernels.push(h.kernel());
            maps.push(h.map);
        }
        Ok(PointSpace {
            free,
            target: target.clone(),
            tuples,
            maps,
            kernels,
        })
    }

    pub fn free(&self) -> &Arc<FreeAlgebra> {
        &self.free
    }

    pub fn target(&self) -> &FiniteAlgebra {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn tuple(&self, point: usize) -> &[usize] {
        &self.tuples[point]
    }

    pub fn map(&self, point: usize) -> &[usize] {
        &self.maps[point]
    }

    pub fn kernel(&self, point: usize) -> &Partition {
        &self.kernels[point]
    }

    pub fn index_of(&self, tuple: &[usize]) -> Option<usize> {
        self.tuples.iter().position(|t| t == tuple)
    }

    /// `T′`: points whose kernel contains every equation of `T`.
    pub fn solutions(&self, t: &EquationSet) -> Vec<usize> {
        (0..self.len())
            .filter(|&p| t.within(&self.kernels[p]))
            .collect()
    }

    /// Points whose kernel contains the partition.
    pub fn solutions_of(&self, p: &Partition) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| p.refines(&self.kernels[i]))
            .collect()
    }

    /// `R′`: intersection of the kernels; the empty family gives `B²`.
    pub fn point_congruence(&self, points: &[usize]) -> Partition {
        points
            .iter()
            .fold(Partition::full(self.free.size()), |acc, &p| {
                acc.meet(&self.kernels[p])
            })
    }

    /// `T″`, carried with its closed point set `T′`.
    pub fn closure(&self, t: &EquationSet) -> ClosedCongruence {
        let points = self.solutions(t);
        let partition = self.point_congruence(&points);
        ClosedCongruence { points, partition }
    }

    pub fn closure_of(&self, p: &Partition) -> ClosedCongruence {
        let points = self.solutions_of(p);
        let partition = self.point_congruence(&points);
        ClosedCongruence { points, partition }
    }

    pub fn is_closed(&self, t: &EquationSet) -> bool {
        EquationSet::from_partition(&self.closure(t).partition) == *t
    }

    pub fn is_closed_partition(&self, p: &Partition) -> bool {
        self.closure_of(p).partition == *p
    }

    /// `Id(H, X)`: the kernel intersection over all points.
    pub fn id_congruence(&self) -> ClosedCongruence {
        let points: Vec<usize> = (0..self.len()).collect();
        let partition = self.point_congruence(&points);
        ClosedCongruence { points, partition }
    }

    /// `Cl_H(B)`: the closure system generated by the point kernels and `B²`.
    pub fn closed_lattice(&self) -> ClosedLattice {
        let mut all: HashSet<Partition> = HashSet::new();
        let mut order: Vec<Partition> = Vec::new();
        let push = |p: Partition, all: &mut HashSet<Partition>, order: &mut Vec<Partition>| {
            if all.insert(p.clone()) {
                order.push(p);
            }
        };
        push(Partition::full(self.free.size()), &mut all, &mut order);
        for k in &self.kernels {
            push(k.clone(), &mut all, &mut order);
        }
        let mut done = 0;
        while done < order.len() {
            let x = order[done].clone();
            let mut i = 0;
            while i < done {
                let m = x.meet(&order[i]);
                push(m, &mut all, &mut order);
                i += 1;
            }
            done += 1;
        }
        order.sort_by(|a, b| b.num_blocks().cmp(&a.num_blocks()).then_with(|| a.cmp(b)));
        let elements = order
            .into_iter()
            .map(|partition| ClosedCongruence {
                points: self.solutions_of(&partition),
                partition,
            })
            .collect();
        ClosedLattice::new(self.free.rank(), self.target.name().to_string(), elements)
    }
}

/// Elements sorted finest first (most blocks), then by canonical labels, so
/// index 0 is `Id(H, X)` and the last element is `B²`.
#[derive(Debug, Clone)]
pub struct ClosedLattice {
    rank: usize,
    algebra: String,
    elements: Vec<ClosedCongruence>,
    hasse: Vec<(usize, usize)>,
}

impl ClosedLattice {
    fn new(rank: usize, algebra: String, elements: Vec<ClosedCongruence>) -> ClosedLattice {
        let n = elements.len();
        let below =
            |i: usize, j: usize| i != j && elements[i].partition.refines(&elements[j].partition);
        let mut hasse = Vec::new();
        for i in 0..n {
            for j in 0..n {
                if below(i, j) && !(0..n).any(|m| below(i, m) && below(m, j)) {
                    hasse.push((i, j));
                }
            }
        }
        ClosedLattice {
            rank,
            algebra,
            elements,
            hasse,
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn algebra(&self) -> &str {
        &self.algebra
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ClosedCongruence] {
        &self.elements
    }

    pub fn partitions(&self) -> impl Iterator<Item = &Partition> {
        self.elements.iter().map(|c| &c.partition)
    }

    pub fn index_of(&self, p: &Partition) -> Option<usize> {
        self.elements.iter().position(|c| c.partition == *p)
    }

    pub fn contains(&self, p: &Partition) -> bool {
        self.index_of(p).is_some()
    }

    pub fn leq(&self, i: usize, j: usize) -> bool {
        self.elements[i]
            .partition
            .refines(&self.elements[j].partition)
    }

    /// Covering pairs `(lower, upper)`.
    pub fn hasse(&self) -> &[(usize, usize)] {
        &self.hasse
    }

    pub fn bottom(&self) -> usize {
        0
    }

    pub fn top(&self) -> usize {
        self.elements.len() - 1
    }

    /// Intersection.
    pub fn meet(&self, i: usize, j: usize) -> Option<usize> {
        self.index_of(&self.elements[i].partition.meet(&self.elements[j].partition))
    }

    /// Closure of the union: the element whose points are the common points.
    pub fn join(&self, i: usize, j: usize) -> Option<usize> {
        let common: Vec<usize> = self.elements[i]
            .points
            .iter()
            .filter(|p| self.elements[j].points.contains(p))
            .copied()
            .collect();
        self.elements.iter().position(|c| c.points == common)
    }

    /// Sorted canonical encodings of the partitions.
    pub fn fingerprint(&self) -> Vec<String> {
        let mut out: Vec<String> = self.partitions().map(Partition::encode).collect();
        out.sort();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::free::DEFAULT_CAP;
    use crate::variety::VarietySpec;

    fn s2_space(k: usize) -> PointSpace {
        let v = VarietySpec::new(vec![corpus::s2()], vec![]).unwrap();
        PointSpace::new(
            v.free(k, DEFAULT_CAP).unwrap(),
            &corpus::s2(),
            DEFAULT_POINT_CAP,
        )
        .unwrap()
    }

    // In W(2) over var(S2): 0 = x1, 1 = x2, 2 = meet(x1,x2).
    const X1: usize = 0;
    const X2: usize = 1;
    const M: usize = 2;

    fn tuples(s: &PointSpace, pts: &[usize]) -> Vec<Vec<usize>> {
        pts.iter().map(|&p| s.tuple(p).to_vec()).collect()
    }

    #[test]
    fn solutions_examples() {
        let s = s2_space(2);
        assert_eq!(s.solutions(&EquationSet::default()).len(), 4);
        let t = EquationSet::new([(X1, M)]);
        assert_eq!(
            tuples(&s, &s.solutions(&t)),
            [vec![0, 0], vec![0, 1], vec![1, 1]]
        );
        let t = EquationSet::new([(X1, X2)]);
        assert_eq!(tuples(&s, &s.solutions(&t)), [vec![0, 0], vec![1, 1]]);
    }

    #[test]
    fn point_congruence_examples() {
        let s = s2_space(2);
        assert!(s.point_congruence(&[0, 1, 2, 3]).is_diagonal());
        assert!(s.point_congruence(&[]).is_full());
        let p01 = s.index_of(&[0, 1]).unwrap();
        assert_eq!(
            s.point_congruence(&[p01]).blocks(),
            vec![vec![X1, M], vec![X2]]
        );
    }

    #[test]
    fn closure_examples() {
        let s = s2_space(2);
        assert!(s.closure(&EquationSet::default()).partition.is_diagonal());
        let c = s.closure(&EquationSet::new([(X1, M)]));
        assert_eq!(c.partition.blocks(), vec![vec![X1, M], vec![X2]]);
        let once = s.closure(&EquationSet::new([(X1, X2)]));
        let twice = s.closure(&EquationSet::from_partition(&once.partition));
        assert_eq!(once, twice);
    }

    #[test]
    fn is_closed_examples() {
        let s = s2_space(2);
        assert!(s.is_closed_partition(&Partition::diagonal(3)));
        assert!(!s.is_closed(&EquationSet::new([(X1, M)])));
        assert!(s.is_closed_partition(&Partition::full(3)));
        assert!(s.is_closed(&EquationSet::from_partition(&Partition::full(3))));
    }

    #[test]
    fn lattice_examples() {
        assert_eq!(s2_space(1).closed_lattice().len(), 1);
        let l = s2_space(2).closed_lattice();
        let got: Vec<String> = l.partitions().map(|p| p.to_string()).collect();
        assert_eq!(got, ["{0}|{1}|{2}", "{0,2}|{1}", "{0}|{1,2}", "{0,1,2}"]);
        assert_eq!(l.hasse(), &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(l.meet(1, 2), Some(0));
        assert_eq!(l.join(1, 2), Some(3));

        let v = VarietySpec::new(vec![corpus::s2()], vec![]).unwrap();
        let t = FiniteAlgebra::trivial(v.signature().clone());
        let s = PointSpace::new(v.free(2, DEFAULT_CAP).unwrap(), &t, DEFAULT_POINT_CAP).unwrap();
        let l = s.closed_lattice();
        assert_eq!(l.len(), 1);
        assert!(l.elements()[0].partition.is_full());
        assert!(s.id_congruence().partition.is_full());
    }

    #[test]
    fn lattice_matches_subset_oracle() {
        // Intersect the kernels of every subset of points.
        for s in [s2_space(2), s2_space(3)] {
            let n = s.len();
            let mut oracle = BTreeSet::new();
            for mask in 0u32..(1 << n) {
                let pts: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
                oracle.insert(s.point_congruence(&pts));
            }
            let got: BTreeSet<Partition> = s.closed_lattice().partitions().cloned().collect();
            assert_eq!(got, oracle);
        }
    }

    #[test]
    fn id_congruence_examples() {
        assert!(s2_space(2).id_congruence().partition.is_diagonal());
        let v = VarietySpec::new(vec![corpus::z2()], vec![]).unwrap();
        let s = PointSpace::new(v.free(1, DEFAULT_CAP).unwrap(), &corpus::z2(), 16).unwrap();
        assert!(s.id_congruence().partition.is_diagonal());
    }

    #[test]
    fn outside_variety_is_reported() {
        let v = VarietySpec::new(vec![corpus::s2()], vec![]).unwrap();
        let r = PointSpace::new(v.free(2, DEFAULT_CAP).unwrap(), &corpus::left_zero(), 64);
        assert!(matches!(r, Err(Error::OutsideVariety(_))));
    }

    #[test]
    fn lattice_laws_on_group_instances() {
        let v = VarietySpec::new(vec![corpus::s3()], vec![]).unwrap();
        let b = v.free(1, DEFAULT_CAP).unwrap();
        for h in [corpus::s3(), corpus::z2(), corpus::z3()] {
            let s = PointSpace::new(b.clone(), &h, 64).unwrap();
            let l = s.closed_lattice();
            assert_eq!(
                l.elements()[l.bottom()].partition,
                s.id_congruence().partition
            );
            assert!(l.elements()[l.top()].partition.is_full());
            for i in 0..l.len() {
                let c = &l.elements()[i];
                assert!(b.algebra().is_congruence(&c.partition));
                assert!(s.is_closed_partition(&c.partition));
                for j in 0..l.len() {
                    assert!(l.meet(i, j).is_some());
                    assert!(l.join(i, j).is_some());
                    // Order reversal between partitions and point sets.
                    let pts_sub = c.points.iter().all(|p| l.elements()[j].points.contains(p));
                    assert_eq!(l.leq(j, i), pts_sub);
                }
            }
        }
    }
}
