//! Space-filling curve families as refinement-consistent orders on boxes.
//!
//! Every family is a table-free motif state machine. A state is a signed axis
//! permutation mapping the family's reference motif onto the actual box. At a
//! node with state `T`, the child of curve rank `j` has digits `T·r_j`, where
//! `r_j` is the reference child of rank `j`, and inherits state `T ∘ B_j`.
//! All families start from the identity state, so every curve enters the unit
//! hypercube at the all-zeros corner.

use std::cmp::Ordering;
use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::geometry::{Cube, SpaceParams};
use crate::spacetree::Grid;

/// Digits of one level, one per axis.
pub type Digits = SmallVec<[u32; 4]>;

/// Supported curve families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    /// Two-dimensional Hilbert curve (`k = 2`, `d = 2`).
    Hilbert2d,
    /// Peano curve (`k = 3`, any `d`).
    Peano,
    /// Morton / Lebesgue order (`k = 2`, any `d`); not continuous.
    Morton,
}

impl Family {
    /// CLI-facing name.
    pub fn name(&self) -> &'static str {
        match self {
            Family::Hilbert2d => "hilbert2d",
            Family::Peano => "peano",
            Family::Morton => "morton",
        }
    }

    /// Whether consecutive cells are always adjacent.
    pub fn is_continuous(&self) -> bool {
        !matches!(self, Family::Morton)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Family> {
        match s {
            "hilbert2d" => Ok(Family::Hilbert2d),
            "peano" => Ok(Family::Peano),
            "morton" => Ok(Family::Morton),
            other => Err(Error::InvalidSpec(format!("unknown curve family {other:?}"))),
        }
    }
}

/// Signed axis permutation: `(T·u)_i = u_{perm[i]}`, reflected (`k-1-x`)
/// when bit `i` of `flip` is set.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Transform {
    perm: SmallVec<[u8; 4]>,
    flip: u32,
}

impl Transform {
    fn identity(d: u32) -> Transform {
        Transform {
            perm: (0..d as u8).collect(),
            flip: 0,
        }
    }

    /// `self ∘ inner`.
    fn compose(&self, inner: &Transform) -> Transform {
        let mut perm = SmallVec::with_capacity(self.perm.len());
        let mut flip = 0;
        for (i, &pi) in self.perm.iter().enumerate() {
            perm.push(inner.perm[pi as usize]);
            let f = ((self.flip >> i) ^ (inner.flip >> pi)) & 1;
            flip |= f << i;
        }
        Transform { perm, flip }
    }

    fn apply(&self, k: u32, u: &[u32]) -> Digits {
        self.perm
            .iter()
            .enumerate()
            .map(|(i, &p)| {
                let x = u[p as usize];
                if self.flip & (1 << i) != 0 {
                    k - 1 - x
                } else {
                    x
                }
            })
            .collect()
    }

    fn invert_apply(&self, k: u32, a: &[u32]) -> Digits {
        let mut u: Digits = smallvec::smallvec![0; a.len()];
        for (i, &p) in self.perm.iter().enumerate() {
            let x = a[i];
            u[p as usize] = if self.flip & (1 << i) != 0 { k - 1 - x } else { x };
        }
        u
    }
}

/// A curve family bound to space parameters and a base orientation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct CurveSpec {
    family: Family,
    params: SpaceParams,
}

/// Outcome of [`CurveSpec::compare`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveOrder {
    /// The first box is traversed entirely before the second.
    Before,
    /// The first box is traversed entirely after the second.
    After,
    /// One box contains the other.
    Nested,
}

impl CurveSpec {
    /// Binds a family to `(k, d)`, checking compatibility.
    pub fn new(family: Family, params: SpaceParams) -> Result<CurveSpec> {
        let ok = match family {
            Family::Hilbert2d => params.k() == 2 && params.d() == 2,
            Family::Peano => params.k() == 3,
            Family::Morton => params.k() == 2,
        };
        if !ok {
            return Err(Error::CurveMismatch {
                family: family.name().into(),
                k: params.k(),
                d: params.d(),
            });
        }
        Ok(CurveSpec { family, params })
    }

    /// Parses a family name and binds it.
    pub fn from_name(name: &str, params: SpaceParams) -> Result<CurveSpec> {
        CurveSpec::new(name.parse()?, params)
    }

    /// The family's default space: `hilbert2d` → (2,2), `peano` → (3,d),
    /// `morton` → (2,d).
    pub fn family(&self) -> Family {
        self.family
    }

    /// Space parameters.
    pub fn params(&self) -> SpaceParams {
        self.params
    }

    /// Identifier of the initial motif state (always entering at the
    /// all-zeros corner).
    pub fn base_orientation(&self) -> &'static str {
        "origin"
    }

    /// Whether this family is continuous.
    pub fn is_continuous(&self) -> bool {
        self.family.is_continuous()
    }

    fn k(&self) -> u32 {
        self.params.k()
    }

    fn d(&self) -> u32 {
        self.params.d()
    }

    /// Reference child digits of rank `j`.
    fn ref_child(&self, j: usize) -> Digits {
        let k = self.k() as usize;
        let d = self.d() as usize;
        match self.family {
            Family::Hilbert2d => match j {
                0 => smallvec::smallvec![0, 0],
                1 => smallvec::smallvec![0, 1],
                2 => smallvec::smallvec![1, 1],
                _ => smallvec::smallvec![1, 0],
            },
            Family::Morton => {
                let mut u: Digits = smallvec::smallvec![0; d];
                let mut r = j;
                for axis in (0..d).rev() {
                    u[axis] = (r % k) as u32;
                    r /= k;
                }
                u
            }
            Family::Peano => {
                let mut n: Digits = smallvec::smallvec![0; d];
                let mut r = j;
                for axis in (0..d).rev() {
                    n[axis] = (r % 3) as u32;
                    r /= 3;
                }
                let mut u: Digits = smallvec::smallvec![0; d];
                let mut parity = 0;
                for axis in 0..d {
                    u[axis] = if parity % 2 == 0 { n[axis] } else { 2 - n[axis] };
                    parity += n[axis];
                }
                u
            }
        }
    }

    /// Rank of the reference child with digits `u`.
    fn ref_rank(&self, u: &[u32]) -> usize {
        let k = self.k() as usize;
        match self.family {
            Family::Hilbert2d => match (u[0], u[1]) {
                (0, 0) => 0,
                (0, 1) => 1,
                (1, 1) => 2,
                _ => 3,
            },
            Family::Morton => u.iter().fold(0, |acc, &x| acc * k + x as usize),
            Family::Peano => {
                let mut parity = 0;
                let mut r = 0;
                for &x in u {
                    let n = if parity % 2 == 0 { x } else { 2 - x };
                    r = r * 3 + n as usize;
                    parity += n;
                }
                r
            }
        }
    }

    /// Motif transform inherited by the reference child of rank `j`.
    fn child_transform(&self, j: usize) -> Transform {
        let d = self.d();
        match self.family {
            Family::Hilbert2d => match j {
                0 => Transform {
                    perm: smallvec::smallvec![1, 0],
                    flip: 0,
                },
                3 => Transform {
                    perm: smallvec::smallvec![1, 0],
                    flip: 0b11,
                },
                _ => Transform::identity(2),
            },
            Family::Morton => Transform::identity(d),
            Family::Peano => {
                let u = self.ref_child(j);
                let total: u32 = u.iter().sum();
                let mut flip = 0;
                for (axis, &x) in u.iter().enumerate() {
                    if (total - x) % 2 == 1 {
                        flip |= 1 << axis;
                    }
                }
                Transform {
                    perm: (0..d as u8).collect(),
                    flip,
                }
            }
        }
    }

    /// Curve ranks of a box's ancestors' children along its path: entry `i`
    /// is the rank of the depth-`(i+1)` ancestor among its siblings.
    pub fn path_ranks(&self, b: &Cube) -> Vec<u32> {
        let k = self.k();
        let mut t = Transform::identity(self.d());
        let mut ranks = Vec::with_capacity(b.depth() as usize);
        for level in 1..=b.depth() {
            let a = b.digits_at(level);
            let u = t.invert_apply(k, &a);
            let j = self.ref_rank(&u);
            ranks.push(j as u32);
            if level < b.depth() {
                t = t.compose(&self.child_transform(j));
            }
        }
        ranks
    }

    /// Children of `b` in curve order, given the motif state at `b`.
    fn ordered_children(&self, b: &Cube, t: &Transform) -> Vec<(Cube, Transform)> {
        let k = self.k();
        (0..self.params.branching())
            .map(|j| {
                let digits = t.apply(k, &self.ref_child(j));
                (b.child_with_digits(&digits), t.compose(&self.child_transform(j)))
            })
            .collect()
    }

    /// Curve order of two boxes; `Nested` iff one contains the other.
    pub fn compare(&self, u: &Cube, v: &Cube) -> Result<CurveOrder> {
        self.params.ensure_same(&u.params())?;
        self.params.ensure_same(&v.params())?;
        let ru = self.path_ranks(u);
        let rv = self.path_ranks(v);
        Ok(compare_ranks(&ru, &rv))
    }

    /// Orders the cells of a grid along the curve.
    pub fn order_cells(&self, g: &Grid) -> Result<Dsfc> {
        self.check_grid(g)?;
        let internal = g.internal_nodes();
        let mut seq = Vec::with_capacity(g.len());
        let mut stack = vec![(Cube::root(self.params), Transform::identity(self.d()))];
        while let Some((b, t)) = stack.pop() {
            if internal.contains(&b) {
                let mut ch = self.ordered_children(&b, &t);
                ch.reverse();
                stack.extend(ch);
            } else {
                seq.push(b);
            }
        }
        Ok(Dsfc::new_unchecked(Some(self.clone()), g.clone(), seq))
    }

    /// Sorts arbitrary pairwise non-nested boxes along the curve.
    pub fn sort_boxes(&self, boxes: &mut [Cube]) {
        let mut keyed: Vec<(Vec<u32>, Cube)> = boxes
            .iter()
            .map(|b| (self.path_ranks(b), b.clone()))
            .collect();
        keyed.sort_by(|a, b| a.0.cmp(&b.0));
        for (slot, (_, b)) in boxes.iter_mut().zip(keyed) {
            *slot = b;
        }
    }

    fn check_grid(&self, g: &Grid) -> Result<()> {
        if g.params() != self.params {
            return Err(Error::CurveMismatch {
                family: self.family.name().into(),
                k: g.params().k(),
                d: g.params().d(),
            });
        }
        Ok(())
    }

    /// Whether the order of every non-nested pair of nodes of `g` is preserved
    /// in the DSFC of the refinement `g2`.
    pub fn check_refinement_consistency(&self, g: &Grid, g2: &Grid) -> Result<bool> {
        if !g2.refines(g)? {
            return Err(Error::NotARefinement);
        }
        let s1 = self.order_cells(g)?;
        let s2 = self.order_cells(g2)?;
        let mut nodes: Vec<Cube> = g.nodes().into_iter().collect();
        nodes.sort();
        let f1 = s1.first_positions();
        let f2 = s2.first_positions();
        for (i, u) in nodes.iter().enumerate() {
            for v in &nodes[i + 1..] {
                if u.covers(v) || v.covers(u) {
                    continue;
                }
                if (f1[u] < f1[v]) != (f2[u] < f2[v]) {
                    return Ok(false);
                }
            }
        }
        Ok(true)
    }

    /// Worst finite-scale Hölder ratio over sampled index pairs of the
    /// regular depth-`m` DSFC, see [`LocalityReport`].
    pub fn locality_check(&self, m: u32, samples: usize, seed: u64) -> Result<LocalityReport> {
        if !self.is_continuous() {
            return Err(Error::NonContinuous(self.family.name().into()));
        }
        let s = self.order_cells(&Grid::regular(self.params, m)?)?;
        let coords: Vec<Vec<u64>> = s
            .sequence()
            .iter()
            .map(|c| c.coords_u64().expect("locality grids use small depths"))
            .collect();
        let n = coords.len();
        let d = self.d();
        let ratio = |i: usize, j: usize| -> BigRational {
            let delta = coords[i]
                .iter()
                .zip(&coords[j])
                .map(|(a, b)| a.abs_diff(*b))
                .max()
                .unwrap_or(0);
            let gap = i.abs_diff(j) as u64 + 2;
            BigRational::new(BigInt::from(delta).pow(d), BigInt::from(gap))
        };
        let mut worst = BigRational::zero();
        let mut worst_pair = (0, 0);
        let mut consider = |i: usize, j: usize| {
            let r = ratio(i, j);
            if r > worst {
                worst = r;
                worst_pair = (i, j);
            }
        };
        if samples >= n * (n - 1) / 2 {
            for i in 0..n {
                for j in i + 1..n {
                    consider(i, j);
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..samples {
                consider(rng.gen_range(0..n), rng.gen_range(0..n));
            }
        }
        Ok(LocalityReport {
            worst_ratio: worst,
            worst_pair,
            bound: locality_bound(self.params),
        })
    }
}

/// Result of a locality check.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LocalityReport {
    /// Maximum of `d_∞(center_i, center_j)^d / ((|i−j|+2)·k^{−Md})`.
    pub worst_ratio: BigRational,
    /// Index pair (0-based) attaining the maximum.
    pub worst_pair: (usize, usize),
    /// `U^d` with `U = 2k^d / (1 − k^{1−d})`.
    pub bound: BigRational,
}

impl LocalityReport {
    /// Whether the worst ratio respects the bound.
    pub fn within_bound(&self) -> bool {
        self.worst_ratio <= self.bound
    }
}

/// `U^d` with `U = 2k^d / (1 − k^{1−d})`; for `d = 1` the bound is
/// unbounded and `U = 2k` is used.
pub fn locality_bound(params: SpaceParams) -> BigRational {
    let k = BigInt::from(params.k());
    let d = params.d();
    let kd = k.pow(d);
    let u = if d == 1 {
        BigRational::from_integer(BigInt::from(2) * &k)
    } else {
        // 2k^d / (1 − k^{1−d}) = 2k^d · k^{d−1} / (k^{d−1} − 1)
        let kd1 = k.pow(d - 1);
        BigRational::new(BigInt::from(2) * kd * &kd1, kd1 - 1)
    };
    let mut out = BigRational::from_integer(1.into());
    for _ in 0..d {
        out *= &u;
    }
    out
}

/// Compares two rank paths: prefix means nested.
pub(crate) fn compare_ranks(a: &[u32], b: &[u32]) -> CurveOrder {
    for (x, y) in a.iter().zip(b) {
        match x.cmp(y) {
            Ordering::Less => return CurveOrder::Before,
            Ordering::Greater => return CurveOrder::After,
            Ordering::Equal => {}
        }
    }
    CurveOrder::Nested
}

/// A discrete space-filling curve: a total ordering of a grid's cells.
#[derive(Clone, Debug)]
pub struct Dsfc {
    curve: Option<CurveSpec>,
    grid: Grid,
    seq: Vec<Cube>,
    pos: HashMap<Cube, usize>,
}

impl Dsfc {
    fn new_unchecked(curve: Option<CurveSpec>, grid: Grid, seq: Vec<Cube>) -> Dsfc {
        let pos = seq.iter().enumerate().map(|(i, c)| (c.clone(), i)).collect();
        Dsfc {
            curve,
            grid,
            seq,
            pos,
        }
    }

    /// Wraps an explicit ordering of a grid's cells (not tied to a curve
    /// family), validating that it is a permutation of the cells.
    pub fn from_sequence(grid: Grid, seq: Vec<Cube>) -> Result<Dsfc> {
        let set: HashSet<&Cube> = seq.iter().collect();
        if seq.len() != grid.len() || set.len() != seq.len() || !seq.iter().all(|c| grid.has_cell(c)) {
            return Err(Error::InvalidSpec(
                "sequence is not a permutation of the grid cells".into(),
            ));
        }
        Ok(Dsfc::new_unchecked(None, grid, seq))
    }

    /// The curve that produced this ordering, if any.
    pub fn curve(&self) -> Option<&CurveSpec> {
        self.curve.as_ref()
    }

    /// The ordered grid.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Cells `g_1..g_n` in order (0-based slice).
    pub fn sequence(&self) -> &[Cube] {
        &self.seq
    }

    /// 0-based position of a cell.
    pub fn position(&self, c: &Cube) -> Option<usize> {
        self.pos.get(c).copied()
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.seq.len()
    }

    /// A DSFC is never empty.
    pub fn is_empty(&self) -> bool {
        self.seq.is_empty()
    }

    /// Whether every consecutive pair is adjacent.
    pub fn check_continuity(&self) -> bool {
        self.first_discontinuity().is_none()
    }

    /// 0-based index `i` of the first non-adjacent pair `(g_i, g_{i+1})`.
    pub fn first_discontinuity(&self) -> Option<usize> {
        self.seq
            .windows(2)
            .position(|w| !w[0].adjacent_unchecked(&w[1]))
    }

    /// Checks `lca(g_α, g_β) = ⋁_{i=α..β} g_i` on the given 0-based inclusive
    /// intervals.
    pub fn check_space_filling(&self, intervals: &[(usize, usize)]) -> bool {
        intervals.iter().all(|&(a, b)| {
            let (a, b) = (a.min(b), a.max(b));
            let ends = self.seq[a].lca_unchecked(&self.seq[b]);
            let mut fold = self.seq[a].clone();
            for g in &self.seq[a..=b] {
                fold = fold.lca_unchecked(g);
            }
            fold == ends
        })
    }

    /// Exhaustive space-filling check over all intervals (quadratic).
    pub fn check_space_filling_exhaustive(&self) -> bool {
        for a in 0..self.seq.len() {
            let mut fold = self.seq[a].clone();
            for b in a..self.seq.len() {
                fold = fold.lca_unchecked(&self.seq[b]);
                if fold != self.seq[a].lca_unchecked(&self.seq[b]) {
                    return false;
                }
            }
        }
        true
    }

    /// For every node of the grid, the 0-based position of its first cell.
    pub fn first_positions(&self) -> HashMap<Cube, usize> {
        let mut first: HashMap<Cube, usize> = HashMap::new();
        for (i, c) in self.seq.iter().enumerate() {
            let mut cur = c.clone();
            loop {
                let e = first.entry(cur.clone()).or_insert(i);
                if *e < i || cur.is_root() {
                    break;
                }
                cur = cur.parent_unchecked();
            }
        }
        first
    }
}
