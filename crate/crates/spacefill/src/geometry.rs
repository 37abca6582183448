//! Exact k-adic boxes and their faces.
//!
//! A box of depth `l` is the axis-aligned cube
//! `[x_i k^{-l}, (x_i + 1) k^{-l}]` per axis, stored as its integer
//! coordinates `x_i` at its own depth. All comparisons between boxes of
//! different depths rescale to the deeper depth with exact integer arithmetic;
//! no floating point is used anywhere.
//!
//! Faces ("subcubes") of codimension `c` clamp `c` axes to the low or high
//! side of a box. They carry a canonical key so that the same geometric face
//! seen from two neighbouring boxes of equal depth compares equal.

use std::cmp::Ordering;
use std::fmt;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::One;
use ruint::aliases::U256;
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Integer type of a single box coordinate.
///
/// 256 bits admit depths up to 255 for `k = 2` and 161 for `k = 3`.
pub type Coord = U256;

/// Inline storage for per-axis coordinates.
pub type Coords = SmallVec<[Coord; 3]>;

/// Largest supported dimension (faces are keyed by 32-bit axis masks).
pub const MAX_DIM: u32 = 32;

/// Largest supported subdivision factor.
pub const MAX_K: u32 = 1 << 16;

/// The subdivision factor `k` and dimension `d` shared by all boxes of a space.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpaceParams {
    k: u32,
    d: u32,
}

impl fmt::Display for SpaceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(k={}, d={})", self.k, self.d)
    }
}

impl SpaceParams {
    /// Validates `k ≥ 2` and `1 ≤ d ≤ MAX_DIM`.
    pub fn new(k: u32, d: u32) -> Result<Self> {
        if !(2..=MAX_K).contains(&k) {
            return Err(Error::InvalidParams(format!("k = {k} must lie in 2..={MAX_K}")));
        }
        if !(1..=MAX_DIM).contains(&d) {
            return Err(Error::InvalidParams(format!("d = {d} must lie in 1..={MAX_DIM}")));
        }
        Ok(SpaceParams { k, d })
    }

    /// Subdivision factor.
    pub fn k(&self) -> u32 {
        self.k
    }

    /// Dimension.
    pub fn d(&self) -> u32 {
        self.d
    }

    /// Deepest depth whose per-axis extent `k^depth` is representable in a
    /// [`Coord`].
    pub fn max_depth_cap(&self) -> u32 {
        let k = Coord::from(self.k);
        let mut p = Coord::from(1u8);
        let mut l = 0;
        while let Some(next) = p.checked_mul(k) {
            p = next;
            l += 1;
        }
        l
    }

    /// Number of children of a box, `k^d`, if it fits in `usize`.
    pub fn branching(&self) -> usize {
        (self.k as usize)
            .checked_pow(self.d)
            .expect("k^d must fit in usize")
    }

    /// `k^e` as an exact coordinate.
    pub fn pow(&self, e: u32) -> Coord {
        kpow(self.k, e)
    }

    /// Per-axis number of boxes at `depth`, i.e. `k^depth`.
    pub fn side(&self, depth: u32) -> Coord {
        kpow(self.k, depth)
    }

    pub(crate) fn ensure_same(&self, other: &SpaceParams) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ParamMismatch(*self, *other))
        }
    }

    fn log2_k(&self) -> Option<u32> {
        self.k.is_power_of_two().then(|| self.k.trailing_zeros())
    }

    /// `x · k^e`.
    pub(crate) fn scale_up(&self, x: Coord, e: u32) -> Coord {
        match self.log2_k() {
            Some(s) => x << ((s * e) as usize),
            None => x * kpow(self.k, e),
        }
    }

    /// `⌊x / k^e⌋`.
    pub(crate) fn scale_down(&self, x: Coord, e: u32) -> Coord {
        match self.log2_k() {
            Some(s) => {
                let shift = (s * e) as usize;
                if shift >= 256 {
                    Coord::ZERO
                } else {
                    x >> shift
                }
            }
            None => x / kpow(self.k, e),
        }
    }

    /// `x mod k` as a small integer.
    pub(crate) fn low_digit(&self, x: Coord) -> u32 {
        match self.log2_k() {
            Some(_) => (x.as_limbs()[0] & (self.k as u64 - 1)) as u32,
            None => (x % Coord::from(self.k)).as_limbs()[0] as u32,
        }
    }
}

/// `k^e` for a (validated) subdivision factor.
pub(crate) fn kpow(k: u32, e: u32) -> Coord {
    if k.is_power_of_two() {
        return Coord::from(1u8) << ((k.trailing_zeros() * e) as usize);
    }
    Coord::from(k)
        .checked_pow(Coord::from(e))
        .expect("power exceeds coordinate range")
}

/// Converts a coordinate into an arbitrary-precision integer.
pub fn coord_to_big(x: Coord) -> BigUint {
    BigUint::from_bytes_le(&x.to_le_bytes::<32>())
}

/// Converts a non-negative arbitrary-precision integer into a coordinate.
pub fn coord_from_big(x: &BigUint) -> Option<Coord> {
    let bytes = x.to_bytes_le();
    if bytes.len() > 32 {
        return None;
    }
    let mut buf = [0u8; 32];
    buf[..bytes.len()].copy_from_slice(&bytes);
    Some(Coord::from_le_bytes(buf))
}

/// A k-adic box: depth plus integer coordinates at that depth.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cube {
    params: SpaceParams,
    depth: u32,
    coords: Coords,
}

impl fmt::Display for Cube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}(", self.depth)?;
        for (i, x) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl Ord for Cube {
    /// Canonical order: depth first, then lexicographic coordinates.
    fn cmp(&self, other: &Self) -> Ordering {
        self.depth
            .cmp(&other.depth)
            .then_with(|| self.coords.as_slice().cmp(other.coords.as_slice()))
            .then_with(|| self.params.cmp(&other.params))
    }
}

impl PartialOrd for Cube {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Cube {
    /// The depth-0 box: the whole unit hypercube.
    pub fn root(params: SpaceParams) -> Cube {
        Cube {
            params,
            depth: 0,
            coords: smallvec::smallvec![Coord::ZERO; params.d as usize],
        }
    }

    /// Builds a box, validating the depth cap and `0 ≤ x_i < k^depth`.
    pub fn new<I>(params: SpaceParams, depth: u32, coords: I) -> Result<Cube>
    where
        I: IntoIterator<Item = Coord>,
    {
        let coords: Coords = coords.into_iter().collect();
        if coords.len() != params.d as usize {
            return Err(Error::InvalidBox(format!(
                "expected {} coordinates, got {}",
                params.d,
                coords.len()
            )));
        }
        let cap = params.max_depth_cap();
        if depth > cap {
            return Err(Error::DepthCap { cap });
        }
        let side = params.side(depth);
        if let Some(x) = coords.iter().find(|x| **x >= side) {
            return Err(Error::InvalidBox(format!(
                "coordinate {x} outside [0, {side}) at depth {depth}"
            )));
        }
        Ok(Cube { params, depth, coords })
    }

    /// Convenience constructor from machine integers.
    pub fn from_u64(params: SpaceParams, depth: u32, coords: &[u64]) -> Result<Cube> {
        Cube::new(params, depth, coords.iter().map(|&x| Coord::from(x)))
    }

    pub(crate) fn from_parts(params: SpaceParams, depth: u32, coords: Coords) -> Cube {
        debug_assert_eq!(coords.len(), params.d as usize);
        Cube { params, depth, coords }
    }

    /// Space parameters of this box.
    pub fn params(&self) -> SpaceParams {
        self.params
    }

    /// Depth `l` (the root has depth 0).
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Integer coordinates at the box's own depth.
    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    /// Coordinates as `u64`, if they all fit.
    pub fn coords_u64(&self) -> Option<Vec<u64>> {
        self.coords.iter().map(|x| u64::try_from(*x).ok()).collect()
    }

    /// Whether this is the root box.
    pub fn is_root(&self) -> bool {
        self.depth == 0
    }

    /// Point-set containment `inner ⊆ self`.
    pub fn contains(&self, inner: &Cube) -> Result<bool> {
        self.params.ensure_same(&inner.params)?;
        Ok(self.covers(inner))
    }

    /// Unchecked containment for boxes known to share parameters.
    pub(crate) fn covers(&self, inner: &Cube) -> bool {
        if inner.depth < self.depth {
            return false;
        }
        let e = inner.depth - self.depth;
        self.coords
            .iter()
            .zip(inner.coords.iter())
            .all(|(&o, &i)| self.params.scale_down(i, e) == o)
    }

    /// The ancestor of this box at `depth ≤ self.depth()`.
    pub fn ancestor(&self, depth: u32) -> Cube {
        assert!(depth <= self.depth, "ancestor depth exceeds box depth");
        let e = self.depth - depth;
        Cube {
            params: self.params,
            depth,
            coords: self
                .coords
                .iter()
                .map(|&x| self.params.scale_down(x, e))
                .collect(),
        }
    }

    /// The deepest box containing both `self` and `other`.
    pub fn lca(&self, other: &Cube) -> Result<Cube> {
        self.params.ensure_same(&other.params)?;
        Ok(self.lca_unchecked(other))
    }

    pub(crate) fn lca_unchecked(&self, other: &Cube) -> Cube {
        let (deep, shallow) = if self.depth >= other.depth {
            (self, other)
        } else {
            (other, self)
        };
        let mut a = deep.ancestor(shallow.depth);
        let mut b = shallow.clone();
        while a != b {
            a = a.parent_unchecked();
            b = b.parent_unchecked();
        }
        a
    }

    /// The box one level up.
    pub fn parent(&self) -> Result<Cube> {
        if self.depth == 0 {
            return Err(Error::NoParent);
        }
        Ok(self.parent_unchecked())
    }

    pub(crate) fn parent_unchecked(&self) -> Cube {
        self.ancestor(self.depth - 1)
    }

    /// The `k^d` children tiling this box, in lexicographic digit order
    /// (axis 0 most significant).
    pub fn children(&self) -> Result<Vec<Cube>> {
        let cap = self.params.max_depth_cap();
        if self.depth >= cap {
            return Err(Error::DepthCap { cap });
        }
        Ok((0..self.params.branching())
            .map(|i| self.child_unchecked(i))
            .collect())
    }

    /// Child with mixed-radix digit index `i` (axis 0 most significant).
    pub(crate) fn child_unchecked(&self, mut i: usize) -> Cube {
        let k = self.params.k as usize;
        let d = self.params.d as usize;
        let mut coords: Coords = smallvec::smallvec![Coord::ZERO; d];
        for axis in (0..d).rev() {
            let digit = (i % k) as u64;
            i /= k;
            coords[axis] = self.params.scale_up(self.coords[axis], 1) + Coord::from(digit);
        }
        Cube {
            params: self.params,
            depth: self.depth + 1,
            coords,
        }
    }

    /// Child selected by explicit per-axis digits.
    pub(crate) fn child_with_digits(&self, digits: &[u32]) -> Cube {
        let coords = self
            .coords
            .iter()
            .zip(digits)
            .map(|(&x, &g)| self.params.scale_up(x, 1) + Coord::from(g))
            .collect();
        Cube {
            params: self.params,
            depth: self.depth + 1,
            coords,
        }
    }

    /// The digit of this box along `axis` at `level` (`1 ≤ level ≤ depth`):
    /// which child of its level-`(level-1)` ancestor it lies in.
    pub fn digit(&self, axis: usize, level: u32) -> u32 {
        debug_assert!(level >= 1 && level <= self.depth);
        let x = self.params.scale_down(self.coords[axis], self.depth - level);
        self.params.low_digit(x)
    }

    /// All digits at `level` (one per axis).
    pub fn digits_at(&self, level: u32) -> SmallVec<[u32; 4]> {
        (0..self.params.d as usize)
            .map(|axis| self.digit(axis, level))
            .collect()
    }

    /// Same-depth neighbour shifted by `delta ∈ {-1, +1}` along `axis`, if it
    /// lies inside the unit hypercube.
    pub fn shifted(&self, axis: usize, delta: i32) -> Option<Cube> {
        let x = self.coords[axis];
        let nx = match delta {
            -1 => x.checked_sub(Coord::from(1u8))?,
            1 => {
                let n = x + Coord::from(1u8);
                if n >= self.params.side(self.depth) {
                    return None;
                }
                n
            }
            0 => x,
            _ => panic!("shift must be -1, 0 or +1"),
        };
        let mut coords = self.coords.clone();
        coords[axis] = nx;
        Some(Cube {
            params: self.params,
            depth: self.depth,
            coords,
        })
    }

    /// Exact continuous volume `k^{-d·depth}`.
    pub fn volume(&self) -> BigRational {
        let den = num_bigint::BigInt::from(coord_to_big(self.params.side(self.depth)))
            .pow(self.params.d);
        BigRational::new(num_bigint::BigInt::one(), den)
    }

    /// The face of this box clamped low on the axes of `low` and high on the
    /// axes of `high` (bitmasks), in canonical form.
    pub fn face(&self, low: u32, high: u32) -> Subcube {
        Subcube::from_box_unchecked(self, low, high)
    }

    /// All `c`-subcubes (codimension-`c` faces) of this box; there are
    /// `binom(d, c) · 2^c` of them.
    pub fn subcubes(&self, c: u32) -> Result<Vec<Subcube>> {
        let d = self.params.d;
        if c > d {
            return Err(Error::CodimOutOfRange { c, d });
        }
        let mut out = Vec::new();
        for mask in axis_subsets(d, c) {
            for (low, high) in side_assignments(mask) {
                out.push(self.face(low, high));
            }
        }
        Ok(out)
    }

    /// Whether the closures meet in a `(d-1)`-dimensional piece: exactly one
    /// axis degenerates to a point and every other axis overlaps with positive
    /// length.
    pub fn adjacent(&self, other: &Cube) -> Result<bool> {
        self.params.ensure_same(&other.params)?;
        Ok(self.adjacent_unchecked(other))
    }

    pub(crate) fn adjacent_unchecked(&self, other: &Cube) -> bool {
        let depth = self.depth.max(other.depth);
        let mut degenerate = 0;
        for axis in 0..self.params.d as usize {
            let (a0, a1) = self.interval(axis, depth);
            let (b0, b1) = other.interval(axis, depth);
            let lo = a0.max(b0);
            let hi = a1.min(b1);
            match lo.cmp(&hi) {
                Ordering::Greater => return false,
                Ordering::Equal => degenerate += 1,
                Ordering::Less => {}
            }
        }
        degenerate == 1
    }

    /// Closed extent along `axis`, scaled to integers at `depth ≥ self.depth`.
    pub(crate) fn interval(&self, axis: usize, depth: u32) -> (Coord, Coord) {
        let e = depth - self.depth;
        let lo = self.params.scale_up(self.coords[axis], e);
        let hi = self.params.scale_up(self.coords[axis] + Coord::from(1u8), e);
        (lo, hi)
    }
}

/// Iterates over all `c`-element subsets of `0..d` as bitmasks.
pub(crate) fn axis_subsets(d: u32, c: u32) -> impl Iterator<Item = u32> {
    let limit: u64 = 1u64 << d;
    (0..limit)
        .map(|m| m as u32)
        .filter(move |m| m.count_ones() == c)
}

/// All ways to split `mask` into (low axes, high axes).
pub(crate) fn side_assignments(mask: u32) -> impl Iterator<Item = (u32, u32)> {
    let axes: Vec<u32> = (0..32).filter(|i| mask & (1 << i) != 0).collect();
    let n = axes.len();
    (0..(1u64 << n)).map(move |choice| {
        let mut low = 0;
        let mut high = 0;
        for (j, &a) in axes.iter().enumerate() {
            if choice & (1 << j) != 0 {
                high |= 1 << a;
            } else {
                low |= 1 << a;
            }
        }
        (low, high)
    })
}

/// A codimension-`c` face of a box: `c` axes clamped to their low or high
/// side.
///
/// Canonical form: a high clamp at coordinate `a` is rewritten as the low
/// clamp of coordinate `a + 1` whenever that box exists, so the same face
/// seen from two same-depth neighbours has one key.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Subcube {
    depth: u32,
    coords: Coords,
    low: u32,
    high: u32,
    params: SpaceParams,
}

impl fmt::Display for Subcube {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "l{}(", self.depth)?;
        for (i, x) in self.coords.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            if self.low & (1 << i) != 0 {
                write!(f, "{x}-")?;
            } else if self.high & (1 << i) != 0 {
                write!(f, "{x}+")?;
            } else {
                write!(f, "{x}")?;
            }
        }
        write!(f, ")")
    }
}

impl Subcube {
    /// Builds a face from an owning box description, validating disjoint
    /// masks and coordinates, and normalising to canonical form.
    pub fn new<I>(params: SpaceParams, depth: u32, coords: I, low: u32, high: u32) -> Result<Subcube>
    where
        I: IntoIterator<Item = Coord>,
    {
        if low & high != 0 {
            return Err(Error::InvalidBox("fixed_low and fixed_high overlap".into()));
        }
        let d = params.d;
        let valid = if d == 32 { u32::MAX } else { (1u32 << d) - 1 };
        if (low | high) & !valid != 0 {
            return Err(Error::InvalidBox("face mask names a non-existent axis".into()));
        }
        let owner = Cube::new(params, depth, coords)?;
        Ok(Subcube::from_box_unchecked(&owner, low, high))
    }

    fn from_box_unchecked(owner: &Cube, low: u32, mut high: u32) -> Subcube {
        let mut coords = owner.coords.clone();
        let mut low = low;
        let side = owner.params.side(owner.depth);
        for axis in 0..owner.params.d as usize {
            if high & (1 << axis) != 0 {
                let next = coords[axis] + Coord::from(1u8);
                if next < side {
                    coords[axis] = next;
                    high &= !(1 << axis);
                    low |= 1 << axis;
                }
            }
        }
        Subcube {
            depth: owner.depth,
            coords,
            low,
            high,
            params: owner.params,
        }
    }

    /// Space parameters.
    pub fn params(&self) -> SpaceParams {
        self.params
    }

    /// Depth of the owning box (the face has side `k^{-depth}`).
    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Canonical owning-box coordinates.
    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    /// Axes clamped to the low side (bitmask).
    pub fn fixed_low(&self) -> u32 {
        self.low
    }

    /// Axes clamped to the high side (bitmask; only on the domain's top face
    /// after normalisation).
    pub fn fixed_high(&self) -> u32 {
        self.high
    }

    /// Codimension `c = |fixed_low| + |fixed_high|`.
    pub fn codim(&self) -> u32 {
        (self.low | self.high).count_ones()
    }

    /// A codimension-0 face is exactly a box.
    pub fn as_cube(&self) -> Option<Cube> {
        (self.codim() == 0).then(|| Cube::from_parts(self.params, self.depth, self.coords.clone()))
    }

    /// Exact `(d-c)`-dimensional measure `k^{-depth·(d-c)}`; for `c = d`
    /// (a vertex) this is 1.
    pub fn measure(&self) -> BigRational {
        let e = self.params.d - self.codim();
        let den = num_bigint::BigInt::from(coord_to_big(self.params.side(self.depth))).pow(e);
        BigRational::new(num_bigint::BigInt::one(), den)
    }

    /// Closed extent along `axis`, scaled to integers at `depth ≥ self.depth`.
    pub(crate) fn interval(&self, axis: usize, depth: u32) -> (Coord, Coord) {
        let e = depth - self.depth;
        let x = self.coords[axis];
        let one = Coord::from(1u8);
        if self.low & (1 << axis) != 0 {
            let p = self.params.scale_up(x, e);
            (p, p)
        } else if self.high & (1 << axis) != 0 {
            let p = self.params.scale_up(x + one, e);
            (p, p)
        } else {
            (
                self.params.scale_up(x, e),
                self.params.scale_up(x + one, e),
            )
        }
    }

    /// Point-set containment `self ⊆ other`; codimensions may differ.
    pub fn contained_in(&self, other: &Subcube) -> Result<bool> {
        self.params.ensure_same(&other.params)?;
        let depth = self.depth.max(other.depth);
        Ok((0..self.params.d as usize).all(|axis| {
            let (a0, a1) = self.interval(axis, depth);
            let (b0, b1) = other.interval(axis, depth);
            b0 <= a0 && a1 <= b1
        }))
    }

    /// Whether this face lies (as a point set) inside the closed box `b`.
    pub fn inside_box(&self, b: &Cube) -> bool {
        let depth = self.depth.max(b.depth);
        (0..self.params.d as usize).all(|axis| {
            let (a0, a1) = self.interval(axis, depth);
            let (b0, b1) = b.interval(axis, depth);
            b0 <= a0 && a1 <= b1
        })
    }
}

/// Free-function form of [`Cube::contains`].
pub fn contains(outer: &Cube, inner: &Cube) -> Result<bool> {
    outer.contains(inner)
}

/// Free-function form of [`Cube::lca`].
pub fn lca(x: &Cube, y: &Cube) -> Result<Cube> {
    x.lca(y)
}

/// Free-function form of [`Cube::adjacent`].
pub fn adjacent(x: &Cube, y: &Cube) -> Result<bool> {
    x.adjacent(y)
}

/// Free-function form of [`Cube::subcubes`].
pub fn subcubes(x: &Cube, c: u32) -> Result<Vec<Subcube>> {
    x.subcubes(c)
}

/// Point-set containment of faces, `s ⊆ t`.
pub fn subcube_contained(s: &Subcube, t: &Subcube) -> Result<bool> {
    s.contained_in(t)
}

/// Binomial coefficient as `u64`.
pub fn binom(n: u64, r: u64) -> u64 {
    if r > n {
        return 0;
    }
    let r = r.min(n - r);
    (0..r).fold(1u64, |acc, i| acc * (n - i) / (i + 1))
}
