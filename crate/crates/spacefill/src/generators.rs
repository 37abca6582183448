//! Constructive grid and partition families.
//!
//! * class-regular grids `K(c, r, M)` (iterative and closed-form),
//! * the Cantor grid,
//! * depth-`M` boundary boxes `Θ_c(Q, M)` and shape-class-regular partitions
//!   `H_c(Q, M)`,
//! * befilled partitions `H(Q, V, M)` of prescribed volume,
//! * the double-subdivision staircase shapes `Q_N`,
//! * the tower family and seeded random partitions.

use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{axis_subsets, binom, side_assignments, Coord, Cube, SpaceParams};
use crate::partition::{boundary_intrinsic, classes_intrinsic, shape, Partition};
use crate::sfc::CurveSpec;
use crate::spacetree::{internal_closure, minimal_grid, Grid};

/// Parameters of a class-regular grid `K(c, r, M)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ClassRegularSpec {
    /// Space parameters.
    pub params: SpaceParams,
    /// Target class: refine where at least `c` of the first `r` coordinates
    /// vanish.
    pub c: u32,
    /// Number of leading axes considered.
    pub r: u32,
    /// Depth.
    pub m: u32,
}

impl ClassRegularSpec {
    /// Validates `0 ≤ c ≤ r ≤ d`.
    pub fn new(params: SpaceParams, c: u32, r: u32, m: u32) -> Result<ClassRegularSpec> {
        if c > r || r > params.d() {
            return Err(Error::InvalidSpec(format!(
                "class-regular needs 0 <= c <= r <= d, got c={c}, r={r}, d={}",
                params.d()
            )));
        }
        let cap = params.max_depth_cap();
        if m > cap {
            return Err(Error::DepthCap { cap });
        }
        Ok(ClassRegularSpec { params, c, r, m })
    }
}

/// `a(v, r)`: number of the first `r` coordinates of `v` equal to zero.
pub fn a_count(v: &Cube, r: u32) -> u32 {
    v.coords()[..r as usize].iter().filter(|x| x.is_zero()).count() as u32
}

/// `b(v, r)`: number of the first `r` coordinates of `v` that are at most
/// `k − 1`.
pub fn b_count(v: &Cube, r: u32) -> u32 {
    let km1 = Coord::from(v.params().k() - 1);
    v.coords()[..r as usize].iter().filter(|x| **x <= km1).count() as u32
}

/// `K(c, r, M)` by iterated subdivision: `M` rounds, each subdividing every
/// cell `v` of depth below `M` with `a(v, r) ≥ c`.
pub fn class_regular(spec: ClassRegularSpec) -> Result<Grid> {
    let mut cells = Vec::new();
    class_regular_visit(spec, |b| cells.push(b));
    Ok(Grid::from_unsorted(spec.params, cells))
}

/// Streams the cells of `K(c, r, M)` (iterative construction) without
/// materializing the grid. The subdivision rule only looks at the box
/// itself, so a depth-first walk yields the same cells as `M` rounds of
/// subdivision while keeping memory proportional to `M·k^d`.
pub fn class_regular_visit(spec: ClassRegularSpec, mut emit: impl FnMut(Cube)) {
    let n = spec.params.branching();
    let mut stack = vec![Cube::root(spec.params)];
    while let Some(v) = stack.pop() {
        if v.depth() < spec.m && a_count(&v, spec.r) >= spec.c {
            stack.extend((0..n).rev().map(|i| v.child_unchecked(i)));
        } else {
            emit(v);
        }
    }
}

/// `|Λ(l, a, b)|`: number of depth-`l` boxes with `a(v,r) = a` and
/// `b(v,r) = b`, by the product formula.
pub fn lambda_count(params: SpaceParams, r: u32, l: u32, a: u32, b: u32) -> BigUint {
    if a > b || b > r || l == 0 {
        return BigUint::from(u64::from(l == 0 && a == r && b == r));
    }
    let k = BigUint::from(params.k());
    let kl = k.pow(l);
    let big = &kl - &k;
    BigUint::from(binom(r as u64, a as u64))
        * BigUint::from(binom((r - a) as u64, (b - a) as u64))
        * (&k - 1u32).pow(b - a)
        * big.pow(r - b)
        * kl.pow(params.d() - r)
}

/// `|Λ(l, a, b)|` by direct enumeration of all depth-`l` boxes (small cases
/// only).
pub fn lambda_count_direct(params: SpaceParams, r: u32, l: u32, a: u32, b: u32) -> Result<u64> {
    let side = params.side(l).to::<u64>();
    let d = params.d() as usize;
    let total = side
        .checked_pow(d as u32)
        .filter(|t| *t <= 20_000_000)
        .ok_or_else(|| Error::Budget("direct enumeration too large".into()))?;
    let k = params.k() as u64;
    let mut count = 0;
    for mut idx in 0..total {
        let mut za = 0;
        let mut zb = 0;
        let mut xs = vec![0u64; d];
        for x in xs.iter_mut() {
            *x = idx % side;
            idx /= side;
        }
        for &x in &xs[..r as usize] {
            za += u32::from(x == 0);
            zb += u32::from(x < k);
        }
        count += u64::from(za == a && zb == b);
    }
    Ok(count)
}

/// Streams the cells of `K(c, r, M)` by the closed form: depth `l < M`
/// cells are `Λ(l, a, b)` with `a < c ≤ b`, depth-`M` cells are `Λ(M, a, b)`
/// with `c ≤ b`.
pub fn class_regular_closed_form_visit(spec: ClassRegularSpec, mut emit: impl FnMut(Cube)) {
    let ClassRegularSpec { params, c, r, m } = spec;
    if m == 0 {
        emit(Cube::root(params));
        return;
    }
    let d = params.d() as usize;
    let k = params.k();
    for l in 1..=m {
        let side = params.side(l);
        // Category per leading axis: 0 = zero, 1 = in 1..k-1, 2 = in k..k^l-1.
        let cats = 3usize.pow(r);
        for mut code in 0..cats {
            let mut cat = vec![0u8; r as usize];
            for x in cat.iter_mut() {
                *x = (code % 3) as u8;
                code /= 3;
            }
            let a = cat.iter().filter(|&&x| x == 0).count() as u32;
            let b = cat.iter().filter(|&&x| x <= 1).count() as u32;
            let keep = b >= c && (l == m || a < c);
            if !keep {
                continue;
            }
            // Per-axis value ranges [lo, hi).
            let mut ranges: Vec<(Coord, Coord)> = Vec::with_capacity(d);
            for axis in 0..d {
                let range = match cat.get(axis) {
                    Some(0) => (Coord::ZERO, Coord::from(1u8)),
                    Some(1) => (Coord::from(1u8), Coord::from(k)),
                    Some(_) => (Coord::from(k), side),
                    None => (Coord::ZERO, side),
                };
                ranges.push(range);
            }
            if ranges.iter().any(|(lo, hi)| lo >= hi) {
                continue;
            }
            let mut cur: Vec<Coord> = ranges.iter().map(|r| r.0).collect();
            'odometer: loop {
                emit(Cube::from_parts(params, l, cur.iter().copied().collect()));
                for axis in (0..d).rev() {
                    cur[axis] += Coord::from(1u8);
                    if cur[axis] < ranges[axis].1 {
                        continue 'odometer;
                    }
                    cur[axis] = ranges[axis].0;
                }
                break;
            }
        }
    }
}

/// `K(c, r, M)` from the closed form.
pub fn class_regular_closed_form(spec: ClassRegularSpec) -> Result<Grid> {
    let mut cells = Vec::new();
    class_regular_closed_form_visit(spec, |b| cells.push(b));
    Grid::from_cells(spec.params, cells)
}

/// `as(K) = Σ_v a(v, r)`.
pub fn a_surface(k: &Grid, r: u32) -> u64 {
    k.cells().iter().map(|v| a_count(v, r) as u64).sum()
}

/// The Cantor grid (`k = 3`, `d = 2`): `M` rounds of subdividing every cell
/// whose closure meets `{x_1 = 0} × Cantor set`.
///
/// A depth-`l` cell at `(0, t)` meets it in a non-degenerate piece iff all
/// `l` base-3 digits of `t` lie in `{0, 2}`.
pub fn cantor_grid(params: SpaceParams, m: u32) -> Result<Grid> {
    if params.k() != 3 || params.d() != 2 {
        return Err(Error::InvalidSpec("the Cantor grid needs k = 3, d = 2".into()));
    }
    let n = params.branching();
    let mut cells = Vec::new();
    let mut frontier = vec![Cube::root(params)];
    for _ in 0..m {
        let mut next = Vec::new();
        for v in frontier {
            if cantor_member(&v) {
                next.extend((0..n).map(|i| v.child_unchecked(i)));
            } else {
                cells.push(v);
            }
        }
        frontier = next;
    }
    cells.extend(frontier);
    Ok(Grid::from_unsorted(params, cells))
}

fn cantor_member(v: &Cube) -> bool {
    if !v.coords()[0].is_zero() {
        return false;
    }
    (1..=v.depth()).all(|level| v.digit(1, level) != 1)
}

/// Shared view of a shape `Q` for depth-`M` box queries.
struct ShapeView {
    params: SpaceParams,
    q: HashSet<Cube>,
    min_depth: u32,
}

impl ShapeView {
    fn new(q: &[Cube]) -> Result<ShapeView> {
        let first = q.first().ok_or(Error::Empty)?;
        Ok(ShapeView {
            params: first.params(),
            q: q.iter().cloned().collect(),
            min_depth: q.iter().map(|b| b.depth()).min().unwrap_or(0),
        })
    }

    /// Whether `b ⊆ content(Q)`.
    fn inside(&self, b: &Cube) -> bool {
        let mut cur = b.clone();
        loop {
            if self.q.contains(&cur) {
                return true;
            }
            if cur.depth() <= self.min_depth {
                return false;
            }
            cur = cur.parent_unchecked();
        }
    }

    /// Whether some `c`-face of `b` has every other orthant box (same depth)
    /// outside `content(Q)` or outside the domain.
    fn has_exposed_face(&self, b: &Cube, c: u32) -> bool {
        if c == 0 {
            return true;
        }
        let d = self.params.d();
        axis_subsets(d, c).any(|mask| {
            side_assignments(mask).any(|(_, high)| {
                let axes: Vec<usize> = (0..d as usize).filter(|a| mask & (1 << a) != 0).collect();
                (1u32..(1 << c)).all(|eps| {
                    let mut s = b.clone();
                    for (j, &axis) in axes.iter().enumerate() {
                        if eps & (1 << j) != 0 {
                            let delta = if high & (1 << axis) != 0 { 1 } else { -1 };
                            match s.shifted(axis, delta) {
                                Some(n) => s = n,
                                None => return true,
                            }
                        }
                    }
                    !self.inside(&s)
                })
            })
        })
    }

    /// `class(v, Θ(Q, M))` for a depth-`M` box `v ⊆ content(Q)`.
    fn theta_class(&self, v: &Cube) -> u32 {
        (1..=self.params.d())
            .rev()
            .find(|&c| self.has_exposed_face(v, c))
            .unwrap_or(0)
    }
}

/// `Θ_c(Q, M)`: the depth-`M` boxes inside `content(Q)` of class `≥ c`
/// within `Θ(Q, M)`, in canonical order.
///
/// A box can only contain such a box if one of its own `c`-faces is exposed
/// in the same sense, so the descent prunes everything else.
pub fn theta_c(q: &[Cube], m: u32, c: u32) -> Result<Vec<Cube>> {
    let view = ShapeView::new(q)?;
    let d = view.params.d();
    if c > d {
        return Err(Error::CodimOutOfRange { c, d });
    }
    if q.iter().any(|b| b.depth() > m) {
        return Err(Error::InvalidSpec(format!("M = {m} is below the depth of Q")));
    }
    let n = view.params.branching();
    let mut out = Vec::new();
    let mut stack: Vec<Cube> = q.to_vec();
    while let Some(b) = stack.pop() {
        if b.depth() == m {
            if view.theta_class(&b) >= c {
                out.push(b);
            }
        } else if view.has_exposed_face(&b, c) {
            stack.extend((0..n).map(|i| b.child_unchecked(i)));
        }
    }
    out.sort();
    Ok(out)
}

/// `Θ(Q, M)`: every depth-`M` box inside `content(Q)`.
pub fn theta(q: &[Cube], m: u32) -> Result<Vec<Cube>> {
    theta_c(q, m, 0)
}

/// The classified shape `Q*` (the shape treated as a partition over its
/// minimal grid, then classified).
pub fn classified_shape(q: &[Cube]) -> Result<Vec<Cube>> {
    let first = q.first().ok_or(Error::Empty)?;
    let grid = minimal_grid(first.params(), q)?;
    let part = Partition::from_cells(grid, None, shape(q)?)?;
    Ok(part.classify()?.classified().to_vec())
}

/// `H_c(Q, M)`: the cells of `𝔾(Q* ∪ Θ_c(Q, M))` inside `content(Q)`.
pub fn shape_class_regular(q: &[Cube], m: u32, c: u32) -> Result<Vec<Cube>> {
    let q = shape(q)?;
    let qstar = classified_shape(&q)?;
    let depth = qstar.iter().map(|b| b.depth()).max().unwrap_or(0);
    if m < depth {
        return Err(Error::InvalidSpec(format!(
            "M = {m} is below the classification depth {depth}"
        )));
    }
    let params = q[0].params();
    if c == 0 {
        let volume = regular_volume(&q, m);
        if volume > BigUint::from(5_000_000u32) {
            return Err(Error::Budget(format!("H_0 has {volume} cells")));
        }
    }
    let mut boxes = qstar;
    boxes.extend(theta_c(&q, m, c)?);
    let grid = minimal_grid(params, &boxes)?;
    grid.restrict(&q)
}

/// `V_0(Q, M) = Σ_q k^{d(M − depth q)}`.
pub fn regular_volume(q: &[Cube], m: u32) -> BigUint {
    q.iter()
        .map(|b| BigUint::from(b.params().branching()).pow(m - b.depth()))
        .sum()
}

/// The minimal-volume partition `H_{d+1}(Q, M)`: `Q*` with its deepest
/// class-`d` cell (first along the curve among ties) refined toward its
/// vertex down to depth `M`.
pub fn vertex_lineage(q: &[Cube], m: u32, curve: &CurveSpec) -> Result<Vec<Cube>> {
    let qstar = classified_shape(&shape(q)?)?;
    let params = qstar[0].params();
    let d = params.d();
    let depth = qstar.iter().map(|b| b.depth()).max().unwrap_or(0);
    if m < depth {
        return Err(Error::InvalidSpec(format!(
            "M = {m} is below the classification depth {depth}"
        )));
    }
    let classes = classes_intrinsic(&qstar)?;
    let mut ordered = qstar.clone();
    curve.sort_boxes(&mut ordered);
    let g = ordered
        .iter()
        .filter(|c| classes[*c] == d)
        .max_by(|a, b| a.depth().cmp(&b.depth()).then(std::cmp::Ordering::Greater))
        .cloned()
        .ok_or_else(|| Error::InvalidSpec("classified shape has no vertex cell".into()))?;
    // Locate one owned vertex: its reference box is the corner child chain.
    let vertices = boundary_intrinsic(&qstar, d)?;
    let piece = vertices
        .pieces()
        .iter()
        .find(|p| p.owner == g)
        .expect("class-d cells own a vertex");
    let corner: Vec<u32> = (0..d as usize)
        .map(|axis| {
            if piece.face.fixed_high() & (1 << axis) != 0
                || piece.face.coords()[axis] != piece.reference.coords()[axis]
            {
                params.k() - 1
            } else {
                0
            }
        })
        .collect();
    let mut cells: Vec<Cube> = qstar.into_iter().filter(|c| *c != g).collect();
    let mut cur = g;
    while cur.depth() < m {
        let kids = cur.children()?;
        let next = cur.child_with_digits(&corner);
        cells.extend(kids.into_iter().filter(|c| *c != next));
        cur = next;
    }
    cells.push(cur);
    cells.sort();
    Ok(cells)
}

/// Volumes `V_0 ≥ V_1 ≥ … ≥ V_d ≥ V_{d+1}` of the shape-class-regular chain.
pub fn volume_chain(q: &[Cube], m: u32, curve: &CurveSpec) -> Result<Vec<BigUint>> {
    let q = shape(q)?;
    let d = q[0].params().d();
    let mut out = vec![regular_volume(&q, m)];
    for c in 1..=d {
        out.push(BigUint::from(shape_class_regular(&q, m, c)?.len()));
    }
    out.push(BigUint::from(vertex_lineage(&q, m, curve)?.len()));
    Ok(out)
}

/// `H(Q, V, M)`: the befilled partition of volume exactly `V`.
///
/// With `c = max{c : V ≤ V_c}`, returns `H_c` when `V = V_c`; otherwise
/// starts from `H_{c+1}` and repeatedly subdivides the first cell along the
/// curve that currently has class `c` and strictly contains a box of
/// `Θ_c(Q, M)`.
pub fn befill(q: &[Cube], v: u64, m: u32, curve: &CurveSpec) -> Result<Vec<Cube>> {
    befill_ordered(q, v, m, curve, false)
}

/// [`befill`] with the eligible cells scanned in reverse curve order when
/// `reverse` is set. Any eligible order reaches the same surface; this
/// variant exists to check that.
pub fn befill_ordered(
    q: &[Cube],
    v: u64,
    m: u32,
    curve: &CurveSpec,
    reverse: bool,
) -> Result<Vec<Cube>> {
    let q = shape(q)?;
    let params = q[0].params();
    curve.params().ensure_same(&params)?;
    let d = params.d();
    let kd1 = params.branching() as u64 - 1;
    let chain = volume_chain(&q, m, curve)?;
    let vb = BigUint::from(v);
    let vmin = &chain[d as usize + 1];
    let inadmissible = |reason: String| Error::InadmissibleVolume { v, reason };
    if vb < *vmin || vb > chain[0] {
        return Err(inadmissible(format!(
            "outside [{}, {}]",
            vmin, chain[0]
        )));
    }
    if (&vb - vmin) % BigUint::from(kd1) != BigUint::zero() {
        return Err(inadmissible(format!(
            "not congruent to {vmin} modulo {kd1}"
        )));
    }
    let c = (0..=d).rev().find(|&c| vb <= chain[c as usize]).expect("V ≤ V_0");
    if vb == chain[c as usize] {
        return shape_class_regular(&q, m, c);
    }
    let mut cur = if c == d {
        vertex_lineage(&q, m, curve)?
    } else {
        shape_class_regular(&q, m, c + 1)?
    };
    let targets = if c == 0 {
        None
    } else {
        Some(internal_closure(theta_c(&q, m, c)?.iter()))
    };
    while (cur.len() as u64) < v {
        let classes = classes_intrinsic(&cur)?;
        let mut ordered = cur.clone();
        curve.sort_boxes(&mut ordered);
        if reverse {
            ordered.reverse();
        }
        let pick = ordered
            .into_iter()
            .find(|g| {
                classes[g] == c
                    && g.depth() < m
                    && targets.as_ref().is_none_or(|t| t.contains(g))
            })
            .ok_or_else(|| inadmissible("no eligible cell left to subdivide".into()))?;
        cur.retain(|g| *g != pick);
        cur.extend(pick.children()?);
        cur.sort();
    }
    Ok(cur)
}

/// The staircase shape `Q_N` (`N` even): `G_0 = {ℍ}`, and `G_n` replaces the
/// cell of curve index `n/2 − 1` of `G_{n−2}` by a uniform depth-2 grid;
/// `Q_N` is the first `N/2` cells of `G_N`.
pub fn mu2_shape(n: u32, curve: &CurveSpec) -> Result<Vec<Cube>> {
    if n < 2 || n % 2 == 1 {
        return Err(Error::InvalidSpec(format!("N = {n} must be even and at least 2")));
    }
    if !curve.is_continuous() {
        return Err(Error::NonContinuous(curve.family().name().into()));
    }
    let params = curve.params();
    let mut grid = Grid::unit(params);
    for step in (2..=n).step_by(2) {
        let seq = curve.order_cells(&grid)?;
        let target = seq.sequence()[(step / 2 - 1) as usize].clone();
        let kids = target.children()?;
        grid = grid.subdivide(&target)?.subdivide_all(&kids)?;
    }
    let seq = curve.order_cells(&grid)?;
    let q = seq.sequence()[..(n / 2) as usize].to_vec();
    let mut sorted = q.clone();
    sorted.sort();
    if shape(&q)? != sorted {
        return Err(Error::InvalidSpec("staircase cells do not form a shape".into()));
    }
    Ok(q)
}

/// The tower partition of depth `M` (`k = 2`, `d = 2`): cell `m = 1..M` has
/// depth `m` and coordinates `(0, 2^m − 2)`, a column of boxes shrinking
/// toward the top-left corner; the grid is their minimal grid.
pub fn tower(m: u32) -> Result<Partition> {
    if m == 0 {
        return Err(Error::InvalidSpec("tower depth must be at least 1".into()));
    }
    let params = SpaceParams::new(2, 2)?;
    let cells: Vec<Cube> = (1..=m)
        .map(|l| {
            let y = (Coord::from(1u8) << l as usize) - Coord::from(2u8);
            Cube::new(params, l, [Coord::ZERO, y])
        })
        .collect::<Result<_>>()?;
    let grid = minimal_grid(params, &cells)?;
    let curve = CurveSpec::from_name("hilbert2d", params)?;
    Partition::from_cells(grid, Some(curve), cells)
}

/// A seeded random partition: a random grid of `t` subdivisions (cells below
/// `max_depth`) and a uniformly random index interval.
pub fn random_partition(curve: &CurveSpec, seed: u64, t: usize, max_depth: u32) -> Result<Partition> {
    let grid = Grid::random(curve.params(), seed, t, max_depth)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let n = grid.len();
    let a = rng.gen_range(1..=n);
    let b = rng.gen_range(1..=n);
    Partition::from_range(grid, curve.clone(), a.min(b), a.max(b))
}

/// Converts a volume to `u64` when it fits.
pub fn volume_u64(v: &BigUint) -> Option<u64> {
    v.to_u64()
}

/// `V_{d+1}(Q, M)` and `V_0(Q, M)` together with the congruence modulus.
pub fn admissible_range(q: &[Cube], m: u32, curve: &CurveSpec) -> Result<(BigUint, BigUint, u64)> {
    let chain = volume_chain(q, m, curve)?;
    let kd1 = q[0].params().branching() as u64 - 1;
    Ok((chain.last().cloned().unwrap_or_else(BigUint::one), chain[0].clone(), kd1))
}
