//! Curve partitions, shapes, c-boundaries, cell classes and classification.
//!
//! # Boundary reading
//!
//! A codimension-`c` face `s` of a cell `g ∈ X` is surrounded by `2^c`
//! orthants: `g` itself and the same-depth boxes obtained by stepping across
//! any non-empty subset of the `c` clamped axes. A piece of `s` belongs to
//! `∂^c X` iff no *other* orthant around it lies in a cell of `X`, i.e. the
//! piece belongs to `g` and to no other element of `X`. Whenever some orthant
//! is subdivided further in the reference grid, `s` is split into the
//! `k^{d-c}` pieces of the next depth and each is resolved again, so pieces
//! are reported at the finest incident resolution. Each piece has a unique
//! owner cell, so the face set is a plain list.

use std::collections::{BTreeMap, HashMap, HashSet};

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{axis_subsets, side_assignments, Cube, SpaceParams, Subcube};
use crate::sfc::{CurveSpec, Dsfc};
use crate::spacetree::{minimal_grid, CellJson, Grid, GridJson};

/// A boundary face piece together with its owning cell.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FacePiece {
    /// The face (canonical key).
    pub face: Subcube,
    /// The cell of `X` containing the piece.
    pub owner: Cube,
    /// The same-depth box inside `owner` that has the piece as a face.
    pub reference: Cube,
}

/// The `c`-boundary `∂^c X` of a cell set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaceSet {
    codim: u32,
    pieces: Vec<FacePiece>,
}

impl FaceSet {
    /// Codimension `c` of every member.
    pub fn codim(&self) -> u32 {
        self.codim
    }

    /// Number of faces.
    pub fn len(&self) -> usize {
        self.pieces.len()
    }

    /// Whether the boundary is empty.
    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Pieces with owners, sorted by face key.
    pub fn pieces(&self) -> &[FacePiece] {
        &self.pieces
    }

    /// The faces, sorted by canonical key.
    pub fn faces(&self) -> Vec<Subcube> {
        self.pieces.iter().map(|p| p.face.clone()).collect()
    }

    /// Exact `(d-c)`-dimensional measure; for `c = d` the vertex count.
    pub fn measure(&self) -> BigRational {
        self.pieces
            .iter()
            .fold(BigRational::zero(), |acc, p| acc + p.face.measure())
    }
}

/// How a same-depth box sits in the reference grid.
enum Resolved {
    /// Covered by a cell; `true` iff that cell belongs to `X`.
    Leaf(bool),
    /// Strictly subdivided in the reference grid.
    Split,
}

/// Boundary evaluation context: a reference grid and a cell subset.
struct Ctx<'a> {
    grid: &'a Grid,
    x: HashSet<&'a Cube>,
}

impl<'a> Ctx<'a> {
    fn new(grid: &'a Grid, x: &'a [Cube]) -> Result<Ctx<'a>> {
        if x.is_empty() {
            return Err(Error::Empty);
        }
        for c in x {
            grid.params().ensure_same(&c.params())?;
            if !grid.has_cell(c) {
                return Err(Error::NotSubset);
            }
        }
        Ok(Ctx {
            grid,
            x: x.iter().collect(),
        })
    }

    fn resolve(&self, b: &Cube) -> Resolved {
        match self.grid.cell_covering(b) {
            Some(cell) => Resolved::Leaf(self.x.contains(&cell)),
            None => Resolved::Split,
        }
    }

    /// Minimal pieces of the face `(low, high)` of cell `g` that lie in `∂X`.
    /// With `first_only`, stops after one piece.
    fn face_pieces(&self, g: &Cube, low: u32, high: u32, first_only: bool, out: &mut Vec<FacePiece>) {
        let params = g.params();
        let d = params.d();
        let k = params.k();
        let mask = low | high;
        let axes: Vec<usize> = (0..d as usize).filter(|a| mask & (1 << a) != 0).collect();
        let c = axes.len();
        let free: Vec<usize> = (0..d as usize).filter(|a| mask & (1 << a) == 0).collect();
        let mut stack = vec![g.clone()];
        while let Some(r) = stack.pop() {
            let mut any_split = false;
            let mut any_in = false;
            'orthants: for eps in 1u32..(1 << c) {
                let mut shifted = r.clone();
                for (j, &axis) in axes.iter().enumerate() {
                    if eps & (1 << j) != 0 {
                        let delta = if high & (1 << axis) != 0 { 1 } else { -1 };
                        match shifted.shifted(axis, delta) {
                            Some(s) => shifted = s,
                            None => continue 'orthants,
                        }
                    }
                }
                match self.resolve(&shifted) {
                    Resolved::Leaf(true) => {
                        any_in = true;
                        break;
                    }
                    Resolved::Leaf(false) => {}
                    Resolved::Split => any_split = true,
                }
            }
            if any_in {
                continue;
            }
            if !any_split {
                out.push(FacePiece {
                    face: r.face(low, high),
                    owner: g.clone(),
                    reference: r,
                });
                if first_only {
                    return;
                }
                continue;
            }
            // Descend into the children of `r` that touch the face.
            let mut digits = vec![0u32; d as usize];
            for &axis in &axes {
                digits[axis] = if high & (1 << axis) != 0 { k - 1 } else { 0 };
            }
            let count = (k as usize).pow(free.len() as u32);
            for mut idx in 0..count {
                for &axis in free.iter().rev() {
                    digits[axis] = (idx % k as usize) as u32;
                    idx /= k as usize;
                }
                stack.push(r.child_with_digits(&digits));
            }
        }
    }

    fn boundary(&self, x: &[Cube], c: u32) -> FaceSet {
        let d = self.grid.params().d();
        let mut pieces = Vec::new();
        for g in x {
            for mask in axis_subsets(d, c) {
                for (low, high) in side_assignments(mask) {
                    self.face_pieces(g, low, high, false, &mut pieces);
                }
            }
        }
        pieces.sort_by(|a, b| a.face.cmp(&b.face));
        FaceSet { codim: c, pieces }
    }

    fn has_piece(&self, g: &Cube, c: u32) -> bool {
        let d = self.grid.params().d();
        let mut buf = Vec::new();
        for mask in axis_subsets(d, c) {
            for (low, high) in side_assignments(mask) {
                self.face_pieces(g, low, high, true, &mut buf);
                if !buf.is_empty() {
                    return true;
                }
            }
        }
        false
    }

    fn class_of(&self, g: &Cube) -> u32 {
        let d = self.grid.params().d();
        (1..=d).rev().find(|&c| self.has_piece(g, c)).unwrap_or(0)
    }
}

fn check_codim(params: SpaceParams, c: u32) -> Result<()> {
    if c > params.d() {
        return Err(Error::CodimOutOfRange { c, d: params.d() });
    }
    Ok(())
}

/// `∂^c X` with respect to an explicit grid `g` (`X ⊆ g.cells`).
pub fn boundary(x: &[Cube], g: &Grid, c: u32) -> Result<FaceSet> {
    check_codim(g.params(), c)?;
    Ok(Ctx::new(g, x)?.boundary(x, c))
}

/// `∂^c X` with respect to the minimal grid of `X`.
pub fn boundary_intrinsic(x: &[Cube], c: u32) -> Result<FaceSet> {
    let first = x.first().ok_or(Error::Empty)?;
    let g = minimal_grid(first.params(), x)?;
    boundary(x, &g, c)
}

/// Class of `g ∈ X`: the largest `c` with `∂^c_X g ≠ ∅`.
pub fn class_of(g: &Cube, x: &[Cube], grid: &Grid) -> Result<u32> {
    let ctx = Ctx::new(grid, x)?;
    if !ctx.x.contains(g) {
        return Err(Error::NotACell(g.to_string()));
    }
    Ok(ctx.class_of(g))
}

/// Classes of every cell of `X` with respect to `grid`.
pub fn classes(x: &[Cube], grid: &Grid) -> Result<HashMap<Cube, u32>> {
    let ctx = Ctx::new(grid, x)?;
    Ok(x.iter().map(|g| (g.clone(), ctx.class_of(g))).collect())
}

/// Classes of every cell of `X` with respect to its minimal grid.
pub fn classes_intrinsic(x: &[Cube]) -> Result<HashMap<Cube, u32>> {
    let first = x.first().ok_or(Error::Empty)?;
    classes(x, &minimal_grid(first.params(), x)?)
}

/// The maximal boxes contained in `content(X)`: the unique decomposition of
/// minimum cardinality.
pub fn shape(x: &[Cube]) -> Result<Vec<Cube>> {
    let first = x.first().ok_or(Error::Empty)?;
    let params = first.params();
    for b in x {
        params.ensure_same(&b.params())?;
    }
    // Keep only maximal boxes.
    let all: HashSet<&Cube> = x.iter().collect();
    let mut by_depth: BTreeMap<u32, HashSet<Cube>> = BTreeMap::new();
    for b in x {
        let mut cur = b.clone();
        let mut covered = false;
        while !cur.is_root() {
            cur = cur.parent_unchecked();
            if all.contains(&cur) {
                covered = true;
                break;
            }
        }
        if !covered {
            by_depth.entry(b.depth()).or_default().insert(b.clone());
        }
    }
    let n = params.branching();
    let max_depth = by_depth.keys().next_back().copied().unwrap_or(0);
    for l in (1..=max_depth).rev() {
        let Some(level) = by_depth.remove(&l) else {
            continue;
        };
        let mut groups: HashMap<Cube, Vec<Cube>> = HashMap::new();
        for b in level {
            groups.entry(b.parent_unchecked()).or_default().push(b);
        }
        let mut keep = HashSet::new();
        for (parent, kids) in groups {
            if kids.len() == n {
                by_depth.entry(l - 1).or_default().insert(parent);
            } else {
                keep.extend(kids);
            }
        }
        by_depth.insert(l, keep);
    }
    let mut out: Vec<Cube> = by_depth.into_values().flatten().collect();
    out.sort();
    Ok(out)
}

/// A set of consecutive cells of a DSFC.
#[derive(Clone, Debug)]
pub struct Partition {
    grid: Grid,
    curve: Option<CurveSpec>,
    range: Option<(usize, usize)>,
    cells: Vec<Cube>,
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.curve == other.curve
            && self.range == other.range
            && self.cells == other.cells
    }
}

impl Partition {
    /// Cells `g_i..g_j` (1-based, inclusive) of the curve order of `grid`.
    pub fn from_range(grid: Grid, curve: CurveSpec, i: usize, j: usize) -> Result<Partition> {
        let s = curve.order_cells(&grid)?;
        Partition::from_dsfc(&s, i, j)
    }

    /// Cells `g_i..g_j` (1-based, inclusive) of an ordering.
    pub fn from_dsfc(s: &Dsfc, i: usize, j: usize) -> Result<Partition> {
        let n = s.len();
        if i == 0 || i > j || j > n {
            return Err(Error::InvalidRange { i, j, n });
        }
        Ok(Partition {
            grid: s.grid().clone(),
            curve: s.curve().cloned(),
            range: Some((i, j)),
            cells: s.sequence()[i - 1..j].to_vec(),
        })
    }

    /// An explicit cell list. With a curve, the cells must be consecutive
    /// in its order and the range is recorded; without one, any non-empty
    /// subset of the grid is accepted (for fixtures whose curve is not one of
    /// the built-in families).
    pub fn from_cells(grid: Grid, curve: Option<CurveSpec>, cells: Vec<Cube>) -> Result<Partition> {
        if cells.is_empty() {
            return Err(Error::Empty);
        }
        let mut seen = HashSet::new();
        for c in &cells {
            grid.params().ensure_same(&c.params())?;
            if !grid.has_cell(c) {
                return Err(Error::NotSubset);
            }
            if !seen.insert(c) {
                return Err(Error::InvalidSpec(format!("cell {c} listed twice")));
            }
        }
        match curve {
            Some(curve) => {
                let s = curve.order_cells(&grid)?;
                let mut pos: Vec<usize> = cells
                    .iter()
                    .map(|c| s.position(c).expect("cell of grid"))
                    .collect();
                pos.sort_unstable();
                if pos.windows(2).any(|w| w[1] != w[0] + 1) {
                    return Err(Error::NotConsecutive);
                }
                Partition::from_dsfc(&s, pos[0] + 1, pos[pos.len() - 1] + 1)
            }
            None => Ok(Partition {
                grid,
                curve: None,
                range: None,
                cells,
            }),
        }
    }

    /// The whole grid as one partition.
    pub fn whole(grid: Grid, curve: Option<CurveSpec>) -> Result<Partition> {
        match curve {
            Some(c) => {
                let n = grid.len();
                Partition::from_range(grid, c, 1, n)
            }
            None => {
                let cells = grid.cells().to_vec();
                Partition::from_cells(grid, None, cells)
            }
        }
    }

    /// The underlying grid.
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// The curve, when the partition is tied to a built-in family.
    pub fn curve(&self) -> Option<&CurveSpec> {
        self.curve.as_ref()
    }

    /// The 1-based inclusive index range, when known.
    pub fn range(&self) -> Option<(usize, usize)> {
        self.range
    }

    /// Cells (in curve order when a curve is known).
    pub fn cells(&self) -> &[Cube] {
        &self.cells
    }

    /// Space parameters.
    pub fn params(&self) -> SpaceParams {
        self.grid.params()
    }

    /// Maximal cell depth.
    pub fn depth(&self) -> u32 {
        self.cells.iter().map(|c| c.depth()).max().unwrap_or(0)
    }

    /// The shape of the partition's content.
    pub fn shape(&self) -> Vec<Cube> {
        shape(&self.cells).expect("partitions are non-empty")
    }

    /// Pre-classification `P̃` and classification `P*`.
    pub fn classify(&self) -> Result<ClassifiedView> {
        classify_cells(&self.cells).map(|(pre, classified, classes)| ClassifiedView {
            base: self.clone(),
            preclassified: pre,
            classified,
            classes,
        })
    }

    /// Serializes as grid JSON plus the curve and range (or explicit
    /// members when no curve is attached).
    pub fn to_json(&self) -> String {
        let g = GridJson::from_grid(&self.grid);
        let raw = PartitionJson {
            k: g.k,
            d: g.d,
            cells: g.cells,
            curve: self.curve.as_ref().map(|c| c.family().name().to_string()),
            range: self.range.map(|(i, j)| [i, j]),
            members: if self.range.is_some() {
                None
            } else {
                Some(self.cells.iter().map(CellJson::from_cube).collect())
            },
        };
        let mut s = serde_json::to_string(&raw).expect("partition serializes");
        s.push('\n');
        s
    }

    /// Parses and validates partition JSON.
    pub fn from_json(text: &str) -> Result<Partition> {
        let raw: PartitionJson =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        let grid = GridJson {
            k: raw.k,
            d: raw.d,
            cells: raw.cells,
        }
        .into_grid()?;
        let curve = raw
            .curve
            .as_deref()
            .map(|name| CurveSpec::from_name(name, grid.params()))
            .transpose()?;
        match (raw.range, raw.members) {
            (Some(_), Some(_)) => Err(Error::Format(
                "give either \"range\" or \"members\", not both".into(),
            )),
            (Some([i, j]), None) => {
                let curve = curve.ok_or_else(|| Error::Format("\"range\" needs a \"curve\"".into()))?;
                Partition::from_range(grid, curve, i, j)
            }
            (None, Some(members)) => {
                let cells = members
                    .iter()
                    .map(|c| c.to_cube(grid.params()))
                    .collect::<Result<Vec<_>>>()?;
                Partition::from_cells(grid, curve, cells)
            }
            (None, None) => Err(Error::Format("missing \"range\" or \"members\"".into())),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartitionJson {
    k: u32,
    d: u32,
    cells: Vec<CellJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    curve: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    range: Option<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    members: Option<Vec<CellJson>>,
}

/// `P̃`: `P` refined so every boundary facet is a whole facet of a cell.
pub fn preclassify(p: &[Cube]) -> Result<Vec<Cube>> {
    let first = p.first().ok_or(Error::Empty)?;
    let params = first.params();
    let g = minimal_grid(params, p)?;
    let facets = boundary(p, &g, 1)?;
    let mut boxes: Vec<Cube> = p.to_vec();
    boxes.extend(facets.pieces.into_iter().map(|piece| piece.reference));
    let g2 = minimal_grid(params, &boxes)?;
    let mut out = g2.restrict(p)?;
    out.sort();
    Ok(out)
}

/// Cells of `x` owning a parallel pair of facets of `∂x` (w.r.t. `𝔾(x)`).
pub fn non_classified(x: &[Cube]) -> Result<Vec<Cube>> {
    let facets = boundary_intrinsic(x, 1)?;
    let mut sides: HashMap<&Cube, (u32, u32)> = HashMap::new();
    for piece in &facets.pieces {
        let e = sides.entry(&piece.owner).or_default();
        let (lo, hi) = owner_sides(piece);
        e.0 |= lo;
        e.1 |= hi;
    }
    let mut out: Vec<Cube> = sides
        .into_iter()
        .filter(|(_, (lo, hi))| lo & hi != 0)
        .map(|(c, _)| c.clone())
        .collect();
    out.sort();
    Ok(out)
}

/// The clamped axes of a piece split by the side of its reference box they
/// lie on (canonical keys may express a high side as the neighbour's low).
fn owner_sides(piece: &FacePiece) -> (u32, u32) {
    let mut lo = 0;
    let mut hi = piece.face.fixed_high();
    let d = piece.face.params().d() as usize;
    for axis in 0..d {
        if piece.face.fixed_low() & (1 << axis) != 0 {
            if piece.face.coords()[axis] == piece.reference.coords()[axis] {
                lo |= 1 << axis;
            } else {
                hi |= 1 << axis;
            }
        }
    }
    (lo, hi)
}

type Classification = (Vec<Cube>, Vec<Cube>, BTreeMap<Cube, u32>);

fn classify_cells(p: &[Cube]) -> Result<Classification> {
    let pre = preclassify(p)?;
    let bad: HashSet<Cube> = non_classified(&pre)?.into_iter().collect();
    let mut classified = Vec::with_capacity(pre.len() + bad.len() * p[0].params().branching());
    for c in &pre {
        if bad.contains(c) {
            classified.extend(c.children()?);
        } else {
            classified.push(c.clone());
        }
    }
    classified.sort();
    let classes = classes_intrinsic(&classified)?.into_iter().collect();
    Ok((pre, classified, classes))
}

/// Result of classifying a partition.
#[derive(Clone, Debug)]
pub struct ClassifiedView {
    base: Partition,
    preclassified: Vec<Cube>,
    classified: Vec<Cube>,
    classes: BTreeMap<Cube, u32>,
}

impl ClassifiedView {
    /// The classified partition's source.
    pub fn base(&self) -> &Partition {
        &self.base
    }

    /// `P̃` in canonical order.
    pub fn preclassified(&self) -> &[Cube] {
        &self.preclassified
    }

    /// `P*` in canonical order.
    pub fn classified(&self) -> &[Cube] {
        &self.classified
    }

    /// Class labels of the cells of `P*`.
    pub fn classes(&self) -> &BTreeMap<Cube, u32> {
        &self.classes
    }

    /// Number of cells per class `0..=d`.
    pub fn histogram(&self) -> Vec<usize> {
        let mut h = vec![0; self.base.params().d() as usize + 1];
        for &c in self.classes.values() {
            h[c as usize] += 1;
        }
        h
    }

    /// `ds(P*) = Σ_g class(g, P*)`.
    pub fn class_sum(&self) -> u64 {
        self.classes.values().map(|&c| c as u64).sum()
    }

    /// JSON export: `P̃`, `P*` with per-cell classes, and the histogram.
    pub fn to_json(&self) -> String {
        let params = self.base.params();
        let raw = ClassifiedJson {
            k: params.k(),
            d: params.d(),
            preclassified: self.preclassified.iter().map(CellJson::from_cube).collect(),
            classified: self
                .classified
                .iter()
                .map(|c| ClassCellJson {
                    l: c.depth(),
                    x: CellJson::from_cube(c).x,
                    class: self.classes[c],
                })
                .collect(),
            histogram: self.histogram(),
        };
        let mut s = serde_json::to_string(&raw).expect("view serializes");
        s.push('\n');
        s
    }
}

#[derive(Serialize)]
struct ClassCellJson {
    l: u32,
    x: Vec<serde_json::Number>,
    class: u32,
}

#[derive(Serialize)]
struct ClassifiedJson {
    k: u32,
    d: u32,
    preclassified: Vec<CellJson>,
    classified: Vec<ClassCellJson>,
    histogram: Vec<usize>,
}

/// `A(l, r)`: number of class-`r` cells of depth `l` in `Q*`, where `Q` is
/// treated as a partition over its minimal grid.
pub fn class_table(q: &[Cube]) -> Result<BTreeMap<(u32, u32), u64>> {
    let (_, _, classes) = classify_cells(&shape(q)?)?;
    let mut a = BTreeMap::new();
    for (cell, r) in classes {
        *a.entry((cell.depth(), r)).or_insert(0) += 1;
    }
    Ok(a)
}

/// Per-member growth caused by classification.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GrowthRow {
    /// Depth of the partition.
    pub depth: u32,
    /// `dv(P*) − dv(P)`.
    pub dv_delta: i64,
    /// `ds(P*) − ds(P)`.
    pub ds_delta: i64,
    /// Number of cells of `P̃` owning a parallel facet pair.
    pub non_classified: usize,
}

/// Reports `dv` and `ds` growth of classification over a family.
pub fn classification_growth(family: &[Partition]) -> Result<Vec<GrowthRow>> {
    family
        .iter()
        .map(|p| {
            let (pre, classified, classes) = classify_cells(p.cells())?;
            let ds_p = boundary_intrinsic(p.cells(), 1)?.len() as i64;
            let ds_star: i64 = classes.values().map(|&c| c as i64).sum();
            Ok(GrowthRow {
                depth: p.depth(),
                dv_delta: classified.len() as i64 - p.cells().len() as i64,
                ds_delta: ds_star - ds_p,
                non_classified: non_classified(&pre)?.len(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p22() -> SpaceParams {
        SpaceParams::new(2, 2).unwrap()
    }

    fn b(l: u32, xs: &[u64]) -> Cube {
        Cube::from_u64(p22(), l, xs).unwrap()
    }

    fn example_p() -> Vec<Cube> {
        vec![b(3, &[2, 5]), b(2, &[0, 2]), b(1, &[0, 0])]
    }

    #[test]
    fn shape_examples() {
        let root = Cube::root(p22());
        assert_eq!(shape(&root.children().unwrap()).unwrap(), vec![root.clone()]);
        let mut p = example_p();
        p.sort();
        assert_eq!(shape(&p).unwrap(), p);
        let nested = Grid::regular(p22(), 2).unwrap();
        assert_eq!(shape(nested.cells()).unwrap(), vec![root]);
    }

    #[test]
    fn domain_boundary_of_depth1_grid() {
        let g = Grid::regular(p22(), 1).unwrap();
        let f = boundary(g.cells(), &g, 1).unwrap();
        assert_eq!(f.len(), 8);
        assert!(f.faces().iter().all(|s| s.depth() == 1));
    }

    #[test]
    fn example_p_boundaries() {
        let p = example_p();
        assert_eq!(boundary_intrinsic(&p, 1).unwrap().len(), 11);
        assert_eq!(boundary_intrinsic(&p, 2).unwrap().len(), 6);
        let cls = classes_intrinsic(&p).unwrap();
        assert!(cls.values().all(|&c| c == 2));
    }

    #[test]
    fn single_cell_boundary_counts() {
        for (k, d) in [(2, 2), (2, 3), (3, 2)] {
            let params = SpaceParams::new(k, d).unwrap();
            let g = Cube::from_u64(params, 2, &vec![1; d as usize]).unwrap();
            for c in 0..=d {
                let f = boundary_intrinsic(std::slice::from_ref(&g), c).unwrap();
                let expect = crate::geometry::binom(d as u64, c as u64) << c;
                assert_eq!(f.len() as u64, expect, "k={k} d={d} c={c}");
            }
        }
    }

    #[test]
    fn example_p_classification() {
        let p = example_p();
        let pre = preclassify(&p).unwrap();
        assert_eq!(pre.len(), 12);
        let (_, classified, classes) = classify_cells(&p).unwrap();
        assert_eq!(classified.len(), 15);
        let mut h = [0; 3];
        for &c in classes.values() {
            h[c as usize] += 1;
        }
        assert_eq!(h, [1, 8, 6]);
        let ds = boundary_intrinsic(&classified, 1).unwrap().len();
        assert_eq!(ds, 20);
        let (_, again, _) = classify_cells(&classified).unwrap();
        assert_eq!(again, classified);
    }

    #[test]
    fn class_table_examples() {
        let root = Cube::root(p22());
        let a = class_table(std::slice::from_ref(&root)).unwrap();
        assert_eq!(a, BTreeMap::from([((1, 2), 4)]));
        let p3 = SpaceParams::new(3, 2).unwrap();
        let a3 = class_table(&[Cube::root(p3)]).unwrap();
        assert_eq!(a3, BTreeMap::from([((1, 0), 1), ((1, 1), 4), ((1, 2), 4)]));
    }

    #[test]
    fn range_partitions() {
        let g = Grid::regular(p22(), 2).unwrap();
        let c = CurveSpec::from_name("hilbert2d", p22()).unwrap();
        let part = Partition::from_range(g.clone(), c.clone(), 3, 7).unwrap();
        assert_eq!(part.cells().len(), 5);
        assert!(Partition::from_range(g.clone(), c.clone(), 0, 3).is_err());
        assert!(Partition::from_range(g.clone(), c.clone(), 4, 3).is_err());
        assert!(Partition::from_range(g.clone(), c.clone(), 1, 17).is_err());
        let cells = part.cells().to_vec();
        let again = Partition::from_cells(g.clone(), Some(c.clone()), cells).unwrap();
        assert_eq!(again, part);
        let gap = vec![part.cells()[0].clone(), part.cells()[2].clone()];
        assert_eq!(
            Partition::from_cells(g, Some(c), gap),
            Err(Error::NotConsecutive)
        );
    }

    #[test]
    fn partition_json_round_trip() {
        let g = Grid::random(p22(), 11, 12, 5).unwrap();
        let c = CurveSpec::from_name("hilbert2d", p22()).unwrap();
        let part = Partition::from_range(g.clone(), c, 2, 9).unwrap();
        let text = part.to_json();
        assert_eq!(Partition::from_json(&text).unwrap(), part);
        let explicit = Partition::from_cells(
            minimal_grid(p22(), &example_p()).unwrap(),
            None,
            example_p(),
        )
        .unwrap();
        assert_eq!(Partition::from_json(&explicit.to_json()).unwrap(), explicit);
    }
}
