//! Grids: finite maximal antichains of boxes covering the unit hypercube.
//!
//! A [`Grid`] stores its cells in canonical order (depth-major, then
//! lexicographic coordinates) and answers membership queries by binary
//! search, so equality, hashing and serialization are structural. Every construction goes through
//! recursive descent from the root over a set of "internal" boxes (boxes that
//! get subdivided), which yields grids by construction.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Coord, Cube, SpaceParams};

/// A grid over the unit hypercube.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Grid {
    params: SpaceParams,
    cells: Vec<Cube>,
}

/// Outcome of checking a box set against the grid characterization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridCheck {
    /// Exact covered volume (sum of cell volumes).
    pub coverage: BigRational,
    /// A pair `(outer, inner)` violating the antichain condition, if any.
    pub containment: Option<(Cube, Cube)>,
}

impl GridCheck {
    /// Whether the set is a grid: full coverage and an antichain.
    pub fn is_grid(&self) -> bool {
        self.containment.is_none() && self.coverage.is_one()
    }
}

impl Grid {
    /// The one-cell grid `{ℍ}`.
    pub fn unit(params: SpaceParams) -> Grid {
        Grid::from_sorted(params, vec![Cube::root(params)])
    }

    /// Builds a grid from an arbitrary cell list, validating the grid
    /// characterization.
    pub fn from_cells(params: SpaceParams, cells: Vec<Cube>) -> Result<Grid> {
        for c in &cells {
            params.ensure_same(&c.params())?;
        }
        let check = check_boxes(params, &cells);
        if let Some((outer, inner)) = check.containment {
            return Err(Error::NotAGrid(format!("{outer} contains {inner}")));
        }
        if !check.coverage.is_one() {
            return Err(Error::NotAGrid(format!("coverage {}", check.coverage)));
        }
        Ok(Grid::from_unsorted(params, cells))
    }

    /// Builds from cells that are known to form a grid.
    pub(crate) fn from_unsorted(params: SpaceParams, mut cells: Vec<Cube>) -> Grid {
        cells.sort_unstable();
        cells.dedup();
        Grid::from_sorted(params, cells)
    }

    fn from_sorted(params: SpaceParams, cells: Vec<Cube>) -> Grid {
        Grid { params, cells }
    }

    /// Grid whose subdivided boxes are exactly `internal` (which must be closed
    /// under taking parents and contain the root, or be empty).
    pub(crate) fn from_internal(params: SpaceParams, internal: &HashSet<Cube>) -> Grid {
        let mut cells = Vec::new();
        let mut stack = vec![Cube::root(params)];
        let n = params.branching();
        while let Some(b) = stack.pop() {
            if internal.contains(&b) {
                for i in 0..n {
                    stack.push(b.child_unchecked(i));
                }
            } else {
                cells.push(b);
            }
        }
        Grid::from_unsorted(params, cells)
    }

    /// The regular grid of depth `m` (all `k^{dm}` cells at depth `m`).
    pub fn regular(params: SpaceParams, m: u32) -> Result<Grid> {
        let cap = params.max_depth_cap();
        if m > cap {
            return Err(Error::DepthCap { cap });
        }
        let mut level = vec![Cube::root(params)];
        for _ in 0..m {
            level = level
                .iter()
                .flat_map(|b| (0..params.branching()).map(move |i| b.child_unchecked(i)))
                .collect();
        }
        Ok(Grid::from_unsorted(params, level))
    }

    /// Space parameters.
    pub fn params(&self) -> SpaceParams {
        self.params
    }

    /// Cells in canonical order.
    pub fn cells(&self) -> &[Cube] {
        &self.cells
    }

    /// Number of cells.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    /// Grids always have at least one cell.
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Whether `b` is a cell of this grid.
    pub fn has_cell(&self, b: &Cube) -> bool {
        self.cells.binary_search(b).is_ok()
    }

    /// Maximal cell depth.
    pub fn depth(&self) -> u32 {
        self.cells.last().map_or(0, |c| c.depth())
    }

    /// The cell containing box `b`, if `b` is not strictly coarser than the
    /// cells covering it.
    pub fn cell_covering(&self, b: &Cube) -> Option<Cube> {
        let mut cur = b.clone();
        loop {
            if self.has_cell(&cur) {
                return Some(cur);
            }
            if cur.is_root() {
                return None;
            }
            cur = cur.parent_unchecked();
        }
    }

    /// Replaces cell `x` by its `k^d` children.
    pub fn subdivide(&self, x: &Cube) -> Result<Grid> {
        self.params.ensure_same(&x.params())?;
        if !self.has_cell(x) {
            return Err(Error::NotACell(x.to_string()));
        }
        let children = x.children()?;
        let mut cells: Vec<Cube> = self.cells.iter().filter(|c| *c != x).cloned().collect();
        cells.extend(children);
        Ok(Grid::from_unsorted(self.params, cells))
    }

    /// Subdivides several cells at once.
    pub fn subdivide_all(&self, xs: &[Cube]) -> Result<Grid> {
        let set: HashSet<&Cube> = xs.iter().collect();
        for x in &set {
            self.params.ensure_same(&x.params())?;
            if !self.has_cell(x) {
                return Err(Error::NotACell(x.to_string()));
            }
        }
        let mut cells = Vec::with_capacity(self.len() + xs.len() * self.params.branching());
        for c in &self.cells {
            if set.contains(c) {
                cells.extend(c.children()?);
            } else {
                cells.push(c.clone());
            }
        }
        Ok(Grid::from_unsorted(self.params, cells))
    }

    /// Strict ancestors of cells (the subdivided boxes).
    pub fn internal_nodes(&self) -> HashSet<Cube> {
        internal_closure(self.cells.iter())
    }

    /// All nodes: cells plus their strict ancestors.
    pub fn nodes(&self) -> HashSet<Cube> {
        let mut all = self.internal_nodes();
        all.extend(self.cells.iter().cloned());
        all
    }

    /// Upper bound `n / (1 − k^{−d})` on the node count.
    pub fn node_count_bound(&self) -> BigRational {
        let kd = BigInt::from(self.params.branching());
        BigRational::new(BigInt::from(self.len()) * &kd, kd - 1)
    }

    /// Whether every cell of `self` lies inside a cell of `coarse`.
    pub fn refines(&self, coarse: &Grid) -> Result<bool> {
        self.params.ensure_same(&coarse.params)?;
        Ok(self.cells.iter().all(|c| coarse.cell_covering(c).is_some()))
    }

    /// Coarsest common refinement.
    pub fn meet(&self, other: &Grid) -> Result<Grid> {
        self.params.ensure_same(&other.params)?;
        let mut internal = self.internal_nodes();
        internal.extend(other.internal_nodes());
        Ok(Grid::from_internal(self.params, &internal))
    }

    /// Cells of this grid contained in `content(q)`.
    ///
    /// Fails with [`Error::NotRepresentable`] if some box of `q` is strictly
    /// finer than the cell covering it.
    pub fn restrict(&self, q: &[Cube]) -> Result<Vec<Cube>> {
        let qset: HashSet<&Cube> = q.iter().collect();
        for b in &qset {
            self.params.ensure_same(&b.params())?;
            if let Some(cell) = self.cell_covering(b) {
                if &cell != *b {
                    return Err(Error::NotRepresentable);
                }
            }
        }
        let max_q = q.iter().map(|b| b.depth()).max().unwrap_or(0);
        Ok(self
            .cells
            .iter()
            .filter(|c| {
                let mut cur = (*c).clone();
                loop {
                    if cur.depth() <= max_q && qset.contains(&cur) {
                        return true;
                    }
                    if cur.is_root() {
                        return false;
                    }
                    cur = cur.parent_unchecked();
                }
            })
            .cloned()
            .collect())
    }

    /// Seeded random grid: starting from the unit grid, perform `t`
    /// subdivisions, each of a uniformly random cell of depth `< max_depth`.
    pub fn random(params: SpaceParams, seed: u64, t: usize, max_depth: u32) -> Result<Grid> {
        let cap = params.max_depth_cap();
        if max_depth > cap {
            return Err(Error::DepthCap { cap });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut cells = vec![Cube::root(params)];
        for _ in 0..t {
            let eligible: Vec<usize> = (0..cells.len())
                .filter(|&i| cells[i].depth() < max_depth)
                .collect();
            if eligible.is_empty() {
                break;
            }
            let i = eligible[rng.gen_range(0..eligible.len())];
            let x = cells.swap_remove(i);
            cells.extend(x.children()?);
        }
        Ok(Grid::from_unsorted(params, cells))
    }

    /// Serializes to the canonical grid JSON format.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(&GridJson::from_grid(self)).expect("grid serializes");
        s.push('\n');
        s
    }

    /// Parses and validates grid JSON.
    pub fn from_json(text: &str) -> Result<Grid> {
        let raw: GridJson =
            serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
        raw.into_grid()
    }
}

/// Reads the `k`, `d` and `cells` fields of grid or partition JSON without
/// checking the grid characterization (other fields are ignored).
pub fn boxes_from_json(text: &str) -> Result<(SpaceParams, Vec<Cube>)> {
    #[derive(Deserialize)]
    struct Raw {
        k: u32,
        d: u32,
        cells: Vec<CellJson>,
    }
    let raw: Raw = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    let params = SpaceParams::new(raw.k, raw.d)?;
    let cells = raw
        .cells
        .iter()
        .map(|c| c.to_cube(params))
        .collect::<Result<Vec<_>>>()?;
    Ok((params, cells))
}

/// Checks the grid characterization for an arbitrary box list: exact
/// coverage and pairwise non-containment.
pub fn check_boxes(params: SpaceParams, boxes: &[Cube]) -> GridCheck {
    let set: HashSet<&Cube> = boxes.iter().collect();
    let mut containment = None;
    'outer: for b in boxes {
        let mut cur = b.clone();
        while !cur.is_root() {
            cur = cur.parent_unchecked();
            if set.contains(&cur) {
                containment = Some((cur, b.clone()));
                break 'outer;
            }
        }
    }
    if containment.is_none() && set.len() != boxes.len() {
        let mut seen = HashSet::new();
        for b in boxes {
            if !seen.insert(b) {
                containment = Some((b.clone(), b.clone()));
                break;
            }
        }
    }
    GridCheck {
        coverage: total_volume(params, boxes.iter()),
        containment,
    }
}

/// Whether `boxes` form a grid.
pub fn is_grid(params: SpaceParams, boxes: &[Cube]) -> bool {
    check_boxes(params, boxes).is_grid()
}

/// Exact sum of box volumes (with multiplicity).
pub fn total_volume<'a>(params: SpaceParams, boxes: impl Iterator<Item = &'a Cube>) -> BigRational {
    let boxes: Vec<&Cube> = boxes.collect();
    let Some(max) = boxes.iter().map(|b| b.depth()).max() else {
        return BigRational::zero();
    };
    let kd = BigUint::from(params.branching());
    let mut num = BigUint::zero();
    for b in &boxes {
        num += kd.pow(max - b.depth());
    }
    BigRational::new(BigInt::from(num), BigInt::from(kd.pow(max)))
}

/// Strict ancestors of the given boxes.
pub(crate) fn internal_closure<'a>(boxes: impl Iterator<Item = &'a Cube>) -> HashSet<Cube> {
    let mut internal = HashSet::new();
    for b in boxes {
        let mut cur = b.clone();
        while !cur.is_root() {
            cur = cur.parent_unchecked();
            if !internal.insert(cur.clone()) {
                break;
            }
        }
    }
    internal
}

/// The coarsest grid containing every minimal element of `x` as a cell.
pub fn minimal_grid(params: SpaceParams, x: &[Cube]) -> Result<Grid> {
    if x.is_empty() {
        return Err(Error::Empty);
    }
    for b in x {
        params.ensure_same(&b.params())?;
    }
    Ok(Grid::from_internal(params, &internal_closure(x.iter())))
}

/// Coarsest common refinement of two grids.
pub fn meet(g: &Grid, h: &Grid) -> Result<Grid> {
    g.meet(h)
}

/// Whether `g` refines `h`.
pub fn refines(g: &Grid, h: &Grid) -> Result<bool> {
    g.refines(h)
}

/// Serialized cell `{"l": depth, "x": [coords]}`.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub(crate) struct CellJson {
    pub l: u32,
    pub x: Vec<serde_json::Number>,
}

impl CellJson {
    pub(crate) fn from_cube(c: &Cube) -> CellJson {
        CellJson {
            l: c.depth(),
            x: c.coords().iter().map(|v| coord_number(*v)).collect(),
        }
    }

    pub(crate) fn to_cube(&self, params: SpaceParams) -> Result<Cube> {
        let coords = self
            .x
            .iter()
            .map(|n| {
                n.as_str()
                    .parse::<Coord>()
                    .map_err(|_| Error::Format(format!("bad coordinate {n}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Cube::new(params, self.l, coords)
    }
}

/// A coordinate as an exact JSON number.
pub(crate) fn coord_number(x: Coord) -> serde_json::Number {
    x.to_string().parse().expect("integers are valid JSON numbers")
}

/// Serialized grid `{"k", "d", "cells"}`.
#[derive(Serialize, Deserialize, Clone, Debug)]
#[serde(deny_unknown_fields)]
pub(crate) struct GridJson {
    pub k: u32,
    pub d: u32,
    pub cells: Vec<CellJson>,
}

impl GridJson {
    pub(crate) fn from_grid(g: &Grid) -> GridJson {
        GridJson {
            k: g.params.k(),
            d: g.params.d(),
            cells: g.cells.iter().map(CellJson::from_cube).collect(),
        }
    }

    pub(crate) fn into_grid(self) -> Result<Grid> {
        let params = SpaceParams::new(self.k, self.d)?;
        let cells = self
            .cells
            .iter()
            .map(|c| c.to_cube(params))
            .collect::<Result<Vec<_>>>()?;
        Grid::from_cells(params, cells)
    }
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

    #[test]
    fn unit_and_subdivide() {
        let u = Grid::unit(p22());
        assert_eq!(u.len(), 1);
        let g = u.subdivide(&Cube::root(p22())).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g, Grid::regular(p22(), 1).unwrap());
        assert!(g.subdivide(&Cube::root(p22())).is_err());
        let p9 = SpaceParams::new(3, 2).unwrap();
        assert_eq!(Grid::unit(p9).subdivide(&Cube::root(p9)).unwrap().len(), 9);
    }

    #[test]
    fn lineage_count() {
        let mut g = Grid::unit(p22());
        let mut x = Cube::root(p22());
        for _ in 0..5 {
            g = g.subdivide(&x).unwrap();
            x = x.children().unwrap()[0].clone();
        }
        assert_eq!(g.len(), 3 * 5 + 1);
    }

    #[test]
    fn is_grid_examples() {
        let root = Cube::root(p22());
        assert!(is_grid(p22(), std::slice::from_ref(&root)));
        let mut ch = root.children().unwrap();
        ch.pop();
        assert!(!is_grid(p22(), &ch));
        let mut both = root.children().unwrap();
        both.push(root.clone());
        assert!(!is_grid(p22(), &both));
        let check = check_boxes(p22(), &ch);
        assert_eq!(check.coverage, BigRational::new(3.into(), 4.into()));
    }

    #[test]
    fn minimal_grid_examples() {
        let root = Cube::root(p22());
        assert_eq!(minimal_grid(p22(), &[root]).unwrap(), Grid::unit(p22()));
        let v = b(4, &[5, 9]);
        let g = minimal_grid(p22(), std::slice::from_ref(&v)).unwrap();
        assert_eq!(g.len(), 3 * 4 + 1);
        assert!(g.has_cell(&v));
        let by_depth = |l| g.cells().iter().filter(|c| c.depth() == l).count();
        assert_eq!(by_depth(4), 4);
        for l in 1..4 {
            assert_eq!(by_depth(l), 3);
        }
        let w = b(2, &[0, 3]);
        let both = minimal_grid(p22(), &[v.clone(), w.clone()]).unwrap();
        let m = minimal_grid(p22(), &[v])
            .unwrap()
            .meet(&minimal_grid(p22(), &[w]).unwrap())
            .unwrap();
        assert_eq!(both, m);
    }

    #[test]
    fn meet_examples() {
        let g1 = Grid::regular(p22(), 1).unwrap();
        let nw = g1.subdivide(&b(1, &[0, 1])).unwrap();
        let se = g1.subdivide(&b(1, &[1, 0])).unwrap();
        let m = nw.meet(&se).unwrap();
        assert_eq!(m.len(), 10);
        assert_eq!(nw.meet(&nw).unwrap(), nw);
        assert_eq!(nw.meet(&Grid::unit(p22())).unwrap(), nw);
        assert!(m.refines(&nw).unwrap() && m.refines(&se).unwrap());
    }

    #[test]
    fn refines_examples() {
        let g = Grid::regular(p22(), 1).unwrap();
        let x = b(1, &[1, 1]);
        let s = g.subdivide(&x).unwrap();
        assert!(g.refines(&g).unwrap());
        assert!(s.refines(&g).unwrap());
        assert!(!g.refines(&s).unwrap());
    }

    #[test]
    fn nodes_and_bound() {
        assert_eq!(Grid::unit(p22()).nodes().len(), 1);
        let g = Grid::regular(p22(), 2).unwrap();
        assert_eq!(g.len(), 16);
        assert_eq!(g.nodes().len(), 21);
        assert_eq!(g.node_count_bound(), BigRational::new(64.into(), 3.into()));
    }

    #[test]
    fn restrict_examples() {
        let g = Grid::regular(p22(), 1).unwrap();
        assert_eq!(g.restrict(&[Cube::root(p22())]).unwrap().len(), 4);
        assert_eq!(g.restrict(&[b(1, &[0, 1])]).unwrap(), vec![b(1, &[0, 1])]);
        let m = minimal_grid(p22(), &[b(3, &[1, 1])]).unwrap();
        // Inside the depth-1 ancestor: 3 cells at depth 2 and 4 at depth 3.
        assert_eq!(m.restrict(&[b(1, &[0, 0])]).unwrap().len(), 7);
        assert_eq!(m.restrict(&[Cube::root(p22())]).unwrap().len(), 10);
        assert_eq!(g.restrict(&[b(2, &[0, 0])]), Err(Error::NotRepresentable));
    }

    #[test]
    fn json_round_trip() {
        let g = Grid::random(p22(), 7, 20, 6).unwrap();
        let text = g.to_json();
        let back = Grid::from_json(&text).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_json(), text);
        assert!(Grid::from_json(r#"{"k":2,"d":2,"cells":[{"l":1,"x":[0,0]}]}"#).is_err());
        assert!(Grid::from_json("{").is_err());
    }

    #[test]
    fn json_handles_deep_coordinates() {
        let p = SpaceParams::new(2, 1).unwrap();
        let v = Cube::new(p, 200, [p.side(200) - Coord::from(1u8)]).unwrap();
        let g = minimal_grid(p, &[v]).unwrap();
        assert_eq!(Grid::from_json(&g.to_json()).unwrap(), g);
    }
}
