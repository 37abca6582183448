//! Exact `V_c`/`S_c`/`R_c` values against their asymptotic predictions, the
//! vertex weight `γ`, depth-bounded `μ_c` searches, the surface-to-volume
//! staircase and the closed-form table of class-regular grids.

use std::collections::HashSet;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::geometry::{binom, Cube, SpaceParams};
use crate::generators::{
    cantor_grid, class_regular, classified_shape, regular_volume, shape_class_regular,
    ClassRegularSpec,
};
use crate::metrics::cv_boundary;
use crate::partition::{boundary, boundary_intrinsic, class_table, shape};
use crate::sfc::CurveSpec;
use crate::spacetree::{minimal_grid, Grid};

fn big(x: impl Into<BigInt>) -> BigRational {
    BigRational::from_integer(x.into())
}

fn ubig(x: &BigUint) -> BigRational {
    BigRational::from_integer(BigInt::from(x.clone()))
}

/// `ρ(k, d) = (k^{d−1} − 1) / (k^d − 1)`.
pub fn rho(params: SpaceParams) -> BigRational {
    let k = BigInt::from(params.k());
    let d = params.d();
    BigRational::new(k.pow(d - 1) - 1, k.pow(d) - 1)
}

/// Approximates a rational as `f64` (display only).
pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// `γ(Q, M) = Σ_l A(Q*, l, d) (M − l)`.
pub fn gamma(q: &[Cube], m: u32) -> Result<u64> {
    let first = q.first().ok_or(Error::Empty)?;
    let d = first.params().d();
    let table = class_table(q)?;
    let depth = table.keys().map(|(l, _)| *l).max().unwrap_or(0);
    if m < depth {
        return Err(Error::InvalidSpec(format!(
            "M = {m} is below the classification depth {depth}"
        )));
    }
    Ok(table
        .iter()
        .filter(|((_, r), _)| *r == d)
        .map(|((l, _), n)| n * (m - l) as u64)
        .sum())
}

/// Exact and predicted `V_c`, `S_c`, `R_c` for one shape, depth and class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VcScReport {
    /// Class `c`.
    pub c: u32,
    /// Depth `M`.
    pub m: u32,
    /// `V_c(Q, M) = dv(H_c(Q, M))`.
    pub v: BigUint,
    /// `S_c(Q, M) = ds(H_c(Q, M))`.
    pub s: BigUint,
    /// `R_c = S_c / V_c`.
    pub r: BigRational,
    /// Leading-term prediction for `V_c`.
    pub v_pred: BigRational,
    /// Leading-term prediction for `S_c`.
    pub s_pred: BigRational,
    /// The limit `cρ` of `R_c`.
    pub r_limit: BigRational,
}

impl VcScReport {
    /// `|R_c − cρ|`.
    pub fn r_residual(&self) -> BigRational {
        let diff = &self.r - &self.r_limit;
        if diff < BigRational::zero() {
            -diff
        } else {
            diff
        }
    }
}

/// Builds `H_c(Q, M)` (analytically for `c = 0`) and compares with the
/// leading-order predictions: for `c < d`,
/// `V_c ≈ (k^d−1)/(k^{d−c}−1)·cv(∂^c Q)·k^{M(d−c)}` and
/// `S_c ≈ c(k^{d−1}−1)/(k^{d−c}−1)·cv(∂^c Q)·k^{M(d−c)}`; for `c = d`,
/// `V_d ≈ (k^d−1)γ` and `S_d ≈ d(k^{d−1}−1)γ`.
pub fn vcsc(q: &[Cube], m: u32, c: u32) -> Result<VcScReport> {
    let q = shape(q)?;
    let params = q[0].params();
    let d = params.d();
    if c > d {
        return Err(Error::CodimOutOfRange { c, d });
    }
    let qstar_depth = classified_shape(&q)?
        .iter()
        .map(|b| b.depth())
        .max()
        .unwrap_or(0);
    if m < qstar_depth {
        return Err(Error::InvalidSpec(format!(
            "M = {m} is below the classification depth {qstar_depth}"
        )));
    }
    let k = BigInt::from(params.k());
    let kd1 = k.pow(d) - 1;
    let kdm1 = k.pow(d - 1) - 1;
    let (v, s) = if c == 0 {
        let cs = cv_boundary(&q, 1)?;
        let s = cs * big(k.pow(m * (d - 1)));
        (regular_volume(&q, m), s.to_integer().to_biguint().expect("non-negative"))
    } else {
        let h = shape_class_regular(&q, m, c)?;
        let s = boundary_intrinsic(&h, 1)?.len();
        (BigUint::from(h.len()), BigUint::from(s))
    };
    let (v_pred, s_pred) = if c < d {
        let scale = cv_boundary(&q, c)? * big(k.pow(m * (d - c))) / big(k.pow(d - c) - 1);
        (&scale * big(kd1), &scale * big(kdm1 * c))
    } else {
        let g = big(gamma(&q, m)?);
        (&g * big(kd1), &g * big(kdm1 * d))
    };
    Ok(VcScReport {
        c,
        m,
        r: ubig(&s) / ubig(&v),
        v,
        s,
        v_pred,
        s_pred,
        r_limit: rho(params) * big(c),
    })
}

/// Depth-bounded estimate of `μ_c(Φ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MuEstimate {
    /// Class `c`.
    pub c: u32,
    /// Best value found: `cv(∂^c Q)` for `c < d`, `γ(Q, M)/M²` for `c = d`.
    pub best: BigRational,
    /// For `c < d`, `best · (k^d−1)/(k^{d−c}−1)`; for `c = d`, `best`.
    pub lower_bound: BigRational,
    /// Analytic lower bound on the same scale (`binom(d,c)2^c` scaled, or
    /// `1/4` for `c = d`).
    pub analytic_lower: BigRational,
    /// Analytic upper bound on the same scale (`2k^d/(k^{d−c}−1)` scaled,
    /// or `2^d k^d` for `c = d`).
    pub analytic_upper: BigRational,
    /// Shape attaining `best` (first found in enumeration order).
    pub witness: Vec<Cube>,
    /// Number of candidate pairs evaluated.
    pub candidates: usize,
}

fn boxes_up_to(params: SpaceParams, depth: u32) -> Vec<Cube> {
    let mut out = vec![Cube::root(params)];
    let mut level = vec![Cube::root(params)];
    for _ in 0..depth {
        level = level
            .iter()
            .flat_map(|b| (0..params.branching()).map(move |i| b.child_unchecked(i)))
            .collect();
        out.extend(level.iter().cloned());
    }
    out
}

/// Enumerates partition shapes through their end boxes: for every ordered
/// pair `(q_1, q_n)` of non-nested boxes of depth `≤ depth_bound`, the cells
/// of `𝔾(q_1, q_n)` between them along the curve form a partition whose
/// shape is evaluated. `m` is the depth used for `γ` when `c = d`.
pub fn search_mu(
    curve: &CurveSpec,
    c: u32,
    depth_bound: u32,
    m: u32,
    budget: usize,
) -> Result<MuEstimate> {
    let params = curve.params();
    let d = params.d();
    if c > d {
        return Err(Error::CodimOutOfRange { c, d });
    }
    let boxes = boxes_up_to(params, depth_bound);
    let pairs = boxes.len() * (boxes.len() + 1) / 2;
    if pairs > budget {
        return Err(Error::Budget(format!(
            "{pairs} candidate pairs exceed the budget of {budget}"
        )));
    }
    let mut best: Option<(BigRational, Vec<Cube>)> = None;
    let mut seen: HashSet<Vec<Cube>> = HashSet::new();
    let mut candidates = 0;
    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i..] {
            if a != b && (a.covers(b) || b.covers(a)) {
                continue;
            }
            let grid = minimal_grid(params, &[a.clone(), b.clone()])?;
            let seq = curve.order_cells(&grid)?;
            let (pa, pb) = (seq.position(a).expect("cell"), seq.position(b).expect("cell"));
            let (lo, hi) = (pa.min(pb), pa.max(pb));
            let q = shape(&seq.sequence()[lo..=hi])?;
            if !seen.insert(q.clone()) {
                continue;
            }
            candidates += 1;
            let value = if c < d {
                cv_boundary(&q, c)?
            } else {
                match gamma(&q, m) {
                    Ok(g) => BigRational::new(BigInt::from(g), BigInt::from(m as u64 * m as u64)),
                    Err(_) => continue,
                }
            };
            if best.as_ref().is_none_or(|(v, _)| value > *v) {
                best = Some((value, q));
            }
        }
    }
    let (best, witness) = best.ok_or(Error::Empty)?;
    let k = BigInt::from(params.k());
    let (scale, lower, upper) = if c < d {
        let s = BigRational::new(k.pow(d) - 1, k.pow(d - c) - 1);
        let lower = big(binom(d as u64, c as u64) << c) * &s;
        let upper = BigRational::new(BigInt::from(2) * k.pow(d), k.pow(d - c) - 1) * &s;
        (s, lower, upper)
    } else {
        (
            BigRational::one(),
            BigRational::new(1.into(), 4.into()),
            big(BigInt::from(2).pow(d) * k.pow(d)),
        )
    };
    Ok(MuEstimate {
        c,
        lower_bound: &best * scale,
        best,
        analytic_lower: lower,
        analytic_upper: upper,
        witness,
        candidates,
    })
}

/// One point of the staircase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StairPoint {
    /// Volume.
    pub v: BigUint,
    /// Maximum asymptotic surface-to-volume ratio.
    pub r: BigRational,
    /// Regime `c`: `V_c < V ≤ V_{c−1}` (or `c = d` on the last plateau).
    pub regime: u32,
    /// `α = V / V_c` (1 on the plateau below `V_d`).
    pub alpha: BigRational,
}

/// `R(V)` from the profile `V_0 ≥ V_1 ≥ … ≥ V_d` at depth `M`:
/// `(c − 1 + 1/α)ρ` with `α = V/V_c` when `V_c < V ≤ V_{c−1}`, and `dρ`
/// when `M ≤ V ≤ V_d` (using the convention `V_{d+1} = M`).
pub fn staircase(params: SpaceParams, profile: &[BigUint], m: u32, v: &BigUint) -> Result<StairPoint> {
    let d = params.d();
    if profile.len() != d as usize + 1 {
        return Err(Error::InvalidSpec(format!(
            "profile needs {} values V_0..V_d",
            d + 1
        )));
    }
    let err = |reason: &str| Error::InadmissibleVolume {
        v: v.to_u64().unwrap_or(u64::MAX),
        reason: reason.into(),
    };
    if *v < BigUint::from(m) {
        return Err(err("below the convention V_{d+1} = M"));
    }
    if *v > profile[0] {
        return Err(err("above V_0"));
    }
    let rho = rho(params);
    if *v <= profile[d as usize] {
        return Ok(StairPoint {
            v: v.clone(),
            r: &rho * big(d),
            regime: d,
            alpha: BigRational::one(),
        });
    }
    let c = (1..=d)
        .find(|&c| *v > profile[c as usize])
        .expect("V above V_d");
    let alpha = ubig(v) / ubig(&profile[c as usize]);
    let r = (big(c) - BigRational::one() + alpha.recip()) * &rho;
    Ok(StairPoint {
        v: v.clone(),
        r,
        regime: c,
        alpha,
    })
}

/// Exact finite-depth profile `V_0..V_d` of `Q = {ℍ}` for a curve's space.
pub fn unit_profile(params: SpaceParams, m: u32) -> Result<Vec<BigUint>> {
    let root = [Cube::root(params)];
    let mut out = vec![regular_volume(&root, m)];
    for c in 1..=params.d() {
        out.push(BigUint::from(shape_class_regular(&root, m, c)?.len()));
    }
    Ok(out)
}

/// Leading-order profile of `Q = {ℍ}`: `V_c ≈ (k^d−1)/(k^{d−c}−1)·
/// binom(d,c)2^c·k^{M(d−c)}` for `c < d`, and `V_d ≈ (k^d−1)γ` with
/// `γ = 2^d (M − 1)`.
pub fn unit_profile_asymptotic(params: SpaceParams, m: u32) -> Vec<BigUint> {
    let k = BigUint::from(params.k());
    let d = params.d();
    let kd1 = k.pow(d) - 1u32;
    let mut out = Vec::new();
    for c in 0..d {
        let faces = BigUint::from(binom(d as u64, c as u64) << c);
        out.push(&kd1 * faces * k.pow(m * (d - c)) / (k.pow(d - c) - 1u32));
    }
    out.push(&kd1 * (BigUint::from(1u32) << d) * BigUint::from(m.saturating_sub(1)));
    out
}

/// Sweeps `R(V)` over a geometric grid of `points` volumes between `M` and
/// `V_0` plus every `V_c` of the profile.
pub fn staircase_sweep(
    params: SpaceParams,
    profile: &[BigUint],
    m: u32,
    points: usize,
) -> Result<Vec<StairPoint>> {
    let lo = m.max(1) as f64;
    let hi = profile[0].to_f64().unwrap_or(f64::MAX);
    let mut vs: Vec<BigUint> = (0..points)
        .map(|i| {
            let t = i as f64 / (points.max(2) - 1) as f64;
            let v = (lo * (hi / lo).powf(t)).round();
            BigUint::from(v as u128)
        })
        .collect();
    vs.extend(profile.iter().cloned());
    vs.push(BigUint::from(m));
    vs.retain(|v| *v >= BigUint::from(m) && *v <= profile[0]);
    vs.sort();
    vs.dedup();
    vs.iter().map(|v| staircase(params, profile, m, v)).collect()
}

/// One table family.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TableFamily {
    /// `K(c, r, M)` with `k = 2`, `d = 2`.
    ClassRegular {
        /// Target class.
        c: u32,
        /// Number of leading axes.
        r: u32,
    },
    /// The Cantor grid (`k = 3`, `d = 2`).
    Cantor,
}

impl TableFamily {
    /// The five table rows.
    pub fn all() -> [TableFamily; 5] {
        [
            TableFamily::ClassRegular { c: 0, r: 0 },
            TableFamily::ClassRegular { c: 1, r: 1 },
            TableFamily::ClassRegular { c: 1, r: 2 },
            TableFamily::ClassRegular { c: 2, r: 2 },
            TableFamily::Cantor,
        ]
    }

    /// Short name used in reports.
    pub fn name(&self) -> String {
        match self {
            TableFamily::ClassRegular { c, r } => format!("K({c},{r})"),
            TableFamily::Cantor => "cantor".into(),
        }
    }

    /// Space parameters of the row.
    pub fn params(&self) -> SpaceParams {
        match self {
            TableFamily::ClassRegular { .. } => SpaceParams::new(2, 2).expect("valid"),
            TableFamily::Cantor => SpaceParams::new(3, 2).expect("valid"),
        }
    }

    /// Builds the grid of depth `m`.
    pub fn build(&self, m: u32) -> Result<Grid> {
        match *self {
            TableFamily::ClassRegular { c, r } => {
                class_regular(ClassRegularSpec::new(self.params(), c, r, m)?)
            }
            TableFamily::Cantor => cantor_grid(self.params(), m),
        }
    }

    /// Closed forms `(dv, ds)`. `ds` counts every domain-boundary facet, so
    /// the regular grid `K(0, 0, M)` has `ds = 4·2^M` (its perimeter).
    pub fn closed_form(&self, m: u32) -> (u64, u64) {
        let p = || 1u64 << m;
        let m = m as u64;
        match *self {
            TableFamily::ClassRegular { c: 0, .. } => (p() * p(), 4 * p()),
            TableFamily::ClassRegular { c: 1, r: 1 } => (3 * p() - 2, p() + 2 * m + 4),
            TableFamily::ClassRegular { c: 1, .. } => (6 * p() - 3 * m - 5, 2 * p() + 2 * m + 2),
            TableFamily::ClassRegular { .. } => (3 * m + 1, 2 * m + 6),
            TableFamily::Cantor => (8 * p() - 7, 2 * p() + 4 * m + 4),
        }
    }

    /// Limit of `dr` as `M → ∞`.
    pub fn limit(&self) -> BigRational {
        match *self {
            TableFamily::ClassRegular { c: 0, .. } => BigRational::zero(),
            TableFamily::ClassRegular { c: 1, .. } => BigRational::new(1.into(), 3.into()),
            TableFamily::ClassRegular { .. } => BigRational::new(2.into(), 3.into()),
            TableFamily::Cantor => BigRational::new(1.into(), 4.into()),
        }
    }
}

/// One measured table row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableRow {
    /// Family name.
    pub grid: String,
    /// Space parameters.
    pub params: SpaceParams,
    /// Depth.
    pub m: u32,
    /// Measured cell count.
    pub dv: u64,
    /// Measured domain-boundary facet count.
    pub ds: u64,
    /// `ds / dv`.
    pub dr: BigRational,
    /// Closed-form `(dv, ds)`.
    pub expected: (u64, u64),
    /// Table limit of `dr`.
    pub limit: BigRational,
}

impl TableRow {
    /// Whether the measured counts equal the closed forms.
    pub fn matches(&self) -> bool {
        (self.dv, self.ds) == self.expected
    }
}

/// Measures one family at one depth: `dv` is the cell count and `ds` the
/// number of domain-boundary facets of the whole grid.
pub fn table_row(family: TableFamily, m: u32) -> Result<TableRow> {
    let g = family.build(m)?;
    let dv = g.len() as u64;
    let ds = boundary(g.cells(), &g, 1)?.len() as u64;
    Ok(TableRow {
        grid: family.name(),
        params: family.params(),
        m,
        dv,
        ds,
        dr: BigRational::new(BigInt::from(ds), BigInt::from(dv)),
        expected: family.closed_form(m),
        limit: family.limit(),
    })
}

/// Every table family for `M = 1..=max_m`.
pub fn reproduce_table(max_m: u32) -> Result<Vec<TableRow>> {
    let mut rows = Vec::new();
    for family in TableFamily::all() {
        for m in 1..=max_m {
            rows.push(table_row(family, m)?);
        }
    }
    Ok(rows)
}
