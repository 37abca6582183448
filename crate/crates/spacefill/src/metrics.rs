//! Exact discrete and continuous volume/surface measures and the
//! continuous-bound checks.
//!
//! Every quantity is an exact rational; only the CLI ever formats decimals.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{coord_to_big, Cube, SpaceParams};
use crate::partition::{boundary, boundary_intrinsic};
use crate::spacetree::{total_volume, Grid};

/// Formats a rational as `"p/q"` (the denominator is always written).
pub fn fmt_rational(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Parses `"p/q"` or `"p"`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::Format(format!("bad rational {s:?}"));
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let n: BigInt = n.trim().parse().map_err(|_| bad())?;
    let d: BigInt = d.trim().parse().map_err(|_| bad())?;
    if d.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(n, d))
}

/// Discrete and continuous measures of a cell set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MeasureReport {
    /// Number of cells.
    pub dv: u64,
    /// Number of boundary facets.
    pub ds: u64,
    /// Exact volume.
    pub cv: BigRational,
    /// Exact boundary surface measure.
    pub cs: BigRational,
    /// `ds / dv`.
    pub dr: BigRational,
    /// Exact ℓ∞ diameter.
    pub diameter: BigRational,
}

#[derive(Serialize)]
struct MeasureJson {
    dv: u64,
    ds: u64,
    cv: String,
    cs: String,
    dr: String,
    diameter: String,
}

impl MeasureReport {
    /// JSON with rationals as `"p/q"` strings.
    pub fn to_json(&self) -> String {
        let raw = MeasureJson {
            dv: self.dv,
            ds: self.ds,
            cv: fmt_rational(&self.cv),
            cs: fmt_rational(&self.cs),
            dr: fmt_rational(&self.dr),
            diameter: fmt_rational(&self.diameter),
        };
        let mut s = serde_json::to_string(&raw).expect("report serializes");
        s.push('\n');
        s
    }
}

/// Measures `X` against `grid`, or against `𝔾(X)` when `grid` is `None`.
pub fn measure(x: &[Cube], grid: Option<&Grid>) -> Result<MeasureReport> {
    measure_codim(x, grid, 1)
}

/// Like [`measure`] but with `ds`/`cs` taken over `∂^c X`.
pub fn measure_codim(x: &[Cube], grid: Option<&Grid>, c: u32) -> Result<MeasureReport> {
    let first = x.first().ok_or(Error::Empty)?;
    let faces = match grid {
        Some(g) => boundary(x, g, c)?,
        None => boundary_intrinsic(x, c)?,
    };
    let dv = x.len() as u64;
    let ds = faces.len() as u64;
    Ok(MeasureReport {
        dv,
        ds,
        cv: total_volume(first.params(), x.iter()),
        cs: faces.measure(),
        dr: BigRational::new(BigInt::from(ds), BigInt::from(dv)),
        diameter: diameter(x)?,
    })
}

/// `cv(∂^c X)` with respect to `𝔾(X)`; for `c = d` the vertex count.
pub fn cv_boundary(x: &[Cube], c: u32) -> Result<BigRational> {
    Ok(boundary_intrinsic(x, c)?.measure())
}

/// Exact ℓ∞ diameter of `content(X)`.
///
/// For a union of closed boxes, the largest per-axis extent of the bounding
/// box is attained by two points of the content (one with minimal and one
/// with maximal coordinate on that axis), so it equals the ℓ∞ diameter.
pub fn diameter(x: &[Cube]) -> Result<BigRational> {
    let first = x.first().ok_or(Error::Empty)?;
    let params = first.params();
    let depth = x.iter().map(|b| b.depth()).max().unwrap_or(0);
    let mut widest = BigInt::zero();
    for axis in 0..params.d() as usize {
        let (lo, hi) = x
            .iter()
            .map(|b| b.interval(axis, depth))
            .fold(None, |acc: Option<(_, _)>, (l, h)| match acc {
                None => Some((l, h)),
                Some((a, b)) => Some((a.min(l), b.max(h))),
            })
            .expect("non-empty");
        let w = BigInt::from(coord_to_big(hi - lo));
        if w > widest {
            widest = w;
        }
    }
    Ok(BigRational::new(
        widest,
        BigInt::from(coord_to_big(params.side(depth))),
    ))
}

/// `U_c = 2k^d / (1 − k^{c−d})`.
pub fn continuous_constant(params: SpaceParams, c: u32) -> BigRational {
    let k = BigInt::from(params.k());
    let d = params.d();
    assert!(c < d, "the constant needs c < d");
    let kdc = k.pow(d - c);
    BigRational::new(BigInt::from(2) * k.pow(d) * &kdc, kdc - 1)
}

/// Result of the continuous-bound check for one codimension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundsCheck {
    /// The constant `U_c`.
    pub u: BigRational,
    /// `δ(P)`.
    pub diameter: BigRational,
    /// `cv(∂^c P)`.
    pub cv: BigRational,
    /// `cv / (δ^{d−c} / U)`; at least 1 when the lower bound holds.
    pub lower_slack: BigRational,
    /// `U·δ^{d−c} / cv`; at least 1 when the upper bound holds.
    pub upper_slack: BigRational,
}

impl BoundsCheck {
    /// Whether both bounds hold.
    pub fn holds(&self) -> bool {
        self.lower_slack >= BigRational::one() && self.upper_slack >= BigRational::one()
    }
}

/// Verifies `δ^{d−c}/U ≤ cv(∂^c P) ≤ U·δ^{d−c}` exactly (`0 ≤ c < d`).
pub fn continuous_bounds_check(p: &[Cube], c: u32) -> Result<BoundsCheck> {
    let first = p.first().ok_or(Error::Empty)?;
    let params = first.params();
    if c >= params.d() {
        return Err(Error::CodimOutOfRange { c, d: params.d() - 1 });
    }
    let u = continuous_constant(params, c);
    let delta = diameter(p)?;
    let cv = cv_boundary(p, c)?;
    let dpow = pow(&delta, params.d() - c);
    Ok(BoundsCheck {
        lower_slack: &cv * &u / &dpow,
        upper_slack: &u * &dpow / &cv,
        u,
        diameter: delta,
        cv,
    })
}

/// Checks `cs(P) ≤ C·cv(P)^{1−1/d}` with `C = U_1·U_0^{(d−1)/d}`, in the
/// exact form `cs^d ≤ U_1^d · U_0^{d−1} · cv^{d−1}`.
pub fn quasi_optimality_check(p: &[Cube]) -> Result<bool> {
    let first = p.first().ok_or(Error::Empty)?;
    let params = first.params();
    let d = params.d();
    if d < 2 {
        return Ok(true);
    }
    let report = measure(p, None)?;
    let lhs = pow(&report.cs, d);
    let rhs = pow(&continuous_constant(params, 1), d)
        * pow(&continuous_constant(params, 0), d - 1)
        * pow(&report.cv, d - 1);
    Ok(lhs <= rhs)
}

fn pow(r: &BigRational, e: u32) -> BigRational {
    (0..e).fold(BigRational::one(), |acc, _| acc * r)
}
