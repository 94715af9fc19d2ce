//! Quantum predictions for parallel-polarization photon pairs seen through
//! imperfect collimators and detectors.
//!
//! Outcome model for one setting pair with direction difference `δ`: the
//! pair passes collimation with probability `f`; each photon is then detected
//! independently with probability `η_k`; given a double detection, `(r, q)`
//! occurs with probability `¼[1 + rq F cos 2δ]`. A photon that is detected
//! alone is `+` or `-` with probability ½. The double-detection mass is
//! `η₁η₂f` whatever the directions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Angle, AngleConfig, Outcome, OutcomeSelector, SettingPair};
use crate::search::{bisect_boundary, golden_section_max};

/// Default tolerance for the violation-interval and maximum searches.
pub const DEFAULT_SEARCH_TOL: f64 = 1e-10;

const COARSE_GRID: usize = 1000;

/// Efficiencies `η₁`, `η₂`, collimator pass probability `f` and correlation
/// strength `F`, all in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDetectorParams")]
pub struct DetectorParams {
    pub eta1: f64,
    pub eta2: f64,
    #[serde(rename = "f")]
    pub collimation: f64,
    #[serde(rename = "F")]
    pub correlation: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDetectorParams {
    eta1: f64,
    eta2: f64,
    f: f64,
    #[serde(rename = "F")]
    big_f: f64,
}

impl TryFrom<RawDetectorParams> for DetectorParams {
    type Error = Error;
    fn try_from(r: RawDetectorParams) -> Result<Self> {
        DetectorParams::new(r.eta1, r.eta2, r.f, r.big_f)
    }
}

impl DetectorParams {
    pub const IDEAL: DetectorParams = DetectorParams { eta1: 1.0, eta2: 1.0, collimation: 1.0, correlation: 1.0 };

    pub fn new(eta1: f64, eta2: f64, collimation: f64, correlation: f64) -> Result<Self> {
        for (name, value) in [("eta1", eta1), ("eta2", eta2), ("f", collimation), ("F", correlation)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::InvalidDetectorParam { name, value });
            }
        }
        Ok(DetectorParams { eta1, eta2, collimation, correlation })
    }

    /// Double-detection probability `η₁η₂f`.
    pub fn double_detection(&self) -> f64 {
        self.eta1 * self.eta2 * self.collimation
    }

    /// Prefactor `¼η₁η₂fF` of the closed form.
    pub fn sprime_scale(&self) -> f64 {
        0.25 * self.double_detection() * self.correlation
    }
}

/// Joint outcome distribution for one setting pair, indexed by
/// [`Outcome::index`] on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OutcomeTable {
    pub probs: [[f64; 3]; 3],
    pub setting_difference: Angle,
}

impl OutcomeTable {
    pub fn get(&self, o1: Outcome, o2: Outcome) -> f64 {
        self.probs[o1.index()][o2.index()]
    }

    /// Total probability of the four `(±, ±)` entries.
    pub fn double_detection(&self) -> f64 {
        self.probs[0][0] + self.probs[0][1] + self.probs[1][0] + self.probs[1][1]
    }

    /// Row-major flattening in sampling order `++, +-, +0, -+, ..., 00`.
    pub fn flat(&self) -> [f64; 9] {
        let mut out = [0.0; 9];
        for (i, row) in self.probs.iter().enumerate() {
            out[3 * i..3 * i + 3].copy_from_slice(row);
        }
        out
    }

    /// Table putting all mass on a single cell.
    pub fn degenerate(o1: Outcome, o2: Outcome) -> Self {
        let mut probs = [[0.0; 3]; 3];
        probs[o1.index()][o2.index()] = 1.0;
        OutcomeTable { probs, setting_difference: Angle::new(0.0).expect("finite") }
    }
}

pub fn outcome_table(dp: &DetectorParams, delta: Angle) -> OutcomeTable {
    let DetectorParams { eta1, eta2, collimation: f, correlation } = *dp;
    let c = (2.0 * delta.radians()).cos();
    let both = 0.25 * eta1 * eta2 * f;
    let only1 = 0.5 * f * eta1 * (1.0 - eta2);
    let only2 = 0.5 * f * eta2 * (1.0 - eta1);
    let none = (1.0 - f) + f * (1.0 - eta1) * (1.0 - eta2);
    let same = both * (1.0 + correlation * c);
    let diff = both * (1.0 - correlation * c);
    OutcomeTable {
        probs: [[same, diff, only1], [diff, same, only1], [only2, only2, none]],
        setting_difference: delta,
    }
}

/// The six outcome tables of the extended functional, in term order.
pub fn pair_tables(dp: &DetectorParams, cfg: &AngleConfig) -> [OutcomeTable; 6] {
    SettingPair::AUDITED.map(|pair| outcome_table(dp, cfg.pair_difference(pair)))
}

/// The outcome cell each term of the functional reads, with its sign.
pub fn selected_cells(sel: OutcomeSelector) -> [(f64, Outcome, Outcome); 6] {
    let r = sel.r_outcome();
    let q = sel.q_outcome();
    [
        (1.0, r, q),
        (-1.0, r, q),
        (1.0, r, q),
        (1.0, r, q),
        (-1.0, r, r),
        (-1.0, q, q),
    ]
}

/// Quantum value of the experimental extended functional.
pub fn sprime_exp_qm(dp: &DetectorParams, cfg: &AngleConfig, sel: OutcomeSelector) -> f64 {
    pair_tables(dp, cfg)
        .iter()
        .zip(selected_cells(sel))
        .map(|(t, (sign, o1, o2))| sign * t.get(o1, o2))
        .sum()
}

/// `¼η₁η₂fF (3cos φ - cos 3φ - 2)`.
pub fn sprime_closed_form(dp: &DetectorParams, phi: f64) -> f64 {
    dp.sprime_scale() * (3.0 * phi.cos() - (3.0 * phi).cos() - 2.0)
}

/// `g(φ) = 3cos φ - cos 3φ - 2`; positive values break the upper bound.
///
/// Evaluated as `4 sin²(φ/2) (2c² + 2c - 1)` with `c = cos φ`, which is the
/// same polynomial (`cos 3φ = 4c³ - 3c`) but keeps full relative precision
/// near the double root at `φ = 0`.
pub fn violation_margin(phi: f64) -> f64 {
    let c = phi.cos();
    let s = (0.5 * phi).sin();
    4.0 * s * s * (2.0 * c * c + 2.0 * c - 1.0)
}

/// `g'(φ) = 3(sin 3φ - sin φ) = 6 sin φ cos 2φ`.
fn violation_margin_slope(phi: f64) -> f64 {
    6.0 * phi.sin() * (2.0 * phi).cos()
}

fn check_tol(tol: f64) -> Result<()> {
    if tol.is_finite() && tol > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidTolerance(tol))
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| if i + 1 == n { hi } else { lo + step * i as f64 }).collect()
}

/// Maximal interval of `[0, π]` on which `g > 0`, endpoints to within `tol`.
pub fn find_violation_interval(tol: f64) -> Result<(f64, f64)> {
    check_tol(tol)?;
    let grid = linspace(0.0, std::f64::consts::PI, COARSE_GRID + 1);
    let positive: Vec<bool> = grid.iter().map(|&p| violation_margin(p) > 0.0).collect();
    let first = positive.iter().position(|&p| p).expect("g(π/4) > 0 so the grid sees a violation");
    let last = first + positive[first..].iter().take_while(|&&p| p).count() - 1;
    let lo = if first == 0 {
        grid[0]
    } else {
        bisect_boundary(violation_margin, grid[first], grid[first - 1], tol)
    };
    let hi = if last + 1 == grid.len() {
        grid[last]
    } else {
        bisect_boundary(violation_margin, grid[last], grid[last + 1], tol)
    };
    Ok((lo, hi))
}

/// Location and value of the largest violation margin.
pub fn find_max_violation(tol: f64) -> Result<(f64, f64)> {
    find_max_violation_with_grid(tol, COARSE_GRID)
}

/// As [`find_max_violation`] with a caller-chosen coarse grid size.
///
/// A coarse grid over the violation interval brackets the peak, golden-section
/// narrows the bracket while value comparisons are still meaningful, and a
/// final bisection on the sign of `g'` resolves the argmax to `tol`.
pub fn find_max_violation_with_grid(tol: f64, grid_points: usize) -> Result<(f64, f64)> {
    check_tol(tol)?;
    let (lo, hi) = find_violation_interval(tol)?;
    let grid = linspace(lo, hi, grid_points.max(3));
    let best = grid
        .iter()
        .enumerate()
        .max_by(|a, b| violation_margin(*a.1).total_cmp(&violation_margin(*b.1)))
        .map(|(i, _)| i)
        .expect("grid is non-empty");
    let a = grid[best.saturating_sub(1)];
    let b = grid[(best + 1).min(grid.len() - 1)];
    let (mut a, mut b) = golden_section_max(violation_margin, a, b, tol.max(1e-7));

    let mut widen = (b - a).max(tol);
    for _ in 0..8 {
        if violation_margin_slope(a) > 0.0 && violation_margin_slope(b) < 0.0 {
            break;
        }
        a = (a - widen).max(lo);
        b = (b + widen).min(hi);
        widen *= 2.0;
    }
    let phi = if violation_margin_slope(a) > 0.0 && violation_margin_slope(b) < 0.0 {
        bisect_boundary(violation_margin_slope, a, b, tol)
    } else {
        0.5 * (a + b)
    };
    Ok((phi, violation_margin(phi)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ScanPoint {
    pub phi: f64,
    pub margin: f64,
    pub sprime: f64,
}

/// Tabulated margins; `peak` is the largest positive grid margin, if any.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "camelCase")]
pub struct ViolationScan {
    pub points: Vec<ScanPoint>,
    pub peak: Option<ScanPoint>,
}

/// Evaluates the margin `g(φ)` and the quantum `S'` on the φ configuration
/// at each grid point.
pub fn scan(dp: &DetectorParams, phi_grid: &[f64], sel: OutcomeSelector) -> Result<ViolationScan> {
    if phi_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    for (i, w) in phi_grid.windows(2).enumerate() {
        if !(w[1] > w[0]) {
            return Err(Error::UnorderedGrid(i + 1));
        }
    }
    if let Some(i) = phi_grid.iter().position(|p| !p.is_finite()) {
        return Err(Error::UnorderedGrid(i));
    }
    let points = phi_grid
        .iter()
        .map(|&phi| {
            Ok(ScanPoint {
                phi,
                margin: violation_margin(phi),
                sprime: sprime_exp_qm(dp, &AngleConfig::from_phi(phi)?, sel),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let peak = points
        .iter()
        .filter(|p| p.margin > 0.0)
        .max_by(|a, b| a.margin.total_cmp(&b.margin))
        .copied();
    Ok(ViolationScan { points, peak })
}
