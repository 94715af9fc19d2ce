//! Exact extremes of the experimental extended functional over local
//! hidden-variable ensembles.
//!
//! At fixed `λ` both functionals are multilinear in the single-slot
//! probabilities, and every single-slot box `{p₊, p₋ >= 0, p₊ + p₋ <= 1}` is
//! the convex hull of `(1,0)`, `(0,1)` and `(0,0)`. Expanding each slot in
//! those vertices writes any `λ`-response as a mixture of deterministic
//! [`VertexStrategy`] values with the same joint statistics. The ensemble
//! moments (the functional and the six double-detection measures `M`) are
//! therefore exactly the convex hull of the vertex moments, and optimizing
//! over mixtures of vertices is a finite linear program.
//!
//! The "same non-detection everywhere" requirement becomes six equality rows
//! `M(pair) - m = 0` sharing one free variable `m ∈ [0, 1]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functional::{alpha, eval_s_hv, eval_sprime_hv};
use crate::lp::{solve_simplex, Check, LpProblem, LpSolution, Sense, VerificationReport};
use crate::model::{Outcome, OutcomeSelector, Setting, SettingPair, SinglesAssignment, VertexStrategy};

/// Which hidden-variable models are admitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AuditMode {
    /// Every slot responds independently.
    #[serde(rename = "unconstrained")]
    Unconstrained,
    /// Both photons respond identically along a shared direction: the
    /// side-1 and side-2 responses at `a'` coincide, as do those at `b`.
    #[serde(rename = "symmetric")]
    SymmetricSource,
}

impl AuditMode {
    pub const ALL: [AuditMode; 2] = [AuditMode::Unconstrained, AuditMode::SymmetricSource];

    pub fn name(self) -> &'static str {
        match self {
            AuditMode::Unconstrained => "unconstrained",
            AuditMode::SymmetricSource => "symmetric",
        }
    }
}

/// Trit order used when enumerating vertices (first entry varies slowest).
pub const TRIT_ORDER: [Outcome; 3] = [Outcome::NoDetect, Outcome::Plus, Outcome::Minus];

const ROUNDOFF_WEIGHT: f64 = 1e-14;

const SYMMETRIC_FREE: [Setting; 4] = [Setting::S1_A, Setting::S1_APRIME, Setting::S1_B, Setting::S2_BPRIME];

fn trits_from_index(mut index: usize, digits: usize) -> Vec<Outcome> {
    let mut out = vec![Outcome::NoDetect; digits];
    for d in (0..digits).rev() {
        out[d] = TRIT_ORDER[index % 3];
        index /= 3;
    }
    out
}

/// Every deterministic strategy admitted by `mode`, in lexicographic trit
/// order over the free slots (taken in [`Setting::ALL`] order).
pub fn enumerate_vertex_strategies(mode: AuditMode) -> Vec<VertexStrategy> {
    match mode {
        AuditMode::Unconstrained => (0..729)
            .map(|i| {
                let t = trits_from_index(i, 6);
                VertexStrategy::new([t[0], t[1], t[2], t[3], t[4], t[5]])
            })
            .collect(),
        AuditMode::SymmetricSource => (0..81)
            .map(|i| {
                let t = trits_from_index(i, 4);
                let mut trits = [Outcome::NoDetect; 6];
                for (s, v) in SYMMETRIC_FREE.iter().zip(&t) {
                    trits[s.index()] = *v;
                }
                trits[Setting::S2_B.index()] = trits[Setting::S1_B.index()];
                trits[Setting::S2_APRIME.index()] = trits[Setting::S1_APRIME.index()];
                VertexStrategy::new(trits)
            })
            .collect(),
    }
}

/// Extremes of the classic CH functional over the 16 extreme values of
/// `(x, x', y, y')`, with every maximizing / minimizing vertex listed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChBounds {
    pub min: f64,
    pub max: f64,
    pub argmin: Vec<[f64; 4]>,
    pub argmax: Vec<[f64; 4]>,
}

pub fn audit_ch_pointwise(sel: OutcomeSelector) -> ChBounds {
    let place = |p: f64, outcome: Outcome| match outcome {
        Outcome::Plus => (p, 0.0),
        _ => (0.0, p),
    };
    let r = sel.r_outcome();
    let q = sel.q_outcome();
    let mut values = Vec::with_capacity(16);
    for bits in 0..16u32 {
        let v = |k: u32| f64::from((bits >> (3 - k)) & 1);
        let (x, xp, y, yp) = (v(0), v(1), v(2), v(3));
        let assign = SinglesAssignment::silent()
            .with(Setting::S1_A, place(x, r).0, place(x, r).1)
            .and_then(|a| a.with(Setting::S1_APRIME, place(xp, r).0, place(xp, r).1))
            .and_then(|a| a.with(Setting::S2_B, place(y, q).0, place(y, q).1))
            .and_then(|a| a.with(Setting::S2_BPRIME, place(yp, q).0, place(yp, q).1))
            .expect("0/1 probabilities are valid");
        values.push(([x, xp, y, yp], eval_s_hv(&assign, sel)));
    }
    let min = values.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    let max = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    ChBounds {
        min,
        max,
        argmin: values.iter().filter(|v| v.1 == min).map(|v| v.0).collect(),
        argmax: values.iter().filter(|v| v.1 == max).map(|v| v.0).collect(),
    }
}

/// An audit linear program together with the vertex list its columns index.
#[derive(Debug, Clone)]
pub struct AuditLp {
    pub mode: AuditMode,
    pub selector: OutcomeSelector,
    pub vertices: Vec<VertexStrategy>,
    pub problem: LpProblem,
}

impl AuditLp {
    /// Column of the shared double-detection level `m`.
    pub fn m_column(&self) -> usize {
        self.vertices.len()
    }

    /// Same objective with only the normalization row kept.
    pub fn without_assumption_a(&self) -> LpProblem {
        let mut p = self.problem.clone();
        p.rows.truncate(1);
        p.rhs.truncate(1);
        p
    }

    pub fn solve(&self, tol: f64) -> Result<LpCertificate> {
        let sol = solve_simplex(&self.problem, tol)?;
        Ok(self.certificate(&sol, tol))
    }

    /// Packages a solution; basic variables at round-off level (below
    /// `ROUNDOFF_WEIGHT`) are zeroed before objective and residuals are
    /// recomputed.
    pub fn certificate(&self, sol: &LpSolution, tol: f64) -> LpCertificate {
        let n = self.vertices.len();
        let x: Vec<f64> = sol.x.iter().map(|&v| if v.abs() < ROUNDOFF_WEIGHT { 0.0 } else { v }).collect();
        LpCertificate {
            mode: self.mode,
            selector: self.selector,
            sense: self.problem.sense,
            objective: self.problem.objective_value(&x),
            m: x[n],
            weights: x[..n]
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != 0.0)
                .map(|(i, w)| (i, *w))
                .collect(),
            residuals: self.problem.residuals(&x),
            tolerance: tol,
        }
    }
}

/// Builds the LP: one column per vertex plus `m`, one normalization row and
/// one assumption-A row per audited pair.
pub fn build_audit_lp(mode: AuditMode, sense: Sense, sel: OutcomeSelector) -> AuditLp {
    let vertices = enumerate_vertex_strategies(mode);
    let coeffs: Vec<(f64, [f64; 6])> = vertices
        .par_iter()
        .map(|v| {
            let a = v.to_assignment();
            let mut m = [0.0; 6];
            for (slot, pair) in m.iter_mut().zip(SettingPair::AUDITED) {
                *slot = alpha(&a, pair.s1()) * alpha(&a, pair.s2());
            }
            (eval_sprime_hv(&a, sel), m)
        })
        .collect();

    let n = vertices.len();
    let mut objective: Vec<f64> = coeffs.iter().map(|c| c.0).collect();
    objective.push(0.0);
    let mut rows = Vec::with_capacity(7);
    let mut norm = vec![1.0; n + 1];
    norm[n] = 0.0;
    rows.push(norm);
    for k in 0..6 {
        let mut row: Vec<f64> = coeffs.iter().map(|c| c.1[k]).collect();
        row.push(-1.0);
        rows.push(row);
    }
    let mut rhs = vec![0.0; 7];
    rhs[0] = 1.0;
    let problem = LpProblem::new(sense, objective, rows, rhs)
        .expect("audit LP dimensions are consistent")
        .with_upper_bound(n, 1.0);
    AuditLp { mode, selector: sel, vertices, problem }
}

/// A serialized optimal ensemble: nonzero vertex weights, the shared level
/// `m`, the achieved objective and the row residuals `A x - b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LpCertificate {
    pub mode: AuditMode,
    pub selector: OutcomeSelector,
    pub sense: Sense,
    pub objective: f64,
    pub m: f64,
    pub weights: Vec<(usize, f64)>,
    pub residuals: Vec<f64>,
    pub tolerance: f64,
}

impl LpCertificate {
    /// Decodes the weights into `(weight, strategy)` pairs.
    pub fn witness(&self) -> Result<Vec<(f64, VertexStrategy)>> {
        let vertices = enumerate_vertex_strategies(self.mode);
        self.weights
            .iter()
            .map(|&(i, w)| {
                vertices
                    .get(i)
                    .map(|v| (w, *v))
                    .ok_or_else(|| Error::MismatchedProblem(format!("vertex index {i} out of range")))
            })
            .collect()
    }

    /// Rebuilds the matching LP and verifies against it.
    pub fn verify(&self, tol: f64) -> Result<VerificationReport> {
        let lp = build_audit_lp(self.mode, self.sense, self.selector);
        verify_certificate(self, &lp, tol)
    }
}

/// Re-derives the objective, the normalization and every assumption-A row
/// directly from the hidden-variable functionals, without the LP matrix,
/// and compares them with the stored values. A final check evaluates the
/// LP objective row on the same weights, tying the two routes together.
pub fn verify_certificate(cert: &LpCertificate, lp: &AuditLp, tol: f64) -> Result<VerificationReport> {
    if cert.mode != lp.mode || cert.selector != lp.selector || cert.sense != lp.problem.sense {
        return Err(Error::MismatchedProblem(format!(
            "certificate is {}/{}/{:?}, problem is {}/{}/{:?}",
            cert.mode.name(),
            cert.selector,
            cert.sense,
            lp.mode.name(),
            lp.selector,
            lp.problem.sense
        )));
    }
    if cert.residuals.len() != lp.problem.num_rows() {
        return Err(Error::MismatchedProblem(format!(
            "{} residuals for {} rows",
            cert.residuals.len(),
            lp.problem.num_rows()
        )));
    }
    if let Some(&(i, _)) = cert.weights.iter().find(|(i, _)| *i >= lp.vertices.len()) {
        return Err(Error::MismatchedProblem(format!(
            "vertex index {i} out of range for {} vertices",
            lp.vertices.len()
        )));
    }

    let mut checks = Vec::new();
    let mut total = 0.0;
    let mut objective = 0.0;
    let mut moments = [0.0; 6];
    for &(i, w) in &cert.weights {
        checks.push(Check::at_least(format!("weight[{i}] >= 0"), 0.0, w, tol));
        let a = lp.vertices[i].to_assignment();
        total += w;
        objective += w * eval_sprime_hv(&a, cert.selector);
        for (slot, pair) in moments.iter_mut().zip(SettingPair::AUDITED) {
            *slot += w * alpha(&a, pair.s1()) * alpha(&a, pair.s2());
        }
    }
    checks.push(Check::at_least("m >= 0", 0.0, cert.m, tol));
    checks.push(Check::at_least("m <= 1", -1.0, -cert.m, tol));
    checks.push(Check::new("normalization", 1.0, total, tol));
    checks.push(Check::new("residual[0]", total - 1.0, cert.residuals[0], tol));
    for (k, (pair, mk)) in SettingPair::AUDITED.iter().zip(moments).enumerate() {
        checks.push(Check::new(format!("assumption A M({})", pair.label()), cert.m, mk, tol));
        checks.push(Check::new(format!("residual[{}]", k + 1), mk - cert.m, cert.residuals[k + 1], tol));
    }
    checks.push(Check::new("objective", cert.objective, objective, tol));

    let mut x = vec![0.0; lp.problem.num_columns()];
    for &(i, w) in &cert.weights {
        x[i] = w;
    }
    x[lp.m_column()] = cert.m;
    checks.push(Check::new("objective (lp row)", objective, lp.problem.objective_value(&x), tol));

    Ok(VerificationReport { tolerance: tol, checks })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::DEFAULT_TOL;
    use std::collections::HashSet;

    const PP: OutcomeSelector = OutcomeSelector::ALL[0];

    #[test]
    fn vertex_counts_and_order() {
        let u = enumerate_vertex_strategies(AuditMode::Unconstrained);
        assert_eq!(u.len(), 729);
        assert_eq!(u.iter().collect::<HashSet<_>>().len(), 729);
        assert_eq!(u[0].trits(), [Outcome::NoDetect; 6]);
        assert_eq!(u[1].trit(Setting::S2_APRIME), Outcome::Plus);

        let s = enumerate_vertex_strategies(AuditMode::SymmetricSource);
        assert_eq!(s.len(), 81);
        assert_eq!(s.iter().collect::<HashSet<_>>().len(), 81);
        assert_eq!(s[0].trits(), [Outcome::NoDetect; 6]);
        for v in &s {
            assert_eq!(v.trit(Setting::S1_B), v.trit(Setting::S2_B));
            assert_eq!(v.trit(Setting::S1_APRIME), v.trit(Setting::S2_APRIME));
        }
        assert_eq!(enumerate_vertex_strategies(AuditMode::SymmetricSource), s);
    }

    #[test]
    fn ch_pointwise_lemma() {
        for sel in OutcomeSelector::ALL {
            let b = audit_ch_pointwise(sel);
            assert_eq!((b.min, b.max), (-1.0, 0.0));
            assert!(b.argmax.contains(&[1.0, 1.0, 1.0, 1.0]));
            assert!(b.argmin.contains(&[0.0, 0.0, 1.0, 0.0]));
        }
    }

    #[test]
    fn lp_shapes() {
        let lp = build_audit_lp(AuditMode::Unconstrained, Sense::Maximize, PP);
        assert_eq!(lp.problem.num_columns(), 730);
        assert_eq!(lp.problem.num_rows(), 7);
        assert_eq!(lp.problem.objective[0], 0.0);
        let lp = build_audit_lp(AuditMode::SymmetricSource, Sense::Minimize, PP);
        assert_eq!(lp.problem.num_columns(), 82);
        assert_eq!(lp.problem.num_rows(), 7);
        assert_eq!(lp.problem.upper[81], Some(1.0));
    }

    #[test]
    fn objective_coefficients_match_functional() {
        for mode in AuditMode::ALL {
            for sel in OutcomeSelector::ALL {
                let lp = build_audit_lp(mode, Sense::Maximize, sel);
                for (v, c) in lp.vertices.iter().zip(&lp.problem.objective) {
                    assert_eq!(*c, eval_sprime_hv(&v.to_assignment(), sel));
                }
            }
        }
    }

    #[test]
    fn unconstrained_max_is_two() {
        let lp = build_audit_lp(AuditMode::Unconstrained, Sense::Maximize, PP);
        let cert = lp.solve(DEFAULT_TOL).unwrap();
        assert!((cert.objective - 2.0).abs() < 1e-9);
        assert!(verify_certificate(&cert, &lp, 1e-9).unwrap().passed());
    }

    #[test]
    fn symmetric_bounds_match_ch() {
        for sel in OutcomeSelector::ALL {
            let max = build_audit_lp(AuditMode::SymmetricSource, Sense::Maximize, sel)
                .solve(DEFAULT_TOL)
                .unwrap();
            let min = build_audit_lp(AuditMode::SymmetricSource, Sense::Minimize, sel)
                .solve(DEFAULT_TOL)
                .unwrap();
            assert!(max.objective.abs() < 1e-9, "{sel}: {}", max.objective);
            assert!((min.objective + 1.0).abs() < 1e-9, "{sel}: {}", min.objective);
            assert!(max.verify(1e-9).unwrap().passed());
            assert!(min.verify(1e-9).unwrap().passed());
        }
    }

    #[test]
    fn hand_built_witness_certifies() {
        // x = x' = y = 1 on `+`, y' fires `-`, u = v = 0 via `-` clicks; all α = 1.
        let mut trits = [Outcome::Plus; 6];
        trits[Setting::S2_BPRIME.index()] = Outcome::Minus;
        trits[Setting::S2_APRIME.index()] = Outcome::Minus;
        trits[Setting::S1_B.index()] = Outcome::Minus;
        let lp = build_audit_lp(AuditMode::Unconstrained, Sense::Maximize, PP);
        let idx = lp.vertices.iter().position(|v| v.trits() == trits).unwrap();
        let cert = LpCertificate {
            mode: AuditMode::Unconstrained,
            selector: PP,
            sense: Sense::Maximize,
            objective: 2.0,
            m: 1.0,
            weights: vec![(idx, 1.0)],
            residuals: vec![0.0; 7],
            tolerance: 1e-9,
        };
        assert!(verify_certificate(&cert, &lp, 1e-9).unwrap().passed());
    }

    #[test]
    fn tampered_weight_fails_with_named_check() {
        let lp = build_audit_lp(AuditMode::SymmetricSource, Sense::Minimize, PP);
        let mut cert = lp.solve(DEFAULT_TOL).unwrap();
        cert.weights[0].1 += 1e-3;
        let rep = verify_certificate(&cert, &lp, 1e-9).unwrap();
        assert!(!rep.passed());
        let names: Vec<_> = rep.failures().map(|c| c.name.as_str()).collect();
        assert!(names.contains(&"normalization"), "{names:?}");
    }

    #[test]
    fn mismatched_problem_rejected() {
        let lp = build_audit_lp(AuditMode::SymmetricSource, Sense::Maximize, PP);
        let mut cert = lp.solve(DEFAULT_TOL).unwrap();
        let other = build_audit_lp(AuditMode::Unconstrained, Sense::Maximize, PP);
        assert!(matches!(verify_certificate(&cert, &other, 1e-9), Err(Error::MismatchedProblem(_))));
        cert.weights.push((500, 0.0));
        assert!(matches!(verify_certificate(&cert, &lp, 1e-9), Err(Error::MismatchedProblem(_))));
        cert.weights.pop();
        cert.residuals.pop();
        assert!(matches!(verify_certificate(&cert, &lp, 1e-9), Err(Error::MismatchedProblem(_))));
    }

    #[test]
    fn relaxations_only_loosen() {
        for sel in OutcomeSelector::ALL {
            let u = build_audit_lp(AuditMode::Unconstrained, Sense::Maximize, sel);
            let s = build_audit_lp(AuditMode::SymmetricSource, Sense::Maximize, sel);
            let u_max = u.solve(DEFAULT_TOL).unwrap().objective;
            let s_max = s.solve(DEFAULT_TOL).unwrap().objective;
            assert!(u_max >= s_max - 1e-9);
            for lp in [&u, &s] {
                let full = lp.solve(DEFAULT_TOL).unwrap().objective;
                let relaxed = solve_simplex(&lp.without_assumption_a(), DEFAULT_TOL).unwrap().objective;
                assert!(relaxed >= full - 1e-9);
            }
        }
    }

    #[test]
    fn certificate_json_schema() {
        let cert = build_audit_lp(AuditMode::SymmetricSource, Sense::Maximize, PP)
            .solve(DEFAULT_TOL)
            .unwrap();
        let v: serde_json::Value = serde_json::to_value(&cert).unwrap();
        for key in ["mode", "selector", "objective", "m", "weights", "residuals", "tolerance"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        assert_eq!(v["mode"], "symmetric");
        assert_eq!(v["selector"]["r"], 1);
        assert!(v["weights"][0].is_array());
        let back: LpCertificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, cert);
    }
}
