use std::f64::consts::PI;
use std::path::Path;

use exch::audit::{audit_ch_pointwise, build_audit_lp, AuditMode, LpCertificate};
use exch::lp::Sense;
use exch::model::OutcomeSelector;
use exch::montecarlo::{check_assumption_a, run_experiment, AssumptionACheck, SimReport};
use exch::quantum::{find_max_violation, find_violation_interval, scan, DetectorParams, ScanPoint, DEFAULT_SEARCH_TOL};
use serde::Serialize;

use crate::config::{AngleUnit, SimulateConfig};
use crate::output::{ensure_dir, fmt_num, to_json_string, write_json, write_text};
use crate::CliError;

/// Bounds the extended inequality claims for every local model.
const CLAIMED_BOUNDS: (f64, f64) = (-1.0, 0.0);

fn core_err(e: exch::Error) -> CliError {
    CliError::Invalid(e.to_string())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct WitnessMember {
    vertex: usize,
    weight: f64,
    strategy: String,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct ChPointwise {
    min: f64,
    max: f64,
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct AuditSummary {
    mode: AuditMode,
    selector: OutcomeSelector,
    tolerance: f64,
    max: f64,
    min: f64,
    claimed_bounds: [f64; 2],
    bounds_hold: bool,
    ch_pointwise: ChPointwise,
    max_witness: Vec<WitnessMember>,
    min_witness: Vec<WitnessMember>,
}

fn witness(cert: &LpCertificate) -> Result<Vec<WitnessMember>, CliError> {
    Ok(cert
        .witness()
        .map_err(core_err)?
        .into_iter()
        .zip(&cert.weights)
        .map(|((weight, v), (vertex, _))| WitnessMember { vertex: *vertex, weight, strategy: v.to_string() })
        .collect())
}

pub fn audit(mode: AuditMode, sel: OutcomeSelector, tol: f64, out: &Path, assert_bounds: bool) -> Result<(), CliError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    ensure_dir(out)?;
    let max = build_audit_lp(mode, Sense::Maximize, sel).solve(tol).map_err(core_err)?;
    let min = build_audit_lp(mode, Sense::Minimize, sel).solve(tol).map_err(core_err)?;
    let max_path = out.join("certificate_max.json");
    let min_path = out.join("certificate_min.json");
    write_json(&max_path, &max)?;
    write_json(&min_path, &min)?;

    let ch = audit_ch_pointwise(sel);
    let bounds_hold = max.objective <= CLAIMED_BOUNDS.1 + tol && min.objective >= CLAIMED_BOUNDS.0 - tol;
    let summary = AuditSummary {
        mode,
        selector: sel,
        tolerance: tol,
        max: max.objective,
        min: min.objective,
        claimed_bounds: [CLAIMED_BOUNDS.0, CLAIMED_BOUNDS.1],
        bounds_hold,
        ch_pointwise: ChPointwise { min: ch.min, max: ch.max },
        max_witness: witness(&max)?,
        min_witness: witness(&min)?,
    };
    write_json(&out.join("summary.json"), &summary)?;

    println!("mode      {}", mode.name());
    println!("selector  {sel}");
    println!("max S'    {}", fmt_num(max.objective));
    println!("min S'    {}", fmt_num(min.objective));
    println!("CH bounds [{}, {}]", fmt_num(ch.min), fmt_num(ch.max));
    println!("bounds [-1, 0] hold: {bounds_hold}");

    if assert_bounds && !bounds_hold {
        for (label, cert, members) in [("max", &max, &summary.max_witness), ("min", &min, &summary.min_witness)] {
            let inside = cert.objective <= CLAIMED_BOUNDS.1 + tol && cert.objective >= CLAIMED_BOUNDS.0 - tol;
            if inside {
                continue;
            }
            println!("witness ({label}, S' = {}, m = {}):", fmt_num(cert.objective), fmt_num(cert.m));
            for w in members {
                println!("  {:>14}  #{:<3}  {}", fmt_num(w.weight), w.vertex, w.strategy);
            }
        }
        return Err(CliError::Failed("LHV optimum lies outside [-1, 0]".into()));
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct QscanSummary {
    params: DetectorParams,
    selector: OutcomeSelector,
    phi_min: f64,
    phi_max: f64,
    steps: usize,
    /// Where the parameter-free margin g(φ) is positive, clipped to the scan range.
    phi_lo: Option<f64>,
    phi_hi: Option<f64>,
    phi_star: f64,
    g_star: f64,
    sprime_scale: f64,
    /// Largest S' over φ: at phiStar for r = q, at π - phiStar otherwise.
    sprime_max: f64,
    /// Where the quantum S' itself exceeds 0 inside the scan range.
    violation_interval: Option<[f64; 2]>,
    /// Grid point with the largest positive S'.
    grid_peak: Option<ScanPoint>,
}

pub struct QscanArgs {
    pub params: DetectorParams,
    pub selector: OutcomeSelector,
    pub phi_min: f64,
    pub phi_max: f64,
    pub steps: usize,
    pub unit: AngleUnit,
}

pub fn qscan(args: QscanArgs, out: &Path) -> Result<(), CliError> {
    let lo = args.unit.to_radians(args.phi_min);
    let hi = args.unit.to_radians(args.phi_max);
    if args.steps < 2 {
        return Err(CliError::Invalid(format!("steps must be at least 2, got {}", args.steps)));
    }
    if !(lo.is_finite() && hi.is_finite() && hi > lo) {
        return Err(CliError::Invalid(format!("invalid phi range [{}, {}]", args.phi_min, args.phi_max)));
    }
    let step = (hi - lo) / (args.steps - 1) as f64;
    let grid: Vec<f64> =
        (0..args.steps).map(|i| if i + 1 == args.steps { hi } else { lo + step * i as f64 }).collect();
    let table = scan(&args.params, &grid, args.selector).map_err(core_err)?;

    let (g_lo, g_hi) = find_violation_interval(DEFAULT_SEARCH_TOL).map_err(core_err)?;
    let (phi_star, g_star) = find_max_violation(DEFAULT_SEARCH_TOL).map_err(core_err)?;
    let clip = |a: f64, b: f64| {
        let c = (a.max(lo), b.min(hi));
        (c.0 < c.1).then_some(c)
    };
    let clipped = clip(g_lo, g_hi);
    let scale = args.params.sprime_scale();
    // S' = scale·g(φ) for r = q and scale·g(π - φ) for r ≠ q.
    let mirrored = args.selector.r() != args.selector.q();
    let violation = if scale <= 0.0 {
        None
    } else if mirrored {
        clip(PI - g_hi, PI - g_lo)
    } else {
        clipped
    };
    let p = args.params;

    let mut csv = String::from("phi,margin_g,sprime,eta1,eta2,f,F\n");
    for pt in &table.points {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt_num(pt.phi),
            fmt_num(pt.margin),
            fmt_num(pt.sprime),
            fmt_num(p.eta1),
            fmt_num(p.eta2),
            fmt_num(p.collimation),
            fmt_num(p.correlation)
        ));
    }
    ensure_dir(out)?;
    write_text(&out.join("scan.csv"), &csv)?;

    let summary = QscanSummary {
        params: p,
        selector: args.selector,
        phi_min: lo,
        phi_max: hi,
        steps: args.steps,
        phi_lo: clipped.map(|c| c.0),
        phi_hi: clipped.map(|c| c.1),
        phi_star,
        g_star,
        sprime_scale: scale,
        sprime_max: scale * g_star,
        violation_interval: violation.map(|c| [c.0, c.1]),
        grid_peak: table
            .points
            .iter()
            .filter(|pt| pt.sprime > 0.0)
            .max_by(|a, b| a.sprime.total_cmp(&b.sprime))
            .copied(),
    };
    write_json(&out.join("summary.json"), &summary)?;

    match summary.violation_interval {
        Some([a, b]) => println!(
            "S' > 0 for phi in ({}, {}) rad; max S' = {}",
            fmt_num(a),
            fmt_num(b),
            fmt_num(scale * g_star)
        ),
        None => println!("no violation of S' <= 0 in the scanned range"),
    }
    Ok(())
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct SimOutput {
    #[serde(flatten)]
    report: SimReport,
    assumption_a: AssumptionACheck,
}

pub fn simulate(config: &Path, out: &Path) -> Result<(), CliError> {
    let run = SimulateConfig::load(config)?;
    let cfg = run.to_sim_config()?;
    let report = run_experiment(&cfg).map_err(core_err)?;
    let check = check_assumption_a(&report, run.z_threshold());

    let mut csv = String::from("pair,o1,o2,count\n");
    for pe in &report.pairs {
        for o1 in exch::model::Outcome::ALL {
            for o2 in exch::model::Outcome::ALL {
                csv.push_str(&format!("{},{},{},{}\n", pe.pair, o1.symbol(), o2.symbol(), pe.counts.get(o1, o2)));
            }
        }
    }
    let output = SimOutput { report, assumption_a: check };
    ensure_dir(out)?;
    write_text(&out.join("report.json"), &to_json_string(&output)?)?;
    write_text(&out.join("counts.csv"), &csv)?;

    let r = &output.report;
    println!(
        "S' estimate {} ± {} (quantum {})",
        fmt_num(r.sprime_estimate),
        fmt_num(r.sprime_std_error),
        fmt_num(r.sprime_expected)
    );
    let worst = output.assumption_a.details.iter().map(|d| d.z).fold(0.0, f64::max);
    println!(
        "assumption A: {} (max z = {}, threshold {})",
        if output.assumption_a.passed { "pass" } else { "FAIL" },
        fmt_num(worst),
        fmt_num(output.assumption_a.threshold)
    );
    Ok(())
}

pub fn certify(path: &Path, tol: f64) -> Result<(), CliError> {
    if !(tol.is_finite() && tol > 0.0) {
        return Err(CliError::Invalid(format!("tolerance must be positive, got {tol}")));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Invalid(format!("cannot read {}: {e}", path.display())))?;
    let cert: LpCertificate =
        serde_json::from_str(&text).map_err(|e| CliError::Invalid(format!("malformed certificate: {e}")))?;
    let report = cert.verify(tol).map_err(|e| CliError::Failed(e.to_string()))?;
    println!(
        "{} {} {:?}: objective {}, {} checks",
        cert.mode.name(),
        cert.selector,
        cert.sense,
        fmt_num(cert.objective),
        report.checks.len()
    );
    if report.passed() {
        println!("certificate verified (tol {})", fmt_num(tol));
        Ok(())
    } else {
        for c in report.failures() {
            println!("  FAIL {}: expected {}, got {}", c.name, fmt_num(c.expected), fmt_num(c.actual));
        }
        Err(CliError::Failed("certificate verification failed".into()))
    }
}
