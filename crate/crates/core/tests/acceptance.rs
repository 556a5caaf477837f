//! Acceptance criteria, one line each. Runs without the libtest harness so the
//! lines always show; exits non-zero when any criterion fails.

use std::f64::consts::PI;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use spikeforge::cli::{execute, Invocation};
use spikeforge::delaunay::{delaunay_instability, log_slope, solve_delaunay, DelaunayParams};
use spikeforge::domain::DomainSpec;
use spikeforge::elliptic::{
    dirichlet_projection, eig_perturbation_check, exponential_profile_check, random_bumps, thin_set_eigenvalue,
    ProjectionParams,
};
use spikeforge::nonlin::Nonlinearity;
use spikeforge::parabolic::{
    far_field_limit, monotonicity_check, stability_of_steady, sweep_from_one, sweep_from_subsolution, SubsolutionSearch,
    SweepParams,
};
use spikeforge::radial::{constant_d, constant_e, nondegeneracy, shoot_ground_state, RadialProfile, ShootingOptions};
use spikeforge::report::strip_timestamp;
use spikeforge::spikes::{aperture_scan, period_sweep, BalanceOutcome, ScanOptions};
use spikeforge::Result;

// Tolerances, as stated by each criterion.
const C1_SUP: f64 = 1e-6;
const C1_SECONDS: f64 = 1.0;
const C2_REL: f64 = 5e-3;
const C3_GAP: f64 = 0.02;
const C3_E_REL: f64 = 0.01;
const C4_TOL: f64 = 1e-3;
const C5_SLOPE: f64 = -0.5;
const C5_EVEN: f64 = 1e-8;
const C6_LAMBDA: f64 = -1e-3;
const C7_SPREAD: f64 = 1.0;
const C9_ETA: f64 = 1e-8;
const C10_DEV: f64 = 0.5;
const C11_AGREE: f64 = 1e-6;
const C11_DY: f64 = -1e-8;
const C11_FAR: f64 = 0.01;
const C11_LAMBDA: f64 = 0.05;
const C11_DOUBLING: f64 = 0.05;
const C12_SUP: f64 = 1e-3;
const C13_C: f64 = 2.0;

const SEED: u64 = 20;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { passed, detail })
}

fn shoot(p: f64, d: usize) -> Result<RadialProfile> {
    shoot_ground_state(&Nonlinearity::power_field(p)?, d, &ShootingOptions::default())
}

fn c1() -> Result<Verdict> {
    let t = Instant::now();
    let prof = shoot(3.0, 1)?;
    let secs = t.elapsed().as_secs_f64();
    let err = (0..prof.len())
        .filter(|&i| prof.radius(i) <= 20.0)
        .map(|i| (prof.u[i] - 2f64.sqrt() / prof.radius(i).cosh()).abs())
        .fold(0.0, f64::max);
    verdict(
        err <= C1_SUP && secs < C1_SECONDS,
        format!("max |U - √2 sech| on [0,20] = {err:.2e} (≤ {C1_SUP:e}), {secs:.3} s (< {C1_SECONDS} s)"),
    )
}

fn c2() -> Result<Verdict> {
    let a3 = shoot(3.0, 1)?.amplitude;
    let a2 = shoot(2.0, 1)?.amplitude;
    let r3 = (a3 / (2.0 * 2f64.sqrt()) - 1.0).abs();
    let r2 = (a2 / 6.0 - 1.0).abs();
    verdict(
        r3 <= C2_REL && r2 <= C2_REL,
        format!("A(p=3) = {a3:.7} (rel {r3:.1e}), A(p=2) = {a2:.7} (rel {r2:.1e}), tolerance {C2_REL}"),
    )
}

fn c3() -> Result<Verdict> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (p, d, exact) in [(3.0, 1, Some((4.0 * 2f64.sqrt(), 3.2))), (2.0, 1, Some((12.0, 72.0 / 35.0))), (3.0, 3, None)] {
        let prof = shoot(p, d)?;
        let dc = constant_d(&prof)?;
        ok &= dc.relative_gap <= C3_GAP && dc.flux > 0.0;
        let mut s = format!("d={d} p={p}: gap {:.1e}", dc.relative_gap);
        if let Some((dx, ex)) = exact {
            let e = constant_e(&prof)?.value;
            let (rd, re) = ((dc.volume / dx - 1.0).abs(), (e / ex - 1.0).abs());
            ok &= rd <= C3_GAP && re <= C3_E_REL;
            s += &format!(", D {:.6} vs {dx:.6}, E {e:.6} vs {ex:.6}", dc.volume);
        }
        parts.push(s);
    }
    verdict(ok, parts.join("; "))
}

fn c4() -> Result<Verdict> {
    let rep = nondegeneracy(&shoot(3.0, 1)?, C4_TOL)?;
    let (even, odd) = (rep.radial[0], rep.translational[0]);
    verdict(
        (even + 3.0).abs() <= C4_TOL && odd.abs() <= C4_TOL,
        format!("even {even:+.6} (target -3), odd {odd:+.2e} (target 0), tolerance {C4_TOL:e}"),
    )
}

fn c5() -> Result<Verdict> {
    let prof = shoot(3.0, 1)?;
    let ls = [8.0, 10.0, 12.0, 14.0, 16.0];
    let mut raw = Vec::new();
    let mut even = 0.0_f64;
    for &l in &ls {
        let sol = solve_delaunay(&prof, l, &DelaunayParams::default())?;
        raw.push(sol.raw_residue);
        even = even.max(sol.evenness_defect);
    }
    let slope = log_slope(&ls, &raw);
    verdict(
        slope <= C5_SLOPE && even <= C5_EVEN,
        format!("slope of log |u_L - U| = {slope:.4} (≤ {C5_SLOPE}), evenness defect {even:.1e} (≤ {C5_EVEN:e})"),
    )
}

fn c6() -> Result<Verdict> {
    let params = DelaunayParams::default();
    let s1 = solve_delaunay(&shoot(3.0, 1)?, 12.0, &params)?;
    let l1 = delaunay_instability(&s1, 1e-9)?.eigen.lambda;
    let s2 = solve_delaunay(&shoot(3.0, 2)?, 12.0, &params)?;
    let l2 = delaunay_instability(&s2, 1e-8)?.eigen.lambda;
    verdict(
        l1 <= C6_LAMBDA && l2 <= C6_LAMBDA,
        format!("lambda(d=1, L=12) = {l1:+.5}, lambda(d=2, L=12) = {l2:+.5} (≤ {C6_LAMBDA:e})"),
    )
}

/// Projection sweep shared by criteria 7 and 8: (normalized values, min φ₀, deviations).
fn projection_sweep() -> Result<(Vec<f64>, f64, Vec<f64>)> {
    let prof = shoot(3.0, 2)?;
    let cone = DomainSpec::cone(1.25 * PI)?;
    let mut norm = Vec::new();
    let mut dev = Vec::new();
    let mut min_phi = f64::INFINITY;
    for l0 in [4.0, 5.0, 6.0, 7.0, 8.0] {
        let pr = dirichlet_projection(&cone, &prof, l0, &ProjectionParams::default())?;
        norm.push(pr.phi0_center.ln() + 2.0 * l0 + l0.ln());
        min_phi = min_phi.min(pr.phi0_min);
        dev.push(exponential_profile_check(&pr, l0)?.max_deviation);
    }
    Ok((norm, min_phi, dev))
}

fn c7() -> Result<Verdict> {
    let (norm, min_phi, _) = projection_sweep()?;
    let spread = norm.iter().copied().fold(f64::NEG_INFINITY, f64::max) - norm.iter().copied().fold(f64::INFINITY, f64::min);
    verdict(
        spread <= C7_SPREAD && min_phi > 0.0,
        format!("spread of log phi0 + 2L0 + log L0 = {spread:.4} (≤ {C7_SPREAD}), min phi0 = {min_phi:.2e} (> 0)"),
    )
}

fn c8() -> Result<Verdict> {
    let (_, _, dev) = projection_sweep()?;
    let mono = dev.windows(2).all(|w| w[1] < w[0]);
    let list: Vec<String> = dev.iter().map(|d| format!("{d:.3e}")).collect();
    verdict(mono, format!("deviations over L0 = 4..8: [{}] strictly decreasing", list.join(", ")))
}

fn c9() -> Result<Verdict> {
    let prof = shoot(3.0, 2)?;
    let apertures = [0.9, 0.95, 1.05, 1.1, 1.2];
    let rad: Vec<f64> = apertures.iter().map(|a| a * PI).collect();
    let rows = aperture_scan(&rad, &prof, &ScanOptions::default())?;
    let mut ok = true;
    let mut parts = Vec::new();
    for (row, a) in rows.iter().zip(apertures) {
        let expected = if a > 1.0 { "equilibrium" } else { "nonexistence-certificate" };
        ok &= row.label() == expected;
        match &row.outcome {
            BalanceOutcome::Equilibrium(eq) => {
                ok &= eq.eta0_norm <= C9_ETA;
                parts.push(format!("{a}π eq |eta0| {:.1e}", eq.eta0_norm));
            }
            BalanceOutcome::NonexistenceCertificate(c) => {
                ok &= c.margin > 0.0;
                parts.push(format!("{a}π cert margin {:.2e}", c.margin));
            }
        }
    }
    verdict(ok, parts.join(", "))
}

fn c10() -> Result<Verdict> {
    let prof = shoot(3.0, 2)?;
    let sw = period_sweep(1.25 * PI, &[5.0, 6.0, 7.0, 8.0, 9.0], &prof, &ScanOptions::default())?;
    verdict(
        sw.max_deviation <= C10_DEV,
        format!(
            "cone 1.25π, L0 = 5..9: fitted c = {:.4}, max |L - 2L0 - log(L0)/2 - c| = {:.4} (≤ {C10_DEV})",
            sw.fitted_constant, sw.max_deviation
        ),
    )
}

fn c11() -> Result<Verdict> {
    let spec = DomainSpec::half_plane();
    let nl = Nonlinearity::bistable_cubic(0.25)?.normalize()?;
    let params = SweepParams::default();
    let one = sweep_from_one(&spec, &nl, &params)?;
    let (_, up) = sweep_from_subsolution(&spec, &nl, &SubsolutionSearch::default(), &params, Some(&one.field))?;
    let gap = one.field.max_abs_diff(&up.field);
    let dy = monotonicity_check(&one.field, &spec);
    let far = far_field_limit(&one.field, &spec, 6, 1.0).last().map_or(f64::INFINITY, |b| b.sup_deviation);
    let lam = stability_of_steady(&one.field, &one.grid, &nl, 1e-9)?.lambda;
    let big = sweep_from_one(&spec, &nl, &params.doubled())?;
    let lam2 = stability_of_steady(&big.field, &big.grid, &nl, 1e-9)?.lambda;
    let shift = (lam2 - lam).abs() / lam.abs();
    verdict(
        one.converged
            && up.converged
            && gap <= C11_AGREE
            && dy >= C11_DY
            && far <= C11_FAR
            && lam >= C11_LAMBDA
            && lam2 >= C11_LAMBDA
            && shift <= C11_DOUBLING,
        format!(
            "agreement {gap:.1e}, min d_y u {dy:.1e}, far bin {far:.1e}, lambda {lam:.5} / doubled {lam2:.5} (rel change {shift:.1e})"
        ),
    )
}

fn c12() -> Result<Verdict> {
    let r = sweep_from_one(&DomainSpec::half_plane(), &Nonlinearity::power_field(2.0)?, &SweepParams::default())?;
    verdict(r.sup() <= C12_SUP, format!("sup u = {:.2e} at t = {:.1} (≤ {C12_SUP:e})", r.sup(), r.time))
}

fn c13() -> Result<Verdict> {
    let bumps = random_bumps(20, 5.0, SEED);
    let fns: Vec<_> = bumps.iter().map(|b| move |x: f64, y: f64| b.eval(x, y)).collect();
    let refs: Vec<&dyn Fn(f64, f64) -> f64> = fns.iter().map(|f| f as &dyn Fn(f64, f64) -> f64).collect();
    let rep = eig_perturbation_check(&refs, 2.0, 0.05, C13_C, 1e-10)?;
    let nl = Nonlinearity::bistable_cubic(0.25)?.normalize()?;
    let a = -2.0 * nl.lipschitz(0.0, 1.0);
    let mut lams = Vec::new();
    let mut eta = 0.5;
    for _ in 0..5 {
        lams.push(thin_set_eigenvalue(a, eta, 20.0, 0.005)?);
        eta *= 0.5;
    }
    let shrinking = lams.iter().all(|&l| l < 0.0) && lams.windows(2).all(|w| w[1].abs() < w[0].abs());
    verdict(
        rep.violations == 0 && shrinking,
        format!(
            "20 bumps: {} violations at C = {C13_C}, empirical C = {:.4}; slab a = {a:.2}: |lambda| {:.3e} → {:.3e} over 4 halvings",
            rep.violations,
            rep.c_empirical,
            lams[0].abs(),
            lams[4].abs()
        ),
    )
}

/// Runs every subcommand into `dir` and returns the file names written.
fn full_run(dir: &Path) -> Result<Vec<String>> {
    let field = [("nonlin.kind", "field")];
    let bistable = [("nonlin.kind", "bistable")];
    let runs: Vec<(&str, &[(&str, &str)])> = vec![
        ("groundstate", &field),
        ("spectrum", &field),
        ("constants", &field),
        ("delaunay", &field),
        ("projection", &field),
        ("eigen", &[]),
        ("thin-set", &bistable),
        ("balance", &[("nonlin.kind", "field"), ("balance.heights", "5,6,7")]),
        ("aperture-scan", &field),
        ("sweep", &bistable),
        ("stability", &[("nonlin.kind", "field"), ("stability.state", "ansatz")]),
        ("fig-equilibrium", &field),
    ];
    for (cmd, keys) in runs {
        let mut overrides: Vec<(String, String)> = keys.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        overrides.push(("seed".into(), SEED.to_string()));
        overrides.push(("out_dir".into(), dir.to_string_lossy().into_owned()));
        execute(&Invocation {
            command: cmd.into(),
            overrides,
            timestamp: true,
            ..Invocation::default()
        })?;
    }
    let mut names: Vec<String> = std::fs::read_dir(dir)?
        .map(|e| e.map(|e| e.file_name().to_string_lossy().into_owned()))
        .collect::<std::io::Result<_>>()?;
    names.sort();
    Ok(names)
}

fn comparable(path: &Path) -> Result<Vec<u8>> {
    let bytes = std::fs::read(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        let v: serde_json::Value = serde_json::from_slice(&bytes)?;
        Ok(serde_json::to_vec(&strip_timestamp(v))?)
    } else {
        Ok(bytes)
    }
}

fn c14() -> Result<Verdict> {
    let a = tempfile::tempdir()?;
    let b = tempfile::tempdir()?;
    let na = full_run(a.path())?;
    let nb = full_run(b.path())?;
    let mut differing = Vec::new();
    for n in &na {
        if comparable(&a.path().join(n))? != comparable(&b.path().join(n))? {
            differing.push(n.clone());
        }
    }
    verdict(
        na == nb && differing.is_empty(),
        format!("12 subcommands twice with seed {SEED}: {} files, differing {:?}", na.len(), differing),
    )
}

fn main() {
    let criteria: Vec<(&str, fn() -> Result<Verdict>)> = vec![
        ("ground state d=1 cubic vs √2 sech", c1),
        ("tail amplitudes d=1", c2),
        ("constants D (two routes) and E", c3),
        ("nondegeneracy spectrum d=1 cubic", c4),
        ("periodic residue law and evenness", c5),
        ("periodic solution instability", c6),
        ("boundary-repulsion scaling on cone 1.25π", c7),
        ("exponential profile near the spike", c8),
        ("force balance dichotomy over apertures", c9),
        ("period tuning over heights", c10),
        ("unique stable solution on the half-plane", c11),
        ("field-type decay on the half-plane", c12),
        ("eigenvalue perturbation and thin slabs", c13),
        ("reproducible reports", c14),
    ];
    let start = Instant::now();
    let results: Vec<(Result<Verdict>, f64)> = criteria
        .par_iter()
        .map(|(_, f)| {
            let t = Instant::now();
            (f(), t.elapsed().as_secs_f64())
        })
        .collect();
    let mut failed = 0;
    for (i, ((name, _), (res, secs))) in criteria.iter().zip(results).enumerate() {
        let (tag, detail) = match res {
            Ok(v) if v.passed => ("PASS", v.detail),
            Ok(v) => ("FAIL", v.detail),
            Err(e) => ("FAIL", format!("error: {e}")),
        };
        if tag == "FAIL" {
            failed += 1;
        }
        println!("criterion {:>2} {tag} [{secs:6.1} s] {name}: {detail}", i + 1);
    }
    println!("acceptance: {} of {} passed in {:.1} s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
