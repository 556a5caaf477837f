//! The computation behind each subcommand. Every command returns its results,
//! the pass/fail checks it evaluated, and the artifacts to be written.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use super::config::RunConfig;
use crate::delaunay::{delaunay_instability, log_slope, solve_delaunay, DelaunayParams};
use crate::domain::{DomainSpec, SideBc};
use crate::elliptic::{
    dirichlet_projection, eig_perturbation_check, exponential_profile_check, principal_eigenvalue, random_bumps,
    thin_set_eigenvalue, ProjectionParams, ProjectionResult,
};
use crate::error::{Error, Result};
use crate::nonlin::{Family, Nonlinearity, Table};
use crate::parabolic::{
    far_field_limit, monotonicity_check, stability_of_steady, sweep_from_one, sweep_from_subsolution, SubsolutionSearch,
    SweepParams, SweepResult,
};
use crate::radial::{constant_d, constant_e, free_spectrum, nondegeneracy, shoot_ground_state, RadialProfile, ShootingOptions};
use crate::spikes::{
    ansatz_consistency, aperture_scan, assemble_ansatz, max_inclination, period_sweep, polish_ansatz, solve_balance,
    BalanceMode, BalanceOptions, BalanceOutcome, BalanceProblem, Equilibrium, Phi0Model, ScanOptions,
};

/// One pass/fail line of a report.
#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub value: f64,
    /// `<=`, `>=`, `<`, `>` or `holds`.
    pub relation: &'static str,
    pub limit: f64,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value <= limit,
            value,
            relation: "<=",
            limit,
        }
    }

    pub fn at_least(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value >= limit,
            value,
            relation: ">=",
            limit,
        }
    }

    pub fn above(name: impl Into<String>, value: f64, limit: f64) -> Self {
        Check {
            name: name.into(),
            passed: value > limit,
            value,
            relation: ">",
            limit,
        }
    }

    pub fn holds(name: impl Into<String>, ok: bool) -> Self {
        Check {
            name: name.into(),
            passed: ok,
            value: if ok { 1.0 } else { 0.0 },
            relation: "holds",
            limit: 1.0,
        }
    }

    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        if self.relation == "holds" {
            format!("{tag} {}", self.name)
        } else {
            format!("{tag} {}: {:.6e} {} {:.6e}", self.name, self.value, self.relation, self.limit)
        }
    }
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Value,
    pub checks: Vec<Check>,
    /// File name (relative to the output directory) and contents.
    pub artifacts: Vec<(String, Vec<u8>)>,
}

/// Runs the command named in `cfg`. `fig` asks `balance` for the figure CSV.
pub fn run(cfg: &RunConfig, fig: bool) -> Result<Outcome> {
    match cfg.command.as_str() {
        "groundstate" => groundstate(cfg),
        "spectrum" => spectrum(cfg),
        "constants" => constants(cfg),
        "delaunay" => delaunay(cfg),
        "projection" => projection(cfg),
        "eigen" => eigen(cfg),
        "thin-set" => thin_set(cfg),
        "balance" => balance(cfg, fig),
        "fig-equilibrium" => balance(cfg, true),
        "aperture-scan" => scan(cfg),
        "sweep" => sweep(cfg),
        "stability" => stability(cfg),
        other => Err(Error::config("command", format!("unknown subcommand `{other}`"))),
    }
}

fn nonlinearity(cfg: &RunConfig) -> Result<Nonlinearity> {
    let nl = match cfg.choice("nonlin.kind", &["bistable", "field", "table"])? {
        "bistable" => Nonlinearity::bistable_cubic(cfg.f64("nonlin.theta")?)?,
        "field" => Nonlinearity::power_field(cfg.f64("nonlin.p")?)?,
        _ => {
            let path = cfg.str("nonlin.table_path")?;
            if path.is_empty() {
                return Err(Error::config("nonlin.table_path", "required for nonlin.kind = table"));
            }
            Nonlinearity::tabulated(Table::from_csv(Path::new(path))?)?
        }
    };
    if cfg.bool("nonlin.normalize")? {
        nl.normalize()
    } else {
        Ok(nl)
    }
}

/// The exponent `p` when the term is the field power law, for closed-form checks.
fn power_exponent(cfg: &RunConfig) -> Result<Option<f64>> {
    Ok(match cfg.str("nonlin.kind")? {
        "field" => Some(cfg.f64("nonlin.p")?),
        _ => None,
    })
}

fn domain(cfg: &RunConfig, auto: &str) -> Result<DomainSpec> {
    let kind = match cfg.str("domain.kind")? {
        "auto" => auto,
        _ => cfg.choice("domain.kind", &["half-plane", "cone", "parabola", "sampled", "exterior-ball"])?,
    };
    match kind {
        "half-plane" => Ok(DomainSpec::half_plane()),
        "cone" => DomainSpec::cone(cfg.positive("domain.aperture_over_pi")? * PI),
        "parabola" => Ok(DomainSpec::parabola(cfg.f64("domain.c")?)),
        "sampled" => {
            let path = cfg.str("domain.phi_path")?;
            if path.is_empty() {
                return Err(Error::config("domain.phi_path", "required for domain.kind = sampled"));
            }
            DomainSpec::sampled_from_csv(Path::new(path))
        }
        _ => DomainSpec::exterior_ball(cfg.positive("domain.rho")?, cfg.f64("domain.ell")?),
    }
}

fn dimension(cfg: &RunConfig) -> Result<usize> {
    let d = cfg.usize("d")?;
    if (1..=8).contains(&d) {
        Ok(d)
    } else {
        Err(Error::config("d", format!("expected 1 ≤ d ≤ 8, found {d}")))
    }
}

fn ground_state(cfg: &RunConfig, nl: &Nonlinearity, d: usize) -> Result<RadialProfile> {
    let opts = ShootingOptions {
        h: cfg.positive("shoot.h")?,
        r_max: cfg.positive("shoot.r_max")?,
        tol: cfg.positive("shoot.tol")?,
        u0_max: cfg.positive("shoot.u0_max")?,
        fit_tol: cfg.positive("shoot.fit_tol")?,
    };
    shoot_ground_state(nl, d, &opts)
}

fn projection_params(cfg: &RunConfig) -> Result<ProjectionParams> {
    Ok(ProjectionParams {
        h: cfg.positive("projection.h")?,
        lateral_margin: cfg.positive("projection.lateral_margin")?,
        top_margin: cfg.positive("projection.top_margin")?,
    })
}

fn balance_options(cfg: &RunConfig) -> Result<BalanceOptions> {
    Ok(BalanceOptions {
        tol: cfg.positive("balance.tol")?,
        k_max: cfg.usize("balance.k_max")?,
        max_iter: cfg.usize("balance.max_iter")?,
        ..BalanceOptions::default()
    })
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("plain data")
}

/// Closed form of the 1D ground state of `-u + u^p`: `a sech^{2/(p-1)}(b x)`.
fn power_ground_state_1d(p: f64, x: f64) -> f64 {
    let a = (0.5 * (p + 1.0)).powf(1.0 / (p - 1.0));
    let b = 0.5 * (p - 1.0);
    a * (1.0 / (b * x).cosh()).powf(2.0 / (p - 1.0))
}

fn groundstate(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let d = dimension(cfg)?;
    let prof = ground_state(cfg, &nl, d)?;
    let mut checks = vec![Check::at_most("ode residual", prof.ode_residual, cfg.f64("shoot.tol")?.max(1e-6))];
    let mut closed = Value::Null;
    if let (1, Some(p)) = (d, power_exponent(cfg)?) {
        let mut err = 0.0_f64;
        for i in 0..prof.len() {
            let r = prof.radius(i);
            if r <= 20.0 {
                err = err.max((prof.u[i] - power_ground_state_1d(p, r)).abs());
            }
        }
        let amp = power_ground_state_1d(p, 0.0) * 2f64.powf(2.0 / (p - 1.0));
        let rel = (prof.amplitude / amp - 1.0).abs();
        checks.push(Check::at_most("max |U - closed form| on [0, 20]", err, 1e-6));
        checks.push(Check::at_most("relative error of A", rel, 5e-3));
        closed = json!({ "u0": power_ground_state_1d(p, 0.0), "amplitude": amp, "max_error": err });
    }
    Ok(Outcome {
        results: json!({ "profile": prof.sidecar_json(), "closed_form": closed }),
        checks,
        artifacts: vec![
            ("groundstate_profile.csv".into(), prof.to_csv_bytes()),
            ("groundstate_profile.json".into(), super::pretty_bytes(&prof.sidecar_json())),
        ],
    })
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let d = dimension(cfg)?;
    let prof = ground_state(cfg, &nl, d)?;
    let tol = cfg.positive("spectrum.tol")?;
    let count = cfg.usize("spectrum.count")?.max(1);
    let rep = nondegeneracy(&prof, tol)?;
    let free = free_spectrum(&prof, 0, count)?;
    let mut checks = vec![Check::holds("kernel spanned by translations", rep.nondegenerate)];
    if let (1, Some(p)) = (d, power_exponent(cfg)?) {
        // Pöschl–Teller: the even ground level is 1 - (p+1)²/4, the odd one is 0.
        let even = 1.0 - 0.25 * (p + 1.0) * (p + 1.0);
        checks.push(Check::at_most("|even eigenvalue - 1 + (p+1)²/4|", (rep.radial[0] - even).abs(), 1e-3));
        checks.push(Check::at_most("|odd eigenvalue|", rep.translational[0].abs(), 1e-3));
    }
    Ok(Outcome {
        results: json!({ "amplitude": prof.amplitude, "nondegeneracy": to_value(&rep), "free_radial": free }),
        checks,
        artifacts: Vec::new(),
    })
}

fn constants(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let d = dimension(cfg)?;
    let prof = ground_state(cfg, &nl, d)?;
    let dc = constant_d(&prof)?;
    let e = constant_e(&prof)?;
    let mut checks = vec![
        Check::at_most("relative gap between D routes", dc.relative_gap, cfg.positive("constants.gap_tol")?),
        Check::above("D", dc.flux, 0.0),
    ];
    let exact = match (d, power_exponent(cfg)?) {
        (1, Some(p)) if p == 3.0 => Some((4.0 * 2f64.sqrt(), 3.2)),
        (1, Some(p)) if p == 2.0 => Some((12.0, 72.0 / 35.0)),
        _ => None,
    };
    if let Some((d_exact, e_exact)) = exact {
        checks.push(Check::at_most("relative error of D", (dc.flux / d_exact - 1.0).abs(), 0.02));
        checks.push(Check::at_most("relative error of E", (e.value / e_exact - 1.0).abs(), 0.01));
    }
    Ok(Outcome {
        results: json!({
            "amplitude": prof.amplitude,
            "d_constant": to_value(&dc),
            "e_constant": to_value(&e),
            "exact": exact.map(|(a, b)| json!({ "d": a, "e": b })),
        }),
        checks,
        artifacts: Vec::new(),
    })
}

fn delaunay(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let d = dimension(cfg)?;
    let prof = ground_state(cfg, &nl, d)?;
    let periods = cfg.list("delaunay.periods")?;
    if periods.is_empty() {
        return Err(Error::config("delaunay.periods", "needs at least one period"));
    }
    let params = DelaunayParams {
        h: cfg.opt_f64("delaunay.h")?,
        images: cfg.usize("delaunay.images")?,
        newton_tol: cfg.positive("delaunay.newton_tol")?,
        ..DelaunayParams::default()
    };
    let eig_tol = cfg.positive("delaunay.eig_tol")?;
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut artifacts = Vec::new();
    let (mut raw, mut chain) = (Vec::new(), Vec::new());
    for &l in &periods {
        let sol = solve_delaunay(&prof, l, &params)?;
        let inst = delaunay_instability(&sol, eig_tol)?;
        checks.push(Check::at_most(format!("L = {l}: evenness defect"), sol.evenness_defect, 1e-8));
        checks.push(Check::at_most(format!("L = {l}: principal eigenvalue"), inst.eigen.lambda, -1e-3));
        checks.push(Check::above(format!("L = {l}: min u_L"), sol.min_value, 0.0));
        raw.push(sol.raw_residue);
        chain.push(sol.residue);
        let mut side = sol.sidecar_json();
        side["lambda"] = json!(inst.eigen.lambda);
        side["null_residual"] = json!(inst.null_residual);
        side["null_sign_changing"] = json!(inst.null_sign_changing);
        side["min_value"] = json!(sol.min_value);
        side["uniqueness_gap"] = json!(sol.uniqueness_gap);
        artifacts.push((format!("delaunay_L{l}.spkf"), sol.field.to_binary()));
        artifacts.push((format!("delaunay_L{l}.json"), super::pretty_bytes(&side)));
        rows.push(side);
    }
    let mut slopes = Value::Null;
    if periods.len() >= 2 {
        let s_raw = log_slope(&periods, &raw);
        let s_chain = log_slope(&periods, &chain);
        checks.push(Check::at_most("slope of log |u_L - U|", s_raw, -0.5));
        slopes = json!({ "raw": s_raw, "chain": s_chain });
    }
    Ok(Outcome {
        results: json!({ "d": d, "rows": rows, "slopes": slopes }),
        checks,
        artifacts,
    })
}

fn projection(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let spec = domain(cfg, "cone")?;
    let prof = ground_state(cfg, &nl, 2)?;
    let pp = projection_params(cfg)?;
    let heights = cfg.list("projection.heights")?;
    if heights.is_empty() {
        return Err(Error::config("projection.heights", "needs at least one height"));
    }
    let mut rows = Vec::new();
    let mut checks = Vec::new();
    let mut normalized = Vec::new();
    let mut deviations = Vec::new();
    let mut last = None;
    for &l0 in &heights {
        let pr = dirichlet_projection(&spec, &prof, l0, &pp)?;
        let dev = exponential_profile_check(&pr, l0)?;
        let n = pr.phi0_center.ln() + 2.0 * l0 + l0.ln();
        checks.push(Check::above(format!("L0 = {l0}: min phi0"), pr.phi0_min, 0.0));
        rows.push(json!({
            "l0": l0,
            "phi0_center": pr.phi0_center,
            "normalized": n,
            "phi0_min": pr.phi0_min,
            "comparison_constant": pr.comparison_constant,
            "cg_iterations": pr.cg_iterations,
            "profile": to_value(&dev),
        }));
        normalized.push(n);
        deviations.push(dev.max_deviation);
        last = Some((l0, pr));
    }
    let spread = normalized.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - normalized.iter().copied().fold(f64::INFINITY, f64::min);
    checks.push(Check::at_most("spread of log phi0 + 2 L0 + log L0", spread, 1.0));
    checks.push(Check::holds(
        "exponential-profile deviation decreases",
        deviations.windows(2).all(|w| w[1] < w[0]),
    ));
    let (l0, pr) = last.expect("non-empty heights");
    Ok(Outcome {
        results: json!({ "domain": spec.describe(), "rows": rows, "spread": spread }),
        checks,
        artifacts: vec![(format!("projection_phi0_L{l0}.spkf"), pr.phi0.to_binary())],
    })
}

fn eigen(cfg: &RunConfig) -> Result<Outcome> {
    let bumps = random_bumps(cfg.usize("eigen.bumps")?, cfg.positive("eigen.max_amp")?, cfg.seed);
    let fns: Vec<_> = bumps.iter().map(|b| move |x: f64, y: f64| b.eval(x, y)).collect();
    let refs: Vec<&dyn Fn(f64, f64) -> f64> = fns.iter().map(|f| f as &dyn Fn(f64, f64) -> f64).collect();
    let c = cfg.positive("eigen.c")?;
    let rep = eig_perturbation_check(&refs, cfg.positive("eigen.q")?, cfg.positive("eigen.h")?, c, cfg.positive("eigen.tol")?)?;
    let checks = vec![
        Check::at_most("violations of the two-sided bound", rep.violations as f64, 0.0),
        Check::at_most("empirical constant", rep.c_empirical, c),
    ];
    Ok(Outcome {
        results: json!({ "bumps": to_value(&bumps), "report": to_value(&rep) }),
        checks,
        artifacts: Vec::new(),
    })
}

fn thin_set(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let (lo, hi) = match cfg.str("thin.lip_range")? {
        "auto" | "" => {
            let top = nl.positive_roots().into_iter().fold(f64::NAN, f64::max);
            if !top.is_finite() {
                return Err(Error::config("thin.lip_range", "no positive root; give lo,hi explicitly"));
            }
            (0.0, top)
        }
        _ => match cfg.list("thin.lip_range")?.as_slice() {
            &[lo, hi] if hi > lo => (lo, hi),
            _ => return Err(Error::config("thin.lip_range", "expected lo,hi with lo < hi")),
        },
    };
    let lip = nl.lipschitz(lo, hi);
    let a = -2.0 * lip;
    let (r_box, h) = (cfg.positive("thin.r_box")?, cfg.positive("thin.h")?);
    let mut eta = cfg.positive("thin.eta")?;
    let mut rows = Vec::new();
    let mut lams = Vec::new();
    for _ in 0..=cfg.usize("thin.steps")? {
        let lam = thin_set_eigenvalue(a, eta, r_box, h)?;
        rows.push(json!({ "eta": eta, "lambda": lam }));
        lams.push(lam);
        eta *= 0.5;
    }
    let checks = vec![
        Check::holds("every eigenvalue negative", lams.iter().all(|&l| l < 0.0)),
        Check::holds("|lambda| strictly decreases as the slab halves", lams.windows(2).all(|w| w[1].abs() < w[0].abs())),
    ];
    Ok(Outcome {
        results: json!({ "lipschitz": lip, "lip_range": [lo, hi], "a": a, "rows": rows }),
        checks,
        artifacts: Vec::new(),
    })
}

/// Fraction of the admissible inclination, or `None` when the key is `auto`.
fn inclination(cfg: &RunConfig, key: &str, beta_max: f64) -> Result<Option<f64>> {
    Ok(match cfg.opt_f64(key)? {
        Some(f) if f > 0.0 && f < 1.0 => Some(f * beta_max),
        Some(f) => return Err(Error::config(key, format!("expected a fraction in (0, 1), found {f}"))),
        None => None,
    })
}

fn required(cfg: &RunConfig, key: &str, mode: &str) -> Result<f64> {
    cfg.opt_f64(key)?
        .ok_or_else(|| Error::config(key, format!("required for balance.mode = {mode}")))
}

fn balance_mode(cfg: &RunConfig, beta_max: f64) -> Result<BalanceMode> {
    let beta = inclination(cfg, "balance.inclination", beta_max)?.unwrap_or(0.5 * beta_max);
    let plus = inclination(cfg, "balance.inclination_plus", beta_max)?;
    let mode = cfg.choice("balance.mode", &["symmetric", "fix-minus", "fix-directions", "free-height"])?;
    Ok(match mode {
        "symmetric" => BalanceMode::Symmetric { inclination: beta },
        "fix-directions" => BalanceMode::FixDirections {
            inclination_minus: beta,
            inclination_plus: plus
                .ok_or_else(|| Error::config("balance.inclination_plus", "required for balance.mode = fix-directions"))?,
        },
        "fix-minus" => BalanceMode::FixMinus {
            inclination_minus: beta,
            l_minus: required(cfg, "balance.l_minus", mode)?,
            seed_inclination_plus: plus,
        },
        _ => BalanceMode::FreeHeight {
            inclination_minus: beta,
            l_minus: required(cfg, "balance.l_minus", mode)?,
            l_plus: required(cfg, "balance.l_plus", mode)?,
            seed_inclination_plus: plus,
        },
    })
}

fn phi0_model(cfg: &RunConfig, pr: &ProjectionResult) -> Result<Phi0Model> {
    Ok(match cfg.str("balance.phi0")? {
        "grid" => Phi0Model::Fixed(pr.phi0_center),
        "law" => Phi0Model::Law {
            c: cfg.positive("balance.phi0_c")?,
        },
        _ => Phi0Model::Fixed(cfg.positive("balance.phi0")?),
    })
}

/// Centres, directions, spacings and force residuals of an equilibrium.
pub fn equilibrium_json(eq: &Equilibrium) -> Value {
    let c = &eq.chain;
    json!({
        "l0": c.l0,
        "l_minus": c.l_minus,
        "l_plus": c.l_plus,
        "theta_minus": c.theta_minus,
        "theta_plus": c.theta_plus,
        "inclination_minus": crate::spikes::inclination_of(c.theta_minus),
        "inclination_plus": crate::spikes::inclination_of(c.theta_plus),
        "centers": c.centers().iter().map(|(k, z)| json!({ "k": k, "z": z })).collect::<Vec<_>>(),
        "phi0": eq.phi0,
        "eta0": eq.forces.eta0,
        "eta0_norm": eq.eta0_norm,
        "eta_k": to_value(&eq.forces.others),
        "boundary_force": eq.forces.boundary,
        "attraction_minus": eq.forces.attraction_minus,
        "attraction_plus": eq.forces.attraction_plus,
        "perturbation_residual": eq.perturbation_residual,
    })
}

/// Plot-ready CSV: boundary polyline, centres with their net force, and the
/// three forces acting on the central spike.
pub fn figure_csv(eq: &Equilibrium, spec: &DomainSpec) -> Vec<u8> {
    let mut s = String::from("kind,k,x,y,fx,fy\n");
    let centers = eq.chain.centers();
    let reach = centers.iter().map(|(_, z)| z[0].abs()).fold(0.0, f64::max) + 2.0;
    let n = 400;
    for i in 0..=n {
        let x = -reach + 2.0 * reach * i as f64 / n as f64;
        if let Some(y) = spec.phi(x) {
            let _ = writeln!(s, "boundary,,{x},{y},0,0");
        }
    }
    let f = &eq.forces;
    for (k, z) in &centers {
        let eta = if *k == 0 {
            f.eta0
        } else {
            f.others.iter().find(|o| o.k == *k).map_or([0.0; 2], |o| o.eta)
        };
        let _ = writeln!(s, "center,{k},{},{},{},{}", z[0], z[1], eta[0], eta[1]);
    }
    let z0 = eq.chain.z0();
    for (kind, v) in [
        ("boundary-repulsion", f.boundary),
        ("attraction-minus", f.attraction_minus),
        ("attraction-plus", f.attraction_plus),
    ] {
        let _ = writeln!(s, "{kind},0,{},{},{},{}", z0[0], z0[1], v[0], v[1]);
    }
    s.into_bytes()
}

fn balance(cfg: &RunConfig, fig: bool) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let spec = domain(cfg, "cone")?;
    let prof = ground_state(cfg, &nl, 2)?;
    let pp = projection_params(cfg)?;
    let opts = balance_options(cfg)?;
    let l0 = cfg.positive("balance.l0")?;
    let beta_max = max_inclination(&spec).unwrap_or(0.0);
    let mode = balance_mode(cfg, beta_max)?;
    let pr = dirichlet_projection(&spec, &prof, l0, &pp)?;
    let problem = BalanceProblem {
        d: 2,
        amplitude: prof.amplitude,
        l0,
        phi0: phi0_model(cfg, &pr)?,
    };
    let outcome = solve_balance(&spec, &problem, &mode, &opts)?;
    let mut checks = Vec::new();
    let mut artifacts = Vec::new();
    let mut results = json!({
        "domain": spec.describe(),
        "phi0_grid": pr.phi0_center,
        "mode": to_value(&mode),
        "outcome": outcome.label(),
    });
    match &outcome {
        BalanceOutcome::Equilibrium(eq) => {
            checks.push(Check::at_most("|eta_0|", eq.eta0_norm, opts.tol));
            checks.push(Check::holds(
                "vertical force changes sign across the equilibrium spacing",
                eq.transversality[0] * eq.transversality[1] < 0.0,
            ));
            let ej = equilibrium_json(eq);
            results["equilibrium"] = to_value(eq.as_ref());
            artifacts.push(("equilibrium.json".into(), super::pretty_bytes(&ej)));
            if fig {
                artifacts.push(("equilibrium_figure.csv".into(), figure_csv(eq, &spec)));
            }
            let trials = cfg.usize("balance.consistency_trials")?;
            if trials > 0 && cfg.command == "balance" {
                let rel = cfg.positive("balance.consistency_relative")?;
                let rep = ansatz_consistency(&eq.chain, &pr, &prof, trials, rel, cfg.seed)?;
                checks.push(Check::at_least(
                    "perturbed chains with a larger projected force",
                    rep.wins as f64,
                    trials as f64,
                ));
                results["consistency"] = to_value(&rep);
            }
        }
        BalanceOutcome::NonexistenceCertificate(cert) => {
            checks.push(Check::above("certificate margin", cert.margin, 0.0));
            results["certificate"] = to_value(cert);
        }
    }
    let heights = cfg.list("balance.heights")?;
    if !heights.is_empty() && cfg.command == "balance" {
        let aperture = spec
            .aperture()
            .ok_or_else(|| Error::config("balance.heights", "the period sweep needs a cone"))?;
        let so = ScanOptions {
            l0,
            projection: pp,
            balance: opts,
            inclination_fraction: cfg.f64("balance.inclination")?,
            ..ScanOptions::default()
        };
        let sw = period_sweep(aperture, &heights, &prof, &so)?;
        checks.push(Check::at_most("deviation of L - 2 L0 - log(L0)/2 from one constant", sw.max_deviation, 0.5));
        results["period_sweep"] = to_value(&sw);
    }
    Ok(Outcome {
        results,
        checks,
        artifacts,
    })
}

fn scan(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let prof = ground_state(cfg, &nl, 2)?;
    let apertures = cfg.list("scan.apertures_over_pi")?;
    if apertures.is_empty() {
        return Err(Error::config("scan.apertures_over_pi", "needs at least one aperture"));
    }
    let opts = ScanOptions {
        l0: cfg.positive("scan.l0")?,
        projection: projection_params(cfg)?,
        balance: balance_options(cfg)?,
        inclination_fraction: cfg.positive("scan.inclination")?,
        family_offset: cfg.positive("scan.family_offset")?,
    };
    let rad: Vec<f64> = apertures.iter().map(|a| a * PI).collect();
    let rows = aperture_scan(&rad, &prof, &opts)?;
    let mut csv = String::from("aperture_over_pi,outcome,phi0,l_minus,l_plus,eta0_norm,margin,family_delta_l_plus,family_eta0_norm\n");
    let mut checks = Vec::new();
    for (row, &a) in rows.iter().zip(&apertures) {
        let expected = if a > 1.0 { "equilibrium" } else { "nonexistence-certificate" };
        checks.push(Check::holds(format!("aperture {a}π: {expected}"), row.label() == expected));
        let fam = row.family.as_ref();
        let (fd, fe) = fam.map_or((f64::NAN, f64::NAN), |f| (f.delta_l_plus, f.eta0_norm));
        match &row.outcome {
            BalanceOutcome::Equilibrium(eq) => {
                checks.push(Check::at_most(format!("aperture {a}π: |eta_0|"), eq.eta0_norm, opts.balance.tol));
                checks.push(Check::holds(
                    format!("aperture {a}π: distinct nearby equilibrium"),
                    fam.is_some_and(|f| f.eta0_norm <= opts.balance.tol && f.delta_l_plus.abs() > 1e-6),
                ));
                let _ = writeln!(
                    csv,
                    "{a},equilibrium,{},{},{},{},,{fd},{fe}",
                    row.phi0, eq.chain.l_minus, eq.chain.l_plus, eq.eta0_norm
                );
            }
            BalanceOutcome::NonexistenceCertificate(c) => {
                checks.push(Check::above(format!("aperture {a}π: certificate margin"), c.margin, 0.0));
                let _ = writeln!(csv, "{a},nonexistence-certificate,{},,,,{},,", row.phi0, c.margin);
            }
        }
    }
    Ok(Outcome {
        results: json!({ "rows": to_value(&rows) }),
        checks,
        artifacts: vec![("aperture_scan.csv".into(), csv.into_bytes())],
    })
}

fn side_bc(cfg: &RunConfig, key: &str) -> Result<Option<SideBc>> {
    Ok(match cfg.choice(key, &["auto", "neumann", "zero", "one"])? {
        "auto" => None,
        "neumann" => Some(SideBc::Neumann),
        "zero" => Some(SideBc::Zero),
        _ => Some(SideBc::One),
    })
}

fn sweep_params(cfg: &RunConfig) -> Result<SweepParams> {
    Ok(SweepParams {
        h: cfg.positive("sweep.h")?,
        half_width: cfg.positive("sweep.half_width")?,
        height: cfg.positive("sweep.height")?,
        lateral: side_bc(cfg, "sweep.lateral")?
            .ok_or_else(|| Error::config("sweep.lateral", "auto is only accepted for sweep.top"))?,
        top: side_bc(cfg, "sweep.top")?,
        dt: cfg.opt_f64("sweep.dt")?,
        steady_tol: cfg.positive("sweep.steady_tol")?,
        t_max: cfg.positive("sweep.t_max")?,
        record_every: cfg.usize("sweep.record_every")?.max(1),
    })
}

fn sweep_summary(r: &SweepResult) -> Value {
    json!({
        "time": r.time,
        "steps": r.steps,
        "dt": r.dt,
        "max_dt": r.max_dt,
        "converged": r.converged,
        "direction": to_value(&r.direction),
        "monotonicity_violation": r.monotonicity_violation,
        "range_violation": r.range_violation,
        "comparison_excess": r.comparison_excess,
        "pde_residual": r.pde_residual,
        "sup": r.sup(),
    })
}

const STABLE_FLOOR: f64 = 0.05;
/// Distance from a spike centre to the box edge below which the spike is dropped.
const CORE_RADIUS: f64 = 6.0;
const DOUBLING_TOL: f64 = 0.05;

fn sweep(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let spec = domain(cfg, "half-plane")?;
    let params = sweep_params(cfg)?;
    let bistable = nl.family() == Some(Family::Bistable);
    let from = match cfg.choice("sweep.from", &["auto", "one", "subsolution", "both"])? {
        "auto" if bistable => "both",
        "auto" => "one",
        f => f,
    };
    let mut checks = Vec::new();
    let mut artifacts = Vec::new();
    let mut results = json!({ "domain": spec.describe(), "from": from });
    let one = if from != "subsolution" {
        let r = sweep_from_one(&spec, &nl, &params)?;
        checks.push(Check::holds("sweep from one reached a steady state", r.converged));
        checks.push(Check::holds("sweep from one is nonincreasing in time", r.monotone()));
        results["from_one"] = sweep_summary(&r);
        artifacts.push(("sweep_one_series.csv".into(), r.series_csv().into_bytes()));
        artifacts.push(("sweep_one_field.spkf".into(), r.field.to_binary()));
        artifacts.push(("sweep_one_field.csv".into(), r.field.to_csv_bytes()));
        Some(r)
    } else {
        None
    };
    let sub = if from != "one" {
        let search = SubsolutionSearch {
            heights: cfg.list("sub.heights")?,
            margins: cfg.list("sub.margins")?,
            ..SubsolutionSearch::default()
        };
        let (s, r) = sweep_from_subsolution(&spec, &nl, &search, &params, one.as_ref().map(|o| &o.field))?;
        checks.push(Check::at_least("subsolution margin", s.margin, 0.0));
        checks.push(Check::holds("sweep from the subsolution reached a steady state", r.converged));
        checks.push(Check::holds("sweep from the subsolution is nondecreasing in time", r.monotone()));
        if let Some(ex) = r.comparison_excess {
            checks.push(Check::at_most("sweep from below stays under the steady state from one", ex, 1e-8));
        }
        results["subsolution"] = to_value(&s);
        results["from_subsolution"] = sweep_summary(&r);
        artifacts.push(("sweep_sub_series.csv".into(), r.series_csv().into_bytes()));
        artifacts.push(("sweep_sub_field.spkf".into(), r.field.to_binary()));
        Some(r)
    } else {
        None
    };
    if let (Some(a), Some(b)) = (&one, &sub) {
        let gap = a.field.max_abs_diff(&b.field);
        checks.push(Check::at_most("sup |from one - from subsolution|", gap, 1e-6));
        results["agreement"] = json!(gap);
    }
    let steady = one.as_ref().or(sub.as_ref()).expect("at least one sweep");
    if bistable {
        let dy = monotonicity_check(&steady.field, &spec);
        checks.push(Check::at_least("min d_y u", dy, -1e-8));
        let bins = far_field_limit(&steady.field, &spec, cfg.usize("sweep.bins")?.max(1), 1.0);
        if let Some(last) = bins.last() {
            checks.push(Check::at_most("sup |u - 1| in the farthest bin", last.sup_deviation, 0.01));
        }
        results["min_dy"] = json!(dy);
        results["far_field"] = to_value(&bins);
        if cfg.bool("sweep.stability")? {
            let tol = cfg.positive("sweep.eig_tol")?;
            let lam = stability_of_steady(&steady.field, &steady.grid, &nl, tol)?.lambda;
            let big = sweep_from_one(&spec, &nl, &params.doubled())?;
            let lam2 = stability_of_steady(&big.field, &big.grid, &nl, tol)?.lambda;
            checks.push(Check::at_least("principal eigenvalue", lam, STABLE_FLOOR));
            checks.push(Check::at_most("relative change on the doubled box", (lam2 - lam).abs() / lam.abs(), DOUBLING_TOL));
            results["stability"] = json!({ "lambda": lam, "lambda_doubled": lam2 });
        }
    } else {
        checks.push(Check::at_most("sup u", steady.sup(), 1e-3));
    }
    Ok(Outcome {
        results,
        checks,
        artifacts,
    })
}

fn stability(cfg: &RunConfig) -> Result<Outcome> {
    let nl = nonlinearity(cfg)?;
    let tol = cfg.positive("stability.eig_tol")?;
    let mut checks = Vec::new();
    let results;
    let mut artifacts = Vec::new();
    if cfg.choice("stability.state", &["steady", "ansatz"])? == "steady" {
        let spec = domain(cfg, "half-plane")?;
        let params = sweep_params(cfg)?;
        let r = sweep_from_one(&spec, &nl, &params)?;
        let eig = stability_of_steady(&r.field, &r.grid, &nl, tol)?;
        let big = sweep_from_one(&spec, &nl, &params.doubled())?;
        let lam2 = stability_of_steady(&big.field, &big.grid, &nl, tol)?.lambda;
        checks.push(Check::holds("steady state reached", r.converged));
        checks.push(Check::at_least("principal eigenvalue", eig.lambda, cfg.f64("stability.floor")?));
        checks.push(Check::at_most(
            "relative change on the doubled box",
            (lam2 - eig.lambda).abs() / eig.lambda.abs(),
            cfg.positive("stability.doubling_tol")?,
        ));
        artifacts.push(("stability_eigenfunction.spkf".into(), eig.eigenfunction.to_binary()));
        results = json!({
            "state": "steady",
            "domain": spec.describe(),
            "sweep": sweep_summary(&r),
            "lambda": eig.lambda,
            "lambda_doubled": lam2,
            "eigen_residual": eig.residual,
        });
    } else {
        let spec = domain(cfg, "cone")?;
        let prof = ground_state(cfg, &nl, 2)?;
        let l0 = cfg.positive("balance.l0")?;
        let pr = dirichlet_projection(&spec, &prof, l0, &projection_params(cfg)?)?;
        let beta_max = max_inclination(&spec)
            .ok_or_else(|| Error::config("domain.kind", "spike chains need a domain of aperture > π"))?;
        let beta = inclination(cfg, "balance.inclination", beta_max)?.unwrap_or(0.5 * beta_max);
        let problem = BalanceProblem {
            d: 2,
            amplitude: prof.amplitude,
            l0,
            phi0: Phi0Model::Fixed(pr.phi0_center),
        };
        let BalanceOutcome::Equilibrium(eq) =
            solve_balance(&spec, &problem, &BalanceMode::Symmetric { inclination: beta }, &balance_options(cfg)?)?
        else {
            return Err(Error::Geometry("no spike equilibrium on this domain".into()));
        };
        // Keep the spikes whose cores fit inside the truncated box.
        let x_lo = pr.grid.origin.0;
        let x_hi = x_lo + (pr.grid.nx - 1) as f64 * pr.grid.h;
        let mut chain = eq.chain.clone();
        let fits = |k: i64| {
            let z = chain.center(k);
            z[0] - x_lo >= CORE_RADIUS && x_hi - z[0] >= CORE_RADIUS
        };
        let keep = (1..=chain.k_max()).take_while(|&k| fits(k as i64) && fits(-(k as i64))).count();
        chain.p_minus.truncate(keep);
        chain.p_plus.truncate(keep);
        let ans = assemble_ansatz(&chain, &pr, &prof, [None, None])?;
        let pol = polish_ansatz(&ans, &pr, &prof, cfg.usize("stability.polish_steps")?)?;
        let pnl = &prof.nl;
        let eig = principal_eigenvalue(&pr.grid, &pol.field.map(|u| -pnl.df(u)), tol)?;
        checks.push(Check::at_most("principal eigenvalue of the polished ansatz", eig.lambda, -1e-3));
        artifacts.push(("stability_ansatz.spkf".into(), pol.field.to_binary()));
        results = json!({
            "state": "ansatz",
            "domain": spec.describe(),
            "equilibrium": equilibrium_json(&eq),
            "spikes_per_leg": keep,
            "residual_before_polish": pol.residual_before,
            "residual_after_polish": pol.residual_after,
            "polish_steps": pol.steps,
            "lambda": eig.lambda,
            "eigen_residual": eig.residual,
        });
    }
    Ok(Outcome {
        results,
        checks,
        artifacts,
    })
}
