//! `key = value` run configurations and the per-command key schemas.

use std::collections::BTreeMap;
use std::path::PathBuf;

use serde_json::Value;

use crate::error::{Error, Result};

/// One accepted key. `default: None` marks a required key.
#[derive(Clone, Copy, Debug)]
pub struct KeySpec {
    pub name: &'static str,
    pub default: Option<&'static str>,
    pub help: &'static str,
}

const fn key(name: &'static str, default: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        default: Some(default),
        help,
    }
}

const fn required(name: &'static str, help: &'static str) -> KeySpec {
    KeySpec {
        name,
        default: None,
        help,
    }
}

pub const COMMANDS: [&str; 12] = [
    "groundstate",
    "spectrum",
    "constants",
    "delaunay",
    "projection",
    "eigen",
    "thin-set",
    "balance",
    "aperture-scan",
    "sweep",
    "stability",
    "fig-equilibrium",
];

const COMMON: [KeySpec; 2] = [
    key("seed", "1", "seed of the ChaCha8 generator used by randomized checks"),
    key("out_dir", "spikeforge-out", "directory for reports and artifacts"),
];

const NONLIN: [KeySpec; 5] = [
    required("nonlin.kind", "bistable | field | table"),
    key("nonlin.theta", "0.25", "middle root of the bistable cubic"),
    key("nonlin.p", "3", "exponent of the field term -u + u^p"),
    key("nonlin.table_path", "", "CSV of u,f(u) pairs for kind = table"),
    key("nonlin.normalize", "true", "rescale so that f'(0) = -1"),
];

const SHOOT: [KeySpec; 5] = [
    key("shoot.h", "1e-3", "radial step"),
    key("shoot.r_max", "40", "outer radius"),
    key("shoot.tol", "1e-8", "decay and ODE residual tolerance"),
    key("shoot.u0_max", "20", "upper end of the U(0) bracket"),
    key("shoot.fit_tol", "1e-2", "relative residual of the tail fit"),
];

const DOMAIN: [KeySpec; 6] = [
    key("domain.kind", "cone", "half-plane | cone | parabola | sampled | exterior-ball"),
    key("domain.aperture_over_pi", "1.25", "cone aperture in units of π"),
    key("domain.c", "0.1", "parabola y > c x²"),
    key("domain.rho", "1", "exterior ball radius"),
    key("domain.ell", "1", "exterior ball centre height"),
    key("domain.phi_path", "", "CSV of x,phi(x) samples for kind = sampled"),
];

const PROJECTION: [KeySpec; 3] = [
    key("projection.h", "0.1", "grid spacing"),
    key("projection.lateral_margin", "8", "box half-width beyond 2 L0"),
    key("projection.top_margin", "8", "box top beyond L0"),
];

const BALANCE: [KeySpec; 3] = [
    key("balance.tol", "1e-8", "tolerance on |eta_0|"),
    key("balance.k_max", "6", "spikes per leg"),
    key("balance.max_iter", "100", "Newton and relaxation iteration cap"),
];

const CHAIN: [KeySpec; 11] = [
    key("balance.l0", "6", "height of the central spike"),
    key("balance.mode", "symmetric", "symmetric | fix-minus | fix-directions | free-height"),
    key("balance.inclination", "0.5", "left (or common) leg inclination, fraction of the admissible maximum"),
    key("balance.inclination_plus", "auto", "right leg inclination fraction (fix-directions); seed otherwise"),
    key("balance.l_minus", "auto", "left spacing (fix-minus, free-height)"),
    key("balance.l_plus", "auto", "right spacing (free-height)"),
    key("balance.phi0", "grid", "grid | law | a fixed positive value"),
    key("balance.phi0_c", "1", "prefactor c of the law c L0^{-(d-1)} e^{-2 L0}"),
    key("balance.consistency_trials", "10", "perturbed chains compared against the ansatz residual (0 disables)"),
    key("balance.consistency_relative", "0.1", "relative size of each perturbation"),
    key("balance.heights", "", "comma list of heights for a period sweep (empty disables)"),
];

const SWEEP: [KeySpec; 9] = [
    key("sweep.h", "0.25", "grid spacing"),
    key("sweep.half_width", "8", "box half-width"),
    key("sweep.height", "16", "box height above the lowest boundary point"),
    key("sweep.lateral", "neumann", "lateral truncation: neumann | zero | one"),
    key("sweep.top", "auto", "top truncation: auto | neumann | zero | one"),
    key("sweep.dt", "auto", "time step; auto is 0.5 / Lip f"),
    key("sweep.steady_tol", "1e-9", "stop once max |u_t| falls below this"),
    key("sweep.t_max", "4000", "time cap"),
    key("sweep.record_every", "25", "steps between time-series rows"),
];

const SUBSOLUTION: [KeySpec; 2] = [
    key("sub.heights", "0.99,0.95,0.9,0.8,0.7,0.6", "cap heights tried in order"),
    key("sub.margins", "0.02,0.05,0.1", "cap margins tried for each height"),
];

/// Keys accepted by `command`, with their defaults.
pub fn schema(command: &str) -> Result<Vec<KeySpec>> {
    let mut keys: Vec<KeySpec> = COMMON.to_vec();
    let mut add = |set: &[KeySpec]| keys.extend_from_slice(set);
    match command {
        "groundstate" => {
            add(&NONLIN);
            add(&[key("d", "1", "space dimension")]);
            add(&SHOOT);
        }
        "spectrum" => {
            add(&NONLIN);
            add(&[
                key("d", "1", "space dimension"),
                key("spectrum.count", "3", "eigenvalues per sector"),
                key("spectrum.tol", "1e-3", "width of the window around 0"),
            ]);
            add(&SHOOT);
        }
        "constants" => {
            add(&NONLIN);
            add(&[key("d", "1", "space dimension"), key("constants.gap_tol", "0.02", "allowed relative gap between the two routes to D")]);
            add(&SHOOT);
        }
        "delaunay" => {
            add(&NONLIN);
            add(&[
                key("d", "1", "space dimension (1 or 2)"),
                key("delaunay.periods", "8,10,12,14,16", "comma list of periods"),
                key("delaunay.h", "auto", "grid spacing"),
                key("delaunay.images", "3", "chain images in the initial guess"),
                key("delaunay.newton_tol", "1e-10", "Newton residual target"),
                key("delaunay.eig_tol", "1e-9", "eigenvalue tolerance"),
            ]);
            add(&SHOOT);
        }
        "projection" => {
            add(&NONLIN);
            add(&DOMAIN);
            add(&SHOOT);
            add(&PROJECTION);
            add(&[key("projection.heights", "4,5,6,7,8", "comma list of spike heights")]);
        }
        "eigen" => add(&[
            key("eigen.bumps", "20", "number of random bump potentials"),
            key("eigen.max_amp", "5", "largest bump amplitude"),
            key("eigen.q", "2", "exponent of the lower bound norm"),
            key("eigen.h", "0.05", "disk grid spacing"),
            key("eigen.c", "2", "configured constant in both inequalities"),
            key("eigen.tol", "1e-10", "eigenvalue tolerance"),
        ]),
        "thin-set" => {
            add(&NONLIN);
            add(&[
                key("thin.eta", "0.5", "initial slab width"),
                key("thin.steps", "4", "number of halvings"),
                key("thin.r_box", "20", "box size"),
                key("thin.h", "0.005", "grid spacing"),
                key("thin.lip_range", "auto", "u-interval for Lip f as lo,hi; auto is [0, largest positive root]"),
            ]);
        }
        "balance" | "fig-equilibrium" => {
            add(&NONLIN);
            add(&DOMAIN);
            add(&SHOOT);
            add(&PROJECTION);
            add(&BALANCE);
            add(&CHAIN);
        }
        "aperture-scan" => {
            add(&NONLIN);
            add(&SHOOT);
            add(&PROJECTION);
            add(&BALANCE);
            add(&[
                key("scan.apertures_over_pi", "0.9,0.95,1.05,1.1,1.2", "comma list of cone apertures in units of π"),
                key("scan.l0", "6", "height of the central spike"),
                key("scan.inclination", "0.5", "leg inclination, fraction of the admissible maximum"),
                key("scan.family_offset", "0.2", "relative tilt of the right leg for the family check"),
            ]);
        }
        "sweep" => {
            add(&NONLIN);
            add(&DOMAIN);
            add(&SWEEP);
            add(&SUBSOLUTION);
            add(&[
                key("sweep.from", "auto", "one | subsolution | both | auto (both for bistable terms)"),
                key("sweep.bins", "6", "far-field distance bins"),
                key("sweep.stability", "true", "principal eigenvalue on the box and the doubled box"),
                key("sweep.eig_tol", "1e-9", "eigenvalue tolerance"),
            ]);
        }
        "stability" => {
            add(&NONLIN);
            add(&DOMAIN);
            add(&[
                key("stability.state", "steady", "steady | ansatz"),
                key("stability.floor", "0.05", "lower bound on the eigenvalue of a stable steady state"),
                key("stability.doubling_tol", "0.05", "allowed relative change when the box is doubled"),
                key("stability.polish_steps", "10", "Newton steps applied to the ansatz"),
                key("stability.eig_tol", "1e-9", "eigenvalue tolerance"),
            ]);
            add(&SWEEP);
            add(&SHOOT);
            add(&PROJECTION);
            add(&BALANCE);
            add(&[CHAIN[0], CHAIN[2]]);
        }
        other => {
            return Err(Error::config(
                "command",
                format!("unknown subcommand `{other}` (expected one of {})", COMMANDS.join(", ")),
            ))
        }
    }
    // Per-command defaults that differ from the shared groups.
    let overrides: &[(&str, &str)] = match command {
        "sweep" => &[("domain.kind", "half-plane")],
        "stability" => &[("domain.kind", "auto"), ("projection.h", "0.15"), ("balance.l0", "5")],
        _ => &[],
    };
    for k in keys.iter_mut() {
        if let Some((_, v)) = overrides.iter().find(|(n, _)| *n == k.name) {
            k.default = Some(v);
        }
    }
    Ok(keys)
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are skipped.
pub fn parse_pairs(text: &str) -> Result<Vec<(String, String)>> {
    let mut out: Vec<(String, String)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::config(
                format!("line {}", n + 1),
                format!("expected `key = value`, found `{line}`"),
            ));
        };
        let k = k.trim();
        if k.is_empty() {
            return Err(Error::config(format!("line {}", n + 1), "empty key"));
        }
        if out.iter().any(|(seen, _)| seen == k) {
            return Err(Error::config(k, "given twice in the config file"));
        }
        out.push((k.to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// A validated configuration: every key of the command's schema resolved to a value.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: String,
    pub values: BTreeMap<String, String>,
    pub out_dir: PathBuf,
    pub seed: u64,
}

impl RunConfig {
    /// Applies schema defaults, then the file pairs, then the overrides (later wins).
    pub fn resolve(command: &str, file: &[(String, String)], overrides: &[(String, String)]) -> Result<Self> {
        let schema = schema(command)?;
        let mut values = BTreeMap::new();
        for (k, v) in file.iter().chain(overrides) {
            if !schema.iter().any(|s| s.name == k) {
                return Err(Error::config(k.as_str(), format!("unknown key for `{command}`")));
            }
            values.insert(k.clone(), v.clone());
        }
        for s in &schema {
            if !values.contains_key(s.name) {
                match s.default {
                    Some(d) => {
                        values.insert(s.name.to_string(), d.to_string());
                    }
                    None => return Err(Error::config(s.name, format!("required by `{command}`"))),
                }
            }
        }
        let mut cfg = RunConfig {
            command: command.to_string(),
            values,
            out_dir: PathBuf::new(),
            seed: 0,
        };
        cfg.seed = cfg.u64("seed")?;
        cfg.out_dir = PathBuf::from(cfg.str("out_dir")?);
        Ok(cfg)
    }

    pub fn str(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::config(key, "not in the schema of this command"))
    }

    fn parsed<T: std::str::FromStr>(&self, key: &str, what: &str) -> Result<T> {
        let s = self.str(key)?;
        s.parse()
            .map_err(|_| Error::config(key, format!("expected {what}, found `{s}`")))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        let v: f64 = self.parsed(key, "a number")?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::config(key, "must be finite"))
        }
    }

    pub fn positive(&self, key: &str) -> Result<f64> {
        let v = self.f64(key)?;
        if v > 0.0 {
            Ok(v)
        } else {
            Err(Error::config(key, format!("must be positive, found {v}")))
        }
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.parsed(key, "a non-negative integer")
    }

    pub fn u64(&self, key: &str) -> Result<u64> {
        self.parsed(key, "a non-negative integer")
    }

    pub fn bool(&self, key: &str) -> Result<bool> {
        self.parsed(key, "true or false")
    }

    /// `None` for `auto` or an empty value.
    pub fn opt_f64(&self, key: &str) -> Result<Option<f64>> {
        match self.str(key)? {
            "" | "auto" => Ok(None),
            _ => self.f64(key).map(Some),
        }
    }

    /// Comma-separated numbers; empty gives an empty list.
    pub fn list(&self, key: &str) -> Result<Vec<f64>> {
        let s = self.str(key)?;
        if s.is_empty() {
            return Ok(Vec::new());
        }
        s.split(',')
            .map(|t| {
                let t = t.trim();
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| Error::config(key, format!("bad list entry `{t}`")))
            })
            .collect()
    }

    pub fn choice<'a>(&'a self, key: &str, allowed: &[&str]) -> Result<&'a str> {
        let s = self.str(key)?;
        if allowed.contains(&s) {
            Ok(s)
        } else {
            Err(Error::config(key, format!("expected one of {}, found `{s}`", allowed.join(" | "))))
        }
    }

    /// The resolved parameters as a JSON object (output settings excluded).
    pub fn parameters(&self) -> Value {
        Value::Object(
            self.values
                .iter()
                .filter(|(k, _)| k.as_str() != "out_dir")
                .map(|(k, v)| (k.clone(), Value::String(v.clone())))
                .collect(),
        )
    }

    /// `key = value` lines in key order.
    pub fn render(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(v: &[(&str, &str)]) -> Vec<(String, String)> {
        v.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
    }

    #[test]
    fn comments_and_blank_lines() {
        let p = parse_pairs("# header\n\nnonlin.kind = field  # trailing\n d=1\n").unwrap();
        assert_eq!(p, pairs(&[("nonlin.kind", "field"), ("d", "1")]));
    }

    #[test]
    fn malformed_line_names_line() {
        let err = parse_pairs("nonlin.kind field\n").unwrap_err().to_string();
        assert!(err.contains("line 1"), "{err}");
    }

    #[test]
    fn duplicate_key_rejected() {
        assert!(parse_pairs("d = 1\nd = 2\n").is_err());
    }

    #[test]
    fn overrides_win_and_defaults_fill() {
        let cfg = RunConfig::resolve(
            "groundstate",
            &pairs(&[("nonlin.kind", "field"), ("d", "1")]),
            &pairs(&[("d", "3")]),
        )
        .unwrap();
        assert_eq!(cfg.usize("d").unwrap(), 3);
        assert_eq!(cfg.f64("nonlin.p").unwrap(), 3.0);
        assert_eq!(cfg.seed, 1);
    }

    #[test]
    fn missing_required_key_is_named() {
        let err = RunConfig::resolve("groundstate", &[], &[]).unwrap_err().to_string();
        assert!(err.contains("nonlin.kind"), "{err}");
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::resolve("eigen", &pairs(&[("eigen.bumbs", "3")]), &[])
            .unwrap_err()
            .to_string();
        assert!(err.contains("eigen.bumbs"), "{err}");
    }

    #[test]
    fn every_command_has_a_schema() {
        for c in COMMANDS {
            let keys = schema(c).unwrap();
            for (i, k) in keys.iter().enumerate() {
                assert!(keys[..i].iter().all(|o| o.name != k.name), "{c}: {} repeated", k.name);
            }
        }
        assert!(schema("nope").is_err());
    }

    #[test]
    fn lists_and_auto() {
        let cfg = RunConfig::resolve("delaunay", &pairs(&[("nonlin.kind", "field")]), &[]).unwrap();
        assert_eq!(cfg.list("delaunay.periods").unwrap(), vec![8.0, 10.0, 12.0, 14.0, 16.0]);
        assert_eq!(cfg.opt_f64("delaunay.h").unwrap(), None);
    }
}
