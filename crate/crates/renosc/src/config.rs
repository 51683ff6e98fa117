//! Run configuration: flat `key = value` text with bracketed section
//! headers, plus the command-line flag surface. Complex numbers are written
//! `re+imi`; numeric emission uses the shortest round-trip decimal form so
//! golden outputs stay byte-stable.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::numerics::C64;
use crate::system::Endpoint;

/// Parse a complex number in `re+imi` form (also plain reals and pure
/// imaginaries like `1i` / `-2.5i`).
pub fn parse_complex(text: &str) -> Result<C64> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    if s.is_empty() {
        return Err(Error::Config("empty complex literal".into()));
    }
    if !s.ends_with('i') {
        return s
            .parse::<f64>()
            .map(|re| C64::new(re, 0.0))
            .map_err(|_| Error::Config(format!("bad real literal {text:?}")));
    }
    let body = &s[..s.len() - 1];
    // split at the last +/- that is not an exponent sign and not leading
    let bytes = body.as_bytes();
    let mut split = None;
    for k in (1..bytes.len()).rev() {
        let c = bytes[k] as char;
        if (c == '+' || c == '-') && !matches!(bytes[k - 1] as char, 'e' | 'E') {
            split = Some(k);
            break;
        }
    }
    match split {
        Some(k) => {
            let re: f64 = body[..k]
                .parse()
                .map_err(|_| Error::Config(format!("bad complex literal {text:?}")))?;
            let imtxt = &body[k..];
            let im: f64 = if imtxt == "+" {
                1.0
            } else if imtxt == "-" {
                -1.0
            } else {
                imtxt
                    .parse()
                    .map_err(|_| Error::Config(format!("bad complex literal {text:?}")))?
            };
            Ok(C64::new(re, im))
        }
        None => {
            let im: f64 = if body.is_empty() {
                1.0
            } else {
                body.parse()
                    .map_err(|_| Error::Config(format!("bad complex literal {text:?}")))?
            };
            Ok(C64::new(0.0, im))
        }
    }
}

/// Emit a complex number in the canonical `re+imi` form.
pub fn emit_complex(z: C64) -> String {
    if z.im == 0.0 {
        format!("{}", z.re)
    } else if z.im < 0.0 {
        format!("{}-{}i", z.re, -z.im)
    } else {
        format!("{}+{}i", z.re, z.im)
    }
}

/// A run configuration as consumed by the CLI commands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: String,
    pub system: String,
    /// Key-value parameters for the system (gamma, ell, p, q, w, ...).
    pub system_params: Vec<(String, String)>,
    pub endpoint: Option<Endpoint>,
    pub lambda0: C64,
    pub lambda1: Option<f64>,
    pub lambda2: Option<f64>,
    /// Boundary row at a regular left endpoint.
    pub alpha: Option<Vec<C64>>,
    /// β for the singular left endpoint basis.
    pub beta_a: Option<C64>,
    /// β for the right endpoint basis (when needed).
    pub beta_b: Option<C64>,
    pub x_max: Option<f64>,
    pub x_min_offset: Option<f64>,
    pub tol_ode: Option<f64>,
    pub tol_flow: Option<f64>,
    pub out_dir: Option<String>,
    pub seed: u64,
    /// λ-grid size for the curves command.
    pub grid: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            command: "count".into(),
            system: "schrodinger_gap".into(),
            system_params: Vec::new(),
            endpoint: None,
            lambda0: C64::new(0.0, 1.0),
            lambda1: None,
            lambda2: None,
            alpha: None,
            beta_a: None,
            beta_b: None,
            x_max: None,
            x_min_offset: None,
            tol_ode: None,
            tol_flow: None,
            out_dir: None,
            seed: 0,
            grid: 24,
        }
    }
}

impl RunConfig {
    /// Parse the flat `key = value` format with `[section]` headers.
    /// Recognized sections: `[run]` (default) and `[system]` (parameters
    /// passed through to the system constructor).
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        let mut section = "run".to_string();
        let mut sys_params: BTreeMap<String, String> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if line.starts_with('[') {
                if !line.ends_with(']') {
                    return Err(Error::Config(format!(
                        "line {}: malformed section header {line:?}",
                        lineno + 1
                    )));
                }
                section = line[1..line.len() - 1].trim().to_lowercase();
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected key = value", lineno + 1))
            })?;
            let key = key.trim().to_lowercase();
            let value = value.trim().to_string();
            match section.as_str() {
                "system" => {
                    sys_params.insert(key, value);
                }
                "run" => cfg.set_run_key(&key, &value)?,
                other => {
                    return Err(Error::Config(format!("unknown section {other:?}")));
                }
            }
        }
        cfg.system_params = sys_params.into_iter().collect();
        Ok(cfg)
    }

    fn set_run_key(&mut self, key: &str, value: &str) -> Result<()> {
        let fparse = |v: &str| -> Result<f64> {
            v.parse()
                .map_err(|_| Error::Config(format!("bad number {v:?} for {key}")))
        };
        match key {
            "command" => self.command = value.to_string(),
            "system" => self.system = value.to_string(),
            "endpoint" => {
                self.endpoint = Some(match value {
                    "a" => Endpoint::A,
                    "b" => Endpoint::B,
                    other => {
                        return Err(Error::Config(format!(
                            "endpoint must be a|b, got {other:?}"
                        )))
                    }
                })
            }
            "lambda0" => self.lambda0 = parse_complex(value)?,
            "lambda1" => self.lambda1 = Some(fparse(value)?),
            "lambda2" => self.lambda2 = Some(fparse(value)?),
            "alpha" => {
                let mut entries = Vec::new();
                for part in value.split(',') {
                    entries.push(parse_complex(part)?);
                }
                self.alpha = Some(entries);
            }
            "beta_a" | "beta" => {
                if !value.is_empty() {
                    self.beta_a = Some(parse_complex(value)?);
                }
            }
            "beta_b" => {
                if !value.is_empty() {
                    self.beta_b = Some(parse_complex(value)?);
                }
            }
            "x_max" | "xmax" => self.x_max = Some(fparse(value)?),
            "x_min_offset" | "xmin_offset" => self.x_min_offset = Some(fparse(value)?),
            "tol_ode" => self.tol_ode = Some(fparse(value)?),
            "tol_flow" => self.tol_flow = Some(fparse(value)?),
            "out" => self.out_dir = Some(value.to_string()),
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| Error::Config(format!("bad seed {value:?}")))?
            }
            "grid" => {
                self.grid = value
                    .parse()
                    .map_err(|_| Error::Config(format!("bad grid {value:?}")))?
            }
            other => return Err(Error::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    /// Canonical emission; `parse(emit(c))` reproduces `c` and emission is
    /// byte-stable.
    pub fn emit(&self) -> String {
        let mut out = String::from("[run]\n");
        {
            let push = |out: &mut String, k: &str, v: String| {
                out.push_str(k);
                out.push_str(" = ");
                out.push_str(&v);
                out.push('\n');
            };
            push(&mut out, "command", self.command.clone());
            push(&mut out, "system", self.system.clone());
            if let Some(e) = self.endpoint {
                push(
                    &mut out,
                    "endpoint",
                    match e {
                        Endpoint::A => "a".into(),
                        Endpoint::B => "b".into(),
                    },
                );
            }
            push(&mut out, "lambda0", emit_complex(self.lambda0));
            if let Some(l) = self.lambda1 {
                push(&mut out, "lambda1", format!("{l}"));
            }
            if let Some(l) = self.lambda2 {
                push(&mut out, "lambda2", format!("{l}"));
            }
            if let Some(a) = &self.alpha {
                let parts: Vec<String> = a.iter().map(|z| emit_complex(*z)).collect();
                push(&mut out, "alpha", parts.join(", "));
            }
            if let Some(b) = self.beta_a {
                push(&mut out, "beta_a", emit_complex(b));
            }
            if let Some(b) = self.beta_b {
                push(&mut out, "beta_b", emit_complex(b));
            }
            if let Some(v) = self.x_max {
                push(&mut out, "x_max", format!("{v}"));
            }
            if let Some(v) = self.x_min_offset {
                push(&mut out, "x_min_offset", format!("{v}"));
            }
            if let Some(v) = self.tol_ode {
                push(&mut out, "tol_ode", format!("{v}"));
            }
            if let Some(v) = self.tol_flow {
                push(&mut out, "tol_flow", format!("{v}"));
            }
            if let Some(v) = &self.out_dir {
                push(&mut out, "out", v.clone());
            }
            push(&mut out, "seed", format!("{}", self.seed));
            push(&mut out, "grid", format!("{}", self.grid));
        }
        if !self.system_params.is_empty() {
            out.push_str("\n[system]\n");
            for (k, v) in &self.system_params {
                out.push_str(k);
                out.push_str(" = ");
                out.push_str(v);
                out.push('\n');
            }
        }
        out
    }

    /// Apply command-line flags on top of this configuration.
    /// The first free (non-flag) argument is the command.
    pub fn apply_args(&mut self, args: &[String]) -> Result<()> {
        let mut it = args.iter().peekable();
        while let Some(arg) = it.next() {
            if let Some(flag) = arg.strip_prefix("--") {
                let value = it
                    .next()
                    .ok_or_else(|| Error::Config(format!("flag --{flag} needs a value")))?;
                let key = flag.replace('-', "_");
                match key.as_str() {
                    "config" => {
                        let text = std::fs::read_to_string(value)?;
                        let loaded = RunConfig::parse(&text)?;
                        let cmd = self.command.clone();
                        *self = loaded;
                        if !cmd.is_empty() {
                            self.command = cmd;
                        }
                    }
                    "param" => {
                        let (k, v) = value
                            .split_once('=')
                            .ok_or_else(|| Error::Config("--param expects key=value".into()))?;
                        self.system_params
                            .push((k.trim().to_string(), v.trim().to_string()));
                    }
                    other => self.set_run_key(other, value)?,
                }
            } else {
                self.command = arg.clone();
            }
        }
        Ok(())
    }
}

/// CLI entry: parse args, dispatch, map errors to exit codes.
pub fn cli_main() -> i32 {
    let args: Vec<String> = std::env::args().skip(1).collect();
    if args.is_empty() || args[0] == "--help" || args[0] == "-h" {
        eprintln!("{}", crate::cli::usage());
        return if args.is_empty() { 2 } else { 0 };
    }
    let mut cfg = RunConfig::default();
    cfg.command = String::new();
    if let Err(e) = cfg.apply_args(&args) {
        eprintln!("error(config): {e}");
        return e.exit_code();
    }
    if cfg.command.is_empty() {
        eprintln!("error(config): no command given");
        return 2;
    }
    match crate::cli::dispatch(&cfg) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_round_trips() {
        for text in [
            "1.5",
            "-2",
            "0+1i",
            "0.2952-1.4663i",
            "1e-3+2e-4i",
            "-1i",
            "3i",
        ] {
            let z = parse_complex(text).unwrap();
            let z2 = parse_complex(&emit_complex(z)).unwrap();
            assert_eq!(z, z2, "{text}");
        }
        assert_eq!(
            parse_complex("0.2952-1.4663i").unwrap(),
            C64::new(0.2952, -1.4663)
        );
        assert!(parse_complex("abc").is_err());
    }

    #[test]
    fn config_parse_emit_round_trip() {
        let text = "\n[run]\ncommand = count\nsystem = hydrogen_radial\nlambda0 = 0+1i\n\
                    lambda1 = -5\nlambda2 = -0.375\nbeta_a = 1.4956\nx_max = 40\nseed = 7\n\
                    [system]\ngamma = 4\nell = 0\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.command, "count");
        assert_eq!(cfg.lambda1, Some(-5.0));
        assert_eq!(cfg.beta_a, Some(C64::new(1.4956, 0.0)));
        assert_eq!(cfg.system_params.len(), 2);
        let emitted = cfg.emit();
        let cfg2 = RunConfig::parse(&emitted).unwrap();
        assert_eq!(cfg, cfg2);
        assert_eq!(emitted, cfg2.emit());
    }

    #[test]
    fn flags_override_config() {
        let mut cfg = RunConfig::default();
        cfg.apply_args(&[
            "count".to_string(),
            "--system".to_string(),
            "schrodinger_gap".to_string(),
            "--lambda1".to_string(),
            "-0.31".to_string(),
            "--lambda2".to_string(),
            "0.2".to_string(),
            "--alpha".to_string(),
            "0.92387953, 0.38268343".to_string(),
            "--seed".to_string(),
            "5".to_string(),
        ])
        .unwrap();
        assert_eq!(cfg.command, "count");
        assert_eq!(cfg.lambda1, Some(-0.31));
        assert_eq!(cfg.alpha.as_ref().unwrap().len(), 2);
        assert_eq!(cfg.seed, 5);
    }

    #[test]
    fn bad_keys_rejected() {
        assert!(RunConfig::parse("[run]\nnonsense = 1\n").is_err());
        assert!(RunConfig::parse("[weird]\nx = 1\n").is_err());
        assert!(RunConfig::parse("[run]\nendpoint = q\n").is_err());
    }
}
