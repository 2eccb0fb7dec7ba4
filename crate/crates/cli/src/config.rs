//! Flag and config-file ingestion.
//!
//! Every parameter travels as a string keyed by name until dispatch, so flags
//! and `key=value` files share one parser and one set of error messages.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

pub const SEED_ENV: &str = "TODA_SEED";

/// Keys accepted in config files and as `--key` flags.
pub const KEYS: &[&str] = &[
    "gamma", "rank", "kappa", "alpha2", "alpha3", "m2", "mu", "screening", "seed", "samples", "streams", "tol", "h_ordering",
    "prefactor", "closed", "policy", "fn", "z", "a", "a_bar", "instance",
];

#[derive(Parser, Debug)]
#[command(name = "toda", version, about = "Coulomb-gas integrals and three-point constants for imaginary Toda theories")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate l, Gamma, Gamma_C or Upsilon at a point.
    Special(Flags),
    /// Integrate the three-point Coulomb-gas integral.
    Df(Flags),
    /// Evaluate the Fateev-Litvinov constant.
    Fl(Flags),
    /// Check the complex twin lemma on the curated instances.
    Twin(Flags),
    /// Compare the integral with a closed form for |C|^2.
    Verify(Flags),
}

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// Flat key=value file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub output: OutputFormat,
    /// Write the artifact here instead of stdout.
    #[arg(long = "out")]
    pub output_path: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub rank: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<String>,
    /// Comma-separated coordinates in the simple-root basis.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha2: Option<String>,
    /// Only read by `fl`; defaults to the neutral value.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha3: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub m2: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub screening: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub seed: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub samples: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub streams: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub tol: Option<String>,
    /// ascending or descending
    #[arg(long, allow_hyphen_values = true)]
    pub h_ordering: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub prefactor: Option<String>,
    /// fl or recurrence
    #[arg(long, allow_hyphen_values = true)]
    pub closed: Option<String>,
    /// auto, quadrature or mc
    #[arg(long, allow_hyphen_values = true)]
    pub policy: Option<String>,
    /// upsilon, l, gamma or gamma_c
    #[arg(long = "fn", allow_hyphen_values = true)]
    pub func: Option<String>,
    /// Complex argument, e.g. 0.3+0.1i
    #[arg(long, allow_hyphen_values = true)]
    pub z: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub a_bar: Option<String>,
    /// Index into the curated twin-lemma instances.
    #[arg(long, allow_hyphen_values = true)]
    pub instance: Option<String>,
}

impl Flags {
    fn entries(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("gamma", &self.gamma),
            ("rank", &self.rank),
            ("kappa", &self.kappa),
            ("alpha2", &self.alpha2),
            ("alpha3", &self.alpha3),
            ("m2", &self.m2),
            ("mu", &self.mu),
            ("screening", &self.screening),
            ("seed", &self.seed),
            ("samples", &self.samples),
            ("streams", &self.streams),
            ("tol", &self.tol),
            ("h_ordering", &self.h_ordering),
            ("prefactor", &self.prefactor),
            ("closed", &self.closed),
            ("policy", &self.policy),
            ("fn", &self.func),
            ("z", &self.z),
            ("a", &self.a),
            ("a_bar", &self.a_bar),
            ("instance", &self.instance),
        ]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Default)]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
    Table,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SubcommandKind {
    Special,
    Df,
    Fl,
    Twin,
    Verify,
}

impl SubcommandKind {
    pub fn name(self) -> &'static str {
        match self {
            SubcommandKind::Special => "special",
            SubcommandKind::Df => "df",
            SubcommandKind::Fl => "fl",
            SubcommandKind::Twin => "twin",
            SubcommandKind::Verify => "verify",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConfigError {
    Usage(String),
    Parse(String),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Usage(m) => write!(f, "usage error: {m}"),
            ConfigError::Parse(m) => write!(f, "parse error: {m}"),
        }
    }
}

impl std::error::Error for ConfigError {}

/// A resolved value and where it came from, for error messages.
#[derive(Debug, Clone, PartialEq)]
pub struct Value {
    pub text: String,
    pub origin: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub subcommand: SubcommandKind,
    pub params: BTreeMap<String, Value>,
    pub output: OutputFormat,
    pub output_path: Option<PathBuf>,
}

/// Parses `key=value` lines; `#` starts a comment.
pub fn parse_config_text(text: &str, source: &str) -> Result<BTreeMap<String, Value>, ConfigError> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let origin = format!("{source} line {}", n + 1);
        let Some((k, v)) = line.split_once('=') else {
            return Err(ConfigError::Parse(format!("{origin}: expected key=value, found '{line}'")));
        };
        let key = k.trim();
        if !KEYS.contains(&key) {
            return Err(ConfigError::Usage(format!("unknown key '{key}' at {origin}")));
        }
        out.insert(key.to_string(), Value { text: v.trim().to_string(), origin });
    }
    Ok(out)
}

fn read_config_file(path: &Path) -> Result<BTreeMap<String, Value>, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError::Usage(format!("cannot read config file {}: {e}", path.display())))?;
    parse_config_text(&text, &path.display().to_string())
}

fn required(sub: SubcommandKind, func: Option<&str>) -> Vec<&'static str> {
    match sub {
        SubcommandKind::Special => match func {
            Some("upsilon") => vec!["fn", "z", "gamma"],
            Some("gamma_c") => vec!["fn", "a", "a_bar"],
            _ => vec!["fn", "z"],
        },
        SubcommandKind::Df | SubcommandKind::Fl | SubcommandKind::Verify => vec!["gamma", "rank", "kappa", "alpha2"],
        SubcommandKind::Twin => vec![],
    }
}

/// Merges file, flags, TODA_SEED and defaults; flags win over the file and
/// both win over the environment.
pub fn resolve(
    sub: SubcommandKind,
    flags: &Flags,
    env_seed: Option<String>,
) -> Result<RunConfig, ConfigError> {
    let mut params = match &flags.config {
        Some(path) => read_config_file(path)?,
        None => BTreeMap::new(),
    };
    for (key, v) in flags.entries() {
        if let Some(text) = v {
            params.insert(key.to_string(), Value { text: text.clone(), origin: format!("flag --{key}") });
        }
    }
    if !params.contains_key("seed") {
        let (text, origin) = match env_seed {
            Some(s) => (s, format!("environment {SEED_ENV}")),
            None => ("0".to_string(), "default".to_string()),
        };
        params.insert("seed".into(), Value { text, origin });
    }
    let func = params.get("fn").map(|v| v.text.clone());
    for key in required(sub, func.as_deref()) {
        if !params.contains_key(key) {
            return Err(ConfigError::Usage(format!("missing required key '{key}' for {}", sub.name())));
        }
    }
    let mut cfg = RunConfig { subcommand: sub, params, output: flags.output, output_path: flags.output_path.clone() };
    cfg.fill_defaults()?;
    cfg.validate()?;
    Ok(cfg)
}

pub fn parse_config<I, T>(argv: I, env_seed: Option<String>) -> Result<RunConfig, ClapOrConfig>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(ClapOrConfig::Clap)?;
    let (sub, flags) = match &cli.command {
        Command::Special(f) => (SubcommandKind::Special, f),
        Command::Df(f) => (SubcommandKind::Df, f),
        Command::Fl(f) => (SubcommandKind::Fl, f),
        Command::Twin(f) => (SubcommandKind::Twin, f),
        Command::Verify(f) => (SubcommandKind::Verify, f),
    };
    resolve(sub, flags, env_seed).map_err(ClapOrConfig::Config)
}

#[derive(Debug)]
pub enum ClapOrConfig {
    Clap(clap::Error),
    Config(ConfigError),
}

fn number<T: std::str::FromStr>(text: &str, what: &str) -> Result<T, ConfigError> {
    text.trim().parse().map_err(|_| ConfigError::Parse(format!("{what}: malformed number '{}'", text.trim())))
}

impl RunConfig {
    fn value(&self, key: &str) -> Result<&Value, ConfigError> {
        self.params.get(key).ok_or_else(|| ConfigError::Usage(format!("missing required key '{key}'")))
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    pub fn text(&self, key: &str) -> Result<&str, ConfigError> {
        Ok(self.value(key)?.text.as_str())
    }

    pub fn f64(&self, key: &str) -> Result<f64, ConfigError> {
        let v = self.value(key)?;
        number(&v.text, &format!("{key} ({})", v.origin))
    }

    pub fn usize(&self, key: &str) -> Result<usize, ConfigError> {
        let v = self.value(key)?;
        number(&v.text, &format!("{key} ({})", v.origin))
    }

    pub fn u64(&self, key: &str) -> Result<u64, ConfigError> {
        let v = self.value(key)?;
        number(&v.text, &format!("{key} ({})", v.origin))
    }

    pub fn complex(&self, key: &str) -> Result<Complex64, ConfigError> {
        let v = self.value(key)?;
        number(&v.text, &format!("{key} ({})", v.origin))
    }

    /// Comma-separated list; errors name the 1-based element.
    pub fn list<T: std::str::FromStr>(&self, key: &str) -> Result<Vec<T>, ConfigError> {
        let v = self.value(key)?;
        v.text
            .split(',')
            .enumerate()
            .map(|(i, item)| number(item, &format!("{key} element {} ({})", i + 1, v.origin)))
            .collect()
    }

    fn fill_defaults(&mut self) -> Result<(), ConfigError> {
        let mut put = |key: &str, text: String| {
            self.params.entry(key.to_string()).or_insert(Value { text, origin: "default".into() });
        };
        put("samples", (1usize << 20).to_string());
        put("streams", "64".into());
        put("tol", "1e-8".into());
        match self.subcommand {
            SubcommandKind::Df | SubcommandKind::Fl | SubcommandKind::Verify => {
                let r = self.usize("rank")?;
                let fill = |x: &str| vec![x; r].join(",");
                let mut put = |key: &str, text: String| {
                    self.params.entry(key.to_string()).or_insert(Value { text, origin: "default".into() });
                };
                put("m2", fill("0"));
                put("mu", fill("1"));
                put("screening", fill("1"));
                put("h_ordering", "ascending".into());
                put("prefactor", "1".into());
                put("closed", "fl".into());
                put("policy", "auto".into());
            }
            SubcommandKind::Special | SubcommandKind::Twin => {}
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ConfigError> {
        let positive = |key: &str| -> Result<(), ConfigError> {
            let x = self.f64(key)?;
            if x > 0.0 && x.is_finite() {
                Ok(())
            } else {
                Err(ConfigError::Usage(format!("{key} must be positive, got {x}")))
            }
        };
        self.u64("seed")?;
        if self.usize("samples")? == 0 || self.usize("streams")? == 0 {
            return Err(ConfigError::Usage("samples and streams must be at least 1".into()));
        }
        positive("tol")?;
        if self.has("gamma") {
            positive("gamma")?;
            if self.f64("gamma")? >= 2f64.sqrt() {
                return Err(ConfigError::Usage("gamma must lie in (0, sqrt 2)".into()));
            }
        }
        match self.subcommand {
            SubcommandKind::Df | SubcommandKind::Fl | SubcommandKind::Verify => {
                let r = self.usize("rank")?;
                if !(1..=8).contains(&r) {
                    return Err(ConfigError::Usage(format!("rank must be between 1 and 8, got {r}")));
                }
                self.f64("kappa")?;
                positive("prefactor")?;
                for key in ["alpha2", "m2", "mu"] {
                    let n = self.list::<f64>(key)?.len();
                    if n != r {
                        return Err(ConfigError::Usage(format!("{key} needs {r} entries, got {n}")));
                    }
                }
                if self.has("alpha3") && self.list::<f64>("alpha3")?.len() != r {
                    return Err(ConfigError::Usage(format!("alpha3 needs {r} entries")));
                }
                let n = self.list::<u32>("screening")?.len();
                if n != r {
                    return Err(ConfigError::Usage(format!("screening needs {r} entries, got {n}")));
                }
                let choice = |key: &str, allowed: &[&str]| -> Result<(), ConfigError> {
                    let t = self.text(key)?;
                    if allowed.contains(&t) {
                        Ok(())
                    } else {
                        Err(ConfigError::Usage(format!("{key} must be one of {}, got '{t}'", allowed.join("/"))))
                    }
                };
                choice("h_ordering", &["ascending", "descending"])?;
                choice("closed", &["fl", "recurrence"])?;
                choice("policy", &["auto", "quadrature", "mc"])?;
            }
            SubcommandKind::Special => {
                let f = self.text("fn")?;
                if !["upsilon", "l", "gamma", "gamma_c"].contains(&f) {
                    return Err(ConfigError::Usage(format!("fn must be upsilon, l, gamma or gamma_c, got '{f}'")));
                }
                if f == "gamma_c" {
                    self.complex("a")?;
                    self.complex("a_bar")?;
                } else {
                    self.complex("z")?;
                }
            }
            SubcommandKind::Twin => {
                if self.has("instance") {
                    self.usize("instance")?;
                }
            }
        }
        Ok(())
    }
}
