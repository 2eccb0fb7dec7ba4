//! Dispatch to toda-core and artifact emission.

use num_complex::Complex64;

use toda_core::df_core::{build_df_3pt, check_convergence};
use toda_core::identities::closed_form::fl_constant;
use toda_core::identities::twin::{curated_suite, twin_lemma_check};
use toda_core::identities::verify::{charge_config_json, df_integral_3pt, verify_identity, ClosedForm, VerifyOptions};
use toda_core::identities::IdentityError;
use toda_core::integrators::{Budget, IntegrationError, Policy, SamplerConfig};
use toda_core::json::Json;
use toda_core::lie_data::{CartanVector, ChargeConfig, HOrdering, RootSystem};
use toda_core::special_functions::{gamma, gamma_complex, l_func, upsilon, ExponentPair, Tagged, UpsilonParams};

use crate::config::{ConfigError, OutputFormat, RunConfig, SubcommandKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_REFUSED: i32 = 3;

/// One CSV row.
#[derive(Debug, Clone)]
pub struct Row {
    pub value: Complex64,
    pub stderr: f64,
    pub method: String,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Artifact {
    pub json: Json,
    pub rows: Vec<Row>,
    pub exit: i32,
}

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    /// Numeric refusal; the JSON carries the margin report.
    Refused(Json, String),
    Failed(String),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        RunError::Config(e)
    }
}

impl From<IdentityError> for RunError {
    fn from(e: IdentityError) -> Self {
        match e {
            IdentityError::Integration(IntegrationError::NotConvergent(rep)) => {
                RunError::Refused(Json::object().with("convergence", rep.to_json()), "integral outside its convergence window".into())
            }
            IdentityError::OutsideWindow => RunError::Refused(Json::object(), e.to_string()),
            IdentityError::Invalid(_) | IdentityError::Lie(_) | IdentityError::Df(_) => RunError::Config(ConfigError::Usage(e.to_string())),
            other => RunError::Failed(other.to_string()),
        }
    }
}

/// The resolved parameters, typed where the key has a type.
pub fn params_json(cfg: &RunConfig) -> Json {
    let mut out = Json::object();
    for (k, v) in &cfg.params {
        let value = match k.as_str() {
            "alpha2" | "alpha3" | "m2" | "mu" => cfg.list::<f64>(k).map(Json::from).ok(),
            "screening" => cfg.list::<u32>(k).map(Json::from).ok(),
            "rank" | "samples" | "streams" | "instance" => cfg.usize(k).map(Json::from).ok(),
            "seed" => cfg.u64(k).map(Json::from).ok(),
            "gamma" | "kappa" | "tol" | "prefactor" => cfg.f64(k).map(Json::from).ok(),
            "z" | "a" | "a_bar" => cfg.complex(k).map(|z| Json::object().with("re", z.re).with("im", z.im)).ok(),
            _ => None,
        };
        out = out.with(k, value.unwrap_or_else(|| Json::from(v.text.clone())));
    }
    out
}

fn budget(cfg: &RunConfig) -> Result<Budget, ConfigError> {
    let streams = cfg.usize("streams")?;
    let samples = cfg.usize("samples")?;
    let sampler = SamplerConfig { streams, samples_per_stream: samples.div_ceil(streams), ..SamplerConfig::default() };
    Ok(Budget { tol: cfg.f64("tol")?, sampler, seed: cfg.u64("seed")? })
}

fn charges(cfg: &RunConfig) -> Result<(RootSystem, ChargeConfig), RunError> {
    let rs = RootSystem::type_a(cfg.usize("rank")?).map_err(|e| ConfigError::Usage(e.to_string()))?;
    let charges = ChargeConfig::semidegenerate(
        &rs,
        cfg.f64("gamma")?,
        cfg.f64("kappa")?,
        CartanVector::new(cfg.list("alpha2")?),
        CartanVector::new(cfg.list("m2")?),
        &cfg.list::<u32>("screening")?,
        cfg.list("mu")?,
    )
    .map_err(|e| ConfigError::Usage(e.to_string()))?;
    Ok((rs, charges))
}

fn tagged_json(t: Tagged) -> Json {
    match t {
        Tagged::Finite(v) => Json::object().with("value_re", v.re).with("value_im", v.im).with("tag", "finite"),
        Tagged::Zero => Json::object().with("value_re", 0.0).with("value_im", 0.0).with("tag", "zero"),
        Tagged::Pole => Json::object().with("value_re", Json::Null).with("value_im", Json::Null).with("tag", "pole"),
    }
}

fn tagged_row(t: Tagged, seed: u64) -> Row {
    let value = match t {
        Tagged::Finite(v) => v,
        Tagged::Zero => Complex64::new(0.0, 0.0),
        Tagged::Pole => Complex64::new(f64::INFINITY, f64::INFINITY),
    };
    Row { value, stderr: 0.0, method: "closed_form".into(), seed }
}

fn special(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let seed = cfg.u64("seed")?;
    let t = match cfg.text("fn")? {
        "upsilon" => {
            let g = cfg.f64("gamma")?;
            upsilon(cfg.complex("z")?, UpsilonParams::new(g), cfg.f64("tol")?.min(1e-10)).map_err(|e| RunError::Failed(e.to_string()))?
        }
        "l" => l_func(cfg.complex("z")?),
        "gamma" => {
            let v = gamma(cfg.complex("z")?);
            if v.is_finite() {
                Tagged::Finite(v)
            } else {
                Tagged::Pole
            }
        }
        _ => {
            let p = ExponentPair::new(cfg.complex("a")?, cfg.complex("a_bar")?).map_err(|e| ConfigError::Usage(e.to_string()))?;
            gamma_complex(p).map_err(|e| RunError::Failed(e.to_string()))?
        }
    };
    Ok(Artifact { json: tagged_json(t), rows: vec![tagged_row(t, seed)], exit: EXIT_OK })
}

fn policy(cfg: &RunConfig) -> Result<Policy, ConfigError> {
    Ok(match cfg.text("policy")? {
        "quadrature" => Policy::Quadrature,
        "mc" => Policy::MonteCarlo,
        _ => Policy::Auto,
    })
}

fn ordering(cfg: &RunConfig) -> Result<HOrdering, ConfigError> {
    let t = cfg.text("h_ordering")?;
    HOrdering::parse(t).ok_or_else(|| ConfigError::Usage(format!("unknown h_ordering '{t}'")))
}

fn df(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let (rs, charges) = charges(cfg)?;
    let spec = build_df_3pt(&rs, &charges).map_err(|e| ConfigError::Usage(e.to_string()))?;
    let report = check_convergence(&spec);
    if !report.overall {
        return Err(RunError::Refused(Json::object().with("convergence", report.to_json()), "integral outside its convergence window".into()));
    }
    let est = df_integral_3pt(&rs, &charges, policy(cfg)?, &budget(cfg)?)?;
    let json = est.to_json().with("convergence", report.to_json());
    let row = Row { value: est.value, stderr: est.uncertainty(), method: est.method.name().into(), seed: est.seed };
    Ok(Artifact { json, rows: vec![row], exit: EXIT_OK })
}

fn fl(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let (rs, charges) = charges(cfg)?;
    let alpha3 = if cfg.has("alpha3") { CartanVector::new(cfg.list("alpha3")?) } else { charges.alphas[2].clone() };
    let t = fl_constant(&rs, charges.gamma, cfg.f64("kappa")?, &charges.alphas[1], &alpha3, ordering(cfg)?)?;
    Ok(Artifact { json: tagged_json(t), rows: vec![tagged_row(t, cfg.u64("seed")?)], exit: EXIT_OK })
}

fn twin(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let suite = curated_suite();
    let picked: Vec<usize> = if cfg.has("instance") {
        let i = cfg.usize("instance")?;
        if i >= suite.len() {
            return Err(ConfigError::Usage(format!("instance must be below {}", suite.len())).into());
        }
        vec![i]
    } else {
        (0..suite.len()).collect()
    };
    let b = budget(cfg)?;
    let mut items = Vec::new();
    let mut rows = Vec::new();
    let mut all = true;
    for i in picked {
        let inst = &suite[i];
        let rep = twin_lemma_check(inst, &b)?;
        all &= rep.agree;
        items.push(
            Json::object()
                .with("instance", i)
                .with("p", inst.p)
                .with("q", inst.q)
                .with("lhs", rep.lhs.to_json())
                .with("rhs", rep.rhs.to_json())
                .with("sigma", rep.sigma)
                .with("agree", rep.agree),
        );
        let diff = rep.lhs.value - rep.rhs.value;
        rows.push(Row { value: diff, stderr: rep.sigma, method: rep.lhs.method.name().into(), seed: b.seed });
    }
    let json = Json::object().with("instances", items).with("pass", all);
    Ok(Artifact { json, rows, exit: if all { EXIT_OK } else { EXIT_VERIFY_FAILED } })
}

fn verify(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let (rs, charges) = charges(cfg)?;
    let closed = match cfg.text("closed")? {
        "recurrence" => ClosedForm::Recurrence,
        _ => ClosedForm::FateevLitvinov(ordering(cfg)?),
    };
    let opts = VerifyOptions { prefactor: cfg.f64("prefactor")?, closed, policy: policy(cfg)? };
    let rep = verify_identity(&rs, &charges, &budget(cfg)?, &opts)?;
    let json = rep.to_json().set("charges", charge_config_json(&rs, &rep.config));
    let row = Row { value: rep.ratio, stderr: rep.sigma, method: rep.df_side.method.name().into(), seed: rep.df_side.seed };
    Ok(Artifact { json, rows: vec![row], exit: if rep.pass { EXIT_OK } else { EXIT_VERIFY_FAILED } })
}

/// Runs the subcommand; the artifact always echoes the resolved parameters.
pub fn run(cfg: &RunConfig) -> Result<Artifact, RunError> {
    let mut art = match cfg.subcommand {
        SubcommandKind::Special => special(cfg),
        SubcommandKind::Df => df(cfg),
        SubcommandKind::Fl => fl(cfg),
        SubcommandKind::Twin => twin(cfg),
        SubcommandKind::Verify => verify(cfg),
    }?;
    art.json = art.json.set("params", params_json(cfg));
    Ok(art)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Columns: params..., value_re, value_im, stderr, method, seed.  The seed
/// parameter appears only in the last column.
pub fn render_csv(cfg: &RunConfig, rows: &[Row]) -> String {
    use toda_core::json::format_float;
    let keys: Vec<&String> = cfg.params.keys().filter(|k| *k != "seed").collect();
    let mut out = String::new();
    let header: Vec<String> = keys.iter().map(|k| csv_field(k)).chain(["value_re", "value_im", "stderr", "method", "seed"].map(String::from)).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let mut fields: Vec<String> = keys.iter().map(|k| csv_field(&cfg.params[*k].text)).collect();
        fields.push(format_float(row.value.re));
        fields.push(format_float(row.value.im));
        fields.push(format_float(row.stderr));
        fields.push(row.method.clone());
        fields.push(row.seed.to_string());
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}

pub fn render_table(cfg: &RunConfig, art: &Artifact) -> String {
    let mut out = format!("{}\n", cfg.subcommand.name());
    let width = cfg.params.keys().map(|k| k.len()).max().unwrap_or(0).max(8);
    for (k, v) in &cfg.params {
        out.push_str(&format!("  {k:<width$}  {}\n", v.text));
    }
    for (i, row) in art.rows.iter().enumerate() {
        out.push_str(&format!(
            "  [{i}] value = {:.10e} {:+.10e}i  stderr = {:.3e}  method = {}  seed = {}\n",
            row.value.re, row.value.im, row.stderr, row.method, row.seed
        ));
    }
    out
}

pub fn render(cfg: &RunConfig, art: &Artifact) -> String {
    match cfg.output {
        OutputFormat::Json => format!("{}\n", art.json.render()),
        OutputFormat::Csv => render_csv(cfg, &art.rows),
        OutputFormat::Table => render_table(cfg, art),
    }
}
