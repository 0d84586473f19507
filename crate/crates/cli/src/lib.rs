//! Command-line front end: argument parsing, command dispatch and JSON
//! reports. The report layout is described in `docs/report-schema.md`.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crjet::automorphisms::{default_out_degree, hol_jet_basis};
use crjet::input::{parse_assignment_list, parse_manifold_file, resolve_point, ManifoldFile};
use crjet::jets::{agreement_order, counterexample_pair, determination_test, working_degree, DeterminationConfig};
use crjet::linalg::Sampler;
use crjet::manifold::{GenericManifold, MarkedPoint, Point};
use crjet::nondegeneracy::{
    degeneracy_witness, k_nondegeneracy_at, levi_number, LeviConfig, LeviVerdict, DEFAULT_KMAX,
};
use crjet::segre::{default_degree, segre_chain, SegreChain};
use crjet::{Error, Qi};

pub const SEED_ENV: &str = "CRJET_SEED";

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CAVEAT: i32 = 2;

#[derive(Parser, Debug, Clone)]
#[command(
    name = "crjet",
    version,
    about = "Exact CR invariants of polynomial generic submanifolds"
)]
pub struct Cli {
    pub command: Command,
    /// Manifold file.
    pub file: PathBuf,
    /// Coefficient or truncation degree, depending on the command.
    #[arg(long)]
    pub degree: Option<u32>,
    /// Output degree of tangency systems.
    #[arg(long = "out-degree")]
    pub out_degree: Option<u32>,
    /// Cap on the nondegeneracy order.
    #[arg(long)]
    pub kmax: Option<usize>,
    /// Cap on the Segre chain length.
    #[arg(long)]
    pub jmax: Option<usize>,
    /// Seed for sampled points and generic ranks.
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Point name from the file, or assignments such as `z1=1,s1=0`.
    #[arg(long)]
    pub point: Option<String>,
    /// Jet order.
    #[arg(long = "K")]
    pub k: Option<u32>,
    /// Print the JSON report instead of a summary.
    #[arg(long)]
    pub json: bool,
    /// Run jet determination even when its prerequisites fail.
    #[arg(long)]
    pub force: bool,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Analyze,
    Segre,
    HolDim,
    Witness,
    JetDetermination,
    Counterexample,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Analyze => "analyze",
            Command::Segre => "segre",
            Command::HolDim => "hol-dim",
            Command::Witness => "witness",
            Command::JetDetermination => "jet-determination",
            Command::Counterexample => "counterexample",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, std::io::Error),
    #[error(transparent)]
    Math(#[from] Error),
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub command: String,
    pub file: String,
    pub manifold: String,
    pub point: Option<PointOut>,
    pub config: Config,
    pub result: Value,
    pub caveats: Vec<String>,
    /// Wall-clock time; the only field that varies between identical runs.
    pub timing_ms: u64,
}

#[derive(Serialize, Debug, Clone, Default)]
pub struct Config {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out_degree: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kmax: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jmax: Option<usize>,
    #[serde(rename = "K", skip_serializing_if = "Option::is_none")]
    pub k: Option<u32>,
    pub seed: u64,
    pub force: bool,
}

#[derive(Serialize, Debug, Clone)]
pub struct PointOut {
    pub z: Vec<String>,
    pub w: Vec<String>,
    pub s: Vec<String>,
}

impl PointOut {
    fn new(p: &Point) -> Self {
        Self {
            z: strings(&p.z0),
            w: strings(&p.w0),
            s: p.s0.iter().map(|x| Qi::from_q(x.clone()).to_string()).collect(),
        }
    }
}

fn strings<T: ToString>(xs: &[T]) -> Vec<String> {
    xs.iter().map(T::to_string).collect()
}

#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub summary: Vec<String>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.report.caveats.is_empty() {
            EXIT_OK
        } else {
            EXIT_CAVEAT
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.report).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.report.command, self.report.manifold);
        for line in &self.summary {
            out.push_str(&format!("  {line}\n"));
        }
        for c in &self.report.caveats {
            out.push_str(&format!("  caveat: {c}\n"));
        }
        out
    }
}

/// Everything a command needs besides its own flags.
struct Ctx {
    file: ManifoldFile,
    m: GenericManifold,
    z0: Vec<Qi>,
    s0: Vec<crjet::Q>,
    config: Config,
    caveats: Vec<String>,
    summary: Vec<String>,
}

impl Ctx {
    fn mark(&self, degree: u32) -> crjet::Result<MarkedPoint> {
        self.m.mark_point(&self.z0, &self.s0, degree)
    }

    fn levi_config(&self) -> LeviConfig {
        LeviConfig {
            kmax: self.config.kmax.unwrap_or(DEFAULT_KMAX),
            seed: self.config.seed,
            ..LeviConfig::default()
        }
    }
}

pub fn load(path: &Path) -> Result<ManifoldFile, CliError> {
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_owned(), e))?;
    Ok(parse_manifold_file(&src)?)
}

fn point_spec(file: &ManifoldFile, spec: Option<&str>) -> crjet::Result<(Vec<Qi>, Vec<crjet::Q>)> {
    let assignments = match spec {
        None => Vec::new(),
        Some(s) => match file.point(s) {
            Some(p) => p.assignments.clone(),
            None if s.contains('=') => parse_assignment_list(s)?,
            None => return Err(Error::InvalidArgument(format!("no point named '{s}'"))),
        },
    };
    resolve_point(file.n, file.d, &assignments)
}

pub fn run(cli: &Cli) -> Result<Outcome, CliError> {
    let start = Instant::now();
    let file = load(&cli.file)?;
    let m = file.to_manifold()?;
    let (z0, s0) = point_spec(&file, cli.point.as_deref())?;
    let point = match cli.command {
        Command::Validate => None,
        _ => Some(m.point(&z0, &s0)?),
    };
    let mut ctx = Ctx {
        file,
        m,
        z0,
        s0,
        config: Config {
            seed: cli.seed,
            force: cli.force,
            ..Config::default()
        },
        caveats: Vec::new(),
        summary: Vec::new(),
    };
    let result = match cli.command {
        Command::Validate => validate(&mut ctx)?,
        Command::Analyze => analyze(&mut ctx, cli)?,
        Command::Segre => segre(&mut ctx, cli)?,
        Command::HolDim => hol_dim(&mut ctx, cli)?,
        Command::Witness => witness(&mut ctx, cli)?,
        Command::JetDetermination => jet_determination(&mut ctx, cli)?,
        Command::Counterexample => counterexample(&mut ctx, cli)?,
    };
    let report = Report {
        command: cli.command.name().into(),
        file: cli.file.display().to_string(),
        manifold: ctx.file.name.clone(),
        point: point.as_ref().map(PointOut::new),
        config: ctx.config,
        result,
        caveats: ctx.caveats,
        timing_ms: start.elapsed().as_millis() as u64,
    };
    Ok(Outcome {
        report,
        summary: ctx.summary,
    })
}

fn validate(ctx: &mut Ctx) -> Result<Value, CliError> {
    let v = ctx.m.validate()?;
    ctx.summary
        .push(format!("n = {}, d = {}, max degree = {}", v.n, v.d, v.max_degree));
    Ok(json!({
        "n": v.n,
        "d": v.d,
        "max_degree": v.max_degree,
        "phi": strings(ctx.m.phi()),
        "points": ctx.file.points.iter().map(|p| p.name.clone()).collect::<Vec<_>>(),
    }))
}

fn chain_json(ch: &SegreChain) -> Value {
    json!({
        "dims": ch.dims,
        "j0": ch.j0,
        "stabilized": ch.stabilized,
        "minimal": ch.minimal(),
        "orbit_dimension": ch.orbit_dimension().map(|(c, r)| json!({"complex": c, "real": r})),
        "degree": ch.degree,
    })
}

fn run_segre(ctx: &mut Ctx, cli: &Cli) -> Result<SegreChain, CliError> {
    let jmax = cli.jmax.unwrap_or(ctx.m.d() + 2);
    let degree = cli.degree.unwrap_or_else(|| default_degree(&ctx.m));
    ctx.config.jmax = Some(jmax);
    ctx.config.degree = Some(degree);
    let p = ctx.mark(degree)?;
    let ch = segre_chain(&p, jmax, degree, &mut Sampler::new(ctx.config.seed, 8))?;
    if !ch.stabilized {
        ctx.caveats
            .push(format!("Segre dimensions did not stabilize within jmax = {jmax}"));
    }
    ctx.summary.push(format!(
        "Segre dims {:?}, j0 = {}, minimal = {}",
        ch.dims,
        opt(ch.j0),
        ch.minimal().map_or("unknown".into(), |b| b.to_string())
    ));
    if let Some((c, r)) = ch.orbit_dimension() {
        ctx.summary.push(format!("CR orbit: complex dim {c}, real dim {r}"));
    }
    Ok(ch)
}

fn opt<T: ToString>(x: Option<T>) -> String {
    x.map_or("none".into(), |v| v.to_string())
}

fn analyze(ctx: &mut Ctx, cli: &Cli) -> Result<Value, CliError> {
    let cfg = ctx.levi_config();
    ctx.config.kmax = Some(cfg.kmax);
    let levi = levi_number(&ctx.m, &cfg)?;
    let l = match &levi.verdict {
        LeviVerdict::Finite(l) => json!(l),
        LeviVerdict::HolomorphicallyDegenerate => json!("holomorphically degenerate"),
        LeviVerdict::Inconclusive => {
            ctx.caveats.push(format!(
                "Levi number not found at sampled points within kmax = {}",
                cfg.kmax
            ));
            json!("inconclusive")
        }
    };
    let p = ctx.m.point(&ctx.z0, &ctx.s0)?;
    let nd = k_nondegeneracy_at(&ctx.m, &p, cfg.kmax)?;
    if nd.k.is_none() {
        ctx.caveats
            .push(format!("not k-nondegenerate at the point for k <= {}", cfg.kmax));
    }
    ctx.summary.push(format!("l(M) = {l}, k at point = {}", opt(nd.k)));
    let ch = run_segre(ctx, cli)?;
    Ok(json!({
        "levi_number": l,
        "levi_note": "minimum over seeded sample points unless an exact witness is found; not a certificate",
        "witness": levi.witness.as_ref().map(|f| f.to_string()),
        "k_at_point": nd.k,
        "span_dims": nd.span_dims,
        "segre": chain_json(&ch),
    }))
}

fn segre(ctx: &mut Ctx, cli: &Cli) -> Result<Value, CliError> {
    let ch = run_segre(ctx, cli)?;
    let mut v = chain_json(&ch);
    v["sets"] = json!(ch.params.iter().map(|z| strings(z)).collect::<Vec<_>>());
    Ok(v)
}

fn hol_dim(ctx: &mut Ctx, cli: &Cli) -> Result<Value, CliError> {
    let dc = cli.degree.unwrap_or(2);
    let base = default_out_degree(&ctx.m, dc);
    let top = cli.out_degree.unwrap_or(base);
    ctx.config.degree = Some(dc);
    ctx.config.out_degree = Some(top);
    let outs: Vec<u32> = (base.min(top)..=top).collect();
    let p = ctx.mark(top)?;
    let rep = hol_jet_basis(&p.recentered, dc, &outs)?;
    let dim = rep.dimension();
    let stable = rep.dims.len() >= 2 && rep.dims[rep.dims.len() - 2] == dim;
    if !stable {
        ctx.caveats
            .push("dimension has not stabilized in the output degree".into());
    }
    if !rep.verified {
        ctx.caveats
            .push("a kernel element failed the independent tangency check".into());
    }
    ctx.summary.push(format!(
        "dimension {dim} at coefficient degree {dc}, output degree {top}"
    ));
    Ok(json!({
        "coef_degree": dc,
        "out_degrees": rep.out_degrees,
        "dims": rep.dims,
        "dimension": dim,
        "stabilized": stable,
        "verified": rep.verified,
        "basis": strings(&rep.basis),
        "note": "polynomial fields of coefficient degree <= coef_degree, tangent through each output degree; \
                 stabilization in the output degree is evidence, not proof, of the germ's dimension",
    }))
}

fn witness(ctx: &mut Ctx, cli: &Cli) -> Result<Value, CliError> {
    let degree = cli.degree.unwrap_or(1);
    let max_rho = ctx.m.max_degree();
    let out = cli.out_degree.unwrap_or(degree + max_rho);
    ctx.config.degree = Some(degree);
    ctx.config.out_degree = Some(out);
    let p = ctx.mark(out)?;
    let w = degeneracy_witness(&p.recentered, degree, Some(out))?;
    ctx.summary.push(format!(
        "{} truncated witnesses, exact: {}",
        w.fields.len(),
        w.has_exact_witness()
    ));
    Ok(json!({
        "fields": strings(&w.fields),
        "exact": w.exact,
        "holomorphically_degenerate": w.has_exact_witness(),
    }))
}

fn jet_determination(ctx: &mut Ctx, cli: &Cli) -> Result<Value, CliError> {
    let k_max = cli.k.unwrap_or(crjet::jets::DEFAULT_KMAX);
    let levi = ctx.levi_config();
    ctx.config.k = Some(k_max);
    ctx.config.kmax = Some(levi.kmax);
    let p = ctx.mark(working_degree(k_max))?;
    let cfg = DeterminationConfig {
        k_max,
        levi,
        segre_seed: ctx.config.seed,
        force: cli.force,
        reverse: false,
    };
    let rep = determination_test(&ctx.m, &p, &cfg)?;
    if !rep.prerequisites_ok {
        ctx.caveats.push("prerequisites fail at the point; run forced".into());
    }
    if !rep.verified {
        ctx.caveats
            .push("determined jet failed the independent self-map check".into());
    }
    ctx.summary.push(format!(
        "unique = {}, K_norm = {}, freedoms {:?}",
        rep.unique, rep.k_norm, rep.freedoms
    ));
    Ok(json!({
        "levi_number": rep.levi,
        "k_at_point": rep.k_at_point,
        "minimal": rep.minimal,
        "prerequisites_ok": rep.prerequisites_ok,
        "K_norm": rep.k_norm,
        "K_max": rep.k_max,
        "freedoms": rep.freedoms.iter().map(|(k, f)| json!({"degree": k, "freedom": f})).collect::<Vec<_>>(),
        "unique": rep.unique,
        "verified": rep.verified,
    }))
}

fn counterexample(ctx: &mut Ctx, cli: &Cli) -> Result<Value, CliError> {
    let k = cli.k.unwrap_or(2);
    ctx.config.k = Some(k);
    let p = ctx.mark(k + 4)?;
    let Some(pair) = counterexample_pair(&p, k)? else {
        ctx.summary.push("no construction available".into());
        return Ok(Value::Null);
    };
    if !pair.verified {
        ctx.caveats.push("pair failed the independent self-map check".into());
    }
    ctx.summary.push(format!(
        "F agrees with G through order {}, differs at order {}",
        opt(agreement_order(&pair.f, &pair.g)),
        pair.differs_at
    ));
    Ok(json!({
        "F": strings(&pair.f),
        "G": strings(&pair.g),
        "field": pair.field.to_string(),
        "multiplier": pair.multiplier.to_string(),
        "exponent": pair.exponent,
        "agree_through": agreement_order(&pair.f, &pair.g),
        "differs_at": pair.differs_at,
        "working_degree": pair.working_degree,
        "verified": pair.verified,
    }))
}

/// Parses `args`, runs the command and returns the text to print on stdout,
/// the text for stderr, and the exit code.
pub fn main_with<I, T>(args: I) -> (String, String, i32)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            return if e.use_stderr() {
                (String::new(), text, code)
            } else {
                (text, String::new(), code)
            };
        }
    };
    match run(&cli) {
        Ok(out) => {
            let text = if cli.json { out.to_json() + "\n" } else { out.to_text() };
            (text, String::new(), out.exit_code())
        }
        Err(e) => (String::new(), format!("error: {e}\n"), EXIT_ERROR),
    }
}
