//! Experiment runner behind the `hetnet` binary.
//!
//! Every command renders a CSV document: a block of `# key = value`
//! metadata lines (tool version, command, every config key, and every run
//! option that affects the rows) followed by a header and data rows. The
//! `replay` command re-runs a document from its metadata alone.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::association::{assoc_report, AssocMode, ServingDistance};
use crate::distributions::{disk_pair_distance_law, ContactLaw};
use crate::error::{Error, Result};
use crate::geometry::{ClusterCountMode, UserMode};
use crate::model::{fmt_f64, Config, NetworkParams, Tier, CONFIG_KEYS};
use crate::montecarlo::{
    association_from_records, rate_from_records, run_all, with_workers, write_samples_csv, SimConfig, SmallLayout,
};
use crate::numerics::{integrate_finite, QuadSpec};
use crate::rate::{rate_assembled, rate_total};

pub const TOOL_VERSION: &str = concat!("hetnet ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Parser)]
#[command(
    name = "hetnet",
    version,
    about = "Two-tier clustered HetNet: association, distance laws, ergodic rate"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Association probabilities, loads and rates in one row.
    Analyze(CommonArgs),
    /// Association report.
    Associate(CommonArgs),
    /// Per-tier and network rate with the one-shot cross-check.
    Rate(CommonArgs),
    /// Monte Carlo estimates next to the analytical values.
    Simulate(SimulateArgs),
    /// Analytical sweep of one config key.
    Sweep(SweepArgs),
    /// Data behind one of the figure sweeps.
    Figure(FigureArgs),
    /// A distance law tabulated on a uniform grid.
    LawDump(LawArgs),
    /// Re-runs a CSV produced by this tool from its metadata header.
    Replay(ReplayArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Params file of `key = value` lines.
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Override one key, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    /// Output file (stdout when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Association mode: paper or consistent.
    #[arg(long, default_value = "paper")]
    pub mode: AssocMode,
    /// Worker threads for simulation (0 = all cores). Does not change output.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Args)]
pub struct McArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    /// Daughters per cluster: fixed or poisson.
    #[arg(long, default_value = "fixed")]
    pub count_mode: ClusterCountMode,
    /// Typical-user placement: daughter or union.
    #[arg(long, default_value = "daughter")]
    pub user_mode: UserMode,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub mc: McArgs,
    /// Also write every replication to this CSV.
    #[arg(long)]
    pub samples: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Config key to vary.
    #[arg(long)]
    pub key: String,
    /// Comma-separated values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<String>,
    /// Add the network rate column.
    #[arg(long)]
    pub rate: bool,
}

#[derive(Debug, Args)]
pub struct FigureArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub mc: McArgs,
    /// fig2, fig3, fig4 or fig5.
    #[arg(long)]
    pub figure: FigureId,
}

#[derive(Debug, Args)]
pub struct LawArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// ppp, mcp-global, dm-conditional, pair, ds-intra, xm or xs.
    #[arg(long)]
    pub law: LawId,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// CSV with a metadata header.
    pub file: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl FigureId {
    pub fn as_str(self) -> &'static str {
        match self {
            FigureId::Fig2 => "fig2",
            FigureId::Fig3 => "fig3",
            FigureId::Fig4 => "fig4",
            FigureId::Fig5 => "fig5",
        }
    }
}

impl FromStr for FigureId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fig2" => Ok(FigureId::Fig2),
            "fig3" => Ok(FigureId::Fig3),
            "fig4" => Ok(FigureId::Fig4),
            "fig5" => Ok(FigureId::Fig5),
            _ => Err(format!("unknown figure `{s}`, expected fig2..fig5")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LawId {
    Ppp,
    McpGlobal,
    DmConditional,
    Pair,
    DsIntra,
    Xm,
    Xs,
}

impl LawId {
    pub fn as_str(self) -> &'static str {
        match self {
            LawId::Ppp => "ppp",
            LawId::McpGlobal => "mcp-global",
            LawId::DmConditional => "dm-conditional",
            LawId::Pair => "pair",
            LawId::DsIntra => "ds-intra",
            LawId::Xm => "xm",
            LawId::Xs => "xs",
        }
    }
}

impl FromStr for LawId {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        [
            LawId::Ppp,
            LawId::McpGlobal,
            LawId::DmConditional,
            LawId::Pair,
            LawId::DsIntra,
            LawId::Xm,
            LawId::Xs,
        ]
        .into_iter()
        .find(|l| l.as_str() == s)
        .ok_or_else(|| format!("unknown law `{s}`"))
    }
}

/// Which computation to run.
#[derive(Debug, Clone, PartialEq)]
pub enum Task {
    Analyze,
    Associate,
    Rate,
    Simulate,
    Sweep {
        key: String,
        values: Vec<String>,
        with_rate: bool,
    },
    Figure(FigureId),
    LawDump {
        law: LawId,
        points: usize,
    },
}

impl Task {
    fn name(&self) -> &'static str {
        match self {
            Task::Analyze => "analyze",
            Task::Associate => "associate",
            Task::Rate => "rate",
            Task::Simulate => "simulate",
            Task::Sweep { .. } => "sweep",
            Task::Figure(_) => "figure",
            Task::LawDump { .. } => "law-dump",
        }
    }

    fn uses_mc(&self) -> bool {
        matches!(self, Task::Simulate | Task::Figure(FigureId::Fig2))
    }
}

/// A fully resolved run: everything that determines the data rows.
#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub task: Task,
    pub config: Config,
    pub mode: AssocMode,
    pub seed: u64,
    pub reps: usize,
    pub count_mode: ClusterCountMode,
    pub user_mode: UserMode,
}

impl Invocation {
    pub fn new(task: Task, config: Config) -> Self {
        Invocation {
            task,
            config,
            mode: AssocMode::PaperFaithful,
            seed: 1,
            reps: 10_000,
            count_mode: ClusterCountMode::Fixed,
            user_mode: UserMode::DaughterStyle,
        }
    }

    fn sim(&self, params: &NetworkParams) -> SimConfig {
        SimConfig {
            cluster_count_mode: self.count_mode,
            user_mode: self.user_mode,
            ..SimConfig::for_params(params, self.reps, self.seed)
        }
    }

    /// Metadata block, one `# key = value` line each.
    pub fn metadata(&self) -> String {
        let mut m = String::new();
        let mut line = |k: &str, v: &str| {
            let _ = writeln!(m, "# {k} = {v}");
        };
        line("tool", TOOL_VERSION);
        line("command", self.task.name());
        for k in CONFIG_KEYS {
            line(k, &self.config.get(k).unwrap());
        }
        line("mode", self.mode.as_str());
        match &self.task {
            Task::Sweep { key, values, with_rate } => {
                line("sweep_key", key);
                line("sweep_values", &values.join(","));
                line("sweep_rate", if *with_rate { "true" } else { "false" });
            }
            Task::Figure(f) => line("figure", f.as_str()),
            Task::LawDump { law, points } => {
                line("law", law.as_str());
                line("points", &points.to_string());
            }
            _ => {}
        }
        if self.task.uses_mc() {
            line("seed", &self.seed.to_string());
            line("reps", &self.reps.to_string());
            line("count_mode", count_mode_str(self.count_mode));
            line("user_mode", user_mode_str(self.user_mode));
            if let Ok(p) = self.config.to_params() {
                let s = self.sim(&p);
                line("window_half_width_m", &fmt_f64(s.window_half_width));
                line("guard_width_m", &fmt_f64(s.guard_width));
                line("fading", "rayleigh");
            }
        }
        m
    }

    /// Rebuilds an invocation from a metadata block. Informational keys are
    /// ignored; unknown keys are rejected.
    pub fn from_metadata(text: &str) -> Result<Invocation> {
        let mut config = Config::default();
        let mut command = None;
        let mut inv = Invocation::new(Task::Analyze, Config::default());
        let (mut sweep_key, mut sweep_values, mut sweep_rate) = (None, Vec::new(), false);
        let (mut figure, mut law, mut points) = (None, None, 201usize);
        for (i, raw) in text.lines().enumerate() {
            let Some(body) = raw.strip_prefix('#') else { break };
            let Some((k, v)) = body.split_once('=') else { continue };
            let (k, v) = (k.trim(), v.trim());
            let bad = |message: String| Error::Config { line: i + 1, message };
            match k {
                "tool" | "window_half_width_m" | "guard_width_m" | "fading" => {}
                "command" => command = Some(v.to_string()),
                "mode" => inv.mode = v.parse().map_err(bad)?,
                "seed" => inv.seed = v.parse().map_err(|_| bad(format!("bad seed `{v}`")))?,
                "reps" => inv.reps = v.parse().map_err(|_| bad(format!("bad reps `{v}`")))?,
                "count_mode" => inv.count_mode = v.parse().map_err(bad)?,
                "user_mode" => inv.user_mode = v.parse().map_err(bad)?,
                "sweep_key" => sweep_key = Some(v.to_string()),
                "sweep_values" => sweep_values = v.split(',').map(str::to_string).collect(),
                "sweep_rate" => sweep_rate = v == "true",
                "figure" => figure = Some(v.parse::<FigureId>().map_err(bad)?),
                "law" => law = Some(v.parse::<LawId>().map_err(bad)?),
                "points" => points = v.parse().map_err(|_| bad(format!("bad points `{v}`")))?,
                _ => config.set(k, v).map_err(|e| match e {
                    Error::Config { message, .. } => bad(message),
                    other => other,
                })?,
            }
        }
        let missing = |what: &str| Error::Config {
            line: 0,
            message: format!("metadata lacks `{what}`"),
        };
        inv.task = match command.as_deref().ok_or_else(|| missing("command"))? {
            "analyze" => Task::Analyze,
            "associate" => Task::Associate,
            "rate" => Task::Rate,
            "simulate" => Task::Simulate,
            "sweep" => Task::Sweep {
                key: sweep_key.ok_or_else(|| missing("sweep_key"))?,
                values: sweep_values,
                with_rate: sweep_rate,
            },
            "figure" => Task::Figure(figure.ok_or_else(|| missing("figure"))?),
            "law-dump" => Task::LawDump {
                law: law.ok_or_else(|| missing("law"))?,
                points,
            },
            other => {
                return Err(Error::Config {
                    line: 0,
                    message: format!("unknown command `{other}`"),
                })
            }
        };
        inv.config = config;
        Ok(inv)
    }
}

fn count_mode_str(m: ClusterCountMode) -> &'static str {
    match m {
        ClusterCountMode::Fixed => "fixed",
        ClusterCountMode::Poisson => "poisson",
    }
}

fn user_mode_str(m: UserMode) -> &'static str {
    match m {
        UserMode::DaughterStyle => "daughter",
        UserMode::UnionUniform => "union",
    }
}

/// Reads the params file (if any) and applies `key=value` overrides.
/// The result is validated as a whole.
pub fn load_config(params: Option<&Path>, overrides: &[String]) -> Result<Config> {
    let mut cfg = match params {
        Some(p) => Config::parse(&std::fs::read_to_string(p)?)?,
        None => Config::default(),
    };
    for o in overrides {
        let (k, v) = o.split_once('=').ok_or_else(|| Error::Config {
            line: 0,
            message: format!("override `{o}` is not `key=value`"),
        })?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.to_params()?;
    Ok(cfg)
}

fn f(v: f64) -> String {
    fmt_f64(v)
}

fn row(cells: &[String]) -> String {
    let mut s = cells.join(",");
    s.push('\n');
    s
}

/// Renders the full CSV document for an invocation.
pub fn execute(inv: &Invocation) -> Result<String> {
    let params = inv.config.to_params()?;
    let mut out = inv.metadata();
    out.push_str(&match &inv.task {
        Task::Analyze => analyze(&params, inv.mode)?,
        Task::Associate => associate(&params, inv.mode)?,
        Task::Rate => rate(&params)?,
        Task::Simulate => simulate(&params, inv, None)?,
        Task::Sweep { key, values, with_rate } => sweep(&inv.config, inv.mode, key, values, *with_rate)?,
        Task::Figure(id) => figure(*id, &params, inv)?,
        Task::LawDump { law, points } => law_dump(*law, *points, &params)?,
    });
    Ok(out)
}

fn analyze(p: &NetworkParams, mode: AssocMode) -> Result<String> {
    let a = assoc_report(p, mode)?;
    let r = rate_assembled(p)?;
    Ok(
        String::from("a_macro,a_small,load_macro,load_small,rate_macro,rate_small,rate_total\n")
            + &row(&[
                f(a.a_macro),
                f(a.a_small),
                f(a.load_macro),
                f(a.load_small),
                f(r.rate_macro),
                f(r.rate_small),
                f(r.rate_total),
            ]),
    )
}

fn associate(p: &NetworkParams, mode: AssocMode) -> Result<String> {
    let a = assoc_report(p, mode)?;
    Ok(String::from("a_macro,a_small,sum,load_macro,load_small,mode\n")
        + &row(&[
            f(a.a_macro),
            f(a.a_small),
            f(a.sum()),
            f(a.load_macro),
            f(a.load_small),
            mode.as_str().to_string(),
        ]))
}

fn rate(p: &NetworkParams) -> Result<String> {
    let r = rate_total(p)?;
    let c = r.cross_check.expect("rate_total fills the cross-check");
    Ok(format!(
        "# rate_total_eq18_as_printed = {}\n# rel_diff_as_printed = {}\n",
        f(c.direct_as_printed),
        f(c.rel_diff_as_printed)
    ) + "rate_macro,rate_small,rate_total_eq17,rate_total_eq18,rel_diff\n"
        + &row(&[
            f(r.rate_macro),
            f(r.rate_small),
            f(r.rate_total),
            f(c.direct),
            f(c.rel_diff),
        ]))
}

fn simulate(p: &NetworkParams, inv: &Invocation, samples: Option<&Path>) -> Result<String> {
    let sim = inv.sim(p);
    let records = run_all(p, &sim)?;
    if let Some(path) = samples {
        let file = std::fs::File::create(path)?;
        write_samples_csv(&records, std::io::BufWriter::new(file))?;
    }
    let (am, as_) = association_from_records(&records, sim.master_seed)?;
    let rate = rate_from_records(&records, sim.master_seed)?;
    let redraws: u64 = records.iter().map(|r| r.redraws).sum();
    let analytic = assoc_report(p, inv.mode)?;
    let rate_an = rate_assembled(p)?;
    Ok(String::from(
        "n,a_macro_mc,a_macro_stderr,a_small_mc,a_small_stderr,a_small_analytical,a_small_gap,rate_mc,rate_stderr,rate_analytical,redraws\n",
    ) + &row(&[
        records.len().to_string(),
        f(am.mean),
        f(am.stderr),
        f(as_.mean),
        f(as_.stderr),
        f(analytic.a_small),
        f(as_.mean - analytic.a_small),
        f(rate.mean),
        f(rate.stderr),
        f(rate_an.rate_total),
        redraws.to_string(),
    ]))
}

fn sweep(base: &Config, mode: AssocMode, key: &str, values: &[String], with_rate: bool) -> Result<String> {
    if !CONFIG_KEYS.contains(&key) {
        return Err(Error::UnknownKey(key.to_string()));
    }
    let mut out = format!("{key},a_macro,a_small,sum,load_macro,load_small");
    out.push_str(if with_rate { ",rate_total\n" } else { "\n" });
    for v in values {
        let mut cfg = base.clone();
        cfg.set(key, v)?;
        let p = cfg.to_params()?;
        let a = assoc_report(&p, mode)?;
        let mut cells = vec![
            cfg.get(key).unwrap(),
            f(a.a_macro),
            f(a.a_small),
            f(a.sum()),
            f(a.load_macro),
            f(a.load_small),
        ];
        if with_rate {
            cells.push(f(rate_assembled(&p)?.rate_total));
        }
        out.push_str(&row(&cells));
    }
    Ok(out)
}

/// Bias ratios `B_m / B_s` of the association sweep.
pub fn bias_ratio_grid() -> Vec<f64> {
    (0..20).map(|i| 10f64.powf(-1.0 + 2.0 * i as f64 / 19.0)).collect()
}

/// Cluster radii of the radius sweeps, quarter-octave steps from 25 m to 3200 m.
pub fn radius_grid() -> Vec<f64> {
    (0..=28).map(|i| 25.0 * 2f64.powf(i as f64 / 4.0)).collect()
}

fn figure(id: FigureId, p: &NetworkParams, inv: &Invocation) -> Result<String> {
    let mut out = String::new();
    match id {
        FigureId::Fig2 => {
            out.push_str("lambda_s,rate_mcp_mc,rate_ppp_baseline_mc,rate_mcp_analytical\n");
            for c in 1..=12 {
                let q = NetworkParams { c_bar: c as f64, ..*p };
                let sim = inv.sim(&q);
                let mcp = rate_from_records(&run_all(&q, &sim)?, sim.master_seed)?;
                let ppp_sim = SimConfig {
                    small_layout: SmallLayout::IndependentPpp,
                    ..sim
                };
                let ppp = rate_from_records(&run_all(&q, &ppp_sim)?, sim.master_seed)?;
                let an = rate_assembled(&q)?;
                out.push_str(&row(&[f(q.lambda_s()), f(mcp.mean), f(ppp.mean), f(an.rate_total)]));
            }
        }
        FigureId::Fig3 => {
            out.push_str("bias_ratio,a_macro_paper,a_small_paper,a_macro_consistent,a_small_consistent\n");
            for ratio in bias_ratio_grid() {
                let q = NetworkParams {
                    b_macro: ratio * p.b_small,
                    ..*p
                };
                let a = assoc_report(&q, AssocMode::PaperFaithful)?;
                let c = assoc_report(&q, AssocMode::Consistent)?;
                out.push_str(&row(&[
                    f(ratio),
                    f(a.a_macro),
                    f(a.a_small),
                    f(c.a_macro),
                    f(c.a_small),
                ]));
            }
        }
        FigureId::Fig4 | FigureId::Fig5 => {
            let tier = if id == FigureId::Fig4 { Tier::Macro } else { Tier::Small };
            out.push_str(&format!("radius_m,lambda_m,a_{tier}\n"));
            for lambda_m in [p.lambda_m, 4.0 * p.lambda_m] {
                for r in radius_grid() {
                    let q = NetworkParams {
                        lambda_m,
                        cluster_radius: r,
                        ..*p
                    };
                    let a = assoc_report(&q, inv.mode)?;
                    out.push_str(&row(&[f(r), f(lambda_m), f(a.prob(tier))]));
                }
            }
        }
    }
    Ok(out)
}

enum Tabulated {
    Contact(ContactLaw),
    Serving(ServingDistance),
}

fn law_dump(law: LawId, points: usize, p: &NetworkParams) -> Result<String> {
    if points < 2 {
        return Err(Error::InvalidParam {
            name: "points",
            reason: "need at least 2".into(),
        });
    }
    let t = match law {
        LawId::Ppp => Tabulated::Contact(ContactLaw::ppp(p.lambda_m)),
        LawId::McpGlobal => Tabulated::Contact(ContactLaw::mcp_global(p.lambda_m, p.c_bar)),
        LawId::DmConditional => Tabulated::Contact(ContactLaw::macro_conditional(p)),
        LawId::Pair => Tabulated::Contact(disk_pair_distance_law(p.cluster_radius)?),
        LawId::DsIntra => Tabulated::Contact(ContactLaw::intra_cluster(p.c_bar, p.cluster_radius)?),
        LawId::Xm => Tabulated::Serving(ServingDistance::new(Tier::Macro, p)?),
        LawId::Xs => Tabulated::Serving(ServingDistance::new(Tier::Small, p)?),
    };
    let (lo, hi) = match &t {
        Tabulated::Contact(c) => (c.support().0, c.grid_end(1e-6)),
        Tabulated::Serving(s) => s.support(),
    };
    let mut out = String::from("r,pdf,ccdf\n");
    for i in 0..points {
        let r = lo + (hi - lo) * i as f64 / (points - 1) as f64;
        let (pdf, ccdf) = match &t {
            Tabulated::Contact(c) => (c.pdf(r), c.ccdf(r)),
            Tabulated::Serving(s) => {
                let below = integrate_finite(|x| s.pdf(x), lo, r, &QuadSpec::default())?;
                (s.pdf(r), (1.0 - below).clamp(0.0, 1.0))
            }
        };
        out.push_str(&row(&[f(r), f(pdf), f(ccdf)]));
    }
    Ok(out)
}

/// Exit status for an error: 1 config, 2 numerical, 3 I/O.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } | Error::UnknownKey(_) | Error::InvalidParam { .. } | Error::DegenerateCluster(_) => 1,
        Error::Io(_) => 3,
        Error::NonConvergence { .. }
        | Error::EmptyPattern
        | Error::ZeroDistance
        | Error::DivisionByZero(_)
        | Error::EmptyInput => 2,
    }
}

fn emit(doc: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, doc)?,
        None => {
            use std::io::Write;
            std::io::stdout().write_all(doc.as_bytes())?;
        }
    }
    Ok(())
}

fn common_invocation(task: Task, c: &CommonArgs) -> Result<Invocation> {
    let config = load_config(c.params.as_deref(), &c.overrides)?;
    Ok(Invocation {
        mode: c.mode,
        ..Invocation::new(task, config)
    })
}

fn with_mc(mut inv: Invocation, mc: &McArgs) -> Invocation {
    inv.seed = mc.seed;
    inv.reps = mc.reps;
    inv.count_mode = mc.count_mode;
    inv.user_mode = mc.user_mode;
    inv
}

fn dispatch(cli: Cli) -> Result<()> {
    let (inv, out, workers, samples) = match cli.command {
        Command::Analyze(c) => (common_invocation(Task::Analyze, &c)?, c.out, c.workers, None),
        Command::Associate(c) => (common_invocation(Task::Associate, &c)?, c.out, c.workers, None),
        Command::Rate(c) => (common_invocation(Task::Rate, &c)?, c.out, c.workers, None),
        Command::Simulate(s) => (
            with_mc(common_invocation(Task::Simulate, &s.common)?, &s.mc),
            s.common.out,
            s.common.workers,
            s.samples,
        ),
        Command::Sweep(s) => {
            let task = Task::Sweep {
                key: s.key,
                values: s.values,
                with_rate: s.rate,
            };
            (
                common_invocation(task, &s.common)?,
                s.common.out,
                s.common.workers,
                None,
            )
        }
        Command::Figure(fa) => (
            with_mc(common_invocation(Task::Figure(fa.figure), &fa.common)?, &fa.mc),
            fa.common.out,
            fa.common.workers,
            None,
        ),
        Command::LawDump(l) => (
            common_invocation(
                Task::LawDump {
                    law: l.law,
                    points: l.points,
                },
                &l.common,
            )?,
            l.common.out,
            l.common.workers,
            None,
        ),
        Command::Replay(r) => {
            let text = std::fs::read_to_string(&r.file)?;
            (Invocation::from_metadata(&text)?, r.out, r.workers, None)
        }
    };
    let doc = with_workers(workers, || match (&inv.task, samples.as_deref()) {
        (Task::Simulate, Some(path)) => {
            let p = inv.config.to_params()?;
            Ok(inv.metadata() + &simulate(&p, &inv, Some(path))?)
        }
        _ => execute(&inv),
    })?;
    emit(&doc, out.as_deref())
}

/// Parses `args` (program name first), runs, and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("hetnet: {e}");
            exit_code(&e)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_round_trips() {
        let mut cfg = Config::default();
        cfg.set("c_bar", "7").unwrap();
        let mut inv = Invocation::new(Task::Figure(FigureId::Fig2), cfg);
        inv.seed = 99;
        inv.reps = 1234;
        inv.mode = AssocMode::Consistent;
        inv.count_mode = ClusterCountMode::Poisson;
        let back = Invocation::from_metadata(&(inv.metadata() + "lambda_s\n")).unwrap();
        assert_eq!(back, inv);

        let sw = Invocation::new(
            Task::Sweep {
                key: "c_bar".into(),
                values: vec!["1".into(), "2".into()],
                with_rate: true,
            },
            Config::default(),
        );
        assert_eq!(Invocation::from_metadata(&sw.metadata()).unwrap(), sw);
    }

    #[test]
    fn overrides_apply_after_file() {
        let cfg = load_config(None, &["c_bar=9".into(), "b_small_db = 3".into()]).unwrap();
        assert_eq!(cfg.c_bar, 9.0);
        assert_eq!(cfg.b_small_db, 3.0);
        assert_eq!(
            load_config(None, &["nope=1".into()]),
            Err(Error::UnknownKey("nope".into()))
        );
        assert!(matches!(
            load_config(None, &["alpha_macro=2".into()]),
            Err(Error::InvalidParam { .. })
        ));
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::UnknownKey("x".into())), 1);
        assert_eq!(
            exit_code(&Error::NonConvergence {
                estimate: 0.0,
                error: 1.0,
                subdivisions: 3
            }),
            2
        );
        assert_eq!(exit_code(&Error::Io("x".into())), 3);
    }

    #[test]
    fn associate_row_shape() {
        let doc = execute(&Invocation::new(Task::Associate, Config::default())).unwrap();
        let data: Vec<&str> = doc.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(data[0], "a_macro,a_small,sum,load_macro,load_small,mode");
        assert_eq!(data.len(), 2);
        assert!(data[1].ends_with(",paper_faithful"));
    }

    #[test]
    fn grids() {
        let b = bias_ratio_grid();
        assert_eq!(b.len(), 20);
        assert!((b[0] - 0.1).abs() < 1e-15 && (b[19] - 10.0).abs() < 1e-12);
        let r = radius_grid();
        assert!(r.len() >= 10);
        assert_eq!(r[0], 25.0);
    }

    #[test]
    fn bad_flag_is_config_error() {
        assert_eq!(run(["hetnet", "figure", "--figure", "fig9"]), 1);
        assert_eq!(run(["hetnet", "associate", "--set", "bogus=1"]), 1);
    }
}
