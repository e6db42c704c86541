//! Command-line harness. Every subcommand is a pure function of its flags,
//! config file and fixture files, and exits 0 when its checks pass.
//!
//! `pca sample` and `sweep stability` also read a flat `key=value` config
//! file (`--config`); flag names mirror the keys and flags win.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::io::{BufReader, Write as _};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use crate::analysis::{periodicity_scan, sea_island_check, Metric};
use crate::ca1d::{self, run1d, Boundary, Config1D, LocalRule};
use crate::fmt::sig12;
use crate::gibbs::{self, temperature_map, Hamiltonian, InteractionParams};
use crate::pca::{error_set, sample_trajectory, NoiseParams, RngPolicy, SpaceTimeConfig};
use crate::stack3d::{erosion_probe, stacked_step, ErosionOutcome, Flip};
use crate::sweep::{self, build_reference, search_reference_patch, BoundaryKind, InitSpec, StabilityConfig};
use crate::tileset::{check_deterministic, find_patch, find_torus_tiling, Direction, Patch, SearchOutcome, TileSet};
use crate::Symbol;

type CliResult<T> = anyhow::Result<T>;

#[derive(Debug, Parser)]
#[command(name = "quasigas", version, about = "Noisy stacked Wang-tile automata and their lattice-gas Gibbs states")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Group,
}

#[derive(Debug, Subcommand)]
pub enum Group {
    /// Tile set gates and patch search.
    #[command(subcommand)]
    Tileset(TilesetCmd),
    /// The one-dimensional tile automaton.
    #[command(subcommand)]
    Ca(CaCmd),
    /// The stacked three-dimensional automaton.
    #[command(subcommand)]
    Stack(StackCmd),
    /// Noisy trajectories.
    #[command(subcommand)]
    Pca(PcaCmd),
    /// Interaction energies and the temperature map.
    #[command(subcommand)]
    Gibbs(GibbsCmd),
    /// Exact single-site conditional checks.
    #[command(subcommand)]
    Dlr(DlrCmd),
    /// Cluster and periodicity analysis of dumped windows.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Parameter sweeps.
    #[command(subcommand)]
    Sweep(SweepCmd),
}

#[derive(Debug, Subcommand)]
pub enum TilesetCmd {
    /// Determinism, torus refutation and patch existence gates.
    Check {
        tileset: String,
        #[arg(long, default_value_t = 4)]
        torus_bound: usize,
        #[arg(long, default_value = "8x8")]
        patch: String,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
    },
    /// Search a valid patch and print it.
    Patch {
        tileset: String,
        #[arg(long, default_value = "8x8")]
        size: String,
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum CaCmd {
    Run {
        #[arg(long, default_value = "ammann16")]
        tileset: String,
        /// `blank:<L>`, `row:<id,id,...>` (`.` for blank) or `patch:<file>`.
        #[arg(long)]
        init: String,
        /// Sites taken from a patch init.
        #[arg(long)]
        sites: Option<usize>,
        #[arg(long, default_value_t = 8)]
        steps: usize,
        #[arg(long, default_value = "blank")]
        boundary: String,
        /// Overwrite site `k` of the initial row with a blank.
        #[arg(long)]
        blank_at: Option<usize>,
        /// Print the trajectory text dump.
        #[arg(long)]
        dump: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum StackCmd {
    /// Noiseless run from a clone, optionally with flipped cells.
    Run {
        #[arg(long, default_value = "ammann16")]
        tileset: String,
        #[arg(long, default_value = "8x8x16")]
        size: String,
        #[arg(long, default_value_t = 12)]
        steps: usize,
        #[arg(long, default_value = "clone")]
        init: String,
        #[arg(long, default_value = "reference")]
        boundary_i: String,
        /// `a,b,i,symbol`; repeatable.
        #[arg(long)]
        flip: Vec<String>,
        #[arg(long, default_value_t = 1)]
        margin: usize,
        #[arg(long, default_value_t = 10_000_000)]
        patch_budget: u64,
        /// Write the final configuration as a binary dump.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
}

/// Flags shared with the `key=value` config file.
#[derive(Debug, Args, Default)]
pub struct RunFlags {
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub tileset: Option<String>,
    #[arg(long)]
    pub size: Option<String>,
    #[arg(long)]
    pub steps: Option<String>,
    #[arg(long)]
    pub epsilon: Option<String>,
    #[arg(long)]
    pub epsilon0: Option<String>,
    #[arg(long)]
    pub beta: Option<String>,
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub boundary_i: Option<String>,
    #[arg(long)]
    pub patch_budget: Option<String>,
}

impl RunFlags {
    fn pairs(&self) -> Vec<(&'static str, &Option<String>)> {
        vec![
            ("tileset", &self.tileset),
            ("size", &self.size),
            ("steps", &self.steps),
            ("epsilon", &self.epsilon),
            ("epsilon0", &self.epsilon0),
            ("beta", &self.beta),
            ("init", &self.init),
            ("boundary-i", &self.boundary_i),
            ("patch-budget", &self.patch_budget),
        ]
    }
}

#[derive(Debug, Subcommand)]
pub enum PcaCmd {
    Sample {
        #[command(flatten)]
        run: RunFlags,
        #[arg(long)]
        seed: Option<String>,
        /// Write the space-time dump here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
pub enum GibbsCmd {
    /// CSV `beta,alpha,epsilon` over a grid of inverse temperatures.
    BetaMap {
        #[arg(long)]
        epsilon0: f64,
        #[arg(long, value_delimiter = ',')]
        beta_grid: Vec<f64>,
        #[arg(long, default_value = "ammann16")]
        tileset: String,
    },
    /// Energy and error count of a dumped window.
    Energy {
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        epsilon: f64,
        #[arg(long, default_value_t = 0.0)]
        mu_blank: f64,
        #[arg(long, default_value = "ammann16")]
        tileset: String,
    },
}

#[derive(Debug, Subcommand)]
pub enum DlrCmd {
    /// Compare local-factor conditionals with the path measure on a torus.
    Check {
        #[arg(long, default_value = "ammann16")]
        tileset: String,
        #[arg(long, default_value_t = 0.3)]
        epsilon: f64,
        #[arg(long, default_value = "2x2x2")]
        size: String,
        #[arg(long, default_value_t = 2)]
        steps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Negative control: flip the sign of every energy.
        #[arg(long)]
        mis_signed: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCmd {
    /// Range-r disagreement clusters between two dumped windows.
    Clusters {
        #[arg(long)]
        window: PathBuf,
        #[arg(long)]
        reference: PathBuf,
        #[arg(short, long, default_value_t = 2)]
        r: usize,
        #[arg(long, default_value = "l1")]
        metric: String,
        #[arg(long, default_value_t = usize::MAX)]
        size_threshold: usize,
    },
    /// Period report CSV for a dumped window or a patch file.
    Periods {
        #[arg(long)]
        window: Option<PathBuf>,
        #[arg(long)]
        patch: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        bound: usize,
        /// Only vary the last two components.
        #[arg(long)]
        last_two: bool,
    },
}

#[derive(Debug, Subcommand)]
pub enum SweepCmd {
    /// Disagreement statistics against the noiseless reference.
    Stability {
        #[command(flatten)]
        run: RunFlags,
        #[arg(long)]
        epsilon_grid: Option<String>,
        #[arg(long)]
        beta_grid: Option<String>,
        /// Comma list, or `a..b` half-open range.
        #[arg(long)]
        seeds: Option<String>,
        #[arg(short, long)]
        r: Option<String>,
        #[arg(long)]
        metric: Option<String>,
        #[arg(long)]
        report_every: Option<String>,
        /// Output directory; `stability.csv` is written there.
        #[arg(long)]
        out: Option<String>,
        /// Worker threads (defaults to all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
}

/// Parses `AxBx...` extents.
pub fn parse_extents<const N: usize>(s: &str) -> CliResult<[usize; N]> {
    let parts = s
        .split('x')
        .map(|p| p.trim().parse::<usize>().with_context(|| format!("extent `{p}` in `{s}`")))
        .collect::<CliResult<Vec<_>>>()?;
    parts.try_into().map_err(|_| anyhow!("expected {N} extents in `{s}`"))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> CliResult<Vec<T>>
where
    T::Err: std::error::Error + Send + Sync + 'static,
{
    s.split(',').map(|p| p.trim().parse::<T>().with_context(|| format!("value `{p}`"))).collect()
}

fn parse_seeds(s: &str) -> CliResult<Vec<u64>> {
    match s.split_once("..") {
        Some((lo, hi)) => Ok((lo.trim().parse()?..hi.trim().parse()?).collect()),
        None => parse_list(s),
    }
}

fn parse_metric(s: &str) -> CliResult<Metric> {
    match s.to_ascii_lowercase().as_str() {
        "l1" => Ok(Metric::L1),
        "linf" => Ok(Metric::Linf),
        other => bail!("metric `{other}` (expected l1 or linf)"),
    }
}

/// Parses `key=value` lines; `#` starts a comment line.
pub fn parse_kv(text: &str) -> CliResult<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| anyhow!("config line {}: `{line}`", n + 1))?;
        out.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(out)
}

/// Resolved `key=value` settings of one experiment: config file first,
/// flags on top.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunConfig {
    values: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn load(file: Option<&Path>, flags: &[(&str, &Option<String>)]) -> CliResult<Self> {
        let mut values = match file {
            Some(p) => parse_kv(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
            None => BTreeMap::new(),
        };
        for (k, v) in flags {
            if let Some(v) = v {
                values.insert(k.to_string(), v.clone());
            }
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_or<'a>(&'a self, key: &str, default: &'a str) -> &'a str {
        self.get(key).unwrap_or(default)
    }

    pub fn set_default(&mut self, key: &str, value: &str) {
        self.values.entry(key.to_string()).or_insert_with(|| value.to_string());
    }

    pub fn insert(&mut self, key: &str, value: String) {
        self.values.insert(key.to_string(), value);
    }

    pub fn entries(&self) -> Vec<(String, String)> {
        self.values.iter().map(|(k, v)| (k.clone(), v.clone())).collect()
    }

    /// The noise grid: either `epsilon`/`epsilon-grid` directly, or derived
    /// from `epsilon0` and `beta`/`beta-grid` (then echoed as `epsilon`).
    fn resolve_epsilons(&mut self, alphabet_size: usize, grid_keys: (&str, &str)) -> CliResult<Vec<f64>> {
        let (eps_key, beta_key) = grid_keys;
        let direct = self.get(eps_key).map(str::to_string);
        let base = self.get("epsilon0").map(str::to_string);
        match (direct, base) {
            (Some(_), Some(_)) => bail!("give either {eps_key} or epsilon0 with {beta_key}, not both"),
            (None, None) => bail!("missing {eps_key} (or epsilon0 with {beta_key})"),
            (Some(e), None) => parse_list(&e),
            (None, Some(e0)) => {
                let e0: f64 = e0.parse().context("epsilon0")?;
                let betas: Vec<f64> = parse_list(self.get(beta_key).ok_or_else(|| anyhow!("missing {beta_key}"))?)?;
                let eps = betas
                    .iter()
                    .map(|&b| {
                        let ip = InteractionParams::new(e0, b, 0.0, alphabet_size)?;
                        Ok(gibbs::beta_to_epsilon(&ip)?.epsilon)
                    })
                    .collect::<CliResult<Vec<f64>>>()?;
                let echoed: Vec<String> = eps.iter().map(|&e| sig12(e)).collect();
                self.insert(eps_key, echoed.join(","));
                Ok(eps)
            }
        }
    }
}

fn load_rule(ts: &TileSet) -> CliResult<LocalRule> {
    Ok(LocalRule::from_tileset(ts)?)
}

fn parse_init(cfg: &RunConfig, ts: &TileSet, sites: usize, steps: usize) -> CliResult<InitSpec> {
    let init = cfg.get_or("init", "blank");
    let budget: u64 = cfg.get_or("patch-budget", "10000000").parse().context("patch-budget")?;
    match init.split_once(':') {
        None if init == "blank" => Ok(InitSpec::Blank),
        None if init == "clone" => Ok(InitSpec::Clone(search_reference_patch(ts, sites, steps, budget)?)),
        Some(("clone", path)) => {
            let patch = Patch::parse(&fs::read_to_string(path).with_context(|| format!("patch file {path}"))?)?;
            if let Some(d) = patch.defect(ts, false) {
                bail!("patch {path} is not a valid tiling: {d:?}");
            }
            Ok(InitSpec::Clone(patch))
        }
        _ => bail!("init `{init}` (expected blank, clone or clone:<patchfile>)"),
    }
}

fn write_or_print(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn read_window(path: &Path) -> CliResult<SpaceTimeConfig> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(SpaceTimeConfig::read_dump(BufReader::new(f))?)
}

/// Runs a parsed command, returning the process exit status.
pub fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Group::Tileset(cmd) => tileset_cmd(cmd),
        Group::Ca(CaCmd::Run { tileset, init, sites, steps, boundary, blank_at, dump }) => {
            ca_run(&tileset, &init, sites, steps, &boundary, blank_at, dump)
        }
        Group::Stack(StackCmd::Run { tileset, size, steps, init, boundary_i, flip, margin, patch_budget, checkpoint }) => {
            stack_run(&tileset, &size, steps, &init, &boundary_i, &flip, margin, patch_budget, checkpoint.as_deref())
        }
        Group::Pca(PcaCmd::Sample { run, seed, out }) => {
            let mut flags = run.pairs();
            flags.push(("seed", &seed));
            let cfg = RunConfig::load(run.config.as_deref(), &flags)?;
            let (text, _) = pca_sample(cfg, out.as_deref())?;
            print!("{text}");
            Ok(0)
        }
        Group::Gibbs(cmd) => gibbs_cmd(cmd),
        Group::Dlr(DlrCmd::Check { tileset, epsilon, size, steps, seed, mis_signed }) => {
            let ts = TileSet::load(&tileset)?;
            let residual = dlr_check(&ts, epsilon, parse_extents(&size)?, steps, seed, mis_signed)?;
            println!("max_residual={}", sig12(residual));
            Ok(if residual < 1e-10 { 0 } else { 1 })
        }
        Group::Analyze(cmd) => analyze_cmd(cmd),
        Group::Sweep(SweepCmd::Stability {
            run,
            epsilon_grid,
            beta_grid,
            seeds,
            r,
            metric,
            report_every,
            out,
            threads,
        }) => {
            let mut flags = run.pairs();
            flags.extend([
                ("epsilon-grid", &epsilon_grid),
                ("beta-grid", &beta_grid),
                ("seeds", &seeds),
                ("r", &r),
                ("metric", &metric),
                ("report-every", &report_every),
                ("out", &out),
            ]);
            let cfg = RunConfig::load(run.config.as_deref(), &flags)?;
            let go = || stability_sweep(cfg);
            let text = match threads {
                Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(go)?,
                None => go()?,
            };
            Ok(if text.is_empty() { 1 } else { 0 })
        }
    }
}

fn tileset_cmd(cmd: TilesetCmd) -> CliResult<i32> {
    match cmd {
        TilesetCmd::Check { tileset, torus_bound, patch, budget } => {
            let [w, h] = parse_extents(&patch)?;
            let report = tileset_check(&tileset, torus_bound, (w, h), budget);
            print!("{}", report.text);
            Ok(if report.failed.is_none() { 0 } else { 1 })
        }
        TilesetCmd::Patch { tileset, size, budget, out } => {
            let ts = TileSet::load(&tileset)?;
            let [w, h] = parse_extents(&size)?;
            match find_patch(&ts, w, h, budget)? {
                SearchOutcome::Found(p) => {
                    write_or_print(out.as_deref(), &p.to_text())?;
                    Ok(0)
                }
                SearchOutcome::ProvenAbsent => {
                    eprintln!("no {w}x{h} patch exists");
                    Ok(1)
                }
                SearchOutcome::BudgetExhausted { nodes } => {
                    eprintln!("budget exhausted after {nodes} nodes");
                    Ok(1)
                }
            }
        }
    }
}

/// Outcome of `tileset check`: a line per gate and the first failing gate.
#[derive(Debug, Clone)]
pub struct GateReport {
    pub text: String,
    pub failed: Option<String>,
}

pub fn tileset_check(tileset: &str, torus_bound: usize, patch: (usize, usize), budget: u64) -> GateReport {
    let mut text = String::new();
    let mut failed: Option<String> = None;
    let mut gate = |name: &str, ok: bool, detail: String| {
        let _ = writeln!(text, "{} {name}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok && failed.is_none() {
            failed = Some(name.to_string());
        }
    };
    let ts = match TileSet::load(tileset) {
        Ok(ts) => ts,
        Err(e) => {
            gate("load", false, e.to_string());
            return GateReport { text, failed };
        }
    };
    gate("load", true, format!("{} tiles", ts.len()));
    for dir in [Direction::NW, Direction::SE] {
        let rep = check_deterministic(&ts, dir);
        let detail = if rep.is_deterministic() {
            "deterministic".to_string()
        } else {
            format!("{} violating color pairs", rep.violations.len())
        };
        gate(&format!("{dir}-determinism"), rep.is_deterministic(), detail);
    }
    let mut witness = None;
    'outer: for p in 1..=torus_bound {
        for q in 1..=torus_bound {
            if let Ok(Some(w)) = find_torus_tiling(&ts, p, q) {
                witness = Some((p, q, w));
                break 'outer;
            }
        }
    }
    match witness {
        None => gate("torus", true, format!("no periodic tiling with periods up to {torus_bound}")),
        Some((p, q, _)) => gate("torus", false, format!("{p}x{q} torus tiling found")),
    }
    let (w, h) = patch;
    match find_patch(&ts, w, h, budget) {
        Ok(SearchOutcome::Found(p)) if p.is_valid(&ts) => gate("patch", true, format!("{w}x{h} patch found")),
        Ok(SearchOutcome::Found(_)) => gate("patch", false, "search returned an invalid patch".into()),
        Ok(SearchOutcome::ProvenAbsent) => gate("patch", false, format!("no {w}x{h} patch exists")),
        Ok(SearchOutcome::BudgetExhausted { nodes }) => gate("patch", false, format!("budget exhausted at {nodes} nodes")),
        Err(e) => gate("patch", false, e.to_string()),
    }
    GateReport { text, failed }
}

fn parse_boundary1d(s: &str, feed: Option<Vec<Symbol>>) -> CliResult<Boundary> {
    Ok(match s.parse::<BoundaryKind>()? {
        BoundaryKind::Periodic => Boundary::Periodic,
        BoundaryKind::Blank => Boundary::FeedBlank,
        BoundaryKind::Reference => {
            Boundary::stream(feed.ok_or_else(|| anyhow!("reference boundary needs a patch init"))?)
        }
    })
}

fn ca_run(
    tileset: &str,
    init: &str,
    sites: Option<usize>,
    steps: usize,
    boundary: &str,
    blank_at: Option<usize>,
    dump: bool,
) -> CliResult<i32> {
    let ts = TileSet::load(tileset)?;
    let rule = load_rule(&ts)?;
    let alphabet = *rule.alphabet();
    let mut x = match init.split_once(':') {
        Some(("blank", n)) => Config1D::blank(&alphabet, n.parse()?, parse_boundary1d(boundary, None)?)?,
        Some(("row", ids)) => {
            let cells = ids
                .split(',')
                .map(|f| if f.trim() == "." { Ok(alphabet.blank()) } else { f.trim().parse::<Symbol>() })
                .collect::<Result<Vec<_>, _>>()?;
            Config1D::new(&alphabet, cells, parse_boundary1d(boundary, None)?)?
        }
        Some(("patch", path)) => {
            let patch = Patch::parse(&fs::read_to_string(path)?)?;
            let sites = sites.unwrap_or(patch.height.saturating_sub(1).max(1));
            let reference = ca1d::reference_from_patch(&patch, sites, steps)?;
            let Boundary::FeedStream { symbols, .. } = &reference.boundary else { unreachable!() };
            let b = parse_boundary1d(boundary, Some(symbols.to_vec()))?;
            Config1D::new(&alphabet, reference.rows[0].clone(), b)?
        }
        _ => bail!("init `{init}` (expected blank:<L>, row:<ids> or patch:<file>)"),
    };
    if let Some(k) = blank_at {
        *x.cells.get_mut(k).ok_or_else(|| anyhow!("blank-at {k} outside the row"))? = alphabet.blank();
    }
    let traj = run1d(&rule, &x, steps)?;
    if dump {
        print!("{}", traj.to_text(&alphabet));
    } else {
        let blanks = traj.rows.iter().flatten().filter(|&&s| alphabet.is_blank(s)).count();
        println!("sites={} steps={} blanks={blanks}", traj.sites(), traj.steps());
    }
    Ok(0)
}

fn parse_flip(s: &str) -> CliResult<Flip> {
    let v: Vec<usize> = parse_list(s)?;
    let [a, b, i, symbol] = v[..] else { bail!("flip `{s}` (expected a,b,i,symbol)") };
    Ok(Flip { a, b, i, symbol: symbol as Symbol })
}

#[allow(clippy::too_many_arguments)]
fn stack_run(
    tileset: &str,
    size: &str,
    steps: usize,
    init: &str,
    boundary_i: &str,
    flips: &[String],
    margin: usize,
    patch_budget: u64,
    checkpoint: Option<&Path>,
) -> CliResult<i32> {
    let ts = TileSet::load(tileset)?;
    let rule = load_rule(&ts)?;
    let extents: [usize; 3] = parse_extents(size)?;
    let mut cfg = RunConfig::default();
    cfg.insert("init", init.to_string());
    cfg.insert("patch-budget", patch_budget.to_string());
    let init = parse_init(&cfg, &ts, extents[2], steps)?;
    let reference = build_reference(&rule, &init, extents, steps, boundary_i.parse()?)?;
    let flips = flips.iter().map(|f| parse_flip(f)).collect::<CliResult<Vec<_>>>()?;
    let x = reference.line.initial();
    let outcome = erosion_probe(&rule, &x, [extents[0], extents[1]], &flips, margin, steps)?;
    match outcome {
        ErosionOutcome::Recovered { t } => println!("recovered t={t}"),
        ErosionOutcome::NotRecovered { steps } => println!("not-recovered steps={steps}"),
    }
    if let Some(path) = checkpoint {
        let mut state = reference.init.clone();
        for f in &flips {
            state.set(f.a, f.b, f.i, f.symbol);
        }
        for _ in 0..steps {
            state = stacked_step(&rule, &state)?;
        }
        let mut file = fs::File::create(path)?;
        state.write_dump(&mut file)?;
        file.flush()?;
    }
    Ok(match outcome {
        ErosionOutcome::Recovered { .. } => 0,
        ErosionOutcome::NotRecovered { .. } => 1,
    })
}

/// Samples one trajectory. Returns the summary text (config header,
/// then `epsilon,seed,volume,n_errors`) and the window itself.
pub fn pca_sample(mut cfg: RunConfig, out: Option<&Path>) -> CliResult<(String, SpaceTimeConfig)> {
    cfg.set_default("tileset", "ammann16");
    cfg.set_default("size", "8x8x16");
    cfg.set_default("steps", "16");
    cfg.set_default("seed", "0");
    cfg.set_default("init", "blank");
    cfg.set_default("boundary-i", "blank");
    let ts = TileSet::load(cfg.get_or("tileset", "ammann16"))?;
    let rule = load_rule(&ts)?;
    let eps = cfg.resolve_epsilons(rule.alphabet().size(), ("epsilon", "beta"))?;
    let [epsilon] = eps[..] else { bail!("pca sample takes a single epsilon") };
    let extents: [usize; 3] = parse_extents(cfg.get_or("size", ""))?;
    let steps: usize = cfg.get_or("steps", "").parse().context("steps")?;
    let seed: u64 = cfg.get_or("seed", "").parse().context("seed")?;
    let init = parse_init(&cfg, &ts, extents[2], steps)?;
    let boundary: BoundaryKind = cfg.get_or("boundary-i", "").parse()?;
    let reference = build_reference(&rule, &init, extents, steps, boundary)?;
    let np = NoiseParams::for_rule(&rule, epsilon)?;
    let x = sample_trajectory(&rule, &reference.init, &np, &RngPolicy::new(seed), steps)?;
    if let Some(path) = out {
        let mut file = fs::File::create(path)?;
        x.write_dump(&mut file)?;
        file.flush()?;
    }
    let errors = error_set(&rule, &x);
    let mut text = String::new();
    for (k, v) in cfg.entries() {
        let _ = writeln!(text, "# {k}={v}");
    }
    let _ = writeln!(text, "epsilon,seed,volume,n_errors");
    let _ = writeln!(text, "{},{seed},{},{}", sig12(epsilon), errors.checked, errors.cells.len());
    Ok((text, x))
}

fn gibbs_cmd(cmd: GibbsCmd) -> CliResult<i32> {
    match cmd {
        GibbsCmd::BetaMap { epsilon0, beta_grid, tileset } => {
            let ts = TileSet::load(&tileset)?;
            print!("{}", beta_map_csv(epsilon0, &beta_grid, ts.len() + 1)?);
            Ok(0)
        }
        GibbsCmd::Energy { window, epsilon, mu_blank, tileset } => {
            let rule = load_rule(&TileSet::load(&tileset)?)?;
            let x = read_window(&window)?;
            let region = gibbs::full_region(&rule, &x);
            let we = gibbs::window_energy(&rule, &x, epsilon, mu_blank, &region)?;
            println!("energy={} n_errors={} n_cells={}", sig12(we.energy), we.n_errors, we.n_cells);
            Ok(0)
        }
    }
}

/// CSV `beta,alpha,epsilon` with a config header.
pub fn beta_map_csv(epsilon0: f64, betas: &[f64], alphabet_size: usize) -> CliResult<String> {
    let mut out = format!("# epsilon0={}\n# alphabet-size={alphabet_size}\nbeta,alpha,epsilon\n", sig12(epsilon0));
    for &beta in betas {
        InteractionParams::new(epsilon0, beta, 0.0, alphabet_size)?;
        let tm = temperature_map(epsilon0, beta, alphabet_size)?;
        let _ = writeln!(out, "{},{},{}", sig12(beta), sig12(tm.alpha), sig12(tm.epsilon));
    }
    Ok(out)
}

/// Largest window the brute-force check accepts, in cells.
pub const DLR_MAX_CELLS: usize = 512;

/// Samples a trajectory on a fully periodic window and returns the largest
/// gap between local-factor and path-measure conditionals.
pub fn dlr_check(ts: &TileSet, epsilon: f64, extents: [usize; 3], steps: usize, seed: u64, mis_signed: bool) -> CliResult<f64> {
    let cells = extents.iter().product::<usize>() * (steps + 1);
    if cells > DLR_MAX_CELLS {
        bail!("window of {cells} cells is too large for enumeration (limit {DLR_MAX_CELLS})");
    }
    let rule = load_rule(ts)?;
    let m = rule.alphabet().size() as u64;
    let policy = RngPolicy::new(seed);
    let [na, nb, nl] = extents;
    let mut init_cells = Vec::with_capacity(na * nb * nl);
    for a in 0..na {
        for b in 0..nb {
            for i in 0..nl {
                init_cells.push((policy.cell_u64(a, b, i, 0) % m) as Symbol);
            }
        }
    }
    let init = crate::stack3d::Config3D::new(extents, init_cells, Boundary::Periodic)?;
    let np = NoiseParams::for_rule(&rule, epsilon)?;
    let x = sample_trajectory(&rule, &init, &np, &policy, steps)?;
    let mut ham = Hamiltonian::new(np, 0.0)?;
    if mis_signed {
        ham = ham.mis_signed();
    }
    Ok(gibbs::dlr_max_residual(&rule, &ham, &x)?)
}

fn analyze_cmd(cmd: AnalyzeCmd) -> CliResult<i32> {
    match cmd {
        AnalyzeCmd::Clusters { window, reference, r, metric, size_threshold } => {
            let x = read_window(&window)?;
            let z = read_window(&reference)?;
            let v = sea_island_check(&x, &z, r, parse_metric(&metric)?, size_threshold)?;
            println!(
                "r={r} metric={metric} size_threshold={size_threshold} n_clusters={} max_cluster={} spanning={} verdict={}",
                v.report.clusters.len(),
                v.report.max_size,
                v.report.spanning,
                if v.pass { "pass" } else { "fail" }
            );
            Ok(if v.pass { 0 } else { 1 })
        }
        AnalyzeCmd::Periods { window, patch, bound, last_two } => {
            let bounds = if last_two { [0, 0, bound, bound] } else { [bound; 4] };
            let report = match (window, patch) {
                (Some(w), None) => periodicity_scan(&read_window(&w)?, bounds),
                (None, Some(p)) => periodicity_scan(&Patch::parse(&fs::read_to_string(p)?)?, bounds),
                _ => bail!("give exactly one of --window or --patch"),
            };
            print!("{}", report.to_csv());
            Ok(0)
        }
    }
}

/// Runs `sweep stability`; writes `<out>/stability.csv` when `out` is set
/// and returns the CSV text.
pub fn stability_sweep(mut cfg: RunConfig) -> CliResult<String> {
    cfg.set_default("tileset", "ammann16");
    cfg.set_default("size", "16x16x16");
    cfg.set_default("steps", "64");
    cfg.set_default("seeds", "0..20");
    cfg.set_default("init", "clone");
    cfg.set_default("boundary-i", "reference");
    cfg.set_default("r", "2");
    cfg.set_default("metric", "l1");
    let ts = TileSet::load(cfg.get_or("tileset", ""))?;
    let rule = load_rule(&ts)?;
    let epsilons = cfg.resolve_epsilons(rule.alphabet().size(), ("epsilon-grid", "beta-grid"))?;
    let extents: [usize; 3] = parse_extents(cfg.get_or("size", ""))?;
    let steps: usize = cfg.get_or("steps", "").parse().context("steps")?;
    let init = parse_init(&cfg, &ts, extents[2], steps)?;
    let reference = build_reference(&rule, &init, extents, steps, cfg.get_or("boundary-i", "").parse()?)?;
    let st = StabilityConfig {
        extents,
        steps,
        epsilons,
        seeds: parse_seeds(cfg.get_or("seeds", ""))?,
        r: cfg.get_or("r", "").parse().context("r")?,
        metric: parse_metric(cfg.get_or("metric", ""))?,
        report_every: cfg.get("report-every").map(str::parse).transpose().context("report-every")?,
    };
    let rows = sweep::run_stability(&rule, &reference, &st)?;
    let text = sweep::stability_csv(&cfg.entries(), &rows);
    if let Some(dir) = cfg.get("out") {
        fs::create_dir_all(dir)?;
        fs::write(Path::new(dir).join("stability.csv"), &text)?;
    } else {
        print!("{text}");
    }
    Ok(text)
}
