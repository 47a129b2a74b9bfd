//! Command-line front end: every operation behind a subcommand with
//! machine-readable JSON (default) or CSV output.
//!
//! Exit codes: 0 on success, 1 on domain errors (uncontrollable with
//! `--require-controllable`, infeasible steering, consistency failures),
//! 2 on usage errors. All floating-point output carries 17 significant
//! digits so runs are file-diffable. `--seed` pins every randomized input.
//! Relative output paths resolve against `GRIDCTL_OUT_DIR` when set.

use std::ffi::OsString;
use std::io;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::DVector;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::controllability::{
    build_second_order, in_degenerate_set, kalman_rank, min_control_set, pbh_test,
    second_order_controllable, ControlSet, ControllabilityReport, ModelParams, DEGENERACY_TOL,
};
use crate::diophantine::{classify_quadruple, Quadruple, RationalAngle, SolutionClass};
use crate::graphs::{build_laplacian, node_index, GraphSpec};
use crate::multiplicity::{
    closed_form_report, exact_multiplicity_report, MultiplicityReport,
};
use crate::sim::{
    export_pattern, gramian_steer, integrate, integrate_steered, Channel, PatternFormat,
};
use crate::spectra::eigenspaces;
use crate::{Error, Result};

/// Result of a dispatch: what to print and how to exit.
#[derive(Debug, Clone)]
pub struct CliOutcome {
    pub exit_code: i32,
    pub stdout: String,
}

#[derive(Debug, Parser)]
#[command(
    name = "gridctl",
    version,
    about = "Exact spectra, minimal control sets and controllability of Laplacian dynamics on grid graphs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed for randomized scenario inputs (reproducible byte-for-byte)
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Output format where tabular output is available
    #[arg(long, global = true, value_enum, default_value_t = OutputFormat::Json)]
    format: OutputFormat,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Topology {
    Path,
    Cycle,
    Grid,
    Cylinder,
}

#[derive(Debug, Args)]
struct SpecArgs {
    /// Graph family
    #[arg(long, value_enum)]
    topology: Topology,

    /// First factor size (rows of a grid, cycle length of a cylinder)
    #[arg(long)]
    m: usize,

    /// Second factor size (columns); required for grid and cylinder
    #[arg(long)]
    n: Option<usize>,
}

impl SpecArgs {
    fn to_spec(&self) -> Result<GraphSpec> {
        let need_n = || {
            self.n.ok_or_else(|| {
                Error::Usage(format!(
                    "--n is required for topology {:?}",
                    self.topology
                ))
            })
        };
        match self.topology {
            Topology::Path => GraphSpec::path(self.m),
            Topology::Cycle => GraphSpec::cycle(self.m),
            Topology::Grid => GraphSpec::grid(self.m, need_n()?),
            Topology::Cylinder => GraphSpec::cylinder(self.m, need_n()?),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form spectrum with exact multiplicity classes
    Spectrum {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// Largest eigenvalue multiplicity and minimal control-node count
    Multiplicity {
        #[command(flatten)]
        spec: SpecArgs,
        /// Emit a CSV table over all (m, n) up to the given bounds instead
        #[arg(long, num_args = 2, value_names = ["M", "N"])]
        sweep: Option<Vec<usize>>,
    },
    /// Construct and verify the minimal control set
    MinControls {
        #[command(flatten)]
        spec: SpecArgs,
    },
    /// PBH-test a control node set
    Verify {
        #[command(flatten)]
        spec: SpecArgs,
        /// Control nodes: linear indices or (row,col) pairs, comma separated
        #[arg(long)]
        nodes: String,
        /// Exit with code 1 if the set is not controllable
        #[arg(long)]
        require_controllable: bool,
    },
    /// Controllability of the lifted two-species system
    SecondOrder {
        #[command(flatten)]
        spec: SpecArgs,
        /// Model parameters a,b,c,d,nu1,nu2
        #[arg(long)]
        params: String,
        /// Control nodes of the first species
        #[arg(long)]
        b_nodes: Option<String>,
        /// Control nodes of the second species
        #[arg(long)]
        c_nodes: Option<String>,
        /// Exit with code 1 if the pair is not controllable
        #[arg(long)]
        require_controllable: bool,
    },
    /// Exact classification of four-cosine sums
    Diophantine {
        #[command(subcommand)]
        command: DiophantineCommand,
    },
    /// Integrate a scenario with zero input
    Simulate {
        /// Scenario JSON file
        #[arg(long)]
        scenario: PathBuf,
        /// Export the final pattern to this path
        #[arg(long)]
        pattern_out: Option<PathBuf>,
        /// Pattern format (csv or pgm)
        #[arg(long, value_enum, default_value_t = PatternArg::Pgm)]
        pattern_format: PatternArg,
    },
    /// Plan and verify a minimum-energy steering control
    Steer {
        /// Scenario JSON file (must carry a target)
        #[arg(long)]
        scenario: PathBuf,
        /// Export the steered final pattern to this path
        #[arg(long)]
        pattern_out: Option<PathBuf>,
        /// Pattern format (csv or pgm)
        #[arg(long, value_enum, default_value_t = PatternArg::Pgm)]
        pattern_format: PatternArg,
        /// Write the sampled control inputs to this CSV file
        #[arg(long)]
        samples_csv: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum DiophantineCommand {
    /// Classify the quadruple {f1, f2, f3, f4} of fractions of pi
    Classify {
        f1: String,
        f2: String,
        f3: String,
        f4: String,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PatternArg {
    Csv,
    Pgm,
}

impl From<PatternArg> for PatternFormat {
    fn from(value: PatternArg) -> Self {
        match value {
            PatternArg::Csv => PatternFormat::Csv,
            PatternArg::Pgm => PatternFormat::Pgm,
        }
    }
}

/// JSON with every f64 printed to 17 significant digits.
struct SigDigits;

impl serde_json::ser::Formatter for SigDigits {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + io::Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }
}

/// Serialize with the 17-significant-digit float convention.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SigDigits);
    value.serialize(&mut ser)?;
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// Parse a node list of linear indices and/or `(row,col)` pairs.
fn parse_nodes(spec: &GraphSpec, input: &str) -> Result<Vec<usize>> {
    let mut nodes = Vec::new();
    let mut rest = input.trim();
    while !rest.is_empty() {
        rest = rest.trim_start_matches(',').trim_start();
        if rest.is_empty() {
            break;
        }
        if let Some(stripped) = rest.strip_prefix('(') {
            let end = stripped
                .find(')')
                .ok_or_else(|| Error::Usage(format!("unclosed coordinate in {input:?}")))?;
            let inside = &stripped[..end];
            let (r, c) = inside
                .split_once(',')
                .ok_or_else(|| Error::Usage(format!("coordinate needs two components: ({inside})")))?;
            let outer: usize = r.trim().parse().map_err(|_| {
                Error::Usage(format!("invalid coordinate component {r:?}"))
            })?;
            let inner: usize = c.trim().parse().map_err(|_| {
                Error::Usage(format!("invalid coordinate component {c:?}"))
            })?;
            nodes.push(node_index(spec, outer, inner)?.linear);
            rest = &stripped[end + 1..];
        } else {
            let end = rest.find(',').unwrap_or(rest.len());
            let token = rest[..end].trim();
            let linear: usize = token
                .parse()
                .map_err(|_| Error::Usage(format!("invalid node index {token:?}")))?;
            nodes.push(linear);
            rest = &rest[end..];
        }
    }
    if nodes.is_empty() {
        return Err(Error::Usage(format!("no nodes in {input:?}")));
    }
    Ok(nodes)
}

fn parse_params(input: &str) -> Result<ModelParams> {
    let parts: Vec<&str> = input.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(Error::Usage(format!(
            "--params needs a,b,c,d,nu1,nu2 (6 values), got {}",
            parts.len()
        )));
    }
    let mut values = [0.0f64; 6];
    for (slot, part) in values.iter_mut().zip(&parts) {
        *slot = part
            .parse()
            .map_err(|_| Error::Usage(format!("invalid parameter {part:?}")))?;
    }
    ModelParams::new(values[0], values[1], values[2], values[3], values[4], values[5])
}

fn resolve_out_path(path: &Path) -> PathBuf {
    if path.is_relative() {
        if let Some(dir) = std::env::var_os("GRIDCTL_OUT_DIR") {
            return PathBuf::from(dir).join(path);
        }
    }
    path.to_path_buf()
}

/// How an initial or target state is specified in a scenario file.
#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateSpec {
    #[default]
    Zero,
    Constant {
        value: f64,
    },
    Vector {
        values: Vec<f64>,
    },
    Random {
        amplitude: f64,
    },
}

impl StateSpec {
    fn realize(&self, dim: usize, rng: &mut StdRng) -> Result<DVector<f64>> {
        match self {
            StateSpec::Zero => Ok(DVector::zeros(dim)),
            StateSpec::Constant { value } => Ok(DVector::from_element(dim, *value)),
            StateSpec::Vector { values } => {
                if values.len() != dim {
                    return Err(Error::Usage(format!(
                        "state vector has {} entries, system needs {dim}",
                        values.len()
                    )));
                }
                Ok(DVector::from_column_slice(values))
            }
            StateSpec::Random { amplitude } => {
                let amp = amplitude.abs();
                Ok(DVector::from_fn(dim, |_, _| rng.random_range(-amp..=amp)))
            }
        }
    }
}

/// Scenario file for `simulate` and `steer`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    #[serde(flatten)]
    pub spec: GraphSpec,
    pub params: ModelParams,
    #[serde(default)]
    pub b_nodes: Vec<usize>,
    #[serde(default)]
    pub c_nodes: Vec<usize>,
    #[serde(default)]
    pub z0: StateSpec,
    #[serde(default)]
    pub target: Option<StateSpec>,
    /// Horizon length.
    pub t: f64,
    /// Integrator step (defaults to t/5000).
    #[serde(default)]
    pub dt: Option<f64>,
    /// Gramian quadrature subintervals (defaults to 2000).
    #[serde(default)]
    pub steps: Option<usize>,
    /// Channel exported by pattern output (1 or 2).
    #[serde(default = "default_channel")]
    pub channel: u8,
}

fn default_channel() -> u8 {
    1
}

impl ScenarioConfig {
    fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Usage(format!("cannot read scenario {}: {e}", path.display())))?;
        let config: ScenarioConfig = serde_json::from_str(&text)
            .map_err(|e| Error::Usage(format!("invalid scenario {}: {e}", path.display())))?;
        config.spec.validate()?;
        config.params.validate()?;
        Ok(config)
    }

    fn control_sets(&self) -> Result<(Option<ControlSet>, Option<ControlSet>)> {
        let n = self.spec.node_count();
        let b = if self.b_nodes.is_empty() {
            None
        } else {
            Some(ControlSet::new(n, self.b_nodes.clone())?)
        };
        let c = if self.c_nodes.is_empty() {
            None
        } else {
            Some(ControlSet::new(n, self.c_nodes.clone())?)
        };
        Ok((b, c))
    }
}

/// Parse `argv` and run; never panics on bad input.
pub fn dispatch<I, T>(argv: I) -> CliOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(err) => {
            use clap::error::ErrorKind;
            let exit_code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            return CliOutcome {
                exit_code,
                stdout: err.render().to_string(),
            };
        }
    };
    match run(cli) {
        Ok((stdout, exit_code)) => CliOutcome { exit_code, stdout },
        Err(err) => {
            let exit_code = match err {
                Error::Usage(_) => 2,
                _ => 1,
            };
            let payload = serde_json::json!({ "error": err.to_string() });
            CliOutcome {
                exit_code,
                stdout: format!("{payload}\n"),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(String, i32)> {
    match cli.command {
        Command::Spectrum { spec } => spectrum_cmd(&spec.to_spec()?, cli.format),
        Command::Multiplicity { spec, sweep } => match sweep {
            Some(bounds) => sweep_cmd(spec.topology, bounds[0], bounds[1]),
            None => multiplicity_cmd(&spec.to_spec()?),
        },
        Command::MinControls { spec } => min_controls_cmd(&spec.to_spec()?),
        Command::Verify {
            spec,
            nodes,
            require_controllable,
        } => verify_cmd(&spec.to_spec()?, &nodes, require_controllable),
        Command::SecondOrder {
            spec,
            params,
            b_nodes,
            c_nodes,
            require_controllable,
        } => second_order_cmd(
            &spec.to_spec()?,
            &params,
            b_nodes.as_deref(),
            c_nodes.as_deref(),
            require_controllable,
        ),
        Command::Diophantine { command } => match command {
            DiophantineCommand::Classify { f1, f2, f3, f4 } => classify_cmd(&[f1, f2, f3, f4]),
        },
        Command::Simulate {
            scenario,
            pattern_out,
            pattern_format,
        } => simulate_cmd(&scenario, pattern_out.as_deref(), pattern_format.into(), cli.seed),
        Command::Steer {
            scenario,
            pattern_out,
            pattern_format,
            samples_csv,
        } => steer_cmd(
            &scenario,
            pattern_out.as_deref(),
            pattern_format.into(),
            samples_csv.as_deref(),
            cli.seed,
        ),
    }
}

#[derive(Serialize)]
struct SpectrumClass {
    id: usize,
    eigenvalue: crate::spectra::ExactEigenvalue,
    multiplicity: usize,
    members: Vec<(usize, usize)>,
}

fn spectrum_cmd(spec: &GraphSpec, format: OutputFormat) -> Result<(String, i32)> {
    let spaces = eigenspaces(spec)?;
    match format {
        OutputFormat::Json => {
            let classes: Vec<SpectrumClass> = spaces
                .iter()
                .enumerate()
                .map(|(id, s)| SpectrumClass {
                    id,
                    eigenvalue: s.eigenvalue,
                    multiplicity: s.multiplicity(),
                    members: s.members.clone(),
                })
                .collect();
            let payload = serde_json::json!({ "spec": spec });
            let mut text = to_json(&payload)?;
            // splice the classes in with the sig-digit formatter
            let classes_json = to_json(&classes)?;
            text.truncate(text.len() - 1);
            text.push_str(",\"classes\":");
            text.push_str(&classes_json);
            text.push('}');
            Ok((text + "\n", 0))
        }
        OutputFormat::Csv => {
            let mut out = String::from("alpha,beta,p1/q1,p2/q2,numeric_value,multiplicity_class_id\n");
            for (id, space) in spaces.iter().enumerate() {
                for &(alpha, beta) in &space.members {
                    out.push_str(&format!(
                        "{alpha},{beta},{},{},{},{id}\n",
                        space.eigenvalue.t1,
                        space.eigenvalue.t2,
                        fmt_f64(space.eigenvalue.value()),
                    ));
                }
            }
            Ok((out, 0))
        }
    }
}

fn multiplicity_cmd(spec: &GraphSpec) -> Result<(String, i32)> {
    let report: MultiplicityReport = exact_multiplicity_report(spec)?;
    Ok((to_json(&report)? + "\n", 0))
}

fn sweep_cmd(topology: Topology, m_max: usize, n_max: usize) -> Result<(String, i32)> {
    let mut out = String::from("topology,m,n,psi,phi\n");
    let (name, m_lo, n_lo) = match topology {
        Topology::Grid => ("grid", 1, 1),
        Topology::Cylinder => ("cylinder", 3, 2),
        _ => {
            return Err(Error::Usage(
                "--sweep applies to grid and cylinder topologies".into(),
            ))
        }
    };
    for m in m_lo..=m_max {
        for n in n_lo..=n_max {
            let spec = match topology {
                Topology::Grid => GraphSpec::grid(m, n)?,
                _ => GraphSpec::cylinder(m, n)?,
            };
            let report = closed_form_report(&spec)?;
            out.push_str(&format!("{name},{m},{n},{},{}\n", report.psi, report.phi));
        }
    }
    Ok((out, 0))
}

#[derive(Serialize)]
struct MinControlsOutput {
    spec: GraphSpec,
    nodes: Vec<usize>,
    count: usize,
    pbh: ControllabilityReport,
    kalman_rank: usize,
    node_count: usize,
}

fn min_controls_cmd(spec: &GraphSpec) -> Result<(String, i32)> {
    let set = min_control_set(spec)?;
    let pbh = pbh_test(spec, &set)?;
    let l = build_laplacian(spec)?.to_f64();
    let rank = kalman_rank(&l, &set.matrix())?;
    let payload = MinControlsOutput {
        spec: *spec,
        nodes: set.nodes().to_vec(),
        count: set.len(),
        pbh,
        kalman_rank: rank,
        node_count: spec.node_count(),
    };
    Ok((to_json(&payload)? + "\n", 0))
}

#[derive(Serialize)]
struct VerifyOutput {
    spec: GraphSpec,
    nodes: Vec<usize>,
    #[serde(flatten)]
    report: ControllabilityReport,
}

fn verify_cmd(spec: &GraphSpec, nodes: &str, require: bool) -> Result<(String, i32)> {
    let nodes = parse_nodes(spec, nodes)?;
    let set = ControlSet::new(spec.node_count(), nodes)?;
    let report = pbh_test(spec, &set)?;
    let exit = if require && !report.controllable { 1 } else { 0 };
    let payload = VerifyOutput {
        spec: *spec,
        nodes: set.nodes().to_vec(),
        report,
    };
    Ok((to_json(&payload)? + "\n", exit))
}

#[derive(Serialize)]
struct SecondOrderOutput {
    spec: GraphSpec,
    params: ModelParams,
    b_nodes: Vec<usize>,
    c_nodes: Vec<usize>,
    in_degenerate_set: bool,
    #[serde(flatten)]
    report: ControllabilityReport,
}

fn second_order_cmd(
    spec: &GraphSpec,
    params: &str,
    b_nodes: Option<&str>,
    c_nodes: Option<&str>,
    require: bool,
) -> Result<(String, i32)> {
    let params = parse_params(params)?;
    let n = spec.node_count();
    let parse_set = |input: Option<&str>| -> Result<Option<ControlSet>> {
        match input {
            None => Ok(None),
            Some(text) => Ok(Some(ControlSet::new(n, parse_nodes(spec, text)?)?)),
        }
    };
    let b = parse_set(b_nodes)?;
    let c = parse_set(c_nodes)?;
    let report = second_order_controllable(&params, spec, b.as_ref(), c.as_ref())?;
    let exit = if require && !report.controllable { 1 } else { 0 };
    let payload = SecondOrderOutput {
        spec: *spec,
        params,
        b_nodes: b.map(|s| s.nodes().to_vec()).unwrap_or_default(),
        c_nodes: c.map(|s| s.nodes().to_vec()).unwrap_or_default(),
        in_degenerate_set: in_degenerate_set(&params, spec, DEGENERACY_TOL)?.in_s(),
        report,
    };
    Ok((to_json(&payload)? + "\n", exit))
}

#[derive(Serialize)]
struct ClassifyOutput {
    input: Vec<String>,
    #[serde(flatten)]
    class: SolutionClass,
    cos_sum: f64,
}

fn classify_cmd(fractions: &[String; 4]) -> Result<(String, i32)> {
    let mut angles = [RationalAngle::ZERO; 4];
    for (slot, text) in angles.iter_mut().zip(fractions) {
        *slot = text.parse()?;
    }
    let quad = Quadruple::new(angles);
    let class = classify_quadruple(&quad);
    let payload = ClassifyOutput {
        input: fractions.to_vec(),
        class,
        cos_sum: quad.cos_sum(),
    };
    Ok((to_json(&payload)? + "\n", 0))
}

#[derive(Serialize)]
struct SimulateOutput {
    spec: GraphSpec,
    t: f64,
    dt: f64,
    steps_taken: usize,
    final_norm: f64,
    final_state: Vec<f64>,
    pattern_file: Option<String>,
}

fn simulate_cmd(
    scenario_path: &Path,
    pattern_out: Option<&Path>,
    pattern_format: PatternFormat,
    seed: u64,
) -> Result<(String, i32)> {
    let config = ScenarioConfig::load(scenario_path)?;
    let (b, c) = config.control_sets()?;
    let system = build_second_order(&config.params, &config.spec, b.as_ref(), c.as_ref())?;
    let mut rng = StdRng::seed_from_u64(seed);
    let z0 = config.z0.realize(system.state_dim(), &mut rng)?;
    let dt = config.dt.unwrap_or(config.t / 5000.0);
    let input_dim = system.input_dim();
    let trajectory = integrate(&system, |_| DVector::zeros(input_dim), &z0, config.t, dt)?;
    let final_state = trajectory.final_state().clone();
    let pattern_file = match pattern_out {
        Some(path) => {
            let path = resolve_out_path(path);
            export_pattern(
                &final_state,
                &config.spec,
                Channel::try_from(config.channel)?,
                &path,
                pattern_format,
            )?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let payload = SimulateOutput {
        spec: config.spec,
        t: config.t,
        dt,
        steps_taken: trajectory.times.len() - 1,
        final_norm: final_state.norm(),
        final_state: final_state.iter().copied().collect(),
        pattern_file,
    };
    Ok((to_json(&payload)? + "\n", 0))
}

#[derive(Serialize)]
struct SteerOutput {
    spec: GraphSpec,
    t: f64,
    steps: usize,
    method: crate::controllability::Method,
    gramian_condition: f64,
    terminal_error: f64,
    terminal_error_relative: f64,
    samples: usize,
    pattern_file: Option<String>,
    samples_file: Option<String>,
}

fn steer_cmd(
    scenario_path: &Path,
    pattern_out: Option<&Path>,
    pattern_format: PatternFormat,
    samples_csv: Option<&Path>,
    seed: u64,
) -> Result<(String, i32)> {
    let config = ScenarioConfig::load(scenario_path)?;
    let (b, c) = config.control_sets()?;
    let report = second_order_controllable(&config.params, &config.spec, b.as_ref(), c.as_ref())?;
    if !report.controllable {
        return Err(Error::Infeasible(format!(
            "the lifted pair is uncontrollable (method {:?}); steering has no solution",
            report.method
        )));
    }
    let system = build_second_order(&config.params, &config.spec, b.as_ref(), c.as_ref())?;
    let mut rng = StdRng::seed_from_u64(seed);
    let z0 = config.z0.realize(system.state_dim(), &mut rng)?;
    let target_spec = config
        .target
        .as_ref()
        .ok_or_else(|| Error::Usage("steer scenario needs a target state".into()))?;
    let target = target_spec.realize(system.state_dim(), &mut rng)?;
    let steps = config.steps.unwrap_or(2000);
    let plan = gramian_steer(&system, &z0, &target, config.t, steps)?;
    let dt = config.dt.unwrap_or(config.t / 5000.0);
    let trajectory = integrate_steered(&system, &plan, &z0, dt)?;
    let final_state = trajectory.final_state().clone();
    let err = (&final_state - &target).norm();

    let samples_file = match samples_csv {
        Some(path) => {
            let path = resolve_out_path(path);
            let mut out = String::from("time");
            for i in 0..system.input_dim() {
                out.push_str(&format!(",u{i}"));
            }
            out.push('\n');
            for (t, u) in &plan.control_samples {
                out.push_str(&fmt_f64(*t));
                for v in u.iter() {
                    out.push(',');
                    out.push_str(&fmt_f64(*v));
                }
                out.push('\n');
            }
            std::fs::write(&path, out)?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let pattern_file = match pattern_out {
        Some(path) => {
            let path = resolve_out_path(path);
            export_pattern(
                &final_state,
                &config.spec,
                Channel::try_from(config.channel)?,
                &path,
                pattern_format,
            )?;
            Some(path.display().to_string())
        }
        None => None,
    };
    let payload = SteerOutput {
        spec: config.spec,
        t: config.t,
        steps,
        method: report.method,
        gramian_condition: plan.gramian_condition,
        terminal_error: err,
        terminal_error_relative: if target.norm() > 0.0 {
            err / target.norm()
        } else {
            err
        },
        samples: plan.control_samples.len(),
        pattern_file,
        samples_file,
    };
    Ok((to_json(&payload)? + "\n", 0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_cli(args: &[&str]) -> CliOutcome {
        let mut argv = vec!["gridctl"];
        argv.extend_from_slice(args);
        dispatch(argv)
    }

    #[test]
    fn multiplicity_example() {
        let out = run_cli(&["multiplicity", "--topology", "grid", "--m", "8", "--n", "12"]);
        assert_eq!(out.exit_code, 0);
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(value["psi"], 3);
        assert_eq!(value["phi"], 3);
        assert_eq!(value["method"], "enumerated");
    }

    #[test]
    fn verify_exit_codes() {
        let out = run_cli(&[
            "verify",
            "--topology",
            "grid",
            "--m",
            "4",
            "--n",
            "4",
            "--nodes",
            "0,1",
        ]);
        assert_eq!(out.exit_code, 0);
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(value["controllable"], false);

        let out = run_cli(&[
            "verify",
            "--topology",
            "grid",
            "--m",
            "4",
            "--n",
            "4",
            "--nodes",
            "0,1",
            "--require-controllable",
        ]);
        assert_eq!(out.exit_code, 1);

        let out = run_cli(&[
            "verify",
            "--topology",
            "grid",
            "--m",
            "4",
            "--n",
            "4",
            "--nodes",
            "(0,0),(0,1),2",
            "--require-controllable",
        ]);
        assert_eq!(out.exit_code, 0, "{}", out.stdout);
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(value["nodes"], serde_json::json!([0, 1, 2]));
        assert_eq!(value["controllable"], true);
    }

    #[test]
    fn diophantine_classify_example() {
        let out = run_cli(&["diophantine", "classify", "1/3", "1", "1/2", "1/3"]);
        assert_eq!(out.exit_code, 0);
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(value["kind"], "sporadic");
        assert_eq!(value["id"], 1);
    }

    #[test]
    fn unknown_flag_is_usage_error() {
        let out = run_cli(&["multiplicity", "--nope"]);
        assert_eq!(out.exit_code, 2);

        let out = run_cli(&["verify", "--topology", "grid", "--m", "4", "--n", "4", "--nodes", "x"]);
        assert_eq!(out.exit_code, 2);
    }

    #[test]
    fn help_exits_zero() {
        let out = run_cli(&["--help"]);
        assert_eq!(out.exit_code, 0);
        assert!(out.stdout.contains("gridctl"));
    }

    #[test]
    fn min_controls_cylinder_example() {
        let out = run_cli(&["min-controls", "--topology", "cylinder", "--m", "6", "--n", "3"]);
        assert_eq!(out.exit_code, 0);
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(value["count"], 5);
        assert_eq!(value["nodes"], serde_json::json!([0, 3, 6, 9, 12]));
        assert_eq!(value["pbh"]["controllable"], true);
        assert_eq!(value["kalman_rank"], 18);
    }

    #[test]
    fn second_order_example1() {
        let out = run_cli(&[
            "second-order",
            "--topology",
            "path",
            "--m",
            "3",
            "--params",
            "1,2,3,4,1,1",
            "--b-nodes",
            "0",
        ]);
        assert_eq!(out.exit_code, 0);
        let value: serde_json::Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(value["controllable"], true);
        assert_eq!(value["method"], "prop2_reduction");
    }

    #[test]
    fn spectrum_csv_shape() {
        let out = run_cli(&[
            "spectrum", "--topology", "grid", "--m", "2", "--n", "2", "--format", "csv",
        ]);
        assert_eq!(out.exit_code, 0);
        let lines: Vec<&str> = out.stdout.lines().collect();
        assert_eq!(lines[0], "alpha,beta,p1/q1,p2/q2,numeric_value,multiplicity_class_id");
        assert_eq!(lines.len(), 5); // header + 4 members
    }

    #[test]
    fn seeded_outputs_reproducible() {
        let dir = tempfile::tempdir().unwrap();
        let scenario = dir.path().join("scenario.json");
        std::fs::write(
            &scenario,
            r#"{
                "topology": "grid", "m": 2, "n": 2,
                "params": {"a": 0.2, "b": 1.0, "c": -1.0, "d": 0.2, "nu1": 0.1, "nu2": 0.1},
                "b_nodes": [0, 1], "c_nodes": [0, 1],
                "z0": {"kind": "random", "amplitude": 1.0},
                "t": 1.0, "dt": 0.01
            }"#,
        )
        .unwrap();
        let args = ["simulate", "--scenario", scenario.to_str().unwrap(), "--seed", "9"];
        let first = run_cli(&args);
        let second = run_cli(&args);
        assert_eq!(first.exit_code, 0, "{}", first.stdout);
        assert_eq!(first.stdout, second.stdout);
        let third = run_cli(&["simulate", "--scenario", scenario.to_str().unwrap(), "--seed", "10"]);
        assert_ne!(first.stdout, third.stdout);
    }

    #[test]
    fn json_floats_carry_17_digits() {
        let text = to_json(&serde_json::json!({ "x": 0.1 })).unwrap();
        assert_eq!(text, r#"{"x":1.0000000000000001e-1}"#);
        let parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
        assert_eq!(parsed["x"].as_f64().unwrap(), 0.1);
    }
}
