//! Command-line front end: path layout and rule synthesis, verification,
//! simulation and the randomized experiments.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use rtsdn::experiments::{
    acceptance_sweep, deadline_schedule, delay_cdf_run, queue_strategy_compare, random_flows,
    DeadlineBase, DeadlineBasis, DelayCdfConfig, QueueCompareConfig, SweepConfig,
};
use rtsdn::intents::synthesize;
use rtsdn::io::{read_json, to_csv_string, to_json_string, write_text};
use rtsdn::layout::{layout_paths_traced, verify_layout, LayoutReport, LayoutReportFile, Outcome};
use rtsdn::model::{
    random_topology, FlowSet, FlowSetFile, FlowSpec, RandomTopologyParams, Topology, TopologyFile,
};
use rtsdn::seeds::rng_for;
use rtsdn::sim::{
    simulate, QueueMode, SimConfig, Traffic, TrafficFile, TrafficProfile, TrafficShape,
};
use rtsdn::solver::RelaxParams;

#[derive(Parser)]
#[command(
    name = "rtsdn",
    version,
    about = "Delay-aware path layout and rule synthesis for real-time SDN flows"
)]
struct Cli {
    /// Base seed for every random draw.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Worker threads for experiments. Results do not depend on it.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true, default_value = "out")]
    out_dir: PathBuf,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Separate,
    Shared,
}

#[derive(Subcommand)]
enum Command {
    /// Lay out paths for a flow set and write the layout report and switch rules.
    Synth(SynthArgs),
    /// Re-check a layout report against the topology and flows.
    Verify(VerifyArgs),
    /// Simulate traffic over a layout.
    Simulate(SimulateArgs),
    /// Acceptance ratio over deadlines and flow counts on random topologies.
    Sweep(SweepArgs),
    /// Separate per-flow queues against one shared queue on a two-switch fixture.
    CompareQueues(CompareArgs),
    /// Delay distributions of bursty traffic on random schedulable layouts.
    DelayCdf(CdfArgs),
    /// Write a random topology, flow set and traffic file.
    Generate(GenerateArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    flows: PathBuf,
    /// Resolution of the relaxed constraint.
    #[arg(long, default_value_t = 10)]
    relax_x: u32,
    /// Exit successfully even if some flows could not be placed.
    #[arg(long)]
    allow_partial: bool,
    /// Write the final DP table of every search attempt as CSV.
    #[arg(long)]
    dump_dp: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    flows: PathBuf,
    #[arg(long)]
    layout: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    topology: PathBuf,
    #[arg(long)]
    layout: PathBuf,
    #[arg(long)]
    traffic: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Separate)]
    mode: Mode,
    /// Shape each real-time source to its reservation at the host.
    #[arg(long)]
    police_ingress: bool,
    /// Reject traffic profiles that send faster than the reservation.
    #[arg(long)]
    strict: bool,
    #[arg(long, default_value_t = 0)]
    jitter_ns: u64,
    /// Per-queue buffer in packets. Unbounded when omitted.
    #[arg(long)]
    queue_capacity: Option<usize>,
    /// Drop traffic profiles of flows the layout rejected instead of failing.
    #[arg(long)]
    skip_unplaced: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// 250 trials per cell instead of 50.
    #[arg(long)]
    full: bool,
    /// Overrides the trial count.
    #[arg(long)]
    trials: Option<usize>,
    /// Read grid values as per-hop-of-diameter budgets.
    #[arg(long)]
    per_diameter: bool,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, default_value_t = 20)]
    seeds: usize,
    #[arg(long, default_value_t = 2_000)]
    packets: u64,
}

#[derive(Args)]
struct CdfArgs {
    #[arg(long, default_value_t = 25)]
    instances: usize,
    #[arg(long, default_value_t = 1_000_000_000)]
    duration_ns: u64,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, default_value_t = 5)]
    switches: u32,
    #[arg(long, default_value_t = 2)]
    hosts_per_switch: u32,
    #[arg(long, default_value_t = 5)]
    flows: usize,
    /// Tightest deadline; later flows get a tenth more each.
    #[arg(long, default_value_t = 1_000_000)]
    d_min_ns: u64,
    /// Duration of the constant-rate traffic written for every flow.
    #[arg(long, default_value_t = 100_000_000)]
    duration_ns: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Synth(a) => synth(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::Simulate(a) => simulate_cmd(cli, a),
        Command::Sweep(a) => sweep(cli, a),
        Command::CompareQueues(a) => compare(cli, a),
        Command::DelayCdf(a) => cdf(cli, a),
        Command::Generate(a) => generate(cli, a),
    }
}

fn load_topology(path: &Path) -> Result<Topology> {
    let file: TopologyFile = read_json(path)?;
    Topology::try_from(file).with_context(|| format!("invalid topology {}", path.display()))
}

fn load_flows(path: &Path) -> Result<FlowSet> {
    let file: FlowSetFile = read_json(path)?;
    FlowSet::try_from(file).with_context(|| format!("invalid flow set {}", path.display()))
}

fn load_layout(path: &Path, topology: &Topology) -> Result<LayoutReport> {
    let file: LayoutReportFile = read_json(path)?;
    file.resolve(topology)
        .with_context(|| format!("layout {} does not match the topology", path.display()))
}

/// Writes `stem.json`, or `stem.csv` from `rows` when CSV output is selected.
fn emit<T: Serialize, R: Serialize>(
    cli: &Cli,
    stem: &str,
    json: &T,
    rows: &[R],
) -> Result<PathBuf> {
    let (path, text) = match cli.format {
        Format::Json => (
            cli.out_dir.join(format!("{stem}.json")),
            to_json_string(json)?,
        ),
        Format::Csv => (
            cli.out_dir.join(format!("{stem}.csv")),
            to_csv_string(rows)?,
        ),
    };
    write_text(&path, &text)?;
    Ok(path)
}

#[derive(Serialize)]
struct LayoutRow {
    flow: u32,
    status: &'static str,
    branch: String,
    path: String,
    delay_ns: Option<u64>,
    bw_util: Option<f64>,
    deadline_ns: u64,
    demand_bps: u64,
    reason: String,
}

fn layout_rows(report: &LayoutReport) -> Vec<LayoutRow> {
    report
        .results
        .iter()
        .map(|r| {
            let mut row = LayoutRow {
                flow: r.flow.0,
                status: "rejected",
                branch: String::new(),
                path: String::new(),
                delay_ns: None,
                bw_util: None,
                deadline_ns: r.deadline_ns,
                demand_bps: r.demand_bps,
                reason: String::new(),
            };
            match &r.outcome {
                Outcome::Placed {
                    nodes,
                    branch,
                    cost,
                    ..
                } => {
                    row.status = "placed";
                    row.branch = format!("{branch:?}");
                    row.path = nodes
                        .iter()
                        .map(|n| n.0.to_string())
                        .collect::<Vec<_>>()
                        .join("-");
                    row.delay_ns = Some(cost.delay_ns);
                    row.bw_util = Some(cost.bw_util);
                }
                Outcome::Rejected { reason } => row.reason = format!("{reason:?}"),
            }
            row
        })
        .collect()
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<ExitCode> {
    let mut topology = load_topology(&a.topology)?;
    let flows = load_flows(&a.flows)?;
    let mut trace = Vec::new();
    let report = layout_paths_traced(
        &mut topology,
        &flows,
        RelaxParams { x: a.relax_x },
        a.dump_dp.then_some(&mut trace),
    )?;
    let layout_path = emit(cli, "layout", &report.to_file(), &layout_rows(&report))?;
    let rules = synthesize(&topology, &flows, &report)?;
    let rules_path = cli.out_dir.join("rules.json");
    write_text(&rules_path, &to_json_string(&rules)?)?;
    for (i, t) in trace.iter().enumerate() {
        let name = format!("dp/{i:03}_flow{}_{:?}.csv", t.flow.0, t.branch).to_lowercase();
        write_text(&cli.out_dir.join(name), &t.to_csv())?;
    }
    let placed = report.placed().count();
    println!(
        "placed {placed}/{} flows, {} rules -> {}, {}",
        report.results.len(),
        rules.rule_count(),
        layout_path.display(),
        rules_path.display()
    );
    Ok(if report.schedulable || a.allow_partial {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

#[derive(Serialize)]
struct VerifyResult {
    format_version: u32,
    ok: bool,
    violations: Vec<rtsdn::layout::Violation>,
}

#[derive(Serialize)]
struct ViolationRow {
    kind: String,
    detail: String,
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<ExitCode> {
    let topology = load_topology(&a.topology)?;
    let flows = load_flows(&a.flows)?;
    let report = load_layout(&a.layout, &topology)?;
    let violations = verify_layout(&topology, &flows, &report);
    let rows = violations
        .iter()
        .map(|v| {
            let value = serde_json::to_value(v)?;
            Ok(ViolationRow {
                kind: value["kind"].as_str().unwrap_or_default().to_string(),
                detail: serde_json::to_string(&value)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let result = VerifyResult {
        format_version: rtsdn::io::FORMAT_VERSION,
        ok: violations.is_empty(),
        violations,
    };
    let path = emit(cli, "verify", &result, &rows)?;
    println!(
        "{} violations -> {}",
        result.violations.len(),
        path.display()
    );
    Ok(if result.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn simulate_cmd(cli: &Cli, a: &SimulateArgs) -> Result<ExitCode> {
    let topology = load_topology(&a.topology)?;
    let report = load_layout(&a.layout, &topology)?;
    let file: TrafficFile = read_json(&a.traffic)?;
    let mut traffic = Traffic::try_from(file)?;
    if a.skip_unplaced {
        traffic
            .profiles
            .retain(|p| report.get(p.flow).is_some_and(|r| r.is_placed()));
    }
    let config = SimConfig {
        mode: match a.mode {
            Mode::Separate => QueueMode::SeparatePerFlow,
            Mode::Shared => QueueMode::SharedSingle,
        },
        seed: cli.seed,
        police_ingress: a.police_ingress,
        strict: a.strict,
        queue_capacity: a.queue_capacity,
        jitter_ns: a.jitter_ns,
        ..Default::default()
    };
    let sim = simulate(&topology, &report, &traffic, &config)?;
    let path = emit(cli, "sim", &sim, &sim.flows)?;
    println!(
        "{} flows simulated, {} deadline misses -> {}",
        sim.flows.len(),
        sim.total_deadline_misses(),
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn sweep(cli: &Cli, a: &SweepArgs) -> Result<ExitCode> {
    let mut config = SweepConfig {
        seed: cli.seed,
        trials_per_cell: a.trials.unwrap_or(if a.full { 250 } else { 50 }),
        ..Default::default()
    };
    if a.per_diameter {
        config.deadline_basis = DeadlineBasis::PerDiameter;
        config.d_min_grid = (1..=8).map(|k| k * 25_000).collect();
    }
    let surface = acceptance_sweep(&config, cli.jobs)?;
    let path = emit(cli, "sweep", &surface, &surface.cells)?;
    println!(
        "{} cells, worst monotonicity violation {:.3} -> {}",
        surface.cells.len(),
        surface.worst_monotonicity_violation(),
        path.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn compare(cli: &Cli, a: &CompareArgs) -> Result<ExitCode> {
    let config = QueueCompareConfig {
        seeds: a.seeds,
        packets: a.packets,
        seed: cli.seed,
        ..Default::default()
    };
    let result = queue_strategy_compare(&config, cli.jobs)?;
    let path = emit(cli, "queues", &result, &result.points)?;
    if cli.format == Format::Csv {
        write_text(&cli.out_dir.join("queues_rows.csv"), &result.rows_csv()?)?;
    }
    for p in &result.points {
        println!(
            "rate {:.2}: separate {:.0} ns, shared {:.0} ns",
            p.rate_fraction, p.separate_mean_ns, p.shared_mean_ns
        );
    }
    println!("-> {}", path.display());
    Ok(ExitCode::SUCCESS)
}

fn cdf(cli: &Cli, a: &CdfArgs) -> Result<ExitCode> {
    let config = DelayCdfConfig {
        instances: a.instances,
        duration_ns: a.duration_ns,
        seed: cli.seed,
        ..Default::default()
    };
    let result = delay_cdf_run(&config, cli.jobs)?;
    let path = emit(cli, "cdf", &result, &result.cdf)?;
    if cli.format == Format::Csv {
        write_text(
            &cli.out_dir.join("cdf_instances.csv"),
            &to_csv_string(&result.instances)?,
        )?;
    }
    println!(
        "{} instances, {} deadline misses -> {}",
        result.instances.len(),
        result.total_deadline_misses(),
        path.display()
    );
    Ok(if result.total_deadline_misses() == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    })
}

fn generate(cli: &Cli, a: &GenerateArgs) -> Result<ExitCode> {
    if cli.format == Format::Csv {
        bail!("generate writes JSON input files only");
    }
    let params = RandomTopologyParams {
        n_switches: a.switches,
        hosts_per_switch: a.hosts_per_switch,
        ..Default::default()
    };
    let topology = random_topology(cli.seed, &params)?;
    let diameter = topology
        .diameter()
        .context("generated topology is disconnected")?;
    let mut rng = rng_for(cli.seed, 0, 0);
    let draws = random_flows(&mut rng, &topology, a.flows, &(1_000_000..=5_000_000))?;
    let deadlines = deadline_schedule(DeadlineBase::Absolute(a.d_min_ns), a.flows, diameter);
    let specs: Vec<FlowSpec> = draws
        .iter()
        .zip(&deadlines)
        .enumerate()
        .map(|(i, (f, &d))| FlowSpec::new(i as u32 + 1, f.source, f.dest, d, f.demand_bps))
        .collect();
    let flows = FlowSet::new(specs)?;
    let traffic = Traffic {
        profiles: flows
            .flows()
            .iter()
            .map(|f| TrafficProfile {
                flow: f.id,
                shape: TrafficShape::constant(f.demand_bps, 125, a.duration_ns),
            })
            .collect(),
        best_effort: vec![],
    };
    let files = [
        (
            "topology.json",
            to_json_string(&TopologyFile::from(topology))?,
        ),
        ("flows.json", to_json_string(&FlowSetFile::from(flows))?),
        ("traffic.json", to_json_string(&TrafficFile::from(traffic))?),
    ];
    for (name, text) in &files {
        write_text(&cli.out_dir.join(name), text)?;
    }
    println!(
        "wrote topology.json, flows.json, traffic.json to {}",
        cli.out_dir.display()
    );
    Ok(ExitCode::SUCCESS)
}
