//! Seeded instance generators shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rtsdn::experiments::{deadline_schedule, random_flows, DeadlineBase};
use rtsdn::model::{random_topology, FlowSet, FlowSpec, RandomTopologyParams, Topology};
use rtsdn::seeds::rng_for;
use rtsdn::solver::{relax_weight, WeightedInstance};

/// A random undirected graph on 2..=8 nodes with delay-like first weights and
/// second weights relaxed to a grid of `x` against a random bound.
pub fn random_mcp_instance(seed: u64, x: u32) -> WeightedInstance {
    let mut rng = rng_for(seed, 100, 0);
    let n = rng.random_range(2..=8usize);
    let c1 = rng.random_range(50_000..=400_000u128);
    let bound: f64 = rng.random_range(0.5..3.0);
    let mut inst = WeightedInstance::new(n, 0, n - 1, c1, x);
    let mut tag = 0;
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(0.45) {
                let w1 = rng.random_range(25_000..=125_000u128);
                let raw: f64 = rng.random_range(0.05..1.0);
                let w2 = relax_weight(raw, bound, x).unwrap() as u32;
                inst.add_edge(a, b, w1, w2, tag);
                tag += 1;
            }
        }
    }
    inst
}

/// Random five-switch topology with 2..=20 flows and a tightest deadline drawn
/// from 300..=1000 us.
pub fn random_layout_instance(seed: u64) -> (Topology, FlowSet) {
    let topology = random_topology(seed, &RandomTopologyParams::default()).unwrap();
    let mut rng = rng_for(seed, 101, 0);
    let count = rng.random_range(2..=20usize);
    let d_min = rng.random_range(3..=10u64) * 100_000;
    let draws = random_flows(&mut rng, &topology, count, &(1_000_000..=5_000_000)).unwrap();
    let deadlines = deadline_schedule(
        DeadlineBase::Absolute(d_min),
        count,
        topology.diameter().unwrap(),
    );
    let flows = draws
        .iter()
        .zip(&deadlines)
        .enumerate()
        .map(|(i, (f, &d))| FlowSpec::new(i as u32, f.source, f.dest, d, f.demand_bps))
        .collect();
    (topology, FlowSet::new(flows).unwrap())
}

pub mod cli {
    use std::collections::BTreeMap;
    use std::path::{Path, PathBuf};
    use std::process::{Command, Output};

    pub const BIN: &str = env!("CARGO_BIN_EXE_rtsdn");

    /// Runs the binary with `--out-dir dir` prepended to `args`.
    pub fn run(dir: &Path, args: &[&str]) -> Output {
        Command::new(BIN)
            .arg("--out-dir")
            .arg(dir)
            .args(args)
            .output()
            .expect("binary runs")
    }

    /// Every file under `dir`, keyed by relative path.
    pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
        let mut out = BTreeMap::new();
        let mut stack = vec![dir.to_path_buf()];
        while let Some(d) = stack.pop() {
            for e in std::fs::read_dir(&d).unwrap() {
                let p = e.unwrap().path();
                if p.is_dir() {
                    stack.push(p);
                } else {
                    out.insert(
                        p.strip_prefix(dir).unwrap().to_path_buf(),
                        std::fs::read(&p).unwrap(),
                    );
                }
            }
        }
        out
    }

    /// Writes generated inputs into `dir` and returns their paths as strings.
    pub fn inputs(dir: &Path) -> (String, String, String) {
        let o = run(
            dir,
            &[
                "--seed",
                "11",
                "generate",
                "--flows",
                "4",
                "--d-min-ns",
                "2000000",
            ],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let s = |n: &str| dir.join(n).to_string_lossy().into_owned();
        (s("topology.json"), s("flows.json"), s("traffic.json"))
    }

    /// Each subcommand's argument list, given generated inputs and a layout.
    pub fn commands(t: &str, f: &str, tr: &str, layout: &str) -> Vec<(&'static str, Vec<String>)> {
        let v = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        vec![
            ("generate", v(&["--seed", "5", "generate"])),
            (
                "synth",
                v(&[
                    "synth",
                    "--topology",
                    t,
                    "--flows",
                    f,
                    "--allow-partial",
                    "--dump-dp",
                ]),
            ),
            (
                "synth csv",
                v(&[
                    "--format",
                    "csv",
                    "synth",
                    "--topology",
                    t,
                    "--flows",
                    f,
                    "--allow-partial",
                ]),
            ),
            (
                "verify",
                v(&["verify", "--topology", t, "--flows", f, "--layout", layout]),
            ),
            (
                "simulate",
                v(&[
                    "--seed",
                    "3",
                    "simulate",
                    "--topology",
                    t,
                    "--layout",
                    layout,
                    "--traffic",
                    tr,
                    "--jitter-ns",
                    "2000",
                    "--skip-unplaced",
                ]),
            ),
            (
                "simulate shared csv",
                v(&[
                    "--seed",
                    "3",
                    "--format",
                    "csv",
                    "simulate",
                    "--topology",
                    t,
                    "--layout",
                    layout,
                    "--traffic",
                    tr,
                    "--mode",
                    "shared",
                    "--skip-unplaced",
                ]),
            ),
            (
                "sweep",
                v(&["--seed", "2", "--jobs", "2", "sweep", "--trials", "4"]),
            ),
            (
                "sweep csv",
                v(&[
                    "--seed",
                    "2",
                    "--format",
                    "csv",
                    "sweep",
                    "--trials",
                    "4",
                    "--per-diameter",
                ]),
            ),
            (
                "compare-queues",
                v(&[
                    "--seed",
                    "4",
                    "compare-queues",
                    "--seeds",
                    "3",
                    "--packets",
                    "200",
                ]),
            ),
            (
                "delay-cdf",
                v(&[
                    "--seed",
                    "6",
                    "--format",
                    "csv",
                    "delay-cdf",
                    "--instances",
                    "2",
                    "--duration-ns",
                    "20000000",
                ]),
            ),
        ]
    }

    /// Runs every subcommand twice into fresh directories and reports, per
    /// subcommand, whether both runs succeeded with byte-identical files.
    pub fn determinism() -> Vec<(&'static str, bool)> {
        let base = tempfile::tempdir().unwrap();
        let input_dir = base.path().join("inputs");
        let (t, f, tr) = inputs(&input_dir);
        let layout_dir = base.path().join("layout");
        let o = run(
            &layout_dir,
            &["synth", "--topology", &t, "--flows", &f, "--allow-partial"],
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        let layout = layout_dir
            .join("layout.json")
            .to_string_lossy()
            .into_owned();
        commands(&t, &f, &tr, &layout)
            .into_iter()
            .enumerate()
            .map(|(i, (name, args))| {
                let args: Vec<&str> = args.iter().map(String::as_str).collect();
                let runs: Vec<_> = (0..2)
                    .map(|k| {
                        let dir = base.path().join(format!("run{i}_{k}"));
                        let o = run(&dir, &args);
                        (o.status.success(), snapshot(&dir))
                    })
                    .collect();
                let ok = runs[0].0 && runs[1].0 && !runs[0].1.is_empty() && runs[0].1 == runs[1].1;
                (name, ok)
            })
            .collect()
    }
}

/// A connected random graph on `n` nodes (a random tree plus extra edges with
/// probability `p`) with second weights relaxed to a grid of `x`.
pub fn random_large_instance(seed: u64, n: usize, p: f64, x: u32) -> WeightedInstance {
    let mut rng = rng_for(seed, 102, 0);
    let mut edges = Vec::new();
    for v in 1..n {
        edges.push((rng.random_range(0..v), v));
    }
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(p) && !edges.contains(&(a, b)) {
                edges.push((a, b));
            }
        }
    }
    let bound = 3.0;
    let mut inst = WeightedInstance::new(n, 0, n - 1, 2_000_000, x);
    for (tag, (a, b)) in edges.into_iter().enumerate() {
        let w1 = rng.random_range(25_000..=125_000u128);
        let raw: f64 = rng.random_range(0.05..0.5);
        inst.add_edge(a, b, w1, relax_weight(raw, bound, x).unwrap() as u32, tag);
    }
    inst
}
