use std::path::{Path, PathBuf};

use coordcap::coord_sim::{monte_carlo, SimConfig};
use coordcap::dsbs_examples::{
    consistency_suite, encryptor_sum_rate_curve, rd_csv, rd_rows, sum_rate_csv, DsbsError,
};
use coordcap::finite_prob::PmfDocument;
use coordcap::rate_region::{search_inner_bound, search_outer_bound};
use serde::Serialize;

use crate::config::{ExperimentConfig, Params};
use crate::error::{CliError, ErrorKind, Result};

/// One output file and its contents.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: &'static str,
    pub body: String,
}

#[derive(Serialize)]
struct Manifest<'a> {
    artifact: &'a str,
    version: &'static str,
    command: &'static str,
    config: &'a Params,
}

fn dsbs_error(context: &str, e: DsbsError) -> CliError {
    match e {
        DsbsError::OutOfRange { name, value } => CliError::range(name, value, "[0, 1/2]"),
        e => CliError::module(context, e),
    }
}

fn pmf(doc: &PmfDocument, key: &str) -> Result<coordcap::finite_prob::JointPmf> {
    doc.to_pmf().map_err(|e| CliError::validation(key, e.to_string()))
}

/// Computes every artifact of the command without touching the disk.
/// The second value is an error to report after the artifacts are written.
pub fn compute(config: &ExperimentConfig) -> Result<(Vec<Artifact>, Option<CliError>)> {
    let one = |name, body| Ok((vec![Artifact { name, body }], None));
    match &config.params {
        Params::Region(c) => {
            let target = pmf(&c.target, "target")?;
            let cloud = search_inner_bound(&target, c.aux_sizes, c.sampler.sampler(), c.tolerance)
                .map_err(|e| CliError::module("inner-bound search", e))?;
            one("region.jsonl", cloud.to_json_lines())
        }
        Params::Outer(c) => {
            let target = pmf(&c.target, "target")?;
            let cloud = search_outer_bound(&target, c.aux_sizes, c.samples, c.seed)
                .map_err(|e| CliError::module("outer-bound search", e))?;
            one("outer.jsonl", cloud.to_json_lines())
        }
        Params::Sumrate(c) => {
            let curve = encryptor_sum_rate_curve(&c.a_grid, &c.alpha_grid)
                .map_err(|e| dsbs_error("sum-rate curve", e))?;
            one("sumrate.csv", sum_rate_csv(&curve))
        }
        Params::Rd(c) => {
            let rows: Vec<_> = rd_rows(c.a, c.distortion, &c.alpha_grid, &c.d_grid)
                .map_err(|e| dsbs_error("rate-distortion corners", e))?
                .into_iter()
                .filter(|r| r.feasible)
                .collect();
            one("rd.csv", rd_csv(&rows))
        }
        Params::Simulate(c) => {
            let sim = SimConfig {
                target: pmf(&c.target, "target")?,
                joint6: pmf(&c.joint, "joint")?,
                scheme: c.scheme,
                block_lengths: c.n.clone(),
                delta: c.delta,
                epsilon: c.epsilon,
            };
            let summary = monte_carlo(&sim, c.trials, c.seed)
                .map_err(|e| CliError::module("simulation", e))?;
            Ok((
                vec![
                    Artifact {
                        name: "trials.jsonl",
                        body: summary.to_json_lines(),
                    },
                    Artifact {
                        name: "summary.csv",
                        body: summary.summary_csv(),
                    },
                ],
                None,
            ))
        }
        Params::Check(c) => {
            let checks =
                consistency_suite(&c.grid).map_err(|e| dsbs_error("consistency suite", e))?;
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
            let mut body = serde_json::to_string_pretty(&checks).expect("checks serialize");
            body.push('\n');
            let err = (!failed.is_empty()).then(|| {
                CliError::new(
                    ErrorKind::Check,
                    None,
                    format!("consistency checks failed: {}", failed.join(", ")),
                )
            });
            Ok((vec![Artifact { name: "check.json", body }], err))
        }
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    std::fs::write(path, body).map_err(|e| CliError::io(path, e))
}

pub fn manifest(config: &ExperimentConfig, artifact: &str) -> String {
    let m = Manifest {
        artifact,
        version: concat!("coordctl ", env!("CARGO_PKG_VERSION")),
        command: config.command.as_str(),
        config: &config.params,
    };
    let mut s = serde_json::to_string_pretty(&m).expect("manifest serializes");
    s.push('\n');
    s
}

/// Runs the command and writes each artifact and its manifest into the
/// output directory. Nothing is written if the computation fails.
pub fn run_command(config: &ExperimentConfig) -> Result<Vec<PathBuf>> {
    let (artifacts, deferred) = compute(config)?;
    let dir = &config.out_dir;
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let mut written = Vec::new();
    for a in &artifacts {
        let path = dir.join(a.name);
        write(&path, &a.body)?;
        let mpath = dir.join(format!("{}.manifest.json", a.name));
        write(&mpath, &manifest(config, a.name))?;
        written.push(path);
        written.push(mpath);
    }
    match deferred {
        Some(e) => Err(e),
        None => Ok(written),
    }
}
