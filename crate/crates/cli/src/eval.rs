use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use mpe_core::eval::{aggregate_substrate_score, normalize_scores, run_seeds, MetricsReport, RunOptions};
use mpe_core::{Error, Result};
use serde::Serialize;

use crate::episode::population;
use crate::manifest::Manifest;
use crate::{emit, registry, EvalArgs, NormalizeArgs};

/// Columns of the per-episode CSV written by `eval` and read by `normalize`.
pub const CSV_COLUMNS: [&str; 6] = ["scenario", "seed", "focal_pc", "background_pc", "gini", "collective"];

#[derive(Serialize)]
struct SubstrateSummary {
    scenarios: usize,
    mean_focal_per_capita: f64,
}

#[derive(Serialize)]
struct EvalOutput<'a> {
    manifest: &'a Manifest,
    reports: &'a [MetricsReport],
    substrates: BTreeMap<String, SubstrateSummary>,
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |e| {
        if e.is_io_error() {
            Error::io(format!("{}: {e}", path.display()))
        } else {
            Error::config(format!("{}: {e}", path.display()))
        }
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

pub fn eval(a: &EvalArgs, manifest: Manifest) -> Result<()> {
    if a.episodes == 0 {
        return Err(Error::contract("--episodes must be at least 1"));
    }
    let reg = registry(&a.common)?;
    let mut specs = Vec::new();
    let mut seen = BTreeSet::new();
    for sel in &a.scenario {
        for s in reg.select_scenarios(sel)? {
            if seen.insert(s.id.clone()) {
                specs.push(s);
            }
        }
    }
    let pop = population(&reg, &a.focal)?;
    let opts = RunOptions { max_steps: a.max_steps, ..Default::default() };
    let seeds: Vec<u64> = (0..a.episodes as u64).map(|i| a.seed + i).collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs)
        .build()
        .map_err(|e| Error::config(format!("--jobs: {e}")))?;
    let reports = pool.install(|| {
        specs
            .iter()
            .map(|s| run_seeds(&reg, s, &pop, &seeds, &opts))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut by_substrate: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in &reports {
        by_substrate.entry(r.substrate.clone()).or_default().push(r.focal_per_capita);
    }
    let substrates = by_substrate
        .into_iter()
        .map(|(k, v)| {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (k, SubstrateSummary { scenarios: v.len(), mean_focal_per_capita: mean })
        })
        .collect();
    let out = EvalOutput { manifest: &manifest, reports: &reports, substrates };
    let mut json = serde_json::to_vec_pretty(&out).expect("report serializes");
    json.push(b'\n');
    emit(Some(&a.out.join("report.json")), &json)?;

    let csv_path = a.out.join("episodes.csv");
    let mut buf = manifest.csv_header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(CSV_COLUMNS).map_err(csv_err(&csv_path))?;
        for r in &reports {
            for row in &r.rows {
                w.write_record([
                    row.scenario.clone(),
                    row.seed.to_string(),
                    row.focal_per_capita.to_string(),
                    opt(row.background_per_capita),
                    opt(row.background_inequality),
                    row.collective_return.to_string(),
                ])
                .map_err(csv_err(&csv_path))?;
            }
        }
        w.flush().map_err(|e| Error::io(format!("{}: {e}", csv_path.display())))?;
    }
    emit(Some(&csv_path), &buf)
}

/// Mean focal per-capita return per scenario of one eval CSV.
pub fn read_eval_csv(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut rd = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_path(path)
        .map_err(csv_err(path))?;
    let headers = rd.headers().map_err(csv_err(path))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::config(format!("{}: missing column `{name}`", path.display())))
    };
    let (si, fi) = (col("scenario")?, col("focal_pc")?);
    let mut acc: BTreeMap<String, (f64, usize)> = BTreeMap::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err(path))?;
        let x: f64 = rec[fi]
            .parse()
            .map_err(|e| Error::config(format!("{}: focal_pc `{}`: {e}", path.display(), &rec[fi])))?;
        let e = acc.entry(rec[si].to_string()).or_default();
        e.0 += x;
        e.1 += 1;
    }
    Ok(acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect())
}

fn substrate_of(scenario: &str) -> &str {
    scenario.split_once('/').map_or(scenario, |(s, _)| s)
}

pub fn normalize(a: &NormalizeArgs, manifest: Manifest) -> Result<()> {
    if a.inputs.len() < 2 {
        return Err(Error::contract("normalize needs at least two eval CSVs"));
    }
    let mut agents: Vec<(String, BTreeMap<String, f64>)> = Vec::new();
    for p in &a.inputs {
        let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
        if agents.iter().any(|(n, _)| *n == name) {
            return Err(Error::config(format!("two inputs are named `{name}`")));
        }
        agents.push((name, read_eval_csv(p)?));
    }
    let all: BTreeSet<&String> = agents.iter().flat_map(|(_, m)| m.keys()).collect();
    let mut missing = Vec::new();
    for (name, m) in &agents {
        let lacks: Vec<&str> = all.iter().filter(|s| !m.contains_key(**s)).map(|s| s.as_str()).collect();
        if !lacks.is_empty() {
            missing.push(format!("{name} lacks {}", lacks.join(", ")));
        }
    }
    if !missing.is_empty() {
        return Err(Error::contract(format!("scenario sets differ: {}", missing.join("; "))));
    }
    let scenarios: Vec<&String> = all.into_iter().collect();
    let raw: Vec<Vec<f64>> = agents.iter().map(|(_, m)| scenarios.iter().map(|s| m[*s]).collect()).collect();
    let norm = normalize_scores(&raw);

    let mut groups: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (j, s) in scenarios.iter().enumerate() {
        groups.entry(substrate_of(s)).or_default().push(j);
    }
    let mut buf = manifest.csv_header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let header = std::iter::once("agent")
            .chain(scenarios.iter().map(|s| s.as_str()))
            .chain(groups.keys().copied());
        w.write_record(header).map_err(|e| Error::io(e.to_string()))?;
        for ((name, _), row) in agents.iter().zip(&norm) {
            let mut rec = vec![name.clone()];
            rec.extend(row.iter().map(f64::to_string));
            for cols in groups.values() {
                let xs: Vec<f64> = cols.iter().map(|&j| row[j]).collect();
                rec.push(aggregate_substrate_score(&xs)?.to_string());
            }
            w.write_record(rec).map_err(|e| Error::io(e.to_string()))?;
        }
        w.flush().map_err(Error::from)?;
    }
    emit(a.out.as_deref(), &buf)
}
