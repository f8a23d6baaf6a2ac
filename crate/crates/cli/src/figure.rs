use std::path::PathBuf;

use blmix::mixing::{run_cell, Cell, MixingOptions};
use blmix::ratios::RatioTriple;
use rayon::prelude::*;

use crate::svg::line_plot;
use crate::{check_epsilon, CliError, FigureArgs};

/// The three published figures: `(k/n, r/n)` with `m = r`.
pub fn preset(id: u8) -> Result<RatioTriple, CliError> {
    match id {
        1 => Ok(RatioTriple::new(0.05, 0.40, 0.40)),
        2 => Ok(RatioTriple::new(0.10, 0.40, 0.40)),
        3 => Ok(RatioTriple::new(0.25, 0.50, 0.50)),
        other => Err(CliError::Invalid(format!("no preset {other}; expected 1, 2 or 3"))),
    }
}

pub fn default_ns() -> Vec<u32> {
    (1..=50).map(|i| 20 * i).collect()
}

pub fn run(args: &FigureArgs) -> Result<(), CliError> {
    check_epsilon(args.epsilon)?;
    let (triple, stem) = match (args.preset, args.k_ratio, args.r_ratio) {
        (Some(id), _, _) => (preset(id)?, format!("figure{id}")),
        (None, Some(k), Some(r)) => (RatioTriple::new(k, r, args.m_ratio.unwrap_or(r)), "figure".to_string()),
        _ => return Err(CliError::Invalid("give --preset or both --k-ratio and --r-ratio".into())),
    };
    let ns = if args.ns.is_empty() { default_ns() } else { args.ns.clone() };
    let prefix = args.output.clone().unwrap_or_else(|| PathBuf::from(stem));

    let mut instances = Vec::new();
    for &n in &ns {
        match triple.instantiate(n) {
            Ok(params) => instances.push(params),
            Err(e) => eprintln!("skipping n = {n}: {e}"),
        }
    }
    if instances.is_empty() {
        return Err(CliError::Invalid("no admissible n for these ratios".into()));
    }
    let options = MixingOptions::new(args.epsilon);
    let cells: Vec<Cell> = instances.par_iter().map(|&p| run_cell(p, &options)).collect();

    let mut tsv = String::from("n\tt_mix\n");
    let mut points = Vec::new();
    for (params, cell) in instances.iter().zip(&cells) {
        tsv.push_str(&format!("{}\t{}\n", params.n(), cell.token()));
        if let Some(msg) = cell.failure() {
            eprintln!("n = {}: {msg}", params.n());
        }
        if let Some(t) = cell.value() {
            points.push((params.n() as f64, t as f64));
        }
    }
    let title = format!(
        "t_mix({}) for k/n = {}, r/n = {}, m/n = {}",
        args.epsilon, triple.k, triple.r, triple.m
    );
    std::fs::write(prefix.with_extension("tsv"), tsv)?;
    std::fs::write(prefix.with_extension("svg"), line_plot(&title, "n", "t_mix", &points))?;
    Ok(())
}
