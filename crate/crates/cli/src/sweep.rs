use std::path::PathBuf;

use blmix::mixing::{table_ns, sweep, Axis, StartSet, SweepGrid, SweepTable};
use blmix::ratios::RatioTriple;

use crate::{check_epsilon, emit, CliError, GridArgs, SweepArgs};

pub fn grid_from_args(args: &GridArgs, ns: &[u32]) -> Result<SweepGrid, CliError> {
    let mut grid = match (args.table, &args.axis) {
        (Some(id), _) => SweepGrid::table(id)?,
        (None, Some(axis)) => {
            let axis: Axis = axis.parse()?;
            let k = args.k_ratio.unwrap_or(0.02);
            let r = args.r_ratio.unwrap_or(0.5);
            let m = args.m_ratio.unwrap_or(r);
            let coupled = axis != Axis::M && args.m_ratio.is_none();
            SweepGrid::new(axis, RatioTriple::new(k, r, m), coupled, args.ratios.clone(), table_ns())
        }
        (None, None) => return Err(CliError::Invalid("give --table or --axis with --ratios".into())),
    };
    if grid.ratios.is_empty() {
        return Err(CliError::Invalid("no ratios given".into()));
    }
    if !ns.is_empty() {
        grid.ns = ns.to_vec();
    }
    Ok(grid)
}

/// Header `ratio,n=50,...`, one row per ratio.
pub fn to_csv(table: &SweepTable) -> Result<String, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["ratio".to_string()];
    header.extend(table.grid.ns.iter().map(|n| format!("n={n}")));
    writer.write_record(&header)?;
    for (i, row) in table.cells.iter().enumerate() {
        let mut record = vec![table.grid.row_label(i)];
        record.extend(row.iter().map(|c| c.token()));
        writer.write_record(&record)?;
    }
    let bytes = writer.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

pub fn error_log_path(output: &std::path::Path) -> PathBuf {
    let mut name = output.file_name().unwrap_or_default().to_os_string();
    name.push(".errors.log");
    output.with_file_name(name)
}

pub fn run(args: &SweepArgs) -> Result<(), CliError> {
    check_epsilon(args.epsilon)?;
    let mut grid = grid_from_args(&args.grid, &args.ns)?;
    grid.epsilon = args.epsilon;
    if args.extremes {
        grid.starts = StartSet::Extremes;
    }
    let table = sweep(&grid);
    emit(args.output.as_ref(), &to_csv(&table)?)?;

    let failures = table.failures();
    if !failures.is_empty() {
        let log: String = failures
            .iter()
            .map(|(ratio, n, msg)| format!("ratio={ratio} n={n}: {msg}\n"))
            .collect();
        match &args.output {
            Some(path) => std::fs::write(error_log_path(path), log)?,
            None => eprint!("{log}"),
        }
    }
    Ok(())
}
