use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{worst_case_curve, MixingOptions, MixingOutcome, StartSet};
use crate::chain::{build_kernel, ChainParams};
use crate::error::{Error, Result};
use crate::ratios::RatioTriple;

/// Ratio varied along the rows of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    K,
    R,
    M,
}

impl std::str::FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "k" => Ok(Axis::K),
            "r" => Ok(Axis::R),
            "m" => Ok(Axis::M),
            other => Err(Error::InvalidParams(format!("unknown axis {other:?}, expected k, r or m"))),
        }
    }
}

/// A table of mixing times: one row per ratio on `axis`, one column per `n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepGrid {
    pub axis: Axis,
    /// Ratios held fixed; the component on `axis` is ignored.
    pub base: RatioTriple,
    /// Tie `m/n` to `r/n` (`m = r`, as in the published tables).
    pub couple_m_to_r: bool,
    pub ratios: Vec<f64>,
    pub ns: Vec<u32>,
    pub epsilon: f64,
    pub starts: StartSet,
}

/// `0.02, 0.04, ..., 0.50`.
pub fn table_ratios() -> Vec<f64> {
    (1..=25).map(|i| i as f64 / 50.0).collect()
}

/// `50, 100, ..., 1000`.
pub fn table_ns() -> Vec<u32> {
    (1..=20).map(|i| 50 * i).collect()
}

impl SweepGrid {
    pub fn new(axis: Axis, base: RatioTriple, couple_m_to_r: bool, ratios: Vec<f64>, ns: Vec<u32>) -> Self {
        Self {
            axis,
            base,
            couple_m_to_r,
            ratios,
            ns,
            epsilon: 0.01,
            starts: StartSet::All,
        }
    }

    /// Preset grids of the three published tables.
    ///
    /// 1. `k/n` varies, `r/n = 0.5`, `m = r`.
    /// 2. `r/n` varies, `k/n = 0.02`, `m = r`.
    /// 3. `m/n` varies, `k/n = 0.02`, `r/n = 0.5`.
    pub fn table(id: u8) -> Result<Self> {
        let (axis, base, coupled) = match id {
            1 => (Axis::K, RatioTriple::new(0.0, 0.5, 0.5), true),
            2 => (Axis::R, RatioTriple::new(0.02, 0.0, 0.0), true),
            3 => (Axis::M, RatioTriple::new(0.02, 0.5, 0.0), false),
            other => return Err(Error::InvalidParams(format!("no table {other}; expected 1, 2 or 3"))),
        };
        Ok(Self::new(axis, base, coupled, table_ratios(), table_ns()))
    }

    pub fn triple(&self, ratio: f64) -> RatioTriple {
        let b = self.base;
        match self.axis {
            Axis::K => RatioTriple::new(ratio, b.r, if self.couple_m_to_r { b.r } else { b.m }),
            Axis::R => RatioTriple::new(b.k, ratio, if self.couple_m_to_r { ratio } else { b.m }),
            Axis::M => RatioTriple::new(b.k, b.r, ratio),
        }
    }

    pub fn params(&self, row: usize, col: usize) -> Result<ChainParams> {
        self.triple(self.ratios[row]).instantiate(self.ns[col])
    }

    pub fn row_label(&self, row: usize) -> String {
        format!("{:.2}", self.ratios[row])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cell {
    Mixed(usize),
    NonMixing,
    Inconclusive { d_at_cap: f64 },
    Error(String),
}

impl Cell {
    /// `t_mix`, `"inf"` or `"ERR"`.
    pub fn token(&self) -> String {
        match self {
            Cell::Mixed(t) => t.to_string(),
            Cell::NonMixing => "inf".to_string(),
            Cell::Inconclusive { .. } | Cell::Error(_) => "ERR".to_string(),
        }
    }

    pub fn value(&self) -> Option<usize> {
        match self {
            Cell::Mixed(t) => Some(*t),
            _ => None,
        }
    }

    /// Why the cell is `ERR`, if it is.
    pub fn failure(&self) -> Option<String> {
        match self {
            Cell::Inconclusive { d_at_cap } => Some(format!("cap reached with d = {d_at_cap:e}")),
            Cell::Error(msg) => Some(msg.clone()),
            _ => None,
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.token())
    }
}

pub fn run_cell(params: ChainParams, options: &MixingOptions) -> Cell {
    let outcome = build_kernel(params).and_then(|kernel| worst_case_curve(&kernel, options));
    match outcome {
        Ok(curve) => match curve.outcome {
            MixingOutcome::Mixed(t) => Cell::Mixed(t),
            MixingOutcome::NonMixing => Cell::NonMixing,
            MixingOutcome::Inconclusive { d_at_cap } => Cell::Inconclusive { d_at_cap },
        },
        Err(e) => Cell::Error(e.to_string()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub grid: SweepGrid,
    /// `cells[row][col]`, rows following `grid.ratios`, columns `grid.ns`.
    pub cells: Vec<Vec<Cell>>,
}

impl SweepTable {
    pub fn row(&self, ratio_label: &str) -> Option<&[Cell]> {
        (0..self.grid.ratios.len())
            .find(|&i| self.grid.row_label(i) == ratio_label)
            .map(|i| self.cells[i].as_slice())
    }

    /// `(row label, n, message)` for every failed cell.
    pub fn failures(&self) -> Vec<(String, u32, String)> {
        let mut out = Vec::new();
        for (i, row) in self.cells.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if let Some(msg) = cell.failure() {
                    out.push((self.grid.row_label(i), self.grid.ns[j], msg));
                }
            }
        }
        out
    }
}

/// Fills every cell independently; failures stay inside their cell.
pub fn sweep(grid: &SweepGrid) -> SweepTable {
    let options = MixingOptions::new(grid.epsilon).with_starts(grid.starts);
    let cols = grid.ns.len();
    let flat: Vec<Cell> = (0..grid.ratios.len() * cols)
        .into_par_iter()
        .map(|idx| match grid.params(idx / cols, idx % cols) {
            Ok(params) => run_cell(params, &options),
            Err(e) => Cell::Error(e.to_string()),
        })
        .collect();
    let cells = flat.chunks(cols.max(1)).map(<[Cell]>::to_vec).collect();
    SweepTable {
        grid: grid.clone(),
        cells,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_presets() {
        let t1 = SweepGrid::table(1).unwrap();
        assert_eq!(t1.ratios.len(), 25);
        assert_eq!(t1.ns.len(), 20);
        assert_eq!(t1.row_label(0), "0.02");
        assert_eq!(t1.row_label(24), "0.50");
        let p = t1.params(11, 4).unwrap();
        assert_eq!((p.n(), p.m(), p.r(), p.k()), (250, 125, 125, 60));

        let t2 = SweepGrid::table(2).unwrap();
        let p = t2.params(1, 0).unwrap();
        assert_eq!((p.n(), p.m(), p.r(), p.k()), (50, 2, 2, 1));

        let t3 = SweepGrid::table(3).unwrap();
        let p = t3.params(4, 1).unwrap();
        assert_eq!((p.n(), p.m(), p.r(), p.k()), (100, 10, 50, 2));
        assert!(SweepGrid::table(4).is_err());
    }

    #[test]
    fn small_sweep_is_ordered() {
        let grid = SweepGrid::new(
            Axis::K,
            RatioTriple::new(0.0, 0.5, 0.5),
            true,
            vec![0.02, 0.24, 0.5, 0.25],
            vec![50],
        );
        let table = sweep(&grid);
        let tokens: Vec<String> = table.cells.iter().map(|r| r[0].token()).collect();
        assert_eq!(tokens, ["68", "2", "inf", "ERR"]);
        assert_eq!(table.failures().len(), 1);
        assert_eq!(table.row("0.24").unwrap()[0], Cell::Mixed(2));
    }
}
