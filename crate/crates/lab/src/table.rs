//! CSV tables: header row, numbers with 17 significant digits, `\n` line ends.

use crate::error::{LabError, Result};
use std::fmt::Write as _;
use std::path::Path;
use wide_core::{DiscreteTrajectory, TimeGrid};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Text(String),
}

impl Cell {
    fn render(&self, out: &mut String) {
        match self {
            // `{:.16e}` prints 17 significant digits, enough to round-trip any f64
            Cell::Num(x) => write!(out, "{x:.16e}"),
            Cell::Int(n) => write!(out, "{n}"),
            Cell::Text(s) => write!(out, "{s}"),
        }
        .expect("writing to a String cannot fail");
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(if b { "true" } else { "false" }.into())
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Table { header: header.iter().map(|s| s.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        self.rows.push(row);
    }

    /// Renders the table, rejecting ragged rows.
    pub fn render(&self) -> Result<String> {
        let mut out = self.header.join(",");
        out.push('\n');
        for (r, row) in self.rows.iter().enumerate() {
            if row.len() != self.header.len() {
                return Err(LabError::Ragged { row: r, got: row.len(), want: self.header.len() });
            }
            for (k, cell) in row.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                cell.render(&mut out);
            }
            out.push('\n');
        }
        Ok(out)
    }
}

/// Writes `table` to `path`.
pub fn emit_table(table: &Table, path: &Path) -> Result<()> {
    let text = table.render()?;
    std::fs::write(path, text).map_err(|source| LabError::Io { path: path.to_path_buf(), source })
}

/// Trajectory table with columns `t, u_1, ..., u_d`.
pub fn trajectory_table(u: &DiscreteTrajectory) -> Table {
    let mut header = vec!["t".to_string()];
    header.extend((1..=u.dim()).map(|k| format!("u_{k}")));
    let mut table = Table { header, rows: Vec::with_capacity(u.len()) };
    for i in 0..u.len() {
        let mut row = vec![Cell::Num(u.grid().t(i))];
        row.extend(u.node(i).iter().map(|&x| Cell::Num(x)));
        table.push(row);
    }
    table
}

/// Reads a table written by [`trajectory_table`]; the grid is rebuilt from
/// the final time and the row count.
pub fn read_trajectory(path: &Path) -> Result<DiscreteTrajectory> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
    let fail = |msg: String| LabError::Format { path: path.to_path_buf(), msg };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| fail("empty file".into()))?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"t") || cols.len() < 2 {
        return Err(fail(format!("unexpected header `{header}`")));
    }
    let dim = cols.len() - 1;
    let (mut times, mut values) = (Vec::new(), Vec::new());
    for (r, line) in lines.enumerate() {
        let cells = line
            .split(',')
            .map(|c| c.parse::<f64>().map_err(|e| fail(format!("row {r}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        if cells.len() != dim + 1 {
            return Err(fail(format!("row {r} has {} cells", cells.len())));
        }
        times.push(cells[0]);
        values.extend_from_slice(&cells[1..]);
    }
    if times.len() < 3 {
        return Err(fail(format!("{} rows is too short for a grid", times.len())));
    }
    let grid = TimeGrid::new(times[times.len() - 1], times.len() - 1).map_err(|e| fail(e.to_string()))?;
    DiscreteTrajectory::new(grid, dim, values).map_err(|e| fail(e.to_string()))
}
