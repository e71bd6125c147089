//! CSV result tables with a `#` provenance header.

use std::path::Path;

use crate::analysis::{
    BucklingSweepResult, ConvergenceRow, FrequencyResult, LengthSweep, ModeSelection, ParameterRow,
};
use crate::error::{Error, Result};
use crate::io::config::RunConfig;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format_sig(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
}

/// Ordered `key: value` lines written as `# key: value`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Provenance {
    pub entries: Vec<(String, String)>,
}

impl Provenance {
    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.entries.push((key.to_owned(), value.to_string()));
        self
    }

    /// Config hash, technique and solver tolerances.
    pub fn from_config(cfg: &RunConfig) -> Result<Self> {
        let s = &cfg.solver;
        Ok(Provenance::default()
            .with(
                "generator",
                concat!("shellcrack ", env!("CARGO_PKG_VERSION")),
            )
            .with("config_sha256", cfg.hash()?)
            .with("analysis", cfg.analysis.kind.name())
            .with("technique", cfg.technique.name())
            .with("residual_tol", format!("{:e}", s.residual_tol))
            .with("quadrature_tol", format!("{:e}", s.quadrature_tol))
            .with("penalty_alpha", format!("{:e}", s.penalty_alpha))
            .with("gauss_points", s.gauss_points))
    }
}

/// Six significant digits, fixed notation for exponents in [-4, 6),
/// trailing zeros trimmed.
pub fn format_sig(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.5e}");
    let (mant, exp) = sci.split_once('e').expect("exponent present");
    let e: i32 = exp.parse().expect("integer exponent");
    if (-4..6).contains(&e) {
        let s = format!("{:.*}", (5 - e) as usize, x);
        trim_zeros(&s).to_owned()
    } else {
        format!("{}e{}", trim_zeros(mant), e)
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Renders header and CSV body.
pub fn render_table(table: &Table, provenance: &Provenance) -> Result<String> {
    if table.is_empty() {
        return Err(Error::EmptyTable);
    }
    let mut out = String::new();
    for (k, v) in &provenance.entries {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(Cell::render))?;
    }
    let body = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    out.push_str(&String::from_utf8(body).expect("CSV output is UTF-8"));
    Ok(out)
}

/// Writes the table; nothing is created when it is empty.
pub fn write_table(table: &Table, provenance: &Provenance, path: &Path) -> Result<()> {
    let text = render_table(table, provenance)?;
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, text)?;
    Ok(())
}

pub fn buckling_table(sweep: &BucklingSweepResult) -> Table {
    let mut t = Table::new(&[
        "n",
        "lambda",
        "normalized_load",
        "critical_resultant",
        "strain_energy",
        "residual",
    ]);
    for r in &sweep.rows {
        t.push(vec![
            r.n.into(),
            r.lambda.into(),
            r.normalized_load.into(),
            r.critical_resultant.into(),
            r.strain_energy.into(),
            r.residual.into(),
        ]);
    }
    t
}

/// One row per parameter value, one column per labelled series.
pub fn parameter_table(
    parameter: &str,
    series: &[(&str, &[ParameterRow])],
    selection: ModeSelection,
) -> Result<Table> {
    let mut columns = vec![parameter.to_owned()];
    columns.extend(series.iter().map(|(label, _)| label.to_string()));
    let mut t = Table {
        columns,
        rows: Vec::new(),
    };
    let len = series.first().map_or(0, |s| s.1.len());
    if series.iter().any(|s| s.1.len() != len) {
        return Err(Error::invalid(
            "series",
            "all series need the same parameter grid",
        ));
    }
    for i in 0..len {
        let mut row = vec![Cell::Num(series[0].1[i].parameter)];
        for (_, rows) in series {
            row.push(rows[i].sweep.select(selection)?.normalized_load.into());
        }
        t.push(row);
    }
    Ok(t)
}

pub fn frequency_table(result: &FrequencyResult) -> Table {
    let mut t = Table::new(&[
        "n",
        "mode_index",
        "omega",
        "frequency_parameter",
        "w_fraction",
    ]);
    for r in &result.rows {
        t.push(vec![
            r.n.into(),
            r.mode_index.into(),
            r.omega.into(),
            r.frequency_parameter.into(),
            r.w_fraction.into(),
        ]);
    }
    t
}

/// Wall time is omitted when `timing` is false so reruns stay byte-identical.
pub fn convergence_table(rows: &[ConvergenceRow], timing: bool) -> Table {
    let mut cols = vec![
        "n_elements",
        "element_size",
        "critical_n",
        "lambda",
        "normalized_load",
        "strain_energy",
    ];
    if timing {
        cols.push("wall_time_s");
    }
    let mut t = Table::new(&cols);
    for r in rows {
        let mut row: Vec<Cell> = vec![
            r.n_elements.into(),
            r.element_size.into(),
            r.critical_n.into(),
            r.lambda.into(),
            r.normalized_load.into(),
            r.strain_energy.into(),
        ];
        if timing {
            row.push(r.wall_time.into());
        }
        t.push(row);
    }
    t
}

pub fn length_table(sweep: &LengthSweep) -> Table {
    let mut t = Table::new(&["L", "normalized_load", "critical_n", "asymptotic"]);
    for r in &sweep.rows {
        let asym = sweep.asymptote_length.is_some_and(|a| r.length >= a);
        t.push(vec![
            r.length.into(),
            r.normalized_load.into(),
            r.critical_n.into(),
            Cell::Int(asym as i64),
        ]);
    }
    t
}
