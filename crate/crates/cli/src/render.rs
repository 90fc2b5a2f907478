use serde::Serialize;

use crate::args::Format;

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

/// Rows with named columns, the common shape of every command's output.
#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&'static str]) -> Self {
        Self {
            headers: headers.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }
}

/// A command result: tabular view for table/csv, serde view for json.
pub struct Output {
    pub table: Table,
    pub json: serde_json::Value,
    /// Replaces the aligned table in `table` format.
    pub text: Option<String>,
}

impl Output {
    pub fn new<T: Serialize>(table: Table, value: &T) -> Self {
        Self {
            table,
            json: serde_json::to_value(value).expect("output types serialize"),
            text: None,
        }
    }

    pub fn with_text(mut self, text: String) -> Self {
        self.text = Some(text);
        self
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Table => match &self.text {
                Some(t) => format!("{t}\n"),
                None => render_table(&self.table),
            },
            Format::Csv => render_csv(&self.table),
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json).expect("json values serialize");
                s.push('\n');
                s
            }
        }
    }
}

/// `%g`-style formatting with `sig` significant digits.
pub fn fmt_g(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format has an exponent");
    let exp: i32 = exp.parse().expect("exponent is an integer");
    if exp < -4 || exp >= sig as i32 {
        let m = strip_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        strip_zeros(&format!("{:.*}", decimals, x)).to_owned()
    }
}

fn strip_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn table_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => fmt_g(*v, 6),
        Cell::Text(t) => t.clone(),
    }
}

fn render_table(t: &Table) -> String {
    let cells: Vec<Vec<String>> = t.rows.iter().map(|r| r.iter().map(table_cell).collect()).collect();
    let mut widths: Vec<usize> = t.headers.iter().map(|h| h.chars().count()).collect();
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |items: Vec<&str>| -> String {
        let parts: Vec<String> = items
            .iter()
            .zip(&widths)
            .map(|(s, &w)| format!("{}{s}", " ".repeat(w - s.chars().count())))
            .collect();
        let mut l = parts.join("  ");
        l.push('\n');
        l
    };
    let mut out = line(t.headers.clone());
    for row in &cells {
        out.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    out
}

fn csv_cell(c: &Cell) -> String {
    match c {
        Cell::Num(v) => format!("{v:?}"),
        Cell::Text(t) if t.contains([',', '"', '\n']) => format!("\"{}\"", t.replace('"', "\"\"")),
        Cell::Text(t) => t.clone(),
    }
}

fn render_csv(t: &Table) -> String {
    let mut out = t.headers.join(",");
    out.push('\n');
    for row in &t.rows {
        out.push_str(&row.iter().map(csv_cell).collect::<Vec<_>>().join(","));
        out.push('\n');
    }
    out
}
