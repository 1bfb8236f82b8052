use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::Value;

use crate::config::{Destination, Format};

/// Formats a float with 12 significant digits, `%.12g` style.
pub fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    fmt_sig12(x).parse().unwrap_or(x)
}

#[derive(Clone, Debug)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_sig12(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) => Value::from(round12(*x)),
            Cell::Int(i) => Value::from(*i),
            Cell::Text(s) => Value::from(s.clone()),
            Cell::Empty => Value::Null,
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(i: usize) -> Self {
        Cell::Int(i as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Text(b.to_string())
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Table {
            columns: columns.to_vec(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(&self.columns)?;
        for row in &self.rows {
            wr.write_record(row.iter().map(Cell::csv))?;
        }
        wr.flush()?;
        Ok(())
    }

    /// Array of row objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let obj = self
                        .columns
                        .iter()
                        .zip(row)
                        .map(|(c, v)| (c.to_string(), v.json()))
                        .collect();
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

/// Serializes `v` and rounds every float in it to 12 significant digits.
pub fn rounded_json<T: Serialize>(v: &T) -> Result<Value> {
    let mut value = serde_json::to_value(v)?;
    round_floats(&mut value);
    Ok(value)
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            *v = Value::from(round12(n.as_f64().unwrap_or(f64::NAN)));
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn open(dest: &Destination) -> Result<Box<dyn Write>> {
    Ok(match dest {
        Destination::Stdout => Box::new(BufWriter::new(io::stdout().lock())),
        Destination::File(p) => {
            if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(dir)
                    .with_context(|| format!("creating {}", dir.display()))?;
            }
            Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("creating {}", p.display()))?,
            ))
        }
    })
}

pub fn write_json(dest: &Destination, value: &Value) -> Result<()> {
    let mut w = open(dest)?;
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    log_written(dest);
    Ok(())
}

pub fn write_table(dest: &Destination, format: Format, table: &Table) -> Result<()> {
    match format {
        Format::Json => write_json(dest, &table.to_json()),
        Format::Csv => {
            let mut w = open(dest)?;
            table.write_csv(&mut w)?;
            w.flush()?;
            log_written(dest);
            Ok(())
        }
    }
}

/// Writes a main table and a companion table. CSV goes to two files (the
/// companion gets `suffix` appended to the file stem) or, on stdout, to two
/// blocks separated by a blank line. JSON is a single object with both.
pub fn write_pair(
    dest: &Destination,
    format: Format,
    main: (&str, &Table),
    companion: (&str, &Table),
    suffix: &str,
) -> Result<()> {
    match (format, dest) {
        (Format::Json, _) => {
            let mut obj = serde_json::Map::new();
            obj.insert(main.0.to_string(), main.1.to_json());
            obj.insert(companion.0.to_string(), companion.1.to_json());
            write_json(dest, &Value::Object(obj))
        }
        (Format::Csv, Destination::Stdout) => {
            let mut w = open(dest)?;
            main.1.write_csv(&mut w)?;
            writeln!(w)?;
            companion.1.write_csv(&mut w)?;
            w.flush()?;
            Ok(())
        }
        (Format::Csv, Destination::File(p)) => {
            write_table(dest, format, main.1)?;
            write_table(
                &Destination::File(companion_path(p, suffix)),
                format,
                companion.1,
            )
        }
    }
}

pub fn companion_path(p: &Path, suffix: &str) -> PathBuf {
    let stem = p
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match p.extension() {
        Some(ext) => format!("{stem}{suffix}.{}", ext.to_string_lossy()),
        None => format!("{stem}{suffix}"),
    };
    p.with_file_name(name)
}

fn log_written(dest: &Destination) {
    if let Destination::File(p) = dest {
        log::info!("wrote {}", p.display());
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(-0.0), "0");
        assert_eq!(fmt_sig12(1.0), "1");
        assert_eq!(fmt_sig12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(fmt_sig12(-0.1), "-0.1");
        assert_eq!(fmt_sig12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_sig12(123456789012345.0), "1.23456789012e14");
        assert_eq!(fmt_sig12(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig12(0.99999999999999), "1");
        assert_eq!(fmt_sig12(2.5e-5), "0.000025");
    }

    #[test]
    fn rounding_is_idempotent() {
        for x in [0.1234567890123456, 1e-9 / 3.0, 7.0 / 18.0] {
            assert_eq!(round12(round12(x)), round12(x));
            assert_eq!(fmt_sig12(round12(x)), fmt_sig12(x));
        }
    }

    #[test]
    fn csv_has_header() {
        let mut t = Table::new(&["a", "b", "c"]);
        t.push(vec![1.0.into(), Cell::Empty, "x".into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b,c\n1,,x\n");
    }

    #[test]
    fn json_rounding() {
        let v = rounded_json(&vec![1.0 / 3.0, 2.0]).unwrap();
        assert_eq!(v.to_string(), "[0.333333333333,2.0]");
    }

    #[test]
    fn companion_names() {
        assert_eq!(
            companion_path(Path::new("out/fig3.csv"), "_maxima"),
            Path::new("out/fig3_maxima.csv")
        );
        assert_eq!(companion_path(Path::new("data"), "_x"), Path::new("data_x"));
    }
}
