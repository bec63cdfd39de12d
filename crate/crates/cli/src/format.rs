//! Number formatting and the writers shared by every command.
//!
//! Machine-readable files carry 17 significant digits, enough to recover every
//! `f64` exactly; terminal output carries 4.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{CliError, CliResult};

/// Version stamped into every output file.
pub const SCHEMA_VERSION: u32 = 1;

/// 17 significant digits; non-finite values print as `NaN`, `inf` or `-inf`.
pub fn machine(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

/// 4 significant digits, switching to scientific notation for very large or
/// very small magnitudes.
pub fn human(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if (-4..6).contains(&mag) {
        format!("{:.*}", (3 - mag).max(0) as usize, x)
    } else {
        format!("{x:.3e}")
    }
}

/// Pretty JSON with floats written through [`machine`]. Non-finite floats
/// become `null` before reaching the formatter.
struct SigFormatter(PrettyFormatter<'static>);

macro_rules! delegate {
    ($($name:ident),*) => {
        $(
            fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
                self.0.$name(w)
            }
        )*
    };
}

impl Formatter for SigFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(machine(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    delegate!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        begin_object_value,
        end_object_value
    );
}

fn output_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Output(format!("{}: {e}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let file = File::create(path).map_err(|e| output_err(path, e))?;
    let mut w = BufWriter::new(file);
    let mut ser =
        serde_json::Serializer::with_formatter(&mut w, SigFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).map_err(|e| output_err(path, e))?;
    w.write_all(b"\n").map_err(|e| output_err(path, e))?;
    w.flush().map_err(|e| output_err(path, e))
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let file = File::open(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))?;
    serde_json::from_reader(io::BufReader::new(file))
        .map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// A row of a machine-readable CSV file.
pub trait CsvRow: DeserializeOwned {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

pub fn write_csv<R: CsvRow>(path: &Path, rows: &[R]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| output_err(path, e))?;
    w.write_record(R::HEADER).map_err(|e| output_err(path, e))?;
    for row in rows {
        w.write_record(row.fields())
            .map_err(|e| output_err(path, e))?;
    }
    w.flush().map_err(|e| output_err(path, e))
}

/// Reads a file written by [`write_csv`], checking the header and version.
pub fn read_csv<R: CsvRow>(path: &Path) -> CliResult<Vec<R>> {
    let bad = |e: &dyn std::fmt::Display| CliError::Data(format!("{}: {e}", path.display()));
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(&e))?;
    let header = rdr.headers().map_err(|e| bad(&e))?;
    if header.iter().ne(R::HEADER.iter().copied()) {
        return Err(bad(&"unexpected header"));
    }
    rdr.deserialize()
        .map(|row| row.map_err(|e| bad(&e)))
        .collect()
}

pub fn opt(x: Option<f64>) -> String {
    x.map(machine).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn machine_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02e23, f64::MIN_POSITIVE, 1.0] {
            let s = machine(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let digits = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(digits.len(), 17);
        }
        assert_eq!(machine(f64::NAN), "NaN");
    }

    #[test]
    fn human_format_has_four_significant_digits() {
        assert_eq!(human(1.00123), "1.001");
        assert_eq!(human(-0.0201234), "-0.02012");
        assert_eq!(human(123.456), "123.5");
        assert_eq!(human(1234567.0), "1.235e6");
        assert_eq!(human(0.0), "0");
    }

    #[test]
    fn json_floats_round_trip_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.json");
        let v = vec![0.1, 1.0 / 3.0, -7.25e-12, 1e300];
        write_json(&path, &v).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("3.3333333333333331e-1"));
        assert_eq!(read_json::<Vec<f64>>(&path).unwrap(), v);
    }
}
