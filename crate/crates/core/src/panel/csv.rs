use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{IndividualBlock, PanelDataset, DEFAULT_MAX_PERIODS};
use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Real;

/// Maps CSV column names to panel roles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ColumnSchema {
    #[serde(default = "default_id")]
    pub id: String,
    #[serde(default = "default_time")]
    pub time: String,
    pub y: String,
    pub x1: String,
    #[serde(default)]
    pub exog: Vec<String>,
    pub instruments: Vec<String>,
}

fn default_id() -> String {
    "id".into()
}

fn default_time() -> String {
    "time".into()
}

struct Record<T> {
    time: i64,
    line: usize,
    y: T,
    x1: T,
    exog: Vec<T>,
    inst: Vec<T>,
}

/// Reads a long-format panel CSV: one row per `(id, time)`.
pub fn load_csv<T: Real>(path: impl AsRef<Path>, schema: &ColumnSchema) -> Result<PanelDataset<T>> {
    let file = std::fs::File::open(path.as_ref())
        .map_err(|e| Error::Io(format!("{}: {e}", path.as_ref().display())))?;
    read_panel(file, schema)
}

pub fn read_panel<T: Real, R: Read>(reader: R, schema: &ColumnSchema) -> Result<PanelDataset<T>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Parse {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let id_c = col(&schema.id)?;
    let time_c = col(&schema.time)?;
    let y_c = col(&schema.y)?;
    let x1_c = col(&schema.x1)?;
    let exog_c = schema
        .exog
        .iter()
        .map(|n| col(n))
        .collect::<Result<Vec<_>>>()?;
    let inst_c = schema
        .instruments
        .iter()
        .map(|n| col(n))
        .collect::<Result<Vec<_>>>()?;
    if inst_c.is_empty() {
        return Err(Error::InvalidInput("schema lists no instruments".into()));
    }

    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<Record<T>>> = HashMap::new();
    for (k, rec) in rdr.records().enumerate() {
        let line = k + 2;
        let rec = rec.map_err(|e| Error::Parse {
            row: line,
            message: e.to_string(),
        })?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let num = |c: usize| -> Result<T> {
            let raw = field(c);
            let v: f64 = raw.parse().map_err(|_| Error::Parse {
                row: line,
                message: format!("column `{}` has non-numeric value `{raw}`", &headers[c]),
            })?;
            if !v.is_finite() {
                return Err(Error::Parse {
                    row: line,
                    message: format!("column `{}` has non-finite value `{raw}`", &headers[c]),
                });
            }
            Ok(T::lit(v))
        };
        let id = field(id_c).to_string();
        if id.is_empty() {
            return Err(Error::Parse {
                row: line,
                message: "empty id".into(),
            });
        }
        let raw_time = field(time_c);
        let time: i64 = raw_time.parse().map_err(|_| Error::Parse {
            row: line,
            message: format!("time value `{raw_time}` is not an integer"),
        })?;
        let record = Record {
            time,
            line,
            y: num(y_c)?,
            x1: num(x1_c)?,
            exog: exog_c.iter().map(|&c| num(c)).collect::<Result<_>>()?,
            inst: inst_c.iter().map(|&c| num(c)).collect::<Result<_>>()?,
        };
        groups
            .entry(id.clone())
            .or_insert_with(|| {
                order.push(id);
                Vec::new()
            })
            .push(record);
    }
    if order.is_empty() {
        return Err(Error::InvalidInput("CSV has no data rows".into()));
    }

    let mut blocks = Vec::with_capacity(order.len());
    for id in order {
        let mut recs = groups.remove(&id).expect("grouped id");
        recs.sort_by_key(|r| r.time);
        if let Some(w) = recs.windows(2).find(|w| w[0].time == w[1].time) {
            return Err(Error::Parse {
                row: w[1].line,
                message: format!("duplicate (id, time) = ({id}, {})", w[1].time),
            });
        }
        if recs.len() < 2 {
            return Err(Error::Parse {
                row: recs[0].line,
                message: format!("individual `{id}` has T_i < 2"),
            });
        }
        let t = recs.len();
        let exog = Matrix::from_fn(t, exog_c.len(), |r, c| recs[r].exog[c]);
        let inst = Matrix::from_fn(t, inst_c.len(), |r, c| recs[r].inst[c]);
        blocks.push(IndividualBlock {
            id,
            times: recs.iter().map(|r| r.time).collect(),
            y: recs.iter().map(|r| r.y).collect(),
            x1: recs.iter().map(|r| r.x1).collect(),
            x_exog: exog,
            z: inst,
        });
    }
    PanelDataset::with_names(
        blocks,
        schema.exog.clone(),
        schema.instruments.clone(),
        DEFAULT_MAX_PERIODS,
    )
}

/// Writes `data` in the long format read by [`read_panel`], with column names
/// taken from `schema` and values printed with 17 significant digits.
pub fn write_panel<T: Real, W: Write>(
    writer: W,
    data: &PanelDataset<T>,
    schema: &ColumnSchema,
) -> Result<()> {
    if schema.exog.len() != data.n_exog() || schema.instruments.len() != data.n_inst() {
        return Err(Error::Dimension(format!(
            "schema names {} exogenous and {} instrument columns, panel has {} and {}",
            schema.exog.len(),
            schema.instruments.len(),
            data.n_exog(),
            data.n_inst()
        )));
    }
    let io = |e: csv::Error| Error::Io(e.to_string());
    let mut wtr = csv::Writer::from_writer(writer);
    let mut header = vec![&schema.id, &schema.time, &schema.y, &schema.x1];
    header.extend(schema.exog.iter().chain(&schema.instruments));
    wtr.write_record(header).map_err(io)?;
    let num = |v: T| format!("{:.16e}", v.as_f64());
    for b in data.individuals() {
        for t in 0..b.periods() {
            let mut row = vec![
                b.id.clone(),
                b.times[t].to_string(),
                num(b.y[t]),
                num(b.x1[t]),
            ];
            row.extend((0..b.x_exog.cols()).map(|c| num(b.x_exog[(t, c)])));
            row.extend((0..b.z.cols()).map(|c| num(b.z[(t, c)])));
            wtr.write_record(&row).map_err(io)?;
        }
    }
    wtr.flush().map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> ColumnSchema {
        ColumnSchema {
            id: "id".into(),
            time: "time".into(),
            y: "y".into(),
            x1: "x1".into(),
            exog: vec!["x2".into()],
            instruments: vec!["z".into()],
        }
    }

    fn parse(text: &str) -> Result<PanelDataset<f64>> {
        read_panel(text.as_bytes(), &schema())
    }

    #[test]
    fn write_then_read_is_exact() {
        let data = crate::simulation::gen_dgp1(&crate::simulation::DgpConfig::new(2.0, 12, 3, 4))
            .unwrap()
            .data;
        let mut buf = Vec::new();
        write_panel(&mut buf, &data, &schema()).unwrap();
        assert_eq!(parse(std::str::from_utf8(&buf).unwrap()).unwrap(), data);
    }

    #[test]
    fn four_rows_two_ids() {
        let p = parse("id,time,y,x1,x2,z\na,2,1,2,3,4\na,1,5,6,7,8\nb,1,0,0,0,1\nb,2,1,1,1,2\n")
            .unwrap();
        assert_eq!(p.n(), 2);
        assert!(p.individuals().iter().all(|b| b.periods() == 2));
        // sorted by time within id
        assert_eq!(p.individuals()[0].y, vec![5.0, 1.0]);
        assert_eq!(p.individuals()[0].times, vec![1, 2]);
    }

    #[test]
    fn duplicate_key_is_named() {
        let err = parse("id,time,y,x1,x2,z\na,1,1,2,3,4\na,1,5,6,7,8\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("duplicate (id, time) = (a, 1)"), "{msg}");
    }

    #[test]
    fn single_row_individual_rejected() {
        let err = parse("id,time,y,x1,x2,z\na,1,1,2,3,4\na,2,5,6,7,8\nb,1,0,0,0,0\n").unwrap_err();
        assert!(err.to_string().contains("T_i < 2"));
        assert!(matches!(err, Error::Parse { row: 4, .. }));
    }

    #[test]
    fn missing_column_and_bad_cell() {
        let err = parse("id,time,y,x1,z\na,1,1,2,4\n").unwrap_err();
        assert_eq!(err, Error::MissingColumn("x2".into()));
        let err = parse("id,time,y,x1,x2,z\na,1,1,oops,3,4\na,2,1,2,3,4\n").unwrap_err();
        assert!(matches!(err, Error::Parse { row: 2, .. }));
        assert!(err.to_string().contains("x1"));
        let err = parse("id,time,y,x1,x2,z\na,1.5,1,2,3,4\n").unwrap_err();
        assert!(err.to_string().contains("not an integer"));
    }

    #[test]
    fn reads_from_disk() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        std::fs::write(&path, "id,time,y,x1,x2,z\na,1,1,2,3,4\na,2,5,6,7,8\n").unwrap();
        let p: PanelDataset<f32> = load_csv(&path, &schema()).unwrap();
        assert_eq!(p.total_obs(), 2);
        assert!(load_csv::<f64>(dir.path().join("missing.csv"), &schema()).is_err());
    }
}
