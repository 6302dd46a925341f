use std::collections::{BTreeMap, HashMap};
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    /// Real valued; dyad value is the absolute difference.
    Continuous,
    /// Proportion on `[0, 1]`; dyad value is the absolute difference.
    Proportion,
    /// Two-level factor coded 0/1; dyad value is 0 when equal, 1 otherwise.
    Binary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeColumn {
    pub name: String,
    pub kind: ColumnKind,
    /// Level names of a binary column, in code order.
    pub levels: Vec<String>,
    pub values: Vec<Option<f64>>,
}

/// Divisors applied to raw continuous columns on load, keyed by column name.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitScales(pub BTreeMap<String, f64>);

impl Default for UnitScales {
    /// Fees in £10,000, foundation year in centuries and sixth-form boys in
    /// hundreds.
    fn default() -> Self {
        Self(
            [
                ("fees".to_string(), 10_000.0),
                ("founded".to_string(), 100.0),
                ("sixth_form_boys".to_string(), 100.0),
            ]
            .into_iter()
            .collect(),
        )
    }
}

impl UnitScales {
    pub fn none() -> Self {
        Self(BTreeMap::new())
    }
}

/// Per-node covariates keyed by label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeTable {
    pub labels: Vec<String>,
    pub columns: Vec<NodeColumn>,
    pub latitude: Option<Vec<Option<f64>>>,
    pub longitude: Option<Vec<Option<f64>>>,
}

const BINARY_COLUMNS: &[&str] = &["school_type", "term_type"];

fn classify(name: &str, raw: &[&str]) -> ColumnKind {
    if BINARY_COLUMNS.contains(&name) {
        return ColumnKind::Binary;
    }
    if name.starts_with("pct_") {
        return ColumnKind::Proportion;
    }
    let numeric = raw
        .iter()
        .filter(|s| !s.is_empty())
        .all(|s| s.parse::<f64>().is_ok());
    if numeric {
        ColumnKind::Continuous
    } else {
        ColumnKind::Binary
    }
}

impl NodeTable {
    /// Reads a headered node table whose first column is `label`.
    ///
    /// `lat`/`lon` become coordinates, `school_type`/`term_type` and any
    /// non-numeric column become binary factors, `pct_*` columns must be
    /// proportions on `[0, 1]`, and remaining numeric columns are continuous
    /// and divided by their entry in `scales`. Empty cells are missing values.
    pub fn from_reader<R: Read>(reader: R, scales: &UnitScales) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        let label_col = headers
            .iter()
            .position(|h| h == "label")
            .ok_or_else(|| Error::Load {
                row: 0,
                message: "node table needs a `label` column".into(),
            })?;
        let rows: Vec<csv::StringRecord> = rdr.records().collect::<Result<_, _>>()?;

        let mut labels = Vec::with_capacity(rows.len());
        let mut seen = HashMap::new();
        for (k, r) in rows.iter().enumerate() {
            let l = r.get(label_col).unwrap_or("").to_string();
            if l.is_empty() {
                return Err(Error::Load {
                    row: k + 1,
                    message: "empty label".into(),
                });
            }
            if seen.insert(l.clone(), k).is_some() {
                return Err(Error::Load {
                    row: k + 1,
                    message: format!("duplicate label `{l}`"),
                });
            }
            labels.push(l);
        }

        let mut columns = Vec::new();
        let mut latitude = None;
        let mut longitude = None;
        for (c, name) in headers.iter().enumerate() {
            if c == label_col {
                continue;
            }
            let raw: Vec<&str> = rows.iter().map(|r| r.get(c).unwrap_or("")).collect();
            let parse_numeric = |scale: f64| -> Result<Vec<Option<f64>>> {
                raw.iter()
                    .enumerate()
                    .map(|(k, s)| {
                        if s.is_empty() {
                            return Ok(None);
                        }
                        let v: f64 = s.parse().map_err(|_| Error::Load {
                            row: k + 1,
                            message: format!("column `{name}`: `{s}` is not a number"),
                        })?;
                        if !v.is_finite() {
                            return Err(Error::Load {
                                row: k + 1,
                                message: format!("column `{name}`: non-finite value"),
                            });
                        }
                        Ok(Some(v / scale))
                    })
                    .collect()
            };
            match name.as_str() {
                "lat" => {
                    latitude = Some(parse_numeric(1.0)?);
                    continue;
                }
                "lon" => {
                    longitude = Some(parse_numeric(1.0)?);
                    continue;
                }
                _ => {}
            }
            let kind = classify(name, &raw);
            let column = match kind {
                ColumnKind::Binary => {
                    let mut levels: Vec<String> = Vec::new();
                    let mut values = Vec::with_capacity(raw.len());
                    for s in &raw {
                        if s.is_empty() {
                            values.push(None);
                            continue;
                        }
                        let code = match levels.iter().position(|l| l == s) {
                            Some(p) => p,
                            None => {
                                levels.push(s.to_string());
                                levels.len() - 1
                            }
                        };
                        values.push(Some(code as f64));
                    }
                    if levels.len() > 2 {
                        return Err(Error::Validation(format!(
                            "binary column `{name}` has {} levels: {}",
                            levels.len(),
                            levels.join(", ")
                        )));
                    }
                    NodeColumn {
                        name: name.clone(),
                        kind,
                        levels,
                        values,
                    }
                }
                ColumnKind::Proportion => {
                    let values = parse_numeric(1.0)?;
                    for (k, v) in values.iter().enumerate() {
                        if let Some(v) = v {
                            if !(0.0..=1.0).contains(v) {
                                return Err(Error::Validation(format!(
                                    "node `{}`: proportion `{name}` = {v} is outside [0, 1]",
                                    labels[k]
                                )));
                            }
                        }
                    }
                    NodeColumn {
                        name: name.clone(),
                        kind,
                        levels: Vec::new(),
                        values,
                    }
                }
                ColumnKind::Continuous => {
                    let scale = scales.0.get(name).copied().unwrap_or(1.0);
                    NodeColumn {
                        name: name.clone(),
                        kind,
                        levels: Vec::new(),
                        values: parse_numeric(scale)?,
                    }
                }
            };
            columns.push(column);
        }
        Ok(Self {
            labels,
            columns,
            latitude,
            longitude,
        })
    }

    pub fn from_path(path: &Path, scales: &UnitScales) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::from_reader(file, scales)
    }

    pub fn column(&self, name: &str) -> Option<&NodeColumn> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn row_of(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn covariate_names(&self) -> Vec<String> {
        self.columns.iter().map(|c| c.name.clone()).collect()
    }

    /// Latitude and longitude of `label`, when both are present.
    pub fn coordinates(&self, label: &str) -> Option<(f64, f64)> {
        let r = self.row_of(label)?;
        let lat = self.latitude.as_ref()?[r]?;
        let lon = self.longitude.as_ref()?[r]?;
        Some((lat, lon))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const CSV: &str = "\
label,fees,founded,sixth_form_boys,pct_boys,pct_boarders,school_type,term_type,rating,lat,lon
a,35000,1552,120,1.0,1.0,private,two,2.5,51.5,-0.1
b,0,1905,80,0.5,0.0,state,one,1.0,52.0,-1.0
c,12000,,60,0.6,0.2,private,one,3.1,53.0,-2.0
";

    #[test]
    fn parses_and_scales_columns() {
        let t = NodeTable::from_reader(CSV.as_bytes(), &UnitScales::default()).unwrap();
        assert_eq!(t.labels, vec!["a", "b", "c"]);
        let fees = t.column("fees").unwrap();
        assert_eq!(fees.kind, ColumnKind::Continuous);
        assert_eq!(fees.values[0], Some(3.5));
        assert_eq!(t.column("founded").unwrap().values[0], Some(15.52));
        assert_eq!(t.column("founded").unwrap().values[2], None);
        assert_eq!(t.column("pct_boys").unwrap().kind, ColumnKind::Proportion);
        let st = t.column("school_type").unwrap();
        assert_eq!(st.kind, ColumnKind::Binary);
        assert_eq!(st.levels, vec!["private", "state"]);
        assert_eq!(t.coordinates("b"), Some((52.0, -1.0)));
        assert!(t.column("lat").is_none());
    }

    #[test]
    fn rejects_percentages_outside_unit_interval() {
        let csv = "label,pct_boys\na,55\n";
        let err = NodeTable::from_reader(csv.as_bytes(), &UnitScales::default()).unwrap_err();
        assert!(matches!(err, Error::Validation(_)));
    }

    #[test]
    fn rejects_three_level_binary() {
        let csv = "label,school_type\na,x\nb,y\nc,z\n";
        assert!(NodeTable::from_reader(csv.as_bytes(), &UnitScales::default()).is_err());
    }

    #[test]
    fn rejects_duplicate_labels() {
        let csv = "label,fees\na,1\na,2\n";
        assert!(NodeTable::from_reader(csv.as_bytes(), &UnitScales::default()).is_err());
    }
}
