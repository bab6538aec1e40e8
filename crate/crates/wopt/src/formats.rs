//! JSON and CSV file formats.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use wopt_core::{PiecewiseLinearGenerator, SampleCloud, WalkSolution, WeightedVoronoi};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BreakpointJson {
    pub u: f64,
    pub p: Vec<f64>,
}

/// `{"k": K, "breakpoints": [{"u": .., "p": [..]}, ..], ...extra}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorJson {
    pub k: f64,
    pub breakpoints: Vec<BreakpointJson>,
    /// Additional summary fields (`w1`, `k_lower`, ...), kept in order.
    #[serde(flatten)]
    pub extra: Map<String, Value>,
}

impl GeneratorJson {
    pub fn from_generator(g: &PiecewiseLinearGenerator) -> Self {
        let breakpoints = (0..g.num_breakpoints())
            .map(|j| BreakpointJson {
                u: g.breakpoints()[j],
                p: g.value(j).to_vec(),
            })
            .collect();
        Self {
            k: g.lipschitz_bound(),
            breakpoints,
            extra: Map::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl Serialize) -> Self {
        self.extra.insert(
            key.to_owned(),
            serde_json::to_value(value).expect("serializable value"),
        );
        self
    }

    pub fn to_generator(&self) -> Result<PiecewiseLinearGenerator> {
        let Some(first) = self.breakpoints.first() else {
            bail!("generator has no breakpoints");
        };
        let dim = first.p.len();
        if self.breakpoints.iter().any(|b| b.p.len() != dim) {
            bail!("breakpoint points have inconsistent dimensions");
        }
        if self.breakpoints.len() == 1 {
            return Ok(PiecewiseLinearGenerator::constant(&first.p, self.k)?);
        }
        let us = self.breakpoints.iter().map(|b| b.u).collect();
        let values = self
            .breakpoints
            .iter()
            .flat_map(|b| b.p.iter().copied())
            .collect();
        Ok(PiecewiseLinearGenerator::new(self.k, us, values, dim)?)
    }
}

/// `{"order": [..], "k": .., "cost": .., "exact": ..}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkJson {
    pub order: Vec<usize>,
    pub k: usize,
    pub cost: f64,
    pub exact: bool,
}

impl From<&WalkSolution> for WalkJson {
    fn from(w: &WalkSolution) -> Self {
        Self {
            order: w.order.clone(),
            k: w.k,
            cost: w.cost,
            exact: w.exact,
        }
    }
}

impl WalkJson {
    pub fn to_walk(&self, cloud: &SampleCloud) -> Result<WalkSolution> {
        let w = WalkSolution {
            order: self.order.clone(),
            k: self.k,
            cost: self.cost,
            exact: self.exact,
        };
        w.validate(cloud)?;
        Ok(w)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightsJson {
    pub atoms: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub alpha: Vec<f64>,
    pub residual: f64,
    pub cell_masses: Vec<f64>,
}

impl WeightsJson {
    pub fn new(vor: &WeightedVoronoi, residual: f64, cell_masses: Vec<f64>) -> Self {
        Self {
            atoms: vor.atoms().points().map(<[f64]>::to_vec).collect(),
            weights: vor.weights().to_vec(),
            alpha: vor.target_masses().to_vec(),
            residual,
            cell_masses,
        }
    }
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    serde_json::from_reader(BufReader::new(file))
        .with_context(|| format!("cannot parse {}", path.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

/// Points as CSV rows of coordinates. `has_header` skips the first line.
pub fn parse_points_csv<R: Read>(reader: R, has_header: bool) -> Result<SampleCloud> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut coords = Vec::new();
    let mut dim = None;
    for (line, record) in rdr.records().enumerate() {
        let record = record?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        let row: Vec<f64> = record
            .iter()
            .map(|f| {
                f.parse::<f64>()
                    .with_context(|| format!("row {}: bad number {f:?}", line + 1))
            })
            .collect::<Result<_>>()?;
        match dim {
            None => dim = Some(row.len()),
            Some(d) if d != row.len() => {
                bail!("row {} has {} columns, expected {d}", line + 1, row.len())
            }
            _ => {}
        }
        coords.extend(row);
    }
    let Some(dim) = dim else {
        bail!("no data rows");
    };
    Ok(SampleCloud::new(coords, dim)?)
}

pub fn read_points_csv(path: &Path, has_header: bool) -> Result<SampleCloud> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    parse_points_csv(file, has_header).with_context(|| format!("while reading {}", path.display()))
}

pub fn write_points_csv(path: &Path, cloud: &SampleCloud) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for p in cloud.points() {
        w.write_record(p.iter().map(f64::to_string))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_round_trip() {
        let g = PiecewiseLinearGenerator::new(
            2.0,
            vec![0.0, 0.25, 0.75, 1.0],
            vec![0.0, 0.0, 1.0, 1.0],
            1,
        )
        .unwrap();
        let json = GeneratorJson::from_generator(&g).with("w1", 0.125);
        let text = serde_json::to_string(&json).unwrap();
        assert!(text.starts_with(r#"{"k":2.0,"breakpoints":[{"u":0.0,"p":[0.0]}"#));
        assert!(text.ends_with(r#""w1":0.125}"#));
        let back: GeneratorJson = serde_json::from_str(&text).unwrap();
        assert_eq!(back.to_generator().unwrap(), g);
    }

    #[test]
    fn invalid_generators_are_rejected() {
        let text = r#"{"k": 1.0, "breakpoints": [{"u": 0.0, "p": [0.0]}, {"u": 1.0, "p": [5.0]}]}"#;
        let json: GeneratorJson = serde_json::from_str(text).unwrap();
        assert!(json.to_generator().is_err());
        let text =
            r#"{"k": 1.0, "breakpoints": [{"u": 0.0, "p": [0.0]}, {"u": 1.0, "p": [0.5, 1.0]}]}"#;
        let json: GeneratorJson = serde_json::from_str(text).unwrap();
        assert!(json.to_generator().is_err());
    }

    #[test]
    fn csv_with_and_without_header() {
        let c = parse_points_csv("x,y\n1,2\n3,4\n".as_bytes(), true).unwrap();
        assert_eq!((c.len(), c.dim()), (2, 2));
        assert_eq!(c.point(1), &[3.0, 4.0]);
        let c = parse_points_csv("0.5\n1.5\n".as_bytes(), false).unwrap();
        assert_eq!(c.coords(), &[0.5, 1.5]);
        assert!(parse_points_csv("x\n1\n".as_bytes(), false).is_err());
        assert!(parse_points_csv("1,2\n3\n".as_bytes(), false).is_err());
    }
}
