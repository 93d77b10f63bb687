use std::io::Read;
use std::path::Path;

use super::space::{FiniteSpace, Rv};
use crate::error::{input, Result};

/// Scenario table: a `prob` column followed by named random variables.
#[derive(Debug, Clone)]
pub struct ScenarioTable {
    space: FiniteSpace,
    names: Vec<String>,
    columns: Vec<Rv>,
}

/// Tolerance on the probability column sum of ingested tables.
const CSV_PROB_TOL: f64 = 1e-9;

impl ScenarioTable {
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_reader(std::fs::File::open(path)?)
    }

    pub fn from_reader(reader: impl Read) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers()?.clone();
        if headers.get(0) != Some("prob") {
            return input("first CSV column must be named `prob`");
        }
        if headers.len() < 2 {
            return input("scenario table has no variable columns");
        }
        let names: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
        let mut probs = Vec::new();
        let mut cols = vec![Vec::new(); names.len()];
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let parse = |i: usize| -> Result<f64> {
                let cell = rec.get(i).unwrap_or("");
                cell.parse::<f64>()
                    .map_err(|_| crate::RiskError::Input(format!("row {}: cannot parse {cell:?}", row + 1)))
            };
            probs.push(parse(0)?);
            for (j, col) in cols.iter_mut().enumerate() {
                col.push(parse(j + 1)?);
            }
        }
        let space = FiniteSpace::with_tolerance(probs, CSV_PROB_TOL)?;
        let columns = cols.into_iter().map(|c| Rv::new(space.clone(), c)).collect::<Result<_>>()?;
        Ok(ScenarioTable { space, names, columns })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn columns(&self) -> &[Rv] {
        &self.columns
    }

    pub fn column(&self, name: &str) -> Result<&Rv> {
        match self.names.iter().position(|n| n == name) {
            Some(i) => Ok(&self.columns[i]),
            None => input(format!("no column named {name:?}")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_named_columns() {
        let t = ScenarioTable::from_reader("prob,X,Y\n0.25,1,2\n0.75,3,4\n".as_bytes()).unwrap();
        assert_eq!(t.names(), &["X", "Y"]);
        assert_eq!(t.column("Y").unwrap().values(), &[2.0, 4.0]);
        assert_eq!(t.space().probs(), &[0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(ScenarioTable::from_reader("p,X\n1,2\n".as_bytes()).is_err());
        assert!(ScenarioTable::from_reader("prob,X\n0.5,2\n0.4,1\n".as_bytes()).is_err());
        assert!(ScenarioTable::from_reader("prob,X\n1,abc\n".as_bytes()).is_err());
    }
}
