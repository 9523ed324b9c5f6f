//! Result tables: one row per estimate, written as JSON or CSV.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub experiment: String,
    /// Parameter tuple, e.g. `kappa=3;pattern=2;1-4,2-3`.
    pub params: String,
    pub estimate: f64,
    pub std_error: f64,
    pub count: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ResultTable {
    pub rows: Vec<ResultRow>,
}

impl ResultTable {
    pub fn new() -> Self {
        ResultTable::default()
    }

    pub fn push(&mut self, experiment: &str, params: String, estimate: f64, std_error: f64, count: usize) -> Result<()> {
        if !(std_error >= 0.0) || count == 0 {
            return Err(Error::Statistics(format!(
                "row {params}: standard error {std_error} and count {count} must be nonnegative and positive"
            )));
        }
        self.rows.push(ResultRow { experiment: experiment.to_string(), params, estimate, std_error, count });
        Ok(())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tables serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("experiment,params,estimate,std_error,count\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},\"{}\",{},{},{}\n",
                r.experiment, r.params, r.estimate, r.std_error, r.count
            ));
        }
        out
    }

    /// Writes `<stem>.json` and `<stem>.csv` into `dir`.
    pub fn write(&self, dir: &Path, stem: &str) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join(format!("{stem}.json")), self.to_json())?;
        std::fs::write(dir.join(format!("{stem}.csv")), self.to_csv())?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_validate_and_round_trip() {
        let mut t = ResultTable::new();
        t.push("x", "a=1".into(), 0.5, 0.1, 10).unwrap();
        assert!(t.push("x", "a=2".into(), 0.5, -0.1, 10).is_err());
        assert!(t.push("x", "a=2".into(), 0.5, 0.1, 0).is_err());
        assert_eq!(ResultTable::from_json(&t.to_json()).unwrap(), t);
        assert_eq!(t.to_csv().lines().count(), 2);
    }
}
