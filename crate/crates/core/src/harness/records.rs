//! Result records: line-delimited JSON plus a flat CSV export.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Result, SsrError};
use crate::laminate::{lamination_parameters, ComponentMask, LaminationParameters, PlyAngleSet, StackingSequence};
use crate::objective::{distance, ConstraintWeights, ViolationReport};

pub const CSV_COLUMNS: [&str; 8] = ["instance_id", "solver", "N", "config_hash", "distance", "valid", "runtime_s", "seed"];

/// Constraint checks at their default limits, independent of the solver's penalties.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidityFlags {
    pub disorientation: bool,
    pub contiguity: bool,
    pub balanced: bool,
    pub ten_percent: bool,
    pub valid: bool,
}

impl ValidityFlags {
    pub fn of(stack: &StackingSequence, set: &PlyAngleSet) -> Self {
        let r = ViolationReport::evaluate(stack, set, &ConstraintWeights::uniform(1.0));
        let f = Self {
            disorientation: r.disorientation == 0,
            contiguity: r.contiguity == 0,
            balanced: r.balanced == 0,
            ten_percent: r.ten_percent == Some(0),
            valid: false,
        };
        Self { valid: f.disorientation && f.contiguity && f.balanced && f.ten_percent, ..f }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub instance_id: String,
    pub solver: String,
    pub solver_config: serde_json::Value,
    pub config_hash: String,
    #[serde(rename = "N")]
    pub plies: usize,
    pub angle_set: Vec<f64>,
    /// Achieved stack as angle indices, midplane first.
    pub stack: Vec<usize>,
    pub target: Option<LaminationParameters>,
    /// Euclidean lamination-parameter distance to `target`.
    pub distance: Option<f64>,
    pub total_loss: f64,
    pub lambda_b: Option<f64>,
    pub validity: ValidityFlags,
    pub runtime_s: f64,
    /// Sweeps, generations or F-VQE iterations of the returned solution.
    pub iterations: usize,
    pub seed: u64,
    #[serde(default)]
    pub metrics: BTreeMap<String, f64>,
    #[serde(default)]
    pub error: Option<String>,
}

impl ResultRecord {
    /// Recomputes distance and validity from the stored stack.
    pub fn verify(&self) -> Result<()> {
        if self.error.is_some() {
            return Ok(());
        }
        let set = PlyAngleSet::new(self.angle_set.clone())?;
        let stack = StackingSequence::new(self.stack.clone(), &set)?;
        if let (Some(t), Some(d)) = (self.target, self.distance) {
            let again = distance(&lamination_parameters(&stack, &set), &t, ComponentMask::ALL);
            if (again - d).abs() > 1e-12 {
                return Err(SsrError::Parse(format!("{}: stored distance {d} but stack gives {again}", self.instance_id)));
            }
        }
        if ValidityFlags::of(&stack, &set) != self.validity {
            return Err(SsrError::Parse(format!("{}: validity flags do not match the stack", self.instance_id)));
        }
        Ok(())
    }

    fn csv_row(&self) -> [String; 8] {
        [
            self.instance_id.clone(),
            self.solver.clone(),
            self.plies.to_string(),
            self.config_hash.clone(),
            self.distance.map(|d| d.to_string()).unwrap_or_default(),
            self.validity.valid.to_string(),
            self.runtime_s.to_string(),
            self.seed.to_string(),
        ]
    }
}

/// First 16 hex digits of the SHA-256 of the value's compact JSON.
pub fn config_hash<T: Serialize>(config: &T) -> Result<String> {
    let json = serde_json::to_string(config).map_err(|e| SsrError::Parse(e.to_string()))?;
    Ok(hex::encode(Sha256::digest(json.as_bytes()))[..16].to_string())
}

/// Appends records to `<stem>.jsonl` and `<stem>.csv`, flushing after each one.
pub struct RecordWriter {
    jsonl: File,
    csv: csv::Writer<File>,
}

impl RecordWriter {
    pub fn create(dir: &Path, stem: &str) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let jsonl = File::create(dir.join(format!("{stem}.jsonl")))?;
        let mut csv = csv::Writer::from_path(dir.join(format!("{stem}.csv"))).map_err(csv_err)?;
        csv.write_record(CSV_COLUMNS).map_err(csv_err)?;
        csv.flush()?;
        Ok(Self { jsonl, csv })
    }

    pub fn append(&mut self, record: &ResultRecord) -> Result<()> {
        let line = serde_json::to_string(record).map_err(|e| SsrError::Parse(e.to_string()))?;
        writeln!(self.jsonl, "{line}")?;
        self.jsonl.flush()?;
        self.csv.write_record(record.csv_row()).map_err(csv_err)?;
        self.csv.flush()?;
        Ok(())
    }
}

fn csv_err(e: csv::Error) -> SsrError {
    SsrError::Io(std::io::Error::other(e))
}

/// Reads a JSONL file; a truncated final line is skipped.
pub fn read_records(path: &Path) -> Result<Vec<ResultRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let lines: Vec<String> = reader.lines().collect::<std::io::Result<_>>()?;
    let mut out = Vec::with_capacity(lines.len());
    for (k, line) in lines.iter().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str(line) {
            Ok(r) => out.push(r),
            Err(_) if k + 1 == lines.len() => break,
            Err(e) => return Err(SsrError::Parse(format!("{}:{}: {e}", path.display(), k + 1))),
        }
    }
    Ok(out)
}
