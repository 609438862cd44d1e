//! Input readers: numeric matrices (CSV or JSON, optional row weights) and
//! hypercube instances (JSON with alphabet, word length, and a word list).

use std::path::Path;

use regdecomp::semiring::HypercubeSpec;
use regdecomp::space::{GroundSpace, RandomVar, Subset};

use crate::run::CliError;

/// A parsed matrix instance: base space over the rows, entries in row-major
/// order as a function on the product of the base with itself (square input)
/// or on the flattened entry set (rectangular input).
pub struct MatrixInstance {
    pub rows: Vec<Vec<f64>>,
    pub weights: Option<Vec<f64>>,
}

impl MatrixInstance {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.rows[0].len()
    }

    pub fn flat(&self) -> Vec<f64> {
        self.rows.iter().flatten().copied().collect()
    }

    /// Ground space over the row index set, weighted if weights were given.
    pub fn base_space(&self) -> Result<GroundSpace, CliError> {
        let n = self.n_rows();
        match &self.weights {
            None => Ok(GroundSpace::uniform(n)),
            Some(w) => {
                let labels = (0..n).map(|i| i.to_string()).collect();
                GroundSpace::new(labels, w.clone()).map_err(CliError::from)
            }
        }
    }

    pub fn function(&self) -> Result<RandomVar, CliError> {
        RandomVar::new(self.flat()).map_err(CliError::from)
    }
}

fn parse_rows(rows: Vec<Vec<f64>>) -> Result<MatrixInstance, CliError> {
    if rows.is_empty() || rows[0].is_empty() {
        return Err(CliError::Config("input matrix is empty".into()));
    }
    let cols = rows[0].len();
    for (i, r) in rows.iter().enumerate() {
        if r.len() != cols {
            return Err(CliError::Config(format!(
                "ragged input: row {i} has {} entries, expected {cols}",
                r.len()
            )));
        }
        for v in r {
            if !v.is_finite() {
                return Err(CliError::Config(format!("non-finite entry in row {i}")));
            }
        }
    }
    Ok(MatrixInstance { rows, weights: None })
}

fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn ingest_matrix(path: &Path, format: &str) -> Result<MatrixInstance, CliError> {
    let fmt = match format {
        "auto" => match path.extension().and_then(|e| e.to_str()) {
            Some("json") => "json",
            _ => "csv",
        },
        other => other,
    };
    let text = read_to_string(path)?;
    match fmt {
        "csv" => {
            let mut rows = Vec::new();
            for (i, line) in text.lines().enumerate() {
                let line = line.trim();
                if line.is_empty() {
                    continue;
                }
                let row: Result<Vec<f64>, _> =
                    line.split(',').map(|c| c.trim().parse::<f64>()).collect();
                rows.push(row.map_err(|e| {
                    CliError::Config(format!("line {}: non-numeric entry ({e})", i + 1))
                })?);
            }
            parse_rows(rows)
        }
        "json" => {
            let v: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
            let (matrix, weights) = match &v {
                serde_json::Value::Array(_) => (v.clone(), None),
                serde_json::Value::Object(m) => (
                    m.get("matrix")
                        .cloned()
                        .ok_or_else(|| CliError::Config("missing 'matrix' field".into()))?,
                    m.get("weights").cloned(),
                ),
                _ => return Err(CliError::Config("expected a JSON array or object".into())),
            };
            let rows: Vec<Vec<f64>> = serde_json::from_value(matrix)
                .map_err(|e| CliError::Config(format!("invalid matrix: {e}")))?;
            let mut inst = parse_rows(rows)?;
            if let Some(w) = weights {
                let w: Vec<f64> = serde_json::from_value(w)
                    .map_err(|e| CliError::Config(format!("invalid weights: {e}")))?;
                if w.len() != inst.n_rows() {
                    return Err(CliError::Config(format!(
                        "{} weights for {} rows",
                        w.len(),
                        inst.n_rows()
                    )));
                }
                inst.weights = Some(w);
            }
            Ok(inst)
        }
        other => Err(CliError::Config(format!("unknown format '{other}'"))),
    }
}

/// A list of same-shape matrices for the simultaneous decomposition.
pub fn ingest_matrix_list(path: &Path) -> Result<Vec<MatrixInstance>, CliError> {
    let text = read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let matrices = v
        .get("matrices")
        .cloned()
        .ok_or_else(|| CliError::Config("missing 'matrices' field".into()))?;
    let list: Vec<Vec<Vec<f64>>> = serde_json::from_value(matrices)
        .map_err(|e| CliError::Config(format!("invalid matrices: {e}")))?;
    if list.is_empty() {
        return Err(CliError::Config("empty matrix list".into()));
    }
    let parsed: Result<Vec<_>, _> = list.into_iter().map(parse_rows).collect();
    let parsed = parsed?;
    let (r, c) = (parsed[0].n_rows(), parsed[0].n_cols());
    for (i, m) in parsed.iter().enumerate() {
        if m.n_rows() != r || m.n_cols() != c {
            return Err(CliError::Config(format!("matrix {i} has a different shape")));
        }
    }
    Ok(parsed)
}

/// JSON instance `{alphabet, n, subset}`; duplicate words are dropped with a
/// warning, malformed words are rejected.
pub fn ingest_hypercube(path: &Path) -> Result<(HypercubeSpec, Subset), CliError> {
    let text = read_to_string(path)?;
    let v: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Config(format!("invalid JSON: {e}")))?;
    let alphabet: Vec<String> = serde_json::from_value(
        v.get("alphabet")
            .cloned()
            .ok_or_else(|| CliError::Config("missing 'alphabet' field".into()))?,
    )
    .map_err(|e| CliError::Config(format!("invalid alphabet: {e}")))?;
    let n: usize = serde_json::from_value(
        v.get("n")
            .cloned()
            .ok_or_else(|| CliError::Config("missing 'n' field".into()))?,
    )
    .map_err(|e| CliError::Config(format!("invalid n: {e}")))?;
    let words: Vec<String> = serde_json::from_value(
        v.get("subset")
            .cloned()
            .ok_or_else(|| CliError::Config("missing 'subset' field".into()))?,
    )
    .map_err(|e| CliError::Config(format!("invalid subset: {e}")))?;

    let spec = HypercubeSpec::all_pairs(alphabet, n).map_err(CliError::from)?;
    let mut d = Subset::empty(spec.n_points());
    let mut seen = std::collections::HashSet::new();
    for w in &words {
        if !seen.insert(w.clone()) {
            eprintln!("warning: duplicate word '{w}' ignored");
            continue;
        }
        let idx = spec.index_of_str(w).map_err(CliError::from)?;
        d.insert(idx);
    }
    Ok((spec, d))
}
