//! Operator, group table and groupoid spec files.

use std::fs;
use std::path::{Path, PathBuf};

use mpi_lab_core::corpus::{ArrowDecl, GroupoidSpec};
use mpi_lab_core::{CMat, Flavor, LegSpec, Operator, TensorSpace, C64};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InputError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: parse error: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
    #[error("{0}")]
    Usage(String),
}

impl InputError {
    fn invalid(path: &Path, message: impl Into<String>) -> Self {
        InputError::Invalid {
            path: path.to_path_buf(),
            message: message.into(),
        }
    }
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OperatorFile {
    pub dims: Vec<usize>,
    pub flavors: Vec<String>,
    /// Row-major, each entry `[re, im]`.
    pub matrix: Vec<Vec<[f64; 2]>>,
}

fn read(path: &Path) -> Result<String, InputError> {
    fs::read_to_string(path).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn parse<T: for<'de> Deserialize<'de>>(path: &Path, text: &str) -> Result<T, InputError> {
    serde_json::from_str(text).map_err(|e| InputError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn flavor(path: &Path, s: &str) -> Result<Flavor, InputError> {
    match s {
        "H" => Ok(Flavor::H),
        "Hbar" => Ok(Flavor::Hbar),
        other => Err(InputError::invalid(
            path,
            format!("unknown flavor {other:?}, expected \"H\" or \"Hbar\""),
        )),
    }
}

pub fn operator_from_file(path: &Path, file: OperatorFile) -> Result<Operator, InputError> {
    if file.dims.is_empty() {
        return Err(InputError::invalid(path, "dims is empty"));
    }
    if file.dims.len() != file.flavors.len() {
        return Err(InputError::invalid(
            path,
            format!("{} dims but {} flavors", file.dims.len(), file.flavors.len()),
        ));
    }
    if file.dims.contains(&0) {
        return Err(InputError::invalid(path, "leg dimensions must be positive"));
    }
    let legs = file
        .dims
        .iter()
        .zip(&file.flavors)
        .map(|(&d, f)| Ok(LegSpec::new(d, flavor(path, f)?)))
        .collect::<Result<Vec<_>, InputError>>()?;
    let space = TensorSpace::new(legs);
    let d = space.total_dim();
    if file.matrix.len() != d {
        return Err(InputError::invalid(
            path,
            format!(
                "dimension mismatch: dims give side {d}, matrix has {} rows",
                file.matrix.len()
            ),
        ));
    }
    for (i, row) in file.matrix.iter().enumerate() {
        if row.len() != d {
            return Err(InputError::invalid(
                path,
                format!("dimension mismatch: row {i} has {} entries, expected {d}", row.len()),
            ));
        }
        if let Some(j) = row.iter().position(|[re, im]| !re.is_finite() || !im.is_finite()) {
            return Err(InputError::invalid(path, format!("non-finite entry at ({i}, {j})")));
        }
    }
    let m = CMat::from_fn(d, d, |i, j| {
        let [re, im] = file.matrix[i][j];
        C64::new(re, im)
    });
    Operator::new(space, m).map_err(|e| InputError::invalid(path, e.to_string()))
}

pub fn load_operator(path: &Path) -> Result<Operator, InputError> {
    let text = read(path)?;
    operator_from_file(path, parse(path, &text)?)
}

fn flavor_name(f: Flavor) -> &'static str {
    match f {
        Flavor::H => "H",
        Flavor::Hbar => "Hbar",
    }
}

/// One matrix row per line.
pub fn operator_to_json(x: &Operator) -> String {
    let legs = x.space().legs();
    let dims: Vec<usize> = legs.iter().map(|l| l.dim).collect();
    let flavors: Vec<&str> = legs.iter().map(|l| flavor_name(l.flavor)).collect();
    let m = x.matrix();
    let rows: Vec<String> = (0..m.nrows())
        .map(|i| {
            let row: Vec<[f64; 2]> = (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect();
            format!("    {}", serde_json::to_string(&row).expect("finite floats serialize"))
        })
        .collect();
    format!(
        "{{\n  \"dims\": {},\n  \"flavors\": {},\n  \"matrix\": [\n{}\n  ]\n}}\n",
        serde_json::to_string(&dims).expect("integers serialize"),
        serde_json::to_string(&flavors).expect("strings serialize"),
        rows.join(",\n")
    )
}

pub fn write_file(path: &Path, text: &str) -> Result<(), InputError> {
    fs::write(path, text).map_err(|source| InputError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// A Cayley table `table[g][h] = gh`, as a JSON array of rows.
pub fn load_group_table(path: &Path) -> Result<Vec<Vec<usize>>, InputError> {
    let text = read(path)?;
    parse(path, &text)
}

#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ArrowFile {
    pub id: String,
    pub source: String,
    pub target: String,
}

/// `compose` lists triples `[g, h, gh]` for every composable pair.
#[derive(Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidFile {
    pub units: Vec<String>,
    pub arrows: Vec<ArrowFile>,
    pub compose: Vec<[String; 3]>,
}

pub fn load_groupoid_spec(path: &Path) -> Result<GroupoidSpec, InputError> {
    let text = read(path)?;
    let file: GroupoidFile = parse(path, &text)?;
    let arrows = file
        .arrows
        .into_iter()
        .map(|a| ArrowDecl {
            id: a.id,
            source: a.source,
            target: a.target,
        })
        .collect();
    let compose = file.compose.into_iter().map(|[g, h, gh]| (g, h, gh)).collect();
    GroupoidSpec::new(file.units, arrows, compose).map_err(|e| InputError::invalid(path, e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use mpi_lab_core::corpus::matrix_unit_example;

    fn write_tmp(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
        let p = dir.path().join(name);
        fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn example_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let w = matrix_unit_example();
        let p = write_tmp(&dir, "w.json", &operator_to_json(&w));
        assert_eq!(load_operator(&p).unwrap(), w);
    }

    #[test]
    fn fifteen_entries_is_a_dimension_mismatch() {
        let dir = tempfile::tempdir().unwrap();
        let mut rows = vec![vec![[0.0, 0.0]; 4]; 4];
        rows[3].pop();
        let text = serde_json::json!({"dims": [2, 2], "flavors": ["H", "H"], "matrix": rows}).to_string();
        let p = write_tmp(&dir, "w.json", &text);
        let err = load_operator(&p).unwrap_err();
        assert!(err.to_string().contains("dimension mismatch"), "{err}");
    }

    #[test]
    fn string_entry_is_a_parse_error() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{"dims":[1],"flavors":["H"],"matrix":[[[1, "x"]]]}"#;
        let p = write_tmp(&dir, "w.json", text);
        assert!(matches!(load_operator(&p), Err(InputError::Parse { .. })));
    }

    #[test]
    fn out_of_range_entry_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{"dims":[1],"flavors":["H"],"matrix":[[[1e400, 0]]]}"#;
        let p = write_tmp(&dir, "w.json", text);
        assert!(load_operator(&p).is_err());
    }

    #[test]
    fn unknown_flavor() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{"dims":[1],"flavors":["K"],"matrix":[[[1, 0]]]}"#;
        let p = write_tmp(&dir, "w.json", text);
        assert!(matches!(load_operator(&p), Err(InputError::Invalid { .. })));
    }

    #[test]
    fn groupoid_spec_file() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{
            "units": ["x", "y"],
            "arrows": [
                {"id": "1x", "source": "x", "target": "x"},
                {"id": "1y", "source": "y", "target": "y"},
                {"id": "f", "source": "x", "target": "y"},
                {"id": "g", "source": "y", "target": "x"}
            ],
            "compose": [
                ["1x", "1x", "1x"], ["1y", "1y", "1y"],
                ["f", "1x", "f"], ["1y", "f", "f"],
                ["g", "1y", "g"], ["1x", "g", "g"],
                ["f", "g", "1y"], ["g", "f", "1x"]
            ]
        }"#;
        let p = write_tmp(&dir, "g.json", text);
        let g = load_groupoid_spec(&p).unwrap();
        assert_eq!(g.num_units(), 2);
        assert_eq!(g.num_arrows(), 4);
    }

    #[test]
    fn groupoid_missing_composition() {
        let dir = tempfile::tempdir().unwrap();
        let text = r#"{"units":["x"],"arrows":[{"id":"e","source":"x","target":"x"}],"compose":[]}"#;
        let p = write_tmp(&dir, "g.json", text);
        let err = load_groupoid_spec(&p).unwrap_err();
        assert!(err.to_string().contains("missing"), "{err}");
    }
}
