//! Dataset manifests, CSV ingestion, categorical encoding and train/test
//! splitting.
//!
//! Loading follows a fixed recipe: drop the declared continuous (and ignored)
//! columns, drop every row that contains the missing-value token, derive the
//! class label (possibly through a task transform) and integer-encode every
//! remaining column against a sorted category domain.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::rng::SeededRng;

/// Class label emitted by [`Transform::SolarFlareBinary`] when any flare occurred.
pub const FLARE: &str = "flare";
pub const NO_FLARE: &str = "no_flare";
pub const PASS: &str = "pass";
pub const FAIL: &str = "fail";
/// Lowest passing final grade on the 0–20 scale.
pub const PASS_GRADE: i64 = 10;

pub const DEFAULT_TRAIN_FRACTION: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    /// Class is `flare` iff the counts in `transform_columns` sum to at least 1.
    SolarFlareBinary,
    /// Class is `pass` iff the integer grade in the target column is at least 10.
    StudentPassFail,
}

fn default_missing_token() -> String {
    "?".to_string()
}

fn default_train_fraction() -> f64 {
    DEFAULT_TRAIN_FRACTION
}

fn default_delimiter() -> char {
    ','
}

/// Per-dataset loading recipe, read from a TOML key-value file.
///
/// Relative `path` and `provided_test_path` entries are resolved against the
/// directory that holds the manifest.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub name: String,
    pub path: PathBuf,
    /// Label column. For `solar_flare_binary` it only names the derived label.
    pub target_column: String,
    #[serde(default)]
    pub continuous_columns: Vec<String>,
    /// Identifier-like columns that are neither features nor targets.
    #[serde(default)]
    pub ignore_columns: Vec<String>,
    /// Source columns consumed by the task transform.
    #[serde(default)]
    pub transform_columns: Vec<String>,
    #[serde(default = "default_missing_token")]
    pub missing_token: String,
    #[serde(default)]
    pub transform: Transform,
    #[serde(default)]
    pub provided_test_path: Option<PathBuf>,
    /// Shuffle seed; when absent the experiment derives one from its master seed.
    #[serde(default)]
    pub split_seed: Option<u64>,
    #[serde(default = "default_train_fraction")]
    pub train_fraction: f64,
    #[serde(default = "default_delimiter")]
    pub delimiter: char,
}

impl DatasetManifest {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = read_text(path)?;
        let mut manifest: DatasetManifest = toml::from_str(&text).map_err(|e| Error::Config {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        manifest.path = base.join(&manifest.path);
        if let Some(test) = manifest.provided_test_path.take() {
            manifest.provided_test_path = Some(base.join(test));
        }
        manifest.validate().map_err(|message| Error::Config {
            path: path.to_path_buf(),
            message,
        })?;
        Ok(manifest)
    }

    pub fn validate(&self) -> std::result::Result<(), String> {
        if self.name.trim().is_empty() {
            return Err("name must not be empty".into());
        }
        if self.continuous_columns.contains(&self.target_column) {
            return Err(format!(
                "target column `{}` is listed as continuous",
                self.target_column
            ));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        if self.transform == Transform::SolarFlareBinary && self.transform_columns.is_empty() {
            return Err("solar_flare_binary needs transform_columns".into());
        }
        if !self.delimiter.is_ascii() {
            return Err("delimiter must be a single ASCII character".into());
        }
        Ok(())
    }
}

/// Ordered category values of every feature plus the ordered class labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureDomain {
    pub feature_names: Vec<String>,
    pub features: Vec<Vec<String>>,
    pub classes: Vec<String>,
}

impl FeatureDomain {
    /// Domain with anonymous categories `0..k`, mostly for synthetic data.
    pub fn with_cardinalities(feature_cards: &[usize], class_count: usize) -> Self {
        let names = |k: usize| (0..k).map(|v| v.to_string()).collect::<Vec<_>>();
        Self {
            feature_names: (0..feature_cards.len()).map(|i| format!("x{i}")).collect(),
            features: feature_cards.iter().map(|&k| names(k)).collect(),
            classes: names(class_count),
        }
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn cardinality(&self, feature: usize) -> usize {
        self.features[feature].len()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.features.iter().map(Vec::len).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    pub features: Vec<usize>,
    pub class: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiscreteDataset {
    pub name: String,
    pub domain: FeatureDomain,
    pub instances: Vec<Instance>,
}

impl DiscreteDataset {
    /// Builds a dataset, checking every index against `domain`.
    pub fn new(
        name: impl Into<String>,
        domain: FeatureDomain,
        instances: Vec<Instance>,
    ) -> Result<Self> {
        for inst in &instances {
            if inst.features.len() != domain.feature_count() {
                return Err(Error::LengthMismatch {
                    expected: domain.feature_count(),
                    actual: inst.features.len(),
                });
            }
            for (i, &v) in inst.features.iter().enumerate() {
                if v >= domain.cardinality(i) {
                    return Err(Error::OutOfDomain {
                        feature: i,
                        index: v,
                        cardinality: domain.cardinality(i),
                    });
                }
            }
            if inst.class >= domain.class_count() {
                return Err(Error::InvalidArgument(format!(
                    "class index {} outside {} classes",
                    inst.class,
                    domain.class_count()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            domain,
            instances,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.domain.feature_count()
    }

    pub fn labels(&self) -> Vec<usize> {
        self.instances.iter().map(|i| i.class).collect()
    }

    /// New dataset holding the instances at `indices`, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            name: self.name.clone(),
            domain: self.domain.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Re-encodes every instance against a superset domain.
    fn reencode(&self, target: &FeatureDomain) -> Self {
        let feature_maps: Vec<Vec<usize>> = self
            .domain
            .features
            .iter()
            .zip(&target.features)
            .map(|(from, to)| from.iter().map(|v| position(to, v)).collect())
            .collect();
        let class_map: Vec<usize> = self
            .domain
            .classes
            .iter()
            .map(|c| position(&target.classes, c))
            .collect();
        let instances = self
            .instances
            .iter()
            .map(|inst| Instance {
                features: inst
                    .features
                    .iter()
                    .enumerate()
                    .map(|(i, &v)| feature_maps[i][v])
                    .collect(),
                class: class_map[inst.class],
            })
            .collect();
        Self {
            name: self.name.clone(),
            domain: target.clone(),
            instances,
        }
    }
}

fn position(values: &[String], v: &str) -> usize {
    values
        .iter()
        .position(|x| x == v)
        .expect("target domain is a superset")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train: DiscreteDataset,
    pub test: DiscreteDataset,
}

/// Filtered string table before encoding.
struct RawTable {
    feature_names: Vec<String>,
    rows: Vec<Vec<String>>,
    labels: Vec<String>,
}

fn read_text(path: &Path) -> Result<String> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn read_raw(manifest: &DatasetManifest, path: &Path) -> Result<RawTable> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(manifest.delimiter as u8)
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());

    let parse_err = |e: csv::Error| {
        let row = e.position().map(|p| p.line() as usize).unwrap_or(0);
        let column = match e.kind() {
            csv::ErrorKind::UnequalLengths { len, .. } => *len as usize,
            _ => 0,
        };
        Error::Parse {
            path: path.to_path_buf(),
            row,
            column,
            message: e.to_string(),
        }
    };

    let header: Vec<String> = reader
        .headers()
        .map_err(parse_err)?
        .iter()
        .map(str::to_string)
        .collect();
    let column_of = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn {
                path: path.to_path_buf(),
                column: name.to_string(),
            })
    };

    for name in manifest
        .continuous_columns
        .iter()
        .chain(&manifest.ignore_columns)
    {
        column_of(name)?;
    }
    let source_columns: Vec<usize> = match manifest.transform {
        Transform::SolarFlareBinary => manifest
            .transform_columns
            .iter()
            .map(|c| column_of(c))
            .collect::<Result<_>>()?,
        Transform::None | Transform::StudentPassFail => {
            let mut cols = vec![column_of(&manifest.target_column)?];
            for c in &manifest.transform_columns {
                cols.push(column_of(c)?);
            }
            cols
        }
    };
    let feature_columns: Vec<usize> = (0..header.len())
        .filter(|&j| {
            let name = &header[j];
            !source_columns.contains(&j)
                && !manifest.continuous_columns.contains(name)
                && !manifest.ignore_columns.contains(name)
        })
        .collect();

    let mut rows = Vec::new();
    let mut labels = Vec::new();
    for record in reader.records() {
        let record = record.map_err(parse_err)?;
        if record.iter().any(|field| field == manifest.missing_token) {
            continue;
        }
        let line = record.position().map(|p| p.line() as usize).unwrap_or(0);
        let label = match manifest.transform {
            Transform::None => record[source_columns[0]].to_string(),
            Transform::SolarFlareBinary => {
                let mut total = 0i64;
                for &j in &source_columns {
                    total += parse_int(&record[j], path, line, j)?;
                }
                if total >= 1 { FLARE } else { NO_FLARE }.to_string()
            }
            Transform::StudentPassFail => {
                let grade = parse_int(&record[source_columns[0]], path, line, source_columns[0])?;
                if grade >= PASS_GRADE { PASS } else { FAIL }.to_string()
            }
        };
        rows.push(
            feature_columns
                .iter()
                .map(|&j| record[j].to_string())
                .collect(),
        );
        labels.push(label);
    }

    Ok(RawTable {
        feature_names: feature_columns.iter().map(|&j| header[j].clone()).collect(),
        rows,
        labels,
    })
}

fn parse_int(field: &str, path: &Path, row: usize, column: usize) -> Result<i64> {
    field
        .parse::<f64>()
        .ok()
        .filter(|x| x.fract() == 0.0)
        .map(|x| x as i64)
        .ok_or_else(|| Error::Parse {
            path: path.to_path_buf(),
            row,
            column: column + 1,
            message: format!("expected an integer, found `{field}`"),
        })
}

/// Numeric order when every value parses as a number, lexicographic otherwise.
fn sort_categories(values: BTreeSet<String>) -> Vec<String> {
    let mut values: Vec<String> = values.into_iter().collect();
    let numeric: Option<Vec<f64>> = values.iter().map(|v| v.parse::<f64>().ok()).collect();
    if let Some(nums) = numeric {
        let mut paired: Vec<(f64, String)> = nums.into_iter().zip(values).collect();
        paired.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap_or(Ordering::Equal)
                .then_with(|| a.1.cmp(&b.1))
        });
        values = paired.into_iter().map(|(_, v)| v).collect();
    }
    values
}

fn domain_of(tables: &[&RawTable]) -> FeatureDomain {
    let n = tables[0].feature_names.len();
    let mut features = vec![BTreeSet::new(); n];
    let mut classes = BTreeSet::new();
    for t in tables {
        for row in &t.rows {
            for (i, v) in row.iter().enumerate() {
                features[i].insert(v.clone());
            }
        }
        classes.extend(t.labels.iter().cloned());
    }
    FeatureDomain {
        feature_names: tables[0].feature_names.clone(),
        features: features.into_iter().map(sort_categories).collect(),
        classes: sort_categories(classes),
    }
}

fn encode(name: &str, table: &RawTable, domain: &FeatureDomain) -> DiscreteDataset {
    let instances = table
        .rows
        .iter()
        .zip(&table.labels)
        .map(|(row, label)| Instance {
            features: row
                .iter()
                .enumerate()
                .map(|(i, v)| position(&domain.features[i], v))
                .collect(),
            class: position(&domain.classes, label),
        })
        .collect();
    DiscreteDataset {
        name: name.to_string(),
        domain: domain.clone(),
        instances,
    }
}

/// Loads and encodes the main file of `manifest`. Row order follows the file.
pub fn load_dataset(manifest: &DatasetManifest) -> Result<DiscreteDataset> {
    let table = read_raw(manifest, &manifest.path)?;
    if table.rows.is_empty() {
        return Err(Error::EmptyDataset(manifest.name.clone()));
    }
    let domain = domain_of(&[&table]);
    Ok(encode(&manifest.name, &table, &domain))
}

/// Splits `data` into train and test.
///
/// With a `provided_test_path` the shipped file becomes the test set and
/// `data` the training set, unshuffled. Otherwise indices are shuffled with
/// the manifest seed and the first `round(train_fraction * n)` go to train.
/// Both halves always share one domain.
pub fn split_dataset(data: &DiscreteDataset, manifest: &DatasetManifest) -> Result<DatasetSplit> {
    let split_err = |message: String| Error::Split {
        name: manifest.name.clone(),
        message,
    };
    if let Some(test_path) = &manifest.provided_test_path {
        let table = read_raw(manifest, test_path)?;
        if table.rows.is_empty() {
            return Err(split_err(
                "provided test file is empty after filtering".into(),
            ));
        }
        if table.feature_names != data.domain.feature_names {
            return Err(Error::DomainMismatch(format!(
                "train columns {:?} vs test columns {:?}",
                data.domain.feature_names, table.feature_names
            )));
        }
        if data.is_empty() {
            return Err(split_err("training file is empty".into()));
        }
        let train_as_table = RawTable {
            feature_names: data.domain.feature_names.clone(),
            rows: data
                .instances
                .iter()
                .map(|inst| {
                    inst.features
                        .iter()
                        .enumerate()
                        .map(|(i, &v)| data.domain.features[i][v].clone())
                        .collect()
                })
                .collect(),
            labels: data
                .instances
                .iter()
                .map(|inst| data.domain.classes[inst.class].clone())
                .collect(),
        };
        let domain = domain_of(&[&train_as_table, &table]);
        return Ok(DatasetSplit {
            train: data.reencode(&domain),
            test: encode(&manifest.name, &table, &domain),
        });
    }

    let n = data.len();
    let n_train = (manifest.train_fraction * n as f64).round() as usize;
    if n_train == 0 || n_train >= n {
        return Err(split_err(format!(
            "{n} instances with train fraction {} leave an empty side",
            manifest.train_fraction
        )));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    SeededRng::new(manifest.split_seed.unwrap_or(0)).shuffle(&mut indices);
    Ok(DatasetSplit {
        train: data.subset(&indices[..n_train]),
        test: data.subset(&indices[n_train..]),
    })
}

/// Loads the manifest's data and splits it.
pub fn load_split(manifest: &DatasetManifest) -> Result<DatasetSplit> {
    split_dataset(&load_dataset(manifest)?, manifest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        fs::File::create(&p)
            .unwrap()
            .write_all(body.as_bytes())
            .unwrap();
        p
    }

    fn manifest(path: PathBuf) -> DatasetManifest {
        DatasetManifest {
            name: "toy".into(),
            path,
            target_column: "T".into(),
            continuous_columns: vec![],
            ignore_columns: vec![],
            transform_columns: vec![],
            missing_token: "?".into(),
            transform: Transform::None,
            provided_test_path: None,
            split_seed: Some(1),
            train_fraction: 0.6,
            delimiter: ',',
        }
    }

    #[test]
    fn drops_continuous_columns_and_missing_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "toy.csv",
            "A,B,T\n1.5,x,yes\n2.5,y,no\n3.1,?,yes\n0.2,x,no\n9.9,y,yes\n",
        );
        let mut m = manifest(path);
        m.continuous_columns = vec!["A".into()];
        let d = load_dataset(&m).unwrap();
        assert_eq!(d.feature_count(), 1);
        assert_eq!(d.len(), 4);
        assert_eq!(d.domain.feature_names, vec!["B"]);
        assert_eq!(d.domain.features[0], vec!["x", "y"]);
        assert_eq!(d.domain.classes, vec!["no", "yes"]);
        // row order preserved: x/yes, y/no, x/no, y/yes
        let enc: Vec<(usize, usize)> = d
            .instances
            .iter()
            .map(|i| (i.features[0], i.class))
            .collect();
        assert_eq!(enc, vec![(0, 1), (1, 0), (0, 0), (1, 1)]);
    }

    #[test]
    fn missing_file_and_missing_target() {
        let dir = tempfile::tempdir().unwrap();
        let m = manifest(dir.path().join("nope.csv"));
        assert!(matches!(load_dataset(&m), Err(Error::FileNotFound(_))));

        let path = write_file(dir.path(), "t.csv", "A,B\n1,2\n");
        let m = manifest(path);
        assert!(
            matches!(load_dataset(&m), Err(Error::MissingColumn { column, .. }) if column == "T")
        );
    }

    #[test]
    fn ragged_row_reports_location() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "t.csv", "A,T\nx,1\ny\n");
        match load_dataset(&manifest(path)) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 3);
                assert_eq!(column, 1);
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn empty_after_filtering() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "t.csv", "A,T\n?,1\nx,?\n");
        assert!(matches!(
            load_dataset(&manifest(path)),
            Err(Error::EmptyDataset(_))
        ));
    }

    #[test]
    fn solar_flare_binary_transform() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "flare.csv",
            "zurich,c,m,x\nH,0,0,0\nD,2,0,1\nC,0,1,0\n",
        );
        let mut m = manifest(path);
        m.target_column = "flare".into();
        m.transform = Transform::SolarFlareBinary;
        m.transform_columns = vec!["c".into(), "m".into(), "x".into()];
        let d = load_dataset(&m).unwrap();
        assert_eq!(d.domain.feature_names, vec!["zurich"]);
        let labels: Vec<&str> = d
            .instances
            .iter()
            .map(|i| d.domain.classes[i.class].as_str())
            .collect();
        assert_eq!(labels, vec![NO_FLARE, FLARE, FLARE]);
    }

    #[test]
    fn student_pass_fail_transform() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(dir.path(), "s.csv", "school;G3\nGP;12\nMS;9\nGP;10\n");
        let mut m = manifest(path);
        m.target_column = "G3".into();
        m.transform = Transform::StudentPassFail;
        m.delimiter = ';';
        let d = load_dataset(&m).unwrap();
        let labels: Vec<&str> = d
            .instances
            .iter()
            .map(|i| d.domain.classes[i.class].as_str())
            .collect();
        assert_eq!(labels, vec![PASS, FAIL, PASS]);

        let path = write_file(dir.path(), "bad.csv", "school;G3\nGP;twelve\n");
        m.path = path;
        assert!(matches!(
            load_dataset(&m),
            Err(Error::Parse {
                row: 2,
                column: 2,
                ..
            })
        ));
    }

    #[test]
    fn random_split_sizes_and_partition() {
        let domain = FeatureDomain::with_cardinalities(&[2], 2);
        let instances = (0..10)
            .map(|i| Instance {
                features: vec![i % 2],
                class: i % 2,
            })
            .collect();
        let d = DiscreteDataset::new("ten", domain, instances).unwrap();
        let m = manifest(PathBuf::from("unused"));
        let s = split_dataset(&d, &m).unwrap();
        assert_eq!(s.train.len(), 6);
        assert_eq!(s.test.len(), 4);
        assert_eq!(s, split_dataset(&d, &m).unwrap());
    }

    #[test]
    fn provided_test_file_extends_domain() {
        let dir = tempfile::tempdir().unwrap();
        let train = write_file(dir.path(), "train.csv", "A,T\nx,1\ny,0\n");
        let test = write_file(dir.path(), "test.csv", "A,T\nz,1\nx,2\n");
        let mut m = manifest(train);
        m.provided_test_path = Some(test);
        let s = load_split(&m).unwrap();
        assert_eq!(s.train.len(), 2);
        assert_eq!(s.test.len(), 2);
        assert_eq!(s.train.domain, s.test.domain);
        assert_eq!(s.train.domain.features[0], vec!["x", "y", "z"]);
        assert_eq!(s.train.domain.classes, vec!["0", "1", "2"]);
        assert_eq!(s.train.instances[1].features, vec![1]);
        assert_eq!(s.test.instances[0].features, vec![2]);
    }

    #[test]
    fn provided_test_file_with_other_columns_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let train = write_file(dir.path(), "train.csv", "A,T\nx,1\n");
        let test = write_file(dir.path(), "test.csv", "B,T\nz,1\n");
        let mut m = manifest(train);
        m.provided_test_path = Some(test);
        assert!(matches!(load_split(&m), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn numeric_categories_sort_numerically() {
        let set: BTreeSet<String> = ["10", "2", "1"].iter().map(|s| s.to_string()).collect();
        assert_eq!(sort_categories(set), vec!["1", "2", "10"]);
    }

    #[test]
    fn manifest_defaults_and_validation() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_file(
            dir.path(),
            "m.toml",
            "name = \"toy\"\npath = \"toy.csv\"\ntarget_column = \"T\"\n",
        );
        let m = DatasetManifest::from_file(&path).unwrap();
        assert_eq!(m.train_fraction, 0.6);
        assert_eq!(m.missing_token, "?");
        assert_eq!(m.transform, Transform::None);
        assert_eq!(m.path, dir.path().join("toy.csv"));

        let bad = write_file(
            dir.path(),
            "bad.toml",
            "name = \"toy\"\npath = \"toy.csv\"\ntarget_column = \"T\"\ncontinuous_columns = [\"T\"]\n",
        );
        assert!(matches!(
            DatasetManifest::from_file(&bad),
            Err(Error::Config { .. })
        ));
    }
}
