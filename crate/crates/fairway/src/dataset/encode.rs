//! CSV ingestion: row filtering, missing-value drop, one-hot encoding and
//! protected/label binarization into an [`EncodedDataset`].

use std::collections::BTreeSet;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::dataset::spec::{DatasetSpec, FeatureKind};
use crate::error::{Error, Result};

/// Counts reported by one ingestion run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestSummary {
    pub rows_read: usize,
    pub rows_dropped_filter: usize,
    pub rows_dropped_missing: usize,
    /// Encoded feature dimension.
    pub dimension: usize,
}

/// Numeric feature matrix with binary labels and per-attribute protected
/// group indicators. Immutable after construction; the indicator of every
/// protected attribute is itself a feature column (privileged = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    features: Array2<f64>,
    labels: Vec<u8>,
    column_names: Vec<String>,
    /// (attribute name, index of its indicator column), in config order.
    protected: Vec<(String, usize)>,
    /// Protected attributes removed by `drop_columns`; kept so audits can
    /// distinguish "never existed" from "excluded".
    excluded_protected: Vec<String>,
    /// Columns that came from numeric source columns (standardization targets).
    numeric_columns: Vec<usize>,
    summary: IngestSummary,
}

impl EncodedDataset {
    pub fn rows(&self) -> usize {
        self.features.nrows()
    }

    pub fn dimension(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> ndarray::ArrayView2<'_, f64> {
        self.features.view()
    }

    pub fn labels(&self) -> &[u8] {
        &self.labels
    }

    pub fn column_names(&self) -> &[String] {
        &self.column_names
    }

    pub fn numeric_columns(&self) -> &[usize] {
        &self.numeric_columns
    }

    pub fn ingest_summary(&self) -> IngestSummary {
        self.summary
    }

    pub fn protected_attributes(&self) -> impl Iterator<Item = &str> {
        self.protected.iter().map(|(name, _)| name.as_str())
    }

    /// Index of the indicator column for a protected attribute.
    pub fn protected_column_index(&self, attribute: &str) -> Result<usize> {
        if let Some((_, idx)) = self.protected.iter().find(|(name, _)| name == attribute) {
            return Ok(*idx);
        }
        if self.excluded_protected.iter().any(|n| n == attribute) {
            return Err(Error::AttributeAbsent(attribute.to_string()));
        }
        Err(Error::UnknownAttribute(attribute.to_string()))
    }

    /// Per-row group indicator (privileged = 1) of a protected attribute.
    pub fn group(&self, attribute: &str) -> Result<Vec<u8>> {
        let idx = self.protected_column_index(attribute)?;
        Ok(self
            .features
            .column(idx)
            .iter()
            .map(|&v| u8::from(v == 1.0))
            .collect())
    }

    /// New dataset holding the given rows (in the given order).
    pub fn select_rows(&self, rows: &[usize]) -> EncodedDataset {
        let mut features = Array2::<f64>::zeros((rows.len(), self.dimension()));
        let mut labels = Vec::with_capacity(rows.len());
        for (out, &r) in rows.iter().enumerate() {
            features.row_mut(out).assign(&self.features.row(r));
            labels.push(self.labels[r]);
        }
        EncodedDataset {
            features,
            labels,
            column_names: self.column_names.clone(),
            protected: self.protected.clone(),
            excluded_protected: self.excluded_protected.clone(),
            numeric_columns: self.numeric_columns.clone(),
            summary: self.summary,
        }
    }

    /// New dataset without the given feature columns. Protected attributes
    /// whose indicator is dropped move to the excluded list.
    pub fn drop_columns(&self, drop: &[usize]) -> EncodedDataset {
        let keep: Vec<usize> = (0..self.dimension()).filter(|j| !drop.contains(j)).collect();
        let remap = |old: usize| keep.iter().position(|&k| k == old);
        let mut features = Array2::<f64>::zeros((self.rows(), keep.len()));
        for (new_j, &old_j) in keep.iter().enumerate() {
            features.column_mut(new_j).assign(&self.features.column(old_j));
        }
        let mut excluded = self.excluded_protected.clone();
        let mut protected = Vec::new();
        for (name, idx) in &self.protected {
            match remap(*idx) {
                Some(new_idx) => protected.push((name.clone(), new_idx)),
                None => excluded.push(name.clone()),
            }
        }
        EncodedDataset {
            features,
            labels: self.labels.clone(),
            column_names: keep.iter().map(|&j| self.column_names[j].clone()).collect(),
            protected,
            excluded_protected: excluded,
            numeric_columns: self
                .numeric_columns
                .iter()
                .filter_map(|&j| remap(j))
                .collect(),
            summary: self.summary,
        }
    }

    /// Complement a protected attribute's indicator column (1 <-> 0).
    pub fn flip_protected(&self, attribute: &str) -> Result<EncodedDataset> {
        let idx = self.protected_column_index(attribute)?;
        let mut flipped = self.clone();
        for v in flipped.features.column_mut(idx).iter_mut() {
            *v = 1.0 - *v;
        }
        Ok(flipped)
    }

    pub(crate) fn replace_features(&self, features: Array2<f64>) -> EncodedDataset {
        debug_assert_eq!(features.dim(), self.features.dim());
        EncodedDataset {
            features,
            ..self.clone()
        }
    }

    #[cfg(test)]
    pub(crate) fn for_tests(
        features: Array2<f64>,
        labels: Vec<u8>,
        protected: Vec<(String, usize)>,
    ) -> EncodedDataset {
        let dimension = features.ncols();
        let numeric_columns = (0..dimension)
            .filter(|j| !protected.iter().any(|(_, p)| p == j))
            .collect();
        let rows = features.nrows();
        EncodedDataset {
            features,
            labels,
            column_names: (0..dimension).map(|j| format!("f{j}")).collect(),
            protected,
            excluded_protected: Vec::new(),
            numeric_columns,
            summary: IngestSummary {
                rows_read: rows,
                rows_dropped_filter: 0,
                rows_dropped_missing: 0,
                dimension,
            },
        }
    }
}

/// Load and encode a dataset according to its spec.
///
/// Rows failing a raw-value filter are dropped first, then rows with the
/// missing token in any used column. Categorical columns expand to one
/// indicator column per distinct value, in lexicographic value order;
/// numeric columns pass through; each protected attribute contributes one
/// binary indicator column appended after the declared features.
pub fn load_dataset(spec: &DatasetSpec) -> Result<EncodedDataset> {
    spec.validate()?;
    let raw = read_rows(spec, &spec.csv_path)?;
    encode(spec, raw)
}

struct RawTable {
    /// Used-column values per row, laid out per `used` order.
    rows: Vec<Vec<String>>,
    /// Used column names: features, then protected, then label, in
    /// config order.
    used: Vec<String>,
    rows_read: usize,
    rows_dropped_filter: usize,
    rows_dropped_missing: usize,
}

fn read_rows(spec: &DatasetSpec, path: &Path) -> Result<RawTable> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)?;

    let headers = reader.headers()?.clone();
    let find = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim_start_matches('\u{feff}') == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };

    let mut used: Vec<String> = Vec::new();
    for f in &spec.feature_columns {
        used.push(f.name.clone());
    }
    for p in &spec.protected {
        if !used.contains(&p.column) {
            used.push(p.column.clone());
        }
    }
    used.push(spec.label_column.clone());

    let used_idx: Vec<usize> = used.iter().map(|n| find(n)).collect::<Result<_>>()?;
    let filter_idx: Vec<usize> = spec
        .row_filters
        .iter()
        .map(|f| find(&f.column))
        .collect::<Result<_>>()?;

    let mut rows = Vec::new();
    let mut rows_read = 0usize;
    let mut rows_dropped_filter = 0usize;
    let mut rows_dropped_missing = 0usize;

    for record in reader.records() {
        let record = record?;
        rows_read += 1;
        let keep = spec
            .row_filters
            .iter()
            .zip(&filter_idx)
            .all(|(f, &idx)| f.keeps(record.get(idx).unwrap_or("")));
        if !keep {
            rows_dropped_filter += 1;
            continue;
        }
        let values: Vec<String> = used_idx
            .iter()
            .map(|&idx| record.get(idx).unwrap_or("").to_string())
            .collect();
        if values.iter().any(|v| v == &spec.missing_token) {
            rows_dropped_missing += 1;
            continue;
        }
        rows.push(values);
    }

    if !spec.row_filters.is_empty() && rows.is_empty() && rows_dropped_filter > 0 {
        return Err(Error::EmptyAfterFilter(spec.name.clone()));
    }
    Ok(RawTable {
        rows,
        used,
        rows_read,
        rows_dropped_filter,
        rows_dropped_missing,
    })
}

fn encode(spec: &DatasetSpec, raw: RawTable) -> Result<EncodedDataset> {
    let col_of = |name: &str| raw.used.iter().position(|u| u == name).expect("used column");
    let label_col = col_of(&spec.label_column);

    // Collect categorical vocabularies (lexicographic).
    let mut vocab: Vec<Option<Vec<String>>> = vec![None; spec.feature_columns.len()];
    for (fi, feat) in spec.feature_columns.iter().enumerate() {
        if feat.kind == FeatureKind::Categorical {
            let mut values = BTreeSet::new();
            let c = col_of(&feat.name);
            for row in &raw.rows {
                values.insert(row[c].clone());
            }
            vocab[fi] = Some(values.into_iter().collect());
        }
    }

    let mut column_names = Vec::new();
    let mut numeric_columns = Vec::new();
    for (fi, feat) in spec.feature_columns.iter().enumerate() {
        match &vocab[fi] {
            Some(values) => {
                for v in values {
                    column_names.push(format!("{}={v}", feat.name));
                }
            }
            None => {
                numeric_columns.push(column_names.len());
                column_names.push(feat.name.clone());
            }
        }
    }
    let mut protected = Vec::new();
    for p in &spec.protected {
        protected.push((p.column.clone(), column_names.len()));
        column_names.push(p.column.clone());
    }
    let dimension = column_names.len();

    let mut features = Array2::<f64>::zeros((raw.rows.len(), dimension));
    let mut labels = Vec::with_capacity(raw.rows.len());
    for (r, row) in raw.rows.iter().enumerate() {
        let mut j = 0usize;
        for (fi, feat) in spec.feature_columns.iter().enumerate() {
            let value = &row[col_of(&feat.name)];
            match &vocab[fi] {
                Some(values) => {
                    for v in values {
                        features[[r, j]] = f64::from(u8::from(v == value));
                        j += 1;
                    }
                }
                None => {
                    features[[r, j]] = value.parse().map_err(|_| Error::InvalidNumeric {
                        column: feat.name.clone(),
                        value: value.clone(),
                    })?;
                    j += 1;
                }
            }
        }
        for p in &spec.protected {
            let value = &row[col_of(&p.column)];
            features[[r, j]] = f64::from(p.rule.apply(&p.column, value)?);
            j += 1;
        }
        labels.push(u8::from(row[label_col] == spec.favorable_value));
    }

    Ok(EncodedDataset {
        features,
        labels,
        column_names,
        protected,
        excluded_protected: Vec::new(),
        numeric_columns,
        summary: IngestSummary {
            rows_read: raw.rows_read,
            rows_dropped_filter: raw.rows_dropped_filter,
            rows_dropped_missing: raw.rows_dropped_missing,
            dimension,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::spec::{Comparator, PrivilegedRule, ProtectedAttribute, RowFilter};
    use std::io::Write;

    fn toy_spec(csv: &Path) -> DatasetSpec {
        DatasetSpec {
            version: 1,
            name: "toy".into(),
            csv_path: csv.to_path_buf(),
            label_column: "y".into(),
            favorable_value: "yes".into(),
            feature_columns: vec![
                FeatureColumn {
                    name: "num".into(),
                    kind: FeatureKind::Numeric,
                },
                FeatureColumn {
                    name: "cat".into(),
                    kind: FeatureKind::Categorical,
                },
            ],
            protected: vec![ProtectedAttribute {
                column: "sex".into(),
                rule: PrivilegedRule::ValueIn {
                    privileged: vec!["M".into()],
                    unprivileged: None,
                },
            }],
            missing_token: "?".into(),
            row_filters: vec![],
        }
    }

    fn write_csv(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f.flush().unwrap();
        f
    }

    #[test]
    fn one_hot_partition_and_label_mapping() {
        let f = write_csv("num,cat,sex,y\n1,a,M,yes\n2,b,F,no\n3,c,M,yes\n4,a,F,no\n5,b,M,yes\n");
        let data = load_dataset(&toy_spec(f.path())).unwrap();
        assert_eq!(data.rows(), 5);
        // num, cat=a, cat=b, cat=c, sex
        assert_eq!(data.dimension(), 5);
        assert_eq!(
            data.column_names(),
            &["num", "cat=a", "cat=b", "cat=c", "sex"]
        );
        for r in 0..data.rows() {
            let s: f64 = (1..4).map(|j| data.features()[[r, j]]).sum();
            assert_eq!(s, 1.0);
        }
        assert_eq!(data.labels(), &[1, 0, 1, 0, 1]);
        assert_eq!(data.group("sex").unwrap(), vec![1, 0, 1, 0, 1]);
        assert_eq!(data.numeric_columns(), &[0]);
    }

    #[test]
    fn missing_rows_dropped() {
        let f = write_csv("num,cat,sex,y\n1,a,M,yes\n?,b,F,no\n3,c,M,no\n");
        let data = load_dataset(&toy_spec(f.path())).unwrap();
        assert_eq!(data.rows(), 2);
        assert_eq!(data.ingest_summary().rows_dropped_missing, 1);
        assert_eq!(data.ingest_summary().rows_read, 3);
    }

    #[test]
    fn header_mismatch_errors() {
        let f = write_csv("num,WRONG,sex,y\n1,a,M,yes\n");
        let err = load_dataset(&toy_spec(f.path())).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(c) if c == "cat"));
    }

    #[test]
    fn row_filters_apply_before_encoding() {
        let f = write_csv("num,cat,sex,y\n1,a,M,yes\n2,b,F,no\n30,c,M,yes\n");
        let mut spec = toy_spec(f.path());
        spec.row_filters = vec![RowFilter {
            column: "num".into(),
            op: Comparator::Lt,
            value: "10".into(),
        }];
        let data = load_dataset(&spec).unwrap();
        assert_eq!(data.rows(), 2);
        assert_eq!(data.ingest_summary().rows_dropped_filter, 1);

        spec.row_filters = vec![RowFilter {
            column: "num".into(),
            op: Comparator::Gt,
            value: "100".into(),
        }];
        assert!(matches!(
            load_dataset(&spec),
            Err(Error::EmptyAfterFilter(_))
        ));
    }

    #[test]
    fn non_binary_protected_detected() {
        let f = write_csv("num,cat,sex,y\n1,a,M,yes\n2,b,X,no\n");
        let mut spec = toy_spec(f.path());
        spec.protected = vec![ProtectedAttribute {
            column: "sex".into(),
            rule: PrivilegedRule::ValueIn {
                privileged: vec!["M".into()],
                unprivileged: Some(vec!["F".into()]),
            },
        }];
        assert!(matches!(
            load_dataset(&spec),
            Err(Error::NonBinaryProtected { .. })
        ));
    }

    #[test]
    fn deterministic_encoding() {
        let f = write_csv("num,cat,sex,y\n1,a,M,yes\n2,b,F,no\n3,c,M,yes\n");
        let spec = toy_spec(f.path());
        let a = load_dataset(&spec).unwrap();
        let b = load_dataset(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn flip_protected_is_involutive() {
        let f = write_csv("num,cat,sex,y\n1,a,M,yes\n2,b,F,no\n3,c,M,yes\n");
        let data = load_dataset(&toy_spec(f.path())).unwrap();
        let flipped = data.flip_protected("sex").unwrap();
        assert_eq!(flipped.group("sex").unwrap(), vec![0, 1, 0]);
        assert_eq!(data, flipped.flip_protected("sex").unwrap());
        assert!(matches!(
            data.flip_protected("nope"),
            Err(Error::UnknownAttribute(_))
        ));
    }

    #[test]
    fn drop_columns_tracks_excluded_protected() {
        let f = write_csv("num,cat,sex,y\n1,a,M,yes\n2,b,F,no\n3,c,M,yes\n");
        let data = load_dataset(&toy_spec(f.path())).unwrap();
        let idx = data.protected_column_index("sex").unwrap();
        let reduced = data.drop_columns(&[idx]);
        assert_eq!(reduced.dimension(), data.dimension() - 1);
        assert!(matches!(
            reduced.protected_column_index("sex"),
            Err(Error::AttributeAbsent(_))
        ));
    }
}
