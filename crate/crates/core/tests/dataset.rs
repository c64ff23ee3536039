use std::io::Write;

use dataqa::dataset::{
    impute_train_mean, is_missing, load_csv, split_random, split_stratified, write_csv, ColumnKind,
    Dataset, LabelColumn, ParseOptions,
};
use dataqa::Error;
use proptest::prelude::*;

fn csv_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn load(text: &str, label: &str) -> dataqa::Result<Dataset> {
    let f = csv_file(text);
    load_csv(
        f.path(),
        &LabelColumn::from(label),
        &ParseOptions::default(),
    )
}

#[test]
fn mixed_columns_and_missing_cells() {
    let d = load("w,colour,y\n1.5,red,a\n,blue,b\n-2,red,a\n", "y").unwrap();
    assert_eq!((d.n_rows(), d.n_features(), d.class_count()), (3, 2, 2));
    assert!(is_missing(d.value(1, 0)));
    let colour = d.schema().feature(1);
    assert_eq!(colour.kind, ColumnKind::Categorical);
    assert_eq!(colour.decode(d.value(2, 1) as usize), Some("red"));
    assert_eq!(d.schema().feature(0).observed_min, -2.0);
    assert_eq!(d.labels(), &[0, 1, 0]);
}

#[test]
fn label_by_index_and_unknown_label() {
    let d = load("y,x\n1,0.5\n0,0.25\n", "0").unwrap();
    assert_eq!(d.n_features(), 1);
    assert!(matches!(
        load("x,y\n1,0\n2,1\n", "target"),
        Err(Error::LabelColumnNotFound(_))
    ));
}

#[test]
fn single_class_is_rejected_with_class_count() {
    let err = load("x,y\n1,a\n2,a\n3,a\n", "y").unwrap_err();
    assert!(matches!(err, Error::SingleClass { found: 1, .. }));
    assert!(err.to_string().contains('1'));
}

#[test]
fn missing_label_names_the_row() {
    let err = load("x,y\n1,a\n2,\n3,b\n", "y").unwrap_err();
    assert!(matches!(err, Error::MissingLabel { row: 2 }));
}

#[test]
fn categorical_round_trip_reproduces_text() {
    let text = "x,kind,y\n1,alpha,p\n2,beta,q\n3,alpha,q\n4,gamma,p\n";
    let d = load(text, "y").unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    write_csv(&d, &out).unwrap();
    assert_eq!(std::fs::read_to_string(&out).unwrap(), text);
}

#[test]
fn stratified_split_keeps_class_shares() {
    let rows: Vec<Vec<f64>> = (0..100).map(|i| vec![i as f64]).collect();
    let labels: Vec<usize> = (0..100).map(|i| usize::from(i % 4 == 0)).collect();
    let d = Dataset::from_rows(&rows, &labels).unwrap();
    let s = split_stratified(&d, 0.8, 5).unwrap();
    let minority = s.test.labels().iter().filter(|&&l| l == 1).count();
    assert_eq!(minority, 5);
    assert_eq!(s.train.n_rows() + s.test.n_rows(), 100);
}

fn dataset_strategy() -> impl Strategy<Value = Dataset> {
    (2usize..40, 1usize..6).prop_flat_map(|(n, d)| {
        (
            prop::collection::vec(
                prop::collection::vec(prop::option::weighted(0.85, -1e6f64..1e6), d),
                n,
            ),
            Just(n),
        )
            .prop_map(|(cells, n)| {
                let rows: Vec<Vec<f64>> = cells
                    .into_iter()
                    .map(|r| r.into_iter().map(|v| v.unwrap_or(f64::NAN)).collect())
                    .collect();
                let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
                Dataset::from_rows(&rows, &labels).unwrap()
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn split_partitions_rows(d in dataset_strategy(), frac in 0.05f64..0.95, seed in any::<u64>()) {
        match split_random(&d, frac, seed) {
            Ok(s) => {
                prop_assert_eq!(s.train_rows.len() + s.test_rows.len(), d.n_rows());
                let mut all: Vec<usize> = s.train_rows.iter().chain(&s.test_rows).copied().collect();
                all.sort_unstable();
                prop_assert_eq!(all, (0..d.n_rows()).collect::<Vec<_>>());
                prop_assert_eq!(s.train.n_rows(), s.train_rows.len());
            }
            Err(e) => {
                let degenerate = matches!(e, Error::DegenerateSplit { .. });
                prop_assert!(degenerate, "unexpected error {}", e);
            }
        }
    }

    #[test]
    fn imputation_is_idempotent(d in dataset_strategy(), seed in any::<u64>()) {
        prop_assume!(d.n_rows() >= 4);
        let s = split_random(&d, 0.5, seed).unwrap();
        let once = impute_train_mean(&s);
        prop_assert!(!once.train.has_missing() && !once.test.has_missing());
        prop_assert_eq!(&impute_train_mean(&once), &once);
    }

    #[test]
    fn csv_round_trip_preserves_finite_values(d in dataset_strategy()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        write_csv(&d, &path).unwrap();
        let back = load_csv(&path, &LabelColumn::from("y"), &ParseOptions::default()).unwrap();
        prop_assert_eq!(back.n_rows(), d.n_rows());
        for (a, b) in d.cells().iter().zip(back.cells()) {
            prop_assert!(a.to_bits() == b.to_bits() || (is_missing(*a) && is_missing(*b)));
        }
    }
}
