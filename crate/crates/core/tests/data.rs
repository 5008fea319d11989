use riskunlearn_core::data::{
    binarize, class_weights, read_container, read_csv, save_container, save_csv, load_container, load_csv,
    weights_from_counts, write_container, BinarizationMap, BENIGN, MALIGNANT,
};
use riskunlearn_core::{Dataset, Error, Tensor};

const DERMA_TRAIN: [usize; 7] = [228, 359, 769, 80, 779, 4693, 99];
const PATH_TRAIN: [usize; 9] = [9366, 9509, 10360, 10401, 8006, 12182, 7886, 9401, 12885];

fn histogram_dataset(counts: &[usize]) -> Dataset {
    let labels: Vec<usize> = counts.iter().enumerate().flat_map(|(c, &n)| std::iter::repeat_n(c, n)).collect();
    let n = labels.len();
    Dataset::new(Tensor::zeros(vec![n, 1]).unwrap(), labels, counts.len()).unwrap()
}

#[test]
fn dermamnist_preset_counts() {
    let ds = binarize(&histogram_dataset(&DERMA_TRAIN), &BinarizationMap::dermamnist()).unwrap();
    assert_eq!(ds.class_counts(), vec![5641, 1366]);
    assert_eq!(ds.class_names().unwrap(), ["benign", "malignant"]);
}

#[test]
fn pathmnist_preset_counts() {
    let ds = binarize(&histogram_dataset(&PATH_TRAIN), &BinarizationMap::pathmnist()).unwrap();
    assert_eq!(ds.class_counts(), vec![67710, 22286]);
}

#[test]
fn binarization_maps() {
    let m = BinarizationMap::dermamnist();
    assert_eq!(m.targets(), [1, 1, 0, 0, 1, 0, 0]);
    assert_eq!(m.apply(4).unwrap(), MALIGNANT);
    assert_eq!(m.apply(5).unwrap(), BENIGN);
    assert!(m.apply(7).is_err());
    assert!(BinarizationMap::new(vec![0, 2]).is_err());
    assert!(BinarizationMap::preset("chestmnist").is_none());
    let ds = histogram_dataset(&[2, 2, 2]);
    assert!(binarize(&ds, &BinarizationMap::identity_binary()).is_err());
}

#[test]
fn class_weights_are_inverse_frequency() {
    let w = class_weights(&histogram_dataset(&[30, 10])).unwrap();
    assert_eq!(w, vec![40.0 / 60.0, 40.0 / 20.0]);
    assert!(matches!(weights_from_counts::<f64>(&[3, 0]), Err(Error::Weighting { .. })));
}

fn sample() -> Dataset {
    let x = Tensor::matrix(3, 2, vec![0.5, -1.25, 3.0, 0.0, 1e-3, 7.5]).unwrap();
    Dataset::new(x, vec![0, 2, 1], 3).unwrap()
}

#[test]
fn csv_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.csv");
    save_csv(&sample(), &path).unwrap();
    let back = load_csv::<f64>(&path).unwrap();
    assert_eq!(back.features(), sample().features());
    assert_eq!(back.labels(), sample().labels());
}

#[test]
fn csv_errors_name_the_line() {
    let text = "label,f0,f1\n0,1.0,2.0\n1,oops,2.0\n";
    let err = read_csv::<f64, _>(text.as_bytes()).unwrap_err();
    assert!(matches!(err, Error::Parse { .. }));
    assert!(err.to_string().contains("line 3"), "{err}");
    let ragged = "label,f0,f1\n0,1.0\n";
    assert!(read_csv::<f64, _>(ragged.as_bytes()).is_err());
    let bad_header = "y,f0\n0,1.0\n";
    assert!(read_csv::<f64, _>(bad_header.as_bytes()).is_err());
}

#[test]
fn container_round_trip_and_corruption() {
    let bytes = write_container(&sample()).unwrap();
    assert_eq!(&bytes[..4], b"UDS1");
    let back = read_container::<f64>(&bytes).unwrap();
    assert_eq!(back.labels(), sample().labels());
    for (a, b) in back.features().values().iter().zip(sample().features().values()) {
        assert_eq!(*a as f32, *b as f32);
    }
    assert!(read_container::<f64>(&bytes[..bytes.len() - 1]).is_err());
    let mut bad = bytes.clone();
    bad[0] = b'X';
    let err = read_container::<f64>(&bad).unwrap_err();
    assert!(err.to_string().contains("byte"), "{err}");

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.uds");
    save_container(&sample(), &path).unwrap();
    assert_eq!(load_container::<f64>(&path).unwrap().labels(), sample().labels());
}
