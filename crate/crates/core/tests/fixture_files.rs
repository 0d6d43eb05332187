use std::fs::File;
use std::path::PathBuf;

use hetsched::fixtures::{self, big_little};
use hetsched::io;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

#[test]
fn platform_files_match_builtin_data() {
    for (file, big, little) in [("big_little_2b6l.json", 2, 6), ("big_little_1b1l.json", 1, 1)] {
        let p = io::read_platform(File::open(root().join("platforms").join(file)).unwrap()).unwrap();
        assert_eq!(p, big_little(big, little), "{file}");
    }
}

#[test]
fn implicit_taskset_files_match_builtin_data() {
    for k in 0..fixtures::IMPLICIT_TASKSETS.len() {
        let (d, tasks) = fixtures::implicit_taskset(k);
        let path = root().join(format!("tasksets/implicit/D{d:.2}.json"));
        assert_eq!(io::read_taskset(File::open(&path).unwrap()).unwrap(), tasks, "{path:?}");
    }
}

#[test]
fn constrained_taskset_files_match_builtin_data() {
    for k in 0..fixtures::CONSTRAINED_TASKSETS.len() {
        let (d, tasks) = fixtures::constrained_taskset(k);
        let path = root().join(format!("tasksets/constrained/D{d:.3}.json"));
        assert_eq!(io::read_taskset(File::open(&path).unwrap()).unwrap(), tasks, "{path:?}");
    }
}
