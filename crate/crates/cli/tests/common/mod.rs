#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use topofc::graphstore::{write_tudataset, Dataset, Graph};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_topofc"))
}

pub fn run(args: &[&str]) -> Output {
    bin()
        .args(args)
        .env_remove("TOPOFC_WORKERS")
        .output()
        .unwrap()
}

pub fn mutag_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/MUTAG")
}

/// Two classes: labelled cycles with random chords and labelled random
/// trees, 10 to 16 nodes each.
pub fn synthetic(count: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut graphs = Vec::new();
    let mut labels = Vec::new();
    for g in 0..count {
        let n = rng.gen_range(10..=16);
        let mut edges: Vec<(usize, usize)> = if g % 2 == 0 {
            let mut e: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            for _ in 0..2 {
                let a = rng.gen_range(0..n);
                let b = (a + rng.gen_range(2..n - 1)) % n;
                e.push((a, b));
            }
            e
        } else {
            (1..n).map(|i| (rng.gen_range(0..i), i)).collect()
        };
        edges
            .iter_mut()
            .for_each(|e| *e = (e.0.min(e.1), e.0.max(e.1)));
        edges.sort_unstable();
        edges.dedup();
        let node_labels = (0..n).map(|_| rng.gen_range(0..3)).collect();
        graphs.push(
            Graph::new(n, &edges)
                .unwrap()
                .with_node_labels(node_labels)
                .unwrap(),
        );
        labels.push(if g % 2 == 0 { 1 } else { -1 });
    }
    Dataset::new("SYN", graphs, &labels).unwrap()
}

pub fn write_synthetic(dir: &Path, count: usize, seed: u64) -> PathBuf {
    let root = dir.join("SYN");
    write_tudataset(&synthetic(count, seed), &root).unwrap();
    root
}
