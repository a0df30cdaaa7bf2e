#![allow(dead_code)]

use rmerton::{KvConfig, ParamBox, SimConfig};

pub fn reference_kv() -> KvConfig {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference.conf");
    KvConfig::parse(&std::fs::read_to_string(path).expect("reference config")).unwrap()
}

pub fn reference() -> (ParamBox, SimConfig) {
    let kv = reference_kv();
    (
        ParamBox::from_kv(&kv).unwrap().validated().unwrap(),
        SimConfig::from_kv(&kv).unwrap(),
    )
}

pub fn with_paths(cfg: &SimConfig, n_paths: usize) -> SimConfig {
    SimConfig { n_paths, ..cfg.clone() }
}

/// Pearson correlation, computed naively in test code.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma) * (x - ma)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb) * (y - mb)).sum();
    cov / (va * vb).sqrt()
}
