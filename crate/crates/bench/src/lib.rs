//! Shared fixtures for the kernel benchmarks in `benches/`.

use rmerton::{KvConfig, ParamBox, SimConfig};

/// The reference experiment with `n_paths` replaced.
pub fn reference(n_paths: usize) -> (ParamBox, SimConfig) {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/reference.conf");
    let kv = KvConfig::parse(&std::fs::read_to_string(path).expect("reference config")).expect("config parses");
    let bx = ParamBox::from_kv(&kv).and_then(ParamBox::validated).expect("valid box");
    let cfg = SimConfig::from_kv(&kv).expect("valid config");
    (bx, SimConfig { n_paths, ..cfg })
}
