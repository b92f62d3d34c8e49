//! Replays the checked-in fuzz corpus through the target bodies, so the
//! seeds stay panic-free on stable without cargo-fuzz.

#[path = "../../../fuzz/src/lib.rs"]
mod targets;

use std::path::PathBuf;

fn corpus_dir(target: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target)
}

#[test]
fn every_target_has_seeds_and_survives_them() {
    for (name, body) in targets::TARGETS {
        let dir = corpus_dir(name);
        let mut n = 0;
        for entry in std::fs::read_dir(&dir).unwrap_or_else(|e| panic!("{}: {e}", dir.display())) {
            let data = std::fs::read(entry.unwrap().path()).unwrap();
            body(&data);
            n += 1;
        }
        assert!(n > 0, "{name} has no seeds");
    }
}

#[test]
fn truncated_seeds_do_not_panic() {
    for (name, body) in targets::TARGETS {
        for entry in std::fs::read_dir(corpus_dir(name)).unwrap() {
            let data = std::fs::read(entry.unwrap().path()).unwrap();
            for cut in (0..data.len()).step_by(7) {
                body(&data[..cut]);
            }
        }
    }
}

#[test]
fn mutated_seeds_do_not_panic() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    for (name, body) in targets::TARGETS {
        let seeds: Vec<Vec<u8>> =
            std::fs::read_dir(corpus_dir(name)).unwrap().map(|e| std::fs::read(e.unwrap().path()).unwrap()).collect();
        for _ in 0..300 {
            let mut data = seeds[rng.gen_range(0..seeds.len())].clone();
            for _ in 0..rng.gen_range(1..4) {
                let at = rng.gen_range(0..=data.len());
                match rng.gen_range(0..3) {
                    0 if at < data.len() => data[at] = rng.gen(),
                    1 if at < data.len() => drop(data.remove(at)),
                    _ => {
                        let pool = b"{}[]\n\t:;,'\"0#-";
                        data.insert(at, pool[rng.gen_range(0..pool.len())])
                    }
                }
            }
            body(&data);
        }
    }
}
