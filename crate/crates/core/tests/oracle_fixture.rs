//! Checked-in oracle numbers. Set `LINSIC_REGEN_FIXTURES=1` to rewrite them.

use std::path::PathBuf;

use linsic::oracle::fixture_text;

const TRIALS: usize = 100_000;

fn path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/oracle.txt")
}

#[test]
fn oracle_fixture_is_current() {
    let fresh = fixture_text(TRIALS).unwrap();
    if std::env::var_os("LINSIC_REGEN_FIXTURES").is_some() {
        std::fs::write(path(), &fresh).unwrap();
        return;
    }
    let stored = std::fs::read_to_string(path()).expect("fixture missing; run with LINSIC_REGEN_FIXTURES=1");
    assert_eq!(stored, fresh);
}

#[test]
fn fixture_values_scale_quartically() {
    let stored = std::fs::read_to_string(path()).unwrap();
    let rows: Vec<(f64, f64)> = stored
        .lines()
        .filter(|l| l.starts_with("tau_over_t="))
        .map(|l| {
            let field = |name: &str| -> f64 {
                l.split_whitespace()
                    .find_map(|kv| kv.strip_prefix(name))
                    .unwrap()
                    .parse()
                    .unwrap()
            };
            (field("tau_over_t="), field("err_power="))
        })
        .collect();
    assert_eq!(rows.len(), 5);
    for (r, e) in rows {
        let c = e / r.powi(4);
        assert!((4.8..4.9).contains(&c), "{r} {c}");
    }
}
