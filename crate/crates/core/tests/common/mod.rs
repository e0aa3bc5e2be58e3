pub mod criteria;
pub mod fixtures;
pub mod oracle;

use proptest::test_runner::{Config, RngSeed};

/// Fixed-seed property runs, so the suite is reproducible run to run.
#[allow(dead_code)]
pub fn fixed_cases(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..Config::default()
    }
}
