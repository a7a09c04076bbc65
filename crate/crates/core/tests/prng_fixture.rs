//! The PRNG golden vector is frozen in a fixture file so any reimplementation
//! of the documented recipe can be checked against the same bytes.

use sparsim::rng::Pcg32;

#[test]
fn pcg32_seed42_matches_fixture() {
    let fixture = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/tests/fixtures/pcg32_seed42.txt"
    );
    let expected: Vec<u32> = std::fs::read_to_string(fixture)
        .expect("fixture present")
        .lines()
        .map(|l| l.trim().parse().expect("u32 line"))
        .collect();
    assert_eq!(expected.len(), 4);
    let mut rng = Pcg32::new(42);
    let got: Vec<u32> = (0..4).map(|_| rng.next_u32()).collect();
    assert_eq!(got, expected);
}
