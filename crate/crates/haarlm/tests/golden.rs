use haarlm::kernels::{KernelSet, KernelSpec};
use haarlm::PwPoly;

const GOLDEN: &str = include_str!("data/kernels.txt");

#[test]
fn fresh_build_matches_the_checked_in_kernels() {
    let fresh = KernelSet::build(&KernelSpec::default(), 1.0).unwrap();
    assert_eq!(fresh.to_text(), GOLDEN);
}

#[test]
fn golden_file_round_trips_and_certifies() {
    let set = KernelSet::from_text(GOLDEN).unwrap();
    assert!(set.check().is_empty(), "{:?}", set.check());
    assert_eq!(set.to_text(), GOLDEN);
    for f in [&set.eta, &set.psi0, &set.psi, &set.big_psi] {
        assert_eq!(&PwPoly::from_text(&f.to_text()).unwrap(), f);
    }
}

#[test]
fn malformed_files_are_rejected() {
    assert!(KernelSet::from_text("").is_err());
    assert!(KernelSet::from_text("# kernelset m0=8\n").is_err());
    let cut: String = GOLDEN.lines().take_while(|l| !l.starts_with("## psi")).map(|l| format!("{l}\n")).collect();
    assert!(KernelSet::from_text(&cut).is_err());
}
