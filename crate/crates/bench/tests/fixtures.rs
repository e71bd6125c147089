use shellcrack::Technique;
use shellcrack_bench::Fixture;

#[test]
fn fixtures_build_solvable_systems() {
    for (technique, dofs) in [(Technique::Conversion, 84), (Technique::SpringSet, 88)] {
        let f = Fixture::new(0.5, 21, technique);
        let r = f.reduced(1);
        assert_eq!(r.k.nrows(), dofs, "{technique:?}");
        assert!(r.k.clone().cholesky().is_some());
    }
}
