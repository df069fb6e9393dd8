use hwsn_core::scenario::ScenarioConfig;

const REFERENCE: &str = include_str!("../../../docs/config-reference.toml");

#[test]
fn reference_file_matches_the_defaults() {
    let parsed = ScenarioConfig::from_toml(REFERENCE).unwrap();
    let mut defaults = ScenarioConfig::with_seed(1);
    defaults.hierarchy.sector_radius = Some(defaults.sector_radius());
    assert_eq!(parsed, defaults);
}

#[test]
fn reference_names_every_key() {
    let defaults = ScenarioConfig::with_seed(1).to_toml();
    for line in defaults.lines().filter(|l| l.contains(" = ")) {
        let key = line.split(" = ").next().unwrap();
        assert!(
            REFERENCE
                .lines()
                .any(|l| l.starts_with(&format!("{key} = "))),
            "{key} undocumented"
        );
    }
}
