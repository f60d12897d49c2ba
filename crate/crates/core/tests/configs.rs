use aerocov::config::ScenarioConfig;
use aerocov::fixtures;

#[test]
fn fixture_rows_round_trip_through_json() {
    for table in [fixtures::table2(), fixtures::table3()] {
        for row in &table.rows {
            let cfg = table.config(row);
            let text = serde_json::to_string_pretty(&cfg).unwrap();
            let back: ScenarioConfig = serde_json::from_str(&text).unwrap();
            assert_eq!(back, cfg);
            assert_eq!(back.to_scenario().unwrap(), table.scenario(row));
        }
    }
}

#[test]
fn unknown_keys_are_rejected() {
    let mut v = serde_json::to_value(fixtures::fig3().config()).unwrap();
    v["tiers"][0]["heigth_m"] = 100.0.into();
    assert!(serde_json::from_value::<ScenarioConfig>(v).is_err());
}
