use std::io::Write;

use nomcor::distributions::MvnConfig;
use nomcor::gamma_star::{gamma_star_estimate, gamma_star_table, SearchLimits};
use nomcor::inference::{confidence_interval, independence_test};
use nomcor::simulation::{generate, DgpSpec, Family, SimulationConfig};
use nomcor::{ColumnRef, ColumnSpec, ContingencyTable, PairedSample, SampleKind, TableMode};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn temp_file(contents: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(contents.as_bytes()).unwrap();
    f
}

#[test]
fn sample_file_by_column_name() {
    let f = temp_file("id,group,score\n1,b,2.5\n2,a,1.0\n3,c,3.5\n4,a,0.5\n5,b,2.0\n");
    let spec = ColumnSpec {
        x: ColumnRef::Name("group".into()),
        y: ColumnRef::Name("score".into()),
    };
    let s = PairedSample::from_csv(f.path(), &spec).unwrap();
    assert_eq!(s.kind(), SampleKind::NominalReal);
    assert_eq!(s.k(), 3);
    let r = gamma_star_estimate(&s).unwrap();
    assert_eq!(r.value, 1.0);
    let ci = confidence_interval(&s, 0.9).unwrap().ci.unwrap();
    assert_eq!((ci.lo, ci.hi), (1.0, 1.0));
}

#[test]
fn table_file_matches_expanded_sample() {
    let f = temp_file(",u,v,w\nA,5,1,0\nB,0,4,2\nC,1,0,3\n");
    let t = ContingencyTable::from_csv(f.path(), None).unwrap();
    assert_eq!(t.mode(), TableMode::Counts);
    let from_table = gamma_star_table(&t, &SearchLimits::default()).unwrap();
    let from_sample = gamma_star_estimate(&t.expand().unwrap()).unwrap();
    assert_eq!(from_table.concordant, from_sample.concordant);
    assert_eq!(from_table.untied, from_sample.untied);
}

#[test]
fn config_file_round_trip() {
    let f = temp_file("[[study]]\nname = \"s\"\nkind = \"bias\"\nfamilies = [\"SU\"]\nn = [20, 40]\nalpha = [0.0, 0.5]\n");
    let cfg = SimulationConfig::from_path(f.path()).unwrap();
    assert_eq!(cfg.studies[0].n, vec![20, 40]);
    assert!(SimulationConfig::from_path("/nonexistent.cfg").is_err());
}

#[test]
fn independent_samples_rarely_reject_at_one_percent() {
    let spec = DgpSpec::new(Family::RegressionNormal, 0.0, 800).unwrap();
    let mvn = MvnConfig {
        target_error: 1e-3,
        ..MvnConfig::default()
    };
    let seeds = 100;
    let mut above = 0;
    for seed in 0..seeds {
        let s = generate(&spec, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        if independence_test(&s, &mvn).unwrap().p_value > 0.01 {
            above += 1;
        }
    }
    // P(Bin(100, 0.99) < 95) is about 5e-4
    assert!(above >= 95, "{above} of {seeds}");
}
