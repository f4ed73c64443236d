mod common;

use common::{fault_corpus, golden_dir, scenarios_dir, tiny};
use hrgame::explicit::{
    export_explicit, import_explicit, parse_explicit, parse_strategy, read_strategy, render_explicit, render_strategy,
    write_strategy, ExplicitError, ExplicitFiles,
};
use hrgame::random::{random_game, random_product, RandomGameParams};
use hrgame::scenarios::Scenario;
use hrgame::solver::{synthesize, SolverOptions};
use hrgame::{Player, StochasticGame};
use proptest::prelude::*;

fn read_golden(name: &str) -> String {
    std::fs::read_to_string(golden_dir().join(name)).unwrap()
}

#[test]
fn tiny_game_matches_golden_files() {
    let pg = tiny();
    let files = render_explicit(&pg).unwrap();
    assert_eq!(files.sta, read_golden("model.sta"));
    assert_eq!(files.tra, read_golden("model.tra"));
    assert_eq!(files.lab, read_golden("model.lab"));
    assert_eq!(files.pla, read_golden("model.pla"));
    let syn = synthesize(&pg, &SolverOptions::default()).unwrap();
    assert_eq!(render_strategy(&pg.graph, &syn.strategy), read_golden("model.str"));
}

#[test]
fn golden_files_import() {
    let g: StochasticGame = import_explicit(&golden_dir()).unwrap();
    assert_eq!(g.graph, tiny().graph);
    let strat = read_strategy(&g.graph, &golden_dir().join("model.str")).unwrap();
    assert_eq!(strat.choice(0, Player::Robot), Some(0));
    assert_eq!(strat.choice(1, Player::Human), Some(1));
}

#[test]
fn export_import_export_is_byte_identical_on_disk() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..20 {
        let g = random_game::<f64>(seed, &RandomGameParams::default());
        let a = dir.path().join(format!("a{seed}"));
        let b = dir.path().join(format!("b{seed}"));
        std::fs::create_dir_all(&a).unwrap();
        std::fs::create_dir_all(&b).unwrap();
        let bundle = export_explicit(&g, &a).unwrap();
        let back: StochasticGame = import_explicit(&a).unwrap();
        assert_eq!(back.graph, g.graph);
        assert_eq!(back.labels, g.labels);
        assert_eq!(back.valuations, g.valuations);
        export_explicit(&back, &b).unwrap();
        for f in ["model.sta", "model.tra", "model.lab", "model.pla"] {
            assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "seed {seed} {f}");
        }
        assert!(bundle.tra.exists());
    }
}

#[test]
fn scenario_games_round_trip() {
    let scenarios = Scenario::load_dir(&scenarios_dir()).unwrap();
    assert!(scenarios.len() >= 3);
    for sc in scenarios {
        let g = sc.build_game::<f64>(hrgame::domain::DEFAULT_STATE_CAPACITY).unwrap();
        let files = render_explicit(&g).unwrap();
        let back: StochasticGame = parse_explicit(&files).unwrap();
        assert_eq!(render_explicit(&back).unwrap(), files, "{}", sc.name);
    }
}

#[test]
fn strategies_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..20 {
        let pg = random_product::<f64>(seed, &RandomGameParams::default());
        let syn = synthesize(&pg, &SolverOptions::default()).unwrap();
        let path = dir.path().join("model.str");
        write_strategy(&pg.graph, &syn.strategy, &path).unwrap();
        assert_eq!(read_strategy(&pg.graph, &path).unwrap(), syn.strategy);
    }
}

#[test]
fn faults_are_located() {
    let corpus = fault_corpus();
    assert_eq!(corpus.len(), 10);
    for fault in corpus {
        match parse_explicit::<f64>(&fault.files) {
            Ok(_) => panic!("{} was accepted", fault.name),
            Err(e) => {
                assert_eq!((e.file.as_str(), e.line), (fault.file, fault.line), "{}: {e}", fault.name);
            }
        }
    }
}

#[test]
fn substochastic_choice_is_named() {
    let mut files = render_explicit(&tiny()).unwrap();
    files.tra = files.tra.replace("1 1 3 1 quit", "1 1 3 0.5 quit");
    let e = parse_explicit::<f64>(&files).unwrap_err();
    assert!(e.message.contains('1') && e.message.contains("0.5"), "{e}");
}

#[test]
fn missing_file_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    assert!(matches!(import_explicit::<f64>(dir.path()), Err(ExplicitError::Io { .. })));
}

#[test]
fn strategy_with_unknown_action_is_rejected() {
    let pg = tiny();
    let e = parse_strategy(&pg.graph, "0 jump\n").unwrap_err();
    assert_eq!((e.file.as_str(), e.line), ("model.str", 1));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rendering_is_stable(seed in any::<u64>()) {
        let g = random_game::<f64>(seed, &RandomGameParams::default());
        let files = render_explicit(&g).unwrap();
        let back: StochasticGame = parse_explicit(&files).unwrap();
        prop_assert_eq!(&back.graph, &g.graph);
        let again: ExplicitFiles = render_explicit(&back).unwrap();
        prop_assert_eq!(again, files);
    }
}
