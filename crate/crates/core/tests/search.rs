use std::path::PathBuf;
use std::time::Duration;

use igsd::oracle::enumerate_all;
use igsd::search::{Candidate, PassContext, SearchSpace, discover};
use igsd::{Association, Dataset, Op, SchemaHints, SearchConfig, Selector, ThresholdMode, load_csv};
use smallvec::smallvec;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn load(name: &str, target: &str) -> Dataset {
    load_csv(data(name), &SchemaHints::new())
        .unwrap()
        .resolve_target(&[target], 2)
        .unwrap()
}

fn cfg(mode: ThresholdMode, dmax: usize) -> SearchConfig {
    SearchConfig {
        t_mode: mode,
        dmax: Some(dmax),
        ..SearchConfig::default()
    }
}

fn id_of(space: &SearchSpace<'_>, attr: &str, value: &str) -> u16 {
    let a = space.dataset().column_index(attr).unwrap();
    (0..space.selectors().len() as u16)
        .find(|&id| *space.selector(id) == Selector::eq(a, value))
        .unwrap()
}

#[test]
fn tic_tac_toe_has_27_selectors() {
    let d = load("tic-tac-toe.csv", "class");
    let space = SearchSpace::new(&d, 9, Default::default()).unwrap();
    assert_eq!(space.selectors().len(), 27);
    assert!(space.selectors().iter().all(|s| s.condition.op() == Op::Eq));
}

#[test]
fn fixture_enumeration_count() {
    // 6 singles, 12 attribute-distinct pairs, 6 of 8 triples have rows.
    let d = load("fixture8.csv", "T");
    let pass = &d.ovr_passes().unwrap()[0];
    let all = enumerate_all(&d, pass, &cfg(ThresholdMode::Dynamic, 3)).unwrap();
    assert_eq!(all.len(), 24);
    assert_eq!(all.iter().filter(|c| c.ids.len() == 3).count(), 6);
}

#[test]
fn fixture_dynamic_expansion_keeps_the_pure_children() {
    let d = load("fixture8.csv", "T");
    let config = cfg(ThresholdMode::Dynamic, 3);
    let space = SearchSpace::for_config(&d, &config).unwrap();
    let yes = d.ovr_passes().unwrap().into_iter().find(|t| t.positive_class == "yes").unwrap();
    let ctx = PassContext::new(&space, &yes, &config).unwrap();
    let x = id_of(&space, "A", "x");
    let parent = Candidate::new(smallvec![x], space.confusion(&[x], &ctx.positives));
    let mut kids: Vec<Vec<u16>> = ctx.expand(&parent).into_iter().map(|c| c.selectors.to_vec()).collect();
    kids.sort();
    let mut want = vec![vec![x, id_of(&space, "B", "p")], vec![x, id_of(&space, "C", "u")]];
    want.sort();
    assert_eq!(kids, want);
}

#[test]
fn dmax_one_returns_thresholded_singles() {
    let d = load("tic-tac-toe.csv", "class");
    for mode in [ThresholdMode::Maximum, ThresholdMode::Dynamic] {
        let config = cfg(mode, 1);
        let space = SearchSpace::for_config(&d, &config).unwrap();
        let found = discover(&space, &config).unwrap();
        assert!(!found.truncated());
        for pass in &found.passes {
            assert!(!pass.frontier.is_empty());
            assert!(pass.frontier.iter().all(|c| c.len() == 1));
        }
    }
}

#[test]
fn maximum_depth_one_is_within_dynamic() {
    let d = load("tic-tac-toe.csv", "class");
    let run = |mode| {
        let config = cfg(mode, 1);
        let space = SearchSpace::for_config(&d, &config).unwrap();
        discover(&space, &config).unwrap()
    };
    let (max, dynamic) = (run(ThresholdMode::Maximum), run(ThresholdMode::Dynamic));
    for (m, dy) in max.passes.iter().zip(&dynamic.passes) {
        assert!(m.frontier.iter().all(|c| dy.frontier.contains(c)));
        assert!(m.frontier.len() <= dy.frontier.len());
    }
}

#[test]
fn zero_budget_stops_after_the_first_level() {
    let d = load("tic-tac-toe.csv", "class");
    let config = SearchConfig {
        time_budget: Duration::ZERO,
        ..cfg(ThresholdMode::Dynamic, 4)
    };
    let space = SearchSpace::for_config(&d, &config).unwrap();
    let found = discover(&space, &config).unwrap();
    assert!(found.truncated());
    assert!(found.passes.iter().flat_map(|p| &p.frontier).all(|c| c.len() == 1));
}

#[test]
fn frontier_candidates_respect_depth_and_attributes() {
    let d = load("tic-tac-toe.csv", "class");
    let config = cfg(ThresholdMode::Dynamic, 3);
    let space = SearchSpace::for_config(&d, &config).unwrap();
    for pass in discover(&space, &config).unwrap().passes {
        for c in &pass.frontier {
            assert_eq!(c.len(), 3);
            let mut attrs: Vec<usize> = c.selectors.iter().map(|&s| space.attribute(s)).collect();
            attrs.sort();
            attrs.dedup();
            assert_eq!(attrs.len(), 3);
            assert!(c.covered > 0);
        }
    }
}

#[test]
fn positive_association_keeps_only_enriched_candidates() {
    let d = load("tic-tac-toe.csv", "class");
    let config = SearchConfig {
        association: Association::Positive,
        ..cfg(ThresholdMode::Dynamic, 3)
    };
    let space = SearchSpace::for_config(&d, &config).unwrap();
    for pass in discover(&space, &config).unwrap().passes {
        let pos = d.positives(&pass.target).unwrap().count() as u64;
        let n = d.n_rows() as u64;
        for c in &pass.frontier {
            assert!(c.tp as u64 * n > c.covered as u64 * pos);
        }
    }
}

#[test]
fn cond_list_attributes_appear_in_every_candidate() {
    let d = load("lucat-like.csv", "progression");
    let config = SearchConfig {
        cond_list: vec!["stage".into(), "first_treatment".into()],
        ..cfg(ThresholdMode::Dynamic, 3)
    };
    let space = SearchSpace::for_config(&d, &config).unwrap();
    let (stage, treat) = (d.column_index("stage").unwrap(), d.column_index("first_treatment").unwrap());
    let found = discover(&space, &config).unwrap();
    assert!(found.passes.iter().any(|p| !p.frontier.is_empty()));
    for c in found.passes.iter().flat_map(|p| &p.frontier) {
        assert!(c.contains_attribute(&space, stage) && c.contains_attribute(&space, treat));
    }
}

#[test]
fn cond_list_longer_than_dmax_is_rejected() {
    let d = load("lucat-like.csv", "progression");
    let config = SearchConfig {
        cond_list: vec!["stage".into(), "first_treatment".into()],
        ..cfg(ThresholdMode::Dynamic, 1)
    };
    assert!(config.cond_attributes(&d).is_err());
}
