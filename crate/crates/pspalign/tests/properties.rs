use pspalign::engine::{run, EngineOptions, StrategyChoice};
use pspalign::testkit::{random_instance, rg_accepts};
use pspalign_core::recompose::{log_projection, model_projection, Strategy};
use pspalign_core::rg::{build_rg, remove_tau, DEFAULT_MARKING_CAP};

#[test]
fn decomposed_costs_never_undercut_monolithic() {
    for seed in 1000..1060 {
        let inst = random_instance(seed, 6);
        let opts = |strategy| EngineOptions { strategy, threads: 2, ..Default::default() };
        let mono = run(&inst.net, &inst.alphabet, &inst.log, &opts(StrategyChoice::Monolithic)).unwrap();
        let comp = run(&inst.net, &inst.alphabet, &inst.log, &opts(StrategyChoice::SComponent)).unwrap();
        let rg = remove_tau(&build_rg(&inst.net, DEFAULT_MARKING_CAP).unwrap()).unwrap();
        for ((t, m), c) in inst.log.traces().iter().zip(&mono.traces).zip(&comp.traces) {
            let (m, c) = (m.result.as_ref().unwrap(), c.result.as_ref().unwrap());
            assert!(c.cost >= m.cost, "seed {seed}");
            assert_eq!(log_projection(&c.moves), t.labels, "seed {seed}");
            assert!(rg_accepts(&rg, &model_projection(&c.moves)), "seed {seed}");
        }
    }
}

#[test]
fn fallbacks_are_optimal() {
    let mut fallbacks = 0;
    for seed in 2000..2100 {
        let inst = random_instance(seed, 6);
        let opts = |strategy| EngineOptions { strategy, threads: 1, ..Default::default() };
        let mono = run(&inst.net, &inst.alphabet, &inst.log, &opts(StrategyChoice::Monolithic)).unwrap();
        let comp = run(&inst.net, &inst.alphabet, &inst.log, &opts(StrategyChoice::SComponent)).unwrap();
        for (m, c) in mono.traces.iter().zip(&comp.traces) {
            if c.conflict.is_some() {
                fallbacks += 1;
                assert_eq!(c.strategy, Strategy::Monolithic);
                assert_eq!(c.result.as_ref().unwrap().cost, m.result.as_ref().unwrap().cost);
            }
        }
    }
    assert!(fallbacks > 0);
}

#[test]
fn memo_and_threads_do_not_change_costs() {
    for seed in 3000..3030 {
        let inst = random_instance(seed, 10);
        let costs = |memo, threads| {
            let opts = EngineOptions { strategy: StrategyChoice::Monolithic, memo, threads, ..Default::default() };
            let r = run(&inst.net, &inst.alphabet, &inst.log, &opts).unwrap();
            r.traces.iter().map(|t| t.result.as_ref().unwrap().cost).collect::<Vec<_>>()
        };
        let base = costs(false, 1);
        assert_eq!(costs(true, 1), base, "seed {seed}");
        assert_eq!(costs(true, 4), base, "seed {seed}");
    }
}
