mod common;

use hess_core::fis::{decode_genome, evaluate_batch, evaluate_scalar, FisBatch, FisSpec, MfGenome};
use hess_core::moo::{
    controlled_elitist_select, crowding_distance, dominates, hypervolume, non_dominated_sort,
    rank_population, vary_pair, Candidate, VariationParams,
};
use hess_core::powertrain::{
    battery_count, battery_current_from_power, request_bounds, step_supercapacitor, BatteryParams,
    ScBand, ScParams, ScState,
};
use hess_core::sim::{simulate, HessDesign, SimParams};
use hess_core::Exec;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{brute_force_fronts, desk_lap};

fn genes() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, 28)
}

fn objectives(max: usize) -> impl Strategy<Value = Vec<[f64; 2]>> {
    prop::collection::vec((0u8..10, 0u8..10).prop_map(|(a, b)| [a as f64, b as f64]), 1..=max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decoded_partitions_are_ordered_and_cover(g in genes()) {
        let spec = decode_genome(&MfGenome::new(g).unwrap(), &FisSpec::hess_template()).unwrap();
        for part in spec.inputs().iter().chain(std::iter::once(spec.output())) {
            let (lo, hi) = part.universe();
            for set in part.sets() {
                let [a, b, c, d] = set.corners();
                prop_assert!(lo <= a && a <= b && b <= c && c <= d && d <= hi);
            }
            for k in 0..=200 {
                let x = lo + (hi - lo) * k as f64 / 200.0;
                prop_assert!(part.sets().iter().any(|s| s.membership(x) > 0.0));
            }
        }
    }

    #[test]
    fn batch_matches_scalar(pages in prop::collection::vec((genes(), 0.0f64..1.0, 0.0f64..1.0, -1.5f64..1.5), 1..12)) {
        let template = FisSpec::hess_template();
        let specs: Vec<FisSpec> = pages
            .iter()
            .map(|(g, ..)| decode_genome(&MfGenome::new(g.clone()).unwrap(), &template).unwrap())
            .collect();
        let x: Vec<f64> = pages.iter().flat_map(|(_, a, b, c)| [*a, *b, *c]).collect();
        let y = evaluate_batch(&x, &specs).unwrap();
        for (p, spec) in specs.iter().enumerate() {
            let s = evaluate_scalar(&x[3 * p..3 * p + 3], spec).unwrap();
            prop_assert!((s - y[p]).abs() <= 1e-9);
            prop_assert!((-1.0..=1.0).contains(&y[p]));
        }
    }

    #[test]
    fn sequential_and_parallel_agree(pages in prop::collection::vec((genes(), 0.0f64..1.0, 0.0f64..1.0, -1.0f64..1.0), 1..40)) {
        let template = FisSpec::hess_template();
        let specs: Vec<FisSpec> = pages
            .iter()
            .map(|(g, ..)| decode_genome(&MfGenome::new(g.clone()).unwrap(), &template).unwrap())
            .collect();
        let x: Vec<f64> = pages.iter().flat_map(|(_, a, b, c)| [*a, *b, *c]).collect();
        let seq = FisBatch::from_specs(&specs).unwrap().with_exec(Exec::Sequential).evaluate(&x).unwrap();
        let par = FisBatch::from_specs(&specs).unwrap().with_exec(Exec::Parallel).evaluate(&x).unwrap();
        prop_assert_eq!(seq, par);
    }

    #[test]
    fn retained_pages_evaluate_unchanged(pages in prop::collection::vec((genes(), any::<bool>()), 2..20)) {
        let template = FisSpec::hess_template();
        let specs: Vec<FisSpec> = pages
            .iter()
            .map(|(g, _)| decode_genome(&MfGenome::new(g.clone()).unwrap(), &template).unwrap())
            .collect();
        let keep: Vec<bool> = pages.iter().map(|(_, k)| *k).collect();
        let mut batch = FisBatch::from_specs(&specs).unwrap();
        batch.retain(&keep);
        let kept: Vec<FisSpec> = specs.iter().zip(&keep).filter(|(_, k)| **k).map(|(s, _)| s.clone()).collect();
        prop_assert_eq!(batch.n_pages(), kept.len());
        if !kept.is_empty() {
            let x: Vec<f64> = (0..kept.len()).flat_map(|p| [0.3, 0.7, p as f64 / kept.len() as f64 - 0.5]).collect();
            prop_assert_eq!(batch.evaluate(&x).unwrap(), evaluate_batch(&x, &kept).unwrap());
        }
    }

    #[test]
    fn sort_matches_oracle(objs in objectives(64)) {
        prop_assert_eq!(non_dominated_sort(&objs), brute_force_fronts(&objs));
    }

    #[test]
    fn fronts_are_internally_non_dominated(objs in objectives(40)) {
        for front in non_dominated_sort(&objs) {
            for &a in &front {
                for &b in &front {
                    prop_assert!(!dominates(&objs[a], &objs[b]));
                }
            }
        }
    }

    #[test]
    fn crowding_is_non_negative_with_infinite_ends(objs in objectives(30)) {
        let front: Vec<usize> = non_dominated_sort(&objs)[0].clone();
        let d = crowding_distance(&objs, &front);
        prop_assert!(d.iter().all(|x| *x >= 0.0));
        prop_assert!(d.iter().filter(|x| x.is_infinite()).count() >= front.len().min(2));
    }

    #[test]
    fn selection_keeps_first_front_and_size(objs in objectives(64), n in 1usize..40, ef in 0.05f64..=1.0) {
        let r = rank_population(&objs);
        let chosen = controlled_elitist_select(&r, n, ef);
        let n = n.min(objs.len());
        prop_assert_eq!(chosen.len(), n);
        let mut uniq = chosen.clone();
        uniq.sort();
        uniq.dedup();
        prop_assert_eq!(uniq.len(), n);
        let f1 = &r.fronts[0];
        let kept_f1 = chosen.iter().filter(|i| f1.contains(i)).count();
        prop_assert_eq!(kept_f1, f1.len().min(n));
    }

    #[test]
    fn selection_preserves_objective_extremes(objs in objectives(64), n in 2usize..40, ef in 0.05f64..=1.0) {
        let r = rank_population(&objs);
        let chosen = controlled_elitist_select(&r, n, ef);
        for m in 0..2 {
            let best = objs.iter().map(|o| o[m]).fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(chosen.iter().any(|&i| objs[i][m] == best));
        }
    }

    #[test]
    fn hypervolume_grows_with_points(objs in objectives(20), extra in (0u8..10, 0u8..10)) {
        let base = hypervolume(&objs);
        let mut more = objs.clone();
        more.push([extra.0 as f64, extra.1 as f64]);
        prop_assert!(hypervolume(&more) >= base);
    }

    #[test]
    fn variation_stays_in_bounds(g1 in genes(), g2 in genes(), n1 in 1usize..=120, n2 in 1usize..=120, seed: u64) {
        let vp = VariationParams {
            crossover_rate: 1.0,
            eta_c: 15.0,
            mutation_rate: 0.3,
            eta_m: 20.0,
            n_sc_min: 1,
            n_sc_max: 120,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = Candidate { n_sc: n1, genes: g1 };
        let b = Candidate { n_sc: n2, genes: g2 };
        let (c, d) = vary_pair(&a, &b, &vp, &mut rng);
        for ch in [c, d] {
            prop_assert!(ch.genes.iter().all(|g| (0.0..=1.0).contains(g)));
            prop_assert!((1..=120).contains(&ch.n_sc));
            prop_assert!(MfGenome::new(ch.genes).is_ok());
        }
    }

    #[test]
    fn battery_count_respects_budget(m_hess in 10.0f64..1000.0, n_sc in 0usize..200) {
        let bp = BatteryParams::default();
        let sp = ScParams::default();
        if let Ok(n) = battery_count(m_hess, n_sc, sp.m_bank, bp.m_cell) {
            prop_assert!(n >= 1);
            prop_assert!(n as f64 * bp.m_cell + n_sc as f64 * sp.m_bank <= m_hess);
            prop_assert!((n + 1) as f64 * bp.m_cell + n_sc as f64 * sp.m_bank > m_hess - 1e-9);
        }
    }

    #[test]
    fn charging_draws_less_current_than_discharging(p in 1.0f64..200_000.0, v in 2.5f64..4.3) {
        let bp = BatteryParams::default();
        let dis = battery_current_from_power(p, 263, v, &bp);
        let chg = battery_current_from_power(-p, 263, v, &bp);
        prop_assert!(chg.abs() < dis.abs());
    }

    #[test]
    fn supercapacitor_respects_band(n_sc in 1usize..=120, soe in 0.1f64..=0.99, p in -400_000.0f64..400_000.0, dt in 0.1f64..2.0) {
        let sp = ScParams::default().with_banks(n_sc);
        let band = ScBand::default();
        let s = ScState::at_soe(soe, &sp);
        let (lo, hi) = request_bounds(&s, dt, &sp, 0.96, &band);
        prop_assert!(lo <= 0.0 && hi >= 0.0);
        let step = step_supercapacitor(&s, p, dt, &sp, 0.96, &band);
        prop_assert!(step.p_req >= lo && step.p_req <= hi);
        prop_assert!(step.i_sc.abs() <= band.i_max);
        prop_assert!(step.state.soe >= band.soe_min && step.state.soe <= band.soe_max);
        prop_assert!(step.p_req == 0.0 || step.p_req.signum() == p.signum());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn simulation_honours_limits_and_balance(g in genes(), n_sc in 1usize..=120) {
        let params = SimParams::default();
        let d = HessDesign::new(n_sc, MfGenome::new(g).unwrap()).unwrap();
        let r = simulate(&d, &desk_lap(), &params, true).unwrap();
        let tr = r.trace.unwrap();
        let lim = params.limits;
        let n = tr.len();
        for k in 0..n {
            prop_assert!(k + 1 == n || (lim.soc_min..=lim.soc_max).contains(&tr.soc[k]));
            prop_assert!((lim.soe_min..=lim.soe_max).contains(&tr.soe[k]));
            prop_assert!(tr.i_sc[k].abs() <= lim.i_sc_max);
            prop_assert_eq!(tr.p_reqbat[k] + tr.p_reqsc[k], tr.p_dem[k]);
        }
        prop_assert!(r.j_laps >= 0.0);
    }
}
