use proptest::prelude::*;
use wdm_vlc::allocator::{brute_force, build_instance, formulate_milp, solve_bnb, ObjectiveMode};
use wdm_vlc::linkbudget::{
    achievable_rate, link_reports, noise_variance, q_function, q_inverse, to_db,
};
use wdm_vlc::optics::{gain_matrix, lambertian_order, los_gain_between, Luminaire};
use wdm_vlc::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn point() -> impl Strategy<Value = (f64, f64)> {
    (0.0..=4.0f64, 0.0..=8.0f64)
}

fn users(max: usize) -> impl Strategy<Value = Vec<UserPosition>> {
    prop::collection::vec(point().prop_map(|(x, y)| UserPosition::new(x, y)), 1..=max)
}

fn instance(users: &[UserPosition], interference: f64) -> AllocationInstance {
    let room = RoomConfig {
        power_multiplier: 5.0,
        ..RoomConfig::default()
    };
    build_instance(&room, users, &ReceiverModel::default())
        .unwrap()
        .with_weights(ObjectiveWeights {
            interference,
            ..ObjectiveWeights::default()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gain_invariant_under_rigid_motion(
        (tx, ty) in point(), (rx, ry) in point(), dx in -10.0..10.0f64, dy in -10.0..10.0f64,
        quarter_turns in 0u8..4,
    ) {
        let m = lambertian_order(70.0).unwrap();
        let g = |p: (f64, f64), q: (f64, f64)| {
            los_gain_between(
                Vec3::new(p.0, p.1, 3.0), Vec3::down(), m,
                Vec3::new(q.0, q.1, 1.0), Vec3::up(), 1e-4, 90.0,
            ).unwrap()
        };
        let turn = |(x, y): (f64, f64)| {
            (0..quarter_turns).fold((x, y), |(x, y), _| (-y, x))
        };
        let base = g((tx, ty), (rx, ry));
        let moved = g(turn((tx + dx, ty + dy)), turn((rx + dx, ry + dy)));
        prop_assert!(rel_close(base, moved, 1e-9), "{base} vs {moved}");
    }

    #[test]
    fn gain_decreases_with_lateral_offset(r1 in 0.0..5.0f64, extra in 1e-3..5.0f64) {
        let m = lambertian_order(70.0).unwrap();
        let g = |r: f64| {
            los_gain_between(
                Vec3::new(0.0, 0.0, 3.0), Vec3::down(), m,
                Vec3::new(r, 0.0, 1.0), Vec3::up(), 1e-4, 90.0,
            ).unwrap()
        };
        prop_assert!(g(r1) > g(r1 + extra));
    }

    #[test]
    fn lambertian_order_decreases_with_semiangle(a in 1.0..89.0f64, b in 1.0..89.0f64) {
        prop_assume!(a < b);
        prop_assert!(lambertian_order(a).unwrap() > lambertian_order(b).unwrap());
    }

    #[test]
    fn q_inverse_round_trips(p in 1e-15..0.49f64) {
        let x = q_inverse(p);
        prop_assert!(rel_close(q_function(x), p, 1e-9));
    }

    #[test]
    fn q_is_decreasing(x in 0.0..30.0f64, dx in 1e-3..5.0f64) {
        prop_assert!(q_function(x) >= q_function(x + dx));
    }

    #[test]
    fn db_is_monotone(a in 1e-20..1e20f64, b in 1e-20..1e20f64) {
        prop_assume!(a < b);
        prop_assert!(to_db(a) < to_db(b));
    }

    #[test]
    fn noise_is_linear_in_bandwidth(i_s in 0.0..1e-3f64, i_bg in 0.0..1e-3f64, b in 1e6..1e10f64, c in 0.1..10.0f64) {
        let rx = ReceiverModel::default();
        let n1 = noise_variance(&rx, i_s, i_bg, b);
        let n2 = noise_variance(&rx, i_s, i_bg, c * b);
        prop_assert!(rel_close(n2.total, c * n1.total, 1e-12));
        prop_assert!(rel_close(n1.total, n1.background + n1.signal_shot + n1.preamp, 1e-15));
    }

    #[test]
    fn rate_monotone_in_signal_and_interference(us in users(6), k in 1.0..20.0f64) {
        let rx = ReceiverModel::default();
        let room = RoomConfig { power_multiplier: k, ..RoomConfig::default() };
        let gains = gain_matrix(&room, &us, &rx).unwrap();
        let links: Vec<Link> = (0..us.len()).map(|u| Link::new(u % 8, Wavelength::from_index(u / 8 % 4).unwrap())).collect();
        let a = Assignment::new(links, 8).unwrap();
        for r in link_reports(&room, &rx, &gains, &a, 1e-9).unwrap() {
            let mut stronger = r.clone();
            stronger.signal_sq *= 2.0;
            let mut jammed = r.clone();
            jammed.interference_sq = jammed.interference_sq * 2.0 + 1e-20;
            let base = achievable_rate(&r, &rx, 1e-9);
            prop_assert!(achievable_rate(&stronger, &rx, 1e-9) >= base);
            prop_assert!(achievable_rate(&jammed, &rx, 1e-9) <= base);
            prop_assert!(base <= rx.rate_cap);
        }
    }

    #[test]
    fn lone_user_sinr_grows_with_power(p in point(), k in 1.0..10.0f64) {
        let rx = ReceiverModel::default();
        let user = [UserPosition::new(p.0, p.1)];
        let a = Assignment::new(vec![Link::new(5, Wavelength::Red)], 8).unwrap();
        let at = |k: f64| {
            let room = RoomConfig { power_multiplier: k, ..RoomConfig::default() };
            wdm_vlc::linkbudget::sinr(&user, &a, &room, &rx).unwrap()[0].sinr
        };
        prop_assert!(at(2.0 * k) >= at(k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bnb_matches_exhaustive_search(us in users(3), heavy in any::<bool>()) {
        let inst = instance(&us, if heavy { 3000.0 } else { 1.0 });
        for mode in [ObjectiveMode::Surrogate, ObjectiveMode::TrueSinr] {
            let fast = solve_bnb(&inst, mode).unwrap();
            let slow = brute_force(&inst, mode).unwrap();
            prop_assert_eq!(fast.objective(mode), slow.objective(mode));
            prop_assert_eq!(&fast.assignment, &slow.assignment);
        }
    }

    #[test]
    fn optimum_invariant_under_user_permutation(us in users(7), shift in 0usize..7) {
        let inst = instance(&us, 3000.0);
        let n = us.len();
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let a = solve_bnb(&inst, ObjectiveMode::Surrogate).unwrap();
        let b = solve_bnb(&inst.permuted(&perm), ObjectiveMode::Surrogate).unwrap();
        prop_assert!(rel_close(a.surrogate_objective, b.surrogate_objective, 1e-9));
        // The permuted optimum maps back to an optimum of the original.
        let mut back = vec![0; n];
        for (i, &p) in perm.iter().enumerate() {
            back[p] = b.pair_indices()[i];
        }
        prop_assert!(rel_close(inst.surrogate(&back), a.surrogate_objective, 1e-9));
    }

    #[test]
    fn optimum_invariant_under_scaling(us in users(7), c in 1e-3..1e3f64) {
        let inst = instance(&us, 3000.0);
        let a = solve_bnb(&inst, ObjectiveMode::Surrogate).unwrap();
        let b = solve_bnb(&inst.scaled(c), ObjectiveMode::Surrogate).unwrap();
        prop_assert!(rel_close(b.surrogate_objective, c * a.surrogate_objective, 1e-9));
        prop_assert!(rel_close(inst.surrogate(&b.pair_indices()), a.surrogate_objective, 1e-9));
    }

    #[test]
    fn green_and_blue_swap_preserves_value(us in users(6)) {
        let inst = instance(&us, 3000.0);
        let sol = solve_bnb(&inst, ObjectiveMode::Surrogate).unwrap();
        let swapped: Vec<usize> = sol
            .pair_indices()
            .iter()
            .map(|&p| match p % 4 { 2 => p + 1, 3 => p - 1, _ => p })
            .collect();
        prop_assert_eq!(inst.surrogate(&swapped), sol.surrogate_objective);
        // The reported optimum opens green before blue.
        let first = sol.pair_indices().iter().map(|p| p % 4).find(|w| *w >= 2);
        prop_assert!(first != Some(3));
    }

    #[test]
    fn milp_objective_matches_surrogate(us in users(4), seed in any::<u64>()) {
        let inst = instance(&us, 3000.0);
        let model = formulate_milp(&inst);
        let sol = wdm_vlc::allocator::baseline_random(&inst, seed).unwrap();
        let x = model.point_for(&sol.assignment);
        prop_assert!(model.is_feasible(&x, 1e-12));
        prop_assert!(rel_close(model.objective_value(&x), sol.surrogate_objective, 1e-12));
    }

    #[test]
    fn room_translation_keeps_gain_matrix(us in users(5), dx in 0.0..5.0f64, dy in 0.0..5.0f64) {
        let rx = ReceiverModel::default();
        let room = RoomConfig::default();
        let shifted = RoomConfig {
            width: room.width + dx,
            length: room.length + dy,
            luminaires: room
                .luminaires
                .iter()
                .map(|l| Luminaire { position: l.position + Vec3::new(dx, dy, 0.0), ..l.clone() })
                .collect(),
            ..room.clone()
        };
        let moved: Vec<UserPosition> = us.iter().map(|u| UserPosition::new(u.x + dx, u.y + dy)).collect();
        let g0 = gain_matrix(&room, &us, &rx).unwrap();
        let g1 = gain_matrix(&shifted, &moved, &rx).unwrap();
        for u in 0..us.len() {
            for a in 0..8 {
                prop_assert!(rel_close(g0.get(u, a), g1.get(u, a), 1e-9));
            }
        }
    }
}
