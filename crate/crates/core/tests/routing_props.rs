use proptest::prelude::*;

use wisesim_core::routing::{
    execute, plan, plan_1d, random_permutation, route_permutation, ScheduleFile, SwapSchedule,
};
use wisesim_core::topology::{ElectrodeCounts, QubitConfig, TrapLayout, ZoneGeometry};
use wisesim_core::wiring::{SelectStream, SelectWord};

fn grid(m: usize, n: usize, k: usize) -> TrapLayout {
    TrapLayout::new(m, n, k, ElectrodeCounts::default(), ZoneGeometry::default()).unwrap()
}

fn check(s: &SwapSchedule) {
    s.verify().unwrap();
    assert_eq!(execute(s, &s.source).unwrap(), s.target);
}

/// Reference odd-even transposition sort: number of phases, counting empty
/// ones, until the array is sorted.
fn naive_phases(mut keys: Vec<usize>) -> usize {
    let mut phases = 0;
    let mut odd = true;
    while keys.windows(2).any(|w| w[0] > w[1]) {
        let start = if odd { 0 } else { 1 };
        for i in (start..keys.len().saturating_sub(1)).step_by(2) {
            if keys[i] > keys[i + 1] {
                keys.swap(i, i + 1);
            }
        }
        phases += 1;
        odd = !odd;
    }
    phases
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn linear_routing_is_sound_and_within_n(n in 1usize..40, seed in any::<u64>()) {
        let source: Vec<u32> = (0..n as u32).collect();
        let target: Vec<u32> = random_permutation(n, seed).into_iter().map(|q| q as u32).collect();
        let s = plan_1d(&source, &target).unwrap();
        check(&s);
        prop_assert!(s.len() <= n);
        let rank: Vec<usize> = source.iter().map(|q| target.iter().position(|t| t == q).unwrap()).collect();
        prop_assert!(s.len() <= naive_phases(rank));
    }

    #[test]
    fn regular_routing_respects_the_cheaper_bound(m in 1usize..9, n in 1usize..9, seed in any::<u64>()) {
        let layout = grid(m, n, 1);
        let s = route_permutation(&layout, &random_permutation(m * n, seed)).unwrap();
        check(&s);
        prop_assert!(s.len() <= (2 * m + n).min(2 * n + m));
    }

    #[test]
    fn realistic_routing_respects_its_bound(
        (k, blocks) in (2usize..=6, 1usize..=3),
        n in 2usize..8,
        seed in any::<u64>(),
    ) {
        let m = if (k * blocks) % 2 == 0 { k * blocks } else { 2 * k * blocks };
        let layout = grid(m, n, k);
        let s = route_permutation(&layout, &random_permutation(m * n, seed)).unwrap();
        check(&s);
        prop_assert!(s.len() <= 2 * m + k * n + 2 * k, "{}x{} k={}: {}", m, n, k, s.len());
    }

    #[test]
    fn partially_filled_traps_route(blocks in 1usize..4, n in 2usize..6, fill in 0.0f64..1.0, seed in any::<u64>()) {
        let (m, k) = (2 * blocks, 2);
        let layout = grid(m, n, k);
        let zones = m * n;
        let count = ((zones as f64) * fill) as usize;
        let place = |order: Vec<usize>| {
            let mut slots = vec![None; zones];
            for (q, z) in order.into_iter().take(count).enumerate() {
                slots[z] = Some(q as u32);
            }
            QubitConfig::from_slots(&slots).merge_chains(&layout).unwrap()
        };
        let src = place(random_permutation(zones, seed));
        let tgt = place(random_permutation(zones, seed.wrapping_add(1)));
        let s = plan(&layout, &src, &tgt).unwrap();
        check(&s);
        prop_assert!(s.len() <= 2 * m + k * n + 2 * k);
    }

    #[test]
    fn schedule_files_round_trip(m in 1usize..6, n in 1usize..6, seed in any::<u64>()) {
        let layout = grid(m, n, 1);
        let s = route_permutation(&layout, &random_permutation(m * n, seed)).unwrap();
        let json = serde_json::to_string(&s.to_file()).unwrap();
        let file: ScheduleFile = serde_json::from_str(&json).unwrap();
        let back = SwapSchedule::from_file(&file, layout).unwrap();
        prop_assert_eq!(back.select_words(), s.select_words());
        check(&back);
    }

    #[test]
    fn select_words_round_trip(bits in proptest::collection::vec(any::<bool>(), 0..200)) {
        let w = SelectWord::from_bits(&bits);
        prop_assert_eq!(w.bits(), bits.clone());
        prop_assert_eq!(SelectWord::from_hex(bits.len(), &w.to_hex()).unwrap(), w.clone());
        prop_assert_eq!(w.as_bytes().len(), bits.len().div_ceil(8));
        let stream = SelectStream::new(bits.len(), 7, vec![w.clone(), w]).unwrap();
        let bytes = stream.to_bytes();
        prop_assert_eq!(SelectStream::read_from(bytes.as_slice()).unwrap().to_bytes(), bytes);
    }
}

#[test]
fn truncated_streams_are_rejected() {
    let w = SelectWord::from_bits(&[true; 12]);
    let bytes = SelectStream::new(12, 0, vec![w]).unwrap().to_bytes();
    for cut in 0..bytes.len() {
        assert!(
            SelectStream::read_from(&bytes[..cut]).is_err(),
            "cut at {cut}"
        );
    }
    let mut extra = bytes.clone();
    extra.push(0);
    assert!(SelectStream::read_from(extra.as_slice()).is_err());
}
