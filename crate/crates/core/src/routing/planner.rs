use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::topology::{ChainMode, QubitConfig, QubitId, TrapLayout};

use super::engine::{Axis, Router};
use super::{chain_step_mask, column_assignment, Phase, RoutingError, SwapSchedule, SwapStep};

fn finish(
    layout: &TrapLayout,
    steps: Vec<SwapStep>,
    source: &QubitConfig,
    target: &QubitConfig,
) -> Result<SwapSchedule, RoutingError> {
    let schedule = SwapSchedule {
        layout: layout.clone(),
        steps,
        source: source.clone(),
        target: target.clone(),
    };
    schedule.verify()?;
    Ok(schedule)
}

fn check_pair(
    layout: &TrapLayout,
    source: &QubitConfig,
    target: &QubitConfig,
) -> Result<(), RoutingError> {
    source.validate(layout)?;
    target.validate(layout)?;
    if source.qubit_multiset() != target.qubit_multiset() {
        return Err(RoutingError::MismatchedQubits);
    }
    Ok(())
}

/// Odd-even transposition sort of a linear chain: `source[z]` and
/// `target[z]` are the qubits in zone `z` before and after.
pub fn plan_1d(source: &[QubitId], target: &[QubitId]) -> Result<SwapSchedule, RoutingError> {
    let layout = TrapLayout::linear(source.len().max(1))?;
    if source.len() != target.len() {
        return Err(RoutingError::MismatchedQubits);
    }
    let (src, tgt) = (
        QubitConfig::from_order(source),
        QubitConfig::from_order(target),
    );
    check_pair(&layout, &src, &tgt)?;
    let mut router = Router::new(&layout, &src, &tgt)?;
    let target_of = router.target.clone();
    router.sort_lines(Axis::Horizontal, |t| target_of[t], |_| true);
    let steps = std::mem::take(&mut router.steps);
    finish(&layout, steps, &src, &tgt)
}

/// Line index of zone `(i, j)` along `axis`, and its position within the line.
fn line_pos(axis: Axis, (i, j): (usize, usize)) -> (usize, usize) {
    match axis {
        Axis::Horizontal => (j, i),
        Axis::Vertical => (i, j),
    }
}

/// First phase of the three-phase scheme: sort every line along `axis` so
/// that each cross line collects distinct target lines.
fn spread_to_cross_lines(router: &mut Router, axis: Axis) -> Result<(), RoutingError> {
    let layout = router.layout;
    let (lines, len) = match axis {
        Axis::Horizontal => (layout.n(), layout.m()),
        Axis::Vertical => (layout.m(), layout.n()),
    };
    let zone = |line: usize, pos: usize| match axis {
        Axis::Horizontal => layout.index(pos, line),
        Axis::Vertical => layout.index(line, pos),
    };
    let targets: Vec<Vec<usize>> = (0..lines)
        .map(|l| {
            (0..len)
                .map(|p| line_pos(axis, router.target_coords(router.tokens[zone(l, p)])).0)
                .collect()
        })
        .collect();
    let identity_ok = (0..len).all(|p| {
        let mut seen = vec![false; lines];
        (0..lines).all(|l| !std::mem::replace(&mut seen[targets[l][p]], true))
    });
    let slots = if identity_ok {
        vec![(0..len).collect(); lines]
    } else {
        column_assignment(&targets)?
    };
    let mut slot_of = vec![0usize; router.tokens.len()];
    for l in 0..lines {
        for p in 0..len {
            slot_of[router.tokens[zone(l, p)]] = slots[l][p];
        }
    }
    router.sort_lines(axis, |t| slot_of[t], |_| true);
    Ok(())
}

/// Three-phase routing on a regular array (one qubit per zone, `k = 1`).
///
/// Row-column-row costs at most `2m + n` steps and column-row-column at most
/// `2n + m`; the cheaper order is used.
pub fn plan_2d_regular(
    layout: &TrapLayout,
    source: &QubitConfig,
    target: &QubitConfig,
) -> Result<SwapSchedule, RoutingError> {
    if layout.k() != 1 {
        return Err(RoutingError::Unsupported(format!(
            "regular routing needs one qubit per junction, layout has k = {}",
            layout.k()
        )));
    }
    check_pair(layout, source, target)?;
    let full =
        |c: &QubitConfig| c.mode() == ChainMode::Split && c.zones().iter().all(|z| z.len() == 1);
    if !full(source) || !full(target) {
        return Err(RoutingError::NotOnePerZone);
    }
    let mut router = Router::new(layout, source, target)?;
    let first = if layout.m() > layout.n() {
        Axis::Vertical
    } else {
        Axis::Horizontal
    };
    spread_to_cross_lines(&mut router, first)?;
    let target_of = router.target.clone();
    let tc = |t: usize| layout.coords(target_of[t]);
    router.sort_lines(first.other(), |t| line_pos(first, tc(t)).0, |_| true);
    router.sort_lines(first, |t| line_pos(first, tc(t)).1, |_| true);
    let steps = std::mem::take(&mut router.steps);
    finish(layout, steps, source, target)
}

/// Routing on a trap with `k` gate zones per junction, between chained
/// configurations.
///
/// Chains are split into their slots, tokens are spread along the segments so
/// that every cross line holds distinct target lines, then each block of `k`
/// cross lines is fed through its junction track one cross line at a time.
/// Between rounds, one odd and one even horizontal phase move the next
/// unvisited token of each block onto the track. A final row sort and a merge
/// complete the schedule. At most `2m + kn + 2k` steps.
pub fn plan_2d_realistic(
    layout: &TrapLayout,
    source: &QubitConfig,
    target: &QubitConfig,
) -> Result<SwapSchedule, RoutingError> {
    for c in [source, target] {
        if c.mode() != ChainMode::Chained {
            return Err(RoutingError::Unsupported(
                "realistic routing takes chained configurations".into(),
            ));
        }
    }
    check_pair(layout, source, target)?;
    let split_src = source.split_chains(layout)?;
    let split_tgt = target.split_chains(layout)?;
    let mut steps = vec![SwapStep::new(
        Phase::Split,
        chain_step_mask(layout, source, Phase::Split)?,
    )];

    let mut router = Router::new(layout, &split_src, &split_tgt)?;
    spread_to_cross_lines(&mut router, Axis::Horizontal)?;

    let target_of = router.target.clone();
    let tj = |t: usize| layout.coords(target_of[t]).1;
    let settled = |r: &Router| {
        r.tokens
            .iter()
            .enumerate()
            .all(|(z, &t)| layout.coords(z).1 == tj(t))
    };
    let k = layout.k();
    let mut visited = vec![false; router.tokens.len()];
    for round in 0..k {
        if settled(&router) {
            break;
        }
        if round > 0 {
            router.rotate_blocks(&visited);
        }
        router.sort_lines(Axis::Vertical, tj, |i| layout.is_junction_track(i));
        for j in 0..layout.n() {
            for i in (0..layout.m()).step_by(k) {
                visited[router.tokens[layout.index(i, j)]] = true;
            }
        }
    }
    router.sort_lines(
        Axis::Horizontal,
        |t| layout.coords(target_of[t]).0,
        |_| true,
    );
    debug_assert!(router.is_done());
    steps.append(&mut router.steps);
    steps.push(SwapStep::new(
        Phase::Merge,
        chain_step_mask(layout, &split_tgt, Phase::Merge)?,
    ));
    finish(layout, steps, source, target)
}

/// Picks the planner matching the layout and configuration mode.
pub fn plan(
    layout: &TrapLayout,
    source: &QubitConfig,
    target: &QubitConfig,
) -> Result<SwapSchedule, RoutingError> {
    match source.mode() {
        ChainMode::Chained => plan_2d_realistic(layout, source, target),
        ChainMode::Split if layout.n() == 1 && layout.k() == 1 => {
            let (s, t) = (source.slots()?, target.slots()?);
            if s.iter().chain(&t).any(Option::is_none) {
                return Err(RoutingError::NotOnePerZone);
            }
            let s: Vec<_> = s.into_iter().flatten().collect();
            let t: Vec<_> = t.into_iter().flatten().collect();
            plan_1d(&s, &t)
        }
        ChainMode::Split => plan_2d_regular(layout, source, target),
    }
}

/// Source and target configurations for moving the content of zone `z` to
/// zone `perm[z]`.
///
/// With `k = 1` every zone holds qubit `z`. With `k >= 2` every chain slot is
/// full; after the target is merged into chains, partners within a chain are
/// ordered by id, so `perm` is realised up to that order.
pub fn permutation_configs(
    layout: &TrapLayout,
    perm: &[usize],
) -> Result<(QubitConfig, QubitConfig), RoutingError> {
    let zones = layout.zone_count();
    let mut seen = vec![false; zones];
    if perm.len() != zones
        || perm
            .iter()
            .any(|&p| p >= zones || std::mem::replace(&mut seen[p], true))
    {
        return Err(RoutingError::MismatchedQubits);
    }
    let ids: Vec<QubitId> = (0..zones as QubitId).collect();
    let mut moved = vec![0; zones];
    for (z, &p) in perm.iter().enumerate() {
        moved[p] = z as QubitId;
    }
    let (src, tgt) = (
        QubitConfig::from_order(&ids),
        QubitConfig::from_order(&moved),
    );
    if layout.k() == 1 {
        Ok((src, tgt))
    } else {
        Ok((src.merge_chains(layout)?, tgt.merge_chains(layout)?))
    }
}

/// Plans the routing that moves zone `z` to zone `perm[z]`.
pub fn route_permutation(
    layout: &TrapLayout,
    perm: &[usize],
) -> Result<SwapSchedule, RoutingError> {
    let (src, tgt) = permutation_configs(layout, perm)?;
    plan(layout, &src, &tgt)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstCase {
    /// Candidate name: `reversal`, `mirror_i`, `mirror_j`, `transpose` or `random:<seed>`.
    pub name: String,
    pub perm: Vec<usize>,
    pub steps: usize,
}

pub const WORST_CASE_SEEDS: u64 = 8;

/// Named candidate permutations of a layout's zones.
pub fn candidate_permutations(layout: &TrapLayout) -> Vec<(String, Vec<usize>)> {
    let (m, n, zones) = (layout.m(), layout.n(), layout.zone_count());
    let mut out = vec![
        ("reversal".to_string(), (0..zones).rev().collect::<Vec<_>>()),
        (
            "mirror_i".to_string(),
            (0..zones)
                .map(|z| {
                    let (i, j) = layout.coords(z);
                    layout.index(m - 1 - i, j)
                })
                .collect(),
        ),
        (
            "mirror_j".to_string(),
            (0..zones)
                .map(|z| {
                    let (i, j) = layout.coords(z);
                    layout.index(i, n - 1 - j)
                })
                .collect(),
        ),
    ];
    if m == n {
        out.push((
            "transpose".to_string(),
            (0..zones)
                .map(|z| {
                    let (i, j) = layout.coords(z);
                    layout.index(j, i)
                })
                .collect(),
        ));
    }
    for seed in 0..WORST_CASE_SEEDS {
        out.push((format!("random:{seed}"), random_permutation(zones, seed)));
    }
    out
}

pub fn random_permutation(len: usize, seed: u64) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..len).collect();
    perm.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    perm
}

/// The candidate permutation needing the most steps; the first one wins ties.
pub fn worst_case_permutation(layout: &TrapLayout) -> Result<WorstCase, RoutingError> {
    let mut best: Option<WorstCase> = None;
    for (name, perm) in candidate_permutations(layout) {
        let steps = route_permutation(layout, &perm)?.len();
        if best.as_ref().is_none_or(|b| steps > b.steps) {
            best = Some(WorstCase { name, perm, steps });
        }
    }
    Ok(best.expect("candidate family is never empty"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{ElectrodeCounts, ZoneGeometry};

    fn order(n: usize) -> Vec<QubitId> {
        (0..n as QubitId).collect()
    }

    #[test]
    fn identity_needs_no_steps() {
        assert!(plan_1d(&order(5), &order(5)).unwrap().is_empty());
        let l = TrapLayout::regular(4, 4).unwrap();
        assert!(route_permutation(&l, &(0..16).collect::<Vec<_>>())
            .unwrap()
            .is_empty());
    }

    #[test]
    fn reversal_takes_n_steps() {
        for n in 3..=9 {
            let rev: Vec<QubitId> = order(n).into_iter().rev().collect();
            assert_eq!(plan_1d(&order(n), &rev).unwrap().len(), n);
        }
    }

    #[test]
    fn eight_zone_single_step() {
        // Qubits 2,1,3,4,6,5,8,7 need exactly the pairs (0,1), (4,5), (6,7).
        let s = plan_1d(&[2, 1, 3, 4, 6, 5, 8, 7], &[1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.steps[0].phase, Phase::OddHorizontal);
        assert_eq!(
            s.steps[0].mask.bits(),
            vec![true, true, false, false, true, true, true, true]
        );
    }

    #[test]
    fn mismatched_sets_rejected() {
        assert_eq!(
            plan_1d(&[0, 1], &[0, 2]).unwrap_err(),
            RoutingError::MismatchedQubits
        );
        assert_eq!(
            plan_1d(&[0, 1], &[0]).unwrap_err(),
            RoutingError::MismatchedQubits
        );
    }

    #[test]
    fn regular_reversal_within_bound() {
        let l = TrapLayout::regular(4, 4).unwrap();
        let s = route_permutation(&l, &(0..16).rev().collect::<Vec<_>>()).unwrap();
        assert!(s.len() <= 12, "{}", s.len());
    }

    #[test]
    fn regular_uses_cheaper_order_when_tall() {
        let l = TrapLayout::regular(9, 2).unwrap();
        for seed in 0..20 {
            let s = route_permutation(&l, &random_permutation(18, seed)).unwrap();
            assert!(s.len() <= 2 * 2 + 9, "{}", s.len());
        }
    }

    #[test]
    fn regular_rejects_holes() {
        let l = TrapLayout::regular(2, 2).unwrap();
        let c = QubitConfig::from_slots(&[Some(0), None, Some(1), Some(2)]);
        assert_eq!(
            plan_2d_regular(&l, &c, &c).unwrap_err(),
            RoutingError::NotOnePerZone
        );
    }

    fn chained(m: usize, n: usize, k: usize) -> TrapLayout {
        TrapLayout::new(m, n, k, ElectrodeCounts::default(), ZoneGeometry::default()).unwrap()
    }

    #[test]
    fn realistic_identity_is_split_and_merge() {
        let l = chained(12, 5, 6);
        let s = route_permutation(&l, &(0..60).collect::<Vec<_>>()).unwrap();
        assert_eq!(
            s.steps.iter().map(|s| s.phase).collect::<Vec<_>>(),
            vec![Phase::Split, Phase::Merge]
        );
    }

    #[test]
    fn realistic_neighbour_exchange() {
        let l = chained(4, 1, 2);
        let src = QubitConfig::new(
            ChainMode::Chained,
            vec![vec![], vec![0, 1], vec![], vec![2, 3]],
        );
        let tgt = QubitConfig::new(
            ChainMode::Chained,
            vec![vec![], vec![0, 2], vec![], vec![1, 3]],
        );
        let s = plan_2d_realistic(&l, &src, &tgt).unwrap();
        assert!(s.len() <= 3, "{:?}", s.steps);
    }

    #[test]
    fn realistic_random_within_bound() {
        for (m, n, k) in [(4, 3, 2), (6, 4, 3), (12, 5, 4), (12, 7, 6), (8, 8, 8)] {
            let l = chained(m, n, k);
            for seed in 0..10 {
                let s = route_permutation(&l, &random_permutation(m * n, seed)).unwrap();
                assert!(
                    s.len() <= 2 * m + k * n + 2 * k,
                    "{m}x{n} k={k}: {}",
                    s.len()
                );
            }
        }
    }

    #[test]
    fn realistic_with_partial_chains() {
        let l = chained(6, 3, 3);
        let mut src = vec![vec![]; 18];
        let mut tgt = vec![vec![]; 18];
        let slots = l.chain_slots().unwrap();
        src[slots[0].home] = vec![0, 1];
        src[slots[4].home] = vec![2];
        tgt[slots[8].home] = vec![2, 0];
        tgt[slots[1].home] = vec![1];
        let s = plan_2d_realistic(
            &l,
            &QubitConfig::new(ChainMode::Chained, src),
            &QubitConfig::new(ChainMode::Chained, tgt),
        )
        .unwrap();
        s.verify().unwrap();
    }

    #[test]
    fn worst_case_1d_is_reversal() {
        let l = TrapLayout::linear(8).unwrap();
        let w = worst_case_permutation(&l).unwrap();
        assert_eq!(w.name, "reversal");
        assert_eq!(w.steps, 8);
    }

    #[test]
    fn planning_is_deterministic() {
        let l = chained(12, 7, 6);
        let p = random_permutation(84, 42);
        assert_eq!(
            route_permutation(&l, &p).unwrap(),
            route_permutation(&l, &p).unwrap()
        );
    }
}
