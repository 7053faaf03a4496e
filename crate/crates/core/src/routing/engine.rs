//! Token-level simulation used by the planners.
//!
//! Every zone carries one token; tokens standing for empty zones are
//! "holes". Swaps are applied to the token array directly and recorded as
//! steps whose masks only cover pairs that move at least one real qubit.

use crate::topology::{QubitConfig, TrapLayout};
use crate::wiring::SelectWord;

use super::{Phase, RoutingError, SwapStep};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Axis {
    Horizontal,
    Vertical,
}

impl Axis {
    fn phase(self, odd: bool) -> Phase {
        match (self, odd) {
            (Axis::Horizontal, true) => Phase::OddHorizontal,
            (Axis::Horizontal, false) => Phase::EvenHorizontal,
            (Axis::Vertical, true) => Phase::OddVertical,
            (Axis::Vertical, false) => Phase::EvenVertical,
        }
    }

    pub(crate) fn other(self) -> Axis {
        match self {
            Axis::Horizontal => Axis::Vertical,
            Axis::Vertical => Axis::Horizontal,
        }
    }
}

pub(crate) struct Router<'a> {
    pub layout: &'a TrapLayout,
    /// Token standing in each zone.
    pub tokens: Vec<usize>,
    /// Target zone of each token.
    pub target: Vec<usize>,
    /// Whether each token is a qubit rather than a hole.
    pub real: Vec<bool>,
    pub steps: Vec<SwapStep>,
}

impl<'a> Router<'a> {
    /// Tokens are numbered by source zone. Holes in the source are matched to
    /// holes in the target in index order.
    pub fn new(
        layout: &'a TrapLayout,
        source: &QubitConfig,
        target: &QubitConfig,
    ) -> Result<Self, RoutingError> {
        let src = source.slots()?;
        let tgt = target.slots()?;
        let zones = layout.zone_count();
        let mut target_zone = vec![usize::MAX; zones];
        let mut real = vec![false; zones];
        let mut holes = tgt
            .iter()
            .enumerate()
            .filter(|(_, s)| s.is_none())
            .map(|(z, _)| z);
        for (z, s) in src.iter().enumerate() {
            target_zone[z] = match s {
                Some(q) => {
                    real[z] = true;
                    target.zone_of(*q).ok_or(RoutingError::MismatchedQubits)?
                }
                None => holes.next().ok_or(RoutingError::MismatchedQubits)?,
            };
        }
        Ok(Router {
            layout,
            tokens: (0..zones).collect(),
            target: target_zone,
            real,
            steps: Vec::new(),
        })
    }

    pub fn target_coords(&self, token: usize) -> (usize, usize) {
        self.layout.coords(self.target[token])
    }

    /// Applies one swap phase to `pairs` and records it if any qubit moves.
    pub fn apply(&mut self, phase: Phase, pairs: &[(usize, usize)]) {
        let mut mask = SelectWord::zeros(self.layout.zone_count());
        for &(a, b) in pairs {
            if self.real[self.tokens[a]] || self.real[self.tokens[b]] {
                mask.set(a, true);
                mask.set(b, true);
            }
            self.tokens.swap(a, b);
        }
        if mask.count_ones() > 0 {
            self.steps.push(SwapStep::new(phase, mask));
        }
    }

    /// Leading zones of the `phase` pairs lying on lines accepted by `on_line`.
    fn candidate_pairs(
        &self,
        phase: Phase,
        on_line: &impl Fn(usize) -> bool,
    ) -> Vec<(usize, usize)> {
        let vertical = phase.is_vertical();
        (0..self.layout.zone_count())
            .filter(|&z| {
                let (i, j) = self.layout.coords(z);
                on_line(if vertical { i } else { j })
            })
            .filter_map(|z| {
                phase
                    .partner(self.layout, z)
                    .filter(|&p| p > z)
                    .map(|p| (z, p))
            })
            .collect()
    }

    fn sorted(
        &self,
        axis: Axis,
        key: &impl Fn(usize) -> usize,
        on_line: &impl Fn(usize) -> bool,
    ) -> bool {
        let (m, n) = (self.layout.m(), self.layout.n());
        let (lines, len) = match axis {
            Axis::Horizontal => (n, m),
            Axis::Vertical => (m, n),
        };
        let zone = |line: usize, pos: usize| match axis {
            Axis::Horizontal => self.layout.index(pos, line),
            Axis::Vertical => self.layout.index(line, pos),
        };
        (0..lines).filter(|&l| on_line(l)).all(|l| {
            (1..len).all(|p| key(self.tokens[zone(l, p - 1)]) <= key(self.tokens[zone(l, p)]))
        })
    }

    /// Odd-even transposition sort of every accepted line along `axis`,
    /// ordering tokens by `key`. Phases alternate starting with odd; phases
    /// with nothing to swap are not recorded.
    ///
    /// A line along the horizontal axis is indexed by `j`, a vertical line by `i`.
    pub fn sort_lines(
        &mut self,
        axis: Axis,
        key: impl Fn(usize) -> usize,
        on_line: impl Fn(usize) -> bool,
    ) {
        let len = match axis {
            Axis::Horizontal => self.layout.m(),
            Axis::Vertical => self.layout.n(),
        };
        let odd_pairs = self.candidate_pairs(axis.phase(true), &on_line);
        let even_pairs = self.candidate_pairs(axis.phase(false), &on_line);
        let mut odd = true;
        let mut rounds = 0;
        while !self.sorted(axis, &key, &on_line) {
            assert!(rounds <= len + 1, "odd-even sort failed to converge");
            let pairs: Vec<_> = if odd { &odd_pairs } else { &even_pairs }
                .iter()
                .copied()
                .filter(|&(a, b)| key(self.tokens[a]) > key(self.tokens[b]))
                .collect();
            self.apply(axis.phase(odd), &pairs);
            odd = !odd;
            rounds += 1;
        }
    }

    /// Swaps, within blocks of `k` positions along every horizontal line,
    /// each visited token with an unvisited right neighbour. One odd and one
    /// even phase.
    pub fn rotate_blocks(&mut self, visited: &[bool]) {
        let k = self.layout.k();
        for odd in [true, false] {
            let phase = Axis::Horizontal.phase(odd);
            let pairs: Vec<_> = self
                .candidate_pairs(phase, &|_| true)
                .into_iter()
                .filter(|&(a, b)| {
                    let i = self.layout.coords(a).0;
                    !(i + 1).is_multiple_of(k)
                        && visited[self.tokens[a]]
                        && !visited[self.tokens[b]]
                })
                .collect();
            self.apply(phase, &pairs);
        }
    }

    pub fn is_done(&self) -> bool {
        self.tokens
            .iter()
            .enumerate()
            .all(|(z, &t)| self.target[t] == z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn holes_pair_up_in_index_order() {
        let l = TrapLayout::linear(4).unwrap();
        let src = QubitConfig::from_slots(&[None, Some(7), None, Some(3)]);
        let tgt = QubitConfig::from_slots(&[Some(3), None, Some(7), None]);
        let r = Router::new(&l, &src, &tgt).unwrap();
        assert_eq!(r.target, vec![1, 2, 3, 0]);
        assert_eq!(r.real, vec![false, true, false, true]);
    }

    #[test]
    fn hole_only_swaps_are_not_recorded() {
        let l = TrapLayout::linear(4).unwrap();
        let src = QubitConfig::from_slots(&[None, None, Some(1), Some(2)]);
        let mut r = Router::new(&l, &src, &src).unwrap();
        r.apply(Phase::OddHorizontal, &[(0, 1)]);
        assert!(r.steps.is_empty());
        assert_eq!(r.tokens, vec![1, 0, 2, 3]);
        r.apply(Phase::OddHorizontal, &[(0, 1), (2, 3)]);
        assert_eq!(r.steps.len(), 1);
        assert_eq!(r.steps[0].mask.bits(), vec![false, false, true, true]);
    }
}
