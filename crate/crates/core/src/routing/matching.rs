use super::RoutingError;

/// Distributes the entries of every line over `D` slots so that each slot
/// collects pairwise distinct target lines.
///
/// `target_lines[u][e]` is the target line of entry `e` currently in line
/// `u`. There are `W` lines of `D` entries each, and every target value in
/// `0..W` must occur exactly `D` times overall. The result has the same
/// shape: `slots[u][e]` is the slot given to that entry, and every line uses
/// each slot exactly once.
///
/// The line-to-target multigraph is `D`-regular, so it splits into `D`
/// perfect matchings; matching `c` becomes slot `c`. Matchings are found by
/// augmenting paths, trying lines and targets lowest index first.
pub fn column_assignment(target_lines: &[Vec<usize>]) -> Result<Vec<Vec<usize>>, RoutingError> {
    let w = target_lines.len();
    if w == 0 {
        return Ok(Vec::new());
    }
    let d = target_lines[0].len();
    let mut count = vec![vec![0usize; w]; w];
    let mut per_target = vec![0usize; w];
    for (u, line) in target_lines.iter().enumerate() {
        if line.len() != d {
            return Err(RoutingError::InfeasibleAssignment);
        }
        for &v in line {
            if v >= w {
                return Err(RoutingError::InfeasibleAssignment);
            }
            count[u][v] += 1;
            per_target[v] += 1;
        }
    }
    if per_target.iter().any(|&c| c != d) {
        return Err(RoutingError::InfeasibleAssignment);
    }

    // rounds[c][u] = target matched to line u in round c.
    let mut rounds = Vec::with_capacity(d);
    for _ in 0..d {
        let mut owner: Vec<Option<usize>> = vec![None; w];
        for u in 0..w {
            let mut seen = vec![false; w];
            if !augment(u, &count, &mut owner, &mut seen) {
                return Err(RoutingError::InfeasibleAssignment);
            }
        }
        let mut matched = vec![0usize; w];
        for (v, o) in owner.iter().enumerate() {
            let u = o.expect("perfect matching covers every target");
            matched[u] = v;
            count[u][v] -= 1;
        }
        rounds.push(matched);
    }

    let mut slots = Vec::with_capacity(w);
    for (u, line) in target_lines.iter().enumerate() {
        // Free slots per target, in increasing order.
        let mut free: Vec<Vec<usize>> = vec![Vec::new(); w];
        for (c, matched) in rounds.iter().enumerate().rev() {
            free[matched[u]].push(c);
        }
        let row = line
            .iter()
            .map(|&v| free[v].pop().expect("matching degrees equal entry counts"))
            .collect();
        slots.push(row);
    }
    Ok(slots)
}

fn augment(u: usize, count: &[Vec<usize>], owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
    for v in 0..count.len() {
        if count[u][v] == 0 || seen[v] {
            continue;
        }
        seen[v] = true;
        let free = match owner[v] {
            None => true,
            Some(other) => augment(other, count, owner, seen),
        };
        if free {
            owner[v] = Some(u);
            return true;
        }
    }
    false
}
