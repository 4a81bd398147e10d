//! Cardinality constraints over [`BLit`]s. Constants are folded first.

use super::{BLit, ConstraintModel};

/// Drops false constants and counts true ones.
fn fold(lits: &[BLit]) -> (Vec<BLit>, usize) {
    let mut free = Vec::with_capacity(lits.len());
    let mut ones = 0;
    for &l in lits {
        match l {
            BLit::Const(true) => ones += 1,
            BLit::Const(false) => {}
            _ => free.push(l),
        }
    }
    (free, ones)
}

pub fn at_least_one(m: &mut ConstraintModel, lits: &[BLit]) {
    m.add(lits);
}

/// Pairwise up to 8 literals, commander encoding above.
pub fn at_most_one(m: &mut ConstraintModel, lits: &[BLit]) {
    let (free, ones) = fold(lits);
    if ones > 1 {
        m.add(&[]);
        return;
    }
    if ones == 1 {
        for &l in &free {
            m.add(&[!l]);
        }
        return;
    }
    amo_free(m, &free);
}

fn amo_free(m: &mut ConstraintModel, lits: &[BLit]) {
    if lits.len() <= 8 {
        for i in 0..lits.len() {
            for j in i + 1..lits.len() {
                m.add(&[!lits[i], !lits[j]]);
            }
        }
        return;
    }
    let mut commanders = Vec::with_capacity(lits.len() / 3 + 1);
    for group in lits.chunks(3) {
        let c = m.new_blit();
        for i in 0..group.len() {
            m.implies(group[i], c);
            for j in i + 1..group.len() {
                m.add(&[!group[i], !group[j]]);
            }
        }
        // c only when something in the group holds
        let mut clause = vec![!c];
        clause.extend_from_slice(group);
        m.add(&clause);
        commanders.push(c);
    }
    amo_free(m, &commanders);
}

pub fn exactly_one(m: &mut ConstraintModel, lits: &[BLit]) {
    at_least_one(m, lits);
    at_most_one(m, lits);
}

/// Sequential counter. Fails the model if more than `k` constants are true.
pub fn at_most_k(m: &mut ConstraintModel, lits: &[BLit], k: usize) {
    let (free, ones) = fold(lits);
    if ones > k {
        m.add(&[]);
        return;
    }
    let k = k - ones;
    if k >= free.len() {
        return;
    }
    if k == 0 {
        for &l in &free {
            m.add(&[!l]);
        }
        return;
    }
    if k == 1 {
        amo_free(m, &free);
        return;
    }
    // s[j] after input i: at least j+1 of the first i+1 inputs hold
    let n = free.len();
    let mut prev: Vec<BLit> = Vec::new();
    for (i, &x) in free.iter().enumerate() {
        let width = k.min(i + 1);
        let cur: Vec<BLit> = if i + 1 == n { Vec::new() } else { (0..width).map(|_| m.new_blit()).collect() };
        if i + 1 < n {
            m.implies(x, cur[0]);
            for j in 0..prev.len() {
                m.implies(prev[j], cur[j]);
                if j + 1 < width {
                    m.add(&[!x, !prev[j], cur[j + 1]]);
                }
            }
        }
        if prev.len() == k {
            m.add(&[!x, !prev[k - 1]]);
        }
        prev = cur;
    }
}

pub fn at_least_k(m: &mut ConstraintModel, lits: &[BLit], k: usize) {
    if k == 0 {
        return;
    }
    if k > lits.len() {
        m.add(&[]);
        return;
    }
    if k == 1 {
        at_least_one(m, lits);
        return;
    }
    let neg: Vec<BLit> = lits.iter().map(|&l| !l).collect();
    at_most_k(m, &neg, lits.len() - k);
}

pub fn exactly_k(m: &mut ConstraintModel, lits: &[BLit], k: usize) {
    at_most_k(m, lits, k);
    at_least_k(m, lits, k);
}

/// One-directional unary counter: `out[j]` is forced true whenever at least
/// `j + 1` inputs hold. Only the first `max` outputs are built.
pub fn counter_outputs(m: &mut ConstraintModel, lits: &[BLit], max: usize) -> Vec<BLit> {
    let (free, ones) = fold(lits);
    let total = (free.len() + ones).min(max);
    let mut out = vec![BLit::FALSE; total];
    for o in out.iter_mut().take(ones.min(total)) {
        *o = BLit::TRUE;
    }
    let room = total.saturating_sub(ones);
    if room == 0 {
        return out;
    }
    let mut prev: Vec<BLit> = Vec::new();
    for &x in &free {
        let width = room.min(prev.len() + 1);
        let cur: Vec<BLit> = (0..width).map(|_| m.new_blit()).collect();
        m.implies(x, cur[0]);
        for j in 0..prev.len() {
            m.implies(prev[j], cur[j]);
            if j + 1 < width {
                m.add(&[!x, !prev[j], cur[j + 1]]);
            }
        }
        prev = cur;
    }
    for (j, &p) in prev.iter().enumerate() {
        out[ones + j] = p;
    }
    out
}

/// `out ⇔ a ∧ b`
pub fn and2(m: &mut ConstraintModel, a: BLit, b: BLit) -> BLit {
    match (a, b) {
        (BLit::Const(false), _) | (_, BLit::Const(false)) => BLit::FALSE,
        (BLit::Const(true), x) | (x, BLit::Const(true)) => x,
        _ => {
            let y = m.new_blit();
            m.implies(y, a);
            m.implies(y, b);
            m.add(&[!a, !b, y]);
            y
        }
    }
}

/// `out ⇔ OR lits`
pub fn or_all(m: &mut ConstraintModel, lits: &[BLit]) -> BLit {
    let (free, ones) = fold(lits);
    if ones > 0 {
        return BLit::TRUE;
    }
    match free.len() {
        0 => BLit::FALSE,
        1 => free[0],
        _ => {
            let y = m.new_blit();
            for &l in &free {
                m.implies(l, y);
            }
            let mut c = vec![!y];
            c.extend_from_slice(&free);
            m.add(&c);
            y
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use graphlift_sat::{Budget, SolverConfig, Status};

    /// Counts assignments of the first `n` vars that extend to a model.
    fn projected_models(m: &ConstraintModel, inputs: &[BLit], pred: impl Fn(usize) -> bool) -> bool {
        let n = inputs.len();
        for mask in 0u32..(1 << n) {
            let mut s = m.to_solver(SolverConfig::default());
            let assumptions: Vec<_> = inputs
                .iter()
                .enumerate()
                .filter_map(|(i, b)| b.lit().map(|l| if mask >> i & 1 == 1 { l } else { !l }))
                .collect();
            let count = (0..n).filter(|&i| inputs[i].is_true() || (inputs[i].lit().is_some() && mask >> i & 1 == 1)).count();
            let sat = !m.is_trivially_unsat() && s.solve(&assumptions, &Budget::unlimited()) == Status::Sat;
            if sat != pred(count) {
                return false;
            }
        }
        true
    }

    fn inputs(m: &mut ConstraintModel, n: usize, consts: &[(usize, bool)]) -> Vec<BLit> {
        let mut v: Vec<BLit> = (0..n).map(|_| m.new_blit()).collect();
        for &(i, b) in consts {
            v[i] = BLit::Const(b);
        }
        v
    }

    #[test]
    fn cardinalities_brute_force() {
        for n in 0..=10usize {
            for consts in [vec![], vec![(0, true)], vec![(1, false), (2, true)]] {
                if consts.iter().any(|c| c.0 >= n) {
                    continue;
                }
                for k in 0..=n.min(6) {
                    let mut m = ConstraintModel::new();
                    let x = inputs(&mut m, n, &consts);
                    at_most_k(&mut m, &x, k);
                    assert!(projected_models(&m, &x, |c| c <= k), "at_most {n} {k} {consts:?}");

                    let mut m = ConstraintModel::new();
                    let x = inputs(&mut m, n, &consts);
                    exactly_k(&mut m, &x, k);
                    assert!(projected_models(&m, &x, |c| c == k), "exactly {n} {k} {consts:?}");
                }
                let mut m = ConstraintModel::new();
                let x = inputs(&mut m, n, &consts);
                exactly_one(&mut m, &x);
                assert!(projected_models(&m, &x, |c| c == 1), "exactly_one {n} {consts:?}");
            }
        }
    }

    #[test]
    fn counter_outputs_are_lower_bounds() {
        for n in 1..=8usize {
            let mut m = ConstraintModel::new();
            let x = inputs(&mut m, n, &[]);
            let out = counter_outputs(&mut m, &x, 4);
            for j in 0..out.len() {
                // forbidding out[j] leaves exactly the assignments with count <= j
                let mut m2 = m.clone();
                m2.add(&[!out[j]]);
                assert!(projected_models(&m2, &x, |c| c <= j), "n={n} j={j}");
            }
        }
    }
}
