use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{HkError, HkInstance};

/// Node budget for each top-level choice of x_1.
pub const DEFAULT_NODE_BUDGET: u64 = 20_000_000;
/// Refuse instances whose naive search space s·x_max^k exceeds this.
pub const MAX_WORK: f64 = 1e15;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum HkOutcome {
    /// x_1 ≥ x_2 ≥ ⋯ ≥ x_s ≥ 1.
    Solved {
        x: Vec<u64>,
    },
    NoSolution,
    /// Indeterminate: a branch ran out of nodes before any solution was found.
    BudgetExceeded {
        nodes: u64,
    },
}

impl HkOutcome {
    pub fn solution(&self) -> Option<&[u64]> {
        match self {
            HkOutcome::Solved { x } => Some(x),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            HkOutcome::Solved { .. } => "solved",
            HkOutcome::NoSolution => "none",
            HkOutcome::BudgetExceeded { .. } => "budget",
        }
    }
}

fn ipow(y: i128, p: usize) -> Option<i128> {
    y.checked_pow(p as u32)
}

fn isqrt(n: i128) -> i128 {
    if n < 2 {
        return n.max(0);
    }
    let mut x = (n as f64).sqrt() as i128;
    while x * x > n {
        x -= 1;
    }
    while (x + 1) * (x + 1) <= n {
        x += 1;
    }
    x
}

/// Largest y with y^k ≤ n.
fn iroot(n: i128, k: usize) -> i128 {
    if n <= 0 {
        return 0;
    }
    let mut y = (n as f64).powf(1.0 / k as f64).floor() as i128;
    while y > 0 && ipow(y, k).is_none_or(|v| v > n) {
        y -= 1;
    }
    while ipow(y + 1, k).is_some_and(|v| v <= n) {
        y += 1;
    }
    y
}

/// Can `r` integers in [1, cap] have power sums `rem` (rem[p−1] = Σ y^p)?
/// Necessary conditions only: the balanced and extreme distributions with the
/// same linear sum bound every higher power sum.
fn feasible(rem: &[i128], r: i128, cap: i128) -> bool {
    let s1 = rem[0];
    if s1 < r || s1 > r.saturating_mul(cap) {
        return false;
    }
    let (q, qr) = (s1 / r, s1 % r);
    let z = s1 - r;
    for (i, &sp) in rem.iter().enumerate().skip(1) {
        let p = i + 1;
        // lower: as equal as possible
        if let (Some(a), Some(b)) = (ipow(q + 1, p), ipow(q, p)) {
            if let Some(lb) = a.checked_mul(qr).and_then(|x| b.checked_mul(r - qr).and_then(|y| x.checked_add(y))) {
                if sp < lb {
                    return false;
                }
            }
        }
        // upper: as many at the cap as possible
        if cap > 1 {
            let (m, t) = (z / (cap - 1), z % (cap - 1));
            let ub = if m >= r {
                ipow(cap, p).and_then(|c| c.checked_mul(r))
            } else {
                ipow(cap, p)
                    .and_then(|c| c.checked_mul(m))
                    .and_then(|x| ipow(1 + t, p).and_then(|y| x.checked_add(y)))
                    .map(|x| x + (r - m - 1))
            };
            if ub.is_some_and(|ub| sp > ub) {
                return false;
            }
        } else if sp != r {
            return false;
        }
    }
    true
}

enum Step {
    Found,
    Exhausted,
    Budget,
}

struct Dfs<'a> {
    k: usize,
    budget: u64,
    nodes: u64,
    sol: &'a mut Vec<u64>,
}

impl Dfs<'_> {
    fn closes(&mut self, rem: &[i128], ys: &[i128]) -> bool {
        let ok = (0..self.k).all(|i| ys.iter().map(|&y| ipow(y, i + 1)).sum::<Option<i128>>() == Some(rem[i]));
        if ok {
            self.sol.extend(ys.iter().map(|&y| y as u64));
        }
        ok
    }

    fn run(&mut self, rem: &mut [i128], r: i128, cap: i128) -> Step {
        if r == 0 {
            return if rem.iter().all(|&v| v == 0) { Step::Found } else { Step::Exhausted };
        }
        if !feasible(rem, r, cap) {
            return Step::Exhausted;
        }
        let s1 = rem[0];
        if r == 1 {
            return if s1 <= cap && self.closes(rem, &[s1]) { Step::Found } else { Step::Exhausted };
        }
        if r == 2 && self.k >= 2 {
            let d = 2 * rem[1] - s1 * s1;
            let root = isqrt(d);
            if d < 0 || root * root != d || (s1 + root) % 2 != 0 {
                return Step::Exhausted;
            }
            let ya = (s1 + root) / 2;
            let yb = s1 - ya;
            return if ya <= cap && yb >= 1 && self.closes(rem, &[ya, yb]) { Step::Found } else { Step::Exhausted };
        }
        let hi = cap.min(s1 - (r - 1)).min(iroot(rem[self.k - 1] - (r - 1), self.k));
        let lo = (s1 + r - 1) / r;
        let mut y = hi;
        while y >= lo {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Step::Budget;
            }
            if self.take(rem, y) {
                self.sol.push(y as u64);
                match self.run(rem, r - 1, y) {
                    Step::Found => return Step::Found,
                    Step::Budget => return Step::Budget,
                    Step::Exhausted => {
                        self.sol.pop();
                    }
                }
                self.give(rem, y);
            }
            y -= 1;
        }
        Step::Exhausted
    }

    /// Subtract y^p from every target; false (and no change) on overflow.
    fn take(&self, rem: &mut [i128], y: i128) -> bool {
        let pw: Option<Vec<i128>> = (1..=self.k).map(|p| ipow(y, p)).collect();
        match pw {
            Some(pw) => {
                for (r, v) in rem.iter_mut().zip(pw) {
                    *r -= v;
                }
                true
            }
            None => false,
        }
    }

    fn give(&self, rem: &mut [i128], y: i128) {
        for (p, r) in rem.iter_mut().enumerate() {
            *r += ipow(y, p + 1).expect("checked in take");
        }
    }
}

/// Search one top-level branch x_1 = y.
fn branch(inst: &HkInstance, y: i128, budget: u64) -> (Step, Vec<u64>, u64) {
    let mut rem: Vec<i128> = inst.targets.iter().map(|&t| t as i128).collect();
    let mut sol = Vec::with_capacity(inst.s);
    let mut dfs = Dfs { k: inst.k, budget, nodes: 1, sol: &mut sol };
    if !dfs.take(&mut rem, y) {
        return (Step::Exhausted, sol, 1);
    }
    dfs.sol.push(y as u64);
    let step = dfs.run(&mut rem, inst.s as i128 - 1, y);
    let nodes = dfs.nodes;
    (step, sol, nodes)
}

/// First solution x_1 ≥ ⋯ ≥ x_s in descending lexicographic order with
/// x_1 ≤ x_max.
///
/// Top-level choices of x_1 are searched in parallel batches, each with its
/// own node budget; the outcome is that of the first branch (in order) that
/// is not exhausted, so it does not depend on the thread count.
pub fn solve_bruteforce(inst: &HkInstance, x_max: u64, node_budget: u64) -> Result<HkOutcome, HkError> {
    inst.validate()?;
    let work = inst.s as f64 * (x_max as f64).powi(inst.k as i32);
    if work > MAX_WORK {
        return Err(HkError::TooLarge { estimate: work, limit: MAX_WORK });
    }
    let s = inst.s as i128;
    let s1 = inst.targets[0] as i128;
    let mut rem0: Vec<i128> = inst.targets.iter().map(|&t| t as i128).collect();
    let cap0 = (x_max as i128).min(i64::MAX as i128);
    if !feasible(&rem0, s, cap0) {
        return Ok(HkOutcome::NoSolution);
    }
    if inst.s <= 2 {
        let mut sol = Vec::new();
        let mut dfs = Dfs { k: inst.k, budget: node_budget, nodes: 0, sol: &mut sol };
        return Ok(match dfs.run(&mut rem0, s, cap0) {
            Step::Found => HkOutcome::Solved { x: sol },
            Step::Exhausted => HkOutcome::NoSolution,
            Step::Budget => HkOutcome::BudgetExceeded { nodes: node_budget },
        });
    }
    let hi = cap0.min(s1 - (s - 1)).min(iroot(rem0[inst.k - 1] - (s - 1), inst.k));
    let lo = (s1 + s - 1) / s;
    let candidates: Vec<i128> = (lo..=hi).rev().collect();
    let batch = 2 * rayon::current_num_threads().max(1);
    for chunk in candidates.chunks(batch) {
        let results: Vec<(Step, Vec<u64>, u64)> = chunk.par_iter().map(|&y| branch(inst, y, node_budget)).collect();
        for (step, sol, nodes) in results {
            match step {
                Step::Found => return Ok(HkOutcome::Solved { x: sol }),
                Step::Budget => return Ok(HkOutcome::BudgetExceeded { nodes }),
                Step::Exhausted => {}
            }
        }
    }
    Ok(HkOutcome::NoSolution)
}

/// Plain enumeration of non-increasing tuples, no pruning. Test oracle.
pub fn exhaustive_oracle(inst: &HkInstance, x_max: u64) -> Option<Vec<u64>> {
    fn rec(inst: &HkInstance, cap: u64, cur: &mut Vec<u64>) -> bool {
        if cur.len() == inst.s {
            return (1..=inst.k)
                .all(|j| cur.iter().map(|&y| (y as u128).pow(j as u32)).sum::<u128>() == inst.targets[j - 1]);
        }
        for y in (1..=cap).rev() {
            cur.push(y);
            if rec(inst, y, cur) {
                return true;
            }
            cur.pop();
        }
        false
    }
    let mut cur = Vec::new();
    rec(inst, x_max, &mut cur).then_some(cur)
}
