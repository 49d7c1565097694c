//! Big-M MILP formulation of the sizing problem, solved by branch-and-bound
//! over LP relaxations of (module count, battery count, outage indicators).
//!
//! The LP encodes, per hour: the battery-energy update with load shedding,
//! the trim inequalities against stored energy and nameplate capacity, the
//! big-M indicator pair around the DoD floor, and the total outage budget.
//! With a zero budget the indicators are fixed by presolve (the budget row
//! forces every binary to zero) and rows that become vacuous are dropped.

use super::{search_bounds, simulate_battery, InfeasibilityReport, SizingProblem, SizingSolution};
use crate::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
const FEAS_TOL: f64 = 1e-6;
const INT_TOL: f64 = 1e-6;

/// What a constraint row encodes, for infeasibility reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
enum RowKind {
    TrimVsBattery,
    TrimVsCapacity,
    BatteryNonNegative,
    OutageLower,
    OutageUpper,
    OutageBudget,
    VariableBound,
}

impl RowKind {
    fn block_name(self) -> &'static str {
        match self {
            RowKind::TrimVsBattery => "trimmed battery constraints",
            RowKind::TrimVsCapacity => "battery capacity constraints",
            RowKind::BatteryNonNegative => "battery non-negativity constraints",
            RowKind::OutageLower | RowKind::OutageUpper => "outage constraints",
            RowKind::OutageBudget => "total outage constraint",
            RowKind::VariableBound => "search bounds",
        }
    }
}

/// `sum(coeffs * x) <= rhs` with sparse coefficients.
struct Row {
    coeffs: Vec<(usize, f64)>,
    rhs: f64,
    kind: RowKind,
}

struct Lp {
    num_vars: usize,
    objective: Vec<f64>,
    rows: Vec<Row>,
}

enum LpOutcome {
    Optimal { x: Vec<f64>, objective: f64 },
    Infeasible { violated: Vec<RowKind> },
}

/// Two-phase dense primal simplex for `min c.x s.t. A.x <= b, x >= 0`.
fn solve_lp(lp: &Lp) -> Result<LpOutcome> {
    let nrows = lp.rows.len();
    let nvars = lp.num_vars;
    let nslack = nrows;

    // Normalize rows and flip those with negative rhs so the slack basis or
    // an artificial column gives a valid starting point.
    let mut needs_art = vec![false; nrows];
    let mut dense_rows = vec![vec![0.0_f64; nvars]; nrows];
    let mut rhs = vec![0.0_f64; nrows];
    let mut slack_sign = vec![1.0_f64; nrows];
    for (r, row) in lp.rows.iter().enumerate() {
        let mut scale = row.rhs.abs();
        for &(_, a) in &row.coeffs {
            scale = scale.max(a.abs());
        }
        if scale == 0.0 {
            scale = 1.0;
        }
        let flip = row.rhs < 0.0;
        let sign = if flip { -1.0 } else { 1.0 };
        for &(j, a) in &row.coeffs {
            dense_rows[r][j] += sign * a / scale;
        }
        rhs[r] = sign * row.rhs / scale;
        slack_sign[r] = sign;
        needs_art[r] = flip;
    }

    let nart: usize = needs_art.iter().filter(|&&x| x).count();
    let width = nvars + nslack + nart + 1;
    let mut t = vec![0.0_f64; nrows * width];
    let mut basis = vec![0_usize; nrows];
    let mut art_col = nvars + nslack;
    for r in 0..nrows {
        for j in 0..nvars {
            t[r * width + j] = dense_rows[r][j];
        }
        t[r * width + nvars + r] = slack_sign[r];
        t[r * width + width - 1] = rhs[r];
        if needs_art[r] {
            t[r * width + art_col] = 1.0;
            basis[r] = art_col;
            art_col += 1;
        } else {
            basis[r] = nvars + r;
        }
    }
    let first_art = nvars + nslack;

    let pivot = |t: &mut Vec<f64>, basis: &mut Vec<usize>, row: usize, col: usize| {
        let p = t[row * width + col];
        for c in 0..width {
            t[row * width + c] /= p;
        }
        for r in 0..nrows {
            if r != row {
                let f = t[r * width + col];
                if f != 0.0 {
                    for c in 0..width {
                        t[r * width + c] -= f * t[row * width + c];
                    }
                }
            }
        }
        basis[row] = col;
    };

    // Runs the simplex loop on `obj` (reduced-cost row of length `width`),
    // considering entering columns in `0..col_limit`.
    let run = |t: &mut Vec<f64>,
               basis: &mut Vec<usize>,
               obj: &mut Vec<f64>,
               col_limit: usize|
     -> Result<()> {
        let max_iters = 50 * (nrows + width);
        let bland_after = 5 * (nrows + width);
        for iter in 0..max_iters {
            let bland = iter > bland_after;
            let mut entering = None;
            let mut best = -PIVOT_TOL;
            for j in 0..col_limit {
                let rc = obj[j];
                if rc < -PIVOT_TOL {
                    if bland {
                        entering = Some(j);
                        break;
                    }
                    if rc < best {
                        best = rc;
                        entering = Some(j);
                    }
                }
            }
            let Some(col) = entering else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for r in 0..nrows {
                let a = t[r * width + col];
                if a > PIVOT_TOL {
                    let ratio = t[r * width + width - 1] / a;
                    let better = match leave {
                        None => true,
                        Some((lr, lratio)) => {
                            ratio < lratio - PIVOT_TOL
                                || (ratio < lratio + PIVOT_TOL && basis[r] < basis[lr])
                        }
                    };
                    if better {
                        leave = Some((r, ratio));
                    }
                }
            }
            let Some((row, _)) = leave else {
                return Err(Error::State("LP relaxation unbounded".into()));
            };
            pivot(t, basis, row, col);
            // eliminate the entering column from the objective row against
            // the now-normalized pivot row
            let f = obj[col];
            if f != 0.0 {
                for c in 0..width {
                    obj[c] -= f * t[row * width + c];
                }
            }
        }
        Err(Error::State("simplex iteration limit reached".into()))
    };

    // Phase 1: minimize the sum of artificials.
    if nart > 0 {
        let mut obj = vec![0.0_f64; width];
        for j in first_art..first_art + nart {
            obj[j] = 1.0;
        }
        // price out initial artificial basics
        for r in 0..nrows {
            if basis[r] >= first_art {
                for c in 0..width {
                    obj[c] -= t[r * width + c];
                }
            }
        }
        run(&mut t, &mut basis, &mut obj, first_art + nart)?;
        let infeas = -obj[width - 1];
        if infeas > FEAS_TOL {
            let mut violated = Vec::new();
            for r in 0..nrows {
                if basis[r] >= first_art && t[r * width + width - 1] > FEAS_TOL {
                    violated.push(lp.rows[r].kind);
                }
            }
            return Ok(LpOutcome::Infeasible { violated });
        }
        // Drive zero-valued artificial basics out where possible.
        for r in 0..nrows {
            if basis[r] >= first_art {
                if let Some(col) = (0..first_art).find(|&j| t[r * width + j].abs() > PIVOT_TOL) {
                    pivot(&mut t, &mut basis, r, col);
                }
            }
        }
    }

    // Phase 2: the real objective, artificial columns banned.
    let obj_scale = lp
        .objective
        .iter()
        .fold(0.0_f64, |acc, c| acc.max(c.abs()))
        .max(1.0);
    let mut obj = vec![0.0_f64; width];
    for j in 0..nvars {
        obj[j] = lp.objective[j] / obj_scale;
    }
    for r in 0..nrows {
        let b = basis[r];
        if b < nvars && obj[b] != 0.0 {
            let f = obj[b];
            for c in 0..width {
                obj[c] -= f * t[r * width + c];
            }
        }
    }
    run(&mut t, &mut basis, &mut obj, first_art)?;

    let mut x = vec![0.0_f64; nvars];
    for r in 0..nrows {
        if basis[r] < nvars {
            x[basis[r]] = t[r * width + width - 1];
        }
    }
    let objective: f64 = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
    Ok(LpOutcome::Optimal { x, objective })
}

/// Branch-and-bound node: integer bounds on n and m, fixings for the outage
/// indicators (None = free in [0, 1]).
#[derive(Clone)]
struct Node {
    n_lo: u32,
    n_hi: u32,
    m_lo: u32,
    m_hi: u32,
    o_fixed: Vec<Option<bool>>,
}

struct Instance<'a> {
    problem: &'a SizingProblem,
    horizon: usize,
    big_m: f64,
    has_indicators: bool,
}

impl Instance<'_> {
    /// Variable layout: [n, m, trim_0..trim_T) and, with indicators,
    /// o_0..o_T appended.
    fn build_lp(&self, node: &Node) -> Lp {
        let p = self.problem;
        let t_len = self.horizon;
        let cb = p.battery_capacity_cb;
        let floor = p.dod_floor * cb;
        let trim0 = 2;
        let o0 = trim0 + t_len;
        let num_vars = if self.has_indicators { o0 + t_len } else { o0 };

        let mut objective = vec![0.0; num_vars];
        objective[0] = p.pv_unit_cost;
        objective[1] = p.battery_unit_cost;

        let mut rows = Vec::with_capacity(4 * t_len + 8);
        for i in 0..t_len {
            let h = p.harvest_per_module[i];
            let c = p.consumption[i];
            // prev-trim terms: coefficient on m (initial full charge) for the
            // first hour, on trim_{i-1} afterwards.
            let prev = |coef: f64, coeffs: &mut Vec<(usize, f64)>| {
                if i == 0 {
                    coeffs.push((1, coef * cb));
                } else {
                    coeffs.push((trim0 + i - 1, coef));
                }
            };
            let o_state = if self.has_indicators {
                node.o_fixed[i]
            } else {
                Some(false)
            };

            // Trim vs battery energy: trim_i <= prev + n*h - c + c*o_i.
            {
                let mut coeffs = vec![(trim0 + i, 1.0), (0, -h)];
                prev(-1.0, &mut coeffs);
                let mut rhs = -c;
                match o_state {
                    None => coeffs.push((o0 + i, -c)),
                    Some(true) => rhs += c,
                    Some(false) => {}
                }
                rows.push(Row {
                    coeffs,
                    rhs,
                    kind: RowKind::TrimVsBattery,
                });
            }
            // Trim vs nameplate capacity: trim_i <= cb * m.
            rows.push(Row {
                coeffs: vec![(trim0 + i, 1.0), (1, -cb)],
                rhs: 0.0,
                kind: RowKind::TrimVsCapacity,
            });
            // Battery non-negativity: prev + n*h - c + c*o_i >= 0. Implied by
            // the outage-lower row when the indicator is fixed to zero.
            if o_state != Some(false) {
                let mut coeffs = vec![(0, -h)];
                prev(-1.0, &mut coeffs);
                let mut rhs = -c;
                match o_state {
                    None => coeffs.push((o0 + i, -c)),
                    Some(true) => rhs += c,
                    Some(false) => unreachable!(),
                }
                rows.push(Row {
                    coeffs,
                    rhs,
                    kind: RowKind::BatteryNonNegative,
                });
            }
            // Outage lower: E_avail >= floor*m + eps - M*o_i. Vacuous when
            // the indicator is fixed to one.
            if o_state != Some(true) {
                let mut coeffs = vec![(0, -h), (1, floor)];
                prev(-1.0, &mut coeffs);
                if o_state.is_none() {
                    coeffs.push((o0 + i, -self.big_m));
                }
                rows.push(Row {
                    coeffs,
                    rhs: -c - p.epsilon,
                    kind: RowKind::OutageLower,
                });
            }
            // Outage upper: E_avail <= floor*m + eps + M*(1 - o_i). Vacuous
            // when the indicator is fixed to zero.
            if o_state != Some(false) {
                let mut coeffs = vec![(0, h), (1, -floor)];
                prev(1.0, &mut coeffs);
                let mut rhs = c + p.epsilon;
                match o_state {
                    None => {
                        coeffs.push((o0 + i, self.big_m));
                        rhs += self.big_m;
                    }
                    Some(true) => {}
                    Some(false) => unreachable!(),
                }
                rows.push(Row {
                    coeffs,
                    rhs,
                    kind: RowKind::OutageUpper,
                });
            }
        }

        if self.has_indicators {
            // Budget: sum of free indicators <= K - (number fixed to one).
            let fixed_ones = node.o_fixed.iter().filter(|f| **f == Some(true)).count();
            let free: Vec<(usize, f64)> = (0..t_len)
                .filter(|&i| node.o_fixed[i].is_none())
                .map(|i| (o0 + i, 1.0))
                .collect();
            let rhs = p.max_outage_hours as f64 - fixed_ones as f64;
            rows.push(Row {
                coeffs: free.clone(),
                rhs,
                kind: RowKind::OutageBudget,
            });
            for (j, _) in free {
                rows.push(Row {
                    coeffs: vec![(j, 1.0)],
                    rhs: 1.0,
                    kind: RowKind::VariableBound,
                });
            }
        }

        // Box bounds on n and m.
        rows.push(Row {
            coeffs: vec![(0, 1.0)],
            rhs: node.n_hi as f64,
            kind: RowKind::VariableBound,
        });
        if node.n_lo > 0 {
            rows.push(Row {
                coeffs: vec![(0, -1.0)],
                rhs: -(node.n_lo as f64),
                kind: RowKind::VariableBound,
            });
        }
        rows.push(Row {
            coeffs: vec![(1, 1.0)],
            rhs: node.m_hi as f64,
            kind: RowKind::VariableBound,
        });
        rows.push(Row {
            coeffs: vec![(1, -1.0)],
            rhs: -(node.m_lo as f64),
            kind: RowKind::VariableBound,
        });

        Lp {
            num_vars,
            objective,
            rows,
        }
    }
}

fn frac(v: f64) -> f64 {
    (v - v.round()).abs()
}

/// Solves the sizing problem as a big-M MILP by branch-and-bound.
///
/// Horizons beyond ~1000 hours are rejected: the dense LP relaxation is meant
/// for desk-scale cross-validation against [`optimize_enumeration`].
///
/// [`optimize_enumeration`]: super::optimize_enumeration
pub fn optimize_bigm_milp(problem: &SizingProblem) -> Result<SizingSolution> {
    problem.validate()?;
    let horizon = problem.len_data();
    if horizon > 1000 {
        return Err(Error::Domain(format!(
            "MILP horizon {horizon} exceeds the desk-scale limit of 1000 hours"
        )));
    }
    let bounds = search_bounds(problem);
    let max_consumption = problem.consumption.iter().cloned().fold(0.0_f64, f64::max);
    let max_harvest = problem
        .harvest_per_module
        .iter()
        .cloned()
        .fold(0.0_f64, f64::max);
    // M dominates every reachable |E_avail| and the DoD floor.
    let big_m = bounds.m_max as f64 * problem.battery_capacity_cb
        + bounds.n_max as f64 * max_harvest
        + max_consumption
        + problem.epsilon
        + 1000.0;

    let has_indicators = problem.max_outage_hours > 0;
    let instance = Instance {
        problem,
        horizon,
        big_m,
        has_indicators,
    };

    let root = Node {
        n_lo: 0,
        n_hi: bounds.n_max,
        m_lo: 1,
        m_hi: bounds.m_max,
        o_fixed: vec![if has_indicators { None } else { Some(false) }; horizon],
    };

    let mut stack = vec![root];
    let mut incumbent: Option<(f64, u32, u32)> = None;
    let mut root_violation: Option<Vec<RowKind>> = None;
    let mut first_node = true;

    while let Some(node) = stack.pop() {
        let lp = instance.build_lp(&node);
        let outcome = solve_lp(&lp)?;
        let (x, objective) = match outcome {
            LpOutcome::Infeasible { violated } => {
                if first_node {
                    root_violation = Some(violated);
                }
                first_node = false;
                continue;
            }
            LpOutcome::Optimal { x, objective } => (x, objective),
        };
        first_node = false;

        if let Some((best, _, _)) = incumbent {
            if objective >= best - 1e-6 {
                continue;
            }
        }

        let n_val = x[0];
        let m_val = x[1];
        let o_vals: Vec<f64> = if has_indicators {
            (0..horizon)
                .map(|i| match node.o_fixed[i] {
                    Some(true) => 1.0,
                    Some(false) => 0.0,
                    None => x[2 + horizon + i],
                })
                .collect()
        } else {
            vec![0.0; horizon]
        };

        // Pick the most fractional of n, m, then any fractional indicator.
        let mut branch: Option<(usize, f64)> = None;
        for (idx, v) in [(0usize, n_val), (1usize, m_val)] {
            if frac(v) > INT_TOL {
                let score = frac(v);
                if branch.is_none_or(|(_, s)| score > s) {
                    branch = Some((idx, score));
                }
            }
        }
        if branch.is_none() {
            for (i, &v) in o_vals.iter().enumerate() {
                if frac(v) > INT_TOL {
                    branch = Some((2 + i, frac(v)));
                    break;
                }
            }
        }

        match branch {
            None => {
                let n = n_val.round() as u32;
                let m = m_val.round().max(1.0) as u32;
                let cost = problem.cost(n, m);
                let better = match incumbent {
                    None => true,
                    Some((best, _, _)) => cost < best - 1e-9,
                };
                if better {
                    incumbent = Some((cost, n, m));
                }
            }
            Some((0, _)) => {
                let lo = n_val.floor() as u32;
                let mut left = node.clone();
                left.n_hi = lo.min(left.n_hi);
                let mut right = node;
                right.n_lo = (lo + 1).max(right.n_lo);
                if left.n_lo <= left.n_hi {
                    stack.push(left);
                }
                if right.n_lo <= right.n_hi {
                    stack.push(right);
                }
            }
            Some((1, _)) => {
                let lo = m_val.floor() as u32;
                let mut left = node.clone();
                left.m_hi = lo.min(left.m_hi);
                let mut right = node;
                right.m_lo = (lo + 1).max(right.m_lo);
                if left.m_lo <= left.m_hi {
                    stack.push(left);
                }
                if right.m_lo <= right.m_hi {
                    stack.push(right);
                }
            }
            Some((oi, _)) => {
                let i = oi - 2;
                let mut zero = node.clone();
                zero.o_fixed[i] = Some(false);
                let mut one = node;
                one.o_fixed[i] = Some(true);
                stack.push(one);
                stack.push(zero);
            }
        }
    }

    match incumbent {
        Some((cost, n, m)) => {
            let trace = simulate_battery(problem, n, m)?;
            Ok(SizingSolution {
                n,
                m,
                total_cost: cost,
                outage_hours: trace.outage_hours(),
                trace,
            })
        }
        None => {
            let detail = match root_violation {
                Some(kinds) if !kinds.is_empty() => {
                    let mut names: Vec<&str> = kinds.iter().map(|k| k.block_name()).collect();
                    names.sort_unstable();
                    names.dedup();
                    format!("binding constraint blocks: {}", names.join(", "))
                }
                _ => "no integer point within the search bounds satisfies the system".into(),
            };
            Err(Error::Infeasible(InfeasibilityReport {
                bounds,
                max_outage_hours: problem.max_outage_hours,
                detail,
            }))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::super::optimize_enumeration;
    use super::*;

    fn lp(num_vars: usize, objective: Vec<f64>, rows: Vec<(Vec<(usize, f64)>, f64)>) -> Lp {
        Lp {
            num_vars,
            objective,
            rows: rows
                .into_iter()
                .map(|(coeffs, rhs)| Row {
                    coeffs,
                    rhs,
                    kind: RowKind::VariableBound,
                })
                .collect(),
        }
    }

    #[test]
    fn simplex_solves_small_lp() {
        // min -x - 2y s.t. x + y <= 4, x <= 2.5 => (0, 4), obj -8.
        let problem = lp(
            2,
            vec![-1.0, -2.0],
            vec![(vec![(0, 1.0), (1, 1.0)], 4.0), (vec![(0, 1.0)], 2.5)],
        );
        match solve_lp(&problem).unwrap() {
            LpOutcome::Optimal { x, objective } => {
                assert!((objective + 8.0).abs() < 1e-7, "obj {objective}");
                assert!((x[1] - 4.0).abs() < 1e-7);
            }
            _ => panic!("expected optimal"),
        }
    }

    #[test]
    fn simplex_handles_negative_rhs() {
        // min x s.t. -x <= -2  => x = 2.
        let problem = lp(1, vec![1.0], vec![(vec![(0, -1.0)], -2.0)]);
        match solve_lp(&problem).unwrap() {
            LpOutcome::Optimal { x, objective } => {
                assert!((x[0] - 2.0).abs() < 1e-7);
                assert!((objective - 2.0).abs() < 1e-7);
            }
            _ => panic!("expected optimal"),
        }
    }

    #[test]
    fn simplex_detects_infeasible() {
        // x <= 1 and x >= 2 cannot hold.
        let problem = lp(
            1,
            vec![1.0],
            vec![(vec![(0, 1.0)], 1.0), (vec![(0, -1.0)], -2.0)],
        );
        assert!(matches!(
            solve_lp(&problem).unwrap(),
            LpOutcome::Infeasible { .. }
        ));
    }

    fn diurnal_problem(days: usize, draw: f64) -> SizingProblem {
        let mut harvest = Vec::new();
        for _ in 0..days {
            for h in 0..24 {
                let x = (h as f64 - 12.0) / 3.5;
                harvest.push(if (6..18).contains(&h) {
                    400.0 * (-x * x).exp()
                } else {
                    0.0
                });
            }
        }
        SizingProblem::new(harvest, vec![draw; days * 24]).unwrap()
    }

    #[test]
    fn milp_matches_enumeration_on_diurnal_instance() {
        let problem = diurnal_problem(7, 1200.0);
        let a = optimize_enumeration(&problem).unwrap();
        let b = optimize_bigm_milp(&problem).unwrap();
        assert_eq!(a.total_cost, b.total_cost, "{a:?} vs {b:?}");
    }

    #[test]
    fn zero_budget_solution_has_zero_outages() {
        let problem = diurnal_problem(3, 900.0);
        let sol = optimize_bigm_milp(&problem).unwrap();
        assert_eq!(sol.outage_hours, 0);
    }

    #[test]
    fn relaxing_outage_budget_never_raises_cost() {
        let mut problem = diurnal_problem(2, 1500.0);
        let strict = optimize_bigm_milp(&problem).unwrap();
        problem.max_outage_hours = 24;
        let relaxed = optimize_bigm_milp(&problem).unwrap();
        assert!(relaxed.total_cost <= strict.total_cost + 1e-9);
        assert!(relaxed.outage_hours <= 24);
    }

    #[test]
    fn milp_infeasible_names_binding_block() {
        let problem = SizingProblem::new(vec![0.0; 48], vec![2000.0; 48]).unwrap();
        match optimize_bigm_milp(&problem).unwrap_err() {
            Error::Infeasible(report) => {
                assert!(
                    report.detail.contains("outage") || report.detail.contains("bounds"),
                    "detail: {}",
                    report.detail
                );
            }
            other => panic!("expected Infeasible, got {other:?}"),
        }
    }

    #[test]
    fn milp_rejects_oversized_horizon() {
        let problem = SizingProblem::new(vec![0.0; 1100], vec![0.0; 1100]).unwrap();
        assert!(matches!(
            optimize_bigm_milp(&problem),
            Err(Error::Domain(_))
        ));
    }
}
