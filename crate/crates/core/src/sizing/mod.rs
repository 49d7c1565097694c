//! Cost-minimal PV/battery provisioning against an outage budget.
//!
//! Two optimizers cross-validate each other: [`optimize_enumeration`] scans
//! battery counts and binary-searches the smallest feasible panel count per
//! battery count, while [`optimize_bigm_milp`] encodes the constraint system
//! (big-M outage indicators, battery update, trim and capacity bounds, total
//! outage budget) and solves it by branch-and-bound over LP relaxations.

mod milp;

pub use milp::optimize_bigm_milp;

use serde::{Deserialize, Serialize};

use crate::{par, Error, Result};

/// Sizing instance: hourly harvest of ONE PV module, hourly consumption, and
/// the component economics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingProblem {
    /// Hourly Wh of a single PV module.
    pub harvest_per_module: Vec<f64>,
    /// Hourly Wh drawn by the site.
    pub consumption: Vec<f64>,
    /// Capacity of one battery, Wh.
    pub battery_capacity_cb: f64,
    /// Depth-of-discharge floor, fraction of capacity never drained.
    pub dod_floor: f64,
    /// Price per PV module.
    pub pv_unit_cost: f64,
    /// Price per battery module.
    pub battery_unit_cost: f64,
    /// Outage budget K: maximum tolerated outage hours over the horizon.
    pub max_outage_hours: usize,
    /// Strict-inequality margin for the outage comparison, Wh.
    pub epsilon: f64,
}

impl SizingProblem {
    /// Builds a problem with the default economics (3.0 kWh batteries, 20%
    /// DoD floor, $244.22 per module, $2093.37 per battery, K = 0, 1 Wh
    /// epsilon).
    pub fn new(harvest_per_module: Vec<f64>, consumption: Vec<f64>) -> Result<Self> {
        let problem = SizingProblem {
            harvest_per_module,
            consumption,
            battery_capacity_cb: 3000.0,
            dod_floor: 0.2,
            pv_unit_cost: 244.22,
            battery_unit_cost: 2093.37,
            max_outage_hours: 0,
            epsilon: 1.0,
        };
        problem.validate()?;
        Ok(problem)
    }

    pub fn validate(&self) -> Result<()> {
        if self.harvest_per_module.len() != self.consumption.len() {
            return Err(Error::Alignment(format!(
                "harvest has {} hours, consumption {}",
                self.harvest_per_module.len(),
                self.consumption.len()
            )));
        }
        if self.harvest_per_module.is_empty() {
            return Err(Error::EmptyInput("sizing problem with no hours"));
        }
        if self.harvest_per_module.iter().any(|&h| h < 0.0)
            || self.consumption.iter().any(|&c| c < 0.0)
        {
            return Err(Error::Domain("negative harvest or consumption".into()));
        }
        if self.battery_capacity_cb <= 0.0 {
            return Err(Error::Domain("battery capacity must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dod_floor) {
            return Err(Error::Domain(format!(
                "dod_floor {} outside [0, 1)",
                self.dod_floor
            )));
        }
        if self.pv_unit_cost <= 0.0 || self.battery_unit_cost <= 0.0 {
            return Err(Error::Domain("unit costs must be positive".into()));
        }
        Ok(())
    }

    /// Horizon length in hours.
    pub fn len_data(&self) -> usize {
        self.harvest_per_module.len()
    }

    /// Total cost of a configuration.
    pub fn cost(&self, n: u32, m: u32) -> f64 {
        n as f64 * self.pv_unit_cost + m as f64 * self.battery_unit_cost
    }

    /// Nameplate and usable capacity of an `m`-battery bank.
    pub fn full_charge_capacity(&self, m: u32) -> (f64, f64) {
        full_charge_capacity(m, self.battery_capacity_cb, self.dod_floor)
    }
}

/// Nameplate and usable Wh of `m` batteries with the given per-battery
/// capacity and DoD floor.
pub fn full_charge_capacity(m: u32, battery_capacity_cb: f64, dod_floor: f64) -> (f64, f64) {
    let nameplate = m as f64 * battery_capacity_cb;
    (nameplate, (1.0 - dod_floor) * nameplate)
}

/// Hour-by-hour battery state for one `(n, m)` candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatteryTrace {
    /// Energy available before the outage decision, Wh.
    pub e_avail: Vec<f64>,
    /// Post-decision battery energy (load shed restores consumption), Wh.
    pub e_battery: Vec<f64>,
    /// Stored energy after trimming to nameplate capacity, Wh.
    pub e_battery_trim: Vec<f64>,
    /// True where the hour is an outage.
    pub outage: Vec<bool>,
}

impl BatteryTrace {
    pub fn outage_hours(&self) -> usize {
        self.outage.iter().filter(|&&o| o).count()
    }
}

/// Simulates the battery dynamics for `n` PV modules and `m` batteries.
///
/// The bank starts fully charged at `m * C_B`. Each hour:
/// `E_avail = E_trim(prev) + n * E_harvest - E_consume`; the hour is an
/// outage when `E_avail < dod_floor * m * C_B + epsilon`, in which case the
/// load is shed and the consumption returns to the battery; stored energy is
/// then trimmed to nameplate capacity.
pub fn simulate_battery(problem: &SizingProblem, n: u32, m: u32) -> Result<BatteryTrace> {
    if m == 0 {
        return Err(Error::Domain(
            "battery bank required: m must be at least 1".into(),
        ));
    }
    let len = problem.len_data();
    let nameplate = m as f64 * problem.battery_capacity_cb;
    let floor = problem.dod_floor * nameplate + problem.epsilon;
    let n = n as f64;

    let mut trace = BatteryTrace {
        e_avail: Vec::with_capacity(len),
        e_battery: Vec::with_capacity(len),
        e_battery_trim: Vec::with_capacity(len),
        outage: Vec::with_capacity(len),
    };
    let mut prev_trim = nameplate;
    for i in 0..len {
        let e_avail = prev_trim + n * problem.harvest_per_module[i] - problem.consumption[i];
        let outage = e_avail < floor;
        let e_battery = if outage {
            e_avail + problem.consumption[i]
        } else {
            e_avail
        };
        let e_trim = e_battery.min(nameplate);
        trace.e_avail.push(e_avail);
        trace.e_battery.push(e_battery);
        trace.e_battery_trim.push(e_trim);
        trace.outage.push(outage);
        prev_trim = e_trim;
    }
    Ok(trace)
}

/// Whether `(n, m)` meets the outage budget.
pub fn is_feasible(problem: &SizingProblem, n: u32, m: u32) -> Result<bool> {
    Ok(simulate_battery(problem, n, m)?.outage_hours() <= problem.max_outage_hours)
}

/// Optimal configuration and its trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingSolution {
    /// PV module count.
    pub n: u32,
    /// Battery module count.
    pub m: u32,
    pub total_cost: f64,
    pub outage_hours: usize,
    pub trace: BatteryTrace,
}

/// Search bounds derived from worst-case physical requirements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    pub n_max: u32,
    pub m_max: u32,
}

/// Emitted when no feasible pair exists within the search bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfeasibilityReport {
    pub bounds: SearchBounds,
    pub max_outage_hours: usize,
    pub detail: String,
}

impl std::fmt::Display for InfeasibilityReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "no feasible (n, m) with n <= {}, m <= {} and outage budget {}: {}",
            self.bounds.n_max, self.bounds.m_max, self.max_outage_hours, self.detail
        )
    }
}

/// Derives generous finite search bounds for the optimizers.
///
/// `m_max` covers two days of worst-case consumption from usable battery
/// alone; `n_max` is the smallest module count whose average daily harvest is
/// twice the average daily consumption (zero when the harvest is identically
/// zero, since extra panels can never help then).
pub fn search_bounds(problem: &SizingProblem) -> SearchBounds {
    let max_daily_consumption = problem
        .consumption
        .chunks(24)
        .map(|day| day.iter().sum::<f64>())
        .fold(0.0_f64, f64::max);
    let usable_per_battery = (1.0 - problem.dod_floor) * problem.battery_capacity_cb;
    let m_max = ((2.0 * max_daily_consumption / usable_per_battery).ceil() as u32).max(1);

    let total_harvest: f64 = problem.harvest_per_module.iter().sum();
    let total_consumption: f64 = problem.consumption.iter().sum();
    let n_max = if total_harvest <= 0.0 {
        0
    } else {
        (2.0 * total_consumption / total_harvest).ceil() as u32
    };
    SearchBounds { n_max, m_max }
}

/// Exhaustive search: for each battery count up to the bound, the smallest
/// feasible module count by monotone binary search; ties on cost break
/// toward smaller `n`, then smaller `m`.
pub fn optimize_enumeration(problem: &SizingProblem) -> Result<SizingSolution> {
    problem.validate()?;
    let bounds = search_bounds(problem);

    let per_m: Vec<Option<(u32, u32)>> = par::map_indices(bounds.m_max as usize, |idx| {
        let m = idx as u32 + 1;
        smallest_feasible_n(problem, m, bounds.n_max).map(|n| (n, m))
    });

    let mut best: Option<(f64, u32, u32)> = None;
    for (n, m) in per_m.into_iter().flatten() {
        let cost = problem.cost(n, m);
        let candidate = (cost, n, m);
        best = Some(match best {
            None => candidate,
            Some(current) => {
                if candidate.0 < current.0
                    || (candidate.0 == current.0
                        && (candidate.1, candidate.2) < (current.1, current.2))
                {
                    candidate
                } else {
                    current
                }
            }
        });
    }

    match best {
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
        None => Err(Error::Infeasible(InfeasibilityReport {
            bounds,
            max_outage_hours: problem.max_outage_hours,
            detail: "even the largest searched configuration violates the outage budget".into(),
        })),
    }
}

/// Smallest `n` in `[0, n_max]` meeting the budget for a fixed `m`, if any.
fn smallest_feasible_n(problem: &SizingProblem, m: u32, n_max: u32) -> Option<u32> {
    let feasible = |n: u32| -> bool {
        simulate_battery(problem, n, m)
            .map(|t| t.outage_hours() <= problem.max_outage_hours)
            .unwrap_or(false)
    };
    if !feasible(n_max) {
        return None;
    }
    let (mut lo, mut hi) = (0u32, n_max);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if feasible(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Some(lo)
}

/// Text table mirroring the sizing-comparison layout: one row per harvest
/// source with its configuration and cost difference vs the truth row.
pub fn render_sizing_table(truth: &SizingSolution, rows: &[(String, SizingSolution)]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<16} {:>10} {:>16} {:>14} {:>16}\n",
        "harvest data", "PV modules", "battery modules", "cost ($)", "cost difference"
    ));
    out.push_str(&format!(
        "{:<16} {:>10} {:>16} {:>14.2} {:>16}\n",
        "ground truth", truth.n, truth.m, truth.total_cost, "0%"
    ));
    for (label, sol) in rows {
        let diff = crate::metrics::cost_difference(sol.total_cost, truth.total_cost)
            .map(|d| format!("{d:.3}%"))
            .unwrap_or_else(|_| "n/a".into());
        out.push_str(&format!(
            "{:<16} {:>10} {:>16} {:>14.2} {:>16}\n",
            label, sol.n, sol.m, sol.total_cost, diff
        ));
    }
    out
}
