//! Seeded Monte-Carlo scenarios and their CSV output.

use std::fmt::Write as _;
use std::str::FromStr;

use fdgroup_conic::ConicProgram;
use rayon::prelude::*;

use crate::algorithms::{hd_baseline, run_algorithm1, run_algorithm2, RunOptions, RunTrace};
use crate::error::{CoreError, Result};
use crate::system::{db_to_linear, draw_instance, nats_to_bps, trial_seed, bps_to_nats, SystemConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Convergence,
    SweepRho,
    SweepRbar,
    SweepUsers,
    GroupingTable,
}

impl ScenarioName {
    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Convergence => "convergence",
            ScenarioName::SweepRho => "sweep-rho",
            ScenarioName::SweepRbar => "sweep-rbar",
            ScenarioName::SweepUsers => "sweep-users",
            ScenarioName::GroupingTable => "grouping-table",
        }
    }

    /// Name of the swept quantity and its unit in the CSV.
    pub fn grid_field(self) -> &'static str {
        match self {
            ScenarioName::Convergence | ScenarioName::GroupingTable => "none",
            ScenarioName::SweepRho => "rho_db",
            ScenarioName::SweepRbar => "rbar_bps",
            ScenarioName::SweepUsers => "users",
        }
    }

    pub fn default_grid(self) -> Vec<f64> {
        match self {
            ScenarioName::Convergence | ScenarioName::GroupingTable => vec![0.0],
            ScenarioName::SweepRho => vec![-90.0, -80.0, -75.0, -70.0, -60.0],
            ScenarioName::SweepRbar => vec![0.5, 1.0, 1.5, 2.0],
            ScenarioName::SweepUsers => vec![2.0, 4.0, 6.0],
        }
    }

    pub fn default_methods(self) -> Vec<Method> {
        match self {
            ScenarioName::Convergence => vec![Method::Alg1, Method::Alg2],
            ScenarioName::GroupingTable => vec![Method::Alg2, Method::FdG1],
            _ => vec![Method::Alg2, Method::Alg1, Method::FdG1, Method::Hd],
        }
    }
}

impl FromStr for ScenarioName {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        let norm: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        Ok(match norm.as_str() {
            "convergence" => ScenarioName::Convergence,
            "sweeprho" => ScenarioName::SweepRho,
            "sweeprbar" => ScenarioName::SweepRbar,
            "sweepusers" => ScenarioName::SweepUsers,
            "groupingtable" => ScenarioName::GroupingTable,
            _ => return Err(CoreError::Config(format!("unknown scenario `{s}`"))),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Alg1,
    Alg2,
    /// Algorithm 1 with a single group: full duplex without grouping.
    FdG1,
    Hd,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Alg1 => "alg1",
            Method::Alg2 => "alg2",
            Method::FdG1 => "fd_g1",
            Method::Hd => "hd",
        }
    }
}

impl FromStr for Method {
    type Err = CoreError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "alg1" => Method::Alg1,
            "alg2" => Method::Alg2,
            "fd_g1" | "fdg1" => Method::FdG1,
            "hd" => Method::Hd,
            _ => return Err(CoreError::Config(format!("unknown method `{s}`"))),
        })
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: ScenarioName,
    pub grid: Vec<f64>,
    pub trials: usize,
    pub methods: Vec<Method>,
}

impl Scenario {
    pub fn new(name: ScenarioName, trials: usize) -> Self {
        Self {
            name,
            grid: name.default_grid(),
            trials,
            methods: name.default_methods(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(CoreError::Config("trials must be at least 1".into()));
        }
        if self.grid.is_empty() || self.grid.iter().any(|v| !v.is_finite()) {
            return Err(CoreError::Config("sweep grid must be nonempty and finite".into()));
        }
        if self.methods.is_empty() {
            return Err(CoreError::Config("no methods requested".into()));
        }
        Ok(())
    }
}

/// The configuration at one grid point.
pub fn apply_grid(name: ScenarioName, cfg: &SystemConfig, value: f64) -> Result<SystemConfig> {
    let mut c = cfg.clone();
    match name {
        ScenarioName::Convergence | ScenarioName::GroupingTable => {}
        ScenarioName::SweepRho => c.rho = db_to_linear(value),
        ScenarioName::SweepRbar => {
            c.rbar_dl = bps_to_nats(value);
            c.rbar_ul = bps_to_nats(value);
        }
        ScenarioName::SweepUsers => {
            if value < 1.0 || value.fract() != 0.0 {
                return Err(CoreError::Config(format!("user count {value} is not a positive integer")));
            }
            c.k = value as usize;
            c.l = value as usize;
        }
    }
    c.validate()?;
    Ok(c)
}

/// Outcome of one method on one channel draw.
#[derive(Debug, Clone)]
pub enum MethodOutcome {
    Done {
        /// Delivered sum rate with hardened grouping, nats.
        rate: f64,
        /// Per-user totals, nats; DL users first.
        user_rates: Vec<f64>,
        trace: Option<Box<RunTrace>>,
    },
    Infeasible,
}

pub fn run_method(
    method: Method,
    cfg: &SystemConfig,
    seed: u64,
    opts: &RunOptions,
) -> Result<MethodOutcome> {
    let (_, ch) = draw_instance(cfg, seed)?;
    let out = match method {
        Method::Alg1 => run_algorithm1(&ch, cfg, None, opts),
        Method::Alg2 => run_algorithm2(&ch, cfg, None, opts),
        Method::FdG1 => {
            let c = SystemConfig { g: 1, ..cfg.clone() };
            run_algorithm1(&ch, &c, None, opts)
        }
        Method::Hd => {
            return match hd_baseline(&ch, cfg, seed, opts) {
                Ok(hd) => {
                    let mut users = Vec::new();
                    let half = |t: &Option<RunTrace>, users: &mut Vec<f64>| {
                        if let Some(t) = t {
                            users.extend(per_user(t).into_iter().map(|r| 0.5 * r));
                            0.5 * t.hardened.total
                        } else {
                            0.0
                        }
                    };
                    let rate = half(&hd.dl, &mut users) + half(&hd.ul, &mut users);
                    Ok(MethodOutcome::Done {
                        rate,
                        user_rates: users,
                        trace: None,
                    })
                }
                Err(CoreError::InfeasibleScenario { .. }) => Ok(MethodOutcome::Infeasible),
                Err(e) => Err(e),
            };
        }
    };
    match out {
        Ok(t) => Ok(MethodOutcome::Done {
            rate: t.hardened.total,
            user_rates: per_user(&t),
            trace: Some(Box::new(t)),
        }),
        Err(CoreError::InfeasibleScenario { .. }) => Ok(MethodOutcome::Infeasible),
        Err(e) => Err(e),
    }
}

/// Per-user totals of the hardened rate table; DL users first.
pub fn per_user(t: &RunTrace) -> Vec<f64> {
    let g = t.point.g;
    let h = &t.hardened;
    let sum = |v: &[f64], u: usize| v[u * g..(u + 1) * g].iter().sum::<f64>();
    (0..t.point.k)
        .map(|k| sum(&h.dl_rates, k))
        .chain((0..t.point.l).map(|l| sum(&h.ul_rates, l)))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stats {
    pub n: usize,
    pub mean: f64,
    pub stderr: f64,
}

pub fn mean_stderr(v: &[f64]) -> Stats {
    let n = v.len();
    if n == 0 {
        return Stats {
            n,
            mean: f64::NAN,
            stderr: f64::NAN,
        };
    }
    let mean = v.iter().sum::<f64>() / n as f64;
    let stderr = if n > 1 {
        let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    Stats { n, mean, stderr }
}

#[derive(Debug)]
pub struct ScenarioOutput {
    pub csv: String,
    pub exclusions: usize,
    /// First subproblem of the first method on the first draw.
    pub first_program: Option<ConicProgram>,
}

struct Job {
    grid: usize,
    trial: usize,
    method: usize,
}

/// Runs every (grid point, trial, method) job on a pool of `threads`
/// workers and assembles the CSV in (grid, method, trial) order.
pub fn run_scenario(
    s: &Scenario,
    cfg: &SystemConfig,
    threads: usize,
    opts: &RunOptions,
    keep_program: bool,
) -> Result<ScenarioOutput> {
    s.validate()?;
    cfg.validate()?;
    let cfgs = s
        .grid
        .iter()
        .map(|&v| apply_grid(s.name, cfg, v))
        .collect::<Result<Vec<_>>>()?;
    let mut jobs = Vec::new();
    for grid in 0..s.grid.len() {
        for trial in 0..s.trials {
            for method in 0..s.methods.len() {
                jobs.push(Job { grid, trial, method });
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .map_err(|e| CoreError::Config(format!("worker pool: {e}")))?;
    let results: Vec<Result<MethodOutcome>> = pool.install(|| {
        jobs.par_iter()
            .map(|j| {
                let mut o = opts.clone();
                o.keep_first_program = keep_program && j.grid == 0 && j.trial == 0 && j.method == 0;
                let seed = trial_seed(cfg.seed, j.grid as u64, j.trial as u64);
                run_method(s.methods[j.method], &cfgs[j.grid], seed, &o)
            })
            .collect()
    });
    let mut table = Vec::with_capacity(results.len());
    for r in results {
        table.push(r?);
    }
    let at = |grid: usize, trial: usize, method: usize| {
        &table[(grid * s.trials + trial) * s.methods.len() + method]
    };
    let exclusions = table
        .iter()
        .filter(|o| matches!(o, MethodOutcome::Infeasible))
        .count();
    let first_program = match &table[0] {
        MethodOutcome::Done { trace: Some(t), .. } => t.first_program.clone(),
        _ => None,
    };
    let mut csv = String::new();
    match s.name {
        ScenarioName::Convergence => {
            csv.push_str("scenario,method,trial,iteration,exact_bps,surrogate_bps,status,damped,max_residual,ipm_iters\n");
            for m in 0..s.methods.len() {
                for trial in 0..s.trials {
                    let name = s.methods[m].as_str();
                    match at(0, trial, m) {
                        MethodOutcome::Done { trace: Some(t), .. } => {
                            let _ = writeln!(
                                csv,
                                "{},{},{},0,{:.9},,start,,,",
                                s.name.as_str(),
                                name,
                                trial,
                                nats_to_bps(t.start_objective)
                            );
                            for (i, r) in t.iterations.iter().enumerate() {
                                let _ = writeln!(
                                    csv,
                                    "{},{},{},{},{:.9},{:.9},{},{},{:.3e},{}",
                                    s.name.as_str(),
                                    name,
                                    trial,
                                    i + 1,
                                    nats_to_bps(r.exact),
                                    nats_to_bps(r.surrogate),
                                    r.status,
                                    r.damped,
                                    r.max_residual,
                                    r.ipm_iters
                                );
                            }
                        }
                        MethodOutcome::Done { rate, .. } => {
                            let _ = writeln!(csv, "{},{},{},final,{:.9},,,,,", s.name.as_str(), name, trial, nats_to_bps(*rate));
                        }
                        MethodOutcome::Infeasible => {
                            let _ = writeln!(csv, "{},{},{},0,,,infeasible,,,", s.name.as_str(), name, trial);
                        }
                    }
                }
            }
        }
        ScenarioName::GroupingTable => {
            let g = cfg.g;
            csv.push_str("scenario,method,trial,user,direction");
            for i in 0..g {
                let _ = write!(csv, ",group_{}", i + 1);
            }
            csv.push_str(",total_bps\n");
            for m in 0..s.methods.len() {
                for trial in 0..s.trials {
                    let name = s.methods[m].as_str();
                    let prefix = format!("{},{},{}", s.name.as_str(), name, trial);
                    match at(0, trial, m) {
                        MethodOutcome::Done { trace: Some(t), .. } => {
                            write_group_rows(&mut csv, &prefix, t, g);
                        }
                        MethodOutcome::Done { rate, .. } => {
                            let _ = writeln!(csv, "{prefix},sum,all{},{:.9}", ",".repeat(g), nats_to_bps(*rate));
                        }
                        MethodOutcome::Infeasible => {
                            let _ = writeln!(csv, "{prefix},infeasible,all{},", ",".repeat(g));
                        }
                    }
                }
            }
        }
        _ => {
            csv.push_str(
                "scenario,method,grid_field,grid_value,trials,used,excluded,mean_bps,stderr_bps,min_user_bps\n",
            );
            for grid in 0..s.grid.len() {
                for m in 0..s.methods.len() {
                    let mut rates = Vec::new();
                    let mut min_user = f64::INFINITY;
                    for trial in 0..s.trials {
                        if let MethodOutcome::Done { rate, user_rates, .. } = at(grid, trial, m) {
                            rates.push(nats_to_bps(*rate));
                            for &u in user_rates {
                                min_user = min_user.min(nats_to_bps(u));
                            }
                        }
                    }
                    let st = mean_stderr(&rates);
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{},{},{},{:.9},{:.9},{}",
                        s.name.as_str(),
                        s.methods[m].as_str(),
                        s.name.grid_field(),
                        s.grid[grid],
                        s.trials,
                        st.n,
                        s.trials - st.n,
                        st.mean,
                        st.stderr,
                        if min_user.is_finite() { format!("{min_user:.9}") } else { String::new() }
                    );
                }
            }
        }
    }
    Ok(ScenarioOutput {
        csv,
        exclusions,
        first_program,
    })
}

fn write_group_rows(csv: &mut String, prefix: &str, t: &RunTrace, g: usize) {
    let h = &t.hardened;
    let mut total = 0.0;
    let row = |csv: &mut String, user: usize, dir: &str, v: &[f64]| {
        let mut s = 0.0;
        let _ = write!(csv, "{prefix},{user},{dir}");
        for x in v {
            let b = nats_to_bps(*x);
            s += b;
            let _ = write!(csv, ",{b:.9}");
        }
        let _ = writeln!(csv, ",{s:.9}");
        s
    };
    for k in 0..t.point.k {
        total += row(csv, k + 1, "dl", &h.dl_rates[k * g..(k + 1) * g]);
    }
    for l in 0..t.point.l {
        total += row(csv, l + 1, "ul", &h.ul_rates[l * g..(l + 1) * g]);
    }
    let _ = writeln!(csv, "{prefix},sum,all{},{total:.9}", ",".repeat(g));
}
