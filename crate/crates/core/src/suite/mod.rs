//! Verification suite: every structural property of a lifted system, its group
//! heat kernel and the saturated kernel, run as one numbered check each.
//!
//! Checks that need a heat kernel are skipped for groups without one; the
//! symbolic checks always run.

mod checks;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::carnot::{lift_system, CarnotGroup, LiftReport};
use crate::error::Result;
use crate::io::FieldSystem;
use crate::kernel::{GroupHeatKernel, KernelConfig};
use crate::saturation::{SaturatedKernel, SaturationConfig};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Sample sizes of the acceptance criteria.
    #[default]
    Full,
    /// Fewer points and paths, same tolerances.
    Quick,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SuiteConfig {
    pub profile: Profile,
    /// Seeds the random test points.
    pub seed: u64,
    /// Seeds the Monte Carlo paths.
    pub mc_seed: u64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            profile: Profile::Full,
            seed: 11,
            mc_seed: 20261015,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

/// One measured quantity of a check and the limit it is held to.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metric {
    pub name: String,
    pub value: f64,
    pub limit: f64,
    pub passed: bool,
}

impl Metric {
    /// Passes when `value <= limit`.
    pub fn at_most(name: &str, value: f64, limit: f64) -> Self {
        Self {
            name: name.into(),
            value,
            limit,
            passed: value <= limit,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: u32,
    pub name: String,
    pub status: Status,
    pub metrics: Vec<Metric>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckResult {
    fn from_metrics(info: &CheckInfo, metrics: Vec<Metric>, detail: Option<String>) -> Self {
        let ok = !metrics.is_empty() && metrics.iter().all(|m| m.passed);
        Self {
            id: info.id,
            name: info.name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            metrics,
            detail,
        }
    }

    fn failed(info: &CheckInfo, why: String) -> Self {
        Self {
            id: info.id,
            name: info.name.into(),
            status: Status::Fail,
            metrics: Vec::new(),
            detail: Some(why),
        }
    }

    fn skipped(info: &CheckInfo, why: String) -> Self {
        Self {
            id: info.id,
            name: info.name.into(),
            status: Status::Skipped,
            metrics: Vec::new(),
            detail: Some(why),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// Static description of a check.
#[derive(Clone, Copy, Debug)]
pub struct CheckInfo {
    pub id: u32,
    pub name: &'static str,
    /// Wall-clock budget of the full profile.
    pub budget_secs: f64,
    /// Whether the check needs the heat kernel of the input system.
    pub needs_kernel: bool,
}

pub const CHECKS: [CheckInfo; 12] = [
    CheckInfo { id: 1, name: "euclidean_saturation", budget_secs: 5.0, needs_kernel: false },
    CheckInfo { id: 2, name: "lifting_exactness", budget_secs: 1.0, needs_kernel: false },
    CheckInfo { id: 3, name: "kernel_contract", budget_secs: 60.0, needs_kernel: true },
    CheckInfo { id: 4, name: "gamma_homogeneity", budget_secs: 30.0, needs_kernel: true },
    CheckInfo { id: 5, name: "mass_one", budget_secs: 60.0, needs_kernel: true },
    CheckInfo { id: 6, name: "space_symmetry", budget_secs: 30.0, needs_kernel: true },
    CheckInfo { id: 7, name: "reproduction", budget_secs: 120.0, needs_kernel: true },
    CheckInfo { id: 8, name: "derivative_representation", budget_secs: 120.0, needs_kernel: true },
    CheckInfo { id: 9, name: "monte_carlo_density", budget_secs: 300.0, needs_kernel: true },
    CheckInfo { id: 10, name: "cauchy_solver", budget_secs: 180.0, needs_kernel: true },
    CheckInfo { id: 11, name: "vanishing_at_infinity", budget_secs: 60.0, needs_kernel: true },
    CheckInfo { id: 12, name: "gaussian_sandwich", budget_secs: 60.0, needs_kernel: true },
];

pub fn check_info(id: u32) -> Option<&'static CheckInfo> {
    CHECKS.iter().find(|c| c.id == id)
}

/// Summary of the lifted group echoed in every report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupSummary {
    pub n: usize,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub p: usize,
    pub step: u32,
    pub q: String,
    pub q_star: String,
    #[serde(rename = "Q")]
    pub big_q: String,
    pub kernel_family: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub config: SuiteConfig,
    pub group: GroupSummary,
    pub checks: Vec<CheckResult>,
    pub all_passed: bool,
}

impl SuiteReport {
    pub fn new(suite: &Suite, checks: Vec<CheckResult>) -> Self {
        let all_passed = checks.iter().all(|c| c.status != Status::Fail);
        Self {
            config: suite.config,
            group: suite.summary(),
            checks,
            all_passed,
        }
    }
}

/// A lifted system ready to be checked.
pub struct Suite {
    system: FieldSystem,
    group: Arc<CarnotGroup>,
    lift: LiftReport,
    kernel: std::result::Result<GroupHeatKernel, String>,
    config: SuiteConfig,
}

impl Suite {
    /// Lifts `system`; fails only if the lift itself fails.
    pub fn new(system: &FieldSystem, config: SuiteConfig) -> Result<Self> {
        let (group, lift) = lift_system(system)?;
        let group = Arc::new(group);
        let kernel = GroupHeatKernel::new(group.clone(), KernelConfig::default()).map_err(|e| e.to_string());
        Ok(Self {
            system: system.clone(),
            group,
            lift,
            kernel,
            config,
        })
    }

    pub fn config(&self) -> &SuiteConfig {
        &self.config
    }

    pub fn group(&self) -> &Arc<CarnotGroup> {
        &self.group
    }

    pub fn lift_report(&self) -> &LiftReport {
        &self.lift
    }

    pub fn has_kernel(&self) -> bool {
        self.kernel.is_ok()
    }

    pub fn summary(&self) -> GroupSummary {
        GroupSummary {
            n: self.lift.n,
            big_n: self.lift.big_n,
            p: self.lift.p,
            step: self.lift.step,
            q: self.lift.q.clone(),
            q_star: self.lift.q_star.clone(),
            big_q: self.lift.big_q.clone(),
            kernel_family: self.lift.kernel_family.clone(),
        }
    }

    fn saturated(&self, rel_tol: f64) -> std::result::Result<SaturatedKernel, String> {
        let k = self.kernel.as_ref().map_err(Clone::clone)?;
        Ok(SaturatedKernel::new(
            k.clone(),
            SaturationConfig {
                rel_tol,
                ..Default::default()
            },
        ))
    }

    fn quick(&self) -> bool {
        self.config.profile == Profile::Quick
    }

    /// Runs one check. Numerical failures inside a check become a failed
    /// result, never an error.
    pub fn run(&self, id: u32) -> CheckResult {
        let Some(info) = check_info(id) else {
            return CheckResult {
                id,
                name: "unknown".into(),
                status: Status::Skipped,
                metrics: Vec::new(),
                detail: Some(format!("no check with id {id}")),
            };
        };
        if info.needs_kernel {
            if let Err(why) = &self.kernel {
                return CheckResult::skipped(info, format!("skipped: no kernel ({why})"));
            }
        }
        let outcome = match id {
            1 => checks::euclidean_saturation(self),
            2 => checks::lifting_exactness(self),
            3 => checks::kernel_contract(self),
            4 => checks::gamma_homogeneity(self),
            5 => checks::mass_one(self),
            6 => checks::space_symmetry(self),
            7 => checks::reproduction(self),
            8 => checks::derivative_representation(self),
            9 => checks::monte_carlo_density(self),
            10 => checks::cauchy_solver(self),
            11 => checks::vanishing_at_infinity(self),
            _ => checks::gaussian_sandwich(self),
        };
        match outcome {
            Ok(checks::Outcome::Measured(metrics, detail)) => CheckResult::from_metrics(info, metrics, detail),
            Ok(checks::Outcome::Skipped(why)) => CheckResult::skipped(info, why),
            Err(e) => CheckResult::failed(info, e.to_string()),
        }
    }

    pub fn run_all(&self) -> SuiteReport {
        let results = CHECKS.iter().map(|c| self.run(c.id)).collect();
        SuiteReport::new(self, results)
    }
}
