//! Independent oracles and the acceptance checks for `apwt`.

pub mod criteria;
pub mod oracle;

use serde::Serialize;

pub use criteria::Tamper;

/// Outcome of one acceptance criterion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub seconds: f64,
    pub budget_seconds: f64,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "[{}] criterion {}: {} ({:.2} s of {:.0} s) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.seconds,
            self.budget_seconds,
            self.detail
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    /// Parseval, propagator group law and ellipse identities; well under a minute.
    Quick,
    /// Every criterion.
    Full,
}

/// Criterion ids run at `level`.
pub fn criteria_for(level: Level) -> Vec<u8> {
    match level {
        Level::Quick => vec![1, 4, 6, 8],
        Level::Full => (1..=9).collect(),
    }
}

pub fn run_criterion(id: u8, tamper: Tamper) -> Option<Check> {
    Some(match id {
        1 => criteria::parseval(),
        2 => criteria::plancherel(tamper),
        3 => criteria::reconstruction(),
        4 => criteria::oracle_equivalence(),
        5 => criteria::six_group_experiment(),
        6 => criteria::propagator(),
        7 => criteria::kinematics(),
        8 => criteria::ellipse_geometry(),
        9 => criteria::covariance(),
        _ => return None,
    })
}

/// Runs the suite; with a tampered mother the Plancherel check joins the quick level.
pub fn run_suite(level: Level, tamper: Tamper, mut on_check: impl FnMut(&Check)) -> Vec<Check> {
    let mut ids = criteria_for(level);
    if tamper.mother_normalization.is_some() && !ids.contains(&2) {
        ids.insert(1, 2);
    }
    ids.into_iter()
        .filter_map(|id| run_criterion(id, tamper))
        .inspect(|c| on_check(c))
        .collect()
}
