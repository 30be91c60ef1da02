//! Look-around random walks: samplers, an exact oracle, tail fits and
//! statistical checks of their hitting and exit laws.

pub mod checks;
pub mod fit;
pub mod law;
pub mod oracle;
pub mod sample;

pub use checks::{
    check_lemma17, check_lemma50, check_lemma6, check_lemma7, check_prop22, chernoff_bound, pair_interval_time, scan_lemma7, CheckError,
    CheckResult,
};
pub use fit::{fit_exact, fit_points, fit_tail, fit_tail_from, FitError, FitPoint, TailFit, TailModel};
pub use law::{Atom, LawError, Step, StepLaw};
pub use oracle::{distribution, exact_dp_oracle, OracleError};
pub use sample::{estimate_event, sample_walk, stopping_time, stopping_times, Event, EventEstimate, LookAroundWalk, PathPoint, Target};
