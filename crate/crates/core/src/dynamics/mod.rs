//! Time integration of the first-order system in `(u, d, w)`.

pub mod director;
pub mod init;
pub mod integrate;
pub mod picard;
pub mod rhs;
pub mod state;

pub use director::{director_only_run, DirectorSample};
pub use init::{make_initial_data, random_state, InitialKind, DEFAULT_BAND, RNG_DESCRIPTION};
pub use integrate::{
    cfl_limit, k_max, renormalize, step, Integrator, PicardSettings, SolverConfig, Stepper, BLOWUP_THRESHOLD,
};
pub use picard::{picard_step, picard_step_with_report, PicardReport};
pub use rhs::{rhs, GammaForm, Rhs, Tendency};
pub use state::State;
