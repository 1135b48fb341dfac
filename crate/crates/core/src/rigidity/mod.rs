//! Chain maps between presentations, their certification, and the
//! recognition of the test dga from homology and Massey data.

mod morphism;
mod perturb;
mod postnikov;
mod synthesis;

pub use morphism::{
    check_chain_map, check_homology_iso, check_homology_iso_on, check_morphism, check_multiplicativity, CertReport,
    DgaMorphism, Sweep,
};
pub use perturb::{perturb_dga, Perturbation};
pub use postnikov::{
    check_truncation, factor_mono_epi, kill_positive_homology, normalize_degree_zero, pullback, PostnikovCertificate,
    PostnikovError, PostnikovResult,
};
pub use synthesis::{
    synthesize_qiso, ChosenChains, MachineChains, MachineReport, StepRecord, SynthesisFailure, SynthesisReport,
};
