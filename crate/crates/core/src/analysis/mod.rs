//! Certification of geometric constants and rate diagnostics.
//!
//! * [`lds`] - sampled local dual sharpness, uniform convexity checks and
//!   analytic certificates.
//! * [`rates`] - log-log exponent fits, the `h_t` decay verdict and the
//!   power-descent recursion.
//! * [`support`] - closed-form support values of the planar examples.

pub mod lds;
pub mod rates;
pub mod support;

pub use lds::{
    check_uc, estimate_lds, estimate_uc_alpha, lds_from_patch, lds_from_uc, patch_beta_2d,
    validate_certificate, CertificateCheck, LdsCertificate, LdsEstimate, LdsProvenance, LdsSampler,
    PatchBeta, UcCheck, UcSampler,
};
pub use rates::{
    check_h_decay, fit_exponent, gap_series, power_descent_oracle, ExponentFit, HDecay,
    WindowPolicy,
};
