//! Complex geometrical optics: frequency pairs, the directional Cauchy
//! transform, exact discrete CGO solutions and Fourier probes built from
//! their products.

pub mod build;
pub mod cauchy;
pub mod probe;
pub mod zeta;

pub use build::{
    build_cgo, build_cgo_with_phase, cgo_phase, discrete_rate, magnetic_phase, phase_cancellation, remainder_non_increasing,
    remainder_sweep, CgoPath, CgoSolution, PhaseCancellation, RemainderRow,
};
pub use cauchy::{cauchy_on_grid, cauchy_transform, gaussian_inversion_error, interpolate, plane_frame, support_box, CauchyOutput, CauchyParams, PlaneSource};
pub use probe::{cgo_pair, fourier_probe, ideal_fourier, ProbeRow};
pub use zeta::{bilinear, canonical_frame, make_zeta_pair, CgoPhase, Frame, ZetaPair};
