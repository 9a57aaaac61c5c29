//! Rotation estimation through special unitary matrices.
//!
//! Solvers for Wahba's problem (Davenport's q-method plus eigenvector solvers
//! built on stereographic and 3D constraints, and a Möbius approximation),
//! closed-form one- and two-point aligners, and differentiable maps from
//! network outputs to rotations.
//!
//! Quaternions are Hamilton, scalar first, and every public solver returns
//! them with the canonical sign (`w >= 0`).

// Fixed-size matrix code reads best with explicit indices; `!(x >= t)` is
// used on purpose so NaN falls into the rejecting branch.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod closedform;
pub mod error;
pub mod learnmaps;
pub mod linalg;
pub mod projective;
pub mod types;
pub mod vec3;
pub mod wahba;

pub use closedform::{
    align_cross, average_two_quats, degenerate_two_point, kernel_rows, one_point_align,
    two_point_exact, two_point_solve, two_point_unweighted, two_point_weighted, KernelRowId,
    UnnormalizedQuat,
};
pub use error::{Error, Result};
pub use learnmaps::{
    quadmobius_assemble, quadmobius_backward, quadmobius_extract, quadmobius_forward,
    quadmobius_forward_cached, twovec_backward, twovec_forward, twovec_forward_cached,
    GradientRecord, QuadMobiusCache, QuadMobiusVariant, SixVec, Theta16, TwoVecCache,
};
pub use linalg::{eigh_herm4, eigh_sym4, svd_c2, Cmat2, Herm4, Sym4};
pub use projective::{
    chi_embed, mobius_apply, projective_chordal_sq, stereo_project, stereo_unproject,
    su2_conjugate, MobiusTransform, ProjectivePoint,
};
pub use types::{
    apply_frame_fix, canonicalize, quat_angular_error, quat_compose, quat_from_su2, quat_to_rotmat,
    rotate_vec, su2_from_quat, Observation, ObservationSet, RotationMatrix, SU2Matrix,
    UnitQuaternion, UnitVec3,
};
pub use wahba::{
    build_aprime_row, build_d_general, build_d_row, build_q, solve_davenport, solve_gm, solve_gp,
    solve_gs, StereoEntry, StereoObservationSet, WahbaSolution,
};
