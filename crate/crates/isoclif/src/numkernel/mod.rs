//! Dense linear algebra, projection and differentiation kernels.

pub mod eig;
pub mod fd;
pub mod linalg;
mod matrix;
pub mod newton;
pub mod subspace;
pub mod vector;

pub use eig::{singular_values, sym_eig, SymEig};
pub use fd::{fd_gradient, fd_jacobian, fd_jacobian_mode, FdMode};
pub use linalg::{expm, inverse, kernel_rref, orthonormalize, solve, solve_vec};
pub use matrix::Matrix;
pub use newton::newton_project;
pub use subspace::{null_space, principal_angles, rank, Subspace};
