//! Compact flat Kähler manifolds presented as complex-torus quotients `T/G`.
//!
//! A manifold is described by a lattice of rank `2n`, a complex-structure
//! operator on the real span of the lattice, and a finite list of affine
//! generators (integer rotation part, rational translation part). On top of
//! that data the crate provides:
//!
//! * exact validation of the crystallographic data: group closure, freeness
//!   of the action (decided with Smith normal forms), holomorphy ([`crystal`]);
//! * rational cohomology of the quotient via character sums over the rotation
//!   group, Hodge numbers, invariant and holomorphic 2-forms ([`cohomology`]);
//! * synthesis of an equivariant hyper-Hermitian structure from a holomorphic
//!   2-form, including the kernel/complement splitting `E ⊕ F`
//!   ([`hyperhermitian`]);
//! * the twistor sphere of complex structures, the SU(2) action on 2-forms,
//!   and scans of the Hodge locus of a rational class ([`twistor`]);
//! * quaternionic and co-quaternionic doubles, which manufacture
//!   holomorphically symplectic quotients with controlled Betti numbers
//!   ([`doubles`]);
//! * a catalog of ready-made examples ([`catalog`]).
//!
//! Group-theoretic data is always exact (arbitrary-precision integers and
//! rationals); complex structures and metrics are floating point with the
//! tolerances collected in [`tol`].

// Indexed loops mirror the matrix formulas throughout.
#![allow(clippy::needless_range_loop)]

pub mod catalog;
pub mod cohomology;
pub mod crystal;
pub mod doubles;
pub mod exact;
pub mod hyperhermitian;
pub mod numeric;
pub mod tol;
pub mod twistor;

pub use cohomology::{HodgeDiamond, TwoForm};
pub use crystal::{AffineIsometry, FlatKahlerData, ValidationReport};
pub use doubles::DoubleResult;
pub use exact::{IntMatrix, Rat, RationalMatrix, SmithDecomposition};
pub use hyperhermitian::HyperHermitianStructure;
pub use twistor::{LocusClass, LocusReport, TwistorPoint};
