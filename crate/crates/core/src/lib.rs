//! Computational toolkit for coincidences between division fields of
//! elliptic curves.
//!
//! The crate is organised bottom-up:
//!
//! * [`modmat`]: residues and 2x2 matrices over `Z/nZ`;
//! * [`matgroup`]: finite subgroups of `GL2(Z/nZ)` given by generators;
//! * [`lifting`]: split lifts of elements and groups along `Z/mnZ -> Z/mZ`;
//! * [`padic`]: index sequences of `p`-adic images and vertical coincidences;
//! * [`rules`]: curve records and the obstruction audit for `F(E[m]) = F(E[n])`;
//! * [`xmodular`]: exact evaluation of the `j`-map of the modular curve `X_20b`.

pub mod arith;
pub mod error;
pub mod io;
pub mod lifting;
pub mod matgroup;
pub mod modmat;
pub mod padic;
pub mod rules;
pub mod xmodular;

pub use error::{Error, Result};
pub use matgroup::{gl2_order, sl2_order, AbelianInvariants, MatGroup};
pub use modmat::{Mat2, Residue};

use std::sync::atomic::{AtomicUsize, Ordering};

/// Default cap on the number of elements any materialised group may have.
pub const DEFAULT_GROUP_CAP: usize = 1 << 22;

static GROUP_CAP: AtomicUsize = AtomicUsize::new(DEFAULT_GROUP_CAP);

/// Current process-wide group-size cap.
pub fn group_cap() -> usize {
    GROUP_CAP.load(Ordering::Relaxed)
}

/// Changes the process-wide group-size cap. Intended for front ends.
pub fn set_group_cap(cap: usize) {
    GROUP_CAP.store(cap.max(1), Ordering::Relaxed);
}
