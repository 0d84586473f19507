//! The bundled example manifolds.

use crate::error::Result;
use crate::input::{parse_manifold_file, ManifoldFile};
use crate::manifold::GenericManifold;

pub const HEIS2: &str = include_str!("../../../fixtures/heis2.m");
pub const PLANE: &str = include_str!("../../../fixtures/plane.m");
pub const PROD3: &str = include_str!("../../../fixtures/prod3.m");
pub const ST0: &str = include_str!("../../../fixtures/st0.m");
pub const ST3: &str = include_str!("../../../fixtures/st3.m");

/// `(name, source)` for every bundled fixture.
pub const ALL: [(&str, &str); 5] = [
    ("heis2", HEIS2),
    ("plane", PLANE),
    ("prod3", PROD3),
    ("st0", ST0),
    ("st3", ST3),
];

pub fn file(name: &str) -> Option<ManifoldFile> {
    ALL.iter()
        .find(|(n, _)| *n == name)
        .map(|(_, src)| parse_manifold_file(src).expect("bundled fixtures parse"))
}

/// Parsed and validated fixture; panics on an unknown name.
pub fn manifold(name: &str) -> GenericManifold {
    load(name).expect("bundled fixtures are valid")
}

pub fn load(name: &str) -> Result<GenericManifold> {
    file(name)
        .ok_or_else(|| crate::error::Error::InvalidArgument(format!("no fixture named {name}")))?
        .to_manifold()
}
