//! Criterion benchmarks for the hot loops of `hypgeo`; see `benches/`.

use hypgeo::patterson_sullivan::plane::{self as psp, LimitSettings};
use hypgeo::plane::PlanePoint;

/// Orbit atoms of the modular group around the standard base point, with
/// the boundary-limit settings the measure checks use.
pub fn modular_atoms(radius: f64) -> (PlanePoint, psp::OrbitAtoms, LimitSettings) {
    let base = hypgeo::counting::modular_base();
    let atoms = psp::orbit_atoms(&base, radius);
    let set = LimitSettings::for_atoms(&atoms);
    (base, atoms, set)
}
