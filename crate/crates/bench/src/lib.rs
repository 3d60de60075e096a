//! Shared fixtures for the criterion benches.

use chunktune::{
    build_two_layer_model, AcquisitionGeometry, Grid3, GridPoint, RickerSource, VelocityModel,
};

/// Two-layer cube of `n` interior points per axis at 10 m with a `wb`-point band, and a
/// shot at the top center with one receiver line.
pub fn two_layer_shot(n: usize, wb: usize, ns: usize) -> (VelocityModel, AcquisitionGeometry) {
    let grid = Grid3::cube(n, 10.0, wb).expect("grid");
    let model = build_two_layer_model(grid, 1400.0, 2000.0).expect("model");
    let c = n / 2;
    let src = RickerSource::new(20.0, GridPoint::new(c, c, 2)).expect("source");
    let receivers = (0..n).step_by(2).map(|i| GridPoint::new(i, c, 2)).collect();
    let geom = AcquisitionGeometry::new(&grid, src, receivers, ns, 1e-3).expect("geometry");
    (model, geom)
}
