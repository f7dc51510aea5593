//! Classical (large-spin) analysis of the kicked map.

pub mod fixed_point;
pub mod lyapunov;
pub mod scan;
pub mod section;
pub mod zgeom;

pub use fixed_point::{find_fixed_point, jacobian_at, FixedPoint, FixedPointOptions, JacobianResult};
pub use lyapunov::{lyapunov_estimate, lyapunov_exponent, LyapunovOptions, LyapunovResult};
pub use scan::{bifurcation_scan, classify, lyapunov_map, BifurcationRow, PhaseDiagramCell, ScanAxis};
pub use section::{poincare_section, SectionPoint, SectionSet};
pub use zgeom::{z_geom, z_geom_invariant_average};
