pub mod fourier;
pub mod holder;
pub mod holo;
pub mod lifted;
pub mod poly;
pub mod surface;
pub mod types;

pub use holder::holder_norm;
pub use holo::{PolyMap, PolyMapJson};
pub use lifted::{DiscJson, LiftedDisc, DEFAULT_MODES, DEFAULT_SAMPLES};
pub use poly::{DefiningEval, DefiningPolynomial, PolynomialJson};
pub use surface::{NormalFormSurface, PointDerivatives, SurfaceCalculus};
pub use types::{BoundaryJet1, ComplexPoint, Covector, HermitianForm, MapJet2, C64};
