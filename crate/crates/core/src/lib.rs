//! Random Maclaurin feature maps for dot product and compositional kernels.
//!
//! A dot product kernel `K(x, y) = f(<x, y>)` with `f(t) = Σ a_n t^n` and
//! all `a_n >= 0` is approximated by a random map `Z: R^d -> R^D` with
//! `E[<Z(x), Z(y)>] = K(x, y)`, so linear models on `Z(x)` stand in for
//! kernel machines.
//!
//! ```
//! use maclaurin::{FeatureMapSpec, MaclaurinKernel, RandomMaclaurinMap};
//!
//! let kernel = MaclaurinKernel::polynomial(2, 1.0).unwrap();
//! let map = RandomMaclaurinMap::build(&kernel, &FeatureMapSpec::new(3, 1000).with_seed(7)).unwrap();
//! let z = map.apply(&[0.1, 0.2, -0.3][..]).unwrap();
//! assert_eq!(z.len(), 1000);
//! ```

pub mod bench;
pub mod bounds;
pub mod compositional;
pub mod data;
pub mod error;
pub mod features;
pub mod kernel;
pub mod learner;
pub mod rng;

pub use bounds::{feature_product_bound, recommended_d, recommended_d_compositional, BoundReport};
pub use compositional::{
    parse_oracle, BaseFeature, BaseFeatureOracle, CompositionalMap, NestedOracle, OracleBounds,
    RademacherLinear, RandomFourier,
};
pub use data::{Dataset, Norm, SparseVector};
pub use error::{Error, ErrorClass, Result};
pub use features::{
    sample_degree, truncate_kernel, DegreeMeasure, FeatureMapSpec, InputVector, MapDocument,
    MapMode, RandomMaclaurinMap,
};
pub use kernel::{parse_kernel_spec, KernelFamily, MaclaurinKernel, Validation};
pub use learner::{Hyperparams, LinearModel};
