//! Concrete model spaces with exact distance formulas.

pub mod cone;
pub mod disk;
pub mod distortion;
pub mod euclidean;
pub mod operator;
pub mod torus;

pub use cone::{funk_dist, hilbert_projective_dist, ConeMetric, PositiveCone};
pub use disk::{
    disk_busemann, disk_distance, Blaschke, DiskPoint, Mobius, MobiusKind, PoincareDisk,
};
pub use distortion::{distortion_coeff, Distortion};
pub use euclidean::{
    check_convexity, check_homogeneity, hilbert_functional, hilbert_limit_classifier,
    DeclaredLimit, Euclidean, Radius,
};
pub use operator::{operator_hemi_dist, operator_norm, OperatorSpace};
pub use torus::{
    mapclass_act, thurston_dist, torus_length, Curve, MappingClass, ThurstonMode, TorusTeich,
};
