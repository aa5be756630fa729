//! Graded annular meshes of curved quadratic triangles.

pub mod io;
pub mod mesh;
pub mod schedule;
pub mod svg;

pub use mesh::{AnnulusMesh, Element, ElementKind};
pub use schedule::{
    angular_cap, area_increment, max_mesh_size, thickness_cap, LayerSchedule, LayerSpec,
    MeshConfig, NmPolicy,
};
pub use svg::mesh_to_svg;
