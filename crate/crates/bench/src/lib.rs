//! Shared setup for the solver benchmarks in `benches/`.

use ldg_core::ldg2d::{self, AssembledSystem};
use ldg_core::mesh::tensor_mesh;
use ldg_core::problem::ProblemDef2D;
use ldg_core::space::Space2D;
use ldg_core::{MeshKind, MeshSpec};

/// Layer test problem on a mesh of the given kind with `sigma = k + 2`.
pub fn layer_case(kind: MeshKind, n: usize, k: usize, eps: f64) -> (ProblemDef2D, Space2D) {
    let spec = MeshSpec::new(kind, n, eps, (k + 2) as f64, 1.0).expect("valid mesh");
    (ProblemDef2D::layer_test(eps), Space2D::new(tensor_mesh(&spec), k))
}

pub fn assembled(kind: MeshKind, n: usize, k: usize, eps: f64) -> (ProblemDef2D, Space2D, AssembledSystem) {
    let (problem, space) = layer_case(kind, n, k, eps);
    let system = ldg2d::assemble_b(&problem, &space).expect("assembly");
    (problem, space, system)
}
