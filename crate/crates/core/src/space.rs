//! Broken polynomial spaces on 1D and tensor-product 2D meshes.
//!
//! DOF layout: elements in lexicographic `(j, i)` order (`i` fastest), modal
//! coefficients innermost. In 2D the local index of `L_a(xi) L_b(eta)` is
//! `a + (k + 1) b`. Multi-field vectors stack whole fields, `(u, p, q)` in 2D
//! and `(u, q)` in 1D.

use crate::basis::{legendre_values, ReferenceBasis};
use crate::mesh::{Cell, Mesh1D, TensorMesh2D};

/// Piecewise `P^k` on a 1D mesh.
#[derive(Debug, Clone)]
pub struct Space1D {
    pub mesh: Mesh1D,
    pub degree: usize,
    pub basis: ReferenceBasis,
}

impl Space1D {
    pub fn new(mesh: Mesh1D, degree: usize) -> Self {
        Space1D {
            mesh,
            degree,
            basis: ReferenceBasis::new(degree),
        }
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n()
    }

    pub fn per_element(&self) -> usize {
        self.degree + 1
    }

    pub fn n_dofs(&self) -> usize {
        self.n_elements() * self.per_element()
    }

    /// Evaluate a field on element `e` at reference coordinate `xi`.
    pub fn eval(&self, field: &ScalarField, e: usize, xi: f64) -> f64 {
        let c = field.element(e);
        legendre_values(self.degree, xi)
            .iter()
            .zip(c)
            .map(|(l, c)| l * c)
            .sum()
    }

    /// Evaluate at a physical point; points on a node use the left cell.
    pub fn eval_at(&self, field: &ScalarField, x: f64) -> f64 {
        let pts = &self.mesh.points;
        let e = match pts.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) => i.saturating_sub(1),
            Err(i) => i.saturating_sub(1),
        }
        .min(self.n_elements() - 1);
        let (a, b) = self.mesh.cell(e);
        self.eval(field, e, (2.0 * x - a - b) / (b - a))
    }

    pub fn zero_field(&self) -> ScalarField {
        ScalarField::zeros(self.n_elements(), self.per_element())
    }
}

/// Piecewise `Q^k` on a tensor-product mesh.
#[derive(Debug, Clone)]
pub struct Space2D {
    pub mesh: TensorMesh2D,
    pub degree: usize,
    pub basis: ReferenceBasis,
}

impl Space2D {
    pub fn new(mesh: TensorMesh2D, degree: usize) -> Self {
        Space2D {
            mesh,
            degree,
            basis: ReferenceBasis::new(degree),
        }
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_cells()
    }

    pub fn per_element(&self) -> usize {
        (self.degree + 1) * (self.degree + 1)
    }

    pub fn n_dofs(&self) -> usize {
        self.n_elements() * self.per_element()
    }

    pub fn local(&self, a: usize, b: usize) -> usize {
        a + (self.degree + 1) * b
    }

    pub fn cell_of(&self, e: usize) -> Cell {
        let nx = self.mesh.nx();
        self.mesh.cell(e % nx, e / nx)
    }

    /// Evaluate a field on element `e` at reference point `(xi, eta)`.
    pub fn eval(&self, field: &ScalarField, e: usize, xi: f64, eta: f64) -> f64 {
        let lx = legendre_values(self.degree, xi);
        let ly = legendre_values(self.degree, eta);
        let c = field.element(e);
        let mut acc = 0.0;
        for (b, vy) in ly.iter().enumerate() {
            for (a, vx) in lx.iter().enumerate() {
                acc += c[self.local(a, b)] * vx * vy;
            }
        }
        acc
    }

    pub fn zero_field(&self) -> ScalarField {
        ScalarField::zeros(self.n_elements(), self.per_element())
    }
}

/// Coefficients of one scalar discrete function, element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    pub coeffs: Vec<f64>,
    pub per_element: usize,
}

impl ScalarField {
    pub fn zeros(n_elements: usize, per_element: usize) -> Self {
        ScalarField {
            coeffs: vec![0.0; n_elements * per_element],
            per_element,
        }
    }

    pub fn from_coeffs(coeffs: Vec<f64>, per_element: usize) -> Self {
        assert_eq!(coeffs.len() % per_element, 0, "ragged field");
        ScalarField { coeffs, per_element }
    }

    pub fn n_elements(&self) -> usize {
        self.coeffs.len() / self.per_element
    }

    pub fn element(&self, e: usize) -> &[f64] {
        &self.coeffs[e * self.per_element..(e + 1) * self.per_element]
    }

    pub fn element_mut(&mut self, e: usize) -> &mut [f64] {
        let k = self.per_element;
        &mut self.coeffs[e * k..(e + 1) * k]
    }
}

/// The discrete triple `(u, p, q)` with `p ~ eps u_x`, `q ~ eps u_y`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTriple {
    pub u: ScalarField,
    pub p: ScalarField,
    pub q: ScalarField,
}

impl FieldTriple {
    pub fn zeros(space: &Space2D) -> Self {
        FieldTriple {
            u: space.zero_field(),
            p: space.zero_field(),
            q: space.zero_field(),
        }
    }

    /// Split a stacked `(u, p, q)` vector.
    pub fn from_vector(v: &[f64], per_element: usize) -> Self {
        assert_eq!(v.len() % 3, 0);
        let n = v.len() / 3;
        FieldTriple {
            u: ScalarField::from_coeffs(v[..n].to_vec(), per_element),
            p: ScalarField::from_coeffs(v[n..2 * n].to_vec(), per_element),
            q: ScalarField::from_coeffs(v[2 * n..].to_vec(), per_element),
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(3 * self.u.coeffs.len());
        v.extend_from_slice(&self.u.coeffs);
        v.extend_from_slice(&self.p.coeffs);
        v.extend_from_slice(&self.q.coeffs);
        v
    }
}

/// The discrete pair `(u, q)` with `q ~ eps u_x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: ScalarField,
    pub q: ScalarField,
}

impl FieldPair {
    pub fn zeros(space: &Space1D) -> Self {
        FieldPair {
            u: space.zero_field(),
            q: space.zero_field(),
        }
    }

    pub fn from_vector(v: &[f64], per_element: usize) -> Self {
        assert_eq!(v.len() % 2, 0);
        let n = v.len() / 2;
        FieldPair {
            u: ScalarField::from_coeffs(v[..n].to_vec(), per_element),
            q: ScalarField::from_coeffs(v[n..].to_vec(), per_element),
        }
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.u.coeffs.len());
        v.extend_from_slice(&self.u.coeffs);
        v.extend_from_slice(&self.q.coeffs);
        v
    }
}
