//! Domain types: radii, edge lengths, angle vectors, and small symmetric
//! matrices with recorded finite-difference asymmetry.

use nalgebra::DMatrix;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::error::InvalidInput;
use crate::pairs::{EDGE_COUNT, EDGE_PAIRS, VERTEX_COUNT, edges_at_vertex, pair_index};

/// The two constant-curvature geometries handled by the crate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Geometry {
    Euclidean,
    Hyperbolic,
}

impl std::fmt::Display for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Geometry::Euclidean => write!(f, "euclidean"),
            Geometry::Hyperbolic => write!(f, "hyperbolic"),
        }
    }
}

fn validate(values: &[f64], fields: &'static [&'static str]) -> Result<(), InvalidInput> {
    for (&v, &field) in values.iter().zip(fields) {
        if !v.is_finite() {
            return Err(InvalidInput::NotFinite { field, value: v });
        }
        if v <= 0.0 {
            return Err(InvalidInput::NonPositive { field, value: v });
        }
    }
    Ok(())
}

const RADII_FIELDS: [&str; 4] = ["r1", "r2", "r3", "r4"];
const LENGTH_FIELDS: [&str; 6] = ["l12", "l13", "l14", "l23", "l24", "l34"];

/// Positive vertex radii — the conformal coordinates of a simplex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Radii([f64; VERTEX_COUNT]);

impl Radii {
    pub fn new(values: [f64; 4]) -> Result<Self, InvalidInput> {
        validate(&values, &RADII_FIELDS)?;
        Ok(Radii(values))
    }

    pub fn get(&self, vertex: usize) -> f64 {
        self.0[vertex]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn geometric_mean(&self) -> f64 {
        (self.0.iter().map(|v| v.ln()).sum::<f64>() / 4.0).exp()
    }

    /// Radii scaled by `t > 0`.
    pub fn scaled(&self, t: f64) -> Self {
        debug_assert!(t > 0.0);
        Radii(self.0.map(|v| v * t))
    }

    /// Radii after relabeling vertices by `perm` (old index -> new index).
    pub fn relabeled(&self, perm: &[usize; 4]) -> Self {
        let mut out = [0.0; 4];
        for (old, &new) in perm.iter().enumerate() {
            out[new] = self.0[old];
        }
        Radii(out)
    }
}

impl Serialize for Radii {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Radii", 4)?;
        for (&v, &field) in self.0.iter().zip(&RADII_FIELDS) {
            s.serialize_field(field, &v)?;
        }
        s.end()
    }
}

/// The six edge lengths of a tetrahedron in the fixed pair order
/// (12, 13, 14, 23, 24, 34).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeLengths([f64; EDGE_COUNT]);

impl EdgeLengths {
    pub fn new(values: [f64; 6]) -> Result<Self, InvalidInput> {
        validate(&values, &LENGTH_FIELDS)?;
        Ok(EdgeLengths(values))
    }

    /// Length of the edge with pair index `edge`.
    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }

    /// Length of the edge joining vertices `i` and `j`.
    pub fn between(&self, i: usize, j: usize) -> f64 {
        self.0[pair_index(i, j)]
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.0
    }

    pub fn squared(&self) -> [f64; 6] {
        self.0.map(|l| l * l)
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn geometric_mean(&self) -> f64 {
        (self.0.iter().map(|v| v.ln()).sum::<f64>() / 6.0).exp()
    }

    /// Lengths scaled by `t > 0`.
    pub fn scaled(&self, t: f64) -> Self {
        debug_assert!(t > 0.0);
        EdgeLengths(self.0.map(|v| v * t))
    }

    /// Lengths after relabeling vertices by `perm` (old index -> new index):
    /// the new edge {perm(i), perm(j)} carries the old length of {i, j}.
    pub fn relabeled(&self, perm: &[usize; 4]) -> Self {
        let mut out = [0.0; 6];
        for (e, &(i, j)) in EDGE_PAIRS.iter().enumerate() {
            out[pair_index(perm[i], perm[j])] = self.0[e];
        }
        EdgeLengths(out)
    }
}

impl Serialize for EdgeLengths {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("EdgeLengths", 6)?;
        for (&v, &field) in self.0.iter().zip(&LENGTH_FIELDS) {
            s.serialize_field(field, &v)?;
        }
        s.end()
    }
}

/// Interior dihedral angles along the six edges, in pair order, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DihedralAngles([f64; EDGE_COUNT]);

impl DihedralAngles {
    /// Wrap raw angles; callers are expected to supply values in (0, pi).
    pub fn from_array(values: [f64; 6]) -> Self {
        DihedralAngles(values)
    }

    pub fn get(&self, edge: usize) -> f64 {
        self.0[edge]
    }

    pub fn as_array(&self) -> [f64; 6] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    /// Sum of the three dihedral angles at the edges meeting `vertex`.
    pub fn sum_at_vertex(&self, vertex: usize) -> f64 {
        edges_at_vertex(vertex).iter().map(|&e| self.0[e]).sum()
    }
}

impl Serialize for DihedralAngles {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        const FIELDS: [&str; 6] = ["a12", "a13", "a14", "a23", "a24", "a34"];
        let mut s = serializer.serialize_struct("DihedralAngles", 6)?;
        for (&v, &field) in self.0.iter().zip(&FIELDS) {
            s.serialize_field(field, &v)?;
        }
        s.end()
    }
}

/// Solid angles at the four vertices, radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolidAngles([f64; VERTEX_COUNT]);

impl SolidAngles {
    pub fn from_array(values: [f64; 4]) -> Self {
        SolidAngles(values)
    }

    pub fn get(&self, vertex: usize) -> f64 {
        self.0[vertex]
    }

    pub fn as_array(&self) -> [f64; 4] {
        self.0
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

impl Serialize for SolidAngles {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        const FIELDS: [&str; 4] = ["s1", "s2", "s3", "s4"];
        let mut s = serializer.serialize_struct("SolidAngles", 4)?;
        for (&v, &field) in self.0.iter().zip(&FIELDS) {
            s.serialize_field(field, &v)?;
        }
        s.end()
    }
}

/// Symmetric matrix produced from (possibly slightly asymmetric)
/// finite-difference output: stores the symmetrized entries and the
/// relative asymmetry of the raw input.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix<const N: usize> {
    entries: [[f64; N]; N],
    asymmetry: f64,
}

impl<const N: usize> Serialize for SymMatrix<N> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<f64>> = self.entries.iter().map(|r| r.to_vec()).collect();
        let mut s = serializer.serialize_struct("SymMatrix", 2)?;
        s.serialize_field("entries", &rows)?;
        s.serialize_field("asymmetry", &self.asymmetry)?;
        s.end()
    }
}

pub type SymMatrix4 = SymMatrix<4>;
pub type SymMatrix6 = SymMatrix<6>;

impl<const N: usize> SymMatrix<N> {
    /// Symmetrize `raw` as (A + A^T)/2 and record the largest entry of
    /// |A - A^T| relative to the largest entry of |A|.
    pub fn from_raw(raw: [[f64; N]; N]) -> Self {
        let mut entries = [[0.0; N]; N];
        let mut max_abs = 0.0f64;
        let mut max_asym = 0.0f64;
        for i in 0..N {
            for j in 0..N {
                max_abs = max_abs.max(raw[i][j].abs());
                max_asym = max_asym.max((raw[i][j] - raw[j][i]).abs());
                entries[i][j] = 0.5 * (raw[i][j] + raw[j][i]);
            }
        }
        let asymmetry = if max_abs > 0.0 { max_asym / max_abs } else { 0.0 };
        SymMatrix { entries, asymmetry }
    }

    /// An already-symmetric matrix (asymmetry 0), e.g. for tests.
    pub fn from_symmetric(entries: [[f64; N]; N]) -> Self {
        Self::from_raw(entries)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i][j]
    }

    pub fn rows(&self) -> &[[f64; N]; N] {
        &self.entries
    }

    /// Relative asymmetry of the raw matrix this was built from.
    pub fn asymmetry(&self) -> f64 {
        self.asymmetry
    }

    pub fn mul_vec(&self, x: &[f64; N]) -> [f64; N] {
        std::array::from_fn(|i| (0..N).map(|j| self.entries[i][j] * x[j]).sum())
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(N, N, |i, j| self.entries[i][j])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radii_constructor_validates() {
        assert!(Radii::new([1.0, 2.0, 3.0, 4.0]).is_ok());
        let err = Radii::new([1.0, -1.0, 1.0, 1.0]).unwrap_err();
        assert_eq!(
            err,
            InvalidInput::NonPositive { field: "r2", value: -1.0 }
        );
        let err = EdgeLengths::new([1.0, 1.0, 1.0, 1.0, 0.0, 1.0]).unwrap_err();
        assert_eq!(err, InvalidInput::NonPositive { field: "l24", value: 0.0 });
        assert!(Radii::new([1.0, f64::NAN, 1.0, 1.0]).is_err());
    }

    #[test]
    fn length_relabeling_moves_entries() {
        let l = EdgeLengths::new([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]).unwrap();
        // swap vertices 1 and 2 (zero-based 0 and 1)
        let perm = [1, 0, 2, 3];
        let m = l.relabeled(&perm);
        assert_eq!(m.between(0, 1), l.between(1, 0));
        assert_eq!(m.between(1, 2), l.between(0, 2));
        assert_eq!(m.between(0, 2), l.between(1, 2));
        assert_eq!(m.between(2, 3), l.between(2, 3));
    }

    #[test]
    fn sym_matrix_records_asymmetry() {
        let m = SymMatrix::<2>::from_raw([[1.0, 2.0], [2.0 + 1e-8, 1.0]]);
        assert!((m.asymmetry() - 0.5e-8).abs() < 1e-12);
        assert_eq!(m.get(0, 1), m.get(1, 0));
        let z = SymMatrix::<3>::from_raw([[0.0; 3]; 3]);
        assert_eq!(z.asymmetry(), 0.0);
    }
}
