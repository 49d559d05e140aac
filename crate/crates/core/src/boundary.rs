//! Boundary conditions keyed by boundary tag.

use std::fmt;
use std::sync::Arc;

use crate::geometry::Vec2;
use crate::mesh::MacroMesh;

pub type VectorField = Arc<dyn Fn(Vec2) -> Vec2 + Send + Sync>;
pub type ScalarField = Arc<dyn Fn(Vec2) -> f64 + Send + Sync>;

pub fn vector_field(f: impl Fn(Vec2) -> Vec2 + Send + Sync + 'static) -> VectorField {
    Arc::new(f)
}

pub fn scalar_field(f: impl Fn(Vec2) -> f64 + Send + Sync + 'static) -> ScalarField {
    Arc::new(f)
}

pub fn zero_vector_field() -> VectorField {
    vector_field(|_| Vec2::ZERO)
}

pub fn zero_scalar_field() -> ScalarField {
    scalar_field(|_| 0.0)
}

#[derive(Clone)]
pub enum BoundaryCondition {
    /// Prescribed velocity or displacement `u = g`.
    Dirichlet(VectorField),
    /// Prescribed normal component `u.n = g.n`; the tangential part is left
    /// to the natural condition.
    NormalFlux(VectorField),
    /// Prescribed traction; zero traction is the do-nothing outflow condition.
    Traction(VectorField),
}

impl BoundaryCondition {
    pub fn no_slip() -> Self {
        BoundaryCondition::Dirichlet(zero_vector_field())
    }

    pub fn no_penetration() -> Self {
        BoundaryCondition::NormalFlux(zero_vector_field())
    }

    pub fn free() -> Self {
        BoundaryCondition::Traction(zero_vector_field())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BoundaryCondition::Dirichlet(_) => "dirichlet",
            BoundaryCondition::NormalFlux(_) => "normal-flux",
            BoundaryCondition::Traction(_) => "traction",
        }
    }
}

impl fmt::Debug for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.kind())
    }
}

/// Conditions per boundary tag, with an optional fallback.
#[derive(Clone, Debug, Default)]
pub struct BoundaryConditions {
    by_tag: Vec<(String, BoundaryCondition)>,
    fallback: Option<BoundaryCondition>,
}

impl BoundaryConditions {
    pub fn new() -> Self {
        Self::default()
    }

    /// The same condition on every boundary edge.
    pub fn everywhere(bc: BoundaryCondition) -> Self {
        Self::new().otherwise(bc)
    }

    pub fn on(mut self, tag: &str, bc: BoundaryCondition) -> Self {
        self.by_tag.retain(|(t, _)| t != tag);
        self.by_tag.push((tag.to_string(), bc));
        self
    }

    pub fn otherwise(mut self, bc: BoundaryCondition) -> Self {
        self.fallback = Some(bc);
        self
    }

    pub fn get(&self, tag: &str) -> Option<&BoundaryCondition> {
        self.by_tag
            .iter()
            .find(|(t, _)| t == tag)
            .map(|(_, bc)| bc)
            .or(self.fallback.as_ref())
    }

    /// Condition on boundary edge `e`; `None` for interior edges.
    pub fn for_edge(&self, mesh: &MacroMesh, e: usize) -> Option<&BoundaryCondition> {
        mesh.edge_tag(e).and_then(|tag| self.get(tag))
    }

    /// First boundary tag of `mesh` without a condition, if any.
    pub fn missing_tag<'m>(&self, mesh: &'m MacroMesh) -> Option<&'m str> {
        mesh.boundary_edges()
            .filter_map(|e| mesh.edge_tag(e))
            .find(|tag| self.get(tag).is_none())
    }

    /// True when some boundary edge carries a traction condition, which pins
    /// the pressure level.
    pub fn has_traction_edge(&self, mesh: &MacroMesh) -> bool {
        mesh.boundary_edges()
            .any(|e| matches!(self.for_edge(mesh, e), Some(BoundaryCondition::Traction(_))))
    }
}
