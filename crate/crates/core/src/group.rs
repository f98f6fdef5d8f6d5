//! The deck groups acting on each model space.

use serde::{Deserialize, Serialize};

use crate::fuchsian::FuchsianGroup;
use crate::space::{Backend, Space};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Group {
    /// Free group of the given rank on its Cayley tree.
    Free { rank: usize },
    Fuchsian(FuchsianGroup),
    /// ℤ² acting on the Euclidean plane.
    Lattice,
}

impl Group {
    pub fn modular() -> Group {
        Group::Fuchsian(FuchsianGroup::modular())
    }

    pub fn is_modular(&self) -> bool {
        matches!(self, Group::Fuchsian(g) if g.name == "modular")
    }

    pub fn space(&self) -> Space {
        match self {
            Group::Free { rank } => Space::tree(*rank),
            Group::Fuchsian(_) => Space::plane(),
            Group::Lattice => Space::Flat,
        }
    }

    pub fn backend(&self) -> Backend {
        self.space().backend()
    }

    pub fn label(&self) -> String {
        match self {
            Group::Free { rank } => format!("tree(rank={rank})"),
            Group::Fuchsian(g) => format!("fuchsian({})", g.name),
            Group::Lattice => "flat".into(),
        }
    }
}
