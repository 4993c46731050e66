//! Shipped pipelines, one per augmentation regiment.

use crate::dsl::{self, DslError, Expr};

pub struct Preset {
    pub name: &'static str,
    pub source: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "global",
        source: include_str!("../../../presets/global.aug"),
    },
    Preset {
        name: "plasma_cascade",
        source: include_str!("../../../presets/plasma_cascade.aug"),
    },
    Preset {
        name: "plasma_branching",
        source: include_str!("../../../presets/plasma_branching.aug"),
    },
];

pub fn get(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

impl Preset {
    pub fn parse(&self) -> Result<Expr, DslError> {
        dsl::parse(self.source)
    }
}
