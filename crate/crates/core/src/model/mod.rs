//! The textual model format: parser with positioned diagnostics and a
//! deterministic serializer. Files use extension `.pta`, UTF-8 text, and
//! `#` line comments.

mod lex;
mod parse;
mod render;

use std::collections::BTreeSet;

pub use lex::Diagnostic;
pub use parse::parse;
pub use render::{serialize, serialize_source};

use crate::pta::{ModelError, Pta};

/// A parsed model file: one or more component automata plus the action
/// list they synchronize on. Most files hold a single automaton.
#[derive(Debug, Clone)]
pub struct ModelSource {
    pub name: String,
    pub sync: BTreeSet<String>,
    pub components: Vec<Pta>,
}

impl ModelSource {
    /// The analyzable model: the single component, or the synchronized
    /// product of all components.
    pub fn compose(&self) -> Result<Pta, ModelError> {
        if self.components.len() == 1 {
            let mut single = self.components[0].clone();
            single.name = self.name.clone();
            return Ok(single);
        }
        let mut product = Pta::product(&self.components, &self.sync, &BTreeSet::new())?;
        product.name = self.name.clone();
        Ok(product)
    }
}
