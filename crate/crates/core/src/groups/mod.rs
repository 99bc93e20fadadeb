//! Small finite groups SL_n(q) held as explicit element tables: conjugacy
//! classes, class multiplication coefficients, covering numbers, numeric
//! character tables and positive definite functions.

mod chartab;
mod classes;
mod pdf;
mod table;

pub use chartab::{
    character_table, gluck_check, CharTable, GluckReport, DEGREE_RESIDUAL, EIGEN_GAP, MAX_ATTEMPTS,
    MAX_CLASSES, ORTHOGONALITY_TOL,
};
pub use classes::{conjugacy_classes, covering_number, structure_constants, ConjClasses, StructureConstants};
pub use pdf::{
    best_premise, conj_average, pdf_decompose, pdf_from_function, pdf_lemma_check, random_pdf,
    star_inequality_violation, Decomposition, Pdf, PdfLemmaReport, STEP_TOL,
};
pub use table::{
    enumerate_group, group_center, scalar_subgroup, sl_order, GroupTable, DEFAULT_GROUP_CAP, MUL_TABLE_CAP,
};

use crate::error::Result;

/// A group together with its classes, class coefficients and character
/// table.
pub struct GroupData {
    pub group: GroupTable,
    pub classes: ConjClasses,
    pub constants: StructureConstants,
}

impl GroupData {
    pub fn new(n: usize, q: u64, cap: u64) -> Result<GroupData> {
        let group = enumerate_group(n, q, cap)?;
        let classes = conjugacy_classes(&group);
        let constants = structure_constants(&group, &classes);
        Ok(GroupData { group, classes, constants })
    }

    pub fn character_table(&self, seed: u64) -> Result<CharTable> {
        character_table(&self.classes, &self.constants, seed)
    }
}
