//! Desk-scale experiments: the ADE catalog, syzygy growth, Harada–Sai chains, the
//! strongly unbounded curve family and the double-cover transfer.

mod bt;
mod catalog;
mod harada_sai;
mod kawasaki;
mod transfer;

use serde::{Deserialize, Serialize};

use crate::context::Context;
use crate::report::{Status, SCHEMA_VERSION};

pub use bt::{bt_family_report, module_presentation, pullback_family, FractionalModule, FractionalModuleFile};
pub use catalog::{ade_catalog, catalog_entry, CatalogEntry, CatalogEntryFile, Family};
pub use harada_sai::{harada_sai_chain, standard_chain, ChainFile, ChainModule, MfMorphism, MorphismFile};
pub use kawasaki::{kawasaki_bound, kawasaki_growth};
pub use transfer::knoerrer_transfer_report;

/// One row of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ItemResult {
    pub id: String,
    pub status: Status,
    pub data: serde_json::Value,
}

/// Machine-readable outcome of an experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema_version: u32,
    pub experiment: String,
    pub inputs: serde_json::Value,
    pub items: Vec<ItemResult>,
    pub status: Status,
    pub summary: serde_json::Value,
    pub notes: Vec<String>,
    pub trunc: usize,
    pub seed: u64,
}

impl ExperimentReport {
    pub(crate) fn new(experiment: &str, inputs: serde_json::Value, ctx: &Context) -> Self {
        ExperimentReport {
            schema_version: SCHEMA_VERSION,
            experiment: experiment.to_string(),
            inputs,
            items: Vec::new(),
            status: Status::Pass,
            summary: serde_json::Value::Null,
            notes: Vec::new(),
            trunc: ctx.trunc(),
            seed: ctx.seed,
        }
    }

    pub(crate) fn push(&mut self, id: impl Into<String>, status: Status, data: serde_json::Value) {
        self.items.push(ItemResult {
            id: id.into(),
            status,
            data,
        });
    }

    /// Overall status from the items and any extra verdicts.
    pub(crate) fn finish(mut self, extra: impl IntoIterator<Item = Status>) -> Self {
        self.status = Status::all(self.items.iter().map(|i| i.status).chain(extra));
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}
