//! Core library for the tribunal-judgment extraction pipeline: corpus sampling,
//! prompt registry, model gateway with replay cache, response parsing and linting,
//! quality-check annotations, accuracy statistics and dataset export.

pub mod aspect;
pub mod config;
pub mod corpus;
pub mod dataset;
pub mod extraction;
pub mod llm_gateway;
pub mod pipeline;
pub mod prompting;
pub mod quality_check;
pub mod stats;

pub use aspect::Aspect;
