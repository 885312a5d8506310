//! Cyber-physical security scoring for power grids and the cyber-constrained
//! AC optimal power flow built on top of it.

pub mod cyber;
pub mod data;
pub mod derivatives;
pub mod electrical;
pub mod error;
pub mod graph;
pub mod grid;
pub mod mcdm;
pub mod opf;
pub mod pips;
pub mod powerflow;
pub mod report;
pub mod score;

pub use cyber::{CvssVector, CyberScenario, RiskModel};
pub use electrical::CrpiOptions;
pub use error::{Error, Result};
pub use graph::{CyberGraph, GraphFactors};
pub use grid::{parse_case, Network};
pub use mcdm::FuzzyMeasure;
pub use opf::{solve_c_acopf, solve_t_acopf, CyberGate, CyberOpfResult, GenBounds, OpfOptions, OpfSolution};
pub use powerflow::{solve_acpf, Dispatch, SystemState};
pub use score::{cpes_qsm, Criterion, ScoreConfig, ScoreTable};
