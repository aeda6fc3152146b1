//! The `.dc` circuit format: parsing, lowering onto the engine, running and
//! JSON reporting.

pub mod ast;
pub mod json;
pub mod lower;
pub mod parse;
pub mod run;

pub use ast::{CircuitAst, GateKind, GateStatement, MeasurementSpec, TargetArity};
pub use json::{emit_combination_json, emit_json, format_g17, parse_matrix_json, parse_state_json};
pub use lower::{lower, path_unitary};
pub use parse::{parse, ErrorCode, ParseError};
pub use run::{run, run_search, run_search_demo, search_circuit, Backend, RunReport};
