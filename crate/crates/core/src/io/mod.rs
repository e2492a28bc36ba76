//! File formats, run configuration and the command implementations behind
//! the `pdac` binary.
//!
//! | file | format |
//! |------|--------|
//! | `*.ksp` | `KSP1` magic, `u32` LE coils/height/width, then `f64` LE (re, im) pairs, row-major |
//! | `mask.txt` | one line of `0`/`1`, newline-terminated |
//! | `*.pgm` | binary P5, 16-bit big-endian magnitude |
//! | `config.txt` | `key = value` lines, `#` comments |
//! | `*.csv` | header row, fixed column order |

mod commands;
mod config;
mod format;

pub use commands::{
    cmd_ablate, cmd_evaluate, cmd_reconstruct, cmd_simulate, AblationRow, MetricsRow,
    SimulatedCase, ABLATION_HEADER, METRICS_HEADER, TRACE_HEADER,
};
pub use config::{RunConfig, SolverKind, CONFIG_KEYS};
pub use format::{
    decode_ksp, decode_mask, encode_ksp, encode_mask, encode_pgm, read_ksp, read_mask, read_text,
    write_bytes, write_ksp, write_mask,
};
