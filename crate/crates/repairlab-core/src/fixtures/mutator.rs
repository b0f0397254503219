//! A naive single-mutation repair strategy over the toy language.
//!
//! It enumerates every single-site mutation of a relational, logical,
//! or unary-negation operator, reruns the full test suite per
//! candidate, and keeps candidates that make every test pass. It
//! exists to drive the harness end-to-end with a tool that genuinely
//! repairs something.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::toy::{self, OpKind, ParseError, TestCase, TokenKind};

/// One candidate patch: the whole mutated source plus a human-readable
/// description of the edit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MutationCandidate {
    pub description: String,
    pub source: String,
}

/// The result of a repair run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RepairReport {
    /// Candidates that made the whole suite pass, in discovery order.
    pub patches: Vec<MutationCandidate>,
    /// How many candidates were executed before stopping.
    pub candidates_tested: usize,
    /// Total size of the mutation space for this source.
    pub space_size: usize,
}

const RELATIONAL: [OpKind; 6] = [
    OpKind::Lt,
    OpKind::Le,
    OpKind::Gt,
    OpKind::Ge,
    OpKind::EqEq,
    OpKind::Ne,
];

fn splice(source: &str, start: usize, end: usize, replacement: &str) -> String {
    format!("{}{}{}", &source[..start], replacement, &source[end..])
}

/// Enumerates all single-site operator mutations in source order:
/// tokens by byte position, replacements in a fixed canonical order.
/// Relational operators map to the other five relational operators,
/// `&&`/`||` swap, and `!` is deleted.
pub fn enumerate_mutations(source: &str) -> Result<Vec<MutationCandidate>, ParseError> {
    toy::parse_program(source)?;
    let tokens = toy::lex(source)?;
    let mut candidates = Vec::new();
    for token in &tokens {
        let TokenKind::Op(op) = token.kind else {
            continue;
        };
        let at = format!("line {}, column {}", token.line, token.column);
        if op.is_relational() {
            for replacement in RELATIONAL.iter().filter(|r| **r != op) {
                candidates.push(MutationCandidate {
                    description: format!(
                        "replace `{}` with `{}` at {at}",
                        op.symbol(),
                        replacement.symbol()
                    ),
                    source: splice(source, token.start, token.end, replacement.symbol()),
                });
            }
        } else if op.is_logical() {
            let replacement = if op == OpKind::And {
                OpKind::Or
            } else {
                OpKind::And
            };
            candidates.push(MutationCandidate {
                description: format!(
                    "replace `{}` with `{}` at {at}",
                    op.symbol(),
                    replacement.symbol()
                ),
                source: splice(source, token.start, token.end, replacement.symbol()),
            });
        } else if op == OpKind::Not {
            candidates.push(MutationCandidate {
                description: format!("delete `!` at {at}"),
                source: splice(source, token.start, token.end, ""),
            });
        }
    }
    Ok(candidates)
}

/// Searches the mutation space for patches that make every test pass.
///
/// `order_seed` permutes the candidate order reproducibly; `None`
/// keeps plain source order. The search stops once `patch_limit`
/// adequate patches are found.
pub fn repair(
    source: &str,
    tests: &[TestCase],
    order_seed: Option<u64>,
    patch_limit: usize,
) -> Result<RepairReport, ParseError> {
    let mut candidates = enumerate_mutations(source)?;
    let space_size = candidates.len();
    if let Some(seed) = order_seed {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        candidates.shuffle(&mut rng);
    }

    let mut patches = Vec::new();
    let mut candidates_tested = 0;
    for candidate in candidates {
        if patches.len() >= patch_limit {
            break;
        }
        candidates_tested += 1;
        // Single-operator splices stay parseable; skip defensively if not.
        let Ok(program) = toy::parse_program(&candidate.source) else {
            continue;
        };
        if toy::run_tests(&program, tests).iter().all(|r| r.passed) {
            patches.push(candidate);
        }
    }
    Ok(RepairReport {
        patches,
        candidates_tested,
        space_size,
    })
}

/// Convenience wrapper parsing the test file first.
pub fn repair_suite(
    source: &str,
    tests_text: &str,
    order_seed: Option<u64>,
    patch_limit: usize,
) -> Result<RepairReport, ParseError> {
    let tests = toy::parse_tests(tests_text)?;
    repair(source, &tests, order_seed, patch_limit)
}
