//! Normalization agrees with an independent substitution interpreter on
//! randomly generated closed programs.

mod common;

use common::{oracle_run, Ty};

#[test]
fn nat_programs_agree_with_interpreter() {
    let run = oracle_run(0x0AC1E, 300, &Ty::Nat, 10);
    assert!(run.disagreed.is_empty(), "{:#?}", run.disagreed);
    assert_eq!(run.agreed, 300);
}

#[test]
fn bool_programs_agree_with_interpreter() {
    let run = oracle_run(0xB001, 300, &Ty::Bool, 10);
    assert!(run.disagreed.is_empty(), "{:#?}", run.disagreed);
}

#[test]
fn skipped_programs_are_a_small_fraction() {
    let run = oracle_run(7, 200, &Ty::Nat, 10);
    assert!(run.skipped * 4 < run.agreed, "skipped {} of {}", run.skipped, run.agreed);
}
