//! Runs every acceptance criterion and prints one line per criterion.

use qkur::acceptance::{run, CRITERIA};

#[test]
fn acceptance_suite() {
    let outcomes: Vec<_> = CRITERIA.iter().map(|&(name, check)| run(name, check)).collect();
    for o in &outcomes {
        println!("{o}");
    }
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    println!("{} of {} criteria passed", outcomes.len() - failed.len(), outcomes.len());
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
