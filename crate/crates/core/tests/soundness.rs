mod common;

use common::{brute_force, check_against_oracle as check, random_mip, GenConfig, Outcome, SMALL_MIP, SMALL_MIXED};
use presolve::numerics::{NumericContext, Rational};
use presolve::scheduler::PresolveOptions;

fn sweep(cfg: GenConfig, seeds: std::ops::Range<u64>, opts: &PresolveOptions) {
    let mut failures = Vec::new();
    for seed in seeds {
        let p = random_mip(seed, cfg);
        if let Err(e) = check(&p, opts, 1e-6) {
            failures.push(format!("float seed {seed}: {e}"));
        }
        if let Err(e) = check(&p.convert::<Rational>(), opts, 0.0) {
            failures.push(format!("rational seed {seed}: {e}"));
        }
    }
    assert!(failures.is_empty(), "{} failures:\n{}", failures.len(), failures.join("\n"));
}

#[test]
fn pure_integer_instances_keep_their_optimum() {
    sweep(SMALL_MIP, 0..150, &PresolveOptions { threads: 1, ..PresolveOptions::default() });
}

#[test]
fn mixed_instances_keep_their_optimum() {
    sweep(SMALL_MIXED, 1000..1150, &PresolveOptions { threads: 1, ..PresolveOptions::default() });
}

#[test]
fn apply_immediately_keeps_the_optimum() {
    let opts = PresolveOptions { threads: 1, apply_immediately: true, ..PresolveOptions::default() };
    sweep(SMALL_MIXED, 2000..2100, &opts);
}

#[test]
fn each_presolver_alone_is_sound() {
    for name in presolve::presolvers::presolver_names() {
        let opts = PresolveOptions { threads: 1, ..PresolveOptions::default() }.only(&[name]);
        sweep(SMALL_MIXED, 3000..3040, &opts);
    }
}

#[test]
fn oracle_solves_the_knapsack() {
    let mut b = presolve::model::ProblemBuilder::new();
    let x1 = b.add_col("x1", -2.0, Some(0.0), Some(1.0), true);
    let x2 = b.add_col("x2", -1.0, Some(0.0), Some(1.0), true);
    b.add_row("c", &[(x1, 7.0), (x2, 8.0)], None, Some(13.0));
    let out = brute_force(&b.build(), &NumericContext::default());
    assert_eq!(out, Outcome::Optimal { value: -2.0, x: vec![1.0, 0.0] });
}


