#![allow(dead_code)]

use std::collections::BTreeSet;
use std::fmt::Write;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const DILATED: [f64; 4] = [10.0, 7.0, 5.0, 1.0];

/// Prints one result line and returns the verdict.
pub fn report(criterion: u32, pass: bool, detail: impl AsRef<str>) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("acceptance {criterion}: {verdict} {}", detail.as_ref());
    pass
}

/// Synthetic peer-nomination survey: `n` students in forms of about 29, each
/// with a stable, mutual circle of close friends mostly inside the form. In each of
/// four rounds every student names up to six classmates, preferring close
/// friends, about four on average; a round's contacts are the undirected
/// union of nominations.
pub fn school_rounds_csv(n: usize, seed: u64) -> String {
    school_survey(n, seed).0
}

/// The survey CSV and the mean number of nominations per student per round.
pub fn school_survey(n: usize, seed: u64) -> (String, f64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let forms = n.div_ceil(29);
    let form_of = |i: usize| i % forms;
    let mut circles: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for i in 0..n {
        let size = rng.random_range(3..=6);
        while circles[i].len() < size {
            let j = if rng.random::<f64>() < 0.85 {
                rng.random_range(0..n.div_ceil(forms)) * forms + form_of(i)
            } else {
                rng.random_range(0..n)
            };
            if j != i && j < n {
                circles[i].insert(j);
                circles[j].insert(i);
            }
        }
    }

    let mut out = String::from("round,node_a,node_b\n");
    let mut nominations = 0;
    for round in 1..=4 {
        let mut contacts = BTreeSet::new();
        for (i, circle) in circles.iter().enumerate() {
            let mut named: Vec<usize> = circle.iter().copied().filter(|_| rng.random::<f64>() < 0.75).collect();
            named.shuffle(&mut rng);
            named.truncate(6);
            while named.len() < 6 && rng.random::<f64>() < 0.2 {
                let j = rng.random_range(0..n);
                if j != i && !named.contains(&j) {
                    named.push(j);
                }
            }
            nominations += named.len();
            for j in named {
                contacts.insert((i.min(j), i.max(j)));
            }
        }
        for (a, b) in contacts {
            writeln!(out, "{round},s{a},s{b}").unwrap();
        }
    }
    (out, nominations as f64 / (4 * n) as f64)
}
