//! The `check` command: anchor diagnostics, then sampled verification that
//! the constructed field really annihilates every integral's gradient.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::input::Job;
use crate::Failure;

/// Random points drawn around the start point.
const SAMPLES: usize = 12;
/// Per-coordinate Gaussian spread: this fraction of 1 + |coordinate|.
const SAMPLE_SPREAD: f64 = 0.25;
/// Largest acceptable value of |<grad f, v>| / (1 + |grad f| |v|).
const RESIDUAL_TOL: f64 = 1e-9;

pub fn run(job: &Job) -> Result<(), Failure> {
    let set = &job.set;
    let n = job.space.n();
    let anchor = &job.initial;
    println!("system: {}", job.label);
    println!("degrees of freedom: {n}");

    let math = |e: firstint_core::brackets::BracketError| {
        Failure::math(format!("cannot evaluate at the start point: {e}"))
    };
    let rank = set.independence_rank(anchor).map_err(math)?;
    println!("independence rank at start: {rank} of {n}");
    if rank < n {
        return Err(Failure::input(format!(
            "integral set is rank deficient at the start point \
             ({rank} of {n} gradients independent)"
        )));
    }

    let matrix = set.involution_matrix(anchor).map_err(math)?;
    println!("pairwise brackets at start (row i holds {{f_i, f_j}}):");
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:+.3e}", matrix.get(i, j))).collect();
        println!("  [{}]", row.join(", "));
    }

    let model = job.model()?;
    let class = model
        .classify(anchor)
        .map_err(|e| Failure::math(format!("cannot classify the start point: {e}")))?;
    println!("s_zero at start: {:.6e} (scale {:.3e})", class.s_zero, class.s_zero_scale);
    println!("s_n at start: {:.6e}", class.s_n);
    println!("classification at start: {}", class.case.label());

    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut usable = 0usize;
    let mut worst = 0.0_f64;
    for _ in 0..SAMPLES {
        let p: Vec<f64> = anchor
            .iter()
            .map(|a| {
                let z: f64 = StandardNormal.sample(&mut rng);
                a + SAMPLE_SPREAD * (1.0 + a.abs()) * z
            })
            .collect();
        let sample = match model.sample(&p) {
            Ok(s) => s,
            Err(_) => continue,
        };
        let jac = match set.jacobian(&p) {
            Ok(j) => j,
            Err(_) => continue,
        };
        let vnorm = l2(&sample.velocity);
        for row in &jac {
            let rate: f64 = row.iter().zip(&sample.velocity).map(|(a, b)| a * b).sum();
            let residual = rate.abs() / (1.0 + l2(row) * vnorm);
            worst = worst.max(residual);
        }
        usable += 1;
    }
    if usable == 0 {
        return Err(Failure::math(
            "no usable sample points near the start; cannot verify conservation",
        ));
    }
    if worst > RESIDUAL_TOL {
        return Err(Failure::verify(format!(
            "scaled conservation residual {worst:.3e} exceeds {RESIDUAL_TOL:.0e} \
             on sampled points"
        )));
    }
    println!(
        "conservation verified at {usable} of {SAMPLES} sampled points; \
         worst scaled residual {worst:.3e}"
    );
    Ok(())
}

fn l2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
