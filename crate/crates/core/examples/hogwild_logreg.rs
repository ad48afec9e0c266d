//! Lock-free parallel SGD on sparse logistic regression, compared with the
//! sequential baseline that draws the same example stream.
//!
//! cargo run --release --example hogwild_logreg -- [workers] [eta]

use std::time::Instant;

use gradbench::parallel::{hogwild_train, sequential_baseline, HogwildConfig};
use gradbench::problems::SparseLogReg;

fn main() -> gradbench::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let workers: usize = args.next().and_then(|a| a.parse().ok()).unwrap_or(4);
    let eta: f64 = args.next().and_then(|a| a.parse().ok()).unwrap_or(0.05);
    let epochs = 5;

    println!("seed  sequential  hogwild(W={workers})  rel.diff");
    for seed in 0..5 {
        let problem = SparseLogReg::generate(10_000, 1000, 0.01, seed)?;
        let t0 = Instant::now();
        let seq = sequential_baseline(&problem, eta, epochs, seed)?;
        let t_seq = t0.elapsed();
        let t0 = Instant::now();
        let cfg = HogwildConfig { workers, eta, epochs, seed };
        let par = hogwild_train(&problem, &cfg)?;
        let t_par = t0.elapsed();
        let rel = (par.final_loss - seq.final_loss).abs() / seq.final_loss;
        println!(
            "{seed:>4}  {:.6}    {:.6}         {rel:.4}   ({t_seq:.2?} vs {t_par:.2?})",
            seq.final_loss, par.final_loss
        );
    }
    Ok(())
}
