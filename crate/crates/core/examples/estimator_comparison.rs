//! Every tail-index estimator on one Student-t sample's upper tail.
//!
//! cargo run --release --example estimator_comparison

use tailrisk::distributions::DistributionSpec;
use tailrisk::estimators::{estimate, make_tail_sample, Method, ScalingEstimatorConfig};

fn main() -> tailrisk::error::Result<()> {
    let nu = 3.0;
    let raw = DistributionSpec::student_t(nu)?.sample(10_000, 99);
    let tail = make_tail_sample(&raw, 0.1)?;
    println!("tail of {} values above {:.3}; true index {nu}", tail.len(), tail.threshold());
    let cfg = ScalingEstimatorConfig::default();
    for m in Method::ALL {
        match estimate(m, &tail, &cfg) {
            Ok(e) => println!("{:<24} {:.3}", m.as_str(), e.xi_hat),
            Err(e) => println!("{:<24} failed: {e}", m.as_str()),
        }
    }
    Ok(())
}
