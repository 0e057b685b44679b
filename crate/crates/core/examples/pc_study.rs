//! A simulated pairwise-comparison study. Each observer ranks the stimuli by
//! a noisy personal score (so their votes are transitive), three vote by
//! coin flip, and the analysis screens those out and recovers the ranking.
//!
//!     cargo run --example pc_study

use glap::pceval::{evaluate, Outcome, PreferenceRecord};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let stimuli = [("GLAP", 3.0), ("GAP", 2.4), ("GPP", 1.2), ("PP", 1.0), ("OP", 0.5), ("MOP", 0.0)];
    let mut rng = StdRng::seed_from_u64(7);
    let mut records = Vec::new();
    for image in ["G1", "G2"] {
        for o in 0..26 {
            let random_voter = o >= 23;
            let personal: Vec<f64> = stimuli.iter().map(|s| s.1 + rng.gen_range(-0.8..0.8)).collect();
            for i in 0..stimuli.len() {
                for j in i + 1..stimuli.len() {
                    let (a, b) = (stimuli[i].0, stimuli[j].0);
                    let a_wins = if random_voter { rng.gen_bool(0.5) } else { personal[i] > personal[j] };
                    let outcome = if a_wins { Outcome::A } else { Outcome::B };
                    records.push(PreferenceRecord::new(&format!("obs{o:02}"), image, a, b, outcome));
                }
            }
        }
    }

    let report = evaluate(&records)?;
    println!("excluded: {:?}", report.excluded_observers().collect::<Vec<_>>());
    for img in &report.images {
        let mut order: Vec<(f64, &str)> = img
            .scores
            .stimuli
            .iter()
            .zip(&img.scores.log_scores)
            .map(|(s, &l)| (l, s.as_str()))
            .collect();
        order.sort_by(|a, b| b.0.total_cmp(&a.0));
        let ranking: Vec<String> = order.iter().map(|(l, s)| format!("{s} {l:+.2}")).collect();
        println!("{}: {}", img.image, ranking.join(", "));
    }
    let p = &report.mean_probabilities;
    println!("mean P(GLAP over GAP) = {:.2}", p.by_name("GLAP", "GAP").unwrap_or(f64::NAN));
    Ok(())
}
