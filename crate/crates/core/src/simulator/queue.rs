use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};

/// Discrete-event simulation of `servers` parallel unit-rate M/M/1 queues,
/// each holding at most `capacity − 1` jobs, fed by Poisson(`arrival_rate`)
/// requests routed uniformly at random. Returns completed services per
/// server per unit time after discarding the first 5% of events.
pub fn simulate_queue_allocation(
    arrival_rate: f64,
    servers: usize,
    capacity: u32,
    horizon: u64,
    seed: u64,
) -> f64 {
    assert!(arrival_rate > 0.0 && servers >= 1 && capacity >= 2);
    let limit = capacity - 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut jobs = vec![0u32; servers];
    // Busy servers in arbitrary order, with each server's slot in `busy`.
    let mut busy: Vec<usize> = Vec::with_capacity(servers);
    let mut slot = vec![usize::MAX; servers];
    let burn_in = horizon / 20;
    let mut clock = 0.0;
    let mut served = 0u64;
    for event in 0..horizon {
        let total = arrival_rate + busy.len() as f64;
        let wait: f64 = Exp1.sample(&mut rng);
        if event >= burn_in {
            clock += wait / total;
        }
        if rng.random::<f64>() * total < arrival_rate {
            let j = rng.random_range(0..servers);
            if jobs[j] < limit {
                if jobs[j] == 0 {
                    slot[j] = busy.len();
                    busy.push(j);
                }
                jobs[j] += 1;
            }
        } else {
            let k = rng.random_range(0..busy.len());
            let j = busy[k];
            jobs[j] -= 1;
            if jobs[j] == 0 {
                let last = *busy.last().expect("non-empty");
                busy.swap_remove(k);
                if last != j {
                    slot[last] = k;
                }
                slot[j] = usize::MAX;
            }
            if event >= burn_in {
                served += 1;
            }
        }
    }
    served as f64 / (clock * servers as f64)
}
