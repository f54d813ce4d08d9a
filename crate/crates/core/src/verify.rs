//! Oracle and identity suites, shared by the `verify` subcommand and the
//! acceptance tests. Each check returns a [`Check`] with the worst observed
//! deviation.

use rand::Rng;
use serde::Serialize;

use crate::channel::{
    appendix_b_witness, capacity_example2, example2_stuck_aux, gp_capacity_grid, make_example2,
    DEFAULT_GRID_RESOLUTION,
};
use crate::error::Result;
use crate::prob::{bhattacharyya, conditional_entropy, verify_degraded, JointBase};
use crate::sc::{sc_bruteforce, Observation, ScContext};
use crate::streams::{self, Purpose, StreamRng};
use crate::transform::transform_in_place;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl std::fmt::Display for Check {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn rng_for(seed: u64, index: u64) -> StreamRng {
    streams::stream(seed, Purpose::Oracle, index)
}

/// Joint with `outputs` observation symbols and weights bounded away from 0.
pub fn random_joint<R: Rng + ?Sized>(rng: &mut R, outputs: usize, floor: f64) -> JointBase {
    let mut w: Vec<f64> = (0..2 * outputs).map(|_| floor + rng.random::<f64>()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    let w1 = w.split_off(outputs);
    JointBase::new(w, w1).expect("normalised")
}

/// `|sc conditional - brute force| <= 1e-9` on `cases` random
/// (base, observation, prefix) triples per `n` in {2, 4, 8, 16}.
pub fn sc_oracle(seed: u64, cases: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut count = 0;
    for (ni, n) in [2usize, 4, 8, 16].into_iter().enumerate() {
        for c in 0..cases {
            let mut rng = rng_for(seed, (ni * cases + c) as u64);
            let outputs = rng.random_range(1..=3);
            let bases = (0..n).map(|_| random_joint(&mut rng, outputs, 0.01)).collect();
            let ctx = ScContext::new(bases)?;
            let obs = Observation((0..n).map(|_| rng.random_range(0..outputs)).collect());
            let len = rng.random_range(0..n);
            let prefix: Vec<u8> = (0..len).map(|_| rng.random_range(0..2u8)).collect();
            let fast = ctx.conditional(&obs, &prefix)?;
            let slow = sc_bruteforce(&ctx, &obs, &prefix)?;
            worst = worst.max((fast - slow).abs());
            count += 1;
        }
    }
    Ok(Check {
        name: "sc oracle".into(),
        passed: worst <= 1e-9,
        detail: format!("{count} cases, max |fast - brute| = {worst:.3e} (tol 1e-9)"),
    })
}

/// `x_j = XOR of u_i over i with j a bit-subset of i`: the Kronecker power
/// of `[[1,0],[1,1]]` written entrywise.
pub fn dense_transform(u: &[u8]) -> Vec<u8> {
    let n = u.len();
    (0..n)
        .map(|j| (0..n).filter(|&i| j & !i == 0).fold(0u8, |acc, i| acc ^ u[i]))
        .collect()
}

/// Involution and linearity on `vectors` random inputs per
/// `n` in {2, 2^6, 2^10, 2^14}, and agreement with [`dense_transform`]
/// for `n <= 64`.
pub fn transform_identities(seed: u64, vectors: usize) -> Check {
    let mut failures = Vec::new();
    for (ni, n) in [2usize, 1 << 6, 1 << 10, 1 << 14].into_iter().enumerate() {
        let mut bad = 0;
        for t in 0..vectors {
            let mut rng = rng_for(seed ^ 0x7472, (ni * vectors + t) as u64);
            let a: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
            let b: Vec<u8> = (0..n).map(|_| rng.random_range(0..2u8)).collect();
            let mut ta = a.clone();
            transform_in_place(&mut ta);
            let mut tb = b.clone();
            transform_in_place(&mut tb);
            let mut sum: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
            transform_in_place(&mut sum);
            let linear = sum.iter().zip(ta.iter().zip(&tb)).all(|(s, (x, y))| *s == x ^ y);
            let dense_ok = n > 64 || dense_transform(&a) == ta;
            transform_in_place(&mut ta);
            if ta != a || !linear || !dense_ok {
                bad += 1;
            }
        }
        if bad > 0 {
            failures.push(format!("n={n}: {bad} failures"));
        }
    }
    Check {
        name: "transform identities".into(),
        passed: failures.is_empty(),
        detail: if failures.is_empty() {
            format!("{vectors} vectors at each n in {{2, 2^6, 2^10, 2^14}}, dense check n <= 64")
        } else {
            failures.join("; ")
        },
    }
}

/// Closed-form Example 2 capacity against the grid oracle over the
/// 3x3x3 parameter box (points with `B / (1 - beta) <= 1/2` only), and the
/// grid maximiser against the closed-form aux.
pub fn capacity_crosscheck(resolution: f64) -> Result<Check> {
    let mut worst_c = 0.0f64;
    let mut worst_aux = 0.0f64;
    let mut points = 0;
    for alpha in [0.05, 0.1, 0.2] {
        for beta in [0.2, 0.5, 0.8] {
            for budget in [0.1, 0.25, 0.4] {
                if budget / (1.0 - beta) > 0.5 + 1e-12 {
                    continue;
                }
                points += 1;
                let closed = capacity_example2(alpha, beta, budget)?;
                let spec = make_example2(alpha, beta, budget)?;
                let grid = gp_capacity_grid(&spec, resolution).expect("B > 0 is feasible");
                worst_c = worst_c.max((closed - grid.capacity).abs());
                let eps = (budget / (1.0 - beta)).min(0.5);
                let want = [eps, example2_stuck_aux(alpha, eps)];
                for (s, w) in want.iter().enumerate() {
                    worst_aux = worst_aux.max((grid.aux.p_v_given_s[s].p1() - w).abs());
                }
                if grid.aux.x_map != vec![[0, 1], [0, 0]] {
                    worst_aux = f64::INFINITY;
                }
            }
        }
    }
    Ok(Check {
        name: "capacity cross-check".into(),
        passed: worst_c <= 1e-3 && worst_aux <= 2e-3,
        detail: format!(
            "{points} points, max capacity gap {worst_c:.3e} (tol 1e-3), max aux gap {worst_aux:.3e} (tol 2e-3)"
        ),
    })
}

/// The explicit degrading channel for Example 2 on `cases` random
/// `(alpha, beta, epsilon)`: composition error `<= 1e-12`, valid rows.
pub fn degradation_identity(seed: u64, cases: usize) -> Result<Check> {
    let mut worst = 0.0f64;
    let mut invalid_rows = 0;
    for t in 0..cases {
        let mut rng = rng_for(seed ^ 0x6465, t as u64);
        let alpha = rng.random_range(0.0..0.5);
        let beta = rng.random_range(0.0..0.95);
        let eps = rng.random_range(0.01..0.5);
        let budget = eps * (1.0 - beta);
        let spec = make_example2(alpha, beta, budget)?;
        let w = appendix_b_witness(alpha, beta, budget)?;
        let matrix = w.matrix();
        for row in &matrix {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-12 {
                invalid_rows += 1;
            }
        }
        let v = verify_degraded(&spec.y_given_v()?, &spec.s_given_v()?, &matrix)?;
        worst = worst.max(v);
    }
    Ok(Check {
        name: "degradation identity".into(),
        passed: worst <= 1e-12 && invalid_rows == 0,
        detail: format!(
            "{cases} parameter triples, max violation {worst:.3e} (tol 1e-12), {invalid_rows} invalid witness rows"
        ),
    })
}

/// `Z^2 <= H(X|O) <= Z` on `cases` random joints (slack 1e-12). Half the
/// joints have exact zeros to exercise the boundary.
pub fn entropy_bounds(seed: u64, cases: usize) -> Check {
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for t in 0..cases {
        let mut rng = rng_for(seed ^ 0x7a68, t as u64);
        let outputs = rng.random_range(1..=6);
        let floor = if t % 2 == 0 { 0.0 } else { 1e-3 };
        let mut w: Vec<f64> = (0..2 * outputs)
            .map(|_| {
                if t % 2 == 0 && rng.random::<f64>() < 0.2 {
                    0.0
                } else {
                    floor + rng.random::<f64>()
                }
            })
            .collect();
        let total: f64 = w.iter().sum();
        if total == 0.0 {
            w[0] = 1.0;
        } else {
            w.iter_mut().for_each(|x| *x /= total);
        }
        let w1 = w.split_off(outputs);
        let Ok(j) = JointBase::new(w, w1) else {
            continue;
        };
        let z = bhattacharyya(&j);
        let h = conditional_entropy(&j);
        if z * z > h + 1e-12 || h > z + 1e-12 {
            violations += 1;
        }
        tightest = tightest.min((h - z * z).min(z - h));
    }
    Check {
        name: "entropy bounds".into(),
        passed: violations == 0,
        detail: format!("{cases} joints, {violations} violations (slack 1e-12), tightest margin {tightest:.3e}"),
    }
}

/// All suites at their acceptance sizes.
pub fn run_all(seed: u64) -> Result<Vec<Check>> {
    Ok(vec![
        sc_oracle(seed, 100)?,
        transform_identities(seed, 1000),
        capacity_crosscheck(DEFAULT_GRID_RESOLUTION)?,
        degradation_identity(seed, 100)?,
        entropy_bounds(seed, 10_000),
    ])
}
