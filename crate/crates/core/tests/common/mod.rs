//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use crn_core::linalg::{self, Matrix};
use crn_core::network::{MassActionSystem, Network};
use crn_core::transforms::AffineMap;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn log_uniform<R: Rng>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// Random invertible affine map on ℝⁿ with condition number at most `max_cond`.
pub fn random_affine<R: Rng>(rng: &mut R, n: usize, max_cond: f64) -> AffineMap {
    loop {
        let m = Matrix::from_fn(n, n, |_, _| rng.gen_range(-2.0..2.0));
        if linalg::condition_number(&m) > max_cond {
            continue;
        }
        let b = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        if let Ok(a) = AffineMap::new(m, b) {
            return a;
        }
    }
}

/// Sum over spanning trees oriented toward `root` of the product of edge
/// rates, by enumerating one outgoing edge per non-root vertex.
pub fn brute_force_tree_constant(m: usize, edges: &[(usize, usize, f64)], root: usize) -> f64 {
    let out: Vec<Vec<(usize, f64)>> = (0..m)
        .map(|v| edges.iter().filter(|e| e.0 == v).map(|e| (e.1, e.2)).collect())
        .collect();
    let others: Vec<usize> = (0..m).filter(|&v| v != root).collect();
    let mut total = 0.0;
    let mut choice = vec![0usize; others.len()];
    loop {
        if others.iter().all(|&v| !out[v].is_empty()) {
            let mut next = vec![usize::MAX; m];
            let mut product = 1.0;
            for (k, &v) in others.iter().enumerate() {
                let (to, rate) = out[v][choice[k]];
                next[v] = to;
                product *= rate;
            }
            let reaches_root = others.iter().all(|&start| {
                let mut v = start;
                for _ in 0..m {
                    if v == root {
                        return true;
                    }
                    v = next[v];
                }
                v == root
            });
            if reaches_root {
                total += product;
            }
        } else {
            return 0.0;
        }
        // advance the mixed-radix counter
        let mut k = 0;
        loop {
            if k == others.len() {
                return total;
            }
            choice[k] += 1;
            if choice[k] < out[others[k]].len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Random strongly connected digraph on `m` vertices: a Hamiltonian cycle in
/// random order plus random extra edges, all with random rates.
pub fn random_strongly_connected<R: Rng>(rng: &mut R, m: usize) -> Vec<(usize, usize, f64)> {
    let mut order: Vec<usize> = (0..m).collect();
    order.shuffle(rng);
    let mut edges: Vec<(usize, usize)> = (0..m).map(|k| (order[k], order[(k + 1) % m])).collect();
    if m == 1 {
        edges.clear();
    }
    for i in 0..m {
        for j in 0..m {
            if i != j && !edges.contains(&(i, j)) && rng.gen_bool(0.4) {
                edges.push((i, j));
            }
        }
    }
    edges.into_iter().map(|(i, j)| (i, j, log_uniform(rng, 0.1, 10.0))).collect()
}

/// Random distinct integer points in `[0, 3]ⁿ`, widened when that box is too
/// small to hold `count` points.
pub fn random_points<R: Rng>(rng: &mut R, n: usize, count: usize) -> Vec<Vec<f64>> {
    let mut side = 4u32;
    while (side as usize).pow(n as u32) < 2 * count {
        side += 1;
    }
    let mut pts: Vec<Vec<f64>> = Vec::new();
    while pts.len() < count {
        let p: Vec<f64> = (0..n).map(|_| f64::from(rng.gen_range(0..side))).collect();
        if !pts.contains(&p) {
            pts.push(p);
        }
    }
    pts
}

/// Random mass-action system with `m` vertices in ℝⁿ and random edges.
pub fn random_system<R: Rng>(rng: &mut R, n: usize, m: usize) -> MassActionSystem {
    let vertices = random_points(rng, n, m);
    let mut edges = Vec::new();
    for i in 0..m {
        for j in 0..m {
            if i != j && rng.gen_bool(0.35) {
                edges.push((i, j, log_uniform(rng, 0.1, 10.0)));
            }
        }
    }
    if edges.is_empty() {
        edges.push((0, 1, 1.0));
    }
    MassActionSystem::from_parts(n, vertices, &edges).unwrap()
}

/// Complex-balanced system at a random positive `x*`: the reaction fluxes at
/// `x*` are a positive sum of random cycle circulations.
pub fn random_complex_balanced<R: Rng>(rng: &mut R, n: usize, m: usize) -> (MassActionSystem, Vec<f64>) {
    let vertices = random_points(rng, n, m);
    let x_star: Vec<f64> = (0..n).map(|_| log_uniform(rng, 0.3, 3.0)).collect();
    let mut flux: Vec<Vec<f64>> = vec![vec![0.0; m]; m];
    for _ in 0..rng.gen_range(1..=3) {
        let len = rng.gen_range(2..=m);
        let mut cycle: Vec<usize> = (0..m).collect();
        cycle.shuffle(rng);
        cycle.truncate(len);
        let f = log_uniform(rng, 0.2, 5.0);
        for k in 0..len {
            flux[cycle[k]][cycle[(k + 1) % len]] += f;
        }
    }
    let mut edges = Vec::new();
    for i in 0..m {
        let mono = linalg::monomial_eval(&x_star, &vertices[i]).unwrap();
        for (j, &f) in flux[i].iter().enumerate() {
            if f > 0.0 {
                edges.push((i, j, f / mono));
            }
        }
    }
    (MassActionSystem::from_parts(n, vertices, &edges).unwrap(), x_star)
}

pub fn network_of(sys: &MassActionSystem) -> Network {
    sys.network().clone()
}
