use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use dualkit_core::boxworld::{check_local_exchangeability, pr_box_k};
use dualkit_core::gpt::make_classical;
use dualkit_core::mixedness::{birkhoff_rare_synthesis, more_mixed};
use dualkit_core::quantum::{entanglement_of_formation, schmidt_decompose, EofBudget};
use dualkit_core::sampling;
use std::hint::black_box;

fn orbit_lp(c: &mut Criterion) {
    let mut g = c.benchmark_group("orbit_lp");
    for n in [3usize, 4, 5] {
        let sys = make_classical(n).unwrap();
        let mut rng = sampling::rng(1, n as u64);
        let p = sampling::random_probability(&mut rng, n);
        let q: Vec<f64> = p.iter().map(|x| 0.5 * x + 0.5 / n as f64).collect();
        let rho = sys.state_from_slice(&p).unwrap();
        let sigma = sys.state_from_slice(&q).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| more_mixed(black_box(&rho), black_box(&sigma)).unwrap())
        });
    }
    g.finish();
}

fn birkhoff(c: &mut Criterion) {
    let mut g = c.benchmark_group("birkhoff");
    for n in [3usize, 4, 6] {
        let mut rng = sampling::rng(2, n as u64);
        let p = sampling::random_probability(&mut rng, n);
        let mut q: Vec<f64> = p.iter().map(|x| 0.3 * x + 0.7 / n as f64).collect();
        q.reverse();
        g.bench_with_input(BenchmarkId::from_parameter(n), &n, |b, _| {
            b.iter(|| birkhoff_rare_synthesis(black_box(&p), black_box(&q)).unwrap())
        });
    }
    g.finish();
}

fn schmidt(c: &mut Criterion) {
    let mut g = c.benchmark_group("schmidt");
    for d in [2usize, 4, 8, 16] {
        let mut rng = sampling::rng(3, d as u64);
        let psi = sampling::random_pure_bipartite(&mut rng, d, d);
        g.bench_with_input(BenchmarkId::from_parameter(d), &d, |b, _| {
            b.iter(|| schmidt_decompose(black_box(&psi)))
        });
    }
    g.finish();
}

fn eof(c: &mut Criterion) {
    let mut g = c.benchmark_group("eof");
    g.sample_size(10);
    for rank in [2usize, 4] {
        let mut rng = sampling::rng(4, rank as u64);
        let rho = sampling::random_density(&mut rng, 4, rank);
        g.bench_with_input(BenchmarkId::new("rank", rank), &rank, |b, _| {
            b.iter(|| entanglement_of_formation(black_box(&rho), &EofBudget::default(), 0).unwrap())
        });
    }
    g.finish();
}

fn local_exchange(c: &mut Criterion) {
    let mut g = c.benchmark_group("local_exchange_search");
    g.sample_size(10);
    for k in [2usize, 3, 4, 5] {
        let bx = pr_box_k(k, k, k).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(k), &k, |b, _| {
            b.iter(|| check_local_exchangeability(black_box(&bx)).unwrap())
        });
    }
    g.finish();
}

criterion_group!(benches, orbit_lp, birkhoff, schmidt, eof, local_exchange);
criterion_main!(benches);
