//! Parallel vs sequential comparison for the data-parallel inner loops.
//! Placeholder target; filled in once the core modules exist.

use criterion::{criterion_group, criterion_main, Criterion};

fn bench_placeholder(c: &mut Criterion) {
    c.bench_function("noop", |b| b.iter(|| 1 + 1));
}

criterion_group!(benches, bench_placeholder);
criterion_main!(benches);
