//! Sequential vs data-parallel kernel timings on a 512x512 working set.
//!
//! Both code paths are always compiled; the `parallel` feature only picks
//! which one the library calls. Run with `cargo bench --bench kernels`.

use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};
use lsbmark::keystream::Keystream;
use lsbmark::kernels;
use lsbmark::{Argb, ArgbImage};

const SIDE: u32 = 512;

fn image(seed: u64) -> ArgbImage {
    let mut s = Keystream::from_seed(seed);
    let pixels = (0..(SIDE * SIDE) as usize)
        .map(|_| {
            let v = s.next_u64();
            Argb::new((v >> 24) as u8, (v >> 16) as u8, (v >> 8) as u8, v as u8)
        })
        .collect();
    ArgbImage::new(SIDE, SIDE, pixels).unwrap()
}

fn bytes(seed: u64, len: usize) -> Vec<u8> {
    let mut s = Keystream::from_seed(seed);
    (0..len).map(|_| s.next_u64() as u8).collect()
}

fn bench_sq_diff_sum(c: &mut Criterion) {
    let a = image(1);
    let b = image(2);
    let mut group = c.benchmark_group("sq_diff_sum_argb");
    group.bench_function(BenchmarkId::from_parameter("seq"), |bench| {
        bench.iter(|| kernels::sq_diff_sum_argb_seq(black_box(a.pixels()), black_box(b.pixels())))
    });
    group.bench_function(BenchmarkId::from_parameter("par"), |bench| {
        bench.iter(|| kernels::sq_diff_sum_argb_par(black_box(a.pixels()), black_box(b.pixels())))
    });
    group.finish();
}

fn bench_corr_moments(c: &mut Criterion) {
    let a = bytes(3, (SIDE * SIDE) as usize);
    let b = bytes(4, (SIDE * SIDE) as usize);
    let mut group = c.benchmark_group("corr_moments");
    group.bench_function(BenchmarkId::from_parameter("seq"), |bench| {
        bench.iter(|| kernels::corr_moments_seq(black_box(&a), black_box(&b)))
    });
    group.bench_function(BenchmarkId::from_parameter("par"), |bench| {
        bench.iter(|| kernels::corr_moments_par(black_box(&a), black_box(&b)))
    });
    group.finish();
}

fn bench_bit_diff_count(c: &mut Criterion) {
    let a = bytes(5, 4 * (SIDE * SIDE) as usize);
    let b = bytes(6, 4 * (SIDE * SIDE) as usize);
    let mut group = c.benchmark_group("bit_diff_count");
    group.bench_function(BenchmarkId::from_parameter("seq"), |bench| {
        bench.iter(|| kernels::bit_diff_count_seq(black_box(&a), black_box(&b)))
    });
    group.bench_function(BenchmarkId::from_parameter("par"), |bench| {
        bench.iter(|| kernels::bit_diff_count_par(black_box(&a), black_box(&b)))
    });
    group.finish();
}

fn bench_map_pixels(c: &mut Criterion) {
    let img = image(7);
    // zero-lsb shaped map: mask the low bits of every channel
    let clear = |_: usize, p: Argb| p.map(|ch| ch & !0b11);
    let mut group = c.benchmark_group("map_pixels/zero_lsb");
    group.bench_function(BenchmarkId::from_parameter("seq"), |bench| {
        bench.iter(|| kernels::map_pixels_seq(black_box(img.pixels()), clear))
    });
    group.bench_function(BenchmarkId::from_parameter("par"), |bench| {
        bench.iter(|| kernels::map_pixels_par(black_box(img.pixels()), clear))
    });
    group.finish();

    // noise shaped map: four keyed samples per pixel
    let noise = |idx: usize, p: Argb| {
        let base = 4 * idx as u64;
        let mut chan = 0u64;
        p.map(|ch| {
            let raw = Keystream::value_at(9, base + chan);
            chan += 1;
            let delta = (raw % 9) as i16 - 4;
            (ch as i16 + delta).clamp(0, 255) as u8
        })
    };
    let mut group = c.benchmark_group("map_pixels/noise");
    group.bench_function(BenchmarkId::from_parameter("seq"), |bench| {
        bench.iter(|| kernels::map_pixels_seq(black_box(img.pixels()), noise))
    });
    group.bench_function(BenchmarkId::from_parameter("par"), |bench| {
        bench.iter(|| kernels::map_pixels_par(black_box(img.pixels()), noise))
    });
    group.finish();
}

fn bench_gather_bytes(c: &mut Criterion) {
    let img = image(8);
    let n = (SIDE * SIDE) as usize;
    // payload-read shaped gather over a keyed permutation of most of the
    // image
    let plan = lsbmark::keystream::derive_permutation(
        &lsbmark::SecretKey::new(b"bench".to_vec()).unwrap(),
        n,
        n - 8,
    )
    .unwrap();
    let decode = |p: Argb| ((p.a & 3) << 6) | ((p.r & 3) << 4) | ((p.g & 3) << 2) | (p.b & 3);
    let mut group = c.benchmark_group("gather_bytes");
    group.bench_function(BenchmarkId::from_parameter("seq"), |bench| {
        bench.iter(|| kernels::gather_bytes_seq(black_box(img.pixels()), black_box(plan.indices()), decode))
    });
    group.bench_function(BenchmarkId::from_parameter("par"), |bench| {
        bench.iter(|| kernels::gather_bytes_par(black_box(img.pixels()), black_box(plan.indices()), decode))
    });
    group.finish();
}

criterion_group!(
    kernels_bench,
    bench_sq_diff_sum,
    bench_corr_moments,
    bench_bit_diff_count,
    bench_map_pixels,
    bench_gather_bytes
);
criterion_main!(kernels_bench);
