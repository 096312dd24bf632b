use fio_butterfly::bench::generate_input;
use fio_butterfly::geometry::{build_corona_decomposition, FrequencyGrid, Region};
use fio_butterfly::kernels::{EllipsePhase, Phase, SphereNorm, SpherePhase};
use fio_butterfly::oracle::direct_apply_full;
use fio_butterfly::{Complex64, FioOperator, OperatorConfig, UnitAmplitude};
use proptest::prelude::*;

fn rel_diff(a: &[Complex64], b: &[Complex64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum();
    let den: f64 = b.iter().map(|y| y.norm_sqr()).sum();
    (num / den).sqrt()
}

fn ex1_operator(n: usize, q: usize) -> FioOperator<2, EllipsePhase, UnitAmplitude> {
    FioOperator::new(EllipsePhase, UnitAmplitude, OperatorConfig::new(n, q)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn classification_follows_sup_norm(log_n in 3u32..12, s in 1u32..11, k1 in any::<i64>(), k2 in any::<i64>()) {
        prop_assume!(s < log_n);
        let n = 1usize << log_n;
        let half = (n / 2) as i64;
        let xi = [k1.rem_euclid(n as i64) - half, k2.rem_euclid(n as i64) - half];
        let count = (log_n - s) as usize;
        let m = xi[0].unsigned_abs().max(xi[1].unsigned_abs()) as usize;
        let region = fio_butterfly::geometry::classify(&xi, n, count);
        match region {
            Region::Center => prop_assert!(m <= n >> (count + 1)),
            Region::Corona(j) => prop_assert!(n >> (j + 1) < m && m <= n >> j),
        }
    }

    #[test]
    fn phases_are_homogeneous(
        x in prop::array::uniform3(0.0f64..1.0),
        xi in prop::array::uniform3(-200.0f64..200.0),
        lambda in 0.01f64..50.0,
    ) {
        prop_assume!(xi.iter().any(|v| v.abs() > 1e-3));
        let x2 = [x[0], x[1]];
        let xi2 = [xi[0], xi[1]];
        let e = EllipsePhase.eval(&x2, &xi2);
        let scaled = EllipsePhase.eval(&x2, &xi2.map(|v| lambda * v));
        prop_assert!((scaled - lambda * e).abs() <= 1e-12 * (1.0 + (lambda * e).abs()));
        for p in [SpherePhase::new(SphereNorm::Sphere), SpherePhase::new(SphereNorm::Literal)] {
            let e = p.eval(&x, &xi);
            let scaled = p.eval(&x, &xi.map(|v| lambda * v));
            prop_assert!((scaled - lambda * e).abs() <= 1e-12 * (1.0 + (lambda * e).abs()));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn apply_is_linear(seed_f in any::<u64>(), seed_g in any::<u64>(), a in -2.0f64..2.0, b in -2.0f64..2.0, c in -2.0f64..2.0) {
        let op = ex1_operator(64, 5);
        let f = generate_input(64, 2, seed_f).unwrap();
        let g = generate_input(64, 2, seed_g).unwrap();
        let alpha = Complex64::new(a, b);
        let beta = Complex64::new(c, 0.5);
        let mix: Vec<Complex64> = f.iter().zip(&g).map(|(x, y)| alpha * x + beta * y).collect();
        let lhs = op.apply(&mix).unwrap();
        let uf = op.apply(&f).unwrap();
        let ug = op.apply(&g).unwrap();
        let rhs: Vec<Complex64> = uf.iter().zip(&ug).map(|(x, y)| alpha * x + beta * y).collect();
        prop_assert!(rel_diff(&lhs, &rhs) <= 1e-10);
    }

    #[test]
    fn corona_pieces_sum_to_the_whole(seed in any::<u64>()) {
        let n = 128;
        let op = ex1_operator(n, 5);
        let f = generate_input(n, 2, seed).unwrap();
        let whole = op.apply(&f).unwrap();
        let dec = op.decomposition();
        let mut sum = vec![Complex64::new(0.0, 0.0); f.len()];
        let sets = std::iter::once(dec.center()).chain((1..=dec.count()).map(|j| dec.corona(j)));
        for set in sets {
            let mut part = vec![Complex64::new(0.0, 0.0); f.len()];
            for &i in set {
                part[i] = f[i];
            }
            for (s, v) in sum.iter_mut().zip(op.apply(&part).unwrap()) {
                *s += v;
            }
        }
        prop_assert!(rel_diff(&sum, &whole) <= 1e-12);
    }
}

#[test]
fn decomposition_covers_every_frequency_once() {
    for (n, s) in [(64usize, 2u32), (128, 5), (256, 5)] {
        let dec = build_corona_decomposition::<2>(n, s).unwrap();
        let grid = FrequencyGrid::<2>::new(n).unwrap();
        let mut hits = vec![0u32; grid.len()];
        dec.center().iter().for_each(|&i| hits[i] += 1);
        (1..=dec.count()).for_each(|j| dec.corona(j).iter().for_each(|&i| hits[i] += 1));
        assert!(hits.iter().all(|&h| h == 1), "n = {n}");
    }
    // center of N = 256, s = 5 is the 33 x 33 block |ξ|∞ ≤ 16
    assert_eq!(build_corona_decomposition::<2>(256, 5).unwrap().center().len(), 33 * 33);
}

#[test]
fn restricted_direct_sums_regroup_exactly() {
    let n = 32;
    let dec = build_corona_decomposition::<2>(n, 2).unwrap();
    let f = generate_input(n, 2, 6).unwrap();
    let full = direct_apply_full(&EllipsePhase, &UnitAmplitude, n, &f).unwrap();
    let mut sum = vec![Complex64::new(0.0, 0.0); f.len()];
    let sets = std::iter::once(dec.center()).chain((1..=dec.count()).map(|j| dec.corona(j)));
    for set in sets {
        let mut part = vec![Complex64::new(0.0, 0.0); f.len()];
        for &i in set {
            part[i] = f[i];
        }
        let u = direct_apply_full(&EllipsePhase, &UnitAmplitude, n, &part).unwrap();
        sum.iter_mut().zip(u).for_each(|(s, v)| *s += v);
    }
    assert!(rel_diff(&sum, &full) <= 1e-12);
}

#[test]
fn single_thread_reruns_are_bit_identical() {
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let op = ex1_operator(128, 5);
    let f = generate_input(128, 2, 42).unwrap();
    let a = pool.install(|| op.apply(&f).unwrap());
    let b = pool.install(|| op.apply(&f).unwrap());
    assert!(a.iter().zip(&b).all(|(x, y)| x.re.to_bits() == y.re.to_bits() && x.im.to_bits() == y.im.to_bits()));
}

#[test]
fn thread_count_does_not_change_the_result() {
    let op = ex1_operator(64, 7);
    let f = generate_input(64, 2, 5).unwrap();
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap().install(|| op.apply(&f).unwrap());
    let four = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap().install(|| op.apply(&f).unwrap());
    // every output block is written by exactly one task
    assert_eq!(one, four);
}
